//! Sampling multiplicities for the full-availability design.
//!
//! With all `N` packets available the aligned error covariance is diagonal and
//! the MSE is `sum_j lambda_j s2 / (s2 + lambda_j s_j)`. Relaxing `s_j` to reals
//! gives a water-filling problem whose KKT point is
//! `zeta_j = sigma / sqrt(beta_t) - s2 / lambda_j` on the `t` strongest
//! coordinates. The relaxed solution is then rounded back to integers that sum
//! to `N * m`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

/// Packet geometry and noise level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    /// Ambient dimension `M`.
    pub dim: usize,
    /// Subspace dimension `m` of every packet.
    pub subspace_dim: usize,
    /// Number of packets `N`.
    pub packets: usize,
    /// Noise variance per measured coefficient.
    pub sigma2: f64,
}

impl DesignParams {
    pub fn new(dim: usize, subspace_dim: usize, packets: usize, sigma2: f64) -> Result<Self> {
        let p = Self {
            dim,
            subspace_dim,
            packets,
            sigma2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.subspace_dim == 0 || self.packets == 0 {
            return Err(Error::InvalidParams("M, m and N must be positive".into()));
        }
        if self.subspace_dim > self.dim {
            return Err(Error::InvalidParams(format!(
                "subspace dimension {} exceeds ambient dimension {}",
                self.subspace_dim, self.dim
            )));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "sigma2 must be positive, got {}",
                self.sigma2
            )));
        }
        Ok(())
    }

    /// Total number of probes `N * m`.
    pub fn total_probes(&self) -> usize {
        self.packets * self.subspace_dim
    }
}

/// Relaxed water-filling solution on the sorted spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct Waterfill {
    /// Continuous multiplicities in sorted (nonincreasing eigenvalue) order.
    pub zeta: Vec<f64>,
    /// Number of coordinates with a nonzero relaxed share.
    pub active: usize,
    pub sqrt_beta: f64,
}

/// Solves the relaxed allocation with the iterative nonnegativity threshold.
pub fn waterfill(spectrum: &Spectrum, params: &DesignParams) -> Result<Waterfill> {
    params.validate()?;
    if spectrum.dim() != params.dim {
        return Err(Error::DimensionMismatch {
            expected: params.dim,
            actual: spectrum.dim(),
        });
    }
    Ok(waterfill_sorted(
        &spectrum.sorted(),
        params.total_probes() as f64,
        params.sigma2,
    ))
}

/// Water-filling on eigenvalues already sorted in nonincreasing order.
pub fn waterfill_sorted(sorted: &[f64], total: f64, sigma2: f64) -> Waterfill {
    let sigma = sigma2.sqrt();
    let dim = sorted.len();
    let mut active = dim;
    loop {
        let inv_sum: f64 = sorted[..active].iter().map(|l| 1.0 / l).sum();
        let sqrt_beta = active as f64 * sigma / (total + sigma2 * inv_sum);
        let level = sigma / sqrt_beta;
        let mut zeta: Vec<f64> = sorted[..active]
            .iter()
            .map(|l| level - sigma2 / l)
            .collect();
        // Shares decrease along the sorted spectrum, so the negative ones
        // form a suffix; drop all of them at once.
        let keep = zeta.iter().take_while(|z| **z >= 0.0).count().max(1);
        if keep == active {
            zeta.resize(dim, 0.0);
            return Waterfill {
                zeta,
                active,
                sqrt_beta,
            };
        }
        active = keep;
    }
}

/// How the relaxed solution becomes an integer allocation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rounding {
    /// Nearest integer, then fix the sum on the largest rounding distances.
    #[default]
    Nearest,
    /// Marginal-gain greedy; integer optimal for this separable convex cost.
    Greedy,
}

/// Rounds relaxed shares to integers summing to `target`, each capped at `cap`.
///
/// Every share is first rounded to its nearest integer (halves go up). If the
/// total overshoots, the coordinates that were rounded up the farthest are
/// floored instead; if it undershoots, the ones rounded down the farthest are
/// raised. On equal distance the earlier (larger eigenvalue) coordinate keeps
/// the larger value.
pub fn round_allocation(zeta: &[f64], target: usize, cap: usize) -> Result<Vec<usize>> {
    if target > cap * zeta.len() {
        return Err(Error::InvalidParams(format!(
            "cannot place {target} probes on {} coordinates with cap {cap}",
            zeta.len()
        )));
    }
    let mut s: Vec<i64> = zeta
        .iter()
        .map(|z| (z + 0.5).floor().max(0.0) as i64)
        .collect();
    let dist: Vec<f64> = zeta
        .iter()
        .zip(&s)
        .map(|(z, r)| (z - *r as f64).abs())
        .collect();
    let mut excess: i64 = s.iter().sum::<i64>() - target as i64;

    if excess > 0 {
        let mut cand: Vec<usize> = (0..zeta.len()).filter(|&j| s[j] as f64 > zeta[j]).collect();
        cand.sort_by(|&a, &b| dist[b].total_cmp(&dist[a]).then(b.cmp(&a)));
        for j in cand {
            if excess == 0 {
                break;
            }
            s[j] -= 1;
            excess -= 1;
        }
    } else if excess < 0 {
        let mut cand: Vec<usize> = (0..zeta.len())
            .filter(|&j| (s[j] as f64) < zeta[j])
            .collect();
        cand.sort_by(|&a, &b| dist[b].total_cmp(&dist[a]).then(a.cmp(&b)));
        for j in cand {
            if excess == 0 {
                break;
            }
            s[j] += 1;
            excess += 1;
        }
    }
    // Candidates run out only when the shares do not sum to the target.
    // Settle the remainder on the largest shares.
    let mut by_share: Vec<usize> = (0..zeta.len()).collect();
    by_share.sort_by(|&a, &b| zeta[b].total_cmp(&zeta[a]).then(a.cmp(&b)));
    while excess != 0 {
        let step = if excess > 0 { -1 } else { 1 };
        let j = by_share
            .iter()
            .copied()
            .find(|&j| {
                if step < 0 {
                    s[j] > 0
                } else {
                    s[j] < cap as i64
                }
            })
            .ok_or(Error::Infeasible)?;
        s[j] += step;
        excess += step;
    }

    let cap = cap as i64;
    let mut spill = 0;
    for v in s.iter_mut() {
        if *v > cap {
            spill += *v - cap;
            *v = cap;
        }
    }
    for &j in &by_share {
        if spill == 0 {
            break;
        }
        let room = (cap - s[j]).min(spill);
        s[j] += room;
        spill -= room;
    }
    Ok(s.into_iter().map(|v| v as usize).collect())
}

/// Integer-optimal allocation by marginal MSE decrease, on sorted eigenvalues.
pub fn greedy_allocation(sorted: &[f64], sigma2: f64, target: usize, cap: usize) -> Vec<usize> {
    let term = |l: f64, s: usize| l * sigma2 / (sigma2 + l * s as f64);
    let mut s = vec![0usize; sorted.len()];
    for _ in 0..target {
        let mut best: Option<(usize, f64)> = None;
        for (j, &l) in sorted.iter().enumerate() {
            if s[j] >= cap {
                continue;
            }
            let gain = term(l, s[j]) - term(l, s[j] + 1);
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((j, gain));
            }
        }
        match best {
            Some((j, _)) => s[j] += 1,
            None => break,
        }
    }
    s
}

/// Closed-form MSE with every packet available.
pub fn mse_all_packets(lambdas: &[f64], sigma2: f64, s: &[usize]) -> f64 {
    lambdas
        .iter()
        .zip(s)
        .map(|(&l, &c)| l * sigma2 / (sigma2 + l * c as f64))
        .sum()
}

/// Shorthand `[x1]^y1[x2]^y2..` for runs of equal values; exponent 1 is omitted.
pub fn s_pattern(values: &[usize]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < values.len() {
        let run = values[i..].iter().take_while(|v| **v == values[i]).count();
        out.push_str(&format!("[{}]", values[i]));
        if run > 1 {
            out.push_str(&format!("^{run}"));
        }
        i += run;
    }
    out
}

/// Complete design for a spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AllocationResult {
    /// Relaxed shares, sorted-spectrum order.
    pub zeta: Vec<f64>,
    /// Coordinates with nonzero relaxed share.
    pub active: usize,
    /// Coordinates probed at least once after rounding (the tabulated `t`).
    pub t: usize,
    pub sqrt_beta: f64,
    /// Integer multiplicities in original index order.
    pub s: Vec<usize>,
    pub mse_n: f64,
    pub base_point: f64,
    /// `base_point - mse_n`.
    pub max_delta: f64,
    pub pattern: String,
    pub rounding: Rounding,
}

pub fn allocate(spectrum: &Spectrum, params: &DesignParams) -> Result<AllocationResult> {
    allocate_with(spectrum, params, Rounding::Nearest)
}

pub fn allocate_with(
    spectrum: &Spectrum,
    params: &DesignParams,
    rounding: Rounding,
) -> Result<AllocationResult> {
    let wf = waterfill(spectrum, params)?;
    let target = params.total_probes();
    let sorted_s = match rounding {
        Rounding::Nearest => round_allocation(&wf.zeta, target, params.packets)?,
        Rounding::Greedy => {
            greedy_allocation(&spectrum.sorted(), params.sigma2, target, params.packets)
        }
    };
    let mut s = vec![0; spectrum.dim()];
    for (pos, &j) in spectrum.order().iter().enumerate() {
        s[j] = sorted_s[pos];
    }
    let mse_n = mse_all_packets(spectrum.lambdas(), params.sigma2, &s);
    let t = sorted_s.iter().rposition(|v| *v > 0).map_or(0, |p| p + 1);
    let shown = s.iter().rposition(|v| *v > 0).map_or(0, |p| p + 1);
    Ok(AllocationResult {
        pattern: s_pattern(&s[..shown]),
        zeta: wf.zeta,
        active: wf.active,
        t,
        sqrt_beta: wf.sqrt_beta,
        s,
        mse_n,
        base_point: spectrum.base_point(),
        max_delta: spectrum.base_point() - mse_n,
        rounding,
    })
}
