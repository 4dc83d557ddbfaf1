//! Closed-form MSE for packet subsets and progressive-recovery profiles.
//!
//! With aligned packets, a subset `K` leaves coordinate `j` probed `c_j` times
//! and the error covariance stays diagonal, so
//! `MSE(K) = sum_j lambda_j - sum_j c_j lambda_j^2 / (s2 + c_j lambda_j)`.
//! A profile evaluates this for every one of the `2^N` subsets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrangement::Arrangement;
use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

/// Reduction `c lambda^2 / (s2 + c lambda)` for one coordinate probed `c` times.
#[inline]
pub fn gain(lambda: f64, sigma2: f64, c: usize) -> f64 {
    if c == 0 {
        0.0
    } else {
        let c = c as f64;
        c * lambda * lambda / (sigma2 + c * lambda)
    }
}

/// MSE for a combined multiplicity vector.
pub fn mse_from_counts(lambdas: &[f64], sigma2: f64, counts: &[usize]) -> f64 {
    let base: f64 = lambdas.iter().sum();
    base - lambdas
        .iter()
        .zip(counts)
        .map(|(&l, &c)| gain(l, sigma2, c))
        .sum::<f64>()
}

fn check_dims(spectrum: &Spectrum, arrangement: &Arrangement) -> Result<()> {
    if spectrum.dim() != arrangement.dim() {
        return Err(Error::DimensionMismatch {
            expected: spectrum.dim(),
            actual: arrangement.dim(),
        });
    }
    Ok(())
}

/// MSE when exactly the packets in `subset` (0-based) are available.
pub fn mse_subset(
    spectrum: &Spectrum,
    sigma2: f64,
    arrangement: &Arrangement,
    subset: &[usize],
) -> Result<f64> {
    check_dims(spectrum, arrangement)?;
    let counts = arrangement.subset_multiplicity(subset)?;
    Ok(mse_from_counts(spectrum.lambdas(), sigma2, &counts))
}

/// `base_point - mse_subset`.
pub fn delta(
    spectrum: &Spectrum,
    sigma2: f64,
    arrangement: &Arrangement,
    subset: &[usize],
) -> Result<f64> {
    Ok(spectrum.base_point() - mse_subset(spectrum, sigma2, arrangement, subset)?)
}

/// Exact statistics over all subsets of one size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub ell: usize,
    pub mse_min: f64,
    pub mse_mean: f64,
    pub mse_max: f64,
    pub delta_mean: f64,
    /// Population variance of the reduction.
    pub delta_var: f64,
}

impl LevelStats {
    /// `delta_var / delta_mean^2`; zero when the mean vanishes.
    pub fn normalized_var(&self) -> f64 {
        if self.delta_mean > 0.0 {
            self.delta_var / (self.delta_mean * self.delta_mean)
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MseProfile {
    pub arrangement_id: String,
    pub base_point: f64,
    /// Indexed by `ell` in `0..=N`.
    pub levels: Vec<LevelStats>,
    pub score: f64,
}

impl MseProfile {
    pub fn packets(&self) -> usize {
        self.levels.len() - 1
    }

    /// RMS of the normalized variances over `ell` in `1..=min(horizon, N - 1)`.
    pub fn score_up_to(&self, horizon: usize) -> f64 {
        let top = horizon.min(self.packets().saturating_sub(1));
        if top == 0 {
            return 0.0;
        }
        let sum: f64 = self.levels[1..=top]
            .iter()
            .map(|l| l.normalized_var().powi(2))
            .sum();
        (sum / top as f64).sqrt()
    }

    /// Smallest `ell0` with `delta_var < eps` on every level from `ell0` to `N`.
    pub fn threshold(&self, eps: f64) -> usize {
        let n = self.packets();
        let mut ell0 = n + 1;
        for ell in (1..=n).rev() {
            if self.levels[ell].delta_var < eps {
                ell0 = ell;
            } else {
                break;
            }
        }
        ell0
    }
}

#[derive(Clone, Copy, Default)]
struct Acc {
    count: u64,
    min: f64,
    max: f64,
    mean: f64,
    m2: f64,
}

impl Acc {
    fn push(&mut self, x: f64) {
        if self.count == 0 {
            self.min = x;
            self.max = x;
        } else {
            self.min = self.min.min(x);
            self.max = self.max.max(x);
        }
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }
}

/// Exact per-level statistics over all `2^N` packet subsets.
///
/// Subsets are visited in Gray-code order so each step adds or removes one
/// block; the reduction itself is re-summed over the support each time so
/// every value is independent of the visiting path.
pub fn profile(spectrum: &Spectrum, sigma2: f64, arrangement: &Arrangement) -> Result<MseProfile> {
    check_dims(spectrum, arrangement)?;
    let n = arrangement.packets();
    if n >= 31 {
        return Err(Error::InvalidParams(format!(
            "{n} packets is too many for exhaustive subset statistics"
        )));
    }
    let lambdas = spectrum.lambdas();
    let support: Vec<usize> = {
        let mut s: Vec<usize> = arrangement.blocks().iter().flatten().copied().collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let mut slot = vec![usize::MAX; spectrum.dim()];
    for (i, &j) in support.iter().enumerate() {
        slot[j] = i;
    }
    let blocks: Vec<Vec<usize>> = arrangement
        .blocks()
        .iter()
        .map(|b| b.iter().map(|&j| slot[j]).collect())
        .collect();
    // table[i * (n + 1) + c] is the gain of support coordinate i probed c times.
    let table: Vec<f64> = support
        .iter()
        .flat_map(|&j| (0..=n).map(move |c| gain(lambdas[j], sigma2, c)))
        .collect();

    let base = spectrum.base_point();
    let mut acc = vec![Acc::default(); n + 1];
    acc[0].push(0.0);
    let mut counts = vec![0usize; support.len()];
    let mut mask: u32 = 0;
    for step in 1u32..(1u32 << n) {
        let k = step.trailing_zeros() as usize;
        mask ^= 1 << k;
        if mask & (1 << k) != 0 {
            for &i in &blocks[k] {
                counts[i] += 1;
            }
        } else {
            for &i in &blocks[k] {
                counts[i] -= 1;
            }
        }
        let d: f64 = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| table[i * (n + 1) + c])
            .sum();
        acc[mask.count_ones() as usize].push(d);
    }

    let levels: Vec<LevelStats> = acc
        .iter()
        .enumerate()
        .map(|(ell, a)| LevelStats {
            ell,
            mse_min: base - a.max,
            mse_mean: base - a.mean,
            mse_max: base - a.min,
            delta_mean: a.mean,
            delta_var: (a.m2 / a.count as f64).max(0.0),
        })
        .collect();
    let mut p = MseProfile {
        arrangement_id: arrangement.id(),
        base_point: base,
        levels,
        score: 0.0,
    };
    p.score = p.score_up_to(n);
    Ok(p)
}

/// Profiles in input order, evaluated in parallel.
pub fn profile_all(
    spectrum: &Spectrum,
    sigma2: f64,
    arrangements: &[Arrangement],
) -> Result<Vec<MseProfile>> {
    arrangements
        .par_iter()
        .map(|a| profile(spectrum, sigma2, a))
        .collect()
}

/// Smoothness threshold shared by every profile: least `ell0` in `1..=N` such
/// that all variances from `ell0` on are below `eps`, or `N + 1`.
pub fn smoothness_threshold(profiles: &[MseProfile], eps: f64) -> Result<usize> {
    let first = profiles.first().ok_or(Error::Empty("profiles"))?;
    let n = first.packets();
    if profiles.iter().any(|p| p.packets() != n) {
        return Err(Error::InvalidParams(
            "profiles disagree on the number of packets".into(),
        ));
    }
    Ok(profiles.iter().map(|p| p.threshold(eps)).max().unwrap_or(1))
}

/// Profiles ordered smoothest first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedDesign {
    pub entries: Vec<RankedEntry>,
    /// Levels `1..=horizon` entered the score.
    pub horizon: usize,
    /// Lowest `mse_min` at `ell = horizon` over all profiles.
    pub best_mse: f64,
    /// `(eps, delta_eps)` pairs over the whole list.
    pub delta_epsilon: Vec<(f64, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub score: f64,
    pub profile: MseProfile,
}

impl RankedDesign {
    pub fn best(&self) -> &MseProfile {
        &self.entries[0].profile
    }
}

/// Ranks by full smoothness score, ties broken by arrangement ID.
pub fn rank(profiles: &[MseProfile], epsilons: &[f64]) -> Result<RankedDesign> {
    let n = profiles.first().ok_or(Error::Empty("profiles"))?.packets();
    rank_up_to(profiles, n, epsilons)
}

/// Ranks on levels `1..=horizon` only, for when at most `horizon` packets
/// will ever arrive.
pub fn adaptive_truncate(
    profiles: &[MseProfile],
    horizon: usize,
    epsilons: &[f64],
) -> Result<RankedDesign> {
    rank_up_to(profiles, horizon, epsilons)
}

fn rank_up_to(profiles: &[MseProfile], horizon: usize, epsilons: &[f64]) -> Result<RankedDesign> {
    let n = profiles.first().ok_or(Error::Empty("profiles"))?.packets();
    if horizon == 0 || horizon > n {
        return Err(Error::InvalidParams(format!(
            "truncation level {horizon} outside 1..={n}"
        )));
    }
    let delta_epsilon = epsilons
        .iter()
        .map(|&e| smoothness_threshold(profiles, e).map(|d| (e, d)))
        .collect::<Result<Vec<_>>>()?;
    let mut entries: Vec<RankedEntry> = profiles
        .iter()
        .map(|p| RankedEntry {
            score: p.score_up_to(horizon),
            profile: p.clone(),
        })
        .collect();
    entries.sort_by(|a, b| {
        a.score
            .total_cmp(&b.score)
            .then_with(|| a.profile.arrangement_id.cmp(&b.profile.arrangement_id))
    });
    let best_mse = profiles
        .iter()
        .map(|p| p.levels[horizon].mse_min)
        .fold(f64::INFINITY, f64::min);
    Ok(RankedDesign {
        entries,
        horizon,
        best_mse,
        delta_epsilon,
    })
}
