//! Fusion-frame bounds and packet-erasure analysis.
//!
//! The packet subspaces form a fusion frame with bounds `A I <= sum_k P_k <= B I`.
//! For a tight frame (`A = B = L / M`, `L` the total number of probes) the
//! no-erasure MSE and the extra error caused by losing the packets in `Ξ`
//! have closed forms in terms of `alpha_j = lambda_j / (s2 + (L/M) lambda_j)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::arrangement::Arrangement;
use crate::error::{Error, Result};
use crate::estimator::MeasurementSetup;
use crate::linalg::{check_orthonormal, symmetric_extremes};
use crate::mse::mse_subset;
use crate::spectrum::Spectrum;

const TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub a: f64,
    pub b: f64,
    pub tight: bool,
    pub parseval: bool,
}

impl FrameBounds {
    fn new(a: f64, b: f64) -> Self {
        let tight = (b - a).abs() <= TOL;
        Self {
            a,
            b,
            tight,
            parseval: tight && (a - 1.0).abs() <= TOL,
        }
    }
}

/// Bounds of an aligned arrangement: the frame operator is `diag(multiplicity)`.
pub fn frame_bounds_aligned(arrangement: &Arrangement) -> FrameBounds {
    let c = arrangement.multiplicity();
    let a = *c.iter().min().expect("nonempty dimension") as f64;
    let b = *c.iter().max().expect("nonempty dimension") as f64;
    FrameBounds::new(a, b)
}

/// Frame operator `sum_k U_k U_kᵀ`.
pub fn frame_operator(bases: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    let first = bases.first().ok_or(Error::Empty("bases"))?;
    let dim = first.nrows();
    let mut s = DMatrix::zeros(dim, dim);
    for u in bases {
        if u.nrows() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: u.nrows(),
            });
        }
        check_orthonormal(u, 1e-10)?;
        s += u * u.transpose();
    }
    Ok(s)
}

/// Bounds of arbitrary orthonormal bases, from the frame operator's spectrum.
pub fn frame_bounds(bases: &[DMatrix<f64>]) -> Result<FrameBounds> {
    let (a, b) = symmetric_extremes(&frame_operator(bases)?);
    Ok(FrameBounds::new(a.max(0.0), b))
}

/// Optimal MSE of a tight frame on white data: `M² λ s2 / (λ N m + M s2)`.
pub fn tight_frame_mse_uniform(
    lambda: f64,
    sigma2: f64,
    dim: usize,
    packets: usize,
    m: usize,
) -> f64 {
    let mm = dim as f64;
    mm * mm * lambda * sigma2 / (lambda * (packets * m) as f64 + mm * sigma2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErasureReport {
    /// Erased packets, 0-based.
    pub erased: Vec<usize>,
    pub mse0: f64,
    pub penalty: f64,
    pub total: f64,
    /// MSE recomputed from the surviving packets only.
    pub exact: f64,
    pub alphas: Vec<f64>,
    pub tight: bool,
}

impl ErasureReport {
    /// JSON form with 1-based packet numbers.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "erased": self.erased.iter().map(|k| k + 1).collect::<Vec<_>>(),
            "mse0": self.mse0,
            "penalty": self.penalty,
            "total": self.total,
            "exact": self.exact,
            "tight": self.tight,
        })
    }
}

fn check_erased(erased: &[usize], packets: usize) -> Result<Vec<usize>> {
    let mut e = erased.to_vec();
    e.sort_unstable();
    e.dedup();
    if let Some(&k) = e.iter().find(|&&k| k >= packets) {
        return Err(Error::PacketOutOfRange { index: k, packets });
    }
    Ok(e)
}

/// Erasure analysis for arbitrary bases expressed in the eigenbasis of the
/// data covariance `diag(lambdas)`.
///
/// Non-tight frames are analysed with `L / M` in place of the frame bound and
/// logged as a warning.
pub fn erasure_mse_bases(
    lambdas: &[f64],
    sigma2: f64,
    bases: &[DMatrix<f64>],
    erased: &[usize],
) -> Result<ErasureReport> {
    let dim = lambdas.len();
    let op = frame_operator(bases)?;
    if op.nrows() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: op.nrows(),
        });
    }
    let m = bases[0].ncols();
    if bases.iter().any(|u| u.ncols() != m) {
        return Err(Error::InvalidParams(
            "erasure analysis needs equal packet dimensions".into(),
        ));
    }
    let erased = check_erased(erased, bases.len())?;
    let (lo, hi) = symmetric_extremes(&op);
    let tight = (hi - lo).abs() <= TOL;
    if !tight {
        log::warn!("fusion frame is not tight (bounds {lo:.6} and {hi:.6}); using L/M in the erasure formulas");
    }
    let ratio = (bases.len() * m) as f64 / dim as f64;
    let alphas: Vec<f64> = lambdas.iter().map(|&l| l / (sigma2 + ratio * l)).collect();
    let mse0 = lambdas
        .iter()
        .map(|&l| l / (1.0 + l * ratio / sigma2))
        .sum();

    let mut s = DMatrix::zeros(dim, dim);
    for &k in &erased {
        s += &bases[k] * bases[k].transpose();
    }
    let lam = DMatrix::from_diagonal(&DVector::from_column_slice(lambdas));
    let inner = &s * sigma2 + &s * &lam * &s;
    let penalty: f64 = (0..dim)
        .map(|j| alphas[j] * alphas[j] * inner[(j, j)])
        .sum();

    let survivors: Vec<usize> = (0..bases.len())
        .filter(|k| erased.binary_search(k).is_err())
        .collect();
    let setup = MeasurementSetup::with_bases(lam, bases.to_vec(), sigma2)?;
    let exact = setup.theoretical_mse(&survivors)?;
    Ok(ErasureReport {
        erased,
        mse0,
        penalty,
        total: mse0 + penalty,
        exact,
        alphas,
        tight,
    })
}

/// Erasure analysis for an aligned arrangement.
pub fn erasure_mse(
    spectrum: &Spectrum,
    sigma2: f64,
    arrangement: &Arrangement,
    erased: &[usize],
) -> Result<ErasureReport> {
    if spectrum.dim() != arrangement.dim() {
        return Err(Error::DimensionMismatch {
            expected: spectrum.dim(),
            actual: arrangement.dim(),
        });
    }
    let erased = check_erased(erased, arrangement.packets())?;
    let bounds = frame_bounds_aligned(arrangement);
    if !bounds.tight {
        log::warn!(
            "fusion frame is not tight (bounds {} and {}); using L/M in the erasure formulas",
            bounds.a,
            bounds.b
        );
    }
    let lambdas = spectrum.lambdas();
    let dim = lambdas.len() as f64;
    let ratio = (arrangement.packets() * arrangement.subspace_dim()) as f64 / dim;
    let alphas: Vec<f64> = lambdas.iter().map(|&l| l / (sigma2 + ratio * l)).collect();
    let mse0 = lambdas
        .iter()
        .map(|&l| l / (1.0 + l * ratio / sigma2))
        .sum();
    // Erased projections are diagonal: S = diag(e) with e_j the erased multiplicity.
    let e = arrangement.subset_multiplicity(&erased)?;
    let penalty = lambdas
        .iter()
        .zip(&e)
        .zip(&alphas)
        .map(|((&l, &c), &a)| {
            let c = c as f64;
            a * a * (sigma2 * c + l * c * c)
        })
        .sum();
    let survivors: Vec<usize> = (0..arrangement.packets())
        .filter(|k| erased.binary_search(k).is_err())
        .collect();
    let exact = mse_subset(spectrum, sigma2, arrangement, &survivors)?;
    Ok(ErasureReport {
        erased,
        mse0,
        penalty,
        total: mse0 + penalty,
        exact,
        alphas,
        tight: bounds.tight,
    })
}

/// One-dimensional subspaces of the plane spanned by unit vectors at the
/// given angles (degrees).
pub fn planar_lines(angles_deg: &[f64]) -> Vec<DMatrix<f64>> {
    angles_deg
        .iter()
        .map(|a| {
            let t = a * PI / 180.0;
            DMatrix::from_column_slice(2, 1, &[t.cos(), t.sin()])
        })
        .collect()
}

/// Whether every erasure pattern of the same size yields the same MSE, both
/// in the closed form and on recomputation.
pub fn erasure_symmetric(bases: &[DMatrix<f64>], sigma_x2: f64, sigma2: f64) -> Result<bool> {
    let dim = bases.first().ok_or(Error::Empty("bases"))?.nrows();
    let lambdas = vec![sigma_x2; dim];
    let n = bases.len();
    let mut ok = true;
    for size in 1..n {
        let mut reference: Option<(f64, f64)> = None;
        for mask in 0u32..(1u32 << n) {
            if mask.count_ones() as usize != size {
                continue;
            }
            let erased: Vec<usize> = (0..n).filter(|k| mask & (1 << k) != 0).collect();
            let r = erasure_mse_bases(&lambdas, sigma2, bases, &erased)?;
            match reference {
                None => reference = Some((r.total, r.exact)),
                Some((t, x)) => ok &= (r.total - t).abs() <= 1e-10 && (r.exact - x).abs() <= 1e-10,
            }
        }
    }
    Ok(ok)
}

/// The three-line equidistant tight frame in the plane.
pub fn mercedes_frame() -> Vec<DMatrix<f64>> {
    planar_lines(&[90.0, 210.0, 330.0])
}

pub fn mercedes_check(sigma_x2: f64, sigma2: f64) -> bool {
    erasure_symmetric(&mercedes_frame(), sigma_x2, sigma2).unwrap_or(false)
}
