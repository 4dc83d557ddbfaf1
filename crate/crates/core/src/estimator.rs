//! Dense Wiener filtering for explicit measurement realizations.
//!
//! A packet `k` delivers `z_k = U_kᵀ x + n_k` with `U_k` an `M x m`
//! column-orthonormal basis. Stacking the available packets into `U`, the
//! linear MMSE estimate is `x̂ = R U (s2 I + Uᵀ R U)⁻¹ z`.

use nalgebra::{Complex, DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrangement::Arrangement;
use crate::error::{Error, Result};
use crate::linalg::{check_orthonormal, dft_matrix, random_orthogonal, spd_inverse};
use crate::mse::mse_subset;
use crate::rng::substream;
use crate::spectrum::{Spectrum, SpectrumModel};

const ORTHO_TOL: f64 = 1e-10;
const WOODBURY_TOL: f64 = 1e-9;

/// How to draw `x` with covariance `R`.
#[derive(Clone, Debug)]
enum Factor {
    /// `R = diag(d)^2`.
    Diagonal(Vec<f64>),
    /// `R = L Lᵀ`.
    Dense(DMatrix<f64>),
}

#[derive(Clone, Debug)]
pub struct MeasurementSetup {
    rxx: DMatrix<f64>,
    factor: Factor,
    bases: Vec<DMatrix<f64>>,
    sigma2: f64,
}

/// Column-selection bases for every block of `arrangement`.
pub fn selection_bases(arrangement: &Arrangement) -> Vec<DMatrix<f64>> {
    arrangement
        .blocks()
        .iter()
        .map(|b| {
            let mut u = DMatrix::zeros(arrangement.dim(), b.len());
            for (col, &j) in b.iter().enumerate() {
                u[(j, col)] = 1.0;
            }
            u
        })
        .collect()
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if sigma2 > 0.0 && sigma2.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!(
            "sigma2 must be positive, got {sigma2}"
        )))
    }
}

impl MeasurementSetup {
    /// Diagonal covariance with aligned selection bases.
    pub fn aligned(spectrum: &Spectrum, arrangement: &Arrangement, sigma2: f64) -> Result<Self> {
        check_sigma2(sigma2)?;
        if spectrum.dim() != arrangement.dim() {
            return Err(Error::DimensionMismatch {
                expected: spectrum.dim(),
                actual: arrangement.dim(),
            });
        }
        let l = spectrum.lambdas();
        Ok(Self {
            rxx: DMatrix::from_diagonal(&DVector::from_column_slice(l)),
            factor: Factor::Diagonal(l.iter().map(|v| v.sqrt()).collect()),
            bases: selection_bases(arrangement),
            sigma2,
        })
    }

    /// Covariance `Ψ Λ Ψᵀ` probed through the adapted bases `Ψ U_k`.
    pub fn rotated(
        spectrum: &Spectrum,
        arrangement: &Arrangement,
        sigma2: f64,
        psi: &DMatrix<f64>,
    ) -> Result<Self> {
        if psi.nrows() != spectrum.dim() || psi.ncols() != spectrum.dim() {
            return Err(Error::DimensionMismatch {
                expected: spectrum.dim(),
                actual: psi.nrows(),
            });
        }
        check_orthonormal(psi, ORTHO_TOL)?;
        let lam = DMatrix::from_diagonal(&DVector::from_column_slice(spectrum.lambdas()));
        let rxx = psi * lam * psi.transpose();
        let bases = selection_bases(arrangement)
            .iter()
            .map(|u| psi * u)
            .collect();
        Self::with_bases(rxx, bases, sigma2)
    }

    /// Arbitrary symmetric positive definite covariance and orthonormal bases.
    pub fn with_bases(rxx: DMatrix<f64>, bases: Vec<DMatrix<f64>>, sigma2: f64) -> Result<Self> {
        check_sigma2(sigma2)?;
        let dim = rxx.nrows();
        if rxx.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: rxx.ncols(),
            });
        }
        for u in &bases {
            if u.nrows() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: u.nrows(),
                });
            }
            check_orthonormal(u, ORTHO_TOL)?;
        }
        let sym = (&rxx + rxx.transpose()) * 0.5;
        let chol = sym.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
        Ok(Self {
            rxx: sym,
            factor: Factor::Dense(chol.l()),
            bases,
            sigma2,
        })
    }

    pub fn dim(&self) -> usize {
        self.rxx.nrows()
    }

    pub fn packets(&self) -> usize {
        self.bases.len()
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.rxx
    }

    pub fn bases(&self) -> &[DMatrix<f64>] {
        &self.bases
    }

    /// Column concatenation of the bases in `subset`.
    pub fn stacked(&self, subset: &[usize]) -> Result<DMatrix<f64>> {
        let cols: usize = subset
            .iter()
            .map(|&k| {
                self.bases
                    .get(k)
                    .map(|u| u.ncols())
                    .ok_or(Error::PacketOutOfRange {
                        index: k,
                        packets: self.packets(),
                    })
            })
            .sum::<Result<usize>>()?;
        let mut u = DMatrix::zeros(self.dim(), cols);
        let mut at = 0;
        for &k in subset {
            let b = &self.bases[k];
            u.columns_mut(at, b.ncols()).copy_from(b);
            at += b.ncols();
        }
        Ok(u)
    }

    fn innovation_inverse(&self, u: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let mut rzz = u.transpose() * &self.rxx * u;
        for i in 0..rzz.nrows() {
            rzz[(i, i)] += self.sigma2;
        }
        spd_inverse(rzz)
    }

    /// Error covariance of the Wiener estimate from the packets in `subset`.
    ///
    /// Evaluated both as `R - R U Rzz⁻¹ Uᵀ R` and as `(R⁻¹ + Uᵀ U / s2)⁻¹`;
    /// a gap above `1e-9` relative is reported as an error.
    pub fn error_covariance(&self, subset: &[usize]) -> Result<DMatrix<f64>> {
        if subset.is_empty() {
            return Err(Error::Empty("packet subset"));
        }
        let u = self.stacked(subset)?;
        let ru = &self.rxx * &u;
        let first = &self.rxx - &ru * self.innovation_inverse(&u)? * ru.transpose();
        let info = spd_inverse(self.rxx.clone())? + (&u * u.transpose()) / self.sigma2;
        let second = spd_inverse(info)?;
        let gap = (&first - &second).amax() / first.amax().max(f64::MIN_POSITIVE);
        if gap > WOODBURY_TOL {
            return Err(Error::WoodburyMismatch(gap));
        }
        Ok(first)
    }

    /// Trace of [`MeasurementSetup::error_covariance`]; the prior trace for an empty subset.
    pub fn theoretical_mse(&self, subset: &[usize]) -> Result<f64> {
        if subset.is_empty() {
            return Ok(self.rxx.trace());
        }
        Ok(self.error_covariance(subset)?.trace())
    }

    /// Wiener gain `R U Rzz⁻¹`.
    pub fn gain(&self, subset: &[usize]) -> Result<DMatrix<f64>> {
        let u = self.stacked(subset)?;
        Ok(&self.rxx * &u * self.innovation_inverse(&u)?)
    }

    pub fn wiener_estimate(&self, subset: &[usize], z: &DVector<f64>) -> Result<DVector<f64>> {
        let k = self.gain(subset)?;
        if z.len() != k.ncols() {
            return Err(Error::DimensionMismatch {
                expected: k.ncols(),
                actual: z.len(),
            });
        }
        Ok(k * z)
    }

    fn draw_signal<R: rand::Rng>(&self, rng: &mut R) -> DVector<f64> {
        let g = DVector::from_fn(self.dim(), |_, _| StandardNormal.sample(rng));
        match &self.factor {
            Factor::Diagonal(d) => g.component_mul(&DVector::from_column_slice(d)),
            Factor::Dense(l) => l * g,
        }
    }
}

/// Outcome of a Monte Carlo run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub theoretical_mse: f64,
    pub empirical_mse: f64,
    /// Sample standard deviation of the per-trial squared error.
    pub sd: f64,
    pub trials: u64,
    pub seed: u64,
    pub rel_err: f64,
    /// Norm of the average estimate.
    pub mean_estimate_norm: f64,
}

impl RecoveryResult {
    /// Whether the empirical value lies within `4 sd / sqrt(trials)` of theory.
    pub fn within_bound(&self) -> bool {
        (self.empirical_mse - self.theoretical_mse).abs()
            <= 4.0 * self.sd / (self.trials as f64).sqrt()
    }
}

const BLOCK: u64 = 4096;

struct Partial {
    sum: f64,
    sum_sq: f64,
    est: DVector<f64>,
}

fn pairwise(mut parts: Vec<Partial>) -> Partial {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(Partial {
                    sum: a.sum + b.sum,
                    sum_sq: a.sum_sq + b.sum_sq,
                    est: a.est + b.est,
                }),
                None => next.push(a),
            }
        }
        parts = next;
    }
    parts.pop().expect("at least one block")
}

/// Empirical MSE of the Wiener estimate with Gaussian signal and noise.
///
/// Trials run in fixed-size blocks; block `b` draws from substream `(seed, b)`
/// and block sums are combined pairwise, so the result does not depend on the
/// thread count.
pub fn monte_carlo_mse(
    setup: &MeasurementSetup,
    subset: &[usize],
    trials: u64,
    seed: u64,
) -> Result<RecoveryResult> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be at least 1".into()));
    }
    let theoretical = setup.theoretical_mse(subset)?;
    let u = setup.stacked(subset)?;
    let gain = if subset.is_empty() {
        DMatrix::zeros(setup.dim(), 0)
    } else {
        setup.gain(subset)?
    };
    let noise_sd = setup.sigma2.sqrt();
    let blocks = trials.div_ceil(BLOCK);
    let parts: Vec<Partial> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, b);
            let count = BLOCK.min(trials - b * BLOCK);
            let mut p = Partial {
                sum: 0.0,
                sum_sq: 0.0,
                est: DVector::zeros(setup.dim()),
            };
            for _ in 0..count {
                let x = setup.draw_signal(&mut rng);
                let n = DVector::from_fn(u.ncols(), |_, _| {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    noise_sd * g
                });
                let z = u.transpose() * &x + n;
                let xh = &gain * z;
                let e = (&x - &xh).norm_squared();
                p.sum += e;
                p.sum_sq += e * e;
                p.est += xh;
            }
            p
        })
        .collect();
    let total = pairwise(parts);
    let t = trials as f64;
    let mean = total.sum / t;
    let var = if trials > 1 {
        ((total.sum_sq - t * mean * mean) / (t - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(RecoveryResult {
        theoretical_mse: theoretical,
        empirical_mse: mean,
        sd: var.sqrt(),
        trials,
        seed,
        rel_err: (mean - theoretical).abs() / theoretical,
        mean_estimate_norm: (total.est / t).norm(),
    })
}

/// Compares rotated and diagonal evaluations on ten random nonempty subsets.
pub fn rotated_equivalence_check(
    spectrum: &Spectrum,
    sigma2: f64,
    arrangement: &Arrangement,
    psi_seed: u64,
) -> Result<bool> {
    let psi = random_orthogonal(spectrum.dim(), psi_seed);
    rotated_equivalence_with(spectrum, sigma2, arrangement, &psi, psi_seed)
}

pub fn rotated_equivalence_with(
    spectrum: &Spectrum,
    sigma2: f64,
    arrangement: &Arrangement,
    psi: &DMatrix<f64>,
    subset_seed: u64,
) -> Result<bool> {
    let setup = MeasurementSetup::rotated(spectrum, arrangement, sigma2, psi)?;
    let mut ok = true;
    for subset in random_subsets(arrangement.packets(), 10, subset_seed) {
        let dense = setup.theoretical_mse(&subset)?;
        let closed = mse_subset(spectrum, sigma2, arrangement, &subset)?;
        ok &= (dense - closed).abs() <= 1e-8 * closed.abs().max(1.0);
    }
    Ok(ok)
}

/// `count` nonempty subsets of `0..n`, drawn uniformly.
pub fn random_subsets(n: usize, count: usize, seed: u64) -> Vec<Vec<usize>> {
    use rand::Rng;
    let mut rng = substream(seed, 1);
    (0..count)
        .map(|_| loop {
            let s: Vec<usize> = (0..n).filter(|_| rng.random::<bool>()).collect();
            if !s.is_empty() {
                break s;
            }
        })
        .collect()
}

/// Complex Wiener error covariance trace for `R = F Λ F†` probed through `F U_k`.
fn complex_mse(
    f: &DMatrix<Complex<f64>>,
    lambdas: &[f64],
    u: &DMatrix<f64>,
    sigma2: f64,
) -> Result<f64> {
    let cu = u.map(|v| Complex::new(v, 0.0));
    let lam = DMatrix::from_diagonal(&DVector::from_iterator(
        lambdas.len(),
        lambdas.iter().map(|&l| Complex::new(l, 0.0)),
    ));
    let rxx = f * lam * f.adjoint();
    let w = f * cu;
    let rw = &rxx * &w;
    let mut rzz = w.adjoint() * &rw;
    for i in 0..rzz.nrows() {
        rzz[(i, i)] += Complex::new(sigma2, 0.0);
    }
    let inv = rzz.cholesky().ok_or(Error::NotPositiveDefinite)?.inverse();
    let ree = &rxx - &rw * inv * rw.adjoint();
    Ok(ree.trace().re)
}

/// Circulant covariance in the time domain, packets chosen in the DFT domain.
///
/// The covariance is `F Λ F†` with `F` the unitary DFT and `Λ` the
/// cyclostationary eigenvalues; packets probe `F U_k`. The resulting MSE must
/// match the aligned diagonal evaluation on every tested subset.
pub fn dft_equivalence_check(
    gamma: f64,
    arrangement: &Arrangement,
    sigma2: f64,
    seed: u64,
) -> Result<bool> {
    let spectrum = Spectrum::build(&SpectrumModel::cyclostationary(gamma, arrangement.dim()))?;
    let f = dft_matrix(spectrum.dim());
    let aligned = MeasurementSetup::aligned(&spectrum, arrangement, sigma2)?;
    let mut ok = true;
    for subset in random_subsets(arrangement.packets(), 10, seed) {
        let u = aligned.stacked(&subset)?;
        let dense = complex_mse(&f, spectrum.lambdas(), &u, sigma2)?;
        let closed = mse_subset(&spectrum, sigma2, arrangement, &subset)?;
        ok &= (dense - closed).abs() <= 1e-8 * closed.abs().max(1.0);
    }
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::toy_partition;

    fn toy() -> (Spectrum, Arrangement) {
        (
            Spectrum::build(&SpectrumModel::uniform(1.0, 4)).unwrap(),
            toy_partition(4, 2).unwrap(),
        )
    }

    #[test]
    fn single_packet_trace() {
        let (spec, arr) = toy();
        let setup = MeasurementSetup::aligned(&spec, &arr, 0.5).unwrap();
        let tr = setup.theoretical_mse(&[1]).unwrap();
        assert!((tr - (4.0 - 2.0 / 1.5)).abs() < 1e-12);
    }

    #[test]
    fn scalar_gain_on_probed_coordinates() {
        let (spec, arr) = toy();
        let setup = MeasurementSetup::aligned(&spec, &arr, 0.25).unwrap();
        let est = setup
            .wiener_estimate(&[1], &DVector::from_vec(vec![2.0, -1.0]))
            .unwrap();
        let g = 1.0 / 1.25;
        let expect = [0.0, 0.0, 2.0 * g, -g];
        for (a, b) in est.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(
            setup.wiener_estimate(&[0], &DVector::zeros(2)).unwrap(),
            DVector::zeros(4)
        );
        assert!(setup.wiener_estimate(&[0], &DVector::zeros(3)).is_err());
    }

    #[test]
    fn huge_noise_shrinks_estimate() {
        let (spec, arr) = toy();
        let setup = MeasurementSetup::aligned(&spec, &arr, 1e12).unwrap();
        let est = setup
            .wiener_estimate(&[0], &DVector::from_vec(vec![1.0, 1.0]))
            .unwrap();
        assert!(est.norm() < 1e-11);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (spec, arr) = toy();
        assert!(MeasurementSetup::aligned(&spec, &arr, 0.0).is_err());
        let setup = MeasurementSetup::aligned(&spec, &arr, 1.0).unwrap();
        assert!(setup.error_covariance(&[]).is_err());
        assert!(setup.error_covariance(&[2]).is_err());
        let bad = DMatrix::from_element(4, 1, 1.0);
        assert!(matches!(
            MeasurementSetup::with_bases(DMatrix::identity(4, 4), vec![bad], 1.0),
            Err(Error::NotOrthonormal(_))
        ));
    }

    #[test]
    fn identity_rotation_is_trivial() {
        let (spec, arr) = toy();
        let psi = DMatrix::identity(4, 4);
        assert!(rotated_equivalence_with(&spec, 0.3, &arr, &psi, 1).unwrap());
    }

    #[test]
    fn near_noiseless_single_trial() {
        let spec = Spectrum::build(&SpectrumModel::exponential(0.8, 4)).unwrap();
        let arr = Arrangement::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let setup = MeasurementSetup::aligned(&spec, &arr, 1e-6).unwrap();
        let r = monte_carlo_mse(&setup, &[0, 1], 1, 3).unwrap();
        assert!(r.empirical_mse < 1e-4);
        assert!(monte_carlo_mse(&setup, &[0], 0, 3).is_err());
    }
}
