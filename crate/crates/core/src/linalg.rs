//! Dense helpers shared by the estimator and frame diagnostics.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::substream;

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `R`'s diagonal folded into `Q`.
pub fn random_orthogonal(dim: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = substream(seed, 0);
    let g = DMatrix::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..dim {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    q
}

/// Unitary DFT matrix `F[j, k] = exp(2 pi i j k / M) / sqrt(M)`.
pub fn dft_matrix(dim: usize) -> DMatrix<Complex<f64>> {
    let scale = 1.0 / (dim as f64).sqrt();
    DMatrix::from_fn(dim, dim, |j, k| {
        let angle = 2.0 * PI * ((j * k) % dim) as f64 / dim as f64;
        Complex::from_polar(scale, angle)
    })
}

/// Largest entrywise deviation of `UᵀU` from the identity.
pub fn orthonormality_defect(u: &DMatrix<f64>) -> f64 {
    let gram = u.transpose() * u;
    let eye = DMatrix::<f64>::identity(u.ncols(), u.ncols());
    (gram - eye).amax()
}

pub fn check_orthonormal(u: &DMatrix<f64>, tol: f64) -> Result<()> {
    let d = orthonormality_defect(u);
    if d > tol {
        Err(Error::NotOrthonormal(d))
    } else {
        Ok(())
    }
}

/// Extreme eigenvalues of a symmetric matrix.
pub fn symmetric_extremes(a: &DMatrix<f64>) -> (f64, f64) {
    let eig = a.clone().symmetric_eigen();
    let lo = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let hi = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Inverse of a symmetric positive definite matrix.
pub fn spd_inverse(a: DMatrix<f64>) -> Result<DMatrix<f64>> {
    a.cholesky()
        .map(|c| c.inverse())
        .ok_or(Error::NotPositiveDefinite)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_is_orthogonal() {
        for seed in 0..5 {
            let q = random_orthogonal(7, seed);
            assert!(orthonormality_defect(&q) < 1e-12);
        }
        assert_eq!(random_orthogonal(4, 3), random_orthogonal(4, 3));
    }

    #[test]
    fn dft_is_unitary() {
        let f = dft_matrix(8);
        let g = f.adjoint() * &f;
        let eye = DMatrix::<Complex<f64>>::identity(8, 8);
        assert!((g - eye).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn extremes_of_diagonal() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let (lo, hi) = symmetric_extremes(&a);
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 3.0).abs() < 1e-12);
        assert!(spd_inverse(-a).is_err());
    }
}
