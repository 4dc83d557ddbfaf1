//! Covariance eigenvalue profiles for the supported data models.
//!
//! A [`Spectrum`] holds the diagonal of the (rotated or DFT-diagonalized)
//! data covariance together with the permutation that sorts it in
//! nonincreasing order. Allocation always works on the sorted view and maps
//! results back through that permutation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of the eigenvalue profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    /// `lambda_j = lambda` for every coordinate.
    Uniform { lambda: f64 },
    /// Caller-supplied eigenvalues.
    Explicit { values: Vec<f64> },
    /// `lambda_j = gamma^(j-1)`.
    ExponentialDecay { gamma: f64 },
    /// `lambda_j = 1 - (j-1)/M`.
    Linear,
    /// Circulant covariance with first row `1, g, .., g^(M/2), .., g`.
    Cyclostationary { gamma: f64 },
}

/// A data model together with its ambient dimension `M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumModel {
    pub kind: ModelKind,
    pub dim: usize,
}

impl SpectrumModel {
    pub fn uniform(lambda: f64, dim: usize) -> Self {
        Self {
            kind: ModelKind::Uniform { lambda },
            dim,
        }
    }

    pub fn explicit(values: Vec<f64>) -> Self {
        let dim = values.len();
        Self {
            kind: ModelKind::Explicit { values },
            dim,
        }
    }

    pub fn exponential(gamma: f64, dim: usize) -> Self {
        Self {
            kind: ModelKind::ExponentialDecay { gamma },
            dim,
        }
    }

    pub fn linear(dim: usize) -> Self {
        Self {
            kind: ModelKind::Linear,
            dim,
        }
    }

    pub fn cyclostationary(gamma: f64, dim: usize) -> Self {
        Self {
            kind: ModelKind::Cyclostationary { gamma },
            dim,
        }
    }

    /// Short model name used in reports.
    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::Uniform { .. } => "uniform",
            ModelKind::Explicit { .. } => "explicit",
            ModelKind::ExponentialDecay { .. } => "exponential",
            ModelKind::Linear => "linear",
            ModelKind::Cyclostationary { .. } => "cyclostationary",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidModel("dimension must be positive".into()));
        }
        match &self.kind {
            ModelKind::Uniform { lambda } => {
                if !(*lambda > 0.0 && lambda.is_finite()) {
                    return Err(Error::InvalidModel(format!(
                        "lambda must be positive, got {lambda}"
                    )));
                }
            }
            ModelKind::Explicit { values } => {
                if values.len() != self.dim {
                    return Err(Error::DimensionMismatch {
                        expected: self.dim,
                        actual: values.len(),
                    });
                }
                if let Some(bad) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                    return Err(Error::InvalidModel(format!(
                        "eigenvalues must be positive, got {bad}"
                    )));
                }
            }
            ModelKind::ExponentialDecay { gamma } => check_gamma(*gamma)?,
            ModelKind::Linear => {}
            ModelKind::Cyclostationary { gamma } => {
                check_gamma(*gamma)?;
                check_cyclo_dim(self.dim)?;
            }
        }
        Ok(())
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!(
            "gamma must lie in (0, 1), got {gamma}"
        )))
    }
}

fn check_cyclo_dim(dim: usize) -> Result<()> {
    if dim >= 4 && dim.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!(
            "cyclostationary dimension must be a power of two >= 4, got {dim}"
        )))
    }
}

/// Eigenvalues of the circulant covariance, in DFT-bin order.
///
/// Bins `j` and `M - j` are evaluated on the same reduced frequency so that
/// mirrored eigenvalues are bitwise equal.
pub fn cyclostationary_eigenvalues(gamma: f64, dim: usize) -> Result<Vec<f64>> {
    check_gamma(gamma)?;
    check_cyclo_dim(dim)?;
    let half = dim / 2;
    let scale = 1.0 / (dim as f64).sqrt();
    let tail = gamma.powi(half as i32);
    let lambdas = (0..dim)
        .map(|j| {
            let r = j.min(dim - j);
            let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            let mut acc = 1.0 + sign * tail;
            for k in 1..half {
                let angle = 2.0 * PI * (k * r) as f64 / dim as f64;
                acc += gamma.powi(k as i32) * 2.0 * angle.cos();
            }
            scale * acc
        })
        .collect();
    Ok(lambdas)
}

/// First row of the circulant covariance: `1, g, .., g^(M/2), .., g`.
pub fn circulant_first_row(gamma: f64, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|j| gamma.powi(j.min(dim - j) as i32))
        .collect()
}

/// Eigenvalues of a covariance model plus their sorting permutation.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    model: SpectrumModel,
    lambdas: Vec<f64>,
    /// `order[k]` is the original index holding the k-th largest eigenvalue.
    order: Vec<usize>,
    base_point: f64,
}

impl Spectrum {
    pub fn build(model: &SpectrumModel) -> Result<Self> {
        model.validate()?;
        let dim = model.dim;
        let lambdas = match &model.kind {
            ModelKind::Uniform { lambda } => vec![*lambda; dim],
            ModelKind::Explicit { values } => values.clone(),
            ModelKind::ExponentialDecay { gamma } => {
                (0..dim).map(|j| gamma.powi(j as i32)).collect()
            }
            ModelKind::Linear => (0..dim).map(|j| 1.0 - j as f64 / dim as f64).collect(),
            ModelKind::Cyclostationary { gamma } => cyclostationary_eigenvalues(*gamma, dim)?,
        };
        Ok(Self::assemble(model.clone(), lambdas))
    }

    /// Wraps explicit eigenvalues.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::build(&SpectrumModel::explicit(values))
    }

    fn assemble(model: SpectrumModel, lambdas: Vec<f64>) -> Self {
        let mut order: Vec<usize> = (0..lambdas.len()).collect();
        // Equal eigenvalues (the mirrored DFT bins) put the higher original
        // index first.
        order.sort_by(|&a, &b| lambdas[b].total_cmp(&lambdas[a]).then(b.cmp(&a)));
        let base_point = lambdas.iter().sum();
        Self {
            model,
            lambdas,
            order,
            base_point,
        }
    }

    pub fn model(&self) -> &SpectrumModel {
        &self.model
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Inverse of [`Spectrum::order`]: `rank[j]` is the sorted position of index `j`.
    pub fn rank(&self) -> Vec<usize> {
        let mut rank = vec![0; self.order.len()];
        for (pos, &j) in self.order.iter().enumerate() {
            rank[j] = pos;
        }
        rank
    }

    /// Eigenvalues in nonincreasing order.
    pub fn sorted(&self) -> Vec<f64> {
        self.order.iter().map(|&j| self.lambdas[j]).collect()
    }

    /// MSE with no packet available.
    pub fn base_point(&self) -> f64 {
        self.base_point
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
        obj.insert("model".into(), self.model.name().into());
        obj.insert("M".into(), self.dim().into());
        match self.model.kind {
            ModelKind::Uniform { lambda } => {
                obj.insert("lambda".into(), lambda.into());
            }
            ModelKind::ExponentialDecay { gamma } | ModelKind::Cyclostationary { gamma } => {
                obj.insert("gamma".into(), gamma.into());
            }
            _ => {}
        }
        obj.insert("lambdas".into(), self.lambdas.clone().into());
        obj.insert("base_point".into(), self.base_point.into());
        serde_json::Value::Object(obj)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_base_point() {
        let s = Spectrum::build(&SpectrumModel::exponential(0.8, 8)).unwrap();
        assert!((s.base_point() - 4.161).abs() < 1e-3);
    }

    #[test]
    fn linear_base_point() {
        let s = Spectrum::build(&SpectrumModel::linear(32)).unwrap();
        assert!((s.base_point() - 16.5).abs() < 1e-12);
        assert!((s.lambdas()[31] - 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_is_constant() {
        let s = Spectrum::build(&SpectrumModel::uniform(1.0, 5)).unwrap();
        assert_eq!(s.lambdas(), &[1.0; 5]);
        assert_eq!(s.base_point(), 5.0);
    }

    #[test]
    fn cyclo_m4_closed_forms() {
        let g: f64 = 0.5;
        let l = cyclostationary_eigenvalues(g, 4).unwrap();
        let expect = [
            (1.0 + 2.0 * g + g * g) / 2.0,
            (1.0 - g * g) / 2.0,
            (1.0 - 2.0 * g + g * g) / 2.0,
            (1.0 - g * g) / 2.0,
        ];
        for (a, b) in l.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in l.iter().zip([1.125, 0.375, 0.125, 0.375]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((l.iter().sum::<f64>() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_models() {
        assert!(Spectrum::build(&SpectrumModel::cyclostationary(0.8, 12)).is_err());
        assert!(Spectrum::build(&SpectrumModel::cyclostationary(0.8, 2)).is_err());
        assert!(Spectrum::build(&SpectrumModel::exponential(1.0, 8)).is_err());
        assert!(Spectrum::build(&SpectrumModel::exponential(0.0, 8)).is_err());
        assert!(Spectrum::build(&SpectrumModel::uniform(-1.0, 8)).is_err());
        let bad = SpectrumModel {
            kind: ModelKind::Explicit {
                values: vec![1.0, 2.0],
            },
            dim: 3,
        };
        assert!(matches!(
            Spectrum::build(&bad),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(Spectrum::from_values(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn mirrored_bins_sort_high_index_first() {
        let s = Spectrum::build(&SpectrumModel::cyclostationary(0.8, 8)).unwrap();
        assert_eq!(&s.order()[..3], &[0, 7, 1]);
        let sorted = s.sorted();
        assert!(sorted.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn json_shape() {
        let s = Spectrum::build(&SpectrumModel::exponential(0.5, 3)).unwrap();
        let v = s.to_json();
        assert_eq!(v["model"], "exponential");
        assert_eq!(v["M"], 3);
        assert_eq!(v["gamma"], 0.5);
        assert_eq!(v["lambdas"].as_array().unwrap().len(), 3);
    }
}
