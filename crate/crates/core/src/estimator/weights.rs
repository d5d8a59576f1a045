//! Constrained least-squares regression weights over a scale range.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::sigma1::CovarianceModel;
use super::ScaleRange;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ols,
    #[default]
    Wls,
    Gls,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ols => "ols",
            Method::Wls => "wls",
            Method::Gls => "gls",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ols" => Ok(Method::Ols),
            "wls" => Ok(Method::Wls),
            "gls" => Ok(Method::Gls),
            other => Err(Error::config(format!(
                "unknown regression method `{other}`"
            ))),
        }
    }
}

/// Weights `w_j`, `j = j1..=j2`, with `Σ w_j = 0` and `Σ j·w_j = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    range: ScaleRange,
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn range(&self) -> ScaleRange {
        self.range
    }

    /// Weights in scale order, `w_{j1}` first.
    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        (self.range.j1()..).zip(self.weights.iter().copied())
    }

    /// `Σ w_j y(j)`.
    pub fn apply(&self, y: impl Fn(u32) -> f64) -> f64 {
        self.iter().map(|(j, w)| w * y(j)).sum()
    }

    /// `wᵀ C w` for a dense matrix in scale order.
    pub fn quadratic_form(&self, c: &DMatrix<f64>) -> f64 {
        let w = DVector::from_column_slice(&self.weights);
        (w.transpose() * c * &w)[(0, 0)]
    }

    /// `(Σ w_j, Σ j·w_j)`.
    pub fn constraint_sums(&self) -> (f64, f64) {
        self.iter()
            .fold((0.0, 0.0), |(s0, s1), (j, w)| (s0 + w, s1 + j as f64 * w))
    }
}

/// The per-method covariance `C` (scale order) whose quadratic form the
/// weights minimize.
pub fn method_covariance(
    range: ScaleRange,
    method: Method,
    cov: &CovarianceModel,
    block_counts: &[u64],
) -> Result<DMatrix<f64>> {
    let ell = range.len();
    match method {
        Method::Ols => Ok(DMatrix::identity(ell, ell)),
        Method::Wls => {
            if block_counts.len() != ell {
                return Err(Error::Range(format!(
                    "expected {ell} block counts, got {}",
                    block_counts.len()
                )));
            }
            if block_counts.contains(&0) {
                return Err(Error::Range("every scale needs at least one block".into()));
            }
            // Var(Y_j) ∝ 1/n_j
            Ok(DMatrix::from_diagonal(&DVector::from_iterator(
                ell,
                block_counts.iter().map(|&n| 1.0 / n as f64),
            )))
        }
        // Cov(Y_j', Y_j'') ∝ Σ₁(j' - j0, j'' - j0) with j0 = j1 - 1; the
        // factor H²/n_{j0} cancels in the weights.
        Method::Gls => cov.block(1, ell),
    }
}

/// Minimizes `wᵀCw` subject to `Σw = 0`, `Σ j·w = 1`:
/// `w = C⁻¹Aᵀ(AC⁻¹Aᵀ)⁻¹b`, `b = (0, 1)`.
pub fn constrained_weights(range: ScaleRange, c: &DMatrix<f64>) -> Result<WeightVector> {
    let ell = range.len();
    if c.nrows() != ell || c.ncols() != ell {
        return Err(Error::Covariance(format!(
            "covariance is {}x{}, range has {ell} scales",
            c.nrows(),
            c.ncols()
        )));
    }
    // Centring the scale row leaves the constraint set unchanged (Σw = 0) and
    // keeps the 2×2 system well conditioned.
    let center = 0.5 * (range.j1() + range.j2()) as f64;
    let a = DMatrix::from_fn(2, ell, |r, k| {
        if r == 0 {
            1.0
        } else {
            (range.j1() as usize + k) as f64 - center
        }
    });
    let chol = c
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Covariance("covariance is not positive definite".into()))?;
    let x = chol.solve(&a.transpose()); // C⁻¹Aᵀ, ℓ×2
    let m = &a * &x;
    let m = Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let lambda = m
        .try_inverse()
        .ok_or_else(|| Error::Range("singular constraint system".into()))?
        * Vector2::new(0.0, 1.0);
    let w = &x * DVector::from_column_slice(lambda.as_slice());
    Ok(WeightVector {
        range,
        weights: w.iter().copied().collect(),
    })
}

pub fn regression_weights(
    range: ScaleRange,
    method: Method,
    cov: &CovarianceModel,
    block_counts: &[u64],
) -> Result<WeightVector> {
    let c = method_covariance(range, method, cov, block_counts)?;
    constrained_weights(range, &c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cov() -> CovarianceModel {
        CovarianceModel::quadrature(8).unwrap()
    }

    fn counts(range: ScaleRange, n: u64) -> Vec<u64> {
        range.scales().map(|j| n >> j).collect()
    }

    #[test]
    fn two_scales_force_difference() {
        let r = ScaleRange::new(4, 5).unwrap();
        for m in [Method::Ols, Method::Wls, Method::Gls] {
            let w = regression_weights(r, m, &cov(), &counts(r, 1 << 12)).unwrap();
            assert!((w.as_slice()[0] + 1.0).abs() < 1e-12);
            assert!((w.as_slice()[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ols_three_scales() {
        let r = ScaleRange::new(7, 9).unwrap();
        let w = regression_weights(r, Method::Ols, &cov(), &[]).unwrap();
        let expect = [-0.5, 0.0, 0.5];
        for (a, b) in w.as_slice().iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn constraints_hold() {
        for (j1, j2) in [(1, 2), (1, 8), (3, 7), (10, 15), (2, 9)] {
            let r = ScaleRange::new(j1, j2).unwrap();
            let big = CovarianceModel::quadrature(8).unwrap();
            for m in [Method::Ols, Method::Wls, Method::Gls] {
                let Ok(w) = regression_weights(r, m, &big, &counts(r, 1 << 16)) else {
                    assert!(r.len() > 8);
                    continue;
                };
                let (s0, s1) = w.constraint_sums();
                assert!(s0.abs() < 1e-10, "{m} {j1}-{j2}: {s0}");
                assert!((s1 - 1.0).abs() < 1e-10, "{m} {j1}-{j2}: {s1}");
            }
        }
    }

    #[test]
    fn wls_needs_counts() {
        let r = ScaleRange::new(1, 3).unwrap();
        assert!(matches!(
            regression_weights(r, Method::Wls, &cov(), &[4, 2]),
            Err(Error::Range(_))
        ));
        assert!(regression_weights(r, Method::Wls, &cov(), &[4, 2, 0]).is_err());
    }

    #[test]
    fn gls_needs_enough_offsets() {
        let r = ScaleRange::new(1, 10).unwrap();
        assert!(matches!(
            regression_weights(r, Method::Gls, &cov(), &[]),
            Err(Error::Covariance(_))
        ));
    }

    #[test]
    fn singular_covariance_rejected() {
        let r = ScaleRange::new(1, 3).unwrap();
        let c = DMatrix::from_element(3, 3, 1.0);
        assert!(matches!(
            constrained_weights(r, &c),
            Err(Error::Covariance(_))
        ));
    }

    #[test]
    fn method_parse() {
        assert_eq!("GLS".parse::<Method>().unwrap(), Method::Gls);
        assert!("lasso".parse::<Method>().is_err());
    }
}
