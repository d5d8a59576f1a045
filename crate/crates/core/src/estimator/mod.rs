//! Regression estimator of `H = 1/α` from a max-spectrum, with uncertainty.
//!
//! `Ĥ(j1, j2) = Σ w_j Y_j` for weights satisfying `Σ w_j = 0` and
//! `Σ j·w_j = 1`, and `α̂ = 1/Ĥ`. Its asymptotic variance is
//! `H² c_w / n_{j0}` with `j0 = j1 - 1` and `c_w = wᵀ Σ₁ w`, where `Σ₁` is
//! indexed by offsets `j - j0 ∈ 1..=ℓ`.

mod interval;
mod quadrature;
mod sigma1;
mod weights;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::MaxSpectrum;

pub use interval::{
    asymptotic_ci, asymptotic_interval, montecarlo_ci, montecarlo_cis, pivot_sample,
    pivot_scale_invariance_check, CiKind, ConfidenceInterval, McCiConfig, PivotCheck,
};
pub use quadrature::integrate;
pub use sigma1::{
    ln_covariance_quadrature, sigma1_matrix, CovarianceMode, CovarianceModel, TABLE_FORMAT_TAG,
    TABLE_FORMAT_VERSION,
};
pub use weights::{
    constrained_weights, method_covariance, regression_weights, Method, WeightVector,
};

/// Inclusive scale range `j1..=j2` with at least two scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(u32, u32)", into = "(u32, u32)")]
pub struct ScaleRange {
    j1: u32,
    j2: u32,
}

impl ScaleRange {
    pub fn new(j1: u32, j2: u32) -> Result<Self> {
        if j1 < 1 {
            return Err(Error::Range(format!("j1 must be >= 1, got {j1}")));
        }
        if j2 <= j1 {
            return Err(Error::Range(format!("need j2 > j1, got ({j1}, {j2})")));
        }
        Ok(Self { j1, j2 })
    }

    pub fn j1(&self) -> u32 {
        self.j1
    }

    pub fn j2(&self) -> u32 {
        self.j2
    }

    /// `ℓ = j2 - j1 + 1`.
    pub fn len(&self) -> usize {
        (self.j2 - self.j1 + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Base scale `j0 = j1 - 1` that anchors the `Σ₁` offsets.
    pub fn base(&self) -> u32 {
        self.j1 - 1
    }

    pub fn scales(&self) -> std::ops::RangeInclusive<u32> {
        self.j1..=self.j2
    }

    fn check_within(&self, spectrum: &MaxSpectrum) -> Result<()> {
        if self.j2 > spectrum.scale_count() {
            return Err(Error::Range(format!(
                "j2 = {} exceeds the {} available scales",
                self.j2,
                spectrum.scale_count()
            )));
        }
        Ok(())
    }
}

impl TryFrom<(u32, u32)> for ScaleRange {
    type Error = Error;

    fn try_from((j1, j2): (u32, u32)) -> Result<Self> {
        Self::new(j1, j2)
    }
}

impl From<ScaleRange> for (u32, u32) {
    fn from(r: ScaleRange) -> Self {
        (r.j1, r.j2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    /// `Ĥ`.
    pub h: f64,
    /// `α̂ = 1/Ĥ`.
    pub alpha: f64,
    pub range: ScaleRange,
    pub method: Method,
    /// `c_w = wᵀ Σ₁ w`.
    pub c_w: f64,
    /// `n_{j1-1}`, the block count normalizing the standard error
    /// (`n` itself when `j1 = 1`).
    pub n_eff: u64,
    pub weights: WeightVector,
    pub ci: Option<ConfidenceInterval>,
}

/// Raw `Ĥ` for a range without the positivity check; used where a
/// non-positive slope is an outcome rather than an error.
pub fn slope(
    spectrum: &MaxSpectrum,
    range: ScaleRange,
    method: Method,
    cov: &CovarianceModel,
) -> Result<(f64, WeightVector)> {
    range.check_within(spectrum)?;
    let counts: Vec<u64> = range.scales().map(|j| spectrum.block_count(j)).collect();
    let w = regression_weights(range, method, cov, &counts)?;
    Ok((w.apply(|j| spectrum.y(j)), w))
}

pub fn estimate(
    spectrum: &MaxSpectrum,
    range: ScaleRange,
    method: Method,
    cov: &CovarianceModel,
) -> Result<TailEstimate> {
    let (h, weights) = slope(spectrum, range, method, cov)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Degenerate { h });
    }
    let sigma = cov.block(1, range.len())?;
    let c_w = weights.quadratic_form(&sigma);
    Ok(TailEstimate {
        h,
        alpha: 1.0 / h,
        range,
        method,
        c_w,
        n_eff: spectrum.block_count(range.base()),
        weights,
        ci: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(a: f64, h: f64, total: u64) -> MaxSpectrum {
        let j_max = 63 - total.leading_zeros();
        MaxSpectrum::from_parts(total, (1..=j_max).map(|j| a + h * j as f64).collect()).unwrap()
    }

    #[test]
    fn recovers_exact_line() {
        let s = line(0.2, 1.0 / 1.5, 1 << 15);
        let cov = CovarianceModel::default_for(15).unwrap();
        for m in [Method::Ols, Method::Wls, Method::Gls] {
            for (j1, j2) in [(1, 15), (10, 15), (3, 4), (6, 12)] {
                let e = estimate(&s, ScaleRange::new(j1, j2).unwrap(), m, &cov).unwrap();
                assert!((e.h - 2.0 / 3.0).abs() < 1e-12);
                assert!((e.alpha - 1.5).abs() < 1e-11);
                assert!((e.alpha * e.h - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn flat_spectrum_is_degenerate() {
        let s = line(3.0, 0.0, 1 << 10);
        let cov = CovarianceModel::default_for(10).unwrap();
        let err = estimate(&s, ScaleRange::new(2, 8).unwrap(), Method::Wls, &cov).unwrap_err();
        assert!(matches!(err, Error::Degenerate { h } if h.abs() < 1e-12));
    }

    #[test]
    fn n_eff_uses_base_scale() {
        let s = line(0.0, 0.5, 1000);
        let cov = CovarianceModel::default_for(9).unwrap();
        let e = estimate(&s, ScaleRange::new(3, 9).unwrap(), Method::Ols, &cov).unwrap();
        assert_eq!(e.n_eff, 1000 >> 2);
        let e = estimate(&s, ScaleRange::new(1, 9).unwrap(), Method::Ols, &cov).unwrap();
        assert_eq!(e.n_eff, 1000);
    }

    #[test]
    fn c_w_for_two_scales() {
        // w = (-1, 1): c_w = Σ₁(1,1) + Σ₁(2,2) - 2Σ₁(1,2)
        let s = line(0.0, 0.5, 1 << 8);
        let cov = CovarianceModel::default_for(8).unwrap();
        let e = estimate(&s, ScaleRange::new(5, 6).unwrap(), Method::Gls, &cov).unwrap();
        let expect = cov.get(1, 1) + cov.get(2, 2) - 2.0 * cov.get(1, 2);
        assert!((e.c_w - expect).abs() < 1e-12);
    }

    #[test]
    fn range_validation() {
        assert!(ScaleRange::new(0, 3).is_err());
        assert!(ScaleRange::new(3, 3).is_err());
        let s = line(0.0, 0.5, 64);
        let cov = CovarianceModel::default_for(6).unwrap();
        assert!(matches!(
            estimate(&s, ScaleRange::new(2, 7).unwrap(), Method::Ols, &cov),
            Err(Error::Range(_))
        ));
    }
}
