//! Automatic choice of the cut-off scale `j1`.
//!
//! Starting from `j1 = max(1, j2 - b)`, the range is extended one scale down at
//! a time. At each step `Ĥ_new = Ĥ(j1-1, j2)` is compared with
//! `Ĥ_old = Ĥ(j1, j2)`; the procedure stops at the first significant
//! difference (two-sided, level `p`) and keeps the last linear range.
//!
//! The variance of the difference is `Ĥ_old² · uᵀCu / n_{j0}` where `u` is the
//! difference of the two weight vectors over scales `j1-1..=j2` (old weights
//! zero-padded), `j0 = j1 - 2`, and `C(j', j'') = Σ₁(j' - j0, j'' - j0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{estimate, slope, CovarianceModel, Method, ScaleRange, TailEstimate};
use crate::spectrum::MaxSpectrum;
use crate::stats::normal_quantile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AutoSelectConfig {
    /// Significance level of each linearity test.
    pub p: f64,
    /// Back-start: the first tested range is `(j2 - b, j2)`.
    pub b: u32,
    /// Upper scale; `None` means the largest available.
    pub j2: Option<u32>,
    pub method: Method,
}

impl AutoSelectConfig {
    /// `p = 0.01`, `b = 4`: the setting used on simulated series.
    pub fn simulation() -> Self {
        Self {
            p: 0.01,
            b: 4,
            j2: None,
            method: Method::Gls,
        }
    }

    /// `p = 0.1`, `b = 3`: the setting used on real data.
    pub fn data_analysis() -> Self {
        Self {
            p: 0.1,
            b: 3,
            j2: None,
            method: Method::Wls,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::config(format!(
                "p must lie in (0, 1), got {}",
                self.p
            )));
        }
        if self.b < 2 {
            return Err(Error::config(format!("b must be >= 2, got {}", self.b)));
        }
        Ok(())
    }
}

/// One tested extension of the range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    /// `j1` of the accepted range before the test.
    pub j1: u32,
    pub h_new: f64,
    pub h_old: f64,
    /// `|Ĥ_new - Ĥ_old|`.
    pub statistic: f64,
    /// `z_{1-p/2} · sqrt(v)`.
    pub threshold: f64,
    /// Deviation from linearity detected; the search stops here.
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub j1: u32,
    pub estimate: TailEstimate,
    pub trace: Vec<SelectionStep>,
    /// The rejected extension `j1 - 1`, if the search stopped on a test.
    pub alternative_j1: Option<u32>,
}

pub fn select_j1(
    spectrum: &MaxSpectrum,
    cfg: &AutoSelectConfig,
    cov: &CovarianceModel,
) -> Result<Selection> {
    cfg.validate()?;
    let scales = spectrum.scale_count();
    if scales < cfg.b + 2 {
        return Err(Error::InsufficientData(format!(
            "automatic selection with b = {} needs at least {} scales, spectrum has {scales}",
            cfg.b,
            cfg.b + 2
        )));
    }
    let j2 = cfg.j2.unwrap_or(scales);
    if j2 > scales || j2 <= cfg.b {
        return Err(Error::config(format!(
            "j2 = {j2} must lie in ({}, {scales}]",
            cfg.b
        )));
    }
    let z = normal_quantile(1.0 - cfg.p / 2.0);

    let mut j1 = j2.saturating_sub(cfg.b).max(1);
    let mut trace = Vec::new();
    let mut alternative_j1 = None;
    let (mut h_old, mut w_old) = slope(spectrum, ScaleRange::new(j1, j2)?, cfg.method, cov)?;
    while j1 > 1 {
        let wide = ScaleRange::new(j1 - 1, j2)?;
        let (h_new, w_new) = slope(spectrum, wide, cfg.method, cov)?;

        // u over scales j1-1..=j2; base j0 = j1 - 2 puts them at offsets 1..=ℓ+1.
        let mut u: Vec<f64> = w_new.as_slice().to_vec();
        for (k, w) in w_old.as_slice().iter().enumerate() {
            u[k + 1] -= w;
        }
        let c = cov.block(1, u.len())?;
        let quad: f64 = (0..u.len())
            .flat_map(|a| (0..u.len()).map(move |b| (a, b)))
            .map(|(a, b)| u[a] * c[(a, b)] * u[b])
            .sum();
        let n_base = spectrum.block_count(j1 - 2) as f64;
        let v = h_old * h_old * quad.max(0.0) / n_base;
        let statistic = (h_new - h_old).abs();
        let threshold = z * v.sqrt();
        let rejected = statistic > threshold;
        trace.push(SelectionStep {
            j1,
            h_new,
            h_old,
            statistic,
            threshold,
            rejected,
        });
        if rejected {
            alternative_j1 = Some(j1 - 1);
            break;
        }
        j1 -= 1;
        h_old = h_new;
        w_old = w_new;
    }
    let estimate = estimate(spectrum, ScaleRange::new(j1, j2)?, cfg.method, cov)?;
    Ok(Selection {
        j1,
        estimate,
        trace,
        alternative_j1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum(ys: impl Fn(u32) -> f64) -> MaxSpectrum {
        MaxSpectrum::from_parts(1 << 15, (1..=15).map(ys).collect()).unwrap()
    }

    fn cov() -> CovarianceModel {
        CovarianceModel::default_for(15).unwrap()
    }

    #[test]
    fn exact_line_extends_to_one() {
        let s = spectrum(|j| 0.4 + j as f64 / 1.5);
        for method in [Method::Ols, Method::Wls, Method::Gls] {
            let cfg = AutoSelectConfig {
                method,
                ..AutoSelectConfig::simulation()
            };
            let sel = select_j1(&s, &cfg, &cov()).unwrap();
            assert_eq!(sel.j1, 1);
            assert_eq!(sel.trace.len(), 10);
            assert!(sel.trace.iter().all(|t| !t.rejected));
            assert_eq!(sel.alternative_j1, None);
            assert!((sel.estimate.alpha - 1.5).abs() < 1e-9);
        }
    }

    #[test]
    fn stops_at_step() {
        for j_star in [4, 7, 9] {
            let s = spectrum(|j| 0.4 + j as f64 / 1.5 - if j < j_star { 3.0 } else { 0.0 });
            let sel = select_j1(&s, &AutoSelectConfig::simulation(), &cov()).unwrap();
            assert_eq!(sel.j1, j_star);
            assert_eq!(sel.alternative_j1, Some(j_star - 1));
            assert!(sel.trace.last().unwrap().rejected);
            assert!((sel.estimate.alpha - 1.5).abs() < 1e-9);
        }
    }

    #[test]
    fn trace_is_monotone_and_bounded() {
        let s = spectrum(|j| (j as f64).sqrt() * 1.3);
        let cfg = AutoSelectConfig::data_analysis();
        let sel = select_j1(&s, &cfg, &cov()).unwrap();
        assert!(sel.j1 >= 1 && sel.j1 <= 12);
        let tested: Vec<u32> = sel.trace.iter().map(|t| t.j1).collect();
        assert_eq!(tested[0], 12);
        assert!(tested.windows(2).all(|w| w[1] + 1 == w[0]));
        let again = select_j1(&s, &cfg, &cov()).unwrap();
        assert_eq!(again, sel);
    }

    #[test]
    fn rejects_short_spectra_and_bad_config() {
        let s = MaxSpectrum::from_parts(32, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert!(matches!(
            select_j1(&s, &AutoSelectConfig::simulation(), &cov()),
            Err(Error::InsufficientData(_))
        ));
        let s = spectrum(|j| j as f64);
        let mut cfg = AutoSelectConfig::simulation();
        cfg.p = 1.5;
        assert!(select_j1(&s, &cfg, &cov()).is_err());
        cfg.p = 0.05;
        cfg.b = 1;
        assert!(select_j1(&s, &cfg, &cov()).is_err());
    }
}
