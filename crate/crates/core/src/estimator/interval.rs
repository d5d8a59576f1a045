//! Confidence intervals for α.

use serde::{Deserialize, Serialize};

use super::TailEstimate;
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::rng::{open_unit, stream_rng};
use crate::stats::{empirical_quantile, two_sided_z};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CiKind {
    #[default]
    Asymptotic,
    MonteCarlo,
}

impl CiKind {
    pub fn name(self) -> &'static str {
        match self {
            CiKind::Asymptotic => "asymptotic",
            CiKind::MonteCarlo => "montecarlo",
        }
    }
}

impl std::fmt::Display for CiKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CiKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "asymptotic" => Ok(CiKind::Asymptotic),
            "montecarlo" | "monte-carlo" => Ok(CiKind::MonteCarlo),
            other => Err(Error::config(format!("unknown interval kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    /// `+∞` when the interval for `H` reaches zero.
    pub upper: f64,
    pub level: f64,
    pub kind: CiKind,
    pub upper_unbounded: bool,
    /// Monte-Carlo intervals only: simulated paths with `Ĥ_F ≤ 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excluded: Option<usize>,
    /// Monte-Carlo intervals only: more than 5% of paths were excluded.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unstable: bool,
}

impl ConfidenceInterval {
    pub fn contains(&self, alpha: f64) -> bool {
        self.lower <= alpha && alpha <= self.upper
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "confidence level must lie in (0, 1), got {level}"
        )))
    }
}

/// Reciprocal of the symmetric interval `Ĥ ± Ĥ·z·se` for `H`, where
/// `se = sqrt(c_w / n_eff)`.
pub fn asymptotic_interval(h: f64, z: f64, se: f64, level: f64) -> ConfidenceInterval {
    let delta = h * z * se;
    let lower = 1.0 / (h + delta);
    let (upper, upper_unbounded) = if h - delta > 0.0 {
        (1.0 / (h - delta), false)
    } else {
        (f64::INFINITY, true)
    };
    ConfidenceInterval {
        lower,
        upper,
        level,
        kind: CiKind::Asymptotic,
        upper_unbounded,
        excluded: None,
        unstable: false,
    }
}

pub fn asymptotic_ci(est: &TailEstimate, level: f64) -> Result<ConfidenceInterval> {
    if !(est.h > 0.0) {
        return Err(Error::Degenerate { h: est.h });
    }
    check_level(level)?;
    let se = (est.c_w / est.n_eff as f64).sqrt();
    Ok(asymptotic_interval(est.h, two_sided_z(level), se, level))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McCiConfig {
    /// Block maxima per simulated path; defaults to `n_{j1-1}` of the estimate.
    pub r: Option<u64>,
    pub reps: usize,
    pub level: f64,
    pub seed: u64,
    #[serde(default)]
    pub exec: Execution,
}

impl McCiConfig {
    pub fn new(level: f64, seed: u64) -> Self {
        Self {
            r: None,
            reps: 1000,
            level,
            seed,
            exec: Execution::default(),
        }
    }
}

/// Simulates `reps` paths of `r` i.i.d. standard α-Fréchet variables and
/// returns `1/Σ wᵢ Yᵢ` per path (scales `1..=ℓ` of the path), ascending, along
/// with the number of paths whose slope was not positive.
///
/// Path `k` draws from stream `k` of `seed`.
pub fn pivot_sample(
    weights: &[f64],
    r: u64,
    reps: usize,
    alpha: f64,
    seed: u64,
    exec: Execution,
) -> Result<(Vec<f64>, usize)> {
    let ell = weights.len();
    if ell < 2 {
        return Err(Error::Range("need at least two weights".into()));
    }
    if ell >= 63 || r < (1u64 << ell) {
        return Err(Error::domain(format!("need r >= 2^{ell}, got {r}")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    // Block maxima commute with the increasing map U -> Z, so maxima are taken
    // on the uniforms and only the survivors are transformed.
    let paths = exec.map_indexed(reps, |k| {
        let mut rng = stream_rng(seed, k as u64);
        let mut buf: Vec<f64> = (0..r).map(|_| open_unit(&mut rng)).collect();
        let mut len = buf.len();
        let mut h = 0.0;
        for w in weights {
            len /= 2;
            for i in 0..len {
                buf[i] = buf[2 * i].max(buf[2 * i + 1]);
            }
            let y = buf[..len].iter().map(|&u| -(-u.ln()).log2()).sum::<f64>() / len as f64;
            h += w * y / alpha;
        }
        (h > 0.0).then(|| 1.0 / h)
    });
    let excluded = paths.iter().filter(|p| p.is_none()).count();
    let mut sample: Vec<f64> = paths.into_iter().flatten().collect();
    sample.sort_by(f64::total_cmp);
    Ok((sample, excluded))
}

/// Interval from the large-scale limit law of `α̂`.
///
/// Paths of i.i.d. standard 1-Fréchet variables give the law of
/// `α̂_F ≈ α̂/α`, which is free of α. Inverting that pivot gives
/// `(α̂ / q_hi, α̂ / q_lo)`.
pub fn montecarlo_ci(est: &TailEstimate, cfg: &McCiConfig) -> Result<ConfidenceInterval> {
    let mut cis = montecarlo_cis(est, cfg, &[cfg.level])?;
    Ok(cis.remove(0))
}

/// [`montecarlo_ci`] at several levels from a single simulated sample
/// (`cfg.level` is ignored).
pub fn montecarlo_cis(
    est: &TailEstimate,
    cfg: &McCiConfig,
    levels: &[f64],
) -> Result<Vec<ConfidenceInterval>> {
    if !(est.h > 0.0) {
        return Err(Error::Degenerate { h: est.h });
    }
    for &level in levels {
        check_level(level)?;
    }
    if cfg.reps < 500 {
        return Err(Error::domain(format!(
            "Monte-Carlo interval needs at least 500 replicates, got {}",
            cfg.reps
        )));
    }
    let r = cfg.r.unwrap_or(est.n_eff);
    let (sample, excluded) =
        pivot_sample(est.weights.as_slice(), r, cfg.reps, 1.0, cfg.seed, cfg.exec)?;
    if sample.is_empty() {
        return Err(Error::InsufficientData(
            "every simulated path was degenerate".into(),
        ));
    }
    Ok(levels
        .iter()
        .map(|&level| {
            let q_lo = empirical_quantile(&sample, 0.5 * (1.0 - level));
            let q_hi = empirical_quantile(&sample, 0.5 * (1.0 + level));
            ConfidenceInterval {
                lower: est.alpha / q_hi,
                upper: est.alpha / q_lo,
                level,
                kind: CiKind::MonteCarlo,
                upper_unbounded: false,
                excluded: Some(excluded),
                unstable: excluded * 20 > cfg.reps,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PivotCheck {
    pub alpha: f64,
    pub ks_distance: f64,
    pub passed: bool,
}

/// Compares `α̂_F / α` from α-Fréchet paths with `α̂_F` from 1-Fréchet paths
/// (two-sample Kolmogorov–Smirnov distance, threshold 0.05). The two samples
/// use different seeds.
pub fn pivot_scale_invariance_check(
    alpha: f64,
    weights: &[f64],
    r: u64,
    reps: usize,
    seed: u64,
) -> Result<PivotCheck> {
    let exec = Execution::default();
    let (reference, _) = pivot_sample(weights, r, reps, 1.0, seed, exec)?;
    let other_seed = if alpha == 1.0 {
        seed
    } else {
        crate::rng::derive_seed(seed, &[1])
    };
    let (mut scaled, _) = pivot_sample(weights, r, reps, alpha, other_seed, exec)?;
    for v in &mut scaled {
        *v /= alpha;
    }
    let ks_distance = ks_two_sample(&reference, &scaled);
    Ok(PivotCheck {
        alpha,
        ks_distance,
        passed: ks_distance < 0.05,
    })
}

/// Two-sample KS statistic of ascending samples.
fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}
