//! Monte-Carlo harness: confidence-interval coverage tables and the `j1`
//! selection / MSE study.
//!
//! Replicate `i` always generates its series from stream `i` of the
//! experiment seed, whatever the sweep position, so cells for different `φ`,
//! `j1` and levels share their random numbers and adding replicates never
//! changes existing ones.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::autoselect::{select_j1, AutoSelectConfig};
use crate::error::{Error, Result};
use crate::estimator::{
    asymptotic_ci, estimate, montecarlo_cis, slope, CiKind, CovarianceModel, McCiConfig, Method,
    ScaleRange,
};
use crate::generators::Model;
use crate::par::Execution;
use crate::rng::{derive_seed, stream_rng};
use crate::spectrum::MaxSpectrum;

fn default_mc_reps() -> usize {
    1000
}

fn default_levels() -> Vec<f64> {
    vec![0.90, 0.95, 0.99]
}

/// Declarative description of a coverage table. Deserializable from TOML:
///
/// ```toml
/// n = 32768
/// phis = [0.1, 0.5, 0.9]
/// j1 = [5, 6, 8, 10]
/// levels = [0.95]
/// ci = "asymptotic"          # or "montecarlo"
/// method = "gls"
/// reps = 500
/// mc_reps = 1000             # Monte-Carlo intervals only
/// seed = 1
///
/// [model]
/// variant = "max_ar1_frechet"
/// alpha = 1.5
/// phi = 0.0                  # replaced by each entry of `phis`
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageSpec {
    pub model: Model,
    pub n: usize,
    /// AR coefficients to sweep; empty keeps the model's own.
    #[serde(default)]
    pub phis: Vec<f64>,
    pub j1: Vec<u32>,
    /// Upper scale; defaults to `⌊log2 n⌋`.
    #[serde(default)]
    pub j2: Option<u32>,
    #[serde(default)]
    pub ci: CiKind,
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    #[serde(default)]
    pub method: Method,
    pub reps: usize,
    #[serde(default = "default_mc_reps")]
    pub mc_reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub exec: Execution,
}

impl CoverageSpec {
    fn validate(&self) -> Result<(Vec<Model>, u32)> {
        if self.reps < 100 {
            return Err(Error::config(format!(
                "reps must be >= 100, got {}",
                self.reps
            )));
        }
        if self.levels.is_empty() || self.levels.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
            return Err(Error::config("levels must be a non-empty subset of (0, 1)"));
        }
        if self.j1.is_empty() {
            return Err(Error::config("j1 grid is empty"));
        }
        if self.n < 4 {
            return Err(Error::config("n must be at least 4"));
        }
        let scales = 63 - (self.n as u64).leading_zeros();
        let j2 = self.j2.unwrap_or(scales);
        if j2 > scales {
            return Err(Error::config(format!(
                "j2 = {j2} exceeds the {scales} available scales"
            )));
        }
        for &j1 in &self.j1 {
            ScaleRange::new(j1, j2).map_err(|e| Error::config(e.to_string()))?;
        }
        let models = if self.phis.is_empty() {
            self.model.validate()?;
            vec![self.model.clone()]
        } else {
            self.phis
                .iter()
                .map(|&phi| self.model.with_phi(phi))
                .collect::<Result<_>>()?
        };
        Ok((models, j2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageCell {
    /// `None` for models without an AR coefficient.
    pub phi: Option<f64>,
    pub j1: u32,
    pub level: f64,
    /// Replicates whose interval contains the true α.
    pub covered: usize,
    /// Replicates with a defined interval (the coverage denominator).
    pub valid: usize,
    /// Replicates whose estimate was degenerate (`Ĥ ≤ 0`).
    pub degenerate: usize,
    pub coverage: f64,
    /// `sqrt(c(1-c)/valid)`.
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub alpha: f64,
    pub n: usize,
    pub j2: u32,
    pub ci: CiKind,
    pub method: Method,
    pub reps: usize,
    pub seed: u64,
    pub cells: Vec<CoverageCell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Covered,
    Missed,
    Degenerate,
    Undefined,
}

pub fn run_coverage(spec: &CoverageSpec) -> Result<CoverageResult> {
    let (models, j2) = spec.validate()?;
    let cov = CovarianceModel::default_for(j2 as usize)?;
    let alpha = spec.model.alpha();
    let n_levels = spec.levels.len();
    let mut cells = Vec::new();

    for model in &models {
        let outcomes: Vec<Result<Vec<Outcome>>> = spec.exec.map_indexed(spec.reps, |i| {
            let series = model.generate(spec.n, &mut stream_rng(spec.seed, i as u64))?;
            let spectrum = MaxSpectrum::from_series(&series)?;
            let mut out = Vec::with_capacity(spec.j1.len() * n_levels);
            for &j1 in &spec.j1 {
                let range = ScaleRange::new(j1, j2)?;
                let est = match estimate(&spectrum, range, spec.method, &cov) {
                    Ok(e) => e,
                    Err(Error::Degenerate { .. }) => {
                        out.extend(std::iter::repeat_n(Outcome::Degenerate, n_levels));
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let cis = match spec.ci {
                    CiKind::Asymptotic => spec
                        .levels
                        .iter()
                        .map(|&l| asymptotic_ci(&est, l))
                        .collect::<Result<Vec<_>>>()?,
                    CiKind::MonteCarlo => {
                        let cfg = McCiConfig {
                            r: None,
                            reps: spec.mc_reps,
                            level: spec.levels[0],
                            seed: derive_seed(spec.seed, &[i as u64, u64::from(j1)]),
                            exec: Execution::Sequential,
                        };
                        match montecarlo_cis(&est, &cfg, &spec.levels) {
                            Ok(cis) => cis,
                            Err(Error::InsufficientData(_)) => {
                                out.extend(std::iter::repeat_n(Outcome::Undefined, n_levels));
                                continue;
                            }
                            Err(e) => return Err(e),
                        }
                    }
                };
                out.extend(cis.iter().map(|ci| {
                    if ci.contains(alpha) {
                        Outcome::Covered
                    } else {
                        Outcome::Missed
                    }
                }));
            }
            Ok(out)
        });
        let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

        for (a, &j1) in spec.j1.iter().enumerate() {
            for (b, &level) in spec.levels.iter().enumerate() {
                let idx = a * n_levels + b;
                let count = |o: Outcome| outcomes.iter().filter(|r| r[idx] == o).count();
                let covered = count(Outcome::Covered);
                let valid = covered + count(Outcome::Missed);
                let coverage = if valid > 0 {
                    covered as f64 / valid as f64
                } else {
                    f64::NAN
                };
                cells.push(CoverageCell {
                    phi: model.phi(),
                    j1,
                    level,
                    covered,
                    valid,
                    degenerate: count(Outcome::Degenerate),
                    coverage,
                    std_error: (coverage * (1.0 - coverage) / valid as f64).sqrt(),
                });
            }
        }
    }
    Ok(CoverageResult {
        alpha,
        n: spec.n,
        j2,
        ci: spec.ci,
        method: spec.method,
        reps: spec.reps,
        seed: spec.seed,
        cells,
    })
}

impl CoverageResult {
    pub fn cell(&self, phi: Option<f64>, j1: u32, level: f64) -> Option<&CoverageCell> {
        self.cells
            .iter()
            .find(|c| c.phi == phi && c.j1 == j1 && (c.level - level).abs() < 1e-12)
    }

    fn wide(&self, value: impl Fn(&CoverageCell) -> f64) -> String {
        let mut j1s: Vec<u32> = self.cells.iter().map(|c| c.j1).collect();
        j1s.sort_unstable();
        j1s.dedup();
        let mut rows: Vec<(f64, Option<f64>)> = Vec::new();
        for c in &self.cells {
            if !rows.iter().any(|&(l, p)| l == c.level && p == c.phi) {
                rows.push((c.level, c.phi));
            }
        }
        rows.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then(a.1.unwrap_or(0.0).total_cmp(&b.1.unwrap_or(0.0)))
        });

        let mut out = String::from("level,phi");
        for j1 in &j1s {
            let _ = write!(out, ",j1={j1}");
        }
        out.push('\n');
        for (level, phi) in rows {
            let _ = write!(
                out,
                "{level},{}",
                phi.map(|p| p.to_string()).unwrap_or_default()
            );
            for &j1 in &j1s {
                match self.cell(phi, j1, level) {
                    Some(c) => {
                        let _ = write!(out, ",{:.3}", value(c));
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Coverage laid out like the published tables: one row per
    /// `(level, φ)`, one column per `j1`.
    pub fn coverage_table(&self) -> String {
        self.wide(|c| c.coverage)
    }

    /// Companion table of Monte-Carlo standard errors.
    pub fn std_error_table(&self) -> String {
        self.wide(|c| c.std_error)
    }

    /// One row per cell with all counts.
    pub fn long_table(&self) -> String {
        let mut out = String::from("phi,j1,level,covered,valid,degenerate,coverage,std_error\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{:.6},{:.6}",
                c.phi.map(|p| p.to_string()).unwrap_or_default(),
                c.j1,
                c.level,
                c.covered,
                c.valid,
                c.degenerate,
                c.coverage,
                c.std_error
            );
        }
        out
    }
}

/// Whether a desk-scale coverage reproduces a published one:
/// `|desk - paper| ≤ max(0.03, 3·sqrt(se_desk² + se_paper²))`.
pub fn reproduces(desk: &CoverageCell, published: f64, published_reps: usize) -> bool {
    let se_paper2 = published * (1.0 - published) / published_reps as f64;
    let combined = (desk.std_error * desk.std_error + se_paper2).sqrt();
    (desk.coverage - published).abs() <= 0.03f64.max(3.0 * combined)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmsePoint {
    pub j1: u32,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseCurve {
    pub j2: u32,
    pub points: Vec<RmsePoint>,
    pub argmin: u32,
}

fn curve_from(j2: u32, sq_errors: &[Vec<f64>]) -> MseCurve {
    let reps = sq_errors.len() as f64;
    let points: Vec<RmsePoint> = (1..j2)
        .map(|j1| RmsePoint {
            j1,
            rmse: (sq_errors.iter().map(|r| r[j1 as usize - 1]).sum::<f64>() / reps).sqrt(),
        })
        .collect();
    let argmin = points
        .iter()
        .min_by(|a, b| a.rmse.total_cmp(&b.rmse))
        .map_or(1, |p| p.j1);
    MseCurve { j2, points, argmin }
}

/// `(Ĥ(j1, j2) - H)²` for `j1 = 1..j2`.
fn squared_errors(
    spectrum: &MaxSpectrum,
    j2: u32,
    true_h: f64,
    method: Method,
    cov: &CovarianceModel,
) -> Result<Vec<f64>> {
    (1..j2)
        .map(|j1| {
            let (h, _) = slope(spectrum, ScaleRange::new(j1, j2)?, method, cov)?;
            Ok((h - true_h) * (h - true_h))
        })
        .collect()
}

fn resolve_j2(n: usize, j2: Option<u32>) -> Result<u32> {
    let scales = 63 - (n as u64).leading_zeros();
    let j2 = j2.unwrap_or(scales);
    if j2 < 2 || j2 > scales {
        return Err(Error::config(format!("j2 = {j2} outside 2..={scales}")));
    }
    Ok(j2)
}

/// Root-mean-squared error of `Ĥ(j1, j2)` against `true_h` for every `j1 < j2`.
#[allow(clippy::too_many_arguments)]
pub fn mse_curve(
    model: &Model,
    n: usize,
    true_h: f64,
    reps: usize,
    j2: Option<u32>,
    method: Method,
    seed: u64,
    exec: Execution,
) -> Result<MseCurve> {
    model.validate()?;
    if reps == 0 {
        return Err(Error::config("reps must be positive"));
    }
    let j2 = resolve_j2(n, j2)?;
    let cov = CovarianceModel::default_for(j2 as usize)?;
    let errs = exec
        .map_indexed(reps, |i| {
            let series = model.generate(n, &mut stream_rng(seed, i as u64))?;
            squared_errors(
                &MaxSpectrum::from_series(&series)?,
                j2,
                true_h,
                method,
                &cov,
            )
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(curve_from(j2, &errs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionStudySpec {
    pub model: Model,
    pub n: usize,
    pub auto: AutoSelectConfig,
    pub reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub exec: Execution,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStudy {
    pub reps: usize,
    /// `(j1, count)` in increasing `j1`.
    pub j1_histogram: Vec<(u32, usize)>,
    pub modal_j1: u32,
    pub modal_share: f64,
    /// Replicates whose selected range gave `Ĥ ≤ 0`.
    pub degenerate: usize,
    pub alpha_mean: f64,
    pub alpha_histogram: Vec<HistogramBin>,
    pub rmse: MseCurve,
}

/// Equal-width histogram with bin edges on multiples of `width`.
pub fn histogram(values: &[f64], width: f64) -> Vec<HistogramBin> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Vec::new();
    }
    let lo = (finite.iter().copied().fold(f64::INFINITY, f64::min) / width).floor() as i64;
    let hi = (finite.iter().copied().fold(f64::NEG_INFINITY, f64::max) / width).floor() as i64;
    let mut counts = vec![0usize; (hi - lo + 1) as usize];
    for v in finite {
        counts[((v / width).floor() as i64 - lo) as usize] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin {
            lower: (lo + k as i64) as f64 * width,
            upper: (lo + k as i64 + 1) as f64 * width,
            count,
        })
        .collect()
}

/// Selected-`j1` histogram, `α̂` histogram and RMSE curve over common
/// replicates.
pub fn run_selection_study(spec: &SelectionStudySpec) -> Result<SelectionStudy> {
    spec.model.validate()?;
    if spec.reps < 100 {
        return Err(Error::config(format!(
            "reps must be >= 100, got {}",
            spec.reps
        )));
    }
    let j2 = resolve_j2(spec.n, spec.auto.j2)?;
    let cov = CovarianceModel::default_for(j2 as usize)?;
    let true_h = 1.0 / spec.model.alpha();
    let auto = AutoSelectConfig {
        j2: Some(j2),
        ..spec.auto
    };

    let per_rep = spec
        .exec
        .map_indexed(spec.reps, |i| -> Result<_> {
            let series = spec
                .model
                .generate(spec.n, &mut stream_rng(spec.seed, i as u64))?;
            let spectrum = MaxSpectrum::from_series(&series)?;
            let sq = squared_errors(&spectrum, j2, true_h, auto.method, &cov)?;
            let picked = match select_j1(&spectrum, &auto, &cov) {
                Ok(sel) => Some((sel.j1, sel.estimate.alpha)),
                Err(Error::Degenerate { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok((picked, sq))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    let mut alphas = Vec::new();
    let mut degenerate = 0;
    let mut sq_errors = Vec::with_capacity(per_rep.len());
    for (picked, sq) in per_rep {
        match picked {
            Some((j1, a)) => {
                *counts.entry(j1).or_default() += 1;
                alphas.push(a);
            }
            None => degenerate += 1,
        }
        sq_errors.push(sq);
    }
    let (modal_j1, modal_count) = counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map_or((0, 0), |(j, c)| (*j, *c));
    Ok(SelectionStudy {
        reps: spec.reps,
        j1_histogram: counts.into_iter().collect(),
        modal_j1,
        modal_share: modal_count as f64 / spec.reps as f64,
        degenerate,
        alpha_mean: alphas.iter().sum::<f64>() / alphas.len().max(1) as f64,
        alpha_histogram: histogram(&alphas, 0.05),
        rmse: curve_from(j2, &sq_errors),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> CoverageSpec {
        CoverageSpec {
            model: Model::MaxAr1Frechet {
                alpha: 1.5,
                phi: 0.0,
            },
            n: 1 << 10,
            phis: vec![0.1, 0.5],
            j1: vec![3, 5],
            j2: None,
            ci: CiKind::Asymptotic,
            levels: vec![0.9, 0.95],
            method: Method::Gls,
            reps: 120,
            mc_reps: 1000,
            seed: 3,
            exec: Execution::Parallel,
        }
    }

    #[test]
    fn coverage_is_deterministic_across_execution() {
        let mut spec = small_spec();
        let a = run_coverage(&spec).unwrap();
        spec.exec = Execution::Sequential;
        let b = run_coverage(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cells.len(), 2 * 2 * 2);
        for c in &a.cells {
            assert!((0.0..=1.0).contains(&c.coverage));
            assert_eq!(c.valid + c.degenerate, 120);
            let se = (c.coverage * (1.0 - c.coverage) / c.valid as f64).sqrt();
            assert!((c.std_error - se).abs() < 1e-15);
        }
    }

    #[test]
    fn extending_reps_keeps_existing_streams() {
        let mut spec = small_spec();
        spec.phis = vec![0.5];
        spec.j1 = vec![4];
        spec.levels = vec![0.95];
        let a = run_coverage(&spec).unwrap();
        spec.reps = 240;
        let b = run_coverage(&spec).unwrap();
        // The first 120 replicates are shared, so the covered count can only grow.
        assert!(b.cells[0].covered >= a.cells[0].covered);
        assert!(b.cells[0].covered - a.cells[0].covered <= 120);
    }

    #[test]
    fn tables_have_expected_shape() {
        let r = run_coverage(&small_spec()).unwrap();
        let t = r.coverage_table();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "level,phi,j1=3,j1=5");
        assert_eq!(lines.len(), 1 + 4);
        assert!(lines[1].starts_with("0.9,0.1,"));
        assert_eq!(r.std_error_table().lines().count(), 5);
        assert_eq!(r.long_table().lines().count(), 9);
    }

    #[test]
    fn spec_validation() {
        let mut s = small_spec();
        s.reps = 50;
        assert!(run_coverage(&s).is_err());
        let mut s = small_spec();
        s.levels = vec![1.0];
        assert!(run_coverage(&s).is_err());
        let mut s = small_spec();
        s.j1 = vec![10];
        assert!(run_coverage(&s).is_err());
        let mut s = small_spec();
        s.model = Model::IidFrechet { alpha: 1.5 };
        assert!(run_coverage(&s).is_err());
    }

    #[test]
    fn single_replicate_rmse_is_absolute_error() {
        let model = Model::IidFrechet { alpha: 1.5 };
        let curve = mse_curve(
            &model,
            1 << 10,
            1.0 / 1.5,
            1,
            None,
            Method::Wls,
            5,
            Execution::Sequential,
        )
        .unwrap();
        let series = model.generate(1 << 10, &mut stream_rng(5, 0)).unwrap();
        let s = MaxSpectrum::from_series(&series).unwrap();
        let cov = CovarianceModel::default_for(10).unwrap();
        for p in &curve.points {
            let (h, _) = slope(&s, ScaleRange::new(p.j1, 10).unwrap(), Method::Wls, &cov).unwrap();
            assert!((p.rmse - (h - 1.0 / 1.5).abs()).abs() < 1e-15);
        }
        assert_eq!(curve.points.len(), 9);
    }

    #[test]
    fn histogram_bins() {
        let h = histogram(&[1.01, 1.02, 1.07, 1.24], 0.05);
        assert_eq!(h.len(), 5);
        assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), 4);
        assert_eq!(h[0].count, 2);
        assert!((h[0].lower - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reproduction_rule() {
        let cell = CoverageCell {
            phi: Some(0.5),
            j1: 6,
            level: 0.95,
            covered: 475,
            valid: 500,
            degenerate: 0,
            coverage: 0.95,
            std_error: (0.95f64 * 0.05 / 500.0).sqrt(),
        };
        assert!(reproduces(&cell, 0.954, 1000));
        assert!(reproduces(&cell, 0.925, 1000));
        assert!(!reproduces(&cell, 0.85, 1000));
    }
}
