//! The asymptotic covariance `Σ₁` of the max-spectrum.
//!
//! For offsets `i', i'' ≥ 1` above a base scale,
//! `Σ₁(i', i'') = 2^max(i', i'') · Cov(log2 Z₁, log2(Z₁ ∨ c Z₂))` with
//! `c = 2^|i'-i''| - 1` and `Z₁, Z₂` independent standard 1-Fréchet.
//! The power of two counts the coarse blocks per base block: each fine block
//! is correlated with exactly one coarse block, so `n_base · Cov(Y_{i'}, Y_{i''})`
//! carries the block count of the coarser scale.
//!
//! With `T = 1/Z₁ ~ Exp(1)` and conditioning on `Z₁` the covariance reduces to
//! `Cov(ln Z₁, ln(Z₁ ∨ c Z₂)) = π²/6 - ∫₀ᶜ ln(1+s) / (s(1+s)) ds`,
//! which [`CovarianceMode::Quadrature`] integrates numerically. The
//! Monte-Carlo mode estimates the same covariances from paired draws.

use std::f64::consts::{LN_2, PI};
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::quadrature::integrate;
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::rng::{open_unit, stream_rng};

/// Shipped `Σ₁` table for `ℓ ≤ 15`.
const DEFAULT_TABLE: &str = include_str!("../../data/sigma1_l15.txt");

pub const TABLE_FORMAT_TAG: &str = "maxspec-sigma1";
pub const TABLE_FORMAT_VERSION: u32 = 1;

const MC_CHUNKS: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum CovarianceMode {
    Quadrature,
    MonteCarlo { samples: u64, seed: u64 },
}

/// `Σ₁` over offsets `1..=ℓ`, with how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceModel {
    ell: usize,
    /// Row-major `ℓ×ℓ` entries.
    entries: Vec<f64>,
    /// Monte-Carlo standard errors of the entries, when estimated.
    std_errors: Option<Vec<f64>>,
    provenance: CovarianceMode,
}

/// Natural-log covariance `Cov(ln Z₁, ln(Z₁ ∨ c Z₂))` for offset `d`
/// (`c = 2^d - 1`), by quadrature.
pub fn ln_covariance_quadrature(d: u32) -> Result<f64> {
    let var = PI * PI / 6.0;
    if d == 0 {
        return Ok(var);
    }
    let c = 2f64.powi(d as i32) - 1.0;
    let integrand = |s: f64| {
        if s == 0.0 {
            1.0
        } else {
            s.ln_1p() / (s * (1.0 + s))
        }
    };
    let tol = 1e-14;
    let mut total = integrate(integrand, 0.0, c.min(1.0), tol, tol, 2000)?;
    if c > 1.0 {
        // s = e^t on [1, c] keeps the slowly decaying tail smooth.
        let in_log = |t: f64| {
            let s = t.exp();
            s.ln_1p() / (1.0 + s)
        };
        total += integrate(in_log, 0.0, c.ln(), tol, tol, 2000)?;
    }
    Ok(var - total)
}

impl CovarianceModel {
    /// Builds `Σ₁` from per-offset-difference covariances `g[d]` (log2 units).
    fn from_differences(
        ell: usize,
        g: &[f64],
        g_se: Option<&[f64]>,
        provenance: CovarianceMode,
    ) -> Self {
        let mut entries = vec![0.0; ell * ell];
        let mut std_errors = g_se.map(|_| vec![0.0; ell * ell]);
        for r in 0..ell {
            for c in 0..ell {
                let d = r.abs_diff(c);
                let scale = 2f64.powi(r.max(c) as i32 + 1);
                entries[r * ell + c] = scale * g[d];
                if let (Some(se), Some(out)) = (g_se, std_errors.as_mut()) {
                    out[r * ell + c] = scale * se[d];
                }
            }
        }
        Self {
            ell,
            entries,
            std_errors,
            provenance,
        }
    }

    pub fn quadrature(ell: usize) -> Result<Self> {
        check_ell(ell)?;
        let g = (0..ell as u32)
            .map(|d| ln_covariance_quadrature(d).map(|v| v / (LN_2 * LN_2)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_differences(
            ell,
            &g,
            None,
            CovarianceMode::Quadrature,
        ))
    }

    /// Monte-Carlo estimate from `samples` paired draws, with a standard
    /// error for every entry.
    pub fn monte_carlo(ell: usize, samples: u64, seed: u64, exec: Execution) -> Result<Self> {
        check_ell(ell)?;
        if samples < 1_000_000 {
            return Err(Error::domain(format!(
                "Monte-Carlo sigma1 needs at least 10^6 samples, got {samples}"
            )));
        }
        let (g, se) = mc_ln2_covariances(ell, samples, seed, exec);
        Ok(Self::from_differences(
            ell,
            &g,
            Some(&se),
            CovarianceMode::MonteCarlo { samples, seed },
        ))
    }

    /// The shipped table, truncated to `ℓ`; larger `ℓ` falls back to quadrature.
    pub fn default_for(ell: usize) -> Result<Self> {
        let table = Self::parse_table(DEFAULT_TABLE)?;
        if ell <= table.ell {
            table.truncated(ell)
        } else {
            Self::quadrature(ell)
        }
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn provenance(&self) -> CovarianceMode {
        self.provenance
    }

    /// Entry at 1-based offsets.
    pub fn get(&self, i1: usize, i2: usize) -> f64 {
        assert!(
            (1..=self.ell).contains(&i1) && (1..=self.ell).contains(&i2),
            "offset out of range"
        );
        self.entries[(i1 - 1) * self.ell + (i2 - 1)]
    }

    pub fn std_error(&self, i1: usize, i2: usize) -> Option<f64> {
        self.std_errors
            .as_ref()
            .map(|se| se[(i1 - 1) * self.ell + (i2 - 1)])
    }

    /// Leading `ℓ×ℓ` block (offsets `1..=ℓ`).
    pub fn truncated(&self, ell: usize) -> Result<Self> {
        check_ell(ell)?;
        if ell > self.ell {
            return Err(Error::Covariance(format!(
                "requested {ell} offsets from a table with {}",
                self.ell
            )));
        }
        let pick = |v: &Vec<f64>| {
            (0..ell)
                .flat_map(|r| (0..ell).map(move |c| (r, c)))
                .map(|(r, c)| v[r * self.ell + c])
                .collect::<Vec<_>>()
        };
        Ok(Self {
            ell,
            entries: pick(&self.entries),
            std_errors: self.std_errors.as_ref().map(pick),
            provenance: self.provenance,
        })
    }

    /// Block over offsets `first..first+len` as a dense matrix.
    pub(crate) fn block(&self, first: usize, len: usize) -> Result<DMatrix<f64>> {
        if first == 0 || first + len - 1 > self.ell {
            return Err(Error::Covariance(format!(
                "offsets {first}..{} exceed the {}-offset model",
                first + len - 1,
                self.ell
            )));
        }
        Ok(DMatrix::from_fn(len, len, |r, c| {
            self.get(first + r, first + c)
        }))
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.ell, self.ell, &self.entries)
    }

    /// Symmetric, and positive semidefinite in the sense
    /// `λ_min > -1e-8 · λ_max`.
    pub fn validate(&self) -> Result<()> {
        let m = self.to_matrix();
        for r in 0..self.ell {
            for c in 0..r {
                let (a, b) = (m[(r, c)], m[(c, r)]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::Covariance(format!(
                        "not symmetric at ({}, {})",
                        r + 1,
                        c + 1
                    )));
                }
            }
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Covariance("non-finite entry".into()));
        }
        let eig = SymmetricEigen::new(m).eigenvalues;
        let max = eig.max();
        let min = eig.min();
        if min < -1e-8 * max.abs() {
            return Err(Error::Covariance(format!(
                "not positive semidefinite: eigenvalues span [{min:e}, {max:e}]"
            )));
        }
        Ok(())
    }

    /// Serializes to the versioned text table format:
    ///
    /// ```text
    /// maxspec-sigma1 1
    /// ell 3
    /// mode montecarlo
    /// samples 10000000
    /// seed 42
    /// row 1 <ℓ values>
    /// ...
    /// se 1 <ℓ values>        (Monte-Carlo tables only)
    /// ...
    /// ```
    ///
    /// Blank lines and lines starting with `#` are ignored on input. For
    /// quadrature tables `samples` and `seed` are 0.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let (mode, samples, seed) = match self.provenance {
            CovarianceMode::Quadrature => ("quadrature", 0, 0),
            CovarianceMode::MonteCarlo { samples, seed } => ("montecarlo", samples, seed),
        };
        let _ = writeln!(out, "{TABLE_FORMAT_TAG} {TABLE_FORMAT_VERSION}");
        let _ = writeln!(out, "ell {}", self.ell);
        let _ = writeln!(out, "mode {mode}");
        let _ = writeln!(out, "samples {samples}");
        let _ = writeln!(out, "seed {seed}");
        let write_rows = |out: &mut String, key: &str, v: &[f64]| {
            for r in 0..self.ell {
                let _ = write!(out, "{key} {}", r + 1);
                for c in 0..self.ell {
                    let _ = write!(out, " {:e}", v[r * self.ell + c]);
                }
                out.push('\n');
            }
        };
        write_rows(&mut out, "row", &self.entries);
        if let Some(se) = &self.std_errors {
            write_rows(&mut out, "se", se);
        }
        out
    }

    pub fn parse_table(text: &str) -> Result<Self> {
        let bad = |line: usize, message: String| Error::TableFormat { line, message };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let mut header = |key: &str| -> Result<(usize, String)> {
            let (no, line) = lines
                .next()
                .ok_or_else(|| bad(0, format!("missing `{key}` line")))?;
            let mut parts = line.splitn(2, ' ');
            if parts.next() != Some(key) {
                return Err(bad(no, format!("expected `{key}`")));
            }
            Ok((no, parts.next().unwrap_or("").trim().to_string()))
        };
        let (no, version) = header(TABLE_FORMAT_TAG)?;
        if version.parse::<u32>().ok() != Some(TABLE_FORMAT_VERSION) {
            return Err(bad(no, format!("unsupported version `{version}`")));
        }
        let (no, ell) = header("ell")?;
        let ell: usize = ell
            .parse()
            .map_err(|_| bad(no, format!("bad ell `{ell}`")))?;
        check_ell(ell).map_err(|e| bad(no, e.to_string()))?;
        let (no, mode) = header("mode")?;
        let (sno, samples) = header("samples")?;
        let samples: u64 = samples
            .parse()
            .map_err(|_| bad(sno, format!("bad sample count `{samples}`")))?;
        let (eno, seed) = header("seed")?;
        let seed: u64 = seed
            .parse()
            .map_err(|_| bad(eno, format!("bad seed `{seed}`")))?;
        let provenance = match mode.as_str() {
            "quadrature" => CovarianceMode::Quadrature,
            "montecarlo" => CovarianceMode::MonteCarlo { samples, seed },
            other => return Err(bad(no, format!("unknown mode `{other}`"))),
        };

        let mut entries = vec![f64::NAN; ell * ell];
        let mut std_errors: Option<Vec<f64>> = None;
        let mut seen_rows = vec![false; ell];
        for (no, line) in lines {
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap_or_default();
            let target = match key {
                "row" => &mut entries,
                "se" => std_errors.get_or_insert_with(|| vec![f64::NAN; ell * ell]),
                other => return Err(bad(no, format!("unexpected key `{other}`"))),
            };
            let r: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .filter(|r| (1..=ell).contains(r))
                .ok_or_else(|| bad(no, "bad row index".into()))?;
            let values = parts
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| bad(no, format!("bad value: {e}")))?;
            if values.len() != ell {
                return Err(bad(
                    no,
                    format!("expected {ell} values, got {}", values.len()),
                ));
            }
            if key == "row" {
                seen_rows[r - 1] = true;
            }
            target[(r - 1) * ell..r * ell].copy_from_slice(&values);
        }
        if let Some(missing) = seen_rows.iter().position(|s| !s) {
            return Err(bad(0, format!("missing row {}", missing + 1)));
        }
        if std_errors
            .as_ref()
            .is_some_and(|se| se.iter().any(|v| v.is_nan()))
        {
            return Err(bad(0, "incomplete se rows".into()));
        }
        let model = Self {
            ell,
            entries,
            std_errors,
            provenance,
        };
        model.validate()?;
        Ok(model)
    }
}

fn check_ell(ell: usize) -> Result<()> {
    if (2..=62).contains(&ell) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "sigma1 needs 2 <= ell <= 62, got {ell}"
        )))
    }
}

/// Monte-Carlo estimates (and standard errors) of
/// `Cov(log2 Z₁, log2(Z₁ ∨ (2^d - 1) Z₂))` for `d = 0..ell`, sharing the
/// same draws across `d`. Work is split into fixed chunks, each with its own
/// stream, and reduced in chunk order.
fn mc_ln2_covariances(
    ell: usize,
    samples: u64,
    seed: u64,
    exec: Execution,
) -> (Vec<f64>, Vec<f64>) {
    let cs: Vec<f64> = (0..ell as i32).map(|d| 2f64.powi(d) - 1.0).collect();
    let per_chunk = samples / MC_CHUNKS;
    let remainder = samples % MC_CHUNKS;

    // Per chunk and per d: Σa, Σb, Σab, Σ(ab)² with a, b centred at their
    // exact means, which keeps the sums well conditioned.
    let mean_a = crate::frechet::EULER_GAMMA / LN_2;
    let chunks = exec.map_indexed(MC_CHUNKS as usize, |chunk| {
        let count = per_chunk + u64::from((chunk as u64) < remainder);
        let mut rng = stream_rng(seed, chunk as u64);
        let mut acc = vec![[0.0f64; 4]; ell];
        let mut sum_a = 0.0;
        for _ in 0..count {
            let z1 = -open_unit(&mut rng).ln();
            let z2 = -open_unit(&mut rng).ln();
            // z here is 1/Z for Z standard 1-Fréchet.
            let log_z1 = -z1.log2();
            let a = log_z1 - mean_a;
            sum_a += a;
            for (d, &c) in cs.iter().enumerate() {
                // Z₁ ∨ c Z₂ = 1 / min(1/Z₁, (1/Z₂)/c)
                let log_m = if c == 0.0 {
                    log_z1
                } else {
                    -(z1.min(z2 / c)).log2()
                };
                let mean_b = (crate::frechet::EULER_GAMMA + c.ln_1p()) / LN_2;
                let b = log_m - mean_b;
                let ab = a * b;
                let s = &mut acc[d];
                s[1] += b;
                s[2] += ab;
                s[3] += ab * ab;
            }
        }
        for s in &mut acc {
            s[0] = sum_a;
        }
        (count, acc)
    });

    let mut total = 0u64;
    let mut sums = vec![[0.0f64; 4]; ell];
    for (count, acc) in chunks {
        total += count;
        for (s, a) in sums.iter_mut().zip(acc) {
            for k in 0..4 {
                s[k] += a[k];
            }
        }
    }
    let n = total as f64;
    let mut cov = Vec::with_capacity(ell);
    let mut se = Vec::with_capacity(ell);
    for s in sums {
        let ma = s[0] / n;
        let mb = s[1] / n;
        let mab = s[2] / n;
        let c = (mab - ma * mb) * n / (n - 1.0);
        let var_ab = (s[3] / n - mab * mab).max(0.0);
        cov.push(c);
        se.push((var_ab / n).sqrt());
    }
    (cov, se)
}

/// Computes `Σ₁` over offsets `1..=ell`.
pub fn sigma1_matrix(ell: usize, mode: CovarianceMode) -> Result<CovarianceModel> {
    match mode {
        CovarianceMode::Quadrature => CovarianceModel::quadrature(ell),
        CovarianceMode::MonteCarlo { samples, seed } => {
            CovarianceModel::monte_carlo(ell, samples, seed, Execution::default())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_is_exact() {
        let m = CovarianceModel::quadrature(6).unwrap();
        let base = 2.0 * PI * PI / (6.0 * LN_2 * LN_2);
        assert!((m.get(1, 1) - 6.847_429).abs() < 1e-6);
        for i in 1..=6 {
            assert_eq!(m.get(i, i) / m.get(1, 1), 2f64.powi(i as i32 - 1));
            assert!((m.get(i, i) - base * 2f64.powi(i as i32 - 1)).abs() < 1e-12 * m.get(i, i));
        }
    }

    #[test]
    fn structure_symmetric_rowscaled() {
        let m = CovarianceModel::quadrature(8).unwrap();
        m.validate().unwrap();
        for a in 1..=7 {
            for b in 1..=7 {
                assert_eq!(m.get(a, b), m.get(b, a));
                // Σ₁(a+1, b+1) = 2 Σ₁(a, b)
                assert!(
                    (m.get(a + 1, b + 1) - 2.0 * m.get(a, b)).abs() < 1e-12 * m.get(a, b).abs()
                );
            }
        }
    }

    #[test]
    fn unit_offset_closed_form() {
        // c = 1: π²/12 + ln²2 / 2 (dilogarithm at -1).
        let v = ln_covariance_quadrature(1).unwrap();
        let exact = PI * PI / 12.0 + 0.5 * LN_2 * LN_2;
        assert!((v - exact).abs() < 1e-13, "{v} vs {exact}");
    }

    #[test]
    fn covariance_decays_with_offset() {
        let vals: Vec<f64> = (0..20)
            .map(|d| ln_covariance_quadrature(d).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
    }

    #[test]
    fn table_roundtrip() {
        let m = CovarianceModel::quadrature(4).unwrap();
        let parsed = CovarianceModel::parse_table(&m.to_table()).unwrap();
        assert_eq!(parsed, m);
    }

    #[test]
    fn table_errors_name_lines() {
        let good = CovarianceModel::quadrature(2).unwrap().to_table();
        let bad_version = good.replacen("maxspec-sigma1 1", "maxspec-sigma1 9", 1);
        assert!(matches!(
            CovarianceModel::parse_table(&bad_version),
            Err(Error::TableFormat { line: 1, .. })
        ));
        let short_row = good.replacen("row 2 ", "row 2 1.0 ", 1);
        assert!(matches!(
            CovarianceModel::parse_table(&short_row),
            Err(Error::TableFormat { line: 7, .. })
        ));
        let missing: String = good.lines().take(6).map(|l| format!("{l}\n")).collect();
        assert!(CovarianceModel::parse_table(&missing).is_err());
    }

    #[test]
    fn shipped_table_matches_quadrature() {
        let shipped = CovarianceModel::default_for(15).unwrap();
        let quad = CovarianceModel::quadrature(15).unwrap();
        for a in 1..=15 {
            for b in 1..=15 {
                let (x, y) = (shipped.get(a, b), quad.get(a, b));
                assert!((x - y).abs() <= 1e-12 * y.abs(), "({a},{b}) {x} vs {y}");
            }
        }
        assert_eq!(CovarianceModel::default_for(4).unwrap().ell(), 4);
        assert_eq!(CovarianceModel::default_for(20).unwrap().ell(), 20);
    }

    #[test]
    fn non_psd_rejected() {
        let mut m = CovarianceModel::quadrature(3).unwrap();
        m.entries[1] = 100.0;
        m.entries[3] = 100.0;
        assert!(matches!(m.validate(), Err(Error::Covariance(_))));
    }
}
