//! The `estimate` report: versioned JSON and a plain-text rendering.

use std::fmt::Write as _;

use maxspec::{ConfidenceInterval, Method, ScaleStat, SelectionStep};
use serde::Serialize;

use crate::ingest::IngestSummary;

pub const SCHEMA: &str = "maxspec.report/1";

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub input: IngestSummary,
    pub n: u64,
    pub spectrum: Vec<ScaleStat>,
    pub range: RangeInfo,
    pub selection: Option<SelectionInfo>,
    pub method: Method,
    pub h: f64,
    pub alpha: f64,
    pub c_w: f64,
    pub n_eff: u64,
    pub weights: Vec<f64>,
    pub ci: Option<ConfidenceInterval>,
    /// Seed of the Monte-Carlo interval, when one was computed.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RangeInfo {
    pub j1: u32,
    pub j2: u32,
    pub auto: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectionInfo {
    pub p: f64,
    pub b: u32,
    pub alternative_j1: Option<u32>,
    pub trace: Vec<SelectionStep>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "input      {} ({} values, {} dropped)",
            self.input.source, self.input.values, self.input.dropped
        );
        if let Some(g) = &self.input.generator {
            let _ = writeln!(s, "generator  {} n={} seed={}", g.model.name(), g.n, g.seed);
        }
        let _ = writeln!(s, "n          {}", self.n);
        let _ = writeln!(
            s,
            "range      ({}, {}){}",
            self.range.j1,
            self.range.j2,
            if self.range.auto {
                " selected automatically"
            } else {
                ""
            }
        );
        let _ = writeln!(s, "method     {}", self.method);
        let _ = writeln!(s, "H          {:.6}", self.h);
        let _ = writeln!(s, "alpha      {:.6}", self.alpha);
        let _ = writeln!(s, "c_w        {:.6}  (n_eff = {})", self.c_w, self.n_eff);
        if let Some(ci) = &self.ci {
            let upper = if ci.upper_unbounded {
                "inf".to_string()
            } else {
                format!("{:.6}", ci.upper)
            };
            let _ = write!(
                s,
                "ci         {:.0}% {} [{:.6}, {upper}]",
                100.0 * ci.level,
                ci.kind,
                ci.lower
            );
            if ci.unstable {
                s.push_str("  (unstable: many degenerate paths)");
            }
            s.push('\n');
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed       {seed}");
        }
        s.push_str("\n   j         n_j           Y_j\n");
        for st in &self.spectrum {
            let used = (self.range.j1..=self.range.j2).contains(&st.j);
            let _ = writeln!(
                s,
                "{}{:>3} {:>11} {:>13.6}",
                if used { '*' } else { ' ' },
                st.j,
                st.block_count,
                st.y
            );
        }
        if let Some(sel) = &self.selection {
            let _ = writeln!(s, "\nselection (p = {}, b = {})", sel.p, sel.b);
            for t in &sel.trace {
                let _ = writeln!(
                    s,
                    "  j1 {:>2} -> {:>2}: |dH| = {:.5}  threshold = {:.5}{}",
                    t.j1,
                    t.j1 - 1,
                    t.statistic,
                    t.threshold,
                    if t.rejected { "  rejected" } else { "" }
                );
            }
        }
        s
    }
}
