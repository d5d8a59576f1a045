//! Hill estimator and Hill plot.
//!
//! `α̂_H(k) = ( (1/k) Σ_{i≤k} ln X_(i) - ln X_(k+1) )⁻¹` over the descending
//! order statistics. Only the top `k + 1` values are needed, so they are
//! isolated by partial selection and then sorted: O(n + k log k).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillPoint {
    pub k: usize,
    /// `+∞` when the top `k + 1` values are all equal.
    pub alpha: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HillPlot {
    pub points: Vec<HillPoint>,
}

/// The `m` largest values in descending order.
fn top_descending(series: &[f64], m: usize) -> Result<Vec<f64>> {
    if let Some(i) = series.iter().position(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(Error::NonPositive {
            index: i,
            value: series[i],
        });
    }
    let mut values = series.to_vec();
    let desc = |a: &f64, b: &f64| b.total_cmp(a);
    if m < values.len() {
        values.select_nth_unstable_by(m - 1, desc);
        values.truncate(m);
    }
    values.sort_unstable_by(desc);
    Ok(values)
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k >= 1 && k < n {
        Ok(())
    } else {
        Err(Error::Range(format!(
            "need 1 <= k <= n - 1 = {}, got k = {k}",
            n.saturating_sub(1)
        )))
    }
}

fn point(k: usize, log_sum: f64, log_next: f64) -> HillPoint {
    let denom = log_sum / k as f64 - log_next;
    if denom > 0.0 {
        HillPoint {
            k,
            alpha: 1.0 / denom,
            degenerate: false,
        }
    } else {
        HillPoint {
            k,
            alpha: f64::INFINITY,
            degenerate: true,
        }
    }
}

pub fn hill_estimate(series: &[f64], k: usize) -> Result<HillPoint> {
    check_k(k, series.len())?;
    let top = top_descending(series, k + 1)?;
    let log_sum: f64 = top[..k].iter().map(|x| x.ln()).sum();
    Ok(point(k, log_sum, top[k].ln()))
}

/// `α̂_H(k)` for `k = 1..=k_max` from one pass over the top `k_max + 1` values.
pub fn hill_plot(series: &[f64], k_max: usize) -> Result<HillPlot> {
    check_k(k_max, series.len())?;
    let logs: Vec<f64> = top_descending(series, k_max + 1)?
        .into_iter()
        .map(f64::ln)
        .collect();
    let mut log_sum = 0.0;
    let points = (1..=k_max)
        .map(|k| {
            log_sum += logs[k - 1];
            point(k, log_sum, logs[k])
        })
        .collect();
    Ok(HillPlot { points })
}

impl HillPlot {
    pub fn alpha(&self, k: usize) -> Option<f64> {
        self.points.get(k.checked_sub(1)?).map(|p| p.alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn hand_example() {
        let xs = [E * E, 1.0, E, 0.5, 0.25];
        let h = hill_estimate(&xs, 2).unwrap();
        assert!((h.alpha - 2.0 / 3.0).abs() < 1e-15);
        assert!(!h.degenerate);
    }

    #[test]
    fn k_one_entry() {
        let xs = [3.0, 9.0, 1.0, 4.0];
        let plot = hill_plot(&xs, 3).unwrap();
        assert_eq!(plot.alpha(1).unwrap(), 1.0 / (9f64.ln() - 4f64.ln()));
        assert_eq!(plot.points.len(), 3);
    }

    #[test]
    fn plot_agrees_with_pointwise() {
        let xs: Vec<f64> = (1..200).map(|i| ((i * 7919) % 211) as f64 + 0.5).collect();
        let plot = hill_plot(&xs, 150).unwrap();
        for k in [1, 2, 17, 150] {
            assert_eq!(plot.alpha(k).unwrap(), hill_estimate(&xs, k).unwrap().alpha);
        }
    }

    #[test]
    fn degenerate_ties() {
        let xs = [5.0, 5.0, 5.0, 1.0];
        let h = hill_estimate(&xs, 2).unwrap();
        assert!(h.degenerate && h.alpha.is_infinite());
        assert!(!hill_estimate(&xs, 3).unwrap().degenerate);
    }

    #[test]
    fn range_and_positivity() {
        assert!(matches!(
            hill_estimate(&[1.0, 2.0], 0),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            hill_estimate(&[1.0, 2.0], 2),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            hill_estimate(&[1.0, 0.0, 2.0], 1),
            Err(Error::NonPositive { index: 1, .. })
        ));
    }
}
