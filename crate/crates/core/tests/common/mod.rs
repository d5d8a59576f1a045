//! Independent reference computations used by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// One-sample Kolmogorov–Smirnov statistic of `sample` against `cdf`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of a KS statistic `d` for effective sample size `n`.
pub fn ks_p_value(d: f64, n: f64) -> f64 {
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
        p += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

/// Dilogarithm on (-∞, 0] by series, with the inversion formula beyond -1.
pub fn dilog_neg(x: f64) -> f64 {
    assert!(x <= 0.0);
    if x < -1.0 {
        let l = (-x).ln();
        return -PI * PI / 6.0 - 0.5 * l * l - dilog_neg(1.0 / x);
    }
    if x < -0.5 {
        // Li2(x) = -Li2(x/(x-1)) - ln²(1-x)/2 with x/(x-1) in [1/3, 1/2].
        let y = x / (x - 1.0);
        let l = (1.0 - x).ln();
        return -dilog_series(y) - 0.5 * l * l;
    }
    dilog_series(x)
}

fn dilog_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut pow = x;
    for k in 1..400 {
        let k = k as f64;
        sum += pow / (k * k);
        pow *= x;
        if pow.abs() < 1e-18 {
            break;
        }
    }
    sum
}

/// `Cov(ln Z₁, ln(Z₁ ∨ c Z₂))` for independent standard 1-Fréchet variables
/// in closed form: `π²/6 + Li2(-c) + ln²(1+c)/2`.
pub fn ln_cov_closed_form(c: f64) -> f64 {
    let l = c.ln_1p();
    PI * PI / 6.0 + dilog_neg(-c) + 0.5 * l * l
}

/// Runs / blocks estimator of the extremal index at threshold `u` with
/// blocks of length `b`: `ln(1 - K/m) / (b ln(1 - N/n))`.
pub fn blocks_extremal_index(series: &[f64], u: f64, b: usize) -> f64 {
    let n = series.len();
    let m = n / b;
    let exceed = series[..m * b].iter().filter(|&&x| x > u).count() as f64;
    let blocks = series[..m * b]
        .chunks_exact(b)
        .filter(|c| c.iter().any(|&x| x > u))
        .count() as f64;
    (1.0 - blocks / m as f64).ln() / (b as f64 * (1.0 - exceed / (m * b) as f64).ln())
}

/// Minimizer of `wᵀCw` subject to `Σw = 0`, `Σ j w_j = 1` (scales `j1..`),
/// by Gaussian elimination on the KKT system.
pub fn kkt_weights(c: &[Vec<f64>], j1: u32) -> Vec<f64> {
    let l = c.len();
    let dim = l + 2;
    let mut m = vec![vec![0.0; dim + 1]; dim];
    for r in 0..l {
        for k in 0..l {
            m[r][k] = 2.0 * c[r][k];
        }
        m[r][l] = 1.0;
        m[r][l + 1] = (j1 as usize + r) as f64;
        m[l][r] = 1.0;
        m[l + 1][r] = (j1 as usize + r) as f64;
    }
    m[l + 1][dim] = 1.0;
    for col in 0..dim {
        let piv = (col..dim)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, piv);
        for r in 0..dim {
            if r != col {
                let f = m[r][col] / m[col][col];
                #[allow(clippy::needless_range_loop)]
                for k in col..=dim {
                    m[r][k] -= f * m[col][k];
                }
            }
        }
    }
    (0..l).map(|r| m[r][dim] / m[r][r]).collect()
}

/// Max-spectrum computed directly from blocks, without the pairwise recursion.
pub fn naive_spectrum(series: &[f64]) -> Vec<(u64, f64)> {
    let mut out = Vec::new();
    let mut j = 1;
    while (1usize << j) <= series.len() {
        let size = 1usize << j;
        let maxima: Vec<f64> = series
            .chunks_exact(size)
            .map(|c| c.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let y = maxima.iter().map(|m| m.log2()).sum::<f64>() / maxima.len() as f64;
        out.push((maxima.len() as u64, y));
        j += 1;
    }
    out
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn sample_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}
