//! Fréchet and Pareto laws: distribution functions, inverse-transform
//! samplers and the log-moment identities used by the estimators.
//!
//! A standard α-Fréchet variable `Z` satisfies `-ln Z ~ Exp(1)` after raising
//! to the power α, so `α ln Z` is standard Gumbel. That gives the closed forms
//! in [`log2_frechet_moments`].

use std::f64::consts::{LN_2, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::open_unit;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} must be finite and > 0, got {v}"
        )))
    }
}

/// α-Fréchet law with scale σ: `P{Z ≤ x} = exp(-σ^α x^-α)` for `x > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrechetParams {
    alpha: f64,
    sigma: f64,
}

impl FrechetParams {
    pub fn new(alpha: f64, sigma: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("sigma", sigma)?;
        Ok(Self { alpha, sigma })
    }

    pub fn standard(alpha: f64) -> Result<Self> {
        Self::new(alpha, 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        (-(self.sigma / x).powf(self.alpha)).exp()
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!(
                "quantile level must lie in (0, 1), got {u}"
            )));
        }
        Ok(self.quantile_unchecked(u))
    }

    #[inline]
    fn quantile_unchecked(&self, u: f64) -> f64 {
        self.sigma * (-u.ln()).powf(-1.0 / self.alpha)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile_unchecked(open_unit(rng))
    }
}

/// Pareto law `P{X > x} = (x / xm)^-α` for `x > xm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoParams {
    alpha: f64,
    xm: f64,
}

impl ParetoParams {
    pub fn new(alpha: f64, xm: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("xm", xm)?;
        Ok(Self { alpha, xm })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn xm(&self) -> f64 {
        self.xm
    }

    pub fn survival(&self, x: f64) -> f64 {
        if x <= self.xm {
            1.0
        } else {
            (x / self.xm).powf(-self.alpha)
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.xm * open_unit(rng).powf(-1.0 / self.alpha)
    }
}

pub fn frechet_cdf(x: f64, params: &FrechetParams) -> f64 {
    params.cdf(x)
}

pub fn frechet_quantile(u: f64, params: &FrechetParams) -> Result<f64> {
    params.quantile(u)
}

pub fn frechet_sample<R: Rng + ?Sized>(params: &FrechetParams, rng: &mut R) -> f64 {
    params.sample(rng)
}

pub fn pareto_sample<R: Rng + ?Sized>(params: &ParetoParams, rng: &mut R) -> f64 {
    params.sample(rng)
}

/// Mean and variance of `log2 Z` for standard α-Fréchet `Z`:
/// `γ/(α ln 2)` and `π²/(6 α² ln²2)`.
pub fn log2_frechet_moments(alpha: f64) -> Result<(f64, f64)> {
    check_positive("alpha", alpha)?;
    let mean = EULER_GAMMA / (alpha * LN_2);
    let var = PI * PI / (6.0 * alpha * alpha * LN_2 * LN_2);
    Ok((mean, var))
}
