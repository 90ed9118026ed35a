//! The neighbourhood weighting function `F` and its annealed parameters.
//!
//! `F(x) = 1 - Phi((x - mu) / sigma)` is the upper tail of a Gaussian with
//! centre `mu` and scale `sigma`. Both are derived from the input distance
//! statistics and the annealing parameter `lambda`:
//!
//! ```text
//! mu    = mean - 2 (1 - lambda) std
//! sigma = |-2 lambda std| = 2 lambda std
//! ```
//!
//! The Gaussian density depends on its scale only through its square, so the
//! negative scale in the original parameterization is equivalent to `sigma`.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::geometry::PairStats;

/// Relative floor for `sigma` when `std == 0` or `lambda == 0`.
pub const SIGMA_EPSILON: f64 = 1e-9;

pub const DEFAULT_LAMBDA_START: f64 = 0.9;
pub const DEFAULT_LAMBDA_END: f64 = 0.1;
pub const DEFAULT_P: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightParams {
    pub lambda: f64,
    pub mu: f64,
    pub sigma: f64,
    pub p: f64,
}

impl WeightParams {
    /// Builds parameters directly, e.g. for tests that pin `mu` and `sigma`.
    pub fn new(lambda: f64, mu: f64, sigma: f64, p: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParams(format!("sigma must be positive, got {sigma}")));
        }
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidParams(format!("p must be positive, got {p}")));
        }
        if !mu.is_finite() {
            return Err(Error::InvalidParams(format!("mu must be finite, got {mu}")));
        }
        Ok(Self { lambda, mu, sigma, p })
    }

    #[inline]
    pub fn f(&self, x: f64) -> f64 {
        weight_f(x, self)
    }

    #[inline]
    pub fn f_derivative(&self, x: f64) -> f64 {
        weight_f_derivative(x, self)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::InvalidLambda(lambda))
    }
}

pub fn weight_params(stats: PairStats, lambda: f64, p: f64) -> Result<WeightParams> {
    check_lambda(lambda)?;
    if stats.std.is_nan() || stats.std < 0.0 {
        return Err(Error::InvalidParams(format!(
            "std must be nonnegative, got {}",
            stats.std
        )));
    }
    let mu = stats.mean - 2.0 * (1.0 - lambda) * stats.std;
    let mut sigma = 2.0 * lambda * stats.std;
    if sigma <= 0.0 {
        sigma = SIGMA_EPSILON * stats.mean.max(1.0);
    }
    WeightParams::new(lambda, mu, sigma, p)
}

/// `F(x) = 1 - Phi((x - mu) / sigma)`.
#[inline]
pub fn weight_f(x: f64, params: &WeightParams) -> f64 {
    let z = (x - params.mu) / params.sigma;
    0.5 * libm::erfc(z / SQRT_2)
}

/// `1 - F(x) = Phi((x - mu) / sigma)`, accurate where `F` rounds to 1.
#[inline]
pub fn weight_f_complement(x: f64, params: &WeightParams) -> f64 {
    let z = (x - params.mu) / params.sigma;
    0.5 * libm::erfc(-z / SQRT_2)
}

/// `F'(x) = -pdf(x; mu, sigma)`.
#[inline]
pub fn weight_f_derivative(x: f64, params: &WeightParams) -> f64 {
    let z = (x - params.mu) / params.sigma;
    -(-0.5 * z * z).exp() / (params.sigma * (2.0 * PI).sqrt())
}

/// Linear interpolation from `lambda_start` (step 0) to `lambda_end` (last step).
pub fn lambda_at(step: usize, total_steps: usize, lambda_start: f64, lambda_end: f64) -> Result<f64> {
    if total_steps == 0 {
        return Err(Error::InvalidSchedule("total_steps must be at least 1".into()));
    }
    if step > total_steps {
        return Err(Error::InvalidSchedule(format!(
            "step {step} exceeds total_steps {total_steps}"
        )));
    }
    check_lambda(lambda_start)?;
    check_lambda(lambda_end)?;
    if step == total_steps {
        return Ok(lambda_end);
    }
    let t = step as f64 / total_steps as f64;
    Ok(lambda_start + t * (lambda_end - lambda_start))
}
