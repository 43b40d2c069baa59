//! Sampling of density specifications.
//!
//! Finite PMFs sample by cumulative inversion; `Uniform(lo,hi)` scales one
//! unit draw; `Exp(rate)` uses the inverse CDF `-ln(u)/rate`; and
//! `NormalTrunc(mu,sigma,lo,hi)` rejection-samples the untruncated normal
//! until the draw lands in `[lo, hi]`, erroring out when the estimated
//! acceptance probability is below 1e-6.

use thiserror::Error;

use crate::ast::{DataExpr, DensitySpec, Sort};
use crate::data::{eval_expr, Env, EvalError, Value};
use crate::pmf::{pmf_from_expr, DistError, FinitePmf};
use crate::rng::RngStream;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SampleError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("invalid distribution parameters: {0}")]
    InvalidParameters(String),
    #[error("truncated normal acceptance probability too small (estimated {0:e})")]
    LowAcceptance(f64),
}

/// Draws one value for the binder `var: sort` distributed per `density`.
pub fn sample(
    var: &str,
    sort: &Sort,
    density: &DensitySpec,
    env: &Env,
    rng: &mut RngStream,
) -> Result<Value, SampleError> {
    match density {
        DensitySpec::PmfExpr(expr) => {
            let pmf = pmf_from_expr(var, sort, expr, env)?;
            Ok(sample_pmf(&pmf, rng))
        }
        DensitySpec::Uniform(lo, hi) => {
            let lo = eval_f64(lo, env)?;
            let hi = eval_f64(hi, env)?;
            if !(lo < hi) {
                return Err(SampleError::InvalidParameters(format!(
                    "Uniform needs lo < hi, got [{lo}, {hi}]"
                )));
            }
            Ok(Value::Real(lo + rng.unit_f64() * (hi - lo)))
        }
        DensitySpec::Exponential(rate) => {
            let rate = eval_f64(rate, env)?;
            if !(rate > 0.0) {
                return Err(SampleError::InvalidParameters(format!(
                    "Exp needs rate > 0, got {rate}"
                )));
            }
            // 1 - unit_f64() lies in (0, 1], so the logarithm is finite.
            let u = 1.0 - rng.unit_f64();
            Ok(Value::Real(-u.ln() / rate))
        }
        DensitySpec::NormalTrunc(mu, sigma, lo, hi) => {
            let mu = eval_f64(mu, env)?;
            let sigma = eval_f64(sigma, env)?;
            let lo = eval_f64(lo, env)?;
            let hi = eval_f64(hi, env)?;
            if !(sigma > 0.0) {
                return Err(SampleError::InvalidParameters(format!(
                    "NormalTrunc needs sigma > 0, got {sigma}"
                )));
            }
            if !(lo < hi) {
                return Err(SampleError::InvalidParameters(format!(
                    "NormalTrunc needs lo < hi, got [{lo}, {hi}]"
                )));
            }
            let acceptance = normal_cdf((hi - mu) / sigma) - normal_cdf((lo - mu) / sigma);
            if acceptance < 1e-6 {
                return Err(SampleError::LowAcceptance(acceptance));
            }
            loop {
                let x = mu + sigma * standard_normal(rng);
                if (lo..=hi).contains(&x) {
                    return Ok(Value::Real(x));
                }
            }
        }
    }
}

/// Cumulative inversion over the (already normalized) PMF.
pub fn sample_pmf(pmf: &FinitePmf<Value>, rng: &mut RngStream) -> Value {
    let u = rng.unit_f64();
    let mut cum = 0.0;
    for (value, mass) in pmf.iter() {
        cum += mass.to_f64();
        if u < cum {
            return value.clone();
        }
    }
    // Float rounding can leave u just above the final cumulative sum.
    pmf.entries()
        .last()
        .expect("a normalized PMF is non-empty")
        .0
        .clone()
}

fn eval_f64(expr: &DataExpr, env: &Env) -> Result<f64, SampleError> {
    let v = eval_expr(expr, env)?;
    v.to_f64().ok_or_else(|| {
        SampleError::InvalidParameters(format!("parameter {v} is not a number"))
    })
}

/// One standard normal draw via Box–Muller.
fn standard_normal(rng: &mut RngStream) -> f64 {
    let u1 = 1.0 - rng.unit_f64(); // (0, 1]
    let u2 = rng.unit_f64();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Standard normal CDF via the Abramowitz–Stegun 7.1.26 erf polynomial
/// (absolute error below 1.5e-7; used only for the acceptance gate).
fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

fn erf(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    sign * (1.0 - poly * (-x * x).exp())
}
