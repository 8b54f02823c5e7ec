//! Closed-form quantities for the drift-free, potential-free model with a
//! quadratic end cost of stiffness `alpha` around each target.
//!
//! The uncontrolled diffusion is Gaussian, so the single-target partition
//! function is a Gaussian in `x - mu` with variance `nu (T - t + R/alpha)`.
//! The additive constant of `log Z` is fixed so that `log Z = 0` at `x = mu`.

use crate::error::{Error, Result};
use crate::math::{log_sum_exp, squared_distance};
use crate::model::{ControlParams, TargetSet};

fn check_dim(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(())
}

/// `nu (T - t + R/alpha)`, the variance of the end-point Gaussian convolved
/// with the end-cost kernel.
pub fn effective_variance(t: f64, params: &ControlParams) -> Result<f64> {
    if t.is_nan() || t > params.horizon() {
        return Err(Error::Domain {
            t,
            horizon: params.horizon(),
        });
    }
    Ok(params.nu() * params.time_to_go(t))
}

/// `log Z(x, t; mu) = -|x - mu|^2 / (2 sigma^2(t))`.
pub fn log_z_single(x: &[f64], t: f64, mu: &[f64], params: &ControlParams) -> Result<f64> {
    check_dim(x, mu)?;
    let var = effective_variance(t, params)?;
    Ok(-squared_distance(x, mu) / (2.0 * var))
}

/// Optimal control towards a single target, `(mu - x) / (T - t + R/alpha)`.
pub fn control_single(x: &[f64], t: f64, mu: &[f64], params: &ControlParams) -> Result<Vec<f64>> {
    check_dim(x, mu)?;
    let ttg = params.time_to_go(t);
    if ttg.is_nan() || ttg <= 0.0 {
        return Err(Error::Domain {
            t,
            horizon: params.horizon(),
        });
    }
    Ok(mu.iter().zip(x).map(|(m, xi)| (m - xi) / ttg).collect())
}

fn weighted_log_terms(
    x: &[f64],
    t: f64,
    targets: &TargetSet,
    log_weights: &[f64],
    params: &ControlParams,
) -> Result<Vec<f64>> {
    if log_weights.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: targets.len(),
            got: log_weights.len(),
        });
    }
    targets
        .positions()
        .iter()
        .zip(log_weights)
        .map(|(mu, lw)| Ok(lw + log_z_single(x, t, mu, params)?))
        .collect()
}

/// Log of the mixture partition function `sum_s w(s) Z(x, t; s)`.
pub fn log_z_mixture(
    x: &[f64],
    t: f64,
    targets: &TargetSet,
    log_weights: &[f64],
    params: &ControlParams,
) -> Result<f64> {
    let terms = weighted_log_terms(x, t, targets, log_weights, params)?;
    let lse = log_sum_exp(&terms);
    if lse == f64::NEG_INFINITY {
        return Err(Error::DegeneratePosterior);
    }
    Ok(lse)
}

/// Posterior `p(s | x, t)` over targets, proportional to `w(s) Z(x, t; s)`.
pub fn mixture_posterior(
    x: &[f64],
    t: f64,
    targets: &TargetSet,
    log_weights: &[f64],
    params: &ControlParams,
) -> Result<Vec<f64>> {
    let terms = weighted_log_terms(x, t, targets, log_weights, params)?;
    crate::math::normalize_log(&terms).ok_or(Error::DegeneratePosterior)
}

/// Posterior mean target, `sum_s p(s | x, t) mu_s`.
pub fn expected_target(targets: &TargetSet, posterior: &[f64]) -> Vec<f64> {
    let mut mean = vec![0.0; targets.dim()];
    for (mu, p) in targets.positions().iter().zip(posterior) {
        for (m, c) in mean.iter_mut().zip(mu) {
            *m += p * c;
        }
    }
    mean
}

/// Multi-target control `(mubar - x) / (T - t + R/alpha)`.
pub fn mixture_control(
    x: &[f64],
    t: f64,
    targets: &TargetSet,
    log_weights: &[f64],
    params: &ControlParams,
) -> Result<Vec<f64>> {
    let posterior = mixture_posterior(x, t, targets, log_weights, params)?;
    let mubar = expected_target(targets, &posterior);
    control_single(x, t, &mubar, params)
}

/// Optimal cost-to-go `J = -lambda log Z` under the fixed-constant convention.
pub fn cost_to_go(
    x: &[f64],
    t: f64,
    targets: &TargetSet,
    log_weights: &[f64],
    params: &ControlParams,
) -> Result<f64> {
    Ok(-params.lambda() * log_z_mixture(x, t, targets, log_weights, params)?)
}
