//! Monte-Carlo partition functions for arbitrary drift and potential.
//!
//! `Z(x, t)` is the expected end-cost weight `sum_s w(s) Phi(y; s)` over
//! endpoints `y` of the *uncontrolled* diffusion started at `x`, where paths
//! are annihilated at rate `V / lambda`. Killed paths contribute zero weight.
//! Controls follow from a central finite difference of `log Z` with common
//! random numbers for `x + h` and `x - h`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::math::squared_distance;
use crate::model::{Drift, Potential, TargetSet};

/// Largest per-step kill probability accepted before the step is deemed too coarse.
pub const MAX_KILL_PROBABILITY: f64 = 0.5;

/// Number of fixed steps used by [`DiffusionSpec::with_default_step`].
pub const DEFAULT_STEPS: usize = 1000;

/// Uncontrolled single-agent diffusion with killing.
#[derive(Clone, Copy)]
pub struct DiffusionSpec<'a> {
    pub drift: &'a dyn Drift,
    pub potential: &'a dyn Potential,
    pub nu: f64,
    pub lambda: f64,
    pub dt: f64,
}

impl<'a> DiffusionSpec<'a> {
    pub fn new(
        drift: &'a dyn Drift,
        potential: &'a dyn Potential,
        nu: f64,
        lambda: f64,
        dt: f64,
    ) -> Result<Self> {
        for (field, v) in [("nu", nu), ("lambda", lambda), ("dt", dt)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParam {
                    field,
                    reason: format!("must be finite and > 0, got {v}"),
                });
            }
        }
        Ok(Self {
            drift,
            potential,
            nu,
            lambda,
            dt,
        })
    }

    /// Step `(T - t) / 1000`.
    pub fn with_default_step(
        drift: &'a dyn Drift,
        potential: &'a dyn Potential,
        nu: f64,
        lambda: f64,
        t: f64,
        horizon: f64,
    ) -> Result<Self> {
        Self::new(drift, potential, nu, lambda, (horizon - t) / DEFAULT_STEPS as f64)
    }
}

/// End-cost kernel `Phi(y; s)` peaked around each target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndKernel {
    /// `exp(-alpha |y - mu|^2 / (2 lambda))`
    Quadratic { alpha: f64 },
    /// Normalized Gaussian density of width `sigma`, standing in for `delta(y - mu)`.
    NarrowGaussian { sigma: f64 },
}

impl EndKernel {
    /// Narrow Gaussian with `sigma` one percent of the closest target spacing
    /// (or of unit length for a single target).
    pub fn narrow_for(targets: &TargetSet) -> Self {
        EndKernel::NarrowGaussian {
            sigma: 0.01 * targets.min_spacing().unwrap_or(1.0),
        }
    }

    fn validate(&self) -> Result<()> {
        let (field, v) = match self {
            EndKernel::Quadratic { alpha } => ("alpha", *alpha),
            EndKernel::NarrowGaussian { sigma } => ("sigma", *sigma),
        };
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::InvalidParam {
                field,
                reason: format!("kernel parameter must be > 0, got {v}"),
            });
        }
        Ok(())
    }

    pub fn log_value(&self, y: &[f64], mu: &[f64], lambda: f64) -> f64 {
        let d2 = squared_distance(y, mu);
        match self {
            EndKernel::Quadratic { alpha } => -alpha * d2 / (2.0 * lambda),
            EndKernel::NarrowGaussian { sigma } => {
                let k = y.len() as f64;
                -d2 / (2.0 * sigma * sigma)
                    - 0.5 * k * (2.0 * std::f64::consts::PI * sigma * sigma).ln()
            }
        }
    }
}

/// Endpoint of one sampled path; `None` if the path was killed.
pub type Endpoint = Option<Vec<f64>>;

fn sample_path(
    x: &[f64],
    t: f64,
    spec: &DiffusionSpec<'_>,
    horizon: f64,
    rng: &mut ChaCha8Rng,
    drift: &mut [f64],
) -> Result<Endpoint> {
    let mut y = x.to_vec();
    let mut alive = true;
    let steps = ((horizon - t) / spec.dt - 1e-9).ceil().max(0.0) as usize;
    for k in 0..steps {
        let s = t + k as f64 * spec.dt;
        let dt = if k + 1 == steps { horizon - s } else { spec.dt };
        let v = spec.potential.potential(&y, s);
        if v < 0.0 || v.is_nan() {
            return Err(Error::NegativePotential { value: v, t: s });
        }
        let rate = v * dt / spec.lambda;
        if rate > MAX_KILL_PROBABILITY {
            return Err(Error::StepSize {
                probability: rate,
                t: s,
            });
        }
        // one uniform per step whether or not V is zero, keeping streams aligned
        let u: f64 = rng.random();
        if alive && u < -(-rate).exp_m1() {
            alive = false;
        }
        spec.drift.drift(&y, s, drift);
        let scale = (spec.nu * dt).sqrt();
        for (yi, b) in y.iter_mut().zip(drift.iter()) {
            let z: f64 = rng.sample(StandardNormal);
            *yi += b * dt + scale * z;
        }
    }
    Ok(alive.then_some(y))
}

/// Samples `n_samples` uncontrolled paths from `(x, t)` to `horizon`.
///
/// Sample `i` draws from its own ChaCha stream `i` under `seed`, so results
/// do not depend on how the work is split across threads, and two calls with
/// the same seed share random numbers path by path.
pub fn sample_endpoints(
    x: &[f64],
    t: f64,
    spec: &DiffusionSpec<'_>,
    horizon: f64,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<Endpoint>> {
    if n_samples == 0 {
        return Err(Error::InvalidParam {
            field: "n_samples",
            reason: "at least one sample required".into(),
        });
    }
    if t.is_nan() || t > horizon {
        return Err(Error::Domain { t, horizon });
    }
    (0..n_samples)
        .into_par_iter()
        .map_init(
            || vec![0.0; x.len()],
            |drift, i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                sample_path(x, t, spec, horizon, &mut rng, drift)
            },
        )
        .collect()
}

/// `log Z` estimate with its delta-method standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub log_z: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub survivors: usize,
}

/// Per-sample `log sum_s w(s) Phi(y; s)`, `-inf` for killed samples.
fn log_weights_of(
    samples: &[Endpoint],
    kernel: &EndKernel,
    targets: &TargetSet,
    log_weights: &[f64],
    lambda: f64,
) -> Vec<f64> {
    let mut terms = vec![0.0; targets.len()];
    samples
        .iter()
        .map(|s| match s {
            None => f64::NEG_INFINITY,
            Some(y) => {
                for ((term, mu), lw) in terms.iter_mut().zip(targets.positions()).zip(log_weights) {
                    *term = lw + kernel.log_value(y, mu, lambda);
                }
                crate::math::log_sum_exp(&terms)
            }
        })
        .collect()
}

/// Normalized weights `f_i / mean(f)` and `log mean(f)`.
fn relative_weights(logs: &[f64]) -> Result<(Vec<f64>, f64)> {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::EstimationDegenerate);
    }
    let scaled: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let mean = scaled.iter().sum::<f64>() / logs.len() as f64;
    Ok((scaled.iter().map(|f| f / mean).collect(), max + mean.ln()))
}

fn sample_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return f64::INFINITY;
    }
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// `log` of the sample mean of `sum_s w(s) Phi(y; s)`, killed paths counting zero.
pub fn estimate_log_z(
    samples: &[Endpoint],
    kernel: &EndKernel,
    targets: &TargetSet,
    log_weights: &[f64],
    lambda: f64,
) -> Result<McEstimate> {
    kernel.validate()?;
    if log_weights.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: targets.len(),
            got: log_weights.len(),
        });
    }
    let survivors = samples.iter().filter(|s| s.is_some()).count();
    if survivors == 0 {
        return Err(Error::EstimationDegenerate);
    }
    let logs = log_weights_of(samples, kernel, targets, log_weights, lambda);
    let (relative, log_z) = relative_weights(&logs)?;
    Ok(McEstimate {
        log_z,
        std_error: sample_std(&relative) / (samples.len() as f64).sqrt(),
        n_samples: samples.len(),
        survivors,
    })
}

/// Everything about the problem that stays fixed while `x` is perturbed.
#[derive(Clone, Copy)]
pub struct McProblem<'a> {
    pub spec: DiffusionSpec<'a>,
    pub horizon: f64,
    pub kernel: EndKernel,
    pub targets: &'a TargetSet,
    pub log_weights: &'a [f64],
}

impl McProblem<'_> {
    pub fn log_z(&self, x: &[f64], t: f64, n_samples: usize, seed: u64) -> Result<McEstimate> {
        let samples = sample_endpoints(x, t, &self.spec, self.horizon, n_samples, seed)?;
        estimate_log_z(
            &samples,
            &self.kernel,
            self.targets,
            self.log_weights,
            self.spec.lambda,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McControl {
    pub control: Vec<f64>,
    pub std_error: Vec<f64>,
}

/// `nu * (log Z(x + h e_j) - log Z(x - h e_j)) / 2h` for every coordinate,
/// both sides using the same seed. The standard error accounts for the
/// pairing of samples.
pub fn mc_control(
    problem: &McProblem<'_>,
    x: &[f64],
    t: f64,
    h: f64,
    n_samples: usize,
    seed: u64,
) -> Result<McControl> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParam {
            field: "h",
            reason: format!("finite-difference step must be > 0, got {h}"),
        });
    }
    problem.kernel.validate()?;
    let lambda = problem.spec.lambda;
    let scale = problem.spec.nu / (2.0 * h);
    let mut control = Vec::with_capacity(x.len());
    let mut std_error = Vec::with_capacity(x.len());
    let mut shifted = x.to_vec();
    for j in 0..x.len() {
        let mut side = |delta: f64| -> Result<(Vec<f64>, f64)> {
            shifted[j] = x[j] + delta;
            let samples =
                sample_endpoints(&shifted, t, &problem.spec, problem.horizon, n_samples, seed)?;
            shifted[j] = x[j];
            let logs = log_weights_of(
                &samples,
                &problem.kernel,
                problem.targets,
                problem.log_weights,
                lambda,
            );
            relative_weights(&logs)
        };
        let (rel_plus, lz_plus) = side(h)?;
        let (rel_minus, lz_minus) = side(-h)?;
        let diffs: Vec<f64> = rel_plus.iter().zip(&rel_minus).map(|(p, m)| p - m).collect();
        control.push(scale * (lz_plus - lz_minus));
        std_error.push(scale * sample_std(&diffs) / (n_samples as f64).sqrt());
    }
    Ok(McControl { control, std_error })
}

/// Closed-form `log Z` of the drift-free, potential-free diffusion under the
/// quadratic kernel, in the same normalization as the Monte-Carlo estimate:
/// `-(|x - mu|^2) / (2 s2) + k/2 log(lambda / (alpha s2))` with
/// `s2 = nu (T - t) + lambda / alpha`.
pub fn quadratic_kernel_log_z(
    x: &[f64],
    t: f64,
    mu: &[f64],
    nu: f64,
    lambda: f64,
    alpha: f64,
    horizon: f64,
) -> f64 {
    let kernel_var = lambda / alpha;
    let s2 = nu * (horizon - t) + kernel_var;
    -squared_distance(x, mu) / (2.0 * s2) + 0.5 * x.len() as f64 * (kernel_var / s2).ln()
}
