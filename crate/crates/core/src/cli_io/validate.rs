//! Self-check suites with a machine-readable report.
//!
//! * `gradient`: analytic mixture controls against finite differences of
//!   `log Z`, plus joint controls against finite differences of the joint
//!   log-partition.
//! * `oracle`: clique-tree inference against brute-force enumeration.
//! * `montecarlo`: sampled partition functions, survival and controls against
//!   closed forms.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::controller::{joint_control, numeric_control_check};
use crate::endcost::{firemen_factors, EndCostFactor, FactoredEndCost};
use crate::error::{Error, Result};
use crate::gaussian::{control_single, effective_variance, log_z_mixture, mixture_control};
use crate::inference::{brute_force, infer, UnaryLogZTable};
use crate::model::{ControlParams, DriftSpec, JointState, PotentialSpec, Scenario, TargetSet};
use crate::pathint_mc::{
    mc_control, quadratic_kernel_log_z, sample_endpoints, DiffusionSpec, EndKernel, McProblem,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Gradient,
    Oracle,
    MonteCarlo,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gradient" => Ok(Suite::Gradient),
            "oracle" => Ok(Suite::Oracle),
            "montecarlo" => Ok(Suite::MonteCarlo),
            "all" => Ok(Suite::All),
            _ => Err(Error::Parse {
                context: "suite".into(),
                message: format!("expected gradient, oracle, montecarlo or all, got {s:?}"),
            }),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Gradient => "gradient",
            Suite::Oracle => "oracle",
            Suite::MonteCarlo => "montecarlo",
            Suite::All => "all",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub suite: String,
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(suite: Suite, name: &str, measured: f64, tolerance: f64, detail: String) -> Self {
        Self {
            suite: suite.to_string(),
            name: name.to_string(),
            measured,
            tolerance,
            passed: measured <= tolerance,
            detail,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

pub const GRADIENT_INSTANCES: usize = 1000;
pub const ORACLE_INSTANCES: usize = 200;
pub const MC_SAMPLES: usize = 100_000;

/// End-cost stiffness of the Monte-Carlo checks; wide enough that most
/// endpoints carry weight.
const MC_ALPHA: f64 = 10.0;

/// Runs the requested suites with instances drawn from `seed`.
pub fn validate(suite: Suite, seed: u64) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    if matches!(suite, Suite::Gradient | Suite::All) {
        checks.extend(gradient_suite(seed)?);
    }
    if matches!(suite, Suite::Oracle | Suite::All) {
        checks.extend(oracle_suite(seed)?);
    }
    if matches!(suite, Suite::MonteCarlo | Suite::All) {
        checks.extend(montecarlo_suite(seed)?);
    }
    Ok(ValidationReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn uniform_point(rng: &mut ChaCha8Rng, k: usize, half_width: f64) -> Vec<f64> {
    (0..k).map(|_| rng.random_range(-half_width..half_width)).collect()
}

/// Five-point central difference of `f` along coordinate `j`.
pub fn five_point_derivative(f: impl Fn(&[f64]) -> Result<f64>, x: &[f64], j: usize, h: f64) -> Result<f64> {
    let mut y = x.to_vec();
    let mut at = |d: f64| {
        y[j] = x[j] + d;
        f(&y)
    };
    let (p2, p1, m1, m2) = (at(2.0 * h)?, at(h)?, at(-h)?, at(-2.0 * h)?);
    Ok((m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h))
}

/// Relative error with an absolute floor of `floor / rel_tol`.
fn scaled_error(numeric: f64, analytic: f64, rel_tol: f64, abs_floor: f64) -> f64 {
    (numeric - analytic).abs() / analytic.abs().max(abs_floor / rel_tol)
}

fn gradient_suite(seed: u64) -> Result<Vec<CheckResult>> {
    const REL: f64 = 1e-6;
    const FLOOR: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut worst_case = String::new();
    for i in 0..GRADIENT_INSTANCES {
        let k = rng.random_range(1..=3);
        let m = rng.random_range(1..=4);
        let nu = rng.random_range(0.5..2.0);
        let params = ControlParams::new(nu, 1.0, 1000.0, 0.01, 1.0)?;
        let t = rng.random_range(0.0..0.9);
        let targets = TargetSet::new((0..m).map(|_| uniform_point(&mut rng, k, 2.0)).collect())?;
        let log_w: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let x = uniform_point(&mut rng, k, 2.5);
        let analytic = mixture_control(&x, t, &targets, &log_w, &params)?;
        let h = 1e-3 * effective_variance(t, &params)?.sqrt();
        for (j, &u) in analytic.iter().enumerate() {
            let d = five_point_derivative(
                |y| log_z_mixture(y, t, &targets, &log_w, &params),
                &x,
                j,
                h,
            )?;
            let err = scaled_error(nu * d, u, REL, FLOOR);
            if err > worst {
                worst = err;
                worst_case = format!("instance {i}, coordinate {j}");
            }
        }
    }
    let mixture = CheckResult::new(
        Suite::Gradient,
        "mixture-control-vs-fd",
        worst,
        REL,
        format!("{GRADIENT_INSTANCES} instances, worst at {worst_case}"),
    );

    let mut worst_joint = 0.0f64;
    for _ in 0..20 {
        let n = rng.random_range(1..=4);
        let m = rng.random_range(1..=3);
        let targets = TargetSet::on_line(&(0..m).map(|s| s as f64 - 1.0).collect::<Vec<_>>())?;
        let t = rng.random_range(0.0..0.8);
        let initial = JointState::new(t, (0..n).map(|_| uniform_point(&mut rng, 1, 1.5)).collect())?;
        let scenario = Scenario::new(
            "check",
            targets,
            firemen_factors(n, m, rng.random_range(0.2..2.0))?,
            ControlParams::reference(),
            initial,
        )?;
        let analytic = joint_control(scenario.initial(), &scenario)?;
        let numeric = numeric_control_check(scenario.initial(), &scenario, 1e-5)?;
        for (u, v) in analytic.controls.iter().flatten().zip(numeric.iter().flatten()) {
            worst_joint = worst_joint.max(scaled_error(*v, *u, 1e-5, 1e-8));
        }
    }
    let joint = CheckResult::new(
        Suite::Gradient,
        "joint-control-vs-fd",
        worst_joint,
        1e-5,
        "20 random firemen instances, central difference h = 1e-5".into(),
    );
    Ok(vec![mixture, joint])
}

fn random_end_cost(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Result<FactoredEndCost> {
    let mut factors = Vec::new();
    for _ in 0..rng.random_range(0..=2 * n) {
        let arity = rng.random_range(1..=3.min(n));
        let mut scope: Vec<usize> = Vec::with_capacity(arity);
        while scope.len() < arity {
            let a = rng.random_range(0..n);
            if !scope.contains(&a) {
                scope.push(a);
            }
        }
        let size = m.pow(arity as u32);
        let table = (0..size).map(|_| rng.random_range(-2.0..2.0)).collect();
        factors.push(EndCostFactor::new(scope, table, m)?);
    }
    FactoredEndCost::new(m, factors, rng.random_range(-1.0..1.0))
}

fn oracle_suite(seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let (mut marg, mut logz) = (0.0f64, 0.0f64);
    for _ in 0..ORACLE_INSTANCES {
        let n = rng.random_range(1..=8);
        let m = rng.random_range(1..=3);
        let rows = (0..n)
            .map(|_| (0..m).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let tables = UnaryLogZTable::new(rows)?;
        let ec = random_end_cost(&mut rng, n, m)?;
        let lambda = rng.random_range(0.3..3.0);
        let bf = brute_force(&tables, &ec, lambda)?;
        let ve = infer(&tables, &ec, lambda)?;
        marg = marg.max(bf.marginals.max_abs_diff(&ve.marginals));
        logz = logz.max((bf.log_partition - ve.log_partition).abs());
    }
    let detail = format!("{ORACLE_INSTANCES} instances, n <= 8, m <= 3");
    Ok(vec![
        CheckResult::new(Suite::Oracle, "marginals-vs-brute-force", marg, 1e-10, detail.clone()),
        CheckResult::new(Suite::Oracle, "log-z-vs-brute-force", logz, 1e-8, detail),
    ])
}

fn montecarlo_suite(seed: u64) -> Result<Vec<CheckResult>> {
    let params = ControlParams::reference();
    let (nu, lambda, horizon) = (params.nu(), params.lambda(), params.horizon());
    let zero_drift = DriftSpec::Zero;
    let zero_v = PotentialSpec::Zero;
    let mu = [0.5];
    let targets = TargetSet::new(vec![mu.to_vec()])?;
    let (x, t) = ([-0.3], 0.2);
    let problem = McProblem {
        spec: DiffusionSpec::with_default_step(&zero_drift, &zero_v, nu, lambda, t, horizon)?,
        horizon,
        kernel: EndKernel::Quadratic { alpha: MC_ALPHA },
        targets: &targets,
        log_weights: &[0.0],
    };

    let est = problem.log_z(&x, t, MC_SAMPLES, seed)?;
    let exact = quadratic_kernel_log_z(&x, t, &mu, nu, lambda, MC_ALPHA, horizon);
    let log_z = CheckResult::new(
        Suite::MonteCarlo,
        "log-z-vs-closed-form",
        (est.log_z - exact).abs() / est.std_error,
        3.0,
        format!(
            "estimate {} se {} n {} exact {exact} (measured in standard errors)",
            est.log_z, est.std_error, est.n_samples
        ),
    );

    let v = 0.7;
    let constant_v = PotentialSpec::Constant { value: v };
    let spec = DiffusionSpec::with_default_step(&zero_drift, &constant_v, nu, lambda, t, horizon)?;
    let samples = sample_endpoints(&x, t, &spec, horizon, MC_SAMPLES, seed)?;
    let survived = samples.iter().filter(|s| s.is_some()).count() as f64 / MC_SAMPLES as f64;
    let expected = (-v * (horizon - t) / lambda).exp();
    let se = (expected * (1.0 - expected) / MC_SAMPLES as f64).sqrt();
    let survival = CheckResult::new(
        Suite::MonteCarlo,
        "survival-vs-exponential",
        (survived - expected).abs() / se,
        4.0,
        format!("survived {survived} expected {expected} se {se} (measured in standard errors)"),
    );

    let quad = ControlParams::new(nu, params.r(), MC_ALPHA, params.epsilon(), horizon)?;
    let mc = mc_control(&problem, &x, t, 1e-2, MC_SAMPLES, seed)?;
    let exact_u = control_single(&x, t, &mu, &quad)?;
    let control = CheckResult::new(
        Suite::MonteCarlo,
        "control-vs-closed-form",
        (mc.control[0] - exact_u[0]).abs() / mc.std_error[0],
        3.0,
        format!(
            "estimate {} se {} exact {} (measured in standard errors)",
            mc.control[0], mc.std_error[0], exact_u[0]
        ),
    );
    Ok(vec![log_z, survival, control])
}
