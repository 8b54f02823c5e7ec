//! Joint optimal control from assignment marginals, and Euler–Maruyama
//! simulation of the controlled multi-agent system.
//!
//! For the drift-free Gaussian model each agent steers towards its expected
//! target, `u_a = (mubar_a - x_a) / (T - t + R/alpha)`, with
//! `mubar_a = sum_s p(s_a = s | x, t) mu_s`. The step size shrinks with the
//! time-to-go, `dt = epsilon (T - t + R/alpha)`, so that `u dt` stays a fixed
//! fraction of the remaining distance to the expected target.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::gaussian::{control_single, expected_target, log_z_single};
use crate::inference::{
    eliminate_with_cap, min_degree_order, AssignmentMarginals, EliminationOrder, UnaryLogZTable,
    DEFAULT_CLIQUE_CAP,
};
use crate::model::{ControlParams, Drift, JointState, Potential, Scenario};

/// Controls, expected targets and the marginals they were computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlOutput {
    pub controls: Vec<Vec<f64>>,
    pub expected_targets: Vec<Vec<f64>>,
    pub marginals: AssignmentMarginals,
    pub log_partition: f64,
}

/// Closed-form joint controller for a scenario. The elimination order is
/// fixed by the end-cost graph and computed once.
#[derive(Debug, Clone)]
pub struct JointController<'a> {
    scenario: &'a Scenario,
    order: EliminationOrder,
    clique_cap: usize,
}

impl<'a> JointController<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self> {
        let order = min_degree_order(&scenario.end_cost().scopes(), scenario.n_agents())?;
        Ok(Self {
            scenario,
            order,
            clique_cap: DEFAULT_CLIQUE_CAP,
        })
    }

    pub fn with_clique_cap(mut self, cap: usize) -> Self {
        self.clique_cap = cap;
        self
    }

    pub fn order(&self) -> &EliminationOrder {
        &self.order
    }

    fn check_state(&self, state: &JointState) -> Result<()> {
        if state.n_agents() != self.scenario.n_agents() {
            return Err(Error::DimensionMismatch {
                expected: self.scenario.n_agents(),
                got: state.n_agents(),
            });
        }
        if state.dim() != self.scenario.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.scenario.dim(),
                got: state.dim(),
            });
        }
        Ok(())
    }

    pub fn unary_table(&self, state: &JointState) -> Result<UnaryLogZTable> {
        self.check_state(state)?;
        let params = self.scenario.params();
        let targets = self.scenario.targets();
        let rows = state
            .positions()
            .iter()
            .map(|x| {
                targets
                    .positions()
                    .iter()
                    .map(|mu| log_z_single(x, state.t(), mu, params))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        UnaryLogZTable::new(rows)
    }

    pub fn log_partition(&self, state: &JointState) -> Result<f64> {
        let tables = self.unary_table(state)?;
        let result = eliminate_with_cap(
            &tables,
            self.scenario.end_cost(),
            self.scenario.params().lambda(),
            &self.order,
            self.clique_cap,
        )?;
        Ok(result.log_partition)
    }

    pub fn control(&self, state: &JointState) -> Result<ControlOutput> {
        let tables = self.unary_table(state)?;
        let params = self.scenario.params();
        let result = eliminate_with_cap(
            &tables,
            self.scenario.end_cost(),
            params.lambda(),
            &self.order,
            self.clique_cap,
        )?;
        let targets = self.scenario.targets();
        let mut controls = Vec::with_capacity(state.n_agents());
        let mut expected_targets = Vec::with_capacity(state.n_agents());
        for (a, x) in state.positions().iter().enumerate() {
            let mubar = expected_target(targets, result.marginals.agent(a));
            controls.push(control_single(x, state.t(), &mubar, params)?);
            expected_targets.push(mubar);
        }
        Ok(ControlOutput {
            controls,
            expected_targets,
            marginals: result.marginals,
            log_partition: result.log_partition,
        })
    }
}

/// Optimal controls of all agents in `state`.
pub fn joint_control(state: &JointState, scenario: &Scenario) -> Result<ControlOutput> {
    JointController::new(scenario)?.control(state)
}

/// `nu` times the central finite difference of the joint `log Z` with
/// respect to every coordinate of every agent.
pub fn numeric_control_check(state: &JointState, scenario: &Scenario, h: f64) -> Result<Vec<Vec<f64>>> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParam {
            field: "h",
            reason: format!("finite-difference step must be > 0, got {h}"),
        });
    }
    let controller = JointController::new(scenario)?;
    let nu = scenario.params().nu();
    let mut probe = state.clone();
    let mut out = vec![vec![0.0; state.dim()]; state.n_agents()];
    for (a, row) in out.iter_mut().enumerate() {
        for (d, slot) in row.iter_mut().enumerate() {
            let x0 = state.position(a)[d];
            probe.positions_mut()[a][d] = x0 + h;
            let plus = controller.log_partition(&probe)?;
            probe.positions_mut()[a][d] = x0 - h;
            let minus = controller.log_partition(&probe)?;
            probe.positions_mut()[a][d] = x0;
            *slot = nu * (plus - minus) / (2.0 * h);
        }
    }
    Ok(out)
}

/// `epsilon (T - t + R/alpha)`.
pub fn adaptive_dt(t: f64, params: &ControlParams) -> f64 {
    params.epsilon() * params.time_to_go(t)
}

/// Source of independent standard normal draws.
pub trait NoiseSource {
    fn standard_normal(&mut self) -> f64;
}

/// ChaCha8-backed noise, reproducible across platforms for a given seed.
#[derive(Debug, Clone)]
pub struct SeededNoise {
    rng: ChaCha8Rng,
}

impl SeededNoise {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl NoiseSource for SeededNoise {
    fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }
}

/// State, control and posterior at one recorded time.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub positions: Vec<Vec<f64>>,
    pub controls: Vec<Vec<f64>>,
    pub expected_targets: Vec<Vec<f64>>,
    pub marginals: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub seed: u64,
    pub params: ControlParams,
    pub records: Vec<TrajectoryRecord>,
}

impl Trajectory {
    fn empty(seed: u64, params: ControlParams) -> Self {
        Self {
            seed,
            params,
            records: Vec::new(),
        }
    }

    pub fn end_time(&self) -> Option<f64> {
        self.records.last().map(|r| r.t)
    }

    pub fn final_positions(&self) -> Option<&[Vec<f64>]> {
        self.records.last().map(|r| r.positions.as_slice())
    }

    /// Number of integration steps taken.
    pub fn steps(&self) -> usize {
        self.records.len().saturating_sub(1)
    }
}

/// A run that stopped early, with everything recorded before the failure.
#[derive(Debug)]
pub struct SimulationFailure {
    pub partial: Trajectory,
    pub error: Error,
}

impl std::fmt::Display for SimulationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} ({} records kept)",
            self.error,
            self.partial.records.len()
        )
    }
}

impl std::error::Error for SimulationFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Simulates the controlled system from the scenario's initial state.
pub fn simulate(scenario: &Scenario, seed: u64) -> std::result::Result<Trajectory, Box<SimulationFailure>> {
    simulate_with_noise(scenario, seed, &mut SeededNoise::new(seed))
}

/// [`simulate`] with an explicit noise source; `seed` is only recorded.
///
/// One draw per agent per coordinate per step, agents in index order.
pub fn simulate_with_noise(
    scenario: &Scenario,
    seed: u64,
    noise: &mut impl NoiseSource,
) -> std::result::Result<Trajectory, Box<SimulationFailure>> {
    let params = *scenario.params();
    let mut trajectory = Trajectory::empty(seed, params);
    let fail = |trajectory: Trajectory, step: usize, t: f64, source: Error| {
        Box::new(SimulationFailure {
            partial: trajectory,
            error: Error::Simulation {
                step,
                t,
                source: Box::new(source),
            },
        })
    };
    let t0 = scenario.initial().t();
    if !scenario.potential().is_zero() {
        let err = Error::Unsupported("closed-loop control with a nonzero potential".into());
        return Err(fail(trajectory, 0, t0, err));
    }
    let controller = match JointController::new(scenario) {
        Ok(c) => c,
        Err(e) => return Err(fail(trajectory, 0, t0, e)),
    };

    let horizon = params.horizon();
    let drift = scenario.drift();
    let with_drift = !drift.is_zero();
    let mut state = scenario.initial().clone();
    let mut drift_buf = vec![0.0; state.dim()];
    let mut step = 0;
    loop {
        let t = state.t();
        let out = match controller.control(&state) {
            Ok(out) => out,
            Err(e) => return Err(fail(trajectory, step, t, e)),
        };
        trajectory.records.push(TrajectoryRecord {
            t,
            positions: state.positions().to_vec(),
            controls: out.controls.clone(),
            expected_targets: out.expected_targets,
            marginals: out.marginals.as_rows().to_vec(),
        });
        if t >= horizon {
            break;
        }
        let mut dt = adaptive_dt(t, &params);
        let next_t = if t + dt >= horizon {
            dt = horizon - t;
            horizon
        } else {
            t + dt
        };
        let scale = (params.nu() * dt).sqrt();
        for (x, u) in state.positions_mut().iter_mut().zip(&out.controls) {
            if with_drift {
                drift.drift(x, t, &mut drift_buf);
            }
            for (d, xi) in x.iter_mut().enumerate() {
                let b = if with_drift { drift_buf[d] } else { 0.0 };
                *xi += (b + u[d]) * dt + scale * noise.standard_normal();
            }
        }
        state = state.with_time(next_t);
        step += 1;
    }
    Ok(trajectory)
}
