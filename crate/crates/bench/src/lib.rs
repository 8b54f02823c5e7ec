//! Shared fixtures for the criterion benchmarks.

use pathint_core::{JointState, Scenario};

/// A spread-out, deterministic joint state for `scenario` at time `t`.
pub fn spread_state(scenario: &Scenario, t: f64) -> JointState {
    let positions = (0..scenario.n_agents())
        .map(|a| vec![1.2 * (1.7 * a as f64 + 0.3).sin()])
        .collect();
    JointState::new(t, positions).expect("one-dimensional fixture")
}
