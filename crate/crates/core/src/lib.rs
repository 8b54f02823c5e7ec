//! Path-integral stochastic optimal control for collaborative multi-agent
//! systems with independent dynamics and a joint, factored end cost.
//!
//! For drift-free agents with quadratic end costs around a set of targets,
//! the optimal control of every agent is a posterior-weighted average of
//! single-target controls. The posterior over agent-to-target assignments is
//! an ordinary graphical-model marginal, computed exactly here by
//! sum-product over a clique tree of the end-cost graph.
//!
//! * [`model`] shared types and parameter validation
//! * [`gaussian`] closed-form single- and multi-target quantities
//! * [`endcost`] factored end costs and relation graphs
//! * [`inference`] exact assignment marginals
//! * [`controller`] joint controls and the controlled SDE simulation
//! * [`pathint_mc`] Monte-Carlo partition functions for general drift/potential
//! * [`cli_io`] scenario files, CSV/SVG output, sweeps and validation suites

pub mod endcost;
pub mod controller;
pub mod error;
pub mod gaussian;
pub mod inference;
pub mod math;
pub mod model;
pub mod pathint_mc;
pub mod cli_io;

pub use endcost::{EndCostFactor, FactoredEndCost, Relation, RelationGraph};
pub use error::{Error, Result};
pub use inference::{AssignmentMarginals, EliminationOrder, InferenceResult, UnaryLogZTable};
pub use model::{
    validate_params, ControlParams, Drift, DriftSpec, JointState, Potential, PotentialSpec,
    RawParams, Scenario, TargetSet,
};
