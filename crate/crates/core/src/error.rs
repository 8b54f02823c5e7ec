use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("coupling constraint violated: lambda = {lambda} but nu * R = {expected}")]
    CouplingConstraint { lambda: f64, expected: f64 },

    #[error("time {t} outside the valid domain (horizon {horizon})")]
    Domain { t: f64, horizon: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("degenerate posterior: every assignment has zero weight")]
    DegeneratePosterior,

    #[error("target label {label} out of range 1..={m}")]
    LabelOutOfRange { label: usize, m: usize },

    #[error("invalid end-cost factor: {0}")]
    InvalidFactor(String),

    #[error("invalid relation graph: {0}")]
    InvalidGraph(String),

    #[error("random graph generation failed after {attempts} attempts")]
    GraphGeneration { attempts: usize },

    #[error("brute-force enumeration of {states} labelings exceeds the limit {limit}")]
    SizeGuard { states: f64, limit: f64 },

    #[error("clique {clique:?} has {entries} table entries, exceeding the cap {cap}")]
    Treewidth {
        clique: Vec<usize>,
        entries: f64,
        cap: usize,
    },

    #[error("invalid elimination order: {0}")]
    InvalidOrder(String),

    #[error("kill probability {probability} exceeds 0.5 at t = {t}; use a smaller Monte-Carlo step")]
    StepSize { probability: f64, t: f64 },

    #[error("negative potential {value} at t = {t}")]
    NegativePotential { value: f64, t: f64 },

    #[error("Monte-Carlo estimate degenerate: no surviving probability mass")]
    EstimationDegenerate,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("simulation aborted at step {step} (t = {t}): {source}")]
    Simulation {
        step: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("unknown built-in scenario `{0}`")]
    UnknownScenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
