//! Shared domain types: model constants, joint agent state, targets and the
//! scenario description consumed by the controller and the I/O layer.

use serde::{Deserialize, Serialize};

use crate::endcost::{FactoredEndCost, RelationGraph};
use crate::error::{Error, Result};

/// Relative tolerance accepted between an explicit lambda and `nu * R`.
const COUPLING_TOLERANCE: f64 = 1e-12;

/// Parameter record as it appears in a configuration file, before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    pub nu: f64,
    #[serde(rename = "R", alias = "r")]
    pub r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub alpha: f64,
    pub epsilon: f64,
    #[serde(rename = "T", alias = "horizon")]
    pub horizon: f64,
}

/// Scalar model constants. `lambda` is always `nu * R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlParams {
    nu: f64,
    r: f64,
    lambda: f64,
    alpha: f64,
    epsilon: f64,
    horizon: f64,
}

fn require_positive(field: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::InvalidParam {
            field,
            reason: format!("must be finite and > 0, got {value}"),
        });
    }
    Ok(())
}

/// Validates a raw parameter record, deriving lambda from the noise/control
/// coupling `nu = lambda / R`.
pub fn validate_params(raw: &RawParams) -> Result<ControlParams> {
    require_positive("nu", raw.nu)?;
    require_positive("R", raw.r)?;
    require_positive("alpha", raw.alpha)?;
    require_positive("epsilon", raw.epsilon)?;
    require_positive("T", raw.horizon)?;
    if raw.epsilon >= 1.0 {
        return Err(Error::InvalidParam {
            field: "epsilon",
            reason: format!("must be < 1, got {}", raw.epsilon),
        });
    }
    let expected = raw.nu * raw.r;
    if let Some(lambda) = raw.lambda {
        if !lambda.is_finite()
            || (lambda - expected).abs() > COUPLING_TOLERANCE * expected.abs()
        {
            return Err(Error::CouplingConstraint { lambda, expected });
        }
    }
    Ok(ControlParams {
        nu: raw.nu,
        r: raw.r,
        lambda: expected,
        alpha: raw.alpha,
        epsilon: raw.epsilon,
        horizon: raw.horizon,
    })
}

impl ControlParams {
    pub fn new(nu: f64, r: f64, alpha: f64, epsilon: f64, horizon: f64) -> Result<Self> {
        validate_params(&RawParams {
            nu,
            r,
            lambda: None,
            alpha,
            epsilon,
            horizon,
        })
    }

    /// nu = R = 1, alpha = 1e3, epsilon = 0.01, T = 1.
    pub fn reference() -> Self {
        Self::new(1.0, 1.0, 1e3, 0.01, 1.0).expect("reference parameters are valid")
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Time-to-go shifted by the end-cost stiffness, `T - t + R/alpha`.
    pub fn time_to_go(&self, t: f64) -> f64 {
        self.horizon - t + self.r / self.alpha
    }

    pub fn to_raw(&self) -> RawParams {
        RawParams {
            nu: self.nu,
            r: self.r,
            lambda: Some(self.lambda),
            alpha: self.alpha,
            epsilon: self.epsilon,
            horizon: self.horizon,
        }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.nu, self.r, self.alpha, epsilon, self.horizon)
    }
}

fn check_vectors(what: &str, vectors: &[Vec<f64>]) -> Result<usize> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::InvalidState(format!("{what}: at least one position required")))?;
    let k = first.len();
    if k == 0 {
        return Err(Error::InvalidState(format!("{what}: dimension must be >= 1")));
    }
    for v in vectors {
        if v.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: v.len(),
            });
        }
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidState(format!("{what}: non-finite coordinate")));
        }
    }
    Ok(k)
}

/// Time plus the positions of all `n` agents in `k`-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    t: f64,
    positions: Vec<Vec<f64>>,
}

impl JointState {
    pub fn new(t: f64, positions: Vec<Vec<f64>>) -> Result<Self> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidState(format!("time must be finite and >= 0, got {t}")));
        }
        check_vectors("joint state", &positions)?;
        Ok(Self { t, positions })
    }

    /// All `n` agents at the origin of `R^k`.
    pub fn at_origin(t: f64, n: usize, k: usize) -> Result<Self> {
        Self::new(t, vec![vec![0.0; k]; n])
    }

    pub fn t(&self) -> f64 {
        self.t
    }
    pub fn positions(&self) -> &[Vec<f64>] {
        &self.positions
    }
    pub fn position(&self, agent: usize) -> &[f64] {
        &self.positions[agent]
    }
    pub fn n_agents(&self) -> usize {
        self.positions.len()
    }
    pub fn dim(&self) -> usize {
        self.positions[0].len()
    }

    pub(crate) fn with_time(&self, t: f64) -> Self {
        Self {
            t,
            positions: self.positions.clone(),
        }
    }

    pub(crate) fn positions_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.positions
    }
}

/// Target positions `mu_1..mu_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSet {
    positions: Vec<Vec<f64>>,
}

impl TargetSet {
    pub fn new(positions: Vec<Vec<f64>>) -> Result<Self> {
        check_vectors("target set", &positions)?;
        Ok(Self { positions })
    }

    /// Convenience for one-dimensional targets.
    pub fn on_line(points: &[f64]) -> Result<Self> {
        Self::new(points.iter().map(|&p| vec![p]).collect())
    }

    pub fn positions(&self) -> &[Vec<f64>] {
        &self.positions
    }
    pub fn get(&self, s: usize) -> &[f64] {
        &self.positions[s]
    }
    pub fn len(&self) -> usize {
        self.positions.len()
    }
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
    pub fn dim(&self) -> usize {
        self.positions[0].len()
    }

    /// Smallest distance between two distinct targets, `None` for a single target.
    pub fn min_spacing(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (i, a) in self.positions.iter().enumerate() {
            for b in &self.positions[i + 1..] {
                let d = crate::math::squared_distance(a, b).sqrt();
                best = Some(best.map_or(d, |x| x.min(d)));
            }
        }
        best
    }
}

/// Uncontrolled drift `b(x, t)` of a single agent.
pub trait Drift: Sync {
    fn drift(&self, x: &[f64], t: f64, out: &mut [f64]);

    fn is_zero(&self) -> bool {
        false
    }
}

/// State cost rate `V(x, t) >= 0` of a single agent.
pub trait Potential: Sync {
    fn potential(&self, x: &[f64], t: f64) -> f64;

    fn is_zero(&self) -> bool {
        false
    }
}

impl<F> Drift for F
where
    F: Fn(&[f64], f64, &mut [f64]) + Sync,
{
    fn drift(&self, x: &[f64], t: f64, out: &mut [f64]) {
        self(x, t, out)
    }
}

impl<F> Potential for F
where
    F: Fn(&[f64], f64) -> f64 + Sync,
{
    fn potential(&self, x: &[f64], t: f64) -> f64 {
        self(x, t)
    }
}

/// Serializable per-agent drift. Every agent shares the same law.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DriftSpec {
    #[default]
    Zero,
    /// `b(x, t) = value`
    Constant { value: Vec<f64> },
    /// `b(x, t) = coefficient * x`
    Linear { coefficient: f64 },
}

impl Drift for DriftSpec {
    fn drift(&self, x: &[f64], _t: f64, out: &mut [f64]) {
        match self {
            DriftSpec::Zero => out.fill(0.0),
            DriftSpec::Constant { value } => out.copy_from_slice(value),
            DriftSpec::Linear { coefficient } => {
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = coefficient * xi;
                }
            }
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            DriftSpec::Zero => true,
            DriftSpec::Constant { value } => value.iter().all(|v| *v == 0.0),
            DriftSpec::Linear { coefficient } => *coefficient == 0.0,
        }
    }
}

/// Serializable per-agent potential.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    #[default]
    Zero,
    /// `V(x, t) = value`
    Constant { value: f64 },
    /// `V(x, t) = coefficient / 2 * |x - center|^2`
    Quadratic { coefficient: f64, center: Vec<f64> },
}

impl Potential for PotentialSpec {
    fn potential(&self, x: &[f64], _t: f64) -> f64 {
        match self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::Constant { value } => *value,
            PotentialSpec::Quadratic {
                coefficient,
                center,
            } => 0.5 * coefficient * crate::math::squared_distance(x, center),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            PotentialSpec::Zero => true,
            PotentialSpec::Constant { value } => *value == 0.0,
            PotentialSpec::Quadratic { coefficient, .. } => *coefficient == 0.0,
        }
    }
}

/// A complete, validated problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub(crate) name: String,
    pub(crate) targets: TargetSet,
    pub(crate) end_cost: FactoredEndCost,
    pub(crate) relations: Option<RelationGraph>,
    pub(crate) params: ControlParams,
    pub(crate) initial: JointState,
    pub(crate) drift: DriftSpec,
    pub(crate) potential: PotentialSpec,
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        targets: TargetSet,
        end_cost: FactoredEndCost,
        params: ControlParams,
        initial: JointState,
    ) -> Result<Self> {
        let scenario = Self {
            name: name.into(),
            targets,
            end_cost,
            relations: None,
            params,
            initial,
            drift: DriftSpec::Zero,
            potential: PotentialSpec::Zero,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn with_relations(mut self, relations: RelationGraph) -> Result<Self> {
        self.relations = Some(relations);
        self.validate()?;
        Ok(self)
    }

    pub fn with_drift(mut self, drift: DriftSpec) -> Result<Self> {
        self.drift = drift;
        self.validate()?;
        Ok(self)
    }

    pub fn with_potential(mut self, potential: PotentialSpec) -> Result<Self> {
        self.potential = potential;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let n = self.initial.n_agents();
        let k = self.initial.dim();
        if self.targets.dim() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: self.targets.dim(),
            });
        }
        if self.initial.t() > self.params.horizon() {
            return Err(Error::Domain {
                t: self.initial.t(),
                horizon: self.params.horizon(),
            });
        }
        if self.end_cost.num_targets() != self.targets.len() {
            return Err(Error::InvalidFactor(format!(
                "end cost defined over {} targets but the scenario has {}",
                self.end_cost.num_targets(),
                self.targets.len()
            )));
        }
        self.end_cost.validate_agents(n)?;
        if let Some(graph) = &self.relations {
            if graph.n_nodes() != n {
                return Err(Error::InvalidGraph(format!(
                    "relation graph has {} nodes but the scenario has {n} agents",
                    graph.n_nodes()
                )));
            }
        }
        if let DriftSpec::Constant { value } = &self.drift {
            if value.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    got: value.len(),
                });
            }
        }
        match &self.potential {
            PotentialSpec::Quadratic {
                coefficient,
                center,
            } => {
                if center.len() != k {
                    return Err(Error::DimensionMismatch {
                        expected: k,
                        got: center.len(),
                    });
                }
                if *coefficient < 0.0 {
                    return Err(Error::InvalidParam {
                        field: "potential.coefficient",
                        reason: "must be >= 0".into(),
                    });
                }
            }
            PotentialSpec::Constant { value } if *value < 0.0 => {
                return Err(Error::InvalidParam {
                    field: "potential.value",
                    reason: "must be >= 0".into(),
                });
            }
            _ => {}
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn targets(&self) -> &TargetSet {
        &self.targets
    }
    pub fn end_cost(&self) -> &FactoredEndCost {
        &self.end_cost
    }
    pub fn relations(&self) -> Option<&RelationGraph> {
        self.relations.as_ref()
    }
    pub fn params(&self) -> &ControlParams {
        &self.params
    }
    pub fn initial(&self) -> &JointState {
        &self.initial
    }
    pub fn drift(&self) -> &DriftSpec {
        &self.drift
    }
    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }
    pub fn n_agents(&self) -> usize {
        self.initial.n_agents()
    }
    pub fn n_targets(&self) -> usize {
        self.targets.len()
    }
    pub fn dim(&self) -> usize {
        self.initial.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(nu: f64, r: f64, lambda: Option<f64>) -> RawParams {
        RawParams {
            nu,
            r,
            lambda,
            alpha: 1e3,
            epsilon: 0.01,
            horizon: 1.0,
        }
    }

    #[test]
    fn lambda_is_derived() {
        assert_eq!(validate_params(&raw(1.0, 1.0, None)).unwrap().lambda(), 1.0);
        assert_eq!(validate_params(&raw(2.0, 0.5, None)).unwrap().lambda(), 1.0);
    }

    #[test]
    fn inconsistent_lambda_is_rejected() {
        let err = validate_params(&raw(1.0, 1.0, Some(2.0))).unwrap_err();
        assert!(matches!(err, Error::CouplingConstraint { .. }));
        assert!(validate_params(&raw(1.0, 1.0, Some(1.0 + 1e-14))).is_ok());
    }

    #[test]
    fn non_positive_fields_name_the_field() {
        let mut r = raw(1.0, 1.0, None);
        r.alpha = 0.0;
        match validate_params(&r).unwrap_err() {
            Error::InvalidParam { field, .. } => assert_eq!(field, "alpha"),
            e => panic!("unexpected {e}"),
        }
        let mut r = raw(1.0, -1.0, None);
        r.epsilon = 1.0;
        match validate_params(&r).unwrap_err() {
            Error::InvalidParam { field, .. } => assert_eq!(field, "R"),
            e => panic!("unexpected {e}"),
        }
        let mut r = raw(1.0, 1.0, None);
        r.epsilon = 1.0;
        assert!(matches!(
            validate_params(&r),
            Err(Error::InvalidParam { field: "epsilon", .. })
        ));
    }

    #[test]
    fn validation_is_idempotent() {
        let p = validate_params(&raw(0.3, 7.0, None)).unwrap();
        assert_eq!(validate_params(&p.to_raw()).unwrap(), p);
    }

    #[test]
    fn joint_state_rejects_ragged_and_nan() {
        assert!(JointState::new(0.0, vec![vec![0.0], vec![0.0, 1.0]]).is_err());
        assert!(JointState::new(0.0, vec![vec![f64::NAN]]).is_err());
        assert!(JointState::new(0.0, vec![]).is_err());
        assert!(JointState::new(0.0, vec![vec![]]).is_err());
        assert!(TargetSet::new(vec![]).is_err());
    }

    #[test]
    fn min_spacing() {
        let t = TargetSet::on_line(&[-1.0, 0.0, 1.5]).unwrap();
        assert_eq!(t.min_spacing(), Some(1.0));
        assert_eq!(TargetSet::on_line(&[2.0]).unwrap().min_spacing(), None);
    }
}
