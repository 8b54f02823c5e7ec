//! TOML scenario documents.
//!
//! ```toml
//! name = "two-firemen"
//!
//! [params]
//! nu = 1.0
//! R = 1.0
//! alpha = 1000.0
//! epsilon = 0.01
//! T = 1.0
//!
//! [agents]
//! count = 2
//! dimension = 1          # default 1
//! start_time = 0.0       # default 0
//! initial = [[0.0], [0.0]]   # default: all at the origin
//!
//! [targets]
//! positions = [[-1.0], [1.0]]
//!
//! [end_cost]
//! kind = "factors"       # or "none", "firemen", "holiday", "random-regular"
//! constant_offset = 0.0
//!
//! [[end_cost.factors]]
//! scope = [1, 2]                         # 1-based agents
//! entries = [{ labels = [1, 1], cost = 2.0 }, { labels = [2, 2], cost = 2.0 }]
//! # or a dense row-major table: table = [2.0, 0.0, 0.0, 2.0]
//! ```
//!
//! `kind = "holiday"` reads edges from a `[[relations]]` list
//! (`a`, `b` 1-based, `strength`); `kind = "random-regular"` generates them.
//! Optional `[drift]` and `[potential]` tables take a `kind` of `zero`,
//! `constant` or `linear` / `quadratic`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::endcost::{
    firemen_factors, holiday_factors, random_regular_graph, EndCostFactor, FactoredEndCost,
    Relation, RelationGraph,
};
use crate::error::{Error, Result};
use crate::inference::min_degree_order;
use crate::model::{validate_params, DriftSpec, JointState, PotentialSpec, RawParams, Scenario, TargetSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    name: String,
    params: RawParams,
    agents: AgentsDoc,
    targets: TargetsDoc,
    end_cost: EndCostDoc,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    relations: Vec<EdgeDoc>,
    #[serde(default, skip_serializing_if = "is_zero_drift")]
    drift: DriftSpec,
    #[serde(default, skip_serializing_if = "is_zero_potential")]
    potential: PotentialSpec,
}

fn is_zero_drift(d: &DriftSpec) -> bool {
    *d == DriftSpec::Zero
}
fn is_zero_potential(p: &PotentialSpec) -> bool {
    *p == PotentialSpec::Zero
}

fn one() -> usize {
    1
}
fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentsDoc {
    count: usize,
    #[serde(default = "one")]
    dimension: usize,
    #[serde(default)]
    start_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetsDoc {
    positions: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    a: usize,
    b: usize,
    strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryDoc {
    labels: Vec<usize>,
    cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorDoc {
    scope: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    entries: Option<Vec<EntryDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    default: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum EndCostDoc {
    None,
    Factors {
        #[serde(default)]
        constant_offset: f64,
        #[serde(default)]
        factors: Vec<FactorDoc>,
    },
    Firemen {
        c: f64,
    },
    Holiday,
    RandomRegular {
        degree: usize,
        #[serde(default = "unit")]
        strength: f64,
        seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_width: Option<usize>,
    },
}

fn parse_error(context: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        context: context.to_string(),
        message: message.into(),
    }
}

fn zero_based(context: &str, what: &str, one_based: usize, bound: usize) -> Result<usize> {
    if one_based == 0 || one_based > bound {
        return Err(parse_error(
            context,
            format!("{what} {one_based} outside 1..={bound}"),
        ));
    }
    Ok(one_based - 1)
}

fn build_factor(doc: &FactorDoc, index: usize, n: usize, m: usize) -> Result<EndCostFactor> {
    let context = format!("end_cost.factors[{index}]");
    let scope = doc
        .scope
        .iter()
        .map(|&a| zero_based(&context, "agent", a, n))
        .collect::<Result<Vec<_>>>()?;
    match (&doc.table, &doc.entries) {
        (Some(table), None) => {
            if doc.default.is_some() {
                return Err(parse_error(&context, "`default` only applies to `entries`"));
            }
            EndCostFactor::new(scope, table.clone(), m)
        }
        (None, Some(entries)) => {
            let arity = scope.len();
            let size = m
                .checked_pow(arity as u32)
                .ok_or_else(|| parse_error(&context, "factor table too large"))?;
            let mut table = vec![doc.default.unwrap_or(0.0); size];
            for entry in entries {
                if entry.labels.len() != arity {
                    return Err(parse_error(
                        &context,
                        format!("entry {:?} has the wrong number of labels", entry.labels),
                    ));
                }
                let mut idx = 0;
                for &label in &entry.labels {
                    if label == 0 || label > m {
                        return Err(Error::LabelOutOfRange { label, m });
                    }
                    idx = idx * m + (label - 1);
                }
                table[idx] = entry.cost;
            }
            EndCostFactor::new(scope, table, m)
        }
        _ => Err(parse_error(
            &context,
            "exactly one of `table` or `entries` is required",
        )),
    }
}

/// Regenerates a random regular relation graph with consecutive seeds until
/// the min-degree induced width is at most `max_width`.
pub fn regular_graph_with_width_cap(
    n: usize,
    degree: usize,
    strength: f64,
    seed: u64,
    max_width: usize,
) -> Result<RelationGraph> {
    const ATTEMPTS: u64 = 100;
    for k in 0..ATTEMPTS {
        let graph = random_regular_graph(n, degree, strength, seed.wrapping_add(k))?;
        let scopes: Vec<Vec<usize>> = graph.edges().iter().map(|e| vec![e.a, e.b]).collect();
        if min_degree_order(&scopes, n)?.induced_width() <= max_width {
            return Ok(graph);
        }
    }
    Err(Error::GraphGeneration {
        attempts: ATTEMPTS as usize,
    })
}

/// Default induced-width cap when generating relation graphs.
pub const DEFAULT_MAX_WIDTH: usize = 10;

impl ScenarioDoc {
    fn into_scenario(self) -> Result<Scenario> {
        let params = validate_params(&self.params)?;
        let n = self.agents.count;
        let k = self.agents.dimension;
        if n == 0 {
            return Err(parse_error("agents.count", "at least one agent required"));
        }
        let initial = match self.agents.initial {
            Some(positions) => {
                if positions.len() != n {
                    return Err(parse_error(
                        "agents.initial",
                        format!("{} positions for {n} agents", positions.len()),
                    ));
                }
                JointState::new(self.agents.start_time, positions)?
            }
            None => JointState::at_origin(self.agents.start_time, n, k)?,
        };
        if initial.dim() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: initial.dim(),
            });
        }
        let targets = TargetSet::new(self.targets.positions)?;
        let m = targets.len();

        let relations = if self.relations.is_empty() {
            None
        } else {
            let edges = self
                .relations
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let context = format!("relations[{i}]");
                    Ok(Relation {
                        a: zero_based(&context, "agent", e.a, n)?,
                        b: zero_based(&context, "agent", e.b, n)?,
                        strength: e.strength,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Some(RelationGraph::new(n, edges)?)
        };

        let (end_cost, relations) = match self.end_cost {
            EndCostDoc::None => (FactoredEndCost::zero(m)?, relations),
            EndCostDoc::Factors {
                constant_offset,
                factors,
            } => {
                let factors = factors
                    .iter()
                    .enumerate()
                    .map(|(i, f)| build_factor(f, i, n, m))
                    .collect::<Result<Vec<_>>>()?;
                (FactoredEndCost::new(m, factors, constant_offset)?, relations)
            }
            EndCostDoc::Firemen { c } => {
                if !(c.is_finite() && c > 0.0) {
                    return Err(parse_error("end_cost.c", format!("must be > 0, got {c}")));
                }
                (firemen_factors(n, m, c)?, relations)
            }
            EndCostDoc::Holiday => {
                let graph = relations
                    .ok_or_else(|| parse_error("end_cost", "kind = \"holiday\" needs [[relations]]"))?;
                (holiday_factors(&graph, m)?, Some(graph))
            }
            EndCostDoc::RandomRegular {
                degree,
                strength,
                seed,
                max_width,
            } => {
                if relations.is_some() {
                    return Err(parse_error(
                        "relations",
                        "explicit relations conflict with kind = \"random-regular\"",
                    ));
                }
                let graph = regular_graph_with_width_cap(
                    n,
                    degree,
                    strength,
                    seed,
                    max_width.unwrap_or(DEFAULT_MAX_WIDTH),
                )?;
                (holiday_factors(&graph, m)?, Some(graph))
            }
        };

        let mut scenario = Scenario::new(self.name, targets, end_cost, params, initial)?
            .with_drift(self.drift)?
            .with_potential(self.potential)?;
        if let Some(graph) = relations {
            scenario = scenario.with_relations(graph)?;
        }
        Ok(scenario)
    }

    fn from_scenario(s: &Scenario) -> Self {
        let factors = s
            .end_cost()
            .factors()
            .iter()
            .map(|f| FactorDoc {
                scope: f.scope().iter().map(|a| a + 1).collect(),
                table: Some(f.table().to_vec()),
                entries: None,
                default: None,
            })
            .collect();
        let relations = s
            .relations()
            .map(|g| {
                g.edges()
                    .iter()
                    .map(|e| EdgeDoc {
                        a: e.a + 1,
                        b: e.b + 1,
                        strength: e.strength,
                    })
                    .collect()
            })
            .unwrap_or_default();
        ScenarioDoc {
            name: s.name().to_string(),
            params: s.params().to_raw(),
            agents: AgentsDoc {
                count: s.n_agents(),
                dimension: s.dim(),
                start_time: s.initial().t(),
                initial: Some(s.initial().positions().to_vec()),
            },
            targets: TargetsDoc {
                positions: s.targets().positions().to_vec(),
            },
            end_cost: EndCostDoc::Factors {
                constant_offset: s.end_cost().constant_offset(),
                factors,
            },
            relations,
            drift: s.drift().clone(),
            potential: s.potential().clone(),
        }
    }
}

/// Parses and validates a scenario document. `context` names the source in
/// error messages.
pub fn parse_scenario(text: &str, context: &str) -> Result<Scenario> {
    let doc: ScenarioDoc = toml::from_str(text).map_err(|e| parse_error(context, e.to_string()))?;
    doc.into_scenario()
}

/// Renders a scenario with explicit initial positions and dense factor tables.
pub fn scenario_to_toml(scenario: &Scenario) -> String {
    toml::to_string(&ScenarioDoc::from_scenario(scenario))
        .expect("scenario documents always serialize")
}

pub fn read_scenario_file(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_FIREMEN: &str = r#"
name = "two"

[params]
nu = 1.0
R = 1.0
alpha = 1000.0
epsilon = 0.01
T = 1.0

[agents]
count = 2

[targets]
positions = [[-1.0], [1.0]]

[end_cost]
kind = "factors"

[[end_cost.factors]]
scope = [1, 2]
entries = [{ labels = [1, 1], cost = 2.0 }, { labels = [2, 2], cost = 2.0 }]
"#;

    #[test]
    fn parses_sparse_entries() {
        let s = parse_scenario(TWO_FIREMEN, "inline").unwrap();
        assert_eq!(s.n_agents(), 2);
        assert_eq!(s.end_cost().total(&[0, 0]).unwrap(), 2.0);
        assert_eq!(s.end_cost().total(&[1, 0]).unwrap(), 0.0);
        assert_eq!(s.params().lambda(), 1.0);
    }

    #[test]
    fn round_trips() {
        let s = parse_scenario(TWO_FIREMEN, "inline").unwrap();
        let text = scenario_to_toml(&s);
        assert_eq!(parse_scenario(&text, "again").unwrap(), s);
    }

    #[test]
    fn label_out_of_range() {
        let bad = TWO_FIREMEN.replace("labels = [2, 2]", "labels = [3, 2]");
        assert!(matches!(
            parse_scenario(&bad, "inline"),
            Err(Error::LabelOutOfRange { label: 3, m: 2 })
        ));
        let bad = TWO_FIREMEN.replace("scope = [1, 2]", "scope = [1, 3]");
        assert!(matches!(parse_scenario(&bad, "inline"), Err(Error::Parse { .. })));
    }

    #[test]
    fn syntax_errors_carry_location() {
        let bad = TWO_FIREMEN.replace("nu = 1.0", "nu = ");
        match parse_scenario(&bad, "file.toml") {
            Err(Error::Parse { context, message }) => {
                assert_eq!(context, "file.toml");
                assert!(message.contains("line"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn coupling_checked() {
        let bad = TWO_FIREMEN.replace("nu = 1.0", "nu = 1.0\nlambda = 3.0");
        assert!(matches!(
            parse_scenario(&bad, "inline"),
            Err(Error::CouplingConstraint { .. })
        ));
    }

    #[test]
    fn holiday_from_relations() {
        let text = TWO_FIREMEN
            .replace(
                "kind = \"factors\"",
                "kind = \"holiday\"\n\n[[relations]]\na = 1\nb = 2\nstrength = -1.0",
            )
            .split("[[end_cost.factors]]")
            .next()
            .unwrap()
            .to_string();
        let s = parse_scenario(&text, "inline").unwrap();
        assert_eq!(s.end_cost().total(&[1, 1]).unwrap(), 1.0);
        assert_eq!(s.relations().unwrap().edges().len(), 1);
        let again = parse_scenario(&scenario_to_toml(&s), "again").unwrap();
        assert_eq!(again, s);
    }
}
