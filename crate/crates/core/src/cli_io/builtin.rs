//! Named reference scenarios.

use crate::endcost::{firemen_factors, holiday_factors, EndCostFactor, FactoredEndCost};
use crate::error::{Error, Result};
use crate::model::{ControlParams, JointState, Scenario, TargetSet};

use super::scenario_file::{regular_graph_with_width_cap, DEFAULT_MAX_WIDTH};

pub const BUILTIN_NAMES: [&str; 3] = ["firemen-2x2", "firemen-6x3", "holiday-42"];

/// Seed of the relation graph used by `holiday-42`.
pub const HOLIDAY_GRAPH_SEED: u64 = 42;

/// Two agents at the origin, targets at -1 and 1, `E(1,1) = E(2,2) = 2`,
/// `E(1,2) = E(2,1) = 0`.
pub fn firemen_2x2() -> Scenario {
    let table = EndCostFactor::new(vec![0, 1], vec![2.0, 0.0, 0.0, 2.0], 2).expect("static table");
    let end_cost = FactoredEndCost::new(2, vec![table], 0.0).expect("static table");
    build("firemen-2x2", 2, &[-1.0, 1.0], end_cost)
}

/// Six agents at the origin sharing three fires at -1, 0, 1 with `c = 1`.
pub fn firemen_6x3() -> Scenario {
    let end_cost = firemen_factors(6, 3, 1.0).expect("static parameters");
    build("firemen-6x3", 6, &[-1.0, 0.0, 1.0], end_cost)
}

/// Forty-two agents on a random 3-regular friend/foe graph choosing among
/// three resorts at -1, 0, 1.
pub fn holiday_42() -> Scenario {
    let graph = regular_graph_with_width_cap(42, 3, 1.0, HOLIDAY_GRAPH_SEED, DEFAULT_MAX_WIDTH)
        .expect("a width-capped graph exists for the fixed seed");
    let end_cost = holiday_factors(&graph, 3).expect("graph matches target count");
    build("holiday-42", 42, &[-1.0, 0.0, 1.0], end_cost)
        .with_relations(graph)
        .expect("graph covers all agents")
}

fn build(name: &str, n: usize, targets: &[f64], end_cost: FactoredEndCost) -> Scenario {
    Scenario::new(
        name,
        TargetSet::on_line(targets).expect("static targets"),
        end_cost,
        ControlParams::reference(),
        JointState::at_origin(0.0, n, 1).expect("static state"),
    )
    .expect("built-in scenarios are valid")
}

pub fn builtin(name: &str) -> Result<Scenario> {
    match name {
        "firemen-2x2" => Ok(firemen_2x2()),
        "firemen-6x3" => Ok(firemen_6x3()),
        "holiday-42" => Ok(holiday_42()),
        _ => Err(Error::UnknownScenario(name.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtins_load() {
        for name in BUILTIN_NAMES {
            assert_eq!(builtin(name).unwrap().name(), name);
        }
        assert!(matches!(builtin("nope"), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn firemen_2x2_table() {
        let s = firemen_2x2();
        let e = s.end_cost();
        assert_eq!(e.total(&[0, 0]).unwrap(), 2.0);
        assert_eq!(e.total(&[1, 1]).unwrap(), 2.0);
        assert_eq!(e.total(&[0, 1]).unwrap(), 0.0);
        assert_eq!(e.total(&[1, 0]).unwrap(), 0.0);
    }

    #[test]
    fn holiday_graph_is_cubic() {
        let s = holiday_42();
        let g = s.relations().unwrap();
        assert!(g.degrees().iter().all(|&d| d == 3));
        assert_eq!(g.edges().len(), 63);
    }
}
