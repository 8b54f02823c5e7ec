use proptest::prelude::*;

use pathint_core::cli_io::builtin::{builtin, firemen_2x2, BUILTIN_NAMES};
use pathint_core::cli_io::runner::{layout_for, run_scenario};
use pathint_core::cli_io::{
    parse_scenario, read_trajectory, scenario_to_toml, write_trajectory, RunConfig, ScenarioSource,
    SeedRange,
};
use pathint_core::controller::simulate;
use pathint_core::{
    validate_params, ControlParams, DriftSpec, EndCostFactor, FactoredEndCost, JointState,
    Relation, RelationGraph, Scenario, TargetSet,
};

fn scenario_strategy() -> impl Strategy<Value = Scenario> {
    (1usize..=4, 1usize..=3, 1usize..=2).prop_flat_map(|(n, m, k)| {
        (
            prop::collection::vec(prop::collection::vec(-3.0f64..3.0, k), m),
            prop::collection::vec(prop::collection::vec(-1.0f64..1.0, k), n),
            prop::collection::vec(
                (0..n, prop::collection::vec(-2.0f64..2.0, m * m)),
                0..=3,
            ),
            -1.0f64..1.0,
            (0.1f64..3.0, 0.1f64..3.0, 1.0f64..2000.0, 0.001f64..0.5, 0.5f64..3.0),
            any::<bool>(),
        )
            .prop_map(move |(targets, initial, factors, offset, (nu, r, alpha, eps, horizon), edge)| {
                let factors = factors
                    .into_iter()
                    .filter(|_| n >= 2)
                    .map(|(a, table)| {
                        EndCostFactor::new(vec![a, (a + 1) % n], table, m).unwrap()
                    })
                    .collect();
                let mut s = Scenario::new(
                    "generated",
                    TargetSet::new(targets).unwrap(),
                    FactoredEndCost::new(m, factors, offset).unwrap(),
                    ControlParams::new(nu, r, alpha, eps, horizon).unwrap(),
                    JointState::new(0.1, initial).unwrap(),
                )
                .unwrap();
                if k == 1 {
                    s = s.with_drift(DriftSpec::Linear { coefficient: -0.25 }).unwrap();
                }
                if edge && n >= 2 {
                    let g = RelationGraph::new(n, vec![Relation { a: 0, b: 1, strength: -0.5 }]).unwrap();
                    s = s.with_relations(g).unwrap();
                }
                s
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn scenario_text_round_trip(s in scenario_strategy()) {
        let text = scenario_to_toml(&s);
        let back = parse_scenario(&text, "generated").unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn params_validation_is_idempotent(
        nu in 0.01f64..10.0, r in 0.01f64..10.0, alpha in 0.1f64..1e4, eps in 1e-4f64..0.9, horizon in 0.1f64..10.0
    ) {
        let p = ControlParams::new(nu, r, alpha, eps, horizon).unwrap();
        let again = validate_params(&p.to_raw()).unwrap();
        prop_assert_eq!(again, p);
        prop_assert_eq!(validate_params(&again.to_raw()).unwrap(), again);
    }
}

#[test]
fn builtins_round_trip_through_text() {
    for name in BUILTIN_NAMES {
        let s = builtin(name).unwrap();
        assert_eq!(parse_scenario(&scenario_to_toml(&s), name).unwrap(), s);
    }
}

#[test]
fn trajectory_csv_round_trip() {
    let s = firemen_2x2();
    let tr = simulate(&s, 9).unwrap();
    for marginals in [true, false] {
        let layout = layout_for(&s, marginals);
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &tr, &layout).unwrap();
        let back = read_trajectory(buf.as_slice(), &layout).unwrap();
        assert_eq!(back.len(), tr.records.len());
        for (a, b) in back.iter().zip(&tr.records) {
            assert_eq!(a.t.to_bits(), b.t.to_bits());
            assert_eq!(a.positions, b.positions);
            assert_eq!(a.controls, b.controls);
            assert_eq!(a.expected_targets, b.expected_targets);
            if marginals {
                for (p, q) in a.marginals.iter().zip(&b.marginals) {
                    assert_eq!(p[..1], q[..1]);
                }
            } else {
                assert!(a.marginals.is_empty());
            }
        }
    }
}

#[test]
fn sweep_writes_expected_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let s = firemen_2x2();
    let config = RunConfig {
        scenario: ScenarioSource::Builtin("firemen-2x2".into()),
        seeds: "0..4".parse::<SeedRange>().unwrap(),
        out_dir: dir.path().to_path_buf(),
        plots: true,
        record_marginals: true,
        jobs: Some(2),
    };
    let report = run_scenario(&s, &config).unwrap();
    assert_eq!(report.runs.len(), 4);
    assert_eq!(report.failures(), 0);
    for seed in 0..4 {
        let csv = dir.path().join(format!("firemen-2x2_seed{seed}.csv"));
        let text = std::fs::read_to_string(&csv).unwrap();
        assert!(text.starts_with("t,x_1,x_2,u_1,u_2,mubar_1,mubar_2,p_1_1,p_2_1\n"));
        let svg = std::fs::read_to_string(dir.path().join(format!("firemen-2x2_seed{seed}.svg"))).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("polyline"));
    }
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let c1 = header.iter().position(|h| *h == "count_1").unwrap();
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let total: usize = cells[c1..c1 + 2].iter().map(|c| c.parse::<usize>().unwrap()).sum();
        assert_eq!(total, 2);
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["runs"].as_array().unwrap().len(), 4);
    assert_eq!(manifest["runs"][0]["status"], "ok");
}

#[test]
fn failed_runs_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let s = firemen_2x2()
        .with_potential(pathint_core::PotentialSpec::Constant { value: 1.0 })
        .unwrap();
    let config = RunConfig {
        scenario: ScenarioSource::Builtin("firemen-2x2".into()),
        seeds: SeedRange::single(0),
        out_dir: dir.path().to_path_buf(),
        plots: false,
        record_marginals: false,
        jobs: None,
    };
    let report = run_scenario(&s, &config).unwrap();
    assert_eq!(report.failures(), 1);
    let manifest = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"failed\""), "{manifest}");
}
