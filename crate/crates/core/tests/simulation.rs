use pathint_core::cli_io::builtin::{firemen_2x2, firemen_6x3};
use pathint_core::controller::{adaptive_dt, simulate};

#[test]
fn step_identity_and_hull() {
    for s in [firemen_2x2(), firemen_6x3()] {
        let eps = s.params().epsilon();
        let (lo, hi) = (-1.0, 1.0);
        for seed in 0..5 {
            let tr = simulate(&s, seed).unwrap();
            for pair in tr.records.windows(2) {
                let (r, next) = (&pair[0], &pair[1]);
                let dt = next.t - r.t;
                let clamped = (dt - adaptive_dt(r.t, s.params())).abs() > 1e-15;
                for a in 0..s.n_agents() {
                    let mubar = r.expected_targets[a][0];
                    assert!((lo - 1e-12..=hi + 1e-12).contains(&mubar));
                    if !clamped {
                        let lhs = r.controls[a][0] * adaptive_dt(r.t, s.params());
                        let rhs = eps * (mubar - r.positions[a][0]);
                        assert!((lhs - rhs).abs() <= 1e-12, "step at t={}: {lhs} vs {rhs}", r.t);
                    }
                }
            }
            assert_eq!(tr.end_time(), Some(s.params().horizon()));
        }
    }
}

#[test]
fn same_seed_same_trajectory() {
    let s = firemen_6x3();
    let a = simulate(&s, 17).unwrap();
    let b = simulate(&s, 17).unwrap();
    assert_eq!(a, b);
    let c = simulate(&s, 18).unwrap();
    assert_ne!(a.final_positions(), c.final_positions());
}

/// Statistical check: on runs where the two firemen split, their expected
/// targets stay close to mirror images throughout.
#[test]
fn split_firemen_have_opposite_expected_targets() {
    let s = firemen_2x2();
    let mut split_runs = 0;
    let mut violations = 0;
    let mut steps = 0;
    for seed in 0..40 {
        let tr = simulate(&s, seed).unwrap();
        let fin = tr.final_positions().unwrap();
        if fin[0][0].signum() == fin[1][0].signum() {
            continue;
        }
        split_runs += 1;
        for r in &tr.records {
            let (m1, m2) = (r.expected_targets[0][0], r.expected_targets[1][0]);
            steps += 1;
            if (m1 + m2).abs() >= (m1 - m2).abs() + 0.2 {
                violations += 1;
            }
        }
    }
    assert!(split_runs >= 25, "only {split_runs} split runs");
    let rate = violations as f64 / steps as f64;
    assert!(rate < 0.02, "{violations} of {steps} steps violate the mirror bound");
}
