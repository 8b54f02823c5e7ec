use proptest::prelude::*;

use pathint_core::gaussian::{
    control_single, log_z_mixture, mixture_control, mixture_posterior,
};
use pathint_core::{ControlParams, TargetSet};

fn params(nu: f64, r: f64) -> ControlParams {
    ControlParams::new(nu, r, 1000.0, 0.01, 1.0).unwrap()
}

#[derive(Debug, Clone)]
struct Instance {
    x: Vec<f64>,
    t: f64,
    targets: Vec<Vec<f64>>,
    log_w: Vec<f64>,
    nu: f64,
    r: f64,
}

fn instance() -> impl Strategy<Value = Instance> {
    (1usize..=3, 1usize..=4).prop_flat_map(|(k, m)| {
        (
            prop::collection::vec(-2.5f64..2.5, k),
            0.0f64..0.9,
            prop::collection::vec(prop::collection::vec(-2.0f64..2.0, k), m),
            prop::collection::vec(-3.0f64..3.0, m),
            0.3f64..3.0,
            0.5f64..2.0,
        )
            .prop_map(|(x, t, targets, log_w, nu, r)| Instance {
                x,
                t,
                targets,
                log_w,
                nu,
                r,
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn posterior_is_a_distribution(inst in instance()) {
        let p = params(inst.nu, inst.r);
        let targets = TargetSet::new(inst.targets.clone()).unwrap();
        let post = mixture_posterior(&inst.x, inst.t, &targets, &inst.log_w, &p).unwrap();
        prop_assert!(post.iter().all(|&q| q >= 0.0));
        prop_assert!((post.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn control_is_convex_combination(inst in instance()) {
        let p = params(inst.nu, inst.r);
        let targets = TargetSet::new(inst.targets.clone()).unwrap();
        let post = mixture_posterior(&inst.x, inst.t, &targets, &inst.log_w, &p).unwrap();
        let u = mixture_control(&inst.x, inst.t, &targets, &inst.log_w, &p).unwrap();
        let mut combo = vec![0.0; inst.x.len()];
        for (mu, q) in inst.targets.iter().zip(&post) {
            let us = control_single(&inst.x, inst.t, mu, &p).unwrap();
            for (c, v) in combo.iter_mut().zip(us) {
                *c += q * v;
            }
        }
        for (a, b) in u.iter().zip(&combo) {
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn translation_equivariance(inst in instance(), shift in prop::collection::vec(-5.0f64..5.0, 3)) {
        let p = params(inst.nu, inst.r);
        let k = inst.x.len();
        let moved = |v: &[f64]| v.iter().zip(&shift[..k]).map(|(a, s)| a + s).collect::<Vec<_>>();
        let targets = TargetSet::new(inst.targets.clone()).unwrap();
        let shifted = TargetSet::new(inst.targets.iter().map(|mu| moved(mu)).collect()).unwrap();
        let u = mixture_control(&inst.x, inst.t, &targets, &inst.log_w, &p).unwrap();
        let v = mixture_control(&moved(&inst.x), inst.t, &shifted, &inst.log_w, &p).unwrap();
        for (a, b) in u.iter().zip(&v) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn common_weight_scale_is_immaterial(inst in instance(), c in -20.0f64..20.0) {
        let p = params(inst.nu, inst.r);
        let targets = TargetSet::new(inst.targets.clone()).unwrap();
        let shifted: Vec<f64> = inst.log_w.iter().map(|w| w + c).collect();
        let a = mixture_posterior(&inst.x, inst.t, &targets, &inst.log_w, &p).unwrap();
        let b = mixture_posterior(&inst.x, inst.t, &targets, &shifted, &p).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        let ua = mixture_control(&inst.x, inst.t, &targets, &inst.log_w, &p).unwrap();
        let ub = mixture_control(&inst.x, inst.t, &targets, &shifted, &p).unwrap();
        for (x, y) in ua.iter().zip(&ub) {
            prop_assert!((x - y).abs() <= 1e-10 * (1.0 + x.abs()));
        }
        let la = log_z_mixture(&inst.x, inst.t, &targets, &inst.log_w, &p).unwrap();
        let lb = log_z_mixture(&inst.x, inst.t, &targets, &shifted, &p).unwrap();
        prop_assert!((lb - la - c).abs() <= 1e-10 * (1.0 + la.abs() + c.abs()));
    }
}

/// Plain central differences with `h = 1e-5` over random instances.
#[test]
fn central_difference_gradient() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let k = rng.random_range(1..=3usize);
        let m = rng.random_range(1..=4usize);
        let p = params(rng.random_range(0.3..3.0), rng.random_range(0.5..2.0));
        let t = rng.random_range(0.0..0.9);
        let targets = TargetSet::new(
            (0..m)
                .map(|_| (0..k).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect(),
        )
        .unwrap();
        let log_w: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let x: Vec<f64> = (0..k).map(|_| rng.random_range(-2.5..2.5)).collect();
        let u = mixture_control(&x, t, &targets, &log_w, &p).unwrap();
        for j in 0..k {
            let mut y = x.clone();
            y[j] = x[j] + h;
            let up = log_z_mixture(&y, t, &targets, &log_w, &p).unwrap();
            y[j] = x[j] - h;
            let down = log_z_mixture(&y, t, &targets, &log_w, &p).unwrap();
            let fd = p.nu() * (up - down) / (2.0 * h);
            let err = (fd - u[j]).abs() / u[j].abs().max(1e-3);
            worst = worst.max(err);
        }
    }
    assert!(worst <= 1e-6, "worst relative error {worst:e}");
}
