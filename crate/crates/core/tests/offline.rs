use irobd_core::algorithms::{run_delayed_m2m, run_irobd, run_robd, run_stay};
use irobd_core::instances::{gen_random, gen_remark2, gen_theorem3, theorem3_adversary, DeltaKind, RandomSpec};
use irobd_core::offline::{
    joint_gradient, solve_offline, solve_offline_convex, solve_offline_dp, solve_offline_multistart, GridSpec,
    OracleMethod,
};
use irobd_core::{evaluate_total, Delta, Error, HittingCost, Instance, Matrix, SolverConfig, SwitchingCost, Vector};
use proptest::prelude::*;

fn s(x: f64) -> Vector {
    Vector::from_element(1, x)
}

fn scalar_instance(v: &[f64], k: usize, sw: SwitchingCost) -> Instance {
    let costs = v.iter().map(|&x| HittingCost::isotropic(1.0, s(x)).unwrap()).collect();
    Instance::new(1, k, costs, sw, None).unwrap()
}

fn cost(inst: &Instance, traj: &irobd_core::Trajectory) -> f64 {
    evaluate_total(inst, traj).unwrap().total
}

#[test]
fn convex_examples() {
    let cfg = SolverConfig::default();
    let lin = SwitchingCost::linear(vec![Matrix::from_element(1, 1, 0.7), Matrix::from_element(1, 1, 0.2)]).unwrap();
    let zero = scalar_instance(&[0.0; 5], 0, lin);
    let traj = solve_offline_convex(&zero, &cfg).unwrap();
    assert_eq!(cost(&zero, &traj), 0.0);

    let t3 = gen_theorem3(1.0, 2.0, 3).unwrap();
    assert!(cost(&t3, &solve_offline_convex(&t3, &cfg).unwrap()) <= cost(&t3, &theorem3_adversary(&t3)));

    let two = scalar_instance(&[1.0, 1.0], 0, SwitchingCost::soco(1));
    let y = solve_offline_convex(&two, &cfg).unwrap();
    // Stationarity: 3y1 − y2 = 1 and 2y2 − y1 = 1.
    assert!((y.points[0][0] - 0.6).abs() < 1e-9 && (y.points[1][0] - 0.8).abs() < 1e-9);
    let dp = solve_offline_dp(&two, &GridSpec::new(-1.0, 2.0, 3001).unwrap()).unwrap();
    assert!((cost(&two, &dp) - cost(&two, &y)).abs() < 1e-5);

    let nonlinear = scalar_instance(&[1.0], 0, SwitchingCost::new(Delta::AffineDrone { c1: 0.1, c2: 0.0, bound: 2.0 }, 1).unwrap());
    assert!(matches!(solve_offline_convex(&nonlinear, &cfg), Err(Error::Unsupported(_))));
}

#[test]
fn convex_solution_is_stationary() {
    let cfg = SolverConfig::default();
    let inst = gen_random(&RandomSpec {
        seed: 2,
        m: 0.5,
        l: 5.0,
        horizon: 40,
        d: 3,
        p: 3,
        k: 2,
        delta: DeltaKind::Linear { alpha: 1.4 },
    })
    .unwrap();
    let traj = solve_offline_convex(&inst, &cfg).unwrap();
    let g: f64 = joint_gradient(&inst, &traj.points).iter().map(|g| g.norm_squared()).sum::<f64>().sqrt();
    assert!(g <= cfg.grad_tol * ((40 * 3) as f64).sqrt(), "{g}");
}

#[test]
fn dp_examples() {
    let r2 = gen_remark2(0.1, 0.01, 5).unwrap();
    let sc = 2f64.sqrt();
    let grid = GridSpec::new(-0.2 * sc, (0.5 + 0.02) * sc, 4001).unwrap();
    let traj = solve_offline_dp(&r2.instance, &grid).unwrap();
    assert!(cost(&r2.instance, &traj) <= cost(&r2.instance, &r2.reference) + 1e-6);

    let zero = scalar_instance(&[0.0; 4], 0, SwitchingCost::soco(1));
    let grid = GridSpec::auto(&zero, 101);
    assert!(grid.points().contains(&0.0));
    assert_eq!(cost(&zero, &solve_offline_dp(&zero, &grid).unwrap()), 0.0);

    assert!(GridSpec::new(1.0, 1.0, 10).is_err());
    assert!(GridSpec::new(0.0, 1.0, 2).is_err());
}

#[test]
fn dp_refuses_unsupported_shapes() {
    let three = SwitchingCost::linear(vec![Matrix::from_element(1, 1, 0.5); 3]).unwrap();
    let inst = scalar_instance(&[1.0, 2.0], 0, three);
    assert!(matches!(solve_offline_dp(&inst, &GridSpec::new(-1.0, 1.0, 11).unwrap()), Err(Error::Unsupported(_))));
    let wide = Instance::new(2, 0, vec![HittingCost::isotropic(1.0, Vector::zeros(2)).unwrap()], SwitchingCost::soco(2), None)
        .unwrap();
    assert!(matches!(solve_offline_dp(&wide, &GridSpec::new(-1.0, 1.0, 11).unwrap()), Err(Error::Unsupported(_))));
}

#[test]
fn dp_matches_convex_on_random_soco() {
    let cfg = SolverConfig::default();
    for seed in 0..3 {
        let inst = gen_random(&RandomSpec {
            seed,
            m: 1.0,
            l: 1.0,
            horizon: 5,
            d: 1,
            p: 1,
            k: 0,
            delta: DeltaKind::Linear { alpha: 1.0 },
        })
        .unwrap();
        let c = cost(&inst, &solve_offline_convex(&inst, &cfg).unwrap());
        let lo = inst.minimizers().iter().chain(inst.prehistory()).fold(0.0f64, |a, v| a.min(v[0])) - 1.0;
        let hi = inst.minimizers().iter().chain(inst.prehistory()).fold(0.0f64, |a, v| a.max(v[0])) + 1.0;
        let dp = cost(&inst, &solve_offline_dp(&inst, &GridSpec::new(lo.min(-5.0), hi.max(5.0), 4001).unwrap()).unwrap());
        assert!((dp - c).abs() <= 1e-4, "seed {seed}: {dp} vs {c}");
    }
}

#[test]
fn multistart_examples() {
    let cfg = SolverConfig::default();
    let inst = gen_random(&RandomSpec {
        seed: 5,
        m: 0.5,
        l: 2.0,
        horizon: 15,
        d: 2,
        p: 2,
        k: 0,
        delta: DeltaKind::Linear { alpha: 1.1 },
    })
    .unwrap();
    let a = cost(&inst, &solve_offline_convex(&inst, &cfg).unwrap());
    let b = cost(&inst, &solve_offline_multistart(&inst, 4, 0, &cfg).unwrap());
    assert!((a - b).abs() <= 1e-6 * a.max(1.0), "{a} vs {b}");

    let sine = gen_random(&RandomSpec {
        seed: 6,
        m: 1.0,
        l: 1.0,
        horizon: 10,
        d: 1,
        p: 1,
        k: 0,
        delta: DeltaKind::Sine { a: 1.0, gain: 0.6 },
    })
    .unwrap();
    let ms = cost(&sine, &solve_offline_multistart(&sine, 8, 1, &cfg).unwrap());
    let dp = cost(&sine, &solve_offline_dp(&sine, &GridSpec::auto(&sine, 2001)).unwrap());
    assert!(ms <= dp + 1e-9, "{ms} vs {dp}");
    assert!(dp - ms < 1e-3, "{ms} vs {dp}");

    // Minimizers on the δ-rollout from y_0 admit a free trajectory.
    let drone = SwitchingCost::new(Delta::AffineDrone { c1: 0.05, c2: 0.02, bound: 10.0 }, 1).unwrap();
    let mut y = s(3.0);
    let mut v = Vec::new();
    for _ in 0..6 {
        y = drone.apply(&[&y]);
        v.push(y[0]);
    }
    let costs = v.iter().map(|&x| HittingCost::isotropic(1.0, s(x)).unwrap()).collect();
    let rolled = Instance::new(1, 0, costs, drone, Some(vec![s(3.0)])).unwrap();
    assert!(cost(&rolled, &solve_offline_multistart(&rolled, 2, 0, &cfg).unwrap()) < 1e-20);
    assert!(solve_offline_multistart(&rolled, 0, 0, &cfg).is_err());
}

#[test]
fn selector_records_the_method() {
    let cfg = SolverConfig::default();
    let lin = gen_theorem3(1.0, 2.0, 2).unwrap();
    assert_eq!(solve_offline(&lin, &cfg).unwrap().method, OracleMethod::Convex);
    let r2 = gen_remark2(0.1, 0.01, 3).unwrap();
    let sol = solve_offline(&r2.instance, &cfg).unwrap();
    assert_eq!((sol.method, sol.exact), (OracleMethod::Dp, true));
    let wide = gen_random(&RandomSpec {
        seed: 1,
        m: 1.0,
        l: 2.0,
        horizon: 6,
        d: 2,
        p: 1,
        k: 0,
        delta: DeltaKind::Sine { a: 1.0, gain: 0.5 },
    })
    .unwrap();
    let sol = solve_offline(&wide, &cfg).unwrap();
    assert_eq!((sol.method, sol.exact), (OracleMethod::Multistart, false));
}

fn arb_linear_spec() -> impl Strategy<Value = RandomSpec> {
    (any::<u64>(), 1usize..=3, 1usize..=3, 0usize..=3, 0.3..2.0f64, 0.2..1.5f64).prop_map(|(seed, d, p, k, m, alpha)| {
        RandomSpec {
            seed,
            m,
            l: 2.0 * m,
            horizon: 10,
            d,
            p,
            k,
            delta: DeltaKind::Linear { alpha },
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn offline_dominates_every_algorithm(spec in arb_linear_spec(), lambda in 0.2..3.0f64) {
        let cfg = SolverConfig::default();
        let inst = gen_random(&spec).unwrap();
        let opt = cost(&inst, &solve_offline_convex(&inst, &cfg).unwrap());
        let mut trajectories = vec![run_stay(&inst).unwrap(), run_irobd(&inst, lambda, &cfg).unwrap().trajectory];
        if inst.delay() == 0 {
            trajectories.push(run_robd(&inst, lambda, 0.0, &cfg).unwrap());
        }
        if inst.switching().is_soco() {
            trajectories.push(run_delayed_m2m(&inst).unwrap());
        }
        for t in &trajectories {
            prop_assert!(opt <= cost(&inst, t) + 1e-8, "{}: {} < {}", t.label, cost(&inst, t), opt);
        }
    }

    #[test]
    fn oracles_agree_in_one_dimension(seed in any::<u64>(), p in 1usize..=2, alpha in 0.3..1.3f64) {
        let cfg = SolverConfig::default();
        let inst = gen_random(&RandomSpec { seed, m: 1.0, l: 1.0, horizon: 6, d: 1, p, k: 0, delta: DeltaKind::Linear { alpha } }).unwrap();
        let convex = cost(&inst, &solve_offline_convex(&inst, &cfg).unwrap());
        let multi = cost(&inst, &solve_offline_multistart(&inst, 3, seed, &cfg).unwrap());
        prop_assert!((convex - multi).abs() <= 1e-4);
        if p == 1 {
            let vals: Vec<f64> = inst.minimizers().iter().chain(inst.prehistory()).map(|v| v[0]).collect();
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let margin = (0.5 * (hi - lo)).max(1.0);
            let dp = cost(&inst, &solve_offline_dp(&inst, &GridSpec::new(lo - margin, hi + margin, 8001).unwrap()).unwrap());
            prop_assert!((convex - dp).abs() <= 1e-4, "{} vs {}", convex, dp);
        }
    }

    #[test]
    fn soco_offline_cost_is_translation_covariant(v in prop::collection::vec(-3.0..3.0f64, 1..8), shift in -5.0..5.0f64) {
        let cfg = SolverConfig::default();
        let mk = |c: f64| {
            let costs = v.iter().map(|&x| HittingCost::isotropic(1.5, s(x + c)).unwrap()).collect();
            Instance::new(1, 0, costs, SwitchingCost::soco(1), Some(vec![s(c)])).unwrap()
        };
        let a = mk(0.0);
        let b = mk(shift);
        let ca = cost(&a, &solve_offline_convex(&a, &cfg).unwrap());
        let cb = cost(&b, &solve_offline_convex(&b, &cfg).unwrap());
        prop_assert!((ca - cb).abs() <= 1e-9 * ca.max(1.0));
    }
}
