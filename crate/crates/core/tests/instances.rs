use irobd_core::algorithms::{run_irobd, run_stay, Stay};
use irobd_core::instances::{
    gen_drone, gen_random, gen_remark1, gen_remark1_with, gen_remark2, gen_theorem3, play_remark2,
    theorem3_adversary, DeltaKind, Remark1Profile, Remark1Shape, Remark1Spec, RandomSpec, SpeedProfile,
};
use irobd_core::model::instance_to_json;
use irobd_core::offline::{solve_offline, solve_offline_dp, GridSpec};
use irobd_core::{evaluate_total, validate_lipschitz, Delta, Geometry, Instance, SolverConfig, Trajectory, Vector};
use proptest::prelude::*;

fn s(x: f64) -> Vector {
    Vector::from_element(1, x)
}

fn total(inst: &Instance, traj: &Trajectory) -> f64 {
    evaluate_total(inst, traj).unwrap().total
}

fn lipschitz_box(inst: &Instance) -> Vec<(f64, f64)> {
    let r = inst
        .minimizers()
        .iter()
        .chain(inst.prehistory())
        .fold(1.0f64, |a, v| a.max(v.amax()));
    vec![(-r, r); inst.dim()]
}

#[test]
fn thm3_ratio_formula() {
    for &(m, a, k) in &[(1.0, 2.0, 3), (1.0, 2.0, 1), (3.0, 1.5, 2), (0.5, 1.1, 6)] {
        let inst = gen_theorem3(m, a, k).unwrap();
        assert_eq!((inst.horizon(), inst.delay(), inst.prehistory()[0][0]), (k, k, 0.0));
        let ratio = total(&inst, &run_stay(&inst).unwrap()) / total(&inst, &theorem3_adversary(&inst));
        let expected = m * (a.powi(2 * k as i32) - 1.0) / (a * a - 1.0);
        assert!((ratio - expected).abs() <= 1e-9 * expected, "{m} {a} {k}: {ratio} vs {expected}");
    }
    let inst = gen_theorem3(3.0, 1.5, 2).unwrap();
    let ratio = total(&inst, &run_stay(&inst).unwrap()) / total(&inst, &theorem3_adversary(&inst));
    assert!((ratio - 9.75).abs() < 1e-9);
    assert!(gen_theorem3(1.0, 1.0, 3).is_err());
    assert!(gen_theorem3(1.0, 2.0, 0).is_err());
}

#[test]
fn remark1_examples() {
    let soco = gen_remark1(1.0, 0.0, 10, 0).unwrap();
    assert!(soco.switching().is_soco());
    let inst = gen_remark1(2.0, 0.5, 10, 0).unwrap();
    assert_eq!(inst.switching().alpha(), Some(1.5));
    assert!(gen_remark1(1.0, -0.1, 10, 0).is_err());

    let esc = gen_remark1_with(&Remark1Spec {
        m: 1.0,
        lipschitz: 1.0,
        horizon: 16,
        seed: 3,
        shape: Remark1Shape::Sine,
        profile: Remark1Profile::Escalating,
    })
    .unwrap();
    let v: Vec<f64> = esc.minimizers().iter().map(|v| v[0].abs()).collect();
    assert_eq!(&v[..8], &[1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0]);
    assert!((esc.switching().lipschitz()[0] - 2.0).abs() < 1e-15);
}

#[test]
fn remark2_examples() {
    let (eps, gamma, n) = (0.1, 0.01, 5);
    let r = gen_remark2(eps, gamma, n).unwrap();
    let sc = 2f64.sqrt();
    assert_eq!((r.instance.horizon(), r.instance.delay(), r.instance.p()), (n + 1, 0, 1));
    assert!((r.instance.switching().lipschitz()[0] - std::f64::consts::PI / gamma).abs() < 1e-9);

    let y = s(sc * n as f64 * eps / 2.0);
    let bump = r.instance.switching().apply(&[&y])[0] - y[0];
    assert!((bump - sc * eps).abs() < 1e-14);
    let neg = s(-3.0);
    assert!((r.instance.switching().apply(&[&neg])[0] + 3.0 - sc * eps).abs() < 1e-14);

    let v = r.instance.minimizers();
    for last in [-1.0, 0.0, 0.3, 0.4, 0.45, 0.5, 0.6, 1.0] {
        let mut pts = v[..n].to_vec();
        pts.push(s(sc * last));
        let rep = evaluate_total(&r.instance, &Trajectory::new(pts, "follow")).unwrap();
        assert!(rep.hitting[n] + rep.switching[n] >= r.forced_cost() - 1e-12, "{last}");
    }

    let refs: Vec<f64> = r.reference.points.iter().map(|p| p[0] / sc).collect();
    let want = [0.1, 0.2, 0.3, 0.4, 0.501, 0.4];
    for (a, b) in refs.iter().zip(want) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn remark2_forces_every_algorithm() {
    let cfg = SolverConfig::default();
    let r = gen_remark2(0.1, 0.01, 5).unwrap();
    let run = run_irobd(&r.instance, 1.0, &cfg).unwrap();
    let c = total(&r.instance, &run.trajectory);
    assert!(c >= r.forced_cost() - 1e-9);
    let out = play_remark2(&r, &mut Stay, 1e-9).unwrap();
    assert!(out.deviated && out.ratio.is_infinite());
    let dp = solve_offline_dp(&r.instance, &GridSpec::new(-0.3, 0.8, 4001).unwrap()).unwrap();
    assert!(total(&r.instance, &dp) <= total(&r.instance, &r.reference) + 1e-12);
}

#[test]
fn drone_examples() {
    let free = gen_drone(0.0, 0.0, 5, 0, SpeedProfile::Constant { level: 1.0 }, 0).unwrap();
    let y = s(0.7);
    assert_eq!(free.switching().apply(&[&y]), y);
    assert_eq!(free.switching().lipschitz(), vec![1.0]);

    let hover = gen_drone(0.1, 0.01, 10, 0, SpeedProfile::Hover, 0).unwrap();
    let opt = solve_offline(&hover, &SolverConfig::default()).unwrap();
    assert!(opt.cost > 1e-4, "{}", opt.cost);

    let level = gen_drone(0.1, 0.0, 8, 1, SpeedProfile::Constant { level: 2.0 }, 0).unwrap();
    let dp = solve_offline_dp(&level, &GridSpec::auto(&level, 2001)).unwrap();
    assert!(total(&level, &dp) > 0.0);
    match level.switching().delta() {
        Delta::AffineDrone { bound, .. } => assert_eq!(*bound, 4.0),
        other => panic!("{other:?}"),
    }
    assert!(gen_drone(-0.1, 0.0, 5, 0, SpeedProfile::Hover, 0).is_err());
}

#[test]
fn random_examples() {
    let spec = RandomSpec {
        seed: 11,
        m: 0.5,
        l: 2.0,
        horizon: 30,
        d: 3,
        p: 3,
        k: 2,
        delta: DeltaKind::Linear { alpha: 0.9 },
    };
    let a = instance_to_json(&gen_random(&spec).unwrap()).unwrap();
    let b = instance_to_json(&gen_random(&spec).unwrap()).unwrap();
    assert_eq!(a, b);
    let alpha = gen_random(&spec).unwrap().switching().alpha().unwrap();
    assert!((0.899..=0.901).contains(&alpha), "{alpha}");

    let iso = gen_random(&RandomSpec { m: 1.5, l: 1.5, ..spec }).unwrap();
    assert!(iso.geometries().iter().all(|g| matches!(g, Geometry::Isotropic(m) if *m == 1.5)));
    assert!(gen_random(&RandomSpec { m: 2.0, l: 1.0, ..spec }).is_err());
    assert!(gen_random(&RandomSpec { delta: DeltaKind::Sine { a: 1.0, gain: 0.5 }, ..spec }).is_err());
}

fn generator_zoo(seed: u64) -> Vec<Instance> {
    let mut out = vec![
        gen_theorem3(1.0, 1.7, 4).unwrap(),
        gen_remark1(1.0, 0.8, 20, seed).unwrap(),
        gen_remark1_with(&Remark1Spec {
            m: 2.0,
            lipschitz: 0.6,
            horizon: 20,
            seed,
            shape: Remark1Shape::Sine,
            profile: Remark1Profile::RandomWalk,
        })
        .unwrap(),
        gen_remark2(0.1, 0.05, 4).unwrap().instance,
        gen_drone(0.1, 0.02, 20, 2, SpeedProfile::RandomWalk { step: 0.5 }, seed).unwrap(),
        gen_drone(0.1, 0.02, 20, 0, SpeedProfile::Sine { amplitude: 3.0, period: 7.0 }, seed).unwrap(),
    ];
    for delta in [
        DeltaKind::Linear { alpha: 1.3 },
        DeltaKind::Sine { a: 0.9, gain: 0.4 },
        DeltaKind::Drone { c1: 0.1, c2: 0.05 },
    ] {
        let p = if matches!(delta, DeltaKind::Linear { .. }) { 2 } else { 1 };
        out.push(
            gen_random(&RandomSpec {
                seed,
                m: 0.5,
                l: 2.0,
                horizon: 10,
                d: 2,
                p,
                k: 1,
                delta,
            })
            .unwrap(),
        );
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn generators_pass_lipschitz_audit(seed in any::<u64>()) {
        for inst in generator_zoo(seed) {
            let bounds = match inst.switching().delta() {
                Delta::AffineDrone { bound, .. } => vec![(-bound, *bound); inst.dim()],
                _ => lipschitz_box(&inst),
            };
            let rep = validate_lipschitz(inst.switching(), &bounds, 200, seed).unwrap();
            prop_assert!(rep.ok(), "{:?}: {:?}", inst.switching().delta(), rep);
        }
    }

    #[test]
    fn generators_are_seed_deterministic(seed in any::<u64>()) {
        let a: Vec<String> = generator_zoo(seed).iter().map(|i| instance_to_json(i).unwrap()).collect();
        let b: Vec<String> = generator_zoo(seed).iter().map(|i| instance_to_json(i).unwrap()).collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn random_alpha_is_hit(seed in any::<u64>(), p in 1usize..=4, d in 1usize..=4, alpha in 0.1..3.0f64) {
        let inst = gen_random(&RandomSpec { seed, m: 1.0, l: 2.0, horizon: 3, d, p, k: 0, delta: DeltaKind::Linear { alpha } }).unwrap();
        let got = inst.switching().alpha().unwrap();
        prop_assert!((got - alpha).abs() <= 1e-3 * alpha);
    }
}
