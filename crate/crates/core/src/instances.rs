//! Instance generators: lower-bound constructions, the drone example and
//! seeded random families.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::algorithms::{run_policy, OnlinePolicy};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::model::{evaluate_total, Delta, Drift, Geometry, HittingCost, Instance, SwitchingCost, Trajectory};

fn scalar(x: f64) -> Vector {
    Vector::from_element(1, x)
}

/// `T = k`, `v_t = α^{t−1}`, `δ(y) = α y`, hitting curvature `m`, `y_0 = 0`.
pub fn gen_theorem3(m: f64, alpha: f64, k: usize) -> Result<Instance> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must exceed 1, got {alpha}")));
    }
    if k == 0 {
        return Err(Error::invalid("delay must be at least 1"));
    }
    let costs = (0..k)
        .map(|t| HittingCost::isotropic(m, scalar(alpha.powi(t as i32))))
        .collect::<Result<Vec<_>>>()?;
    let sw = SwitchingCost::linear(vec![Matrix::from_element(1, 1, alpha)])?;
    Instance::new(1, k, costs, sw, None)
}

/// The trajectory `y_t = v_t`, which pays only the first move.
pub fn theorem3_adversary(inst: &Instance) -> Trajectory {
    Trajectory::new(inst.minimizers(), "adversary")
}

/// Shape of `δ` in the `remark1` family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Remark1Shape {
    /// `δ(y) = (1 + L) y`.
    Linear,
    /// `δ(y) = y + L sin y`.
    Sine,
}

/// Minimizer sequence of the `remark1` family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Remark1Profile {
    /// Gaussian random walk from 0.
    RandomWalk,
    /// `v_t = ±(1 + L)^{(t−1) mod 8}` with a seeded sign per block.
    Escalating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Remark1Spec {
    pub m: f64,
    pub lipschitz: f64,
    pub horizon: usize,
    pub seed: u64,
    pub shape: Remark1Shape,
    pub profile: Remark1Profile,
}

/// Scalar instance with `p = 1`, `k = 0`, linear `δ(y) = (1 + L) y` and a
/// random-walk minimizer sequence.
pub fn gen_remark1(m: f64, lipschitz: f64, horizon: usize, seed: u64) -> Result<Instance> {
    gen_remark1_with(&Remark1Spec {
        m,
        lipschitz,
        horizon,
        seed,
        shape: Remark1Shape::Linear,
        profile: Remark1Profile::RandomWalk,
    })
}

pub fn gen_remark1_with(spec: &Remark1Spec) -> Result<Instance> {
    let l = spec.lipschitz;
    if !(l >= 0.0 && l.is_finite()) {
        return Err(Error::invalid(format!("L must be non-negative, got {l}")));
    }
    if spec.horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let v: Vec<f64> = match spec.profile {
        Remark1Profile::RandomWalk => {
            let mut x = 0.0;
            (0..spec.horizon)
                .map(|_| {
                    x += rng.sample::<f64, _>(StandardNormal);
                    x
                })
                .collect()
        }
        Remark1Profile::Escalating => {
            let mut sign = 1.0;
            (0..spec.horizon)
                .map(|t| {
                    if t % 8 == 0 {
                        sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    }
                    sign * (1.0 + l).powi((t % 8) as i32)
                })
                .collect()
        }
    };
    let costs = v
        .into_iter()
        .map(|x| HittingCost::isotropic(spec.m, scalar(x)))
        .collect::<Result<Vec<_>>>()?;
    let sw = match spec.shape {
        Remark1Shape::Linear => SwitchingCost::linear(vec![Matrix::from_element(1, 1, 1.0 + l)])?,
        Remark1Shape::Sine => SwitchingCost::new(
            Delta::ControlAffine {
                a: Matrix::from_element(1, 1, 1.0),
                drift: Drift::Sine { gain: l },
            },
            1,
        )?,
    };
    Instance::new(1, 0, costs, sw, None)
}

/// The plateau-sine instance and its cheap reference trajectory `y′`.
///
/// Built in coordinates `z = √2·y`, so that the unit-weight squared
/// distances of the construction become the halved costs used here.
#[derive(Debug, Clone)]
pub struct Remark2Instance {
    pub instance: Instance,
    /// `y′` in the instance's coordinates.
    pub reference: Trajectory,
    pub eps: f64,
    pub gamma: f64,
    pub n: usize,
}

impl Remark2Instance {
    /// Lower bound on any algorithm's cost once it has followed the
    /// minimizers through round `n`.
    pub fn forced_cost(&self) -> f64 {
        2.0 * self.eps * self.eps
    }

    /// Nominal cost of `y′` for the construction.
    pub fn nominal_reference_cost(&self) -> f64 {
        3.0 * self.gamma * self.eps * self.eps
    }
}

pub fn gen_remark2(eps: f64, gamma: f64, n: usize) -> Result<Remark2Instance> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid("eps must be positive"));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::invalid("gamma must lie in (0, 1)"));
    }
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let s = 2f64.sqrt();
    let mut v: Vec<f64> = (1..=n).map(|t| t as f64 * eps).collect();
    v.push((n as f64 - 1.0) * eps);
    let costs = v
        .iter()
        .map(|&x| HittingCost::isotropic(1.0, scalar(s * x)))
        .collect::<Result<Vec<_>>>()?;
    let sw = SwitchingCost::new(Delta::Remark2 { eps, gamma, n, scale: s }, 1)?;
    let instance = Instance::new(1, 0, costs, sw, None)?;
    let mut y: Vec<f64> = (1..n).map(|t| t as f64 * eps).collect();
    y.push(n as f64 * eps + gamma * eps);
    y.push((n as f64 - 1.0) * eps);
    let reference = Trajectory::new(y.into_iter().map(|x| scalar(s * x)).collect(), "reference");
    Ok(Remark2Instance {
        instance,
        reference,
        eps,
        gamma,
        n,
    })
}

/// Outcome of playing a policy against the adaptive plateau-sine adversary.
#[derive(Debug, Clone, Serialize)]
pub struct Remark2Outcome {
    /// Rounds played before the adversary stopped.
    pub rounds: usize,
    /// True if the policy left the minimizer path before round `n + 1`.
    pub deviated: bool,
    pub alg_cost: f64,
    /// Cost of the adversary's comparator over the played rounds.
    pub comparator_cost: f64,
    /// `alg_cost / comparator_cost`; infinite when the comparator is free.
    pub ratio: f64,
}

/// Plays `policy` against the adaptive adversary: if the policy leaves the
/// minimizer path at some round `t ≤ n`, the game ends there and the
/// comparator (which followed the path) pays nothing. Otherwise the full
/// instance is played and compared against `y′`.
pub fn play_remark2<P: OnlinePolicy + ?Sized>(r2: &Remark2Instance, policy: &mut P, tol: f64) -> Result<Remark2Outcome> {
    let inst = &r2.instance;
    let traj = run_policy(inst, policy)?;
    let v = inst.minimizers();
    let deviation = (0..r2.n).find(|&i| (&traj.points[i] - &v[i]).amax() > tol);
    match deviation {
        Some(i) => {
            let rounds = i + 1;
            let short = inst.truncated(rounds)?;
            let alg = evaluate_total(&short, &Trajectory::new(traj.points[..rounds].to_vec(), traj.label.clone()))?.total;
            let comparator = evaluate_total(&short, &Trajectory::new(v[..rounds].to_vec(), "path"))?.total;
            Ok(Remark2Outcome {
                rounds,
                deviated: true,
                alg_cost: alg,
                comparator_cost: comparator,
                ratio: if comparator > 0.0 { alg / comparator } else { f64::INFINITY },
            })
        }
        None => {
            let alg = evaluate_total(inst, &traj)?.total;
            let comparator = evaluate_total(inst, &r2.reference)?.total;
            Ok(Remark2Outcome {
                rounds: inst.horizon(),
                deviated: false,
                alg_cost: alg,
                comparator_cost: comparator,
                ratio: alg / comparator,
            })
        }
    }
}

/// Desired-speed profile for the drone example.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpeedProfile {
    Hover,
    Constant { level: f64 },
    Sine { amplitude: f64, period: f64 },
    RandomWalk { step: f64 },
}

/// Scalar drone tracking: `δ(y) = y − (C1 + C2·|y|·y)`, unit tracking cost
/// against the profile, delay `k`. The declared Lipschitz constant holds on
/// `|y| ≤ 2·max(1, max|y^d|)`.
pub fn gen_drone(c1: f64, c2: f64, horizon: usize, k: usize, profile: SpeedProfile, seed: u64) -> Result<Instance> {
    if !(c1 >= 0.0 && c2 >= 0.0) {
        return Err(Error::invalid("drag coefficients must be non-negative"));
    }
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = 0.0;
    let target: Vec<f64> = (0..horizon)
        .map(|t| match profile {
            SpeedProfile::Hover => 0.0,
            SpeedProfile::Constant { level } => level,
            SpeedProfile::Sine { amplitude, period } => amplitude * (2.0 * PI * (t + 1) as f64 / period).sin(),
            SpeedProfile::RandomWalk { step } => {
                x += step * rng.sample::<f64, _>(StandardNormal);
                x
            }
        })
        .collect();
    if target.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("speed profile produced non-finite targets"));
    }
    let bound = 2.0 * target.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let costs = target
        .into_iter()
        .map(|v| HittingCost::isotropic(1.0, scalar(v)))
        .collect::<Result<Vec<_>>>()?;
    let sw = SwitchingCost::new(Delta::AffineDrone { c1, c2, bound }, 1)?;
    Instance::new(1, k, costs, sw, None)
}

/// Family of `δ` drawn by [`gen_random`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeltaKind {
    /// Random `C_1..C_p` with `Σ‖C_i‖ = alpha`.
    Linear { alpha: f64 },
    /// `δ(y) = a·y + gain·sin(y)` elementwise; needs `p = 1`.
    Sine { a: f64, gain: f64 },
    /// Drone drag on every coordinate; needs `p = 1`.
    Drone { c1: f64, c2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub seed: u64,
    pub m: f64,
    pub l: f64,
    pub horizon: usize,
    pub d: usize,
    pub p: usize,
    pub k: usize,
    pub delta: DeltaKind,
}

/// Seeded random instance: `Q_t = Uᵀ diag(λ) U` with eigenvalues uniform in
/// `[m, l]`, Gaussian random-walk minimizers and a Gaussian prehistory.
pub fn gen_random(spec: &RandomSpec) -> Result<Instance> {
    let RandomSpec { seed, m, l, horizon, d, p, k, delta } = *spec;
    if !(m > 0.0 && m <= l && l.is_finite()) {
        return Err(Error::invalid(format!("need 0 < m <= l, got m = {m}, l = {l}")));
    }
    if horizon == 0 || d == 0 || p == 0 {
        return Err(Error::invalid("horizon, dimension and memory must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = |rng: &mut ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };

    let mut costs = Vec::with_capacity(horizon);
    let mut walk = Vector::zeros(d);
    for _ in 0..horizon {
        let geometry = if m == l {
            Geometry::Isotropic(m)
        } else {
            let g = Matrix::from_fn(d, d, |_, _| gauss(&mut rng));
            let u = g.qr().q();
            let eig = Vector::from_fn(d, |_, _| rng.random_range(m..=l));
            let q = u.transpose() * Matrix::from_diagonal(&eig) * &u;
            Geometry::Matrix((&q + q.transpose()) * 0.5)
        };
        walk += Vector::from_fn(d, |_, _| gauss(&mut rng));
        costs.push(HittingCost::new(geometry, walk.clone())?);
    }

    let sw = match delta {
        DeltaKind::Linear { alpha } => {
            if !(alpha >= 0.0 && alpha.is_finite()) {
                return Err(Error::invalid("alpha must be non-negative"));
            }
            let weights: Vec<f64> = (0..p).map(|_| rng.random_range(0.2..1.0)).collect();
            let total: f64 = weights.iter().sum();
            let c = weights
                .iter()
                .map(|w| {
                    let g = Matrix::from_fn(d, d, |_, _| gauss(&mut rng));
                    let norm = linalg::spectral_norm(&g);
                    g * (alpha * w / (total * norm))
                })
                .collect();
            SwitchingCost::linear(c)?
        }
        DeltaKind::Sine { a, gain } => {
            if p != 1 {
                return Err(Error::invalid("sine switching maps have p = 1"));
            }
            SwitchingCost::new(
                Delta::ControlAffine {
                    a: Matrix::identity(d, d) * a,
                    drift: Drift::Sine { gain },
                },
                d,
            )?
        }
        DeltaKind::Drone { c1, c2 } => {
            if p != 1 {
                return Err(Error::invalid("drone switching maps have p = 1"));
            }
            let bound = 2.0 * costs.iter().fold(1.0f64, |b, c| b.max(c.minimizer.amax()));
            SwitchingCost::new(Delta::AffineDrone { c1, c2, bound }, d)?
        }
    };
    let prehistory = (0..p).map(|_| Vector::from_fn(d, |_, _| 0.5 * gauss(&mut rng))).collect();
    Instance::new(d, k, costs, sw, Some(prehistory))
}
