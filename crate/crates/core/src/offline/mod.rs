//! Hindsight-optimal trajectories used as competitive-ratio denominators.

mod convex;
mod dp;
mod multistart;

pub use convex::solve_offline_convex;
pub use dp::{solve_offline_dp, GridSpec};
pub use multistart::{local_descent, solve_offline_multistart};

use serde::Serialize;

use crate::error::Result;
use crate::linalg::Vector;
use crate::model::{evaluate_total, memory, Instance, Trajectory};
use crate::prox::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    Convex,
    Dp,
    Multistart,
}

impl OracleMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            OracleMethod::Convex => "convex",
            OracleMethod::Dp => "dp",
            OracleMethod::Multistart => "multistart",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OfflineSolution {
    pub trajectory: Trajectory,
    pub cost: f64,
    pub method: OracleMethod,
    /// True when the method is exact up to solver tolerance; false for the
    /// multistart heuristic, whose cost only bounds the optimum from above.
    pub exact: bool,
}

/// Knobs of the oracle selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub dp_cells_p1: usize,
    pub dp_cells_p2: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            dp_cells_p1: 2001,
            dp_cells_p2: 201,
            restarts: 32,
            seed: 0,
        }
    }
}

/// Convex solve for linear `δ`; grid DP (then local polish) for scalar
/// nonlinear `δ` with `p ≤ 2`; multistart with 32 restarts otherwise.
pub fn solve_offline(inst: &Instance, cfg: &SolverConfig) -> Result<OfflineSolution> {
    solve_offline_with(inst, cfg, &OracleOptions::default())
}

pub fn solve_offline_with(inst: &Instance, cfg: &SolverConfig, opts: &OracleOptions) -> Result<OfflineSolution> {
    if inst.switching().is_linear() {
        let trajectory = solve_offline_convex(inst, cfg)?;
        let cost = evaluate_total(inst, &trajectory)?.total;
        return Ok(OfflineSolution {
            trajectory,
            cost,
            method: OracleMethod::Convex,
            exact: true,
        });
    }
    if inst.dim() == 1 && inst.p() <= 2 {
        let grid = GridSpec::auto(inst, if inst.p() == 1 { opts.dp_cells_p1 } else { opts.dp_cells_p2 });
        if let Ok(trajectory) = solve_offline_dp(inst, &grid) {
            let cost = evaluate_total(inst, &trajectory)?.total;
            let (trajectory, cost) = match local_descent(inst, trajectory.points.clone(), cfg) {
                Ok(points) => {
                    let polished = Trajectory::new(points, "offline-dp");
                    let c = evaluate_total(inst, &polished)?.total;
                    if c < cost {
                        (polished, c)
                    } else {
                        (trajectory, cost)
                    }
                }
                Err(_) => (trajectory, cost),
            };
            return Ok(OfflineSolution {
                trajectory,
                cost,
                method: OracleMethod::Dp,
                exact: true,
            });
        }
    }
    let trajectory = solve_offline_multistart(inst, opts.restarts, opts.seed, cfg)?;
    let cost = evaluate_total(inst, &trajectory)?.total;
    Ok(OfflineSolution {
        trajectory,
        cost,
        method: OracleMethod::Multistart,
        exact: false,
    })
}

/// `Σ_t f_t(y_t) + ½‖y_t − δ(y_{t−1:t−p})‖²`.
pub fn joint_objective(inst: &Instance, ys: &[Vector]) -> f64 {
    let p = inst.p();
    (1..=inst.horizon())
        .map(|t| {
            let mem = memory(t, p, ys, inst.prehistory());
            inst.cost(t).eval(&ys[t - 1]) + inst.switching().cost(&ys[t - 1], &mem)
        })
        .sum()
}

/// Gradient of [`joint_objective`] with respect to `y_1..y_T`.
pub fn joint_gradient(inst: &Instance, ys: &[Vector]) -> Vec<Vector> {
    let p = inst.p();
    let sw = inst.switching();
    let mut grad: Vec<Vector> = (1..=inst.horizon()).map(|t| inst.cost(t).gradient(&ys[t - 1])).collect();
    for t in 1..=inst.horizon() {
        let mem = memory(t, p, ys, inst.prehistory());
        let r = &ys[t - 1] - sw.apply(&mem);
        grad[t - 1] += &r;
        if t > 1 {
            let jac = sw.delta().jacobians(&mem);
            for (i, j) in jac.iter().enumerate().take(p) {
                let s = t as isize - 1 - i as isize;
                if s >= 1 {
                    grad[s as usize - 1] -= j.transpose() * &r;
                }
            }
        }
    }
    grad
}

pub(crate) fn flatten(ys: &[Vector]) -> Vector {
    let d = ys.first().map_or(0, |y| y.len());
    Vector::from_fn(ys.len() * d, |i, _| ys[i / d][i % d])
}

pub(crate) fn unflatten(x: &Vector, d: usize) -> Vec<Vector> {
    (0..x.len() / d).map(|t| x.rows(t * d, d).into_owned()).collect()
}
