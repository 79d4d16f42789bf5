use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, Vector};
use crate::model::{memory, Instance, Trajectory};
use crate::offline::{flatten, joint_gradient, joint_objective, unflatten};
use crate::prox::{minimize_smooth, SolverConfig};

/// Gradient descent on the joint objective from `start`.
///
/// Never returns a point worse than `start`. Running out of iterations is not
/// an error; the last iterate is returned.
pub fn local_descent(inst: &Instance, start: Vec<Vector>, cfg: &SolverConfig) -> Result<Vec<Vector>> {
    cfg.validate()?;
    if start.len() != inst.horizon() {
        return Err(Error::invalid("start trajectory length differs from horizon"));
    }
    let d = inst.dim();
    let (_, l) = inst.curvature_bounds();
    let lsum: f64 = inst.switching().lipschitz().iter().sum();
    let step = 1.0 / (l + (1.0 + lsum).powi(2));
    let x0 = flatten(&start);
    let objective = |x: &Vector| joint_objective(inst, &unflatten(x, d));
    let gradient = |x: &Vector| flatten(&joint_gradient(inst, &unflatten(x, d)));
    let x = match minimize_smooth(objective, gradient, x0.clone(), step, cfg) {
        Ok(x) => x,
        Err(Error::SolverFailure { last_iterate, .. }) if linalg::all_finite(&last_iterate) => last_iterate,
        Err(e) => return Err(e),
    };
    if objective(&x) <= objective(&x0) {
        Ok(unflatten(&x, d))
    } else {
        Ok(start)
    }
}

/// Best of `restarts` local descents. Seeds are the minimizer sequence, the
/// free rollout of `δ` from the prehistory, and Gaussian perturbations of the
/// minimizers. Ties go to the lowest restart index.
pub fn solve_offline_multistart(inst: &Instance, restarts: usize, seed: u64, cfg: &SolverConfig) -> Result<Trajectory> {
    if restarts == 0 {
        return Err(Error::invalid("at least one restart is required"));
    }
    let v = inst.minimizers();
    let spread = {
        let n = (v.len() * inst.dim()) as f64;
        let mean: f64 = v.iter().map(|x| x.sum()).sum::<f64>() / n;
        let var: f64 = v.iter().flat_map(|x| x.iter()).map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        var.sqrt().max(0.1)
    };
    let seeds: Vec<Vec<Vector>> = (0..restarts)
        .map(|r| match r {
            0 => v.clone(),
            1 => rollout(inst),
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
                let noise = Normal::new(0.0, spread).expect("positive spread");
                v.iter().map(|x| x.map(|c| c + noise.sample(&mut rng))).collect()
            }
        })
        .collect();
    let results: Vec<Result<(f64, Vec<Vector>)>> = seeds
        .into_par_iter()
        .map(|s| {
            let ys = local_descent(inst, s, cfg)?;
            Ok((joint_objective(inst, &ys), ys))
        })
        .collect();
    let mut best: Option<(f64, Vec<Vector>)> = None;
    for r in results {
        let (c, ys) = r?;
        if best.as_ref().is_none_or(|(b, _)| c < *b) {
            best = Some((c, ys));
        }
    }
    let (_, ys) = best.expect("at least one restart");
    Ok(Trajectory::new(ys, "offline-multistart"))
}

fn rollout(inst: &Instance) -> Vec<Vector> {
    let mut ys: Vec<Vector> = Vec::with_capacity(inst.horizon());
    for t in 1..=inst.horizon() {
        let next = inst.switching().apply(&memory(t, inst.p(), &ys, inst.prehistory()));
        ys.push(next);
    }
    ys
}
