use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Vector};
use crate::model::switching::{Delta, SwitchingCost};

/// Largest sampled difference quotient per memory slot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub observed: Vec<f64>,
    pub declared: Vec<f64>,
    /// Slots (0-based) whose observed quotient exceeds the declared constant.
    pub violations: Vec<usize>,
}

impl LipschitzReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples pairs inside `bounds` (one interval per coordinate) and records
/// `‖θ(a) − θ(b)‖ / ‖a − b‖` for each slot, other slots held fixed.
pub fn validate_lipschitz(
    sw: &SwitchingCost,
    bounds: &[(f64, f64)],
    samples: usize,
    seed: u64,
) -> Result<LipschitzReport> {
    if samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    if bounds.is_empty() || bounds.iter().any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo < hi)) {
        return Err(Error::invalid("sampling box must have finite intervals with lo < hi"));
    }
    let d = bounds.len();
    let p = sw.p();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| Vector::from_fn(d, |i, _| rng.random_range(bounds[i].0..bounds[i].1));
    let width = bounds.iter().map(|(lo, hi)| hi - lo).fold(f64::INFINITY, f64::min);

    let linear = match sw.delta() {
        Delta::Linear(c) => Some(c.iter().map(linalg::top_right_singular_vector).collect::<Vec<_>>()),
        _ => None,
    };

    let declared = sw.lipschitz();
    let mut observed = vec![0.0f64; p];
    for slot in 0..p {
        for s in 0..samples {
            let mut mem: Vec<Vector> = (0..p).map(|_| draw(&mut rng)).collect();
            let a = mem[slot].clone();
            let b = match (&linear, s % 3) {
                (Some(dirs), 0) => &a + &dirs[slot] * (width * rng.random_range(0.01..1.0)),
                (_, 1) => {
                    let dir = Vector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
                    let n = dir.norm();
                    if n == 0.0 {
                        continue;
                    }
                    &a + dir * (1e-7 * width / n)
                }
                _ => draw(&mut rng),
            };
            let gap = (&a - &b).norm();
            if gap == 0.0 {
                continue;
            }
            let fa = sw.apply(&mem.iter().collect::<Vec<_>>());
            mem[slot] = b;
            let fb = sw.apply(&mem.iter().collect::<Vec<_>>());
            observed[slot] = observed[slot].max((fa - fb).norm() / gap);
        }
    }
    let violations = observed
        .iter()
        .zip(&declared)
        .enumerate()
        .filter(|(_, (o, l))| **o > **l * (1.0 + 1e-9) + 1e-12)
        .map(|(i, _)| i)
        .collect();
    Ok(LipschitzReport {
        observed,
        declared,
        violations,
    })
}
