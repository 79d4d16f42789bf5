use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::model::json::{CostFile, DriftFile};
use crate::model::{evaluate_total, Delta, Drift, Geometry, HittingCost, Instance, SwitchingCost, Trajectory};

/// `x_{t+1} = A x_t + g(x_t) + u_t` with cost
/// `Σ_{t=1}^T ½(x_t − v_t)ᵀQ_t(x_t − v_t) + ½ Σ_{t=0}^{T−1} ‖u_t‖²`, where
/// `v_t` is revealed `k` rounds late.
#[derive(Debug, Clone)]
pub struct NonlinearControlSystem {
    pub a: Matrix,
    pub drift: Drift,
    pub q: Vec<Geometry>,
    pub v: Vec<Vector>,
    pub k: usize,
    pub x0: Vector,
}

impl NonlinearControlSystem {
    pub fn horizon(&self) -> usize {
        self.v.len()
    }

    fn step(&self, x: &Vector) -> Vector {
        &self.a * x + self.drift.eval(x)
    }

    /// States `x_0..x_T` under controls `u_0..u_{T−1}`.
    pub fn simulate(&self, u: &[Vector]) -> Result<Vec<Vector>> {
        if u.len() != self.horizon() {
            return Err(Error::invalid(format!("need {} controls, got {}", self.horizon(), u.len())));
        }
        let mut x = vec![self.x0.clone()];
        for ut in u {
            let next = self.step(x.last().expect("non-empty")) + ut;
            x.push(next);
        }
        Ok(x)
    }

    pub fn cost(&self, x: &[Vector], u: &[Vector]) -> f64 {
        let state: f64 = (1..x.len()).map(|t| self.q[t - 1].eval(&(&x[t] - &self.v[t - 1]))).sum();
        let input: f64 = u.iter().map(|u| 0.5 * u.norm_squared()).sum();
        state + input
    }

    /// `u_t = y_{t+1} − A y_t − g(y_t)` with `y_0 = x_0`; `ys[t] = y_{t+1}`.
    pub fn controls(&self, ys: &[Vector]) -> Vec<Vector> {
        (0..ys.len())
            .map(|t| {
                let prev = if t == 0 { &self.x0 } else { &ys[t - 1] };
                &ys[t] - self.step(prev)
            })
            .collect()
    }
}

/// `y_t = x_t`, hitting `½(y − v_t)ᵀQ_t(y − v_t)`, `δ(y) = A y + g(y)` from
/// `y_0 = x_0`, delay `k`. The scalar drone drag with `A = 1` maps to the
/// dedicated drone switching map.
pub fn reduce_nonlinear(sys: &NonlinearControlSystem) -> Result<Instance> {
    let n = sys.a.nrows();
    if sys.a.ncols() != n || n == 0 {
        return Err(Error::invalid("A must be square and non-empty"));
    }
    if sys.q.len() != sys.v.len() {
        return Err(Error::invalid(format!("{} cost matrices for {} targets", sys.q.len(), sys.v.len())));
    }
    if sys.x0.len() != n {
        return Err(Error::invalid("x_0 has the wrong dimension"));
    }
    let costs = sys
        .q
        .iter()
        .zip(&sys.v)
        .map(|(q, v)| HittingCost::new(q.clone(), v.clone()))
        .collect::<Result<Vec<_>>>()?;
    let delta = match sys.drift {
        Drift::DroneDrag { c1, c2, bound } if n == 1 && sys.a[(0, 0)] == 1.0 => Delta::AffineDrone { c1, c2, bound },
        drift => Delta::ControlAffine { a: sys.a.clone(), drift },
    };
    let switching = SwitchingCost::new(delta, n)?;
    Instance::new(n, sys.k, costs, switching, Some(vec![sys.x0.clone()]))
}

#[derive(Debug, Clone, Serialize)]
pub struct NonlinearEquivalence {
    pub control_cost: f64,
    pub oco_cost: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
}

/// Simulates the controls recovered from `traj` and checks that the
/// simulated states are the decisions and that both costs agree.
pub fn roundtrip_verify_nonlinear(sys: &NonlinearControlSystem, traj: &Trajectory, tol: f64) -> Result<NonlinearEquivalence> {
    let inst = reduce_nonlinear(sys)?;
    let u = sys.controls(&traj.points);
    let x = sys.simulate(&u)?;
    for (t, y) in traj.points.iter().enumerate() {
        let gap = (&x[t + 1] - y).amax();
        if gap > tol * y.amax().max(1.0) {
            return Err(Error::VerificationFailure {
                step: t + 1,
                detail: format!("simulated state differs from the decision by {gap:.3e}"),
            });
        }
    }
    let control_cost = sys.cost(&x, &u);
    let oco_cost = evaluate_total(&inst, traj)?.total;
    let abs_diff = (control_cost - oco_cost).abs();
    let rel_diff = abs_diff / control_cost.abs().max(f64::MIN_POSITIVE);
    if rel_diff > tol {
        return Err(Error::VerificationFailure {
            step: 0,
            detail: format!("control cost {control_cost:.12e} vs OCO cost {oco_cost:.12e}"),
        });
    }
    Ok(NonlinearEquivalence {
        control_cost,
        oco_cost,
        abs_diff,
        rel_diff,
    })
}

/// File form of [`NonlinearControlSystem`]; each cost entry gives `m` or
/// `Q` together with the target `v`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonlinearSystemFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub drift: DriftFile,
    pub costs: Vec<CostFile>,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
}

impl NonlinearSystemFile {
    pub fn into_system(self) -> Result<NonlinearControlSystem> {
        let a = linalg::matrix_from_rows(&self.a).ok_or_else(|| Error::invalid("A has ragged rows"))?;
        let n = a.nrows();
        let mut q = Vec::with_capacity(self.costs.len());
        let mut v = Vec::with_capacity(self.costs.len());
        for (t, c) in self.costs.into_iter().enumerate() {
            let g = match (c.m, c.q) {
                (Some(m), None) => Geometry::Isotropic(m),
                (None, Some(rows)) => Geometry::Matrix(
                    linalg::matrix_from_rows(&rows).ok_or_else(|| Error::invalid("Q has ragged rows"))?,
                ),
                _ => return Err(Error::invalid(format!("cost {} must give exactly one of m or Q", t + 1))),
            };
            q.push(g);
            v.push(Vector::from_vec(c.v));
        }
        Ok(NonlinearControlSystem {
            x0: self.x0.map(Vector::from_vec).unwrap_or_else(|| Vector::zeros(n)),
            a,
            drift: self.drift.into(),
            q,
            v,
            k: self.k,
        })
    }
}
