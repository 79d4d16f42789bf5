use serde::{Deserialize, Serialize};

use crate::algorithms::{OnlinePolicy, RoundView};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::model::{evaluate_total, Geometry, HittingCost, Instance, SwitchingCost, Trajectory};
use crate::reductions::canonical::{accumulate_r, canonical_indices, extract_ci, CanonicalIndices};

/// `x_{t+1} = A x_t + B u_t + w_t` for `t = 0..T−1`, with cost
/// `½ Σ_{t=1}^T q_t ‖x_t‖² + ½ Σ_{t=0}^{T−1} ‖u_t‖²`.
#[derive(Debug, Clone)]
pub struct LinearControlSystem {
    pub a: Matrix,
    pub b: Matrix,
    /// `w_0..w_{T−1}`.
    pub w: Vec<Vector>,
    /// `q_1, q_2, …`; at least `T` entries, extra entries are ignored.
    pub q: Vec<f64>,
    pub x0: Vector,
}

impl LinearControlSystem {
    pub fn horizon(&self) -> usize {
        self.w.len()
    }

    pub fn validate(&self) -> Result<CanonicalIndices> {
        let idx = canonical_indices(&self.a, &self.b)?;
        let n = idx.n();
        let t_len = self.horizon();
        if t_len == 0 {
            return Err(Error::invalid("the system needs at least one disturbance (T >= 1)"));
        }
        if self.w.iter().any(|w| w.len() != n || !linalg::all_finite(w)) {
            return Err(Error::invalid(format!("disturbances must be finite {n}-vectors")));
        }
        if self.q.len() < t_len {
            return Err(Error::invalid(format!("need at least T = {t_len} weights q_t, got {}", self.q.len())));
        }
        if let Some(t) = self.q.iter().position(|q| !(*q > 0.0 && q.is_finite())) {
            return Err(Error::invalid(format!("q_{} must be positive", t + 1)));
        }
        if self.x0.len() != n || self.x0.iter().any(|x| *x != 0.0) {
            return Err(Error::invalid("the reduction assumes x_0 = 0"));
        }
        Ok(idx)
    }

    /// States `x_0..x_T` under controls `u_0..u_{T−1}`.
    pub fn simulate(&self, u: &[Vector]) -> Result<Vec<Vector>> {
        if u.len() != self.horizon() {
            return Err(Error::invalid(format!("need {} controls, got {}", self.horizon(), u.len())));
        }
        let mut x = vec![self.x0.clone()];
        for (t, ut) in u.iter().enumerate() {
            let next = &self.a * &x[t] + &self.b * ut + &self.w[t];
            x.push(next);
        }
        Ok(x)
    }

    pub fn cost(&self, x: &[Vector], u: &[Vector]) -> f64 {
        let state: f64 = (1..x.len()).map(|t| 0.5 * self.q[t - 1] * x[t].norm_squared()).sum();
        let input: f64 = u.iter().map(|u| 0.5 * u.norm_squared()).sum();
        state + input
    }
}

/// Maps OCO decisions back to controls and states.
#[derive(Debug, Clone)]
pub struct RecoveryMap {
    pub indices: CanonicalIndices,
    pub c: Vec<Matrix>,
    /// `ζ_0..ζ_{T−1}`.
    pub zeta: Vec<Vector>,
    w: Vec<Vector>,
}

impl RecoveryMap {
    /// `u_t = y_t − Σ C_i y_{t−i}` with `y_s = 0` for `s < 0`; `ys[t] = y_t`.
    pub fn controls(&self, ys: &[Vector]) -> Vec<Vector> {
        (0..ys.len())
            .map(|t| {
                let mut u = ys[t].clone();
                for (i, ci) in self.c.iter().enumerate() {
                    if t > i {
                        u -= ci * &ys[t - i - 1];
                    }
                }
                u
            })
            .collect()
    }

    /// Inverse of [`RecoveryMap::controls`].
    pub fn decisions(&self, us: &[Vector]) -> Vec<Vector> {
        let mut ys: Vec<Vector> = Vec::with_capacity(us.len());
        for (t, u) in us.iter().enumerate() {
            let mut y = u.clone();
            for (i, ci) in self.c.iter().enumerate() {
                if t > i {
                    y += ci * &ys[t - i - 1];
                }
            }
            ys.push(y);
        }
        ys
    }

    /// `x_1..x_T` rebuilt from the decisions via
    /// `x_t^{(k_i+1−j)} = y_{t−j}^{(i)} + ζ_{t−j}^{(i)} + r(t, i, j)`.
    pub fn states(&self, ys: &[Vector]) -> Result<Vec<Vector>> {
        let idx = &self.indices;
        let n = idx.n();
        (1..=ys.len())
            .map(|t| {
                let mut x = Vector::zeros(n);
                for i in 1..=idx.d() {
                    for j in 1..=idx.p_i[i - 1] {
                        let r = accumulate_r(&self.w, idx, t, i, j)?;
                        let base = if t >= j { ys[t - j][i - 1] + self.zeta[t - j][i - 1] } else { 0.0 };
                        x[idx.k[i - 1] - j] = base + r;
                    }
                }
                Ok(x)
            })
            .collect()
    }
}

/// The reduced instance, its recovery map and the constant separating the
/// two objectives: `control cost = OCO cost + offset`.
#[derive(Debug, Clone)]
pub struct LinearReduction {
    pub instance: Instance,
    pub recovery: RecoveryMap,
    pub offset: f64,
}

/// `R_t^{(h)} = Σ_j Σ_{i ≤ p_j} A(k_h, k_j+1−i)·r(t, j, i)`.
fn residual(a: &Matrix, idx: &CanonicalIndices, w: &[Vector], t: usize) -> Result<Vector> {
    let d = idx.d();
    let mut out = Vector::zeros(d);
    for j in 1..=d {
        for i in 2..=idx.p_i[j - 1] {
            let r = accumulate_r(w, idx, t, j, i)?;
            for h in 0..d {
                out[h] += a[(idx.k[h] - 1, idx.k[j - 1] - i)] * r;
            }
        }
    }
    Ok(out)
}

/// `ζ_t = ψ(w_t) + R_t + Σ C_i ζ_{t−i}` for every `t` whose disturbances are
/// all in `w`.
fn zeta_sequence(a: &Matrix, idx: &CanonicalIndices, c: &[Matrix], w: &[Vector], len: usize) -> Result<Vec<Vector>> {
    let mut zeta: Vec<Vector> = Vec::with_capacity(len);
    for t in 0..len {
        let mut z = idx.psi(&w[t]) + residual(a, idx, w, t)?;
        for (i, ci) in c.iter().enumerate() {
            if t > i {
                z += ci * &zeta[t - i - 1];
            }
        }
        zeta.push(z);
    }
    Ok(zeta)
}

/// Per-coordinate curvatures `W^{(i)}` and minimizer of `f_τ`, plus the
/// constant `min f_τ`. Needs `w_0..w_{τ+p−1}` (clipped to the horizon).
fn stage(
    sys: &LinearControlSystem,
    idx: &CanonicalIndices,
    zeta: &Vector,
    w: &[Vector],
    tau: usize,
) -> Result<(Vector, Vector, f64)> {
    let d = idx.d();
    let t_len = sys.horizon();
    let mut weight = Vector::zeros(d);
    let mut v = Vector::zeros(d);
    let mut constant = 0.0;
    for i in 1..=d {
        let (mut sw, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for j in 1..=idx.p_i[i - 1] {
            if tau + j > t_len {
                break;
            }
            let q = sys.q[tau + j - 1];
            let a = zeta[i - 1] + accumulate_r(w, idx, tau + j, i, j)?;
            sw += q;
            s1 += q * a;
            s2 += q * a * a;
        }
        weight[i - 1] = sw;
        v[i - 1] = -s1 / sw;
        constant += 0.5 * (s2 - s1 * s1 / sw);
    }
    Ok((weight, v, constant))
}

/// Rewrites the control problem as delayed OCO with memory `p`: decision
/// `y_τ` at round `τ + 1`, `δ = Σ C_i y_{τ−i}` from zero prehistory, delay `p`.
pub fn reduce_linear(sys: &LinearControlSystem) -> Result<LinearReduction> {
    let idx = sys.validate()?;
    let c = extract_ci(&sys.a, &idx);
    let t_len = sys.horizon();
    let d = idx.d();
    let zeta = zeta_sequence(&sys.a, &idx, &c, &sys.w, t_len)?;

    let mut costs = Vec::with_capacity(t_len);
    let mut offset = 0.0;
    for tau in 0..t_len {
        let (weight, v, constant) = stage(sys, &idx, &zeta[tau], &sys.w, tau)?;
        offset += constant;
        costs.push(HittingCost::new(Geometry::Matrix(Matrix::from_diagonal(&weight)), v)?);
    }
    // State terms at t < j do not involve any decision.
    for t in 1..=t_len {
        for i in 1..=d {
            for j in (t + 1)..=idx.p_i[i - 1] {
                offset += 0.5 * sys.q[t - 1] * accumulate_r(&sys.w, &idx, t, i, j)?.powi(2);
            }
        }
    }
    let switching = SwitchingCost::linear(c.clone())?;
    let instance = Instance::new(d, idx.p, costs, switching, None)?;
    Ok(LinearReduction {
        instance,
        recovery: RecoveryMap {
            indices: idx,
            c,
            zeta,
            w: sys.w.clone(),
        },
        offset,
    })
}

/// `min over t, i` and `max over t, i` of the realized curvature
/// `Σ_{j ≤ p_i, t+j ≤ T} q_{t+j}`.
pub fn curvature_range(sys: &LinearControlSystem) -> Result<(f64, f64)> {
    let idx = sys.validate()?;
    let t_len = sys.horizon();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for tau in 0..t_len {
        for &pi in &idx.p_i {
            let s: f64 = (1..=pi).filter(|j| tau + j <= t_len).map(|j| sys.q[tau + j - 1]).sum();
            lo = lo.min(s);
            hi = hi.max(s);
        }
    }
    Ok((lo, hi))
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub control_cost: f64,
    pub oco_cost: f64,
    pub offset: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
    /// Largest gap between simulated states and states rebuilt from `y`, `ζ`.
    pub state_gap: f64,
}

/// Simulates the controls recovered from `traj` and compares the control
/// cost with `OCO cost + offset`, and the simulated states with the states
/// rebuilt from the decisions.
pub fn roundtrip_verify(sys: &LinearControlSystem, traj: &Trajectory, tol: f64) -> Result<EquivalenceReport> {
    let red = reduce_linear(sys)?;
    let ys = &traj.points;
    let u = red.recovery.controls(ys);
    let x = sys.simulate(&u)?;
    let control_cost = sys.cost(&x, &u);
    let oco_cost = evaluate_total(&red.instance, traj)?.total;
    let abs_diff = (control_cost - (oco_cost + red.offset)).abs();
    let rel_diff = abs_diff / control_cost.abs().max(f64::MIN_POSITIVE);

    let idx = &red.recovery.indices;
    let scale = x.iter().map(|v| v.amax()).fold(1.0, f64::max);
    let mut state_gap = 0.0f64;
    for (t, rebuilt) in red.recovery.states(ys)?.iter().enumerate() {
        let gap = (rebuilt - &x[t + 1]).amax();
        let z_gap = (idx.psi(&x[t + 1]) - &ys[t] - &red.recovery.zeta[t]).amax();
        let g = gap.max(z_gap);
        if g > tol * scale {
            return Err(Error::VerificationFailure {
                step: t + 1,
                detail: format!("rebuilt state differs from simulation by {g:.3e}"),
            });
        }
        state_gap = state_gap.max(g);
    }
    if rel_diff > tol {
        return Err(Error::VerificationFailure {
            step: 0,
            detail: format!(
                "control cost {control_cost:.12e} vs OCO cost + offset {:.12e} (relative gap {rel_diff:.3e})",
                oco_cost + red.offset
            ),
        });
    }
    Ok(EquivalenceReport {
        control_cost,
        oco_cost,
        offset: red.offset,
        abs_diff,
        rel_diff,
        state_gap,
    })
}

/// Result of driving the control system with an OCO policy.
#[derive(Debug, Clone)]
pub struct ClosedLoopRun {
    /// `y_0..y_{T−1}`, as OCO rounds `1..T`.
    pub decisions: Trajectory,
    pub controls: Vec<Vector>,
    pub states: Vec<Vector>,
    pub control_cost: f64,
}

/// Runs `policy` in closed loop. At control step `τ` only `x_0..x_τ` (hence
/// `w_0..w_{τ−1}`) are known; the view reveals the minimizers those
/// disturbances determine, which is every round up to `τ + 1 − p`.
pub fn run_linear_closed_loop<P: OnlinePolicy + ?Sized>(sys: &LinearControlSystem, policy: &mut P) -> Result<ClosedLoopRun> {
    let red = reduce_linear(sys)?;
    let inst = &red.instance;
    let idx = &red.recovery.indices;
    let c = &red.recovery.c;
    let p = idx.p;
    let t_len = sys.horizon();
    let geometries = inst.geometries();
    let mut x = vec![sys.x0.clone()];
    let mut observed: Vec<Vector> = Vec::with_capacity(t_len);
    let mut ys: Vec<Vector> = Vec::with_capacity(t_len);
    let mut us: Vec<Vector> = Vec::with_capacity(t_len);
    for tau in 0..t_len {
        let revealed = (tau + 1).saturating_sub(p);
        let zeta = zeta_sequence(&sys.a, idx, c, &observed, revealed)?;
        let minimizers = (0..revealed)
            .map(|s| stage(sys, idx, &zeta[s], &observed, s).map(|(_, v, _)| v))
            .collect::<Result<Vec<_>>>()?;
        let view = RoundView::new(tau + 1, p, &geometries, &minimizers, &ys, inst.switching(), inst.prehistory());
        let y = policy.act(&view)?;
        let mut u = y.clone();
        for (i, ci) in c.iter().enumerate() {
            if tau > i {
                u -= ci * &ys[tau - i - 1];
            }
        }
        let next = &sys.a * &x[tau] + &sys.b * &u + &sys.w[tau];
        // x_{τ+1} reveals w_τ = x_{τ+1} − A x_τ − B u_τ.
        observed.push(&next - &sys.a * &x[tau] - &sys.b * &u);
        x.push(next);
        ys.push(y);
        us.push(u);
    }
    let control_cost = sys.cost(&x, &us);
    Ok(ClosedLoopRun {
        decisions: Trajectory::new(ys, policy.label()),
        controls: us,
        states: x,
        control_cost,
    })
}

/// File form of [`LinearControlSystem`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearSystemFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    pub w: Vec<Vec<f64>>,
    pub q: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
}

impl LinearSystemFile {
    pub fn into_system(self) -> Result<LinearControlSystem> {
        let a = linalg::matrix_from_rows(&self.a).ok_or_else(|| Error::invalid("A has ragged rows"))?;
        let b = linalg::matrix_from_rows(&self.b).ok_or_else(|| Error::invalid("B has ragged rows"))?;
        let n = a.nrows();
        Ok(LinearControlSystem {
            x0: self.x0.map(Vector::from_vec).unwrap_or_else(|| Vector::zeros(n)),
            a,
            b,
            w: self.w.into_iter().map(Vector::from_vec).collect(),
            q: self.q,
        })
    }

    pub fn from_system(sys: &LinearControlSystem) -> Self {
        Self {
            a: linalg::matrix_to_rows(&sys.a),
            b: linalg::matrix_to_rows(&sys.b),
            w: sys.w.iter().map(|w| w.iter().copied().collect()).collect(),
            q: sys.q.clone(),
            x0: Some(sys.x0.iter().copied().collect()),
        }
    }
}
