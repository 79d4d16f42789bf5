//! Runtime audits of the per-step and summed inequalities that the analysis
//! of ROBD, iROBD and delayed move-to-minimizer relies on.
//!
//! Each audit returns one [`Check`] per inequality instance with
//! `slack = rhs − lhs`; an inequality holds when the slack is non-negative.

use serde::Serialize;

use crate::algorithms::DelaySweep;
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::model::{evaluate_total, memory, Instance, Trajectory};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    /// Round index, or 0 for summed inequalities.
    pub step: usize,
    /// Delay row the check refers to, where applicable.
    pub delay: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl Check {
    fn new(step: usize, delay: usize, lhs: f64, rhs: f64) -> Self {
        Self {
            step,
            delay,
            lhs,
            rhs,
            slack: rhs - lhs,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Audit {
    pub name: String,
    pub checks: Vec<Check>,
}

impl Audit {
    fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            checks: Vec::new(),
        }
    }

    pub fn min_slack(&self) -> f64 {
        self.checks.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min)
    }

    pub fn first_violation(&self, tol: f64) -> Option<&Check> {
        self.checks.iter().find(|c| !(c.slack >= -tol))
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.first_violation(tol).is_none()
    }

    /// `Err(VerificationFailure)` naming the first violated step.
    pub fn ensure(&self, tol: f64) -> Result<()> {
        match self.first_violation(tol) {
            None => Ok(()),
            Some(c) => Err(Error::VerificationFailure {
                step: c.step,
                detail: format!(
                    "{} (delay {}): lhs {:.6e} > rhs {:.6e}, slack {:.3e}",
                    self.name, c.delay, c.lhs, c.rhs, c.slack
                ),
            }),
        }
    }
}

fn check_sweep(inst: &Instance, sweep: &DelaySweep) -> Result<()> {
    if sweep.y.is_empty() || sweep.y.iter().any(|row| row.len() != inst.horizon()) {
        return Err(Error::invalid("delay sweep does not match the instance horizon"));
    }
    Ok(())
}

/// For every delay row `j ≥ 1` and round `t`:
/// `‖y^{(j)} − y^{(0)}‖² ≤ 8‖v^{(j)} − v^{(0)}‖² + 2pL² Σ_{i=1}^p ‖y_{t−i}^{(j−i)} − y_{t−i}^{(0)}‖²`
/// with `L = max_i L_i`.
pub fn audit_lemma1(inst: &Instance, sweep: &DelaySweep) -> Result<Audit> {
    check_sweep(inst, sweep)?;
    let p = inst.p();
    let l = inst.switching().lipschitz_max();
    let pre = inst.prehistory();
    let mut audit = Audit::new("delay distance (squared)");
    for j in 1..=sweep.max_delay() {
        for t in 1..=inst.horizon() {
            let lhs = (&sweep.y[j][t - 1] - &sweep.y[0][t - 1]).norm_squared();
            let dv = (&sweep.v[j][t - 1] - &sweep.v[0][t - 1]).norm_squared();
            let mem: f64 = (1..=p)
                .map(|i| {
                    let s = t as isize - i as isize;
                    let a = sweep.point(j as isize - i as isize, s, pre);
                    let b = sweep.point(0, s, pre);
                    (a - b).norm_squared()
                })
                .sum();
            let rhs = 8.0 * dv + 2.0 * (p as f64) * l * l * mem;
            audit.checks.push(Check::new(t, j, lhs, rhs));
        }
    }
    Ok(audit)
}

/// For every delay row `j ≥ 1` and round `t`:
/// `‖y^{(j)} − y^{(0)}‖ ≤ 2‖v^{(j)} − v^{(0)}‖ + ‖δ(mixed memory) − δ(row-0 memory)‖`.
pub fn audit_lemma1_unsquared(inst: &Instance, sweep: &DelaySweep) -> Result<Audit> {
    check_sweep(inst, sweep)?;
    let p = inst.p();
    let pre = inst.prehistory();
    let sw = inst.switching();
    let mut audit = Audit::new("delay distance");
    for j in 1..=sweep.max_delay() {
        for t in 1..=inst.horizon() {
            let lhs = (&sweep.y[j][t - 1] - &sweep.y[0][t - 1]).norm();
            let dv = (&sweep.v[j][t - 1] - &sweep.v[0][t - 1]).norm();
            let mixed = sweep.mixed_memory(j, t, p, pre);
            let base = memory(t, p, &sweep.y[0], pre);
            let rhs = 2.0 * dv + (sw.apply(&mixed) - sw.apply(&base)).norm();
            audit.checks.push(Check::new(t, j, lhs, rhs));
        }
    }
    Ok(audit)
}

/// Linear `δ` only. For every delay row `j ≥ 1` and round `t`:
/// `‖y^{(j)} − y^{(0)}‖² ≤ 8‖v^{(j)} − v^{(0)}‖² + 2α² Σ_{i=1}^{j−1} ‖y_{t−i}^{(j−i)} − y_{t−i}^{(0)}‖²`
/// with `α = Σ‖C_i‖`.
pub fn audit_lemma3(inst: &Instance, sweep: &DelaySweep) -> Result<Audit> {
    check_sweep(inst, sweep)?;
    let alpha = inst
        .switching()
        .alpha()
        .ok_or_else(|| Error::Unsupported("the linear distance bound needs a linear switching map".into()))?;
    let pre = inst.prehistory();
    let mut audit = Audit::new("delay distance (linear)");
    for j in 1..=sweep.max_delay() {
        for t in 1..=inst.horizon() {
            let lhs = (&sweep.y[j][t - 1] - &sweep.y[0][t - 1]).norm_squared();
            let dv = (&sweep.v[j][t - 1] - &sweep.v[0][t - 1]).norm_squared();
            let mem: f64 = (1..j.min(t))
                .map(|i| {
                    let s = t as isize - i as isize;
                    (sweep.point((j - i) as isize, s, pre) - sweep.point(0, s, pre)).norm_squared()
                })
                .sum();
            audit.checks.push(Check::new(t, j, lhs, 8.0 * dv + 2.0 * alpha * alpha * mem));
        }
    }
    Ok(audit)
}

/// `Σ(H_t + λM_t)` of the undelayed ROBD trajectory against
/// `Σ(H*_t + λ(m + λ)/(m + (1 − p²L²)λ)·M*_t)` for any comparator. Requires
/// `m + (1 − p²L²)λ > 0`.
pub fn audit_lemma2(inst: &Instance, robd: &Trajectory, comparator: &Trajectory, lambda: f64) -> Result<Audit> {
    let (m, _) = inst.curvature_bounds();
    let p = inst.p() as f64;
    let l = inst.switching().lipschitz_max();
    let den = m + (1.0 - p * p * l * l) * lambda;
    if !(lambda > 0.0 && den > 0.0) {
        return Err(Error::invalid(format!(
            "the summed ROBD bound needs λ > 0 and m + (1 − p²L²)λ > 0 (got {den:e})"
        )));
    }
    let alg = evaluate_total(inst, robd)?;
    let opt = evaluate_total(inst, comparator)?;
    let lhs = alg.hitting_total() + lambda * alg.switching_total();
    let rhs = opt.hitting_total() + lambda * (m + lambda) / den * opt.switching_total();
    let mut audit = Audit::new("ROBD against comparator");
    audit.checks.push(Check::new(0, 0, lhs, rhs));
    Ok(audit)
}

/// Per-step bounds for delayed move-to-minimizer on SOCO instances with
/// `m`, `l` the global curvature bounds, `H*_0 = 0` and `v_0 = y_0`:
///
/// - `t ≤ k`: `f_t(y_0) ≤ l(t+1)/m·H*_t + l(t+1)·Σ_{τ≤t} M*_τ`
/// - `t > k`: `f_t(v_{t−k}) ≤ l(k+2)/m·(H*_t + H*_{t−k}) + l(k+2)·Σ_{τ=t−k+1}^{t} M*_τ`
/// - `s ≤ T − k`: `½‖v_s − v_{s−1}‖² ≤ 3/m·(H*_s + H*_{s−1}) + 3M*_s`
///
/// Checks of the third kind are reported with `step = s + k`.
pub fn audit_m2m(inst: &Instance, comparator: &Trajectory) -> Result<Vec<Audit>> {
    if !inst.switching().is_soco() {
        return Err(Error::invalid("move-to-minimizer bounds need SOCO switching"));
    }
    let opt = evaluate_total(inst, comparator)?;
    let (m, l) = inst.curvature_bounds();
    let k = inst.delay();
    let t_len = inst.horizon();
    let y0 = inst.start();
    let v = inst.minimizers();
    let h = |t: usize| if t == 0 { 0.0 } else { opt.hitting[t - 1] };
    let msum = |a: usize, b: usize| -> f64 { (a..=b).map(|t| opt.switching[t - 1]).sum() };
    let vv = |s: usize| -> &Vector { if s == 0 { y0 } else { &v[s - 1] } };

    let mut early = Audit::new("move-to-minimizer hitting, t <= k");
    let mut late = Audit::new("move-to-minimizer hitting, t > k");
    let mut moves = Audit::new("move-to-minimizer switching");
    for t in 1..=t_len {
        if t <= k {
            let lhs = inst.cost(t).eval(y0);
            let c = l * (t as f64 + 1.0);
            early.checks.push(Check::new(t, k, lhs, c / m * h(t) + c * msum(1, t)));
        } else {
            let lhs = inst.cost(t).eval(&v[t - k - 1]);
            let c = l * (k as f64 + 2.0);
            late.checks
                .push(Check::new(t, k, lhs, c / m * (h(t) + h(t - k)) + c * msum(t - k + 1, t)));
        }
    }
    for s in 1..=t_len.saturating_sub(k) {
        let lhs = 0.5 * (vv(s) - vv(s - 1)).norm_squared();
        let rhs = 3.0 / m * (h(s) + h(s - 1)) + 3.0 * opt.switching[s - 1];
        moves.checks.push(Check::new(s + k, k, lhs, rhs));
    }
    Ok(vec![early, late, moves])
}
