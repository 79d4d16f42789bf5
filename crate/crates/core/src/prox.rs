//! Inner minimizations: the regularized step of ROBD, the optimistic
//! minimizer estimate and a generic smooth solver used as a cross-check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::model::{Geometry, HittingCost, SwitchingCost};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grad_tol: f64,
    pub max_iters: usize,
    pub shrink: f64,
    pub sufficient_decrease: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grad_tol: 1e-10,
            max_iters: 10_000,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) || self.max_iters == 0 {
            return Err(Error::invalid("grad_tol must be positive and max_iters at least 1"));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) || !(self.sufficient_decrease > 0.0 && self.sufficient_decrease < 1.0) {
            return Err(Error::invalid("line search parameters must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Gradient of `f(y) + λ1·c(y, mem) + (λ2/2)‖y − v‖²` given `δ(mem)`.
fn robd_gradient(f: &HittingCost, target: &Vector, y: &Vector, lambda1: f64, lambda2: f64) -> Vector {
    f.gradient(y) + (y - target) * lambda1 + (y - &f.minimizer) * lambda2
}

fn check_weights(f: &HittingCost, lambda1: f64, lambda2: f64) -> Result<()> {
    if !(lambda1 >= 0.0 && lambda2 >= 0.0 && lambda1.is_finite() && lambda2.is_finite()) {
        return Err(Error::invalid(format!("regularization weights must be finite and non-negative, got {lambda1}, {lambda2}")));
    }
    let (m, _) = f.geometry.bounds();
    if m + lambda1 <= 0.0 {
        return Err(Error::invalid("objective is not strongly convex"));
    }
    Ok(())
}

/// `argmin_y f(y) + λ1·½‖y − δ(mem)‖² + (λ2/2)‖y − v‖²`, in closed form.
///
/// The returned point is stationary to within `grad_tol`, measured relative
/// to the magnitude of the terms in the gradient once that exceeds 1.
pub fn robd_minimize(
    f: &HittingCost,
    sw: &SwitchingCost,
    mem: &[&Vector],
    lambda1: f64,
    lambda2: f64,
    cfg: &SolverConfig,
) -> Result<Vector> {
    check_weights(f, lambda1, lambda2)?;
    let target = sw.apply(mem);
    robd_step(f, &target, lambda1, lambda2, cfg)
}

/// [`robd_minimize`] with `δ(mem)` already evaluated.
pub fn robd_step(f: &HittingCost, target: &Vector, lambda1: f64, lambda2: f64, cfg: &SolverConfig) -> Result<Vector> {
    let rhs = f.geometry.apply(&f.minimizer) + target * lambda1 + &f.minimizer * lambda2;
    let shift = lambda1 + lambda2;
    let mut y = f.geometry.solve_shifted(shift, &rhs)?;
    let scale = rhs.norm().max(1.0);
    let mut residual = robd_gradient(f, target, &y, lambda1, lambda2).norm();
    let mut refinements = 0;
    while residual > cfg.grad_tol * scale {
        if refinements == 3 || !residual.is_finite() {
            return Err(Error::SolverFailure {
                iterations: refinements,
                residual,
                last_iterate: y,
                context: Some("closed-form step".into()),
            });
        }
        let g = robd_gradient(f, target, &y, lambda1, lambda2);
        y -= f.geometry.solve_shifted(shift, &g)?;
        residual = robd_gradient(f, target, &y, lambda1, lambda2).norm();
        refinements += 1;
    }
    Ok(y)
}

/// Same minimizer as [`robd_minimize`], found by gradient descent.
pub fn robd_minimize_iterative(
    f: &HittingCost,
    sw: &SwitchingCost,
    mem: &[&Vector],
    lambda1: f64,
    lambda2: f64,
    cfg: &SolverConfig,
) -> Result<Vector> {
    check_weights(f, lambda1, lambda2)?;
    let target = sw.apply(mem);
    let (_, l) = f.geometry.bounds();
    let objective = |y: &Vector| {
        f.eval(y) + 0.5 * lambda1 * (y - &target).norm_squared() + 0.5 * lambda2 * (y - &f.minimizer).norm_squared()
    };
    let gradient = |y: &Vector| robd_gradient(f, &target, y, lambda1, lambda2);
    minimize_smooth(objective, gradient, target.clone(), 1.0 / (l + lambda1 + lambda2), cfg)
}

/// Optimistic estimate `argmin_v min_y h(y − v) + λ·c(y, mem)`.
///
/// The inner value is non-negative and vanishes at `v = δ(mem)`, which is
/// therefore the unique minimizer.
pub fn estimate_minimizer(
    h: &Geometry,
    sw: &SwitchingCost,
    mem: &[&Vector],
    lambda: f64,
    _cfg: &SolverConfig,
) -> Result<Vector> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("estimation weight must be positive"));
    }
    h.validate(mem.first().map_or(0, |v| v.len()))?;
    Ok(sw.apply(mem))
}

/// `(y, ψ(v))` where `ψ(v) = min_y h(y − v) + λ·c(y, mem)`.
pub fn min_over_y_value(
    h: &Geometry,
    sw: &SwitchingCost,
    mem: &[&Vector],
    v: &Vector,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<(Vector, f64)> {
    let f = HittingCost::new(h.clone(), v.clone())?;
    let target = sw.apply(mem);
    check_weights(&f, lambda, 0.0)?;
    let y = robd_step(&f, &target, lambda, 0.0, cfg)?;
    let value = f.eval(&y) + 0.5 * lambda * (&y - &target).norm_squared();
    Ok((y, value.max(0.0)))
}

/// Minimizes `ψ` numerically, using `∇ψ(v) = −Q (y*(v) − v)`.
///
/// Slow reference for [`estimate_minimizer`].
pub fn estimate_minimizer_nested(
    h: &Geometry,
    sw: &SwitchingCost,
    mem: &[&Vector],
    lambda: f64,
    start: &Vector,
    cfg: &SolverConfig,
) -> Result<Vector> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("estimation weight must be positive"));
    }
    let inner = SolverConfig {
        grad_tol: cfg.grad_tol * 1e-2,
        ..*cfg
    };
    let psi = |v: &Vector| min_over_y_value(h, sw, mem, v, lambda, &inner).map(|(_, val)| val).unwrap_or(f64::INFINITY);
    let grad = |v: &Vector| match min_over_y_value(h, sw, mem, v, lambda, &inner) {
        Ok((y, _)) => -h.apply(&(y - v)),
        Err(_) => Vector::from_element(v.len(), f64::NAN),
    };
    let (_, l) = h.bounds();
    let step = (l + lambda) / (l * lambda);
    minimize_smooth(psi, grad, start.clone(), step, cfg)
}

/// Gradient descent with backtracking line search.
///
/// A step is accepted on the Armijo condition, or, once objective values are
/// at rounding level, when the objective does not grow beyond rounding and
/// the directional derivative at the trial point has not flipped too far
/// (approximate Wolfe). Each iteration starts from the Barzilai–Borwein step
/// `sᵀy/yᵀy`, or twice the previous step when the curvature along `s` is not
/// positive.
pub fn minimize_smooth<F, G>(objective: F, gradient: G, x0: Vector, step: f64, cfg: &SolverConfig) -> Result<Vector>
where
    F: Fn(&Vector) -> f64,
    G: Fn(&Vector) -> Vector,
{
    let mut x = x0;
    let mut fx = objective(&x);
    let mut g = gradient(&x);
    let mut t = step;
    for iter in 0..cfg.max_iters {
        let gnorm2 = g.norm_squared();
        if !gnorm2.is_finite() || !fx.is_finite() {
            return Err(Error::SolverFailure {
                iterations: iter,
                residual: gnorm2.sqrt(),
                last_iterate: x,
                context: Some("non-finite objective or gradient".into()),
            });
        }
        if gnorm2.sqrt() <= cfg.grad_tol {
            return Ok(x);
        }
        let noise = 8.0 * f64::EPSILON * fx.abs().max(f64::MIN_POSITIVE);
        let mut accepted = None;
        for _ in 0..200 {
            let cand = &x - &g * t;
            let fc = objective(&cand);
            if fc <= fx - cfg.sufficient_decrease * t * gnorm2 {
                accepted = Some((cand, fc, None));
                break;
            }
            if fc <= fx + noise {
                let gc = gradient(&cand);
                if gc.dot(&g) >= (2.0 * cfg.sufficient_decrease - 1.0) * gnorm2 {
                    accepted = Some((cand, fc, Some(gc)));
                    break;
                }
            }
            t *= cfg.shrink;
        }
        let Some((cand, fc, gc)) = accepted else { break };
        let gc = gc.unwrap_or_else(|| gradient(&cand));
        let ds = &cand - &x;
        let dg = &gc - &g;
        let (sy, yy) = (ds.dot(&dg), dg.norm_squared());
        t = if sy > 0.0 && yy > 0.0 { sy / yy } else { 2.0 * t };
        x = cand;
        fx = fc;
        g = gc;
    }
    let residual = g.norm();
    if residual <= cfg.grad_tol {
        Ok(x)
    } else {
        Err(Error::SolverFailure {
            iterations: cfg.max_iters,
            residual,
            last_iterate: x,
            context: None,
        })
    }
}
