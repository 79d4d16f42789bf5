use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// Signature of a user-supplied `δ`: receives `[y_{t−1}, …, y_{t−p}]`.
pub type DeltaFn = dyn Fn(&[&Vector]) -> Vector + Send + Sync;

/// Additive nonlinearity `g` in `δ(y) = A y + g(y)`. Applied elementwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drift {
    Zero,
    /// `g(y) = −(c1 + c2·|y|·y)`; slope bound is only valid on `|y| ≤ bound`.
    DroneDrag { c1: f64, c2: f64, bound: f64 },
    /// `g(y) = gain·sin(y)`.
    Sine { gain: f64 },
    /// `g(y) = gain·tanh(y)`.
    Tanh { gain: f64 },
}

impl Drift {
    pub fn eval(&self, y: &Vector) -> Vector {
        match *self {
            Drift::Zero => Vector::zeros(y.len()),
            Drift::DroneDrag { c1, c2, .. } => y.map(|x| -(c1 + c2 * x.abs() * x)),
            Drift::Sine { gain } => y.map(|x| gain * x.sin()),
            Drift::Tanh { gain } => y.map(|x| gain * x.tanh()),
        }
    }

    /// Diagonal of the Jacobian.
    pub fn derivative(&self, y: &Vector) -> Vector {
        match *self {
            Drift::Zero => Vector::zeros(y.len()),
            Drift::DroneDrag { c2, .. } => y.map(|x| -2.0 * c2 * x.abs()),
            Drift::Sine { gain } => y.map(|x| gain * x.cos()),
            Drift::Tanh { gain } => y.map(|x| {
                let c = x.cosh();
                gain / (c * c)
            }),
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match *self {
            Drift::Zero => 0.0,
            Drift::DroneDrag { c2, bound, .. } => 2.0 * c2 * bound,
            Drift::Sine { gain } | Drift::Tanh { gain } => gain.abs(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Drift::Zero => true,
            Drift::DroneDrag { c1, c2, bound } => {
                c1 >= 0.0 && c2 >= 0.0 && bound > 0.0 && c1.is_finite() && c2.is_finite() && bound.is_finite()
            }
            Drift::Sine { gain } | Drift::Tanh { gain } => gain.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid drift parameters {self:?}")))
        }
    }
}

/// The map `δ` in the switching cost `½‖y_t − δ(y_{t−1}, …, y_{t−p})‖²`.
#[derive(Clone)]
pub enum Delta {
    /// `δ = Σ C_i y_{t−i}`.
    Linear(Vec<Matrix>),
    /// `δ(y) = y − (c1 + c2·|y|·y)` elementwise, declared Lipschitz on `|y| ≤ bound`.
    AffineDrone { c1: f64, c2: f64, bound: f64 },
    /// `y ↦ s·F(y/s)` with `F(y) = y + b(y)`, where `b` is `ε` up to `nε`,
    /// `−ε` beyond `nε + γε`, and a half sine period in between. `scale = s`.
    Remark2 { eps: f64, gamma: f64, n: usize, scale: f64 },
    /// `δ(y) = A y + g(y)`.
    ControlAffine { a: Matrix, drift: Drift },
    /// Arbitrary map with declared per-slot Lipschitz constants.
    Callback { f: Arc<DeltaFn>, lipschitz: Vec<f64> },
}

impl fmt::Debug for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Delta::Linear(c) => f.debug_tuple("Linear").field(c).finish(),
            Delta::AffineDrone { c1, c2, bound } => f
                .debug_struct("AffineDrone")
                .field("c1", c1)
                .field("c2", c2)
                .field("bound", bound)
                .finish(),
            Delta::Remark2 { eps, gamma, n, scale } => f
                .debug_struct("Remark2")
                .field("eps", eps)
                .field("gamma", gamma)
                .field("n", n)
                .field("scale", scale)
                .finish(),
            Delta::ControlAffine { a, drift } => f
                .debug_struct("ControlAffine")
                .field("a", a)
                .field("drift", drift)
                .finish(),
            Delta::Callback { lipschitz, .. } => f
                .debug_struct("Callback")
                .field("lipschitz", lipschitz)
                .finish_non_exhaustive(),
        }
    }
}

fn remark2_bump(eps: f64, gamma: f64, n: usize, y: f64) -> (f64, f64) {
    let left = n as f64 * eps;
    let right = left + gamma * eps;
    if y <= left {
        (eps, 0.0)
    } else if y <= right {
        let arg = PI / gamma * ((y - left) / eps) - PI / 2.0;
        (-eps * arg.sin(), -(PI / gamma) * arg.cos())
    } else {
        (-eps, 0.0)
    }
}

impl Delta {
    /// Memory length `p`.
    pub fn memory(&self) -> usize {
        match self {
            Delta::Linear(c) => c.len(),
            Delta::Callback { lipschitz, .. } => lipschitz.len(),
            _ => 1,
        }
    }

    pub fn apply(&self, mem: &[&Vector]) -> Vector {
        match self {
            Delta::Linear(c) => {
                let mut out = &c[0] * mem[0];
                for (ci, y) in c.iter().zip(mem).skip(1) {
                    out += ci * *y;
                }
                out
            }
            Delta::AffineDrone { c1, c2, .. } => mem[0].map(|x| x - (c1 + c2 * x.abs() * x)),
            Delta::Remark2 { eps, gamma, n, scale } => {
                mem[0].map(|z| scale * (z / scale + remark2_bump(*eps, *gamma, *n, z / scale).0))
            }
            Delta::ControlAffine { a, drift } => a * mem[0] + drift.eval(mem[0]),
            Delta::Callback { f, .. } => f(mem),
        }
    }

    /// `∂δ/∂y_{t−i}` for each slot.
    pub fn jacobians(&self, mem: &[&Vector]) -> Vec<Matrix> {
        match self {
            Delta::Linear(c) => c.clone(),
            Delta::AffineDrone { c2, .. } => {
                vec![Matrix::from_diagonal(&mem[0].map(|x| 1.0 - 2.0 * c2 * x.abs()))]
            }
            Delta::Remark2 { eps, gamma, n, scale } => vec![Matrix::from_diagonal(
                &mem[0].map(|z| 1.0 + remark2_bump(*eps, *gamma, *n, z / scale).1),
            )],
            Delta::ControlAffine { a, drift } => {
                vec![a + Matrix::from_diagonal(&drift.derivative(mem[0]))]
            }
            Delta::Callback { f, .. } => finite_difference_jacobians(f.as_ref(), mem),
        }
    }

    /// Declared per-slot Lipschitz constants `L_1..L_p`.
    pub fn lipschitz(&self) -> Vec<f64> {
        match self {
            Delta::Linear(c) => c.iter().map(linalg::spectral_norm).collect(),
            Delta::AffineDrone { c2, bound, .. } => vec![1.0 + 2.0 * c2 * bound],
            Delta::Remark2 { gamma, .. } => vec![PI / gamma],
            Delta::ControlAffine { a, drift } => vec![linalg::spectral_norm(a) + drift.lipschitz()],
            Delta::Callback { lipschitz, .. } => lipschitz.clone(),
        }
    }

    pub(crate) fn validate(&self, d: usize) -> Result<()> {
        match self {
            Delta::Linear(c) => {
                if c.is_empty() {
                    return Err(Error::invalid("linear switching cost needs at least one matrix"));
                }
                for (i, ci) in c.iter().enumerate() {
                    if ci.nrows() != d || ci.ncols() != d {
                        return Err(Error::invalid(format!(
                            "C_{} is {}x{}, expected {d}x{d}",
                            i + 1,
                            ci.nrows(),
                            ci.ncols()
                        )));
                    }
                    if ci.iter().any(|x| !x.is_finite()) {
                        return Err(Error::invalid(format!("C_{} has non-finite entries", i + 1)));
                    }
                }
            }
            Delta::AffineDrone { c1, c2, bound } => {
                if !(*c1 >= 0.0 && *c2 >= 0.0 && *bound > 0.0 && bound.is_finite()) {
                    return Err(Error::invalid("drone coefficients must be non-negative with a positive bound"));
                }
            }
            Delta::Remark2 { eps, gamma, n, scale } => {
                if d != 1 {
                    return Err(Error::invalid("the plateau-sine map is one-dimensional"));
                }
                if !(*eps > 0.0 && *gamma > 0.0 && *gamma < 1.0 && *n >= 1 && *scale > 0.0) {
                    return Err(Error::invalid("plateau-sine map needs eps > 0, 0 < gamma < 1, n >= 1, scale > 0"));
                }
            }
            Delta::ControlAffine { a, drift } => {
                if a.nrows() != d || a.ncols() != d {
                    return Err(Error::invalid(format!("A is {}x{}, expected {d}x{d}", a.nrows(), a.ncols())));
                }
                drift.validate()?;
            }
            Delta::Callback { lipschitz, .. } => {
                if lipschitz.is_empty() || lipschitz.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
                    return Err(Error::invalid("callback needs p >= 1 finite non-negative Lipschitz constants"));
                }
            }
        }
        Ok(())
    }
}

fn finite_difference_jacobians(f: &DeltaFn, mem: &[&Vector]) -> Vec<Matrix> {
    let d = mem[0].len();
    let mut owned: Vec<Vector> = mem.iter().map(|v| (*v).clone()).collect();
    let mut out = Vec::with_capacity(mem.len());
    for slot in 0..mem.len() {
        let mut jac = Matrix::zeros(d, d);
        for c in 0..d {
            let x = owned[slot][c];
            let h = 1e-6 * x.abs().max(1.0);
            owned[slot][c] = x + h;
            let plus = f(&owned.iter().collect::<Vec<_>>());
            owned[slot][c] = x - h;
            let minus = f(&owned.iter().collect::<Vec<_>>());
            owned[slot][c] = x;
            jac.set_column(c, &((plus - minus) / (2.0 * h)));
        }
        out.push(jac);
    }
    out
}

/// `c(y_{t:t−p}) = ½‖y_t − δ(y_{t−1:t−p})‖²`.
#[derive(Debug, Clone)]
pub struct SwitchingCost {
    delta: Delta,
}

impl SwitchingCost {
    pub fn new(delta: Delta, d: usize) -> Result<Self> {
        delta.validate(d)?;
        Ok(Self { delta })
    }

    pub fn linear(c: Vec<Matrix>) -> Result<Self> {
        let d = c.first().map_or(0, Matrix::nrows);
        Self::new(Delta::Linear(c), d)
    }

    /// `½‖y_t − y_{t−1}‖²` in dimension `d`.
    pub fn soco(d: usize) -> Self {
        Self {
            delta: Delta::Linear(vec![Matrix::identity(d, d)]),
        }
    }

    pub fn delta(&self) -> &Delta {
        &self.delta
    }

    pub fn p(&self) -> usize {
        self.delta.memory()
    }

    pub fn apply(&self, mem: &[&Vector]) -> Vector {
        self.delta.apply(mem)
    }

    pub fn cost(&self, y: &Vector, mem: &[&Vector]) -> f64 {
        0.5 * (y - self.apply(mem)).norm_squared()
    }

    pub fn lipschitz(&self) -> Vec<f64> {
        self.delta.lipschitz()
    }

    /// `L = max_i L_i`.
    pub fn lipschitz_max(&self) -> f64 {
        self.lipschitz().into_iter().fold(0.0, f64::max)
    }

    /// The coefficient matrices when `δ` is linear.
    pub fn linear_matrices(&self) -> Option<Vec<Matrix>> {
        match &self.delta {
            Delta::Linear(c) => Some(c.clone()),
            Delta::ControlAffine { a, drift: Drift::Zero } => Some(vec![a.clone()]),
            _ => None,
        }
    }

    pub fn is_linear(&self) -> bool {
        self.linear_matrices().is_some()
    }

    /// `α = Σ‖C_i‖` for linear `δ`.
    pub fn alpha(&self) -> Option<f64> {
        self.linear_matrices()
            .map(|c| c.iter().map(linalg::spectral_norm).sum())
    }

    /// `p = 1` and `δ` is the identity.
    pub fn is_soco(&self) -> bool {
        match self.linear_matrices() {
            Some(c) if c.len() == 1 => {
                let d = c[0].nrows();
                (&c[0] - Matrix::identity(d, d)).amax() <= 1e-12
            }
            _ => false,
        }
    }
}

/// `½‖y_t − δ(y_{t−1:t−p})‖²` for `window = [y_t, y_{t−1}, …, y_{t−p}]`.
pub fn evaluate_switching(sw: &SwitchingCost, window: &[&Vector]) -> Result<f64> {
    let p = sw.p();
    if window.len() != p + 1 {
        return Err(Error::invalid(format!(
            "switching window has {} points, expected p + 1 = {}",
            window.len(),
            p + 1
        )));
    }
    let d = window[0].len();
    if window.iter().any(|w| w.len() != d) {
        return Err(Error::invalid("switching window mixes dimensions"));
    }
    Ok(sw.cost(window[0], &window[1..]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: f64) -> Vector {
        Vector::from_element(1, x)
    }

    fn m(x: f64) -> Matrix {
        Matrix::from_element(1, 1, x)
    }

    #[test]
    fn soco_no_movement() {
        let sw = SwitchingCost::soco(2);
        let y = Vector::from_column_slice(&[3.0, 3.0]);
        assert_eq!(evaluate_switching(&sw, &[&y, &y]).unwrap(), 0.0);
    }

    #[test]
    fn drone_value() {
        let sw = SwitchingCost::new(Delta::AffineDrone { c1: 0.1, c2: 0.01, bound: 5.0 }, 1).unwrap();
        let c = evaluate_switching(&sw, &[&s(2.0), &s(2.0)]).unwrap();
        assert!((c - 0.0098).abs() < 1e-15);
    }

    #[test]
    fn second_difference_is_free() {
        let sw = SwitchingCost::linear(vec![m(2.0), m(-1.0)]).unwrap();
        let c = evaluate_switching(&sw, &[&s(3.0), &s(2.0), &s(1.0)]).unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn wrong_window_length() {
        let sw = SwitchingCost::linear(vec![m(2.0), m(-1.0)]).unwrap();
        assert!(evaluate_switching(&sw, &[&s(3.0), &s(2.0)]).is_err());
    }

    #[test]
    fn plateau_sine_shape() {
        let (eps, gamma, n) = (0.1, 0.01, 5usize);
        let d = Delta::Remark2 { eps, gamma, n, scale: 1.0 };
        let at = |y: f64| d.apply(&[&s(y)])[0] - y;
        assert!((at(n as f64 * eps / 2.0) - eps).abs() < 1e-15);
        assert!((at(-3.0) - eps).abs() < 1e-15);
        assert!((at(n as f64 * eps + gamma * eps) + eps).abs() < 1e-12);
        assert!((at(1.0) + eps).abs() < 1e-15);
        let mid = n as f64 * eps + gamma * eps / 2.0;
        assert!(at(mid).abs() < 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_difference() {
        let deltas = vec![
            Delta::AffineDrone { c1: 0.1, c2: 0.05, bound: 4.0 },
            Delta::ControlAffine { a: m(0.9), drift: Drift::Sine { gain: 0.3 } },
            Delta::ControlAffine { a: m(1.0), drift: Drift::Tanh { gain: -0.4 } },
            Delta::Remark2 { eps: 0.1, gamma: 0.2, n: 2, scale: 2f64.sqrt() },
        ];
        let y = s(0.2 * 2f64.sqrt() + 0.003);
        for d in deltas {
            let exact = d.jacobians(&[&y]);
            let f = d.clone();
            let fd = finite_difference_jacobians(&move |mem: &[&Vector]| f.apply(mem), &[&y]);
            assert!((exact[0][(0, 0)] - fd[0][(0, 0)]).abs() < 1e-5, "{d:?}");
        }
    }

    #[test]
    fn linear_lipschitz_and_alpha() {
        let sw = SwitchingCost::linear(vec![m(2.0), m(-1.0)]).unwrap();
        assert_eq!(sw.lipschitz(), vec![2.0, 1.0]);
        assert_eq!(sw.alpha(), Some(3.0));
        assert!(!sw.is_soco());
        assert!(SwitchingCost::soco(3).is_soco());
    }
}
