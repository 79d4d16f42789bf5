use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// Curvature of a quadratic hitting cost `h(e) = ½ eᵀQe`.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    /// `Q = m·I`.
    Isotropic(f64),
    /// A symmetric positive definite `Q`.
    Matrix(Matrix),
}

impl Geometry {
    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            Geometry::Isotropic(m) => {
                if !(m.is_finite() && *m > 0.0) {
                    return Err(Error::invalid(format!("isotropic curvature must be positive, got {m}")));
                }
            }
            Geometry::Matrix(q) => {
                if q.nrows() != d || q.ncols() != d {
                    return Err(Error::invalid(format!(
                        "curvature matrix is {}x{}, expected {d}x{d}",
                        q.nrows(),
                        q.ncols()
                    )));
                }
                if q.iter().any(|x| !x.is_finite()) {
                    return Err(Error::invalid("curvature matrix has non-finite entries"));
                }
                if !linalg::is_symmetric(q, 1e-12) {
                    return Err(Error::invalid("curvature matrix is not symmetric"));
                }
                let (lo, _) = linalg::symmetric_eigen_bounds(q);
                if lo <= 0.0 {
                    return Err(Error::invalid(format!(
                        "curvature matrix is not positive definite (smallest eigenvalue {lo:e})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `(m, l)`: smallest and largest eigenvalue of `Q`.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Geometry::Isotropic(m) => (*m, *m),
            Geometry::Matrix(q) => linalg::symmetric_eigen_bounds(q),
        }
    }

    /// `½ eᵀQe`.
    pub fn eval(&self, e: &Vector) -> f64 {
        match self {
            Geometry::Isotropic(m) => 0.5 * m * e.norm_squared(),
            Geometry::Matrix(q) => 0.5 * e.dot(&(q * e)),
        }
    }

    /// `Q e`.
    pub fn apply(&self, e: &Vector) -> Vector {
        match self {
            Geometry::Isotropic(m) => e * *m,
            Geometry::Matrix(q) => q * e,
        }
    }

    pub fn to_matrix(&self, d: usize) -> Matrix {
        match self {
            Geometry::Isotropic(m) => Matrix::identity(d, d) * *m,
            Geometry::Matrix(q) => q.clone(),
        }
    }

    /// Solves `(Q + s·I) x = rhs`.
    pub fn solve_shifted(&self, shift: f64, rhs: &Vector) -> Result<Vector> {
        match self {
            Geometry::Isotropic(m) => Ok(rhs / (m + shift)),
            Geometry::Matrix(q) => {
                let d = rhs.len();
                let a = q + Matrix::identity(d, d) * shift;
                a.cholesky()
                    .map(|c| c.solve(rhs))
                    .ok_or_else(|| Error::invalid("shifted curvature matrix is not positive definite"))
            }
        }
    }
}

/// `f(y) = h(y − v)` with quadratic `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingCost {
    pub geometry: Geometry,
    pub minimizer: Vector,
}

impl HittingCost {
    pub fn new(geometry: Geometry, minimizer: Vector) -> Result<Self> {
        geometry.validate(minimizer.len())?;
        if !linalg::all_finite(&minimizer) {
            return Err(Error::invalid("minimizer has non-finite entries"));
        }
        Ok(Self { geometry, minimizer })
    }

    pub fn isotropic(m: f64, minimizer: Vector) -> Result<Self> {
        Self::new(Geometry::Isotropic(m), minimizer)
    }

    pub fn dim(&self) -> usize {
        self.minimizer.len()
    }

    /// Round at which the minimizer becomes visible when acting at round `t`
    /// under delay `k`.
    pub fn reveal_round(t: usize, k: usize) -> usize {
        t + k
    }

    pub fn eval(&self, y: &Vector) -> f64 {
        self.geometry.eval(&(y - &self.minimizer))
    }

    pub fn gradient(&self, y: &Vector) -> Vector {
        self.geometry.apply(&(y - &self.minimizer))
    }
}

/// `½ (y − v)ᵀ Q (y − v)`.
pub fn evaluate_hitting(cost: &HittingCost, y: &Vector) -> Result<f64> {
    if y.len() != cost.dim() {
        return Err(Error::invalid(format!(
            "point has dimension {}, cost has dimension {}",
            y.len(),
            cost.dim()
        )));
    }
    Ok(cost.eval(y))
}
