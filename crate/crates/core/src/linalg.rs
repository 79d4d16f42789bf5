//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0, |acc, &s| acc.max(s))
}

/// Top right singular vector of `m` (unit norm).
pub fn top_right_singular_vector(m: &Matrix) -> Vector {
    let svd = m.clone().svd(false, true);
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &s)| if s > best.1 { (i, s) } else { best });
    let v_t = svd.v_t.expect("requested right singular vectors");
    v_t.row(idx).transpose()
}

/// Extreme eigenvalues of a symmetric matrix.
pub fn symmetric_eigen_bounds(m: &Matrix) -> (f64, f64) {
    let eig = SymmetricEigen::new(m.clone());
    eig.eigenvalues
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| (lo.min(e), hi.max(e)))
}

pub fn is_symmetric(m: &Matrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.amax().max(1.0);
    (0..m.nrows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol * scale))
}

pub fn all_finite(v: &Vector) -> bool {
    v.iter().all(|x| x.is_finite())
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Option<Matrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Symmetric matrix stored as its lower band of half-width `bw`.
#[derive(Debug, Clone)]
pub struct BandedSymmetric {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedSymmetric {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (j + self.bw - i)
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    /// Adds `x` to entries `(i, j)` and `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, x: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.bw, "entry ({i}, {j}) outside band {}", self.bw);
        let s = self.slot(i, j);
        self.data[s] += x;
    }

    pub fn mul_vec(&self, x: &Vector) -> Vector {
        Vector::from_fn(self.n, |i, _| {
            let lo = i.saturating_sub(self.bw);
            let hi = (i + self.bw + 1).min(self.n);
            (lo..hi).map(|j| self.get(i, j) * x[j]).sum()
        })
    }

    /// Cholesky factor `L` (stored in the same layout), or `None` if the
    /// matrix is not positive definite.
    pub fn cholesky(&self) -> Option<BandedCholesky> {
        let (n, bw) = (self.n, self.bw);
        let mut l = self.clone();
        for j in 0..n {
            let lo = j.saturating_sub(bw);
            let mut diag = l.data[l.slot(j, j)];
            for k in lo..j {
                let x = l.data[l.slot(j, k)];
                diag -= x * x;
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return None;
            }
            let diag = diag.sqrt();
            let sj = l.slot(j, j);
            l.data[sj] = diag;
            for i in (j + 1)..(j + bw + 1).min(n) {
                let lo_i = i.saturating_sub(bw).max(lo);
                let mut s = l.data[l.slot(i, j)];
                for k in lo_i..j {
                    s -= l.data[l.slot(i, k)] * l.data[l.slot(j, k)];
                }
                let sij = l.slot(i, j);
                l.data[sij] = s / diag;
            }
        }
        Some(BandedCholesky(l))
    }
}

#[derive(Debug, Clone)]
pub struct BandedCholesky(BandedSymmetric);

impl BandedCholesky {
    /// Solves `L Lᵀ x = b`.
    pub fn solve(&self, b: &Vector) -> Vector {
        let l = &self.0;
        let (n, bw) = (l.n, l.bw);
        let mut x = b.clone();
        for i in 0..n {
            let mut s = x[i];
            for k in i.saturating_sub(bw)..i {
                s -= l.data[l.slot(i, k)] * x[k];
            }
            x[i] = s / l.data[l.slot(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..(i + bw + 1).min(n) {
                s -= l.data[l.slot(k, i)] * x[k];
            }
            x[i] = s / l.data[l.slot(i, i)];
        }
        x
    }
}
