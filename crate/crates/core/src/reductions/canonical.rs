use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Input rows `k_1 < … < k_d = n` (1-based) and block lengths
/// `p_i = k_i − k_{i−1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CanonicalIndices {
    pub k: Vec<usize>,
    pub p_i: Vec<usize>,
    pub p: usize,
}

impl CanonicalIndices {
    pub fn n(&self) -> usize {
        *self.k.last().expect("at least one input")
    }

    pub fn d(&self) -> usize {
        self.k.len()
    }

    /// `ψ(x) = (x^{(k_1)}, …, x^{(k_d)})`.
    pub fn psi(&self, x: &Vector) -> Vector {
        Vector::from_iterator(self.k.len(), self.k.iter().map(|&k| x[k - 1]))
    }
}

/// Reads the canonical structure of `(A, B)`: rows of `B` are zero except for
/// `e_i` at row `k_i`, and every row `r ∉ {k_i}` of `A` is the shift row
/// `e_{r+1}ᵀ`.
pub fn canonical_indices(a: &Matrix, b: &Matrix) -> Result<CanonicalIndices> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::invalid(format!("A must be square and non-empty, got {}x{}", a.nrows(), a.ncols())));
    }
    if b.nrows() != n || b.ncols() == 0 {
        return Err(Error::invalid(format!("B must be {n}xd with d >= 1, got {}x{}", b.nrows(), b.ncols())));
    }
    let d = b.ncols();
    let mut k = Vec::with_capacity(d);
    for r in 0..n {
        let row = b.row(r);
        let nonzero: Vec<usize> = (0..d).filter(|&j| row[j] != 0.0).collect();
        match nonzero.as_slice() {
            [] => {}
            [j] if row[*j] == 1.0 && *j == k.len() => k.push(r + 1),
            _ => {
                return Err(Error::invalid(format!(
                    "row {} of B is not the next unit vector e_{}",
                    r + 1,
                    k.len() + 1
                )))
            }
        }
    }
    if k.len() != d {
        return Err(Error::invalid(format!("B has {} unit rows, expected {d}", k.len())));
    }
    if k[d - 1] != n {
        return Err(Error::invalid(format!("last input row is {}, expected n = {n}", k[d - 1])));
    }
    for r in 1..=n {
        if k.contains(&r) {
            continue;
        }
        let ok = (1..=n).all(|c| a[(r - 1, c - 1)] == if c == r + 1 { 1.0 } else { 0.0 });
        if !ok {
            return Err(Error::invalid(format!("row {r} of A is not a shift row")));
        }
    }
    let p_i: Vec<usize> = k
        .iter()
        .enumerate()
        .map(|(i, &ki)| ki - if i == 0 { 0 } else { k[i - 1] })
        .collect();
    let p = *p_i.iter().max().expect("d >= 1");
    Ok(CanonicalIndices { k, p_i, p })
}

/// `C_i(h, j) = A(k_h, k_j + 1 − i)` when `i ≤ p_j`, else 0, for `i = 1..p`.
pub fn extract_ci(a: &Matrix, idx: &CanonicalIndices) -> Vec<Matrix> {
    let d = idx.d();
    (1..=idx.p)
        .map(|i| {
            Matrix::from_fn(d, d, |h, j| {
                if i <= idx.p_i[j] {
                    a[(idx.k[h] - 1, idx.k[j] - i)]
                } else {
                    0.0
                }
            })
        })
        .collect()
}

/// `r(t, i, j) = Σ_{τ=t+1−j}^{t−1} w_τ^{(k_i − j + t − τ)}` with `w_τ = 0` for
/// `τ < 0`; `i` and `j` are 1-based, `w[τ] = w_τ`.
pub fn accumulate_r(w: &[Vector], idx: &CanonicalIndices, t: usize, i: usize, j: usize) -> Result<f64> {
    if i == 0 || i > idx.d() {
        return Err(Error::invalid(format!("input index {i} out of range 1..={}", idx.d())));
    }
    if j == 0 || j > idx.p_i[i - 1] {
        return Err(Error::invalid(format!("lag {j} out of range 1..={}", idx.p_i[i - 1])));
    }
    let lo = t as isize + 1 - j as isize;
    let mut sum = 0.0;
    for tau in lo.max(0)..t as isize {
        let tau = tau as usize;
        let row = idx.k[i - 1] + t - j - tau;
        let w_tau = w.get(tau).ok_or_else(|| {
            Error::invalid(format!("disturbance w_{tau} is not available (have {})", w.len()))
        })?;
        sum += w_tau[row - 1];
    }
    Ok(sum)
}
