use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::model::{Instance, Trajectory};

const MAX_TABLE_ENTRIES: usize = 32_000_000;

/// Uniform scalar grid `lo, lo + h, …, hi` with `cells` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub cells: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, cells: usize) -> Result<Self> {
        let g = Self { lo, hi, cells };
        g.validate()?;
        Ok(g)
    }

    /// Covers the minimizers and the prehistory with three ranges of margin
    /// on each side. The cell count is forced odd.
    pub fn auto(inst: &Instance, cells: usize) -> Self {
        let values = inst
            .costs()
            .iter()
            .map(|c| c.minimizer[0])
            .chain(inst.prehistory().iter().map(|y| y[0]));
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        let range = if hi - lo > 0.0 { hi - lo } else { 1.0 };
        Self {
            lo: lo - 3.0 * range,
            hi: hi + 3.0 * range,
            cells: cells.max(3) | 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::invalid(format!("grid bounds [{}, {}] are invalid", self.lo, self.hi)));
        }
        if self.cells < 3 {
            return Err(Error::invalid("grid needs at least 3 cells"));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let w = self.hi - self.lo;
        let m = (self.cells - 1) as f64;
        (0..self.cells).map(|i| self.lo + w * i as f64 / m).collect()
    }
}

/// Grid dynamic program for scalar instances with `p ≤ 2`.
///
/// Exact over the grid; the continuous optimum is recovered up to the grid
/// resolution.
pub fn solve_offline_dp(inst: &Instance, grid: &GridSpec) -> Result<Trajectory> {
    grid.validate()?;
    if inst.dim() != 1 {
        return Err(Error::Unsupported(format!("grid DP needs d = 1, got d = {}", inst.dim())));
    }
    let (p, t_len, n) = (inst.p(), inst.horizon(), grid.cells);
    let states = match p {
        1 => n,
        2 => n * n,
        _ => return Err(Error::Unsupported(format!("grid DP supports p ≤ 2, got p = {p}"))),
    };
    let required = t_len.saturating_mul(states);
    if required > MAX_TABLE_ENTRIES {
        return Err(Error::Unsupported(format!(
            "grid DP requires {required} table entries (limit {MAX_TABLE_ENTRIES})"
        )));
    }
    let g = grid.points();
    let hit: Vec<Vec<f64>> = (1..=t_len)
        .map(|t| {
            let c = inst.cost(t);
            g.iter().map(|&y| c.eval(&Vector::from_element(1, y))).collect()
        })
        .collect();
    let points = if p == 1 { dp1(inst, &g, &hit) } else { dp2(inst, &g, &hit) };
    Ok(Trajectory::new(
        points.into_iter().map(|y| Vector::from_element(1, y)).collect(),
        "offline-dp",
    ))
}

fn delta1(inst: &Instance, mem: &[f64]) -> f64 {
    let vs: Vec<Vector> = mem.iter().map(|&x| Vector::from_element(1, x)).collect();
    let refs: Vec<&Vector> = vs.iter().collect();
    inst.switching().apply(&refs)[0]
}

fn dp1(inst: &Instance, g: &[f64], hit: &[Vec<f64>]) -> Vec<f64> {
    let n = g.len();
    let t_len = hit.len();
    let image: Vec<f64> = g.iter().map(|&y| delta1(inst, &[y])).collect();
    let d0 = delta1(inst, &[inst.prehistory()[0][0]]);
    let mut value: Vec<f64> = (0..n).map(|j| hit[0][j] + 0.5 * (g[j] - d0).powi(2)).collect();
    let mut back: Vec<Vec<u32>> = Vec::with_capacity(t_len.saturating_sub(1));
    for h in &hit[1..] {
        let (next, arg): (Vec<f64>, Vec<u32>) = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut best = (f64::INFINITY, 0u32);
                for i in 0..n {
                    let c = value[i] + 0.5 * (g[j] - image[i]).powi(2);
                    if c < best.0 {
                        best = (c, i as u32);
                    }
                }
                (h[j] + best.0, best.1)
            })
            .unzip();
        value = next;
        back.push(arg);
    }
    let mut j = argmin(&value);
    let mut path = vec![g[j]];
    for arg in back.iter().rev() {
        j = arg[j] as usize;
        path.push(g[j]);
    }
    path.reverse();
    path
}

fn dp2(inst: &Instance, g: &[f64], hit: &[Vec<f64>]) -> Vec<f64> {
    let n = g.len();
    let t_len = hit.len();
    let (y0, ym1) = (inst.prehistory()[0][0], inst.prehistory()[1][0]);
    let d1 = delta1(inst, &[y0, ym1]);
    let first: Vec<f64> = (0..n).map(|j| hit[0][j] + 0.5 * (g[j] - d1).powi(2)).collect();
    if t_len == 1 {
        return vec![g[argmin(&first)]];
    }
    // State (j, i) = (y_t, y_{t−1}), flattened as j * n + i.
    let mut value: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|s| {
            let (j, i) = (s / n, s % n);
            first[i] + hit[1][j] + 0.5 * (g[j] - delta1(inst, &[g[i], y0])).powi(2)
        })
        .collect();
    // image[i * n + l] = δ(g_i, g_l).
    let image: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|s| delta1(inst, &[g[s / n], g[s % n]]))
        .collect();
    let mut back: Vec<Vec<u32>> = Vec::with_capacity(t_len.saturating_sub(2));
    for h in &hit[2..] {
        let (next, arg): (Vec<f64>, Vec<u32>) = (0..n * n)
            .into_par_iter()
            .map(|s| {
                let (j, i) = (s / n, s % n);
                let mut best = (f64::INFINITY, 0u32);
                for l in 0..n {
                    let c = value[i * n + l] + 0.5 * (g[j] - image[i * n + l]).powi(2);
                    if c < best.0 {
                        best = (c, l as u32);
                    }
                }
                (h[j] + best.0, best.1)
            })
            .unzip();
        value = next;
        back.push(arg);
    }
    let s = argmin(&value);
    let (mut j, mut i) = (s / n, s % n);
    let mut path = vec![g[j], g[i]];
    for arg in back.iter().rev() {
        let l = arg[j * n + i] as usize;
        path.push(g[l]);
        j = i;
        i = l;
    }
    path.reverse();
    path
}

fn argmin(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &x)| if x < bv { (i, x) } else { (bi, bv) })
        .0
}
