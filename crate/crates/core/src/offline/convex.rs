use crate::error::{Error, Result};
use crate::linalg::{BandedSymmetric, Matrix, Vector};
use crate::model::{Instance, Trajectory};
use crate::offline::{flatten, joint_gradient, unflatten};
use crate::prox::SolverConfig;

/// Exact hindsight optimum for linear `δ` via a banded Cholesky solve of the
/// joint normal equations, with iterative refinement.
pub fn solve_offline_convex(inst: &Instance, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let c = inst
        .switching()
        .linear_matrices()
        .ok_or_else(|| Error::Unsupported("convex oracle requires a linear switching map".into()))?;
    let (d, p, t_len) = (inst.dim(), inst.p(), inst.horizon());
    let n = t_len * d;
    let bw = (p + 1) * d - 1;
    let mut h = BandedSymmetric::zeros(n, bw);
    let mut b = Vector::zeros(n);

    // D_0 = I, D_i = −C_i; residual r_t = Σ_a D_a y_{t−a} − c_t.
    let mut blocks = vec![Matrix::identity(d, d)];
    blocks.extend(c.iter().map(|m| -m));

    for t in 1..=t_len {
        let f = inst.cost(t);
        let q = f.geometry.to_matrix(d);
        let qv = &q * &f.minimizer;
        let base = (t - 1) * d;
        for i in 0..d {
            b[base + i] += qv[i];
            for j in 0..=i {
                h.add(base + i, base + j, q[(i, j)]);
            }
        }

        let mut ct = Vector::zeros(d);
        let mut vars = Vec::new();
        for (a, blk) in blocks.iter().enumerate() {
            if t > a {
                vars.push((t - a, blk));
            } else {
                ct -= blk * &inst.prehistory()[a - t];
            }
        }
        for &(s1, b1) in &vars {
            let rhs = b1.transpose() * &ct;
            for i in 0..d {
                b[(s1 - 1) * d + i] += rhs[i];
            }
            for &(s2, b2) in &vars {
                if s2 > s1 {
                    continue;
                }
                let m = b1.transpose() * b2;
                for i in 0..d {
                    for j in 0..d {
                        let (r, col) = ((s1 - 1) * d + i, (s2 - 1) * d + j);
                        if s1 == s2 && j > i {
                            continue;
                        }
                        h.add(r, col, m[(i, j)]);
                    }
                }
            }
        }
    }

    let chol = h
        .cholesky()
        .ok_or_else(|| Error::invalid("joint Hessian is not positive definite"))?;
    let mut x = chol.solve(&b);
    let scale = b.amax().max(1.0);
    let mut residual = f64::INFINITY;
    for _ in 0..=3 {
        let r = &b - h.mul_vec(&x);
        residual = r.amax();
        if residual <= cfg.grad_tol * scale {
            break;
        }
        x += chol.solve(&r);
    }
    let points = unflatten(&x, d);
    let stationarity = flatten(&joint_gradient(inst, &points)).amax();
    if residual > cfg.grad_tol * scale && stationarity > cfg.grad_tol * scale {
        return Err(Error::SolverFailure {
            iterations: 4,
            residual: stationarity,
            last_iterate: x,
            context: Some("convex oracle".into()),
        });
    }
    Ok(Trajectory::new(points, "offline-convex"))
}
