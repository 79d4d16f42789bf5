use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::model::{HittingCost, Instance, Trajectory};
use crate::prox::{robd_minimize, SolverConfig};

/// iROBD decisions and minimizer estimates for every delay `0..=k`.
///
/// `y[j][t−1] = y_t^{(j)}` is the decision iROBD with delay `j` emits at round
/// `t`, and `v[j][t−1]` is the minimizer estimate behind it; row 0 is
/// undelayed ROBD with the true minimizers.
#[derive(Debug, Clone)]
pub struct DelaySweep {
    pub y: Vec<Vec<Vector>>,
    pub v: Vec<Vec<Vector>>,
}

impl DelaySweep {
    pub fn max_delay(&self) -> usize {
        self.y.len() - 1
    }

    pub fn trajectory(&self, j: usize) -> Trajectory {
        Trajectory::new(self.y[j].clone(), format!("irobd-delay-{j}"))
    }

    /// `y_s^{(j)}` with `s ≤ 0` read from the prehistory and `j < 0` clamped to 0.
    pub fn point<'a>(&'a self, j: isize, s: isize, prehistory: &'a [Vector]) -> &'a Vector {
        if s <= 0 {
            &prehistory[(-s) as usize]
        } else {
            &self.y[j.max(0) as usize][s as usize - 1]
        }
    }

    /// The mixed memory `[y_{t−1}^{(j−1)}, …, y_{t−p}^{(j−p)}]`.
    pub fn mixed_memory<'a>(&'a self, j: usize, t: usize, p: usize, prehistory: &'a [Vector]) -> Vec<&'a Vector> {
        (1..=p)
            .map(|i| self.point(j as isize - i as isize, t as isize - i as isize, prehistory))
            .collect()
    }
}

/// Builds the rows `y^{(j)}` by the recursion
/// `y_t^{(j)} = ROBD(h_t(· − v_t^{(j)}), y_{t−1}^{(j−1)}, …, y_{t−p}^{(j−p)})`
/// with `v_t^{(j)} = δ(y_{t−1}^{(j−1)}, …)` for `j ≥ 1`.
pub fn delay_sweep(inst: &Instance, lambda: f64, cfg: &SolverConfig) -> Result<DelaySweep> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("delay sweep needs a positive weight"));
    }
    let k = inst.delay();
    let horizon = inst.horizon();
    let p = inst.p();
    let sw = inst.switching();
    let pre = inst.prehistory();
    let mut sweep = DelaySweep {
        y: Vec::with_capacity(k + 1),
        v: Vec::with_capacity(k + 1),
    };
    for j in 0..=k {
        let mut ys = Vec::with_capacity(horizon);
        let mut vs = Vec::with_capacity(horizon);
        for t in 1..=horizon {
            let (y, v) = {
                let mem: Vec<&Vector> = (1..=p)
                    .map(|i| {
                        let s = t as isize - i as isize;
                        let row = j.saturating_sub(i);
                        if s <= 0 {
                            &pre[(-s) as usize]
                        } else if row == j {
                            &ys[s as usize - 1]
                        } else {
                            &sweep.y[row][s as usize - 1]
                        }
                    })
                    .collect();
                let v = if j == 0 {
                    inst.cost(t).minimizer.clone()
                } else {
                    sw.apply(&mem)
                };
                let f = HittingCost {
                    geometry: inst.cost(t).geometry.clone(),
                    minimizer: v.clone(),
                };
                let y = robd_minimize(&f, sw, &mem, lambda, 0.0, cfg)
                    .map_err(|e| e.with_context(format!("delay {j}, round {t}")))?;
                (y, v)
            };
            ys.push(y);
            vs.push(v);
        }
        sweep.y.push(ys);
        sweep.v.push(vs);
    }
    Ok(sweep)
}
