use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::model::{memory, HittingCost, Instance, Trajectory};
use crate::prox::{estimate_minimizer, robd_minimize, SolverConfig};

use super::{run_policy, OnlinePolicy, RoundView};

/// Iterative ROBD: replays undelayed ROBD on the revealed prefix, then rolls
/// forward through the unrevealed rounds with optimistic minimizer estimates.
#[derive(Debug, Clone)]
pub struct Irobd {
    pub lambda: f64,
    pub cfg: SolverConfig,
    oracle: Vec<Vector>,
    estimates: Vec<Vector>,
}

impl Irobd {
    pub fn new(lambda: f64, cfg: SolverConfig) -> Self {
        Self {
            lambda,
            cfg,
            oracle: Vec::new(),
            estimates: Vec::new(),
        }
    }

    /// Undelayed ROBD decisions `ŷ_1..ŷ_{t−k}` computed so far.
    pub fn oracle(&self) -> &[Vector] {
        &self.oracle
    }

    /// The estimate `ṽ_t` used for the emitted decision at each round so far,
    /// or the true `v_t` when no estimation was needed.
    pub fn estimates(&self) -> &[Vector] {
        &self.estimates
    }
}

impl OnlinePolicy for Irobd {
    fn label(&self) -> String {
        "irobd".into()
    }

    fn act(&mut self, view: &RoundView<'_>) -> Result<Vector> {
        let t = view.round();
        let sw = view.switching();
        let pre = view.prehistory();
        let p = sw.p();
        // ŷ only depends on revealed data, so each entry is computed once.
        let revealed = view.revealed();
        while self.oracle.len() < revealed {
            let s = self.oracle.len() + 1;
            let f = HittingCost {
                geometry: view.geometry(s)?.clone(),
                minimizer: view.minimizer(s)?.clone(),
            };
            let mem = memory(s, p, &self.oracle, pre);
            let y = robd_minimize(&f, sw, &mem, self.lambda, 0.0, &self.cfg)
                .map_err(|e| e.with_context(format!("oracle step {s}")))?;
            self.oracle.push(y);
        }
        if revealed == t {
            self.estimates.push(view.minimizer(t)?.clone());
            return Ok(self.oracle[t - 1].clone());
        }

        // Sliding window over s_{i−1..i−p}, newest first.
        let mut window: VecDeque<Vector> = (1..=p)
            .map(|j| {
                if revealed >= j {
                    self.oracle[revealed - j].clone()
                } else {
                    pre[j - revealed - 1].clone()
                }
            })
            .collect();
        let mut last = None;
        for i in (revealed + 1)..=t {
            let mem: Vec<&Vector> = window.iter().collect();
            let h = view.geometry(i)?;
            let v_est = estimate_minimizer(h, sw, &mem, self.lambda, &self.cfg)?;
            let f = HittingCost {
                geometry: h.clone(),
                minimizer: v_est.clone(),
            };
            let s_i = robd_minimize(&f, sw, &mem, self.lambda, 0.0, &self.cfg)
                .map_err(|e| e.with_context(format!("estimation step {i}")))?;
            window.pop_back();
            window.push_front(s_i);
            last = Some(v_est);
        }
        self.estimates.push(last.expect("estimation loop ran"));
        Ok(window.pop_front().expect("window is non-empty"))
    }
}

/// Output of [`run_irobd`].
#[derive(Debug, Clone)]
pub struct IrobdRun {
    pub trajectory: Trajectory,
    /// `ṽ_t` behind each decision (`v_t` itself when the delay is zero).
    pub estimates: Vec<Vector>,
    /// Undelayed ROBD decisions on the revealed prefix `1..=T−k`.
    pub oracle: Vec<Vector>,
}

pub fn run_irobd(inst: &Instance, lambda: f64, cfg: &SolverConfig) -> Result<IrobdRun> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("iROBD needs a positive weight, got {lambda}")));
    }
    let mut policy = Irobd::new(lambda, *cfg);
    let trajectory = run_policy(inst, &mut policy)?;
    Ok(IrobdRun {
        trajectory,
        estimates: policy.estimates,
        oracle: policy.oracle,
    })
}
