use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::model::{HittingCost, Instance, Trajectory};
use crate::prox::{robd_minimize, SolverConfig};

use super::{run_policy, OnlinePolicy, RoundView};

/// Regularized online balanced descent. Needs `v_t` when acting at `t`.
#[derive(Debug, Clone)]
pub struct Robd {
    pub lambda1: f64,
    pub lambda2: f64,
    pub cfg: SolverConfig,
}

impl Robd {
    pub fn new(lambda1: f64, lambda2: f64, cfg: SolverConfig) -> Self {
        Self { lambda1, lambda2, cfg }
    }
}

impl OnlinePolicy for Robd {
    fn label(&self) -> String {
        "robd".into()
    }

    fn act(&mut self, view: &RoundView<'_>) -> Result<Vector> {
        let t = view.round();
        let f = HittingCost {
            geometry: view.geometry(t)?.clone(),
            minimizer: view.minimizer(t)?.clone(),
        };
        robd_minimize(&f, view.switching(), &view.memory(), self.lambda1, self.lambda2, &self.cfg)
    }
}

pub fn run_robd(inst: &Instance, lambda1: f64, lambda2: f64, cfg: &SolverConfig) -> Result<Trajectory> {
    if inst.delay() != 0 {
        return Err(Error::invalid(format!(
            "ROBD needs undelayed minimizers, instance has delay {}",
            inst.delay()
        )));
    }
    run_policy(inst, &mut Robd::new(lambda1, lambda2, *cfg))
}
