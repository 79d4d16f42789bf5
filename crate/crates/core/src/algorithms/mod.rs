//! Online policies and the round-by-round delayed-information protocol.

mod baselines;
mod irobd;
mod robd;
mod sweep;

pub use baselines::{run_delayed_m2m, run_stay, DelayedM2m, Stay};
pub use irobd::{run_irobd, Irobd, IrobdRun};
pub use robd::{run_robd, Robd};
pub use sweep::{delay_sweep, DelaySweep};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::model::{memory, Geometry, Instance, SwitchingCost, Trajectory};

/// What the learner may see when acting at round `t`: geometries `h_1..h_t`,
/// minimizers `v_1..v_{t−k}` and its own past decisions. Reads outside that
/// window fail with [`Error::ProtocolViolation`].
pub struct RoundView<'a> {
    t: usize,
    k: usize,
    geometries: &'a [Geometry],
    minimizers: &'a [Vector],
    decisions: &'a [Vector],
    switching: &'a SwitchingCost,
    prehistory: &'a [Vector],
}

impl<'a> RoundView<'a> {
    /// `geometries` and `minimizers` may be longer than what round `t`
    /// allows; the view clips them.
    pub fn new(
        t: usize,
        k: usize,
        geometries: &'a [Geometry],
        minimizers: &'a [Vector],
        decisions: &'a [Vector],
        switching: &'a SwitchingCost,
        prehistory: &'a [Vector],
    ) -> Self {
        let revealed = t.saturating_sub(k).min(minimizers.len());
        Self {
            t,
            k,
            geometries: &geometries[..t.min(geometries.len())],
            minimizers: &minimizers[..revealed],
            decisions: &decisions[..(t - 1).min(decisions.len())],
            switching,
            prehistory,
        }
    }

    pub fn round(&self) -> usize {
        self.t
    }

    pub fn delay(&self) -> usize {
        self.k
    }

    /// Number of minimizers visible this round.
    pub fn revealed(&self) -> usize {
        self.minimizers.len()
    }

    pub fn geometry(&self, s: usize) -> Result<&'a Geometry> {
        if s == 0 || s > self.geometries.len() {
            return Err(Error::ProtocolViolation {
                round: self.t,
                detail: format!("geometry h_{s} is not available"),
            });
        }
        Ok(&self.geometries[s - 1])
    }

    pub fn minimizer(&self, s: usize) -> Result<&'a Vector> {
        if s == 0 || s > self.minimizers.len() {
            return Err(Error::ProtocolViolation {
                round: self.t,
                detail: format!("minimizer v_{s} is not revealed (delay {})", self.k),
            });
        }
        Ok(&self.minimizers[s - 1])
    }

    pub fn switching(&self) -> &'a SwitchingCost {
        self.switching
    }

    pub fn prehistory(&self) -> &'a [Vector] {
        self.prehistory
    }

    /// The learner's own decisions `y_1..y_{t−1}`.
    pub fn decisions(&self) -> &'a [Vector] {
        self.decisions
    }

    /// `[y_{t−1}, …, y_{t−p}]` from past decisions and prehistory.
    pub fn memory(&self) -> Vec<&'a Vector> {
        memory(self.t, self.switching.p(), self.decisions, self.prehistory)
    }
}

pub trait OnlinePolicy {
    fn label(&self) -> String;

    fn act(&mut self, view: &RoundView<'_>) -> Result<Vector>;
}

/// Plays `policy` on `inst` under the instance's delay.
pub fn run_policy<P: OnlinePolicy + ?Sized>(inst: &Instance, policy: &mut P) -> Result<Trajectory> {
    let geometries = inst.geometries();
    let minimizers = inst.minimizers();
    let mut decisions: Vec<Vector> = Vec::with_capacity(inst.horizon());
    for t in 1..=inst.horizon() {
        let view = RoundView::new(
            t,
            inst.delay(),
            &geometries,
            &minimizers,
            &decisions,
            inst.switching(),
            inst.prehistory(),
        );
        let y = policy.act(&view).map_err(|e| e.with_context(format!("round {t}")))?;
        if y.len() != inst.dim() || !y.iter().all(|x| x.is_finite()) {
            return Err(Error::invalid(format!("policy produced an invalid point at round {t}")));
        }
        decisions.push(y);
    }
    Ok(Trajectory::new(decisions, policy.label()))
}
