use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::model::{Instance, Trajectory};

use super::{run_policy, OnlinePolicy, RoundView};

/// Move to the latest revealed minimizer: `y_t = y_0` for `t ≤ k`, else `v_{t−k}`.
#[derive(Debug, Clone, Default)]
pub struct DelayedM2m;

impl OnlinePolicy for DelayedM2m {
    fn label(&self) -> String {
        "m2m".into()
    }

    fn act(&mut self, view: &RoundView<'_>) -> Result<Vector> {
        let t = view.round();
        let k = view.delay();
        if t <= k {
            Ok(view.prehistory()[0].clone())
        } else {
            view.minimizer(t - k).cloned()
        }
    }
}

/// Never moves from `y_0`.
#[derive(Debug, Clone, Default)]
pub struct Stay;

impl OnlinePolicy for Stay {
    fn label(&self) -> String {
        "stay".into()
    }

    fn act(&mut self, view: &RoundView<'_>) -> Result<Vector> {
        Ok(view.prehistory()[0].clone())
    }
}

pub fn run_delayed_m2m(inst: &Instance) -> Result<Trajectory> {
    if !inst.switching().is_soco() {
        return Err(Error::invalid(
            "delayed move-to-minimizer is only analysed for p = 1 with identity switching",
        ));
    }
    run_policy(inst, &mut DelayedM2m)
}

pub fn run_stay(inst: &Instance) -> Result<Trajectory> {
    run_policy(inst, &mut Stay)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::model::{evaluate_total, HittingCost, SwitchingCost};

    fn scalar(v: &[f64], k: usize, sw: SwitchingCost) -> Instance {
        let costs = v.iter().map(|&x| HittingCost::isotropic(1.0, Vector::from_element(1, x)).unwrap()).collect();
        Instance::new(1, k, costs, sw, None).unwrap()
    }

    #[test]
    fn m2m_lags_by_delay() {
        let inst = scalar(&[1.0, 2.0, 3.0, 4.0], 2, SwitchingCost::soco(1));
        let y: Vec<f64> = run_delayed_m2m(&inst).unwrap().points.iter().map(|p| p[0]).collect();
        assert_eq!(y, vec![0.0, 0.0, 1.0, 2.0]);
        let y: Vec<f64> = run_delayed_m2m(&inst.with_delay(0)).unwrap().points.iter().map(|p| p[0]).collect();
        assert_eq!(y, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn m2m_requires_soco() {
        let sw = SwitchingCost::linear(vec![Matrix::from_element(1, 1, 2.0)]).unwrap();
        assert!(run_delayed_m2m(&scalar(&[1.0], 0, sw)).is_err());
    }

    #[test]
    fn stay_costs() {
        let inst = scalar(&[0.0, 0.0], 1, SwitchingCost::soco(1));
        assert_eq!(evaluate_total(&inst, &run_stay(&inst).unwrap()).unwrap().total, 0.0);
        let costs = (1..=2)
            .map(|t| HittingCost::isotropic(2.0, Vector::from_element(1, 2f64.powi(t - 1))).unwrap())
            .collect();
        let sw = SwitchingCost::linear(vec![Matrix::from_element(1, 1, 2.0)]).unwrap();
        let inst = Instance::new(1, 2, costs, sw, None).unwrap();
        assert!((evaluate_total(&inst, &run_stay(&inst).unwrap()).unwrap().total - 5.0).abs() < 1e-12);
    }
}
