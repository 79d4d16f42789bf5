use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Vector};
use crate::model::hitting::{Geometry, HittingCost};
use crate::model::switching::SwitchingCost;

/// A full delayed-feedback problem.
#[derive(Debug, Clone)]
pub struct Instance {
    d: usize,
    k: usize,
    costs: Vec<HittingCost>,
    switching: SwitchingCost,
    /// `[y_0, y_{−1}, …, y_{−p+1}]`.
    prehistory: Vec<Vector>,
}

impl Instance {
    /// Builds and validates an instance. Missing prehistory defaults to zeros.
    pub fn new(
        d: usize,
        k: usize,
        costs: Vec<HittingCost>,
        switching: SwitchingCost,
        prehistory: Option<Vec<Vector>>,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if costs.is_empty() {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        for (t, c) in costs.iter().enumerate() {
            if c.dim() != d {
                return Err(Error::invalid(format!(
                    "cost {} has dimension {}, expected {d}",
                    t + 1,
                    c.dim()
                )));
            }
        }
        switching.delta().validate(d)?;
        let p = switching.p();
        let probe = Vector::zeros(d);
        let window: Vec<&Vector> = (0..p).map(|_| &probe).collect();
        if switching.apply(&window).len() != d {
            return Err(Error::invalid("switching map does not act on the instance dimension"));
        }
        let prehistory = prehistory.unwrap_or_else(|| vec![Vector::zeros(d); p]);
        if prehistory.len() != p {
            return Err(Error::invalid(format!(
                "prehistory has {} points, expected p = {p}",
                prehistory.len()
            )));
        }
        if prehistory.iter().any(|y| y.len() != d || !linalg::all_finite(y)) {
            return Err(Error::invalid("prehistory points must be finite with dimension d"));
        }
        Ok(Self {
            d,
            k,
            costs,
            switching,
            prehistory,
        })
    }

    pub fn horizon(&self) -> usize {
        self.costs.len()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn delay(&self) -> usize {
        self.k
    }

    pub fn costs(&self) -> &[HittingCost] {
        &self.costs
    }

    /// `f_t` for `t` in `1..=T`.
    pub fn cost(&self, t: usize) -> &HittingCost {
        &self.costs[t - 1]
    }

    pub fn switching(&self) -> &SwitchingCost {
        &self.switching
    }

    pub fn prehistory(&self) -> &[Vector] {
        &self.prehistory
    }

    pub fn p(&self) -> usize {
        self.switching.p()
    }

    /// `y_0`.
    pub fn start(&self) -> &Vector {
        &self.prehistory[0]
    }

    pub fn geometries(&self) -> Vec<Geometry> {
        self.costs.iter().map(|c| c.geometry.clone()).collect()
    }

    pub fn minimizers(&self) -> Vec<Vector> {
        self.costs.iter().map(|c| c.minimizer.clone()).collect()
    }

    /// Global `(m, l)` over all hitting costs.
    pub fn curvature_bounds(&self) -> (f64, f64) {
        self.costs.iter().fold((f64::INFINITY, 0.0), |(lo, hi), c| {
            let (m, l) = c.geometry.bounds();
            (lo.min(m), hi.max(l))
        })
    }

    /// Same instance under a different delay.
    pub fn with_delay(&self, k: usize) -> Self {
        Self { k, ..self.clone() }
    }

    /// Same instance with different minimizers.
    pub fn with_minimizers(&self, v: Vec<Vector>) -> Result<Self> {
        if v.len() != self.horizon() {
            return Err(Error::invalid("minimizer count differs from horizon"));
        }
        let costs = self
            .costs
            .iter()
            .zip(v)
            .map(|(c, v)| HittingCost::new(c.geometry.clone(), v))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.d, self.k, costs, self.switching.clone(), Some(self.prehistory.clone()))
    }

    pub fn with_prehistory(&self, prehistory: Vec<Vector>) -> Result<Self> {
        Self::new(self.d, self.k, self.costs.clone(), self.switching.clone(), Some(prehistory))
    }

    pub fn truncated(&self, horizon: usize) -> Result<Self> {
        if horizon == 0 || horizon > self.horizon() {
            return Err(Error::invalid("truncation horizon out of range"));
        }
        Self::new(
            self.d,
            self.k,
            self.costs[..horizon].to_vec(),
            self.switching.clone(),
            Some(self.prehistory.clone()),
        )
    }
}

/// `[y_{t−1}, …, y_{t−p}]` for round `t ≥ 1`, where `points[s−1] = y_s` and
/// indices `≤ 0` come from the prehistory.
pub fn memory<'a>(t: usize, p: usize, points: &'a [Vector], prehistory: &'a [Vector]) -> Vec<&'a Vector> {
    (1..=p)
        .map(|i| if t > i { &points[t - i - 1] } else { &prehistory[i - t] })
        .collect()
}

/// Decisions `y_1..y_T` with an algorithm tag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    #[serde(serialize_with = "crate::model::json::serialize_points")]
    pub points: Vec<Vector>,
    pub label: String,
}

impl Trajectory {
    pub fn new(points: Vec<Vector>, label: impl Into<String>) -> Self {
        Self {
            points,
            label: label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest coordinate gap to another trajectory.
    pub fn max_gap(&self, other: &Trajectory) -> f64 {
        self.points
            .iter()
            .zip(&other.points)
            .map(|(a, b)| (a - b).amax())
            .fold(0.0, f64::max)
    }
}

/// Per-step hitting and switching costs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub hitting: Vec<f64>,
    pub switching: Vec<f64>,
    pub total: f64,
}

impl CostReport {
    pub fn hitting_total(&self) -> f64 {
        self.hitting.iter().sum()
    }

    pub fn switching_total(&self) -> f64 {
        self.switching.iter().sum()
    }
}

/// Evaluates `Σ f_t(y_t) + c(y_{t:t−p})`.
pub fn evaluate_total(inst: &Instance, traj: &Trajectory) -> Result<CostReport> {
    let t_len = inst.horizon();
    if traj.len() != t_len {
        return Err(Error::invalid(format!(
            "trajectory has {} points, horizon is {t_len}",
            traj.len()
        )));
    }
    let d = inst.dim();
    for (t, y) in traj.points.iter().enumerate() {
        if y.len() != d {
            return Err(Error::invalid(format!("point {} has dimension {}, expected {d}", t + 1, y.len())));
        }
        if !linalg::all_finite(y) {
            return Err(Error::invalid(format!("point {} is not finite", t + 1)));
        }
    }
    let p = inst.p();
    let mut hitting = Vec::with_capacity(t_len);
    let mut switching = Vec::with_capacity(t_len);
    for t in 1..=t_len {
        let y = &traj.points[t - 1];
        hitting.push(inst.cost(t).eval(y));
        let mem = memory(t, p, &traj.points, inst.prehistory());
        switching.push(inst.switching().cost(y, &mem));
    }
    let total = hitting.iter().zip(&switching).map(|(h, m)| h + m).sum();
    Ok(CostReport {
        hitting,
        switching,
        total,
    })
}

/// `cost(ALG) / cost(OPT)`, with `0/0 = 1`.
pub fn competitive_ratio(alg: &CostReport, opt: &CostReport) -> Result<f64> {
    ratio_of_totals(alg.total, opt.total)
}

pub fn ratio_of_totals(alg_total: f64, opt_total: f64) -> Result<f64> {
    if opt_total > 0.0 {
        Ok(alg_total / opt_total)
    } else if alg_total > 0.0 {
        Err(Error::UnboundedRatio { alg_total })
    } else {
        Ok(1.0)
    }
}
