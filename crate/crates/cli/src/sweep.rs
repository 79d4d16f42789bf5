//! Grids of instances × algorithms × weights, one CSV row per run.
//!
//! A spec lists instance grids, algorithms and weights:
//!
//! ```json
//! {
//!   "instances": [
//!     { "family": "thm3", "m": 1.0, "alpha": 2.0, "k": [1, 2, 3, 4, 5] },
//!     { "family": "remark1", "m": [0.5, 2.0], "lipschitz": 0.3, "seed": [0, 1] }
//!   ],
//!   "algorithms": ["stay", "robd", "irobd"],
//!   "lambda": [0.5, "opt"]
//! }
//! ```
//!
//! Every array-valued parameter is an axis of the grid; the remaining keys
//! are fixed. `"opt"` picks the weight minimizing the single-step ROBD bound
//! for the instance's curvature and Lipschitz constant. Unweighted
//! algorithms run once per instance.

use std::io::Write;

use anyhow::{bail, Context, Result};
use irobd_core::bounds::{bound_cor1, bound_cor1_opt, bound_thm1, bound_thm2, lower_bound_thm3};
use irobd_core::instances::theorem3_adversary;
use irobd_core::model::ratio_of_totals;
use irobd_core::offline::{solve_offline_dp, solve_offline_with, GridSpec, OracleOptions};
use irobd_core::{evaluate_total, Instance, SolverConfig, Trajectory};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::args::Algorithm;
use crate::commands::run_algorithm;
use crate::family::{Family, FamilyParams, Generated};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub instances: Vec<Map<String, Value>>,
    #[serde(default)]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_lambdas")]
    pub lambda: Vec<LambdaChoice>,
    #[serde(default)]
    pub oracle: OracleSettings,
}

fn default_lambdas() -> Vec<LambdaChoice> {
    vec![LambdaChoice::Value(1.0)]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaChoice {
    Value(f64),
    Named(NamedLambda),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedLambda {
    Opt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSettings {
    pub dp_cells: usize,
    pub dp_cells_p2: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        let d = OracleOptions::default();
        Self {
            dp_cells: d.dp_cells_p1,
            dp_cells_p2: d.dp_cells_p2,
            restarts: d.restarts,
            seed: d.seed,
        }
    }
}

/// One grid point: the parameter map as written and its parsed form.
#[derive(Debug, Clone)]
pub struct GridPoint {
    pub raw: Map<String, Value>,
    pub params: std::result::Result<FamilyParams, String>,
}

/// Cartesian product of every array-valued entry, in key order.
pub fn expand(grid: &Map<String, Value>) -> Vec<GridPoint> {
    let mut points = vec![Map::new()];
    for (key, value) in grid {
        let choices: Vec<Value> = match value {
            Value::Array(xs) => xs.clone(),
            other => vec![other.clone()],
        };
        points = points
            .into_iter()
            .flat_map(|p| {
                choices.iter().map(move |c| {
                    let mut q = p.clone();
                    q.insert(key.clone(), c.clone());
                    q
                })
            })
            .collect();
    }
    points
        .into_iter()
        .map(|raw| {
            let params = serde_json::from_value(Value::Object(raw.clone())).map_err(|e| e.to_string());
            GridPoint { raw, params }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub row: usize,
    pub family: String,
    pub seed: String,
    pub params: String,
    pub algorithm: String,
    pub lambda: Option<f64>,
    pub cost_alg: Option<f64>,
    pub cost_opt: Option<f64>,
    pub oracle: String,
    pub oracle_exact: Option<bool>,
    pub ratio: Option<f64>,
    pub bound_name: String,
    pub bound_kind: String,
    pub bound: Option<f64>,
    pub bound_ok: Option<bool>,
    pub error: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// The ratio must not exceed the bound.
    Upper,
    /// The ratio must reach the bound.
    Lower,
    /// Expression inside an `O(·)`; reported, not checked.
    Shape,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::Upper => "upper",
            BoundKind::Lower => "lower",
            BoundKind::Shape => "shape",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "upper" => Some(BoundKind::Upper),
            "lower" => Some(BoundKind::Lower),
            "shape" => Some(BoundKind::Shape),
            _ => None,
        }
    }
}

/// Pass/fail rule shared by the sweep and `verify --sweep`.
pub fn bound_holds(name: &str, kind: BoundKind, ratio: f64, bound: f64) -> Option<bool> {
    match kind {
        BoundKind::Upper => Some(ratio <= bound + 1e-6),
        BoundKind::Lower if name == "remark2_gap" => Some(ratio >= 0.99 * bound),
        BoundKind::Lower => Some(ratio >= bound * (1.0 - 1e-9)),
        BoundKind::Shape => None,
    }
}

struct Comparator {
    trajectory: Trajectory,
    method: &'static str,
    exact: bool,
}

fn comparator(g: &Generated, params: &FamilyParams, cfg: &SolverConfig, oracle: &OracleSettings) -> Result<Comparator> {
    if params.family == Family::Thm3 {
        return Ok(Comparator {
            trajectory: theorem3_adversary(&g.instance),
            method: "adversary",
            exact: false,
        });
    }
    if let Some(r2) = &g.remark2 {
        let sc = 2f64.sqrt();
        let hi = (r2.n as f64 * r2.eps + 2.0 * r2.gamma * r2.eps) * sc;
        let grid = GridSpec::new(-0.2 * sc, hi, 4001)?;
        return Ok(Comparator {
            trajectory: solve_offline_dp(&g.instance, &grid)?,
            method: "dp",
            exact: true,
        });
    }
    let opts = OracleOptions {
        dp_cells_p1: oracle.dp_cells,
        dp_cells_p2: oracle.dp_cells_p2,
        restarts: oracle.restarts,
        seed: oracle.seed,
    };
    let sol = solve_offline_with(&g.instance, cfg, &opts)?;
    Ok(Comparator {
        trajectory: sol.trajectory,
        method: sol.method.as_str(),
        exact: sol.exact,
    })
}

/// `(m, L)` entering the single-step ROBD bound, where `Lip(δ) = 1 + L`.
fn cor1_params(inst: &Instance, params: &FamilyParams) -> (f64, f64) {
    if params.family == Family::Remark1 {
        (params.m, params.lipschitz)
    } else {
        let (m, _) = inst.curvature_bounds();
        (m, (inst.switching().lipschitz_max() - 1.0).max(0.0))
    }
}

fn resolve_lambda(choice: LambdaChoice, inst: &Instance, params: &FamilyParams) -> Result<f64> {
    match choice {
        LambdaChoice::Value(x) => Ok(x),
        LambdaChoice::Named(NamedLambda::Opt) => {
            let (m, l) = cor1_params(inst, params);
            Ok(bound_cor1_opt(m, l)?.0)
        }
    }
}

/// A weight outside a bound's admissible range leaves no guarantee.
fn vacuous(b: irobd_core::Result<f64>) -> irobd_core::Result<f64> {
    match b {
        Err(irobd_core::Error::InvalidArgument(msg)) if msg.contains("admissible") => Ok(f64::INFINITY),
        other => other,
    }
}

fn applicable_bound(
    inst: &Instance,
    params: &FamilyParams,
    alg: Algorithm,
    lambda: f64,
) -> Result<Option<(&'static str, BoundKind, f64)>> {
    let weighted = matches!(alg, Algorithm::Robd | Algorithm::Irobd);
    let bound = match params.family {
        Family::Thm3 if alg == Algorithm::Stay => {
            Some(("thm3_lower", BoundKind::Lower, lower_bound_thm3(params.m, params.alpha, params.delay())?))
        }
        Family::Remark1 if weighted && inst.delay() == 0 => {
            let (m, l) = cor1_params(inst, params);
            Some(("cor1", BoundKind::Upper, vacuous(bound_cor1(m, l, lambda))?))
        }
        Family::Remark2 if weighted => Some(("remark2_gap", BoundKind::Lower, 2.0 / (3.0 * params.gamma))),
        _ if weighted => {
            let (m, l) = inst.curvature_bounds();
            let sw = inst.switching();
            match sw.alpha() {
                Some(alpha) => Some(("thm2", BoundKind::Shape, vacuous(bound_thm2(m, l, alpha, inst.delay(), lambda))?)),
                None => Some((
                    "thm1",
                    BoundKind::Shape,
                    vacuous(bound_thm1(m, l, inst.p(), sw.lipschitz_max(), inst.delay(), lambda))?,
                )),
            }
        }
        _ => None,
    };
    Ok(bound)
}

fn describe(raw: &Map<String, Value>) -> (String, String, String) {
    let family = raw.get("family").and_then(Value::as_str).unwrap_or("").to_string();
    let seed = raw.get("seed").map(Value::to_string).unwrap_or_default();
    let params = raw
        .iter()
        .filter(|(k, _)| k.as_str() != "family" && k.as_str() != "seed")
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";");
    (family, seed, params)
}

fn instance_rows(point: &GridPoint, spec: &SweepSpec, cfg: &SolverConfig) -> Vec<Row> {
    let (family, seed, params_text) = describe(&point.raw);
    let blank = |algorithm: &str, lambda: Option<f64>, error: String| Row {
        row: 0,
        family: family.clone(),
        seed: seed.clone(),
        params: params_text.clone(),
        algorithm: algorithm.to_string(),
        lambda,
        cost_alg: None,
        cost_opt: None,
        oracle: String::new(),
        oracle_exact: None,
        ratio: None,
        bound_name: String::new(),
        bound_kind: String::new(),
        bound: None,
        bound_ok: None,
        error,
    };
    let runs: Vec<(Algorithm, Option<LambdaChoice>)> = spec
        .algorithms
        .iter()
        .flat_map(|&alg| {
            if matches!(alg, Algorithm::Robd | Algorithm::Irobd) {
                spec.lambda.iter().map(|&l| (alg, Some(l))).collect::<Vec<_>>()
            } else {
                vec![(alg, None)]
            }
        })
        .collect();
    let fail_all = |msg: String| -> Vec<Row> {
        runs.iter().map(|(alg, _)| blank(alg.as_str(), None, msg.clone())).collect()
    };

    let params = match &point.params {
        Ok(p) => p,
        Err(e) => return fail_all(format!("bad parameters: {e}")),
    };
    let generated = match params.generate() {
        Ok(g) => g,
        Err(e) => return fail_all(format!("generation failed: {e}")),
    };
    let inst = &generated.instance;
    let cmp = comparator(&generated, params, cfg, &spec.oracle).and_then(|c| {
        let cost = evaluate_total(inst, &c.trajectory)?.total;
        Ok((c, cost))
    });

    runs.iter()
        .map(|&(alg, choice)| {
            let lambda = match choice.map(|c| resolve_lambda(c, inst, params)).transpose() {
                Ok(l) => l,
                Err(e) => return blank(alg.as_str(), None, e.to_string()),
            };
            let mut row = blank(alg.as_str(), lambda, String::new());
            let (c, opt) = match &cmp {
                Ok(x) => x,
                Err(e) => {
                    row.error = format!("oracle failed: {e}");
                    return row;
                }
            };
            row.oracle = c.method.to_string();
            row.oracle_exact = Some(c.exact);
            row.cost_opt = Some(*opt);
            let run = match run_algorithm(inst, alg, lambda.unwrap_or(1.0), 0.0, cfg) {
                Ok(r) => r,
                Err(e) => {
                    row.error = e.to_string();
                    return row;
                }
            };
            let cost = run.cost.total;
            row.cost_alg = Some(cost);
            let ratio = ratio_of_totals(cost, *opt).unwrap_or(f64::INFINITY);
            row.ratio = Some(ratio);
            match applicable_bound(inst, params, alg, lambda.unwrap_or(1.0)) {
                Ok(Some((name, kind, value))) => {
                    row.bound_name = name.to_string();
                    row.bound_kind = kind.as_str().to_string();
                    row.bound = Some(value);
                    row.bound_ok = bound_holds(name, kind, ratio, value);
                }
                Ok(None) => {}
                Err(e) => row.error = format!("bound: {e}"),
            }
            row
        })
        .collect()
}

/// Runs every row. Rows are computed in parallel and numbered in grid order.
pub fn run_sweep(spec: &SweepSpec, cfg: &SolverConfig) -> Vec<Row> {
    let points: Vec<GridPoint> = spec.instances.iter().flat_map(expand).collect();
    let nested: Vec<Vec<Row>> = points.par_iter().map(|p| instance_rows(p, spec, cfg)).collect();
    let mut rows: Vec<Row> = nested.into_iter().flatten().collect();
    for (i, r) in rows.iter_mut().enumerate() {
        r.row = i;
    }
    rows
}

pub const HEADER: [&str; 16] = [
    "row",
    "family",
    "seed",
    "params",
    "algorithm",
    "lambda",
    "cost_alg",
    "cost_opt",
    "oracle",
    "oracle_exact",
    "ratio",
    "bound_name",
    "bound_kind",
    "bound",
    "bound_ok",
    "error",
];

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(text: &str) -> Result<Vec<Row>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let headers = rd.headers()?.clone();
    if headers.iter().ne(HEADER) {
        bail!("not a sweep table: unexpected header {:?}", headers.iter().collect::<Vec<_>>());
    }
    rd.deserialize()
        .enumerate()
        .map(|(i, r)| r.with_context(|| format!("sweep table line {}", i + 2)))
        .collect()
}

pub fn load_spec(path: &std::path::Path) -> Result<SweepSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing sweep spec {}", path.display()))
}
