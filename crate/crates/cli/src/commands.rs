use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use irobd_core::algorithms::{run_delayed_m2m, run_irobd, run_robd, run_stay};
use irobd_core::bounds::{
    bound_cor1, bound_cor1_opt, bound_thm1, bound_thm2, lower_bound_thm3, robd_linear_ratio_prior, BoundValue,
};
use irobd_core::linalg::matrix_to_rows;
use irobd_core::model::json::DriftFile;
use irobd_core::model::{instance_from_json, instance_to_json, to_exact_string};
use irobd_core::offline::{
    solve_offline_convex, solve_offline_dp, solve_offline_multistart, solve_offline_with, GridSpec, OracleOptions,
};
use irobd_core::reductions::{reduce_linear, reduce_nonlinear, LinearSystemFile, NonlinearSystemFile};
use irobd_core::{evaluate_total, CostReport, Instance, SolverConfig, Trajectory, Vector};
use serde::Serialize;
use serde_json::json;

use crate::args::{Algorithm, BoundsArgs, GenArgs, OracleArg, OracleArgs, ReduceArgs, RunArgs, SystemKind, Which};

/// Writes `text` to `path`, or to stdout without a path.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                out.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    instance_from_json(&text).with_context(|| format!("loading instance {}", path.display()))
}

fn rows(points: &[Vector]) -> Vec<Vec<f64>> {
    points.iter().map(|p| p.iter().copied().collect()).collect()
}

pub fn cmd_gen(args: &GenArgs) -> Result<()> {
    let generated = args.params().generate()?;
    if let Some(path) = &args.reference {
        let Some(r2) = &generated.remark2 else {
            bail!("--reference is only available for the remark2 family");
        };
        let body = json!({ "label": r2.reference.label, "points": rows(&r2.reference.points) });
        emit(Some(path), &to_exact_string(&body)?)?;
    }
    emit(args.out.as_deref(), &instance_to_json(&generated.instance)?)
}

#[derive(Serialize)]
pub struct RunOutput {
    pub algorithm: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    pub trajectory: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimates: Option<Vec<Vec<f64>>>,
    pub cost: CostReport,
}

pub fn run_algorithm(inst: &Instance, alg: Algorithm, lambda: f64, lambda2: f64, cfg: &SolverConfig) -> Result<RunOutput> {
    let (traj, estimates) = match alg {
        Algorithm::Robd => (run_robd(inst, lambda, lambda2, cfg)?, None),
        Algorithm::Irobd => {
            let run = run_irobd(inst, lambda, cfg)?;
            (run.trajectory, Some(rows(&run.estimates)))
        }
        Algorithm::M2m => (run_delayed_m2m(inst)?, None),
        Algorithm::Stay => (run_stay(inst)?, None),
    };
    let weighted = matches!(alg, Algorithm::Robd | Algorithm::Irobd);
    Ok(RunOutput {
        algorithm: alg.as_str(),
        lambda: weighted.then_some(lambda),
        lambda2: (alg == Algorithm::Robd).then_some(lambda2),
        cost: evaluate_total(inst, &traj)?,
        trajectory: rows(&traj.points),
        estimates,
    })
}

pub fn cmd_run(args: &RunArgs, cfg: &SolverConfig) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    let out = run_algorithm(&inst, args.alg, args.lambda, args.lambda2, cfg)?;
    emit(args.out.as_deref(), &to_exact_string(&out)?)
}

#[derive(Serialize)]
pub struct OracleOutput {
    pub method: &'static str,
    pub exact: bool,
    pub cost: f64,
    pub trajectory: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<&'static str>,
}

pub const MULTISTART_NOTE: &str = "upper bound on ratio denominator uncertainty";

pub fn cmd_oracle(args: &OracleArgs, cfg: &SolverConfig) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    let grid = || match (args.lo, args.hi) {
        (Some(lo), Some(hi)) => GridSpec::new(lo, hi, args.cells),
        _ => Ok(GridSpec::auto(&inst, args.cells)),
    };
    let (method, exact, traj): (&'static str, bool, Trajectory) = match args.method {
        OracleArg::Auto => {
            let opts = OracleOptions {
                dp_cells_p1: args.cells,
                restarts: args.restarts,
                seed: args.seed,
                ..OracleOptions::default()
            };
            let sol = solve_offline_with(&inst, cfg, &opts)?;
            (sol.method.as_str(), sol.exact, sol.trajectory)
        }
        OracleArg::Convex => ("convex", true, solve_offline_convex(&inst, cfg)?),
        OracleArg::Dp => ("dp", true, solve_offline_dp(&inst, &grid()?)?),
        OracleArg::Multistart => ("multistart", false, solve_offline_multistart(&inst, args.restarts, args.seed, cfg)?),
    };
    let out = OracleOutput {
        method,
        exact,
        cost: evaluate_total(&inst, &traj)?.total,
        trajectory: rows(&traj.points),
        note: (!exact).then_some(MULTISTART_NOTE),
    };
    emit(args.out.as_deref(), &to_exact_string(&out)?)
}

pub fn cmd_reduce(args: &ReduceArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.system).with_context(|| format!("reading {}", args.system.display()))?;
    std::fs::create_dir_all(&args.out_dir)?;
    let (instance, recovery) = match args.kind {
        SystemKind::Linear => {
            let file: LinearSystemFile = serde_json::from_str(&text).context("parsing linear system")?;
            let sys = file.into_system()?;
            let red = reduce_linear(&sys)?;
            let recovery = json!({
                "kind": "linear",
                "indices": red.recovery.indices,
                "c": red.recovery.c.iter().map(matrix_to_rows).collect::<Vec<_>>(),
                "zeta": rows(&red.recovery.zeta),
                "offset": red.offset,
            });
            (red.instance, recovery)
        }
        SystemKind::Nonlinear => {
            let file: NonlinearSystemFile = serde_json::from_str(&text).context("parsing nonlinear system")?;
            let sys = file.into_system()?;
            let inst = reduce_nonlinear(&sys)?;
            let recovery = json!({
                "kind": "nonlinear",
                "A": matrix_to_rows(&sys.a),
                "drift": DriftFile::from(sys.drift),
                "x0": sys.x0.iter().copied().collect::<Vec<_>>(),
            });
            (inst, recovery)
        }
    };
    emit(Some(&args.out_dir.join("instance.json")), &instance_to_json(&instance)?)?;
    emit(Some(&args.out_dir.join("recovery.json")), &to_exact_string(&recovery)?)
}

fn bound_value(which: Which, args: &BoundsArgs) -> Result<BoundValue> {
    let lambda = match args.lambda {
        Some(l) => l,
        None => bound_cor1_opt(args.m, args.lip)?.0,
    };
    let v = match which {
        Which::Cor1 => BoundValue {
            name: "cor1",
            value: bound_cor1(args.m, args.lip, lambda)?,
            lambda: Some(lambda),
            exact: true,
        },
        Which::Cor1Opt => {
            let (lambda, value) = bound_cor1_opt(args.m, args.lip)?;
            BoundValue {
                name: "cor1_opt",
                value,
                lambda: Some(lambda),
                exact: true,
            }
        }
        Which::Thm1 => BoundValue {
            name: "thm1",
            value: bound_thm1(args.m, args.l, args.p, args.lip, args.k, lambda)?,
            lambda: Some(lambda),
            exact: false,
        },
        Which::Thm2 => BoundValue {
            name: "thm2",
            value: bound_thm2(args.m, args.l, args.alpha, args.k, lambda)?,
            lambda: Some(lambda),
            exact: false,
        },
        Which::Thm3 => BoundValue {
            name: "thm3_lower",
            value: lower_bound_thm3(args.m, args.alpha, args.k)?,
            lambda: None,
            exact: true,
        },
        Which::Prior => BoundValue {
            name: "robd_linear_prior",
            value: robd_linear_ratio_prior(args.m, args.alpha)?,
            lambda: None,
            exact: true,
        },
        Which::All => unreachable!("expanded by the caller"),
    };
    Ok(v)
}

pub fn cmd_bounds(args: &BoundsArgs) -> Result<()> {
    let body = if args.which == Which::All {
        let mut values = Vec::new();
        let mut skipped = Vec::new();
        for w in [Which::Cor1, Which::Cor1Opt, Which::Thm1, Which::Thm2, Which::Thm3, Which::Prior] {
            match bound_value(w, args) {
                Ok(v) => values.push(v),
                Err(e) => skipped.push(json!({ "which": format!("{w:?}").to_lowercase(), "reason": e.to_string() })),
            }
        }
        json!({ "bounds": values, "skipped": skipped })
    } else {
        json!({ "bounds": [bound_value(args.which, args)?] })
    };
    emit(args.out.as_deref(), &to_exact_string(&body)?)
}
