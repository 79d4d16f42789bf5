use anyhow::{Context, Result};
use irobd_core::algorithms::{delay_sweep, run_delayed_m2m, run_irobd, run_robd, run_stay};
use irobd_core::offline::{solve_offline, solve_offline_convex, solve_offline_dp, solve_offline_multistart, GridSpec};
use irobd_core::reductions::{
    roundtrip_verify, roundtrip_verify_nonlinear, LinearSystemFile, NonlinearSystemFile,
};
use irobd_core::verify::{audit_lemma1, audit_lemma1_unsquared, audit_lemma2, audit_lemma3, audit_m2m, Audit};
use irobd_core::{evaluate_total, Error, Instance, SolverConfig, Trajectory, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::{SystemKind, VerifyArgs};
use crate::commands::load_instance;
use crate::sweep::{bound_holds, read_csv, BoundKind};

const STEP_TOL: f64 = 1e-8;
const SUM_TOL: f64 = 1e-6;
const ORACLE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delay: Option<usize>,
}

impl CheckResult {
    fn new(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            detail: detail.into(),
            step: None,
            delay: None,
        }
    }

    fn skipped(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: Status::Skipped,
            detail: reason.into(),
            step: None,
            delay: None,
        }
    }

    fn from_audit(audit: &Audit, tol: f64) -> Self {
        match audit.first_violation(tol) {
            None => {
                let detail = if audit.checks.is_empty() {
                    "no applicable steps".to_string()
                } else {
                    format!("{} checks, min slack {:.3e}", audit.checks.len(), audit.min_slack())
                };
                Self::new(&audit.name, true, detail)
            }
            Some(c) => Self {
                name: audit.name.clone(),
                status: Status::Fail,
                detail: format!("lhs {:.6e} exceeds rhs {:.6e} (slack {:.3e})", c.lhs, c.rhs, c.slack),
                step: Some(c.step),
                delay: Some(c.delay),
            },
        }
    }

    fn from_error(name: &str, err: &Error) -> Self {
        match err {
            Error::Unsupported(msg) | Error::InvalidArgument(msg) => Self::skipped(name, msg.clone()),
            Error::VerificationFailure { step, detail } => Self {
                name: name.to_string(),
                status: Status::Fail,
                detail: detail.clone(),
                step: Some(*step),
                delay: None,
            },
            other => Self::new(name, false, other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl Report {
    fn new(checks: Vec<CheckResult>) -> Self {
        Self {
            passed: checks.iter().all(|c| c.status != Status::Fail),
            checks,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }
}

fn cost(inst: &Instance, traj: &Trajectory) -> Result<f64> {
    Ok(evaluate_total(inst, traj)?.total)
}

fn push_audit(out: &mut Vec<CheckResult>, name: &str, audit: irobd_core::Result<Audit>, tol: f64) {
    out.push(match audit {
        Ok(a) => CheckResult::from_audit(&a, tol),
        Err(e) => CheckResult::from_error(name, &e),
    });
}

/// Every inequality that applies to `inst`, run with weight `lambda`.
pub fn verify_instance(inst: &Instance, lambda: f64, tol: Option<f64>, cfg: &SolverConfig) -> Result<Report> {
    let step_tol = tol.unwrap_or(STEP_TOL);
    let sum_tol = tol.unwrap_or(SUM_TOL);
    let mut checks = Vec::new();

    let sweep = delay_sweep(inst, lambda, cfg)?;
    push_audit(&mut checks, "delay distance (squared)", audit_lemma1(inst, &sweep), step_tol);
    push_audit(&mut checks, "delay distance", audit_lemma1_unsquared(inst, &sweep), step_tol);
    push_audit(&mut checks, "delay distance (linear)", audit_lemma3(inst, &sweep), step_tol);

    let opt = solve_offline(inst, cfg)?;
    let undelayed = inst.with_delay(0);
    let robd = run_robd(&undelayed, lambda, 0.0, cfg)?;
    push_audit(&mut checks, "ROBD against comparator", audit_lemma2(&undelayed, &robd, &opt.trajectory, lambda), sum_tol);

    match audit_m2m(inst, &opt.trajectory) {
        Ok(audits) => checks.extend(audits.iter().map(|a| CheckResult::from_audit(a, sum_tol))),
        Err(e) => checks.push(CheckResult::from_error("move-to-minimizer bounds", &e)),
    }

    checks.push(oracle_agreement(inst, cfg)?);

    let mut algs = vec![run_stay(inst)?, run_irobd(inst, lambda, cfg)?.trajectory];
    if inst.switching().is_soco() {
        algs.push(run_delayed_m2m(inst)?);
    }
    if inst.delay() == 0 {
        algs.push(robd);
    }
    let mut worst = f64::INFINITY;
    let mut beaten = None;
    for t in &algs {
        let gap = cost(inst, t)? - opt.cost;
        if gap < worst {
            worst = gap;
        }
        if gap < -1e-8 && beaten.is_none() {
            beaten = Some(t.label.clone());
        }
    }
    checks.push(match beaten {
        None => CheckResult::new(
            "oracle dominance",
            true,
            format!("{} ({}) below {} algorithms, min margin {worst:.3e}", opt.method.as_str(), opt.cost, algs.len()),
        ),
        Some(label) => CheckResult::new("oracle dominance", false, format!("{label} is cheaper than the oracle by {:.3e}", -worst)),
    });
    Ok(Report::new(checks))
}

fn oracle_agreement(inst: &Instance, cfg: &SolverConfig) -> Result<CheckResult> {
    const NAME: &str = "oracle agreement";
    if inst.dim() != 1 || inst.p() != 1 || !inst.switching().is_linear() {
        return Ok(CheckResult::skipped(NAME, "needs a scalar instance with a linear one-step map"));
    }
    let convex = cost(inst, &solve_offline_convex(inst, cfg)?)?;
    let values: Vec<f64> = inst.minimizers().iter().chain(inst.prehistory()).map(|v| v[0]).collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let margin = (0.5 * (hi - lo)).max(1.0);
    let dp = cost(inst, &solve_offline_dp(inst, &GridSpec::new(lo - margin, hi + margin, 8001)?)?)?;
    let multi = cost(inst, &solve_offline_multistart(inst, 8, 0, cfg)?)?;
    let gap = (convex - dp).abs().max((convex - multi).abs());
    Ok(CheckResult::new(
        NAME,
        gap <= ORACLE_TOL,
        format!("convex {convex}, dp {dp}, multistart {multi}"),
    ))
}

/// Cost equivalence of the reduction on random decision sequences.
pub fn verify_system(text: &str, kind: SystemKind, samples: usize, seed: u64, tol: Option<f64>) -> Result<Report> {
    let tol = tol.unwrap_or(STEP_TOL);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |dim: usize, horizon: usize| -> Trajectory {
        let points = (0..horizon)
            .map(|_| Vector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0)))
            .collect();
        Trajectory::new(points, "random")
    };
    let name = "reduction cost equivalence";
    let mut worst = 0.0f64;
    let mut failure = None;
    match kind {
        SystemKind::Linear => {
            let file: LinearSystemFile = serde_json::from_str(text).context("parsing linear system")?;
            let sys = file.into_system()?;
            sys.validate()?;
            for _ in 0..samples {
                let traj = draw(sys.b.ncols(), sys.horizon());
                match roundtrip_verify(&sys, &traj, tol) {
                    Ok(r) => worst = worst.max(r.rel_diff),
                    Err(e) => {
                        failure = Some(CheckResult::from_error(name, &e));
                        break;
                    }
                }
            }
        }
        SystemKind::Nonlinear => {
            let file: NonlinearSystemFile = serde_json::from_str(text).context("parsing nonlinear system")?;
            let sys = file.into_system()?;
            for _ in 0..samples {
                let traj = draw(sys.a.nrows(), sys.horizon());
                match roundtrip_verify_nonlinear(&sys, &traj, tol) {
                    Ok(r) => worst = worst.max(r.rel_diff),
                    Err(e) => {
                        failure = Some(CheckResult::from_error(name, &e));
                        break;
                    }
                }
            }
        }
    }
    let check = failure.unwrap_or_else(|| {
        CheckResult::new(name, true, format!("{samples} sequences, max relative gap {worst:.3e}"))
    });
    Ok(Report::new(vec![check]))
}

/// Re-derives every ratio and bound verdict of a sweep table.
pub fn verify_sweep(text: &str) -> Result<Report> {
    let rows = read_csv(text)?;
    let mut checks = Vec::new();
    for r in &rows {
        let name = format!("row {} ({} {} {})", r.row, r.family, r.algorithm, r.params);
        if !r.error.is_empty() {
            checks.push(CheckResult::skipped(name, r.error.clone()));
            continue;
        }
        let (Some(alg), Some(opt), Some(ratio)) = (r.cost_alg, r.cost_opt, r.ratio) else {
            checks.push(CheckResult::new(name, false, "missing cost or ratio"));
            continue;
        };
        let expected = irobd_core::model::ratio_of_totals(alg, opt).unwrap_or(f64::INFINITY);
        let consistent = ratio == expected || (ratio - expected).abs() <= 1e-12 * expected.abs();
        if !consistent {
            checks.push(CheckResult::new(name, false, format!("ratio {ratio} does not match {alg} / {opt}")));
            continue;
        }
        let verdict = match (BoundKind::parse(&r.bound_kind), r.bound) {
            (Some(kind), Some(bound)) => bound_holds(&r.bound_name, kind, ratio, bound),
            _ => None,
        };
        checks.push(match verdict {
            None => CheckResult::skipped(name, "no checkable bound"),
            Some(ok) if Some(ok) != r.bound_ok => {
                CheckResult::new(name, false, format!("bound_ok column says {:?}, recomputed {ok}", r.bound_ok))
            }
            Some(ok) => CheckResult::new(
                name,
                ok,
                format!("ratio {ratio} vs {} bound {} = {}", r.bound_kind, r.bound_name, r.bound.unwrap_or(f64::NAN)),
            ),
        });
    }
    Ok(Report::new(checks))
}

pub fn cmd_verify(args: &VerifyArgs, cfg: &SolverConfig) -> Result<Report> {
    if let Some(path) = &args.instance {
        let inst = load_instance(path)?;
        verify_instance(&inst, args.lambda, args.tol, cfg)
    } else if let Some(path) = &args.system {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        verify_system(&text, args.kind, args.samples, args.seed, args.tol)
    } else if let Some(path) = &args.sweep {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        verify_sweep(&text)
    } else {
        anyhow::bail!("verify needs --instance, --system or --sweep")
    }
}
