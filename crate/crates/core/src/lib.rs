//! Online convex optimization with `k`-round delayed feedback and nonlinear
//! multi-step switching costs.
//!
//! The learner picks `y_t` each round and pays a hitting cost
//! `f_t(y_t) = h_t(y_t - v_t)` plus a switching cost
//! `½‖y_t − δ(y_{t−1}, …, y_{t−p})‖²`. The geometry `h_t` is known when
//! acting, the minimizer `v_t` only `k` rounds later.
//!
//! Crate layout:
//!
//! - [`model`]: hitting/switching costs, instances, trajectories, cost reports,
//!   JSON file format and the Lipschitz audit.
//! - [`prox`]: the inner minimizations used by ROBD and iROBD.
//! - [`algorithms`]: the round-by-round protocol and the online policies
//!   (ROBD, iROBD, delayed move-to-minimizer, stay).
//! - [`offline`]: hindsight-optimal solvers used as ratio denominators.
//! - [`instances`]: generators for the adversarial constructions and random
//!   families.
//! - [`reductions`]: control problems rewritten as delayed OCO instances.
//! - [`bounds`]: closed-form competitive-ratio bounds.
//! - [`verify`]: trajectory inequalities checked at runtime.

pub mod algorithms;
pub mod bounds;
pub mod error;
pub mod instances;
pub mod linalg;
pub mod model;
pub mod offline;
pub mod prox;
pub mod reductions;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use model::{
    competitive_ratio, evaluate_hitting, evaluate_switching, evaluate_total, validate_lipschitz,
    CostReport, Delta, Drift, Geometry, HittingCost, Instance, LipschitzReport, SwitchingCost,
    Trajectory,
};
pub use prox::SolverConfig;
