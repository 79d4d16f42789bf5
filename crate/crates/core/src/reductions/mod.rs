//! Online control problems rewritten as delayed OCO instances.
//!
//! Linear systems in controllable canonical form become instances with
//! linear `δ`, memory `p` and delay `p`; nonlinear tracking problems become
//! instances with `δ(y) = A y + g(y)`.

mod canonical;
mod linear;
mod nonlinear;

pub use canonical::{accumulate_r, canonical_indices, extract_ci, CanonicalIndices};
pub use linear::{
    curvature_range, reduce_linear, roundtrip_verify, run_linear_closed_loop, ClosedLoopRun, EquivalenceReport,
    LinearControlSystem, LinearReduction, LinearSystemFile, RecoveryMap,
};
pub use nonlinear::{
    reduce_nonlinear, roundtrip_verify_nonlinear, NonlinearControlSystem, NonlinearEquivalence, NonlinearSystemFile,
};
