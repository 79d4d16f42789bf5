//! Problem data: hitting costs, switching costs, instances and their costs.

pub mod hitting;
pub mod instance;
pub mod json;
pub mod lipschitz;
pub mod switching;

pub use hitting::{evaluate_hitting, Geometry, HittingCost};
pub use instance::{competitive_ratio, evaluate_total, memory, ratio_of_totals, CostReport, Instance, Trajectory};
pub use json::{instance_from_json, instance_to_json, to_exact_string, InstanceFile};
pub use lipschitz::{validate_lipschitz, LipschitzReport};
pub use switching::{evaluate_switching, Delta, DeltaFn, Drift, SwitchingCost};
