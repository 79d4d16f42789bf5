//! Fixed instances for the solver benchmarks.

use irobd_core::instances::{gen_random, DeltaKind, RandomSpec};
use irobd_core::Instance;

/// Random instance with Gaussian linear memory maps.
pub fn random_instance(d: usize, p: usize, k: usize, horizon: usize) -> Instance {
    gen_random(&RandomSpec {
        seed: 11,
        m: 0.5,
        l: 2.0,
        horizon,
        d,
        p,
        k,
        delta: DeltaKind::Linear { alpha: 0.8 },
    })
    .expect("valid benchmark instance")
}

/// Scalar instance with a sine memory map.
pub fn sine_instance(horizon: usize) -> Instance {
    gen_random(&RandomSpec {
        seed: 5,
        m: 1.0,
        l: 1.0,
        horizon,
        d: 1,
        p: 1,
        k: 0,
        delta: DeltaKind::Sine { a: 0.8, gain: 0.3 },
    })
    .expect("valid benchmark instance")
}
