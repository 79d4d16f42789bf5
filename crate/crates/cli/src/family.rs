use anyhow::{bail, Result};
use irobd_core::instances::{
    gen_drone, gen_random, gen_remark1_with, gen_remark2, gen_theorem3, DeltaKind, Remark1Profile, Remark1Shape,
    Remark1Spec, Remark2Instance, RandomSpec, SpeedProfile,
};
use irobd_core::Instance;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Thm3,
    Remark1,
    Remark2,
    Drone,
    Random,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Thm3 => "thm3",
            Family::Remark1 => "remark1",
            Family::Remark2 => "remark2",
            Family::Drone => "drone",
            Family::Random => "random",
        }
    }
}

/// Parameters of every generator family. Fields a family does not use are
/// ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyParams {
    pub family: Family,
    pub seed: u64,
    /// Lower hitting curvature.
    pub m: f64,
    /// Upper hitting curvature of `random`; defaults to `m`.
    pub l: Option<f64>,
    /// Growth factor of `thm3`.
    pub alpha: f64,
    /// Delay; `thm3` defaults to 3, everything else to 0.
    pub k: Option<usize>,
    pub horizon: usize,
    /// Excess Lipschitz constant of the `remark1` map.
    pub lipschitz: f64,
    pub shape: Remark1Shape,
    pub profile: Remark1Profile,
    pub eps: f64,
    pub gamma: f64,
    pub n: usize,
    pub c1: f64,
    pub c2: f64,
    pub speed: SpeedProfile,
    pub d: usize,
    pub p: usize,
    pub delta: DeltaKind,
}

impl Default for FamilyParams {
    fn default() -> Self {
        Self {
            family: Family::Random,
            seed: 0,
            m: 1.0,
            l: None,
            alpha: 2.0,
            k: None,
            horizon: 50,
            lipschitz: 0.5,
            shape: Remark1Shape::Linear,
            profile: Remark1Profile::RandomWalk,
            eps: 0.1,
            gamma: 0.01,
            n: 5,
            c1: 0.1,
            c2: 0.01,
            speed: SpeedProfile::Hover,
            d: 1,
            p: 1,
            delta: DeltaKind::Linear { alpha: 0.9 },
        }
    }
}

/// A generated instance, with the designated comparator when the family has one.
pub struct Generated {
    pub instance: Instance,
    pub remark2: Option<Remark2Instance>,
}

impl FamilyParams {
    pub fn delay(&self) -> usize {
        self.k.unwrap_or(if self.family == Family::Thm3 { 3 } else { 0 })
    }

    pub fn generate(&self) -> Result<Generated> {
        let k = self.delay();
        let instance = match self.family {
            Family::Thm3 => gen_theorem3(self.m, self.alpha, k)?,
            Family::Remark1 => {
                let inst = gen_remark1_with(&Remark1Spec {
                    m: self.m,
                    lipschitz: self.lipschitz,
                    horizon: self.horizon,
                    seed: self.seed,
                    shape: self.shape,
                    profile: self.profile,
                })?;
                inst.with_delay(k)
            }
            Family::Remark2 => {
                if k != 0 {
                    bail!("remark2 instances have no delay");
                }
                let r = gen_remark2(self.eps, self.gamma, self.n)?;
                return Ok(Generated {
                    instance: r.instance.clone(),
                    remark2: Some(r),
                });
            }
            Family::Drone => gen_drone(self.c1, self.c2, self.horizon, k, self.speed, self.seed)?,
            Family::Random => gen_random(&RandomSpec {
                seed: self.seed,
                m: self.m,
                l: self.l.unwrap_or(self.m),
                horizon: self.horizon,
                d: self.d,
                p: self.p,
                k,
                delta: self.delta,
            })?,
        };
        Ok(Generated { instance, remark2: None })
    }
}
