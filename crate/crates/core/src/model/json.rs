//! Instance file format.
//!
//! ```json
//! {"T": 2, "d": 1, "k": 0, "prehistory": [[0.0]],
//!  "switching": {"kind": "linear", "params": {"c": [[[1.0]]]}},
//!  "costs": [{"m": 1.0, "v": [1.0]}, {"Q": [[2.0]], "v": [0.5]}]}
//! ```
//!
//! Floats are written with 17 significant digits so files round-trip exactly.

use std::io;

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::model::hitting::{Geometry, HittingCost};
use crate::model::instance::Instance;
use crate::model::switching::{Delta, Drift, SwitchingCost};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriftFile {
    Zero,
    DroneDrag { c1: f64, c2: f64, bound: f64 },
    Sine { gain: f64 },
    Tanh { gain: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum SwitchingFile {
    Linear { c: Vec<Vec<Vec<f64>>> },
    AffineDrone { c1: f64, c2: f64, bound: f64 },
    Remark2 { eps: f64, gamma: f64, n: usize, scale: f64 },
    ControlAffine { a: Vec<Vec<f64>>, drift: DriftFile },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostFile {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m: Option<f64>,
    #[serde(rename = "Q", skip_serializing_if = "Option::is_none", default)]
    pub q: Option<Vec<Vec<f64>>>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub d: usize,
    pub k: usize,
    #[serde(default)]
    pub prehistory: Option<Vec<Vec<f64>>>,
    pub switching: SwitchingFile,
    pub costs: Vec<CostFile>,
}

impl From<Drift> for DriftFile {
    fn from(d: Drift) -> Self {
        match d {
            Drift::Zero => DriftFile::Zero,
            Drift::DroneDrag { c1, c2, bound } => DriftFile::DroneDrag { c1, c2, bound },
            Drift::Sine { gain } => DriftFile::Sine { gain },
            Drift::Tanh { gain } => DriftFile::Tanh { gain },
        }
    }
}

impl From<DriftFile> for Drift {
    fn from(d: DriftFile) -> Self {
        match d {
            DriftFile::Zero => Drift::Zero,
            DriftFile::DroneDrag { c1, c2, bound } => Drift::DroneDrag { c1, c2, bound },
            DriftFile::Sine { gain } => Drift::Sine { gain },
            DriftFile::Tanh { gain } => Drift::Tanh { gain },
        }
    }
}

fn rows(m: &[Vec<f64>], what: &str) -> Result<Matrix> {
    linalg::matrix_from_rows(m).ok_or_else(|| Error::invalid(format!("{what} has ragged rows")))
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> Result<Self> {
        let switching = match inst.switching().delta() {
            Delta::Linear(c) => SwitchingFile::Linear {
                c: c.iter().map(linalg::matrix_to_rows).collect(),
            },
            Delta::AffineDrone { c1, c2, bound } => SwitchingFile::AffineDrone {
                c1: *c1,
                c2: *c2,
                bound: *bound,
            },
            Delta::Remark2 { eps, gamma, n, scale } => SwitchingFile::Remark2 {
                eps: *eps,
                gamma: *gamma,
                n: *n,
                scale: *scale,
            },
            Delta::ControlAffine { a, drift } => SwitchingFile::ControlAffine {
                a: linalg::matrix_to_rows(a),
                drift: (*drift).into(),
            },
            Delta::Callback { .. } => {
                return Err(Error::Unsupported("callback switching costs cannot be serialized".into()))
            }
        };
        let costs = inst
            .costs()
            .iter()
            .map(|c| {
                let (m, q) = match &c.geometry {
                    Geometry::Isotropic(m) => (Some(*m), None),
                    Geometry::Matrix(q) => (None, Some(linalg::matrix_to_rows(q))),
                };
                CostFile {
                    m,
                    q,
                    v: c.minimizer.iter().copied().collect(),
                }
            })
            .collect();
        Ok(Self {
            horizon: inst.horizon(),
            d: inst.dim(),
            k: inst.delay(),
            prehistory: Some(inst.prehistory().iter().map(|y| y.iter().copied().collect()).collect()),
            switching,
            costs,
        })
    }

    pub fn into_instance(self) -> Result<Instance> {
        let d = self.d;
        if self.costs.len() != self.horizon {
            return Err(Error::invalid(format!(
                "T = {} but {} costs listed",
                self.horizon,
                self.costs.len()
            )));
        }
        let delta = match self.switching {
            SwitchingFile::Linear { c } => Delta::Linear(
                c.iter()
                    .enumerate()
                    .map(|(i, m)| rows(m, &format!("C_{}", i + 1)))
                    .collect::<Result<_>>()?,
            ),
            SwitchingFile::AffineDrone { c1, c2, bound } => Delta::AffineDrone { c1, c2, bound },
            SwitchingFile::Remark2 { eps, gamma, n, scale } => Delta::Remark2 { eps, gamma, n, scale },
            SwitchingFile::ControlAffine { a, drift } => Delta::ControlAffine {
                a: rows(&a, "A")?,
                drift: drift.into(),
            },
        };
        let switching = SwitchingCost::new(delta, d)?;
        let costs = self
            .costs
            .into_iter()
            .enumerate()
            .map(|(t, c)| {
                let geometry = match (c.m, c.q) {
                    (Some(m), None) => Geometry::Isotropic(m),
                    (None, Some(q)) => Geometry::Matrix(rows(&q, "Q")?),
                    _ => {
                        return Err(Error::invalid(format!(
                            "cost {} must give exactly one of m or Q",
                            t + 1
                        )))
                    }
                };
                HittingCost::new(geometry, Vector::from_vec(c.v))
            })
            .collect::<Result<Vec<_>>>()?;
        let prehistory = self
            .prehistory
            .map(|ps| ps.into_iter().map(Vector::from_vec).collect());
        Instance::new(d, self.k, costs, switching, prehistory)
    }
}

/// Pretty printer that writes every float with 17 significant digits.
#[derive(Debug, Default)]
pub struct ExactFloatFormatter {
    inner: PrettyFormatter<'static>,
}

impl Formatter for ExactFloatFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if !value.is_finite() {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "non-finite float"));
        }
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Serializes any value with [`ExactFloatFormatter`].
pub fn to_exact_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloatFormatter::default());
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn instance_to_json(inst: &Instance) -> Result<String> {
    to_exact_string(&InstanceFile::from_instance(inst)?)
}

pub fn instance_from_json(text: &str) -> Result<Instance> {
    serde_json::from_str::<InstanceFile>(text)?.into_instance()
}

pub(crate) fn serialize_points<S: Serializer>(points: &[Vector], s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(points.len()))?;
    for p in points {
        seq.serialize_element(p.as_slice())?;
    }
    seq.end()
}
