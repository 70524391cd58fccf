//! JSON scenario files.
//!
//! ```json
//! {
//!   "inertia": [4.250, 4.337, 3.664],
//!   "gains": { "alpha": 1, "k_q": 3, "k1": 3, "k_omega": 3, "k_delta": 1000, "delta_bound": 1.8 },
//!   "mode": "robust",
//!   "disturbance": { "type": "constant", "vector": [1, 1, 1] },
//!   "reference": "benchmark",
//!   "initial": { "q": [-1, 0, 0, 0], "omega": [1.299, 1.75, -0.5] },
//!   "region": { "c": 1.5, "epsilon": 0.1 },
//!   "sim": { "dt": 0.001, "t_end": 40, "record_stride": 10 }
//! }
//! ```
//!
//! `inertia` is either a diagonal triple or a row-major 3x3 array.
//! Quaternions are scalar first. `k_q` defaults to `k1`, `alpha` to 1,
//! `reference` to `"benchmark"` and `region` to none. `k_delta` is
//! required in robust mode.

use std::path::Path;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DisturbanceModel, InertiaMatrix};
use crate::error::{Error, Result};
use crate::quat::{Quaternion, Vec3};
use crate::reference::{ConstantReference, ReferenceKind};
use crate::sim::{ControlLaw, ScenarioConfig};
use crate::tracking::{ControllerGains, RegionSpec, RobustGains};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InertiaSpec {
    Diagonal([f64; 3]),
    Full([[f64; 3]; 3]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_q: Option<f64>,
    pub k1: f64,
    pub k_omega: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_bound: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    NonRobust,
    Robust,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DisturbanceSpec {
    None,
    Constant {
        vector: [f64; 3],
    },
    /// `cos(frequency * t) * vector`.
    Sinusoidal {
        vector: [f64; 3],
        frequency: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSpec {
    #[default]
    Benchmark,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub q: [f64; 4],
    pub omega: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionFileSpec {
    pub c: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
}

fn default_stride() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSpec {
    #[serde(default = "default_window")]
    pub window: [f64; 2],
    #[serde(default = "default_settle")]
    pub settle_threshold: f64,
}

fn default_window() -> [f64; 2] {
    [20.0, 40.0]
}

fn default_settle() -> f64 {
    1e-2
}

impl Default for MetricsSpec {
    fn default() -> Self {
        Self {
            window: default_window(),
            settle_threshold: default_settle(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub inertia: InertiaSpec,
    pub gains: GainsSpec,
    pub mode: Mode,
    pub disturbance: DisturbanceSpec,
    #[serde(default)]
    pub reference: ReferenceSpec,
    pub initial: InitialSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionFileSpec>,
    pub sim: SimSpec,
    #[serde(default)]
    pub metrics: MetricsSpec,
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid(
            field,
            format!("must be finite and > 0 (got {v})"),
        ))
    }
}

fn finite_all(field: &str, vs: &[f64]) -> Result<()> {
    if vs.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid(field, "non-finite component"))
    }
}

fn prefixed(prefix: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { field, reason } => Error::InvalidParameter {
            field: format!("{prefix}.{field}"),
            reason,
        },
        other => other,
    }
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Validates every field and builds the scenario. Errors name the
    /// offending field with its dotted path, e.g. `sim.dt`.
    pub fn to_scenario(&self) -> Result<ScenarioConfig> {
        let m = match &self.inertia {
            InertiaSpec::Diagonal(d) => {
                finite_all("inertia", d)?;
                Matrix3::from_diagonal(&Vec3::new(d[0], d[1], d[2]))
            }
            InertiaSpec::Full(rows) => {
                finite_all("inertia", rows.as_flattened())?;
                Matrix3::from_row_slice(rows.as_flattened())
            }
        };
        let inertia = InertiaMatrix::new(m).map_err(|e| match e {
            Error::NotPositiveDefinite => {
                Error::invalid("inertia", "must be symmetric positive definite")
            }
            other => other,
        })?;

        let g = &self.gains;
        let k1 = positive("gains.k1", g.k1)?;
        let base = ControllerGains {
            alpha: positive("gains.alpha", g.alpha.unwrap_or(1.0))?,
            k_q: positive("gains.k_q", g.k_q.unwrap_or(k1))?,
            k1,
            k_omega: positive("gains.k_omega", g.k_omega)?,
        };
        let law = match self.mode {
            Mode::NonRobust => ControlLaw::NonRobust(base),
            Mode::Robust => {
                let k_delta = g.k_delta.ok_or_else(|| {
                    Error::invalid("gains.k_delta", "required when mode is robust")
                })?;
                let rg = RobustGains::new(base, k_delta, g.delta_bound.unwrap_or(0.0))
                    .map_err(|e| prefixed("gains", e))?;
                ControlLaw::Robust(rg)
            }
        };

        let disturbance = match &self.disturbance {
            DisturbanceSpec::None => DisturbanceModel::None,
            DisturbanceSpec::Constant { vector } => {
                finite_all("disturbance.vector", vector)?;
                DisturbanceModel::Constant(Vec3::from(*vector))
            }
            DisturbanceSpec::Sinusoidal { vector, frequency } => {
                finite_all("disturbance.vector", vector)?;
                finite_all("disturbance.frequency", &[*frequency])?;
                DisturbanceModel::Sinusoidal {
                    amplitude: Vec3::from(*vector),
                    frequency: *frequency,
                }
            }
        };

        let reference = match self.reference {
            ReferenceSpec::Benchmark => ReferenceKind::Benchmark,
            ReferenceSpec::Identity => ReferenceKind::Constant(ConstantReference::default()),
        };

        finite_all("initial.q", &self.initial.q)?;
        finite_all("initial.omega", &self.initial.omega)?;

        let region = self
            .region
            .as_ref()
            .map(|r| RegionSpec::new(r.c, r.epsilon).map_err(|e| prefixed("region", e)))
            .transpose()?;

        let sim = &self.sim;
        let dt = positive("sim.dt", sim.dt)?;
        if !(sim.t_end >= 0.0 && sim.t_end.is_finite()) {
            return Err(Error::invalid("sim.t_end", "must be finite and >= 0"));
        }
        if sim.record_stride == 0 {
            return Err(Error::invalid("sim.record_stride", "must be >= 1"));
        }
        let [a, b] = self.metrics.window;
        if !(a.is_finite() && b.is_finite() && a <= b) {
            return Err(Error::invalid(
                "metrics.window",
                "must be finite with start <= end",
            ));
        }
        positive("metrics.settle_threshold", self.metrics.settle_threshold)?;

        let cfg = ScenarioConfig {
            inertia,
            law,
            disturbance,
            reference,
            initial_q: Quaternion::from_array(self.initial.q),
            initial_omega: Vec3::from(self.initial.omega),
            region,
            dt,
            t_end: sim.t_end,
            record_stride: sim.record_stride,
            metrics_window: (a, b),
            settle_threshold: self.metrics.settle_threshold,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Inverse of [`ConfigFile::to_scenario`]. Fails for closures and custom
    /// references, which have no file representation.
    pub fn from_scenario(cfg: &ScenarioConfig) -> Result<Self> {
        let m = cfg.inertia.matrix();
        let inertia = if (0..3).all(|i| (0..3).all(|j| i == j || m[(i, j)] == 0.0)) {
            InertiaSpec::Diagonal([m[(0, 0)], m[(1, 1)], m[(2, 2)]])
        } else {
            InertiaSpec::Full(std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)])))
        };
        let base = cfg.law.base();
        let (mode, k_delta, delta_bound) = match &cfg.law {
            ControlLaw::NonRobust(_) => (Mode::NonRobust, None, None),
            ControlLaw::Robust(rg) => (Mode::Robust, Some(rg.k_delta), Some(rg.delta_bound)),
        };
        let disturbance = match &cfg.disturbance {
            DisturbanceModel::None => DisturbanceSpec::None,
            DisturbanceModel::Constant(d) => DisturbanceSpec::Constant {
                vector: (*d).into(),
            },
            DisturbanceModel::Sinusoidal {
                amplitude,
                frequency,
            } => DisturbanceSpec::Sinusoidal {
                vector: (*amplitude).into(),
                frequency: *frequency,
            },
            DisturbanceModel::TimeVarying(_) => {
                return Err(Error::invalid(
                    "disturbance",
                    "closure disturbances cannot be serialized",
                ))
            }
        };
        let reference = match &cfg.reference {
            ReferenceKind::Benchmark => ReferenceSpec::Benchmark,
            ReferenceKind::Constant(r) if r.q0 == Quaternion::identity() => ReferenceSpec::Identity,
            _ => return Err(Error::invalid("reference", "has no file representation")),
        };
        Ok(Self {
            inertia,
            gains: GainsSpec {
                alpha: Some(base.alpha),
                k_q: Some(base.k_q),
                k1: base.k1,
                k_omega: base.k_omega,
                k_delta,
                delta_bound,
            },
            mode,
            disturbance,
            reference,
            initial: InitialSpec {
                q: cfg.initial_q.to_array(),
                omega: cfg.initial_omega.into(),
            },
            region: cfg.region.map(|r| RegionFileSpec {
                c: r.c(),
                epsilon: r.epsilon(),
            }),
            sim: SimSpec {
                dt: cfg.dt,
                t_end: cfg.t_end,
                record_stride: cfg.record_stride,
            },
            metrics: MetricsSpec {
                window: [cfg.metrics_window.0, cfg.metrics_window.1],
                settle_threshold: cfg.settle_threshold,
            },
        })
    }
}

/// Parses and validates a scenario file in one go.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    ConfigFile::load(path)?.to_scenario()
}
