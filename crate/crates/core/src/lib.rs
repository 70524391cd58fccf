//! Attitude tracking for a rigid spacecraft using unit quaternions embedded
//! in the full quaternion space.
//!
//! The plant is extended off the unit sphere by a term that makes the
//! sphere an exponentially attracting invariant set, so the controller can
//! be designed with ordinary Euclidean backstepping. Two laws are
//! provided: a non-robust tracking law and a robust one that adds an
//! adaptive estimate of an unknown constant disturbance torque.
//!
//! Module map:
//! - [`quat`]: quaternion algebra
//! - [`dynamics`]: rigid-body and embedded vector fields
//! - [`tracking`]: errors, control laws, Lyapunov functions, gain feasibility
//! - [`reference`]: reference trajectories
//! - [`sim`]: RK4 closed-loop simulation and the benchmark scenarios
//! - [`config`], [`output`], [`sweep`], [`verify`]: scenario files, trace
//!   files, parameter sweeps and the built-in property checks
//!
//! ```
//! let (trace, metrics) = quattrack::simulate(&quattrack::case_study(1)?)?;
//! assert!(metrics.final_delta_err_norm < 1e-2);
//! assert_eq!(trace.records.len(), 4001);
//! # Ok::<(), quattrack::Error>(())
//! ```
//!
//! The `examples/` directory has one program per capability: quaternion
//! algebra, sphere attraction, the case studies, robust against
//! non-robust control, gain feasibility, gain sweeps and custom references.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod output;
pub mod quat;
pub mod reference;
pub mod sim;
pub mod sweep;
pub mod tracking;
pub mod verify;

pub use dynamics::{BodyState, DisturbanceModel, EmbeddingParams, InertiaMatrix};
pub use error::{Error, Result};
pub use quat::{Quaternion, Vec3};
pub use reference::{BenchmarkReference, ReferenceKind, ReferenceTrajectory};
pub use sim::{case_study, simulate, ControlLaw, RunMetrics, ScenarioConfig, SimulationTrace};
pub use tracking::{
    ControllerGains, EstimatorState, ReferenceSample, RegionSpec, RobustGains, TrackingError,
};
