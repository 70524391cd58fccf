//! Reference attitude trajectories.
//!
//! A reference must be kinematically consistent: `q0' = 1/2 q0 Omega0`.
//! [`consistency_residual`] checks that numerically.

use std::fmt;
use std::sync::Arc;

use crate::quat::{Quaternion, Vec3};
use crate::tracking::ReferenceSample;

/// Step for the central differences in this module.
pub const FD_STEP: f64 = 1e-6;

pub trait ReferenceTrajectory {
    fn attitude(&self, t: f64) -> Quaternion;

    fn angular_velocity(&self, t: f64) -> Vec3;

    /// Analytic angular acceleration, when the trajectory knows it.
    fn angular_acceleration(&self, _t: f64) -> Option<Vec3> {
        None
    }

    fn sample(&self, t: f64) -> ReferenceSample {
        let omega0_dot = self
            .angular_acceleration(t)
            .unwrap_or_else(|| omega_dot_fallback(self, t));
        ReferenceSample {
            q0: self.attitude(t),
            omega0: self.angular_velocity(t),
            omega0_dot,
        }
    }
}

/// The benchmark tumbling reference
/// `q0(t) = cos t + cos t sin t i + sin^2 t j`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BenchmarkReference;

pub fn benchmark_reference(t: f64) -> ReferenceSample {
    let (s, c) = t.sin_cos();
    ReferenceSample {
        q0: Quaternion::new(c, c * s, s * s, 0.0),
        omega0: Vec3::new(2.0 * c * c * c, (2.0 + 2.0 * c * c) * s, -2.0 * s * s),
        omega0_dot: Vec3::new(-6.0 * c * c * s, (-2.0 + 6.0 * c * c) * c, -4.0 * s * c),
    }
}

impl ReferenceTrajectory for BenchmarkReference {
    fn attitude(&self, t: f64) -> Quaternion {
        benchmark_reference(t).q0
    }
    fn angular_velocity(&self, t: f64) -> Vec3 {
        benchmark_reference(t).omega0
    }
    fn angular_acceleration(&self, t: f64) -> Option<Vec3> {
        Some(benchmark_reference(t).omega0_dot)
    }
    fn sample(&self, t: f64) -> ReferenceSample {
        benchmark_reference(t)
    }
}

/// A fixed attitude at rest.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConstantReference {
    pub q0: Quaternion,
}

impl ReferenceTrajectory for ConstantReference {
    fn attitude(&self, _t: f64) -> Quaternion {
        self.q0
    }
    fn angular_velocity(&self, _t: f64) -> Vec3 {
        Vec3::zeros()
    }
    fn angular_acceleration(&self, _t: f64) -> Option<Vec3> {
        Some(Vec3::zeros())
    }
}

/// Which reference a scenario tracks.
#[derive(Clone, Default)]
pub enum ReferenceKind {
    #[default]
    Benchmark,
    Constant(ConstantReference),
    Custom(Arc<dyn ReferenceTrajectory + Send + Sync>),
}

impl ReferenceKind {
    pub fn sample(&self, t: f64) -> ReferenceSample {
        match self {
            ReferenceKind::Benchmark => benchmark_reference(t),
            ReferenceKind::Constant(r) => r.sample(t),
            ReferenceKind::Custom(r) => r.sample(t),
        }
    }
}

impl fmt::Debug for ReferenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReferenceKind::Benchmark => write!(f, "Benchmark"),
            ReferenceKind::Constant(r) => write!(f, "Constant({})", r.q0),
            ReferenceKind::Custom(_) => write!(f, "Custom(<trajectory>)"),
        }
    }
}

fn attitude_rate_fd<R: ReferenceTrajectory + ?Sized>(r: &R, t: f64) -> Quaternion {
    (r.attitude(t + FD_STEP) - r.attitude(t - FD_STEP)).scale(0.5 / FD_STEP)
}

/// Mismatch between the body rate implied by differentiating `q0` and the
/// supplied `Omega0`. Zero for a consistent trajectory up to
/// finite-difference noise.
pub fn consistency_residual<R: ReferenceTrajectory + ?Sized>(r: &R, t: f64) -> f64 {
    let implied = (r.attitude(t).conj() * attitude_rate_fd(r, t)).scale(2.0);
    (implied.vec() - r.angular_velocity(t)).norm() + implied.scalar_part().abs()
}

/// Central-difference estimate of `Omega0'`, O(h^2).
pub fn omega_dot_fallback<R: ReferenceTrajectory + ?Sized>(r: &R, t: f64) -> Vec3 {
    (r.angular_velocity(t + FD_STEP) - r.angular_velocity(t - FD_STEP)) / (2.0 * FD_STEP)
}
