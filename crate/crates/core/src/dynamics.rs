//! Rigid-body vector fields on the unit sphere and on its embedding into
//! the full quaternion space.
//!
//! The embedded field adds `-alpha (|q|^2 - 1) q` to the kinematics. On the
//! unit sphere the extra term vanishes, and off it the squared norm obeys
//! the scalar logistic-type law returned by [`norm_sq_drift`].

use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::quat::{Quaternion, Vec3};

/// Symmetric positive-definite moment of inertia with its inverse cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaMatrix {
    m: Matrix3<f64>,
    inv: Matrix3<f64>,
}

impl InertiaMatrix {
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        if m.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("inertia", "non-finite entry"));
        }
        let asym = (m - m.transpose()).amax();
        if asym > 1e-12 * m.amax().max(1.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let chol = nalgebra::Cholesky::new(m).ok_or(Error::NotPositiveDefinite)?;
        Ok(Self {
            m,
            inv: chol.inverse(),
        })
    }

    pub fn diagonal(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(Matrix3::from_diagonal(&Vec3::new(a, b, c)))
    }

    /// Spacecraft inertia used by the benchmark scenarios, kg m^2.
    pub fn benchmark() -> Self {
        Self::diagonal(4.250, 4.337, 3.664).expect("benchmark inertia is SPD")
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    pub fn inverse(&self) -> &Matrix3<f64> {
        &self.inv
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.m * v
    }

    pub fn apply_inv(&self, v: &Vec3) -> Vec3 {
        self.inv * v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyState {
    /// Attitude, not necessarily of unit norm.
    pub q: Quaternion,
    /// Body-fixed angular velocity, rad/s.
    pub omega: Vec3,
}

impl BodyState {
    pub fn new(q: Quaternion, omega: Vec3) -> Self {
        Self { q, omega }
    }

    pub fn is_finite(&self) -> bool {
        self.q.is_finite() && self.omega.iter().all(|c| c.is_finite())
    }

    /// Whether `q` lies in the punctured space where the unit sphere attracts.
    pub fn in_convergence_region(&self) -> bool {
        self.q.norm_sq() > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingParams {
    alpha: f64,
}

impl EmbeddingParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid("alpha", "must be finite and > 0"));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Default for EmbeddingParams {
    fn default() -> Self {
        Self { alpha: 1.0 }
    }
}

/// External torque acting on the body, N m.
#[derive(Clone, Default)]
pub enum DisturbanceModel {
    #[default]
    None,
    Constant(Vec3),
    /// `cos(frequency * t) * amplitude`.
    Sinusoidal {
        amplitude: Vec3,
        frequency: f64,
    },
    TimeVarying(Arc<dyn Fn(f64) -> Vec3 + Send + Sync>),
}

impl DisturbanceModel {
    pub fn eval(&self, t: f64) -> Vec3 {
        match self {
            DisturbanceModel::None => Vec3::zeros(),
            DisturbanceModel::Constant(d) => *d,
            DisturbanceModel::Sinusoidal {
                amplitude,
                frequency,
            } => amplitude * (frequency * t).cos(),
            DisturbanceModel::TimeVarying(f) => f(t),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, DisturbanceModel::None | DisturbanceModel::Constant(_))
    }
}

impl fmt::Debug for DisturbanceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DisturbanceModel::None => write!(f, "None"),
            DisturbanceModel::Constant(d) => write!(f, "Constant({}, {}, {})", d.x, d.y, d.z),
            DisturbanceModel::Sinusoidal {
                amplitude,
                frequency,
            } => write!(
                f,
                "Sinusoidal {{ amplitude: ({}, {}, {}), frequency: {} }}",
                amplitude.x, amplitude.y, amplitude.z, frequency
            ),
            DisturbanceModel::TimeVarying(_) => write!(f, "TimeVarying(<fn>)"),
        }
    }
}

/// Time derivative of a [`BodyState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub q_dot: Quaternion,
    pub omega_dot: Vec3,
}

fn euler_rate(omega: &Vec3, tau: &Vec3, inertia: &InertiaMatrix) -> Vec3 {
    let momentum = inertia.apply(omega);
    inertia.apply_inv(&(momentum.cross(omega) + tau))
}

/// Rigid-body equations with `q` on the unit sphere.
pub fn rigid_field(state: &BodyState, tau: &Vec3, inertia: &InertiaMatrix) -> StateDerivative {
    StateDerivative {
        q_dot: (state.q * Quaternion::pure(state.omega)).scale(0.5),
        omega_dot: euler_rate(&state.omega, tau, inertia),
    }
}

/// Rigid-body equations extended to all quaternions with the unit sphere
/// as an attracting invariant set.
pub fn embedded_field(
    state: &BodyState,
    tau: &Vec3,
    inertia: &InertiaMatrix,
    params: &EmbeddingParams,
) -> StateDerivative {
    let rigid = rigid_field(state, tau, inertia);
    let restoring = params.alpha * (state.q.norm_sq() - 1.0);
    StateDerivative {
        q_dot: rigid.q_dot - state.q.scale(restoring),
        omega_dot: rigid.omega_dot,
    }
}

pub fn disturbed_embedded_field(
    state: &BodyState,
    tau: &Vec3,
    inertia: &InertiaMatrix,
    params: &EmbeddingParams,
    disturbance: &DisturbanceModel,
    t: f64,
) -> StateDerivative {
    let mut d = embedded_field(state, tau, inertia, params);
    if !matches!(disturbance, DisturbanceModel::None) {
        d.omega_dot += inertia.apply_inv(&disturbance.eval(t));
    }
    d
}

/// d/dt |q|^2 along the embedded field: `-2 alpha (|q|^2 - 1) |q|^2`.
///
/// Independent of the angular velocity and the torque.
pub fn norm_sq_drift(q: &Quaternion, alpha: f64) -> f64 {
    let v = q.norm_sq();
    -2.0 * alpha * (v - 1.0) * v
}
