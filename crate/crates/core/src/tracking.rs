//! Tracking error, backstepping control laws and their Lyapunov certificates.
//!
//! The attitude error is `e_q = q0* q - 1`, a quaternion in the ambient
//! space, and the rate error is `e_omega = omega - omega0`. The virtual
//! rate `eta` shapes `e_omega` so that `V_k1 = 1/2 |e_q|^2 + |e_omega - eta|^2 / (4 k1)`
//! decays along the closed loop. The robust law subtracts an adaptive
//! disturbance estimate driven by `e_omega - eta`.
//!
//! Functions taking `q_norm_sq` expect `|q|^2` of the *measured* attitude;
//! the controller never assumes unit norm.

use crate::dynamics::{BodyState, InertiaMatrix};
use crate::error::{Error, Result};
use crate::quat::{Quaternion, Vec3};

/// Reference attitude, rate and rate derivative at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSample {
    pub q0: Quaternion,
    pub omega0: Vec3,
    pub omega0_dot: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingError {
    pub e_q: Quaternion,
    pub e_omega: Vec3,
}

impl TrackingError {
    pub fn zero() -> Self {
        Self {
            e_q: Quaternion::zero(),
            e_omega: Vec3::zeros(),
        }
    }

    /// Scalar part of `e_q`.
    pub fn e_s(&self) -> f64 {
        self.e_q.s
    }

    /// Vector part of `e_q`.
    pub fn e_v(&self) -> Vec3 {
        self.e_q.v
    }

    /// `|q|^2` reconstructed from `e_q`, valid whenever `q0` is unit.
    pub fn implied_q_norm_sq(&self) -> f64 {
        (Quaternion::identity() + self.e_q).norm_sq()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerGains {
    /// Embedding rate, 1/s.
    pub alpha: f64,
    /// Attitude gain inside `eta`.
    pub k_q: f64,
    /// Attitude gain in the torque law and in `V_k1`.
    pub k1: f64,
    /// Rate gain.
    pub k_omega: f64,
}

impl ControllerGains {
    pub fn new(alpha: f64, k_q: f64, k1: f64, k_omega: f64) -> Result<Self> {
        let g = Self {
            alpha,
            k_q,
            k1,
            k_omega,
        };
        g.validate()?;
        Ok(g)
    }

    /// alpha = 1, k_q = k1 = k_omega = 3.
    pub fn benchmark() -> Self {
        Self {
            alpha: 1.0,
            k_q: 3.0,
            k1: 3.0,
            k_omega: 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("k_q", self.k_q),
            ("k1", self.k1),
            ("k_omega", self.k_omega),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be finite and > 0"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustGains {
    pub base: ControllerGains,
    /// Estimator gain.
    pub k_delta: f64,
    /// Known bound on the disturbance norm, N m.
    pub delta_bound: f64,
}

impl RobustGains {
    pub fn new(base: ControllerGains, k_delta: f64, delta_bound: f64) -> Result<Self> {
        base.validate()?;
        if !(k_delta > 0.0 && k_delta.is_finite()) {
            return Err(Error::invalid("k_delta", "must be finite and > 0"));
        }
        if !(delta_bound >= 0.0 && delta_bound.is_finite()) {
            return Err(Error::invalid("delta_bound", "must be finite and >= 0"));
        }
        Ok(Self {
            base,
            k_delta,
            delta_bound,
        })
    }

    /// `k_delta > delta^2 / (2c)`, needed for the robust region to be certified.
    pub fn certifies(&self, region: &RegionSpec) -> bool {
        self.k_delta > self.delta_bound * self.delta_bound / (2.0 * region.c())
    }
}

/// Level `c` of the Lyapunov function and tolerance `epsilon` on `||q|^2 - 1|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSpec {
    c: f64,
    epsilon: f64,
}

impl RegionSpec {
    pub fn new(c: f64, epsilon: f64) -> Result<Self> {
        if !(c > 0.0 && c < 2.0) {
            return Err(Error::invalid("c", "must lie in (0, 2)"));
        }
        let eps_max = (2.0 - (2.0 * c).sqrt()).min(1.0);
        if !(epsilon >= 0.0 && epsilon < eps_max) {
            return Err(Error::invalid(
                "epsilon",
                format!("must lie in [0, {eps_max}) for c = {c}"),
            ));
        }
        Ok(Self { c, epsilon })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Decay margin `2 - sqrt(2c) - epsilon` on the scalar error, positive.
    pub fn rho(&self) -> f64 {
        2.0 - (2.0 * self.c).sqrt() - self.epsilon
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EstimatorState {
    pub delta_hat: Vec3,
}

pub fn compute_error(state: &BodyState, r: &ReferenceSample) -> TrackingError {
    TrackingError {
        e_q: r.q0.conj() * state.q - Quaternion::identity(),
        e_omega: state.omega - r.omega0,
    }
}

/// Attitude-error dynamics `e_q'`. Independent of the torque.
pub fn error_field(e: &TrackingError, omega0: &Vec3, q_norm_sq: f64, alpha: f64) -> Quaternion {
    let w0 = Quaternion::pure(*omega0);
    let one_plus = Quaternion::identity() + e.e_q;
    (e.e_q * w0 - w0 * e.e_q).scale(0.5) + (one_plus * Quaternion::pure(e.e_omega)).scale(0.5)
        - one_plus.scale(alpha * (q_norm_sq - 1.0))
}

/// Virtual rate for the backstepping step.
pub fn eta(e: &TrackingError, q_norm_sq: f64, g: &ControllerGains) -> Vec3 {
    e.e_v() * (-g.k_q + 2.0 * g.alpha * (e.e_s() + q_norm_sq - 1.0))
}

/// Analytic time derivative of [`eta`] along the closed loop.
pub fn eta_dot(e: &TrackingError, omega0: &Vec3, q_norm_sq: f64, g: &ControllerGains) -> Vec3 {
    let de = error_field(e, omega0, q_norm_sq, g.alpha);
    let norm_rate = norm_sq_drift_from(q_norm_sq, g.alpha);
    de.v * (-g.k_q + 2.0 * g.alpha * (e.e_s() + q_norm_sq - 1.0))
        + e.e_v() * (2.0 * g.alpha * (de.s + norm_rate))
}

fn norm_sq_drift_from(q_norm_sq: f64, alpha: f64) -> f64 {
    -2.0 * alpha * (q_norm_sq - 1.0) * q_norm_sq
}

/// Shaped rate-error acceleration `-k1 e_v - k_omega (e_omega - eta) + eta'`
/// that both control laws impose on the undisturbed plant.
pub fn commanded_rate_error_accel(
    e: &TrackingError,
    omega0: &Vec3,
    q_norm_sq: f64,
    g: &ControllerGains,
) -> Vec3 {
    let eta_val = eta(e, q_norm_sq, g);
    -g.k1 * e.e_v() - g.k_omega * (e.e_omega - eta_val) + eta_dot(e, omega0, q_norm_sq, g)
}

/// Non-robust tracking law.
pub fn control_torque(
    state: &BodyState,
    r: &ReferenceSample,
    g: &ControllerGains,
    inertia: &InertiaMatrix,
) -> Vec3 {
    let e = compute_error(state, r);
    let qn2 = state.q.norm_sq();
    let accel = commanded_rate_error_accel(&e, &r.omega0, qn2, g) + r.omega0_dot;
    -inertia.apply(&state.omega).cross(&state.omega) + inertia.apply(&accel)
}

/// Robust law: the non-robust torque minus the disturbance estimate.
pub fn robust_control_torque(
    state: &BodyState,
    r: &ReferenceSample,
    rg: &RobustGains,
    inertia: &InertiaMatrix,
    est: &EstimatorState,
) -> Vec3 {
    control_torque(state, r, &rg.base, inertia) - est.delta_hat
}

/// Estimator update `(k_delta / 2 k1) I^-1 (e_omega - eta)`.
pub fn estimator_derivative(
    e: &TrackingError,
    eta_val: &Vec3,
    rg: &RobustGains,
    inertia: &InertiaMatrix,
) -> Vec3 {
    inertia.apply_inv(&(e.e_omega - eta_val)) * (rg.k_delta / (2.0 * rg.base.k1))
}

pub fn lyapunov_v0(e: &TrackingError) -> f64 {
    0.5 * e.e_q.norm_sq()
}

pub fn lyapunov_vk1(e: &TrackingError, q_norm_sq: f64, g: &ControllerGains) -> f64 {
    let w = e.e_omega - eta(e, q_norm_sq, g);
    lyapunov_v0(e) + w.norm_squared() / (4.0 * g.k1)
}

/// Full robust Lyapunov function. Needs the true disturbance error
/// `e_delta = delta - delta_hat`, so it is a diagnostic only.
pub fn lyapunov_v(e: &TrackingError, q_norm_sq: f64, rg: &RobustGains, e_delta: &Vec3) -> f64 {
    lyapunov_vk1(e, q_norm_sq, &rg.base) + e_delta.norm_squared() / (2.0 * rg.k_delta)
}

/// `1/4 (|q|^2 - 1)^2`.
pub fn v_aux(q: &Quaternion) -> f64 {
    let d = q.norm_sq() - 1.0;
    0.25 * d * d
}

/// Closed-form rate of `V0` along the error dynamics, for any torque.
pub fn v0_rate(e: &TrackingError, q_norm_sq: f64, alpha: f64) -> f64 {
    let es = e.e_s();
    let ev = e.e_v();
    -alpha * (2.0 + es + (q_norm_sq - 1.0)) * es * es
        + 0.5 * ev.dot(&(e.e_omega - ev * (2.0 * alpha * (es + q_norm_sq - 1.0))))
}

/// Upper bound on the rate of `V_k1` (and of `V` in the robust loop) that
/// holds inside the certified region.
pub fn vk1_decrease_bound(
    e: &TrackingError,
    q_norm_sq: f64,
    g: &ControllerGains,
    region: &RegionSpec,
) -> f64 {
    let w = e.e_omega - eta(e, q_norm_sq, g);
    -g.alpha * region.rho() * e.e_s() * e.e_s()
        - 0.5 * g.k_q * e.e_v().norm_squared()
        - g.k_omega / (2.0 * g.k1) * w.norm_squared()
}

pub fn in_m_epsilon(q: &Quaternion, epsilon: f64) -> bool {
    (q.norm_sq() - 1.0).abs() <= epsilon
}

pub fn in_region_s(
    state: &BodyState,
    e: &TrackingError,
    spec: &RegionSpec,
    g: &ControllerGains,
) -> bool {
    let qn2 = state.q.norm_sq();
    in_m_epsilon(&state.q, spec.epsilon) && lyapunov_vk1(e, qn2, g) <= spec.c
}

pub fn in_region_s_robust(
    state: &BodyState,
    e: &TrackingError,
    e_delta: &Vec3,
    spec: &RegionSpec,
    rg: &RobustGains,
) -> bool {
    let qn2 = state.q.norm_sq();
    in_m_epsilon(&state.q, spec.epsilon) && lyapunov_v(e, qn2, rg, e_delta) <= spec.c
}

/// Sufficient initial condition for robust convergence:
/// `||q|^2 - 1| <= epsilon` and `V_k1 <= c - delta^2 / (2 k_delta)`.
pub fn robust_initial_condition_holds(
    state: &BodyState,
    e: &TrackingError,
    spec: &RegionSpec,
    rg: &RobustGains,
) -> bool {
    let qn2 = state.q.norm_sq();
    in_m_epsilon(&state.q, spec.epsilon)
        && lyapunov_vk1(e, qn2, &rg.base)
            <= spec.c - rg.delta_bound * rg.delta_bound / (2.0 * rg.k_delta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleGains {
    pub c: f64,
    pub k1: f64,
    pub k_delta: f64,
}

const FEASIBILITY_MARGIN: f64 = 1e-3;

/// Constructs `(c, k1, k_delta)` that certify robust convergence from a
/// unit-attitude initial error.
///
/// `c` is the midpoint of `(|e_q|^2 / 2, 2)`. `k1` is raised from `g0.k1`
/// until the rate term uses less than half of the slack
/// `c - |e_q|^2 / 2`, and `k_delta` is chosen so that the disturbance term
/// leaves a margin behind. Fails for the antipodal error `|e_q| = 2` and
/// for non-unit attitudes.
pub fn feasible_gains(
    e0: &TrackingError,
    delta_bound: f64,
    g0: &ControllerGains,
) -> Result<FeasibleGains> {
    g0.validate()?;
    if !(delta_bound > 0.0 && delta_bound.is_finite()) {
        return Err(Error::invalid("delta_bound", "must be finite and > 0"));
    }
    let eq_norm_sq = e0.e_q.norm_sq();
    // NaN lands here too
    if eq_norm_sq.is_nan() || eq_norm_sq.sqrt() >= 2.0 {
        return Err(Error::Infeasible(format!(
            "|e_q(0)| = {} is not below 2",
            eq_norm_sq.sqrt()
        )));
    }
    let qn2 = e0.implied_q_norm_sq();
    if (qn2 - 1.0).abs() > 1e-9 {
        return Err(Error::Infeasible(format!(
            "initial attitude is not unit (|q|^2 = {qn2})"
        )));
    }

    let v0 = 0.5 * eq_norm_sq;
    let c = 0.5 * (v0 + 2.0);
    let gap = c - v0;
    let margin = FEASIBILITY_MARGIN.min(0.5 * gap);
    let w_sq = (e0.e_omega - eta(e0, qn2, g0)).norm_squared();

    let k1 = g0.k1.max(w_sq / (2.0 * gap - 2.0 * margin));
    let rate_term = w_sq / (4.0 * k1);
    let d_sq = delta_bound * delta_bound;
    let mut k_delta = d_sq / (2.0 * (gap - rate_term) - margin);
    let floor = d_sq / (2.0 * c);
    if k_delta <= floor {
        k_delta = floor.next_up();
    }
    Ok(FeasibleGains { c, k1, k_delta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::benchmark_reference;

    fn g() -> ControllerGains {
        ControllerGains::benchmark()
    }

    fn err(s: f64, v: [f64; 3], w: [f64; 3]) -> TrackingError {
        TrackingError {
            e_q: Quaternion::new(s, v[0], v[1], v[2]),
            e_omega: Vec3::new(w[0], w[1], w[2]),
        }
    }

    #[test]
    fn error_on_reference_is_zero() {
        let r = benchmark_reference(0.7);
        let s = BodyState::new(r.q0, r.omega0);
        let e = compute_error(&s, &r);
        assert!(e.e_q.norm() < 1e-15);
        assert_eq!(e.e_omega, Vec3::zeros());
    }

    #[test]
    fn antipodal_error() {
        let r = benchmark_reference(0.0);
        let s = BodyState::new(-r.q0, r.omega0);
        let e = compute_error(&s, &r);
        assert_eq!(e.e_q, Quaternion::new(-2.0, 0.0, 0.0, 0.0));
        assert_eq!(e.e_q.norm(), 2.0);
        assert_eq!(lyapunov_v0(&e), 2.0);
    }

    #[test]
    fn error_field_values() {
        let zero = TrackingError::zero();
        assert_eq!(
            error_field(&zero, &Vec3::new(1.0, 2.0, 3.0), 1.0, 1.0),
            Quaternion::zero()
        );
        let e = err(0.1, [0.2, -0.3, 0.4], [0.0; 3]);
        let got = error_field(&e, &Vec3::zeros(), 2.0, 1.0);
        let want = -(Quaternion::identity() + e.e_q);
        assert!((got - want).norm() < 1e-15);
    }

    #[test]
    fn eta_values() {
        assert_eq!(eta(&TrackingError::zero(), 1.3, &g()), Vec3::zeros());
        let e = err(0.0, [1.0, 0.0, 0.0], [0.0; 3]);
        assert_eq!(eta(&e, 1.0, &g()), Vec3::new(-3.0, 0.0, 0.0));
        let e = err(-1.0, [0.3, 0.4, 0.0], [0.0; 3]);
        let got = eta(&e, 1.0, &g());
        assert!((got - e.e_v() * (-3.0 - 2.0)).norm() < 1e-15);
        assert_eq!(
            eta_dot(&TrackingError::zero(), &Vec3::new(1.0, 0.0, 0.0), 1.0, &g()),
            Vec3::zeros()
        );
    }

    #[test]
    fn torque_at_equilibrium_is_feedforward() {
        let inertia = InertiaMatrix::benchmark();
        let rest = ReferenceSample {
            q0: Quaternion::identity(),
            omega0: Vec3::zeros(),
            omega0_dot: Vec3::zeros(),
        };
        let s = BodyState::new(Quaternion::identity(), Vec3::zeros());
        assert_eq!(control_torque(&s, &rest, &g(), &inertia), Vec3::zeros());

        let r = benchmark_reference(0.4);
        let s = BodyState::new(r.q0, r.omega0);
        let tau = control_torque(&s, &r, &g(), &inertia);
        let ff = -inertia.apply(&r.omega0).cross(&r.omega0) + inertia.apply(&r.omega0_dot);
        assert!((tau - ff).norm() < 1e-12);
    }

    #[test]
    fn robust_law_subtracts_estimate() {
        let inertia = InertiaMatrix::benchmark();
        let rg = RobustGains::new(g(), 1000.0, 2.0).unwrap();
        let r = benchmark_reference(0.2);
        let s = BodyState::new(
            Quaternion::new(0.9, 0.1, 0.2, 0.3),
            Vec3::new(0.5, -0.2, 1.0),
        );
        let base = control_torque(&s, &r, &g(), &inertia);
        assert_eq!(
            robust_control_torque(&s, &r, &rg, &inertia, &EstimatorState::default()),
            base
        );
        let est = EstimatorState {
            delta_hat: Vec3::new(1.0, 2.0, 3.0),
        };
        assert_eq!(
            robust_control_torque(&s, &r, &rg, &inertia, &est),
            base - est.delta_hat
        );
    }

    #[test]
    fn estimator_values() {
        let inertia = InertiaMatrix::benchmark();
        let rg = RobustGains::new(g(), 1000.0, 2.0).unwrap();
        let e = err(0.0, [0.0; 3], [1.0, 2.0, 3.0]);
        assert_eq!(
            estimator_derivative(&e, &e.e_omega, &rg, &inertia),
            Vec3::zeros()
        );
        let e = err(0.0, [0.0; 3], [1.0, 0.0, 0.0]);
        let d = estimator_derivative(&e, &Vec3::zeros(), &rg, &inertia);
        assert!((d.x - 1000.0 / 6.0 / 4.250).abs() < 1e-12);
        assert!((d.x - 39.2157).abs() < 1e-4);
        assert_eq!((d.y, d.z), (0.0, 0.0));
    }

    #[test]
    fn lyapunov_zero_and_aux() {
        let z = TrackingError::zero();
        let rg = RobustGains::new(g(), 10.0, 1.0).unwrap();
        assert_eq!(lyapunov_v0(&z), 0.0);
        assert_eq!(lyapunov_vk1(&z, 1.0, &g()), 0.0);
        assert_eq!(lyapunov_v(&z, 1.0, &rg, &Vec3::zeros()), 0.0);
        assert_eq!(v_aux(&Quaternion::identity()), 0.0);
        assert_eq!(v_aux(&Quaternion::new(1.0, 1.0, 0.0, 0.0)), 0.25);
    }

    #[test]
    fn region_spec_bounds() {
        assert!(RegionSpec::new(0.0, 0.0).is_err());
        assert!(RegionSpec::new(2.0, 0.0).is_err());
        // c = 1.5: 2 - sqrt(3) ~ 0.268
        assert!(RegionSpec::new(1.5, 0.26).is_ok());
        assert!(RegionSpec::new(1.5, 0.27).is_err());
        assert!(RegionSpec::new(0.01, 1.0).is_err());
        assert!(RegionSpec::new(1.0, -0.1).is_err());
    }

    #[test]
    fn region_membership() {
        let spec = RegionSpec::new(1.0, 0.1).unwrap();
        let s = BodyState::new(Quaternion::identity(), Vec3::zeros());
        assert!(in_region_s(&s, &TrackingError::zero(), &spec, &g()));
        let big = Quaternion::identity().scale((1.0f64 + 0.2).sqrt());
        let s = BodyState::new(big, Vec3::zeros());
        assert!(!in_m_epsilon(&big, 0.1));
        assert!(!in_region_s(&s, &TrackingError::zero(), &spec, &g()));
    }

    #[test]
    fn feasible_gains_zero_error() {
        let f = feasible_gains(&TrackingError::zero(), 1.0, &g()).unwrap();
        assert_eq!(f.c, 1.0);
        assert_eq!(f.k1, 3.0);
        assert!(f.k_delta > 0.5);
        assert!((f.k_delta - 1.0 / (2.0 - 1e-3)).abs() < 1e-12);
    }

    #[test]
    fn feasible_gains_rejects_antipodal_and_non_unit() {
        let anti = err(-2.0, [0.0; 3], [0.0; 3]);
        assert!(matches!(
            feasible_gains(&anti, 1.0, &g()),
            Err(Error::Infeasible(_))
        ));
        let off = err(0.5, [0.0; 3], [0.0; 3]);
        assert!(matches!(
            feasible_gains(&off, 1.0, &g()),
            Err(Error::Infeasible(_))
        ));
        assert!(feasible_gains(&TrackingError::zero(), 0.0, &g()).is_err());
    }

    #[test]
    fn feasible_gains_half_sphere() {
        // unit q at 90 degrees from q0: |e_q|^2 = 2
        let q = Quaternion::new(0.0, 1.0, 0.0, 0.0);
        let e = TrackingError {
            e_q: q - Quaternion::identity(),
            e_omega: Vec3::new(0.3, -1.0, 2.0),
        };
        assert!((e.e_q.norm_sq() - 2.0).abs() < 1e-15);
        let f = feasible_gains(&e, 1.0, &g()).unwrap();
        assert!(f.c > 1.0 && f.c < 2.0);
        assert!(f.k_delta > 1.0 / (2.0 * f.c));
    }
}
