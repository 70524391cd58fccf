//! Fixed-step closed-loop simulation.
//!
//! The integrated state is `(q, omega, delta_hat)`, ten components, stepped
//! with classical RK4. The attitude is never renormalized; the embedding
//! term in the plant is the only thing holding `|q|` at one.

use std::f64::consts::FRAC_PI_6;

use crate::dynamics::{
    disturbed_embedded_field, BodyState, DisturbanceModel, EmbeddingParams, InertiaMatrix,
};
use crate::error::{Error, Result};
use crate::quat::{Quaternion, Vec3};
use crate::reference::{benchmark_reference, ReferenceKind};
use crate::tracking::{
    compute_error, control_torque, estimator_derivative, eta, in_m_epsilon, in_region_s,
    in_region_s_robust, lyapunov_vk1, v_aux, ControllerGains, ReferenceSample, RegionSpec,
    RobustGains, TrackingError,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlLaw {
    NonRobust(ControllerGains),
    Robust(RobustGains),
}

impl ControlLaw {
    pub fn base(&self) -> &ControllerGains {
        match self {
            ControlLaw::NonRobust(g) => g,
            ControlLaw::Robust(rg) => &rg.base,
        }
    }

    pub fn base_mut(&mut self) -> &mut ControllerGains {
        match self {
            ControlLaw::NonRobust(g) => g,
            ControlLaw::Robust(rg) => &mut rg.base,
        }
    }

    pub fn is_robust(&self) -> bool {
        matches!(self, ControlLaw::Robust(_))
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub inertia: InertiaMatrix,
    pub law: ControlLaw,
    pub disturbance: DisturbanceModel,
    pub reference: ReferenceKind,
    pub initial_q: Quaternion,
    pub initial_omega: Vec3,
    /// Certified region to monitor, if any.
    pub region: Option<RegionSpec>,
    pub dt: f64,
    pub t_end: f64,
    pub record_stride: usize,
    /// Window for the RMS rate-error metric, s.
    pub metrics_window: (f64, f64),
    /// Threshold on `|e_q|` for the settling-time metric.
    pub settle_threshold: f64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        match &self.law {
            ControlLaw::NonRobust(g) => g.validate()?,
            ControlLaw::Robust(rg) => {
                RobustGains::new(rg.base, rg.k_delta, rg.delta_bound)?;
            }
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", "must be finite and > 0"));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::invalid("t_end", "must be finite and >= 0"));
        }
        if self.record_stride == 0 {
            return Err(Error::invalid("record_stride", "must be >= 1"));
        }
        if !self.initial_q.is_finite() {
            return Err(Error::invalid("initial.q", "non-finite component"));
        }
        if !self.initial_omega.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("initial.omega", "non-finite component"));
        }
        if !self.disturbance.eval(0.0).iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("disturbance", "non-finite at t = 0"));
        }
        Ok(())
    }

    pub fn step_count(&self) -> usize {
        // tolerate t_end / dt landing a hair below an integer
        ((self.t_end / self.dt) * (1.0 + 1e-12)).floor() as usize
    }

    pub fn initial_state(&self) -> AugmentedState {
        AugmentedState {
            q: self.initial_q,
            omega: self.initial_omega,
            delta_hat: Vec3::zeros(),
        }
    }
}

/// Plant state plus the disturbance estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentedState {
    pub q: Quaternion,
    pub omega: Vec3,
    pub delta_hat: Vec3,
}

impl AugmentedState {
    pub const DIM: usize = 10;

    pub fn body(&self) -> BodyState {
        BodyState::new(self.q, self.omega)
    }

    pub fn to_array(&self) -> [f64; 10] {
        let q = self.q.to_array();
        [
            q[0],
            q[1],
            q[2],
            q[3],
            self.omega.x,
            self.omega.y,
            self.omega.z,
            self.delta_hat.x,
            self.delta_hat.y,
            self.delta_hat.z,
        ]
    }

    pub fn from_array(a: &[f64; 10]) -> Self {
        Self {
            q: Quaternion::new(a[0], a[1], a[2], a[3]),
            omega: Vec3::new(a[4], a[5], a[6]),
            delta_hat: Vec3::new(a[7], a[8], a[9]),
        }
    }

    fn first_non_finite(&self) -> Option<&'static str> {
        if !self.q.is_finite() {
            Some("q")
        } else if !self.omega.iter().all(|c| c.is_finite()) {
            Some("omega")
        } else if !self.delta_hat.iter().all(|c| c.is_finite()) {
            Some("delta_hat")
        } else {
            None
        }
    }
}

/// Everything the controller computes at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopEval {
    pub reference: ReferenceSample,
    pub error: TrackingError,
    pub eta: Vec3,
    pub tau: Vec3,
    pub disturbance: Vec3,
    pub derivative: AugmentedState,
}

pub fn evaluate_closed_loop(aug: &AugmentedState, t: f64, cfg: &ScenarioConfig) -> LoopEval {
    let r = cfg.reference.sample(t);
    let body = aug.body();
    let g = cfg.law.base();
    let e = compute_error(&body, &r);
    let eta_val = eta(&e, aug.q.norm_sq(), g);
    let tau = match &cfg.law {
        ControlLaw::NonRobust(g) => control_torque(&body, &r, g, &cfg.inertia),
        ControlLaw::Robust(rg) => control_torque(&body, &r, &rg.base, &cfg.inertia) - aug.delta_hat,
    };
    let delta_hat_dot = match &cfg.law {
        ControlLaw::NonRobust(_) => Vec3::zeros(),
        ControlLaw::Robust(rg) => estimator_derivative(&e, &eta_val, rg, &cfg.inertia),
    };
    let params = EmbeddingParams::new(g.alpha).unwrap_or_default();
    let plant = disturbed_embedded_field(&body, &tau, &cfg.inertia, &params, &cfg.disturbance, t);
    LoopEval {
        reference: r,
        error: e,
        eta: eta_val,
        tau,
        disturbance: cfg.disturbance.eval(t),
        derivative: AugmentedState {
            q: plant.q_dot,
            omega: plant.omega_dot,
            delta_hat: delta_hat_dot,
        },
    }
}

pub fn closed_loop_derivative(
    aug: &AugmentedState,
    t: f64,
    cfg: &ScenarioConfig,
) -> AugmentedState {
    evaluate_closed_loop(aug, t, cfg).derivative
}

/// One classical fourth-order Runge-Kutta step of `y' = f(t, y)`.
pub fn rk4<const N: usize, F>(f: F, t: f64, y: &[f64; N], dt: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let axpy = |a: &[f64; N], k: &[f64; N], h: f64| -> [f64; N] {
        std::array::from_fn(|i| a[i] + h * k[i])
    };
    let half = 0.5 * dt;
    let k1 = f(t, y);
    let k2 = f(t + half, &axpy(y, &k1, half));
    let k3 = f(t + half, &axpy(y, &k2, half));
    let k4 = f(t + dt, &axpy(y, &k3, dt));
    std::array::from_fn(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

pub fn rk4_step(
    aug: &AugmentedState,
    t: f64,
    dt: f64,
    cfg: &ScenarioConfig,
) -> Result<AugmentedState> {
    let f = |s: f64, y: &[f64; 10]| {
        closed_loop_derivative(&AugmentedState::from_array(y), s, cfg).to_array()
    };
    let next = AugmentedState::from_array(&rk4(f, t, &aug.to_array(), dt));
    match next.first_non_finite() {
        Some(component) => Err(Error::NumericalAbort {
            t: t + dt,
            component,
        }),
        None => Ok(next),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RegionFlags {
    /// `q != 0`.
    pub in_h0: bool,
    pub in_m_epsilon: Option<bool>,
    /// Certified sublevel set: the robust one (with the true disturbance
    /// error) in robust mode, otherwise the non-robust one.
    pub in_s: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub q: Quaternion,
    pub omega: Vec3,
    pub e_q: Quaternion,
    pub e_omega: Vec3,
    pub delta_hat: Vec3,
    /// True disturbance at `t`, known to the harness only.
    pub delta: Vec3,
    pub tau: Vec3,
    pub vk1: f64,
    pub vaux: f64,
    pub flags: RegionFlags,
}

impl TraceRecord {
    pub fn delta_error(&self) -> Vec3 {
        self.delta - self.delta_hat
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimulationTrace {
    pub records: Vec<TraceRecord>,
}

impl SimulationTrace {
    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// Records with `t` in the closed interval `[a, b]`.
    pub fn window(&self, a: f64, b: f64) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter().filter(move |r| r.t >= a && r.t <= b)
    }
}

/// Increases of `V_k1` smaller than this are round-off, not violations.
pub const MONOTONICITY_FLOOR: f64 = 1e-18;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunMetrics {
    pub final_eq_norm: f64,
    pub final_ew_norm: f64,
    pub final_delta_err_norm: f64,
    /// RMS of `|e_omega|` over the metrics window, `None` if no record falls in it.
    pub rms_ew: Option<f64>,
    pub rms_window: (f64, f64),
    pub settle_time_eq: Option<f64>,
    /// Record-to-record increases of `V_k1` after the first entry into the
    /// monitored region (from `t = 0` when no region is configured).
    pub vk1_monotonicity_violations: usize,
    pub starts_in_region: Option<bool>,
    pub region_entry_time: Option<f64>,
    /// Records that left the monitored region after first entry.
    pub region_exits: usize,
    pub m_epsilon_exits: usize,
    /// Largest `||q| - 1|` over every integration step.
    pub max_unit_norm_drift: f64,
    pub left_h0: bool,
}

fn region_flags(aug: &AugmentedState, ev: &LoopEval, cfg: &ScenarioConfig) -> RegionFlags {
    let body = aug.body();
    let (in_m, in_s) = match &cfg.region {
        None => (None, None),
        Some(spec) => {
            let in_s = match &cfg.law {
                ControlLaw::NonRobust(g) => in_region_s(&body, &ev.error, spec, g),
                ControlLaw::Robust(rg) => {
                    let e_delta = ev.disturbance - aug.delta_hat;
                    in_region_s_robust(&body, &ev.error, &e_delta, spec, rg)
                }
            };
            (Some(in_m_epsilon(&aug.q, spec.epsilon())), Some(in_s))
        }
    };
    RegionFlags {
        in_h0: body.in_convergence_region(),
        in_m_epsilon: in_m,
        in_s,
    }
}

fn record(aug: &AugmentedState, t: f64, cfg: &ScenarioConfig) -> TraceRecord {
    let ev = evaluate_closed_loop(aug, t, cfg);
    TraceRecord {
        t,
        q: aug.q,
        omega: aug.omega,
        e_q: ev.error.e_q,
        e_omega: ev.error.e_omega,
        delta_hat: aug.delta_hat,
        delta: ev.disturbance,
        tau: ev.tau,
        vk1: lyapunov_vk1(&ev.error, aug.q.norm_sq(), cfg.law.base()),
        vaux: v_aux(&aug.q),
        flags: region_flags(aug, &ev, cfg),
    }
}

/// Integrates the scenario from `t = 0` to `t_end`, recording every
/// `record_stride` steps.
pub fn simulate(cfg: &ScenarioConfig) -> Result<(SimulationTrace, RunMetrics)> {
    cfg.validate()?;
    let n = cfg.step_count();
    let mut records = Vec::with_capacity(n / cfg.record_stride + 1);
    let mut aug = cfg.initial_state();
    let mut max_drift = (aug.q.norm() - 1.0).abs();
    let mut left_h0 = false;
    records.push(record(&aug, 0.0, cfg));
    for i in 0..n {
        let t = i as f64 * cfg.dt;
        aug = rk4_step(&aug, t, cfg.dt, cfg)?;
        max_drift = max_drift.max((aug.q.norm() - 1.0).abs());
        left_h0 |= aug.q.norm_sq() == 0.0;
        if (i + 1) % cfg.record_stride == 0 {
            records.push(record(&aug, (i + 1) as f64 * cfg.dt, cfg));
        }
    }
    let trace = SimulationTrace { records };
    let mut metrics = compute_metrics(&trace, cfg.metrics_window, cfg.settle_threshold);
    metrics.max_unit_norm_drift = max_drift;
    metrics.left_h0 = left_h0;
    Ok((trace, metrics))
}

pub fn compute_metrics(
    trace: &SimulationTrace,
    window: (f64, f64),
    settle_threshold: f64,
) -> RunMetrics {
    let recs = &trace.records;
    let Some(last) = recs.last() else {
        return RunMetrics::default();
    };

    let in_window: Vec<f64> = trace
        .window(window.0, window.1)
        .map(|r| r.e_omega.norm_squared())
        .collect();
    let rms_ew = (!in_window.is_empty())
        .then(|| (in_window.iter().sum::<f64>() / in_window.len() as f64).sqrt());

    // first t after which |e_q| stays below the threshold
    let settle_time_eq = match recs.iter().rposition(|r| r.e_q.norm() >= settle_threshold) {
        None => Some(recs[0].t),
        Some(i) if i + 1 < recs.len() => Some(recs[i + 1].t),
        Some(_) => None,
    };

    let entry = match recs[0].flags.in_s {
        None => Some(0),
        Some(_) => recs.iter().position(|r| r.flags.in_s == Some(true)),
    };
    let (vk1_violations, region_exits) = match entry {
        None => (0, 0),
        Some(k) => {
            let tail = &recs[k..];
            let viol = tail
                .windows(2)
                .filter(|w| w[1].vk1 > w[0].vk1 + MONOTONICITY_FLOOR)
                .count();
            let exits = tail.iter().filter(|r| r.flags.in_s == Some(false)).count();
            (viol, exits)
        }
    };
    let m_epsilon_exits = match recs.iter().position(|r| r.flags.in_m_epsilon == Some(true)) {
        None => 0,
        Some(k) => recs[k..]
            .iter()
            .filter(|r| r.flags.in_m_epsilon == Some(false))
            .count(),
    };

    RunMetrics {
        final_eq_norm: last.e_q.norm(),
        final_ew_norm: last.e_omega.norm(),
        final_delta_err_norm: last.delta_error().norm(),
        rms_ew,
        rms_window: window,
        settle_time_eq,
        vk1_monotonicity_violations: vk1_violations,
        starts_in_region: recs[0].flags.in_s,
        region_entry_time: entry
            .filter(|_| recs[0].flags.in_s.is_some())
            .map(|k| recs[k].t),
        region_exits,
        m_epsilon_exits,
        max_unit_norm_drift: recs
            .iter()
            .map(|r| (r.q.norm() - 1.0).abs())
            .fold(0.0, f64::max),
        left_h0: recs.iter().any(|r| !r.flags.in_h0),
    }
}

/// Disturbance amplitude used by the benchmark scenarios, N m per axis.
pub const CASE_DISTURBANCE: Vec3 = Vec3::new(1.0, 1.0, 1.0);
pub const CASE_K_DELTA: f64 = 1000.0;

/// Preset scenarios 1 to 3: constant disturbance with the robust law,
/// sinusoidal disturbance with the robust law, and sinusoidal disturbance
/// with the non-robust law. All start at the antipode of the reference
/// with the reference rate at `t = pi/6`.
pub fn case_study(n: u8) -> Result<ScenarioConfig> {
    let base = ControllerGains::benchmark();
    let robust = RobustGains::new(base, CASE_K_DELTA, 3.0f64.sqrt())?;
    let sinusoid = DisturbanceModel::Sinusoidal {
        amplitude: CASE_DISTURBANCE,
        frequency: 0.5,
    };
    let (law, disturbance) = match n {
        1 => (
            ControlLaw::Robust(robust),
            DisturbanceModel::Constant(CASE_DISTURBANCE),
        ),
        2 => (ControlLaw::Robust(robust), sinusoid),
        3 => (ControlLaw::NonRobust(base), sinusoid),
        _ => {
            return Err(Error::invalid(
                "n",
                format!("case study {n} does not exist (1, 2 or 3)"),
            ))
        }
    };
    Ok(ScenarioConfig {
        inertia: InertiaMatrix::benchmark(),
        law,
        disturbance,
        reference: ReferenceKind::Benchmark,
        initial_q: -benchmark_reference(0.0).q0,
        initial_omega: benchmark_reference(FRAC_PI_6).omega0,
        region: Some(RegionSpec::new(1.5, 0.1)?),
        dt: 1e-3,
        t_end: 40.0,
        record_stride: 10,
        metrics_window: (20.0, 40.0),
        settle_threshold: 1e-2,
    })
}

/// Undisturbed non-robust benchmark started on the unit sphere with
/// attitude error `|e_q| = eq_norm` about the `(1, 1, 1)` axis and zero
/// rate error, monitored against the region `c = 1`, `epsilon = 0.1`.
pub fn offset_start(eq_norm: f64) -> Result<ScenarioConfig> {
    if !(0.0..2.0).contains(&eq_norm) {
        return Err(Error::invalid("eq_norm", "must lie in [0, 2)"));
    }
    // |q - q0|^2 = 2 - 2 cos(angle / 2) for unit q, q0
    let half_cos = 1.0 - 0.5 * eq_norm * eq_norm;
    let angle = 2.0 * half_cos.acos();
    let r0 = benchmark_reference(0.0);
    let offset = Quaternion::from_axis_angle(Vec3::new(1.0, 1.0, 1.0), angle);
    let mut cfg = case_study(3)?;
    cfg.disturbance = DisturbanceModel::None;
    cfg.initial_q = r0.q0 * offset;
    cfg.initial_omega = r0.omega0;
    cfg.region = Some(RegionSpec::new(1.0, 0.1)?);
    cfg.t_end = 20.0;
    Ok(cfg)
}
