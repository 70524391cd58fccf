//! Executable property checks behind `quattrack verify`.
//!
//! Each check reports a measured residual (or violation count) against its
//! tolerance. All randomness is seeded, so a run is reproducible.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{
    embedded_field, norm_sq_drift, rigid_field, BodyState, DisturbanceModel, EmbeddingParams,
    InertiaMatrix,
};
use crate::error::{Error, Result};
use crate::quat::{Quaternion, Vec3};
use crate::reference::{consistency_residual, BenchmarkReference, ReferenceTrajectory};
use crate::sim::{
    case_study, evaluate_closed_loop, offset_start, rk4, rk4_step, simulate, AugmentedState,
    ControlLaw, ScenarioConfig,
};
use crate::tracking::{
    compute_error, feasible_gains, lyapunov_v, lyapunov_v0, lyapunov_vk1, v0_rate,
    vk1_decrease_bound, ControllerGains, RegionSpec, RobustGains, TrackingError,
};

pub const ATOL: f64 = 1e-12;
pub const RTOL: f64 = 1e-9;
const CASES: usize = 1000;
const SEED: u64 = 0x5eed_a771;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Algebra,
    Dynamics,
    Lyapunov,
    All,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "algebra" => Ok(Suite::Algebra),
            "dynamics" => Ok(Suite::Dynamics),
            "lyapunov" => Ok(Suite::Lyapunov),
            "all" => Ok(Suite::All),
            _ => Err(Error::invalid("suite", format!("unknown `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub suite: &'static str,
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl PropertyCheck {
    fn residual(suite: &'static str, name: &'static str, measured: f64, tolerance: f64) -> Self {
        Self {
            suite,
            name,
            measured,
            tolerance,
            passed: measured <= tolerance,
        }
    }

    fn flag(suite: &'static str, name: &'static str, failures: usize) -> Self {
        Self {
            suite,
            name,
            measured: failures as f64,
            tolerance: 0.0,
            passed: failures == 0,
        }
    }
}

impl fmt::Display for PropertyCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:<9} {:<44} measured {:.3e}  tol {:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.measured,
            self.tolerance
        )
    }
}

pub fn run(suite: Suite) -> Vec<PropertyCheck> {
    match suite {
        Suite::Algebra => algebra(),
        Suite::Dynamics => dynamics(),
        Suite::Lyapunov => lyapunov(),
        Suite::All => {
            let mut v = algebra();
            v.extend(dynamics());
            v.extend(lyapunov());
            v
        }
    }
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED)
}

pub fn random_quat<R: Rng>(rng: &mut R) -> Quaternion {
    Quaternion::new(
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
    )
}

pub fn random_vec<R: Rng>(rng: &mut R, scale: f64) -> Vec3 {
    Vec3::new(
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    )
}

pub fn random_unit_quat<R: Rng>(rng: &mut R) -> Quaternion {
    loop {
        let q = random_quat(rng);
        let n = q.norm();
        if n > 1e-3 {
            return q.scale(1.0 / n);
        }
    }
}

/// Largest componentwise mismatch, normalized by the mixed tolerance, so
/// that values <= 1 pass.
fn quat_excess(p: &Quaternion, q: &Quaternion) -> f64 {
    p.to_array()
        .iter()
        .zip(q.to_array())
        .map(|(a, b)| (a - b).abs() / (ATOL + RTOL * a.abs().max(b.abs())))
        .fold(0.0, f64::max)
}

fn algebra() -> Vec<PropertyCheck> {
    const S: &str = "algebra";
    let mut rng = rng();
    let mut assoc = 0.0f64;
    let mut anti = 0.0f64;
    let mut mult = 0.0f64;
    let mut norm_id = 0.0f64;
    let mut sandwich = 0.0f64;
    for _ in 0..CASES {
        let (p, q, r) = (
            random_quat(&mut rng),
            random_quat(&mut rng),
            random_quat(&mut rng),
        );
        assoc = assoc.max(quat_excess(&((p * q) * r), &(p * (q * r))));
        anti = anti.max(quat_excess(&(p * q).conj(), &(q.conj() * p.conj())));
        mult = mult.max(((p * q).norm() - p.norm() * q.norm()).abs() / (p.norm() * q.norm()));
        let n2 = Quaternion::new(q.norm_sq(), 0.0, 0.0, 0.0);
        norm_id = norm_id
            .max(quat_excess(&(q.conj() * q), &n2))
            .max(quat_excess(&(q * q.conj()), &n2));
        let u = random_unit_quat(&mut rng);
        let w = Quaternion::pure(random_vec(&mut rng, 5.0));
        sandwich = sandwich.max((u.conj() * w * u).scalar_part().abs());
    }
    let i = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    let j = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    let noncomm = (i * j != -(j * i)) as usize + (i * j == j * i) as usize;
    vec![
        PropertyCheck::residual(S, "associativity (scaled excess)", assoc, 1.0),
        PropertyCheck::residual(S, "conjugation reverses products (scaled)", anti, 1.0),
        PropertyCheck::residual(S, "norm multiplicativity (relative)", mult, 1e-12),
        PropertyCheck::residual(S, "|q|^2 = q*q = qq* (scaled)", norm_id, 1.0),
        PropertyCheck::residual(S, "q* w q is pure", sandwich, ATOL),
        PropertyCheck::flag(S, "ij = -ji", noncomm),
    ]
}

type Flat7 = [f64; 7];

fn open_loop(q: &Quaternion, omega: &Vec3) -> Flat7 {
    [q.s, q.v.x, q.v.y, q.v.z, omega.x, omega.y, omega.z]
}

fn unpack7(y: &Flat7) -> BodyState {
    BodyState::new(
        Quaternion::new(y[0], y[1], y[2], y[3]),
        Vec3::new(y[4], y[5], y[6]),
    )
}

/// Embedded plant under a torque program.
fn plant_rhs<'a>(
    inertia: &'a InertiaMatrix,
    params: &'a EmbeddingParams,
    torque: impl Fn(f64) -> Vec3 + 'a,
) -> impl Fn(f64, &Flat7) -> Flat7 + 'a {
    move |t, y| {
        let d = embedded_field(&unpack7(y), &torque(t), inertia, params);
        open_loop(&d.q_dot, &d.omega_dot)
    }
}

/// `V(t) = 1 / (1 + (1/V0 - 1) exp(-2 alpha t))` solves `V' = -2 alpha (V - 1) V`.
pub fn logistic_norm_sq(v0: f64, alpha: f64, t: f64) -> f64 {
    1.0 / (1.0 + (1.0 / v0 - 1.0) * (-2.0 * alpha * t).exp())
}

fn dynamics() -> Vec<PropertyCheck> {
    const S: &str = "dynamics";
    let mut rng = rng();
    let inertia = InertiaMatrix::benchmark();
    let params = EmbeddingParams::default();
    let mut out = Vec::new();

    let mut reduction = 0.0f64;
    for _ in 0..CASES {
        let s = BodyState::new(random_unit_quat(&mut rng), random_vec(&mut rng, 3.0));
        let tau = random_vec(&mut rng, 3.0);
        let a = rigid_field(&s, &tau, &inertia);
        let b = embedded_field(&s, &tau, &inertia, &params);
        reduction = reduction
            .max((a.q_dot - b.q_dot).norm())
            .max((a.omega_dot - b.omega_dot).norm());
    }
    out.push(PropertyCheck::residual(
        S,
        "embedded = rigid on the unit sphere",
        reduction,
        ATOL,
    ));

    // squared-norm drift along a forced trajectory started off the sphere
    let torque = |t: f64| Vec3::new(t.sin(), 2.0 * (0.5 * t).cos(), -1.0);
    let f = plant_rhs(&inertia, &params, torque);
    let mut y = open_loop(
        &Quaternion::new(1.0, 0.5, -0.5, 0.5).scale(2f64.sqrt() / 1.3229),
        &Vec3::new(0.3, -1.0, 0.8),
    );
    let (dt, h) = (1e-3, 1e-5);
    let mut drift = 0.0f64;
    for i in 0..3000 {
        let t = i as f64 * dt;
        if i % 100 == 0 {
            let fwd = unpack7(&rk4(&f, t, &y, h)).q.norm_sq();
            let back = unpack7(&rk4(&f, t, &y, -h)).q.norm_sq();
            let fd = (fwd - back) / (2.0 * h);
            drift = drift.max((fd - norm_sq_drift(&unpack7(&y).q, params.alpha())).abs());
        }
        y = rk4(&f, t, &y, dt);
    }
    out.push(PropertyCheck::residual(
        S,
        "d|q|^2/dt matches drift law",
        drift,
        1e-6,
    ));

    // unit sphere stays invariant under integration
    let free = plant_rhs(&inertia, &params, |_| Vec3::zeros());
    let mut y = open_loop(&random_unit_quat(&mut rng), &Vec3::new(1.0, -2.0, 0.5));
    let mut inv = 0.0f64;
    for i in 0..30_000 {
        y = rk4(&free, i as f64 * 1e-3, &y, 1e-3);
        inv = inv.max((unpack7(&y).q.norm() - 1.0).abs());
    }
    out.push(PropertyCheck::residual(
        S,
        "unit sphere invariant over 30 s",
        inv,
        1e-9,
    ));

    // attraction from inside and outside
    let mut not_monotone = 0usize;
    let mut final_gap = 0.0f64;
    let mut logistic = 0.0f64;
    for v0 in [0.25f64, 4.0] {
        let mut y = open_loop(
            &Quaternion::new(0.5, 0.5, 0.5, 0.5).scale(v0.sqrt()),
            &Vec3::new(0.4, 0.1, -0.7),
        );
        let mut prev = (unpack7(&y).q.norm_sq() - 1.0).abs();
        let mut v = [v0];
        let scalar = |_: f64, x: &[f64; 1]| [-2.0 * params.alpha() * (x[0] - 1.0) * x[0]];
        for i in 0..10_000 {
            let t = i as f64 * 1e-3;
            y = rk4(&free, t, &y, 1e-3);
            v = rk4(scalar, t, &v, 1e-3);
            let gap = (unpack7(&y).q.norm_sq() - 1.0).abs();
            not_monotone += (gap >= prev) as usize;
            prev = gap;
            logistic = logistic.max((v[0] - logistic_norm_sq(v0, params.alpha(), t + 1e-3)).abs());
        }
        final_gap = final_gap.max(prev);
    }
    out.push(PropertyCheck::flag(
        S,
        "||q|^2-1| strictly decreasing",
        not_monotone,
    ));
    out.push(PropertyCheck::residual(
        S,
        "||q|^2-1| at t = 10 s",
        final_gap,
        1e-6,
    ));
    out.push(PropertyCheck::residual(
        S,
        "RK4 matches logistic closed form",
        logistic,
        1e-8,
    ));

    let mut unit = 0.0f64;
    let mut consistency = 0.0f64;
    for i in 0..1000 {
        let t = 1e-3 + i as f64 * 4.0 * std::f64::consts::PI / 999.0;
        unit = unit.max((BenchmarkReference.attitude(t).norm() - 1.0).abs());
        consistency = consistency.max(consistency_residual(&BenchmarkReference, t));
    }
    out.push(PropertyCheck::residual(
        S,
        "reference unit norm",
        unit,
        1e-9,
    ));
    out.push(PropertyCheck::residual(
        S,
        "reference kinematic consistency",
        consistency,
        1e-5,
    ));
    out
}

/// Central difference of `f` along the closed loop at `(aug, t)`.
pub fn closed_loop_rate(
    cfg: &ScenarioConfig,
    aug: &AugmentedState,
    t: f64,
    h: f64,
    f: impl Fn(&AugmentedState, f64) -> f64,
) -> Result<f64> {
    let fwd = rk4_step(aug, t, h, cfg)?;
    let back = rk4_step(aug, t, -h, cfg)?;
    Ok((f(&fwd, t + h) - f(&back, t - h)) / (2.0 * h))
}

fn error_at(cfg: &ScenarioConfig, aug: &AugmentedState, t: f64) -> TrackingError {
    compute_error(&aug.body(), &cfg.reference.sample(t))
}

/// Largest excess of the finite-difference Lyapunov rate over the decrease
/// bound at every `stride`-th step, plus the count of samples where the
/// excess passes `slack`.
pub fn decrease_bound_excess(
    cfg: &ScenarioConfig,
    region: &RegionSpec,
    stride: usize,
    slack: f64,
) -> Result<(f64, usize)> {
    let g = *cfg.law.base();
    let lyap = |a: &AugmentedState, t: f64| -> f64 {
        let e = error_at(cfg, a, t);
        match &cfg.law {
            ControlLaw::NonRobust(g) => lyapunov_vk1(&e, a.q.norm_sq(), g),
            ControlLaw::Robust(rg) => lyapunov_v(
                &e,
                a.q.norm_sq(),
                rg,
                &(cfg.disturbance.eval(t) - a.delta_hat),
            ),
        }
    };
    let mut aug = cfg.initial_state();
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    for i in 0..=cfg.step_count() {
        let t = i as f64 * cfg.dt;
        if i % stride == 0 {
            let rate = closed_loop_rate(cfg, &aug, t, 1e-4, lyap)?;
            let e = error_at(cfg, &aug, t);
            let excess = rate - vk1_decrease_bound(&e, aug.q.norm_sq(), &g, region);
            worst = worst.max(excess);
            violations += (excess > slack) as usize;
        }
        if i < cfg.step_count() {
            aug = rk4_step(&aug, t, cfg.dt, cfg)?;
        }
    }
    Ok((worst, violations))
}

fn lyapunov() -> Vec<PropertyCheck> {
    const S: &str = "lyapunov";
    let mut rng = rng();
    let mut out = Vec::new();
    let run_failed = |name| PropertyCheck::flag(S, name, usize::MAX);

    let mut identity = 0.0f64;
    for _ in 0..CASES {
        let q0 = random_unit_quat(&mut rng);
        let q = random_quat(&mut rng);
        let e = compute_error(
            &BodyState::new(q, Vec3::zeros()),
            &crate::tracking::ReferenceSample {
                q0,
                omega0: Vec3::zeros(),
                omega0_dot: Vec3::zeros(),
            },
        );
        let rhs = 1.0 + 2.0 * e.e_s() + e.e_s() * e.e_s() + e.e_v().norm_squared();
        identity = identity.max((q.norm_sq() - rhs).abs() / q.norm_sq().max(1.0));
    }
    out.push(PropertyCheck::residual(
        S,
        "|q|^2 from e_q identity",
        identity,
        ATOL,
    ));

    // V0 rate along the antipodal robust run, any torque
    let case1 = case_study(1).expect("preset");
    let lemma = (|| -> Result<f64> {
        let mut aug = case1.initial_state();
        let mut worst = 0.0f64;
        for i in 0..20_000 {
            let t = i as f64 * case1.dt;
            if i % 50 == 0 {
                let fd = closed_loop_rate(&case1, &aug, t, 1e-4, |a, s| {
                    lyapunov_v0(&error_at(&case1, a, s))
                })?;
                let e = error_at(&case1, &aug, t);
                worst = worst.max((fd - v0_rate(&e, aug.q.norm_sq(), 1.0)).abs());
            }
            aug = rk4_step(&aug, t, case1.dt, &case1)?;
        }
        Ok(worst)
    })();
    out.push(match lemma {
        Ok(w) => PropertyCheck::residual(S, "V0 rate matches closed form", w, 1e-6),
        Err(_) => run_failed("V0 rate matches closed form"),
    });

    let t1 = offset_start(0.5).expect("preset");
    let region = t1.region.expect("offset start has a region");
    out.push(match decrease_bound_excess(&t1, &region, 10, 1e-6) {
        Ok((_, v)) => PropertyCheck::flag(S, "V_k1 rate below decrease bound", v),
        Err(_) => run_failed("V_k1 rate below decrease bound"),
    });
    out.push(match simulate(&t1) {
        Ok((trace, m)) => {
            let never_left = m.region_exits + m.m_epsilon_exits;
            let first = trace.records[0].flags.in_s != Some(true);
            PropertyCheck::flag(
                S,
                "certified region positively invariant",
                never_left + first as usize,
            )
        }
        Err(_) => run_failed("certified region positively invariant"),
    });

    // robust loop started inside its region with a constant disturbance
    let mut t2 = t1.clone();
    t2.law = ControlLaw::Robust(
        RobustGains::new(ControllerGains::benchmark(), 1000.0, 3f64.sqrt()).expect("gains"),
    );
    t2.disturbance = DisturbanceModel::Constant(Vec3::new(1.0, 1.0, 1.0));
    out.push(match decrease_bound_excess(&t2, &region, 10, 1e-6) {
        Ok((_, v)) => PropertyCheck::flag(S, "V rate below decrease bound (robust)", v),
        Err(_) => run_failed("V rate below decrease bound (robust)"),
    });

    // exact estimate cancels the disturbance pointwise
    let mut cancel = 0.0f64;
    let mut undisturbed = case_study(3).expect("preset");
    undisturbed.disturbance = DisturbanceModel::None;
    let mut robust = case_study(1).expect("preset");
    for _ in 0..CASES {
        let delta = random_vec(&mut rng, 2.0);
        robust.disturbance = DisturbanceModel::Constant(delta);
        let t = rng.random_range(0.0..10.0);
        let aug = AugmentedState {
            q: random_quat(&mut rng),
            omega: random_vec(&mut rng, 3.0),
            delta_hat: delta,
        };
        let a = evaluate_closed_loop(&aug, t, &robust).derivative.omega;
        let b = evaluate_closed_loop(&aug, t, &undisturbed).derivative.omega;
        cancel = cancel.max(quat_excess(&Quaternion::pure(a), &Quaternion::pure(b)));
    }
    out.push(PropertyCheck::residual(
        S,
        "exact estimate cancels disturbance (scaled)",
        cancel,
        1.0,
    ));

    // constructive gains satisfy the robust initial condition
    let mut infeasible_gaps = 0usize;
    let g0 = ControllerGains::benchmark();
    for _ in 0..100 {
        let q = random_unit_quat(&mut rng);
        let e0 = TrackingError {
            e_q: q - Quaternion::identity(),
            e_omega: random_vec(&mut rng, 3.0),
        };
        if e0.e_q.norm() >= 2.0 {
            continue;
        }
        let ok = feasible_gains(&e0, 1.0, &g0).is_ok_and(|f| {
            let g = ControllerGains { k1: f.k1, ..g0 };
            let w = e0.e_omega - crate::tracking::eta(&e0, 1.0, &g);
            w.norm_squared() / (4.0 * f.k1) + 1.0 / (2.0 * f.k_delta) < f.c - 0.5 * e0.e_q.norm_sq()
                && f.k_delta > 1.0 / (2.0 * f.c)
        });
        infeasible_gaps += (!ok) as usize;
    }
    let anti = TrackingError {
        e_q: Quaternion::new(-2.0, 0.0, 0.0, 0.0),
        e_omega: Vec3::zeros(),
    };
    infeasible_gaps += feasible_gains(&anti, 1.0, &g0).is_ok() as usize;
    out.push(PropertyCheck::flag(
        S,
        "feasible gains certify initial errors",
        infeasible_gaps,
    ));

    out.push(match simulate(&case1) {
        Ok((_, m)) => PropertyCheck::flag(
            S,
            "case 1 V_k1 non-increasing inside S",
            m.vk1_monotonicity_violations,
        ),
        Err(_) => run_failed("case 1 V_k1 non-increasing inside S"),
    });
    out
}
