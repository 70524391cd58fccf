//! Acceptance gate. Runs every criterion, prints one line each and exits
//! non-zero if any fails.

use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quattrack::output::write_trace_csv;
use quattrack::sim::{offset_start, rk4, rk4_step, AugmentedState};
use quattrack::tracking::{
    compute_error, error_field, eta, eta_dot, feasible_gains, FeasibleGains,
};
use quattrack::verify::{self, decrease_bound_excess, logistic_norm_sq, Suite};
use quattrack::{
    case_study, simulate, BodyState, ControllerGains, EmbeddingParams, InertiaMatrix, Quaternion,
    ScenarioConfig, TrackingError, Vec3,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn open_loop_rhs(
    inertia: &InertiaMatrix,
    params: EmbeddingParams,
) -> impl Fn(f64, &[f64; 7]) -> [f64; 7] + '_ {
    move |_, y| {
        let s = BodyState::new(
            Quaternion::new(y[0], y[1], y[2], y[3]),
            Vec3::new(y[4], y[5], y[6]),
        );
        let d = quattrack::dynamics::embedded_field(&s, &Vec3::zeros(), inertia, &params);
        [
            d.q_dot.s,
            d.q_dot.v.x,
            d.q_dot.v.y,
            d.q_dot.v.z,
            d.omega_dot.x,
            d.omega_dot.y,
            d.omega_dot.z,
        ]
    }
}

fn q_norm(y: &[f64; 7]) -> f64 {
    (y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3]).sqrt()
}

fn criterion_1() -> Outcome {
    let checks = verify::run(Suite::Algebra);
    let failed: Vec<_> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name)
        .collect();
    outcome(
        failed.is_empty(),
        format!("{} algebra properties, failed: {failed:?}", checks.len()),
    )
}

fn criterion_2() -> Outcome {
    let inertia = InertiaMatrix::benchmark();
    let f = open_loop_rhs(&inertia, EmbeddingParams::default());
    let h = 0.5f64.sqrt();
    let mut y = [h, 0.0, h, 0.0, 1.0, -2.0, 0.5];
    let mut worst = 0.0f64;
    for i in 0..30_000 {
        y = rk4(&f, i as f64 * 1e-3, &y, 1e-3);
        worst = worst.max((q_norm(&y) - 1.0).abs());
    }
    outcome(
        worst <= 1e-9,
        format!("max ||q|-1| = {worst:.3e} over 30 s"),
    )
}

fn criterion_3() -> Outcome {
    let inertia = InertiaMatrix::benchmark();
    let f = open_loop_rhs(&inertia, EmbeddingParams::default());
    let mut ok = true;
    let mut notes = Vec::new();
    for v0 in [0.25f64, 4.0] {
        let r = v0.sqrt() / 2.0;
        let mut y = [r, r, r, r, 0.4, 0.1, -0.7];
        let mut prev = (v0 - 1.0).abs();
        let mut monotone = true;
        for i in 0..10_000 {
            y = rk4(&f, i as f64 * 1e-3, &y, 1e-3);
            let gap = (q_norm(&y).powi(2) - 1.0).abs();
            monotone &= gap < prev;
            prev = gap;
        }
        // scalar logistic against its closed form
        let g = |_: f64, x: &[f64; 1]| [-2.0 * (x[0] - 1.0) * x[0]];
        let mut v = [v0];
        let mut closed = 0.0f64;
        for i in 0..10_000 {
            v = rk4(g, i as f64 * 1e-3, &v, 1e-3);
            closed = closed.max((v[0] - logistic_norm_sq(v0, 1.0, (i + 1) as f64 * 1e-3)).abs());
        }
        ok &= monotone && prev < 1e-6 && closed <= 1e-8;
        notes.push(format!(
            "|q0|^2={v0}: monotone={monotone} gap(10)={prev:.2e} closed-form err={closed:.2e}"
        ));
    }
    outcome(ok, notes.join("; "))
}

fn criterion_4() -> Outcome {
    let mut cfg = case_study(1).unwrap();
    cfg.dt = 1e-4;
    let dt = cfg.dt;
    let g = *cfg.law.base();
    let err = |a: &AugmentedState, t: f64| compute_error(&a.body(), &cfg.reference.sample(t));
    let mut prev = cfg.initial_state();
    let mut cur = rk4_step(&prev, 0.0, dt, &cfg).unwrap();
    let (mut worst_eq, mut worst_eta) = (0.0f64, 0.0f64);
    for i in 1..cfg.step_count() {
        let t = i as f64 * dt;
        let next = rk4_step(&cur, t, dt, &cfg).unwrap();
        let (ep, ec, en) = (err(&prev, t - dt), err(&cur, t), err(&next, t + dt));
        let fd_eq = (en.e_q - ep.e_q).scale(1.0 / (2.0 * dt));
        let omega0 = cfg.reference.sample(t).omega0;
        let qn2 = cur.q.norm_sq();
        let an_eq = error_field(&ec, &omega0, qn2, g.alpha);
        worst_eq = worst_eq.max((fd_eq - an_eq).norm());
        let fd_eta = (eta(&en, next.q.norm_sq(), &g) - eta(&ep, prev.q.norm_sq(), &g)) / (2.0 * dt);
        worst_eta = worst_eta.max((fd_eta - eta_dot(&ec, &omega0, qn2, &g)).norm());
        prev = cur;
        cur = next;
    }
    outcome(
        worst_eq <= 1e-5 && worst_eta <= 1e-5,
        format!(
            "max |de_q fd - analytic| = {worst_eq:.2e}, max |deta fd - analytic| = {worst_eta:.2e}"
        ),
    )
}

fn criterion_5_run() -> ScenarioConfig {
    let mut cfg = offset_start(0.5).unwrap();
    cfg.t_end = 20.0;
    cfg
}

fn criterion_5() -> Outcome {
    let cfg = criterion_5_run();
    let region = cfg.region.unwrap();
    let e0 = cfg.initial_q;
    let r0 = cfg.reference.sample(0.0);
    let e = compute_error(&BodyState::new(e0, cfg.initial_omega), &r0);
    let start_ok = (e.e_q.norm() - 0.5).abs() < 1e-12 && e.e_omega.norm() < 1e-12;
    let (worst, violations) =
        decrease_bound_excess(&cfg, &region, cfg.record_stride, 1e-6).unwrap();
    let (trace, _) = simulate(&cfg).unwrap();
    let v: Vec<f64> = trace.records.iter().map(|r| r.vk1).collect();
    // strict decrease down to the round-off floor
    let above: Vec<f64> = v.iter().copied().take_while(|&x| x > 1e-20).collect();
    let strict = above.windows(2).all(|w| w[1] < w[0]);
    let reached = trace.records.iter().find(|r| r.vk1 < 1e-8).map(|r| r.t);
    let ok = start_ok && violations == 0 && strict && reached.is_some_and(|t| t <= 20.0);
    outcome(
        ok,
        format!(
            "V_k1(0) = {:.3}, max(fd rate - bound) = {worst:.2e}, strict decrease over {} samples, V_k1 < 1e-8 at t = {reached:?}",
            v[0],
            above.len()
        ),
    )
}

fn criterion_6() -> Outcome {
    let (trace, m) = simulate(&case_study(1).unwrap()).unwrap();
    let (eq, ew) = trace
        .window(30.0, 40.0)
        .fold((0.0f64, 0.0f64), |(a, b), r| {
            (a.max(r.e_q.norm()), b.max(r.e_omega.norm()))
        });
    outcome(
        eq < 1e-2 && ew < 1e-2 && m.final_delta_err_norm < 1e-2,
        format!(
            "t >= 30: max |e_q| = {eq:.2e}, max |e_omega| = {ew:.2e}; |delta - delta_hat(40)| = {:.2e}",
            m.final_delta_err_norm
        ),
    )
}

fn criterion_7() -> Outcome {
    let (robust_trace, robust) = simulate(&case_study(2).unwrap()).unwrap();
    let (_, plain) = simulate(&case_study(3).unwrap()).unwrap();
    let (a, b) = (robust.rms_ew.unwrap(), plain.rms_ew.unwrap());
    let bound = robust_trace
        .window(20.0, 40.0)
        .map(|r| r.e_q.norm().max(r.e_omega.norm()))
        .fold(0.0, f64::max);
    outcome(
        a < b && b / a >= 2.0 && bound < 0.5,
        format!(
            "rms |e_omega| robust = {a:.4e}, non-robust = {b:.4e}, ratio = {:.2}; robust max error on [20,40] = {bound:.3e}",
            b / a
        ),
    )
}

fn criterion_8() -> Outcome {
    let (trace, m) = simulate(&criterion_5_run()).unwrap();
    let entered = trace.records[0].flags.in_s == Some(true);
    outcome(
        entered && m.region_exits == 0 && m.m_epsilon_exits == 0,
        format!(
            "starts in S: {entered}, S exits = {}, M_eps exits = {}, samples = {}",
            m.region_exits,
            m.m_epsilon_exits,
            trace.records.len()
        ),
    )
}

fn final_state(cfg: &ScenarioConfig) -> [f64; 10] {
    let mut aug = cfg.initial_state();
    for i in 0..cfg.step_count() {
        aug = rk4_step(&aug, i as f64 * cfg.dt, cfg.dt, cfg).unwrap();
    }
    aug.to_array()
}

fn max_diff(a: &[f64; 10], b: &[f64; 10]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn criterion_9() -> Outcome {
    let cfg = case_study(1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let bytes: Vec<Vec<u8>> = (0..2)
        .map(|k| {
            let path = dir.path().join(format!("trace{k}.csv"));
            write_trace_csv(&simulate(&cfg).unwrap().0, &path).unwrap();
            std::fs::read(path).unwrap()
        })
        .collect();
    let identical = bytes[0] == bytes[1];

    let mut half = cfg.clone();
    half.dt /= 2.0;
    let halving = max_diff(&final_state(&cfg), &final_state(&half));

    let mut smooth = offset_start(0.5).unwrap();
    smooth.t_end = 2.0;
    let run = |dt: f64| {
        let mut c = smooth.clone();
        c.dt = dt;
        final_state(&c)
    };
    let reference = run(1e-4);
    let errs: Vec<f64> = [0.04, 0.02, 0.01]
        .iter()
        .map(|&dt| max_diff(&run(dt), &reference))
        .collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let order = orders.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        identical && halving < 1e-8 && order >= 3.8,
        format!(
            "byte-identical: {identical}, dt-halving change = {halving:.2e}, observed orders = {orders:.2?}"
        ),
    )
}

fn satisfies_initial_condition(
    e0: &TrackingError,
    f: &FeasibleGains,
    g0: &ControllerGains,
) -> bool {
    let g = ControllerGains { k1: f.k1, ..*g0 };
    let half_eq = 0.5 * e0.e_q.norm_sq();
    let w = e0.e_omega - eta(e0, 1.0, &g);
    half_eq < f.c
        && f.c < 2.0
        && w.norm_squared() / (4.0 * f.k1) + 1.0 / (2.0 * f.k_delta) < f.c - half_eq
        && f.k_delta > 1.0 / (2.0 * f.c)
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let g0 = ControllerGains::benchmark();
    let mut tested = 0;
    let mut bad = 0;
    while tested < 100 {
        let q = Quaternion::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if q.norm() < 1e-3 {
            continue;
        }
        let e0 = TrackingError {
            e_q: q.scale(1.0 / q.norm()) - Quaternion::identity(),
            e_omega: Vec3::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            ),
        };
        if e0.e_q.norm() >= 2.0 {
            continue;
        }
        tested += 1;
        match feasible_gains(&e0, 1.0, &g0) {
            Ok(f) if satisfies_initial_condition(&e0, &f, &g0) => {}
            _ => bad += 1,
        }
    }
    let anti = TrackingError {
        e_q: Quaternion::new(-2.0, 0.0, 0.0, 0.0),
        e_omega: Vec3::zeros(),
    };
    let anti_infeasible = feasible_gains(&anti, 1.0, &g0).is_err();
    outcome(
        bad == 0 && anti_infeasible,
        format!(
            "{tested} random errors, {bad} not certified; antipodal infeasible: {anti_infeasible}"
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("quaternion algebra", criterion_1),
        ("unit sphere invariance", criterion_2),
        ("unit sphere attraction", criterion_3),
        ("error dynamics oracle", criterion_4),
        ("undisturbed Lyapunov decrease", criterion_5),
        ("case 1 convergence", criterion_6),
        ("robust vs non-robust", criterion_7),
        ("region invariance", criterion_8),
        ("determinism and order", criterion_9),
        ("feasible gains", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        failed += (!o.passed) as usize;
        println!(
            "criterion {:>2} {:<30} {}  {}",
            i + 1,
            name,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
