use proptest::prelude::*;

use quattrack::dynamics::{embedded_field, rigid_field};
use quattrack::quat::mul;
use quattrack::tracking::{compute_error, eta, lyapunov_vk1, ReferenceSample};
use quattrack::{
    BodyState, ControllerGains, EmbeddingParams, InertiaMatrix, Quaternion, ReferenceKind, Vec3,
};

fn quat() -> impl Strategy<Value = Quaternion> {
    prop::array::uniform4(-3.0f64..3.0).prop_map(Quaternion::from_array)
}

fn vec3() -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-5.0f64..5.0).prop_map(|[x, y, z]| Vec3::new(x, y, z))
}

fn unit_quat() -> impl Strategy<Value = Quaternion> {
    quat()
        .prop_filter("away from zero", |q| q.norm() > 1e-2)
        .prop_map(|q| q.scale(1.0 / q.norm()))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 + 1e-9 * a.abs().max(b.abs())
}

proptest! {
    #[test]
    fn product_distributes_over_addition(p in quat(), q in quat(), r in quat()) {
        let lhs = mul(&p, &(q + r));
        let rhs = p * q + p * r;
        for (a, b) in lhs.to_array().iter().zip(rhs.to_array()) {
            prop_assert!(close(*a, b));
        }
    }

    #[test]
    fn identity_is_neutral(q in quat()) {
        prop_assert_eq!(q * Quaternion::identity(), q);
        prop_assert_eq!(Quaternion::identity() * q, q);
        prop_assert_eq!(q.conj().conj(), q);
    }

    #[test]
    fn pure_round_trip(v in vec3()) {
        prop_assert_eq!(Quaternion::pure(v).vec(), v);
        prop_assert_eq!(Quaternion::pure(v).s, 0.0);
    }

    #[test]
    fn fields_agree_on_the_sphere(q in unit_quat(), w in vec3(), tau in vec3()) {
        let inertia = InertiaMatrix::benchmark();
        let s = BodyState::new(q, w);
        let a = rigid_field(&s, &tau, &inertia);
        let b = embedded_field(&s, &tau, &inertia, &EmbeddingParams::default());
        prop_assert!((a.q_dot - b.q_dot).norm() <= 1e-12);
        prop_assert!((a.omega_dot - b.omega_dot).norm() <= 1e-12);
    }

    #[test]
    fn norm_rate_is_tangent_on_the_sphere(q in unit_quat(), w in vec3()) {
        let d = embedded_field(
            &BodyState::new(q, w),
            &Vec3::zeros(),
            &InertiaMatrix::benchmark(),
            &EmbeddingParams::default(),
        );
        // d|q|^2/dt = 2 <q, q_dot>
        let rate: f64 = q.to_array().iter().zip(d.q_dot.to_array()).map(|(a, b)| 2.0 * a * b).sum();
        prop_assert!(rate.abs() <= 1e-12);
    }

    #[test]
    fn error_norm_identity(q0 in unit_quat(), q in quat()) {
        let r = ReferenceSample { q0, omega0: Vec3::zeros(), omega0_dot: Vec3::zeros() };
        let e = compute_error(&BodyState::new(q, Vec3::zeros()), &r);
        let rhs = 1.0 + 2.0 * e.e_s() + e.e_s() * e.e_s() + e.e_v().norm_squared();
        prop_assert!(close(q.norm_sq(), rhs));
        prop_assert!(close(e.implied_q_norm_sq(), q.norm_sq()));
    }

    #[test]
    fn lyapunov_is_nonnegative_and_zero_only_at_rest(q in unit_quat(), w in vec3(), t in 0.0f64..20.0) {
        let r = ReferenceKind::Benchmark.sample(t);
        let e = compute_error(&BodyState::new(q, w), &r);
        let g = ControllerGains::benchmark();
        prop_assert!(lyapunov_vk1(&e, q.norm_sq(), &g) >= 0.0);
        let at_rest = compute_error(&BodyState::new(r.q0, r.omega0), &r);
        prop_assert!(lyapunov_vk1(&at_rest, 1.0, &g) <= 1e-24);
        prop_assert!(eta(&at_rest, 1.0, &g).norm() <= 1e-12);
    }

    #[test]
    fn inertia_inverse(a in 0.5f64..10.0, b in 0.5f64..10.0, c in 0.5f64..10.0, v in vec3()) {
        let i = InertiaMatrix::diagonal(a, b, c).unwrap();
        prop_assert!((i.apply_inv(&i.apply(&v)) - v).norm() <= 1e-12 * (1.0 + v.norm()));
    }
}
