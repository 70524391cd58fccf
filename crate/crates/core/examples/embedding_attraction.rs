//! Free rotation started off the unit sphere. The embedding term pulls
//! `|q|^2` back to 1 along the logistic curve.

use quattrack::dynamics::embedded_field;
use quattrack::sim::rk4;
use quattrack::verify::logistic_norm_sq;
use quattrack::{BodyState, EmbeddingParams, InertiaMatrix, Quaternion, Vec3};

fn main() {
    let inertia = InertiaMatrix::benchmark();
    let params = EmbeddingParams::new(1.0).unwrap();
    let f = |_: f64, y: &[f64; 7]| {
        let s = BodyState::new(
            Quaternion::new(y[0], y[1], y[2], y[3]),
            Vec3::new(y[4], y[5], y[6]),
        );
        let d = embedded_field(&s, &Vec3::zeros(), &inertia, &params);
        [
            d.q_dot.s,
            d.q_dot.v.x,
            d.q_dot.v.y,
            d.q_dot.v.z,
            d.omega_dot.x,
            d.omega_dot.y,
            d.omega_dot.z,
        ]
    };

    for v0 in [0.25, 4.0] {
        let r = f64::sqrt(v0) / 2.0;
        let mut y = [r, r, r, r, 0.4, 0.1, -0.7];
        let dt = 1e-3;
        println!("|q(0)|^2 = {v0}");
        println!("{:>6} {:>14} {:>14}", "t", "|q|^2", "closed form");
        for i in 0..=8000 {
            let t = i as f64 * dt;
            if i % 1000 == 0 {
                let n2: f64 = y[..4].iter().map(|c| c * c).sum();
                println!(
                    "{t:>6.1} {n2:>14.10} {:>14.10}",
                    logistic_norm_sq(v0, 1.0, t)
                );
            }
            y = rk4(f, t, &y, dt);
        }
    }
}
