//! Picks gains that certify a given initial tracking error.

use quattrack::tracking::{eta, feasible_gains};
use quattrack::{ControllerGains, Quaternion, TrackingError, Vec3};

fn main() {
    let g0 = ControllerGains::benchmark();
    let delta = 1.0;
    // rotation angles up to a full turn, which puts q at the antipode
    for angle_deg in [0.0f64, 120.0, 240.0, 340.0, 359.8, 360.0] {
        let q = Quaternion::from_axis_angle(Vec3::new(1.0, 2.0, -1.0), angle_deg.to_radians());
        let e0 = TrackingError {
            e_q: q - Quaternion::identity(),
            e_omega: Vec3::new(0.5, -1.0, 2.0),
        };
        match feasible_gains(&e0, delta, &g0) {
            Ok(f) => {
                let g = ControllerGains { k1: f.k1, ..g0 };
                let w = e0.e_omega - eta(&e0, 1.0, &g);
                let lhs = w.norm_squared() / (4.0 * f.k1) + delta * delta / (2.0 * f.k_delta);
                println!(
                    "|e_q| = {:.4}: c = {:.4}, k1 = {:.3}, k_delta = {:.3}  (slack {:.2e})",
                    e0.e_q.norm(),
                    f.c,
                    f.k1,
                    f.k_delta,
                    f.c - 0.5 * e0.e_q.norm_sq() - lhs
                );
            }
            Err(e) => println!("|e_q| = {:.4}: {e}", e0.e_q.norm()),
        }
    }
}
