//! Tracking a user-supplied reference: a steady spin about a tilted axis.

use std::sync::Arc;

use quattrack::reference::consistency_residual;
use quattrack::{case_study, simulate, Quaternion, ReferenceKind, ReferenceTrajectory, Vec3};

struct Spin {
    axis: Vec3,
    rate: f64,
}

impl ReferenceTrajectory for Spin {
    fn attitude(&self, t: f64) -> Quaternion {
        Quaternion::from_axis_angle(self.axis, self.rate * t)
    }

    fn angular_velocity(&self, _t: f64) -> Vec3 {
        self.axis.normalize() * self.rate
    }

    fn angular_acceleration(&self, _t: f64) -> Option<Vec3> {
        Some(Vec3::zeros())
    }
}

fn main() -> quattrack::Result<()> {
    let spin = Spin {
        axis: Vec3::new(0.0, 1.0, 1.0),
        rate: 0.8,
    };
    println!(
        "kinematic residual at t = 1: {:.2e}",
        consistency_residual(&spin, 1.0)
    );

    let mut cfg = case_study(1)?;
    cfg.reference = ReferenceKind::Custom(Arc::new(spin));
    cfg.initial_q = Quaternion::identity();
    cfg.initial_omega = Vec3::zeros();
    cfg.t_end = 15.0;
    let (trace, m) = simulate(&cfg)?;
    for r in trace.records.iter().step_by(150) {
        println!(
            "t = {:>5.1}  |e_q| = {:.3e}  |e_omega| = {:.3e}",
            r.t,
            r.e_q.norm(),
            r.e_omega.norm()
        );
    }
    println!("final |e_q| = {:.2e}", m.final_eq_norm);
    Ok(())
}
