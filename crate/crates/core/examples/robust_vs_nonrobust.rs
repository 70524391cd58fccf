//! Same sinusoidal disturbance, with and without the disturbance estimator.

use quattrack::{case_study, simulate};

fn main() -> quattrack::Result<()> {
    let (robust_trace, robust) = simulate(&case_study(2)?)?;
    let (plain_trace, plain) = simulate(&case_study(3)?)?;

    println!("{:>5} {:>14} {:>14}", "t", "robust", "non-robust");
    for (a, b) in robust_trace
        .records
        .iter()
        .zip(&plain_trace.records)
        .step_by(250)
    {
        println!(
            "{:>5.1} {:>14.4e} {:>14.4e}",
            a.t,
            a.e_omega.norm(),
            b.e_omega.norm()
        );
    }
    let (a, b) = (robust.rms_ew.unwrap(), plain.rms_ew.unwrap());
    println!();
    println!(
        "rms |e_omega| on [20, 40]: robust {a:.4e}, non-robust {b:.4e} ({:.1}x)",
        b / a
    );
    Ok(())
}
