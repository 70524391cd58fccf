//! Estimator gain study on the constant-disturbance scenario.

use quattrack::case_study;
use quattrack::sweep::{run_sweep, thread_cap, SweepParam};

fn main() -> quattrack::Result<()> {
    let base = case_study(1)?;
    let values = [1.0, 10.0, 100.0, 1000.0, 10000.0];
    let rows = run_sweep(&base, SweepParam::KDelta, &values, thread_cap())?;
    println!(
        "{:>8} {:>14} {:>14} {:>10}",
        "k_delta", "|e_delta(40)|", "|e_q(40)|", "settle"
    );
    for r in rows {
        let settle = r
            .metrics
            .settle_time_eq
            .map_or("-".into(), |t| format!("{t:.2}"));
        println!(
            "{:>8} {:>14.4e} {:>14.4e} {:>10}",
            r.value, r.metrics.final_delta_err_norm, r.metrics.final_eq_norm, settle
        );
    }
    Ok(())
}
