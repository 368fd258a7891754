//! Convergence of the scheme on the two problems with closed-form solutions.
//!
//! Errors are measured against the exact profiles at the snapshot times and
//! the decay rate is fitted by log-log regression. The sup error of u is
//! limited to O(√Δx) by the projection alone, and that is what shows up.
//! Runs for each grid spacing execute in parallel.

use hunter_saxton::*;

fn main() -> Result<()> {
    let dxs: Vec<f64> = (2..=7).map(|k| 0.5f64.powi(k)).collect();
    let p = CflParams::default();

    for (problem, snapshots) in [
        (Problem::Peakon, vec![2.0, 4.0]),
        (Problem::Cusp, vec![1.93, 4.0]),
    ] {
        let report = convergence_study(&problem, &dxs, &p, 4.0, &snapshots)?;
        println!("== {problem:?} ==");
        println!(
            "{:>10} {:>10} {:>6} {:>12} {:>12} {:>8}",
            "dx", "dt", "t", "err_u_inf", "err_F_l1", "rate_u"
        );
        for row in &report.rows {
            println!(
                "{:>10.6} {:>10.6} {:>6} {:>12.4e} {:>12.4e} {:>8}",
                row.dx,
                row.dt,
                row.report.t,
                row.report.err_u_inf,
                row.report.err_f_l1,
                row.rate_pairwise_u_inf
                    .map(|r| format!("{r:.2}"))
                    .unwrap_or_else(|| "-".into()),
            );
        }
        for s in &report.slopes {
            println!(
                "fitted slopes at t = {}: u_inf {:.3}, F_l1 {:.3}",
                s.t,
                s.slope_u_inf.unwrap_or(f64::NAN),
                s.slope_f_l1.unwrap_or(f64::NAN),
            );
        }
        println!();
    }
    Ok(())
}
