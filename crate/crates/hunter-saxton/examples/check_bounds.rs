//! Verify the a priori estimates the convergence theory rests on, along a
//! full trajectory: sup and total-variation growth, energy positivity and
//! saturation, the cell energy inequality, support containment, spatial and
//! temporal Hölder continuity of u, and the L1 time modulus of F.

use hunter_saxton::*;

fn main() -> Result<()> {
    for problem in [Problem::Peakon, Problem::Cusp] {
        let data = make_initial(problem.clone(), None)?;
        let traj = run(&data, 0.25, &CflParams::default(), 4.0, &[])?;
        let consts = bound_constants(
            data.u0_inf,
            data.tv0,
            data.f_inf,
            traj.meta.t_end,
            traj.meta.dx,
            traj.meta.dt,
        );
        println!("== {problem:?} ==");
        println!(
            "constants: holder C = {:.4}, sup bound = {:.4}, TV bound = {:.4}",
            consts.holder_c, consts.sup_bound, consts.tv_bound
        );
        let report = check_bounds(&traj, &consts, 42);
        for c in &report.checks {
            println!(
                "  {:<26} {}  (worst margin {:+.3e})",
                c.name,
                if c.pass { "pass" } else { "FAIL" },
                c.worst,
            );
        }
        println!();
    }
    Ok(())
}
