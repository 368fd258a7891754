//! Weak-form residuals: how far the numerical solution is from satisfying
//! the two defining integral identities against a smooth bump test function.
//!
//! The same quadrature applied to the closed-form peakon comes out at
//! round-off level, which separates quadrature error from scheme error.

use hunter_saxton::analysis::{default_bump, TestFunction};
use hunter_saxton::*;

fn main() -> Result<()> {
    let phi = default_bump();
    let ((t_lo, t_hi), (x_lo, x_hi)) = phi.support();
    println!("test function support: t in ({t_lo}, {t_hi}), x in ({x_lo}, {x_hi})\n");

    let data = make_initial(Problem::Peakon, None)?;
    let mut pts_u = vec![];
    let mut pts_f = vec![];
    for k in 2..=6 {
        let dx = 0.5f64.powi(k);
        let traj = run(&data, dx, &CflParams::default(), t_hi, &[])?;
        let (ru, rf) = weak_residual(&traj, &phi)?;
        println!("dx = {dx:<9} res_u = {ru:>12.4e}  res_F = {rf:>12.4e}");
        pts_u.push((dx, ru.abs()));
        pts_f.push((dx, rf.abs()));
    }
    println!(
        "fitted decay: u {:.2}, F {:.2}",
        fit_rate(&pts_u)?,
        fit_rate(&pts_f)?
    );

    let exact = peakon();
    let (eu, ef) = weak_residual_exact(&exact, &phi, 256, 64);
    println!("exact solution under the same quadrature: u {eu:.2e}, F {ef:.2e}");
    Ok(())
}
