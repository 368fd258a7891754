//! Reference peakon run: dx = dt = 1/4 up to T = 4, snapshots at t = 0, 2, 4.
//!
//! The initial profile is a single decaying kink whose slope blows up at
//! t = 2: all the energy momentarily concentrates at x = 3/2 and is released
//! again, which is exactly the regime the conservative scheme is built for.
//! Snapshots land in `hs-out/peakon/` next to a `trajectory.json` manifest.

use hunter_saxton::*;

fn main() -> Result<()> {
    let data = make_initial(Problem::Peakon, None)?;
    let traj = run(&data, 0.25, &CflParams::default(), 4.0, &[0.0, 2.0, 4.0])?;

    let exact = peakon();
    println!(
        "peakon: dx = {}, dt = {}, {} steps, F_inf = {}",
        traj.meta.dx,
        traj.meta.dt,
        traj.states.len() - 1,
        traj.meta.f_inf
    );
    for (t, state) in traj.snapshots() {
        println!("\nt = {t}");
        println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "x", "u", "u exact", "F", "F exact");
        for i in 0..=8 {
            let x = -0.5 + 3.5 * i as f64 / 8.0;
            let (u, f) = state.eval(x);
            let (ue, fe) = exact.eval(*t, x);
            println!("{x:>8.3} {u:>12.6} {ue:>12.6} {f:>12.6} {fe:>12.6}");
        }
    }

    let out = std::path::Path::new("hs-out/peakon");
    let manifest = io::write_trajectory(out, &traj)?;
    println!("\nwrote {} snapshots to {}", manifest.snapshots.len(), out.display());
    Ok(())
}
