//! Snapshot, manifest, and report files.
//!
//! Snapshots are CSV with header `x,u,F` plus a JSON sidecar carrying the
//! grid and time; numbers are written in the shortest representation that
//! round-trips binary64 exactly, so read-back reproduces the in-memory
//! state bit for bit.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{BoundsReport, ConvergenceReport};
use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::state::{GridSpec, GridState};

/// Sidecar metadata stored next to each snapshot CSV.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
    pub f_inf: f64,
    pub t: f64,
}

fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Write a snapshot CSV and its JSON sidecar. Returns the sidecar path.
pub fn write_snapshot(csv_path: &Path, state: &GridState, t: f64) -> Result<PathBuf> {
    if let Some(dir) = csv_path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut out = String::from("x,u,F\n");
    for j in 0..state.grid.n {
        // f64 Display is the shortest round-trip form
        out.push_str(&format!("{},{},{}\n", state.grid.node(j), state.u[j], state.f[j]));
    }
    fs::write(csv_path, out)?;
    let meta = SnapshotMeta {
        x0: state.grid.x0,
        dx: state.grid.dx,
        n: state.grid.n,
        f_inf: state.f_inf,
        t,
    };
    let side = sidecar_path(csv_path);
    let mut fh = fs::File::create(&side)?;
    serde_json::to_writer_pretty(&mut fh, &meta)?;
    fh.write_all(b"\n")?;
    Ok(side)
}

/// Read a snapshot CSV plus sidecar back into a state and its time.
pub fn read_snapshot(csv_path: &Path) -> Result<(GridState, f64)> {
    let meta: SnapshotMeta = serde_json::from_str(&fs::read_to_string(sidecar_path(csv_path))?)?;
    let text = fs::read_to_string(csv_path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some("x,u,F") => {}
        other => {
            return Err(Error::SnapshotFormat(format!(
                "expected header 'x,u,F', got {other:?}"
            )))
        }
    }
    let mut u = Vec::with_capacity(meta.n);
    let mut f = Vec::with_capacity(meta.n);
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::SnapshotFormat(format!(
                "row {}: expected 3 columns, got {}",
                i + 1,
                cols.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|e| Error::SnapshotFormat(format!("row {}: {e}", i + 1)))
        };
        let x = parse(cols[0])?;
        let expected = meta.x0 + i as f64 * meta.dx;
        if (x - expected).abs() > 1e-12 * (1.0 + expected.abs()) {
            return Err(Error::SnapshotFormat(format!(
                "row {}: x = {x} does not match the sidecar grid (expected {expected})",
                i + 1
            )));
        }
        u.push(parse(cols[1])?);
        f.push(parse(cols[2])?);
    }
    if u.len() != meta.n {
        return Err(Error::SnapshotFormat(format!(
            "expected {} rows, got {}",
            meta.n,
            u.len()
        )));
    }
    Ok((
        GridState {
            grid: GridSpec::new(meta.x0, meta.dx, meta.n)?,
            u,
            f,
            f_inf: meta.f_inf,
        },
        meta.t,
    ))
}

/// The `trajectory.json` manifest written by a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryManifest {
    pub dt: f64,
    pub steps: usize,
    pub times: Vec<f64>,
    pub f_inf: f64,
    pub grid: GridSpec,
    pub snapshots: Vec<String>,
}

/// Write all requested snapshots plus `trajectory.json` into `dir`.
pub fn write_trajectory(dir: &Path, traj: &Trajectory) -> Result<TrajectoryManifest> {
    fs::create_dir_all(dir)?;
    let mut snapshot_files = Vec::new();
    for (i, (t, state)) in traj.snapshots().enumerate() {
        let name = format!("snapshot_{i:03}.csv");
        write_snapshot(&dir.join(&name), state, *t)?;
        snapshot_files.push(name);
    }
    let manifest = TrajectoryManifest {
        dt: traj.meta.dt,
        steps: traj.states.len() - 1,
        times: traj.states.iter().map(|(t, _)| *t).collect(),
        f_inf: traj.meta.f_inf,
        grid: *traj.grid(),
        snapshots: snapshot_files,
    };
    let mut fh = fs::File::create(dir.join("trajectory.json"))?;
    serde_json::to_writer_pretty(&mut fh, &manifest)?;
    fh.write_all(b"\n")?;
    Ok(manifest)
}

/// Write `convergence.csv` with one row per (dx, snapshot time).
pub fn write_convergence_csv(path: &Path, report: &ConvergenceReport) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut out = String::from(
        "dx,dt,t,err_u_inf,err_u_l2,err_F_l1,err_F_l2,rate_pairwise_u_inf,rate_pairwise_F_l1\n",
    );
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.dx,
            row.dt,
            row.report.t,
            row.report.err_u_inf,
            row.report.err_u_l2,
            row.report.err_f_l1,
            row.report.err_f_l2,
            opt(row.rate_pairwise_u_inf),
            opt(row.rate_pairwise_f_l1),
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Write `bounds.json`: the constants and pass/fail per inequality.
pub fn write_bounds_json(path: &Path, report: &BoundsReport) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut fh = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut fh, report)?;
    fh.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{run, CflParams};
    use crate::reference::{make_initial, Problem};

    #[test]
    fn snapshot_round_trip_is_exact() {
        let data = make_initial(Problem::Peakon, None).unwrap();
        let traj = run(&data, 0.25, &CflParams::default(), 2.0, &[2.0]).unwrap();
        let (t, state) = traj.snapshots().next().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.csv");
        write_snapshot(&path, state, *t).unwrap();
        let (back, tb) = read_snapshot(&path).unwrap();
        assert_eq!(&back, state);
        assert_eq!(tb, *t);
    }

    #[test]
    fn trajectory_manifest_contents() {
        let data = make_initial(Problem::Peakon, None).unwrap();
        let traj = run(&data, 0.25, &CflParams::default(), 4.0, &[0.0, 2.0, 4.0]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_trajectory(dir.path(), &traj).unwrap();
        assert_eq!(manifest.dt, 0.25);
        assert_eq!(manifest.steps, 16);
        assert_eq!(manifest.snapshots.len(), 3);
        for name in &manifest.snapshots {
            assert!(dir.path().join(name).exists());
            assert!(dir.path().join(name).with_extension("json").exists());
        }
        let text = std::fs::read_to_string(dir.path().join("trajectory.json")).unwrap();
        let back: TrajectoryManifest = serde_json::from_str(&text).unwrap();
        assert_eq!(back.times.len(), 17);
    }

    #[test]
    fn malformed_snapshot_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "x,u\n0,1\n").unwrap();
        std::fs::write(
            dir.path().join("bad.json"),
            r#"{"x0":0.0,"dx":1.0,"n":2,"f_inf":1.0,"t":0.0}"#,
        )
        .unwrap();
        assert!(matches!(
            read_snapshot(&path),
            Err(Error::SnapshotFormat(_))
        ));
    }
}
