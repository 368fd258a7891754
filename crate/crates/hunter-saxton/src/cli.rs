//! Command-line front end: JSON config plus flag overrides, subcommands
//! `run`, `converge`, `validate`, `residual`, `check-bounds`.
//!
//! Exit codes: 0 success, 1 config/usage error, 2 validation failure.
//! Precedence: built-in defaults < config file < command-line flags.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use crate::analysis::{
    self, bound_constants, check_bounds, convergence_study, fit_rate, weak_residual,
    BumpTestFunction,
};
use crate::error::{Error, Result};
use crate::evolution::{self, CflParams};
use crate::io;
use crate::reference::Problem;
use crate::state::PiecewiseState;

#[derive(Debug, Parser)]
#[command(name = "hs", about = "Conservative Hunter-Saxton equation solver", version)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// JSON config file; flags override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Named problem: peakon, cusp, or peakon1
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub dx: Option<f64>,
    /// CFL fraction in (0, 1]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Explicit time step (required for zero-energy data)
    #[arg(long)]
    pub dt: Option<f64>,
    /// Final time
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    /// Comma-separated snapshot times
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Option<Vec<f64>>,
    /// Output directory (default: $HS_OUT_DIR or ./hs-out)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Machine-parseable JSON lines on stdout
    #[arg(long)]
    pub json: bool,
    /// RNG seed for sampled checks
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for convergence studies
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the scheme and export snapshots plus a manifest
    Run(CommonArgs),
    /// Convergence study over a list of grid spacings
    Converge {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated, strictly decreasing dx values
        #[arg(long, value_delimiter = ',')]
        dx_list: Option<Vec<f64>>,
    },
    /// Validate a snapshot CSV against the admissibility conditions
    Validate {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Weak-form residuals of runs against a smooth bump test function
    Residual {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',')]
        dx_list: Option<Vec<f64>>,
    },
    /// Verify the a priori bounds along a run
    CheckBounds(CommonArgs),
}

/// Fully resolved run parameters.
#[derive(Debug, Clone)]
pub struct Settings {
    pub problem: Problem,
    pub dx: f64,
    pub alpha: f64,
    pub dt: Option<f64>,
    pub t_end: f64,
    pub snapshots: Vec<f64>,
    pub dx_list: Vec<f64>,
    pub seed: u64,
    pub out: PathBuf,
    pub json: bool,
    pub bump: BumpTestFunction,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            problem: Problem::Peakon,
            dx: 0.25,
            alpha: 1.0,
            dt: None,
            t_end: 4.0,
            snapshots: vec![],
            dx_list: (2..=7).map(|k| 0.5f64.powi(k)).collect(),
            seed: 0,
            out: std::env::var_os("HS_OUT_DIR")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("hs-out")),
            json: false,
            bump: analysis::default_bump(),
        }
    }
}

fn cfg_err(pointer: &str, message: impl Into<String>) -> Error {
    Error::Config {
        pointer: pointer.to_string(),
        message: message.into(),
    }
}

fn get_f64(v: &Value, pointer: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| cfg_err(pointer, "expected a number"))
}

fn apply_config(settings: &mut Settings, path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(path)?;
    let root: Value = serde_json::from_str(&text)
        .map_err(|e| cfg_err("", format!("invalid JSON: {e}")))?;
    let obj = root
        .as_object()
        .ok_or_else(|| cfg_err("", "config must be a JSON object"))?;
    for (key, value) in obj {
        let ptr = format!("/{key}");
        match key.as_str() {
            "problem" => {
                let name = value
                    .as_str()
                    .ok_or_else(|| cfg_err(&ptr, "expected a string"))?;
                settings.problem =
                    Problem::from_name(name).map_err(|e| cfg_err(&ptr, e.to_string()))?;
            }
            "custom" => {
                let rows = value
                    .as_array()
                    .ok_or_else(|| cfg_err(&ptr, "expected an array of [x, u, F] triples"))?;
                let mut points = Vec::with_capacity(rows.len());
                for (i, row) in rows.iter().enumerate() {
                    let rp = format!("{ptr}/{i}");
                    let triple = row
                        .as_array()
                        .filter(|a| a.len() == 3)
                        .ok_or_else(|| cfg_err(&rp, "expected an [x, u, F] triple"))?;
                    points.push((
                        get_f64(&triple[0], &format!("{rp}/0"))?,
                        get_f64(&triple[1], &format!("{rp}/1"))?,
                        get_f64(&triple[2], &format!("{rp}/2"))?,
                    ));
                }
                settings.problem = Problem::Custom(points);
            }
            "dx" => settings.dx = get_f64(value, &ptr)?,
            "alpha" => settings.alpha = get_f64(value, &ptr)?,
            "dt" => settings.dt = Some(get_f64(value, &ptr)?),
            "T" => settings.t_end = get_f64(value, &ptr)?,
            "snapshots" => {
                let arr = value
                    .as_array()
                    .ok_or_else(|| cfg_err(&ptr, "expected an array of times"))?;
                let mut ts = Vec::with_capacity(arr.len());
                for (i, t) in arr.iter().enumerate() {
                    ts.push(get_f64(t, &format!("{ptr}/{i}"))?);
                }
                settings.snapshots = ts;
            }
            "dx_list" => {
                let arr = value
                    .as_array()
                    .ok_or_else(|| cfg_err(&ptr, "expected an array of spacings"))?;
                let mut xs = Vec::with_capacity(arr.len());
                for (i, x) in arr.iter().enumerate() {
                    xs.push(get_f64(x, &format!("{ptr}/{i}"))?);
                }
                settings.dx_list = xs;
            }
            "seed" => {
                settings.seed = value
                    .as_u64()
                    .ok_or_else(|| cfg_err(&ptr, "expected a non-negative integer"))?;
            }
            "out" => {
                settings.out = PathBuf::from(
                    value
                        .as_str()
                        .ok_or_else(|| cfg_err(&ptr, "expected a path string"))?,
                );
            }
            "bump" => {
                settings.bump = serde_json::from_value::<BumpJson>(value.clone())
                    .map_err(|e| cfg_err(&ptr, e.to_string()))?
                    .into();
            }
            other => {
                return Err(cfg_err(&format!("/{other}"), "unknown config key"));
            }
        }
    }
    Ok(())
}

#[derive(serde::Deserialize)]
struct BumpJson {
    t_center: f64,
    t_radius: f64,
    x_center: f64,
    x_radius: f64,
}

impl From<BumpJson> for BumpTestFunction {
    fn from(b: BumpJson) -> Self {
        BumpTestFunction {
            t_center: b.t_center,
            t_radius: b.t_radius,
            x_center: b.x_center,
            x_radius: b.x_radius,
        }
    }
}

/// Defaults, then the config file, then the flags.
pub fn resolve(common: &CommonArgs) -> Result<Settings> {
    let mut s = Settings::default();
    if let Some(path) = &common.config {
        apply_config(&mut s, path)?;
    }
    if let Some(name) = &common.problem {
        s.problem = Problem::from_name(name).map_err(|e| cfg_err("/problem", e.to_string()))?;
    }
    if let Some(dx) = common.dx {
        s.dx = dx;
    }
    if let Some(alpha) = common.alpha {
        s.alpha = alpha;
    }
    if let Some(dt) = common.dt {
        s.dt = Some(dt);
    }
    if let Some(t) = common.t_end {
        s.t_end = t;
    }
    if let Some(ts) = &common.snapshots {
        s.snapshots = ts.clone();
    }
    if let Some(out) = &common.out {
        s.out = out.clone();
    }
    if let Some(seed) = common.seed {
        s.seed = seed;
    }
    s.json = common.json;

    if !(s.dx > 0.0) {
        return Err(cfg_err("/dx", format!("must be positive, got {}", s.dx)));
    }
    if !(s.alpha > 0.0 && s.alpha <= 1.0) {
        return Err(cfg_err(
            "/alpha",
            format!("must be in (0, 1], got {}", s.alpha),
        ));
    }
    if !(s.t_end >= 0.0) {
        return Err(cfg_err("/T", format!("must be >= 0, got {}", s.t_end)));
    }
    for (i, &t) in s.snapshots.iter().enumerate() {
        if t < 0.0 || t > s.t_end {
            return Err(cfg_err(
                &format!("/snapshots/{i}"),
                format!("time {t} outside [0, {}]", s.t_end),
            ));
        }
    }
    if let Some(jobs) = common.jobs {
        if jobs == 0 {
            return Err(cfg_err("/jobs", "must be at least 1"));
        }
        // a pool may already exist (e.g. in tests); that is fine
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    Ok(s)
}

fn make_data(s: &Settings) -> Result<crate::state::InitialData> {
    crate::reference::make_initial(s.problem.clone(), None)
}

fn cfl(s: &Settings) -> Result<CflParams> {
    CflParams::new(s.alpha, s.dt)
}

fn cmd_run(common: &CommonArgs) -> Result<()> {
    let mut s = resolve(common)?;
    if s.snapshots.is_empty() {
        s.snapshots = vec![s.t_end];
    }
    let data = make_data(&s)?;
    let traj = evolution::run(&data, s.dx, &cfl(&s)?, s.t_end, &s.snapshots)?;
    let manifest = io::write_trajectory(&s.out, &traj)?;
    if s.json {
        println!("{}", serde_json::to_string(&manifest)?);
    } else {
        println!(
            "wrote {} snapshots to {} (dx = {}, dt = {}, {} steps, F_inf = {})",
            manifest.snapshots.len(),
            s.out.display(),
            s.dx,
            manifest.dt,
            manifest.steps,
            manifest.f_inf,
        );
    }
    Ok(())
}

fn cmd_converge(common: &CommonArgs, dx_list: &Option<Vec<f64>>) -> Result<()> {
    let mut s = resolve(common)?;
    if let Some(list) = dx_list {
        s.dx_list = list.clone();
    }
    if s.snapshots.is_empty() {
        s.snapshots = vec![s.t_end];
    }
    let report = convergence_study(&s.problem, &s.dx_list, &cfl(&s)?, s.t_end, &s.snapshots)?;
    io::write_convergence_csv(&s.out.join("convergence.csv"), &report)?;
    for slope in &report.slopes {
        if s.json {
            println!("{}", serde_json::to_string(slope)?);
        } else {
            let show = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
            println!(
                "t = {}: slope u_inf = {}, u_l2 = {}, F_l1 = {}, F_l2 = {}",
                slope.t,
                show(slope.slope_u_inf),
                show(slope.slope_u_l2),
                show(slope.slope_f_l1),
                show(slope.slope_f_l2),
            );
        }
    }
    Ok(())
}

fn cmd_validate(file: &Path, json: bool) -> Result<()> {
    let (state, t) = io::read_snapshot(file)?;
    let report = state.validate();
    if json {
        let violations: Vec<String> = report
            .violations
            .iter()
            .map(|(k, j, m)| format!("{k} at index {j} (magnitude {m:.3e})"))
            .collect();
        println!(
            "{}",
            serde_json::json!({ "t": t, "valid": report.is_valid(), "violations": violations })
        );
    } else {
        println!("t = {t}: {report}");
    }
    report.into_result()
}

fn cmd_residual(common: &CommonArgs, dx_list: &Option<Vec<f64>>) -> Result<()> {
    let mut s = resolve(common)?;
    if let Some(list) = dx_list {
        s.dx_list = list.clone();
    } else if common.config.is_none() {
        s.dx_list = (2..=5).map(|k| 0.5f64.powi(k)).collect();
    }
    let ((_, t_hi), _) = {
        use crate::analysis::TestFunction;
        s.bump.support()
    };
    let t_end = s.t_end.max(t_hi);
    let data = make_data(&s)?;
    let mut pts_u = Vec::new();
    let mut pts_f = Vec::new();
    for &dx in &s.dx_list {
        let traj = evolution::run(&data, dx, &cfl(&s)?, t_end, &[])?;
        let (ru, rf) = weak_residual(&traj, &s.bump)?;
        pts_u.push((dx, ru.abs()));
        pts_f.push((dx, rf.abs()));
        if s.json {
            println!(
                "{}",
                serde_json::json!({ "dx": dx, "res_u": ru, "res_F": rf })
            );
        } else {
            println!("dx = {dx}: res_u = {ru:.6e}, res_F = {rf:.6e}");
        }
    }
    let slope_u = fit_rate(&pts_u)?;
    let slope_f = fit_rate(&pts_f)?;
    if s.json {
        println!(
            "{}",
            serde_json::json!({ "slope_u": slope_u, "slope_F": slope_f })
        );
    } else {
        println!("slope u = {slope_u:.3}, slope F = {slope_f:.3}");
    }
    Ok(())
}

fn cmd_check_bounds(common: &CommonArgs) -> Result<()> {
    let s = resolve(common)?;
    let data = make_data(&s)?;
    let traj = evolution::run(&data, s.dx, &cfl(&s)?, s.t_end, &s.snapshots)?;
    let consts = bound_constants(
        data.u0_inf,
        data.tv0,
        data.f_inf,
        s.t_end,
        s.dx,
        traj.meta.dt,
    );
    let report = check_bounds(&traj, &consts, s.seed);
    io::write_bounds_json(&s.out.join("bounds.json"), &report)?;
    for c in &report.checks {
        if s.json {
            println!("{}", serde_json::to_string(c)?);
        } else {
            println!(
                "{}: {} (worst margin {:.3e}, slack {:.3e})",
                c.name,
                if c.pass { "pass" } else { "FAIL" },
                c.worst,
                c.slack,
            );
        }
    }
    if report.all_pass() {
        Ok(())
    } else {
        Err(Error::ValidationFailed("a priori bound check failed".into()))
    }
}

/// Dispatch a parsed command line; the caller turns the error into an exit code.
pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.cmd {
        Command::Run(common) => cmd_run(common),
        Command::Converge { common, dx_list } => cmd_converge(common, dx_list),
        Command::Validate { file, json } => cmd_validate(file, *json),
        Command::Residual { common, dx_list } => cmd_residual(common, dx_list),
        Command::CheckBounds(common) => cmd_check_bounds(common),
    }
}

/// 0 success, 1 config/usage error, 2 validation failure.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ValidationFailed(_) => 2,
        _ => 1,
    }
}
