//! Exact characteristic evolution, the CFL rule, and the time-stepping loop.
//!
//! One step is `project ∘ evolve`: breakpoints travel exactly along the
//! characteristic curves
//!
//!   x_j(τ) = x_j + U_j·τ + ¼(F_j − ½F∞)·τ²
//!   u_j(τ) = U_j + ½(F_j − ½F∞)·τ,       F_j(τ) = F_j,
//!
//! and the resulting piecewise linear pair is sampled back onto the grid.
//! The time step bound Δt ≤ α/(2√F∞)·√Δx keeps neighbouring characteristics
//! at least ½Δx apart, so no wave breaking happens inside a step.

use crate::error::{Error, Result};
use crate::state::{
    project_breakpoints, project_initial, support_window, BreakpointState, GridSpec, GridState,
    InitialData, PiecewiseState,
};

/// CFL parameters: `alpha ∈ (0,1]` scales the admissible step, an explicit
/// `dt_override` is required when the total energy is zero.
#[derive(Debug, Clone, Copy)]
pub struct CflParams {
    pub alpha: f64,
    pub dt_override: Option<f64>,
}

impl Default for CflParams {
    fn default() -> Self {
        CflParams {
            alpha: 1.0,
            dt_override: None,
        }
    }
}

impl CflParams {
    pub fn new(alpha: f64, dt_override: Option<f64>) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be in (0, 1], got {alpha}"
            )));
        }
        if let Some(dt) = dt_override {
            if !(dt > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "dt_override must be positive, got {dt}"
                )));
            }
        }
        Ok(CflParams { alpha, dt_override })
    }
}

/// The bound Δt ≤ α/(2√F∞)·√Δx; `f64::INFINITY` for zero energy (pure
/// transport never collides).
pub fn cfl_bound(f_inf: f64, dx: f64) -> f64 {
    if f_inf > 0.0 {
        dx.sqrt() / (2.0 * f_inf.sqrt())
    } else {
        f64::INFINITY
    }
}

/// Admissible time step for the given energy and grid spacing.
pub fn cfl_dt(f_inf: f64, dx: f64, p: &CflParams) -> Result<f64> {
    if !(dx > 0.0) {
        return Err(Error::InvalidParameter(format!("dx must be positive, got {dx}")));
    }
    if f_inf == 0.0 {
        return p.dt_override.ok_or(Error::ZeroEnergyNeedsDt);
    }
    let bound = p.alpha * cfl_bound(f_inf, dx);
    match p.dt_override {
        Some(dt) if dt <= bound => Ok(dt),
        Some(dt) => Err(Error::DtExceedsCfl { dt, bound }),
        None => Ok(bound),
    }
}

/// One node of the exact characteristic map.
pub fn characteristic(x: f64, u: f64, f: f64, f_inf: f64, tau: f64) -> (f64, f64) {
    let drive = f - 0.5 * f_inf;
    (
        x + u * tau + 0.25 * drive * tau * tau,
        u + 0.5 * drive * tau,
    )
}

/// Exact evolution of a grid state by `tau` along characteristics.
pub fn evolve(s: &GridState, tau: f64) -> Result<BreakpointState> {
    let bound = cfl_bound(s.f_inf, s.grid.dx);
    if !(tau >= 0.0) || tau > bound {
        return Err(Error::TauExceedsCfl { tau, bound });
    }
    let n = s.grid.n;
    let mut xs = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    for j in 0..n {
        let (x, v) = characteristic(s.grid.node(j), s.u[j], s.f[j], s.f_inf, tau);
        xs.push(x);
        u.push(v);
    }
    for j in 1..n {
        if xs[j] <= xs[j - 1] {
            return Err(Error::BreakpointCollision(j));
        }
    }
    Ok(BreakpointState {
        xs,
        u,
        f: s.f.clone(),
        f_inf: s.f_inf,
        tau,
    })
}

/// Smallest distance between neighbouring breakpoints.
pub fn min_gap(b: &BreakpointState) -> f64 {
    b.xs
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// Generic resampling: locate each grid node among the evolved breakpoints
/// with a monotone sweep, then interpolate linearly. Source of truth.
pub fn resample(b: &BreakpointState, grid: &GridSpec) -> Result<GridState> {
    project_breakpoints(b, grid)
}

/// Closed-form resampling: per cell the forward characteristic map is affine
/// in the foot point, ξ ↦ ξ + u(ξ)τ + ¼(F(ξ) − ½F∞)τ², so it can be inverted
/// exactly instead of interpolating the evolved breakpoints. Must agree with
/// the generic path to round-off.
pub fn resample_closed_form(s: &GridState, tau: f64, grid: &GridSpec) -> Result<GridState> {
    let b = evolve(s, tau)?;
    let n = grid.n;
    let m = b.xs.len();
    let dx_src = s.grid.dx;
    let mut u = Vec::with_capacity(n);
    let mut f = Vec::with_capacity(n);
    let mut j = 0usize;
    for i in 0..n {
        let x = grid.node(i);
        while j + 1 < m && b.xs[j + 1] <= x {
            j += 1;
        }
        if x <= b.xs[0] {
            u.push(b.u[0]);
            f.push(0.0);
            continue;
        }
        if x >= b.xs[m - 1] {
            u.push(b.u[m - 1]);
            f.push(b.f_inf);
            continue;
        }
        let du = s.u[j + 1] - s.u[j];
        let df = s.f[j + 1] - s.f[j];
        // slope of the per-cell affine map Φ; positive under the CFL rule
        let denom = 1.0 + (du / dx_src) * tau + 0.25 * (df / dx_src) * tau * tau;
        let xi_off = (x - b.xs[j]) / denom;
        let theta = xi_off / dx_src;
        let f_xi = s.f[j] + theta * df;
        let u_xi = s.u[j] + theta * du;
        u.push(u_xi + 0.5 * (f_xi - 0.5 * s.f_inf) * tau);
        f.push(f_xi);
    }
    let out = GridState {
        grid: *grid,
        u,
        f,
        f_inf: s.f_inf,
    };
    Ok(out)
}

/// One full scheme step: exact evolution by `dt`, then projection back onto
/// the generating grid.
pub fn step(s: &GridState, dt: f64) -> Result<GridState> {
    let b = evolve(s, dt)?;
    resample(&b, &s.grid)
}

/// The numerical solution inside a step: `ℙ_Δx T_τ` applied to a stored state.
pub fn intermediate(s: &GridState, tau: f64) -> Result<GridState> {
    let b = evolve(s, tau)?;
    resample(&b, &s.grid)
}

/// Evaluate the numerical solution at `t^n + tau`, `x`, given the state at `t^n`.
pub fn eval_at(s: &GridState, tau: f64, x: f64) -> Result<(f64, f64)> {
    Ok(intermediate(s, tau)?.eval(x))
}

/// Scalar facts about a run that the analysis bounds need.
#[derive(Debug, Clone, Copy)]
pub struct RunMeta {
    pub dx: f64,
    /// Largest time step actually taken.
    pub dt: f64,
    /// Unshrunk CFL step (alignment only ever shrinks below this).
    pub dt_cfl: f64,
    pub alpha: f64,
    pub t_end: f64,
    pub f_inf: f64,
    pub u0_inf: f64,
    pub tv0: f64,
    pub support: (f64, f64),
    pub u_left: f64,
    pub u_right: f64,
}

/// Sequence of all step states of a run, with the requested snapshot times
/// landing exactly on step boundaries.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub meta: RunMeta,
    /// Strictly increasing times with the state at each.
    pub states: Vec<(f64, GridState)>,
    /// Indices into `states` of the requested snapshots.
    pub snapshot_indices: Vec<usize>,
}

impl Trajectory {
    pub fn snapshots(&self) -> impl Iterator<Item = &(f64, GridState)> {
        self.snapshot_indices.iter().map(move |&i| &self.states[i])
    }

    pub fn state_at(&self, t: f64) -> Option<&GridState> {
        self.states
            .iter()
            .find(|(tn, _)| (tn - t).abs() <= 1e-12 * (1.0 + t.abs()))
            .map(|(_, s)| s)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.states[0].1.grid
    }
}

/// Run the scheme from `data` to `t_end`.
///
/// The time axis is split at the snapshot times; each segment is covered by
/// equal steps `len/⌈len/dt_cfl⌉`, so every snapshot lands exactly on a step
/// boundary and every step respects the CFL bound. The grid is sized from
/// the a priori support growth curves so the energy never leaves the window.
pub fn run(
    data: &InitialData,
    dx: f64,
    p: &CflParams,
    t_end: f64,
    snapshots: &[f64],
) -> Result<Trajectory> {
    if !(t_end >= 0.0) {
        return Err(Error::InvalidParameter(format!("T must be >= 0, got {t_end}")));
    }
    for &t in snapshots {
        if t < 0.0 || t > t_end {
            return Err(Error::InvalidParameter(format!(
                "snapshot time {t} outside [0, {t_end}]"
            )));
        }
    }
    let dt_cfl = cfl_dt(data.f_inf, dx, p)?;

    let (lo, hi) = support_window(data, t_end, dt_cfl, dx);
    let grid = GridSpec::covering(lo, hi, dx)?;
    let state0 = project_initial(data, &grid)?;
    state0.validate().into_result()?;

    // segment boundaries: 0, the snapshot times, and T
    let mut bounds: Vec<f64> = vec![0.0];
    bounds.extend_from_slice(snapshots);
    bounds.push(t_end);
    bounds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    bounds.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));

    let mut states = vec![(0.0, state0)];
    let mut dt_max: f64 = 0.0;
    for seg in bounds.windows(2) {
        let (t0, t1) = (seg[0], seg[1]);
        let len = t1 - t0;
        if len <= 0.0 {
            continue;
        }
        let n_steps = (len / dt_cfl).ceil().max(1.0) as usize;
        let dt = len / n_steps as f64;
        dt_max = dt_max.max(dt);
        for k in 1..=n_steps {
            let s = &states.last().unwrap().1;
            let next = step(s, dt)?;
            next.validate().into_result()?;
            let t = if k == n_steps { t1 } else { t0 + k as f64 * dt };
            states.push((t, next));
        }
    }

    let snapshot_indices = snapshots
        .iter()
        .map(|&t| {
            states
                .iter()
                .position(|(tn, _)| (tn - t).abs() <= 1e-12 * (1.0 + t.abs()))
                .expect("snapshot time lands on a step boundary by construction")
        })
        .collect();

    Ok(Trajectory {
        meta: RunMeta {
            dx,
            dt: if dt_max > 0.0 { dt_max } else { dt_cfl.min(1.0) },
            dt_cfl,
            alpha: p.alpha,
            t_end,
            f_inf: data.f_inf,
            u0_inf: data.u0_inf,
            tv0: data.tv0,
            support: data.support,
            u_left: data.u_left,
            u_right: data.u_right,
        },
        states,
        snapshot_indices,
    })
}
