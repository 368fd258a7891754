//! Discrete state space for the conservative Hunter-Saxton solver.
//!
//! States are continuous piecewise linear pairs `(u, F)` where `F` is the
//! cumulative energy. A valid state satisfies, cell by cell, the discrete
//! energy inequality `(ΔU)² ≤ ΔF·Δx`, which is what keeps the pair inside
//! the admissible space and prevents characteristics from crossing within
//! a CFL-limited time step.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Monotonicity/saturation tolerance: float round-off below this is ignored,
/// anything beyond is a hard violation.
pub fn f_tolerance(f_inf: f64) -> f64 {
    1e-12 * f_inf.max(1.0)
}

fn cell_tolerance(f_inf: f64) -> f64 {
    1e-12 * (1.0 + f_inf)
}

/// A uniform grid: node `j` sits at `x0 + j·dx`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(x0: f64, dx: f64, n: usize) -> Result<Self> {
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::InvalidGrid(format!("dx must be positive, got {dx}")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 nodes, got {n}")));
        }
        Ok(GridSpec { x0, dx, n })
    }

    /// Smallest grid with `x0` aligned to a multiple of `dx` that covers `[lo, hi]`.
    pub fn covering(lo: f64, hi: f64, dx: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidGrid(format!("empty window [{lo}, {hi}]")));
        }
        let x0 = (lo / dx).floor() * dx;
        let n = ((hi - x0) / dx).ceil() as usize + 1;
        GridSpec::new(x0, dx, n.max(2))
    }

    pub fn node(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.dx
    }

    pub fn x_end(&self) -> f64 {
        self.node(self.n - 1)
    }
}

/// Common view of a piecewise linear `(u, F)` pair with the far-field
/// extension convention: `u` continues with its boundary values, `F` is 0
/// to the left and `f_inf` to the right of the window.
pub trait PiecewiseState {
    fn len(&self) -> usize;
    fn position(&self, j: usize) -> f64;
    fn u_at(&self, j: usize) -> f64;
    fn f_at(&self, j: usize) -> f64;
    fn total_energy(&self) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Continuous piecewise linear interpolant, extended outside the window.
    fn eval(&self, x: f64) -> (f64, f64) {
        let n = self.len();
        if x <= self.position(0) {
            return (self.u_at(0), 0.0);
        }
        if x >= self.position(n - 1) {
            return (self.u_at(n - 1), self.total_energy());
        }
        // binary search for the cell containing x
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.position(mid) <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (xl, xr) = (self.position(lo), self.position(hi));
        let theta = if xr > xl { (x - xl) / (xr - xl) } else { 0.0 };
        (
            self.u_at(lo) + theta * (self.u_at(hi) - self.u_at(lo)),
            self.f_at(lo) + theta * (self.f_at(hi) - self.f_at(lo)),
        )
    }

    /// Σ|ΔU| over the window.
    fn total_variation(&self) -> f64 {
        (1..self.len())
            .map(|j| (self.u_at(j) - self.u_at(j - 1)).abs())
            .sum()
    }

    fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.len();
        let f_inf = self.total_energy();
        let tol_f = f_tolerance(f_inf);
        let tol_cell = cell_tolerance(f_inf);

        if f_inf < 0.0 {
            report.push(Violation::NegativeTotalEnergy, 0, -f_inf);
        }
        for j in 0..n {
            let f = self.f_at(j);
            if f < -tol_f {
                report.push(Violation::FBelowZero, j, -f);
            }
            if f > f_inf + tol_f {
                report.push(Violation::FAboveTotal, j, f - f_inf);
            }
        }
        for j in 1..n {
            let drop = self.f_at(j - 1) - self.f_at(j);
            if drop > tol_f {
                report.push(Violation::FDecreasing, j, drop);
            }
            let w = self.position(j) - self.position(j - 1);
            if !(w > 0.0) {
                report.push(Violation::PositionsNotIncreasing, j, -w);
                continue;
            }
            let du = self.u_at(j) - self.u_at(j - 1);
            let df = self.f_at(j) - self.f_at(j - 1);
            let excess = du * du - df * w;
            if excess > tol_cell * w.max(1.0) {
                report.push(Violation::CellEnergy, j, excess);
            }
        }
        if self.f_at(0).abs() > tol_f {
            report.push(Violation::WindowLeftNotZero, 0, self.f_at(0).abs());
        }
        if (self.f_at(n - 1) - f_inf).abs() > tol_f {
            report.push(Violation::WindowRightNotSaturated, n - 1, (self.f_at(n - 1) - f_inf).abs());
        }
        report
    }
}

/// Uniform-grid state: the canonical form the scheme steps between.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub grid: GridSpec,
    pub u: Vec<f64>,
    pub f: Vec<f64>,
    pub f_inf: f64,
}

impl PiecewiseState for GridState {
    fn len(&self) -> usize {
        self.grid.n
    }
    fn position(&self, j: usize) -> f64 {
        self.grid.node(j)
    }
    fn u_at(&self, j: usize) -> f64 {
        self.u[j]
    }
    fn f_at(&self, j: usize) -> f64 {
        self.f[j]
    }
    fn total_energy(&self) -> f64 {
        self.f_inf
    }
}

/// Non-uniform piecewise linear state, the image of a `GridState` after
/// exact evolution by `tau` along characteristics.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakpointState {
    pub xs: Vec<f64>,
    pub u: Vec<f64>,
    pub f: Vec<f64>,
    pub f_inf: f64,
    pub tau: f64,
}

impl PiecewiseState for BreakpointState {
    fn len(&self) -> usize {
        self.xs.len()
    }
    fn position(&self, j: usize) -> f64 {
        self.xs[j]
    }
    fn u_at(&self, j: usize) -> f64 {
        self.u[j]
    }
    fn f_at(&self, j: usize) -> f64 {
        self.f[j]
    }
    fn total_energy(&self) -> f64 {
        self.f_inf
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    FDecreasing,
    FBelowZero,
    FAboveTotal,
    CellEnergy,
    WindowLeftNotZero,
    WindowRightNotSaturated,
    PositionsNotIncreasing,
    NegativeTotalEnergy,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Violation::FDecreasing => "F decreasing",
            Violation::FBelowZero => "F below zero",
            Violation::FAboveTotal => "F above total energy",
            Violation::CellEnergy => "cell energy inequality violated",
            Violation::WindowLeftNotZero => "F at left edge not zero",
            Violation::WindowRightNotSaturated => "F at right edge not saturated",
            Violation::PositionsNotIncreasing => "positions not strictly increasing",
            Violation::NegativeTotalEnergy => "negative total energy",
        };
        write!(fm, "{s}")
    }
}

/// Outcome of `validate`: violations are data, not errors.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<(Violation, usize, f64)>,
}

impl ValidationReport {
    fn push(&mut self, kind: Violation, index: usize, magnitude: f64) {
        self.violations.push((kind, index, magnitude));
    }

    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::ValidationFailed(self.to_string()))
        }
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            return write!(fm, "valid");
        }
        for (kind, index, magnitude) in &self.violations {
            writeln!(fm, "{kind} at index {index} (magnitude {magnitude:.3e})")?;
        }
        Ok(())
    }
}

pub type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Analytic or piecewise linear description of an initial pair `(u0, F0)`.
#[derive(Clone)]
pub struct InitialData {
    pub u0: Evaluator,
    pub f0: Evaluator,
    pub f_inf: f64,
    /// Interval outside which `F0` is constant.
    pub support: (f64, f64),
    pub u_left: f64,
    pub u_right: f64,
    /// Infimum of `u0'`, when known; breaking time is `-2/min_slope`.
    pub min_slope: Option<f64>,
    pub u0_inf: f64,
    pub tv0: f64,
}

impl std::fmt::Debug for InitialData {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("InitialData")
            .field("f_inf", &self.f_inf)
            .field("support", &self.support)
            .field("u_left", &self.u_left)
            .field("u_right", &self.u_right)
            .finish()
    }
}

impl InitialData {
    pub fn eval(&self, x: f64) -> (f64, f64) {
        ((self.u0)(x), (self.f0)(x))
    }
}

fn check_window_edges(f_left: f64, f_right: f64, grid: &GridSpec, f_inf: f64) -> Result<()> {
    let tol = f_tolerance(f_inf);
    if f_left.abs() > tol {
        return Err(Error::WindowTooSmall {
            x: grid.x0,
            value: f_left,
            expected: 0.0,
        });
    }
    if (f_right - f_inf).abs() > tol {
        return Err(Error::WindowTooSmall {
            x: grid.x_end(),
            value: f_right,
            expected: f_inf,
        });
    }
    Ok(())
}

fn check_monotone(f: &[f64], f_inf: f64) -> Result<()> {
    let tol = f_tolerance(f_inf);
    for j in 1..f.len() {
        let drop = f[j - 1] - f[j];
        if drop > tol {
            return Err(Error::NonMonotoneInput { index: j, drop });
        }
    }
    Ok(())
}

/// Projection of analytic initial data: sample `(u0, F0)` at the grid nodes.
pub fn project_initial(data: &InitialData, grid: &GridSpec) -> Result<GridState> {
    let u: Vec<f64> = (0..grid.n).map(|j| (data.u0)(grid.node(j))).collect();
    let f: Vec<f64> = (0..grid.n).map(|j| (data.f0)(grid.node(j))).collect();
    check_window_edges(f[0], f[grid.n - 1], grid, data.f_inf)?;
    check_monotone(&f, data.f_inf)?;
    Ok(GridState {
        grid: *grid,
        u,
        f,
        f_inf: data.f_inf,
    })
}

/// Projection of a breakpoint state: sample its linear interpolant at the
/// grid nodes. This is the operator that maps the admissible space into
/// itself, so the output always passes `validate` for valid input.
pub fn project_breakpoints(b: &BreakpointState, grid: &GridSpec) -> Result<GridState> {
    check_monotone(&b.f, b.f_inf)?;
    let n = grid.n;
    let m = b.xs.len();
    let mut u = Vec::with_capacity(n);
    let mut f = Vec::with_capacity(n);
    // monotone merge: both node sequences are increasing
    let mut j = 0usize;
    for i in 0..n {
        let x = grid.node(i);
        while j + 1 < m && b.xs[j + 1] <= x {
            j += 1;
        }
        if x <= b.xs[0] {
            u.push(b.u[0]);
            f.push(0.0);
        } else if x >= b.xs[m - 1] {
            u.push(b.u[m - 1]);
            f.push(b.f_inf);
        } else {
            let w = b.xs[j + 1] - b.xs[j];
            let theta = (x - b.xs[j]) / w;
            u.push(b.u[j] + theta * (b.u[j + 1] - b.u[j]));
            f.push(b.f[j] + theta * (b.f[j + 1] - b.f[j]));
        }
    }
    check_window_edges(f[0], f[n - 1], grid, b.f_inf)?;
    Ok(GridState {
        grid: *grid,
        u,
        f,
        f_inf: b.f_inf,
    })
}

/// A window certain to contain the energy support of the numerical solution
/// for all `t ∈ [0, T]`, from the support growth curves
/// `a(t) = a + u_left·t - (t/8 + 4Δt)·F∞·t - 2Δx` and the mirrored `b(t)`.
pub fn support_window(data: &InitialData, t_end: f64, dt: f64, dx: f64) -> (f64, f64) {
    let (a, b) = data.support;
    let f_inf = data.f_inf;
    let a_curve = |t: f64| a + data.u_left * t - (t / 8.0 + 4.0 * dt) * f_inf * t - 2.0 * dx;
    let b_curve = |t: f64| b + data.u_right * t + (t / 8.0 + 4.0 * dt) * f_inf * t + 2.0 * dx;

    let mut lo = a_curve(0.0).min(a_curve(t_end));
    let mut hi = b_curve(0.0).max(b_curve(t_end));
    if f_inf > 0.0 {
        // interior critical points of the two quadratics
        let ta = 4.0 * (data.u_left - 4.0 * dt * f_inf) / f_inf;
        if ta > 0.0 && ta < t_end {
            lo = lo.min(a_curve(ta));
        }
        let tb = -4.0 * (data.u_right + 4.0 * dt * f_inf) / f_inf;
        if tb > 0.0 && tb < t_end {
            hi = hi.max(b_curve(tb));
        }
    }
    (lo, hi)
}

/// Seeded generators for randomized valid states, used by the projection
/// estimate suites.
pub mod sample {
    use super::*;
    use rand::Rng;

    /// A random member of the admissible space with strictly increasing
    /// breakpoints, `F` running from 0 to a random total energy, and `U`
    /// increments saturating at most the cell energy budget.
    pub fn random_breakpoint_state<R: Rng>(rng: &mut R) -> BreakpointState {
        let m = rng.gen_range(3..40);
        let f_inf: f64 = rng.gen_range(0.1..5.0);
        let mut xs = Vec::with_capacity(m);
        let mut x = rng.gen_range(-2.0..0.0);
        for _ in 0..m {
            xs.push(x);
            x += rng.gen_range(0.01..0.8);
        }
        // nondecreasing F with fixed endpoints
        let mut weights: Vec<f64> = (0..m - 1).map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = weights.iter().sum();
        if total > 0.0 {
            for w in &mut weights {
                *w *= f_inf / total;
            }
        }
        let mut f = Vec::with_capacity(m);
        f.push(0.0);
        for w in &weights {
            f.push(f.last().unwrap() + w);
        }
        let last = f.len() - 1;
        f[last] = f_inf;
        // |ΔU| ≤ √(ΔF·Δx)
        let mut u = Vec::with_capacity(m);
        u.push(rng.gen_range(-1.0..1.0));
        for j in 1..m {
            let budget = ((f[j] - f[j - 1]).max(0.0) * (xs[j] - xs[j - 1])).sqrt();
            let du = rng.gen_range(-1.0..1.0) * budget;
            u.push(u[j - 1] + du);
        }
        BreakpointState {
            xs,
            u,
            f,
            f_inf,
            tau: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;
    use rand::SeedableRng;

    fn peakon_grid() -> GridSpec {
        GridSpec::new(-2.0, 0.25, 21).unwrap()
    }

    #[test]
    fn project_peakon_is_exact_on_nodes() {
        let data = reference::make_initial(reference::Problem::Peakon, None).unwrap();
        let grid = peakon_grid();
        let s = project_initial(&data, &grid).unwrap();
        // kinks at 0 and 1 lie on nodes, so the projection reproduces u0 pointwise
        for j in 0..grid.n {
            let x = grid.node(j);
            let (u0, f0) = data.eval(x);
            assert_eq!(s.u[j], u0);
            assert_eq!(s.f[j], f0);
        }
        let (u, f) = s.eval(0.5);
        assert_eq!(u, 0.5);
        assert_eq!(f, 0.5);
        assert!(s.validate().is_valid());
        assert_eq!(s.total_variation(), 1.0);
    }

    #[test]
    fn project_cusp_node_value() {
        let data = reference::make_initial(reference::Problem::Cusp, None).unwrap();
        let grid = GridSpec::covering(-2.0, 2.0, 0.25).unwrap();
        let s = project_initial(&data, &grid).unwrap();
        let j = ((0.0 - grid.x0) / grid.dx).round() as usize;
        assert!((s.f[j] - 4.0 / 3.0).abs() < 1e-15);
        // interpolated u halfway into the first cell right of the cusp
        let (u, _) = s.eval(0.125);
        let expected = (0.0 + 0.25f64.powf(2.0 / 3.0)) / 2.0;
        assert!((u - expected).abs() < 1e-15);
        assert!((expected - 0.19843).abs() < 1e-5);
    }

    #[test]
    fn project_constant_zero_energy() {
        let c = 3.5;
        let data = InitialData {
            u0: Arc::new(move |_| c),
            f0: Arc::new(|_| 0.0),
            f_inf: 0.0,
            support: (0.0, 1.0),
            u_left: c,
            u_right: c,
            min_slope: Some(0.0),
            u0_inf: c,
            tv0: 0.0,
        };
        let grid = GridSpec::covering(-1.0, 2.0, 0.5).unwrap();
        let s = project_initial(&data, &grid).unwrap();
        assert!(s.u.iter().all(|&v| v == c));
        assert!(s.f.iter().all(|&v| v == 0.0));
        assert!(s.validate().is_valid());
    }

    #[test]
    fn eval_extension_convention() {
        let data = reference::make_initial(reference::Problem::Peakon, None).unwrap();
        let s = project_initial(&data, &peakon_grid()).unwrap();
        assert_eq!(s.eval(-100.0), (s.u[0], 0.0));
        assert_eq!(s.eval(100.0), (*s.u.last().unwrap(), 1.0));
    }

    #[test]
    fn validate_reports_cell_energy_violation() {
        let s = GridState {
            grid: GridSpec::new(0.0, 1.0, 2).unwrap(),
            u: vec![0.0, 2.0],
            f: vec![0.0, 1.0],
            f_inf: 1.0,
        };
        let report = s.validate();
        assert!(report
            .violations
            .iter()
            .any(|(k, j, m)| *k == Violation::CellEnergy && *j == 1 && (*m - 3.0).abs() < 1e-12));
    }

    #[test]
    fn validate_reports_monotonicity_violation() {
        let mut s = project_initial(
            &reference::make_initial(reference::Problem::Peakon, None).unwrap(),
            &peakon_grid(),
        )
        .unwrap();
        s.f[5] = s.f[4] - 1e-6;
        let report = s.validate();
        assert!(report
            .violations
            .iter()
            .any(|(k, j, _)| *k == Violation::FDecreasing && *j == 5));
    }

    #[test]
    fn window_too_small_is_an_error() {
        let data = reference::make_initial(reference::Problem::Peakon, None).unwrap();
        let grid = GridSpec::new(0.25, 0.25, 3).unwrap();
        assert!(matches!(
            project_initial(&data, &grid),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn support_window_at_zero_time() {
        let data = reference::make_initial(reference::Problem::Peakon, None).unwrap();
        let (lo, hi) = support_window(&data, 0.0, 0.25, 0.25);
        assert!((lo - (0.0 - 0.5)).abs() < 1e-15);
        assert!((hi - (1.0 + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn support_window_peakon_known_values() {
        // a(1) = 0 + 1 - (1/8 + 1)·1 - 1/2 = -0.625, b(1) = 1 + 0 + 1.125 + 0.5 = 2.625
        let data = reference::make_initial(reference::Problem::Peakon, None).unwrap();
        let dt = 0.25f64;
        let dx = 0.25f64;
        let a1 = 0.0 + 1.0 * 1.0 - (1.0 / 8.0 + 4.0 * dt) * 1.0 * 1.0 - 2.0 * dx;
        let b1 = 1.0 + 0.0 + (1.0 / 8.0 + 4.0 * dt) * 1.0 * 1.0 + 2.0 * dx;
        assert!((a1 + 0.625).abs() < 1e-15);
        assert!((b1 - 2.625).abs() < 1e-15);
        let (lo, hi) = support_window(&data, 1.0, dt, dx);
        assert!(lo <= a1 && hi >= b1);
    }

    #[test]
    fn projection_idempotent_on_random_states() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let b = sample::random_breakpoint_state(&mut rng);
            let lo = b.xs[0] - 0.3;
            let hi = b.xs[b.xs.len() - 1] + 0.3;
            let grid = GridSpec::covering(lo, hi, 0.11).unwrap();
            let s1 = project_breakpoints(&b, &grid).unwrap();
            assert!(s1.validate().is_valid(), "{}", s1.validate());
            let b1 = BreakpointState {
                xs: (0..grid.n).map(|j| grid.node(j)).collect(),
                u: s1.u.clone(),
                f: s1.f.clone(),
                f_inf: s1.f_inf,
                tau: 0.0,
            };
            let s2 = project_breakpoints(&b1, &grid).unwrap();
            assert_eq!(s1, s2);
        }
    }
}
