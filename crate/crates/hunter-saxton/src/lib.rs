//! Conservative solver for the Hunter-Saxton equation.
//!
//! The equation transports an energy density alongside the velocity; smooth
//! data can break in finite time while the total energy F∞ stays constant.
//! The scheme here works directly on continuous piecewise linear pairs
//! `(u, F)` of velocity and cumulative energy:
//!
//! 1. project the data onto a uniform grid ([`state::project_initial`]),
//! 2. move the nodes exactly along characteristics for one CFL-limited
//!    step ([`evolution::evolve`]),
//! 3. sample the result back onto the grid ([`evolution::resample`]),
//! 4. repeat.
//!
//! Both sub-operations preserve the discrete energy inequality
//! `(ΔU)² ≤ ΔF·Δx` cell by cell and the total energy exactly, so the
//! numerical solution stays admissible for all time and passes through
//! wave breaking without losing energy.
//!
//! See the `examples/` directory for runnable entry points covering each
//! capability: running the scheme, convergence studies, weak-form residual
//! checks, a priori bound verification, and custom initial data.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod io;
pub mod reference;
pub mod state;

pub use analysis::{
    bound_constants, check_bounds, convergence_study, error_norms, fit_rate, projection_norms,
    weak_residual, weak_residual_exact, BoundConstants, BoundsReport, BumpTestFunction,
    ConvergenceReport, ErrorReport, TestFunction,
};
pub use error::{Error, Result};
pub use evolution::{
    cfl_bound, cfl_dt, evolve, min_gap, resample, resample_closed_form, run, step, CflParams,
    RunMeta, Trajectory,
};
pub use reference::{cusp, make_initial, symmetric_peakon, peakon, ExactSolution, Problem};
pub use state::{
    project_breakpoints, project_initial, support_window, BreakpointState, GridSpec, GridState,
    InitialData, PiecewiseState, ValidationReport,
};
