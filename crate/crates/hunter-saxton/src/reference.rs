//! Exact conservative solutions used as oracles: the two worked examples
//! (peakon and cusp) plus the introductory symmetric peakon that breaks at
//! t = 2. Cumulative energies at jump points use the left-limit convention,
//! matching the left continuity of F in the admissible space.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::state::InitialData;

/// Signed cube root: naive fractional powers of negative floats are NaN.
pub fn cbrt_signed(s: f64) -> f64 {
    s.signum() * s.abs().powf(1.0 / 3.0)
}

fn pow23(s: f64) -> f64 {
    let c = cbrt_signed(s);
    c * c
}

pub type SpaceTimeEval = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type KinkFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// A closed-form conservative solution with its initial data.
#[derive(Clone)]
pub struct ExactSolution {
    pub name: &'static str,
    pub u: SpaceTimeEval,
    pub f: SpaceTimeEval,
    /// Energy density F_x away from kinks (used by weak-form quadrature).
    pub density: SpaceTimeEval,
    /// Non-smooth x locations at time t, for sampling and quadrature panels.
    pub kinks: KinkFn,
    pub f_inf: f64,
    pub t_range: (f64, f64),
    pub initial: InitialData,
}

impl ExactSolution {
    pub fn eval(&self, t: f64, x: f64) -> (f64, f64) {
        ((self.u)(t, x), (self.f)(t, x))
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if t < self.t_range.0 || t > self.t_range.1 {
            return Err(Error::RangeError {
                t,
                lo: self.t_range.0,
                hi: self.t_range.1,
            });
        }
        Ok(())
    }
}

/// Peakon of the numerical experiments: kinks travel along t - t²/8 and
/// 1 + t²/8, wave breaking at t = 2 where F jumps 0 → 1 at x = 3/2.
pub fn peakon() -> ExactSolution {
    let left = |t: f64| t - t * t / 8.0;
    let right = |t: f64| 1.0 + t * t / 8.0;
    let u = move |t: f64, x: f64| {
        if t == 2.0 {
            return 0.5;
        }
        let (l, r) = (left(t), right(t));
        if x < l {
            1.0 - t / 4.0
        } else if x <= r {
            -(x - t + t * t / 8.0) / (1.0 - t / 2.0) + 1.0 - t / 4.0
        } else {
            t / 4.0
        }
    };
    let f = move |t: f64, x: f64| {
        if t == 2.0 {
            // left-limit convention at the jump
            return if x <= 1.5 { 0.0 } else { 1.0 };
        }
        let (l, r) = (left(t), right(t));
        if x < l {
            0.0
        } else if x <= r {
            let d = 1.0 - t / 2.0;
            (x - t + t * t / 8.0) / (d * d)
        } else {
            1.0
        }
    };
    let density = move |t: f64, x: f64| {
        if t == 2.0 {
            return 0.0;
        }
        let (l, r) = (left(t), right(t));
        if x < l || x > r {
            0.0
        } else {
            let d = 1.0 - t / 2.0;
            1.0 / (d * d)
        }
    };
    ExactSolution {
        name: "peakon",
        u: Arc::new(u),
        f: Arc::new(f),
        density: Arc::new(density),
        kinks: Arc::new(move |t| {
            if t == 2.0 {
                vec![1.5]
            } else {
                vec![left(t), right(t)]
            }
        }),
        f_inf: 1.0,
        t_range: (0.0, f64::INFINITY),
        initial: peakon_initial(),
    }
}

fn peakon_initial() -> InitialData {
    InitialData {
        u0: Arc::new(|x| {
            if x < 0.0 {
                1.0
            } else if x <= 1.0 {
                1.0 - x
            } else {
                0.0
            }
        }),
        f0: Arc::new(|x| x.clamp(0.0, 1.0)),
        f_inf: 1.0,
        support: (0.0, 1.0),
        u_left: 1.0,
        u_right: 0.0,
        min_slope: Some(-1.0),
        u0_inf: 1.0,
        tv0: 1.0,
    }
}

/// Cusp solution: |x|^(2/3) singularity, breaking continuously over t ∈ [0,3].
pub fn cusp() -> ExactSolution {
    let left = |t: f64| -1.0 + t - t * t / 3.0;
    let right = |t: f64| 1.0 + t + t * t / 3.0;
    let shift = |t: f64| (t / 3.0) * (t / 3.0) * (t / 3.0);
    let u = move |t: f64, x: f64| {
        let (l, r) = (left(t), right(t));
        if x < l {
            1.0 - 2.0 * t / 3.0
        } else if x <= r {
            pow23(x + shift(t)) - t * t / 9.0
        } else {
            1.0 + 2.0 * t / 3.0
        }
    };
    let f = move |t: f64, x: f64| {
        let (l, r) = (left(t), right(t));
        if x < l {
            0.0
        } else if x <= r {
            4.0 / 3.0 * cbrt_signed(x + shift(t)) + 4.0 / 3.0 * (1.0 - t / 3.0)
        } else {
            8.0 / 3.0
        }
    };
    let density = move |t: f64, x: f64| {
        let (l, r) = (left(t), right(t));
        if x < l || x > r {
            0.0
        } else {
            let s = x + shift(t);
            4.0 / 9.0 / pow23(s)
        }
    };
    ExactSolution {
        name: "cusp",
        u: Arc::new(u),
        f: Arc::new(f),
        density: Arc::new(density),
        kinks: Arc::new(move |t| vec![left(t), -shift(t), right(t)]),
        f_inf: 8.0 / 3.0,
        t_range: (0.0, f64::INFINITY),
        initial: cusp_initial(),
    }
}

fn cusp_initial() -> InitialData {
    InitialData {
        u0: Arc::new(|x| if x.abs() <= 1.0 { pow23(x) } else { 1.0 }),
        f0: Arc::new(|x| {
            if x < -1.0 {
                0.0
            } else if x <= 1.0 {
                4.0 / 3.0 * (cbrt_signed(x) + 1.0)
            } else {
                8.0 / 3.0
            }
        }),
        f_inf: 8.0 / 3.0,
        support: (-1.0, 1.0),
        u_left: 1.0,
        u_right: 1.0,
        min_slope: None,
        u0_inf: 1.0,
        tv0: 2.0,
    }
}

/// Symmetric peakon of the introduction: kinks at ±(1 - t/2)², all energy
/// concentrates at x = 0 when t = 2. Only u has a closed form here; F is
/// reconstructed by integrating u_x², giving total energy 2.
pub fn symmetric_peakon() -> ExactSolution {
    let kink = |t: f64| (1.0 - t / 2.0) * (1.0 - t / 2.0);
    let u = move |t: f64, x: f64| {
        let k = kink(t);
        if t == 2.0 {
            return 0.0;
        }
        if x < -k {
            1.0 - t / 2.0
        } else if x <= k {
            -x / (1.0 - t / 2.0)
        } else {
            -1.0 + t / 2.0
        }
    };
    let f = move |t: f64, x: f64| {
        let k = kink(t);
        if t == 2.0 {
            return if x <= 0.0 { 0.0 } else { 2.0 };
        }
        if x < -k {
            0.0
        } else if x <= k {
            ((x + k) / k).clamp(0.0, 2.0)
        } else {
            2.0
        }
    };
    let density = move |t: f64, x: f64| {
        if t == 2.0 {
            return 0.0;
        }
        let k = kink(t);
        if x.abs() > k {
            0.0
        } else {
            1.0 / k
        }
    };
    ExactSolution {
        name: "peakon1",
        u: Arc::new(u),
        f: Arc::new(f),
        density: Arc::new(density),
        kinks: Arc::new(move |t| {
            if t == 2.0 {
                vec![0.0]
            } else {
                let k = kink(t);
                vec![-k, k]
            }
        }),
        f_inf: 2.0,
        t_range: (0.0, 4.0),
        initial: symmetric_peakon_initial(),
    }
}

fn symmetric_peakon_initial() -> InitialData {
    InitialData {
        u0: Arc::new(|x| {
            if x < -1.0 {
                1.0
            } else if x <= 1.0 {
                -x
            } else {
                -1.0
            }
        }),
        f0: Arc::new(|x| (x + 1.0).clamp(0.0, 2.0)),
        f_inf: 2.0,
        support: (-1.0, 1.0),
        u_left: 1.0,
        u_right: -1.0,
        min_slope: Some(-1.0),
        u0_inf: 1.0,
        tv0: 2.0,
    }
}

/// The named initial-data cases, or custom continuous piecewise linear data.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Peakon,
    Cusp,
    Peakon1,
    /// Breakpoints as `(x, u, F)` triples.
    Custom(Vec<(f64, f64, f64)>),
}

impl Problem {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "peakon" => Ok(Problem::Peakon),
            "cusp" => Ok(Problem::Cusp),
            "peakon1" => Ok(Problem::Peakon1),
            other => Err(Error::InvalidParameter(format!(
                "unknown problem '{other}' (expected peakon, cusp, or peakon1)"
            ))),
        }
    }

    /// Exact solution for the named cases; custom data has none.
    pub fn exact(&self) -> Option<ExactSolution> {
        match self {
            Problem::Peakon => Some(peakon()),
            Problem::Cusp => Some(cusp()),
            Problem::Peakon1 => Some(symmetric_peakon()),
            Problem::Custom(_) => None,
        }
    }
}

/// Initial data for a named problem, or from a custom breakpoint list.
pub fn make_initial(problem: Problem, custom: Option<Vec<(f64, f64, f64)>>) -> Result<InitialData> {
    let problem = match custom {
        Some(points) => Problem::Custom(points),
        None => problem,
    };
    match problem {
        Problem::Peakon => Ok(peakon_initial()),
        Problem::Cusp => Ok(cusp_initial()),
        Problem::Peakon1 => Ok(symmetric_peakon_initial()),
        Problem::Custom(points) => custom_initial(points),
    }
}

fn custom_initial(points: Vec<(f64, f64, f64)>) -> Result<InitialData> {
    if points.len() < 2 {
        return Err(Error::InvalidCustomData(
            "need at least two breakpoints".into(),
        ));
    }
    let f_inf = points.last().unwrap().2;
    if points[0].2 != 0.0 {
        return Err(Error::InvalidCustomData("F must start at 0".into()));
    }
    for w in points.windows(2) {
        let (x0, u0, f0) = w[0];
        let (x1, u1, f1) = w[1];
        if !(x1 > x0) {
            return Err(Error::InvalidCustomData(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if f1 < f0 {
            return Err(Error::InvalidCustomData("F must be nondecreasing".into()));
        }
        let du = u1 - u0;
        if du * du > (f1 - f0) * (x1 - x0) + 1e-12 * (1.0 + f_inf) {
            return Err(Error::InvalidCustomData(format!(
                "cell energy inequality violated on [{x0}, {x1}]"
            )));
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let us: Vec<f64> = points.iter().map(|p| p.1).collect();
    let fs: Vec<f64> = points.iter().map(|p| p.2).collect();
    let interp = move |table: Vec<f64>, xs: Vec<f64>| {
        move |x: f64| -> f64 {
            if x <= xs[0] {
                return table[0];
            }
            if x >= xs[xs.len() - 1] {
                return table[table.len() - 1];
            }
            let j = xs.partition_point(|&p| p <= x) - 1;
            let theta = (x - xs[j]) / (xs[j + 1] - xs[j]);
            table[j] + theta * (table[j + 1] - table[j])
        }
    };
    let u_left = us[0];
    let u_right = *us.last().unwrap();
    let u0_inf = us.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tv0: f64 = us.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let min_slope = xs
        .windows(2)
        .zip(us.windows(2))
        .map(|(xw, uw)| (uw[1] - uw[0]) / (xw[1] - xw[0]))
        .fold(f64::INFINITY, f64::min);
    let support = (xs[0], *xs.last().unwrap());
    Ok(InitialData {
        u0: Arc::new(interp(us, xs.clone())),
        f0: Arc::new(interp(fs, xs)),
        f_inf,
        support,
        u_left,
        u_right,
        min_slope: Some(min_slope),
        u0_inf,
        tv0,
    })
}
