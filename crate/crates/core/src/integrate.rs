//! Fixed-step integrators on uniform grids and trapezoidal quadrature.
//!
//! The behavioral model is stepped with explicit Euler; the control model's
//! state and costate passes use classical RK4 with node-averaged control
//! (and, for the costate pass, node-averaged state) at half steps.

use crate::error::{Error, Result};
use crate::model::{AdjointState, EpidemicState, StateDerivative};

/// Compartment value below which a step is treated as an instability.
pub const INSTABILITY_FLOOR: f64 = -1e-6;

/// Uniform time grid `t0, t0 + dt, ..., t_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t_end: f64,
    dt: f64,
    n: usize,
}

impl TimeGrid {
    /// The span must be an integer multiple of `dt` (to 1e-9 relative).
    pub fn new(t0: f64, t_end: f64, dt: f64) -> Result<Self> {
        if !(t0.is_finite() && t_end.is_finite() && dt.is_finite()) {
            return Err(Error::validation("grid", "non-finite bound or step"));
        }
        if t_end <= t0 {
            return Err(Error::validation(
                "t_end",
                format!("t_end = {t_end} must exceed t0 = {t0}"),
            ));
        }
        if dt <= 0.0 {
            return Err(Error::validation("dt", format!("dt = {dt} must be positive")));
        }
        let steps = (t_end - t0) / dt;
        let rounded = steps.round();
        if (steps - rounded).abs() > 1e-9 * rounded.max(1.0) {
            return Err(Error::validation(
                "dt",
                format!("dt = {dt} does not divide the span {} exactly", t_end - t0),
            ));
        }
        let n = rounded as usize + 1;
        if n < 2 {
            return Err(Error::validation("dt", "grid needs at least two nodes"));
        }
        Ok(TimeGrid { t0, t_end, dt, n })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Time at node `k`, computed from the endpoints so that e.g. node 3 of a
    /// 0.1 grid prints as `0.3`.
    pub fn time(&self, k: usize) -> f64 {
        if k + 1 == self.n {
            return self.t_end;
        }
        self.t0 + (self.t_end - self.t0) * (k as f64) / ((self.n - 1) as f64)
    }

    /// Index of the node at time `t`, if `t` lies on the grid (to 1e-9 steps).
    pub fn node_at(&self, t: f64) -> Result<usize> {
        let out_of_range = || Error::Range {
            t,
            t0: self.t0,
            t_end: self.t_end,
        };
        let pos = (t - self.t0) / self.dt;
        let k = pos.round();
        if !pos.is_finite() || k < 0.0 || k as usize >= self.n {
            return Err(out_of_range());
        }
        if (pos - k).abs() > 1e-6 {
            return Err(Error::validation(
                "upto",
                format!("t = {t} is not a grid node (dt = {})", self.dt),
            ));
        }
        Ok(k as usize)
    }
}

/// States on every node of a grid; `states[k].rate` is the vaccination rate
/// at node `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<EpidemicState>,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, states: Vec<EpidemicState>) -> Result<Self> {
        if states.len() != grid.n() {
            return Err(Error::Dimension {
                expected: grid.n(),
                got: states.len(),
            });
        }
        Ok(Trajectory { grid, states })
    }

    pub fn rates(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.rate).collect()
    }

    pub fn last(&self) -> &EpidemicState {
        self.states.last().expect("trajectory has at least two nodes")
    }

    /// Largest `|s + v + i + r - 1|` over all nodes.
    pub fn max_simplex_drift(&self) -> f64 {
        self.states
            .iter()
            .map(|s| (s.total() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Costates on every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointTrajectory {
    pub grid: TimeGrid,
    pub values: Vec<AdjointState>,
}

pub(crate) fn check_state(st: &EpidemicState, t: f64) -> Result<()> {
    let fields = [st.s, st.v, st.i, st.r, st.rate];
    if fields.iter().any(|x| !x.is_finite()) {
        return Err(Error::Instability {
            t,
            reason: "non-finite state".into(),
        });
    }
    let min = st.s.min(st.v).min(st.i).min(st.r);
    if min < INSTABILITY_FLOOR {
        return Err(Error::Instability {
            t,
            reason: format!("compartment fell to {min:e}"),
        });
    }
    Ok(())
}

/// One explicit Euler step; the rate is clamped to `[0, 1]` afterwards.
pub fn euler_step<F>(rhs: &F, st: &EpidemicState, dt: f64) -> EpidemicState
where
    F: Fn(&EpidemicState) -> StateDerivative,
{
    let mut next = st.step(&rhs(st), dt);
    next.rate = next.rate.clamp(0.0, 1.0);
    next
}

/// Explicit Euler over the whole grid.
pub fn euler_forward<F>(rhs: F, init: EpidemicState, grid: TimeGrid) -> Result<Trajectory>
where
    F: Fn(&EpidemicState) -> StateDerivative,
{
    check_state(&init, grid.t0())?;
    let mut states = Vec::with_capacity(grid.n());
    states.push(init);
    let mut st = init;
    for k in 1..grid.n() {
        st = euler_step(&rhs, &st, grid.dt());
        check_state(&st, grid.time(k))?;
        states.push(st);
    }
    Ok(Trajectory { grid, states })
}

/// Classical RK4 for an exogenous rate sequence. `rhs(state, u)` gets the
/// node control at the endpoints and the mean of the two node values at the
/// half step. The returned states carry `rate = control[k]`.
pub fn rk4_forward<F>(
    rhs: F,
    init: EpidemicState,
    grid: TimeGrid,
    control: &[f64],
) -> Result<Trajectory>
where
    F: Fn(&EpidemicState, f64) -> StateDerivative,
{
    if control.len() != grid.n() {
        return Err(Error::Dimension {
            expected: grid.n(),
            got: control.len(),
        });
    }
    let dt = grid.dt();
    let mut st = init.with_rate(control[0]);
    check_state(&st, grid.t0())?;
    let mut states = Vec::with_capacity(grid.n());
    states.push(st);
    for k in 0..grid.n() - 1 {
        let (u0, u1) = (control[k], control[k + 1]);
        let um = 0.5 * (u0 + u1);
        let k1 = rhs(&st, u0);
        let k2 = rhs(&st.step(&k1, 0.5 * dt), um);
        let k3 = rhs(&st.step(&k2, 0.5 * dt), um);
        let k4 = rhs(&st.step(&k3, dt), u1);
        st = st.step(&StateDerivative::rk4_blend(&k1, &k2, &k3, &k4), dt);
        st.rate = u1;
        check_state(&st, grid.time(k + 1))?;
        states.push(st);
    }
    Ok(Trajectory { grid, states })
}

/// Classical RK4 for the costate system, integrated from `t_end` down to
/// `t0`. State and control at half steps are node averages.
pub fn rk4_backward<F>(
    rhs: F,
    terminal: AdjointState,
    states: &Trajectory,
    control: &[f64],
) -> Result<AdjointTrajectory>
where
    F: Fn(&EpidemicState, &AdjointState, f64) -> AdjointState,
{
    let grid = states.grid;
    let n = grid.n();
    if control.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: control.len(),
        });
    }
    let dt = grid.dt();
    let mut values = vec![AdjointState::ZERO; n];
    values[n - 1] = terminal;
    let mut lam = terminal;
    for k in (1..n).rev() {
        let (x1, x0) = (&states.states[k], &states.states[k - 1]);
        let xm = x1.midpoint(x0);
        let (u1, u0) = (control[k], control[k - 1]);
        let um = 0.5 * (u1 + u0);
        let k1 = rhs(x1, &lam, u1);
        let k2 = rhs(&xm, &lam.step(&k1, -0.5 * dt), um);
        let k3 = rhs(&xm, &lam.step(&k2, -0.5 * dt), um);
        let k4 = rhs(x0, &lam.step(&k3, -dt), u0);
        lam = lam.step(&AdjointState::rk4_blend(&k1, &k2, &k3, &k4), -dt);
        if !lam.is_finite() {
            return Err(Error::Instability {
                t: grid.time(k - 1),
                reason: "non-finite costate".into(),
            });
        }
        values[k - 1] = lam;
    }
    Ok(AdjointTrajectory { grid, values })
}

/// Trapezoidal rule `Σ dt (f_k + f_{k+1}) / 2` over the whole grid.
pub fn trapezoid(samples: &[f64], grid: &TimeGrid) -> Result<f64> {
    if samples.len() != grid.n() {
        return Err(Error::Dimension {
            expected: grid.n(),
            got: samples.len(),
        });
    }
    Ok(trapezoid_prefix(samples, grid.dt(), samples.len()))
}

/// Trapezoidal rule over the first `nodes` samples.
pub(crate) fn trapezoid_prefix(samples: &[f64], dt: f64, nodes: usize) -> f64 {
    samples[..nodes]
        .windows(2)
        .map(|w| 0.5 * dt * (w[0] + w[1]))
        .sum()
}
