//! Behavioral (Nash equilibrium) runs: the epidemic coupled to imitation
//! dynamics, stepped with explicit Euler until the full derivative vanishes.

use crate::error::{Error, Result};
use crate::integrate::{check_state, euler_step, TimeGrid, Trajectory};
use crate::model::{behavior_rhs, EpidemicState, ModelParams};

pub const DEFAULT_EQ_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct NeRun {
    /// Covers the whole horizon. Once equilibrium is detected, the remaining
    /// nodes repeat the equilibrium state.
    pub trajectory: Trajectory,
    pub equilibrium_time: Option<f64>,
    pub equilibrium_node: Option<usize>,
    pub converged: bool,
    pub final_state: EpidemicState,
}

/// Max-norm of the behavioral derivative (compartments and `dx`).
pub fn equilibrium_residual(st: &EpidemicState, p: &ModelParams) -> f64 {
    behavior_rhs(st, p).max_norm()
}

pub fn run_ne(
    p: &ModelParams,
    init: EpidemicState,
    horizon: TimeGrid,
    eq_tol: f64,
) -> Result<NeRun> {
    p.validate()?;
    init.validate()?;
    if eq_tol.is_nan() || eq_tol <= 0.0 {
        return Err(Error::validation("eq_tol", "must be positive"));
    }
    let rhs = |s: &EpidemicState| behavior_rhs(s, p);
    let n = horizon.n();
    let mut states = Vec::with_capacity(n);
    let mut st = init;
    let mut equilibrium_node = None;
    for k in 0..n {
        if k > 0 {
            st = euler_step(&rhs, &st, horizon.dt());
            check_state(&st, horizon.time(k))?;
        }
        states.push(st);
        if equilibrium_residual(&st, p) < eq_tol {
            equilibrium_node = Some(k);
            states.resize(n, st);
            break;
        }
    }
    let final_state = *states.last().expect("grid has nodes");
    Ok(NeRun {
        trajectory: Trajectory {
            grid: horizon,
            states,
        },
        equilibrium_time: equilibrium_node.map(|k| horizon.time(k)),
        equilibrium_node,
        converged: equilibrium_node.is_some(),
        final_state,
    })
}

/// Earliest node whose recomputed behavioral derivative has max-norm below
/// `eq_tol`, as a time.
pub fn detect_equilibrium(traj: &Trajectory, p: &ModelParams, eq_tol: f64) -> Option<f64> {
    traj.states
        .iter()
        .position(|s| equilibrium_residual(s, p) < eq_tol)
        .map(|k| traj.grid.time(k))
}
