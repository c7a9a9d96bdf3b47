//! Social optimum via Pontryagin's maximum principle, solved with the
//! forward-backward sweep.
//!
//! Each sweep integrates the state forward under the current control,
//! integrates the costates backward from `λ(T) = 0`, evaluates the pointwise
//! Hamiltonian minimizer at every node and blends it into the control with a
//! relaxation weight. Iteration stops once the fixed-point residual
//! `max |candidate - u|` drops below `conv_tol` (relative to `max(1, max u)`);
//! the relaxation weight is halved whenever that residual grows, which damps
//! the oscillation plain sweeps show on long horizons.

use crate::error::{Error, Result};
use crate::integrate::{
    rk4_backward, rk4_forward, trapezoid, AdjointTrajectory, TimeGrid, Trajectory,
};
use crate::model::{
    adjoint_rhs, check_control, compartment_rhs, optimal_control_candidate, running_cost,
    AdjointState, EpidemicState, ModelParams,
};

/// Starting control for the sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlInit {
    Constant(f64),
    Sequence(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FbsConfig {
    pub grid: TimeGrid,
    /// Weight of the new candidate in the control update, in `(0, 1]`.
    pub relaxation: f64,
    pub conv_tol: f64,
    pub max_iters: usize,
    pub u_init: ControlInit,
}

impl FbsConfig {
    pub const DEFAULT_RELAXATION: f64 = 0.5;
    pub const DEFAULT_CONV_TOL: f64 = 1e-4;
    pub const DEFAULT_MAX_ITERS: usize = 5000;

    /// Default sweep settings on `grid`, starting from `u ≡ 0`.
    pub fn new(grid: TimeGrid) -> Self {
        FbsConfig {
            grid,
            relaxation: Self::DEFAULT_RELAXATION,
            conv_tol: Self::DEFAULT_CONV_TOL,
            max_iters: Self::DEFAULT_MAX_ITERS,
            u_init: ControlInit::Constant(0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::validation(
                "fbs.relaxation",
                format!("{} not in (0, 1]", self.relaxation),
            ));
        }
        if self.conv_tol.is_nan() || self.conv_tol <= 0.0 {
            return Err(Error::validation("fbs.conv_tol", "must be positive"));
        }
        if self.max_iters < 1 {
            return Err(Error::validation("fbs.max_iters", "must be at least 1"));
        }
        Ok(())
    }

    fn initial_control(&self, p: &ModelParams) -> Result<Vec<f64>> {
        let n = self.grid.n();
        let u = match &self.u_init {
            ControlInit::Constant(c) => vec![*c; n],
            ControlInit::Sequence(seq) => {
                if seq.len() != n {
                    return Err(Error::Dimension {
                        expected: n,
                        got: seq.len(),
                    });
                }
                seq.clone()
            }
        };
        for &x in &u {
            check_control(x, p)?;
        }
        Ok(u)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoRun {
    /// Forward pass under the returned control.
    pub states: Trajectory,
    pub control: Vec<f64>,
    /// Backward pass consistent with `states` and `control`.
    pub adjoints: AdjointTrajectory,
    /// `∫ (c I + c_v u S)^2 dt` along `states`.
    pub objective_j: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Max-norm control change at each sweep.
    pub convergence_history: Vec<f64>,
}

fn forward(p: &ModelParams, init: EpidemicState, grid: TimeGrid, u: &[f64]) -> Result<Trajectory> {
    rk4_forward(|s, u| compartment_rhs(s, u, p), init, grid, u)
}

fn backward(p: &ModelParams, states: &Trajectory, u: &[f64]) -> Result<AdjointTrajectory> {
    rk4_backward(|s, l, u| adjoint_rhs(s, l, u, p), AdjointState::ZERO, states, u)
}

/// Trapezoid of the running cost along a computed trajectory.
pub fn objective_along(p: &ModelParams, states: &Trajectory, control: &[f64]) -> Result<f64> {
    let integrand: Vec<f64> = states
        .states
        .iter()
        .zip(control)
        .map(|(s, &u)| running_cost(s, u, p))
        .collect();
    trapezoid(&integrand, &states.grid)
}

const MIN_RELAXATION: f64 = 1e-3;

pub fn solve_fbs(p: &ModelParams, init: EpidemicState, cfg: &FbsConfig) -> Result<SoRun> {
    p.validate()?;
    init.validate()?;
    cfg.validate()?;
    if p.c_v <= 0.0 {
        return Err(Error::Config(
            "the social optimum requires c_v > 0 (the Hamiltonian is linear in u otherwise)"
                .into(),
        ));
    }
    let grid = cfg.grid;
    let mut relax = cfg.relaxation;
    let mut u = cfg.initial_control(p)?;
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut candidate = vec![0.0; grid.n()];
    let mut prev_residual = f64::INFINITY;

    while iterations < cfg.max_iters {
        iterations += 1;
        let states = forward(p, init, grid, &u)?;
        let adjoints = backward(p, &states, &u)?;
        for ((slot, st), adj) in candidate.iter_mut().zip(&states.states).zip(&adjoints.values) {
            *slot = optimal_control_candidate(st, adj, p)?;
        }
        let residual = u
            .iter()
            .zip(&candidate)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        if !residual.is_finite() {
            return Err(Error::Instability {
                t: grid.t0(),
                reason: "non-finite control update".into(),
            });
        }
        if residual > prev_residual {
            relax = (relax * 0.5).max(MIN_RELAXATION);
        }
        prev_residual = residual;
        let mut change = 0.0_f64;
        let mut peak = 0.0_f64;
        for (old, &cand) in u.iter_mut().zip(&candidate) {
            let new = (relax * cand + (1.0 - relax) * *old).clamp(0.0, p.u_max);
            change = change.max((new - *old).abs());
            peak = peak.max(new.abs());
            *old = new;
        }
        history.push(change);
        if residual <= cfg.conv_tol * peak.max(1.0) {
            // Finish on the projected minimizer so active bounds are hit exactly.
            u.copy_from_slice(&candidate);
            converged = true;
            break;
        }
    }

    let states = forward(p, init, grid, &u)?;
    let adjoints = backward(p, &states, &u)?;
    let objective_j = objective_along(p, &states, &u)?;
    Ok(SoRun {
        states,
        control: u,
        adjoints,
        objective_j,
        iterations,
        converged,
        convergence_history: history,
    })
}

/// Objective of an arbitrary admissible control on `grid`.
pub fn evaluate_objective(
    p: &ModelParams,
    init: EpidemicState,
    grid: TimeGrid,
    control: &[f64],
) -> Result<f64> {
    p.validate()?;
    for &x in control {
        check_control(x, p)?;
    }
    let states = forward(p, init, grid, control)?;
    objective_along(p, &states, control)
}
