//! Reference computations that do not share code paths with the solvers
//! they check: the closed-form SIRS endemic equilibrium, finite-difference
//! Hamiltonian gradients, an explicit-Euler costate pass, and exhaustive
//! search over piecewise-constant controls.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrate::{AdjointTrajectory, TimeGrid, Trajectory};
use crate::model::{
    adjoint_rhs, hamiltonian, hamiltonian_du, AdjointState, EpidemicState, ModelParams, S_FLOOR,
};
use crate::so::{evaluate_objective, SoRun};

pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Largest number of candidates [`brute_force_control`] will enumerate.
pub const BRUTE_FORCE_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndemicEquilibrium {
    pub s_star: f64,
    pub i_star: f64,
    pub r_star: f64,
}

/// Long-run state of the unvaccinated SIRS reduction (`x = 0`, `V = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SirsEquilibrium {
    /// `beta / gamma <= 1`: the infection dies out.
    DiseaseFree,
    Endemic(EndemicEquilibrium),
    /// `omega = 0`: plain SIR, which has no endemic state; the disease-free
    /// point is reported, although the final susceptible fraction depends on
    /// the initial condition.
    NoWaning,
}

impl SirsEquilibrium {
    pub fn point(&self) -> EndemicEquilibrium {
        match self {
            SirsEquilibrium::Endemic(e) => *e,
            _ => EndemicEquilibrium {
                s_star: 1.0,
                i_star: 0.0,
                r_star: 0.0,
            },
        }
    }
}

pub fn sirs_equilibrium(p: &ModelParams) -> SirsEquilibrium {
    let ratio = p.gamma / p.beta;
    if p.beta <= p.gamma {
        return SirsEquilibrium::DiseaseFree;
    }
    if p.omega == 0.0 {
        return SirsEquilibrium::NoWaning;
    }
    let s_star = ratio;
    let i_star = p.omega * (1.0 - ratio) / (p.omega + p.gamma);
    let r_star = p.gamma * i_star / p.omega;
    SirsEquilibrium::Endemic(EndemicEquilibrium {
        s_star,
        i_star,
        r_star,
    })
}

/// Central-difference partials of the Hamiltonian with respect to each
/// compartment (perturbed independently) and the control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianGradient {
    pub ds: f64,
    pub dv: f64,
    pub di: f64,
    pub dr: f64,
    pub du: f64,
}

pub fn fd_hamiltonian_grad(
    st: &EpidemicState,
    adj: &AdjointState,
    u: f64,
    p: &ModelParams,
    h: f64,
) -> HamiltonianGradient {
    let central = |plus: EpidemicState, minus: EpidemicState, up: f64, um: f64| {
        (hamiltonian(&plus, adj, up, p) - hamiltonian(&minus, adj, um, p)) / (2.0 * h)
    };
    let bump = |f: fn(&mut EpidemicState) -> &mut f64| {
        let (mut plus, mut minus) = (*st, *st);
        *f(&mut plus) += h;
        *f(&mut minus) -= h;
        central(plus, minus, u, u)
    };
    HamiltonianGradient {
        ds: bump(|s| &mut s.s),
        dv: bump(|s| &mut s.v),
        di: bump(|s| &mut s.i),
        dr: bump(|s| &mut s.r),
        du: central(*st, *st, u + h, u - h),
    }
}

/// Explicit Euler for the costate system from `t_end` down to `t0`, using
/// node values of state and control. Used as a cross-method check on
/// [`crate::integrate::rk4_backward`].
pub fn euler_backward<F>(
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
    let mut values = vec![terminal; n];
    for k in (1..n).rev() {
        let lam = values[k];
        let d = rhs(&states.states[k], &lam, control[k]);
        values[k - 1] = AdjointState::new(
            lam.lam_s - dt * d.lam_s,
            lam.lam_v - dt * d.lam_v,
            lam.lam_i - dt * d.lam_i,
            lam.lam_r - dt * d.lam_r,
        );
    }
    Ok(AdjointTrajectory { grid, values })
}

/// Objective of each constant control level on `grid`.
pub fn constant_control_objectives(
    p: &ModelParams,
    init: EpidemicState,
    grid: TimeGrid,
    levels: &[f64],
) -> Result<Vec<(f64, f64)>> {
    levels
        .iter()
        .map(|&u| Ok((u, evaluate_objective(p, init, grid, &vec![u; grid.n()])?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    /// Level index chosen for each interval.
    pub choice: Vec<usize>,
    /// Node-wise control realizing `choice`.
    pub control: Vec<f64>,
    pub j: f64,
    pub evaluations: u64,
}

/// Node-wise control that holds `levels[choice[q]]` on the `q`-th of
/// `choice.len()` equal intervals. A node on an interior boundary belongs to
/// the later interval.
pub fn piecewise_constant(grid: &TimeGrid, levels: &[f64], choice: &[usize]) -> Vec<f64> {
    let intervals = choice.len();
    let steps = grid.n() - 1;
    (0..grid.n())
        .map(|k| {
            let q = (k * intervals / steps).min(intervals - 1);
            levels[choice[q]]
        })
        .collect()
}

/// Exhaustive minimization of the objective over piecewise-constant controls.
/// Ties go to the lexicographically smallest choice of level indices.
pub fn brute_force_control(
    p: &ModelParams,
    init: EpidemicState,
    grid: TimeGrid,
    intervals: usize,
    levels: &[f64],
) -> Result<BruteForceResult> {
    if intervals == 0 || levels.is_empty() {
        return Err(Error::Config(
            "brute force needs at least one interval and one level".into(),
        ));
    }
    if intervals > grid.n() - 1 {
        return Err(Error::Config(format!(
            "{intervals} intervals exceed the {} grid steps",
            grid.n() - 1
        )));
    }
    let total = (levels.len() as u64)
        .checked_pow(intervals as u32)
        .filter(|&t| t <= BRUTE_FORCE_BUDGET)
        .ok_or_else(|| {
            Error::Config(format!(
                "{}^{intervals} candidates exceed the budget of {BRUTE_FORCE_BUDGET}",
                levels.len()
            ))
        })?;
    let decode = |mut idx: u64| {
        let base = levels.len() as u64;
        let mut choice = vec![0usize; intervals];
        for slot in choice.iter_mut().rev() {
            *slot = (idx % base) as usize;
            idx /= base;
        }
        choice
    };
    let (j, best) = (0..total)
        .into_par_iter()
        .map(|idx| {
            let control = piecewise_constant(&grid, levels, &decode(idx));
            evaluate_objective(p, init, grid, &control).map(|j| (j, idx))
        })
        .try_reduce(
            || (f64::INFINITY, u64::MAX),
            |a, b| {
                Ok(match a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)) {
                    std::cmp::Ordering::Greater => b,
                    _ => a,
                })
            },
        )?;
    let choice = decode(best);
    Ok(BruteForceResult {
        control: piecewise_constant(&grid, levels, &choice),
        choice,
        j,
        evaluations: total,
    })
}

/// Independent checks of a finished sweep, reported by `so-run --verify`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoDiagnostics {
    /// Largest `|λ' + ∂H/∂x|` over nodes and compartments, with `∂H/∂x` by
    /// central differences, relative to `max(1, |∂H/∂x|)`.
    pub adjoint_fd_error: f64,
    /// Largest projected-gradient violation of the pointwise minimum
    /// condition, relative to the largest `S (2 |q| c_v + |λ_S - λ_V|)` along
    /// the trajectory, the magnitude of the terms of `∂H/∂u`.
    pub stationarity_error: f64,
    /// Largest gap between the RK4 costates and an explicit-Euler pass,
    /// relative to `max(1, max |λ|)`.
    pub euler_adjoint_gap: f64,
    /// Best objective among constant controls `0, u_max/4, ..., u_max`.
    pub best_constant_j: f64,
    pub j: f64,
}

impl SoDiagnostics {
    pub fn beats_constant_controls(&self) -> bool {
        self.j <= self.best_constant_j * (1.0 + 1e-9)
    }
}

/// Nodes at which the pointwise checks are evaluated.
const VERIFY_SAMPLES: usize = 2000;

pub fn verify_so_run(p: &ModelParams, init: EpidemicState, run: &SoRun) -> Result<SoDiagnostics> {
    let grid = run.states.grid;
    let n = grid.n();
    let stride = (n / VERIFY_SAMPLES).max(1);
    let mut adjoint_fd_error = 0.0_f64;
    let mut violation = 0.0_f64;
    let mut scale = 0.0_f64;
    for k in (0..n).step_by(stride) {
        let (st, adj, u) = (&run.states.states[k], &run.adjoints.values[k], run.control[k]);
        let fd = fd_hamiltonian_grad(st, adj, u, p, DEFAULT_FD_STEP);
        let d = adjoint_rhs(st, adj, u, p);
        for (lam, grad) in [
            (d.lam_s, fd.ds),
            (d.lam_v, fd.dv),
            (d.lam_i, fd.di),
            (d.lam_r, fd.dr),
        ] {
            adjoint_fd_error = adjoint_fd_error.max((lam + grad).abs() / grad.abs().max(1.0));
        }
        if st.s <= S_FLOOR {
            continue;
        }
        let hu = hamiltonian_du(st, adj, u, p);
        let q = p.c * st.i + p.c_v * u * st.s;
        scale = scale.max(st.s * (2.0 * q.abs() * p.c_v + (adj.lam_s - adj.lam_v).abs()));
        violation = violation.max(if u <= 0.0 {
            (-hu).max(0.0)
        } else if u >= p.u_max {
            hu.max(0.0)
        } else {
            hu.abs()
        });
    }
    let stationarity_error = if scale > 0.0 { violation / scale } else { violation };
    let euler = euler_backward(
        |s, l, u| adjoint_rhs(s, l, u, p),
        AdjointState::ZERO,
        &run.states,
        &run.control,
    )?;
    let euler_adjoint_gap = euler
        .values
        .iter()
        .zip(&run.adjoints.values)
        .map(|(a, b)| {
            (a.lam_s - b.lam_s)
                .abs()
                .max((a.lam_v - b.lam_v).abs())
                .max((a.lam_i - b.lam_i).abs())
                .max((a.lam_r - b.lam_r).abs())
        })
        .fold(0.0, f64::max)
        / run.adjoints.values.iter().map(|a| a.max_norm()).fold(1.0, f64::max);
    let levels: Vec<f64> = (0..=4).map(|j| p.u_max * j as f64 / 4.0).collect();
    let best_constant_j = constant_control_objectives(p, init, grid, &levels)?
        .into_iter()
        .map(|(_, j)| j)
        .fold(f64::INFINITY, f64::min);
    Ok(SoDiagnostics {
        adjoint_fd_error,
        stationarity_error,
        euler_adjoint_gap,
        best_constant_j,
        j: run.objective_j,
    })
}
