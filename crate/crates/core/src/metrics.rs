//! Outcome quantities: cumulative infections and vaccinations, average
//! social payoff (ASP) and the social efficiency deficit (SED).
//!
//! The improper integrals over `[0, ∞)` are truncated to a common finite
//! horizon for both models so that their ASPs are comparable.

use crate::error::Result;
use crate::integrate::{trapezoid_prefix, TimeGrid, Trajectory};
use crate::model::{EpidemicState, ModelParams};
use crate::ne::{run_ne, NeRun};
use crate::so::{solve_fbs, FbsConfig, SoRun};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeMetrics {
    /// Cumulative infections (population fraction; may exceed 1 with reinfection).
    pub it: f64,
    /// Cumulative vaccinations.
    pub vt: f64,
    /// Average social payoff `-it c - vt c_v`.
    pub asp: f64,
    /// Control objective; only for social-optimum runs.
    pub j: Option<f64>,
    pub horizon_used: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub ne: OutcomeMetrics,
    pub so: OutcomeMetrics,
    /// `so.asp - ne.asp`.
    pub sed: f64,
    pub ne_converged: bool,
    pub so_converged: bool,
}

/// Both runs behind a [`Comparison`].
#[derive(Debug, Clone)]
pub struct ComparisonRuns {
    pub ne: NeRun,
    pub so: SoRun,
    pub comparison: Comparison,
}

pub fn r0(p: &ModelParams) -> f64 {
    p.r0()
}

fn incidence(st: &EpidemicState, p: &ModelParams) -> f64 {
    p.beta * st.s * st.i + (1.0 - p.eta) * p.beta * st.v * st.i
}

/// `∫ (β S I + (1 - η) β V I) dt` over `[t0, upto]`; `upto` must be a grid node.
pub fn cumulative_infections(traj: &Trajectory, p: &ModelParams, upto: f64) -> Result<f64> {
    let k = traj.grid.node_at(upto)?;
    let f: Vec<f64> = traj.states[..=k].iter().map(|s| incidence(s, p)).collect();
    Ok(trapezoid_prefix(&f, traj.grid.dt(), k + 1))
}

/// `∫ rate S dt` over `[t0, upto]`.
pub fn cumulative_vaccinations(traj: &Trajectory, upto: f64) -> Result<f64> {
    let k = traj.grid.node_at(upto)?;
    let f: Vec<f64> = traj.states[..=k].iter().map(|s| s.rate * s.s).collect();
    Ok(trapezoid_prefix(&f, traj.grid.dt(), k + 1))
}

pub fn asp(it: f64, vt: f64, p: &ModelParams) -> f64 {
    -it * p.c - vt * p.c_v
}

pub fn sed(asp_so: f64, asp_ne: f64) -> f64 {
    asp_so - asp_ne
}

/// IT, VT and ASP of a trajectory over `[t0, upto]`.
pub fn outcome(traj: &Trajectory, p: &ModelParams, upto: f64, j: Option<f64>) -> Result<OutcomeMetrics> {
    let it = cumulative_infections(traj, p, upto)?;
    let vt = cumulative_vaccinations(traj, upto)?;
    Ok(OutcomeMetrics {
        it,
        vt,
        asp: asp(it, vt, p),
        j,
        horizon_used: upto - traj.grid.t0(),
    })
}

/// Runs both models on `horizon` and compares them over its full span.
pub fn compare_runs(
    p: &ModelParams,
    init: EpidemicState,
    horizon: TimeGrid,
    eq_tol: f64,
    fbs: &FbsConfig,
) -> Result<ComparisonRuns> {
    let fbs = FbsConfig {
        grid: horizon,
        ..fbs.clone()
    };
    let ne = run_ne(p, init, horizon, eq_tol)?;
    let so = solve_fbs(p, init, &fbs)?;
    let t_end = horizon.t_end();
    let ne_m = outcome(&ne.trajectory, p, t_end, None)?;
    let so_m = outcome(&so.states, p, t_end, Some(so.objective_j))?;
    let comparison = Comparison {
        ne: ne_m,
        so: so_m,
        sed: sed(so_m.asp, ne_m.asp),
        ne_converged: ne.converged,
        so_converged: so.converged,
    };
    Ok(ComparisonRuns { ne, so, comparison })
}

pub fn compare(
    p: &ModelParams,
    init: EpidemicState,
    horizon: TimeGrid,
    eq_tol: f64,
    fbs: &FbsConfig,
) -> Result<Comparison> {
    compare_runs(p, init, horizon, eq_tol, fbs).map(|r| r.comparison)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ne::DEFAULT_EQ_TOL;

    fn constant(grid: TimeGrid, st: EpidemicState) -> Trajectory {
        Trajectory::new(grid, vec![st; grid.n()]).unwrap()
    }

    #[test]
    fn r0_values() {
        assert!((r0(&ModelParams::default()) - 2.5015015).abs() < 1e-6);
        let p = ModelParams {
            beta: 0.4,
            gamma: 0.4,
            ..Default::default()
        };
        assert_eq!(r0(&p), 1.0);
        let p = ModelParams {
            beta: 0.0,
            ..Default::default()
        };
        assert_eq!(r0(&p), 0.0);
    }

    #[test]
    fn infections_on_constant_trajectory() {
        let g = TimeGrid::new(0.0, 10.0, 0.1).unwrap();
        let p = ModelParams {
            eta: 0.5,
            ..Default::default()
        };
        let st = EpidemicState::new(0.5, 0.2, 0.1, 0.2, 0.0).unwrap();
        let it = cumulative_infections(&constant(g, st), &p, 10.0).unwrap();
        assert!((it - 0.4998).abs() < 1e-12);

        let free = EpidemicState::new(0.9, 0.1, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(cumulative_infections(&constant(g, free), &p, 10.0).unwrap(), 0.0);

        let p1 = ModelParams { eta: 1.0, ..p };
        let all_v = EpidemicState::new(0.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(cumulative_infections(&constant(g, all_v), &p1, 10.0).unwrap(), 0.0);
    }

    #[test]
    fn vaccinations_on_constant_trajectory() {
        let g = TimeGrid::new(0.0, 10.0, 0.1).unwrap();
        let st = EpidemicState::new(0.5, 0.2, 0.1, 0.2, 0.1).unwrap();
        let vt = cumulative_vaccinations(&constant(g, st), 10.0).unwrap();
        assert!((vt - 0.5).abs() < 1e-12);
        assert_eq!(
            cumulative_vaccinations(&constant(g, st.with_rate(0.0)), 10.0).unwrap(),
            0.0
        );
        assert!(cumulative_vaccinations(&constant(g, st), 11.0).is_err());
        assert!((cumulative_vaccinations(&constant(g, st), 4.0).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn asp_and_sed_arithmetic() {
        let p = ModelParams::default();
        assert_eq!(asp(0.0, 0.0, &p), 0.0);
        assert_eq!(asp(1.0, 0.0, &p), -1.0);
        assert!((asp(0.5, 0.3, &p) + 0.65).abs() < 1e-15);
        assert_eq!(sed(-2.0, -2.0), 0.0);
        assert_eq!(sed(-5.0, -8.0), 3.0);
        assert_eq!(sed(-8.0, -5.0), -sed(-5.0, -8.0));
    }

    #[test]
    fn identical_models_have_no_deficit() {
        let p = ModelParams {
            u_max: 0.0,
            ..Default::default()
        };
        let init = EpidemicState::default().with_rate(0.0);
        let g = TimeGrid::new(0.0, 300.0, 0.1).unwrap();
        let cmp = compare(&p, init, g, DEFAULT_EQ_TOL, &FbsConfig::new(g)).unwrap();
        assert_eq!(cmp.ne.vt, 0.0);
        assert_eq!(cmp.so.vt, 0.0);
        // Euler and RK4 discretizations of the same system.
        assert!(cmp.sed.abs() < 5e-3 * cmp.ne.asp.abs(), "sed = {}", cmp.sed);
        assert!((cmp.ne.it - cmp.so.it).abs() < 5e-3 * cmp.ne.it);
    }

    #[test]
    fn free_disease_cost_gives_zero_deficit() {
        let p = ModelParams {
            c: 0.0,
            ..Default::default()
        };
        let init = EpidemicState::default().with_rate(0.0);
        let g = TimeGrid::new(0.0, 100.0, 0.1).unwrap();
        let cmp = compare(&p, init, g, DEFAULT_EQ_TOL, &FbsConfig::new(g)).unwrap();
        assert_eq!(cmp.so.vt, 0.0);
        assert_eq!(cmp.ne.vt, 0.0);
        assert_eq!(cmp.sed, 0.0);
    }
}
