use vaxgame::metrics::compare;
use vaxgame::ne::{detect_equilibrium, run_ne, DEFAULT_EQ_TOL};
use vaxgame::oracle::{
    brute_force_control, constant_control_objectives, sirs_equilibrium, verify_so_run,
};
use vaxgame::so::{evaluate_objective, solve_fbs};
use vaxgame::{EpidemicState, FbsConfig, ModelParams, TimeGrid};

#[test]
fn unvaccinated_dynamics_settle_on_sirs_equilibrium() {
    let p = ModelParams {
        u_max: 0.0,
        ..Default::default()
    };
    let init = EpidemicState::new(0.99, 0.0, 0.01, 0.0, 0.0).unwrap();
    let grid = TimeGrid::new(0.0, 5000.0, 0.1).unwrap();
    let eq = sirs_equilibrium(&p).point();
    let ne = run_ne(&p, init, grid, DEFAULT_EQ_TOL).unwrap();
    let so = solve_fbs(&p, init, &FbsConfig::new(grid)).unwrap();
    for end in [ne.final_state, *so.states.last()] {
        assert!((end.s - eq.s_star).abs() < 1e-3, "{end:?}");
        assert!((end.i - eq.i_star).abs() < 1e-3, "{end:?}");
        assert!((end.r - eq.r_star).abs() < 1e-3, "{end:?}");
        assert_eq!(end.v, 0.0);
    }
}

#[test]
fn fbs_beats_brute_force_on_tiny_instance() {
    let p = ModelParams::default();
    let init = EpidemicState::default();
    let grid = TimeGrid::new(0.0, 10.0, 0.5).unwrap();
    let levels = [0.0, 0.025, 0.05, 0.075, 0.1];
    let brute = brute_force_control(&p, init, grid, 4, &levels).unwrap();
    assert_eq!(brute.evaluations, 625);
    let fbs = solve_fbs(&p, init, &FbsConfig::new(grid)).unwrap();
    assert!(fbs.converged);
    assert!(fbs.objective_j <= 1.01 * brute.j, "{} vs {}", fbs.objective_j, brute.j);
}

#[test]
fn fbs_is_a_local_minimum_under_perturbation() {
    let p = ModelParams::default();
    let init = EpidemicState::default();
    let grid = TimeGrid::new(0.0, 100.0, 0.1).unwrap();
    let run = solve_fbs(&p, init, &FbsConfig::new(grid)).unwrap();
    assert!(run.converged);
    let j = evaluate_objective(&p, init, grid, &run.control).unwrap();
    assert_eq!(j, run.objective_j);
    for (center, width) in [(5.0, 5.0), (30.0, 10.0), (60.0, 20.0), (90.0, 5.0)] {
        for eps in [0.01, -0.01] {
            let bumped: Vec<f64> = run
                .control
                .iter()
                .enumerate()
                .map(|(k, &u)| {
                    let t = grid.time(k);
                    let w = (-((t - center) / width).powi(2)).exp();
                    (u + eps * w).clamp(0.0, p.u_max)
                })
                .collect();
            let jb = evaluate_objective(&p, init, grid, &bumped).unwrap();
            assert!(jb >= j - 1e-9, "bump at {center} by {eps}: {jb} < {j}");
        }
    }
}

#[test]
fn fbs_beats_constant_controls() {
    let p = ModelParams::default();
    let init = EpidemicState::default();
    let grid = TimeGrid::new(0.0, 200.0, 0.1).unwrap();
    let run = solve_fbs(&p, init, &FbsConfig::new(grid)).unwrap();
    let constants =
        constant_control_objectives(&p, init, grid, &[0.0, 0.025, 0.05, 0.075, 0.1]).unwrap();
    for (u, j) in constants {
        assert!(run.objective_j <= j, "u = {u}: {} > {j}", run.objective_j);
    }
    let diag = verify_so_run(&p, init, &run).unwrap();
    assert!(diag.adjoint_fd_error < 1e-4);
    assert!(diag.stationarity_error < 1e-3);
    assert!(diag.beats_constant_controls());
}

#[test]
fn subcritical_behavioral_run_reaches_equilibrium() {
    let p = ModelParams {
        beta: 0.2,
        ..Default::default()
    };
    let grid = TimeGrid::new(0.0, 1000.0, 0.1).unwrap();
    let run = run_ne(&p, EpidemicState::default(), grid, DEFAULT_EQ_TOL).unwrap();
    assert!(run.converged);
    let t = run.equilibrium_time.unwrap();
    assert!(t > 0.0 && t < 1000.0);
    assert_eq!(detect_equilibrium(&run.trajectory, &p, DEFAULT_EQ_TOL), Some(t));
    let k = run.equilibrium_node.unwrap();
    assert!(run.trajectory.states[k..].iter().all(|s| *s == run.final_state));
}

#[test]
fn free_vaccination_limit_agrees() {
    let p = ModelParams {
        u_max: 0.0,
        ..Default::default()
    };
    let init = EpidemicState::default().with_rate(0.0);
    let grid = TimeGrid::new(0.0, 1000.0, 0.1).unwrap();
    let cmp = compare(&p, init, grid, DEFAULT_EQ_TOL, &FbsConfig::new(grid)).unwrap();
    assert_eq!(cmp.ne.vt, 0.0);
    assert_eq!(cmp.so.vt, 0.0);
    assert!(cmp.sed.abs() < 5e-3 * cmp.ne.asp.abs(), "sed {}", cmp.sed);
}
