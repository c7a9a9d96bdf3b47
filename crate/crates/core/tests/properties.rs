use proptest::prelude::*;

use vaxgame::config::SimConfig;
use vaxgame::export::{parse_trajectory_csv, trajectory_csv};
use vaxgame::integrate::{euler_forward, rk4_forward};
use vaxgame::metrics::sed;
use vaxgame::model::{
    adjoint_rhs, behavior_rhs, compartment_rhs, hamiltonian, optimal_control_candidate,
};
use vaxgame::oracle::{fd_hamiltonian_grad, DEFAULT_FD_STEP};
use vaxgame::{AdjointState, EpidemicState, ModelParams, TimeGrid};

fn params() -> impl Strategy<Value = ModelParams> {
    (
        (0.1..1.5f64, 0.05..0.5f64, 0.0..0.05f64, 0.0..=1.0f64, 0.1..2.0f64),
        (0.1..2.0f64, 0.0..0.5f64, 0.05..1.0f64, 0.0..0.2f64),
    )
        .prop_map(|((beta, gamma, omega, eta, m), (c, k, c_v, u_max))| {
            ModelParams::new(beta, gamma, omega, eta, m, c, k, c_v, u_max).unwrap()
        })
}

fn state() -> impl Strategy<Value = EpidemicState> {
    (0.05..1.0f64, 0.0..0.5f64, 0.001..0.2f64, 0.0..0.5f64, 0.0..=1.0f64).prop_map(
        |(s, v, i, r, rate)| {
            let total = s + v + i + r;
            let (s, v, i) = (s / total, v / total, i / total);
            EpidemicState {
                s,
                v,
                i,
                r: 1.0 - s - v - i,
                rate,
            }
        },
    )
}

fn costates() -> impl Strategy<Value = AdjointState> {
    (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64)
        .prop_map(|(a, b, c, d)| AdjointState::new(a, b, c, d))
}

proptest! {
    #[test]
    fn flows_conserve_population(p in params(), st in state(), u in 0.0..0.2f64) {
        prop_assert!(compartment_rhs(&st, u, &p).compartment_sum().abs() < 1e-15);
        prop_assert!(behavior_rhs(&st, &p).compartment_sum().abs() < 1e-15);
    }

    #[test]
    fn trajectories_stay_on_simplex(p in params(), st in state(), level in 0.0..=1.0f64) {
        let grid = TimeGrid::new(0.0, 100.0, 0.1).unwrap();
        let ne = euler_forward(|s| behavior_rhs(s, &p), st, grid).unwrap();
        prop_assert!(ne.max_simplex_drift() <= 1e-9);
        prop_assert!(ne.states.iter().all(|s| (0.0..=1.0).contains(&s.rate)));
        let u = vec![level * p.u_max; grid.n()];
        let so = rk4_forward(|s, u| compartment_rhs(s, u, &p), st, grid, &u).unwrap();
        prop_assert!(so.max_simplex_drift() <= 1e-9);
        prop_assert!(so.states.iter().zip(&u).all(|(s, &u)| s.rate == u));
    }

    #[test]
    fn adjoint_matches_finite_differences(
        p in params(), st in state(), adj in costates(), level in 0.0..=1.0f64,
    ) {
        let u = level * p.u_max;
        let fd = fd_hamiltonian_grad(&st, &adj, u, &p, DEFAULT_FD_STEP);
        let d = adjoint_rhs(&st, &adj, u, &p);
        for (lam, grad) in [(d.lam_s, fd.ds), (d.lam_v, fd.dv), (d.lam_i, fd.di), (d.lam_r, fd.dr)] {
            prop_assert!((lam + grad).abs() / grad.abs().max(1.0) < 1e-4, "{lam} vs {}", -grad);
        }
    }

    #[test]
    fn hamiltonian_is_a_parabola_in_u(
        p in params(), st in state(), adj in costates(),
        a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64,
    ) {
        prop_assume!((a - b).abs() > 0.05 && (b - c).abs() > 0.05 && (a - c).abs() > 0.05);
        let h = |u: f64| hamiltonian(&st, &adj, u, &p);
        let second = ((h(c) - h(b)) / (c - b) - (h(b) - h(a)) / (b - a)) / (c - a);
        let expected = (p.c_v * st.s).powi(2);
        prop_assert!(second > 0.0);
        prop_assert!((second - expected).abs() <= 1e-6 * expected.max(1e-3), "{second} vs {expected}");
    }

    #[test]
    fn candidate_minimizes_hamiltonian_on_box(
        p in params(), st in state(), adj in costates(), level in 0.0..=1.0f64,
    ) {
        let best = optimal_control_candidate(&st, &adj, &p).unwrap();
        prop_assert!((0.0..=p.u_max).contains(&best));
        let other = level * p.u_max;
        prop_assert!(hamiltonian(&st, &adj, best, &p) <= hamiltonian(&st, &adj, other, &p) + 1e-12);
    }

    #[test]
    fn pure_strategies_are_absorbing(p in params(), st in state(), full in any::<bool>()) {
        let st = st.with_rate(if full { 1.0 } else { 0.0 });
        let grid = TimeGrid::new(0.0, 50.0, 0.1).unwrap();
        let traj = euler_forward(|s| behavior_rhs(s, &p), st, grid).unwrap();
        prop_assert!(traj.states.iter().all(|s| s.rate == st.rate));
    }

    #[test]
    fn deficit_is_antisymmetric(a in -20.0..0.0f64, b in -20.0..0.0f64) {
        prop_assert_eq!(sed(a, b), -sed(b, a));
        prop_assert_eq!(sed(a, a), 0.0);
    }

    #[test]
    fn trajectory_csv_round_trips(p in params(), st in state()) {
        let grid = TimeGrid::new(0.0, 5.0, 0.1).unwrap();
        let traj = euler_forward(|s| behavior_rhs(s, &p), st, grid).unwrap();
        let rows = parse_trajectory_csv(&trajectory_csv(&traj)).unwrap();
        prop_assert_eq!(rows.len(), traj.states.len());
        for (k, (row, s)) in rows.iter().zip(&traj.states).enumerate() {
            prop_assert_eq!(*row, [grid.time(k), s.s, s.v, s.i, s.r, s.rate]);
        }
    }

    #[test]
    fn config_echo_round_trips(p in params(), workers in 0usize..16) {
        let cfg = SimConfig { params: p, workers, ..Default::default() };
        let mut back = SimConfig::default();
        back.apply_text(&cfg.to_config_string(), "echo").unwrap();
        prop_assert_eq!(back, cfg);
    }
}
