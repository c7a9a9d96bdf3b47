//! Vaccination game on an SIRS/V epidemic model.
//!
//! Two views of the same epidemic are computed and compared:
//!
//! * the behavioral (Nash equilibrium) outcome, where the vaccination rate
//!   follows imitation dynamics driven by the payoff gap between infection
//!   and vaccination costs ([`ne`]);
//! * the social optimum, where a planner chooses the vaccination rate to
//!   minimize the squared accumulated social cost, solved with Pontryagin's
//!   maximum principle and a forward-backward sweep ([`so`]).
//!
//! The gap between their average social payoffs is the social efficiency
//! deficit ([`metrics`]). [`sweep`] evaluates the comparison over 2-D
//! parameter grids, and [`config`]/[`export`] back the `vaxgame` CLI.

pub mod cli;
pub mod config;
pub mod error;
pub mod export;
pub mod integrate;
pub mod metrics;
pub mod model;
pub mod ne;
pub mod oracle;
pub mod so;
pub mod sweep;

pub use error::{Error, Result};
pub use integrate::{AdjointTrajectory, TimeGrid, Trajectory};
pub use metrics::{Comparison, OutcomeMetrics};
pub use model::{AdjointState, EpidemicState, ModelParams, StateDerivative};
pub use ne::NeRun;
pub use so::{ControlInit, FbsConfig, SoRun};

pub use sweep::{AxisSpec, CellStatus, SweepCell, SweepResult};
