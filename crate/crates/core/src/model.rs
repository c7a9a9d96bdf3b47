//! SIRS/V model: parameters, state types and the pure kernels shared by the
//! behavioral and optimal-control formulations.
//!
//! Both systems have the same compartment flows; they differ only in where
//! the vaccination rate comes from. In the behavioral model the rate `x` is
//! itself a state variable driven by imitation dynamics,
//!
//! ```text
//! dx/dt = m x (1 - x) (c I - k c_v)
//! ```
//!
//! while in the control model the rate `u(t)` is exogenous and chosen to
//! minimize `∫ (c I + c_v u S)^2 dt`.

use crate::error::{Error, Result};

/// Susceptible pool size below which the optimal-control formula is not
/// evaluated; the control has no effect on an empty pool and returns 0.
pub const S_FLOOR: f64 = 1e-9;

/// Allowed drift of `s + v + i + r` from 1 when constructing a state.
pub const SIMPLEX_TOL: f64 = 1e-6;

/// Allowed negative round-off in a single compartment when constructing a state.
pub const NEGATIVE_SLACK: f64 = 1e-9;

/// Names accepted by [`ModelParams::set`] and [`ModelParams::get`].
pub const PARAM_NAMES: [&str; 9] = [
    "beta", "gamma", "omega", "eta", "m", "c", "k", "c_v", "u_max",
];

/// Epidemiological and economic constants of the model.
///
/// Rates are per day, costs are in payoff units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Transmission rate.
    pub beta: f64,
    /// Recovery rate.
    pub gamma: f64,
    /// Waning-immunity rate (R -> S).
    pub omega: f64,
    /// Vaccine efficacy; vaccinated individuals are infected at `(1 - eta) * beta`.
    pub eta: f64,
    /// Imitation inertia.
    pub m: f64,
    /// Cost of infection.
    pub c: f64,
    /// Relative sensitivity to the vaccination cost.
    pub k: f64,
    /// Cost of vaccination.
    pub c_v: f64,
    /// Upper bound on the vaccination control.
    pub u_max: f64,
}

impl Default for ModelParams {
    /// Standard parameter set; vaccine efficacy sits at 0.7, the middle of
    /// the studied range.
    fn default() -> Self {
        ModelParams {
            beta: 0.833,
            gamma: 0.333,
            omega: 1.0 / 90.0,
            eta: 0.7,
            m: 1.0,
            c: 1.0,
            k: 0.1,
            c_v: 0.5,
            u_max: 0.1,
        }
    }
}

impl ModelParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        beta: f64,
        gamma: f64,
        omega: f64,
        eta: f64,
        m: f64,
        c: f64,
        k: f64,
        c_v: f64,
        u_max: f64,
    ) -> Result<Self> {
        let p = ModelParams {
            beta,
            gamma,
            omega,
            eta,
            m,
            c,
            k,
            c_v,
            u_max,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks every field against its domain; the error names the first
    /// offending field.
    pub fn validate(&self) -> Result<()> {
        fn check(name: &str, value: f64, ok: bool, domain: &str) -> Result<()> {
            if !value.is_finite() {
                return Err(Error::validation(name, format!("{value} is not finite")));
            }
            if !ok {
                return Err(Error::validation(
                    name,
                    format!("{value} violates {name} {domain}"),
                ));
            }
            Ok(())
        }
        check("beta", self.beta, self.beta >= 0.0, ">= 0")?;
        check("gamma", self.gamma, self.gamma > 0.0, "> 0")?;
        check("omega", self.omega, self.omega >= 0.0, ">= 0")?;
        check(
            "eta",
            self.eta,
            (0.0..=1.0).contains(&self.eta),
            "in [0, 1]",
        )?;
        check("m", self.m, self.m >= 0.0, ">= 0")?;
        check("c", self.c, self.c >= 0.0, ">= 0")?;
        check("k", self.k, self.k >= 0.0, ">= 0")?;
        check("c_v", self.c_v, self.c_v >= 0.0, ">= 0")?;
        check(
            "u_max",
            self.u_max,
            (0.0..=1.0).contains(&self.u_max),
            "in [0, 1]",
        )
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        Ok(match name {
            "beta" => self.beta,
            "gamma" => self.gamma,
            "omega" => self.omega,
            "eta" => self.eta,
            "m" => self.m,
            "c" => self.c,
            "k" => self.k,
            "c_v" => self.c_v,
            "u_max" => self.u_max,
            _ => return Err(unknown_param(name)),
        })
    }

    /// Sets a field by name without validating the result.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "beta" => &mut self.beta,
            "gamma" => &mut self.gamma,
            "omega" => &mut self.omega,
            "eta" => &mut self.eta,
            "m" => &mut self.m,
            "c" => &mut self.c,
            "k" => &mut self.k,
            "c_v" => &mut self.c_v,
            "u_max" => &mut self.u_max,
            _ => return Err(unknown_param(name)),
        };
        *slot = value;
        Ok(())
    }

    /// Returns a copy with one field replaced, validated.
    pub fn with(&self, name: &str, value: f64) -> Result<Self> {
        let mut p = *self;
        p.set(name, value)?;
        p.validate()?;
        Ok(p)
    }

    /// Basic reproduction number `beta / gamma`.
    pub fn r0(&self) -> f64 {
        self.beta / self.gamma
    }
}

fn unknown_param(name: &str) -> Error {
    Error::validation(
        name,
        format!("unknown parameter; expected one of {}", PARAM_NAMES.join(", ")),
    )
}

/// Population fractions at one instant, plus the vaccination rate in force
/// (`x` for the behavioral model, `u` for the control model).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpidemicState {
    pub s: f64,
    pub v: f64,
    pub i: f64,
    pub r: f64,
    pub rate: f64,
}

impl Default for EpidemicState {
    /// Standard initial condition: S=0.98, V=I=0.01, R=0, x=0.1.
    fn default() -> Self {
        EpidemicState {
            s: 0.98,
            v: 0.01,
            i: 0.01,
            r: 0.0,
            rate: 0.1,
        }
    }
}

impl EpidemicState {
    pub fn new(s: f64, v: f64, i: f64, r: f64, rate: f64) -> Result<Self> {
        let st = EpidemicState { s, v, i, r, rate };
        st.validate()?;
        Ok(st)
    }

    /// Simplex and behavior-rate checks (`rate` in `[0, 1]`).
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("s", self.s),
            ("v", self.v),
            ("i", self.i),
            ("r", self.r),
            ("rate", self.rate),
        ] {
            if !value.is_finite() {
                return Err(Error::validation(name, format!("{value} is not finite")));
            }
            if value < -NEGATIVE_SLACK {
                return Err(Error::validation(name, format!("{value} is negative")));
            }
        }
        let total = self.total();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::validation(
                "s+v+i+r",
                format!("compartments sum to {total}, expected 1"),
            ));
        }
        if self.rate > 1.0 {
            return Err(Error::validation(
                "rate",
                format!("{} exceeds 1", self.rate),
            ));
        }
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.s + self.v + self.i + self.r
    }

    pub fn with_rate(mut self, rate: f64) -> Self {
        self.rate = rate;
        self
    }

    /// `self + h * d` on compartments and rate.
    pub(crate) fn step(&self, d: &StateDerivative, h: f64) -> Self {
        EpidemicState {
            s: self.s + h * d.ds,
            v: self.v + h * d.dv,
            i: self.i + h * d.di,
            r: self.r + h * d.dr,
            rate: self.rate + h * d.dx,
        }
    }

    /// Componentwise midpoint of compartments and rate.
    pub(crate) fn midpoint(&self, other: &Self) -> Self {
        EpidemicState {
            s: 0.5 * (self.s + other.s),
            v: 0.5 * (self.v + other.v),
            i: 0.5 * (self.i + other.i),
            r: 0.5 * (self.r + other.r),
            rate: 0.5 * (self.rate + other.rate),
        }
    }
}

/// Time derivative of an [`EpidemicState`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateDerivative {
    pub ds: f64,
    pub dv: f64,
    pub di: f64,
    pub dr: f64,
    /// Rate of change of the behavior rate; always zero for the control model.
    pub dx: f64,
}

impl StateDerivative {
    pub fn max_norm(&self) -> f64 {
        [self.ds, self.dv, self.di, self.dr, self.dx]
            .iter()
            .fold(0.0_f64, |m, d| m.max(d.abs()))
    }

    /// `ds + dv + di + dr`; zero up to round-off.
    pub fn compartment_sum(&self) -> f64 {
        self.ds + self.dv + self.di + self.dr
    }

    /// RK4 combination `(k1 + 2 k2 + 2 k3 + k4) / 6`.
    pub(crate) fn rk4_blend(k1: &Self, k2: &Self, k3: &Self, k4: &Self) -> Self {
        let f = |a: f64, b: f64, c: f64, d: f64| (a + 2.0 * b + 2.0 * c + d) / 6.0;
        StateDerivative {
            ds: f(k1.ds, k2.ds, k3.ds, k4.ds),
            dv: f(k1.dv, k2.dv, k3.dv, k4.dv),
            di: f(k1.di, k2.di, k3.di, k4.di),
            dr: f(k1.dr, k2.dr, k3.dr, k4.dr),
            dx: f(k1.dx, k2.dx, k3.dx, k4.dx),
        }
    }
}

/// Costate values, one per state equation, named by the compartment they adjoin.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AdjointState {
    pub lam_s: f64,
    pub lam_v: f64,
    pub lam_i: f64,
    pub lam_r: f64,
}

impl AdjointState {
    pub const ZERO: AdjointState = AdjointState {
        lam_s: 0.0,
        lam_v: 0.0,
        lam_i: 0.0,
        lam_r: 0.0,
    };

    pub fn new(lam_s: f64, lam_v: f64, lam_i: f64, lam_r: f64) -> Self {
        AdjointState {
            lam_s,
            lam_v,
            lam_i,
            lam_r,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.lam_s.is_finite()
            && self.lam_v.is_finite()
            && self.lam_i.is_finite()
            && self.lam_r.is_finite()
    }

    pub fn max_norm(&self) -> f64 {
        self.lam_s
            .abs()
            .max(self.lam_v.abs())
            .max(self.lam_i.abs())
            .max(self.lam_r.abs())
    }

    pub(crate) fn step(&self, d: &AdjointState, h: f64) -> Self {
        AdjointState {
            lam_s: self.lam_s + h * d.lam_s,
            lam_v: self.lam_v + h * d.lam_v,
            lam_i: self.lam_i + h * d.lam_i,
            lam_r: self.lam_r + h * d.lam_r,
        }
    }

    pub(crate) fn rk4_blend(k1: &Self, k2: &Self, k3: &Self, k4: &Self) -> Self {
        let f = |a: f64, b: f64, c: f64, d: f64| (a + 2.0 * b + 2.0 * c + d) / 6.0;
        AdjointState {
            lam_s: f(k1.lam_s, k2.lam_s, k3.lam_s, k4.lam_s),
            lam_v: f(k1.lam_v, k2.lam_v, k3.lam_v, k4.lam_v),
            lam_i: f(k1.lam_i, k2.lam_i, k3.lam_i, k4.lam_i),
            lam_r: f(k1.lam_r, k2.lam_r, k3.lam_r, k4.lam_r),
        }
    }
}

/// Compartment flows at vaccination rate `rate`; `dx` is left at zero.
#[inline]
pub fn compartment_rhs(st: &EpidemicState, rate: f64, p: &ModelParams) -> StateDerivative {
    let infection_s = p.beta * st.s * st.i;
    let infection_v = (1.0 - p.eta) * p.beta * st.v * st.i;
    let vaccination = rate * st.s;
    let recovery = p.gamma * st.i;
    let waning = p.omega * st.r;
    StateDerivative {
        ds: -infection_s - vaccination + waning,
        dv: vaccination - infection_v,
        di: infection_s + infection_v - recovery,
        dr: recovery - waning,
        dx: 0.0,
    }
}

/// Behavioral model: compartment flows driven by `state.rate` (= x) plus the
/// imitation dynamics of x.
pub fn behavior_rhs(st: &EpidemicState, p: &ModelParams) -> StateDerivative {
    let x = st.rate;
    let mut d = compartment_rhs(st, x, p);
    d.dx = p.m * x * (1.0 - x) * (p.c * st.i - p.k * p.c_v);
    d
}

/// Control model flows at control value `u`; `state.rate` is ignored.
pub fn control_rhs(st: &EpidemicState, u: f64, p: &ModelParams) -> Result<StateDerivative> {
    check_control(u, p)?;
    Ok(compartment_rhs(st, u, p))
}

pub(crate) fn check_control(u: f64, p: &ModelParams) -> Result<()> {
    if !(0.0..=p.u_max).contains(&u) {
        return Err(Error::ControlBounds {
            value: u,
            u_max: p.u_max,
        });
    }
    Ok(())
}

/// Instantaneous social cost `(c I + c_v u S)^2`.
pub fn running_cost(st: &EpidemicState, u: f64, p: &ModelParams) -> f64 {
    let q = p.c * st.i + p.c_v * u * st.s;
    q * q
}

/// `H = (c I + c_v u S)^2 + λ_S S' + λ_V V' + λ_I I' + λ_R R'`.
pub fn hamiltonian(st: &EpidemicState, adj: &AdjointState, u: f64, p: &ModelParams) -> f64 {
    let d = compartment_rhs(st, u, p);
    running_cost(st, u, p)
        + adj.lam_s * d.ds
        + adj.lam_v * d.dv
        + adj.lam_i * d.di
        + adj.lam_r * d.dr
}

/// Costate dynamics `λ' = -∂H/∂(S, V, I, R)`.
pub fn adjoint_rhs(st: &EpidemicState, adj: &AdjointState, u: f64, p: &ModelParams) -> AdjointState {
    let q = p.c * st.i + p.c_v * u * st.s;
    let leak = (1.0 - p.eta) * p.beta;
    let AdjointState {
        lam_s,
        lam_v,
        lam_i,
        lam_r,
    } = *adj;
    AdjointState {
        lam_s: -2.0 * q * p.c_v * u + lam_s * (p.beta * st.i + u) - lam_v * u - lam_i * p.beta * st.i,
        lam_v: (lam_v - lam_i) * leak * st.i,
        lam_i: -2.0 * q * p.c + lam_s * p.beta * st.s + lam_v * leak * st.v
            - lam_i * (p.beta * st.s + leak * st.v - p.gamma)
            - lam_r * p.gamma,
        lam_r: (lam_r - lam_s) * p.omega,
    }
}

/// Analytic `∂H/∂u = 2 (c I + c_v u S) c_v S - (λ_S - λ_V) S`.
pub fn hamiltonian_du(st: &EpidemicState, adj: &AdjointState, u: f64, p: &ModelParams) -> f64 {
    let q = p.c * st.i + p.c_v * u * st.s;
    2.0 * q * p.c_v * st.s - (adj.lam_s - adj.lam_v) * st.s
}

/// Unconstrained minimizer of the Hamiltonian in `u`, or `None` when the
/// susceptible pool is below [`S_FLOOR`]. Requires `c_v > 0`.
pub fn stationary_control(st: &EpidemicState, adj: &AdjointState, p: &ModelParams) -> Option<f64> {
    if st.s <= S_FLOOR {
        return None;
    }
    Some(((adj.lam_s - adj.lam_v) / (2.0 * p.c_v) - p.c * st.i) / (p.c_v * st.s))
}

/// Pointwise minimizer of the Hamiltonian over `[0, u_max]`.
pub fn optimal_control_candidate(
    st: &EpidemicState,
    adj: &AdjointState,
    p: &ModelParams,
) -> Result<f64> {
    if p.c_v <= 0.0 {
        return Err(Error::Config(
            "optimal control is undefined for c_v = 0 (the Hamiltonian is linear in u)".into(),
        ));
    }
    Ok(match stationary_control(st, adj, p) {
        Some(u) => u.clamp(0.0, p.u_max),
        None => 0.0,
    })
}
