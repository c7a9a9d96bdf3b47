//! Simulation settings and the flat `key = value` config format.
//!
//! ```text
//! # comments start with '#'
//! omega = 1/30
//! eta = 0.9
//! fbs.relaxation = 0.5
//! ```
//!
//! Values are layered defaults ← file ← command-line overrides. Unknown keys
//! are rejected. [`SimConfig::to_config_string`] writes a file that loads
//! back to the identical configuration.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::integrate::TimeGrid;
use crate::model::{EpidemicState, ModelParams, PARAM_NAMES};
use crate::ne::DEFAULT_EQ_TOL;
use crate::so::{ControlInit, FbsConfig};

pub const DEFAULT_DT: f64 = 0.1;
pub const DEFAULT_T_END: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: ModelParams,
    pub init: EpidemicState,
    pub dt: f64,
    pub t_end: f64,
    pub eq_tol: f64,
    pub fbs_relaxation: f64,
    pub fbs_conv_tol: f64,
    pub fbs_max_iters: usize,
    /// Constant initial control for the sweep.
    pub fbs_u_init: f64,
    pub out_dir: PathBuf,
    /// Sweep worker threads; 0 means one per core.
    pub workers: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            params: ModelParams::default(),
            init: EpidemicState::default(),
            dt: DEFAULT_DT,
            t_end: DEFAULT_T_END,
            eq_tol: DEFAULT_EQ_TOL,
            fbs_relaxation: FbsConfig::DEFAULT_RELAXATION,
            fbs_conv_tol: FbsConfig::DEFAULT_CONV_TOL,
            fbs_max_iters: FbsConfig::DEFAULT_MAX_ITERS,
            fbs_u_init: 0.0,
            out_dir: PathBuf::from("out"),
            workers: 0,
        }
    }
}

const OTHER_KEYS: [&str; 14] = [
    "init.s",
    "init.v",
    "init.i",
    "init.r",
    "init.x",
    "dt",
    "t_end",
    "eq_tol",
    "fbs.relaxation",
    "fbs.conv_tol",
    "fbs.max_iters",
    "fbs.u_init",
    "out",
    "workers",
];

/// Parses a decimal number or a simple fraction `a/b`.
pub fn parse_number(text: &str) -> Option<f64> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: f64 = num.trim().parse().ok()?;
        let den: f64 = den.trim().parse().ok()?;
        return Some(num / den);
    }
    text.parse().ok()
}

impl SimConfig {
    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(0.0, self.t_end, self.dt)
    }

    pub fn fbs(&self) -> Result<FbsConfig> {
        let cfg = FbsConfig {
            grid: self.grid()?,
            relaxation: self.fbs_relaxation,
            conv_tol: self.fbs_conv_tol,
            max_iters: self.fbs_max_iters,
            u_init: ControlInit::Constant(self.fbs_u_init),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.init.validate()?;
        self.grid()?;
        self.fbs()?;
        if self.eq_tol.is_nan() || self.eq_tol <= 0.0 {
            return Err(Error::validation("eq_tol", "must be positive"));
        }
        if !(0.0..=self.params.u_max).contains(&self.fbs_u_init) {
            return Err(Error::validation(
                "fbs.u_init",
                format!("{} outside [0, u_max]", self.fbs_u_init),
            ));
        }
        Ok(())
    }

    /// Sets one key from its textual value. Does not validate cross-field
    /// invariants; call [`SimConfig::validate`] afterwards.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let number = || parse_number(value).ok_or_else(|| format!("`{value}` is not a number"));
        let count = || {
            value
                .trim()
                .parse::<usize>()
                .map_err(|_| format!("`{value}` is not a non-negative integer"))
        };
        match key {
            k if PARAM_NAMES.contains(&k) => {
                self.params.set(k, number()?).map_err(|e| e.to_string())?
            }
            "init.s" => self.init.s = number()?,
            "init.v" => self.init.v = number()?,
            "init.i" => self.init.i = number()?,
            "init.r" => self.init.r = number()?,
            "init.x" => self.init.rate = number()?,
            "dt" => self.dt = number()?,
            "t_end" => self.t_end = number()?,
            "eq_tol" => self.eq_tol = number()?,
            "fbs.relaxation" => self.fbs_relaxation = number()?,
            "fbs.conv_tol" => self.fbs_conv_tol = number()?,
            "fbs.max_iters" => self.fbs_max_iters = count()?,
            "fbs.u_init" => self.fbs_u_init = number()?,
            "out" => self.out_dir = PathBuf::from(value.trim()),
            "workers" => self.workers = count()?,
            _ => {
                return Err(format!(
                    "unknown key `{key}`; known keys: {}, {}",
                    PARAM_NAMES.join(", "),
                    OTHER_KEYS.join(", ")
                ))
            }
        }
        Ok(())
    }

    /// Applies `key = value` lines; `origin` names the source in diagnostics.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: origin.to_string(),
                line: idx + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected `key = value`, got `{line}`")))?;
            self.set(key.trim(), value.trim()).map_err(parse_err)?;
        }
        Ok(())
    }

    /// Loadable text form of every setting, with round-trip exact numbers.
    pub fn to_config_string(&self) -> String {
        let p = &self.params;
        let mut out = String::from("# effective configuration\n");
        let mut num = |k: &str, v: f64| out.push_str(&format!("{k} = {v:?}\n"));
        for name in PARAM_NAMES {
            num(name, p.get(name).expect("known parameter"));
        }
        num("init.s", self.init.s);
        num("init.v", self.init.v);
        num("init.i", self.init.i);
        num("init.r", self.init.r);
        num("init.x", self.init.rate);
        num("dt", self.dt);
        num("t_end", self.t_end);
        num("eq_tol", self.eq_tol);
        num("fbs.relaxation", self.fbs_relaxation);
        num("fbs.conv_tol", self.fbs_conv_tol);
        num("fbs.u_init", self.fbs_u_init);
        out.push_str(&format!("fbs.max_iters = {}\n", self.fbs_max_iters));
        out.push_str(&format!("out = {}\n", self.out_dir.display()));
        out.push_str(&format!("workers = {}\n", self.workers));
        out
    }
}

/// Splits a `key=value` override.
pub fn parse_override(text: &str) -> Result<(String, String)> {
    text.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| Error::Parse {
            path: "--set".into(),
            line: 0,
            message: format!("expected key=value, got `{text}`"),
        })
}

/// Defaults, then the file (if any), then overrides; validated.
pub fn load_config(path: Option<&Path>, overrides: &[(String, String)]) -> Result<SimConfig> {
    let mut cfg = SimConfig::default();
    if let Some(path) = path {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        cfg.apply_text(&text, &path.display().to_string())?;
    }
    for (key, value) in overrides {
        cfg.set(key, value).map_err(|message| Error::Parse {
            path: "--set".into(),
            line: 0,
            message,
        })?;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let mut cfg = SimConfig::default();
        cfg.apply_text("# nothing\n\n", "mem").unwrap();
        assert_eq!(cfg, SimConfig::default());
        assert_eq!(cfg.params.eta, 0.7);
        assert_eq!(cfg.init.s, 0.98);
        assert_eq!(cfg.grid().unwrap().n(), 10_001);
    }

    #[test]
    fn fractions_and_comments() {
        let mut cfg = SimConfig::default();
        cfg.apply_text("omega = 1/30  # fast waning\nfbs.max_iters=10\n", "mem")
            .unwrap();
        assert_eq!(cfg.params.omega, 1.0 / 30.0);
        assert_eq!(cfg.fbs_max_iters, 10);
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let mut cfg = SimConfig::default();
        let err = cfg.apply_text("beta = 0.5\nbogus = 1\n", "f.cfg").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = cfg.apply_text("beta = abc\n", "f.cfg").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = cfg.apply_text("just words\n", "f.cfg").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn echo_round_trips() {
        let mut cfg = SimConfig::default();
        cfg.apply_text("omega = 1/60\nc_v = 0.3\nworkers = 3\n", "mem").unwrap();
        let mut back = SimConfig::default();
        back.apply_text(&cfg.to_config_string(), "echo").unwrap();
        assert_eq!(back, cfg);
    }
}
