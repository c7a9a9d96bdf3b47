//! Two-parameter sweeps of the NE/SO comparison.
//!
//! Cells are independent and evaluated on a rayon pool; results are stored
//! in row-major order (axis 1 outer), so the output does not depend on the
//! worker count.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrate::TimeGrid;
use crate::metrics::{compare, Comparison};
use crate::model::{EpidemicState, ModelParams, PARAM_NAMES};
use crate::so::FbsConfig;

/// Tolerance for the coupled-axis comparison `value <= other`.
const COUPLING_SLACK: f64 = 1e-12;

/// One sweep axis: `steps` evenly spaced values of `parameter` on `[lo, hi]`,
/// endpoints included.
///
/// With `coupled_hi` set, cells whose value exceeds the current value of the
/// named (other) parameter are skipped, giving triangular domains such as
/// `c_v <= c`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisSpec {
    pub parameter: String,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    pub coupled_hi: Option<String>,
}

impl AxisSpec {
    pub fn new(parameter: &str, lo: f64, hi: f64, steps: usize) -> Result<Self> {
        let axis = AxisSpec {
            parameter: parameter.to_string(),
            lo,
            hi,
            steps,
            coupled_hi: None,
        };
        axis.validate()?;
        Ok(axis)
    }

    pub fn coupled_to(mut self, other: &str) -> Self {
        self.coupled_hi = Some(other.to_string());
        self
    }

    pub fn validate(&self) -> Result<()> {
        let field = format!("axis {}", self.parameter);
        if !PARAM_NAMES.contains(&self.parameter.as_str()) {
            return Err(Error::validation(&field, "not a model parameter"));
        }
        if let Some(other) = &self.coupled_hi {
            if !PARAM_NAMES.contains(&other.as_str()) {
                return Err(Error::validation(
                    &field,
                    format!("coupled parameter `{other}` is not a model parameter"),
                ));
            }
        }
        if self.steps < 2 {
            return Err(Error::validation(&field, "needs at least 2 steps"));
        }
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(Error::validation(&field, "bounds must be finite"));
        }
        if self.lo > self.hi {
            return Err(Error::validation(
                &field,
                format!("lo = {} must not exceed hi = {}", self.lo, self.hi),
            ));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|j| {
                if j + 1 == self.steps {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * j as f64 / last
                }
            })
            .collect()
    }
}

impl FromStr for AxisSpec {
    type Err = Error;

    /// `name:lo:hi:steps[:coupled]`; bounds accept fractions such as `1/90`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        if !(4..=5).contains(&parts.len()) {
            return Err(Error::validation(
                "axis",
                format!("`{s}` is not of the form name:lo:hi:steps[:coupled]"),
            ));
        }
        let num = |t: &str| {
            crate::config::parse_number(t)
                .ok_or_else(|| Error::validation("axis", format!("`{t}` is not a number")))
        };
        let steps = parts[3]
            .parse::<usize>()
            .map_err(|_| Error::validation("axis", format!("`{}` is not a step count", parts[3])))?;
        let axis = AxisSpec {
            parameter: parts[0].to_string(),
            lo: num(parts[1])?,
            hi: num(parts[2])?,
            steps,
            coupled_hi: parts.get(4).map(|c| c.to_string()),
        };
        axis.validate()?;
        Ok(axis)
    }
}

impl fmt::Display for AxisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{:?}:{:?}:{}", self.parameter, self.lo, self.hi, self.steps)?;
        if let Some(c) = &self.coupled_hi {
            write!(f, ":{c}")?;
        }
        Ok(())
    }
}

/// Everything besides the two swept parameters that a cell depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub base: ModelParams,
    pub init: EpidemicState,
    pub horizon: TimeGrid,
    pub eq_tol: f64,
    pub fbs: FbsConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    Ok,
    /// Outside the coupled domain or not a valid parameter set.
    Skipped,
    /// A solver returned an error.
    Failed,
    /// Completed, but at least one run did not converge.
    Unconverged,
}

impl CellStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Skipped => "skipped",
            CellStatus::Failed => "failed",
            CellStatus::Unconverged => "unconverged",
        }
    }
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub value1: f64,
    pub value2: f64,
    pub status: CellStatus,
    /// Present for `Ok` and `Unconverged` cells.
    pub comparison: Option<Comparison>,
    /// Reason for `Skipped` and `Failed` cells.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis1: AxisSpec,
    pub axis2: AxisSpec,
    /// Row-major: `cells[i * axis2.steps + j]`.
    pub cells: Vec<SweepCell>,
    pub settings: SweepSettings,
}

impl SweepResult {
    pub fn cell(&self, i: usize, j: usize) -> &SweepCell {
        &self.cells[i * self.axis2.steps + j]
    }

    pub fn count(&self, status: CellStatus) -> usize {
        self.cells.iter().filter(|c| c.status == status).count()
    }
}

fn check_axes(axis1: &AxisSpec, axis2: &AxisSpec) -> Result<()> {
    axis1.validate()?;
    axis2.validate()?;
    if axis1.parameter == axis2.parameter {
        return Err(Error::validation(
            "axis2",
            format!("both axes sweep `{}`", axis1.parameter),
        ));
    }
    for (axis, other) in [(axis1, axis2), (axis2, axis1)] {
        if let Some(c) = &axis.coupled_hi {
            if c != &other.parameter {
                return Err(Error::validation(
                    &format!("axis {}", axis.parameter),
                    format!("coupling must name the other axis `{}`, got `{c}`", other.parameter),
                ));
            }
        }
    }
    Ok(())
}

/// Evaluates one cell in isolation.
pub fn evaluate_cell(
    settings: &SweepSettings,
    axis1: &AxisSpec,
    value1: f64,
    axis2: &AxisSpec,
    value2: f64,
) -> SweepCell {
    let skipped = |note: String| SweepCell {
        value1,
        value2,
        status: CellStatus::Skipped,
        comparison: None,
        note: Some(note),
    };
    let outside = |axis: &AxisSpec, v: f64, other: f64| {
        axis.coupled_hi.is_some() && v > other + COUPLING_SLACK
    };
    if outside(axis1, value1, value2) || outside(axis2, value2, value1) {
        return skipped("outside coupled domain".into());
    }
    let params = settings
        .base
        .with(&axis1.parameter, value1)
        .and_then(|p| p.with(&axis2.parameter, value2));
    let params = match params {
        Ok(p) => p,
        Err(e) => return skipped(e.to_string()),
    };
    match compare(
        &params,
        settings.init,
        settings.horizon,
        settings.eq_tol,
        &settings.fbs,
    ) {
        Ok(cmp) => SweepCell {
            value1,
            value2,
            status: if cmp.ne_converged && cmp.so_converged {
                CellStatus::Ok
            } else {
                CellStatus::Unconverged
            },
            comparison: Some(cmp),
            note: None,
        },
        Err(e) => SweepCell {
            value1,
            value2,
            status: CellStatus::Failed,
            comparison: None,
            note: Some(e.to_string()),
        },
    }
}

/// Runs the comparison on every cell of `axis1 × axis2`. `workers = 0` uses
/// rayon's default thread count.
pub fn run_sweep(
    settings: &SweepSettings,
    axis1: &AxisSpec,
    axis2: &AxisSpec,
    workers: usize,
) -> Result<SweepResult> {
    check_axes(axis1, axis2)?;
    settings.base.validate()?;
    settings.fbs.validate()?;
    let v1 = axis1.values();
    let v2 = axis2.values();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let cells = pool.install(|| {
        (0..v1.len() * v2.len())
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / v2.len(), idx % v2.len());
                evaluate_cell(settings, axis1, v1[i], axis2, v2[j])
            })
            .collect()
    });
    Ok(SweepResult {
        axis1: axis1.clone(),
        axis2: axis2.clone(),
        cells,
        settings: settings.clone(),
    })
}
