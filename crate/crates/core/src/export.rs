//! CSV, summary and heatmap writers.
//!
//! Numbers are written with Rust's shortest round-trip formatting, `.` as
//! decimal separator and LF line endings, so files re-parse to the exact
//! in-memory values and are byte-stable across runs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::integrate::Trajectory;
use crate::metrics::Comparison;
use crate::sweep::{CellStatus, SweepResult};

pub const TRAJECTORY_HEADER: &str = "t,S,V,I,R,rate";
pub const SWEEP_HEADER: &str = "axis1,axis2,ne_it,ne_vt,ne_asp,so_it,so_vt,so_asp,sed,status";

/// Sweep fields that can be rendered as heatmaps.
pub const HEATMAP_FIELDS: [&str; 7] = ["ne_it", "ne_vt", "ne_asp", "so_it", "so_vt", "so_asp", "sed"];

/// Color for cells without a value.
const MISSING_RGB: [u8; 3] = [128, 128, 128];
const LOW_RGB: [u8; 3] = [32, 32, 160];
const HIGH_RGB: [u8; 3] = [250, 220, 40];

pub fn fmt_num(x: f64) -> String {
    format!("{x:?}")
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(traj.states.len() * 64);
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for (k, st) in traj.states.iter().enumerate() {
        let row = [traj.grid.time(k), st.s, st.v, st.i, st.r, st.rate];
        let row: Vec<String> = row.iter().map(|x| fmt_num(*x)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    write(path, trajectory_csv(traj))
}

/// Rows `[t, S, V, I, R, rate]` of a trajectory CSV.
pub fn parse_trajectory_csv(text: &str) -> Result<Vec<[f64; 6]>> {
    let mut lines = text.lines().enumerate();
    let bad = |line: usize, message: String| Error::Parse {
        path: "trajectory csv".into(),
        line,
        message,
    };
    match lines.next() {
        Some((_, h)) if h == TRAJECTORY_HEADER => {}
        other => {
            return Err(bad(
                1,
                format!("expected header `{TRAJECTORY_HEADER}`, got {other:?}"),
            ))
        }
    }
    lines
        .map(|(idx, line)| {
            let mut row = [0.0; 6];
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(bad(idx + 1, format!("expected 6 fields, got {}", fields.len())));
            }
            for (slot, f) in row.iter_mut().zip(fields) {
                *slot = f
                    .parse()
                    .map_err(|_| bad(idx + 1, format!("`{f}` is not a number")))?;
            }
            Ok(row)
        })
        .collect()
}

/// `key = value` lines.
pub fn summary_text(entries: &[(String, String)]) -> String {
    entries
        .iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect()
}

pub fn write_summary(path: &Path, entries: &[(String, String)]) -> Result<()> {
    write(path, summary_text(entries))
}

pub fn comparison_csv(cmp: &Comparison) -> String {
    let mut out = String::from("quantity,ne,so\n");
    for (name, ne, so) in [
        ("it", cmp.ne.it, cmp.so.it),
        ("vt", cmp.ne.vt, cmp.so.vt),
        ("asp", cmp.ne.asp, cmp.so.asp),
    ] {
        let _ = writeln!(out, "{name},{},{}", fmt_num(ne), fmt_num(so));
    }
    let _ = writeln!(out, "sed,{}", fmt_num(cmp.sed));
    out
}

pub fn write_comparison_csv(path: &Path, cmp: &Comparison) -> Result<()> {
    write(path, comparison_csv(cmp))
}

fn cell_field(cmp: &Comparison, field: &str) -> f64 {
    match field {
        "ne_it" => cmp.ne.it,
        "ne_vt" => cmp.ne.vt,
        "ne_asp" => cmp.ne.asp,
        "so_it" => cmp.so.it,
        "so_vt" => cmp.so.vt,
        "so_asp" => cmp.so.asp,
        "sed" => cmp.sed,
        _ => unreachable!("unknown heatmap field {field}"),
    }
}

/// Long-format sweep table; metric columns are empty for skipped and failed cells.
pub fn sweep_csv(res: &SweepResult) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for cell in &res.cells {
        let _ = write!(out, "{},{}", fmt_num(cell.value1), fmt_num(cell.value2));
        for field in HEATMAP_FIELDS {
            out.push(',');
            if let Some(cmp) = &cell.comparison {
                out.push_str(&fmt_num(cell_field(cmp, field)));
            }
        }
        let _ = writeln!(out, ",{}", cell.status);
    }
    out
}

pub fn write_sweep_csv(path: &Path, res: &SweepResult) -> Result<()> {
    write(path, sweep_csv(res))
}

/// A rendered field: binary PPM (P6) bytes plus the value range.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub width: usize,
    pub height: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub ppm: Vec<u8>,
}

fn lerp(t: f64) -> [u8; 3] {
    let mut rgb = [0u8; 3];
    for c in 0..3 {
        let (a, b) = (LOW_RGB[c] as f64, HIGH_RGB[c] as f64);
        rgb[c] = (a + (b - a) * t).round() as u8;
    }
    rgb
}

/// Width is the axis-2 step count, height the axis-1 step count; the top row
/// holds the largest axis-1 value. Cells without a value are grey.
pub fn render_heatmap(res: &SweepResult, field: &str) -> Heatmap {
    let (height, width) = (res.axis1.steps, res.axis2.steps);
    let value = |i: usize, j: usize| {
        res.cell(i, j)
            .comparison
            .as_ref()
            .map(|c| cell_field(c, field))
            .filter(|v| v.is_finite())
    };
    let present: Vec<f64> = (0..height)
        .flat_map(|i| (0..width).map(move |j| (i, j)))
        .filter_map(|(i, j)| value(i, j))
        .collect();
    let min = present.iter().cloned().reduce(f64::min);
    let max = present.iter().cloned().reduce(f64::max);
    let mut ppm = format!("P6\n{width} {height}\n255\n").into_bytes();
    for row in 0..height {
        let i = height - 1 - row;
        for j in 0..width {
            let rgb = match (value(i, j), min, max) {
                (Some(v), Some(lo), Some(hi)) => {
                    let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
                    lerp(t)
                }
                _ => MISSING_RGB,
            };
            ppm.extend_from_slice(&rgb);
        }
    }
    Heatmap {
        width,
        height,
        min,
        max,
        ppm,
    }
}

pub fn heatmap_sidecar(res: &SweepResult, field: &str, map: &Heatmap) -> String {
    let opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_else(|| "none".into());
    let mut out = String::new();
    let _ = writeln!(out, "field = {field}");
    let _ = writeln!(out, "min = {}", opt(map.min));
    let _ = writeln!(out, "max = {}", opt(map.max));
    let _ = writeln!(out, "width = {}", map.width);
    let _ = writeln!(out, "height = {}", map.height);
    let _ = writeln!(out, "x_axis = {}", res.axis2);
    let _ = writeln!(out, "y_axis = {} (top row = hi)", res.axis1);
    let _ = writeln!(
        out,
        "colormap = linear rgb{:?} (min) -> rgb{:?} (max); missing = rgb{:?}",
        LOW_RGB, HIGH_RGB, MISSING_RGB
    );
    let _ = writeln!(
        out,
        "cells = ok {}, unconverged {}, skipped {}, failed {}",
        res.count(CellStatus::Ok),
        res.count(CellStatus::Unconverged),
        res.count(CellStatus::Skipped),
        res.count(CellStatus::Failed)
    );
    out
}

/// Writes `heatmap_<field>.ppm` and `heatmap_<field>.txt` for every field.
pub fn write_heatmaps(dir: &Path, res: &SweepResult) -> Result<()> {
    for field in HEATMAP_FIELDS {
        let map = render_heatmap(res, field);
        write(&dir.join(format!("heatmap_{field}.ppm")), &map.ppm)?;
        write(
            &dir.join(format!("heatmap_{field}.txt")),
            heatmap_sidecar(res, field, &map),
        )?;
    }
    Ok(())
}
