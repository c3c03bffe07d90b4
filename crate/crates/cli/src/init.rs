//! Initial data for the dynamics commands.

use std::path::Path;

use cnls_core::dynamics::{DynamicsGrid, WaveField};
use cnls_core::solvers::{solve_prescribed_mass, Branch, GroundStateResult, Model, SolveOptions};
use num_complex::Complex;
use serde::Serialize;

use crate::config::RunOpts;
use crate::error::{CliError, Result};

pub fn dynamics_grid(model: &Model<f64>, run: &RunOpts) -> Result<DynamicsGrid<f64>> {
    let grid = match DynamicsGrid::<f64>::default_for(model.params.dim) {
        DynamicsGrid::Periodic { half_length, points } => DynamicsGrid::Periodic {
            half_length: run.extent.unwrap_or(half_length),
            points: run.grid_points.unwrap_or(points),
        },
        DynamicsGrid::Radial { dim, radius, points } => DynamicsGrid::Radial {
            dim,
            radius: run.extent.unwrap_or(radius),
            points: run.grid_points.unwrap_or(points),
        },
    };
    grid.validate()?;
    Ok(grid)
}

#[derive(Debug, Clone, Serialize)]
pub struct InitSummary {
    pub spec: String,
    /// Mass of the datum before it was rescaled to `a`.
    pub raw_mass: f64,
    /// Set when the datum is built from a normalized solution.
    pub ground_state: Option<GroundStateSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundStateSummary {
    pub branch: &'static str,
    pub dilation: f64,
    pub lambda: f64,
    pub energy_level: f64,
    pub ode_residual: f64,
    pub mass_error: f64,
}

impl GroundStateSummary {
    pub fn of(gs: &GroundStateResult<f64>, dilation: f64) -> Self {
        GroundStateSummary {
            branch: gs.branch.name(),
            dilation,
            lambda: gs.lambda,
            energy_level: gs.energy_level,
            ode_residual: gs.ode_residual,
            mass_error: gs.mass_error,
        }
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad {what} {s:?} in --init")))
}

fn radial_preset(grid: DynamicsGrid<f64>, f: impl Fn(f64) -> f64) -> Result<WaveField<f64>> {
    let radial = matches!(grid, DynamicsGrid::Radial { .. });
    let last = grid.points() - 1;
    let values = (0..grid.points())
        .map(|j| {
            let v = if radial && j == last {
                0.0
            } else {
                f(grid.coord(j).abs())
            };
            Complex::new(v, 0.0)
        })
        .collect();
    Ok(WaveField::new(grid, values)?)
}

/// Linear interpolation of `(x, re, im)` samples; zero outside their range.
fn from_csv(path: &Path, grid: DynamicsGrid<f64>) -> Result<WaveField<f64>> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let Some(first) = rec.get(0) else { continue };
        let Ok(x) = first.parse::<f64>() else {
            if rows.is_empty() {
                continue; // header
            }
            return Err(CliError::Usage(format!(
                "{}: non-numeric row {:?}",
                path.display(),
                rec
            )));
        };
        let re = parse_f64(rec.get(1).unwrap_or(""), "real part")?;
        let im = rec
            .get(2)
            .map(|s| parse_f64(s, "imaginary part"))
            .transpose()?
            .unwrap_or(0.0);
        rows.push((x, re, im));
    }
    if rows.len() < 2 {
        return Err(CliError::Usage(format!(
            "{}: need at least two samples",
            path.display()
        )));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let radial = matches!(grid, DynamicsGrid::Radial { .. });
    let last = grid.points() - 1;
    let values = (0..grid.points())
        .map(|j| {
            let x = grid.coord(j);
            if (radial && j == last) || x < rows[0].0 || x > rows[rows.len() - 1].0 {
                return Complex::new(0.0, 0.0);
            }
            let k = rows.partition_point(|r| r.0 <= x).clamp(1, rows.len() - 1);
            let (x0, r0, i0) = rows[k - 1];
            let (x1, r1, i1) = rows[k];
            let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
            Complex::new(r0 + t * (r1 - r0), i0 + t * (i1 - i0))
        })
        .collect();
    Ok(WaveField::new(grid, values)?)
}

/// Builds the datum named by `spec` and rescales it to mass `a`.
///
/// `spec` is `gaussian[:w]`, `sech[:w]`, `ground-state:<branch>[:s]` or a
/// path to a CSV file.
pub fn initial_datum(spec: &str, model: &Model<f64>, grid: DynamicsGrid<f64>) -> Result<(WaveField<f64>, InitSummary)> {
    let mut parts = spec.split(':');
    let head = parts.next().unwrap_or_default();
    let arg = parts.next();
    let extra = parts.next();
    let mut ground_state = None;
    let u = match head {
        "gaussian" | "sech" if extra.is_none() => {
            let w = arg.map(|s| parse_f64(s, "width")).transpose()?.unwrap_or(1.0);
            if !(w > 0.0) {
                return Err(CliError::Usage("preset width must be positive".into()));
            }
            if head == "gaussian" {
                radial_preset(grid, |r| (-(r / w).powi(2)).exp())?
            } else {
                radial_preset(grid, |r| 1.0 / (r / w).cosh())?
            }
        }
        "ground-state" => {
            let branch: Branch = arg
                .ok_or_else(|| CliError::Usage("ground-state preset needs a branch".into()))?
                .parse()?;
            let s = extra.map(|s| parse_f64(s, "dilation")).transpose()?.unwrap_or(0.0);
            let gs = solve_prescribed_mass(model, branch, &SolveOptions::default())?;
            ground_state = Some(GroundStateSummary::of(&gs, s));
            WaveField::from_radial(&gs.profile.dilate(s), grid)?
        }
        _ if Path::new(spec).is_file() => from_csv(Path::new(spec), grid)?,
        _ => {
            return Err(CliError::Usage(format!(
                "unknown --init {spec:?} (not a preset or a file)"
            )))
        }
    };
    let raw_mass = u.observables(&model.params)?.mass2.sqrt();
    if !(raw_mass > 0.0) || !raw_mass.is_finite() {
        return Err(CliError::Usage("initial datum has zero or non-finite mass".into()));
    }
    let u = u.scaled(model.params.a / raw_mass);
    Ok((
        u,
        InitSummary {
            spec: spec.to_string(),
            raw_mass,
            ground_state,
        },
    ))
}
