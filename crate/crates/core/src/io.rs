//! CSV and JSON serialization of shots, closed profiles and run reports.
//!
//! Floats are written with 17 significant digits so every value round-trips
//! exactly, and output is byte-identical for identical inputs.

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::geometry::{self, GeometricSample};
use crate::ode::{integrate_profile, ModelParams, SolverConfig};
use crate::polyline::Point;
use crate::shooting::{BisectionStep, BoundReport, BracketScan, TorusSolution};

pub const PROFILE_HEADER: &str = "s,x,r,theta,kappa,H,support,residual";
pub const POLYLINE_HEADER: &str = "x,r";
pub const SCHEMA_VERSION: u32 = 1;

fn f17(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row of a shot CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub s: f64,
    pub x: f64,
    pub r: f64,
    pub theta: f64,
    pub kappa: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub support: f64,
    pub residual: f64,
}

pub fn write_profile_csv<W: Write>(mut out: W, samples: &[GeometricSample]) -> Result<()> {
    writeln!(out, "{PROFILE_HEADER}")?;
    for g in samples {
        let st = g.state;
        let fields = [
            st.s, st.x, st.r, st.theta, g.kappa, g.h, g.support, g.residual,
        ]
        .map(f17);
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_profile_csv<R: Read>(input: R) -> Result<Vec<ProfileRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let rows = reader
        .deserialize()
        .collect::<std::result::Result<Vec<ProfileRow>, _>>()?;
    Ok(rows)
}

/// Write an `x,r` polyline; a closed profile already repeats its first point.
pub fn write_polyline_csv<W: Write>(mut out: W, points: &[Point]) -> Result<()> {
    writeln!(out, "{POLYLINE_HEADER}")?;
    for p in points {
        writeln!(out, "{},{}", f17(p.x), f17(p.r))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_polyline_csv<R: Read>(input: R) -> Result<Vec<Point>> {
    let mut reader = csv::Reader::from_reader(input);
    let points = reader
        .deserialize()
        .collect::<std::result::Result<Vec<Point>, _>>()?;
    if points.len() < 2 {
        return Err(Error::Domain(format!(
            "polyline CSV holds {} points",
            points.len()
        )));
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedProfileSummary {
    pub points: usize,
    pub closed: bool,
    pub simple: bool,
    pub joint_angles: [f64; 2],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Artifacts {
    #[serde(default)]
    pub report: Option<String>,
    #[serde(default)]
    pub profile: Option<String>,
    #[serde(default)]
    pub mesh: Option<String>,
}

/// Everything a `solve` run produces, as written to JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub params: ModelParams,
    pub config: SolverConfig,
    pub delta_star: f64,
    pub r_star: f64,
    pub s1: f64,
    pub terminal_tangent_gap: f64,
    pub residual_max: f64,
    /// Residual of the final shot re-run at half the step size.
    pub residual_max_half_step: f64,
    pub bound_report: BoundReport,
    pub closed_profile: ClosedProfileSummary,
    pub weighted_area: f64,
    pub weighted_volume: f64,
    pub initial_bracket: (f64, f64),
    pub bracket_width: f64,
    pub bracket_history: Vec<BisectionStep>,
    #[serde(default)]
    pub grid_scan: Option<BracketScan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
    #[serde(default)]
    pub artifacts: Artifacts,
}

impl RunReport {
    /// Collect the solution's diagnostics, re-running the final shot at half
    /// step as a discretization check.
    pub fn from_solution(
        params: &ModelParams,
        config: &SolverConfig,
        solution: &TorusSolution,
    ) -> Result<Self> {
        let half_config = SolverConfig {
            step: 0.5 * config.step,
            ..config.clone()
        };
        let rerun = integrate_profile(solution.delta_star, params, &half_config)?;
        let residual_max_half_step = geometry::max_abs_residual(&geometry::sample_curve(&rerun)?);
        let points = &solution.closed_profile.points;
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            params: *params,
            config: config.clone(),
            delta_star: solution.delta_star,
            r_star: solution.r_star,
            s1: solution.s1,
            terminal_tangent_gap: solution.terminal_tangent_gap,
            residual_max: solution.residual_max,
            residual_max_half_step,
            bound_report: solution.bound_report,
            closed_profile: ClosedProfileSummary {
                points: points.len(),
                closed: crate::polyline::is_closed(points),
                simple: crate::polyline::simplicity_check(points),
                joint_angles: solution.closed_profile.joint_angles,
            },
            weighted_area: geometry::weighted_area(points, params),
            weighted_volume: geometry::weighted_volume(points, params),
            initial_bracket: solution.initial_bracket,
            bracket_width: solution.bracket_width,
            bracket_history: solution.history.clone(),
            grid_scan: solution.scan.clone(),
            wall_clock_seconds: None,
            artifacts: Artifacts::default(),
        })
    }

    /// All checks that gate a successful run.
    pub fn passed(&self) -> bool {
        self.bound_report.all_passed() && self.closed_profile.closed && self.closed_profile.simple
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
