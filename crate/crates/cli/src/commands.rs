use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;
use std::time::Instant;

use lambda_torus::geometry::{sample_curve, sphere_radius};
use lambda_torus::io::{read_polyline_csv, write_polyline_csv, write_profile_csv, RunReport};
use lambda_torus::mesh::{resample_by_arclength, revolve, Mesh};
use lambda_torus::ode::integrate_profile;
use lambda_torus::shooting::find_delta_star_with_jobs;
use lambda_torus::{
    verify as suites, Error, ModelParams, Point, Result, SolverConfig, TorusSolution,
};

use crate::{MeshArgs, ShootArgs, SolveArgs, VerifyArgs};

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn path_string(path: &Path) -> String {
    path.display().to_string()
}

fn require_positive_lambda(params: &ModelParams) -> Result<()> {
    if params.lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "the torus search requires lambda > 0 (got {})",
            params.lambda
        )))
    }
}

fn require_surface(params: &ModelParams) -> Result<()> {
    if params.n == 2 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "meshes are only produced for n = 2 (got n = {})",
            params.n
        )))
    }
}

fn torus_mesh(points: &[Point], profile_segments: usize, segments: usize) -> Result<Mesh> {
    revolve(&resample_by_arclength(points, profile_segments)?, segments)
}

pub fn shoot(args: ShootArgs) -> Result<u8> {
    let params = args.model.params()?;
    let config = args.solver.config()?;
    let curve = integrate_profile(args.delta, &params, &config)?;
    let samples = sample_curve(&curve)?;
    write_profile_csv(create(&args.profile_out)?, &samples)?;
    println!("{}", serde_json::to_string(&curve.outcome)?);
    Ok(0)
}

fn failure_payload(params: &ModelParams, config: &SolverConfig, err: &Error) -> serde_json::Value {
    let mut payload = serde_json::json!({
        "schema_version": lambda_torus::io::SCHEMA_VERSION,
        "status": "failed",
        "error": err.to_string(),
        "params": params,
        "config": config,
    });
    match err {
        Error::NoConvergence {
            delta,
            achieved,
            angle_tol,
        } => {
            payload["delta"] = (*delta).into();
            payload["terminal_tangent_gap"] = (*achieved).into();
            payload["angle_tol"] = (*angle_tol).into();
        }
        Error::Indeterminate { delta, kind } => {
            payload["delta"] = (*delta).into();
            payload["outcome"] = serde_json::to_value(kind).unwrap_or_default();
        }
        Error::Simplicity { first, second } => {
            payload["intersecting_segments"] = serde_json::json!([first, second]);
        }
        _ => {}
    }
    payload
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(path) => {
            let mut out = create(path)?;
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

pub fn solve(args: SolveArgs) -> Result<u8> {
    let params = args.model.params()?;
    let config = args.solver.config()?;
    require_positive_lambda(&params)?;
    if args.mesh_out.is_some() {
        require_surface(&params)?;
    }
    let started = Instant::now();
    let solution: TorusSolution =
        match find_delta_star_with_jobs(&params, &config, args.solver.jobs) {
            Ok(solution) => solution,
            Err(err) => {
                if matches!(
                    err,
                    Error::Bracket(_)
                        | Error::Indeterminate { .. }
                        | Error::NoConvergence { .. }
                        | Error::Joint(_)
                        | Error::Simplicity { .. }
                ) {
                    let mut text =
                        serde_json::to_string_pretty(&failure_payload(&params, &config, &err))?;
                    text.push('\n');
                    write_text(args.report_out.as_deref(), &text)?;
                }
                return Err(err);
            }
        };
    let mut report = RunReport::from_solution(&params, &config, &solution)?;

    if let Some(path) = &args.profile_out {
        write_polyline_csv(create(path)?, &solution.closed_profile.points)?;
        report.artifacts.profile = Some(path_string(path));
    }
    if let Some(path) = &args.mesh_out {
        let mesh = torus_mesh(
            &solution.closed_profile.points,
            args.profile_segments,
            args.segments,
        )?;
        mesh.write_obj(create(path)?)?;
        report.artifacts.mesh = Some(path_string(path));
    }
    report.artifacts.report = args.report_out.as_deref().map(path_string);
    if args.record_timing {
        report.wall_clock_seconds = Some(started.elapsed().as_secs_f64());
    }
    write_text(args.report_out.as_deref(), &report.to_json()?)?;

    if report.passed() {
        Ok(0)
    } else {
        eprintln!(
            "error: solution failed its property checks (see bound_report and closed_profile)"
        );
        Ok(1)
    }
}

/// Open half circle of radius `a` from `(a, 0)` to `(-a, 0)`.
fn sphere_profile(a: f64, segments: usize) -> Vec<Point> {
    (0..=segments)
        .map(|i| {
            let t = PI * i as f64 / segments as f64;
            Point::new(a * t.cos(), a * t.sin())
        })
        .collect()
}

fn read_profile(source: &str) -> Result<Vec<Point>> {
    if source == "-" {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text)?;
        read_polyline_csv(text.as_bytes())
    } else {
        read_polyline_csv(File::open(source)?)
    }
}

pub fn mesh(args: MeshArgs) -> Result<u8> {
    let params = args.model.params()?;
    require_surface(&params)?;
    let config = args.solver.config()?;
    let mesh = if args.sphere {
        revolve(
            &sphere_profile(sphere_radius(&params), args.profile_segments),
            args.segments,
        )?
    } else {
        let points = match &args.profile_in {
            Some(source) => read_profile(source)?,
            None => {
                require_positive_lambda(&params)?;
                find_delta_star_with_jobs(&params, &config, args.solver.jobs)?
                    .closed_profile
                    .points
            }
        };
        torus_mesh(&points, args.profile_segments, args.segments)?
    };
    mesh.write_obj(create(&args.mesh_out)?)?;
    let watertight = mesh.is_watertight();
    let summary = serde_json::json!({
        "vertices": mesh.vertices.len(),
        "edges": mesh.edge_count(),
        "faces": mesh.faces.len(),
        "euler_characteristic": mesh.euler_characteristic(),
        "watertight": watertight,
        "mesh": path_string(&args.mesh_out),
    });
    println!("{summary}");
    if watertight {
        Ok(0)
    } else {
        eprintln!("error: mesh is not watertight");
        Ok(1)
    }
}

pub fn verify(args: VerifyArgs) -> Result<u8> {
    let params = args.model.params()?;
    let config = args.solver.config()?;
    let results = suites::run_all(&params, &config)?;
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    println!("n = {}, lambda = {}", params.n, params.lambda);
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!(
            "{status}  {:width$}  measured {:.3e}  limit {:.3e}",
            r.name, r.measured, r.limit
        );
    }
    let failed: Vec<&str> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.name.as_str())
        .collect();
    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("error: failing suites: {}", failed.join(", "));
        Ok(1)
    }
}
