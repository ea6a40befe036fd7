//! Self-checks run by the `verify` command: exact solutions, limit-system
//! conservation, integrator order and shot residuals.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::Result;
use crate::geometry::{
    cylinder_radius, lambda_residual_with, max_abs_residual, sample_curve, sphere_radius,
};
use crate::limit::{first_integral, integrate_limit};
use crate::ode::{
    integrate_profile, integration_order_check, ModelParams, OrderCheck, ProfileState, SolverConfig,
};

pub const EXACT_TOL: f64 = 1e-12;
pub const CONSERVATION_TOL: f64 = 1e-9;
pub const SHOT_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub limit: f64,
}

impl SuiteResult {
    fn at_most(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            passed: measured <= limit,
            measured,
            limit,
        }
    }
}

/// A point on an exact solution together with its curvature `κ = θ'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactPoint {
    pub state: ProfileState,
    pub kappa: f64,
}

/// `x = -λ`: the plane perpendicular to the axis, traversed upward.
pub fn plane_points(params: &ModelParams, count: usize) -> Vec<ExactPoint> {
    (1..=count)
        .map(|i| {
            let s = 10.0 * i as f64 / count as f64;
            ExactPoint {
                state: ProfileState {
                    s,
                    x: -params.lambda,
                    r: s,
                    theta: FRAC_PI_2,
                },
                kappa: 0.0,
            }
        })
        .collect()
}

/// Round sphere about the origin, traversed counter-clockwise from the
/// positive x-axis; the poles are excluded.
pub fn sphere_points(params: &ModelParams, count: usize) -> Vec<ExactPoint> {
    let a = sphere_radius(params);
    (1..=count)
        .map(|i| {
            let t = PI * i as f64 / (count + 1) as f64;
            let state = ProfileState {
                s: a * t,
                x: a * t.cos(),
                r: a * t.sin(),
                theta: t + FRAC_PI_2,
            };
            ExactPoint {
                state,
                kappa: 1.0 / a,
            }
        })
        .collect()
}

/// Cylinder `r = a`, traversed in the direction of decreasing x.
pub fn cylinder_points(params: &ModelParams, count: usize) -> Vec<ExactPoint> {
    let a = cylinder_radius(params);
    (0..count)
        .map(|i| {
            let x = 5.0 - 10.0 * i as f64 / count as f64;
            ExactPoint {
                state: ProfileState {
                    s: 5.0 - x,
                    x,
                    r: a,
                    theta: PI,
                },
                kappa: 0.0,
            }
        })
        .collect()
}

pub fn max_exact_residual(points: &[ExactPoint], params: &ModelParams) -> Result<f64> {
    points.iter().try_fold(0.0f64, |acc, p| {
        Ok(acc.max(lambda_residual_with(&p.state, p.kappa, params)?.abs()))
    })
}

pub fn exact_solution_suite(params: &ModelParams, count: usize) -> Result<Vec<SuiteResult>> {
    let families: [(&str, fn(&ModelParams, usize) -> Vec<ExactPoint>); 3] = [
        ("plane", plane_points),
        ("sphere", sphere_points),
        ("cylinder", cylinder_points),
    ];
    families
        .iter()
        .map(|(name, points)| {
            let worst = max_exact_residual(&points(params, count), params)?;
            Ok(SuiteResult::at_most(
                format!("exact {name} residual"),
                worst,
                EXACT_TOL,
            ))
        })
        .collect()
}

/// Largest `|cos²φ (1+ρ)^{2(n-1)} - 1|` over `[0, t_end]`, and `sin φ(t_end)`.
pub fn limit_conservation(n: u32, t_end: f64, step: f64) -> Result<(f64, f64)> {
    let traj = integrate_limit(n, t_end, step)?;
    let drift = traj
        .iter()
        .map(|s| (first_integral(s, n) - 1.0).abs())
        .fold(0.0, f64::max);
    let final_sin = traj.last().map_or(0.0, |s| s.slope());
    Ok((drift, final_sin))
}

/// Largest shot residual, measured from the integrated trajectory.
pub fn shot_residual(delta: f64, params: &ModelParams, step: f64) -> Result<f64> {
    let config = SolverConfig {
        step,
        ..Default::default()
    };
    let curve = integrate_profile(delta, params, &config)?;
    Ok(max_abs_residual(&sample_curve(&curve)?))
}

/// Run every suite for `(n, λ)`; shots use the step from `config`.
pub fn run_all(params: &ModelParams, config: &SolverConfig) -> Result<Vec<SuiteResult>> {
    config.validate()?;
    let mut results = exact_solution_suite(params, 1000)?;

    let (drift, final_sin) = limit_conservation(params.n, 50.0, 1e-4)?;
    results.push(SuiteResult::at_most(
        "limit first integral drift",
        drift,
        CONSERVATION_TOL,
    ));
    results.push(SuiteResult {
        name: "limit sin(phi) at t = 50".into(),
        passed: final_sin >= 0.999,
        measured: final_sin,
        limit: 0.999,
    });

    let threshold = params.convexity_threshold();
    let order = integration_order_check(0.3 * threshold, params, &OrderCheck::default())?;
    results.push(SuiteResult {
        name: "RK4 observed order".into(),
        passed: (3.5..=4.5).contains(&order),
        measured: order,
        limit: 4.0,
    });

    for frac in [0.05, 0.3] {
        let delta = frac * threshold;
        let worst = shot_residual(delta, params, config.step)?;
        results.push(SuiteResult::at_most(
            format!("shot residual, delta = {delta:.4}"),
            worst,
            SHOT_RESIDUAL_TOL,
        ));
    }
    Ok(results)
}
