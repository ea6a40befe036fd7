//! Extrinsic geometry of the revolved hypersurface.
//!
//! Sign conventions: the unit normal is `N = (-r', x' α)`, the profile
//! curvature is `κ = θ'`, and the mean curvature is
//! `H = κ - (n-1) cos θ / r`. With these, `⟨X, N⟩ = -x sin θ + r cos θ`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::ode::{curvature, ModelParams, OutcomeKind, ProfileCurve, ProfileState};
use crate::polyline::{find_self_intersection, is_closed, Point};

fn require_positive_radius(state: &ProfileState) -> Result<()> {
    if state.r > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "geometry requires r > 0 (got r = {})",
            state.r
        )))
    }
}

/// Mean curvature with the curvature prescribed by the ODE at `state`.
pub fn mean_curvature(state: &ProfileState, params: &ModelParams) -> Result<f64> {
    let kappa = curvature(state, params)?;
    mean_curvature_with(state, kappa, params)
}

/// Mean curvature of a profile point whose curve has curvature `kappa` there.
pub fn mean_curvature_with(state: &ProfileState, kappa: f64, params: &ModelParams) -> Result<f64> {
    require_positive_radius(state)?;
    Ok(kappa - params.sphere_factor() * state.theta.cos() / state.r)
}

/// Support function `⟨X, N⟩`.
pub fn support_function(state: &ProfileState) -> f64 {
    let (sin, cos) = state.theta.sin_cos();
    -state.x * sin + state.r * cos
}

/// `H + ⟨X, N⟩ - λ` using the ODE curvature at `state`.
pub fn lambda_residual(state: &ProfileState, params: &ModelParams) -> Result<f64> {
    Ok(mean_curvature(state, params)? + support_function(state) - params.lambda)
}

/// `H + ⟨X, N⟩ - λ` for a curve with curvature `kappa` at `state`.
pub fn lambda_residual_with(state: &ProfileState, kappa: f64, params: &ModelParams) -> Result<f64> {
    Ok(mean_curvature_with(state, kappa, params)? + support_function(state) - params.lambda)
}

/// Radius of the round sphere solution: positive root of `a² + λa - n = 0`.
pub fn sphere_radius(params: &ModelParams) -> f64 {
    let l = params.lambda;
    ((l * l + 4.0 * f64::from(params.n)).sqrt() - l) / 2.0
}

/// Radius of the cylinder solution: positive root of `a² + λa - (n-1) = 0`.
pub fn cylinder_radius(params: &ModelParams) -> f64 {
    let l = params.lambda;
    ((l * l + 4.0 * params.sphere_factor()).sqrt() - l) / 2.0
}

/// Area of the unit sphere `S^k ⊂ R^{k+1}`, by `ω_k = 2π ω_{k-2} / (k-1)`.
pub fn unit_sphere_area(k: u32) -> f64 {
    match k {
        0 => 2.0,
        1 => TAU,
        _ => TAU * unit_sphere_area(k - 2) / f64::from(k - 1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricSample {
    pub state: ProfileState,
    /// Curvature of the sampled curve, measured from its tangent angles.
    pub kappa: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub support: f64,
    pub residual: f64,
}

const STENCIL: usize = 7;

/// Weights of the first-derivative finite difference at `x0` on arbitrary
/// `nodes` (Fornberg's recurrence).
fn first_derivative_weights(x0: f64, nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![[0.0_f64; 2]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                c[i][1] = c1 * (c[i - 1][0] - c5 * c[i - 1][1]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            c[j][1] = (c4 * c[j][1] - c[j][0]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

/// Turning rate `dθ/ds` at every state, from a seven-node sixth-order
/// finite difference on the stored angles. Nodes closer than `min_spacing` to
/// an already selected node are skipped, which keeps a short refined
/// terminal step from blowing up the weights.
pub fn measured_curvature(states: &[ProfileState], min_spacing: f64) -> Vec<f64> {
    let len = states.len();
    if len < 2 {
        return vec![0.0; len];
    }
    let take = STENCIL.min(len);
    (0..len)
        .map(|i| {
            let lo = i.saturating_sub(3 * STENCIL);
            let hi = (i + 3 * STENCIL + 1).min(len);
            let mut candidates: Vec<usize> = (lo..hi).collect();
            candidates.sort_by(|&a, &b| {
                let da = (states[a].s - states[i].s).abs();
                let db = (states[b].s - states[i].s).abs();
                da.total_cmp(&db).then(a.cmp(&b))
            });
            let mut chosen: Vec<usize> = Vec::with_capacity(take);
            for j in candidates {
                if chosen
                    .iter()
                    .all(|&c| (states[c].s - states[j].s).abs() >= min_spacing)
                {
                    chosen.push(j);
                    if chosen.len() == take {
                        break;
                    }
                }
            }
            let nodes: Vec<f64> = chosen.iter().map(|&j| states[j].s).collect();
            let weights = first_derivative_weights(states[i].s, &nodes);
            chosen
                .iter()
                .zip(weights)
                .map(|(&j, w)| w * states[j].theta)
                .sum()
        })
        .collect()
}

/// Geometric quantities along a computed shot, with the curvature measured
/// from the trajectory rather than taken from the ODE right-hand side.
pub fn sample_curve(curve: &ProfileCurve) -> Result<Vec<GeometricSample>> {
    let kappas = measured_curvature(&curve.states, 0.25 * curve.step);
    curve
        .states
        .iter()
        .zip(kappas)
        .map(|(state, kappa)| {
            let h = mean_curvature_with(state, kappa, &curve.params)?;
            let support = support_function(state);
            Ok(GeometricSample {
                state: *state,
                kappa,
                h,
                support,
                residual: h + support - curve.params.lambda,
            })
        })
        .collect()
}

pub fn max_abs_residual(samples: &[GeometricSample]) -> f64 {
    samples.iter().map(|s| s.residual.abs()).fold(0.0, f64::max)
}

/// The reflected, closed profile polyline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedProfile {
    /// Half profile followed by its mirror image in the r-axis, reversed;
    /// the last point repeats the first.
    pub points: Vec<Point>,
    /// Tangent mismatch (radians) at the lower and upper r-axis joints.
    pub joint_angles: [f64; 2],
}

fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Reflect a half profile that returns to the r-axis with horizontal tangent
/// into a closed curve.
pub fn build_closed_profile(half: &ProfileCurve, angle_tol: f64) -> Result<ClosedProfile> {
    if half.outcome.kind != OutcomeKind::HitAxis {
        return Err(Error::Joint(format!(
            "half profile must end on the r-axis (terminated by {:?})",
            half.outcome.kind
        )));
    }
    let tangent_gap = (half.outcome.x_prime_terminal + 1.0).abs();
    if tangent_gap > angle_tol {
        return Err(Error::Joint(format!(
            "terminal tangent misses (-1, 0): |x'(s1) + 1| = {tangent_gap:e} > {angle_tol:e}"
        )));
    }
    let states = &half.states;
    if states.len() < 3 {
        return Err(Error::Joint(
            "half profile has fewer than three points".into(),
        ));
    }
    let first_theta = states[0].theta;
    let last_theta = states[states.len() - 1].theta;
    let joint_angles = [
        wrap_angle(2.0 * first_theta).abs(),
        wrap_angle(2.0 * last_theta).abs(),
    ];
    if joint_angles.iter().any(|&a| a > 2.0 * angle_tol) {
        return Err(Error::Joint(format!(
            "reflection leaves a corner: joint mismatch {joint_angles:?} rad exceeds {:e}",
            2.0 * angle_tol
        )));
    }

    let mut half_points: Vec<Point> = states.iter().map(|s| Point::new(s.x, s.r)).collect();
    let inner = &half_points[1..half_points.len() - 1];
    if let Some(p) = inner.iter().find(|p| p.x < 0.0 || p.r <= 0.0) {
        return Err(Error::Joint(format!(
            "half profile leaves the first quadrant at ({}, {})",
            p.x, p.r
        )));
    }
    let last = half_points.len() - 1;
    half_points[0].x = 0.0;
    half_points[last].x = 0.0;
    if half_points[last].dist(half_points[last - 1]) < 1e-3 * half.step {
        half_points.remove(last - 1);
    }

    let mut points = half_points.clone();
    let tail = half_points.len() - 1;
    points.extend(
        half_points[1..tail]
            .iter()
            .rev()
            .map(|p| Point::new(-p.x, p.r)),
    );
    points.push(half_points[0]);

    if let Some((first, second)) = find_self_intersection(&points) {
        return Err(Error::Simplicity { first, second });
    }
    debug_assert!(is_closed(&points));
    Ok(ClosedProfile {
        points,
        joint_angles,
    })
}

fn area_density(p: Point, n: u32) -> f64 {
    p.r.powi(n as i32 - 1) * (-(p.x * p.x + p.r * p.r) / 2.0).exp()
}

/// Gaussian-weighted area `∫ e^{-|X|²/2} dμ` of the hypersurface generated by
/// revolving the polyline, by the trapezoid rule in arc length.
pub fn weighted_area(points: &[Point], params: &ModelParams) -> f64 {
    let sum: f64 = points
        .windows(2)
        .map(|w| {
            0.5 * (area_density(w[0], params.n) + area_density(w[1], params.n)) * w[0].dist(w[1])
        })
        .sum();
    unit_sphere_area(params.n - 1) * sum
}

/// Unit tangents at the vertices: central differences, wrapping around for
/// closed polylines and one-sided at open ends.
fn vertex_tangents(points: &[Point]) -> Vec<(f64, f64)> {
    let m = points.len();
    let closed = is_closed(points);
    (0..m)
        .map(|i| {
            let (prev, next) = match (i, closed) {
                (0, true) => (points[m - 2], points[1]),
                (i, true) if i == m - 1 => (points[m - 2], points[1]),
                (0, false) => (points[0], points[1.min(m - 1)]),
                (i, false) if i == m - 1 => (points[m - 2], points[m - 1]),
                (i, _) => (points[i - 1], points[i + 1]),
            };
            let (dx, dr) = (next.x - prev.x, next.r - prev.r);
            let norm = dx.hypot(dr);
            if norm > 0.0 {
                (dx / norm, dr / norm)
            } else {
                (0.0, 0.0)
            }
        })
        .collect()
}

/// Gaussian-weighted volume `∫ ⟨X, N⟩ e^{-|X|²/2} dμ` against the normal
/// `N = (-r', x' α)` of the polyline's orientation.
pub fn weighted_volume(points: &[Point], params: &ModelParams) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let tangents = vertex_tangents(points);
    let integrand: Vec<f64> = points
        .iter()
        .zip(&tangents)
        .map(|(p, &(tx, tr))| (-p.x * tr + p.r * tx) * area_density(*p, params.n))
        .collect();
    let sum: f64 = points
        .windows(2)
        .zip(integrand.windows(2))
        .map(|(w, f)| 0.5 * (f[0] + f[1]) * w[0].dist(w[1]))
        .sum();
    unit_sphere_area(params.n - 1) * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{integrate_profile, SolverConfig};
    use std::f64::consts::{E, FRAC_PI_2, SQRT_2};

    fn params(n: u32, lambda: f64) -> ModelParams {
        ModelParams::new(n, lambda).unwrap()
    }

    fn state(x: f64, r: f64, theta: f64) -> ProfileState {
        ProfileState {
            s: 0.0,
            x,
            r,
            theta,
        }
    }

    #[test]
    fn mean_curvature_special_points() {
        let h = mean_curvature(&state(0.0, SQRT_2, PI), &params(2, 0.0)).unwrap();
        assert!((h - SQRT_2).abs() < 1e-15);
        let h = mean_curvature(&state(-1.0, 1.0, PI), &params(2, 0.0)).unwrap();
        assert!((h - 1.0).abs() < 1e-15);
        for n in [2, 3, 5] {
            let h = mean_curvature(&state(0.0, 2.0, FRAC_PI_2), &params(n, 0.0)).unwrap();
            assert!(h.abs() < 1e-15);
        }
        assert!(mean_curvature(&state(0.0, 0.0, 0.0), &params(2, 0.0)).is_err());
    }

    #[test]
    fn support_function_special_points() {
        assert!((support_function(&state(0.0, SQRT_2, PI)) + SQRT_2).abs() < 1e-15);
        assert!(support_function(&state(0.0, 3.7, FRAC_PI_2)).abs() < 1e-15);
        let a = (5f64.sqrt() - 1.0) / 2.0;
        assert!((support_function(&state(-2.0, a, PI)) + a).abs() < 1e-15);
    }

    #[test]
    fn residual_vanishes_on_sphere_and_cylinder_points() {
        let r = lambda_residual(&state(0.0, SQRT_2, PI), &params(2, 0.0)).unwrap();
        assert!(r.abs() < 1e-15);
        let a = (5f64.sqrt() - 1.0) / 2.0;
        let r = lambda_residual(&state(-3.0, a, PI), &params(2, 1.0)).unwrap();
        assert!(r.abs() < 1e-15);
        // with the geometric curvature of the actual curves
        let r =
            lambda_residual_with(&state(0.0, SQRT_2, PI), 1.0 / SQRT_2, &params(2, 0.0)).unwrap();
        assert!(r.abs() < 1e-15);
        let r = lambda_residual_with(&state(-3.0, a, PI), 0.0, &params(2, 1.0)).unwrap();
        assert!(r.abs() < 1e-15);
    }

    #[test]
    fn sphere_and_cylinder_radii() {
        assert!((sphere_radius(&params(2, 0.0)) - SQRT_2).abs() < 1e-15);
        assert!((sphere_radius(&params(2, 1.0)) - 1.0).abs() < 1e-15);
        assert!((cylinder_radius(&params(2, 0.0)) - 1.0).abs() < 1e-15);
        assert!((cylinder_radius(&params(5, 0.0)) - 2.0).abs() < 1e-15);
        assert!((cylinder_radius(&params(2, 1.0)) - 0.618_033_988_749_894_9).abs() < 1e-15);
        for n in [2, 3, 4, 5, 7] {
            for lambda in [0.0, 0.25, 1.0, 3.5] {
                let p = params(n, lambda);
                let a = sphere_radius(&p);
                assert!((a * a + lambda * a - f64::from(n)).abs() < 1e-13);
                let c = cylinder_radius(&p);
                assert!((c * c + lambda * c - f64::from(n - 1)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn unit_sphere_areas() {
        assert!((unit_sphere_area(1) - TAU).abs() < 1e-15);
        assert!((unit_sphere_area(2) - 4.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((unit_sphere_area(4) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn fd_weights_reproduce_polynomials() {
        let nodes = [0.0, 0.1, 0.25, 0.3, 0.7];
        let w = first_derivative_weights(0.2, &nodes);
        // exact for polynomials up to degree four
        for deg in 0..=4 {
            let d: f64 = nodes.iter().zip(&w).map(|(x, wi)| wi * x.powi(deg)).sum();
            let exact = if deg == 0 {
                0.0
            } else {
                f64::from(deg) * 0.2f64.powi(deg - 1)
            };
            assert!((d - exact).abs() < 1e-11, "deg {deg}: {d} vs {exact}");
        }
    }

    #[test]
    fn measured_curvature_of_circle() {
        let a = 1.7;
        let states: Vec<ProfileState> = (0..200)
            .map(|i| {
                let s = 1e-2 * i as f64;
                ProfileState {
                    s,
                    x: 0.0,
                    r: 1.0,
                    theta: s / a,
                }
            })
            .collect();
        for k in measured_curvature(&states, 2.5e-3) {
            assert!((k - 1.0 / a).abs() < 1e-11);
        }
    }

    #[test]
    fn shot_residual_is_small() {
        let curve = integrate_profile(0.1, &params(2, 1.0), &SolverConfig::default()).unwrap();
        assert_eq!(curve.outcome.kind, OutcomeKind::HitAxis);
        let samples = sample_curve(&curve).unwrap();
        assert_eq!(samples.len(), curve.states.len());
        assert!(
            max_abs_residual(&samples) <= 1e-8,
            "{}",
            max_abs_residual(&samples)
        );
    }

    #[test]
    fn reflected_reversed_curve_solves_the_same_equation() {
        // (x, θ) -> (-x, -θ) maps solutions to solutions traversed backwards.
        let p = params(3, 0.7);
        let curve = integrate_profile(0.4, &p, &SolverConfig::default()).unwrap();
        for st in curve.states.iter().step_by(97) {
            let k = curvature(st, &p).unwrap();
            let mirrored = ProfileState {
                s: -st.s,
                x: -st.x,
                r: st.r,
                theta: -st.theta,
            };
            assert!((curvature(&mirrored, &p).unwrap() - k).abs() < 1e-12);
            let flipped = ProfileState {
                x: -st.x,
                theta: PI - st.theta,
                ..*st
            };
            assert!(lambda_residual(&flipped, &p).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn vertical_tangent_is_a_maximum_of_x() {
        let p = params(2, 1.0);
        let curve = integrate_profile(0.2, &p, &SolverConfig::default()).unwrap();
        let idx = curve
            .states
            .windows(2)
            .position(|w| w[0].theta.cos() > 0.0 && w[1].theta.cos() <= 0.0)
            .expect("x' changes sign");
        let st = curve.states[idx];
        assert!(st.x > 0.0);
        let sin = st.theta.sin();
        let f2 = -(st.x * sin + p.lambda) / sin.powi(3);
        assert!(f2 < 0.0);
    }

    fn half_circle(a: f64, m: usize) -> Vec<Point> {
        (0..=m)
            .map(|i| {
                let t = PI * i as f64 / m as f64;
                Point::new(a * t.cos(), a * t.sin())
            })
            .collect()
    }

    #[test]
    fn weighted_area_of_sphere() {
        let a = SQRT_2;
        let pts = half_circle(a, 10_000);
        let area = weighted_area(&pts, &params(2, 0.0));
        let exact = 8.0 * PI / E;
        assert!(((area - exact) / exact).abs() < 1e-6, "{area} vs {exact}");
    }

    #[test]
    fn weighted_volume_of_sphere() {
        let a = SQRT_2;
        let pts = half_circle(a, 10_000);
        let p = params(2, 0.0);
        let vol = weighted_volume(&pts, &p);
        let exact = -a * 8.0 * PI / E;
        assert!(((vol - exact) / exact).abs() < 1e-6, "{vol} vs {exact}");
    }

    #[test]
    fn degenerate_and_planar_profiles() {
        let p = params(2, 0.0);
        let pinched = vec![Point::new(0.0, 1.0); 3];
        assert_eq!(weighted_area(&pinched, &p), 0.0);
        assert_eq!(weighted_volume(&pinched, &p), 0.0);
        let plane: Vec<Point> = (0..=100)
            .map(|i| Point::new(0.0, 0.05 * i as f64))
            .collect();
        assert!(weighted_volume(&plane, &p).abs() < 1e-15);
        assert!(weighted_area(&plane, &p) > 0.0);
    }

    #[test]
    fn joint_error_for_oblique_terminal_tangent() {
        let p = params(2, 1.0);
        let mut curve = integrate_profile(0.1, &p, &SolverConfig::default()).unwrap();
        let last = curve.states.len() - 1;
        curve.states[last].theta = 3.0 * PI / 4.0;
        curve.outcome.terminal.theta = 3.0 * PI / 4.0;
        curve.outcome.x_prime_terminal = (3.0 * PI / 4.0).cos();
        assert!(matches!(
            build_closed_profile(&curve, 1e-4),
            Err(Error::Joint(_))
        ));
    }

    #[test]
    fn figure_eight_half_profile_is_rejected() {
        // A synthetic "half profile" that crosses itself before returning to
        // the axis with a horizontal tangent.
        let p = params(2, 1.0);
        let raw = [
            (0.0, 1.0, 0.0),
            (1.0, 1.0, 0.5),
            (1.0, 2.0, 2.0),
            (0.5, 0.5, 2.5),
            (0.2, 1.5, 3.0),
            (0.0, 1.5, PI),
        ];
        let states: Vec<ProfileState> = raw
            .iter()
            .enumerate()
            .map(|(i, &(x, r, theta))| ProfileState {
                s: i as f64,
                x,
                r,
                theta,
            })
            .collect();
        let terminal = *states.last().unwrap();
        let curve = ProfileCurve {
            params: p,
            delta: 1.0,
            step: 1.0,
            states,
            outcome: crate::ode::ShotOutcome {
                kind: OutcomeKind::HitAxis,
                s1: terminal.s,
                terminal,
                x_prime_terminal: -1.0,
            },
        };
        assert!(matches!(
            build_closed_profile(&curve, 1e-4),
            Err(Error::Simplicity { .. })
        ));
    }

    #[test]
    fn miss_cannot_be_closed() {
        let p = params(2, 1.0);
        let curve = integrate_profile(1.0, &p, &SolverConfig::default()).unwrap();
        assert_eq!(curve.outcome.kind, OutcomeKind::HorizontalTangent);
        assert!(matches!(
            build_closed_profile(&curve, 1e-4),
            Err(Error::Joint(_))
        ));
    }
}
