//! Small-δ rescaled system near the r-axis.
//!
//! With `ξ(t) = x(δt)/δ` and `ρ(t) = (r(δt) - δ)/δ` the profile equations
//! become, up to `O(δ)` terms,
//!
//! ```text
//! ξ' = cos φ,   ρ' = sin φ,   φ' = (n-1) cos φ / (1 + ρ)
//! ```
//!
//! which conserves `cos²φ (1+ρ)^{2(n-1)} = 1` from the initial data
//! `ξ = ρ = φ = 0`.
//!
//! The angle is carried as its complement `ψ = π/2 - φ`: `φ` tends to `π/2`,
//! and `cos φ = sin ψ` keeps full relative precision only in that form.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::ode::{integrate_fixed, ModelParams, ProfileState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitState {
    pub t: f64,
    pub xi: f64,
    pub rho: f64,
    /// `π/2 - φ`.
    pub psi: f64,
}

impl LimitState {
    pub fn phi(&self) -> f64 {
        FRAC_PI_2 - self.psi
    }

    /// `sin φ`.
    pub fn slope(&self) -> f64 {
        self.psi.cos()
    }
}

type Vec3 = [f64; 3];

fn rhs(y: &Vec3, m: f64) -> Vec3 {
    let (sin, cos) = y[2].sin_cos();
    [sin, cos, -m * sin / (1.0 + y[1])]
}

fn rk4_step(y: &Vec3, h: f64, m: f64) -> Vec3 {
    let axpy = |a: &Vec3, k: &Vec3, t: f64| [a[0] + t * k[0], a[1] + t * k[1], a[2] + t * k[2]];
    let k1 = rhs(y, m);
    let k2 = rhs(&axpy(y, &k1, 0.5 * h), m);
    let k3 = rhs(&axpy(y, &k2, 0.5 * h), m);
    let k4 = rhs(&axpy(y, &k3, h), m);
    let mut out = *y;
    for i in 0..3 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Integrate the limit system from the origin with fixed RK4 steps; the last
/// step is shortened to land on `t_end`.
pub fn integrate_limit(n: u32, t_end: f64, step: f64) -> Result<Vec<LimitState>> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "n must satisfy n >= 2 (got n = {n})"
        )));
    }
    if !(t_end.is_finite() && t_end > 0.0 && step.is_finite() && step > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "t_end and step must be positive (got t_end = {t_end}, step = {step})"
        )));
    }
    let m = f64::from(n - 1);
    let steps = (t_end / step).ceil() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let mut y: Vec3 = [0.0, 0.0, FRAC_PI_2];
    let mut t = 0.0;
    out.push(LimitState {
        t,
        xi: 0.0,
        rho: 0.0,
        psi: FRAC_PI_2,
    });
    for k in 1..=steps {
        let t_next = if k == steps { t_end } else { k as f64 * step };
        y = rk4_step(&y, t_next - t, m);
        t = t_next;
        if !(y[1] > -1.0) {
            return Err(Error::Domain(format!("rho left (-1, inf) at t = {t}")));
        }
        out.push(LimitState {
            t,
            xi: y[0],
            rho: y[1],
            psi: y[2],
        });
    }
    Ok(out)
}

/// `cos²φ (1+ρ)^{2(n-1)}`, identically 1 on exact solutions.
pub fn first_integral(state: &LimitState, n: u32) -> f64 {
    let c = state.psi.sin();
    c * c * (1.0 + state.rho).powi(2 * (n as i32 - 1))
}

/// Express a full-system state in the rescaled variables of height `delta`.
pub fn rescale(state: &ProfileState, delta: f64) -> LimitState {
    LimitState {
        t: state.s / delta,
        xi: state.x / delta,
        rho: (state.r - delta) / delta,
        psi: FRAC_PI_2 - state.theta,
    }
}

/// Largest pointwise difference in `(ξ, ρ, φ)` between two trajectories
/// sampled on the same grid.
pub fn trajectory_deviation(a: &[LimitState], b: &[LimitState]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| {
            (p.xi - q.xi)
                .abs()
                .max((p.rho - q.rho).abs())
                .max((p.psi - q.psi).abs())
        })
        .fold(0.0, f64::max)
}

/// Integrate the full system from height `delta` up to `s = δ t_end` with
/// step `δ t_step`, rescale it, and return its maximum deviation from the
/// limit trajectory integrated with step `t_step`. The two runs share the
/// same RK4 grid in `t`.
pub fn compare_with_full_system(
    delta: f64,
    params: &ModelParams,
    t_end: f64,
    t_step: f64,
) -> Result<f64> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Domain(format!(
            "delta must be positive (got {delta})"
        )));
    }
    let steps = (t_end / t_step).round() as usize;
    if steps == 0 || ((steps as f64) * t_step - t_end).abs() > 1e-9 * t_end {
        return Err(Error::InvalidConfig(format!(
            "t_end = {t_end} must be a positive multiple of t_step = {t_step}"
        )));
    }
    let limit = integrate_limit(params.n, t_end, t_step)?;
    let full = integrate_fixed(ProfileState::initial(delta), params, delta * t_step, steps);
    if full.iter().any(|s| !(s.r > 0.0) || !s.theta.is_finite()) {
        return Err(Error::Domain(format!(
            "full system left r > 0 for delta = {delta}"
        )));
    }
    let rescaled: Vec<LimitState> = full.iter().map(|s| rescale(s, delta)).collect();
    Ok(trajectory_deviation(&rescaled, &limit))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteepeningReport {
    /// Rescaled time at which the limit system reaches `sin φ = target`.
    pub t_target: f64,
    /// `r'(T δ)` on the full system.
    pub r_prime: f64,
}

/// Find `T` with `sin φ(T) = target_sin` on the limit system, then measure
/// `r'` of the full shot from `delta` at `s = T δ`.
pub fn steepening_check(
    delta: f64,
    params: &ModelParams,
    target_sin: f64,
    t_step: f64,
) -> Result<SteepeningReport> {
    if !(0.0 < target_sin && target_sin < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "target must lie in (0, 1) (got {target_sin})"
        )));
    }
    let mut horizon = 8.0;
    let traj = loop {
        let traj = integrate_limit(params.n, horizon, t_step)?;
        if traj.last().is_some_and(|s| s.slope() >= target_sin) {
            break traj;
        }
        horizon *= 2.0;
        if horizon > 1e4 {
            return Err(Error::Domain(
                "limit system never reaches the target slope".into(),
            ));
        }
    };
    let k = traj
        .iter()
        .position(|s| s.slope() >= target_sin)
        .unwrap_or(traj.len() - 1);
    let t_target = traj[k].t;
    let full = integrate_fixed(ProfileState::initial(delta), params, delta * t_step, k);
    let last = full.last().copied().unwrap_or(ProfileState::initial(delta));
    Ok(SteepeningReport {
        t_target,
        r_prime: last.r_prime(),
    })
}
