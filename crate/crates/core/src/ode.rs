//! Profile-curve ODE and the fixed-step shooting integrator.
//!
//! A rotational hypersurface `X(s, α) = (x(s), r(s) α)` is described by its
//! profile curve in the upper half plane, parametrized by arc length. The
//! state is `(x, r, θ)` with tangent `(cos θ, sin θ)`, so unit speed holds by
//! construction and the system
//!
//! ```text
//! x' = cos θ,   r' = sin θ,   θ' = κ = x sin θ + ((n-1)/r - r) cos θ + λ
//! ```
//!
//! stays regular where the tangent is horizontal (`r' = 0`), which is exactly
//! where shots terminate.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Dimension and the constant λ in `⟨X, N⟩ + H = λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Hypersurface dimension; the ambient space is `R^{n+1}`.
    pub n: u32,
    pub lambda: f64,
}

impl ModelParams {
    pub fn new(n: u32, lambda: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!(
                "n must satisfy n >= 2 (got n = {n})"
            )));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::Domain(format!(
                "lambda must be finite and >= 0 (got {lambda})"
            )));
        }
        Ok(Self { n, lambda })
    }

    /// `n - 1` as a float, the coefficient of the `1/r` term.
    #[inline]
    pub fn sphere_factor(&self) -> f64 {
        f64::from(self.n - 1)
    }

    /// Largest initial height for which the shot starts out bending upwards:
    /// `(sqrt(λ² + 4(n-1)) + λ) / 2`.
    pub fn convexity_threshold(&self) -> f64 {
        let l = self.lambda;
        ((l * l + 4.0 * self.sphere_factor()).sqrt() + l) / 2.0
    }

    /// A-priori bound on the radius along a returning shot: `sqrt(n-1) + π/(2λ)`.
    pub fn radius_bound(&self) -> f64 {
        self.sphere_factor().sqrt() + self.axial_bound()
    }

    /// A-priori bound on the axial coordinate: `π/(2λ)`.
    pub fn axial_bound(&self) -> f64 {
        FRAC_PI_2 / self.lambda
    }
}

/// One point of the profile curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileState {
    pub s: f64,
    pub x: f64,
    pub r: f64,
    pub theta: f64,
}

impl ProfileState {
    /// Start of a shot: on the r-axis at height `delta`, tangent `(1, 0)`.
    pub fn initial(delta: f64) -> Self {
        Self {
            s: 0.0,
            x: 0.0,
            r: delta,
            theta: 0.0,
        }
    }

    #[inline]
    pub fn x_prime(&self) -> f64 {
        self.theta.cos()
    }

    #[inline]
    pub fn r_prime(&self) -> f64 {
        self.theta.sin()
    }

    fn from_vec(s: f64, y: &Vec3) -> Self {
        Self {
            s,
            x: y[0],
            r: y[1],
            theta: y[2],
        }
    }

    fn to_vec(self) -> Vec3 {
        [self.x, self.r, self.theta]
    }
}

type Vec3 = [f64; 3];

#[inline]
pub(crate) fn kappa(x: f64, r: f64, theta: f64, params: &ModelParams) -> f64 {
    let (sin, cos) = theta.sin_cos();
    x * sin + (params.sphere_factor() / r - r) * cos + params.lambda
}

/// Signed curvature `θ'` prescribed by the λ-hypersurface equation at `state`.
pub fn curvature(state: &ProfileState, params: &ModelParams) -> Result<f64> {
    if !(state.r > 0.0) {
        return Err(Error::Domain(format!(
            "curvature requires r > 0 (got r = {})",
            state.r
        )));
    }
    Ok(kappa(state.x, state.r, state.theta, params))
}

#[inline]
fn rhs(y: &Vec3, params: &ModelParams) -> Vec3 {
    let (sin, cos) = y[2].sin_cos();
    [cos, sin, kappa(y[0], y[1], y[2], params)]
}

/// One classical RK4 step of length `h`.
pub(crate) fn rk4_step(y: &Vec3, h: f64, params: &ModelParams) -> Vec3 {
    let axpy = |a: &Vec3, k: &Vec3, t: f64| [a[0] + t * k[0], a[1] + t * k[1], a[2] + t * k[2]];
    let k1 = rhs(y, params);
    let k2 = rhs(&axpy(y, &k1, 0.5 * h), params);
    let k3 = rhs(&axpy(y, &k2, 0.5 * h), params);
    let k4 = rhs(&axpy(y, &k3, h), params);
    let mut out = *y;
    for i in 0..3 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Step sizes, tolerances and search settings shared by every solver stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Fixed RK4 arc-length step.
    pub step: f64,
    /// Event localization tolerance in arc length.
    pub event_tol: f64,
    /// Arc-length budget; `None` selects a multiple of the a-priori diameter bound.
    pub max_arclength: Option<f64>,
    /// Radius below which a shot is declared singular.
    pub r_floor: f64,
    /// Explicit `(hit, miss)` bracket for δ*; `None` runs the grid scan.
    pub delta_bracket: Option<(f64, f64)>,
    pub bisect_tol: f64,
    /// Tolerance on `|x'(s1) + 1|` at the returned δ*.
    pub angle_tol: f64,
    pub residual_tol: f64,
    /// Absolute slack added to the a-priori bounds.
    pub bound_slack: f64,
    /// Number of geometric grid points in the bracket scan.
    pub scan_points: usize,
    /// `(profile, angular)` sample counts for mesh export.
    pub mesh_segments: (usize, usize),
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            step: 1e-4,
            event_tol: 1e-10,
            max_arclength: None,
            r_floor: 1e-8,
            delta_bracket: None,
            bisect_tol: 1e-10,
            angle_tol: 1e-4,
            residual_tol: 1e-8,
            bound_slack: 1e-6,
            scan_points: 64,
            mesh_segments: (256, 128),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("step", self.step),
            ("event_tol", self.event_tol),
            ("r_floor", self.r_floor),
            ("bisect_tol", self.bisect_tol),
            ("angle_tol", self.angle_tol),
            ("residual_tol", self.residual_tol),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive and finite (got {value})"
                )));
            }
        }
        if !(self.bound_slack.is_finite() && self.bound_slack >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "bound_slack must be non-negative (got {})",
                self.bound_slack
            )));
        }
        if let Some(budget) = self.max_arclength {
            if !(budget.is_finite() && budget > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "max_arclength must be positive (got {budget})"
                )));
            }
        }
        if self.scan_points == 0 {
            return Err(Error::InvalidConfig("scan_points must be >= 1".into()));
        }
        if self.mesh_segments.0 < 3 || self.mesh_segments.1 < 3 {
            return Err(Error::InvalidConfig(format!(
                "mesh_segments must both be >= 3 (got {:?})",
                self.mesh_segments
            )));
        }
        Ok(())
    }

    /// Integration budget: the configured value, or
    /// `50 (sqrt(n-1) + π/(2λ) + 1)` (the `π/(2λ)` term dropped for λ = 0).
    pub fn arclength_budget(&self, params: &ModelParams) -> f64 {
        self.max_arclength.unwrap_or_else(|| {
            let axial = if params.lambda > 0.0 {
                params.axial_bound()
            } else {
                0.0
            };
            50.0 * (params.sphere_factor().sqrt() + axial + 1.0)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OutcomeKind {
    /// x returned to 0: the curve reached the r-axis.
    HitAxis,
    /// The tangent became `(±1, 0)` while x > 0.
    HorizontalTangent,
    /// r dropped below the configured floor.
    RadialSingularity,
    /// The arc-length budget ran out.
    BudgetExhausted,
}

/// How a shot terminated, with the refined terminal state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotOutcome {
    pub kind: OutcomeKind,
    pub s1: f64,
    pub terminal: ProfileState,
    /// `cos θ(s1)`.
    pub x_prime_terminal: f64,
}

impl ShotOutcome {
    fn new(kind: OutcomeKind, terminal: ProfileState) -> Self {
        Self {
            kind,
            s1: terminal.s,
            terminal,
            x_prime_terminal: terminal.x_prime(),
        }
    }

    /// `r(s1)` for an axis hit, `x(s1)` for a horizontal tangent.
    pub fn extra(&self) -> Option<f64> {
        match self.kind {
            OutcomeKind::HitAxis => Some(self.terminal.r),
            OutcomeKind::HorizontalTangent => Some(self.terminal.x),
            _ => None,
        }
    }
}

/// A sampled shot: every accepted step plus the refined terminal state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub params: ModelParams,
    pub delta: f64,
    pub step: f64,
    pub states: Vec<ProfileState>,
    pub outcome: ShotOutcome,
}

impl ProfileCurve {
    pub fn s1(&self) -> f64 {
        self.outcome.s1
    }

    pub fn max_r(&self) -> f64 {
        self.states
            .iter()
            .map(|p| p.r)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_x(&self) -> f64 {
        self.states
            .iter()
            .map(|p| p.x)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Event {
    Axis,
    Horizontal,
    Floor,
}

impl Event {
    const ALL: [Event; 3] = [Event::Axis, Event::Horizontal, Event::Floor];

    fn value(self, y: &Vec3, r_floor: f64) -> f64 {
        match self {
            Event::Axis => y[0],
            Event::Horizontal => y[2].sin(),
            Event::Floor => y[1] - r_floor,
        }
    }

    fn crossed(self, g0: f64, y: &Vec3, r_floor: f64) -> bool {
        let finite = y.iter().all(|v| v.is_finite());
        match self {
            Event::Floor => !finite || y[1] <= r_floor,
            _ => {
                if !finite {
                    return false;
                }
                let g1 = self.value(y, r_floor);
                (g0 > 0.0 && g1 <= 0.0) || (g0 < 0.0 && g1 >= 0.0)
            }
        }
    }

    fn kind(self) -> OutcomeKind {
        match self {
            Event::Axis => OutcomeKind::HitAxis,
            Event::Horizontal => OutcomeKind::HorizontalTangent,
            Event::Floor => OutcomeKind::RadialSingularity,
        }
    }
}

/// Bisect the sub-step length in `(0, h]` at which `event` first fires,
/// re-integrating a single RK4 step from `y0` for each trial length.
fn locate(
    event: Event,
    y0: &Vec3,
    h: f64,
    y_full: Vec3,
    params: &ModelParams,
    config: &SolverConfig,
) -> (f64, Vec3) {
    let g0 = event.value(y0, config.r_floor);
    let (mut lo, mut hi) = (0.0_f64, h);
    let mut y_lo = *y0;
    let mut y_hi = y_full;
    for _ in 0..256 {
        let narrow = hi - lo <= config.event_tol;
        let small =
            event == Event::Floor || event.value(&y_hi, config.r_floor).abs() <= config.event_tol;
        if narrow && small {
            break;
        }
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let y_mid = rk4_step(y0, mid, params);
        if event.crossed(g0, &y_mid, config.r_floor) {
            hi = mid;
            y_hi = y_mid;
        } else {
            lo = mid;
            y_lo = y_mid;
        }
    }
    if y_hi.iter().all(|v| v.is_finite()) {
        (hi, y_hi)
    } else {
        (lo, y_lo)
    }
}

/// Shoot from `(0, delta)` with tangent `(1, 0)` until the first event.
pub fn integrate_profile(
    delta: f64,
    params: &ModelParams,
    config: &SolverConfig,
) -> Result<ProfileCurve> {
    config.validate()?;
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Domain(format!(
            "initial height delta must be positive (got {delta})"
        )));
    }
    let budget = config.arclength_budget(params);
    let step = config.step;

    let mut y: Vec3 = ProfileState::initial(delta).to_vec();
    let mut s = 0.0;
    let mut states = vec![ProfileState::from_vec(s, &y)];
    let mut accepted: u64 = 0;

    loop {
        let s_next = (accepted + 1) as f64 * step;
        let last = s_next >= budget;
        let (s_next, h) = if last {
            (budget, budget - s)
        } else {
            (s_next, s_next - s)
        };
        let y_next = rk4_step(&y, h, params);

        let mut first: Option<(f64, Vec3, Event)> = None;
        for event in Event::ALL {
            let g0 = event.value(&y, config.r_floor);
            if !event.crossed(g0, &y_next, config.r_floor) {
                continue;
            }
            let (tau, y_event) = locate(event, &y, h, y_next, params, config);
            if s + tau <= config.event_tol {
                continue;
            }
            if first.is_none_or(|(best, _, _)| tau < best) {
                first = Some((tau, y_event, event));
            }
        }

        if let Some((tau, y_event, event)) = first {
            let terminal = ProfileState::from_vec(s + tau, &y_event);
            states.push(terminal);
            return Ok(ProfileCurve {
                params: *params,
                delta,
                step,
                states,
                outcome: ShotOutcome::new(event.kind(), terminal),
            });
        }

        s = s_next;
        y = y_next;
        accepted += 1;
        let state = ProfileState::from_vec(s, &y);
        states.push(state);
        if last {
            return Ok(ProfileCurve {
                params: *params,
                delta,
                step,
                states,
                outcome: ShotOutcome::new(OutcomeKind::BudgetExhausted, state),
            });
        }
    }
}

/// Plain RK4 integration without events: `steps` steps of length `step`.
/// Returns `steps + 1` states including `initial`.
pub fn integrate_fixed(
    initial: ProfileState,
    params: &ModelParams,
    step: f64,
    steps: usize,
) -> Vec<ProfileState> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = initial.to_vec();
    out.push(initial);
    for k in 1..=steps {
        y = rk4_step(&y, step, params);
        out.push(ProfileState::from_vec(initial.s + k as f64 * step, &y));
    }
    out
}

/// Step ladder for [`integration_order_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderCheck {
    /// Steps on the coarsest level.
    pub coarse_steps: usize,
    /// Step ratio between consecutive levels.
    pub refinement: usize,
}

impl Default for OrderCheck {
    fn default() -> Self {
        Self {
            coarse_steps: 16,
            refinement: 2,
        }
    }
}

/// Observed convergence order of the integrator on the sub-arc `[0, s1/2]`
/// of the shot from `delta`: levels `h, h/q, h/q²` are compared against the
/// `h/q³` solution.
pub fn integration_order_check(
    delta: f64,
    params: &ModelParams,
    check: &OrderCheck,
) -> Result<f64> {
    if check.refinement < 2 {
        return Err(Error::InvalidConfig(format!(
            "refinement ratio must be >= 2 (got {}); identical steps carry no order information",
            check.refinement
        )));
    }
    if check.coarse_steps == 0 {
        return Err(Error::InvalidConfig("coarse_steps must be >= 1".into()));
    }
    let shot = integrate_profile(delta, params, &SolverConfig::default())?;
    let span = 0.5 * shot.s1();
    let initial = ProfileState::initial(delta);

    let finals: Vec<Vec3> = (0..4u32)
        .map(|level| {
            let steps = check.coarse_steps * check.refinement.pow(level);
            let path = integrate_fixed(initial, params, span / steps as f64, steps);
            path.last().copied().unwrap_or(initial).to_vec()
        })
        .collect();
    let reference = finals[3];
    let errors: Vec<f64> = finals[..3]
        .iter()
        .map(|y| {
            y.iter()
                .zip(reference.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    observed_order(&errors, check.refinement as f64)
}

/// Mean of `log(e_k / e_{k+1}) / log(ratio)` over consecutive error pairs.
pub fn observed_order(errors: &[f64], ratio: f64) -> Result<f64> {
    if !(ratio.is_finite() && ratio > 1.0) {
        return Err(Error::InvalidConfig(format!(
            "step ratio must exceed 1 (got {ratio})"
        )));
    }
    if errors.len() < 2 {
        return Err(Error::InvalidConfig(
            "need at least two error levels".into(),
        ));
    }
    if errors.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::Domain(format!(
            "errors must be positive and finite to define an order: {errors:?}"
        )));
    }
    let sum: f64 = errors
        .windows(2)
        .map(|w| (w[0] / w[1]).ln() / ratio.ln())
        .sum();
    Ok(sum / (errors.len() - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(n: u32, lambda: f64) -> ModelParams {
        ModelParams::new(n, lambda).unwrap()
    }

    #[test]
    fn curvature_on_cylinder_vanishes() {
        let state = ProfileState {
            s: 0.0,
            x: -1.0,
            r: 1.0,
            theta: PI,
        };
        let k = curvature(&state, &params(2, 0.0)).unwrap();
        assert!(k.abs() < 1e-15, "{k}");
    }

    #[test]
    fn curvature_at_sphere_top_is_inverse_radius() {
        let a = 2f64.sqrt();
        let state = ProfileState {
            s: 0.0,
            x: 0.0,
            r: a,
            theta: PI,
        };
        let k = curvature(&state, &params(2, 0.0)).unwrap();
        assert!((k - 1.0 / a).abs() < 1e-15);
    }

    #[test]
    fn curvature_direct_substitution() {
        let state = ProfileState {
            s: 0.0,
            x: 0.0,
            r: 0.5,
            theta: 0.0,
        };
        let k = curvature(&state, &params(2, 1.0)).unwrap();
        assert!((k - 2.5).abs() < 1e-15);
    }

    #[test]
    fn curvature_rejects_nonpositive_radius() {
        let state = ProfileState {
            s: 0.0,
            x: 0.0,
            r: 0.0,
            theta: 0.0,
        };
        assert!(matches!(
            curvature(&state, &params(2, 1.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn params_reject_n_below_two() {
        assert!(ModelParams::new(1, 1.0).is_err());
        assert!(ModelParams::new(2, -0.5).is_err());
    }

    #[test]
    fn invalid_config_and_delta_are_rejected() {
        let p = params(2, 1.0);
        let bad = SolverConfig {
            step: -1e-4,
            ..Default::default()
        };
        assert!(matches!(
            integrate_profile(0.1, &p, &bad),
            Err(Error::InvalidConfig(_))
        ));
        let bad = SolverConfig {
            event_tol: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            integrate_profile(0.1, &p, &bad),
            Err(Error::InvalidConfig(_))
        ));
        let cfg = SolverConfig::default();
        assert!(matches!(
            integrate_profile(0.0, &p, &cfg),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            integrate_profile(-0.1, &p, &cfg),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn small_delta_hits_axis() {
        let curve = integrate_profile(0.01, &params(2, 1.0), &SolverConfig::default()).unwrap();
        assert_eq!(curve.outcome.kind, OutcomeKind::HitAxis);
        assert!(curve.outcome.terminal.x.abs() <= 1e-10);
        // frozen from an independent adaptive (rtol 1e-11) reference integration
        assert!((curve.s1() - 0.412_538_492).abs() < 1e-6, "{}", curve.s1());
    }

    #[test]
    fn large_delta_misses_with_horizontal_tangent() {
        let p = params(2, 1.0);
        let delta = 0.95 * p.convexity_threshold();
        let curve = integrate_profile(delta, &p, &SolverConfig::default()).unwrap();
        assert_eq!(curve.outcome.kind, OutcomeKind::HorizontalTangent);
        assert!(curve.outcome.terminal.x > 0.0);
        assert!(curve.outcome.terminal.theta.sin().abs() <= 1e-10);
        assert!(curve.outcome.x_prime_terminal < 0.0);
    }

    #[test]
    fn tangent_angle_stays_in_open_upper_range() {
        let p = params(2, 1.0);
        for delta in [0.01, 0.1, 0.5, 1.2] {
            let curve = integrate_profile(delta, &p, &SolverConfig::default()).unwrap();
            let inner = &curve.states[1..curve.states.len() - 1];
            assert!(
                inner.iter().all(|st| st.theta > 0.0 && st.theta < PI),
                "delta {delta}"
            );
        }
    }

    #[test]
    fn budget_exhaustion_truncates_final_step() {
        let cfg = SolverConfig {
            max_arclength: Some(0.05),
            ..Default::default()
        };
        let curve = integrate_profile(0.3, &params(2, 1.0), &cfg).unwrap();
        assert_eq!(curve.outcome.kind, OutcomeKind::BudgetExhausted);
        assert_eq!(curve.s1(), 0.05);
    }

    #[test]
    fn radial_singularity_is_reported() {
        // Starting above the convexity threshold the curve bends down toward the axis.
        let p = params(2, 0.0);
        let cfg = SolverConfig {
            r_floor: 0.5,
            ..Default::default()
        };
        let curve = integrate_profile(3.0, &p, &cfg).unwrap();
        assert_eq!(
            curve.outcome.kind,
            OutcomeKind::RadialSingularity,
            "{:?}",
            curve.outcome
        );
        assert!(curve.outcome.terminal.r <= 0.5 + 1e-9);
    }

    #[test]
    fn no_state_beyond_terminal() {
        let curve = integrate_profile(0.2, &params(3, 0.5), &SolverConfig::default()).unwrap();
        let s1 = curve.s1();
        assert!(curve.states.iter().all(|st| st.s <= s1));
        assert_eq!(curve.states.last().unwrap().s, s1);
        assert!(curve.states.windows(2).all(|w| w[1].s > w[0].s));
    }

    #[test]
    fn replay_is_bitwise_identical() {
        let p = params(2, 1.0);
        let cfg = SolverConfig::default();
        let a = integrate_profile(0.3, &p, &cfg).unwrap();
        let b = integrate_profile(0.3, &p, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn initial_curvature_positive_below_threshold() {
        for (n, lambda) in [(2, 0.0), (2, 1.0), (3, 0.5), (5, 2.0)] {
            let p = params(n, lambda);
            let top = p.convexity_threshold();
            for frac in [1e-3, 0.1, 0.5, 0.99] {
                let k = curvature(&ProfileState::initial(frac * top), &p).unwrap();
                assert!(k > 0.0, "n={n} lambda={lambda} frac={frac}");
            }
        }
    }

    #[test]
    fn unit_speed_identity_by_finite_differences() {
        // x'x'' + r'r'' = 0 checked with central differences of the stored tangent.
        // The difference quotient carries an O(h² (κ³ + 3κκ')) truncation error.
        let curve = integrate_profile(0.3, &params(2, 1.0), &SolverConfig::default()).unwrap();
        let h = curve.step;
        let states = &curve.states[..curve.states.len() - 1];
        for w in states.windows(3) {
            let (a, b, c) = (w[0], w[1], w[2]);
            let xpp = (c.theta.cos() - a.theta.cos()) / (2.0 * h);
            let rpp = (c.theta.sin() - a.theta.sin()) / (2.0 * h);
            let dot = b.x_prime() * xpp + b.r_prime() * rpp;
            assert!(dot.abs() <= 100.0 * h * h, "{dot} at s = {}", b.s);
        }
    }

    #[test]
    fn observed_order_is_four() {
        for (n, lambda, delta) in [(2, 1.0, 0.3), (3, 0.5, 0.2)] {
            let p = observed_order_for(n, lambda, delta);
            assert!((3.5..=4.5).contains(&p), "n={n} lambda={lambda}: p = {p}");
        }
    }

    fn observed_order_for(n: u32, lambda: f64, delta: f64) -> f64 {
        integration_order_check(delta, &params(n, lambda), &OrderCheck::default()).unwrap()
    }

    #[test]
    fn identical_steps_give_no_order() {
        let check = OrderCheck {
            coarse_steps: 16,
            refinement: 1,
        };
        assert!(integration_order_check(0.3, &params(2, 1.0), &check).is_err());
        assert!(observed_order(&[1e-3, 1e-4], 1.0).is_err());
        assert!(observed_order(&[1e-3, 0.0], 2.0).is_err());
        let p = observed_order(&[16.0, 1.0, 1.0 / 16.0], 2.0).unwrap();
        assert!((p - 4.0).abs() < 1e-12);
    }
}
