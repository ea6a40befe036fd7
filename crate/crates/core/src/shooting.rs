//! Shot classification, the bracketed search for δ*, and the a-priori bound
//! checks every candidate curve must satisfy.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_closed_profile, max_abs_residual, sample_curve, ClosedProfile};
use crate::ode::{
    integrate_profile, ModelParams, OutcomeKind, ProfileCurve, ShotOutcome, SolverConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    Hit,
    Miss,
    Indeterminate,
}

pub fn classify_shot(outcome: &ShotOutcome) -> Classification {
    match outcome.kind {
        OutcomeKind::HitAxis => Classification::Hit,
        OutcomeKind::HorizontalTangent => Classification::Miss,
        OutcomeKind::RadialSingularity | OutcomeKind::BudgetExhausted => {
            Classification::Indeterminate
        }
    }
}

fn shoot(
    delta: f64,
    params: &ModelParams,
    config: &SolverConfig,
) -> Result<(Classification, ProfileCurve)> {
    let curve = integrate_profile(delta, params, config)?;
    Ok((classify_shot(&curve.outcome), curve))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub delta: f64,
    pub class: Classification,
}

/// Result of the geometric δ grid scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketScan {
    pub samples: Vec<ScanSample>,
    /// Every adjacent `(hit, miss)` pair on the grid, lowest first.
    pub transitions: Vec<(f64, f64)>,
    /// More than one Hit→Miss transition, or a Miss below a Hit.
    pub anomaly: bool,
}

impl BracketScan {
    pub fn lowest(&self) -> Option<(f64, f64)> {
        self.transitions.first().copied()
    }
}

/// `points` geometrically spaced values from `1e-3 · top` to `top`, where
/// `top` is the convexity threshold.
pub fn scan_grid(params: &ModelParams, points: usize) -> Vec<f64> {
    let top = params.convexity_threshold();
    let bottom = 1e-3 * top;
    match points {
        0 => Vec::new(),
        1 => vec![top],
        _ => {
            let ratio = (top / bottom).ln() / (points - 1) as f64;
            (0..points)
                .map(|i| {
                    if i == points - 1 {
                        top
                    } else {
                        bottom * (ratio * i as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Classify every grid value. Shots are independent, so with `jobs > 1` they
/// run on a dedicated thread pool; the result does not depend on `jobs`.
pub fn scan_bracket(
    params: &ModelParams,
    config: &SolverConfig,
    jobs: usize,
) -> Result<BracketScan> {
    let grid = scan_grid(params, config.scan_points);
    let classify = |delta: &f64| -> Result<ScanSample> {
        let curve = integrate_profile(*delta, params, config)?;
        Ok(ScanSample {
            delta: *delta,
            class: classify_shot(&curve.outcome),
        })
    };
    let samples: Vec<ScanSample> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        pool.install(|| grid.par_iter().map(classify).collect::<Result<Vec<_>>>())?
    } else {
        grid.iter().map(classify).collect::<Result<Vec<_>>>()?
    };

    let classified: Vec<&ScanSample> = samples
        .iter()
        .filter(|s| s.class != Classification::Indeterminate)
        .collect();
    let transitions: Vec<(f64, f64)> = classified
        .windows(2)
        .filter(|w| w[0].class == Classification::Hit && w[1].class == Classification::Miss)
        .map(|w| (w[0].delta, w[1].delta))
        .collect();
    let back_transitions = classified
        .windows(2)
        .filter(|w| w[0].class == Classification::Miss && w[1].class == Classification::Hit)
        .count();
    let anomaly = transitions.len() > 1 || back_transitions > 0;
    Ok(BracketScan {
        samples,
        transitions,
        anomaly,
    })
}

/// Lowest `(hit, miss)` pair on the scan grid.
pub fn establish_bracket(params: &ModelParams, config: &SolverConfig) -> Result<(f64, f64)> {
    require_positive_lambda(params)?;
    let scan = scan_bracket(params, config, 1)?;
    scan.lowest().ok_or_else(|| no_transition(&scan))
}

fn no_transition(scan: &BracketScan) -> Error {
    let hits = scan
        .samples
        .iter()
        .filter(|s| s.class == Classification::Hit)
        .count();
    let misses = scan
        .samples
        .iter()
        .filter(|s| s.class == Classification::Miss)
        .count();
    Error::Bracket(format!(
        "no Hit->Miss transition on a {}-point grid ({hits} hits, {misses} misses)",
        scan.samples.len()
    ))
}

fn require_positive_lambda(params: &ModelParams) -> Result<()> {
    if params.lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "torus search requires lambda > 0 (got {})",
            params.lambda
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub measured: f64,
    pub limit: f64,
    /// Tolerance added to `limit` when deciding `passed`.
    pub slack: f64,
    pub passed: bool,
}

impl BoundCheck {
    fn at_most(measured: f64, limit: f64, slack: f64) -> Self {
        Self {
            measured,
            limit,
            slack,
            passed: measured <= limit + slack,
        }
    }
}

/// Pass/fail record of the a-priori bounds on one shot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `max r ≤ sqrt(n-1) + π/(2λ) + slack`.
    pub max_r: BoundCheck,
    /// `max x ≤ π/(2λ) + slack`.
    pub max_x: BoundCheck,
    /// `r` strictly increasing on `(0, s1)`.
    pub radius_increasing: bool,
    /// Number of sampled pairs where r fails to increase.
    pub radius_violations: usize,
    /// Sign changes of `x'` on `(0, s1)`; at most one passes.
    pub x_prime_sign_changes: usize,
    pub single_turn: bool,
}

impl BoundReport {
    pub fn all_passed(&self) -> bool {
        self.max_r.passed && self.max_x.passed && self.radius_increasing && self.single_turn
    }
}

/// Check the radius and axial bounds, radial monotonicity and the single
/// turning point of x along `curve`.
pub fn verify_bounds(curve: &ProfileCurve, params: &ModelParams, slack: f64) -> BoundReport {
    let max_r = BoundCheck::at_most(curve.max_r(), params.radius_bound(), slack);
    let max_x = BoundCheck::at_most(curve.max_x(), params.axial_bound(), slack);

    let radius_violations = curve
        .states
        .windows(2)
        .filter(|w| !(w[1].r > w[0].r))
        .count();

    let mut sign_changes = 0;
    let mut last_sign = 0i8;
    for st in &curve.states {
        let c = st.x_prime();
        let sign = if c > 0.0 {
            1
        } else if c < 0.0 {
            -1
        } else {
            0
        };
        if sign != 0 {
            if last_sign != 0 && sign != last_sign {
                sign_changes += 1;
            }
            last_sign = sign;
        }
    }

    BoundReport {
        max_r,
        max_x,
        radius_increasing: radius_violations == 0,
        radius_violations,
        x_prime_sign_changes: sign_changes,
        single_turn: sign_changes <= 1,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectionStep {
    pub delta: f64,
    pub class: Classification,
}

/// The constructed λ-torus profile and its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusSolution {
    pub delta_star: f64,
    pub r_star: f64,
    pub s1: f64,
    /// `|x'(s1) + 1|` at δ*.
    pub terminal_tangent_gap: f64,
    pub half_profile: ProfileCurve,
    pub closed_profile: ClosedProfile,
    pub residual_max: f64,
    pub bound_report: BoundReport,
    pub initial_bracket: (f64, f64),
    pub bracket_width: f64,
    pub history: Vec<BisectionStep>,
    pub scan: Option<BracketScan>,
}

/// Bisect on Hit/Miss between a Hit and a Miss initial height until the
/// bracket is narrower than `bisect_tol`, then assemble the closed profile
/// from the final Hit shot.
pub fn find_delta_star(params: &ModelParams, config: &SolverConfig) -> Result<TorusSolution> {
    find_delta_star_with_jobs(params, config, 1)
}

pub fn find_delta_star_with_jobs(
    params: &ModelParams,
    config: &SolverConfig,
    jobs: usize,
) -> Result<TorusSolution> {
    config.validate()?;
    require_positive_lambda(params)?;

    let (mut lo, mut hi, scan) = match config.delta_bracket {
        Some((lo, hi)) => {
            if !(lo < hi) {
                return Err(Error::Bracket(format!("empty bracket ({lo}, {hi})")));
            }
            (lo, hi, None)
        }
        None => {
            let scan = scan_bracket(params, config, jobs)?;
            let (lo, hi) = scan.lowest().ok_or_else(|| no_transition(&scan))?;
            (lo, hi, Some(scan))
        }
    };
    let initial_bracket = (lo, hi);

    let (lo_class, mut best) = shoot(lo, params, config)?;
    let (hi_class, hi_curve) = shoot(hi, params, config)?;
    for (delta, class, curve) in [(lo, lo_class, &best), (hi, hi_class, &hi_curve)] {
        if class == Classification::Indeterminate {
            return Err(Error::Indeterminate {
                delta,
                kind: curve.outcome.kind,
            });
        }
    }
    if lo_class == hi_class {
        return Err(Error::Bracket(format!(
            "both ends classify as {lo_class:?} (delta_lo = {lo}, delta_hi = {hi})"
        )));
    }
    if lo_class != Classification::Hit {
        return Err(Error::Bracket(format!(
            "lower end must hit the axis and upper end miss it (got {lo_class:?} at {lo}, {hi_class:?} at {hi})"
        )));
    }

    let mut history = Vec::new();
    while hi - lo > config.bisect_tol {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let (class, curve) = shoot(mid, params, config)?;
        history.push(BisectionStep { delta: mid, class });
        match class {
            Classification::Hit => {
                lo = mid;
                best = curve;
            }
            Classification::Miss => hi = mid,
            Classification::Indeterminate => {
                return Err(Error::Indeterminate {
                    delta: mid,
                    kind: curve.outcome.kind,
                });
            }
        }
    }

    let gap = (best.outcome.x_prime_terminal + 1.0).abs();
    if gap > config.angle_tol {
        return Err(Error::NoConvergence {
            delta: lo,
            achieved: gap,
            angle_tol: config.angle_tol,
        });
    }

    let closed_profile = build_closed_profile(&best, config.angle_tol)?;
    let samples = sample_curve(&best)?;
    let bound_report = verify_bounds(&best, params, config.bound_slack);

    Ok(TorusSolution {
        delta_star: lo,
        r_star: best.outcome.terminal.r,
        s1: best.s1(),
        terminal_tangent_gap: gap,
        residual_max: max_abs_residual(&samples),
        bound_report,
        closed_profile,
        half_profile: best,
        initial_bracket,
        bracket_width: hi - lo,
        history,
        scan,
    })
}
