//! The decision layer: net growth to the first impulse, cycle growth, the
//! critical drain fraction, impulse counts, the minimum inoculum, and
//! outcome prediction.

use crate::batch::ChordFns;
use crate::error::{Error, Result};
use crate::model::{
    classify, project_to_threshold, require_reachable, Chord, ModelParams, ReactorState,
    RegionGeometry, RegionLabel,
};
use crate::quad::{self, QuadratureOptions};

/// Net change in biomass from `(s1, s2)` to the first threshold hit,
/// independent of the starting biomass level.
///
/// Negative values mean the culture shrinks on the way to the threshold; a
/// start needs more inoculum than that loss to get there at all.
pub fn net_growth(p: &ModelParams, q: &QuadratureOptions, s1: f64, s2: f64) -> Result<f64> {
    let v = require_reachable(p, s1, s2)?;
    if v <= p.v_corner() {
        // The chord lands on the horizontal threshold segment; integrate
        // over s2.
        let (a, b) = (p.s2_bar(), s2);
        if b - a <= f64::EPSILON * b.abs().max(1.0) {
            return Ok(0.0);
        }
        let s1_on_chord = move |w: f64| s1 + p.r12() * (w - s2);
        let integrand = |w: f64| {
            1.0 - p.death_rate() / p.f1().eval(s1_on_chord(w)).min(p.f2().eval(w))
        };
        let switch = |w: f64| p.f1().eval(s1_on_chord(w)) - p.f2().eval(w);
        let kinks = quad::sign_change_roots(&switch, a, b, 64);
        Ok(p.y2() * quad::integrate_split(&integrand, a, b, &kinks, q)?)
    } else {
        // Vertical landing; integrate over s1.
        let (a, b) = (p.s1_bar(), s1);
        if b - a <= f64::EPSILON * b.abs().max(1.0) {
            return Ok(0.0);
        }
        let fns = ChordFns::new(p, Chord::through(p, s1, s2));
        let kinks = fns.kink_roots(a, b);
        let integrand = |w: f64| fns.net_growth_integrand(w);
        Ok(p.y1() * quad::integrate_split(&integrand, a, b, &kinks, q)?)
    }
}

/// Net growth over one refill chord: the batch run from the post-impulse
/// locus down to the point `(s1_bar, landing_s2)` of the vertical threshold
/// segment, integrated in offset coordinates from the landing so that
/// near-axis landings keep full relative precision.
fn refill_chord_growth(
    p: &ModelParams,
    q: &QuadratureOptions,
    r: f64,
    landing_s2: f64,
) -> Result<f64> {
    let a = p.s1_bar();
    let width = p.s1_bar_post_at(r) - a;
    if width <= f64::EPSILON * a.max(1.0) {
        return Ok(0.0);
    }
    let r21 = p.r21();
    let d = p.death_rate();
    let growth = |u: f64| p.f1().eval(a + u).min(p.f2().eval(landing_s2 + r21 * u));
    let integrand = |u: f64| 1.0 - d / growth(u);
    let switch = |u: f64| p.f1().eval(a + u) - p.f2().eval(landing_s2 + r21 * u);
    let kinks = quad::sign_change_roots(&switch, 0.0, width, 64);
    Ok(p.y1() * quad::integrate_split(&integrand, 0.0, width, &kinks, q)?)
}

/// Net biomass change over the limiting cycle at drain fraction `r`: the
/// batch run from the post-impulse image of the invariant threshold point
/// back to that point.
///
/// Positive cycle growth is necessary and sufficient for a periodic orbit.
pub fn cycle_growth(p: &ModelParams, q: &QuadratureOptions, r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidParameter(format!(
            "drain fraction must lie in [0, 1], got {r}"
        )));
    }
    if !p.input_reaches_threshold() {
        return Err(Error::InputUnreachable);
    }
    refill_chord_growth(p, q, r, p.invariant_s2())
}

/// Largest drain fraction below which the cycle growth stays nonpositive.
///
/// Cycle growth is nonpositive on `(0, r*]` and positive on `(r*, 1]`; the
/// returned value carries an absolute tolerance of 1e-8. Errors with
/// [`Error::NoViableFraction`] when even a full drain gives no growth.
pub fn critical_drain(p: &ModelParams, q: &QuadratureOptions) -> Result<f64> {
    if !p.input_reaches_threshold() {
        return Err(Error::InputUnreachable);
    }
    let g = RegionGeometry::affine(p)?;
    // When both break-even levels sit below the invariant threshold point
    // the integrand is positive over the whole cycle for every r.
    if g.lambda1.at_most(p.s1_bar()) && g.lambda2.at_most(p.invariant_s2()) {
        return Ok(0.0);
    }
    let mu1 = cycle_growth(p, q, 1.0)?;
    if mu1 <= 0.0 {
        return Err(Error::NoViableFraction { mu1 });
    }
    // A coarse scan brackets the last sign change; cycle growth is
    // continuous but not proven unimodal, so the grid guards against a
    // missed crossing at this resolution.
    let n = 200;
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut found = false;
    for i in 1..=n {
        let r = i as f64 / (n + 1) as f64;
        if cycle_growth(p, q, r)? > 0.0 {
            hi = r;
            found = true;
            break;
        }
        lo = r;
    }
    if !found {
        // Positive only beyond the last grid point.
        hi = 1.0;
    }
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        if cycle_growth(p, q, mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Complete the affine geometry with the quadrature-dependent quantities:
/// cycle growth at the instance drain fraction, the lower edge of the entry
/// band, and the impulse-count bound.
pub fn region_geometry(p: &ModelParams, q: &QuadratureOptions) -> Result<RegionGeometry> {
    let mut g = RegionGeometry::affine(p)?;
    if !p.input_reaches_threshold() {
        return Ok(g);
    }
    let mu = cycle_growth(p, q, p.drain_fraction())?;
    g.cycle_growth = Some(mu);
    if mu <= 0.0 {
        return Ok(g);
    }
    // Net growth of the lifted cycle as a function of the landing height on
    // the vertical threshold segment. Positive at the invariant point (it
    // equals the cycle growth there) and arbitrarily negative near zero, so
    // a bisection bracket exists whenever the edge is representable. Every
    // landing in the search range lifts to the vertical post-impulse
    // segment, so the integral is the refill chord anchored at the exact
    // landing height; the quasi-singular spike near the axis needs the
    // deeper subdivision budget.
    let q_edge = q.with_max_subdivisions(q.max_subdivisions.max(4000));
    let lifted_growth =
        |s2: f64| -> Result<f64> { refill_chord_growth(p, &q_edge, p.drain_fraction(), s2) };
    let hat = p.invariant_s2();
    let mut lo = hat * 0.5;
    let mut capped = false;
    let mut tries = 0;
    while lifted_growth(lo)? > 0.0 {
        lo *= 0.5;
        tries += 1;
        if tries > 200 {
            // The true edge underflows f64: net growth stays positive down
            // to ~1e-61 of the threshold, so the entry band effectively
            // spans the whole vertical segment.
            capped = true;
            break;
        }
    }
    let s2_sharp = if capped {
        lo
    } else {
        let mut hi = hat;
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if lifted_growth(mid)? > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    g.entry_s2_lower = Some(s2_sharp);
    g.entry_v_upper = Some(p.v(p.s1_bar(), s2_sharp));
    g.impulse_bound = Some(
        count_for_v(p, &g, g.v_low_edge).max(count_for_v(p, &g, g.v_high_edge)),
    );
    Ok(g)
}

/// Impulse count needed to bring a chord level `v` into the entry band.
fn count_for_v(p: &ModelParams, g: &RegionGeometry, v: f64) -> u32 {
    let v_upper = g
        .entry_v_upper
        .expect("entry band requires positive cycle growth");
    if v > g.entry_v_lower && v < v_upper {
        return 1;
    }
    let shrink = -(1.0 - p.drain_fraction()).ln();
    let ratio = if v <= g.entry_v_lower {
        v / g.entry_v_lower
    } else {
        v / v_upper
    };
    let n = (ratio.ln() / shrink).ceil();
    if n < 1.0 {
        1
    } else {
        n as u32
    }
}

fn require_entry_band(p: &ModelParams, g: &RegionGeometry) -> Result<()> {
    if g.entry_v_upper.is_none() {
        return Err(Error::NoPeriodicOrbit {
            r: p.drain_fraction(),
            mu: g.cycle_growth.unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Number of impulses before the trajectory from `(s1, s2)` first lands in
/// the entry band (1 when it already starts there).
pub fn entry_count(
    p: &ModelParams,
    g: &RegionGeometry,
    s1: f64,
    s2: f64,
) -> Result<u32> {
    require_entry_band(p, g)?;
    let v = require_reachable(p, s1, s2)?;
    Ok(count_for_v(p, g, v))
}

/// Upper bound on [`entry_count`] over the whole reachable region.
pub fn impulse_bound(p: &ModelParams, g: &RegionGeometry) -> Result<u32> {
    require_entry_band(p, g)?;
    Ok(count_for_v(p, g, g.v_low_edge).max(count_for_v(p, g, g.v_high_edge)))
}

/// Least starting biomass from which the run survives every batch phase up
/// to entering the entry band; any larger inoculum converges to the
/// periodic orbit.
pub fn min_inoculum(
    p: &ModelParams,
    g: &RegionGeometry,
    q: &QuadratureOptions,
    s1: f64,
    s2: f64,
) -> Result<f64> {
    let n = entry_count(p, g, s1, s2)?;
    let inv = 1.0 / (1.0 - p.drain_fraction());
    let mut point = (s1, s2);
    let mut weight = 1.0;
    let mut partial = 0.0;
    let mut worst = f64::INFINITY;
    for k in 1..=n {
        partial += weight * net_growth(p, q, point.0, point.1)?;
        worst = worst.min(partial);
        if k < n {
            let hit = project_to_threshold(p, point.0, point.1)?;
            point = p.impulse_point(hit.0, hit.1);
            weight *= inv;
        }
    }
    Ok(-worst)
}

/// Predicted long-run outcome of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    ConvergesToPeriodicOrbit,
    /// At most the given number of impulses occur (when a bound is known).
    FailsFiniteImpulses { max_impulses: Option<u32> },
    /// Impulses may continue but the time between them grows without bound.
    FailsUnboundedCycleTime,
    NoImpulse,
}

/// Which clause of the outcome trichotomy applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionReason {
    StartUnreachable,
    StartOnMarginalLine,
    InputUnreachable,
    CycleGrowthNegative,
    CycleGrowthZero,
    BelowMinimumInoculum,
    AboveMinimumInoculum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomePrediction {
    pub verdict: Verdict,
    pub reason: PredictionReason,
    /// Minimum inoculum for the (post-initial-impulse) start, when defined.
    pub x_threshold: Option<f64>,
    /// Impulses needed to reach the entry band, when defined.
    pub entry_count: Option<u32>,
    /// Immediate impulses applied at t = 0 for starts at or below the
    /// thresholds.
    pub initial_impulses: u32,
    /// Set when the inoculum sits within 1e-6 of the threshold; the strict
    /// comparison is then numerically indeterminate.
    pub marginal: bool,
}

/// Apply the outcome trichotomy to an initial state.
pub fn predict_outcome(
    p: &ModelParams,
    g: &RegionGeometry,
    q: &QuadratureOptions,
    state: ReactorState,
) -> Result<OutcomePrediction> {
    if state.s1 < 0.0 || state.s2 < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "initial concentrations must be nonnegative, got ({}, {})",
            state.s1, state.s2
        )));
    }
    if !(state.x > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "initial biomass must be positive, got {}",
            state.x
        )));
    }
    // Starts at or below the thresholds trigger immediate impulses until the
    // state clears the locus; the landing point decides the regime.
    let mut point = (state.s1, state.s2);
    let mut x = state.x;
    let mut initial_impulses = 0u32;
    while p.impulse_due(point.0, point.1) {
        point = p.impulse_point(point.0, point.1);
        x *= 1.0 - p.drain_fraction();
        initial_impulses += 1;
        if initial_impulses > 1000 {
            return Err(Error::InvalidParameter(
                "initial impulses did not clear the threshold locus".into(),
            ));
        }
    }
    let finite_fail = |n: Option<u32>, reason: PredictionReason| OutcomePrediction {
        verdict: if n == Some(0) && initial_impulses == 0 {
            Verdict::NoImpulse
        } else {
            Verdict::FailsFiniteImpulses { max_impulses: n }
        },
        reason,
        x_threshold: None,
        entry_count: None,
        initial_impulses,
        marginal: false,
    };
    let class = classify(p, g, point.0, point.1)?;
    match class.label {
        RegionLabel::Omega0 => {
            return Ok(finite_fail(Some(initial_impulses), PredictionReason::StartUnreachable));
        }
        RegionLabel::BoundaryLine => {
            return Ok(finite_fail(
                Some(initial_impulses),
                PredictionReason::StartOnMarginalLine,
            ));
        }
        _ => {}
    }
    if !g.input_in_omega1 {
        return Ok(finite_fail(None, PredictionReason::InputUnreachable));
    }
    let mu = g
        .cycle_growth
        .expect("cycle growth is computed whenever the input is reachable");
    let mu_tol = 10.0 * q.abs_tol;
    if mu < -mu_tol {
        return Ok(finite_fail(None, PredictionReason::CycleGrowthNegative));
    }
    if mu.abs() <= mu_tol {
        return Ok(OutcomePrediction {
            verdict: Verdict::FailsUnboundedCycleTime,
            reason: PredictionReason::CycleGrowthZero,
            x_threshold: None,
            entry_count: None,
            initial_impulses,
            marginal: false,
        });
    }
    let n0 = entry_count(p, g, point.0, point.1)?;
    let threshold = min_inoculum(p, g, q, point.0, point.1)?;
    let marginal = (x - threshold).abs() < 1e-6;
    if x > threshold {
        Ok(OutcomePrediction {
            verdict: Verdict::ConvergesToPeriodicOrbit,
            reason: PredictionReason::AboveMinimumInoculum,
            x_threshold: Some(threshold),
            entry_count: Some(n0),
            initial_impulses,
            marginal,
        })
    } else {
        Ok(OutcomePrediction {
            verdict: Verdict::FailsFiniteImpulses {
                max_impulses: Some(initial_impulses + n0 - 1),
            },
            reason: PredictionReason::BelowMinimumInoculum,
            x_threshold: Some(threshold),
            entry_count: Some(n0),
            initial_impulses,
            marginal,
        })
    }
}
