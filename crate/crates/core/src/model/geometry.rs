//! Static geometry of the concentration plane: the threshold locus, its
//! post-impulse image, the chord projections between them, and region
//! classification.

use crate::error::{Error, Result};
use crate::model::params::ModelParams;
use crate::model::response::{break_even, BreakEven};

/// Line of slope `r21` through a reference point. Batch trajectories never
/// leave their chord, so most plane geometry reduces to arithmetic on these.
#[derive(Debug, Clone, Copy)]
pub struct Chord {
    pub r21: f64,
    pub intercept: f64,
}

impl Chord {
    pub fn through(p: &ModelParams, s1: f64, s2: f64) -> Self {
        Self {
            r21: p.r21(),
            intercept: s2 - p.r21() * s1,
        }
    }

    pub fn s2_at(&self, s1: f64) -> f64 {
        self.intercept + self.r21 * s1
    }

    pub fn s1_at(&self, s2: f64) -> f64 {
        (s2 - self.intercept) / self.r21
    }
}

/// Coordinate magnitude used for on-locus tolerance checks.
fn locus_tol(p: &ModelParams) -> f64 {
    1e-9 * (1.0 + p.s1_in().max(p.s2_in()))
}

/// True when `(s1, s2)` lies on the pre-impulse threshold locus (the union of
/// the horizontal segment at `s2_bar` and the vertical segment at `s1_bar`).
pub fn on_threshold_locus(p: &ModelParams, s1: f64, s2: f64) -> bool {
    let tol = locus_tol(p);
    if s1 < -tol || s2 < -tol {
        return false;
    }
    ((s1 - p.s1_bar()).abs() <= tol && s2 <= p.s2_bar() + tol)
        || ((s2 - p.s2_bar()).abs() <= tol && s1 <= p.s1_bar() + tol)
}

/// Guard shared by the chord operations: the point must be at or above the
/// threshold locus and strictly between the two marginal chords.
pub(crate) fn require_reachable(p: &ModelParams, s1: f64, s2: f64) -> Result<f64> {
    if s1 < 0.0 {
        return Err(Error::NegativeConcentration {
            name: "s1",
            value: s1,
        });
    }
    if s2 < 0.0 {
        return Err(Error::NegativeConcentration {
            name: "s2",
            value: s2,
        });
    }
    let tol = locus_tol(p);
    if s1 < p.s1_bar() - tol && s2 < p.s2_bar() - tol {
        return Err(Error::BelowThreshold { s1, s2 });
    }
    let v = p.v(s1, s2);
    let band = 1e-12 * p.v_scale();
    if v <= p.v_low_edge() + band || v >= p.v_high_edge() - band {
        return Err(Error::UnreachableThreshold { s1, s2 });
    }
    Ok(v)
}

/// Where the chord through `(s1, s2)` first meets the threshold locus.
///
/// The branch is selected by comparing `v` with its value at the threshold
/// corner: chords passing above the corner land on the horizontal segment,
/// chords passing below land on the vertical one.
pub fn project_to_threshold(p: &ModelParams, s1: f64, s2: f64) -> Result<(f64, f64)> {
    let v = require_reachable(p, s1, s2)?;
    if v <= p.v_corner() {
        Ok((s1 + p.r12() * (p.s2_bar() - s2), p.s2_bar()))
    } else {
        Ok((p.s1_bar(), s2 + p.r21() * (p.s1_bar() - s1)))
    }
}

/// The point of the post-impulse locus whose batch trajectory reaches the
/// given threshold point; inverse of [`project_to_threshold`] restricted to
/// the post-impulse locus.
pub fn lift_to_refill(p: &ModelParams, s1: f64, s2: f64) -> Result<(f64, f64)> {
    if !on_threshold_locus(p, s1, s2) {
        return Err(Error::NotOnThresholdLocus { s1, s2 });
    }
    let v = p.v(s1, s2);
    let v_corner_post = p.v(p.s1_bar_post(), p.s2_bar_post());
    if v <= v_corner_post {
        Ok((s1 + p.r12() * (p.s2_bar_post() - s2), p.s2_bar_post()))
    } else {
        Ok((p.s1_bar_post(), s2 + p.r21() * (p.s1_bar_post() - s1)))
    }
}

/// Region of the concentration plane a point belongs to.
///
/// `Omega1` is the set from which the threshold locus is reachable along a
/// batch chord; `Omega0` its complement above the locus. `Omega1A` is the
/// sub-band of `Omega1` whose first threshold hit already yields positive net
/// growth after refill; `OmegaLambda` the band where growth strictly exceeds
/// the death rate throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionLabel {
    BelowThreshold,
    BoundaryLine,
    Omega0,
    Omega1,
    Omega1A,
    OmegaLambda,
}

/// Most specific label plus containment flags for the nested regions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionClass {
    pub label: RegionLabel,
    pub in_omega1: bool,
    pub in_omega1a: bool,
    pub in_omega_lambda: bool,
    pub v: f64,
}

/// Derived geometric quantities of one instance.
///
/// The affine part ([`RegionGeometry::affine`]) is closed-form; the
/// quadrature-dependent fields (`cycle_growth`, the lower edge of the entry
/// band, and the impulse-count bound) are filled in by the analysis layer and
/// stay `None` when the instance admits no periodic operation.
#[derive(Debug, Clone)]
pub struct RegionGeometry {
    pub r12: f64,
    pub r21: f64,
    pub lambda1: BreakEven,
    pub lambda2: BreakEven,
    pub s1_bar_post: f64,
    pub s2_bar_post: f64,
    /// Height of the invariant line at `s1_bar`: the limiting pre-impulse s2.
    pub invariant_s2: f64,
    pub invariant_s2_post: f64,
    pub v_corner: f64,
    pub v_low_edge: f64,
    pub v_high_edge: f64,
    pub input_in_omega1: bool,
    /// Net biomass change over the limiting cycle at the instance drain
    /// fraction; `None` when the input point cannot reach the threshold.
    pub cycle_growth: Option<f64>,
    /// Upper end (in s2) of the candidate entry window on the vertical
    /// threshold segment; its chord carries the post-impulse corner.
    pub entry_s2_upper: f64,
    /// `v` on the chord through `(s1_bar, entry_s2_upper)`, i.e. `(1-r) v_corner`.
    pub entry_v_lower: f64,
    /// Lower end (in s2) of the entry window; the net growth of the lifted
    /// cycle changes sign here. Requires positive cycle growth.
    pub entry_s2_lower: Option<f64>,
    /// `v` on the chord through `(s1_bar, entry_s2_lower)`.
    pub entry_v_upper: Option<f64>,
    /// Upper bound on the number of impulses any successful run needs before
    /// entering the entry band.
    pub impulse_bound: Option<u32>,
    /// `v`-range of the strictly-positive-growth band, when both break-even
    /// levels sit below their thresholds.
    pub omega_lambda_v: Option<(f64, f64)>,
    /// True when the positive-growth band is defined but detached from the
    /// entry band (`entry_s2_upper < lambda2`), so membership alone does not
    /// guarantee success.
    pub omega_lambda_gap: bool,
}

impl RegionGeometry {
    /// Closed-form geometry; quadrature-dependent fields left unfilled.
    pub fn affine(p: &ModelParams) -> Result<Self> {
        let lambda1 = break_even(p.f1(), p.death_rate())?;
        let lambda2 = break_even(p.f2(), p.death_rate())?;
        let v_corner = p.v_corner();
        let entry_v_lower = (1.0 - p.drain_fraction()) * v_corner;
        // Solve v(s1_bar, s2) = entry_v_lower for s2.
        let entry_s2_upper =
            p.s2_in() - (entry_v_lower + p.y1() * (p.s1_in() - p.s1_bar())) / p.y2();
        let omega_lambda_v = match (lambda1, lambda2) {
            (BreakEven::Finite(l1), BreakEven::Finite(l2))
                if l1 < p.s1_bar() && l2 < p.s2_bar() =>
            {
                Some((p.v(l1, p.s2_bar()), p.v(p.s1_bar(), l2)))
            }
            _ => None,
        };
        let omega_lambda_gap = match (omega_lambda_v, lambda2) {
            (Some(_), BreakEven::Finite(l2)) => entry_s2_upper < l2,
            _ => false,
        };
        Ok(Self {
            r12: p.r12(),
            r21: p.r21(),
            lambda1,
            lambda2,
            s1_bar_post: p.s1_bar_post(),
            s2_bar_post: p.s2_bar_post(),
            invariant_s2: p.invariant_s2(),
            invariant_s2_post: p.invariant_s2_post(),
            v_corner,
            v_low_edge: p.v_low_edge(),
            v_high_edge: p.v_high_edge(),
            input_in_omega1: p.input_reaches_threshold(),
            cycle_growth: None,
            entry_s2_upper,
            entry_v_lower,
            entry_s2_lower: None,
            entry_v_upper: None,
            impulse_bound: None,
            omega_lambda_v,
            omega_lambda_gap,
        })
    }
}

/// Classify a point of the nonnegative quadrant.
///
/// Thresholds are treated as closed: a point at or below both triggers an
/// impulse and is labelled `BelowThreshold`. Points within a narrow band of
/// the two marginal chords get the explicit `BoundaryLine` label since no
/// solution starting there reaches the threshold locus in finite time.
pub fn classify(p: &ModelParams, g: &RegionGeometry, s1: f64, s2: f64) -> Result<RegionClass> {
    if s1 < 0.0 {
        return Err(Error::NegativeConcentration {
            name: "s1",
            value: s1,
        });
    }
    if s2 < 0.0 {
        return Err(Error::NegativeConcentration {
            name: "s2",
            value: s2,
        });
    }
    let v = p.v(s1, s2);
    let mut class = RegionClass {
        label: RegionLabel::Omega1,
        in_omega1: false,
        in_omega1a: false,
        in_omega_lambda: false,
        v,
    };
    if p.impulse_due(s1, s2) {
        class.label = RegionLabel::BelowThreshold;
        return Ok(class);
    }
    let band = 1e-12 * p.v_scale();
    if (v - g.v_low_edge).abs() <= band || (v - g.v_high_edge).abs() <= band {
        class.label = RegionLabel::BoundaryLine;
        return Ok(class);
    }
    if v < g.v_low_edge || v > g.v_high_edge {
        class.label = RegionLabel::Omega0;
        return Ok(class);
    }
    class.in_omega1 = true;
    if let Some(v_upper) = g.entry_v_upper {
        class.in_omega1a = v > g.entry_v_lower && v < v_upper;
    }
    if let Some((lo, hi)) = g.omega_lambda_v {
        class.in_omega_lambda = v >= lo && v <= hi;
    }
    class.label = if class.in_omega1a {
        RegionLabel::Omega1A
    } else if class.in_omega_lambda {
        RegionLabel::OmegaLambda
    } else {
        RegionLabel::Omega1
    };
    Ok(class)
}
