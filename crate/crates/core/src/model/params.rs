//! Problem-instance parameters and the elementary maps defined on them.

use crate::error::{Error, Result};
use crate::model::response::ResponseFunction;

/// Raw instance data as supplied by the caller, in the caller's labelling of
/// the two resources.
#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub f1: ResponseFunction,
    pub f2: ResponseFunction,
    /// Cell yield constants (biomass produced per unit resource consumed).
    pub y1: f64,
    pub y2: f64,
    pub death_rate: f64,
    /// Fraction of the reactor drained and refilled at each impulse.
    pub drain_fraction: f64,
    /// Threshold concentrations that trigger the drain/refill.
    pub s1_bar: f64,
    pub s2_bar: f64,
    /// Concentrations in the fresh medium.
    pub s1_in: f64,
    pub s2_in: f64,
}

/// Instantaneous reactor contents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactorState {
    pub t: f64,
    pub s1: f64,
    pub s2: f64,
    pub x: f64,
}

impl ReactorState {
    pub fn new(t: f64, s1: f64, s2: f64, x: f64) -> Self {
        Self { t, s1, s2, x }
    }
}

/// A validated instance in canonical orientation.
///
/// Construction relabels the resources (1 <-> 2) when necessary so that the
/// threshold corner lies on or above the invariant line through the input
/// point, i.e. `v(s1_bar, s2_bar) <= 0`. Every operation in this crate works
/// in the canonical labelling; [`ModelParams::relabeled`] reports whether the
/// caller's labels were swapped, and [`ModelParams::user_point`] maps points
/// back.
#[derive(Debug, Clone)]
pub struct ModelParams {
    f1: ResponseFunction,
    f2: ResponseFunction,
    y1: f64,
    y2: f64,
    death_rate: f64,
    drain_fraction: f64,
    s1_bar: f64,
    s2_bar: f64,
    s1_in: f64,
    s2_in: f64,
    relabeled: bool,
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

impl ModelParams {
    pub fn new(config: ModelConfig) -> Result<Self> {
        let ModelConfig {
            f1,
            f2,
            y1,
            y2,
            death_rate,
            drain_fraction,
            s1_bar,
            s2_bar,
            s1_in,
            s2_in,
        } = config;

        require_positive("Y1", y1)?;
        require_positive("Y2", y2)?;
        require_positive("death rate D", death_rate)?;
        require_positive("threshold s1_bar", s1_bar)?;
        require_positive("threshold s2_bar", s2_bar)?;
        if !(drain_fraction > 0.0 && drain_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "drain fraction r must lie in (0, 1), got {drain_fraction}"
            )));
        }
        if !(s1_in > s1_bar) {
            return Err(Error::InvalidParameter(format!(
                "input s1_in = {s1_in} must exceed the threshold s1_bar = {s1_bar}"
            )));
        }
        if !(s2_in > s2_bar) {
            return Err(Error::InvalidParameter(format!(
                "input s2_in = {s2_in} must exceed the threshold s2_bar = {s2_bar}"
            )));
        }

        let mut p = Self {
            f1,
            f2,
            y1,
            y2,
            death_rate,
            drain_fraction,
            s1_bar,
            s2_bar,
            s1_in,
            s2_in,
            relabeled: false,
        };
        if p.v(p.s1_bar, p.s2_bar) > 0.0 {
            p = Self {
                f1: p.f2,
                f2: p.f1,
                y1: p.y2,
                y2: p.y1,
                s1_bar: p.s2_bar,
                s2_bar: p.s1_bar,
                s1_in: p.s2_in,
                s2_in: p.s1_in,
                relabeled: true,
                ..p
            };
        }
        debug_assert!(p.v(p.s1_bar, p.s2_bar) <= 0.0);
        Ok(p)
    }

    pub fn f1(&self) -> &ResponseFunction {
        &self.f1
    }
    pub fn f2(&self) -> &ResponseFunction {
        &self.f2
    }
    pub fn y1(&self) -> f64 {
        self.y1
    }
    pub fn y2(&self) -> f64 {
        self.y2
    }
    pub fn death_rate(&self) -> f64 {
        self.death_rate
    }
    pub fn drain_fraction(&self) -> f64 {
        self.drain_fraction
    }
    pub fn s1_bar(&self) -> f64 {
        self.s1_bar
    }
    pub fn s2_bar(&self) -> f64 {
        self.s2_bar
    }
    pub fn s1_in(&self) -> f64 {
        self.s1_in
    }
    pub fn s2_in(&self) -> f64 {
        self.s2_in
    }
    pub fn relabeled(&self) -> bool {
        self.relabeled
    }

    /// Slope `ds1/ds2` of batch trajectories in the plane.
    pub fn r12(&self) -> f64 {
        self.y2 / self.y1
    }

    /// Slope `ds2/ds1` of batch trajectories in the plane.
    pub fn r21(&self) -> f64 {
        self.y1 / self.y2
    }

    /// Map a point between the caller's labelling and the canonical one
    /// (the swap is its own inverse).
    pub fn user_point(&self, s1: f64, s2: f64) -> (f64, f64) {
        if self.relabeled {
            (s2, s1)
        } else {
            (s1, s2)
        }
    }

    /// Map a caller-labelled state into canonical coordinates.
    pub fn canonical_state(&self, state: ReactorState) -> ReactorState {
        let (s1, s2) = self.user_point(state.s1, state.s2);
        ReactorState { s1, s2, ..state }
    }

    /// Liebig growth rate `min(f1(s1), f2(s2))`.
    pub fn growth_rate(&self, s1: f64, s2: f64) -> Result<f64> {
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
        Ok(self.f1.eval(s1).min(self.f2.eval(s2)))
    }

    /// Conserved batch-phase quantity `Y2 (s2_in - s2) - Y1 (s1_in - s1)`.
    ///
    /// Constant along batch trajectories and contracted by `1 - r` at each
    /// impulse, so it orders the slope-`r21` chords of the plane.
    pub fn v(&self, s1: f64, s2: f64) -> f64 {
        self.y2 * (self.s2_in - s2) - self.y1 * (self.s1_in - s1)
    }

    /// Magnitude used to scale absolute comparisons of `v`.
    pub fn v_scale(&self) -> f64 {
        self.y1 * self.s1_in + self.y2 * self.s2_in
    }

    /// `v` at the threshold corner; nonpositive in canonical orientation.
    pub fn v_corner(&self) -> f64 {
        self.v(self.s1_bar, self.s2_bar)
    }

    /// `v` on the marginal line through `(0, s2_bar)`; infimum of `v` over
    /// points that can reach the threshold locus.
    pub fn v_low_edge(&self) -> f64 {
        self.v(0.0, self.s2_bar)
    }

    /// `v` on the marginal line through `(s1_bar, 0)`; supremum of `v` over
    /// points that can reach the threshold locus.
    pub fn v_high_edge(&self) -> f64 {
        self.v(self.s1_bar, 0.0)
    }

    /// Drain/refill jump applied to the full state.
    pub fn impulse(&self, s1: f64, s2: f64, x: f64) -> (f64, f64, f64) {
        let (p1, p2) = self.impulse_point(s1, s2);
        (p1, p2, (1.0 - self.drain_fraction) * x)
    }

    /// Drain/refill jump applied to the concentration pair.
    pub fn impulse_point(&self, s1: f64, s2: f64) -> (f64, f64) {
        let r = self.drain_fraction;
        ((1.0 - r) * s1 + r * self.s1_in, (1.0 - r) * s2 + r * self.s2_in)
    }

    /// True when the drain condition holds: both resources at or below their
    /// thresholds.
    pub fn impulse_due(&self, s1: f64, s2: f64) -> bool {
        s1 <= self.s1_bar && s2 <= self.s2_bar
    }

    /// Post-impulse threshold images for an arbitrary drain fraction.
    pub fn s1_bar_post_at(&self, r: f64) -> f64 {
        (1.0 - r) * self.s1_bar + r * self.s1_in
    }
    pub fn s2_bar_post_at(&self, r: f64) -> f64 {
        (1.0 - r) * self.s2_bar + r * self.s2_in
    }
    pub fn s1_bar_post(&self) -> f64 {
        self.s1_bar_post_at(self.drain_fraction)
    }
    pub fn s2_bar_post(&self) -> f64 {
        self.s2_bar_post_at(self.drain_fraction)
    }

    /// Height at which the invariant line `v = 0` crosses `s1 = s1_bar`;
    /// the s2-coordinate of the limiting pre-impulse point.
    pub fn invariant_s2(&self) -> f64 {
        self.s2_in - self.r21() * (self.s1_in - self.s1_bar)
    }

    /// Post-impulse image of `(s1_bar, invariant_s2)` along the invariant line.
    pub fn invariant_s2_post_at(&self, r: f64) -> f64 {
        (1.0 - r) * self.invariant_s2() + r * self.s2_in
    }
    pub fn invariant_s2_post(&self) -> f64 {
        self.invariant_s2_post_at(self.drain_fraction)
    }

    /// True when the input point can reach the threshold locus, i.e. the
    /// invariant line through it crosses the vertical threshold segment.
    pub fn input_reaches_threshold(&self) -> bool {
        self.invariant_s2() > 0.0
    }

    /// The same instance with a different drain fraction.
    pub fn with_drain_fraction(&self, r: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "drain fraction r must lie in (0, 1), got {r}"
            )));
        }
        Ok(Self {
            drain_fraction: r,
            ..self.clone()
        })
    }
}
