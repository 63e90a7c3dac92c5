//! Batch-phase dynamics between impulses.
//!
//! Two independent routes to the same quantities live here: adaptive
//! Runge–Kutta integration of the reactor equations with event localization
//! at the threshold locus, and closed-form chord quadratures for the biomass
//! change and the elapsed time. Each is used to cross-check the other.

use crate::error::{Error, Result};
use crate::model::{Chord, ModelParams, ReactorState};
use crate::quad::{self, QuadratureOptions};
use crate::rk::{bisect_event_time, Dopri5, IntegratorOptions, State3};

/// Biomass level below which, with the growth rate under the death rate, the
/// culture is declared quiescent. The continuous dynamics never reach zero in
/// finite time; this floor makes failure detection terminate.
pub const X_FLOOR: f64 = 1e-12;

/// How a batch phase ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BatchTerminal {
    /// Both resources reached their thresholds; drain condition holds at the
    /// recorded point.
    HitThreshold { s1: f64, s2: f64 },
    /// Biomass fell under [`X_FLOOR`] with the growth rate below the death
    /// rate; the threshold can no longer be reached.
    Quiescent,
    HorizonReached,
}

/// One batch phase: the accepted integration nodes and how it ended.
#[derive(Debug, Clone)]
pub struct BatchSegment {
    pub t_start: f64,
    pub t_end: f64,
    pub states: Vec<ReactorState>,
    pub terminal: BatchTerminal,
}

impl BatchSegment {
    pub fn final_state(&self) -> ReactorState {
        *self.states.last().expect("segment has at least one state")
    }
}

fn deriv_for(p: &ModelParams) -> impl Fn(&State3) -> State3 + '_ {
    move |y: &State3| {
        let g = p.f1().eval(y[0]).min(p.f2().eval(y[1]));
        let gx = g * y[2];
        [
            -gx / p.y1(),
            -gx / p.y2(),
            (-p.death_rate() + g) * y[2],
        ]
    }
}

/// Integrate the batch equations from `state0` until the drain condition
/// first holds, quiescence is detected, or the horizon is reached.
///
/// The threshold event is located to `event_tol_rel` in time by bisection on
/// the dense output. The Liebig switching surface `f1(s1) = f2(s2)` is also
/// treated as an event: no accepted step straddles it, which preserves the
/// integrator's order across the kink.
pub fn integrate_batch(
    p: &ModelParams,
    opts: &IntegratorOptions,
    state0: ReactorState,
    horizon: f64,
) -> Result<BatchSegment> {
    for (name, value) in [("s1", state0.s1), ("s2", state0.s2), ("x", state0.x)] {
        if value < 0.0 {
            return Err(Error::NegativeConcentration { name, value });
        }
    }
    let t0 = state0.t;
    let t_max = t0 + horizon;
    let mut states = vec![state0];

    if p.impulse_due(state0.s1, state0.s2) {
        return Ok(BatchSegment {
            t_start: t0,
            t_end: t0,
            states,
            terminal: BatchTerminal::HitThreshold {
                s1: state0.s1,
                s2: state0.s2,
            },
        });
    }

    let deriv = deriv_for(p);
    let mut solver = Dopri5::new(&deriv, *opts, t0, [state0.s1, state0.s2, state0.x]);
    let threshold_gap =
        |y: &State3| (y[0] - p.s1_bar()).max(y[1] - p.s2_bar());
    let switch = |y: &State3| p.f1().eval(y[0]) - p.f2().eval(y[1]);

    loop {
        let t_prev = solver.t;
        let y_prev = solver.y;
        let dy_prev = solver.dy;
        let step = solver.step(t_max, None)?;

        // Keep accepted steps clear of the Liebig kink: on a sign change of
        // the switching function, roll back and step exactly to the crossing.
        let w0 = switch(&y_prev);
        let wm = switch(&step.dense.eval(0.5 * (t_prev + step.t)));
        let w1 = switch(&step.y);
        let bracket = if w0 != 0.0 && w0 * wm < 0.0 {
            Some((t_prev, 0.5 * (t_prev + step.t)))
        } else if wm != 0.0 && wm * w1 < 0.0 {
            Some((0.5 * (t_prev + step.t), step.t))
        } else {
            None
        };
        if let Some((lo, hi)) = bracket {
            let sign = if switch(&step.dense.eval(lo)) > 0.0 {
                1.0
            } else {
                -1.0
            };
            let t_kink = bisect_event_time(
                &step.dense,
                |_, y| sign * switch(y),
                lo,
                hi,
                opts.event_tol_rel,
            );
            let tol_t = opts.event_tol_rel * t_kink.abs().max(1.0);
            if t_kink > t_prev + tol_t && t_kink < step.t - tol_t {
                solver.t = t_prev;
                solver.y = y_prev;
                solver.dy = dy_prev;
                let forced = solver.step(t_max, Some(t_kink - t_prev))?;
                states.push(ReactorState::new(
                    forced.t,
                    forced.y[0],
                    forced.y[1],
                    forced.y[2],
                ));
                continue;
            }
        }

        // Threshold event: the gap is strictly decreasing while x > 0, so a
        // single bisection bracket suffices.
        if threshold_gap(&step.y) <= 0.0 {
            let t_hit = bisect_event_time(
                &step.dense,
                |_, y| threshold_gap(y),
                t_prev,
                step.t,
                opts.event_tol_rel,
            );
            let y_hit = step.dense.eval(t_hit);
            states.push(ReactorState::new(t_hit, y_hit[0], y_hit[1], y_hit[2]));
            return Ok(BatchSegment {
                t_start: t0,
                t_end: t_hit,
                states,
                terminal: BatchTerminal::HitThreshold {
                    s1: y_hit[0],
                    s2: y_hit[1],
                },
            });
        }

        states.push(ReactorState::new(step.t, step.y[0], step.y[1], step.y[2]));

        if step.y[2] < X_FLOOR && p.f1().eval(step.y[0]).min(p.f2().eval(step.y[1])) < p.death_rate()
        {
            return Ok(BatchSegment {
                t_start: t0,
                t_end: step.t,
                states,
                terminal: BatchTerminal::Quiescent,
            });
        }

        if step.t >= t_max * (1.0 - 1e-15) - 1e-300 {
            return Ok(BatchSegment {
                t_start: t0,
                t_end: step.t,
                states,
                terminal: BatchTerminal::HorizonReached,
            });
        }
    }
}

/// Chord-restricted integrands shared by the quadrature routes.
pub(crate) struct ChordFns<'a> {
    p: &'a ModelParams,
    pub chord: Chord,
}

impl<'a> ChordFns<'a> {
    pub fn new(p: &'a ModelParams, chord: Chord) -> Self {
        Self { p, chord }
    }

    pub fn min_growth(&self, s1: f64) -> f64 {
        self.p
            .f1()
            .eval(s1)
            .min(self.p.f2().eval(self.chord.s2_at(s1)))
    }

    /// Integrand of the biomass-change quadrature: `1 - D / min(f1, f2)`.
    pub fn net_growth_integrand(&self, s1: f64) -> f64 {
        1.0 - self.p.death_rate() / self.min_growth(s1)
    }

    /// Roots of `f1(s1) - f2(s2(s1))` on `[a, b]`: the Liebig kink locations.
    pub fn kink_roots(&self, a: f64, b: f64) -> Vec<f64> {
        let w = |v: f64| self.p.f1().eval(v) - self.p.f2().eval(self.chord.s2_at(v));
        quad::sign_change_roots(&w, a, b, 64)
    }
}

fn check_same_chord(
    p: &ModelParams,
    endpoint: (f64, f64),
    start: (f64, f64),
) -> Result<Chord> {
    let chord = Chord::through(p, endpoint.0, endpoint.1);
    let miss = (start.1 - chord.s2_at(start.0)).abs();
    let scale = 1.0 + p.s2_in().abs();
    if miss > 1e-8 * scale {
        return Err(Error::InvalidParameter(format!(
            "start ({}, {}) is not on the chord through ({}, {}): offset {miss}",
            start.0, start.1, endpoint.0, endpoint.1
        )));
    }
    if start.0 < endpoint.0 - 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "start s1 = {} must lie at or right of the endpoint s1 = {}",
            start.0, endpoint.0
        )));
    }
    Ok(chord)
}

/// Net biomass change along the chord from `start` down to `endpoint`,
/// independent of the biomass level itself.
///
/// `endpoint` is where the batch phase ends (typically on the threshold
/// locus) and `start` where it begins; `start` lies up-chord of `endpoint`.
pub fn biomass_change(
    p: &ModelParams,
    q: &QuadratureOptions,
    endpoint: (f64, f64),
    start: (f64, f64),
) -> Result<f64> {
    let chord = check_same_chord(p, endpoint, start)?;
    let (a, b) = (endpoint.0, start.0);
    if b - a <= f64::EPSILON * b.abs().max(1.0) {
        return Ok(0.0);
    }
    let fns = ChordFns::new(p, chord);
    let kinks = fns.kink_roots(a, b);
    let integrand = |v: f64| fns.net_growth_integrand(v);
    Ok(p.y1() * quad::integrate_split(&integrand, a, b, &kinks, q)?)
}

/// Piecewise cumulative of the net-growth integrand along a chord, split at
/// the Liebig kinks. Gives the running biomass profile in O(1) panel work
/// per evaluation, which the nested time quadratures rely on.
pub(crate) struct GrowthProfile<'a> {
    fns: ChordFns<'a>,
    kinks: Vec<f64>,
    edges: Vec<f64>,
    prefix: Vec<f64>,
}

impl<'a> GrowthProfile<'a> {
    pub fn build(p: &'a ModelParams, chord: Chord, a: f64, b: f64) -> Self {
        let fns = ChordFns::new(p, chord);
        let kinks: Vec<f64> = fns
            .kink_roots(a, b)
            .into_iter()
            .filter(|&k| k > a && k < b)
            .collect();
        let mut cuts = vec![a];
        cuts.extend_from_slice(&kinks);
        cuts.push(b);
        let target = (b - a) / 64.0;
        let mut edges = vec![a];
        for w in cuts.windows(2) {
            let n = ((w[1] - w[0]) / target).ceil().max(1.0) as usize;
            for i in 1..=n {
                edges.push(w[0] + (w[1] - w[0]) * i as f64 / n as f64);
            }
        }
        let mut prefix = vec![0.0];
        for w in edges.windows(2) {
            let (v, _) = quad::gk15(&|x| fns.net_growth_integrand(x), w[0], w[1]);
            prefix.push(prefix.last().unwrap() + v);
        }
        Self {
            fns,
            kinks,
            edges,
            prefix,
        }
    }

    /// Integral of the net-growth integrand from the left edge to `v`.
    pub fn cumulative(&self, v: f64) -> f64 {
        let v = v.clamp(self.edges[0], *self.edges.last().unwrap());
        let i = match self
            .edges
            .binary_search_by(|e| e.partial_cmp(&v).unwrap())
        {
            Ok(i) => return self.prefix[i],
            Err(i) => i - 1,
        };
        let (partial, _) = quad::gk15(&|x| self.fns.net_growth_integrand(x), self.edges[i], v);
        self.prefix[i] + partial
    }

    pub fn total(&self) -> f64 {
        *self.prefix.last().unwrap()
    }

    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    pub fn min_growth(&self, v: f64) -> f64 {
        self.fns.min_growth(v)
    }
}

/// Time taken to traverse the chord from `start` (with biomass `x_start`)
/// down to `endpoint`, reconstructing the biomass profile from the partial
/// net-growth integral.
///
/// Fails with [`Error::InfeasiblePath`] when the reconstructed profile
/// touches zero before the endpoint.
pub fn time_between(
    p: &ModelParams,
    q: &QuadratureOptions,
    endpoint: (f64, f64),
    start: (f64, f64),
    x_start: f64,
) -> Result<f64> {
    if !(x_start > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "starting biomass must be positive, got {x_start}"
        )));
    }
    let chord = check_same_chord(p, endpoint, start)?;
    let (a, b) = (endpoint.0, start.0);
    if b - a <= f64::EPSILON * b.abs().max(1.0) {
        return Ok(0.0);
    }
    let profile = GrowthProfile::build(p, chord, a, b);
    let total = profile.total();
    let x_at = |v: f64| x_start + p.y1() * (total - profile.cumulative(v));
    // The profile is exact up to quadrature error; reject paths where the
    // biomass does not stay positive.
    let mut worst = f64::INFINITY;
    for i in 0..=128 {
        let v = a + (b - a) * i as f64 / 128.0;
        worst = worst.min(x_at(v));
    }
    if worst <= 0.0 {
        return Err(Error::InfeasiblePath);
    }
    let integrand = |v: f64| 1.0 / (profile.min_growth(v) * x_at(v));
    Ok(p.y1() * quad::integrate_split(&integrand, a, b, profile.kinks(), q)?)
}
