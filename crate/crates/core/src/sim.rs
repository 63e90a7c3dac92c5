//! The full hybrid loop: batch phases alternating with drain/refill
//! impulses, with outcome labelling.

use crate::batch::{integrate_batch, BatchSegment, BatchTerminal};
use crate::error::{Error, Result};
use crate::model::{ModelParams, ReactorState};
use crate::rk::IntegratorOptions;

/// One drain/refill event: pre- and post-impulse states at the same time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpulseEvent {
    pub index: u32,
    pub t: f64,
    pub pre: ReactorState,
    pub post: ReactorState,
}

/// What the simulation actually observed by the time it stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObservedOutcome {
    /// Impulse intervals settled: relative variation over the trailing
    /// window fell below the configured tolerance.
    Cycling { impulses: u32, mean_interval: f64 },
    /// The culture went quiescent after finitely many impulses.
    FailedAfter { impulses: u32 },
    /// No impulse ever fired.
    NoImpulse,
    /// Stopped at the impulse cap or horizon without settling.
    Undetermined { impulses: u32 },
}

/// Full record of one run: batch segments separated by impulses.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub segments: Vec<BatchSegment>,
    pub impulses: Vec<ImpulseEvent>,
    pub outcome: ObservedOutcome,
    pub final_state: ReactorState,
}

/// Biomass level under which a horizon-stopped run with growth below the
/// death rate is labelled failed rather than undetermined: the state is
/// frozen to within this distance, so the threshold is out of reach.
pub const WASHOUT_X: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Total simulated time budget.
    pub horizon: f64,
    pub max_impulses: u32,
    pub integrator: IntegratorOptions,
    /// Number of trailing impulse intervals inspected for settling.
    pub cycling_window: usize,
    /// Relative interval variation under which the run counts as cycling.
    pub cycling_rel_tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            horizon: 1e4,
            max_impulses: 200,
            integrator: IntegratorOptions::default(),
            cycling_window: 5,
            cycling_rel_tol: 1e-6,
        }
    }
}

fn cycling_interval(times: &[f64], window: usize, rel_tol: f64) -> Option<f64> {
    if times.len() < window + 1 {
        return None;
    }
    let tail = &times[times.len() - (window + 1)..];
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for w in tail.windows(2) {
        let dt = w[1] - w[0];
        min = min.min(dt);
        max = max.max(dt);
        sum += dt;
    }
    let mean = sum / window as f64;
    if mean > 0.0 && (max - min) / mean < rel_tol {
        Some(mean)
    } else {
        None
    }
}

/// Run the reactor from `initial` until the impulse cap, quiescence, or the
/// time horizon.
///
/// A start at or below both thresholds (including the axis corner cases)
/// fires immediate impulses at the initial time until the state clears the
/// threshold locus, as the drain condition demands.
pub fn run(p: &ModelParams, opts: &RunOptions, initial: ReactorState) -> Result<Trajectory> {
    for (name, value) in [("s1", initial.s1), ("s2", initial.s2), ("x", initial.x)] {
        if value < 0.0 {
            return Err(Error::NegativeConcentration { name, value });
        }
    }
    let t_end = initial.t + opts.horizon;
    let mut impulses: Vec<ImpulseEvent> = Vec::new();
    let mut segments: Vec<BatchSegment> = Vec::new();
    let mut state = initial;
    let mut count = 0u32;

    let mut apply_impulse = |state: ReactorState, count: &mut u32| -> ReactorState {
        let (s1, s2, x) = p.impulse(state.s1, state.s2, state.x);
        *count += 1;
        let post = ReactorState::new(state.t, s1, s2, x);
        impulses.push(ImpulseEvent {
            index: *count,
            t: state.t,
            pre: state,
            post,
        });
        post
    };

    // Immediate impulses at the initial time.
    while p.impulse_due(state.s1, state.s2) && count < opts.max_impulses {
        state = apply_impulse(state, &mut count);
    }

    enum Stop {
        Cap,
        Quiescent,
        Horizon,
    }

    let stop = loop {
        if count >= opts.max_impulses {
            break Stop::Cap;
        }
        if state.t >= t_end {
            break Stop::Horizon;
        }
        let segment = integrate_batch(p, &opts.integrator, state, t_end - state.t)?;
        let terminal = segment.terminal;
        let end = segment.final_state();
        segments.push(segment);
        match terminal {
            BatchTerminal::HitThreshold { .. } => {
                state = apply_impulse(end, &mut count);
            }
            BatchTerminal::Quiescent => {
                state = end;
                break Stop::Quiescent;
            }
            BatchTerminal::HorizonReached => {
                state = end;
                break Stop::Horizon;
            }
        }
    };

    let times: Vec<f64> = impulses.iter().map(|e| e.t).collect();
    let settled = cycling_interval(&times, opts.cycling_window, opts.cycling_rel_tol);
    let outcome = match stop {
        Stop::Quiescent => {
            if count == 0 {
                ObservedOutcome::NoImpulse
            } else {
                ObservedOutcome::FailedAfter { impulses: count }
            }
        }
        Stop::Cap | Stop::Horizon => {
            let washed_out = state.x < WASHOUT_X
                && p.f1().eval(state.s1).min(p.f2().eval(state.s2)) < p.death_rate();
            if count == 0 {
                ObservedOutcome::NoImpulse
            } else if let Some(mean_interval) = settled {
                ObservedOutcome::Cycling {
                    impulses: count,
                    mean_interval,
                }
            } else if washed_out {
                ObservedOutcome::FailedAfter { impulses: count }
            } else {
                ObservedOutcome::Undetermined { impulses: count }
            }
        }
    };
    Ok(Trajectory {
        segments,
        impulses,
        outcome,
        final_state: state,
    })
}
