//! Embedded Dormand–Prince 5(4) step with 4th-order dense output, for the
//! three-component reactor state.

use crate::error::{Error, Result};

pub type State3 = [f64; 3];

/// Step-size control settings for the batch integrator.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Event times are bisected until the bracket width falls below
    /// `event_tol_rel * max(1, |t|)`.
    pub event_tol_rel: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            max_steps: 1_000_000,
            event_tol_rel: 1e-10,
        }
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense-output weights.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn axpy(y: &State3, pairs: &[(f64, &State3)], h: f64) -> State3 {
    let mut out = *y;
    for (c, k) in pairs {
        for (o, ki) in out.iter_mut().zip(k.iter()) {
            *o += h * c * ki;
        }
    }
    out
}

/// Continuous extension of one accepted step; valid for `t` in `[t0, t0 + h]`.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    rcont: [State3; 5],
}

impl DenseStep {
    pub fn eval(&self, t: f64) -> State3 {
        let theta = if self.h == 0.0 {
            0.0
        } else {
            ((t - self.t0) / self.h).clamp(0.0, 1.0)
        };
        let omt = 1.0 - theta;
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.rcont[0][i]
                + theta
                    * (self.rcont[1][i]
                        + omt
                            * (self.rcont[2][i]
                                + theta * (self.rcont[3][i] + omt * self.rcont[4][i])));
        }
        out
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.h
    }
}

/// Result of one accepted step.
pub struct Step {
    pub t: f64,
    pub y: State3,
    pub dy: State3,
    pub dense: DenseStep,
}

/// One-step integrator; holds the current state and the FSAL derivative.
pub struct Dopri5<'a, F: Fn(&State3) -> State3> {
    deriv: &'a F,
    opts: IntegratorOptions,
    pub t: f64,
    pub y: State3,
    pub dy: State3,
    h: f64,
    steps_taken: usize,
}

impl<'a, F: Fn(&State3) -> State3> Dopri5<'a, F> {
    pub fn new(deriv: &'a F, opts: IntegratorOptions, t0: f64, y0: State3) -> Self {
        let dy = deriv(&y0);
        let ynorm = y0.iter().fold(0f64, |m, v| m.max(v.abs()));
        let fnorm = dy.iter().fold(0f64, |m, v| m.max(v.abs()));
        let h = if fnorm > 0.0 {
            (0.01 * (ynorm + opts.abs_tol) / fnorm).clamp(1e-8, 1.0)
        } else {
            1.0
        };
        Self {
            deriv,
            opts,
            t: t0,
            y: y0,
            dy,
            h,
            steps_taken: 0,
        }
    }

    /// Advance by one accepted step, not beyond `t_max`. When `h_force` is
    /// given the step size is pinned (used to land exactly on an event).
    pub fn step(&mut self, t_max: f64, h_force: Option<f64>) -> Result<Step> {
        let mut h = h_force.unwrap_or(self.h).min(t_max - self.t);
        if !(h > 0.0) {
            return Err(Error::StepSizeUnderflow { t: self.t });
        }
        loop {
            self.steps_taken += 1;
            if self.steps_taken > self.opts.max_steps {
                return Err(Error::MaxStepsExceeded {
                    t: self.t,
                    max_steps: self.opts.max_steps,
                });
            }
            if self.t + h == self.t {
                return Err(Error::StepSizeUnderflow { t: self.t });
            }
            let f = self.deriv;
            let k1 = self.dy;
            let k2 = f(&axpy(&self.y, &[(A21, &k1)], h));
            let k3 = f(&axpy(&self.y, &[(A31, &k1), (A32, &k2)], h));
            let k4 = f(&axpy(&self.y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
            let k5 = f(&axpy(
                &self.y,
                &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)],
                h,
            ));
            let k6 = f(&axpy(
                &self.y,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                h,
            ));
            let y_new = axpy(
                &self.y,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
                h,
            );
            let k7 = f(&y_new);

            let mut err_norm = 0.0f64;
            for i in 0..3 {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let sc = self.opts.abs_tol
                    + self.opts.rel_tol * self.y[i].abs().max(y_new[i].abs());
                err_norm += (e / sc) * (e / sc);
            }
            err_norm = (err_norm / 3.0).sqrt();

            if err_norm <= 1.0 || h_force.is_some() {
                let mut ydiff = [0.0; 3];
                let mut bspl = [0.0; 3];
                let mut r5 = [0.0; 3];
                for i in 0..3 {
                    ydiff[i] = y_new[i] - self.y[i];
                    bspl[i] = h * k1[i] - ydiff[i];
                    r5[i] = h
                        * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i]);
                }
                let mut r4 = [0.0; 3];
                for i in 0..3 {
                    r4[i] = ydiff[i] - h * k7[i] - bspl[i];
                }
                let dense = DenseStep {
                    t0: self.t,
                    h,
                    rcont: [self.y, ydiff, bspl, r4, r5],
                };
                let t_new = self.t + h;
                // PI-free controller: plain power law with safety factor.
                let scale = if err_norm > 0.0 {
                    (0.9 * err_norm.powf(-0.2)).clamp(0.2, 10.0)
                } else {
                    10.0
                };
                if h_force.is_none() {
                    self.h = h * scale;
                }
                self.t = t_new;
                self.y = y_new;
                self.dy = k7;
                return Ok(Step {
                    t: t_new,
                    y: y_new,
                    dy: k7,
                    dense,
                });
            }
            let scale = (0.9 * err_norm.powf(-0.2)).clamp(0.2, 1.0);
            h *= scale;
            self.h = h;
        }
    }
}

/// Bisect a scalar function of time on a dense step. `g(t_lo) > 0 >= g(t_hi)`
/// is assumed; returns the first time where `g` is treated as crossing zero.
pub fn bisect_event_time(
    dense: &DenseStep,
    g: impl Fn(f64, &State3) -> f64,
    mut t_lo: f64,
    mut t_hi: f64,
    tol_rel: f64,
) -> f64 {
    for _ in 0..200 {
        if t_hi - t_lo <= tol_rel * t_hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (t_lo + t_hi);
        if mid <= t_lo || mid >= t_hi {
            break;
        }
        let y = dense.eval(mid);
        if g(mid, &y) > 0.0 {
            t_lo = mid;
        } else {
            t_hi = mid;
        }
    }
    t_hi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_exponential_decay() {
        let f = |y: &State3| [-y[0], -2.0 * y[1], 0.5 * y[2]];
        let mut solver = Dopri5::new(&f, IntegratorOptions::default(), 0.0, [1.0, 1.0, 1.0]);
        while solver.t < 1.0 {
            solver.step(1.0, None).unwrap();
        }
        assert!((solver.y[0] - (-1f64).exp()).abs() < 1e-9);
        assert!((solver.y[1] - (-2f64).exp()).abs() < 1e-9);
        assert!((solver.y[2] - 0.5f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn dense_output_matches_exact_solution_inside_steps() {
        let f = |y: &State3| [-y[0], 0.0, 0.0];
        let mut solver = Dopri5::new(&f, IntegratorOptions::default(), 0.0, [1.0, 0.0, 0.0]);
        while solver.t < 2.0 {
            let step = solver.step(2.0, None).unwrap();
            for k in 1..4 {
                let t = step.dense.t0 + step.dense.h * k as f64 / 4.0;
                let y = step.dense.eval(t);
                assert!(
                    (y[0] - (-t).exp()).abs() < 1e-9,
                    "dense output off at t = {t}"
                );
            }
        }
    }

    #[test]
    fn forced_step_lands_exactly() {
        let f = |y: &State3| [-y[0], 0.0, 0.0];
        let mut solver = Dopri5::new(&f, IntegratorOptions::default(), 0.0, [1.0, 0.0, 0.0]);
        let step = solver.step(10.0, Some(0.125)).unwrap();
        assert_eq!(step.t, 0.125);
    }

    #[test]
    fn event_bisection_finds_crossing() {
        let f = |y: &State3| [-y[0], 0.0, 0.0];
        let mut solver = Dopri5::new(&f, IntegratorOptions::default(), 0.0, [1.0, 0.0, 0.0]);
        // Find where y0 = 0.8 (t = ln(1/0.8)).
        let target = 0.8;
        loop {
            let step = solver.step(5.0, None).unwrap();
            if step.y[0] <= target {
                let t = bisect_event_time(
                    &step.dense,
                    |_, y| y[0] - target,
                    step.dense.t0,
                    step.t,
                    1e-12,
                );
                assert!((t - (1.0 / target).ln()).abs() < 1e-9);
                break;
            }
        }
    }
}
