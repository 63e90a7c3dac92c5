//! Monotone uptake responses and break-even concentrations.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Uptake response of one resource.
///
/// A valid response satisfies `f(0) = 0`, is strictly increasing for `s > 0`,
/// and is continuously differentiable.
#[derive(Clone)]
pub enum ResponseFunction {
    /// Saturating kinetics `m s / (a + s)` with maximal rate `m` and
    /// half-saturation constant `a`.
    Monod { max_rate: f64, half_saturation: f64 },
    /// Unbounded linear response `k s`.
    Linear { slope: f64 },
    /// Caller-supplied monotone response with its reported derivative.
    Custom(Arc<CustomResponse>),
}

/// A user-defined response; the derivative is required so its shape can be
/// validated and so callers can do sensitivity work.
pub struct CustomResponse {
    pub label: String,
    pub f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub df: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for ResponseFunction {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Monod {
                max_rate,
                half_saturation,
            } => write!(out, "Monod({max_rate}, {half_saturation})"),
            Self::Linear { slope } => write!(out, "Linear({slope})"),
            Self::Custom(c) => write!(out, "Custom({})", c.label),
        }
    }
}

impl ResponseFunction {
    pub fn monod(max_rate: f64, half_saturation: f64) -> Result<Self> {
        if !(max_rate > 0.0) || !max_rate.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Monod max rate must be positive, got {max_rate}"
            )));
        }
        if !(half_saturation > 0.0) || !half_saturation.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Monod half-saturation must be positive, got {half_saturation}"
            )));
        }
        Ok(Self::Monod {
            max_rate,
            half_saturation,
        })
    }

    pub fn linear(slope: f64) -> Result<Self> {
        if !(slope > 0.0) || !slope.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "linear response slope must be positive, got {slope}"
            )));
        }
        Ok(Self::Linear { slope })
    }

    /// Wrap a user-supplied response, checking its shape on a sample grid.
    pub fn custom(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let response = Self::Custom(Arc::new(CustomResponse {
            label: label.into(),
            f: Box::new(f),
            df: Box::new(df),
        }));
        response.validate_shape(10.0)?;
        Ok(response)
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Self::Monod {
                max_rate,
                half_saturation,
            } => max_rate * s / (half_saturation + s),
            Self::Linear { slope } => slope * s,
            Self::Custom(c) => (c.f)(s),
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            Self::Monod {
                max_rate,
                half_saturation,
            } => {
                let d = half_saturation + s;
                max_rate * half_saturation / (d * d)
            }
            Self::Linear { slope } => *slope,
            Self::Custom(c) => (c.df)(s),
        }
    }

    /// Least upper bound of the response, when known analytically.
    pub fn supremum(&self) -> Option<f64> {
        match self {
            Self::Monod { max_rate, .. } => Some(*max_rate),
            Self::Linear { .. } | Self::Custom(_) => None,
        }
    }

    /// Check `f(0) = 0`, strict monotonicity, and consistency of the reported
    /// derivative with a central finite difference on a grid over `(0, grid_max]`.
    pub fn validate_shape(&self, grid_max: f64) -> Result<()> {
        let at_zero = self.eval(0.0);
        if at_zero.abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "response must vanish at zero, got f(0) = {at_zero}"
            )));
        }
        let n = 64;
        let delta = grid_max / (4.0 * n as f64);
        for i in 0..n {
            let s = grid_max * (i as f64 + 0.5) / n as f64;
            if !(self.eval(s + delta) > self.eval(s)) {
                return Err(Error::InvalidParameter(format!(
                    "response is not strictly increasing near s = {s}"
                )));
            }
            let h = (1e-6 * s.max(1e-3)).max(1e-9);
            let fd = (self.eval(s + h) - self.eval(s - h)) / (2.0 * h);
            let reported = self.derivative(s);
            let scale = reported.abs().max(fd.abs()).max(1e-12);
            if (fd - reported).abs() > 1e-6 * scale.max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "reported derivative {reported} disagrees with finite difference {fd} at s = {s}"
                )));
            }
        }
        Ok(())
    }
}

/// Resource level at which a response balances the death rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BreakEven {
    Finite(f64),
    /// The response never reaches the death rate.
    Unbounded,
}

impl BreakEven {
    pub fn finite(&self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(*v),
            Self::Unbounded => None,
        }
    }

    /// True when the break-even level exists and lies at or below `level`.
    pub fn at_most(&self, level: f64) -> bool {
        matches!(self, Self::Finite(v) if *v <= level)
    }
}

/// Solve `f(level) = death_rate` by bracketing and bisection.
///
/// Returns [`BreakEven::Unbounded`] when the response stays below the death
/// rate (for a bounded response, when its supremum does not exceed it).
pub fn break_even(f: &ResponseFunction, death_rate: f64) -> Result<BreakEven> {
    if !(death_rate > 0.0) || !death_rate.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "death rate must be positive, got {death_rate}"
        )));
    }
    if let Some(sup) = f.supremum() {
        if sup <= death_rate {
            return Ok(BreakEven::Unbounded);
        }
    }
    // Expand the bracket geometrically; a response without a known supremum
    // that stays below the death rate out to 1e12 is treated as unbounded.
    let mut hi = 1.0;
    while f.eval(hi) <= death_rate {
        hi *= 2.0;
        if hi > 1e12 {
            return Ok(BreakEven::Unbounded);
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f.eval(mid) > death_rate {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-13 * hi.max(1.0) {
            break;
        }
    }
    let mut level = 0.5 * (lo + hi);
    // Newton polish; the bisection bracket keeps this safe.
    for _ in 0..4 {
        let slope = f.derivative(level);
        if slope <= 0.0 || !slope.is_finite() {
            break;
        }
        let next = level - (f.eval(level) - death_rate) / slope;
        if next.is_finite() && next > lo - 1e-12 && next < hi + 1e-12 {
            level = next;
        } else {
            break;
        }
    }
    Ok(BreakEven::Finite(level))
}
