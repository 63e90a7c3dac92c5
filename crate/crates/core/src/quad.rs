//! Adaptive Gauss–Kronrod quadrature.
//!
//! A 15-point Kronrod rule supplies the panel estimates and the embedded
//! 7-point Gauss rule the error estimate; panels are split at the largest
//! error first until the requested tolerance is met.

use crate::error::{Error, Result};

/// Tolerances and subdivision budget for the quadrature routines.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 400,
        }
    }
}

impl QuadratureOptions {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !(rel_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "quadrature tolerances must be positive, got abs {abs_tol}, rel {rel_tol}"
            )));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        })
    }

    pub fn with_max_subdivisions(mut self, max_subdivisions: usize) -> Self {
        self.max_subdivisions = max_subdivisions;
        self
    }
}

// 15-point Kronrod abscissae and weights with the embedded 7-point Gauss
// weights (QUADPACK values).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// One Gauss–Kronrod panel: returns (kronrod value, error estimate).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let (value, error, _) = gk15_full(f, a, b);
    (value, error)
}

/// Panel rule that also reports the integral of |f|, used to recognize the
/// rounding floor of the error estimate.
fn gk15_full<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut res_gauss = f_center * WG[3];
    let mut res_kronrod = f_center * WGK[7];
    let mut res_abs = f_center.abs() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f_lo = f(center - dx);
        let f_hi = f(center + dx);
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * (f_lo + f_hi);
        }
        res_kronrod += WGK[j] * (f_lo + f_hi);
        res_abs += WGK[j] * (f_lo.abs() + f_hi.abs());
    }
    let value = res_kronrod * half;
    let err = ((res_kronrod - res_gauss) * half).abs();
    (value, err, res_abs * half.abs())
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Below this the error estimate is floating-point noise; splitting
    /// such a panel cannot reduce it.
    floor: f64,
}

fn make_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let (value, error, res_abs) = gk15_full(f, a, b);
    Panel {
        a,
        b,
        value,
        error,
        floor: 50.0 * f64::EPSILON * res_abs,
    }
}

/// Integral of `f` over `[a, b]` (`a <= b`) by adaptive panel splitting.
pub fn integrate<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    opts: &QuadratureOptions,
) -> Result<f64> {
    integrate_split(f, a, b, &[], opts)
}

/// Same as [`integrate`], with the interval pre-split at the given interior
/// breakpoints (used to keep panels clear of integrand kinks).
pub fn integrate_split<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: &QuadratureOptions,
) -> Result<f64> {
    if b < a {
        return Err(Error::InvalidParameter(format!(
            "integration bounds out of order: [{a}, {b}]"
        )));
    }
    if b - a <= f64::EPSILON * a.abs().max(b.abs()) {
        return Ok(0.0);
    }
    let mut edges = vec![a];
    for &x in breakpoints {
        if x > a && x < b {
            edges.push(x);
        }
    }
    edges.push(b);
    edges.sort_by(|p, q| p.partial_cmp(q).unwrap());

    let mut panels: Vec<Panel> = Vec::with_capacity(edges.len() + 16);
    for w in edges.windows(2) {
        panels.push(make_panel(f, w[0], w[1]));
    }

    let mut splits = 0;
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let total_err: f64 = panels.iter().map(|p| p.error).sum();
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= target {
            if !total.is_finite() {
                return Err(Error::QuadratureNonConvergence {
                    estimate: total,
                    error: total_err,
                    requested: target,
                });
            }
            return Ok(total);
        }
        if splits >= opts.max_subdivisions {
            return Err(Error::QuadratureNonConvergence {
                estimate: total,
                error: total_err,
                requested: target,
            });
        }
        // Split the panel with the largest error estimate that is still
        // above its rounding floor; once every estimate sits at the floor,
        // further drilling only accumulates noise.
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.error > p.floor)
            .max_by(|(_, p), (_, q)| p.error.partial_cmp(&q.error).unwrap())
            .map(|(i, _)| i);
        let Some(worst) = worst else {
            return Err(Error::QuadratureNonConvergence {
                estimate: total,
                error: total_err,
                requested: target,
            });
        };
        let Panel { a, b, .. } = panels[worst];
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // Interval no longer splittable in f64; accept what we have.
            return Ok(total);
        }
        panels[worst] = make_panel(f, a, mid);
        panels.push(make_panel(f, mid, b));
        splits += 1;
    }
}

/// Locate the zeros of a continuous function on `[a, b]` by scanning a
/// uniform grid for sign changes and bisecting each bracket.
pub fn sign_change_roots<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, scan: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    if !(b > a) {
        return roots;
    }
    let mut prev_x = a;
    let mut prev_f = f(a);
    for i in 1..=scan {
        let x = a + (b - a) * i as f64 / scan as f64;
        let fx = f(x);
        if prev_f == 0.0 {
            roots.push(prev_x);
        } else if prev_f * fx < 0.0 {
            roots.push(bisect_root(f, prev_x, x));
        }
        prev_x = x;
        prev_f = fx;
    }
    roots
}

/// Bisection on a bracketing interval; assumes a sign change.
pub fn bisect_root<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (f_lo < 0.0) == (fm < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}
