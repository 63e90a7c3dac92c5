//! Report structures and deterministic rendering.
//!
//! CSV cells print floats with 17 significant digits, '.' decimal separator,
//! and '\n' line endings, so identical inputs give byte-identical files.
//! JSON uses shortest-round-trip floats with a fixed field order.

use serde::Serialize;

use scf_core::{
    ModelParams, OutcomePrediction, PeriodicOrbit, PredictionReason, RegionClass, RegionGeometry,
    RegionLabel, ThroughputOptimum, Verdict,
};

use crate::instance::Tolerances;

/// 17-significant-digit rendering used for every CSV float cell.
pub fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ToleranceReport {
    pub quad_abs_tol: f64,
    pub quad_rel_tol: f64,
    pub quad_max_subdivisions: usize,
    pub integrator_abs_tol: f64,
    pub integrator_rel_tol: f64,
    pub event_tol_rel: f64,
}

impl From<&Tolerances> for ToleranceReport {
    fn from(t: &Tolerances) -> Self {
        Self {
            quad_abs_tol: t.quad.abs_tol,
            quad_rel_tol: t.quad.rel_tol,
            quad_max_subdivisions: t.quad.max_subdivisions,
            integrator_abs_tol: t.integrator.abs_tol,
            integrator_rel_tol: t.integrator.rel_tol,
            event_tol_rel: t.integrator.event_tol_rel,
        }
    }
}

/// Geometry echo. Plane quantities are reported in the canonical
/// orientation; `relabeled` records whether the caller's resource labels
/// were swapped to reach it. The break-even levels are mapped back to the
/// caller's labels.
#[derive(Debug, Clone, Serialize)]
pub struct GeometryReport {
    pub relabeled: bool,
    pub r12: f64,
    pub r21: f64,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub s1_bar_post: f64,
    pub s2_bar_post: f64,
    pub invariant_s2: f64,
    pub invariant_s2_post: f64,
    pub entry_s2_upper: f64,
    pub entry_v_lower: f64,
    pub entry_s2_lower: Option<f64>,
    pub entry_v_upper: Option<f64>,
    pub v_corner: f64,
    pub v_low_edge: f64,
    pub v_high_edge: f64,
    pub input_in_omega1: bool,
    pub cycle_growth: Option<f64>,
    pub impulse_bound: Option<u32>,
    pub omega_lambda_v: Option<(f64, f64)>,
    pub omega_lambda_gap: bool,
}

impl GeometryReport {
    pub fn new(p: &ModelParams, g: &RegionGeometry) -> Self {
        let l1 = g.lambda1.finite();
        let l2 = g.lambda2.finite();
        let (lambda1, lambda2) = if p.relabeled() { (l2, l1) } else { (l1, l2) };
        Self {
            relabeled: p.relabeled(),
            r12: g.r12,
            r21: g.r21,
            lambda1,
            lambda2,
            s1_bar_post: g.s1_bar_post,
            s2_bar_post: g.s2_bar_post,
            invariant_s2: g.invariant_s2,
            invariant_s2_post: g.invariant_s2_post,
            entry_s2_upper: g.entry_s2_upper,
            entry_v_lower: g.entry_v_lower,
            entry_s2_lower: g.entry_s2_lower,
            entry_v_upper: g.entry_v_upper,
            v_corner: g.v_corner,
            v_low_edge: g.v_low_edge,
            v_high_edge: g.v_high_edge,
            input_in_omega1: g.input_in_omega1,
            cycle_growth: g.cycle_growth,
            impulse_bound: g.impulse_bound,
            omega_lambda_v: g.omega_lambda_v,
            omega_lambda_gap: g.omega_lambda_gap,
        }
    }

    /// Flat key/value rows for the CSV rendering.
    pub fn rows(&self) -> Vec<(String, String)> {
        let b = |v: bool| if v { "true" } else { "false" }.to_string();
        vec![
            ("relabeled".into(), b(self.relabeled)),
            ("r12".into(), fmt_f(self.r12)),
            ("r21".into(), fmt_f(self.r21)),
            ("lambda1".into(), fmt_opt(self.lambda1)),
            ("lambda2".into(), fmt_opt(self.lambda2)),
            ("s1_bar_post".into(), fmt_f(self.s1_bar_post)),
            ("s2_bar_post".into(), fmt_f(self.s2_bar_post)),
            ("invariant_s2".into(), fmt_f(self.invariant_s2)),
            ("invariant_s2_post".into(), fmt_f(self.invariant_s2_post)),
            ("entry_s2_upper".into(), fmt_f(self.entry_s2_upper)),
            ("entry_v_lower".into(), fmt_f(self.entry_v_lower)),
            ("entry_s2_lower".into(), fmt_opt(self.entry_s2_lower)),
            ("entry_v_upper".into(), fmt_opt(self.entry_v_upper)),
            ("v_corner".into(), fmt_f(self.v_corner)),
            ("v_low_edge".into(), fmt_f(self.v_low_edge)),
            ("v_high_edge".into(), fmt_f(self.v_high_edge)),
            ("input_in_omega1".into(), b(self.input_in_omega1)),
            ("cycle_growth".into(), fmt_opt(self.cycle_growth)),
            (
                "impulse_bound".into(),
                self.impulse_bound.map(|n| n.to_string()).unwrap_or_default(),
            ),
            ("omega_lambda_gap".into(), b(self.omega_lambda_gap)),
        ]
    }
}

pub fn region_label_name(label: RegionLabel) -> &'static str {
    match label {
        RegionLabel::BelowThreshold => "below_threshold",
        RegionLabel::BoundaryLine => "boundary_line",
        RegionLabel::Omega0 => "omega0",
        RegionLabel::Omega1 => "omega1",
        RegionLabel::Omega1A => "omega1a",
        RegionLabel::OmegaLambda => "omega_lambda",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionReport {
    pub label: &'static str,
    pub in_omega1: bool,
    pub in_omega1a: bool,
    pub in_omega_lambda: bool,
    pub v: f64,
}

impl From<RegionClass> for RegionReport {
    fn from(c: RegionClass) -> Self {
        Self {
            label: region_label_name(c.label),
            in_omega1: c.in_omega1,
            in_omega1a: c.in_omega1a,
            in_omega_lambda: c.in_omega_lambda,
            v: c.v,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictionReport {
    pub verdict: String,
    pub reason: &'static str,
    pub max_impulses: Option<u32>,
    pub x_threshold: Option<f64>,
    pub entry_count: Option<u32>,
    pub initial_impulses: u32,
    pub marginal: bool,
}

impl From<&OutcomePrediction> for PredictionReport {
    fn from(p: &OutcomePrediction) -> Self {
        let (verdict, max_impulses) = match p.verdict {
            Verdict::ConvergesToPeriodicOrbit => ("converges_to_periodic_orbit".to_string(), None),
            Verdict::FailsFiniteImpulses { max_impulses } => {
                ("fails_finite_impulses".to_string(), max_impulses)
            }
            Verdict::FailsUnboundedCycleTime => ("fails_unbounded_cycle_time".to_string(), None),
            Verdict::NoImpulse => ("no_impulse".to_string(), None),
        };
        let reason = match p.reason {
            PredictionReason::StartUnreachable => "start_unreachable",
            PredictionReason::StartOnMarginalLine => "start_on_marginal_line",
            PredictionReason::InputUnreachable => "input_unreachable",
            PredictionReason::CycleGrowthNegative => "cycle_growth_negative",
            PredictionReason::CycleGrowthZero => "cycle_growth_zero",
            PredictionReason::BelowMinimumInoculum => "below_minimum_inoculum",
            PredictionReason::AboveMinimumInoculum => "above_minimum_inoculum",
        };
        Self {
            verdict,
            reason,
            max_impulses,
            x_threshold: p.x_threshold,
            entry_count: p.entry_count,
            initial_impulses: p.initial_impulses,
            marginal: p.marginal,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitReport {
    pub drain: f64,
    pub x_pre: f64,
    pub x_post: f64,
    pub pre_point: (f64, f64),
    pub post_point: (f64, f64),
    pub period: f64,
    pub throughput: f64,
    /// Relative residuals of one simulated cycle against the quadrature
    /// route: (s1, s2, x, period).
    pub closure_rel_err: (f64, f64, f64, f64),
}

impl OrbitReport {
    pub fn new(p: &ModelParams, orbit: &PeriodicOrbit, closure: (f64, f64, f64, f64)) -> Self {
        Self {
            drain: orbit.drain,
            x_pre: orbit.x_pre,
            x_post: orbit.x_post,
            pre_point: p.user_point(orbit.pre_point.0, orbit.pre_point.1),
            post_point: p.user_point(orbit.post_point.0, orbit.post_point.1),
            period: orbit.period,
            throughput: orbit.throughput,
            closure_rel_err: closure,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeReport {
    pub r_star: f64,
    pub grid_n: usize,
    pub drain: f64,
    pub throughput: f64,
    pub period: f64,
    pub boundary_supremum: bool,
}

impl OptimizeReport {
    pub fn new(r_star: f64, grid_n: usize, opt: &ThroughputOptimum) -> Self {
        Self {
            r_star,
            grid_n,
            drain: opt.drain,
            throughput: opt.throughput,
            period: opt.period,
            boundary_supremum: opt.boundary_supremum,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ImpulseRow {
    pub k: u32,
    pub t: f64,
    pub s1_pre: f64,
    pub s2_pre: f64,
    pub x_pre: f64,
    pub s1_post: f64,
    pub s2_post: f64,
    pub x_post: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SampleRow {
    pub t: f64,
    pub s1: f64,
    pub s2: f64,
    pub x: f64,
    /// Impulses fired before this sample.
    pub impulses: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct ObservedReport {
    pub outcome: String,
    pub impulses: u32,
    pub mean_interval: Option<f64>,
    pub final_state: SampleRow,
}

/// Full simulation record: geometry echo, impulse table, trajectory
/// samples, prediction, observed outcome, and the tolerances used.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub geometry: GeometryReport,
    pub prediction: PredictionReport,
    pub impulses: Vec<ImpulseRow>,
    pub samples: Vec<SampleRow>,
    pub observed: ObservedReport,
    pub tolerances: ToleranceReport,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("report serializes");
    out.push('\n');
    out
}

/// Key/value CSV used by the report-style commands.
pub fn kv_csv(rows: &[(String, String)]) -> String {
    let mut out = String::from("key,value\n");
    for (k, v) in rows {
        out.push_str(k);
        out.push(',');
        out.push_str(v);
        out.push('\n');
    }
    out
}
