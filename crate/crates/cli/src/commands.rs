//! Command implementations. Each returns the rendered output so callers
//! (and tests) can check determinism byte for byte.

use serde::Serialize;

use scf_core::{
    analysis, classify, integrate_batch, orbit, region_geometry, sim, BatchTerminal, ModelParams,
    ReactorState, RegionGeometry,
};

use crate::error::CliError;
use crate::instance::{InstanceFile, Tolerances};
use crate::report::{
    fmt_f, fmt_opt, kv_csv, to_json, GeometryReport, ImpulseRow, ObservedReport, OptimizeReport,
    OrbitReport, PredictionReport, RegionReport, RunRecord, SampleRow,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub struct CommandContext {
    pub params: ModelParams,
    pub geometry: RegionGeometry,
    pub tolerances: Tolerances,
}

impl CommandContext {
    pub fn new(file: &InstanceFile, tol_override: Option<f64>) -> Result<Self, CliError> {
        let params = file.build_params()?;
        let tolerances = file.tolerances(tol_override)?;
        let geometry = region_geometry(&params, &tolerances.quad)?;
        Ok(Self {
            params,
            geometry,
            tolerances,
        })
    }

    fn require_initial(&self, file: &InstanceFile) -> Result<ReactorState, CliError> {
        let user = file.initial_state().ok_or_else(|| {
            CliError::Validation("this command needs an \"initial\" state in the instance".into())
        })?;
        Ok(self.params.canonical_state(user))
    }
}

pub fn cmd_simulate(
    file: &InstanceFile,
    format: Format,
    max_impulses: Option<u32>,
    tol: Option<f64>,
) -> Result<String, CliError> {
    let ctx = CommandContext::new(file, tol)?;
    let p = &ctx.params;
    let initial = ctx.require_initial(file)?;
    let opts = file.run_options(max_impulses, tol)?;

    let prediction = if initial.x > 0.0 {
        Some(analysis::predict_outcome(
            p,
            &ctx.geometry,
            &ctx.tolerances.quad,
            initial,
        )?)
    } else {
        None
    };
    let traj = sim::run(p, &opts, initial)?;

    let impulses: Vec<ImpulseRow> = traj
        .impulses
        .iter()
        .map(|e| {
            let (s1_pre, s2_pre) = p.user_point(e.pre.s1, e.pre.s2);
            let (s1_post, s2_post) = p.user_point(e.post.s1, e.post.s2);
            ImpulseRow {
                k: e.index,
                t: e.t,
                s1_pre,
                s2_pre,
                x_pre: e.pre.x,
                s1_post,
                s2_post,
                x_post: e.post.x,
            }
        })
        .collect();

    // Sample rows in chronological order. Each impulse appears as two
    // consecutive rows at the same time (pre and post state); segment
    // states carry the pre/post rows for interior impulses, so only the
    // initial-impulse chain and a cap-terminated tail need explicit rows.
    let threshold_ends = traj
        .segments
        .iter()
        .filter(|s| matches!(s.terminal, BatchTerminal::HitThreshold { .. }))
        .count();
    let initial_impulses = traj.impulses.len() - threshold_ends;
    let mut samples: Vec<SampleRow> = Vec::new();
    let push = |state: &scf_core::ReactorState, fired: u32, samples: &mut Vec<SampleRow>| {
        let (s1, s2) = p.user_point(state.s1, state.s2);
        samples.push(SampleRow {
            t: state.t,
            s1,
            s2,
            x: state.x,
            impulses: fired,
        });
    };
    if initial_impulses > 0 {
        push(&initial, 0, &mut samples);
        // Interior posts of the chain; the final post opens the first
        // segment (or is the final state when no segment follows).
        let last = if traj.segments.is_empty() {
            initial_impulses
        } else {
            initial_impulses - 1
        };
        for k in 0..last {
            push(&traj.impulses[k].post, k as u32 + 1, &mut samples);
        }
    }
    for (i, seg) in traj.segments.iter().enumerate() {
        let fired = (initial_impulses + i) as u32;
        for s in &seg.states {
            push(s, fired, &mut samples);
        }
    }
    // Tail row when the run stopped right at an impulse.
    let total = traj.impulses.len() as u32;
    let ends_at_impulse = traj
        .segments
        .last()
        .is_some_and(|s| matches!(s.terminal, BatchTerminal::HitThreshold { .. }));
    if ends_at_impulse {
        push(&traj.final_state, total, &mut samples);
    }

    let (outcome, count, mean_interval) = match traj.outcome {
        sim::ObservedOutcome::Cycling {
            impulses,
            mean_interval,
        } => ("cycling".to_string(), impulses, Some(mean_interval)),
        sim::ObservedOutcome::FailedAfter { impulses } => {
            (format!("failed-after-{impulses}"), impulses, None)
        }
        sim::ObservedOutcome::NoImpulse => ("no-impulse".to_string(), 0, None),
        sim::ObservedOutcome::Undetermined { impulses } => {
            ("undetermined".to_string(), impulses, None)
        }
    };
    let (f1, f2) = p.user_point(traj.final_state.s1, traj.final_state.s2);
    let observed = ObservedReport {
        outcome,
        impulses: count,
        mean_interval,
        final_state: SampleRow {
            t: traj.final_state.t,
            s1: f1,
            s2: f2,
            x: traj.final_state.x,
            impulses: count,
        },
    };

    let record = RunRecord {
        geometry: GeometryReport::new(p, &ctx.geometry),
        prediction: prediction
            .as_ref()
            .map(PredictionReport::from)
            .unwrap_or_else(|| PredictionReport {
                verdict: "not-evaluated".into(),
                reason: "zero_initial_biomass",
                max_impulses: None,
                x_threshold: None,
                entry_count: None,
                initial_impulses: 0,
                marginal: false,
            }),
        impulses,
        samples,
        observed,
        tolerances: (&ctx.tolerances).into(),
    };

    Ok(match format {
        Format::Json => to_json(&record),
        Format::Csv => {
            let mut out = String::from("t,s1,s2,x,impulses\n");
            for s in &record.samples {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_f(s.t),
                    fmt_f(s.s1),
                    fmt_f(s.s2),
                    fmt_f(s.x),
                    s.impulses
                ));
            }
            out
        }
    })
}

#[derive(Serialize)]
struct ClassifyReport {
    point: (f64, f64),
    region: RegionReport,
    prediction: Option<PredictionReport>,
    geometry: GeometryReport,
}

pub fn cmd_classify(
    file: &InstanceFile,
    format: Format,
    tol: Option<f64>,
) -> Result<String, CliError> {
    let ctx = CommandContext::new(file, tol)?;
    let p = &ctx.params;
    let initial = ctx.require_initial(file)?;
    let class = classify(p, &ctx.geometry, initial.s1, initial.s2)?;
    let prediction = if initial.x > 0.0 {
        Some(PredictionReport::from(&analysis::predict_outcome(
            p,
            &ctx.geometry,
            &ctx.tolerances.quad,
            initial,
        )?))
    } else {
        None
    };
    let user = file.initial_state().expect("checked above");
    let report = ClassifyReport {
        point: (user.s1, user.s2),
        region: class.into(),
        prediction,
        geometry: GeometryReport::new(p, &ctx.geometry),
    };
    Ok(match format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut rows = vec![
                ("s1".to_string(), fmt_f(report.point.0)),
                ("s2".to_string(), fmt_f(report.point.1)),
                ("label".to_string(), report.region.label.to_string()),
                (
                    "in_omega1".to_string(),
                    report.region.in_omega1.to_string(),
                ),
                (
                    "in_omega1a".to_string(),
                    report.region.in_omega1a.to_string(),
                ),
                (
                    "in_omega_lambda".to_string(),
                    report.region.in_omega_lambda.to_string(),
                ),
                ("v".to_string(), fmt_f(report.region.v)),
            ];
            if let Some(pred) = &report.prediction {
                rows.push(("verdict".to_string(), pred.verdict.clone()));
                rows.push(("reason".to_string(), pred.reason.to_string()));
            }
            rows.extend(report.geometry.rows());
            kv_csv(&rows)
        }
    })
}

#[derive(Serialize)]
struct InitialAnalysis {
    s1: f64,
    s2: f64,
    x: f64,
    region: RegionReport,
    entry_count: Option<u32>,
    x_threshold: Option<f64>,
    prediction: PredictionReport,
}

#[derive(Serialize)]
struct AnalyzeReport {
    geometry: GeometryReport,
    critical_drain: Option<f64>,
    no_viable_fraction: bool,
    initial: Option<InitialAnalysis>,
    tolerances: crate::report::ToleranceReport,
}

pub fn cmd_analyze(
    file: &InstanceFile,
    format: Format,
    tol: Option<f64>,
) -> Result<String, CliError> {
    let ctx = CommandContext::new(file, tol)?;
    let p = &ctx.params;
    if !ctx.geometry.input_in_omega1 {
        return Err(CliError::Core(scf_core::Error::InputUnreachable));
    }
    let (critical_drain, no_viable_fraction) =
        match analysis::critical_drain(p, &ctx.tolerances.quad) {
            Ok(r) => (Some(r), false),
            Err(scf_core::Error::NoViableFraction { .. }) => (None, true),
            Err(e) => return Err(e.into()),
        };
    let initial = match file.initial_state() {
        Some(user) if user.x > 0.0 => {
            let state = p.canonical_state(user);
            let class = classify(p, &ctx.geometry, state.s1, state.s2)?;
            let prediction =
                analysis::predict_outcome(p, &ctx.geometry, &ctx.tolerances.quad, state)?;
            Some(InitialAnalysis {
                s1: user.s1,
                s2: user.s2,
                x: user.x,
                region: class.into(),
                entry_count: prediction.entry_count,
                x_threshold: prediction.x_threshold,
                prediction: (&prediction).into(),
            })
        }
        _ => None,
    };
    let report = AnalyzeReport {
        geometry: GeometryReport::new(p, &ctx.geometry),
        critical_drain,
        no_viable_fraction,
        initial,
        tolerances: (&ctx.tolerances).into(),
    };
    Ok(match format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut rows = report.geometry.rows();
            rows.push((
                "critical_drain".to_string(),
                fmt_opt(report.critical_drain),
            ));
            rows.push((
                "no_viable_fraction".to_string(),
                report.no_viable_fraction.to_string(),
            ));
            if let Some(init) = &report.initial {
                rows.push(("initial_label".to_string(), init.region.label.to_string()));
                rows.push((
                    "entry_count".to_string(),
                    init.entry_count.map(|n| n.to_string()).unwrap_or_default(),
                ));
                rows.push(("x_threshold".to_string(), fmt_opt(init.x_threshold)));
                rows.push(("verdict".to_string(), init.prediction.verdict.clone()));
            }
            kv_csv(&rows)
        }
    })
}

/// Simulate one cycle from the post-impulse point and report the relative
/// residuals against the quadrature-route orbit.
fn orbit_closure(
    p: &ModelParams,
    t: &Tolerances,
    orb: &scf_core::PeriodicOrbit,
) -> Result<(f64, f64, f64, f64), CliError> {
    let start = ReactorState::new(0.0, orb.post_point.0, orb.post_point.1, orb.x_post);
    let seg = integrate_batch(p, &t.integrator, start, orb.period * 20.0 + 100.0)?;
    let end = seg.final_state();
    if !matches!(seg.terminal, BatchTerminal::HitThreshold { .. }) {
        return Err(CliError::Validation(
            "closure cycle did not reach the threshold locus".into(),
        ));
    }
    Ok((
        (end.s1 - orb.pre_point.0) / orb.pre_point.0,
        (end.s2 - orb.pre_point.1) / orb.pre_point.1,
        (end.x - orb.x_pre) / orb.x_pre,
        (seg.t_end - seg.t_start - orb.period) / orb.period,
    ))
}

pub fn cmd_orbit(file: &InstanceFile, format: Format, tol: Option<f64>) -> Result<String, CliError> {
    let ctx = CommandContext::new(file, tol)?;
    let p = &ctx.params;
    let orb = orbit::periodic_orbit(p, &ctx.tolerances.quad, p.drain_fraction())?;
    let closure = orbit_closure(p, &ctx.tolerances, &orb)?;
    let report = OrbitReport::new(p, &orb, closure);
    Ok(match format {
        Format::Json => to_json(&report),
        Format::Csv => kv_csv(&[
            ("drain".to_string(), fmt_f(report.drain)),
            ("x_pre".to_string(), fmt_f(report.x_pre)),
            ("x_post".to_string(), fmt_f(report.x_post)),
            ("pre_s1".to_string(), fmt_f(report.pre_point.0)),
            ("pre_s2".to_string(), fmt_f(report.pre_point.1)),
            ("post_s1".to_string(), fmt_f(report.post_point.0)),
            ("post_s2".to_string(), fmt_f(report.post_point.1)),
            ("period".to_string(), fmt_f(report.period)),
            ("throughput".to_string(), fmt_f(report.throughput)),
            (
                "closure_x_rel_err".to_string(),
                fmt_f(report.closure_rel_err.2),
            ),
            (
                "closure_period_rel_err".to_string(),
                fmt_f(report.closure_rel_err.3),
            ),
        ]),
    })
}

pub fn cmd_optimize(
    file: &InstanceFile,
    format: Format,
    grid_n: usize,
    tol: Option<f64>,
) -> Result<String, CliError> {
    let ctx = CommandContext::new(file, tol)?;
    let p = &ctx.params;
    let opt = orbit::optimize_throughput(p, &ctx.tolerances.quad, grid_n)?;
    let r_star = analysis::critical_drain(p, &ctx.tolerances.quad)?;
    let report = OptimizeReport::new(r_star, grid_n, &opt);
    Ok(match format {
        Format::Json => to_json(&report),
        Format::Csv => kv_csv(&[
            ("r_star".to_string(), fmt_f(report.r_star)),
            ("grid_n".to_string(), report.grid_n.to_string()),
            ("drain".to_string(), fmt_f(report.drain)),
            ("throughput".to_string(), fmt_f(report.throughput)),
            ("period".to_string(), fmt_f(report.period)),
            (
                "boundary_supremum".to_string(),
                report.boundary_supremum.to_string(),
            ),
        ]),
    })
}

#[derive(Serialize)]
struct SweepRow {
    r: f64,
    cycle_growth: Option<f64>,
    period: Option<f64>,
    throughput: Option<f64>,
    x_pre: Option<f64>,
    x_post: Option<f64>,
    status: String,
}

pub fn cmd_sweep(
    file: &InstanceFile,
    format: Format,
    grid_n: usize,
    tol: Option<f64>,
) -> Result<String, CliError> {
    let ctx = CommandContext::new(file, tol)?;
    let p = &ctx.params;
    let q = &ctx.tolerances.quad;
    let n = grid_n.max(2);
    let mut rows = Vec::with_capacity(n);
    for i in 1..=n {
        let r = i as f64 / (n + 1) as f64;
        let row = match analysis::cycle_growth(p, q, r) {
            Err(_) => SweepRow {
                r,
                cycle_growth: None,
                period: None,
                throughput: None,
                x_pre: None,
                x_post: None,
                status: "error".into(),
            },
            Ok(mu) if mu <= 0.0 => SweepRow {
                r,
                cycle_growth: Some(mu),
                period: None,
                throughput: None,
                x_pre: None,
                x_post: None,
                status: "no-orbit".into(),
            },
            Ok(mu) => match orbit::period(p, q, r) {
                Ok(t) => SweepRow {
                    r,
                    cycle_growth: Some(mu),
                    period: Some(t),
                    throughput: Some(r / t),
                    x_pre: Some(mu / r),
                    x_post: Some((1.0 - r) * mu / r),
                    status: "ok".into(),
                },
                Err(_) => SweepRow {
                    r,
                    cycle_growth: Some(mu),
                    period: None,
                    throughput: None,
                    x_pre: None,
                    x_post: None,
                    status: "error".into(),
                },
            },
        };
        rows.push(row);
    }
    Ok(match format {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut out = String::from("r,cycle_growth,period,throughput,x_pre,x_post,status\n");
            for row in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    fmt_f(row.r),
                    fmt_opt(row.cycle_growth),
                    fmt_opt(row.period),
                    fmt_opt(row.throughput),
                    fmt_opt(row.x_pre),
                    fmt_opt(row.x_post),
                    row.status
                ));
            }
            out
        }
    })
}
