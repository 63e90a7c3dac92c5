//! The `verify` command: numerical invariant checks on one instance.
//!
//! Sampling is driven by a seeded generator (`SCF_LAB_SEED`), so repeated
//! runs probe the same points.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scf_core::{
    analysis, biomass_change, classify, integrate_batch, lift_to_refill, orbit,
    project_to_threshold, region_geometry, sim, BatchTerminal, ModelParams, ReactorState,
    RegionGeometry, Verdict,
};

use crate::error::CliError;
use crate::instance::InstanceFile;

struct Suite {
    lines: Vec<String>,
    checks: usize,
    failed: usize,
}

impl Suite {
    fn record(&mut self, name: &str, result: Result<(), String>) {
        self.checks += 1;
        match result {
            Ok(()) => self.lines.push(format!("ok   - {name}")),
            Err(detail) => {
                self.failed += 1;
                self.lines.push(format!("FAIL - {name}: {detail}"));
            }
        }
    }

    fn skip(&mut self, name: &str, why: &str) {
        self.lines.push(format!("skip - {name} ({why})"));
    }
}

fn sample_reachable(
    rng: &mut ChaCha8Rng,
    p: &ModelParams,
    g: &RegionGeometry,
) -> Option<(f64, f64)> {
    for _ in 0..400 {
        let s1 = rng.random_range(0.0..1.3 * p.s1_in());
        let s2 = rng.random_range(0.0..1.3 * p.s2_in());
        let Ok(class) = classify(p, g, s1, s2) else {
            continue;
        };
        if class.in_omega1 {
            return Some((s1, s2));
        }
    }
    None
}

pub fn cmd_verify(file: &InstanceFile, tol: Option<f64>, seed: u64) -> Result<String, CliError> {
    let p = file.build_params()?;
    let t = file.tolerances(tol)?;
    let g = region_geometry(&p, &t.quad)?;
    let q = &t.quad;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut suite = Suite {
        lines: vec![format!("verify: seed = {seed}")],
        checks: 0,
        failed: 0,
    };

    // Impulse contraction of the conserved chord level.
    suite.record("impulse contracts v by (1 - r)", {
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let s1 = rng.random_range(0.0..1.5 * p.s1_in());
            let s2 = rng.random_range(0.0..1.5 * p.s2_in());
            let (p1, p2) = p.impulse_point(s1, s2);
            let err = (p.v(p1, p2) - (1.0 - p.drain_fraction()) * p.v(s1, s2)).abs();
            worst = worst.max(err / p.v_scale());
        }
        if worst <= 1e-12 {
            Ok(())
        } else {
            Err(format!("relative error {worst:.3e} > 1e-12"))
        }
    });

    // Projection/lift inverse pair on the threshold locus.
    suite.record("lift is a right inverse of the projection", {
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let (s1, s2) = if rng.random::<bool>() {
                (p.s1_bar(), rng.random_range(0.0..p.s2_bar()))
            } else {
                (rng.random_range(0.0..p.s1_bar()), p.s2_bar())
            };
            let Ok((u1, u2)) = lift_to_refill(&p, s1, s2) else {
                continue;
            };
            let Ok((b1, b2)) = project_to_threshold(&p, u1, u2) else {
                continue;
            };
            worst = worst.max((b1 - s1).abs().max((b2 - s2).abs()));
        }
        if worst <= 1e-9 * (1.0 + p.s1_in().max(p.s2_in())) {
            Ok(())
        } else {
            Err(format!("worst residual {worst:.3e}"))
        }
    });

    // Conserved level and chord slope along batch segments.
    suite.record("v conserved along batch segments", {
        let mut checked = 0;
        let mut result = Ok(());
        for _ in 0..40 {
            if checked >= 20 {
                break;
            }
            let Some((s1, s2)) = sample_reachable(&mut rng, &p, &g) else {
                break;
            };
            let v0 = p.v(s1, s2);
            if v0.abs() < 1e-3 * p.v_scale() {
                continue;
            }
            let x0 = rng.random_range(0.05..1.0);
            let Ok(seg) = integrate_batch(&p, &t.integrator, ReactorState::new(0.0, s1, s2, x0), 300.0)
            else {
                continue;
            };
            checked += 1;
            for s in &seg.states {
                let drift = (p.v(s.s1, s.s2) - v0).abs();
                if drift > 1e-9 * v0.abs() {
                    result = Err(format!("drift {:.3e} at t = {}", drift / v0.abs(), s.t));
                }
            }
        }
        if checked == 0 {
            Err("no segments could be sampled".into())
        } else {
            result
        }
    });

    // Terminal biomass: integration route vs chord quadrature route.
    suite.record("integration matches the chord quadrature", {
        let mut checked = 0;
        let mut result = Ok(());
        for _ in 0..60 {
            if checked >= 10 {
                break;
            }
            let Some((s1, s2)) = sample_reachable(&mut rng, &p, &g) else {
                break;
            };
            let x0 = rng.random_range(0.2..1.2);
            let Ok(seg) = integrate_batch(&p, &t.integrator, ReactorState::new(0.0, s1, s2, x0), 300.0)
            else {
                continue;
            };
            let BatchTerminal::HitThreshold { .. } = seg.terminal else {
                continue;
            };
            let end = seg.final_state();
            if end.x < 1e-3 {
                continue;
            }
            let Ok(delta) = biomass_change(&p, q, (end.s1, end.s2), (s1, s2)) else {
                continue;
            };
            checked += 1;
            let expect = x0 + delta;
            let rel = ((end.x - expect) / expect).abs();
            if rel > 1e-6 {
                result = Err(format!("relative mismatch {rel:.3e} from ({s1}, {s2})"));
            }
        }
        if checked == 0 {
            Err("no threshold-reaching segments sampled".into())
        } else {
            result
        }
    });

    match g.cycle_growth {
        Some(mu) if mu > 0.0 => {
            suite.record("periodic orbit closes under simulation", {
                (|| -> Result<(), String> {
                    let orb = orbit::periodic_orbit(&p, q, p.drain_fraction())
                        .map_err(|e| e.to_string())?;
                    let start = ReactorState::new(0.0, orb.post_point.0, orb.post_point.1, orb.x_post);
                    let seg = integrate_batch(&p, &t.integrator, start, orb.period * 20.0 + 100.0)
                        .map_err(|e| e.to_string())?;
                    let end = seg.final_state();
                    if !matches!(seg.terminal, BatchTerminal::HitThreshold { .. }) {
                        return Err("cycle did not reach the threshold".into());
                    }
                    for s in &seg.states[..seg.states.len() - 1] {
                        if p.impulse_due(s.s1, s.s2) {
                            return Err("more than one impulse per period".into());
                        }
                    }
                    let rel_x = ((end.x - orb.x_pre) / orb.x_pre).abs();
                    let rel_t = ((seg.t_end - orb.period) / orb.period).abs();
                    if rel_x > 1e-6 || rel_t > 1e-6 {
                        return Err(format!("closure residuals x {rel_x:.3e}, t {rel_t:.3e}"));
                    }
                    Ok(())
                })()
            });

            suite.record("orbit profile routes agree", {
                (|| -> Result<(), String> {
                    let prof = orbit::OrbitProfile::build(&p, q, p.drain_fraction())
                        .map_err(|e| e.to_string())?;
                    for i in 0..=32 {
                        let v = prof.s1_lo + (prof.s1_hi - prof.s1_lo) * i as f64 / 32.0;
                        let d = (prof.x_from_pre(v) - prof.x_from_post(v)).abs();
                        if d > 1e-9 {
                            return Err(format!("routes differ by {d:.3e} at s1 = {v}"));
                        }
                    }
                    Ok(())
                })()
            });

            suite.record("entry count formula matches iteration", {
                let mut result = Ok(());
                let mut checked = 0;
                'sample: for _ in 0..40 {
                    if checked >= 15 {
                        break;
                    }
                    let Some((s1, s2)) = sample_reachable(&mut rng, &p, &g) else {
                        break;
                    };
                    let Ok(n) = analysis::entry_count(&p, &g, s1, s2) else {
                        continue;
                    };
                    let v0 = p.v(s1, s2);
                    let shrink = 1.0 - p.drain_fraction();
                    for k in 0..=n {
                        let vk = shrink.powi(k as i32) * v0;
                        for edge in [g.entry_v_lower, g.entry_v_upper.unwrap()] {
                            if (vk / edge - 1.0).abs() < 1e-9 {
                                continue 'sample;
                            }
                        }
                    }
                    checked += 1;
                    let mut point = (s1, s2);
                    let mut count = 0u32;
                    loop {
                        let Ok(hit) = project_to_threshold(&p, point.0, point.1) else {
                            continue 'sample;
                        };
                        point = p.impulse_point(hit.0, hit.1);
                        count += 1;
                        if classify(&p, &g, point.0, point.1)
                            .map(|c| c.in_omega1a)
                            .unwrap_or(false)
                        {
                            break;
                        }
                        if count > 200 {
                            result = Err(format!("iteration from ({s1}, {s2}) never entered"));
                            continue 'sample;
                        }
                    }
                    if count != n {
                        result = Err(format!(
                            "formula {n} vs iteration {count} from ({s1}, {s2})"
                        ));
                    }
                }
                result
            });
        }
        _ => {
            suite.skip(
                "periodic orbit closes under simulation",
                "no positive cycle growth",
            );
            suite.skip("orbit profile routes agree", "no positive cycle growth");
            suite.skip(
                "entry count formula matches iteration",
                "no positive cycle growth",
            );
        }
    }

    // Prediction against observation for sampled inocula.
    suite.record("prediction matches simulation", {
        let mut result = Ok(());
        let mut checked = 0;
        let mu = g.cycle_growth.unwrap_or(-1.0);
        for _ in 0..40 {
            if checked >= 6 {
                break;
            }
            if mu.abs() < 5e-4 && mu > -5e-4 {
                break;
            }
            let Some((s1, s2)) = sample_reachable(&mut rng, &p, &g) else {
                break;
            };
            let x0 = rng.random_range(0.02..1.2);
            let state = ReactorState::new(0.0, s1, s2, x0);
            let Ok(pred) = analysis::predict_outcome(&p, &g, q, state) else {
                continue;
            };
            if let Some(x_thr) = pred.x_threshold {
                if (x0 - x_thr).abs() < 5e-3 {
                    continue;
                }
            }
            let opts = sim::RunOptions {
                max_impulses: 80,
                integrator: t.integrator,
                ..Default::default()
            };
            let Ok(traj) = sim::run(&p, &opts, state) else {
                continue;
            };
            checked += 1;
            let agree = matches!(
                (&pred.verdict, &traj.outcome),
                (
                    Verdict::ConvergesToPeriodicOrbit,
                    sim::ObservedOutcome::Cycling { .. }
                ) | (
                    Verdict::FailsFiniteImpulses { .. },
                    sim::ObservedOutcome::FailedAfter { .. }
                        | sim::ObservedOutcome::NoImpulse
                ) | (Verdict::NoImpulse, sim::ObservedOutcome::NoImpulse)
                    | (
                        Verdict::FailsUnboundedCycleTime,
                        sim::ObservedOutcome::Undetermined { .. }
                    )
            );
            if !agree {
                result = Err(format!(
                    "({s1}, {s2}, {x0}): predicted {:?}, observed {:?}",
                    pred.verdict, traj.outcome
                ));
            }
        }
        if checked == 0 {
            // A washed-out or degenerate instance may give nothing testable.
            Ok(())
        } else {
            result
        }
    });

    let total = suite.checks;
    let failed = suite.failed;
    let mut out = suite.lines.join("\n");
    out.push('\n');
    out.push_str(&format!("verify: {} of {total} checks passed\n", total - failed));
    if failed > 0 {
        // The report is still printed by the caller before exiting nonzero.
        eprint!("{out}");
        return Err(CliError::VerificationFailed { failed, total });
    }
    Ok(out)
}
