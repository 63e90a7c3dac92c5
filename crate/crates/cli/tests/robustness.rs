//! Wide randomized robustness sweep: geometry, orbit closure, and
//! prediction/observation agreement must hold across a much broader
//! parameter range than the reference instances, and a pathological
//! near-axis instance is pinned as a regression.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scf_core::*;

fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    loop {
        let config = ModelConfig {
            f1: ResponseFunction::monod(
                rng.random_range(0.3..5.0),
                rng.random_range(0.05..3.0),
            )
            .unwrap(),
            f2: ResponseFunction::monod(
                rng.random_range(0.3..5.0),
                rng.random_range(0.05..3.0),
            )
            .unwrap(),
            y1: rng.random_range(0.2..6.0),
            y2: rng.random_range(0.2..6.0),
            death_rate: rng.random_range(0.05..1.2),
            drain_fraction: rng.random_range(0.02..0.98),
            s1_bar: rng.random_range(0.05..1.5),
            s2_bar: rng.random_range(0.05..1.5),
            s1_in: 0.0,
            s2_in: 0.0,
        };
        let s1_in = config.s1_bar * rng.random_range(1.01..4.0);
        let s2_in = config.s2_bar * rng.random_range(1.01..4.0);
        if let Ok(p) = ModelParams::new(ModelConfig {
            s1_in,
            s2_in,
            ..config
        }) {
            return p;
        }
    }
}

fn reachable_point(
    rng: &mut ChaCha8Rng,
    p: &ModelParams,
    g: &RegionGeometry,
) -> Option<(f64, f64)> {
    for _ in 0..100 {
        let s1 = rng.random_range(0.0..1.3 * p.s1_in());
        let s2 = rng.random_range(0.0..1.3 * p.s2_in());
        if let Ok(c) = classify(p, g, s1, s2) {
            if c.in_omega1 {
                return Some((s1, s2));
            }
        }
    }
    None
}

#[test]
fn randomized_pipeline_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(99991);
    let q = QuadratureOptions::default();
    let integ = IntegratorOptions::default();
    let mut orbits = 0;
    let mut agreements = 0;
    for i in 0..400 {
        let p = random_params(&mut rng);
        let g = region_geometry(&p, &q)
            .unwrap_or_else(|e| panic!("geometry failed on instance {i}: {e}"));

        if let Some(mu) = g.cycle_growth.filter(|&mu| mu > 1e-4) {
            let orb = orbit::periodic_orbit(&p, &q, p.drain_fraction())
                .unwrap_or_else(|e| panic!("orbit failed on instance {i} (mu = {mu:.3e}): {e}"));
            let start = ReactorState::new(0.0, orb.post_point.0, orb.post_point.1, orb.x_post);
            let seg = integrate_batch(&p, &integ, start, orb.period * 30.0 + 100.0).unwrap();
            let BatchTerminal::HitThreshold { .. } = seg.terminal else {
                panic!("orbit cycle on instance {i} ended with {:?}", seg.terminal);
            };
            let end = seg.final_state();
            let rel = ((end.x - orb.x_pre) / orb.x_pre).abs();
            assert!(rel < 1e-5, "instance {i}: closure residual {rel:.3e}");
            orbits += 1;
        }

        // Prediction vs observation outside the margin bands, restricted to
        // drain fractions where the impulse cap also caps the settling time.
        if g.cycle_growth.is_some_and(|mu| mu.abs() < 5e-4) || p.drain_fraction() < 0.25 {
            continue;
        }
        let Some((s1, s2)) = reachable_point(&mut rng, &p, &g) else {
            continue;
        };
        let x0 = rng.random_range(0.01..1.5);
        let state = ReactorState::new(0.0, s1, s2, x0);
        let Ok(pred) = analysis::predict_outcome(&p, &g, &q, state) else {
            continue;
        };
        if pred.x_threshold.is_some_and(|x| (x0 - x).abs() < 5e-3) || pred.marginal {
            continue;
        }
        let opts = sim::RunOptions {
            max_impulses: 120,
            ..Default::default()
        };
        let Ok(traj) = sim::run(&p, &opts, state) else {
            continue;
        };
        let agree = matches!(
            (&pred.verdict, &traj.outcome),
            (
                analysis::Verdict::ConvergesToPeriodicOrbit,
                sim::ObservedOutcome::Cycling { .. }
            ) | (
                analysis::Verdict::FailsFiniteImpulses { .. },
                sim::ObservedOutcome::FailedAfter { .. } | sim::ObservedOutcome::NoImpulse
            ) | (
                analysis::Verdict::NoImpulse,
                sim::ObservedOutcome::NoImpulse
            ) | (
                analysis::Verdict::FailsUnboundedCycleTime,
                sim::ObservedOutcome::Undetermined { .. }
                    | sim::ObservedOutcome::FailedAfter { .. }
            )
        );
        assert!(
            agree,
            "instance {i} at ({s1:.4}, {s2:.4}, {x0:.4}): predicted {:?}, observed {:?}",
            pred.verdict, traj.outcome
        );
        agreements += 1;
    }
    // The sweep must actually exercise both paths.
    assert!(orbits >= 30, "only {orbits} feasible orbits sampled");
    assert!(agreements >= 50, "only {agreements} agreement pairs sampled");
}

/// A large drain fraction pushes the entry-band edge to ~4e-11 of the
/// threshold height; the edge search must survive the quasi-singular chord
/// integrals there (computed in offset coordinates from the landing).
#[test]
fn near_axis_entry_edge_regression() {
    let p = ModelParams::new(ModelConfig {
        f1: ResponseFunction::monod(4.030833430314599, 2.8299582223457067).unwrap(),
        f2: ResponseFunction::monod(1.7030829276694062, 0.08996251951137642).unwrap(),
        y1: 3.789943361266255,
        y2: 2.623600005181262,
        death_rate: 0.5254724097978334,
        drain_fraction: 0.9598435976205081,
        s1_bar: 1.0695125048960656,
        s2_bar: 0.5855532176698077,
        s1_in: 1.8904044251285514,
        s2_in: 1.5162910336841855,
    })
    .unwrap();
    let q = QuadratureOptions::default();
    let g = region_geometry(&p, &q).unwrap();
    let mu = g.cycle_growth.unwrap();
    assert!((mu - 1.8251).abs() < 1e-3, "mu = {mu}");
    let edge = g.entry_s2_lower.unwrap();
    assert!(edge > 0.0 && edge < 1e-9, "entry edge = {edge:e}");
    assert!(edge < g.invariant_s2);
    assert_eq!(g.impulse_bound, Some(2));
    // The band's upper v-level is then indistinguishable from the marginal
    // edge of the reachable region.
    let v_plus = g.entry_v_upper.unwrap();
    assert!((v_plus - g.v_high_edge).abs() < 1e-8 * p.v_scale());
}

#[test]
fn linear_response_instance_end_to_end() {
    let p = ModelParams::new(ModelConfig {
        f1: ResponseFunction::linear(1.1).unwrap(),
        f2: ResponseFunction::monod(2.0, 0.6).unwrap(),
        y1: 2.0,
        y2: 0.7,
        death_rate: 0.5,
        drain_fraction: 0.4,
        s1_bar: 0.7,
        s2_bar: 0.6,
        s1_in: 1.0,
        s2_in: 1.0,
    })
    .unwrap();
    let q = QuadratureOptions::default();
    let g = region_geometry(&p, &q).unwrap();
    assert!(g.cycle_growth.unwrap() > 0.0);
    let orb = orbit::periodic_orbit(&p, &q, 0.4).unwrap();
    let start = ReactorState::new(0.0, orb.post_point.0, orb.post_point.1, orb.x_post);
    let seg = integrate_batch(&p, &IntegratorOptions::default(), start, 100.0).unwrap();
    let end = seg.final_state();
    assert!(((end.x - orb.x_pre) / orb.x_pre).abs() < 1e-6);
}

#[test]
fn near_degenerate_inputs_do_not_hang() {
    // Inputs barely above the thresholds: all chords are short and the
    // sweep endpoints sit close to the degenerate limits.
    let q = QuadratureOptions::default();
    let p = ModelParams::new(ModelConfig {
        f1: ResponseFunction::monod(2.0, 0.5).unwrap(),
        f2: ResponseFunction::monod(2.0, 0.5).unwrap(),
        y1: 1.0,
        y2: 1.0,
        death_rate: 0.3,
        drain_fraction: 0.5,
        s1_bar: 0.5,
        s2_bar: 0.5,
        s1_in: 0.5001,
        s2_in: 0.5002,
    })
    .unwrap();
    let g = region_geometry(&p, &q).unwrap();
    assert!(g.cycle_growth.is_some());
    for r in [0.011, 0.989] {
        analysis::cycle_growth(&p, &q, r).unwrap();
    }
}
