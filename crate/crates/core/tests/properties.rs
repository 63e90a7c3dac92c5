//! Property tests for the geometric identities the dynamics rely on.

use proptest::prelude::*;
use scf_core::*;

#[allow(clippy::too_many_arguments)]
fn params(
    m1: f64,
    a1: f64,
    m2: f64,
    a2: f64,
    y1: f64,
    y2: f64,
    d: f64,
    r: f64,
    s1_bar: f64,
    s2_bar: f64,
    s1_in: f64,
    s2_in: f64,
) -> Result<ModelParams> {
    ModelParams::new(ModelConfig {
        f1: ResponseFunction::monod(m1, a1)?,
        f2: ResponseFunction::monod(m2, a2)?,
        y1,
        y2,
        death_rate: d,
        drain_fraction: r,
        s1_bar,
        s2_bar,
        s1_in,
        s2_in,
    })
}

prop_compose! {
    fn arb_params()(
        m1 in 0.8f64..3.0,
        a1 in 0.2f64..2.0,
        m2 in 0.8f64..3.0,
        a2 in 0.2f64..2.0,
        y1 in 0.5f64..4.0,
        y2 in 0.5f64..4.0,
        d in 0.2f64..0.8,
        r in 0.15f64..0.8,
        s1_bar in 0.3f64..1.0,
        s2_bar in 0.3f64..1.0,
        f1_in in 1.3f64..3.0,
        f2_in in 1.3f64..3.0,
    ) -> ModelParams {
        params(
            m1, a1, m2, a2, y1, y2, d, r,
            s1_bar, s2_bar, s1_bar * f1_in, s2_bar * f2_in,
        )
        .expect("generated configuration is valid")
    }
}

proptest! {
    #[test]
    fn impulse_contracts_the_conserved_level(
        p in arb_params(),
        s1 in 0.0f64..3.0,
        s2 in 0.0f64..3.0,
    ) {
        let (p1, p2) = p.impulse_point(s1, s2);
        let want = (1.0 - p.drain_fraction()) * p.v(s1, s2);
        prop_assert!((p.v(p1, p2) - want).abs() <= 1e-12 * p.v_scale());
    }

    #[test]
    fn lift_is_a_right_inverse_of_projection(
        p in arb_params(),
        t in 0.01f64..0.99,
        vertical in any::<bool>(),
    ) {
        // Sample a point of the threshold locus on either segment.
        let (s1, s2) = if vertical {
            (p.s1_bar(), p.s2_bar() * t)
        } else {
            (p.s1_bar() * t, p.s2_bar())
        };
        let (u1, u2) = lift_to_refill(&p, s1, s2).unwrap();
        let (b1, b2) = project_to_threshold(&p, u1, u2).unwrap();
        let scale = 1.0 + p.s1_in().max(p.s2_in());
        prop_assert!((b1 - s1).abs() < 1e-9 * scale, "{b1} vs {s1}");
        prop_assert!((b2 - s2).abs() < 1e-9 * scale, "{b2} vs {s2}");
    }

    #[test]
    fn projection_is_idempotent(
        p in arb_params(),
        t in 0.01f64..0.99,
        vertical in any::<bool>(),
    ) {
        let (s1, s2) = if vertical {
            (p.s1_bar(), p.s2_bar() * t)
        } else {
            (p.s1_bar() * t, p.s2_bar())
        };
        let (a1, a2) = project_to_threshold(&p, s1, s2).unwrap();
        prop_assert!((a1 - s1).abs() < 1e-12 && (a2 - s2).abs() < 1e-12);
    }

    #[test]
    fn classification_is_constant_along_chords(
        p in arb_params(),
        s1 in 0.0f64..2.5,
        s2 in 0.0f64..2.5,
        steps in 1usize..8,
    ) {
        let g = RegionGeometry::affine(&p).unwrap();
        let base = classify(&p, &g, s1, s2).unwrap();
        prop_assume!(matches!(base.label, RegionLabel::Omega0 | RegionLabel::Omega1));
        let chord = Chord::through(&p, s1, s2);
        for i in 1..=steps {
            let t1 = s1 + 0.2 * i as f64;
            let t2 = chord.s2_at(t1);
            let c = classify(&p, &g, t1, t2).unwrap();
            // Moving up the chord never changes the v-level, hence never the
            // coarse region.
            prop_assert_eq!(c.label, base.label);
        }
    }

    #[test]
    fn break_even_balances_the_death_rate(
        m in 0.5f64..4.0,
        a in 0.1f64..3.0,
        d in 0.1f64..1.0,
    ) {
        let f = ResponseFunction::monod(m, a).unwrap();
        match break_even(&f, d).unwrap() {
            BreakEven::Finite(level) => {
                prop_assert!(m > d);
                prop_assert!((f.eval(level) - d).abs() < 1e-10);
                // Closed form for the saturating response.
                let expected = a * d / (m - d);
                prop_assert!((level - expected).abs() < 1e-9 * expected.max(1.0));
            }
            BreakEven::Unbounded => prop_assert!(m <= d),
        }
    }

    #[test]
    fn growth_rate_is_monotone_in_each_resource(
        p in arb_params(),
        s1 in 0.01f64..2.0,
        s2 in 0.01f64..2.0,
        bump in 0.01f64..0.5,
    ) {
        let base = p.growth_rate(s1, s2).unwrap();
        prop_assert!(p.growth_rate(s1 + bump, s2).unwrap() >= base);
        prop_assert!(p.growth_rate(s1, s2 + bump).unwrap() >= base);
    }
}

/// The chord level of any reachable point contracts by exactly `1 - r` per
/// projection/refill round trip, independent of where it lands.
#[test]
fn chord_level_contraction_through_full_cycles() {
    let p = params(2.0, 1.9, 2.0, 0.3, 4.0, 1.9, 0.5, 0.4, 0.6, 0.5, 1.0, 1.0).unwrap();
    let shrink = 1.0 - p.drain_fraction();
    for &(s1, s2) in &[(0.23, 0.6), (0.9, 0.73), (1.0, 1.0)] {
        let mut point = (s1, s2);
        let v0 = p.v(s1, s2);
        for n in 1..=8 {
            let hit = project_to_threshold(&p, point.0, point.1).unwrap();
            point = p.impulse_point(hit.0, hit.1);
            let expect = shrink.powi(n) * v0;
            let err = (p.v(point.0, point.1) - expect).abs();
            assert!(err <= 1e-10 * p.v_scale());
        }
    }
}
