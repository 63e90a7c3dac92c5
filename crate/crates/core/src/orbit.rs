//! The periodic orbit: its biomass profile, period, throughput, and the
//! numerical search for the drain fraction that maximizes output.

use crate::analysis::{critical_drain, cycle_growth};
use crate::batch::GrowthProfile;
use crate::error::{Error, Result};
use crate::model::{Chord, ModelParams};
use crate::quad::{self, QuadratureOptions};

/// The unique periodic orbit at a given drain fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicOrbit {
    pub drain: f64,
    /// Biomass just before the impulse.
    pub x_pre: f64,
    /// Biomass just after the impulse; always `(1 - r) x_pre`.
    pub x_post: f64,
    /// Threshold point the orbit hits: `(s1_bar, invariant_s2)`.
    pub pre_point: (f64, f64),
    /// Its post-impulse image on the invariant line.
    pub post_point: (f64, f64),
    pub period: f64,
    /// Long-run output per volume per time, `r / period`.
    pub throughput: f64,
}

/// Biomass along the periodic orbit as a function of `s1`, evaluated from
/// either endpoint. The two parametrizations describe the same curve and are
/// kept separate so they can cross-check each other.
pub struct OrbitProfile<'a> {
    profile: GrowthProfile<'a>,
    y1: f64,
    pub x_pre: f64,
    pub x_post: f64,
    pub s1_lo: f64,
    pub s1_hi: f64,
}

impl<'a> OrbitProfile<'a> {
    pub fn build(p: &'a ModelParams, q: &QuadratureOptions, r: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "drain fraction must lie in (0, 1), got {r}"
            )));
        }
        let mu = cycle_growth(p, q, r)?;
        if mu <= 0.0 {
            return Err(Error::NoPeriodicOrbit { r, mu });
        }
        let s1_lo = p.s1_bar();
        let s1_hi = p.s1_bar_post_at(r);
        let chord = Chord::through(p, p.s1_bar(), p.invariant_s2());
        let profile = GrowthProfile::build(p, chord, s1_lo, s1_hi);
        Ok(Self {
            profile,
            y1: p.y1(),
            x_pre: mu / r,
            x_post: (1.0 - r) * mu / r,
            s1_lo,
            s1_hi,
        })
    }

    /// Biomass at `s1`, anchored at the pre-impulse endpoint.
    pub fn x_from_pre(&self, s1: f64) -> f64 {
        self.x_pre - self.y1 * self.profile.cumulative(s1)
    }

    /// Biomass at `s1`, anchored at the post-impulse endpoint.
    pub fn x_from_post(&self, s1: f64) -> f64 {
        self.x_post + self.y1 * (self.profile.total() - self.profile.cumulative(s1))
    }

    fn min_growth(&self, s1: f64) -> f64 {
        self.profile.min_growth(s1)
    }

    fn kinks(&self) -> &[f64] {
        self.profile.kinks()
    }
}

/// Minimal period of the periodic orbit at drain fraction `r`.
pub fn period(p: &ModelParams, q: &QuadratureOptions, r: f64) -> Result<f64> {
    let orbit = OrbitProfile::build(p, q, r)?;
    // The integrand spikes near the pre-impulse endpoint as the orbit
    // biomass collapses (close to the critical drain fraction); give the
    // quadrature a deeper subdivision budget there.
    let q_deep = q.with_max_subdivisions(q.max_subdivisions.max(2000));
    for i in 0..=64 {
        let v = orbit.s1_lo + (orbit.s1_hi - orbit.s1_lo) * i as f64 / 64.0;
        let x = orbit.x_from_pre(v);
        if !(x > 0.0) {
            return Err(Error::NonpositiveProfile { s1: v, x });
        }
    }
    let integrand = |v: f64| 1.0 / (orbit.min_growth(v) * orbit.x_from_pre(v));
    let t = p.y1()
        * quad::integrate_split(&integrand, orbit.s1_lo, orbit.s1_hi, orbit.kinks(), &q_deep)?;
    Ok(t)
}

/// Long-run throughput `r / T(r)`.
pub fn throughput(p: &ModelParams, q: &QuadratureOptions, r: f64) -> Result<f64> {
    Ok(r / period(p, q, r)?)
}

/// Assemble the full periodic orbit description at drain fraction `r`.
pub fn periodic_orbit(p: &ModelParams, q: &QuadratureOptions, r: f64) -> Result<PeriodicOrbit> {
    let orbit = OrbitProfile::build(p, q, r)?;
    let t = period(p, q, r)?;
    Ok(PeriodicOrbit {
        drain: r,
        x_pre: orbit.x_pre,
        x_post: orbit.x_post,
        pre_point: (p.s1_bar(), p.invariant_s2()),
        post_point: (p.s1_bar_post_at(r), p.invariant_s2_post_at(r)),
        period: t,
        throughput: r / t,
    })
}

/// Result of the throughput search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputOptimum {
    pub drain: f64,
    pub throughput: f64,
    pub period: f64,
    /// Set when the search ran into the left margin with a zero critical
    /// drain fraction: the supremum then sits at the boundary `r -> 0`
    /// rather than at an interior maximizer.
    pub boundary_supremum: bool,
}

fn golden_max(f: impl Fn(f64) -> Option<f64>, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1).unwrap_or(f64::NEG_INFINITY);
    let mut f2 = f(x2).unwrap_or(f64::NEG_INFINITY);
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1).unwrap_or(f64::NEG_INFINITY);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2).unwrap_or(f64::NEG_INFINITY);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Search `(r* + delta, 1 - delta)` for the drain fraction maximizing the
/// throughput: a coarse grid to bracket the best region, then golden-section
/// refinement.
///
/// The throughput is not proven unimodal, so the grid is the safeguard
/// against a missed interior peak; `grid_n` defaults to 64 when 0 is given.
pub fn optimize_throughput(
    p: &ModelParams,
    q: &QuadratureOptions,
    grid_n: usize,
) -> Result<ThroughputOptimum> {
    let mu1 = cycle_growth(p, q, 1.0)?;
    if mu1 <= 0.0 {
        return Err(Error::NoViableFraction { mu1 });
    }
    let r_star = critical_drain(p, q)?;
    let delta = 1e-3;
    let lo = r_star + delta;
    let hi = 1.0 - delta;
    let n = if grid_n == 0 { 64 } else { grid_n.max(8) };
    let mut best: Option<(usize, f64, f64)> = None;
    let mut grid = Vec::with_capacity(n);
    for i in 0..n {
        let r = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        grid.push(r);
        if let Ok(value) = throughput(p, q, r) {
            if best.is_none_or(|(_, _, q_best)| value > q_best) {
                best = Some((i, r, value));
            }
        }
    }
    let (best_i, _, _) =
        best.ok_or_else(|| Error::OptimizationFailed("no grid point was evaluable".into()))?;
    let bracket_lo = if best_i == 0 { lo } else { grid[best_i - 1] };
    let bracket_hi = if best_i + 1 == n { hi } else { grid[best_i + 1] };
    let (r_opt, q_opt) = golden_max(
        |r| throughput(p, q, r).ok(),
        bracket_lo,
        bracket_hi,
        1e-5,
    );
    if !q_opt.is_finite() {
        return Err(Error::OptimizationFailed(
            "throughput not evaluable in the refined bracket".into(),
        ));
    }
    let boundary_supremum = r_star == 0.0 && best_i == 0 && (r_opt - lo) < 2e-5;
    Ok(ThroughputOptimum {
        drain: r_opt,
        throughput: q_opt,
        period: period(p, q, r_opt)?,
        boundary_supremum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::batch::integrate_batch;
    use crate::model::ReactorState;
    use crate::rk::IntegratorOptions;
    use crate::sim::{run, RunOptions};
    use crate::testkit::{instance_b, instance_b_wide, instance_washout};

    fn q() -> QuadratureOptions {
        QuadratureOptions::default()
    }

    #[test]
    fn orbit_biomass_levels_match_cycle_growth() {
        let p = instance_b();
        let orbit = periodic_orbit(&p, &q(), 0.4).unwrap();
        let mu = cycle_growth(&p, &q(), 0.4).unwrap();
        assert_eq!(orbit.x_pre, mu / 0.4);
        assert_eq!(orbit.x_post, 0.6 * orbit.x_pre);
        // Reference magnitudes derived from the cycle growth near 0.04.
        assert!((orbit.x_pre - 0.1).abs() < 0.0125, "x_pre = {}", orbit.x_pre);
        assert!((orbit.x_post - 0.06).abs() < 0.0125, "x_post = {}", orbit.x_post);
        assert!(orbit.period > 0.0 && orbit.throughput > 0.0);
        assert_eq!(orbit.throughput, 0.4 / orbit.period);
    }

    #[test]
    fn washout_instance_has_no_orbit() {
        match periodic_orbit(&instance_washout(), &q(), 0.4) {
            Err(Error::NoPeriodicOrbit { mu, .. }) => assert!(mu < 0.0),
            other => panic!("expected no orbit, got {other:?}"),
        }
    }

    #[test]
    fn simulated_cycle_closes_on_the_orbit() {
        let p = instance_b();
        let orbit = periodic_orbit(&p, &q(), 0.4).unwrap();
        let seg = integrate_batch(
            &p,
            &IntegratorOptions::default(),
            ReactorState::new(0.0, orbit.post_point.0, orbit.post_point.1, orbit.x_post),
            100.0,
        )
        .unwrap();
        let end = seg.final_state();
        assert!(((end.s1 - orbit.pre_point.0) / orbit.pre_point.0).abs() < 1e-6);
        assert!(((end.s2 - orbit.pre_point.1) / orbit.pre_point.1).abs() < 1e-6);
        assert!(((end.x - orbit.x_pre) / orbit.x_pre).abs() < 1e-6);
        assert!(((seg.t_end - orbit.period) / orbit.period).abs() < 1e-6);
        // One impulse per period: the interior of the batch phase stays
        // clear of the threshold locus.
        for s in &seg.states[..seg.states.len() - 1] {
            assert!(!p.impulse_due(s.s1, s.s2));
        }
    }

    #[test]
    fn profile_parametrizations_agree() {
        let p = instance_b();
        let orbit = OrbitProfile::build(&p, &q(), 0.4).unwrap();
        for i in 0..=32 {
            let v = orbit.s1_lo + (orbit.s1_hi - orbit.s1_lo) * i as f64 / 32.0;
            let a = orbit.x_from_pre(v);
            let b = orbit.x_from_post(v);
            assert!((a - b).abs() < 1e-9, "profiles disagree at {v}: {a} vs {b}");
        }
    }

    #[test]
    fn period_blows_up_at_both_ends() {
        let p = instance_b();
        let r_star = critical_drain(&p, &q()).unwrap();
        let near = period(&p, &q(), r_star + 1e-3).unwrap();
        let away = period(&p, &q(), r_star + 0.1).unwrap();
        assert!(
            near > 2.0 * away,
            "period near the critical fraction: {near} vs {away}"
        );
        let at_09 = period(&p, &q(), 0.9).unwrap();
        let near_one = period(&p, &q(), 1.0 - 1e-3).unwrap();
        assert!(near_one > at_09, "{near_one} vs {at_09}");
    }

    #[test]
    fn throughput_limit_at_zero_drain() {
        // With a zero critical fraction the throughput limit at r -> 0 is
        // the net specific growth rate at the limiting threshold point.
        let p = instance_b_wide();
        assert_eq!(critical_drain(&p, &q()).unwrap(), 0.0);
        let want = p
            .f1()
            .eval(p.s1_bar())
            .min(p.f2().eval(p.invariant_s2()))
            - p.death_rate();
        let got = throughput(&p, &q(), 1e-4).unwrap();
        assert!(
            ((got - want) / want).abs() < 0.05,
            "throughput {got} vs limit {want}"
        );
    }

    #[test]
    fn throughput_decays_toward_full_drain() {
        let p = instance_b();
        let q9 = throughput(&p, &q(), 0.9).unwrap();
        let q999 = throughput(&p, &q(), 1.0 - 1e-3).unwrap();
        let q9999 = throughput(&p, &q(), 1.0 - 1e-4).unwrap();
        assert!(q999 < q9 && q9999 < q999, "{q9} > {q999} > {q9999} expected");
    }

    #[test]
    fn optimizer_matches_reference_and_dominates_grid() {
        let p = instance_b();
        let opt = optimize_throughput(&p, &q(), 64).unwrap();
        assert!(
            (opt.drain - 0.6416).abs() < 0.01,
            "optimal drain = {}",
            opt.drain
        );
        assert!(!opt.boundary_supremum);
        for i in 0..16 {
            let r = 0.2 + 0.78 * i as f64 / 15.0;
            if let Ok(value) = throughput(&p, &q(), r) {
                assert!(value <= opt.throughput + 1e-9, "grid beats optimum at {r}");
            }
        }
    }

    #[test]
    fn optimizer_reports_boundary_supremum() {
        // On the widened instance the throughput decreases monotonically
        // from its positive limit at r -> 0, so the search must flag the
        // boundary rather than return an interior maximizer.
        let p = instance_b_wide();
        let opt = optimize_throughput(&p, &q(), 64).unwrap();
        assert!(opt.boundary_supremum, "expected a boundary supremum");
        let limit = p.f1().eval(p.s1_bar()).min(p.f2().eval(p.invariant_s2()))
            - p.death_rate();
        assert!(((opt.throughput - limit) / limit).abs() < 0.05);
    }

    #[test]
    fn optimizer_is_stable_under_grid_refinement() {
        let p = instance_b();
        let coarse = optimize_throughput(&p, &q(), 64).unwrap();
        let fine = optimize_throughput(&p, &q(), 128).unwrap();
        assert!(
            (coarse.drain - fine.drain).abs() < 1e-3,
            "{} vs {}",
            coarse.drain,
            fine.drain
        );
    }

    #[test]
    fn perturbed_starts_contract_back_to_the_orbit() {
        let p = instance_b();
        let orbit = periodic_orbit(&p, &q(), 0.4).unwrap();
        let shrink: f64 = 1.0 - 0.4;
        for factor in [0.8, 1.2] {
            let start = ReactorState::new(
                0.0,
                orbit.post_point.0,
                orbit.post_point.1,
                orbit.x_post * factor,
            );
            let opts = RunOptions {
                max_impulses: 10,
                ..Default::default()
            };
            let run = run(&p, &opts, start).unwrap();
            assert!(run.impulses.len() >= 8);
            // Pre-impulse biomass errors shrink by about (1 - r) per cycle.
            let errs: Vec<f64> = run
                .impulses
                .iter()
                .map(|e| (e.pre.x - orbit.x_pre).abs())
                .collect();
            let expected_tail = errs[0] * shrink.powi(7);
            assert!(
                errs[7] < expected_tail * 2.0 + 1e-9,
                "contraction too slow: errors {errs:?}"
            );
        }
    }
}
