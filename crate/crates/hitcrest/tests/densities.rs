//! Outcome densities, masses, survival, hazard, and marginals against
//! independently computed reference values (mpmath, 50-digit arithmetic)
//! and against quadrature identities.

mod common;

use common::{case_a, case_b, case_c, integrate, tight};
use hitcrest::{Error, Margin, SeriesControl, Variant};

#[test]
fn outcome_masses_match_reference_values() {
    // (case, P[T<C], P[T=C], P[T>C]) to 15 digits.
    let expect = [
        (case_a(Variant::ModelII), 0.34281516084535768, 0.072350462165435996, 0.58483437698920632),
        (case_b(Variant::ModelII), 0.78302539376460389, 0.055519323417134185, 0.16145528281826192),
        (case_c(Variant::ModelII), 0.28959642309864105, 0.057518774669663436, 0.65288480223169551),
    ];
    for (spec, lt, eq, gt) in expect {
        let m = spec.outcome_masses(tight()).unwrap();
        assert!((m.t_before_c - lt).abs() < 1e-12, "{spec:?} P[T<C] = {}", m.t_before_c);
        assert!((m.tie - eq).abs() < 1e-12, "{spec:?} P[T=C] = {}", m.tie);
        assert!((m.c_before_t - gt).abs() < 1e-12, "{spec:?} P[T>C] = {}", m.c_before_t);
        assert!((m.sum() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn masses_do_not_depend_on_lambda() {
    let base = case_b(Variant::ModelII);
    let scaled = hitcrest::ModelSpec::new(
        17.3,
        base.family_x(),
        base.x(),
        base.family_z(),
        base.z(),
        Variant::ModelII,
    )
    .unwrap();
    let a = base.outcome_masses(tight()).unwrap();
    let b = scaled.outcome_masses(tight()).unwrap();
    assert_eq!(a.t_before_c, b.t_before_c);
    assert_eq!(a.tie, b.tie);
    assert_eq!(a.c_before_t, b.c_before_t);
}

#[test]
fn density_at_zero_vanishes_when_one_jump_cannot_cross() {
    // First crossing needs at least eight Bernoulli jumps for x = 7, so the
    // uncensored density starts at zero.
    let spec = case_a(Variant::ModelI);
    let d = spec.outcome_density(0.0, 1, tight()).unwrap();
    assert_eq!(d, 0.0);
}

#[test]
fn model_i_density_folds_tie_into_uncensored() {
    let ctl = tight();
    for t in [0.3, 1.0, 4.5, 9.0, 20.0] {
        for (mi, mii) in [
            (case_a(Variant::ModelI), case_a(Variant::ModelII)),
            (case_b(Variant::ModelI), case_b(Variant::ModelII)),
        ] {
            let folded = mi.outcome_density(t, 1, ctl).unwrap();
            let split = mii.outcome_density(t, 1, ctl).unwrap()
                + mii.outcome_density(t, 2, ctl).unwrap();
            assert!(
                (folded - split).abs() <= 1e-12 * folded.max(1.0),
                "t = {t}: {folded} vs {split}"
            );
            let c0 = mi.outcome_density(t, 0, ctl).unwrap();
            let c1 = mii.outcome_density(t, 0, ctl).unwrap();
            assert_eq!(c0, c1, "censored density is variant-free");
        }
    }
}

#[test]
fn densities_integrate_to_the_outcome_masses() {
    let ctl = SeriesControl { epsilon: 1e-12, hard_cap: 10_000 };
    let spec = case_b(Variant::ModelII);
    let m = spec.outcome_masses(ctl).unwrap();
    // Truncating the integral at the q quantile loses up to 1 - q of mass.
    let hi = spec.quantile_y(1.0 - 1e-9, ctl).unwrap();
    for (delta, mass) in [(1u8, m.t_before_c), (2, m.tie), (0, m.c_before_t)] {
        let int = integrate(
            &|t| spec.outcome_density(t, delta, ctl).unwrap(),
            0.0,
            hi,
            1e-10,
        );
        assert!(
            (int - mass).abs() < 1e-7,
            "delta = {delta}: integral {int} vs series {mass}"
        );
    }
}

#[test]
fn survival_matches_reference_curve() {
    // S_Y for case b at t = 1, 5, 10.
    let spec = case_b(Variant::ModelI);
    let ctl = tight();
    let expect = [
        (1.0, 0.99836562304890426),
        (5.0, 0.77255178135170359),
        (10.0, 0.18142070120696695),
    ];
    for (t, s) in expect {
        let v = spec.survival_y(t, ctl).unwrap();
        assert!((v - s).abs() < 1e-11, "S_Y({t}) = {v}, want {s}");
    }
    assert_eq!(spec.survival_y(0.0, ctl).unwrap(), 1.0);
}

#[test]
fn survival_is_monotone_on_a_grid() {
    let spec = case_b(Variant::ModelI);
    let ctl = tight();
    let mut last = 1.0 + 1e-12;
    for i in 0..=40 {
        let t = 0.5 * i as f64;
        let s = spec.survival_y(t, ctl).unwrap();
        assert!(s <= last, "S_Y must not increase: S({t}) = {s} after {last}");
        assert!((0.0..=1.0).contains(&s));
        last = s;
    }
}

#[test]
fn one_minus_survival_is_the_total_outcome_integral() {
    let spec = case_b(Variant::ModelII);
    let ctl = tight();
    for t in [0.8, 3.0, 7.5] {
        let total: f64 = integrate(
            &|u| {
                (0..=2)
                    .map(|d| spec.outcome_density(u, d, ctl).unwrap())
                    .sum()
            },
            0.0,
            t,
            1e-11,
        );
        let s = spec.survival_y(t, ctl).unwrap();
        assert!((total - (1.0 - s)).abs() < 1e-8, "t = {t}: {total} vs {}", 1.0 - s);
    }
}

#[test]
fn hazard_at_zero_matches_the_one_jump_crossing_rate() {
    // h(0) = lambda * (1 - c_{1,X} c_{1,Z}); for case b both one-jump
    // crossing probabilities are explicit exponential tails.
    let spec = case_b(Variant::ModelI);
    let h = spec.hazard(0.0, tight()).unwrap();
    let c1x = 1.0 - (-0.71_f64 * 14.0).exp();
    let c1z = 1.0 - (-2.04_f64 * 7.0).exp();
    let expect = 1.42 * (1.0 - c1x * c1z);
    assert!((h - expect).abs() < 1e-15, "h(0) = {h}, want {expect}");
    assert!((h - 6.93467369161338e-5).abs() < 1e-18);
}

#[test]
fn hazard_equals_density_over_survival_where_both_are_stable() {
    let spec = case_b(Variant::ModelII);
    let ctl = tight();
    for t in [0.5, 2.0, 5.0, 10.0, 15.0] {
        let dens: f64 = (0..=2)
            .map(|d| spec.outcome_density(t, d, ctl).unwrap())
            .sum();
        let s = spec.survival_y(t, ctl).unwrap();
        let h = spec.hazard(t, ctl).unwrap();
        assert!(
            (h - dens / s).abs() < 1e-9 * h.max(1.0),
            "t = {t}: hazard {h} vs ratio {}",
            dens / s
        );
    }
}

#[test]
fn hazard_approaches_the_clock_rate_for_light_tails() {
    // Both margins have exponential jumps, so the conditional probability
    // of surviving one more jump decays and h(t) -> lambda; the approach
    // is slow (polynomial), pinned here at reference points.
    let spec = case_b(Variant::ModelI);
    let ctl = SeriesControl { epsilon: 1e-12, hard_cap: 20_000 };
    let expect = [
        (20.0, 0.500521),
        (50.0, 0.288977),
        (100.0, 0.185757),
        (400.0, 0.0750204),
    ];
    let mut last = f64::INFINITY;
    for (t, dev) in expect {
        let h = spec.hazard(t, ctl).unwrap();
        let rel = (h / 1.42 - 1.0).abs();
        assert!((rel - dev).abs() < 1e-4, "t = {t}: |h/lambda - 1| = {rel}, want {dev}");
        assert!(rel < last);
        last = rel;
    }
}

#[test]
fn hazard_far_tail_reports_underflow() {
    let spec = case_b(Variant::ModelI);
    let ctl = SeriesControl { epsilon: 1e-12, hard_cap: 40_000 };
    let err = spec.hazard(5000.0, ctl).unwrap_err();
    assert!(
        matches!(err, Error::Underflow(_) | Error::Truncation { .. }),
        "expected an evaluation error, got {err:?}"
    );
}

#[test]
fn hazard_with_zero_atom_jumps_approaches_a_strictly_smaller_limit() {
    // Bernoulli and Poisson jumps can be zero, so even in the limit a jump
    // fails to cross with probability P[X=0] P[Z=0] and the hazard tends to
    // lambda (1 - 0.64 e^{-1.23}).
    let spec = case_c(Variant::ModelI);
    let ctl = SeriesControl { epsilon: 1e-12, hard_cap: 20_000 };
    let limit = 1.42 * (1.0 - 0.64 * (-1.23_f64).exp());
    assert!((limit - 1.1543645054036349).abs() < 1e-15);
    let expect = [(100.0, 0.16), (200.0, 0.0884), (400.0, 0.0474)];
    let mut last = f64::INFINITY;
    for (t, dev) in expect {
        let h = spec.hazard(t, ctl).unwrap();
        let rel = (h / limit - 1.0).abs();
        assert!((rel - dev).abs() < 5e-3, "t = {t}: |h/limit - 1| = {rel}, want about {dev}");
        assert!(rel < last);
        last = rel;
    }
}

#[test]
fn marginal_cdf_matches_reference_values() {
    let spec = case_b(Variant::ModelI);
    let ctl = tight();
    let expect = [(5.0, 0.20795901385984306), (10.0, 0.7785512415539064)];
    for (t, f) in expect {
        let v = spec.marginal_cdf(Margin::T, t, ctl).unwrap();
        assert!((v - f).abs() < 1e-11, "F_T({t}) = {v}, want {f}");
    }
    assert_eq!(spec.marginal_cdf(Margin::T, 0.0, ctl).unwrap(), 0.0);
    let c5 = spec.marginal_cdf(Margin::C, 5.0, ctl).unwrap();
    assert!(c5 > 0.0 && c5 < 1.0);
}

#[test]
fn mean_and_quantile_match_reference_values() {
    let ctl = tight();
    let checks = [
        (case_a(Variant::ModelI), 11.146660250175188, 20.286728),
        (case_b(Variant::ModelI), 7.353119083068624, 16.719017),
        (case_c(Variant::ModelI), 10.369723721448143, 21.151347),
    ];
    for (spec, mean, q995) in checks {
        let m = spec.mean_y(ctl).unwrap();
        assert!((m - mean).abs() < 1e-9, "{spec:?} mean {m}, want {mean}");
        let q = spec.quantile_y(0.995, ctl).unwrap();
        assert!((q - q995).abs() < 1e-5, "{spec:?} q995 {q}, want {q995}");
        let s = spec.survival_y(q, ctl).unwrap();
        assert!((s - 0.005).abs() < 1e-9);
    }
}

#[test]
fn mean_y_agrees_with_quadrature_of_the_survival_function() {
    let spec = case_b(Variant::ModelI);
    let ctl = tight();
    let hi = spec.quantile_y(0.9999999, ctl).unwrap();
    let int = integrate(&|t| spec.survival_y(t, ctl).unwrap(), 0.0, hi, 1e-10);
    let m = spec.mean_y(ctl).unwrap();
    assert!((int - m).abs() < 1e-6, "quadrature {int} vs series {m}");
}

#[test]
fn tie_mass_is_zero_or_one_for_deterministic_jumps() {
    use hitcrest::JumpFamily;
    let ctl = tight();
    let distinct = hitcrest::ModelSpec::new(
        1.0,
        JumpFamily::dirac(1.0).unwrap(),
        1.5,
        JumpFamily::dirac(1.0).unwrap(),
        3.5,
        Variant::ModelII,
    )
    .unwrap();
    assert_eq!(distinct.prob_equal(ctl).unwrap(), 0.0);
    assert!(distinct.degenerate(ctl).unwrap());
    let same = hitcrest::ModelSpec::new(
        1.0,
        JumpFamily::dirac(5.0).unwrap(),
        3.0,
        JumpFamily::dirac(9.0).unwrap(),
        7.0,
        Variant::ModelII,
    )
    .unwrap();
    assert_eq!(same.prob_equal(ctl).unwrap(), 1.0);
}

#[test]
fn invalid_delta_is_rejected() {
    let spec = case_a(Variant::ModelI);
    assert!(matches!(spec.outcome_density(1.0, 2, tight()), Err(Error::Domain(_))));
    let spec = case_a(Variant::ModelII);
    assert!(matches!(spec.outcome_density(1.0, 3, tight()), Err(Error::Domain(_))));
}

#[test]
fn negative_time_is_rejected() {
    let spec = case_a(Variant::ModelI);
    assert!(spec.outcome_density(-0.5, 1, tight()).is_err());
    assert!(spec.survival_y(-0.5, tight()).is_err());
}
