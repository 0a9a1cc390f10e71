//! Acceptance gate: nine criteria, one test each, each printing a
//! pass/fail line and enforcing its own runtime budget. Tolerances are
//! pinned in the assertions.

mod common;

use common::{case_a, case_b, case_c, integrate, tight};
use hitcrest::{
    fit, identifiability_report, information_matrices, log_likelihood, poisson_mixture,
    predicted_prob_uncensored, run_study, simulate_dataset, wald_interval, EmpiricalCdf,
    FitOptions, FitTemplate, Hypothesis, JumpFamily, ModelSpec, SeriesControl, StudyConfig,
    Variant,
};
use std::time::Instant;

fn budget(start: Instant, limit_s: f64, name: &str) {
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < limit_s, "{name} took {elapsed:.1}s, budget {limit_s}s");
}

/// Two distinct clock rates with geometrically damped coefficients give
/// the same observable mixture whenever lambda (1 - q) agrees: rate 1
/// with ratio 1/2 and rate 2/3 with ratio 1/4 both damp at 1/2, so both
/// mixtures are exp(-t/2) and the model cannot tell them apart.
#[test]
fn criterion_1_indistinguishable_rate_pairs() {
    let start = Instant::now();
    let ctl = SeriesControl::new(1e-12, 10_000).unwrap();
    let geometric = |q: f64| -> Vec<f64> { (0..2048).map(|n| q.powi(n)).collect() };
    let half = geometric(0.5);
    let quarter = geometric(0.25);

    let mut max_diff: f64 = 0.0;
    let mut max_form: f64 = 0.0;
    for i in 0..=500 {
        let t = 50.0 * i as f64 / 500.0;
        let m1 = poisson_mixture(&half, 1.0, t, ctl).unwrap();
        let m2 = poisson_mixture(&quarter, 2.0 / 3.0, t, ctl).unwrap();
        max_diff = max_diff.max((m1 - m2).abs());
        max_form = max_form.max((m1 - (-t / 2.0).exp()).abs());
    }
    assert!(max_diff < 1e-9, "mixtures differ by {max_diff:.3e}");
    assert!(max_form < 1e-9, "mixture deviates from exp(-t/2) by {max_form:.3e}");
    budget(start, 1.0, "criterion 1");
    println!(
        "criterion 1: PASS - indistinguishable rate pairs, max |m1 - m2| = {max_diff:.3e} over 501 points"
    );
}

/// Predicted uncensored fraction for a reference exponential/exponential
/// configuration, and its invariance under threshold/rate rescaling.
#[test]
fn criterion_2_predicted_uncensored_fraction() {
    let start = Instant::now();
    let ctl = SeriesControl::default();
    let spec = ModelSpec::new(
        7.889,
        JumpFamily::exponential(25.673).unwrap(),
        0.95,
        JumpFamily::exponential(33.602).unwrap(),
        0.65,
        Variant::ModelI,
    )
    .unwrap();
    let p = predicted_prob_uncensored(&spec, ctl).unwrap();
    assert!((p - 0.381685).abs() < 2e-3, "predicted fraction {p} vs 0.381685");

    let scaled = ModelSpec::new(
        7.889,
        JumpFamily::exponential(2.5673).unwrap(),
        9.5,
        JumpFamily::exponential(3.3602).unwrap(),
        6.5,
        Variant::ModelI,
    )
    .unwrap();
    let q = predicted_prob_uncensored(&scaled, ctl).unwrap();
    assert!((p - q).abs() < 1e-10, "scaling changed the fraction: {p} vs {q}");
    budget(start, 5.0, "criterion 2");
    println!("criterion 2: PASS - predicted uncensored fraction {p:.6} (scaled row agrees to {:.1e})", (p - q).abs());
}

/// Outcome densities integrate to one across both observation schemes,
/// and the series masses agree.
#[test]
fn criterion_3_normalization() {
    let start = Instant::now();
    let ctl = tight();
    for (name, maker) in [
        ("a", case_a as fn(Variant) -> ModelSpec),
        ("b", case_b as fn(Variant) -> ModelSpec),
        ("c", case_c as fn(Variant) -> ModelSpec),
    ] {
        for variant in [Variant::ModelI, Variant::ModelII] {
            let spec = maker(variant);
            let hi = spec.quantile_y(1.0 - 1e-9, ctl).unwrap();
            let deltas: &[u8] = match variant {
                Variant::ModelI => &[0, 1],
                Variant::ModelII => &[0, 1, 2],
            };
            let mut total = 0.0;
            for &d in deltas {
                total +=
                    integrate(&|t| spec.outcome_density(t, d, ctl).unwrap(), 0.0, hi, 1e-9);
            }
            assert!(
                (total - 1.0).abs() < 1e-6,
                "case {name} variant {variant}: quadrature total {total}"
            );
            let masses = spec.outcome_masses(ctl).unwrap();
            assert!(
                (masses.sum() - 1.0).abs() < 1e-8,
                "case {name}: series masses sum to {}",
                masses.sum()
            );
        }
    }
    budget(start, 10.0, "criterion 3");
    println!("criterion 3: PASS - all six case/variant densities integrate to 1 within 1e-6");
}

/// A million simulated outcomes per case match the analytic outcome
/// masses within four standard errors and the analytic CDF of Y within
/// the DKW band at alpha = 0.001.
#[test]
fn criterion_4_simulation_agreement() {
    let start = Instant::now();
    let ctl = SeriesControl::default();
    let n = 1_000_000usize;
    let dkw = ((2.0_f64 / 1e-3).ln() / (2.0 * n as f64)).sqrt();
    assert!((dkw - 0.0019494746035204052).abs() < 1e-16);

    for (name, spec, seed) in [
        ("a", case_a(Variant::ModelII), 601u64),
        ("b", case_b(Variant::ModelII), 602),
        ("c", case_c(Variant::ModelII), 603),
    ] {
        let data = simulate_dataset(&spec, n, seed).unwrap();
        let masses = spec.outcome_masses(ctl).unwrap();
        for (delta, want) in
            [(0u8, masses.c_before_t), (1, masses.t_before_c), (2, masses.tie)]
        {
            let freq = data.iter().filter(|o| o.delta == delta).count() as f64 / n as f64;
            let se = (want * (1.0 - want) / n as f64).sqrt().max(1e-12);
            assert!(
                (freq - want).abs() < 4.0 * se,
                "case {name} delta {delta}: frequency {freq} vs mass {want} (se {se:.2e})"
            );
        }
        let ys: Vec<f64> = data.iter().map(|o| o.y).collect();
        let ecdf = EmpiricalCdf::new(&ys).unwrap();
        let sup = ecdf.ks_distance(|t| 1.0 - spec.survival_y(t, ctl).unwrap());
        assert!(sup < dkw, "case {name}: KS distance {sup} exceeds DKW band {dkw}");
    }
    budget(start, 120.0, "criterion 4");
    println!("criterion 4: PASS - 3x10^6 outcomes match masses (4 se) and CDFs (DKW 1.95e-3)");
}

/// Consistency across sample sizes: the grid-mean squared deviation of
/// the fitted event-margin CDF shrinks strictly with n, and the relative
/// clock-rate error at n = 200 improves on n = 50.
#[test]
fn criterion_5_consistency_study() {
    let start = Instant::now();
    for (name, spec, seed) in
        [("a", case_a(Variant::ModelI), 71u64), ("b", case_b(Variant::ModelI), 72)]
    {
        let config = StudyConfig {
            spec: spec.clone(),
            sample_sizes: vec![50, 100, 200],
            n_replicates: 100,
            t_grid: hitcrest::default_t_grid(&spec, 101, SeriesControl::default()).unwrap(),
            seed,
            fit: FitOptions::default(),
            control: SeriesControl::default(),
        };
        let result = run_study(&config).unwrap();

        let mean_nx: Vec<f64> = result
            .summaries
            .iter()
            .map(|s| s.curve.iter().map(|p| p.nx_t).sum::<f64>() / s.curve.len() as f64)
            .collect();
        assert!(
            mean_nx[0] > mean_nx[1] && mean_nx[1] > mean_nx[2],
            "case {name}: grid-mean deviations {mean_nx:?} not strictly decreasing"
        );

        let median_rel = |size: usize| -> f64 {
            let mut devs: Vec<f64> = result
                .estimates
                .iter()
                .filter(|r| r.sample_size == size && r.converged)
                .map(|r| (r.theta[0] / 1.42 - 1.0).abs())
                .collect();
            devs.sort_by(f64::total_cmp);
            devs[devs.len() / 2]
        };
        let m50 = median_rel(50);
        let m200 = median_rel(200);
        assert!(
            m200 < m50,
            "case {name}: median relative rate error {m200} at n=200 not below {m50} at n=50"
        );
        println!(
            "criterion 5 (case {name}): mean nx {mean_nx:?}, median |rate error| {m50:.4} -> {m200:.4}"
        );
    }
    budget(start, 900.0, "criterion 5");
    println!("criterion 5: PASS - deviations shrink with n in both study cases");
}

/// Information identity at the generating parameters: the mean Hessian
/// plus the mean score outer product vanishes elementwise to within four
/// Monte-Carlo standard errors.
#[test]
fn criterion_6_information_identity() {
    let start = Instant::now();
    let spec = case_b(Variant::ModelII);
    let template = FitTemplate::from_spec(&spec);
    let data = simulate_dataset(&spec, 100_000, 1806).unwrap();
    let info =
        information_matrices(&template, &template.params(), &data, SeriesControl::default())
            .unwrap();
    let d = template.params().dim();
    let mut worst: f64 = 0.0;
    for j in 0..d {
        for k in 0..d {
            let dev = info.a[(j, k)] + info.b[(j, k)];
            let se = info.identity_se[(j, k)];
            assert!(
                dev.abs() <= 4.0 * se,
                "identity violated at ({j},{k}): A+B = {dev:.3e}, se {se:.3e}"
            );
            worst = worst.max(dev.abs() / se);
        }
    }
    budget(start, 300.0, "criterion 6");
    println!("criterion 6: PASS - A + B within 4 se elementwise (worst {worst:.2} se)");
}

/// Wald interval coverage of the clock rate at nominal 95%, within a
/// four-sigma binomial band.
#[test]
fn criterion_7_wald_coverage() {
    let start = Instant::now();
    let spec = case_b(Variant::ModelII);
    let template = FitTemplate::from_spec(&spec);
    let options = FitOptions::default();
    let ctl = SeriesControl::default();
    let reps = 200usize;
    let mut covered = 0usize;
    let mut converged = 0usize;
    for r in 0..reps {
        let data = simulate_dataset(&spec, 200, 9_000 + r as u64).unwrap();
        let res = fit(&template, &data, &options, ctl).unwrap();
        if !res.converged {
            continue;
        }
        converged += 1;
        let (lo, hi) = wald_interval(&res, 0, 0.95).unwrap();
        if lo <= 1.42 && 1.42 <= hi {
            covered += 1;
        }
    }
    assert!(
        converged >= 180,
        "only {converged}/{reps} replicates converged; coverage not assessable"
    );
    let coverage = covered as f64 / converged as f64;
    assert!(
        (coverage - 0.95).abs() <= 0.07,
        "coverage {coverage} outside 0.95 +/- 0.07 ({covered}/{converged})"
    );
    budget(start, 1800.0, "criterion 7");
    println!("criterion 7: PASS - Wald coverage {coverage:.3} ({covered}/{converged} replicates)");
}

/// The three reference cases dispatch to the three identifiability
/// regimes, and the two-level scheme is flagged inadequate for the
/// atom-at-zero pair.
#[test]
fn criterion_8_identifiability_dispatch() {
    let specs = [
        (case_a(Variant::ModelI), Hypothesis::H1),
        (case_b(Variant::ModelI), Hypothesis::H2I),
        (case_c(Variant::ModelII), Hypothesis::H2II),
    ];
    for (spec, want) in &specs {
        let r = identifiability_report(
            &spec.family_x(),
            spec.x(),
            &spec.family_z(),
            spec.z(),
            spec.variant(),
        )
        .unwrap();
        assert_eq!(r.hypothesis, *want);
        assert!(r.variant_adequate);
    }
    let c = case_c(Variant::ModelI);
    let r = identifiability_report(&c.family_x(), c.x(), &c.family_z(), c.z(), c.variant())
        .unwrap();
    assert_eq!(r.hypothesis, Hypothesis::H2II);
    assert!(!r.variant_adequate, "two-level scheme must be inadequate for case c");
    println!("criterion 8: PASS - cases dispatch to H1, H2i, H2ii; inadequate pair flagged");
}

/// Scaling exponential thresholds by k and rates by 1/k leaves the log
/// likelihood of a fixed dataset unchanged.
#[test]
fn criterion_9_exponential_scale_invariance() {
    let start = Instant::now();
    let spec = case_b(Variant::ModelII);
    let data = simulate_dataset(&spec, 300, 1_000_003).unwrap();
    let ctl = SeriesControl::default();
    let base_t = FitTemplate::from_spec(&spec);
    let base = log_likelihood(&base_t, &base_t.params(), &data, ctl).unwrap();
    for k in [2.0, 10.0] {
        let scaled = ModelSpec::new(
            1.42,
            JumpFamily::exponential(0.71 / k).unwrap(),
            14.0 * k,
            JumpFamily::exponential(2.04 / k).unwrap(),
            7.0 * k,
            Variant::ModelII,
        )
        .unwrap();
        let t = FitTemplate::from_spec(&scaled);
        let ll = log_likelihood(&t, &t.params(), &data, ctl).unwrap();
        assert!(
            (ll - base).abs() < 1e-10 * base.abs(),
            "k = {k}: log likelihood {ll} vs {base}"
        );
    }
    budget(start, 30.0, "criterion 9");
    println!("criterion 9: PASS - log likelihood invariant under k = 2 and k = 10 rescaling");
}
