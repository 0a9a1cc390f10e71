//! Joint law of the two hitting times: absolutely continuous part off the
//! diagonal, singular part on it, and how the pieces recombine into the
//! outcome masses.

mod common;

use common::{case_b, integrate, tight};
use hitcrest::{Error, ModelSpec, Variant};

// Both margins exponential: jumps are continuous, yet the shared clock
// still puts strictly positive mass on the diagonal.

/// Swapping the two margins transposes the off-diagonal density.
#[test]
fn joint_density_transposes_under_margin_swap() {
    let spec = case_b(Variant::ModelII);
    let swapped = ModelSpec::new(
        spec.lambda(),
        spec.family_z(),
        spec.z(),
        spec.family_x(),
        spec.x(),
        Variant::ModelII,
    )
    .unwrap();
    let ctl = tight();
    for (u, v) in [(1.0, 2.0), (0.3, 9.0), (4.0, 4.5), (11.0, 2.0), (6.0, 18.0)] {
        let a = spec.joint_density_ac(u, v, ctl).unwrap();
        let b = swapped.joint_density_ac(v, u, ctl).unwrap();
        let rel = (a - b).abs() / a.abs().max(1e-300);
        assert!(rel < 1e-11, "f({u},{v}) = {a} vs swapped f({v},{u}) = {b}");
        assert!(a >= 0.0);
    }
}

/// The density is absolutely continuous only off the diagonal; on it the
/// law has a singular component, so pointwise evaluation is refused.
#[test]
fn diagonal_points_are_rejected() {
    let spec = case_b(Variant::ModelII);
    let ctl = tight();
    assert!(matches!(spec.joint_density_ac(3.0, 3.0, ctl), Err(Error::Domain(_))));
    assert!(matches!(spec.joint_density_ac(-1.0, 3.0, ctl), Err(Error::Domain(_))));
    assert!(matches!(spec.joint_density_ac(3.0, f64::NAN, ctl), Err(Error::Domain(_))));
}

/// The off-diagonal mass splits into the two strict orderings. Reference
/// values computed with mpmath, 50-digit arithmetic.
#[test]
fn off_diagonal_regions_integrate_to_the_ordering_probabilities() {
    let spec = case_b(Variant::ModelII);
    let ctl = tight();
    let masses = spec.outcome_masses(ctl).unwrap();
    assert!((masses.t_before_c - 0.7830253937646013).abs() < 1e-12);
    assert!((masses.c_before_t - 0.1614552828182611).abs() < 1e-12);

    // Outer over u, inner over v on each side of the diagonal. The far
    // end is cut where survival is below 1e-7.
    let hi = spec.quantile_y(1.0 - 1e-7, ctl).unwrap();
    let lower = integrate(
        &|u| {
            let f = |v: f64| {
                if v > u {
                    spec.joint_density_ac(u, v, ctl).unwrap()
                } else {
                    0.0
                }
            };
            integrate(&f, u, hi, 1e-9)
        },
        0.0,
        hi,
        1e-7,
    );
    let upper = integrate(
        &|u| {
            let f = |v: f64| {
                if v < u {
                    spec.joint_density_ac(u, v, ctl).unwrap()
                } else {
                    0.0
                }
            };
            integrate(&f, 0.0, u, 1e-9)
        },
        0.0,
        hi,
        1e-7,
    );
    assert!(
        (lower - masses.t_before_c).abs() < 2e-4,
        "mass below diagonal {lower} vs {}",
        masses.t_before_c
    );
    assert!(
        (upper - masses.c_before_t).abs() < 2e-4,
        "mass above diagonal {upper} vs {}",
        masses.c_before_t
    );
}

/// The singular part lives on the diagonal and carries exactly the tie
/// probability.
#[test]
fn diagonal_density_integrates_to_the_tie_mass() {
    let spec = case_b(Variant::ModelII);
    let ctl = tight();
    let tie = spec.prob_equal(ctl).unwrap();
    assert!(tie > 0.05, "shared clock must give positive tie mass, got {tie}");
    let hi = spec.quantile_y(1.0 - 1e-9, ctl).unwrap();
    let integral = integrate(&|t| spec.diagonal_density(t, ctl).unwrap(), 0.0, hi, 1e-10);
    assert!(
        (integral - tie).abs() < 1e-7,
        "diagonal integral {integral} vs tie mass {tie}"
    );
}

/// A tie is observed exactly as outcome 2 in the three-level model, so
/// the diagonal density and that outcome density are the same function.
#[test]
fn diagonal_density_is_the_tie_outcome_density() {
    let spec = case_b(Variant::ModelII);
    let ctl = tight();
    for t in [0.1, 0.9, 2.7, 6.3, 11.0, 19.5] {
        let diag = spec.diagonal_density(t, ctl).unwrap();
        let tie = spec.outcome_density(t, 2, ctl).unwrap();
        let rel = (diag - tie).abs() / diag.abs().max(1e-300);
        assert!(rel < 1e-12, "t={t}: diagonal {diag} vs outcome-2 density {tie}");
    }
}

/// Off-diagonal mass plus diagonal mass must exhaust the law.
#[test]
fn joint_law_has_total_mass_one() {
    let spec = case_b(Variant::ModelII);
    let ctl = tight();
    let masses = spec.outcome_masses(ctl).unwrap();
    let total = masses.t_before_c + masses.tie + masses.c_before_t;
    assert!((total - 1.0).abs() < 1e-10, "masses sum to {total}");
}
