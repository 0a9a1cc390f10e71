//! Shared fixtures for integration tests: the three reference
//! parameterizations used throughout, and a small adaptive quadrature.

#![allow(dead_code)]

use hitcrest::{JumpFamily, ModelSpec, SeriesControl, Variant};

pub fn case_a(variant: Variant) -> ModelSpec {
    ModelSpec::new(
        1.42,
        JumpFamily::bernoulli(0.36).unwrap(),
        7.0,
        JumpFamily::dirac(1.0).unwrap(),
        17.0,
        variant,
    )
    .unwrap()
}

pub fn case_b(variant: Variant) -> ModelSpec {
    ModelSpec::new(
        1.42,
        JumpFamily::exponential(0.71).unwrap(),
        14.0,
        JumpFamily::exponential(2.04).unwrap(),
        7.0,
        variant,
    )
    .unwrap()
}

pub fn case_c(variant: Variant) -> ModelSpec {
    ModelSpec::new(
        1.42,
        JumpFamily::bernoulli(0.36).unwrap(),
        7.0,
        JumpFamily::poisson(1.23).unwrap(),
        19.0,
        variant,
    )
    .unwrap()
}

pub fn tight() -> SeriesControl {
    SeriesControl { epsilon: 1e-12, hard_cap: 10_000 }
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
}
