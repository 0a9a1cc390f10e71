//! Poisson-weighted series evaluated stably in log space.
//!
//! Every closed-form quantity in the model is a mixture
//! `sum_n b_n e^{-lambda t} (lambda t)^n / n!` with bounded coefficients.
//! Direct evaluation underflows once `lambda * t` exceeds a few hundred,
//! so sums are accumulated relative to the central Poisson weight at
//! `n = floor(lambda * t)` and expanded outward in both directions until
//! geometric tail bounds drop below the requested tolerance.

use crate::{Error, Result};

/// Truncation control for all series evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    /// Relative tail tolerance; the truncation error of a mixture stays
    /// below `epsilon * (result + e^{-lambda t})`.
    pub epsilon: f64,
    /// Absolute cap on the number of terms in one evaluation.
    pub hard_cap: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl { epsilon: 1e-10, hard_cap: 10_000 }
    }
}

impl SeriesControl {
    pub fn new(epsilon: f64, hard_cap: usize) -> Result<Self> {
        let ctl = SeriesControl { epsilon, hard_cap };
        ctl.validate()?;
        Ok(ctl)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1e-6) {
            return Err(Error::InvalidParameter(format!(
                "series epsilon must be in (0, 1e-6], got {}",
                self.epsilon
            )));
        }
        if self.hard_cap < 50 {
            return Err(Error::InvalidParameter(format!(
                "series hard_cap must be at least 50, got {}",
                self.hard_cap
            )));
        }
        Ok(())
    }
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Default)]
struct Acc {
    sum: f64,
    comp: f64,
}

impl Acc {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// One evaluated mixture, kept as `scaled * exp(log_scale)` so that
/// ratios and logarithms survive even when the value itself underflows.
#[derive(Debug, Clone, Copy)]
pub struct MixtureEval {
    pub log_scale: f64,
    pub scaled: f64,
    pub terms: usize,
}

impl MixtureEval {
    pub fn value(&self) -> f64 {
        self.scaled * self.log_scale.exp()
    }

    pub fn ln(&self) -> f64 {
        if self.scaled > 0.0 {
            self.log_scale + self.scaled.ln()
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// Two mixtures over the same Poisson weights, for stable ratios.
#[derive(Debug, Clone, Copy)]
pub struct MixturePair {
    pub log_scale: f64,
    pub scaled_a: f64,
    pub scaled_b: f64,
    pub terms: usize,
}

/// `ln(n!) - ln(sqrt(2 pi n) (n/e)^n)`, the Stirling series remainder.
fn stirlerr(n: f64) -> f64 {
    // n! is exact in f64 through 18!, so small arguments take one rounding.
    const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_74;
    if n <= 18.0 {
        let mut fact = 1.0;
        let mut k = 2.0;
        while k <= n {
            fact *= k;
            k += 1.0;
        }
        return fact.ln() - (n + 0.5) * n.ln() + n - LN_SQRT_2PI;
    }
    let r = 1.0 / (n * n);
    (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0 - r / 1188.0) * r) * r) * r) / n
}

/// Binomial deviance `x ln(x / np) + np - x`, stable when `x` is close to
/// `np` where the direct form loses all its digits to cancellation.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        let mut j = 1.0;
        loop {
            ej *= v2;
            let s1 = s + ej / (2.0 * j + 1.0);
            if s1 == s {
                return s1;
            }
            s = s1;
            j += 1.0;
        }
    } else {
        x * (x / np).ln() + np - x
    }
}

/// Log of the Poisson(m) probability at integer `n`, computed through the
/// saddle-point form so the absolute error stays near machine precision
/// even when `m` is in the thousands (the textbook
/// `-m + n ln m - ln n!` loses ~1e-10 there to cancellation of large logs).
fn ln_poisson_weight(n: f64, m: f64) -> f64 {
    const LN_2PI: f64 = 1.837_877_066_409_345_5;
    if n == 0.0 {
        return -m;
    }
    -stirlerr(n) - bd0(n, m) - 0.5 * (LN_2PI + n.ln())
}

fn check_inputs(lambda: f64, t: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    if t < 0.0 || !t.is_finite() {
        return Err(Error::Domain(format!("t must be nonnegative, got {t}")));
    }
    Ok(())
}

/// Shared sweep kernel: accumulates `k` coefficient streams against the
/// same relative Poisson weights centered at `floor(lambda t)`.
fn sweep<const K: usize>(
    mut b: impl FnMut(usize) -> [f64; K],
    lambda: f64,
    t: f64,
    ctl: SeriesControl,
) -> Result<(f64, [f64; K], usize)> {
    check_inputs(lambda, t)?;
    ctl.validate()?;
    let m = lambda * t;
    if m == 0.0 {
        return Ok((0.0, b(0), 1));
    }
    let n0 = (m.floor() as usize).min(ctl.hard_cap - 1);
    let n0_f = n0 as f64;
    let log_w0 = ln_poisson_weight(n0_f, m);
    // e^{-lambda t} in scaled units; the center weight is never below it.
    let floor = (-m - log_w0).exp();

    let mut acc = [Acc::default(); K];
    let mut acc_abs = [0.0f64; K];
    let mut terms = 0usize;

    let tol_met = |bound: f64, acc_abs: &[f64; K]| -> bool {
        acc_abs.iter().all(|&a| bound <= ctl.epsilon * (a + floor))
    };

    // Upward from the center.
    let mut r = 1.0f64;
    let mut n = n0;
    loop {
        let vs = b(n);
        for i in 0..K {
            acc[i].add(r * vs[i]);
            acc_abs[i] += r * vs[i].abs();
        }
        terms += 1;
        let r_next = r * m / (n as f64 + 1.0);
        let past_mode = n as f64 + 1.0 > m;
        if past_mode {
            let rho = m / (n as f64 + 2.0);
            let bound = r_next / (1.0 - rho);
            if tol_met(bound, &acc_abs) {
                break;
            }
        }
        if terms >= ctl.hard_cap {
            let rho = (m / (n as f64 + 2.0)).min(0.999_999);
            let bound = r_next / (1.0 - rho);
            if !tol_met(bound, &acc_abs) {
                return Err(Error::Truncation { t, terms, tail: bound * log_w0.exp() });
            }
            break;
        }
        n += 1;
        r = r_next;
    }

    // Downward from the center.
    if n0 > 0 {
        let mut r = n0_f / m;
        let mut n = n0 - 1;
        loop {
            if r == 0.0 {
                break;
            }
            let vs = b(n);
            for i in 0..K {
                acc[i].add(r * vs[i]);
                acc_abs[i] += r * vs[i].abs();
            }
            terms += 1;
            if n == 0 {
                break;
            }
            let rho = n as f64 / m;
            let bound = r * rho / (1.0 - rho);
            if tol_met(bound, &acc_abs) {
                break;
            }
            if terms >= ctl.hard_cap {
                if !tol_met(bound, &acc_abs) {
                    return Err(Error::Truncation { t, terms, tail: bound * log_w0.exp() });
                }
                break;
            }
            r *= n as f64 / m;
            n -= 1;
        }
    }

    let mut out = [0.0f64; K];
    for i in 0..K {
        out[i] = acc[i].total();
    }
    Ok((log_w0, out, terms))
}

/// Evaluates `sum_n b(n) e^{-lambda t} (lambda t)^n / n!` in scaled form.
pub fn poisson_mixture_scaled(
    mut b: impl FnMut(usize) -> f64,
    lambda: f64,
    t: f64,
    ctl: SeriesControl,
) -> Result<MixtureEval> {
    let (log_scale, [scaled], terms) = sweep(|n| [b(n)], lambda, t, ctl)?;
    Ok(MixtureEval { log_scale, scaled, terms })
}

/// Evaluates two mixtures on shared weights, e.g. the numerator and
/// denominator of the hazard ratio.
pub fn poisson_mixture_scaled_pair(
    mut a: impl FnMut(usize) -> f64,
    mut b: impl FnMut(usize) -> f64,
    lambda: f64,
    t: f64,
    ctl: SeriesControl,
) -> Result<MixturePair> {
    let (log_scale, [scaled_a, scaled_b], terms) = sweep(|n| [a(n), b(n)], lambda, t, ctl)?;
    Ok(MixturePair { log_scale, scaled_a, scaled_b, terms })
}

/// Mixture value for a coefficient sequence given as a closure; sequences
/// of probabilities or of probability differences both stay in [-1, 1],
/// which is what the tail bounds assume. The result is clamped at zero:
/// mixtures of valid coefficient sequences are nonnegative, and the clamp
/// only removes rounding noise from cancellation.
pub fn poisson_mixture_fn(
    b: impl FnMut(usize) -> f64,
    lambda: f64,
    t: f64,
    ctl: SeriesControl,
) -> Result<f64> {
    Ok(poisson_mixture_scaled(b, lambda, t, ctl)?.value().max(0.0))
}

/// Mixture value for a finite coefficient sequence; indices past the end
/// contribute zero.
pub fn poisson_mixture(coeffs: &[f64], lambda: f64, t: f64, ctl: SeriesControl) -> Result<f64> {
    poisson_mixture_fn(|n| coeffs.get(n).copied().unwrap_or(0.0), lambda, t, ctl)
}

/// Table length needed so that every index a mixture at time `t` can touch
/// before its tail bound triggers is backed by a real value; beyond this
/// the Poisson weight is below `epsilon * e^{-lambda t}`.
pub(crate) fn required_len(lambda: f64, t: f64, ctl: SeriesControl) -> usize {
    let m = lambda * t;
    let slack = m + (1.0 / ctl.epsilon).ln() + 20.0;
    let delta = (2.0 * m.max(1.0) * slack).sqrt() + 8.0;
    ((m + delta).ceil() as usize + 8).min(ctl.hard_cap + 2)
}
