//! Closed-form model functions: outcome densities under both censoring
//! schemes, the joint and diagonal densities of `(T, C)`, outcome masses,
//! survival and hazard of `Y = min(T, C)`, and the marginal CDFs.
//!
//! All functions reduce to Poisson-weighted coefficient series and are
//! pure given an immutable [`ModelSpec`]; the spec can be shared freely
//! across threads (coefficient tables grow behind a lock and are shared
//! by clones).

use crate::jump::{CoefficientTable, JumpFamily};
use crate::series::{
    poisson_mixture_fn, poisson_mixture_scaled, poisson_mixture_scaled_pair, required_len,
    SeriesControl,
};
use crate::{Error, Result};
use std::sync::Arc;

/// Censoring scheme: Model I folds ties into the uncensored indicator
/// (`delta = 1{T <= C}`), Model II observes them (`delta = 2` when
/// `T = C`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    ModelI,
    ModelII,
}

impl Variant {
    pub fn valid_delta(&self, delta: u8) -> bool {
        match self {
            Variant::ModelI => delta <= 1,
            Variant::ModelII => delta <= 2,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "I" | "i" | "1" => Ok(Variant::ModelI),
            "II" | "ii" | "2" => Ok(Variant::ModelII),
            other => Err(Error::Parse(format!("unknown model variant {other:?}"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::ModelI => write!(f, "I"),
            Variant::ModelII => write!(f, "II"),
        }
    }
}

/// One censored outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub y: f64,
    pub delta: u8,
}

/// Which marginal hitting time a CDF refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Margin {
    T,
    C,
}

/// Probabilities of the three outcome orderings; they sum to one.
#[derive(Debug, Clone, Copy)]
pub struct OutcomeMasses {
    /// P[T < C]
    pub t_before_c: f64,
    /// P[T = C]
    pub tie: f64,
    /// P[T > C]
    pub c_before_t: f64,
}

impl OutcomeMasses {
    /// P[T <= C], the uncensored mass under Model I.
    pub fn uncensored_model_i(&self) -> f64 {
        self.t_before_c + self.tie
    }

    pub fn sum(&self) -> f64 {
        self.t_before_c + self.tie + self.c_before_t
    }
}

/// Full model parameterization: clock intensity, one jump family and
/// threshold per margin, and the censoring scheme.
#[derive(Clone)]
pub struct ModelSpec {
    lambda: f64,
    x: f64,
    z: f64,
    variant: Variant,
    tab_x: Arc<CoefficientTable>,
    tab_z: Arc<CoefficientTable>,
}

impl std::fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModelSpec")
            .field("lambda", &self.lambda)
            .field("family_x", &self.family_x())
            .field("x", &self.x)
            .field("family_z", &self.family_z())
            .field("z", &self.z)
            .field("variant", &self.variant)
            .finish()
    }
}

impl PartialEq for ModelSpec {
    fn eq(&self, other: &Self) -> bool {
        self.lambda == other.lambda
            && self.x == other.x
            && self.z == other.z
            && self.variant == other.variant
            && self.family_x() == other.family_x()
            && self.family_z() == other.family_z()
    }
}

impl ModelSpec {
    pub fn new(
        lambda: f64,
        family_x: JumpFamily,
        x: f64,
        family_z: JumpFamily,
        z: f64,
        variant: Variant,
    ) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
        }
        Ok(ModelSpec {
            lambda,
            x,
            z,
            variant,
            tab_x: Arc::new(CoefficientTable::new(family_x, x)?),
            tab_z: Arc::new(CoefficientTable::new(family_z, z)?),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn family_x(&self) -> JumpFamily {
        self.tab_x.family()
    }

    pub fn family_z(&self) -> JumpFamily {
        self.tab_z.family()
    }

    pub fn table_x(&self) -> &CoefficientTable {
        &self.tab_x
    }

    pub fn table_z(&self) -> &CoefficientTable {
        &self.tab_z
    }

    /// Runs `f` with coefficient and mass slices long enough for any series
    /// a mixture at time `t` can touch (shifted indices included).
    fn with_coeffs<R>(
        &self,
        t: f64,
        ctl: SeriesControl,
        f: impl FnOnce(&[f64], &[f64], &[f64], &[f64]) -> R,
    ) -> R {
        let len = required_len(self.lambda, t, ctl) + 1;
        self.tab_x
            .with_tables(len, |cx, mx| self.tab_z.with_tables(len, |cz, mz| f(cx, mx, cz, mz)))
    }

    fn check_delta(&self, delta: u8) -> Result<()> {
        if self.variant.valid_delta(delta) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "delta = {delta} is not a valid outcome under Model {}",
                self.variant
            )))
        }
    }

    /// Density of `(Y, Delta)` at `(t, delta)` with respect to
    /// Lebesgue x counting measure.
    pub fn outcome_density(&self, t: f64, delta: u8, ctl: SeriesControl) -> Result<f64> {
        self.check_delta(delta)?;
        self.with_coeffs(t, ctl, |cx, mx, cz, mz| {
            let value = match (self.variant, delta) {
                (Variant::ModelI, 1) => poisson_mixture_fn(
                    |n| mx.get(n).copied().unwrap_or(0.0) * cz.get(n).copied().unwrap_or(0.0),
                    self.lambda,
                    t,
                    ctl,
                )?,
                (_, 0) => poisson_mixture_fn(
                    |n| mz.get(n).copied().unwrap_or(0.0) * cx.get(n + 1).copied().unwrap_or(0.0),
                    self.lambda,
                    t,
                    ctl,
                )?,
                (Variant::ModelII, 1) => poisson_mixture_fn(
                    |n| mx.get(n).copied().unwrap_or(0.0) * cz.get(n + 1).copied().unwrap_or(0.0),
                    self.lambda,
                    t,
                    ctl,
                )?,
                (Variant::ModelII, 2) => poisson_mixture_fn(
                    |n| mx.get(n).copied().unwrap_or(0.0) * mz.get(n).copied().unwrap_or(0.0),
                    self.lambda,
                    t,
                    ctl,
                )?,
                _ => unreachable!("delta validated above"),
            };
            Ok(self.lambda * value)
        })
    }

    /// Natural logarithm of [`Self::outcome_density`], stable far into the
    /// tail where the density itself underflows.
    pub fn log_outcome_density(&self, t: f64, delta: u8, ctl: SeriesControl) -> Result<f64> {
        self.check_delta(delta)?;
        self.with_coeffs(t, ctl, |cx, mx, cz, mz| {
            let eval = match (self.variant, delta) {
                (Variant::ModelI, 1) => poisson_mixture_scaled(
                    |n| mx.get(n).copied().unwrap_or(0.0) * cz.get(n).copied().unwrap_or(0.0),
                    self.lambda,
                    t,
                    ctl,
                )?,
                (_, 0) => poisson_mixture_scaled(
                    |n| mz.get(n).copied().unwrap_or(0.0) * cx.get(n + 1).copied().unwrap_or(0.0),
                    self.lambda,
                    t,
                    ctl,
                )?,
                (Variant::ModelII, 1) => poisson_mixture_scaled(
                    |n| mx.get(n).copied().unwrap_or(0.0) * cz.get(n + 1).copied().unwrap_or(0.0),
                    self.lambda,
                    t,
                    ctl,
                )?,
                (Variant::ModelII, 2) => poisson_mixture_scaled(
                    |n| mx.get(n).copied().unwrap_or(0.0) * mz.get(n).copied().unwrap_or(0.0),
                    self.lambda,
                    t,
                    ctl,
                )?,
                _ => unreachable!("delta validated above"),
            };
            Ok(self.lambda.ln() + eval.ln())
        })
    }

    /// Probabilities of the three orderings of `(T, C)`, summed until the
    /// joint coefficient tail is below the series tolerance. Independent
    /// of `lambda`.
    pub fn outcome_masses(&self, ctl: SeriesControl) -> Result<OutcomeMasses> {
        let mut t_before_c = 0.0;
        let mut tie = 0.0;
        let mut c_before_t = 0.0;
        let mut lo = 0usize;
        let mut chunk = 128usize;
        loop {
            let hi = lo + chunk;
            let done = self.tab_x.with_tables(hi + 1, |cx, mx| {
                self.tab_z.with_tables(hi + 1, |cz, mz| {
                    for n in lo..hi {
                        t_before_c += mx[n] * cz[n + 1];
                        tie += mx[n] * mz[n];
                        c_before_t += mz[n] * cx[n + 1];
                    }
                    // Remaining mass of every series is at most c_N,X * c_N,Z.
                    cx[hi] * cz[hi] <= ctl.epsilon
                })
            });
            if done {
                return Ok(OutcomeMasses { t_before_c, tie, c_before_t });
            }
            lo = hi;
            chunk = (chunk * 2).min(4096);
            if lo >= ctl.hard_cap {
                let tail = self.tab_x.coeff(lo) * self.tab_z.coeff(lo);
                return Err(Error::Truncation { t: f64::NAN, terms: lo, tail });
            }
        }
    }

    /// `P[T = C]`; positive in general because the jump clock is shared.
    pub fn prob_equal(&self, ctl: SeriesControl) -> Result<f64> {
        Ok(self.outcome_masses(ctl)?.tie)
    }

    /// Survival function of `Y = min(T, C)`.
    pub fn survival_y(&self, t: f64, ctl: SeriesControl) -> Result<f64> {
        self.with_coeffs(t, ctl, |cx, _, cz, _| {
            let v = poisson_mixture_fn(
                |n| cx.get(n).copied().unwrap_or(0.0) * cz.get(n).copied().unwrap_or(0.0),
                self.lambda,
                t,
                ctl,
            )?;
            Ok(v.min(1.0))
        })
    }

    /// Hazard of `Y`, evaluated as `lambda * (1 - ratio)` where the ratio
    /// puts the shifted and unshifted coefficient mixtures over the same
    /// Poisson weights; this stays well defined long after the survival
    /// value itself underflows.
    pub fn hazard(&self, t: f64, ctl: SeriesControl) -> Result<f64> {
        self.with_coeffs(t, ctl, |cx, _, cz, _| {
            let pair = poisson_mixture_scaled_pair(
                |n| cx.get(n + 1).copied().unwrap_or(0.0) * cz.get(n + 1).copied().unwrap_or(0.0),
                |n| cx.get(n).copied().unwrap_or(0.0) * cz.get(n).copied().unwrap_or(0.0),
                self.lambda,
                t,
                ctl,
            )?;
            if pair.scaled_b <= 0.0 {
                return Err(Error::Underflow(t));
            }
            Ok((self.lambda * (1.0 - pair.scaled_a / pair.scaled_b)).clamp(0.0, self.lambda))
        })
    }

    /// Marginal CDF of `T` or `C`: one minus the mixture of that margin's
    /// own coefficients.
    pub fn marginal_cdf(&self, margin: Margin, t: f64, ctl: SeriesControl) -> Result<f64> {
        let tab = match margin {
            Margin::T => &self.tab_x,
            Margin::C => &self.tab_z,
        };
        let len = required_len(self.lambda, t, ctl) + 1;
        tab.with_tables(len, |c, _| {
            let surv =
                poisson_mixture_fn(|n| c.get(n).copied().unwrap_or(0.0), self.lambda, t, ctl)?;
            Ok((1.0 - surv).clamp(0.0, 1.0))
        })
    }

    /// Density of the absolutely continuous part of `(T, C)` off the
    /// diagonal. The diagonal carries the singular mass `P[T = C]` and is
    /// rejected here; see [`Self::diagonal_density`].
    pub fn joint_density_ac(&self, u: f64, v: f64, ctl: SeriesControl) -> Result<f64> {
        if !u.is_finite() || !v.is_finite() || u < 0.0 || v < 0.0 {
            return Err(Error::Domain(format!("(u, v) must be nonnegative, got ({u}, {v})")));
        }
        if u == v {
            return Err(Error::Domain(format!(
                "joint density is undefined on the diagonal (u = v = {u}); the diagonal mass is singular"
            )));
        }
        // Orient so the "first" margin crosses at the earlier time.
        let (first, second, early, gap) = if u < v {
            (&self.tab_x, &self.tab_z, u, v - u)
        } else {
            (&self.tab_z, &self.tab_x, v, u - v)
        };
        let len_outer = required_len(self.lambda, early, ctl) + 1;
        let len_inner = required_len(self.lambda, gap, ctl) + 1;
        first.with_tables(len_outer, |_, m_first| {
            second.with_tables(len_outer + len_inner + 1, |_, m_second| {
                let outer = poisson_mixture_fn(
                    |i| {
                        let mass = m_first.get(i).copied().unwrap_or(0.0);
                        if mass == 0.0 {
                            return 0.0;
                        }
                        let inner = poisson_mixture_fn(
                            |m| m_second.get(i + 1 + m).copied().unwrap_or(0.0),
                            self.lambda,
                            gap,
                            ctl,
                        )
                        .unwrap_or(0.0);
                        mass * inner
                    },
                    self.lambda,
                    early,
                    ctl,
                )?;
                Ok(self.lambda * self.lambda * outer)
            })
        })
    }

    /// Density of the singular (diagonal) part of `(T, C)`; integrates to
    /// `P[T = C]`. Equals the Model II `delta = 2` outcome density.
    pub fn diagonal_density(&self, u: f64, ctl: SeriesControl) -> Result<f64> {
        self.with_coeffs(u, ctl, |_, mx, _, mz| {
            let v = poisson_mixture_fn(
                |n| mx.get(n).copied().unwrap_or(0.0) * mz.get(n).copied().unwrap_or(0.0),
                self.lambda,
                u,
                ctl,
            )?;
            Ok(self.lambda * v)
        })
    }

    /// Mean of `Y`: `(1 / lambda) * sum_n c_{n,X} c_{n,Z}`.
    pub fn mean_y(&self, ctl: SeriesControl) -> Result<f64> {
        let mut acc = 0.0;
        let mut lo = 0usize;
        let mut chunk = 128usize;
        loop {
            let hi = lo + chunk;
            let done = self.tab_x.with_tables(hi + 1, |cx, _| {
                self.tab_z.with_tables(hi + 1, |cz, _| {
                    for n in lo..hi {
                        acc += cx[n] * cz[n];
                    }
                    let term = cx[hi] * cz[hi];
                    let prev = cx[hi - 1] * cz[hi - 1];
                    // Once the summand decays geometrically the remainder is
                    // bounded by the next term over one minus the ratio.
                    term == 0.0
                        || (prev > 0.0 && term / prev < 0.9 && term / (1.0 - term / prev) <= ctl.epsilon)
                })
            });
            if done {
                return Ok(acc / self.lambda);
            }
            lo = hi;
            chunk = (chunk * 2).min(4096);
            if lo >= ctl.hard_cap {
                return Err(Error::Truncation {
                    t: f64::NAN,
                    terms: lo,
                    tail: self.tab_x.coeff(lo) * self.tab_z.coeff(lo),
                });
            }
        }
    }

    /// Quantile of `Y` by bisection on the survival function.
    pub fn quantile_y(&self, q: f64, ctl: SeriesControl) -> Result<f64> {
        if !(0.0 < q && q < 1.0) {
            return Err(Error::Domain(format!("quantile level must be in (0, 1), got {q}")));
        }
        let target = 1.0 - q;
        let mut hi = 1.0 / self.lambda;
        let mut doublings = 0;
        while self.survival_y(hi, ctl)? > target {
            hi *= 2.0;
            doublings += 1;
            if doublings > 200 {
                return Err(Error::Domain(format!("quantile level {q} not reached")));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.survival_y(mid, ctl)? > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * hi.max(1.0) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// True when `P[T = C] = 0`, in which case one ordering is almost sure
    /// and the other outcome density vanishes identically.
    pub fn degenerate(&self, ctl: SeriesControl) -> Result<bool> {
        Ok(self.prob_equal(ctl)? == 0.0)
    }
}
