//! Parametric families of i.i.d. nonnegative jump sizes.
//!
//! The model never needs the jump laws themselves, only the crossing
//! coefficients `c_n = P[X_1 + ... + X_n < threshold]` (strict inequality,
//! `c_0 = 1`) and their consecutive differences
//! `c_n - c_{n+1} = P[the threshold is first reached at jump n + 1]`.
//! Each supported family ships both in closed form; differences use a
//! direct expression rather than subtraction so they stay accurate when
//! both coefficients are close to 1 or close to 0.
//!
//! Families are classified into three identifiability classes:
//! F1 (jumps bounded away from zero, crossing happens within a known
//! number of jumps), F2 (absolutely continuous with full support), and
//! F3 (discrete with an atom at zero).

use crate::{Error, Result};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};
use std::sync::RwLock;

/// A parametric nonnegative jump-size law.
///
/// Invariants: `Dirac` constant positive, `Bernoulli` probability in (0,1),
/// `Exponential` rate positive, `Poisson` mean positive. Every family has
/// `P[jump < 0] = 0` and `P[jump = 0] < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpFamily {
    Dirac { c: f64 },
    Bernoulli { p: f64 },
    Exponential { rate: f64 },
    Poisson { mean: f64 },
}

/// Identifiability class of a jump law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyClass {
    F1,
    F2,
    F3,
}

impl std::fmt::Display for FamilyClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FamilyClass::F1 => write!(f, "F1"),
            FamilyClass::F2 => write!(f, "F2"),
            FamilyClass::F3 => write!(f, "F3"),
        }
    }
}

/// Largest integer strictly below `threshold`, as the inclusive cutoff for
/// integer-valued jump sums: `P[S_n < threshold] = P[S_n <= cutoff]`.
fn cutoff(threshold: f64) -> i64 {
    let f = threshold.floor();
    if f == threshold {
        f as i64 - 1
    } else {
        f as i64
    }
}

fn ln_poisson_pmf(mu: f64, n: u64) -> f64 {
    -mu + n as f64 * mu.ln() - ln_gamma(n as f64 + 1.0)
}

/// `P[Poisson(mu) >= m]` for `m >= 1`, via the lower regularized gamma
/// function `P(m, mu)`.
fn poisson_upper_tail(mu: f64, m: u64) -> f64 {
    gamma_lr(m as f64, mu)
}

impl JumpFamily {
    pub fn dirac(c: f64) -> Result<Self> {
        let fam = JumpFamily::Dirac { c };
        fam.validate()?;
        Ok(fam)
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        let fam = JumpFamily::Bernoulli { p };
        fam.validate()?;
        Ok(fam)
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        let fam = JumpFamily::Exponential { rate };
        fam.validate()?;
        Ok(fam)
    }

    pub fn poisson(mean: f64) -> Result<Self> {
        let fam = JumpFamily::Poisson { mean };
        fam.validate()?;
        Ok(fam)
    }

    /// Checks the family parameter against its admissible range.
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            JumpFamily::Dirac { c } => c > 0.0 && c.is_finite(),
            JumpFamily::Bernoulli { p } => p > 0.0 && p < 1.0,
            JumpFamily::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            JumpFamily::Poisson { mean } => mean > 0.0 && mean.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{self}")))
        }
    }

    /// F1 for Dirac, F2 for Exponential, F3 for the discrete families
    /// with an atom at zero.
    pub fn classify(&self) -> FamilyClass {
        match self {
            JumpFamily::Dirac { .. } => FamilyClass::F1,
            JumpFamily::Exponential { .. } => FamilyClass::F2,
            JumpFamily::Bernoulli { .. } | JumpFamily::Poisson { .. } => FamilyClass::F3,
        }
    }

    /// `P[jump = 0]`; the large-time hazard deficit of a discrete margin.
    pub fn atom_at_zero(&self) -> f64 {
        match *self {
            JumpFamily::Dirac { .. } | JumpFamily::Exponential { .. } => 0.0,
            JumpFamily::Bernoulli { p } => 1.0 - p,
            JumpFamily::Poisson { mean } => (-mean).exp(),
        }
    }

    /// One draw from the family's law.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            JumpFamily::Dirac { c } => c,
            JumpFamily::Bernoulli { p } => {
                if rng.random_bool(p) {
                    1.0
                } else {
                    0.0
                }
            }
            JumpFamily::Exponential { rate } => {
                use rand_distr::Distribution;
                rand_distr::Exp::new(rate).expect("validated rate").sample(rng)
            }
            JumpFamily::Poisson { mean } => {
                use rand_distr::Distribution;
                rand_distr::Poisson::new(mean).expect("validated mean").sample(rng)
            }
        }
    }

    /// Crossing coefficient `c_n = P[X_1 + ... + X_n < threshold]`.
    ///
    /// `c_0 = 1` for every positive threshold. Closed forms: indicator
    /// `n*c < threshold` for Dirac; binomial lower tail for Bernoulli;
    /// regularized lower incomplete gamma `P(n, rate * threshold)` for
    /// Exponential; Poisson lower tail at mean `n * mean` for Poisson
    /// jumps.
    pub fn coefficient(&self, n: u64, threshold: f64) -> Result<f64> {
        if !(threshold > 0.0) || !threshold.is_finite() {
            return Err(Error::Domain(format!("threshold must be positive, got {threshold}")));
        }
        if n == 0 {
            return Ok(1.0);
        }
        Ok(match *self {
            JumpFamily::Dirac { c } => {
                if (n as f64) * c < threshold {
                    1.0
                } else {
                    0.0
                }
            }
            JumpFamily::Bernoulli { p } => {
                let k = cutoff(threshold);
                if k < 0 {
                    0.0
                } else if k as u64 >= n {
                    1.0
                } else {
                    // P[Bin(n, p) <= k] = I_{1-p}(n - k, k + 1)
                    beta_reg((n - k as u64) as f64, k as f64 + 1.0, 1.0 - p)
                }
            }
            JumpFamily::Exponential { rate } => gamma_lr(n as f64, rate * threshold),
            JumpFamily::Poisson { mean } => {
                let k = cutoff(threshold);
                if k < 0 {
                    0.0
                } else {
                    // P[Poisson(n * mean) <= k] = Q(k + 1, n * mean)
                    gamma_ur(k as f64 + 1.0, n as f64 * mean)
                }
            }
        })
    }

    /// `c_n - c_{n+1} = P[the threshold is first reached at jump n + 1]`,
    /// evaluated directly so that near-cancelling subtractions are avoided.
    pub fn crossing_mass(&self, n: u64, threshold: f64) -> Result<f64> {
        if !(threshold > 0.0) || !threshold.is_finite() {
            return Err(Error::Domain(format!("threshold must be positive, got {threshold}")));
        }
        Ok(match *self {
            JumpFamily::Dirac { c } => {
                let below = (n as f64) * c < threshold;
                let next_below = (n as f64 + 1.0) * c < threshold;
                if below && !next_below {
                    1.0
                } else {
                    0.0
                }
            }
            JumpFamily::Bernoulli { p } => {
                // First reached at jump n + 1 iff S_n = cutoff and the next
                // jump is a success.
                let k = cutoff(threshold);
                if k < 0 || (k as u64) > n {
                    0.0
                } else {
                    let (n_f, k_f) = (n as f64, k as f64);
                    let ln_binom = ln_gamma(n_f + 1.0) - ln_gamma(k_f + 1.0) - ln_gamma(n_f - k_f + 1.0);
                    (ln_binom + k_f * p.ln() + (n_f - k_f) * (1.0 - p).ln() + p.ln()).exp()
                }
            }
            JumpFamily::Exponential { rate } => {
                // Gamma-Poisson duality: c_n = P[Poisson(rate * x) >= n],
                // so the difference is the Poisson pmf at n.
                ln_poisson_pmf(rate * threshold, n).exp()
            }
            JumpFamily::Poisson { mean } => {
                let k = cutoff(threshold);
                if k < 0 {
                    0.0
                } else if n == 0 {
                    // S_0 = 0; cross at the first jump iff it is >= k + 1.
                    poisson_upper_tail(mean, k as u64 + 1)
                } else {
                    // Sum over the value of S_n <= k, next jump pushing past.
                    let mu = n as f64 * mean;
                    let mut acc = 0.0;
                    for j in 0..=(k as u64) {
                        let tail = poisson_upper_tail(mean, k as u64 + 1 - j);
                        acc += (ln_poisson_pmf(mu, j)).exp() * tail;
                    }
                    acc
                }
            }
        })
    }

    /// Smallest `n` with `c_n = 0`, when one exists (F1 families only).
    pub fn n_max(&self, threshold: f64) -> Result<Option<u64>> {
        if !(threshold > 0.0) || !threshold.is_finite() {
            return Err(Error::Domain(format!("threshold must be positive, got {threshold}")));
        }
        match *self {
            JumpFamily::Dirac { c } => {
                let mut n = (threshold / c).ceil() as u64;
                while n > 0 && (n as f64 - 1.0) * c >= threshold {
                    n -= 1;
                }
                while (n as f64) * c < threshold {
                    n += 1;
                }
                Ok(Some(n))
            }
            _ => Ok(None),
        }
    }

    /// Name of the family's single free parameter.
    pub fn param_name(&self) -> &'static str {
        match self {
            JumpFamily::Dirac { .. } => "c",
            JumpFamily::Bernoulli { .. } => "p",
            JumpFamily::Exponential { .. } => "rate",
            JumpFamily::Poisson { .. } => "mean",
        }
    }

    pub fn param_value(&self) -> f64 {
        match *self {
            JumpFamily::Dirac { c } => c,
            JumpFamily::Bernoulli { p } => p,
            JumpFamily::Exponential { rate } => rate,
            JumpFamily::Poisson { mean } => mean,
        }
    }

    /// Same family shape with the free parameter replaced.
    pub fn with_param(&self, v: f64) -> Self {
        match self {
            JumpFamily::Dirac { .. } => JumpFamily::Dirac { c: v },
            JumpFamily::Bernoulli { .. } => JumpFamily::Bernoulli { p: v },
            JumpFamily::Exponential { .. } => JumpFamily::Exponential { rate: v },
            JumpFamily::Poisson { .. } => JumpFamily::Poisson { mean: v },
        }
    }

    /// Whether the free parameter lives in (0, 1) rather than (0, inf).
    pub fn param_is_probability(&self) -> bool {
        matches!(self, JumpFamily::Bernoulli { .. })
    }

    /// Parses a family literal: `dirac:<c>`, `bernoulli:<p>`,
    /// `exponential:<rate>`, or `poisson:<mean>`.
    pub fn parse(s: &str) -> Result<Self> {
        let (name, value) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("jump family literal needs name:value, got {s:?}")))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numeric parameter in family literal {s:?}")))?;
        let fam = match name.trim() {
            "dirac" => JumpFamily::Dirac { c: v },
            "bernoulli" => JumpFamily::Bernoulli { p: v },
            "exponential" => JumpFamily::Exponential { rate: v },
            "poisson" => JumpFamily::Poisson { mean: v },
            other => return Err(Error::Parse(format!("unknown jump family {other:?}"))),
        };
        fam.validate()?;
        Ok(fam)
    }
}

impl std::fmt::Display for JumpFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            JumpFamily::Dirac { c } => write!(f, "dirac:{c}"),
            JumpFamily::Bernoulli { p } => write!(f, "bernoulli:{p}"),
            JumpFamily::Exponential { rate } => write!(f, "exponential:{rate}"),
            JumpFamily::Poisson { mean } => write!(f, "poisson:{mean}"),
        }
    }
}

struct Tables {
    coeff: Vec<f64>,
    mass: Vec<f64>,
}

/// Memoized crossing coefficients `c_0, c_1, ...` and first-crossing
/// masses `c_n - c_{n+1}` for one family/threshold pair.
///
/// The table grows on demand; values never change once computed, so
/// extension appears atomic to concurrent readers. Stored values are
/// clamped to keep the analytic invariants exact in floating point:
/// `c_0 = 1`, `0 <= c_{n+1} <= c_n`, and zeros are absorbing.
pub struct CoefficientTable {
    family: JumpFamily,
    threshold: f64,
    inner: RwLock<Tables>,
}

impl std::fmt::Debug for CoefficientTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoefficientTable")
            .field("family", &self.family)
            .field("threshold", &self.threshold)
            .finish()
    }
}

impl CoefficientTable {
    pub fn new(family: JumpFamily, threshold: f64) -> Result<Self> {
        family.validate()?;
        if !(threshold > 0.0) || !threshold.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "threshold must be positive, got {threshold}"
            )));
        }
        Ok(CoefficientTable {
            family,
            threshold,
            inner: RwLock::new(Tables { coeff: vec![1.0], mass: Vec::new() }),
        })
    }

    pub fn family(&self) -> JumpFamily {
        self.family
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    fn grow(&self, tables: &mut Tables, len: usize) {
        while tables.coeff.len() < len {
            let n = tables.coeff.len() as u64;
            let prev = tables.coeff[n as usize - 1];
            let c = if prev == 0.0 {
                0.0
            } else {
                self.family
                    .coefficient(n, self.threshold)
                    .expect("threshold validated at construction")
                    .clamp(0.0, prev)
            };
            tables.coeff.push(c);
        }
        while tables.mass.len() + 1 < len {
            let n = tables.mass.len();
            let m = if tables.coeff[n] == 0.0 {
                0.0
            } else {
                self.family
                    .crossing_mass(n as u64, self.threshold)
                    .expect("threshold validated at construction")
                    .clamp(0.0, tables.coeff[n])
            };
            tables.mass.push(m);
        }
    }

    /// Runs `f` on the coefficient and mass prefixes, first extending both
    /// so that `coeff[0..=len]` and `mass[0..len]` exist.
    pub fn with_tables<R>(&self, len: usize, f: impl FnOnce(&[f64], &[f64]) -> R) -> R {
        {
            let guard = self.inner.read().expect("coefficient table lock");
            if guard.coeff.len() > len && guard.mass.len() >= len {
                return f(&guard.coeff, &guard.mass);
            }
        }
        {
            let mut guard = self.inner.write().expect("coefficient table lock");
            self.grow(&mut guard, len + 1);
        }
        let guard = self.inner.read().expect("coefficient table lock");
        f(&guard.coeff, &guard.mass)
    }

    /// `c_n`, extending the table if needed.
    pub fn coeff(&self, n: usize) -> f64 {
        self.with_tables(n, |c, _| c[n])
    }

    /// `c_n - c_{n+1}`, extending the table if needed.
    pub fn mass(&self, n: usize) -> f64 {
        self.with_tables(n + 1, |_, m| m[n])
    }
}
