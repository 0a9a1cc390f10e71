//! Monte-Carlo replication engine: simulate, fit, and aggregate deviation
//! curves of the fitted marginal CDFs against the generating model.

use crate::inference::{fit, FitOptions, FitTemplate};
use crate::model::{Margin, ModelSpec};
use crate::series::SeriesControl;
use crate::simulate::simulate_dataset;
use crate::{Error, Result};
use rayon::prelude::*;
use std::io::Write;

/// Full study design: the generating model, the grid the fitted CDFs are
/// compared on, and one seed that determines every replicate.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub spec: ModelSpec,
    pub sample_sizes: Vec<usize>,
    pub n_replicates: usize,
    pub t_grid: Vec<f64>,
    pub seed: u64,
    pub fit: FitOptions,
    pub control: SeriesControl,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_sizes.is_empty() || self.sample_sizes.iter().any(|&n| n == 0) {
            return Err(Error::InvalidParameter("sample sizes must be positive".to_string()));
        }
        if self.n_replicates < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 replicates, got {}",
                self.n_replicates
            )));
        }
        if self.t_grid.is_empty() || self.t_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter(
                "t grid must be nonempty and strictly increasing".to_string(),
            ));
        }
        Ok(())
    }
}

/// One fitted replicate.
#[derive(Debug, Clone)]
pub struct ReplicateRecord {
    pub sample_size: usize,
    pub replicate: usize,
    pub theta: Vec<f64>,
    pub loglik: f64,
    pub converged: bool,
}

/// Deviation summary at one grid point, over converged replicates:
/// `bias` is the mean absolute deviation of the fitted CDF from the true
/// one, `nx` the mean squared deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub t: f64,
    pub bias_t: f64,
    pub nx_t: f64,
    pub bias_c: f64,
    pub nx_c: f64,
}

#[derive(Debug, Clone)]
pub struct SizeSummary {
    pub sample_size: usize,
    pub curve: Vec<CurvePoint>,
    pub n_converged: usize,
    pub n_dropped: usize,
}

#[derive(Debug, Clone)]
pub struct StudyResult {
    pub param_names: Vec<String>,
    pub estimates: Vec<ReplicateRecord>,
    pub summaries: Vec<SizeSummary>,
}

/// splitmix64; maps the study seed and replicate coordinates to
/// independent simulation and fit seeds.
fn mix(mut state: u64) -> u64 {
    state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn replicate_seed(seed: u64, size: usize, rep: usize, purpose: u64) -> u64 {
    mix(mix(mix(seed ^ 0x5851f42d4c957f2d) ^ size as u64) ^ (rep as u64) << 1 ^ purpose)
}

struct ReplicateOutcome {
    record: ReplicateRecord,
    curves: Option<(Vec<f64>, Vec<f64>)>,
}

fn aggregate(
    t_grid: &[f64],
    truth: &(Vec<f64>, Vec<f64>),
    fitted: &[(Vec<f64>, Vec<f64>)],
) -> Vec<CurvePoint> {
    let n = fitted.len().max(1) as f64;
    t_grid
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let mut bias_t = 0.0;
            let mut nx_t = 0.0;
            let mut bias_c = 0.0;
            let mut nx_c = 0.0;
            for (ft, fc) in fitted {
                let dt = ft[j] - truth.0[j];
                let dc = fc[j] - truth.1[j];
                bias_t += dt.abs();
                nx_t += dt * dt;
                bias_c += dc.abs();
                nx_c += dc * dc;
            }
            CurvePoint {
                t,
                bias_t: bias_t / n,
                nx_t: nx_t / n,
                bias_c: bias_c / n,
                nx_c: nx_c / n,
            }
        })
        .collect()
}

/// Runs the full design: for every sample size, `n_replicates` rounds of
/// simulate-with-substream-seed then fit, then deviation curves over the
/// converged fits. Deterministic for a fixed config regardless of thread
/// count. Fails if more than 20% of replicates at any size fail to
/// converge.
pub fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    config.validate()?;
    let template = FitTemplate::from_spec(&config.spec);
    let param_names = template.params().names;
    let ctl = config.control;
    let truth: (Vec<f64>, Vec<f64>) = (
        config
            .t_grid
            .iter()
            .map(|&t| config.spec.marginal_cdf(Margin::T, t, ctl))
            .collect::<Result<_>>()?,
        config
            .t_grid
            .iter()
            .map(|&t| config.spec.marginal_cdf(Margin::C, t, ctl))
            .collect::<Result<_>>()?,
    );

    let mut estimates = Vec::new();
    let mut summaries = Vec::new();
    for &size in &config.sample_sizes {
        let outcomes: Vec<ReplicateOutcome> = (0..config.n_replicates)
            .into_par_iter()
            .map(|rep| -> Result<ReplicateOutcome> {
                let data_seed = replicate_seed(config.seed, size, rep, 0);
                let fit_seed = replicate_seed(config.seed, size, rep, 1);
                let data = simulate_dataset(&config.spec, size, data_seed)?;
                let options = FitOptions { seed: fit_seed, ..config.fit.clone() };
                let res = fit(&template, &data, &options, ctl)?;
                let curves = if res.converged {
                    let hat = template.build(&res.theta_hat.values)?;
                    let ft = config
                        .t_grid
                        .iter()
                        .map(|&t| hat.marginal_cdf(Margin::T, t, ctl))
                        .collect::<Result<Vec<f64>>>()?;
                    let fc = config
                        .t_grid
                        .iter()
                        .map(|&t| hat.marginal_cdf(Margin::C, t, ctl))
                        .collect::<Result<Vec<f64>>>()?;
                    Some((ft, fc))
                } else {
                    None
                };
                Ok(ReplicateOutcome {
                    record: ReplicateRecord {
                        sample_size: size,
                        replicate: rep,
                        theta: res.theta_hat.values.clone(),
                        loglik: res.loglik,
                        converged: res.converged,
                    },
                    curves,
                })
            })
            .collect::<Result<_>>()?;

        let fitted: Vec<(Vec<f64>, Vec<f64>)> =
            outcomes.iter().filter_map(|o| o.curves.clone()).collect();
        let n_converged = fitted.len();
        let n_dropped = config.n_replicates - n_converged;
        if (n_dropped as f64) > 0.2 * config.n_replicates as f64 {
            return Err(Error::StudyFailure(format!(
                "{n_dropped} of {} replicates failed to converge at sample size {size}",
                config.n_replicates
            )));
        }
        let curve = aggregate(&config.t_grid, &truth, &fitted);
        estimates.extend(outcomes.into_iter().map(|o| o.record));
        summaries.push(SizeSummary { sample_size: size, curve, n_converged, n_dropped });
    }
    Ok(StudyResult { param_names, estimates, summaries })
}

/// Evenly spaced grid from 0 to the model's 99.5% quantile of Y, the
/// default comparison window for study curves.
pub fn default_t_grid(spec: &ModelSpec, points: usize, ctl: SeriesControl) -> Result<Vec<f64>> {
    let hi = spec.quantile_y(0.995, ctl)?;
    let n = points.max(2);
    Ok((0..n).map(|i| hi * i as f64 / (n - 1) as f64).collect())
}

/// Right-continuous empirical CDF.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyData);
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Domain("empirical CDF input contains NaN".to_string()));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `#{v_i <= t} / n`.
    pub fn eval(&self, t: f64) -> f64 {
        let k = self.sorted.partition_point(|&v| v <= t);
        k as f64 / self.sorted.len() as f64
    }

    /// Supremum distance to a reference CDF, scanned at the jump points
    /// where the supremum of a step-vs-continuous comparison lives.
    pub fn ks_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let n = self.sorted.len() as f64;
        let mut sup = 0.0f64;
        for (i, &v) in self.sorted.iter().enumerate() {
            let f = cdf(v);
            let above = ((i + 1) as f64 / n - f).abs();
            let below = (f - i as f64 / n).abs();
            sup = sup.max(above).max(below);
        }
        sup
    }
}

/// Writes aligned curves as CSV: first column the grid, one column per
/// named curve. Values print in shortest round-trip form, so re-reading
/// reproduces them exactly.
pub fn curve_export<W: Write>(
    mut out: W,
    t_grid: &[f64],
    curves: &[(String, Vec<f64>)],
) -> Result<()> {
    for (name, values) in curves {
        if values.len() != t_grid.len() {
            return Err(Error::InvalidParameter(format!(
                "curve {name:?} has {} values for {} grid points",
                values.len(),
                t_grid.len()
            )));
        }
    }
    let mut header = String::from("t");
    for (name, _) in curves {
        header.push(',');
        header.push_str(name);
    }
    writeln!(out, "{header}")?;
    for (j, &t) in t_grid.iter().enumerate() {
        let mut line = format!("{t}");
        for (_, values) in curves {
            line.push(',');
            line.push_str(&format!("{}", values[j]));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
