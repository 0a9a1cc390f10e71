//! Command-line front end: `simulate`, `fit`, `study`, `density`, and
//! `report`, over a flat `key = value` configuration format and the
//! `y,delta` CSV observation schema.
//!
//! Exit codes are a stable contract: 0 success, 1 validation or parse or
//! I/O failure, 2 fit non-convergence, 3 study failure. Every output is
//! written atomically (temp file then rename) and every run also emits
//! the fully resolved configuration it executed, so runs are exactly
//! reproducible from their artifacts.

use crate::inference::{
    fit, identifiability_report, predicted_prob_uncensored, wald_interval, FitOptions,
    FitTemplate,
};
use crate::jump::JumpFamily;
use crate::model::{Margin, ModelSpec, Observation, Variant};
use crate::series::SeriesControl;
use crate::simulate::simulate_dataset;
use crate::study::{curve_export, default_t_grid, run_study, StudyConfig};
use crate::{Error, Result};
use clap::{Parser, Subcommand};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Fully resolved run configuration; one file drives every subcommand.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub variant: Variant,
    pub lambda: f64,
    pub jump_x: JumpFamily,
    pub x: f64,
    pub jump_z: JumpFamily,
    pub z: f64,
    pub control: SeriesControl,
    pub fit: FitOptions,
    pub sample_sizes: Vec<usize>,
    pub replicates: usize,
    pub study_seed: u64,
    pub grid_points: usize,
    pub grid_max: Option<f64>,
}

impl RunConfig {
    /// Parses the flat `key = value` format. Lines starting with `#` (or
    /// anything after a `#`) are comments; unknown keys are errors, so a
    /// typo cannot silently fall back to a default.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut variant = None;
        let mut lambda = None;
        let mut jump_x = None;
        let mut x = None;
        let mut jump_z = None;
        let mut z = None;
        let mut epsilon = 1e-10;
        let mut hard_cap = 10_000usize;
        let mut fit = FitOptions::default();
        let mut sample_sizes = vec![50, 100, 200];
        let mut replicates = 100usize;
        let mut study_seed = 0u64;
        let mut grid_points = 201usize;
        let mut grid_max = None;

        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("config line {lineno}: expected key = value, got {raw:?}"))
            })?;
            let key = key.trim();
            let value = value.trim();
            let ctx = |what: &str| format!("config line {lineno}: {what} {value:?}");
            match key {
                "variant" => variant = Some(Variant::parse(value)?),
                "model.lambda" => {
                    lambda = Some(parse_num::<f64>(value).map_err(|_| Error::Parse(ctx("bad number")))?)
                }
                "model.x" => {
                    x = Some(parse_num::<f64>(value).map_err(|_| Error::Parse(ctx("bad number")))?)
                }
                "model.z" => {
                    z = Some(parse_num::<f64>(value).map_err(|_| Error::Parse(ctx("bad number")))?)
                }
                "jump_x" => jump_x = Some(JumpFamily::parse(value)?),
                "jump_z" => jump_z = Some(JumpFamily::parse(value)?),
                "series.epsilon" => {
                    epsilon = parse_num(value).map_err(|_| Error::Parse(ctx("bad number")))?
                }
                "series.hard_cap" => {
                    hard_cap = parse_num(value).map_err(|_| Error::Parse(ctx("bad integer")))?
                }
                "fit.multistarts" => {
                    fit.multistarts = parse_num(value).map_err(|_| Error::Parse(ctx("bad integer")))?
                }
                "fit.tolerance" => {
                    fit.tolerance = parse_num(value).map_err(|_| Error::Parse(ctx("bad number")))?
                }
                "fit.max_iter" => {
                    fit.max_iter = parse_num(value).map_err(|_| Error::Parse(ctx("bad integer")))?
                }
                "fit.seed" => {
                    fit.seed = parse_num(value).map_err(|_| Error::Parse(ctx("bad integer")))?
                }
                "study.sample_sizes" => {
                    sample_sizes = value
                        .split(',')
                        .map(|s| parse_num::<usize>(s.trim()))
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| Error::Parse(ctx("bad size list")))?;
                }
                "study.replicates" => {
                    replicates = parse_num(value).map_err(|_| Error::Parse(ctx("bad integer")))?
                }
                "study.seed" => {
                    study_seed = parse_num(value).map_err(|_| Error::Parse(ctx("bad integer")))?
                }
                "study.grid_points" => {
                    grid_points = parse_num(value).map_err(|_| Error::Parse(ctx("bad integer")))?
                }
                "study.grid_max" => {
                    grid_max = Some(parse_num(value).map_err(|_| Error::Parse(ctx("bad number")))?)
                }
                other => {
                    return Err(Error::Parse(format!("config line {lineno}: unknown key {other:?}")))
                }
            }
        }

        let mut missing = Vec::new();
        for (name, absent) in [
            ("variant", variant.is_none()),
            ("model.lambda", lambda.is_none()),
            ("model.x", x.is_none()),
            ("model.z", z.is_none()),
            ("jump_x", jump_x.is_none()),
            ("jump_z", jump_z.is_none()),
        ] {
            if absent {
                missing.push(name);
            }
        }
        if !missing.is_empty() {
            return Err(Error::Parse(format!("config missing required keys: {}", missing.join(", "))));
        }
        let cfg = RunConfig {
            variant: variant.unwrap(),
            lambda: lambda.unwrap(),
            jump_x: jump_x.unwrap(),
            x: x.unwrap(),
            jump_z: jump_z.unwrap(),
            z: z.unwrap(),
            control: SeriesControl::new(epsilon, hard_cap)?,
            fit,
            sample_sizes,
            replicates,
            study_seed,
            grid_points,
            grid_max,
        };
        cfg.spec()?; // validate the model parameters eagerly
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_str(&text)
    }

    pub fn spec(&self) -> Result<ModelSpec> {
        ModelSpec::new(self.lambda, self.jump_x, self.x, self.jump_z, self.z, self.variant)
    }

    /// The configuration, fully resolved, in its own input format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "variant = {}", self.variant);
        let _ = writeln!(s, "model.lambda = {}", self.lambda);
        let _ = writeln!(s, "model.x = {}", self.x);
        let _ = writeln!(s, "model.z = {}", self.z);
        let _ = writeln!(s, "jump_x = {}", self.jump_x);
        let _ = writeln!(s, "jump_z = {}", self.jump_z);
        let _ = writeln!(s, "series.epsilon = {}", self.control.epsilon);
        let _ = writeln!(s, "series.hard_cap = {}", self.control.hard_cap);
        let _ = writeln!(s, "fit.multistarts = {}", self.fit.multistarts);
        let _ = writeln!(s, "fit.tolerance = {}", self.fit.tolerance);
        let _ = writeln!(s, "fit.max_iter = {}", self.fit.max_iter);
        let _ = writeln!(s, "fit.seed = {}", self.fit.seed);
        let _ = writeln!(
            s,
            "study.sample_sizes = {}",
            self.sample_sizes.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
        );
        let _ = writeln!(s, "study.replicates = {}", self.replicates);
        let _ = writeln!(s, "study.seed = {}", self.study_seed);
        let _ = writeln!(s, "study.grid_points = {}", self.grid_points);
        if let Some(m) = self.grid_max {
            let _ = writeln!(s, "study.grid_max = {m}");
        }
        s
    }
}

fn parse_num<T: std::str::FromStr>(s: &str) -> std::result::Result<T, T::Err> {
    s.trim().parse::<T>()
}

/// Reads the observation CSV: header `y,delta`, one observation per line,
/// `#` comments ignored. Errors carry the offending line number.
pub fn read_observations(path: &Path, variant: Variant) -> Result<Vec<Observation>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read data {}: {e}", path.display())))?;
    let mut out = Vec::new();
    let mut header_seen = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        if !header_seen {
            if line != "y,delta" {
                return Err(Error::Parse(format!(
                    "{}:{lineno}: expected header \"y,delta\", got {line:?}",
                    path.display()
                )));
            }
            header_seen = true;
            continue;
        }
        let (ys, ds) = line.split_once(',').ok_or_else(|| {
            Error::Parse(format!("{}:{lineno}: expected y,delta", path.display()))
        })?;
        let y: f64 = parse_num(ys)
            .map_err(|_| Error::Parse(format!("{}:{lineno}: bad y {ys:?}", path.display())))?;
        let delta: u8 = parse_num(ds)
            .map_err(|_| Error::Parse(format!("{}:{lineno}: bad delta {ds:?}", path.display())))?;
        if !(y.is_finite() && y >= 0.0) {
            return Err(Error::Parse(format!(
                "{}:{lineno}: y must be a nonnegative number, got {ys}",
                path.display()
            )));
        }
        if !variant.valid_delta(delta) {
            return Err(Error::Parse(format!(
                "{}:{lineno}: delta = {delta} invalid under Model {variant}",
                path.display()
            )));
        }
        out.push(Observation { y, delta });
    }
    if !header_seen {
        return Err(Error::Parse(format!("{}: empty data file", path.display())));
    }
    Ok(out)
}

/// Writes atomically: the bytes land under a temporary name in the target
/// directory and are renamed over the destination only when complete.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    std::io::Write::write_all(&mut tmp.as_file(), bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{}{suffix}", path.display()))
}

#[derive(Parser)]
#[command(
    name = "hitcrest",
    version,
    about = "Bivariate first-hitting-time survival model with a shared jump clock"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a dataset from the configured model and write it as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Number of observations.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Maximum-likelihood fit of a dataset; writes a key = value report
    /// and the covariance matrix.
    Fit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides fit.seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Replication study: simulate and fit across sample sizes, write
    /// estimator tables and deviation curves into a directory.
    Study {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides study.seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Evaluate a model function on a grid and write the curve.
    Density {
        #[arg(long)]
        config: PathBuf,
        /// One of: outcome, hazard, survival, marginal, joint, diagonal.
        #[arg(long)]
        what: String,
        /// Grid as start:end:count, e.g. 0:20:201.
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Summarize the configured model: identifiability, outcome masses,
    /// moments. No data required.
    Report {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
}

fn setup_threads(cli_threads: Option<usize>) -> Result<()> {
    let n = match cli_threads {
        Some(n) => Some(n),
        None => match std::env::var("HITCREST_THREADS") {
            Ok(v) => Some(v.parse::<usize>().map_err(|_| {
                Error::Parse(format!("HITCREST_THREADS must be a positive integer, got {v:?}"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(Error::InvalidParameter("thread count must be positive".to_string()));
        }
        // Ignore the error if a global pool already exists (tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("grid must be start:end:count, got {s:?}")));
    }
    let a: f64 = parse_num(parts[0]).map_err(|_| Error::Parse(format!("bad grid start {s:?}")))?;
    let b: f64 = parse_num(parts[1]).map_err(|_| Error::Parse(format!("bad grid end {s:?}")))?;
    let n: usize = parse_num(parts[2]).map_err(|_| Error::Parse(format!("bad grid count {s:?}")))?;
    if !(a.is_finite() && b.is_finite() && b > a) || n < 2 {
        return Err(Error::Parse(format!("grid needs end > start and count >= 2, got {s:?}")));
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

fn cmd_simulate(cfg: &RunConfig, n: usize, seed: u64, out: &Path) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("simulate needs n >= 1".to_string()));
    }
    let spec = cfg.spec()?;
    let data = simulate_dataset(&spec, n, seed)?;
    let mut text = String::from("y,delta\n");
    for obs in &data {
        let _ = writeln!(text, "{},{}", obs.y, obs.delta);
    }
    write_atomic(out, text.as_bytes())?;
    write_atomic(&sibling(out, ".resolved.conf"), cfg.to_text().as_bytes())?;
    println!("wrote {} observations to {}", data.len(), out.display());
    Ok(())
}

/// Exit code 2 when the fit did not converge.
fn cmd_fit(cfg: &RunConfig, data_path: &Path, out: &Path, seed: Option<u64>) -> Result<bool> {
    let data = read_observations(data_path, cfg.variant)?;
    let template = FitTemplate::from_spec(&cfg.spec()?);
    let mut options = cfg.fit.clone();
    if let Some(s) = seed {
        options.seed = s;
    }
    let res = fit(&template, &data, &options, cfg.control)?;

    let mut text = String::new();
    let _ = writeln!(text, "converged = {}", res.converged);
    let _ = writeln!(text, "n_obs = {}", res.n_obs);
    let _ = writeln!(text, "loglik = {}", res.loglik);
    let _ = writeln!(text, "gradient_norm = {}", res.gradient_norm);
    let _ = writeln!(text, "boundary = {}", res.boundary);
    let _ = writeln!(text, "multistarts = {}", res.n_multistarts_used);
    for j in 0..res.theta_hat.dim() {
        let name = &res.theta_hat.names[j];
        let _ = writeln!(text, "{name} = {}", res.theta_hat.values[j]);
        let _ = writeln!(text, "{name}.se = {}", res.std_errors[j]);
        if res.converged {
            let (lo, hi) = wald_interval(&res, j, 0.95)?;
            let _ = writeln!(text, "{name}.wald95.lo = {lo}");
            let _ = writeln!(text, "{name}.wald95.hi = {hi}");
        }
    }
    let ident = identifiability_report(&cfg.jump_x, cfg.x, &cfg.jump_z, cfg.z, cfg.variant)?;
    let _ = writeln!(text, "class_x = {:?}", ident.class_x);
    let _ = writeln!(text, "class_z = {:?}", ident.class_z);
    let _ = writeln!(text, "hypothesis = {}", ident.hypothesis);
    let _ = writeln!(text, "variant_adequate = {}", ident.variant_adequate);
    if res.converged {
        let hat = template.build(&res.theta_hat.values)?;
        let _ = writeln!(
            text,
            "prob_uncensored_hat = {}",
            predicted_prob_uncensored(&hat, cfg.control)?
        );
    }
    for (i, w) in res.warnings.iter().enumerate() {
        let _ = writeln!(text, "warning.{i} = {w}");
    }
    write_atomic(out, text.as_bytes())?;

    let mut cov = res.theta_hat.names.join(",");
    cov.push('\n');
    for j in 0..res.theta_hat.dim() {
        let row: Vec<String> =
            (0..res.theta_hat.dim()).map(|k| format!("{}", res.covariance[(j, k)])).collect();
        cov.push_str(&row.join(","));
        cov.push('\n');
    }
    write_atomic(&sibling(out, ".cov.csv"), cov.as_bytes())?;
    write_atomic(&sibling(out, ".resolved.conf"), cfg.to_text().as_bytes())?;
    println!(
        "fit {}: {}",
        if res.converged { "converged" } else { "did not converge" },
        out.display()
    );
    Ok(res.converged)
}

fn cmd_study(cfg: &RunConfig, out_dir: &Path, seed: Option<u64>) -> Result<()> {
    let spec = cfg.spec()?;
    let t_grid = match cfg.grid_max {
        Some(m) => {
            let n = cfg.grid_points.max(2);
            (0..n).map(|i| m * i as f64 / (n - 1) as f64).collect()
        }
        None => default_t_grid(&spec, cfg.grid_points, cfg.control)?,
    };
    let config = StudyConfig {
        spec,
        sample_sizes: cfg.sample_sizes.clone(),
        n_replicates: cfg.replicates,
        t_grid,
        seed: seed.unwrap_or(cfg.study_seed),
        fit: cfg.fit.clone(),
        control: cfg.control,
    };
    let result = run_study(&config)?;

    std::fs::create_dir_all(out_dir)?;
    let mut est = String::from("sample_size,replicate,converged,loglik");
    for name in &result.param_names {
        est.push(',');
        est.push_str(name);
    }
    est.push('\n');
    for r in &result.estimates {
        let _ = write!(est, "{},{},{},{}", r.sample_size, r.replicate, r.converged, r.loglik);
        for v in &r.theta {
            let _ = write!(est, ",{v}");
        }
        est.push('\n');
    }
    write_atomic(&out_dir.join("estimates.csv"), est.as_bytes())?;

    for summary in &result.summaries {
        let mut csv = String::from("t,bias_t,nx_t,bias_c,nx_c\n");
        for p in &summary.curve {
            let _ = writeln!(csv, "{},{},{},{},{}", p.t, p.bias_t, p.nx_t, p.bias_c, p.nx_c);
        }
        let _ = writeln!(csv, "# converged = {}, dropped = {}", summary.n_converged, summary.n_dropped);
        write_atomic(&out_dir.join(format!("curves_{}.csv", summary.sample_size)), csv.as_bytes())?;
    }
    let mut resolved = cfg.to_text();
    if let Some(s) = seed {
        let _ = writeln!(resolved, "# study.seed overridden on the command line");
        resolved = resolved.replace(
            &format!("study.seed = {}", cfg.study_seed),
            &format!("study.seed = {s}"),
        );
    }
    write_atomic(&out_dir.join("resolved.conf"), resolved.as_bytes())?;
    println!(
        "study complete: {} sizes x {} replicates -> {}",
        cfg.sample_sizes.len(),
        cfg.replicates,
        out_dir.display()
    );
    Ok(())
}

fn cmd_density(cfg: &RunConfig, what: &str, grid: &str, out: &Path) -> Result<()> {
    let spec = cfg.spec()?;
    let ctl = cfg.control;
    let ts = parse_grid(grid)?;
    let text = match what {
        "outcome" => {
            let deltas: &[u8] = match cfg.variant {
                Variant::ModelI => &[0, 1],
                Variant::ModelII => &[0, 1, 2],
            };
            let mut curves = Vec::new();
            for &d in deltas {
                let vals = ts
                    .iter()
                    .map(|&t| spec.outcome_density(t, d, ctl))
                    .collect::<Result<Vec<f64>>>()?;
                curves.push((format!("f_delta{d}"), vals));
            }
            let mut buf = Vec::new();
            curve_export(&mut buf, &ts, &curves)?;
            String::from_utf8(buf).expect("ascii")
        }
        "hazard" => {
            let vals = ts.iter().map(|&t| spec.hazard(t, ctl)).collect::<Result<Vec<f64>>>()?;
            let mut buf = Vec::new();
            curve_export(&mut buf, &ts, &[("hazard".to_string(), vals)])?;
            String::from_utf8(buf).expect("ascii")
        }
        "survival" => {
            let vals = ts.iter().map(|&t| spec.survival_y(t, ctl)).collect::<Result<Vec<f64>>>()?;
            let mut buf = Vec::new();
            curve_export(&mut buf, &ts, &[("survival".to_string(), vals)])?;
            String::from_utf8(buf).expect("ascii")
        }
        "marginal" => {
            let ft = ts
                .iter()
                .map(|&t| spec.marginal_cdf(Margin::T, t, ctl))
                .collect::<Result<Vec<f64>>>()?;
            let fc = ts
                .iter()
                .map(|&t| spec.marginal_cdf(Margin::C, t, ctl))
                .collect::<Result<Vec<f64>>>()?;
            let mut buf = Vec::new();
            curve_export(&mut buf, &ts, &[("cdf_t".to_string(), ft), ("cdf_c".to_string(), fc)])?;
            String::from_utf8(buf).expect("ascii")
        }
        "diagonal" => {
            let vals =
                ts.iter().map(|&t| spec.diagonal_density(t, ctl)).collect::<Result<Vec<f64>>>()?;
            let mut buf = Vec::new();
            curve_export(&mut buf, &ts, &[("diagonal_density".to_string(), vals)])?;
            String::from_utf8(buf).expect("ascii")
        }
        "joint" => {
            let mut s = String::from("# diagonal points u = v excluded: that mass is singular, see the diagonal curve\nu,v,density\n");
            for &u in &ts {
                for &v in &ts {
                    if u == v {
                        continue;
                    }
                    let _ = writeln!(s, "{u},{v},{}", spec.joint_density_ac(u, v, ctl)?);
                }
            }
            s
        }
        other => {
            return Err(Error::Parse(format!(
                "unknown function {other:?}; expected outcome, hazard, survival, marginal, joint, or diagonal"
            )))
        }
    };
    write_atomic(out, text.as_bytes())?;
    write_atomic(&sibling(out, ".resolved.conf"), cfg.to_text().as_bytes())?;
    println!("wrote {what} curve to {}", out.display());
    Ok(())
}

fn cmd_report(cfg: &RunConfig, out: &Path) -> Result<()> {
    let spec = cfg.spec()?;
    let ctl = cfg.control;
    let ident = identifiability_report(&cfg.jump_x, cfg.x, &cfg.jump_z, cfg.z, cfg.variant)?;
    let masses = spec.outcome_masses(ctl)?;
    let mut text = cfg.to_text();
    let _ = writeln!(text, "class_x = {:?}", ident.class_x);
    let _ = writeln!(text, "class_z = {:?}", ident.class_z);
    let _ = writeln!(text, "hypothesis = {}", ident.hypothesis);
    let _ = writeln!(text, "variant_adequate = {}", ident.variant_adequate);
    let _ = writeln!(text, "notes = {}", ident.notes);
    let _ = writeln!(text, "prob_t_before_c = {}", masses.t_before_c);
    let _ = writeln!(text, "prob_tie = {}", masses.tie);
    let _ = writeln!(text, "prob_c_before_t = {}", masses.c_before_t);
    let _ = writeln!(text, "prob_uncensored_model_i = {}", masses.uncensored_model_i());
    let _ = writeln!(text, "degenerate = {}", masses.tie == 0.0);
    let _ = writeln!(text, "mean_y = {}", spec.mean_y(ctl)?);
    let _ = writeln!(text, "median_y = {}", spec.quantile_y(0.5, ctl)?);
    let _ = writeln!(text, "q995_y = {}", spec.quantile_y(0.995, ctl)?);
    write_atomic(out, text.as_bytes())?;
    println!("wrote model report to {}", out.display());
    Ok(())
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NonConvergence(_) => 2,
        Error::StudyFailure(_) => 3,
        _ => 1,
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let outcome = (|| -> Result<i32> {
        match &cli.command {
            Command::Simulate { config, out, n, seed, threads, epsilon } => {
                setup_threads(*threads)?;
                let mut cfg = RunConfig::from_file(config)?;
                if let Some(e) = epsilon {
                    cfg.control = SeriesControl::new(*e, cfg.control.hard_cap)?;
                }
                cmd_simulate(&cfg, *n, *seed, out)?;
                Ok(0)
            }
            Command::Fit { config, data, out, seed, threads, epsilon } => {
                setup_threads(*threads)?;
                let mut cfg = RunConfig::from_file(config)?;
                if let Some(e) = epsilon {
                    cfg.control = SeriesControl::new(*e, cfg.control.hard_cap)?;
                }
                let converged = cmd_fit(&cfg, data, out, *seed)?;
                Ok(if converged { 0 } else { 2 })
            }
            Command::Study { config, out, seed, threads, epsilon } => {
                setup_threads(*threads)?;
                let mut cfg = RunConfig::from_file(config)?;
                if let Some(e) = epsilon {
                    cfg.control = SeriesControl::new(*e, cfg.control.hard_cap)?;
                }
                cmd_study(&cfg, out, *seed)?;
                Ok(0)
            }
            Command::Density { config, what, grid, out, threads, epsilon } => {
                setup_threads(*threads)?;
                let mut cfg = RunConfig::from_file(config)?;
                if let Some(e) = epsilon {
                    cfg.control = SeriesControl::new(*e, cfg.control.hard_cap)?;
                }
                cmd_density(&cfg, what, grid, out)?;
                Ok(0)
            }
            Command::Report { config, out, threads, epsilon } => {
                setup_threads(*threads)?;
                let mut cfg = RunConfig::from_file(config)?;
                if let Some(e) = epsilon {
                    cfg.control = SeriesControl::new(*e, cfg.control.hard_cap)?;
                }
                cmd_report(&cfg, out)?;
                Ok(0)
            }
        }
    })();
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
