//! Likelihood, fitting, and asymptotic inference.
//!
//! The parameter vector is always ordered (clock rate, first-margin jump
//! parameter, second-margin jump parameter) over a compact box. Fitting
//! maximizes the mean log-likelihood with a Nelder-Mead simplex in
//! transformed coordinates (log for positive parameters, logit for
//! probabilities), restarted from several uniform draws in the
//! transformed box; standard errors come from the sandwich
//! `A^{-1} B A^{-1}` built out of per-observation finite differences.

use crate::jump::{FamilyClass, JumpFamily};
use crate::model::{ModelSpec, Observation, Variant};
use crate::series::SeriesControl;
use crate::{Error, Result};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

/// Observations whose density falls below `1e-300` contribute this
/// penalty instead of `-inf`, so the objective stays finite.
pub const LOG_DENSITY_FLOOR: f64 = -690.77552789821368; // ln(1e-300)

/// Free coordinates plus their box; the box keeps the optimizer inside
/// the region where every parameter is valid.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    pub values: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub names: Vec<String>,
}

impl ParamVector {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn inside_box(&self) -> bool {
        self.values
            .iter()
            .zip(&self.lo)
            .zip(&self.hi)
            .all(|((&v, &l), &h)| v > l && v < h)
    }

    /// True when some coordinate sits within `tol * width` of its box edge.
    pub fn near_boundary(&self, tol: f64) -> bool {
        self.values
            .iter()
            .zip(&self.lo)
            .zip(&self.hi)
            .any(|((&v, &l), &h)| v - l <= tol * (h - l) || h - v <= tol * (h - l))
    }
}

/// Model shape with the free parameters factored out: the censoring
/// variant, the two jump families (their parameter values serve as
/// defaults or as fixed values), and the two fixed thresholds.
///
/// The clock rate is always estimated. Each jump parameter is estimated
/// only when its `free` flag is on; a fixed margin keeps the template's
/// value. Dirac constants default to fixed because the likelihood is
/// piecewise constant in them (only the implied jump count matters),
/// which leaves nothing for a local optimizer or a curvature-based
/// standard error to work with.
#[derive(Debug, Clone)]
pub struct FitTemplate {
    pub variant: Variant,
    /// Clock rate the parameter vector starts from; always free.
    pub lambda: f64,
    pub family_x: JumpFamily,
    pub x: f64,
    pub family_z: JumpFamily,
    pub z: f64,
    pub free_x: bool,
    pub free_z: bool,
}

impl FitTemplate {
    pub fn from_spec(spec: &ModelSpec) -> Self {
        let free = |f: &JumpFamily| !matches!(f, JumpFamily::Dirac { .. });
        FitTemplate {
            variant: spec.variant(),
            lambda: spec.lambda(),
            family_x: spec.family_x(),
            x: spec.x(),
            family_z: spec.family_z(),
            z: spec.z(),
            free_x: free(&spec.family_x()),
            free_z: free(&spec.family_z()),
        }
    }

    fn free_families(&self) -> Vec<(&JumpFamily, &'static str)> {
        let mut out = Vec::new();
        if self.free_x {
            out.push((&self.family_x, "x"));
        }
        if self.free_z {
            out.push((&self.family_z, "z"));
        }
        out
    }

    /// Parameter vector at the template's own values, with default boxes.
    pub fn params(&self) -> ParamVector {
        let mut values = vec![self.lambda];
        let mut lo = vec![1e-3];
        let mut hi = vec![1e3];
        let mut names = vec!["lambda".to_string()];
        for (fam, tag) in self.free_families() {
            values.push(fam.param_value());
            if fam.param_is_probability() {
                lo.push(1e-4);
                hi.push(1.0 - 1e-4);
            } else {
                lo.push(1e-3);
                hi.push(1e3);
            }
            names.push(format!("{tag}_{}", fam.param_name()));
        }
        ParamVector { values, lo, hi, names }
    }

    /// Instantiates the model at a parameter vector.
    pub fn build(&self, theta: &[f64]) -> Result<ModelSpec> {
        let want = 1 + usize::from(self.free_x) + usize::from(self.free_z);
        if theta.len() != want {
            return Err(Error::InvalidParameter(format!(
                "expected {want} parameters, got {}",
                theta.len()
            )));
        }
        let mut it = theta.iter().copied();
        let lambda = it.next().expect("length checked");
        let fam_x =
            if self.free_x { self.family_x.with_param(it.next().unwrap()) } else { self.family_x };
        let fam_z =
            if self.free_z { self.family_z.with_param(it.next().unwrap()) } else { self.family_z };
        ModelSpec::new(lambda, fam_x, self.x, fam_z, self.z, self.variant)
    }

    fn transforms(&self) -> Vec<Transform> {
        let mut out = vec![Transform::Log];
        for (fam, _) in self.free_families() {
            out.push(if fam.param_is_probability() { Transform::Logit } else { Transform::Log });
        }
        out
    }
}

#[derive(Clone, Copy)]
enum Transform {
    Log,
    Logit,
}

impl Transform {
    fn forward(self, v: f64) -> f64 {
        match self {
            Transform::Log => v.ln(),
            Transform::Logit => (v / (1.0 - v)).ln(),
        }
    }

    fn back(self, u: f64) -> f64 {
        match self {
            Transform::Log => u.exp(),
            Transform::Logit => 1.0 / (1.0 + (-u).exp()),
        }
    }
}

fn validate_data(variant: Variant, data: &[Observation]) -> Result<()> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    for (i, obs) in data.iter().enumerate() {
        if !(obs.y.is_finite() && obs.y >= 0.0) {
            return Err(Error::Domain(format!("observation {i}: y = {} invalid", obs.y)));
        }
        if !variant.valid_delta(obs.delta) {
            return Err(Error::Domain(format!(
                "observation {i}: delta = {} invalid under Model {variant}",
                obs.delta
            )));
        }
    }
    Ok(())
}

/// Per-observation floored log-densities, in data order.
fn log_density_vector(
    spec: &ModelSpec,
    data: &[Observation],
    ctl: SeriesControl,
) -> Result<Vec<f64>> {
    data.par_chunks(1024)
        .map(|chunk| {
            chunk
                .iter()
                .map(|obs| {
                    let ld = spec.log_outcome_density(obs.y, obs.delta, ctl)?;
                    Ok(if ld.is_nan() { LOG_DENSITY_FLOOR } else { ld.max(LOG_DENSITY_FLOOR) })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<Vec<f64>>>>()
        .map(|chunks| chunks.into_iter().flatten().collect())
}

/// Mean log-likelihood of `data` at `theta`. Observations with density
/// below `1e-300` are floored, which keeps the value finite everywhere
/// in the box.
pub fn log_likelihood(
    template: &FitTemplate,
    theta: &ParamVector,
    data: &[Observation],
    ctl: SeriesControl,
) -> Result<f64> {
    validate_data(template.variant, data)?;
    let spec = template.build(&theta.values)?;
    let lds = log_density_vector(&spec, data, ctl)?;
    // Chunked compensated sum: deterministic for any thread count.
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in lds {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    Ok((sum + comp) / data.len() as f64)
}

/// Optimizer settings.
#[derive(Debug, Clone)]
pub struct FitOptions {
    pub multistarts: usize,
    /// Convergence threshold on the simplex diameter in transformed space.
    pub tolerance: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Box override, in original coordinates, ordered like the parameters.
    pub bounds: Option<Vec<(f64, f64)>>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { multistarts: 8, tolerance: 1e-8, max_iter: 800, seed: 0, bounds: None }
    }
}

/// Everything a fit produces. `covariance` estimates the limit covariance
/// of `sqrt(n) (theta_hat - theta0)`; `std_errors` are per-coordinate,
/// already divided by `sqrt(n)`.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub theta_hat: ParamVector,
    pub loglik: f64,
    pub covariance: DMatrix<f64>,
    pub std_errors: Vec<f64>,
    pub converged: bool,
    pub n_multistarts_used: usize,
    pub gradient_norm: f64,
    pub boundary: bool,
    pub n_obs: usize,
    pub warnings: Vec<String>,
}

struct Simplex {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Simplex {
    fn order(&mut self) {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.points = idx.iter().map(|&i| self.points[i].clone()).collect();
        self.values = idx.iter().map(|&i| self.values[i]).collect();
    }

    fn diameter(&self) -> f64 {
        let best = &self.points[0];
        self.points[1..]
            .iter()
            .map(|p| {
                p.iter()
                    .zip(best)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// Nelder-Mead on a clamped box; returns (argmin, min, iterations, converged).
fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    start: &[f64],
    lo: &[f64],
    hi: &[f64],
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64, bool) {
    let d = start.len();
    let clamp = |p: &mut Vec<f64>| {
        for j in 0..d {
            p[j] = p[j].clamp(lo[j], hi[j]);
        }
    };
    let mut points = vec![start.to_vec()];
    for j in 0..d {
        let mut p = start.to_vec();
        let step = 0.05 * (hi[j] - lo[j]);
        p[j] = if p[j] + step <= hi[j] { p[j] + step } else { p[j] - step };
        points.push(p);
    }
    let values: Vec<f64> = points.iter().map(|p| f(p)).collect();
    let mut s = Simplex { points, values };
    s.order();
    let mut converged = false;
    for _ in 0..max_iter {
        if s.diameter() < tol {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..d)
            .map(|j| s.points[..d].iter().map(|p| p[j]).sum::<f64>() / d as f64)
            .collect();
        let worst = s.values[d];
        let second = s.values[d - 1];
        let best = s.values[0];
        let mut reflected: Vec<f64> =
            (0..d).map(|j| centroid[j] + (centroid[j] - s.points[d][j])).collect();
        clamp(&mut reflected);
        let fr = f(&reflected);
        if fr < best {
            let mut expanded: Vec<f64> =
                (0..d).map(|j| centroid[j] + 2.0 * (centroid[j] - s.points[d][j])).collect();
            clamp(&mut expanded);
            let fe = f(&expanded);
            if fe < fr {
                s.points[d] = expanded;
                s.values[d] = fe;
            } else {
                s.points[d] = reflected;
                s.values[d] = fr;
            }
        } else if fr < second {
            s.points[d] = reflected;
            s.values[d] = fr;
        } else {
            let inside = fr >= worst;
            let mut contracted: Vec<f64> = if inside {
                (0..d).map(|j| centroid[j] - 0.5 * (centroid[j] - s.points[d][j])).collect()
            } else {
                (0..d).map(|j| centroid[j] + 0.5 * (centroid[j] - s.points[d][j])).collect()
            };
            clamp(&mut contracted);
            let fc = f(&contracted);
            if fc < if inside { worst } else { fr } {
                s.points[d] = contracted;
                s.values[d] = fc;
            } else {
                // Shrink toward the best vertex.
                for i in 1..=d {
                    for j in 0..d {
                        s.points[i][j] = s.points[0][j] + 0.5 * (s.points[i][j] - s.points[0][j]);
                    }
                    s.values[i] = f(&s.points[i]);
                }
            }
        }
        s.order();
    }
    (s.points[0].clone(), s.values[0], converged)
}

/// Maximum-likelihood fit; see the module docs for the algorithm.
pub fn fit(
    template: &FitTemplate,
    data: &[Observation],
    options: &FitOptions,
    ctl: SeriesControl,
) -> Result<FitResult> {
    validate_data(template.variant, data)?;
    let mut params = template.params();
    if let Some(bounds) = &options.bounds {
        if bounds.len() != params.dim() {
            return Err(Error::InvalidParameter(format!(
                "expected {} bound pairs, got {}",
                params.dim(),
                bounds.len()
            )));
        }
        for (j, &(l, h)) in bounds.iter().enumerate() {
            if !(l < h) {
                return Err(Error::InvalidParameter(format!("empty box for {}", params.names[j])));
            }
            params.lo[j] = l;
            params.hi[j] = h;
        }
    }
    let mut warnings = Vec::new();
    let n_uncensored = data.iter().filter(|o| o.delta != 0).count();
    if n_uncensored == 0 {
        warnings.push("no uncensored observations; clock rate weakly identified".to_string());
    }
    if n_uncensored == data.len() {
        warnings.push("no censored observations; censored-margin parameter weakly identified".to_string());
    }

    let transforms = template.transforms();
    let d = params.dim();
    let tlo: Vec<f64> =
        transforms.iter().zip(&params.lo).map(|(tr, &v)| tr.forward(v)).collect();
    let thi: Vec<f64> =
        transforms.iter().zip(&params.hi).map(|(tr, &v)| tr.forward(v)).collect();

    let mut n_evals = 0usize;
    let mut floored_seen = false;
    {
        // Probe the floor once so repeated penalties get reported.
        let spec = template.build(&params.values)?;
        let lds = log_density_vector(&spec, data, ctl)?;
        if lds.iter().any(|&v| v <= LOG_DENSITY_FLOOR) {
            floored_seen = true;
        }
    }

    let mut objective = |u: &[f64]| -> f64 {
        n_evals += 1;
        let theta: Vec<f64> = transforms.iter().zip(u).map(|(tr, &v)| tr.back(v)).collect();
        let spec = match template.build(&theta) {
            Ok(s) => s,
            Err(_) => return f64::INFINITY,
        };
        match log_density_vector(&spec, data, ctl) {
            Ok(lds) => {
                let mut sum = 0.0;
                for v in &lds {
                    sum += v;
                }
                -(sum / data.len() as f64)
            }
            Err(_) => f64::INFINITY,
        }
    };

    let mut rng = ChaCha12Rng::seed_from_u64(options.seed);
    let mut best: Option<(f64, Vec<f64>, bool)> = None;
    let mut improved_any = false;
    let starts = options.multistarts.max(1);
    for _ in 0..starts {
        let start: Vec<f64> =
            (0..d).map(|j| rng.random_range(tlo[j]..thi[j])).collect();
        let f_start = objective(&start);
        let (point, value, conv) =
            nelder_mead(&mut objective, &start, &tlo, &thi, options.tolerance, options.max_iter);
        if value < f_start {
            improved_any = true;
        }
        let better = match &best {
            None => true,
            Some((bv, _, _)) => value < *bv,
        };
        if better {
            best = Some((value, point, conv));
        }
    }
    let (neg_loglik, tpoint, nm_converged) = best.expect("at least one start");
    let theta_hat: Vec<f64> =
        transforms.iter().zip(&tpoint).map(|(tr, &v)| tr.back(v)).collect();
    let mut values = theta_hat;
    // Keep coordinates strictly inside the box; the boundary flag below
    // records when this actually bites.
    for j in 0..d {
        let w = params.hi[j] - params.lo[j];
        values[j] = values[j].clamp(params.lo[j] + 1e-12 * w, params.hi[j] - 1e-12 * w);
    }
    params.values = values;

    let boundary = params.near_boundary(1e-6);
    if boundary {
        warnings.push("optimum pinned at the parameter box boundary".to_string());
    }
    if !improved_any {
        warnings.push(format!(
            "no multistart improved on its initialization ({} objective evaluations)",
            n_evals
        ));
    }
    if floored_seen {
        warnings.push("some observations hit the log-density floor".to_string());
    }

    let spec_hat = template.build(&params.values)?;
    if spec_hat.prob_equal(ctl).unwrap_or(1.0) == 0.0 {
        warnings.push("fitted model is degenerate: P[T = C] = 0".to_string());
    }

    // Gradient of the mean log-likelihood at the optimum, original scale.
    let mut grad = vec![0.0; d];
    for j in 0..d {
        let h = f64::EPSILON.sqrt() * params.values[j].abs().max(1.0);
        let mut up = params.clone();
        up.values[j] += h;
        let mut dn = params.clone();
        dn.values[j] -= h;
        let fu = log_likelihood(template, &up, data, ctl)?;
        let fd = log_likelihood(template, &dn, data, ctl)?;
        grad[j] = (fu - fd) / (2.0 * h);
    }
    let gradient_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    let loglik = -neg_loglik;

    let mut converged = nm_converged && improved_any;
    let (covariance, std_errors) = match information_matrices(template, &params, data, ctl)
        .and_then(|im| sandwich_covariance(&im.a, &im.b))
    {
        Ok(cov) => {
            let se: Vec<f64> = (0..d)
                .map(|j| (cov[(j, j)].max(0.0) / data.len() as f64).sqrt())
                .collect();
            (cov, se)
        }
        Err(e) => {
            warnings.push(format!("covariance unavailable: {e}"));
            converged = false;
            (DMatrix::zeros(d, d), vec![0.0; d])
        }
    };

    Ok(FitResult {
        theta_hat: params,
        loglik,
        covariance,
        std_errors,
        converged,
        n_multistarts_used: starts,
        gradient_norm,
        boundary,
        n_obs: data.len(),
        warnings,
    })
}

/// Empirical information matrices at `theta`:
/// `a` is the mean finite-difference Hessian of the per-observation log
/// density, `b` the mean outer product of its gradients. `identity_se`
/// holds the elementwise Monte-Carlo standard error of `a + b`, which is
/// zero in expectation at the true parameter.
#[derive(Debug, Clone)]
pub struct InfoMatrices {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub identity_se: DMatrix<f64>,
    pub condition: f64,
    pub flagged: bool,
}

pub fn information_matrices(
    template: &FitTemplate,
    theta: &ParamVector,
    data: &[Observation],
    ctl: SeriesControl,
) -> Result<InfoMatrices> {
    validate_data(template.variant, data)?;
    let d = theta.dim();
    let n = data.len();
    let hg: Vec<f64> =
        theta.values.iter().map(|v| f64::EPSILON.sqrt() * v.abs().max(1.0)).collect();
    let hh: Vec<f64> =
        theta.values.iter().map(|v| f64::EPSILON.cbrt() * v.abs().max(1.0)).collect();

    // Evaluation points: base, gradient pairs, Hessian diagonal pairs,
    // and the four corners per off-diagonal pair.
    let mut points: Vec<Vec<f64>> = vec![theta.values.clone()];
    let mut shift = |j: usize, s: f64, k: usize, r: f64, h: &[f64]| {
        let mut p = theta.values.clone();
        p[j] += s * h[j];
        if k < d {
            p[k] += r * h[k];
        }
        points.push(p);
    };
    for j in 0..d {
        shift(j, 1.0, d, 0.0, &hg);
        shift(j, -1.0, d, 0.0, &hg);
    }
    for j in 0..d {
        shift(j, 1.0, d, 0.0, &hh);
        shift(j, -1.0, d, 0.0, &hh);
    }
    for j in 0..d {
        for k in (j + 1)..d {
            shift(j, 1.0, k, 1.0, &hh);
            shift(j, 1.0, k, -1.0, &hh);
            shift(j, -1.0, k, 1.0, &hh);
            shift(j, -1.0, k, -1.0, &hh);
        }
    }

    let mut tables: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for p in &points {
        let spec = template.build(p)?;
        tables.push(log_density_vector(&spec, data, ctl)?);
    }

    let base = 0;
    let grad_at = |j: usize| (1 + 2 * j, 2 + 2 * j);
    let diag_at = |j: usize| (1 + 2 * d + 2 * j, 2 + 2 * d + 2 * j);
    let mut off_index = 1 + 4 * d;
    let mut off_at = vec![vec![0usize; d]; d];
    for j in 0..d {
        for k in (j + 1)..d {
            off_at[j][k] = off_index;
            off_index += 4;
        }
    }

    let mut a = DMatrix::<f64>::zeros(d, d);
    let mut b = DMatrix::<f64>::zeros(d, d);
    let mut sum_sq = DMatrix::<f64>::zeros(d, d);
    let mut gi = vec![0.0; d];
    let mut hi_mat = DMatrix::<f64>::zeros(d, d);
    for i in 0..n {
        let l0 = tables[base][i];
        for j in 0..d {
            let (pu, pd) = grad_at(j);
            gi[j] = (tables[pu][i] - tables[pd][i]) / (2.0 * hg[j]);
        }
        for j in 0..d {
            let (pu, pd) = diag_at(j);
            hi_mat[(j, j)] = (tables[pu][i] - 2.0 * l0 + tables[pd][i]) / (hh[j] * hh[j]);
            for k in (j + 1)..d {
                let o = off_at[j][k];
                let v = (tables[o][i] - tables[o + 1][i] - tables[o + 2][i] + tables[o + 3][i])
                    / (4.0 * hh[j] * hh[k]);
                hi_mat[(j, k)] = v;
                hi_mat[(k, j)] = v;
            }
        }
        for j in 0..d {
            for k in 0..d {
                let s = hi_mat[(j, k)] + gi[j] * gi[k];
                a[(j, k)] += hi_mat[(j, k)];
                b[(j, k)] += gi[j] * gi[k];
                sum_sq[(j, k)] += s * s;
            }
        }
    }
    let nf = n as f64;
    a /= nf;
    b /= nf;
    // Symmetrize A explicitly; B is symmetric by construction.
    a = (a.clone() + a.transpose()) * 0.5;
    let mut identity_se = DMatrix::<f64>::zeros(d, d);
    for j in 0..d {
        for k in 0..d {
            let mean: f64 = a[(j, k)] + b[(j, k)];
            let var: f64 = (sum_sq[(j, k)] / nf - mean * mean).max(0.0);
            identity_se[(j, k)] = (var / nf).sqrt();
        }
    }
    let svd = a.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    Ok(InfoMatrices { a, b, identity_se, condition, flagged: !(condition < 1e12) })
}

/// `C = A^{-1} B A^{-1}`, symmetrized.
pub fn sandwich_covariance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let inv = a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("curvature matrix is not invertible".to_string()))?;
    let c = &inv * b * &inv;
    Ok((c.clone() + c.transpose()) * 0.5)
}

/// `P[T <= C]` under the fitted model: its predicted fraction of
/// uncensored outcomes (Model I counting).
pub fn predicted_prob_uncensored(spec: &ModelSpec, ctl: SeriesControl) -> Result<f64> {
    Ok(spec.outcome_masses(ctl)?.uncensored_model_i())
}

/// Which identifiability regime a pair of jump families falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// Some margin crosses within a bounded number of jumps.
    H1,
    /// No bounded margin, but some margin has jumps without an atom at zero.
    H2I,
    /// Both margins have an atom at zero.
    H2II,
    None,
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Hypothesis::H1 => write!(f, "H1"),
            Hypothesis::H2I => write!(f, "H2i"),
            Hypothesis::H2II => write!(f, "H2ii"),
            Hypothesis::None => write!(f, "none"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IdentifiabilityReport {
    pub class_x: FamilyClass,
    pub class_z: FamilyClass,
    pub hypothesis: Hypothesis,
    pub variant_adequate: bool,
    pub notes: String,
}

/// Classifies the model into its identifiability regime and says whether
/// the censoring variant can identify the clock rate there: when both
/// jump distributions have an atom at zero, tie fractions carry the
/// missing information and Model II is required.
pub fn identifiability_report(
    family_x: &JumpFamily,
    x: f64,
    family_z: &JumpFamily,
    z: f64,
    variant: Variant,
) -> Result<IdentifiabilityReport> {
    let class_x = family_x.classify();
    let class_z = family_z.classify();
    let hypothesis = if class_x == FamilyClass::F1 || class_z == FamilyClass::F1 {
        Hypothesis::H1
    } else if class_x == FamilyClass::F2 || class_z == FamilyClass::F2 {
        Hypothesis::H2I
    } else {
        Hypothesis::H2II
    };
    let variant_adequate = !(hypothesis == Hypothesis::H2II && variant == Variant::ModelI);
    let mut notes = String::new();
    if hypothesis == Hypothesis::H1 {
        for (fam, thr, tag) in [(family_x, x, "first"), (family_z, z, "second")] {
            if let Some(n) = fam.n_max(thr)? {
                notes.push_str(&format!(
                    "{tag} margin crosses within {n} jumps, so coefficient series terminate; "
                ));
            }
        }
        notes.push_str("clock rate identified under either variant.");
    } else if hypothesis == Hypothesis::H2I {
        notes.push_str(
            "jump sums are almost surely strictly increasing on some margin; clock rate identified under either variant.",
        );
    } else if variant_adequate {
        notes.push_str("both margins can freeze; ties observed, clock rate identified.");
    } else {
        notes.push_str(
            "both margins can freeze and ties are folded into delta = 1; the clock rate is not identified, use the tie-revealing variant.",
        );
    }
    Ok(IdentifiabilityReport { class_x, class_z, hypothesis, variant_adequate, notes })
}

/// Two-sided Wald interval for one coordinate of a converged fit.
pub fn wald_interval(fit: &FitResult, coordinate: usize, level: f64) -> Result<(f64, f64)> {
    if !fit.converged {
        return Err(Error::NonConvergence(
            "confidence intervals require a converged fit".to_string(),
        ));
    }
    if coordinate >= fit.theta_hat.dim() {
        return Err(Error::Domain(format!("no coordinate {coordinate}")));
    }
    if !(0.0 < level && level < 1.0) {
        return Err(Error::Domain(format!("level must be in (0, 1), got {level}")));
    }
    let z = Normal::new(0.0, 1.0).unwrap().inverse_cdf(0.5 * (1.0 + level));
    let center = fit.theta_hat.values[coordinate];
    let se = fit.std_errors[coordinate];
    Ok((center - z * se, center + z * se))
}
