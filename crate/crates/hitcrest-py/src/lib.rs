//! Python bindings: a `Model` class wrapping the full specification, a
//! module-level `fit`, and plain-dict reports. Sequences come back as
//! lists; errors surface as ValueError.

use hitcrest::{
    fit, identifiability_report, log_likelihood, simulate_dataset, wald_interval, Error,
    FitOptions, FitTemplate, JumpFamily, Margin, ModelSpec, Observation, SeriesControl, Variant,
};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_variant(s: &str) -> PyResult<Variant> {
    Variant::parse(s).map_err(err)
}

fn parse_family(s: &str) -> PyResult<JumpFamily> {
    JumpFamily::parse(s).map_err(err)
}

fn control(epsilon: Option<f64>) -> PyResult<SeriesControl> {
    match epsilon {
        Some(e) => SeriesControl::new(e, 10_000).map_err(err),
        None => Ok(SeriesControl::default()),
    }
}

fn observations(data: Vec<(f64, u8)>) -> Vec<Observation> {
    data.into_iter().map(|(y, delta)| Observation { y, delta }).collect()
}

/// Bivariate first-hitting-time model with a shared jump clock.
///
/// Jump families are given as strings: "dirac:1.0", "bernoulli:0.36",
/// "exponential:0.71", "poisson:1.23". The variant is "I" or "II".
#[pyclass(module = "hitcrest_py")]
struct Model {
    spec: ModelSpec,
}

#[pymethods]
impl Model {
    #[new]
    fn new(lambda: f64, jump_x: &str, x: f64, jump_z: &str, z: f64, variant: &str) -> PyResult<Self> {
        let spec = ModelSpec::new(
            lambda,
            parse_family(jump_x)?,
            x,
            parse_family(jump_z)?,
            z,
            parse_variant(variant)?,
        )
        .map_err(err)?;
        Ok(Model { spec })
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.spec.lambda()
    }

    #[getter]
    fn variant(&self) -> String {
        self.spec.variant().to_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(lambda={}, jump_x='{}', x={}, jump_z='{}', z={}, variant='{}')",
            self.spec.lambda(),
            self.spec.family_x(),
            self.spec.x(),
            self.spec.family_z(),
            self.spec.z(),
            self.spec.variant()
        )
    }

    /// Density of (Y = t, Delta = delta).
    #[pyo3(signature = (t, delta, epsilon=None))]
    fn outcome_density(&self, t: f64, delta: u8, epsilon: Option<f64>) -> PyResult<f64> {
        self.spec.outcome_density(t, delta, control(epsilon)?).map_err(err)
    }

    #[pyo3(signature = (t, epsilon=None))]
    fn survival(&self, t: f64, epsilon: Option<f64>) -> PyResult<f64> {
        self.spec.survival_y(t, control(epsilon)?).map_err(err)
    }

    #[pyo3(signature = (t, epsilon=None))]
    fn hazard(&self, t: f64, epsilon: Option<f64>) -> PyResult<f64> {
        self.spec.hazard(t, control(epsilon)?).map_err(err)
    }

    /// Marginal CDF of the event time ("T") or censoring time ("C").
    #[pyo3(signature = (margin, t, epsilon=None))]
    fn marginal_cdf(&self, margin: &str, t: f64, epsilon: Option<f64>) -> PyResult<f64> {
        let m = match margin {
            "T" | "t" => Margin::T,
            "C" | "c" => Margin::C,
            other => return Err(PyValueError::new_err(format!("margin must be T or C, got {other:?}"))),
        };
        self.spec.marginal_cdf(m, t, control(epsilon)?).map_err(err)
    }

    /// Joint density of (T, C) off the diagonal.
    #[pyo3(signature = (u, v, epsilon=None))]
    fn joint_density(&self, u: f64, v: f64, epsilon: Option<f64>) -> PyResult<f64> {
        self.spec.joint_density_ac(u, v, control(epsilon)?).map_err(err)
    }

    /// Density of the singular diagonal component at t.
    #[pyo3(signature = (t, epsilon=None))]
    fn diagonal_density(&self, t: f64, epsilon: Option<f64>) -> PyResult<f64> {
        self.spec.diagonal_density(t, control(epsilon)?).map_err(err)
    }

    /// Dict with the three outcome probabilities.
    #[pyo3(signature = (epsilon=None))]
    fn outcome_masses<'py>(&self, py: Python<'py>, epsilon: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
        let m = self.spec.outcome_masses(control(epsilon)?).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("t_before_c", m.t_before_c)?;
        d.set_item("tie", m.tie)?;
        d.set_item("c_before_t", m.c_before_t)?;
        d.set_item("uncensored_model_i", m.uncensored_model_i())?;
        Ok(d)
    }

    #[pyo3(signature = (epsilon=None))]
    fn mean(&self, epsilon: Option<f64>) -> PyResult<f64> {
        self.spec.mean_y(control(epsilon)?).map_err(err)
    }

    #[pyo3(signature = (p, epsilon=None))]
    fn quantile(&self, p: f64, epsilon: Option<f64>) -> PyResult<f64> {
        self.spec.quantile_y(p, control(epsilon)?).map_err(err)
    }

    /// Draw n observations; returns a list of (y, delta) tuples.
    fn simulate(&self, n: usize, seed: u64) -> PyResult<Vec<(f64, u8)>> {
        let data = simulate_dataset(&self.spec, n, seed).map_err(err)?;
        Ok(data.into_iter().map(|o| (o.y, o.delta)).collect())
    }

    /// Mean log likelihood of (y, delta) pairs under this model.
    #[pyo3(signature = (data, epsilon=None))]
    fn log_likelihood(&self, data: Vec<(f64, u8)>, epsilon: Option<f64>) -> PyResult<f64> {
        let template = FitTemplate::from_spec(&self.spec);
        log_likelihood(&template, &template.params(), &observations(data), control(epsilon)?)
            .map_err(err)
    }

    /// Identifiability summary for this configuration.
    fn identifiability<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = identifiability_report(
            &self.spec.family_x(),
            self.spec.x(),
            &self.spec.family_z(),
            self.spec.z(),
            self.spec.variant(),
        )
        .map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("class_x", format!("{:?}", r.class_x))?;
        d.set_item("class_z", format!("{:?}", r.class_z))?;
        d.set_item("hypothesis", r.hypothesis.to_string())?;
        d.set_item("variant_adequate", r.variant_adequate)?;
        d.set_item("notes", r.notes)?;
        Ok(d)
    }
}

/// Maximum-likelihood fit. `data` is a list of (y, delta) tuples; the
/// `Model` provides the families, thresholds, and starting values.
/// Returns a dict with estimates, standard errors, Wald intervals, and
/// convergence diagnostics.
#[pyfunction]
#[pyo3(signature = (model, data, multistarts=8, seed=0, tolerance=1e-8, max_iter=800, epsilon=None))]
fn fit_model<'py>(
    py: Python<'py>,
    model: &Model,
    data: Vec<(f64, u8)>,
    multistarts: usize,
    seed: u64,
    tolerance: f64,
    max_iter: usize,
    epsilon: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let template = FitTemplate::from_spec(&model.spec);
    let options = FitOptions { multistarts, tolerance, max_iter, seed, bounds: None };
    let res = fit(&template, &observations(data), &options, control(epsilon)?).map_err(err)?;

    let d = PyDict::new(py);
    d.set_item("converged", res.converged)?;
    d.set_item("loglik", res.loglik)?;
    d.set_item("n_obs", res.n_obs)?;
    d.set_item("names", res.theta_hat.names.clone())?;
    d.set_item("estimates", res.theta_hat.values.clone())?;
    d.set_item("std_errors", res.std_errors.clone())?;
    d.set_item("gradient_norm", res.gradient_norm)?;
    d.set_item("boundary", res.boundary)?;
    d.set_item("warnings", res.warnings.clone())?;
    let dim = res.theta_hat.dim();
    let cov: Vec<Vec<f64>> =
        (0..dim).map(|j| (0..dim).map(|k| res.covariance[(j, k)]).collect()).collect();
    d.set_item("covariance", cov)?;
    if res.converged {
        let mut intervals: Vec<(f64, f64)> = Vec::with_capacity(dim);
        for j in 0..dim {
            intervals.push(wald_interval(&res, j, 0.95).map_err(err)?);
        }
        d.set_item("wald95", intervals)?;
    }
    Ok(d)
}

#[pymodule]
fn hitcrest_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(fit_model, m)?)?;
    Ok(())
}
