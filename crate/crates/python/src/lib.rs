//! Python bindings over the core library: the divergence and its solvers,
//! interval construction, single sampling runs, and one-cell coverage
//! experiments. Domain errors surface as `ValueError`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use invseq::harness::{run_coverage_experiment, trial_rng, ExperimentConfig};
use invseq::{interval, BoundedDistribution, IntervalInputs, Method};

fn value_error(err: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn parse_method(name: &str) -> PyResult<Method> {
    name.parse().map_err(value_error)
}

fn parse_dist(spec: &str) -> PyResult<BoundedDistribution> {
    spec.parse().map_err(value_error)
}

/// The divergence at (z, mu); z = 1 uses the ln(mu) extension.
#[pyfunction]
fn h_divergence(z: f64, mu: f64) -> PyResult<f64> {
    invseq::h_divergence(z, mu).map_err(value_error)
}

/// Partial derivative of the divergence in mu.
#[pyfunction]
fn h_partial_mu(z: f64, mu: f64) -> PyResult<f64> {
    invseq::h_partial_mu(z, mu).map_err(value_error)
}

/// Root of H(z, .) = c above z; returns (mu, residual, iterations).
#[pyfunction]
fn solve_mu_above(z: f64, c: f64) -> PyResult<(f64, f64, u32)> {
    let solve = invseq::solve_mu_above(z, c).map_err(value_error)?;
    Ok((
        solve.mu,
        solve.diagnostics.residual,
        solve.diagnostics.iterations,
    ))
}

/// Root of H(z, .) = c below z; z = 1 has the closed form exp(c).
#[pyfunction]
fn solve_mu_below(z: f64, c: f64) -> PyResult<(f64, f64, u32)> {
    let solve = invseq::solve_mu_below(z, c).map_err(value_error)?;
    Ok((
        solve.mu,
        solve.diagnostics.residual,
        solve.diagnostics.iterations,
    ))
}

/// Confidence interval for stopping count n at threshold gamma and risk
/// delta, as a dict.
#[pyfunction]
fn confidence_interval<'py>(
    py: Python<'py>,
    method: &str,
    n: u64,
    gamma: f64,
    delta: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let method = parse_method(method)?;
    let inputs = IntervalInputs::new(n, gamma, delta).map_err(value_error)?;
    let ci = interval(method, inputs).map_err(value_error)?;
    let out = PyDict::new(py);
    out.set_item("method", ci.method.as_str())?;
    out.set_item("n", ci.n)?;
    out.set_item("gamma", ci.gamma)?;
    out.set_item("delta", ci.delta)?;
    out.set_item("lower", ci.lower)?;
    out.set_item("upper", ci.upper)?;
    out.set_item("width", ci.width())?;
    out.set_item("residual", ci.diagnostics.residual)?;
    out.set_item("iterations", ci.diagnostics.iterations)?;
    Ok(out)
}

/// One seeded inverse-sampling run; returns (n, final_sum).
#[pyfunction]
fn run_inverse_sampling(dist: &str, gamma: f64, seed: u64) -> PyResult<(u64, f64)> {
    let dist = parse_dist(dist)?;
    let mut rng = trial_rng(seed, 0, 0);
    let record = invseq::run_inverse_sampling(&dist, gamma, &mut rng).map_err(value_error)?;
    Ok((record.n, record.final_sum))
}

/// Monte Carlo coverage of one method on one distribution, as a dict.
#[pyfunction]
fn coverage<'py>(
    py: Python<'py>,
    dist: &str,
    gamma: f64,
    delta: f64,
    method: &str,
    trials: u32,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let config = ExperimentConfig {
        distributions: vec![parse_dist(dist)?],
        gammas: vec![gamma],
        deltas: vec![delta],
        methods: vec![parse_method(method)?],
        trials,
        master_seed: seed,
    };
    let report = run_coverage_experiment(&config).map_err(value_error)?;
    let cell = &report.cells[0];
    let out = PyDict::new(py);
    out.set_item("method", cell.method.as_str())?;
    out.set_item("dist", cell.dist.to_string())?;
    out.set_item("gamma", cell.gamma)?;
    out.set_item("delta", cell.delta)?;
    out.set_item("trials", cell.trials)?;
    out.set_item("seed", cell.master_seed)?;
    out.set_item("violations", cell.violations)?;
    out.set_item("coverage", cell.coverage)?;
    out.set_item("coverage_stderr", cell.coverage_stderr)?;
    out.set_item("mean_n", cell.mean_n)?;
    out.set_item("mean_n_stderr", cell.mean_n_stderr)?;
    out.set_item("margin", cell.margin)?;
    out.set_item("pass", cell.pass)?;
    Ok(out)
}

#[pymodule]
fn invseq_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(h_divergence, m)?)?;
    m.add_function(wrap_pyfunction!(h_partial_mu, m)?)?;
    m.add_function(wrap_pyfunction!(solve_mu_above, m)?)?;
    m.add_function(wrap_pyfunction!(solve_mu_below, m)?)?;
    m.add_function(wrap_pyfunction!(confidence_interval, m)?)?;
    m.add_function(wrap_pyfunction!(run_inverse_sampling, m)?)?;
    m.add_function(wrap_pyfunction!(coverage, m)?)?;
    Ok(())
}
