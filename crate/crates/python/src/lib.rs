use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use compute_forward as cf;
use compute_forward::{
    ChannelState, Constellation, DecoderKind, Execution, SimConfig, SnrConvention,
};

fn to_py(e: cf::Error) -> PyErr {
    match e {
        cf::Error::Numerical(_) => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn channel(h: Vec<f64>, snr: f64, noise_variance: f64) -> PyResult<ChannelState> {
    ChannelState::new(h, snr, noise_variance).map_err(to_py)
}

#[pyclass(name = "CoeffResult", get_all, frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCoeffResult {
    a: Vec<i64>,
    quadratic_form: f64,
    rate_bits: f64,
}

#[pymethods]
impl PyCoeffResult {
    fn __repr__(&self) -> String {
        format!(
            "CoeffResult(a={:?}, quadratic_form={}, rate_bits={})",
            self.a, self.quadratic_form, self.rate_bits
        )
    }
}

impl From<cf::CoeffResult> for PyCoeffResult {
    fn from(r: cf::CoeffResult) -> Self {
        Self {
            a: r.a,
            quadratic_form: r.quadratic_form,
            rate_bits: r.rate_bits,
        }
    }
}

#[pyclass(name = "DecodeResult", get_all, frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDecodeResult {
    lambda_hat: i64,
    metric: f64,
    k_hat: i64,
    ambiguous: bool,
    runner_up_gap: f64,
}

#[pymethods]
impl PyDecodeResult {
    fn __repr__(&self) -> String {
        format!(
            "DecodeResult(lambda_hat={}, metric={}, k_hat={}, ambiguous={})",
            self.lambda_hat, self.metric, self.k_hat, self.ambiguous
        )
    }
}

impl From<cf::DecodeResult> for PyDecodeResult {
    fn from(r: cf::DecodeResult) -> Self {
        Self {
            lambda_hat: r.lambda_hat,
            metric: r.metric,
            k_hat: r.k_hat,
            ambiguous: r.ambiguous,
            runner_up_gap: r.runner_up_gap,
        }
    }
}

/// Gram matrix `I - snr/(1 + snr |h|^2) h h^T` as a list of rows.
#[pyfunction]
fn build_gram(h: Vec<f64>, snr: f64) -> PyResult<Vec<Vec<f64>>> {
    let g = cf::build_gram(&channel(h, snr, 1.0)?);
    let n = g.dimension();
    Ok((0..n)
        .map(|i| (0..n).map(|j| g.entry(i, j)).collect())
        .collect())
}

#[pyfunction]
fn computation_rate(h: Vec<f64>, snr: f64, a: Vec<i64>) -> PyResult<f64> {
    cf::computation_rate(&channel(h, snr, 1.0)?, &a).map_err(to_py)
}

#[pyfunction]
fn shortest_vector(gram: Vec<Vec<f64>>) -> PyResult<PyCoeffResult> {
    let lat = cf::GramLattice::from_rows(&gram).map_err(to_py)?;
    cf::shortest_vector(&lat).map(Into::into).map_err(to_py)
}

#[pyfunction]
fn best_coefficients(h: Vec<f64>, snr: f64) -> PyResult<PyCoeffResult> {
    cf::best_coefficients(&channel(h, snr, 1.0)?)
        .map(Into::into)
        .map_err(to_py)
}

/// Returns `(g, u1, u2)` with `a1*u1 + a2*u2 = g`.
#[pyfunction]
fn extended_gcd(a1: i64, a2: i64) -> PyResult<(i64, i64, i64)> {
    let c = cf::extended_gcd(a1, a2).map_err(to_py)?;
    Ok((c.gcd(), c.u1(), c.u2()))
}

#[pyfunction]
#[pyo3(signature = (a1, a2, lam, k, u=None))]
fn solution_family(
    a1: i64,
    a2: i64,
    lam: i64,
    k: i64,
    u: Option<(i64, i64)>,
) -> PyResult<(i64, i64)> {
    let c = match u {
        Some((u1, u2)) => cf::EquationCoeffs::with_bezout(a1, a2, u1, u2),
        None => cf::extended_gcd(a1, a2),
    }
    .map_err(to_py)?;
    cf::solution_family(&c, lam, k).map_err(to_py)
}

/// Inclusive `(lo, hi)` of feasible `k`, or `None` when empty.
#[pyfunction]
fn feasible_k_range(a1: i64, a2: i64, lam: i64, s_m: i64) -> PyResult<Option<(i64, i64)>> {
    let c = cf::extended_gcd(a1, a2).map_err(to_py)?;
    let cons = Constellation::new(s_m).map_err(to_py)?;
    let r = cf::feasible_k_range(&c, lam, &cons).map_err(to_py)?;
    Ok((!r.is_empty()).then_some((r.lo, r.hi)))
}

#[pyfunction]
fn lambda_alphabet(a1: i64, a2: i64, s_m: i64) -> PyResult<Vec<i64>> {
    let c = cf::extended_gcd(a1, a2).map_err(to_py)?;
    let cons = Constellation::new(s_m).map_err(to_py)?;
    Ok(cf::lambda_alphabet(&c, &cons))
}

/// Decoders for one two-source channel realization and coefficient vector.
#[pyclass(name = "Decoder", frozen)]
struct PyDecoder {
    setup: cf::DecoderSetup,
}

#[pymethods]
impl PyDecoder {
    #[new]
    #[pyo3(signature = (h, a, s_m, noise_variance, snr=1.0))]
    fn new(h: Vec<f64>, a: (i64, i64), s_m: i64, noise_variance: f64, snr: f64) -> PyResult<Self> {
        let ch = channel(h, snr, noise_variance)?;
        let coeffs = cf::extended_gcd(a.0, a.1).map_err(to_py)?;
        let cons = Constellation::new(s_m).map_err(to_py)?;
        let setup = cf::DecoderSetup::new(ch, coeffs, cons).map_err(to_py)?;
        Ok(Self { setup })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.setup.alpha()
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.setup.beta()
    }

    fn likelihood_profile(&self, y: f64) -> Vec<(i64, f64)> {
        cf::likelihood_profile(&self.setup, y)
    }

    fn decode_ml(&self, y: f64) -> PyDecodeResult {
        cf::decode_ml(&self.setup, y).into()
    }

    fn decode_ida(&self, y: f64) -> PyDecodeResult {
        cf::decode_ida(&self.setup, y).into()
    }

    fn decode_joint(&self, y: f64) -> (i64, i64) {
        cf::decode_joint(&self.setup, y)
    }
}

#[pyclass(name = "PointRecord", get_all, frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPointRecord {
    snr_db: f64,
    trials: u64,
    errors: u64,
    error_rate: f64,
    ambiguous_count: u64,
}

#[pyclass(name = "SimResult", get_all, frozen, skip_from_py_object)]
struct PySimResult {
    points: Vec<PyPointRecord>,
    fitted_diversity: Option<f64>,
    seed: u64,
}

#[pyfunction]
#[pyo3(signature = (s_m, snr_db_points, trials, seed=1, decoder="ida", max_errors=None, snr_convention="unit_spacing", parallel=true))]
#[allow(clippy::too_many_arguments)]
fn run_sweep(
    py: Python<'_>,
    s_m: i64,
    snr_db_points: Vec<f64>,
    trials: u64,
    seed: u64,
    decoder: &str,
    max_errors: Option<u64>,
    snr_convention: &str,
    parallel: bool,
) -> PyResult<PySimResult> {
    let cfg = SimConfig {
        s_m,
        snr_db_points,
        trials_per_point: trials,
        seed,
        decoder_kind: decoder.parse::<DecoderKind>().map_err(to_py)?,
        max_error_events: max_errors,
        snr_convention: snr_convention.parse::<SnrConvention>().map_err(to_py)?,
    };
    let exec = if parallel {
        Execution::Parallel
    } else {
        Execution::Serial
    };
    let res = py
        .detach(|| cf::run_sweep_with(&cfg, exec))
        .map_err(to_py)?;
    Ok(PySimResult {
        points: res
            .points
            .into_iter()
            .map(|p| PyPointRecord {
                snr_db: p.snr_db,
                trials: p.trials,
                errors: p.errors,
                error_rate: p.error_rate,
                ambiguous_count: p.ambiguous_count,
            })
            .collect(),
        fitted_diversity: res.fitted_diversity,
        seed: res.seed,
    })
}

#[pymodule]
fn pycnf(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCoeffResult>()?;
    m.add_class::<PyDecodeResult>()?;
    m.add_class::<PyDecoder>()?;
    m.add_class::<PyPointRecord>()?;
    m.add_class::<PySimResult>()?;
    m.add_function(wrap_pyfunction!(build_gram, m)?)?;
    m.add_function(wrap_pyfunction!(computation_rate, m)?)?;
    m.add_function(wrap_pyfunction!(shortest_vector, m)?)?;
    m.add_function(wrap_pyfunction!(best_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(extended_gcd, m)?)?;
    m.add_function(wrap_pyfunction!(solution_family, m)?)?;
    m.add_function(wrap_pyfunction!(feasible_k_range, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_alphabet, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    Ok(())
}
