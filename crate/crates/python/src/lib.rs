//! Python bindings for `swldpc`.
//!
//! Bit sequences cross the boundary as Python sequences of 0/1 integers and
//! come back as lists.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use swldpc::alist::{load_alist, save_alist, to_alist_string};
use swldpc::bits::Bits;
use swldpc::bp::{self, BpConfig, CheckKernel, TannerGraph};
use swldpc::code;
use swldpc::joint::{self, JointConfig, JointDecoder};
use swldpc::source::{self, CorrelationConfig};
use swldpc::sweep::{self, SweepConfig};
use swldpc::{ParityBlock, SourceBlock};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_bits(values: &[u8]) -> PyResult<Bits> {
    if let Some(bad) = values.iter().find(|&&v| v > 1) {
        return Err(PyValueError::new_err(format!(
            "bit values must be 0 or 1, got {bad}"
        )));
    }
    Ok(swldpc::bits::bits_from_u8s(values))
}

fn to_list<'py>(py: Python<'py>, bits: &Bits) -> PyResult<Bound<'py, PyList>> {
    PyList::new(py, bits.iter().map(|b| *b as u8))
}

#[pyclass(name = "CodeSpec", module = "pyswldpc", from_py_object)]
#[derive(Clone)]
struct PyCodeSpec {
    inner: code::CodeSpec,
}

#[pymethods]
impl PyCodeSpec {
    #[new]
    #[pyo3(signature = (id, k, n, dv, design_p))]
    fn new(id: String, k: usize, n: usize, dv: f64, design_p: f64) -> PyResult<Self> {
        let inner = code::CodeSpec::new(id, k, n, dv, design_p);
        inner.validate().map_err(value_err)?;
        Ok(PyCodeSpec { inner })
    }

    /// Registry entry by id, e.g. "L2" or "L3-k1024".
    #[staticmethod]
    fn lookup(id: &str) -> PyResult<Self> {
        code::lookup(id)
            .map(|inner| PyCodeSpec { inner })
            .ok_or_else(|| PyValueError::new_err(format!("unknown code {id:?}")))
    }

    #[staticmethod]
    fn registry() -> Vec<Self> {
        code::registry()
            .into_iter()
            .map(|inner| PyCodeSpec { inner })
            .collect()
    }

    #[getter]
    fn id(&self) -> &str {
        &self.inner.id
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn dv(&self) -> f64 {
        self.inner.dv_target
    }

    #[getter]
    fn design_p(&self) -> f64 {
        self.inner.design_p
    }

    #[getter]
    fn rate_x(&self) -> f64 {
        self.inner.rate_x()
    }

    #[getter]
    fn total_rate(&self) -> f64 {
        1.0 + self.inner.rate_x()
    }

    #[getter]
    fn expected_row_weight(&self) -> f64 {
        self.inner.expected_row_weight()
    }

    fn __repr__(&self) -> String {
        let s = &self.inner;
        format!(
            "CodeSpec({:?}, k={}, n={}, dv={}, design_p={})",
            s.id, s.k, s.n, s.dv_target, s.design_p
        )
    }
}

/// Parity-check matrix `[H_X | staircase]`.
#[pyclass(name = "ParityMatrix", module = "pyswldpc", frozen)]
struct PyParityMatrix {
    inner: code::SparseParityMatrix,
    graph: TannerGraph,
    design_p: Option<f64>,
}

impl PyParityMatrix {
    fn wrap(inner: code::SparseParityMatrix, design_p: Option<f64>) -> Self {
        let graph = TannerGraph::new(&inner);
        PyParityMatrix {
            inner,
            graph,
            design_p,
        }
    }
}

#[pymethods]
impl PyParityMatrix {
    #[staticmethod]
    #[pyo3(signature = (spec, seed = 1))]
    fn build(py: Python<'_>, spec: &PyCodeSpec, seed: u64) -> PyResult<Self> {
        let s = spec.inner.clone();
        let h = py.detach(|| code::build_code(&s, seed)).map_err(value_err)?;
        Ok(Self::wrap(h, Some(s.design_p)))
    }

    /// Builds from the systematic part of each row; the staircase is appended.
    #[staticmethod]
    fn from_systematic_rows(k: usize, rows: Vec<Vec<u32>>) -> PyResult<Self> {
        let h = code::SparseParityMatrix::from_systematic_rows(k, rows).map_err(value_err)?;
        Ok(Self::wrap(h, None))
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let f = load_alist(path).map_err(value_err)?;
        Ok(Self::wrap(f.matrix, f.design_p))
    }

    #[pyo3(signature = (path, design_p = None))]
    fn save(&self, path: &str, design_p: Option<f64>) -> PyResult<()> {
        save_alist(path, &self.inner, design_p.or(self.design_p))
            .map_err(|e| PyIOError::new_err(e.to_string()))
    }

    fn to_alist(&self) -> String {
        to_alist_string(&self.inner, self.design_p)
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    #[getter]
    fn design_p(&self) -> Option<f64> {
        self.design_p
    }

    #[getter]
    fn num_ones(&self) -> usize {
        self.inner.num_ones()
    }

    fn rows(&self) -> Vec<Vec<u32>> {
        self.inner.rows().to_vec()
    }

    fn column_weights(&self) -> Vec<usize> {
        self.inner.column_weights()
    }

    fn mean_systematic_column_weight(&self) -> f64 {
        self.inner.mean_systematic_column_weight()
    }

    fn mean_row_weight(&self) -> f64 {
        self.inner.mean_row_weight()
    }

    fn gf2_rank(&self) -> usize {
        self.inner.gf2_rank()
    }

    fn has_systematic_4_cycle(&self) -> bool {
        self.inner.has_systematic_4_cycle()
    }

    /// True when the length-n word satisfies every check.
    fn syndrome_ok(&self, word: Vec<u8>) -> PyResult<bool> {
        let w = to_bits(&word)?;
        if w.len() != self.inner.n() {
            return Err(PyValueError::new_err(format!(
                "expected {} bits, got {}",
                self.inner.n(),
                w.len()
            )));
        }
        Ok(self.inner.syndrome_ok(&w))
    }

    fn __repr__(&self) -> String {
        format!(
            "ParityMatrix(k={}, n={}, ones={})",
            self.inner.k(),
            self.inner.n(),
            self.inner.num_ones()
        )
    }
}

/// Parity bits of a source block.
#[pyfunction]
fn encode<'py>(py: Python<'py>, h: &PyParityMatrix, x: Vec<u8>) -> PyResult<Bound<'py, PyList>> {
    let z = swldpc::encoder::encode(&h.inner, &SourceBlock(to_bits(&x)?)).map_err(value_err)?;
    to_list(py, &z.0)
}

#[pyfunction]
fn compression_rate(spec: &PyCodeSpec) -> f64 {
    swldpc::encoder::compression_rate(&spec.inner)
}

/// Joint decoder with fixed settings, bound to one matrix.
#[pyclass(name = "Decoder", module = "pyswldpc", frozen)]
struct PyDecoder {
    h: Py<PyParityMatrix>,
    cfg: JointConfig,
}

#[pymethods]
impl PyDecoder {
    #[new]
    #[pyo3(signature = (h, max_local = 50, max_global = 5, kernel = "sum-product", stop_on_syndrome = false, q = bp::DEFAULT_Q, s_max = bp::DEFAULT_S_MAX))]
    fn new(
        h: Py<PyParityMatrix>,
        max_local: usize,
        max_global: usize,
        kernel: &str,
        stop_on_syndrome: bool,
        q: u32,
        s_max: i32,
    ) -> PyResult<Self> {
        let kernel: CheckKernel = kernel.parse().map_err(value_err)?;
        if max_global == 0 {
            return Err(PyValueError::new_err("max_global must be at least 1"));
        }
        let cfg = JointConfig {
            bp: BpConfig {
                q,
                s_max,
                max_iters: max_local,
                kernel,
            },
            max_global,
            stop_on_syndrome,
        };
        Ok(PyDecoder { h, cfg })
    }

    /// Decodes one block. Returns a dict with `x_hat`, `success`,
    /// `global_iters`, `local_iters`, `initial_alpha`, `alpha`, `p_hat` and
    /// the per-iteration `trace`.
    #[pyo3(signature = (z, y, design_p, iterative = true))]
    fn decode<'py>(
        &self,
        py: Python<'py>,
        z: Vec<u8>,
        y: Vec<u8>,
        design_p: f64,
        iterative: bool,
    ) -> PyResult<Bound<'py, PyDict>> {
        let z = ParityBlock(to_bits(&z)?);
        let y = to_bits(&y)?;
        let h = self.h.get();
        let cfg = self.cfg.clone();
        let r = py
            .detach(|| {
                let mut dec = JointDecoder::new(&h.graph, cfg);
                if iterative {
                    dec.decode(&z, &y, design_p)
                } else {
                    dec.decode_non_iterative(&z, &y, design_p)
                }
            })
            .map_err(value_err)?;
        let out = PyDict::new(py);
        out.set_item("x_hat", to_list(py, &r.x_hat.0)?)?;
        out.set_item("success", r.success)?;
        out.set_item("global_iters", r.global_iters_used)?;
        out.set_item("local_iters", r.local_iters_total)?;
        out.set_item("initial_alpha", r.initial_alpha)?;
        out.set_item("alpha", r.final_state.alpha)?;
        out.set_item("p_hat", r.final_state.p_hat)?;
        let trace = PyList::empty(py);
        for t in &r.final_state.trace {
            let d = PyDict::new(py);
            d.set_item("iteration", t.iteration)?;
            d.set_item("alpha", t.alpha)?;
            d.set_item("p_hat", t.p_hat)?;
            d.set_item("syndrome_ok", t.syndrome_ok)?;
            d.set_item("local_iters", t.local_iters)?;
            trace.append(d)?;
        }
        out.set_item("trace", trace)?;
        Ok(out)
    }
}

/// `(alpha, p_hat, flips)` from the disagreement between `x_hat` and `y`.
#[pyfunction]
fn estimate_alpha(x_hat: Vec<u8>, y: Vec<u8>) -> PyResult<(f64, f64, usize)> {
    let s = joint::estimate_alpha(&to_bits(&x_hat)?, &to_bits(&y)?).map_err(value_err)?;
    Ok((s.alpha, s.p_hat, s.flips))
}

#[pyfunction]
fn initial_alpha(design_p: f64) -> PyResult<f64> {
    joint::initial_alpha(design_p).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (l, q = bp::DEFAULT_Q, s_max = bp::DEFAULT_S_MAX))]
fn quantize_llr(l: f64, q: u32, s_max: i32) -> i32 {
    bp::quantize_llr(l, q, s_max)
}

#[pyfunction]
fn binary_entropy(p: f64) -> f64 {
    source::binary_entropy(p)
}

/// `(H(X|Y), H(X,Y))` in bits per source bit.
#[pyfunction]
fn sw_limits(p: f64) -> (f64, f64) {
    let l = source::sw_limits(p);
    (l.h_x_given_y, l.joint)
}

/// `(x, y, actual_p)` for frame `index` of the stream seeded by `seed`.
#[pyfunction]
#[pyo3(signature = (k, mean_p, delta_p = 0.0, seed = 0, index = 0))]
fn generate_pair<'py>(
    py: Python<'py>,
    k: usize,
    mean_p: f64,
    delta_p: f64,
    seed: u64,
    index: u64,
) -> PyResult<(Bound<'py, PyList>, Bound<'py, PyList>, f64)> {
    let cfg = CorrelationConfig::new(mean_p, delta_p, seed).map_err(value_err)?;
    let f = source::generate_frame(k, &cfg, index).map_err(value_err)?;
    Ok((to_list(py, &f.x)?, to_list(py, &f.y)?, f.actual_p))
}

/// Runs a sweep given its JSON config and returns the JSON report.
#[pyfunction]
fn run_sweep(py: Python<'_>, config_json: &str) -> PyResult<String> {
    let cfg: SweepConfig = serde_json::from_str(config_json).map_err(value_err)?;
    let report = py.detach(|| sweep::run_sweep(&cfg)).map_err(value_err)?;
    serde_json::to_string(&report).map_err(value_err)
}

/// Same as `run_sweep` but returns the CSV report.
#[pyfunction]
fn run_sweep_csv(py: Python<'_>, config_json: &str) -> PyResult<String> {
    let cfg: SweepConfig = serde_json::from_str(config_json).map_err(value_err)?;
    let report = py.detach(|| sweep::run_sweep(&cfg)).map_err(value_err)?;
    Ok(sweep::to_csv_string(&report))
}

#[pymodule]
fn pyswldpc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCodeSpec>()?;
    m.add_class::<PyParityMatrix>()?;
    m.add_class::<PyDecoder>()?;
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add_function(wrap_pyfunction!(compression_rate, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(initial_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(quantize_llr, m)?)?;
    m.add_function(wrap_pyfunction!(binary_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(sw_limits, m)?)?;
    m.add_function(wrap_pyfunction!(generate_pair, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep_csv, m)?)?;
    Ok(())
}
