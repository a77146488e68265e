//! Python module `pyrydsim`: thin wrappers over the rydsim library.
//! Rates are rad/s unless the argument name says otherwise.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use rydsim::atomic;
use rydsim::fidelity::{self, BudgetInputs};
use rydsim::gates::{self, BlockadeModel, ElectronicMethod, GateOptions, GateResult, NuclearMethod, SinGateParams};
use rydsim::protocols::build_sin_excitation;
use rydsim::pulse::{self, SinPulseParams};
use rydsim::quantum::{Atom, Level, DEFAULT_TOL};
use rydsim::sim::run_from_level;

fn err(e: rydsim::Error) -> PyErr {
    use rydsim::Error as E;
    match e {
        E::Param(_) | E::Unmatched(_) | E::Domain(_) | E::Basis(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

fn rows(m: &DMatrix<C64>) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn matrix(rows: Vec<Vec<C64>>) -> PyResult<DMatrix<C64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Phase −(N + Δ/2Ω)π of N complete detuned Rabi cycles.
#[pyfunction]
fn detuned_cycle_phase(n: u32, detuning: f64, omega: f64) -> PyResult<f64> {
    pulse::detuned_cycle_phase(n, detuning, omega).map_err(err)
}

/// Matched rectangular-pulse parameters as a dict.
#[pyfunction]
#[pyo3(signature = (detuning, omega0_hint, eta=1.0, eta_prime=1.0, zeta=1.0))]
fn match_generalized_rabi<'py>(
    py: Python<'py>,
    detuning: f64,
    omega0_hint: f64,
    eta: f64,
    eta_prime: f64,
    zeta: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let p = pulse::match_generalized_rabi(eta, eta_prime, zeta, detuning, omega0_hint).map_err(err)?;
    to_py(py, &p)
}

/// Final amplitudes {level: complex} after the two-field sinusoidal pulse.
#[pyfunction]
#[pyo3(signature = (two_kappa0, detuning_ratio, delta_ratio, initial="g0", angle=PI / 2.0, tol=DEFAULT_TOL))]
fn sin_excitation<'py>(
    py: Python<'py>,
    two_kappa0: f64,
    detuning_ratio: f64,
    delta_ratio: f64,
    initial: &str,
    angle: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let level: Level = initial.parse().map_err(err)?;
    let p = SinPulseParams::from_ratios(two_kappa0, detuning_ratio, delta_ratio);
    let run = py
        .detach(|| -> rydsim::Result<_> {
            let s = build_sin_excitation(&p, angle)?;
            run_from_level(&s, Atom::Control, level, tol, None)
        })
        .map_err(err)?;
    let out = PyDict::new(py);
    for (label, a) in run.state.basis.labels().iter().zip(run.state.amplitudes.iter()) {
        out.set_item(label.to_string(), *a)?;
    }
    Ok(out)
}

/// Simulated C_Z gate with its error budget.
///
/// `kind` is "electronic", "nuclear", "cross" or "tensor". Returns a dict
/// with `budget`, `matrix` (16×16 complex rows) and `labels`.
#[pyfunction]
#[pyo3(signature = (kind, two_kappa0_mhz=1.4, detuning_ratio=10.0, delta_ratio=0.1, tau_us=330.0, v_mhz=47.0, tol=DEFAULT_TOL))]
#[allow(clippy::too_many_arguments)]
fn cz_gate<'py>(
    py: Python<'py>,
    kind: &str,
    two_kappa0_mhz: f64,
    detuning_ratio: f64,
    delta_ratio: f64,
    tau_us: f64,
    v_mhz: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let w = 2.0 * PI * 1e6 * two_kappa0_mhz;
    let g = SinGateParams::new(SinPulseParams::from_ratios(w, detuning_ratio, delta_ratio));
    let inputs = BudgetInputs {
        tau: tau_us * 1e-6,
        kappa0: w / 2.0,
        v: 2.0 * PI * 1e6 * v_mhz,
        detuning: detuning_ratio * w,
        delta_env: delta_ratio * w,
    };
    let opts = GateOptions { tol, ..GateOptions::default() };
    let bl = BlockadeModel::Perfect;
    let out = PyDict::new(py);
    let kind = kind.to_owned();
    let (result, budget): (GateResult, Bound<'py, PyAny>) = match kind.as_str() {
        "electronic" | "nuclear" | "cross" => {
            let r = py
                .detach(|| match kind.as_str() {
                    "electronic" => gates::run_cz_electronic(&ElectronicMethod::Sinusoidal(g), &bl, &opts),
                    "nuclear" => gates::run_cz_nuclear(&NuclearMethod::Sinusoidal(g), &bl, &opts),
                    _ => gates::run_cz_cross(&g, &bl, &opts),
                })
                .map_err(err)?;
            let b = fidelity::assemble_budget(&r, &r.ideal, &inputs).map_err(err)?;
            let b = to_py(py, &b)?;
            (r, b)
        }
        "tensor" => {
            let t = py
                .detach(|| {
                    gates::run_cz_tensor(&ElectronicMethod::Sinusoidal(g), &NuclearMethod::Sinusoidal(g), &bl, &opts, false)
                })
                .map_err(err)?;
            let be = fidelity::assemble_budget(&t.electronic, &t.electronic.ideal, &inputs).map_err(err)?;
            let bn = fidelity::assemble_budget(&t.nuclear, &t.nuclear.ideal, &inputs).map_err(err)?;
            let c = fidelity::compose_budgets(vec![be, bn]);
            (t.combined, to_py(py, &c)?)
        }
        other => return Err(PyValueError::new_err(format!("unknown gate kind {other:?}"))),
    };
    out.set_item("budget", budget)?;
    out.set_item("matrix", rows(&result.matrix))?;
    out.set_item("labels", result.labels.clone())?;
    out.set_item("ordering", result.ordering_rule.clone())?;
    Ok(out)
}

/// Average gate fidelity between an ideal unitary and a (possibly
/// non-unitary) simulated matrix, both as lists of complex rows.
#[pyfunction]
fn average_fidelity(ideal: Vec<Vec<C64>>, actual: Vec<Vec<C64>>) -> PyResult<f64> {
    fidelity::average_fidelity(&matrix(ideal)?, &matrix(actual)?).map_err(err)
}

/// Ideal 16×16 gate: "electronic", "nuclear", "tensor" or "cross".
#[pyfunction]
fn ideal_cz(kind: &str) -> PyResult<Vec<Vec<C64>>> {
    let m = match kind {
        "electronic" => gates::ideal_cz_electronic(),
        "nuclear" => gates::ideal_cz_nuclear(),
        "tensor" => gates::ideal_cz_tensor(),
        "cross" => gates::ideal_cz_cross(),
        other => return Err(PyValueError::new_err(format!("unknown gate kind {other:?}"))),
    };
    Ok(rows(&m))
}

/// Calibrated ⁸⁷Sr 70s manifold (energies in rad/s).
#[pyfunction]
fn sr87_s_manifold(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    let m = atomic::sr87_n70_manifold().map_err(err)?;
    to_py(py, &atomic::rydberg_s_manifold(&m).map_err(err)?)
}

/// Hyperfine shift of the (I, J, F) level.
#[pyfunction]
#[pyo3(signature = (a_hfs, b_hfs, i, j, f))]
fn hyperfine_shift(a_hfs: f64, b_hfs: f64, i: f64, j: f64, f: f64) -> PyResult<f64> {
    let m = atomic::HyperfineModel { a_hfs, b_hfs, i, j, f, m_f: f, g_j: 1.0, mu_nuclear: 0.0, b_field: 0.0 };
    atomic::hyperfine_shift(&m).map_err(err)
}

#[pymodule]
pub fn pyrydsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(detuned_cycle_phase, m)?)?;
    m.add_function(wrap_pyfunction!(match_generalized_rabi, m)?)?;
    m.add_function(wrap_pyfunction!(sin_excitation, m)?)?;
    m.add_function(wrap_pyfunction!(cz_gate, m)?)?;
    m.add_function(wrap_pyfunction!(average_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(ideal_cz, m)?)?;
    m.add_function(wrap_pyfunction!(sr87_s_manifold, m)?)?;
    m.add_function(wrap_pyfunction!(hyperfine_shift, m)?)?;
    Ok(())
}
