//! Gate fidelity and the linear error budget.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::gates::GateResult;

/// Average gate fidelity [|Tr(U†M)|² + Tr(U†MM†U)] / d(d+1).
///
/// Only |Tr(U†M)|² enters, so a global phase on `actual` does not change
/// the result; relative phases between columns do.
pub fn average_fidelity(ideal: &DMatrix<C64>, actual: &DMatrix<C64>) -> Result<f64> {
    let d = ideal.nrows();
    if ideal.ncols() != d || actual.shape() != ideal.shape() {
        return Err(Error::Param(format!("dimension mismatch: ideal {:?}, actual {:?}", ideal.shape(), actual.shape())));
    }
    let ud = ideal.adjoint();
    let um = &ud * actual;
    let t1 = um.trace().norm_sqr();
    let t2 = (&um * um.adjoint()).trace().re;
    Ok((t1 + t2) / (d * (d + 1)) as f64)
}

/// T_Ryd / τ.
pub fn decay_error(dwell: f64, tau: f64) -> Result<f64> {
    ensure(tau > 0.0 && tau.is_finite(), || format!("lifetime must be positive, got {tau}"))?;
    ensure(dwell >= 0.0 && dwell.is_finite(), || format!("dwell must be non-negative, got {dwell}"))?;
    Ok(dwell / tau)
}

/// (blocked / total)·(2κ₀/V)².
pub fn blockade_error(kappa0: f64, v: f64, blocked: usize, total: usize) -> Result<f64> {
    ensure(v != 0.0 && !v.is_nan(), || "blockade shift must be non-zero".into())?;
    ensure(total > 0 && blocked <= total, || format!("{blocked} of {total} inputs"))?;
    Ok(blocked as f64 / total as f64 * (2.0 * kappa0 / v).powi(2))
}

/// Physical constants entering the budget, echoed into the report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetInputs {
    /// Rydberg lifetime, s.
    pub tau: f64,
    /// κ₀, rad/s.
    pub kappa0: f64,
    /// Blockade shift V, rad/s.
    pub v: f64,
    /// Δ, rad/s.
    pub detuning: f64,
    /// δ, rad/s.
    pub delta_env: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub gate: String,
    pub e_ro: f64,
    pub e_decay: f64,
    pub e_bl: f64,
    pub fidelity: f64,
    /// T_Ryd, s.
    pub dwell: f64,
    pub tau: f64,
    pub inputs: BudgetInputs,
}

/// E_ro from the simulated matrix, E_decay from its dwell, E_bl from the
/// blocked inputs; fidelity = 1 − ΣE.
pub fn assemble_budget(result: &GateResult, ideal: &DMatrix<C64>, inputs: &BudgetInputs) -> Result<ErrorBudget> {
    let f = average_fidelity(ideal, &result.matrix)?;
    let e_ro = (1.0 - f).max(0.0);
    let e_decay = decay_error(result.dwell, inputs.tau)?;
    let e_bl = blockade_error(inputs.kappa0, inputs.v, result.blocked_inputs, result.matrix.ncols())?;
    Ok(ErrorBudget {
        gate: result.gate.clone(),
        e_ro,
        e_decay,
        e_bl,
        fidelity: 1.0 - e_ro - e_decay - e_bl,
        dwell: result.dwell,
        tau: inputs.tau,
        inputs: *inputs,
    })
}

/// Budgets of gates applied in sequence; fidelity is their product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeBudget {
    pub parts: Vec<ErrorBudget>,
    pub fidelity: f64,
    /// Average fidelity of the composed simulated matrix, decay-free.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulated_fidelity: Option<f64>,
}

pub fn compose_budgets(parts: Vec<ErrorBudget>) -> CompositeBudget {
    let fidelity = parts.iter().map(|b| b.fidelity).product();
    CompositeBudget { parts, fidelity, simulated_fidelity: None }
}
