use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::atomic::clock_transition_zeeman_detuning;
use crate::error::{Error, Result};
use crate::fidelity::average_fidelity;
use crate::protocols::{PulseSchedule, PulseSegment};
use crate::pulse::{phase_shift_plan, SinPulseParams};
use crate::quantum::{Atom, Drive, Envelope, HamiltonianTerm, Label, Level, DEFAULT_TOL};
use crate::sim::{schedule_basis, Simulator};

/// Splitting (rad/s) between the m_F = I and I − 1 ground-clock lines at
/// field `b_gauss`.
pub fn electronic_transfer_splitting(b_gauss: f64) -> f64 {
    clock_transition_zeeman_detuning(1.0, b_gauss)
}

/// Single-atom operations on (g0, g1, c0, c1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SingleAtomOp {
    /// e^{iθ} on the nuclear |1⟩ of both manifolds, via detuned cycles to p1 and P1.
    NuclearPhase { theta: f64, omega_p: f64, delta_p: f64 },
    /// e^{iθ} on the clock manifold.
    ElectronicPhase { theta: f64, omega_p: f64, delta_p: f64 },
    /// −1 on c1 only.
    IntraAtomCz { omega_p: f64, delta_p: f64 },
    /// R_x(θ) between the nuclear states, as an effective two-photon coupling.
    NuclearRaman { theta: f64, omega_r: f64 },
    /// Rotation by `angle` between ground and clock in both nuclear blocks,
    /// using the two-field sinusoidal scheme with splitting from `b_gauss`.
    ElectronicTransfer { angle: f64, kappa: f64, delta_env: f64, b_gauss: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleAtomResult {
    pub op: SingleAtomOp,
    #[serde(with = "super::cmatrix")]
    pub matrix: DMatrix<C64>,
    #[serde(with = "super::cmatrix")]
    pub ideal: DMatrix<C64>,
    pub fidelity: f64,
    pub duration: f64,
}

fn qubit(k: usize) -> Level {
    Level::qubit((k / 2) as u8, (k % 2) as u8)
}

fn phase_terms(theta: f64, omega_p: f64, delta_p: f64, pairs: &[(Level, Level)]) -> Result<(Vec<HamiltonianTerm>, f64)> {
    let plan = phase_shift_plan(theta, omega_p, delta_p)?;
    if plan.cycles == 0 {
        return Ok((vec![], 0.0));
    }
    let d = Drive::new(Envelope::Constant { omega: plan.omega_p }).detuned(delta_p).windowed(0.0, plan.t_pc);
    let terms = pairs.iter().map(|&(l, u)| HamiltonianTerm::new(Atom::Control, l, u, d)).collect();
    Ok((terms, plan.t_pc))
}

fn diag4(f: impl Fn(u8, u8) -> C64) -> DMatrix<C64> {
    DMatrix::from_fn(4, 4, |i, j| if i == j { f((i / 2) as u8, (i % 2) as u8) } else { C64::new(0.0, 0.0) })
}

pub fn single_atom_op(op: &SingleAtomOp) -> Result<SingleAtomResult> {
    single_atom_op_with(op, DEFAULT_TOL)
}

pub fn single_atom_op_with(op: &SingleAtomOp, tol: f64) -> Result<SingleAtomResult> {
    let z = C64::new(0.0, 0.0);
    let (terms, duration, ideal) = match *op {
        SingleAtomOp::NuclearPhase { theta, omega_p, delta_p } => {
            let (t, d) = phase_terms(theta, omega_p, delta_p, &[(Level::g(1), Level::p(1)), (Level::c(1), Level::big_p(1))])?;
            (t, d, diag4(|_, n| if n == 1 { C64::from_polar(1.0, theta) } else { C64::new(1.0, 0.0) }))
        }
        SingleAtomOp::ElectronicPhase { theta, omega_p, delta_p } => {
            let (t, d) = phase_terms(theta, omega_p, delta_p, &[(Level::c(0), Level::big_p(0)), (Level::c(1), Level::big_p(1))])?;
            (t, d, diag4(|e, _| if e == 1 { C64::from_polar(1.0, theta) } else { C64::new(1.0, 0.0) }))
        }
        SingleAtomOp::IntraAtomCz { omega_p, delta_p } => {
            let (t, d) = phase_terms(PI, omega_p, delta_p, &[(Level::c(1), Level::big_p(1))])?;
            (t, d, diag4(|e, n| C64::new(if e == 1 && n == 1 { -1.0 } else { 1.0 }, 0.0)))
        }
        SingleAtomOp::NuclearRaman { theta, omega_r } => {
            if !(omega_r > 0.0 && omega_r.is_finite()) {
                return Err(Error::Param("Raman coupling must be positive".into()));
            }
            let t = theta.abs() / omega_r;
            let d =
                Drive::new(Envelope::Constant { omega: omega_r }).with_phase(if theta < 0.0 { PI } else { 0.0 }).windowed(0.0, t);
            let terms = vec![
                HamiltonianTerm::new(Atom::Control, Level::g(0), Level::g(1), d),
                HamiltonianTerm::new(Atom::Control, Level::c(0), Level::c(1), d),
            ];
            let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            let ideal = DMatrix::from_fn(4, 4, |i, j| match (i / 2 == j / 2, i == j) {
                (true, true) => C64::new(c, 0.0),
                (true, false) => C64::new(0.0, -s),
                _ => z,
            });
            (terms, t, ideal)
        }
        SingleAtomOp::ElectronicTransfer { angle, kappa, delta_env, b_gauss } => {
            let delta = electronic_transfer_splitting(b_gauss);
            let p = SinPulseParams::new(kappa, delta_env, delta);
            p.validate()?;
            let t = p.duration(angle)?;
            let env = Envelope::Sine { kappa, delta_env };
            let d = |det: f64| Drive::new(env).detuned(det).windowed(0.0, t);
            let a = Atom::Control;
            let terms = vec![
                HamiltonianTerm::new(a, Level::g(0), Level::c(0), d(0.0)),
                HamiltonianTerm::new(a, Level::g(0), Level::c(0), d(-delta)),
                HamiltonianTerm::new(a, Level::g(1), Level::c(1), d(delta)),
                HamiltonianTerm::new(a, Level::g(1), Level::c(1), d(0.0)),
            ];
            let (c, s) = (angle.cos(), angle.sin());
            // Basis index 2e + n: blocks pair k with k ± 2.
            let ideal = DMatrix::from_fn(4, 4, |i, j| match (i % 2 == j % 2, i == j, i > j) {
                (true, true, _) => C64::new(c, 0.0),
                (true, false, true) => C64::new(s, 0.0),
                (true, false, false) => C64::new(-s, 0.0),
                _ => z,
            });
            (terms, t, ideal)
        }
    };
    let matrix = if terms.is_empty() || duration == 0.0 {
        DMatrix::identity(4, 4)
    } else {
        let seg = PulseSegment { atom: Atom::Control, duration, terms, label: "single-atom".into() };
        let schedule = PulseSchedule::new(vec![seg]);
        let levels: Vec<Level> = (0..4).map(qubit).collect();
        let basis = Arc::new(schedule_basis(&schedule, Atom::Control, &levels)?);
        let sim = Simulator::new(&schedule, basis.clone(), &[])?;
        let idx: Vec<usize> = (0..4).map(|k| basis.index_of(&Label(vec![qubit(k)])).expect("qubit level present")).collect();
        let mut m = DMatrix::zeros(4, 4);
        for k in 0..4 {
            let mut amps = vec![z; basis.len()];
            amps[idx[k]] = C64::new(1.0, 0.0);
            sim.run(&mut amps, tol, None)?;
            for j in 0..4 {
                m[(j, k)] = amps[idx[j]];
            }
        }
        m
    };
    let fidelity = average_fidelity(&ideal, &matrix)?;
    Ok(SingleAtomResult { op: *op, matrix, ideal, fidelity, duration })
}
