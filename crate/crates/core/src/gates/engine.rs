use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BasisOrder, BlockadeModel, GateOptions, GateResult};
use crate::error::{Error, Result};
use crate::protocols::PulseSchedule;
use crate::quantum::{Atom, DiagonalTerm, Label, Level, LevelBasis};
use crate::sim::{schedule_basis, Simulator};

/// Total Rydberg excitation (both atoms) sampled along one input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RydbergTrace {
    pub input: String,
    pub times: Vec<f64>,
    pub rydberg: Vec<f64>,
}

pub(super) struct RawRun {
    order: BasisOrder,
    labels: Vec<Label>,
    matrix: DMatrix<C64>,
    dwell: Vec<f64>,
    double: Vec<f64>,
    traces: Vec<RydbergTrace>,
}

fn qubit_levels() -> Vec<Level> {
    (0..4).map(|k| Level::qubit(k / 2, k % 2)).collect()
}

pub(super) fn joint_basis(schedule: &PulseSchedule, blockade: &BlockadeModel) -> Result<(LevelBasis, Vec<DiagonalTerm>)> {
    let c = schedule_basis(schedule, Atom::Control, &qubit_levels())?;
    let t = schedule_basis(schedule, Atom::Target, &qubit_levels())?;
    let joint = c.tensor(&t)?;
    match blockade {
        BlockadeModel::Perfect => Ok((joint.filtered(|l| l.rydberg_count() < 2)?, vec![])),
        BlockadeModel::Finite { v } => {
            let ryd = |b: &LevelBasis| -> Vec<Level> { b.labels().iter().map(|l| l.0[0]).filter(|l| l.is_rydberg()).collect() };
            let mut diag = vec![];
            for rc in ryd(&c) {
                for rt in ryd(&t) {
                    diag.push(DiagonalTerm { levels: vec![(Atom::Control, rc), (Atom::Target, rt)], energy: *v });
                }
            }
            Ok((joint, diag))
        }
    }
}

pub(super) fn simulate(
    schedule: &PulseSchedule,
    order: BasisOrder,
    blockade: &BlockadeModel,
    opts: &GateOptions,
) -> Result<RawRun> {
    blockade.validate()?;
    let (basis, diag) = joint_basis(schedule, blockade)?;
    let basis = Arc::new(basis);
    let sim = Simulator::new(schedule, basis.clone(), &diag)?;
    let labels: Vec<Label> = (0..16)
        .map(|k| {
            let (c, t) = order.levels(k);
            Label(vec![c, t])
        })
        .collect();
    let idx: Vec<usize> = labels
        .iter()
        .map(|l| basis.index_of(l).ok_or_else(|| Error::Basis(format!("input {l} missing"))))
        .collect::<Result<_>>()?;
    let counts: Vec<f64> = basis.labels().iter().map(|l| l.rydberg_count() as f64).collect();

    let cols: Vec<_> = (0..16)
        .into_par_iter()
        .map(|k| {
            let mut amps = vec![C64::new(0.0, 0.0); basis.len()];
            amps[idx[k]] = C64::new(1.0, 0.0);
            let (acc, traj) = sim.run(&mut amps, opts.tol, opts.sample_dt)?;
            let col: Vec<C64> = idx.iter().map(|&i| amps[i]).collect();
            let trace = traj.map(|tr| RydbergTrace {
                input: labels[k].to_string(),
                rydberg: tr.amplitudes.iter().map(|a| a.iter().zip(&counts).map(|(z, w)| w * z.norm_sqr()).sum()).collect(),
                times: tr.times,
            });
            Ok((col, acc, trace))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut matrix = DMatrix::zeros(16, 16);
    let mut dwell = Vec::with_capacity(16);
    let mut double = Vec::with_capacity(16);
    let mut traces = vec![];
    for (k, (col, acc, trace)) in cols.into_iter().enumerate() {
        for (j, z) in col.into_iter().enumerate() {
            matrix[(j, k)] = z;
        }
        dwell.push(acc.dwell);
        double.push(acc.double_rydberg);
        traces.extend(trace);
    }
    Ok(RawRun { order, labels, matrix, dwell, double, traces })
}

impl RawRun {
    /// Applies e^{−i·row_phase} to each row and packages the result.
    pub(super) fn finish(
        self,
        gate: &str,
        ideal: DMatrix<C64>,
        row_phase: Vec<f64>,
        duration: f64,
        blocked_inputs: usize,
    ) -> GateResult {
        let raw_phases = (0..16).map(|k| self.matrix[(k, k)].arg()).collect();
        let mut matrix = self.matrix;
        for (j, ph) in row_phase.iter().enumerate() {
            let f = C64::from_polar(1.0, -ph);
            for k in 0..16 {
                matrix[(j, k)] *= f;
            }
        }
        let leakage = (0..16).map(|k| 1.0 - matrix.column(k).norm_squared()).collect();
        GateResult {
            gate: gate.into(),
            ordering: self.order,
            ordering_rule: self.order.description().into(),
            labels: self.labels.iter().map(ToString::to_string).collect(),
            matrix,
            ideal,
            raw_phases,
            compensation: row_phase,
            dwell: self.dwell.iter().sum::<f64>() / 16.0,
            dwell_per_input: self.dwell,
            leakage,
            double_rydberg: self.double,
            blocked_inputs,
            duration,
            trajectories: self.traces,
        }
    }
}
