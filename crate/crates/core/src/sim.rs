//! Execution of pulse schedules on single-atom or joint bases.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::protocols::PulseSchedule;
use crate::quantum::{evolve, Atom, CompiledHamiltonian, DiagonalTerm, Hamiltonian, Label, Level, LevelBasis, QuantumState};

/// Sampled amplitudes along a schedule.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub amplitudes: Vec<Vec<C64>>,
}

#[derive(Debug, Clone)]
pub struct ScheduleRun {
    pub state: QuantumState,
    /// ∫ (number of Rydberg excitations) dt over the schedule.
    pub dwell: f64,
    pub trajectory: Option<Trajectory>,
}

/// Time integrals collected while running a schedule.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Integrals {
    /// ∫ (number of Rydberg excitations) dt.
    pub dwell: f64,
    /// ∫ (population with both atoms in Rydberg levels) dt.
    pub double_rydberg: f64,
}

/// A schedule compiled against one basis, reusable across initial states.
#[derive(Debug, Clone)]
pub struct Simulator {
    basis: Arc<LevelBasis>,
    segments: Vec<(CompiledHamiltonian, f64)>,
    weights: Vec<f64>,
    double: Vec<f64>,
}

impl Simulator {
    pub fn new(schedule: &PulseSchedule, basis: Arc<LevelBasis>, diagonals: &[DiagonalTerm]) -> Result<Self> {
        schedule.validate()?;
        let mut segments = Vec::with_capacity(schedule.segments.len());
        for (i, seg) in schedule.segments.iter().enumerate() {
            let h = Hamiltonian {
                couplings: seg.terms.clone(),
                // Interactions act throughout; attach them to every segment.
                diagonals: diagonals.to_vec(),
            };
            let compiled = CompiledHamiltonian::new(&h, &basis).map_err(|e| match e {
                Error::Basis(m) => Error::Basis(format!("segment {i} ({}): {m}", seg.label)),
                other => other,
            })?;
            segments.push((compiled, seg.duration));
        }
        let weights = basis.labels().iter().map(|l| l.rydberg_count() as f64).collect();
        let double = basis.labels().iter().map(|l| f64::from(u8::from(l.rydberg_count() >= 2))).collect();
        Ok(Simulator { basis, segments, weights, double })
    }

    pub fn basis(&self) -> &Arc<LevelBasis> {
        &self.basis
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.1).sum()
    }

    /// Propagates `amps` through all segments; returns the Rydberg integrals
    /// and, when `sample_dt` is set, samples on the grid `k·sample_dt` plus the end.
    pub fn run(&self, amps: &mut [C64], tol: f64, sample_dt: Option<f64>) -> Result<(Integrals, Option<Trajectory>)> {
        if let Some(dt) = sample_dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Param("sample interval must be positive".into()));
            }
            if self.duration() / dt > 1e7 {
                return Err(Error::Param("more than 10^7 samples requested".into()));
            }
        }
        let mut traj = sample_dt.map(|_| Trajectory::default());
        let total = self.duration();
        let grid: Vec<f64> = match sample_dt {
            Some(dt) => {
                let n = (total / dt).floor() as usize;
                let mut g: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
                if total - g[n] > 1e-12 * total.max(1e-300) {
                    g.push(total);
                }
                g
            }
            None => vec![],
        };
        let mut acc = Integrals::default();
        let mut start = 0.0;
        for (k, (h, d)) in self.segments.iter().enumerate() {
            let end = start + d;
            let local: Vec<f64> = grid
                .iter()
                .filter(|&&s| if k == 0 { s >= start && s <= end } else { s > start && s <= end })
                .map(|&s| (s - start).clamp(0.0, *d))
                .collect();
            let ev = evolve(h, amps, 0.0, *d, tol, &[&self.weights, &self.double], &local, |t, y| {
                if let Some(tr) = traj.as_mut() {
                    tr.times.push(start + t);
                    tr.amplitudes.push(y.to_vec());
                }
            })?;
            acc.dwell += ev.quadratures[0];
            acc.double_rydberg += ev.quadratures[1];
            start = end;
        }
        Ok((acc, traj))
    }
}

/// Basis with the given levels on one atom, frame energies from `schedule`.
pub fn schedule_basis(schedule: &PulseSchedule, atom: Atom, extra: &[Level]) -> Result<LevelBasis> {
    let mut levels = extra.to_vec();
    for l in schedule.levels(atom) {
        if !levels.contains(&l) {
            levels.push(l);
        }
    }
    let energies = levels
        .iter()
        .map(|l| schedule.frame.iter().filter(|f| f.atom == atom && f.level == *l).map(|f| f.energy).sum())
        .collect();
    LevelBasis::single(atom, &levels)?.with_frame_energies(energies)
}

/// Runs a single-atom schedule from `state` (its basis must cover the levels
/// the schedule drives).
pub fn run_schedule(schedule: &PulseSchedule, state: &QuantumState, tol: f64, sample_dt: Option<f64>) -> Result<ScheduleRun> {
    let sim = Simulator::new(schedule, state.basis.clone(), &[])?;
    let mut amps: Vec<C64> = state.amplitudes.iter().copied().collect();
    let (acc, trajectory) = sim.run(&mut amps, tol, sample_dt)?;
    Ok(ScheduleRun { state: QuantumState::new(state.basis.clone(), DVector::from_vec(amps))?, dwell: acc.dwell, trajectory })
}

/// Runs a single-atom schedule starting in `initial`, on the basis of all
/// levels the schedule touches.
pub fn run_from_level(
    schedule: &PulseSchedule,
    atom: Atom,
    initial: Level,
    tol: f64,
    sample_dt: Option<f64>,
) -> Result<ScheduleRun> {
    let basis = Arc::new(schedule_basis(schedule, atom, &[initial])?);
    let psi = QuantumState::basis_state(basis, &Label(vec![initial]))?;
    run_schedule(schedule, &psi, tol, sample_dt)
}
