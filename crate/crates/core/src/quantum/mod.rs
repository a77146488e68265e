//! State vectors on small labeled bases and their propagation under
//! time-dependent Hamiltonians.

mod basis;
mod drive;
pub mod ode;
mod tableau;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use basis::{Atom, Electronic, Label, Level, LevelBasis, MAX_LEVELS};
pub use drive::{Drive, Envelope, Window};

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub basis: Arc<LevelBasis>,
    pub amplitudes: DVector<C64>,
}

impl QuantumState {
    pub fn new(basis: Arc<LevelBasis>, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::Basis(format!("{} amplitudes for a basis of {} levels", amplitudes.len(), basis.len())));
        }
        Ok(QuantumState { basis, amplitudes })
    }

    pub fn basis_state(basis: Arc<LevelBasis>, label: &Label) -> Result<Self> {
        let i = basis.index_of(label).ok_or_else(|| Error::Basis(format!("no level {label}")))?;
        let mut amps = DVector::zeros(basis.len());
        amps[i] = C64::new(1.0, 0.0);
        QuantumState::new(basis, amps)
    }

    /// Normalized superposition of `(label, amplitude)` pairs.
    pub fn superposition(basis: Arc<LevelBasis>, parts: &[(Label, C64)]) -> Result<Self> {
        let mut amps = DVector::zeros(basis.len());
        for (l, a) in parts {
            let i = basis.index_of(l).ok_or_else(|| Error::Basis(format!("no level {l}")))?;
            amps[i] += a;
        }
        let n = amps.norm();
        if n == 0.0 {
            return Err(Error::Param("zero superposition".into()));
        }
        QuantumState::new(basis, amps / C64::new(n, 0.0))
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn amplitude(&self, label: &Label) -> Option<C64> {
        self.basis.index_of(label).map(|i| self.amplitudes[i])
    }

    pub fn population(&self, label: &Label) -> Option<f64> {
        self.amplitude(label).map(|a| a.norm_sqr())
    }

    /// Total population of levels with at least one Rydberg excitation.
    pub fn rydberg_population(&self) -> f64 {
        self.basis
            .labels()
            .iter()
            .zip(self.amplitudes.iter())
            .filter(|(l, _)| l.rydberg_count() > 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// ⟨a|b⟩.
pub fn overlap(a: &QuantumState, b: &QuantumState) -> Result<C64> {
    if a.basis != b.basis {
        return Err(Error::Basis("overlap of states on different bases".into()));
    }
    Ok(a.amplitudes.dotc(&b.amplitudes))
}

pub fn tensor_product(a: &QuantumState, b: &QuantumState) -> Result<QuantumState> {
    let basis = a.basis.tensor(&b.basis)?;
    let amps = a.amplitudes.kronecker(&b.amplitudes);
    QuantumState::new(Arc::new(basis), amps)
}

/// Laser coupling between two levels of one atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianTerm {
    pub atom: Atom,
    pub lower: Level,
    pub upper: Level,
    pub drive: Drive,
}

impl HamiltonianTerm {
    pub fn new(atom: Atom, lower: Level, upper: Level, drive: Drive) -> Self {
        HamiltonianTerm { atom, lower, upper, drive }
    }

    pub fn name(&self) -> String {
        format!("{:?}:{}-{}", self.atom, self.lower, self.upper)
    }
}

/// Constant real energy on every basis label that carries all `levels`,
/// e.g. a Rydberg-Rydberg interaction when two levels are listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalTerm {
    pub levels: Vec<(Atom, Level)>,
    pub energy: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    pub couplings: Vec<HamiltonianTerm>,
    #[serde(default)]
    pub diagonals: Vec<DiagonalTerm>,
}

impl Hamiltonian {
    pub fn new(couplings: Vec<HamiltonianTerm>) -> Self {
        Hamiltonian { couplings, diagonals: vec![] }
    }
}

/// Hamiltonian lowered onto a concrete basis.
#[derive(Debug, Clone)]
pub struct CompiledHamiltonian {
    dim: usize,
    diag: Vec<f64>,
    // (upper index, lower index, drive index)
    pairs: Vec<(usize, usize, usize)>,
    drives: Vec<Drive>,
    names: Vec<String>,
}

impl CompiledHamiltonian {
    pub fn new(h: &Hamiltonian, basis: &LevelBasis) -> Result<Self> {
        let mut diag = basis.frame_energies().to_vec();
        for d in &h.diagonals {
            if !d.energy.is_finite() {
                return Err(Error::NonHermitian("diagonal energy must be finite and real".into()));
            }
            let slots = d
                .levels
                .iter()
                .map(|(a, l)| {
                    basis
                        .atom_slot(*a)
                        .filter(|_| basis.contains_level(*a, *l))
                        .map(|s| (s, *l))
                        .ok_or_else(|| Error::Basis(format!("diagonal term on missing level {l} of {a:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            for (i, lab) in basis.labels().iter().enumerate() {
                if slots.iter().all(|(s, l)| lab.0[*s] == *l) {
                    diag[i] += d.energy;
                }
            }
        }
        let mut pairs = vec![];
        let mut drives = vec![];
        let mut names = vec![];
        for term in &h.couplings {
            if term.lower == term.upper {
                return Err(Error::NonHermitian(format!("coupling {} puts a complex drive on the diagonal", term.name())));
            }
            term.drive.validate()?;
            let slot = basis
                .atom_slot(term.atom)
                .ok_or_else(|| Error::Basis(format!("term {} addresses an absent atom", term.name())))?;
            for lvl in [term.lower, term.upper] {
                if !basis.contains_level(term.atom, lvl) {
                    return Err(Error::Basis(format!("term {} uses level {lvl} not in basis", term.name())));
                }
            }
            let k = drives.len();
            drives.push(term.drive);
            names.push(term.name());
            for (i, lab) in basis.labels().iter().enumerate() {
                if lab.0[slot] != term.lower {
                    continue;
                }
                let mut up = lab.clone();
                up.0[slot] = term.upper;
                // Partners removed from the basis (blockade) drop the coupling.
                if let Some(j) = basis.index_of(&up) {
                    pairs.push((j, i, k));
                }
            }
        }
        Ok(CompiledHamiltonian { dim: basis.len(), diag, pairs, drives, names })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn drive_values(&self, t: f64, out: &mut [C64]) -> Result<()> {
        for (k, d) in self.drives.iter().enumerate() {
            let v = d.value(t);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite { term: self.names[k].clone(), t });
            }
            out[k] = v;
        }
        Ok(())
    }

    /// Dense H(t).
    pub fn matrix(&self, t: f64) -> Result<DMatrix<C64>> {
        let mut vals = vec![C64::new(0.0, 0.0); self.drives.len()];
        self.drive_values(t, &mut vals)?;
        let mut m = DMatrix::from_diagonal(&DVector::from_iterator(self.dim, self.diag.iter().map(|&e| C64::new(e, 0.0))));
        for &(u, l, k) in &self.pairs {
            m[(u, l)] += vals[k];
            m[(l, u)] += vals[k].conj();
        }
        Ok(m)
    }

    /// Largest |H − H†| entry at time `t`.
    pub fn hermiticity_defect(&self, t: f64) -> Result<f64> {
        let m = self.matrix(t)?;
        let d = &m - m.adjoint();
        Ok(d.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    /// Sorted drive-window edges strictly inside `(t0, t1)`.
    pub fn breakpoints(&self, t0: f64, t1: f64) -> Vec<f64> {
        let mut b: Vec<f64> =
            self.drives.iter().filter_map(|d| d.breakpoints()).flat_map(|(a, b)| [a, b]).filter(|&x| x > t0 && x < t1).collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// dy = −i H(t) y on the first `dim` components; component `dim + k`
    /// accumulates Σ wₖᵢ|yᵢ|² for each weight vector.
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64], vals: &mut [C64], weights: &[&[f64]]) -> Result<()> {
        self.drive_values(t, vals)?;
        for i in 0..self.dim {
            dy[i] = y[i] * self.diag[i];
        }
        for &(u, l, k) in &self.pairs {
            let v = vals[k];
            dy[u] += v * y[l];
            dy[l] += v.conj() * y[u];
        }
        for z in dy.iter_mut().take(self.dim) {
            *z = C64::new(z.im, -z.re);
        }
        for (k, w) in weights.iter().enumerate() {
            let acc: f64 = y.iter().zip(w.iter()).map(|(a, w)| w * a.norm_sqr()).sum();
            dy[self.dim + k] = C64::new(acc, 0.0);
        }
        Ok(())
    }
}

/// Result of [`evolve`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Evolution {
    /// ∫ Σ wᵢ|ψᵢ|² dt for each supplied weight vector.
    pub quadratures: Vec<f64>,
    pub steps: usize,
}

/// Propagates raw amplitudes in place from `t0` to `t1`, splitting the
/// integration at drive-window edges. `on_stop` receives the state at each
/// time of `stops` inside `[t0, t1]`.
#[allow(clippy::too_many_arguments)]
pub fn evolve(
    h: &CompiledHamiltonian,
    amps: &mut [C64],
    t0: f64,
    t1: f64,
    tol: f64,
    weights: &[&[f64]],
    stops: &[f64],
    mut on_stop: impl FnMut(f64, &[C64]),
) -> Result<Evolution> {
    if !(tol > 0.0 && tol <= 1e-4) {
        return Err(Error::Param(format!("tolerance {tol} outside (0, 1e-4]")));
    }
    if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
        return Err(Error::Param(format!("bad time interval [{t0}, {t1}]")));
    }
    if amps.len() != h.dim {
        return Err(Error::Basis("state dimension does not match Hamiltonian".into()));
    }
    if weights.iter().any(|w| w.len() != h.dim) {
        return Err(Error::Basis("one weight per level required".into()));
    }
    let mut y = amps.to_vec();
    y.resize(h.dim + weights.len(), C64::new(0.0, 0.0));
    let mut vals = vec![C64::new(0.0, 0.0); h.drives.len()];
    let solver = ode::Dop853::new(tol);
    let mut edges = vec![t0];
    edges.extend(h.breakpoints(t0, t1));
    edges.push(t1);
    let mut steps = 0;
    for (i, w) in edges.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let piece_stops: Vec<f64> =
            stops.iter().copied().filter(|&s| if i == 0 { s >= a && s <= b } else { s > a && s <= b }).collect();
        if a == b {
            for &s in &piece_stops {
                on_stop(s, &y[..h.dim]);
            }
            continue;
        }
        let stats = solver.integrate(
            |t, y, dy| h.rhs(t, y, dy, &mut vals, weights),
            a,
            b,
            &mut y,
            h.dim,
            &piece_stops,
            |t, y| on_stop(t, &y[..h.dim]),
        )?;
        steps += stats.accepted;
    }
    for z in &y[..h.dim] {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Numerical("non-finite amplitude after propagation".into()));
        }
    }
    amps.copy_from_slice(&y[..h.dim]);
    Ok(Evolution { quadratures: y[h.dim..].iter().map(|z| z.re).collect(), steps })
}

/// ψ(t1) from ψ(t0) under `h`.
pub fn propagate(state: &QuantumState, h: &Hamiltonian, t0: f64, t1: f64, tol: f64) -> Result<QuantumState> {
    let compiled = CompiledHamiltonian::new(h, &state.basis)?;
    let mut amps: Vec<C64> = state.amplitudes.iter().copied().collect();
    evolve(&compiled, &mut amps, t0, t1, tol, &[], &[], |_, _| {})?;
    QuantumState::new(state.basis.clone(), DVector::from_vec(amps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn two_level() -> Arc<LevelBasis> {
        Arc::new(LevelBasis::single(Atom::Control, &[Level::g(0), Level::r(0)]).unwrap())
    }

    fn lab(l: Level) -> Label {
        Label(vec![l])
    }

    #[test]
    fn resonant_pi_pulse() {
        let b = two_level();
        let psi = QuantumState::basis_state(b, &lab(Level::g(0))).unwrap();
        let omega = 3.0;
        let h = Hamiltonian::new(vec![HamiltonianTerm::new(
            Atom::Control,
            Level::g(0),
            Level::r(0),
            Drive::new(Envelope::Constant { omega }),
        )]);
        let out = propagate(&psi, &h, 0.0, PI / omega, 1e-12).unwrap();
        assert!(out.amplitudes[0].norm() < 1e-10);
        assert!((out.amplitudes[1] - C64::new(0.0, -1.0)).norm() < 1e-10);
    }

    #[test]
    fn zero_drive_is_identity() {
        let b = two_level();
        let psi =
            QuantumState::superposition(b, &[(lab(Level::g(0)), C64::new(0.6, 0.0)), (lab(Level::r(0)), C64::new(0.0, 0.8))])
                .unwrap();
        let out = propagate(&psi, &Hamiltonian::default(), 0.0, 17.0, 1e-10).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn diagonal_on_coupling_is_rejected() {
        let b = two_level();
        let h = Hamiltonian::new(vec![HamiltonianTerm::new(
            Atom::Control,
            Level::g(0),
            Level::g(0),
            Drive::new(Envelope::Constant { omega: 1.0 }),
        )]);
        assert!(matches!(CompiledHamiltonian::new(&h, &b), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn non_finite_drive_names_term() {
        let b = two_level();
        let h = Hamiltonian::new(vec![HamiltonianTerm::new(
            Atom::Control,
            Level::g(0),
            Level::r(0),
            Drive::new(Envelope::Sine { kappa: 1e308, delta_env: 1.0 }).scaled(1e10),
        )]);
        let psi = QuantumState::basis_state(b, &lab(Level::g(0))).unwrap();
        match propagate(&psi, &h, 0.0, 1.0, 1e-10) {
            Err(Error::NonFinite { term, .. }) => assert!(term.contains("g0-r0")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_level_is_rejected() {
        let b = two_level();
        let h = Hamiltonian::new(vec![HamiltonianTerm::new(
            Atom::Control,
            Level::g(1),
            Level::r(1),
            Drive::new(Envelope::Constant { omega: 1.0 }),
        )]);
        let psi = QuantumState::basis_state(b, &lab(Level::g(0))).unwrap();
        assert!(matches!(propagate(&psi, &h, 0.0, 1.0, 1e-10), Err(Error::Basis(_))));
    }

    #[test]
    fn overlap_and_tensor() {
        let b = two_level();
        let g = QuantumState::basis_state(b.clone(), &lab(Level::g(0))).unwrap();
        let r = QuantumState::basis_state(b, &lab(Level::r(0))).unwrap();
        assert_eq!(overlap(&g, &g).unwrap(), C64::new(1.0, 0.0));
        assert_eq!(overlap(&g, &r).unwrap(), C64::new(0.0, 0.0));

        let t = Arc::new(LevelBasis::single(Atom::Target, &[Level::g(0), Level::g(1)]).unwrap());
        let s = C64::new(0.5f64.sqrt(), 0.0);
        let plus = QuantumState::superposition(t.clone(), &[(lab(Level::g(0)), s), (lab(Level::g(1)), s)]).unwrap();
        let j = tensor_product(&g, &plus).unwrap();
        assert_eq!(j.basis.len(), 4);
        assert!((j.norm() - 1.0).abs() < 1e-15);
        assert!((j.amplitude(&Label(vec![Level::g(0), Level::g(1)])).unwrap() - s).norm() < 1e-15);
        assert!(tensor_product(&g, &g).is_err());
    }
}
