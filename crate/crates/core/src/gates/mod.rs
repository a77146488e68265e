//! Two-atom gate sequences simulated over the 16 computational inputs.

mod engine;
mod single;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocols::{
    nuclear_segment, sin_excitation_segment, two_step_deexcitation, two_step_excitation, CouplingFactors, NuclearOptions,
    NuclearPulse, PulseOptions, PulseSchedule, PulseSegment,
};
use crate::pulse::{phase_shift_plan, RectPulseParams, SinPulseParams};
use crate::quantum::{Atom, Drive, Envelope, HamiltonianTerm, Level, DEFAULT_TOL};
use crate::sim::run_from_level;

pub use engine::RydbergTrace;
pub use single::{electronic_transfer_splitting, single_atom_op, single_atom_op_with, SingleAtomOp, SingleAtomResult};

/// Rydberg-Rydberg interaction model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BlockadeModel {
    /// Doubly excited states removed from the basis.
    Perfect,
    /// Interaction energy `v` (rad/s) on every doubly excited state.
    Finite { v: f64 },
}

impl BlockadeModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            BlockadeModel::Perfect => Ok(()),
            BlockadeModel::Finite { v } if *v > 0.0 && v.is_finite() => Ok(()),
            BlockadeModel::Finite { v } => Err(Error::Param(format!("blockade shift must be positive, got {v}"))),
        }
    }
}

/// How the control atom is brought back from the Rydberg level in the
/// sinusoidal sequences.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deexcitation {
    /// Same pulse again.
    Repeat,
    /// The excitation pulse played backwards, H(T − t).
    #[default]
    TimeReversed,
}

/// Sinusoidal pulses of a gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinGateParams {
    pub pulse: SinPulseParams,
    #[serde(default)]
    pub factors: CouplingFactors,
    #[serde(default)]
    pub deexcitation: Deexcitation,
}

impl SinGateParams {
    pub fn new(pulse: SinPulseParams) -> Self {
        SinGateParams { pulse, factors: CouplingFactors::default(), deexcitation: Deexcitation::default() }
    }

    pub fn with_deexcitation(mut self, d: Deexcitation) -> Self {
        self.deexcitation = d;
        self
    }

    fn reversed(&self) -> bool {
        self.deexcitation == Deexcitation::TimeReversed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ElectronicMethod {
    Sinusoidal(SinGateParams),
    TwoStep(RectPulseParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum NuclearMethod {
    Sinusoidal(SinGateParams),
    Rectangular(RectPulseParams),
}

/// Removal of the spurious detuned-cycle phases.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Compensation {
    /// Raw sequence output.
    None,
    /// Exact phase factors multiplied onto the affected rows.
    #[default]
    Idealized,
    /// A detuned drive on the control atom to auxiliary levels.
    Explicit { omega_p: f64, delta_p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateOptions {
    pub tol: f64,
    /// Sampling interval of the Rydberg-population traces; none when unset.
    pub sample_dt: Option<f64>,
    pub compensation: Compensation,
}

impl Default for GateOptions {
    fn default() -> Self {
        GateOptions { tol: DEFAULT_TOL, sample_dt: None, compensation: Compensation::default() }
    }
}

/// Index conventions of the 16 computational inputs, as (ec, nc, et, nt).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisOrder {
    /// index = 4·(2ec + et) + (2nc + nt)
    ElectronicMajor,
    /// index = 4·(2nc + nt) + (2ec + et)
    NuclearMajor,
    /// index = 8ec + 4nc + 2et + nt
    AtomMajor,
}

impl BasisOrder {
    pub fn bits(self, k: usize) -> (u8, u8, u8, u8) {
        let b = |s: usize| ((k >> s) & 1) as u8;
        match self {
            BasisOrder::ElectronicMajor => (b(3), b(1), b(2), b(0)),
            BasisOrder::NuclearMajor => (b(1), b(3), b(0), b(2)),
            BasisOrder::AtomMajor => (b(3), b(2), b(1), b(0)),
        }
    }

    pub fn index(self, ec: u8, nc: u8, et: u8, nt: u8) -> usize {
        (0..16).find(|&k| self.bits(k) == (ec, nc, et, nt)).expect("bits are 0 or 1")
    }

    pub fn levels(self, k: usize) -> (Level, Level) {
        let (ec, nc, et, nt) = self.bits(k);
        (Level::qubit(ec, nc), Level::qubit(et, nt))
    }

    pub fn description(self) -> &'static str {
        match self {
            BasisOrder::ElectronicMajor => "index = 4*(2*ec+et) + (2*nc+nt)",
            BasisOrder::NuclearMajor => "index = 4*(2*nc+nt) + (2*ec+et)",
            BasisOrder::AtomMajor => "index = 8*ec + 4*nc + 2*et + nt",
        }
    }

    /// Permutation matrix P with P·e_k(self) = e_k'(other).
    pub fn permutation_to(self, other: BasisOrder) -> DMatrix<C64> {
        let mut p = DMatrix::zeros(16, 16);
        for k in 0..16 {
            let (ec, nc, et, nt) = self.bits(k);
            p[(other.index(ec, nc, et, nt), k)] = C64::new(1.0, 0.0);
        }
        p
    }
}

/// Diagonal gate with `sign(ec, nc, et, nt)` on each input.
pub fn diagonal_gate(order: BasisOrder, sign: impl Fn(u8, u8, u8, u8) -> f64) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(16, 16);
    for k in 0..16 {
        let (ec, nc, et, nt) = order.bits(k);
        m[(k, k)] = C64::new(sign(ec, nc, et, nt), 0.0);
    }
    m
}

pub fn ideal_cz_electronic() -> DMatrix<C64> {
    diagonal_gate(BasisOrder::ElectronicMajor, |ec, _, et, _| if ec == 1 && et == 1 { 1.0 } else { -1.0 })
}

pub fn ideal_cz_nuclear() -> DMatrix<C64> {
    diagonal_gate(BasisOrder::NuclearMajor, |_, nc, _, nt| if nc == 1 && nt == 1 { 1.0 } else { -1.0 })
}

/// Both C_Z gates in the electronic-major order.
pub fn ideal_cz_tensor() -> DMatrix<C64> {
    diagonal_gate(BasisOrder::ElectronicMajor, |ec, nc, et, nt| {
        let se = if ec == 1 && et == 1 { 1.0 } else { -1.0 };
        let sn = if nc == 1 && nt == 1 { 1.0 } else { -1.0 };
        se * sn
    })
}

pub fn ideal_cz_cross() -> DMatrix<C64> {
    diagonal_gate(BasisOrder::AtomMajor, |ec, _, _, nt| if ec == 1 && nt == 1 { -1.0 } else { 1.0 })
}

/// Simulated 16×16 gate and its bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateResult {
    pub gate: String,
    pub ordering: BasisOrder,
    pub ordering_rule: String,
    /// "control,target" level labels of rows and columns.
    pub labels: Vec<String>,
    #[serde(with = "cmatrix")]
    pub matrix: DMatrix<C64>,
    #[serde(with = "cmatrix")]
    pub ideal: DMatrix<C64>,
    /// arg of each diagonal entry before compensation.
    pub raw_phases: Vec<f64>,
    /// Phase removed from each row by the compensation.
    pub compensation: Vec<f64>,
    /// T_Ryd: ∫ Σ P_Rydberg dt over both atoms, averaged over the inputs.
    pub dwell: f64,
    pub dwell_per_input: Vec<f64>,
    /// 1 − Σ|column|² per input.
    pub leakage: Vec<f64>,
    /// ∫ P(both atoms Rydberg) dt per input.
    pub double_rydberg: Vec<f64>,
    pub blocked_inputs: usize,
    /// Sequence length without the compensation drive.
    pub duration: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trajectories: Vec<RydbergTrace>,
}

impl GateResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("gate result serialization cannot fail")
    }
}

/// Row-major `[re, im]` pairs.
pub(crate) mod cmatrix {
    use nalgebra::DMatrix;
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<C64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> =
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<C64>, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        Ok(DMatrix::from_fn(n, m, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
    }
}

/// Phase a segment leaves on `level` when started there, measured by
/// running it alone.
fn pulse_phase(seg: &PulseSegment, level: Level, tol: f64) -> Result<f64> {
    let s = PulseSchedule::new(vec![seg.clone()]);
    let run = run_from_level(&s, seg.atom, level, tol, None)?;
    let a = run.state.amplitude(&crate::quantum::Label(vec![level])).ok_or_else(|| Error::Basis(format!("{level} missing")))?;
    Ok(a.arg())
}

fn blocked_inputs() -> usize {
    // The four inputs with the control excited and the target resonant.
    4
}

/// Electronic C_Z: control excitation, target 2π rotation, control
/// de-excitation.
pub fn run_cz_electronic(method: &ElectronicMethod, blockade: &BlockadeModel, opts: &GateOptions) -> Result<GateResult> {
    let schedule = electronic_schedule(method)?;
    let run = engine::simulate(&schedule, BasisOrder::ElectronicMajor, blockade, opts)?;
    Ok(run.finish("cz-electronic", ideal_cz_electronic(), vec![0.0; 16], schedule.duration(), blocked_inputs()))
}

fn electronic_schedule(method: &ElectronicMethod) -> Result<PulseSchedule> {
    Ok(match method {
        ElectronicMethod::Sinusoidal(g) => {
            let c = PulseOptions { atom: Atom::Control, ..Default::default() };
            let t = PulseOptions { atom: Atom::Target, ..Default::default() };
            let back = PulseOptions { time_reversed: g.reversed(), ..c };
            let mut s = PulseSchedule::new(vec![
                sin_excitation_segment(&g.pulse, PI / 2.0, c)?,
                sin_excitation_segment(&g.pulse, PI, t)?,
                sin_excitation_segment(&g.pulse, PI / 2.0, back)?,
            ]);
            s.segments[0].label = "control-excite".into();
            s.segments[1].label = "target-2pi".into();
            s.segments[2].label = "control-deexcite".into();
            s
        }
        ElectronicMethod::TwoStep(p) => {
            let phi = p.two_step_phase();
            two_step_excitation(p, Atom::Control)?
                .then(two_step_excitation(p, Atom::Target)?)
                .then(two_step_deexcitation(p, phi, Atom::Target, 0.0)?)
                .then(two_step_deexcitation(p, phi, Atom::Control, 0.0)?)
        }
    })
}

struct NuclearSequence {
    schedule: PulseSchedule,
    /// Per electronic manifold: detuned phase on the control (both passes)
    /// and on the target (both pulses).
    control_phase: [f64; 2],
    target_phase: [f64; 2],
}

/// Control excitation, two target pulses (the second with Rabi phase −2φ),
/// control de-excitation; `resonant` picks the nuclear state each atom
/// drives resonantly.
fn nuclear_sequence(
    control: Option<(&NuclearPulse, bool)>,
    control_electronic: Option<&SinGateParams>,
    target: &NuclearPulse,
    target_resonant: u8,
    tol: f64,
) -> Result<NuclearSequence> {
    let off_t = 1 - target_resonant;
    let topts = NuclearOptions { atom: Atom::Target, resonant_nuclear: target_resonant, ..Default::default() };
    let t1 = nuclear_segment(target, &topts)?;
    let phi_t = [pulse_phase(&t1, Level::qubit(0, off_t), tol)?, pulse_phase(&t1, Level::qubit(1, off_t), tol)?];
    let t2 =
        nuclear_segment(target, &NuclearOptions { rabi_phase: -2.0 * phi_t[0], clock_rabi_phase: -2.0 * phi_t[1], ..topts })?;
    let phi_t2 = [pulse_phase(&t2, Level::qubit(0, off_t), tol)?, pulse_phase(&t2, Level::qubit(1, off_t), tol)?];

    let (c_exc, c_back, control_phase) = if let Some((pulse, reversed)) = control {
        let copts = NuclearOptions { atom: Atom::Control, ..Default::default() };
        let exc = nuclear_segment(pulse, &copts)?;
        let back = nuclear_segment(pulse, &NuclearOptions { time_reversed: reversed, ..copts })?;
        let mut ph = [0.0; 2];
        for (e, p) in ph.iter_mut().enumerate() {
            let l = Level::qubit(e as u8, 1);
            *p = pulse_phase(&exc, l, tol)? + pulse_phase(&back, l, tol)?;
        }
        (exc, back, ph)
    } else {
        let g = control_electronic.expect("one control kind");
        let c = PulseOptions { atom: Atom::Control, ..Default::default() };
        let exc = sin_excitation_segment(&g.pulse, PI / 2.0, c)?;
        let back = sin_excitation_segment(&g.pulse, PI / 2.0, PulseOptions { rabi_phase: PI, time_reversed: g.reversed(), ..c })?;
        (exc, back, [0.0; 2])
    };
    let mut segs = vec![c_exc, t1, t2, c_back];
    for (s, l) in segs.iter_mut().zip(["control-excite", "target-1", "target-2", "control-deexcite"]) {
        s.label = l.into();
    }
    Ok(NuclearSequence {
        schedule: PulseSchedule::new(segs),
        control_phase,
        target_phase: [phi_t[0] + phi_t2[0], phi_t[1] + phi_t2[1]],
    })
}

fn nuclear_pulse(method: &NuclearMethod) -> (NuclearPulse, bool) {
    match method {
        NuclearMethod::Sinusoidal(g) => (NuclearPulse::Sinusoidal { pulse: g.pulse, factors: g.factors }, g.reversed()),
        // Complete detuned cycles make the repeated rectangle the natural
        // de-excitation.
        NuclearMethod::Rectangular(p) => (NuclearPulse::Rectangular { params: *p }, false),
    }
}

/// Control drive g1↔p1, c1↔P1 imprinting `phases[e]` on |e⟩⊗|1⟩.
fn compensation_segment(phases: [f64; 2], omega_p: f64, delta_p: f64) -> Result<Option<PulseSegment>> {
    let a = Atom::Control;
    let mut terms = vec![];
    let mut duration: f64 = 0.0;
    for (e, ph) in phases.into_iter().enumerate() {
        let plan = phase_shift_plan(ph, omega_p, delta_p)?;
        if plan.cycles == 0 {
            continue;
        }
        let (lower, upper) = if e == 0 { (Level::g(1), Level::p(1)) } else { (Level::c(1), Level::big_p(1)) };
        let d = Drive::new(Envelope::Constant { omega: plan.omega_p }).detuned(delta_p).windowed(0.0, plan.t_pc);
        terms.push(HamiltonianTerm::new(a, lower, upper, d));
        duration = duration.max(plan.t_pc);
    }
    Ok((!terms.is_empty()).then(|| PulseSegment { atom: a, duration, terms, label: "phase-compensation".into() }))
}

/// Nuclear-spin C_Z with compensation of the 4φ-type phases on the rows
/// where the control nuclear spin is 1.
pub fn run_cz_nuclear(method: &NuclearMethod, blockade: &BlockadeModel, opts: &GateOptions) -> Result<GateResult> {
    let (pulse, reversed) = nuclear_pulse(method);
    let seq = nuclear_sequence(Some((&pulse, reversed)), None, &pulse, 0, opts.tol)?;
    let comp = [seq.control_phase[0] + seq.target_phase[0], seq.control_phase[1] + seq.target_phase[1]];
    let order = BasisOrder::NuclearMajor;
    let duration = seq.schedule.duration();
    let mut schedule = seq.schedule;
    let mut row_phase = vec![0.0; 16];
    match opts.compensation {
        Compensation::None => {}
        Compensation::Idealized => {
            for (k, r) in row_phase.iter_mut().enumerate() {
                let (ec, nc, et, _) = order.bits(k);
                if nc == 1 {
                    *r = seq.control_phase[ec as usize] + seq.target_phase[et as usize];
                }
            }
        }
        Compensation::Explicit { omega_p, delta_p } => {
            if let Some(seg) = compensation_segment([-comp[0], -comp[1]], omega_p, delta_p)? {
                schedule.segments.push(seg);
            }
        }
    }
    let run = engine::simulate(&schedule, order, blockade, opts)?;
    let name = match method {
        NuclearMethod::Sinusoidal(_) => "cz-nuclear-sinusoidal",
        NuclearMethod::Rectangular(_) => "cz-nuclear-rectangular",
    };
    let mut res = run.finish(name, ideal_cz_nuclear(), row_phase, duration, blocked_inputs());
    if let Compensation::Explicit { .. } = opts.compensation {
        // The compensation drive is off-resonant from every Rydberg level.
        res.compensation = (0..16)
            .map(|k| {
                let (ec, nc, _, _) = order.bits(k);
                if nc == 1 {
                    comp[ec as usize]
                } else {
                    0.0
                }
            })
            .collect();
    }
    Ok(res)
}

/// Phases the nuclear sequence leaves before compensation, per control
/// electronic manifold: (control, target).
pub fn nuclear_spurious_phases(method: &NuclearMethod, tol: f64) -> Result<([f64; 2], [f64; 2])> {
    let (pulse, reversed) = nuclear_pulse(method);
    let seq = nuclear_sequence(Some((&pulse, reversed)), None, &pulse, 0, tol)?;
    Ok((seq.control_phase, seq.target_phase))
}

/// Electronic C_Z followed by nuclear C_Z (or the reverse), composed from
/// the two simulated gates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorGateResult {
    pub electronic: GateResult,
    pub nuclear: GateResult,
    /// Composite gate in the electronic-major order.
    pub combined: GateResult,
    pub nuclear_first: bool,
}

pub fn run_cz_tensor(
    electronic: &ElectronicMethod,
    nuclear: &NuclearMethod,
    blockade: &BlockadeModel,
    opts: &GateOptions,
    nuclear_first: bool,
) -> Result<TensorGateResult> {
    let (e, n) = rayon::join(|| run_cz_electronic(electronic, blockade, opts), || run_cz_nuclear(nuclear, blockade, opts));
    let (e, n) = (e?, n?);
    let p = BasisOrder::NuclearMajor.permutation_to(BasisOrder::ElectronicMajor);
    let n_in_e = &p * &n.matrix * p.transpose();
    let matrix = if nuclear_first { &e.matrix * &n_in_e } else { &n_in_e * &e.matrix };
    let order = BasisOrder::ElectronicMajor;
    let n_perm = |v: &[f64]| -> Vec<f64> {
        (0..16)
            .map(|k| {
                let (ec, nc, et, nt) = order.bits(k);
                v[BasisOrder::NuclearMajor.index(ec, nc, et, nt)]
            })
            .collect()
    };
    let sum = |a: &[f64], b: Vec<f64>| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<f64>>();
    let dwell_per_input = sum(&e.dwell_per_input, n_perm(&n.dwell_per_input));
    let raw_phases = (0..16).map(|k| matrix[(k, k)].arg()).collect();
    let leakage = (0..16).map(|k| 1.0 - matrix.column(k).norm_squared()).collect();
    let combined = GateResult {
        gate: "cz-tensor".into(),
        ordering: order,
        ordering_rule: order.description().into(),
        labels: e.labels.clone(),
        ideal: ideal_cz_tensor(),
        raw_phases,
        compensation: sum(&e.compensation, n_perm(&n.compensation)),
        dwell: e.dwell + n.dwell,
        dwell_per_input,
        leakage,
        double_rydberg: sum(&e.double_rydberg, n_perm(&n.double_rydberg)),
        blocked_inputs: e.blocked_inputs + n.blocked_inputs,
        duration: e.duration + n.duration,
        trajectories: vec![],
        matrix,
    };
    Ok(TensorGateResult { electronic: e, nuclear: n, combined, nuclear_first })
}

/// C_Z between the control electronic qubit and the target nuclear spin.
pub fn run_cz_cross(params: &SinGateParams, blockade: &BlockadeModel, opts: &GateOptions) -> Result<GateResult> {
    let target = NuclearPulse::Sinusoidal { pulse: params.pulse, factors: params.factors };
    let seq = nuclear_sequence(None, Some(params), &target, 1, opts.tol)?;
    let order = BasisOrder::AtomMajor;
    let duration = seq.schedule.duration();
    let mut schedule = seq.schedule;
    let mut row_phase = vec![0.0; 16];
    match opts.compensation {
        Compensation::None => {}
        Compensation::Idealized => {
            for (k, r) in row_phase.iter_mut().enumerate() {
                let (ec, _, et, _) = order.bits(k);
                if ec == 1 {
                    *r = seq.target_phase[et as usize];
                }
            }
        }
        Compensation::Explicit { omega_p, delta_p } => {
            // A clock-manifold phase on the control, both nuclear states.
            let a = Atom::Control;
            let want = -seq.target_phase[0];
            let plan = phase_shift_plan(want, omega_p, delta_p)?;
            if plan.cycles > 0 {
                let d = Drive::new(Envelope::Constant { omega: plan.omega_p }).detuned(delta_p).windowed(0.0, plan.t_pc);
                schedule.segments.push(PulseSegment {
                    atom: a,
                    duration: plan.t_pc,
                    terms: (0..2).map(|n| HamiltonianTerm::new(a, Level::c(n), Level::big_p(n), d)).collect(),
                    label: "phase-compensation".into(),
                });
            }
        }
    }
    let run = engine::simulate(&schedule, order, blockade, opts)?;
    let mut res = run.finish("cz-cross", ideal_cz_cross(), row_phase, duration, blocked_inputs());
    if let Compensation::Explicit { .. } = opts.compensation {
        res.compensation = (0..16).map(|k| if order.bits(k).0 == 1 { seq.target_phase[0] } else { 0.0 }).collect();
    }
    Ok(res)
}
