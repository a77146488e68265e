//! Named pulse schedules: one-step sinusoidal excitation, two-step
//! rectangular excitation/deexcitation and nuclear-spin-selective excitation.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::{RectPulseParams, SinPulseParams};
use crate::quantum::{Atom, Drive, Envelope, HamiltonianTerm, Level};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSegment {
    pub atom: Atom,
    pub duration: f64,
    pub terms: Vec<HamiltonianTerm>,
    pub label: String,
}

impl PulseSegment {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::Param(format!("segment {} has duration {}", self.label, self.duration)));
        }
        for t in &self.terms {
            if t.atom != self.atom {
                return Err(Error::Param(format!("segment {} drives {:?}", self.label, t.atom)));
            }
            t.drive.validate()?;
        }
        Ok(())
    }
}

/// Rotating-frame energy of one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameEnergy {
    pub atom: Atom,
    pub level: Level,
    pub energy: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub segments: Vec<PulseSegment>,
    #[serde(default)]
    pub frame: Vec<FrameEnergy>,
}

impl PulseSchedule {
    pub fn new(segments: Vec<PulseSegment>) -> Self {
        PulseSchedule { segments, frame: vec![] }
    }

    pub fn validate(&self) -> Result<()> {
        self.segments.iter().try_for_each(PulseSegment::validate)?;
        for f in &self.frame {
            if !f.energy.is_finite() {
                return Err(Error::Param("frame energies must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn then(mut self, other: PulseSchedule) -> Self {
        self.segments.extend(other.segments);
        self.frame.extend(other.frame);
        self
    }

    /// Levels touched by the schedule on `atom`, in first-use order.
    pub fn levels(&self, atom: Atom) -> Vec<Level> {
        let mut out: Vec<Level> = vec![];
        let mut add = |l: Level| {
            if !out.contains(&l) {
                out.push(l);
            }
        };
        for s in self.segments.iter().filter(|s| s.atom == atom) {
            for t in &s.terms {
                add(t.lower);
                add(t.upper);
            }
        }
        for f in self.frame.iter().filter(|f| f.atom == atom) {
            add(f.level);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json_string(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Param(format!("schedule JSON: {e}")))
    }
}

fn serde_json_string<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("schedule serialization cannot fail")
}

/// Options shared by the excitation builders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseOptions {
    pub atom: Atom,
    /// Extra phase on every Rabi frequency of the pulse.
    pub rabi_phase: f64,
    /// Play the pulse backwards in time.
    pub time_reversed: bool,
}

impl Default for PulseOptions {
    fn default() -> Self {
        PulseOptions { atom: Atom::Control, rabi_phase: 0.0, time_reversed: false }
    }
}

fn term(atom: Atom, lower: Level, upper: Level, drive: Drive) -> HamiltonianTerm {
    HamiltonianTerm::new(atom, lower, upper, drive)
}

fn sine(p: &SinPulseParams) -> Envelope {
    Envelope::Sine { kappa: p.kappa, delta_env: p.delta_env }
}

/// Both nuclear-spin components of the ground state driven to Rydberg
/// levels by two sinusoidal fields, each resonant with one transition and
/// detuned by ∓Δ from the other.
pub fn build_sin_excitation(p: &SinPulseParams, angle: f64) -> Result<PulseSchedule> {
    Ok(PulseSchedule::new(vec![sin_excitation_segment(p, angle, PulseOptions::default())?]))
}

pub fn sin_excitation_segment(p: &SinPulseParams, angle: f64, o: PulseOptions) -> Result<PulseSegment> {
    p.validate()?;
    let t = p.duration(angle)?;
    let env = sine(p);
    let d = |scale: C64, detuning: f64| {
        Drive::new(env).scaled(scale).detuned(detuning).with_phase(o.rabi_phase).windowed(0.0, t).reversed(o.time_reversed)
    };
    let one = C64::new(1.0, 0.0);
    let a = o.atom;
    Ok(PulseSegment {
        atom: a,
        duration: t,
        terms: vec![
            term(a, Level::g(0), Level::r(0), d(one, 0.0)),
            term(a, Level::g(0), Level::r(0), d(one / p.eta, -p.detuning)),
            term(a, Level::g(1), Level::r(1), d(p.eta, p.detuning)),
            term(a, Level::g(1), Level::r(1), d(one, 0.0)),
        ],
        label: format!("sin-excitation({angle:.4})"),
    })
}

/// Single field shapes for the one-transition probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldShape {
    Sinusoidal,
    /// Constant Rabi frequency 2iκ over the same duration.
    Rectangular,
}

/// One field on the g1↔r1 transition with the π/2-area duration of the
/// sinusoidal pulse, optionally detuned by Δ.
pub fn build_single_field(p: &SinPulseParams, shape: FieldShape, detuned: bool) -> Result<PulseSchedule> {
    p.validate()?;
    let t = p.duration(PI / 2.0)?;
    let drive = match shape {
        FieldShape::Sinusoidal => Drive::new(sine(p)),
        FieldShape::Rectangular => Drive::new(Envelope::Constant { omega: 2.0 * p.kappa }).with_phase(PI / 2.0),
    };
    let drive = drive.detuned(if detuned { p.detuning } else { 0.0 }).windowed(0.0, t);
    Ok(PulseSchedule::new(vec![PulseSegment {
        atom: Atom::Control,
        duration: t,
        terms: vec![term(Atom::Control, Level::g(1), Level::r(1), drive)],
        label: format!("single-field-{shape:?}"),
    }]))
}

fn rect(omega: f64) -> Drive {
    Drive::new(Envelope::Constant { omega })
}

/// Fig. 4 step pair: step one resonant on n=0 (off-resonant n=1 partner at
/// +Δ, factor η), step two resonant on n=1 (partner at −Δ, factor 1/η).
fn two_step_segments(p: &RectPulseParams, atom: Atom, rabi_phase: f64, excite: bool) -> Vec<PulseSegment> {
    let o0 = p.omega0;
    let o1 = p.omega0;
    let t0 = PI / o0;
    let t1 = PI / o1;
    let step0 = PulseSegment {
        atom,
        duration: t0,
        terms: vec![
            term(atom, Level::g(0), Level::r(0), rect(o0).with_phase(rabi_phase).windowed(0.0, t0)),
            term(
                atom,
                Level::g(1),
                Level::r(1),
                rect(o0).scaled(p.eta).detuned(p.detuning).with_phase(rabi_phase).windowed(0.0, t0),
            ),
        ],
        label: String::new(),
    };
    let step1 = PulseSegment {
        atom,
        duration: t1,
        terms: vec![
            term(atom, Level::g(1), Level::r(1), rect(o1).with_phase(rabi_phase).windowed(0.0, t1)),
            term(
                atom,
                Level::g(0),
                Level::r(0),
                rect(o1).scaled(1.0 / p.eta).detuned(-p.detuning).with_phase(rabi_phase).windowed(0.0, t1),
            ),
        ],
        label: String::new(),
    };
    if excite {
        vec![PulseSegment { label: "two-step-a".into(), ..step0 }, PulseSegment { label: "two-step-b".into(), ..step1 }]
    } else {
        vec![PulseSegment { label: "two-step-c".into(), ..step1 }, PulseSegment { label: "two-step-d".into(), ..step0 }]
    }
}

pub fn two_step_excitation(p: &RectPulseParams, atom: Atom) -> Result<PulseSchedule> {
    check_two_step(p)?;
    Ok(PulseSchedule::new(two_step_segments(p, atom, 0.0, true)))
}

/// Steps (c), (d): the excitation steps in reverse order with Rabi phase
/// `2φ + extra_phase`.
pub fn two_step_deexcitation(p: &RectPulseParams, phi: f64, atom: Atom, extra_phase: f64) -> Result<PulseSchedule> {
    check_two_step(p)?;
    Ok(PulseSchedule::new(two_step_segments(p, atom, 2.0 * phi + extra_phase, false)))
}

fn check_two_step(p: &RectPulseParams) -> Result<()> {
    p.validate()?;
    let g = (p.eta * p.eta * p.omega0 * p.omega0 + p.detuning * p.detuning).sqrt();
    let r = 2.0 * p.n as f64 * p.omega0;
    if ((g - r) / r).abs() > crate::pulse::MATCH_TOL {
        return Err(Error::Unmatched(format!("ground line: {g:e} vs 2NΩ₀ = {r:e}")));
    }
    Ok(())
}

pub fn build_two_step_excitation(p: &RectPulseParams) -> Result<PulseSchedule> {
    two_step_excitation(p, Atom::Control)
}

pub fn build_two_step_deexcitation(p: &RectPulseParams, phi: f64) -> Result<PulseSchedule> {
    two_step_deexcitation(p, phi, Atom::Control, 0.0)
}

/// Fixed atomic ratios η, η′, ζ and the tunable clock-line ratio Λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingFactors {
    pub eta: f64,
    pub eta_prime: f64,
    pub zeta: f64,
    pub lambda: f64,
}

impl Default for CouplingFactors {
    fn default() -> Self {
        CouplingFactors { eta: 1.0, eta_prime: 1.0, zeta: 1.0, lambda: 1.0 }
    }
}

impl CouplingFactors {
    pub fn validate(&self) -> Result<()> {
        let all = [self.eta, self.eta_prime, self.zeta, self.lambda];
        if all.iter().any(|x| !x.is_finite() || *x == 0.0) {
            return Err(Error::Param("coupling factors must be finite and non-zero".into()));
        }
        if self.lambda < 0.0 {
            return Err(Error::Param("Lambda must be positive".into()));
        }
        Ok(())
    }
}

/// Pulse shape of the nuclear-spin-selective excitation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum NuclearPulse {
    /// Area-π/2 sinusoidal pulses with explicit coupling factors.
    Sinusoidal { pulse: SinPulseParams, factors: CouplingFactors },
    /// Matched rectangular π pulses.
    Rectangular { params: RectPulseParams },
}

impl NuclearPulse {
    pub fn factors(&self) -> CouplingFactors {
        match self {
            NuclearPulse::Sinusoidal { factors, .. } => *factors,
            NuclearPulse::Rectangular { params } => {
                CouplingFactors { eta: params.eta, eta_prime: params.eta_prime, zeta: params.zeta, lambda: params.lambda }
            }
        }
    }

    pub fn detuning(&self) -> f64 {
        match self {
            NuclearPulse::Sinusoidal { pulse, .. } => pulse.detuning,
            NuclearPulse::Rectangular { params } => params.detuning,
        }
    }

    /// Durations of the ground- and clock-line pulses.
    pub fn durations(&self) -> Result<(f64, f64)> {
        match self {
            NuclearPulse::Sinusoidal { pulse, factors } => {
                let tg = pulse.duration(PI / 2.0)?;
                let tc = crate::pulse::sin_pulse_duration(factors.lambda * pulse.kappa, pulse.delta_env, PI / 2.0)?;
                Ok((tg, tc))
            }
            NuclearPulse::Rectangular { params } => Ok(params.pi_durations()),
        }
    }
}

/// Options of the nuclear-spin-selective excitation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuclearOptions {
    pub atom: Atom,
    /// Rabi phase of the ground-line fields.
    pub rabi_phase: f64,
    /// Rabi phase of the clock-line fields.
    pub clock_rabi_phase: f64,
    pub time_reversed: bool,
    /// Also drive the clock manifold, so electronic superpositions are excited.
    pub electronic_superposition: bool,
    /// Start of the clock-line fields relative to the ground-line fields.
    pub clock_offset: f64,
    /// Nuclear state driven resonantly; the other one is the detuned partner.
    pub resonant_nuclear: u8,
    /// Cosine ramp time of rectangular pulses.
    pub ramp: f64,
}

impl Default for NuclearOptions {
    fn default() -> Self {
        NuclearOptions {
            atom: Atom::Control,
            rabi_phase: 0.0,
            clock_rabi_phase: 0.0,
            time_reversed: false,
            electronic_superposition: true,
            clock_offset: 0.0,
            resonant_nuclear: 0,
            ramp: 0.0,
        }
    }
}

/// Resonant excitation of the chosen nuclear state from ground (Ω₀) and
/// clock (ΛΩ₀) levels; the other nuclear state sees the same fields detuned
/// by Δ and ζΔ with factors η and η′Λ.
pub fn build_nuclear_excitation(pulse: &NuclearPulse, o: &NuclearOptions) -> Result<PulseSchedule> {
    Ok(PulseSchedule::new(vec![nuclear_segment(pulse, o)?]))
}

pub fn nuclear_segment(pulse: &NuclearPulse, o: &NuclearOptions) -> Result<PulseSegment> {
    let f = pulse.factors();
    f.validate()?;
    let (env, ramp) = match pulse {
        NuclearPulse::Sinusoidal { pulse, .. } => {
            pulse.validate()?;
            (sine(pulse), 0.0)
        }
        NuclearPulse::Rectangular { params } => {
            params.validate()?;
            (Envelope::Constant { omega: params.omega0 }, o.ramp)
        }
    };
    if o.resonant_nuclear > 1 {
        return Err(Error::Param("resonant nuclear state must be 0 or 1".into()));
    }
    if o.clock_offset < 0.0 || !o.clock_offset.is_finite() {
        return Err(Error::Param("clock offset must be non-negative".into()));
    }
    let (tg, tc) = pulse.durations()?;
    let delta = pulse.detuning();
    let (res, off) = (o.resonant_nuclear, 1 - o.resonant_nuclear);
    // The off-resonant partner sits at +Δ above n=0 and −Δ below n=1.
    let sign = if res == 0 { 1.0 } else { -1.0 };
    let a = o.atom;
    let mk = |scale: f64, detuning: f64, phase: f64, start: f64, len: f64| {
        Drive::new(env)
            .scaled(scale)
            .detuned(detuning)
            .with_phase(phase)
            .windowed(start, start + len)
            .reversed(o.time_reversed)
            .ramped(ramp)
    };
    let mut terms = vec![
        term(a, Level::g(res), Level::r(res), mk(1.0, 0.0, o.rabi_phase, 0.0, tg)),
        term(a, Level::g(off), Level::r(off), mk(f.eta, sign * delta, o.rabi_phase, 0.0, tg)),
    ];
    let mut duration = tg;
    if o.electronic_superposition {
        let s = o.clock_offset;
        terms.push(term(a, Level::c(res), Level::big_r(res), mk(f.lambda, 0.0, o.clock_rabi_phase, s, tc)));
        terms.push(term(
            a,
            Level::c(off),
            Level::big_r(off),
            mk(f.eta_prime * f.lambda, sign * f.zeta * delta, o.clock_rabi_phase, s, tc),
        ));
        duration = duration.max(s + tc);
    }
    Ok(PulseSegment { atom: a, duration, terms, label: "nuclear-excitation".into() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sin_p() -> SinPulseParams {
        SinPulseParams::from_ratios(1.0, 10.0, 0.1)
    }

    #[test]
    fn electronic_protocols_keep_nuclear_labels() {
        let p = crate::pulse::match_generalized_rabi(1.0, 1.0, 1.0, 10.0, 3.0).unwrap();
        let scheds = [
            build_sin_excitation(&sin_p(), PI / 2.0).unwrap(),
            build_two_step_excitation(&p).unwrap(),
            build_two_step_deexcitation(&p, 0.3).unwrap(),
        ];
        for s in &scheds {
            for seg in &s.segments {
                for t in &seg.terms {
                    assert_eq!(t.lower.nuclear, t.upper.nuclear);
                }
            }
        }
    }

    #[test]
    fn nuclear_protocol_never_couples_qubit_levels() {
        let pulse = NuclearPulse::Sinusoidal { pulse: sin_p(), factors: CouplingFactors::default() };
        let s = build_nuclear_excitation(&pulse, &NuclearOptions::default()).unwrap();
        for t in &s.segments[0].terms {
            assert!(t.upper.is_rydberg());
            assert!(!t.lower.is_rydberg());
        }
    }

    #[test]
    fn schedule_json_round_trip() {
        let s = build_sin_excitation(&sin_p().with_eta(C64::new(0.8, 0.1)), PI / 2.0).unwrap();
        let back = PulseSchedule::from_json(&s.to_json()).unwrap();
        assert_eq!(s, back);
        let p = crate::pulse::match_generalized_rabi(1.0, 0.9, 1.1, 10.0, 3.0).unwrap();
        let n = build_nuclear_excitation(&NuclearPulse::Rectangular { params: p }, &NuclearOptions::default()).unwrap();
        assert_eq!(PulseSchedule::from_json(&n.to_json()).unwrap(), n);
    }

    #[test]
    fn two_step_requires_matching() {
        let p = RectPulseParams::unmatched(1.0, 2.0);
        assert!(matches!(build_two_step_excitation(&p), Err(Error::Unmatched(_))));
    }

    #[test]
    fn zero_eta_is_rejected() {
        assert!(build_sin_excitation(&sin_p().with_eta(0.0), PI / 2.0).is_err());
    }
}
