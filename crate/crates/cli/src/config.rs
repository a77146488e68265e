//! Scenario configuration files (TOML).

use std::f64::consts::PI;
use std::path::Path;

use serde::Deserialize;

use rydsim::gates::{BlockadeModel, Compensation, Deexcitation, ElectronicMethod, NuclearMethod, SinGateParams};
use rydsim::protocols::CouplingFactors;
use rydsim::pulse::{match_generalized_rabi_with, RectPulseParams, SinPulseParams};
use rydsim::quantum::Level;

pub const MAX_SWEEP_POINTS: usize = 100_000;

const MHZ: f64 = 2.0 * PI * 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    ExciteSin,
    ExciteTwoStep,
    CzElectronic,
    CzNuclear,
    CzTensor,
    CzCross,
    Levels,
    Sweep,
}

impl Scenario {
    pub fn is_gate(self) -> bool {
        matches!(self, Scenario::CzElectronic | Scenario::CzNuclear | Scenario::CzTensor | Scenario::CzCross)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    /// Output file stem; defaults to the config file stem.
    pub name: Option<String>,
    #[serde(default)]
    pub physics: Physics,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub excite: Excite,
    #[serde(default)]
    pub levels: Levels,
    pub sweep: Option<Sweep>,
}

/// Rates in MHz (divided by 2π) or as ratios to 2κ₀; times in μs.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Physics {
    pub two_kappa0_mhz: f64,
    pub detuning_ratio: f64,
    pub delta_ratio: f64,
    pub eta: f64,
    pub eta_prime: f64,
    pub zeta: f64,
    pub lambda: f64,
    pub tau_us: f64,
    pub v_mhz: f64,
    /// Starting guess for the rectangular Rabi frequency Ω₀/(2κ₀).
    pub omega0_ratio: f64,
    /// Forced clock-line cycle count of rectangular pulses.
    pub n_prime: Option<u32>,
}

impl Default for Physics {
    fn default() -> Self {
        Physics {
            two_kappa0_mhz: 1.4,
            detuning_ratio: 10.0,
            delta_ratio: 0.1,
            eta: 1.0,
            eta_prime: 1.0,
            zeta: 1.0,
            lambda: 1.0,
            tau_us: 330.0,
            v_mhz: 47.0,
            omega0_ratio: 0.3,
            n_prime: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseKind {
    Sinusoidal,
    TwoStep,
    Rectangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockadeKind {
    Perfect,
    Finite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeexcitationKind {
    Repeat,
    TimeReversed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompensationKind {
    Idealized,
    None,
    Explicit,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Method {
    pub electronic: PulseKind,
    pub nuclear: PulseKind,
    pub blockade: BlockadeKind,
    pub deexcitation: DeexcitationKind,
    pub compensation: CompensationKind,
    pub omega_p_ratio: f64,
    pub delta_p_ratio: f64,
    pub nuclear_first: bool,
}

impl Default for Method {
    fn default() -> Self {
        Method {
            electronic: PulseKind::Sinusoidal,
            nuclear: PulseKind::Sinusoidal,
            blockade: BlockadeKind::Perfect,
            deexcitation: DeexcitationKind::TimeReversed,
            compensation: CompensationKind::Idealized,
            omega_p_ratio: 1.0,
            delta_p_ratio: 5.0,
            nuclear_first: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Drive {
    /// Sinusoidal pulse on both nuclear lines.
    TwoField,
    /// Sinusoidal field on one line, resonant.
    SingleResonant,
    /// Sinusoidal field on one line, detuned by Δ.
    SingleDetuned,
    /// Rectangular field on one line, detuned by Δ.
    RectDetuned,
}

impl Drive {
    pub fn slug(self) -> &'static str {
        match self {
            Drive::TwoField => "two-field",
            Drive::SingleResonant => "single-resonant",
            Drive::SingleDetuned => "single-detuned",
            Drive::RectDetuned => "rect-detuned",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Excite {
    /// Pulse area of the two-field drive in units of π.
    pub angle_over_pi: f64,
    pub drives: Vec<Drive>,
    pub initial: Vec<String>,
    /// Append the de-excitation steps (two-step scheme).
    pub deexcite: bool,
    /// Number of sampling intervals over the schedule.
    pub samples: usize,
}

impl Default for Excite {
    fn default() -> Self {
        Excite { angle_over_pi: 0.5, drives: vec![Drive::TwoField], initial: vec!["g0".into()], deexcite: false, samples: 200 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Levels {
    pub fields_gauss: Vec<f64>,
    pub manifold: bool,
    /// Overrides of the calibrated n = 70 s-manifold.
    pub rydberg_n: Option<u32>,
    pub a_prime_ghz: Option<f64>,
    pub delta_st_ghz: Option<f64>,
    pub overlap: Option<f64>,
    pub nuclear_spin: Option<f64>,
}

impl Default for Levels {
    fn default() -> Self {
        Levels {
            fields_gauss: vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0],
            manifold: true,
            rydberg_n: None,
            a_prime_ghz: None,
            delta_st_ghz: None,
            overlap: None,
            nuclear_spin: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub base: Scenario,
    /// Name of a numeric key of [physics].
    pub parameter: String,
    pub values: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub count: Option<usize>,
}

impl Sweep {
    pub fn points(&self) -> Result<Vec<f64>, String> {
        let v = match (&self.values, self.start, self.stop, self.count) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) => {
                if n > MAX_SWEEP_POINTS {
                    return Err(format!("sweep count {n} exceeds {MAX_SWEEP_POINTS}"));
                }
                match n {
                    0 => vec![],
                    1 => vec![a],
                    _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
                }
            }
            _ => return Err("sweep needs either `values` or all of `start`, `stop`, `count`".into()),
        };
        if v.is_empty() {
            return Err("sweep has no points".into());
        }
        if v.len() > MAX_SWEEP_POINTS {
            return Err(format!("sweep has {} points, limit {MAX_SWEEP_POINTS}", v.len()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err("sweep values must be finite".into());
        }
        Ok(v)
    }
}

impl Physics {
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), String> {
        let slot = match key {
            "two_kappa0_mhz" => &mut self.two_kappa0_mhz,
            "detuning_ratio" => &mut self.detuning_ratio,
            "delta_ratio" => &mut self.delta_ratio,
            "eta" => &mut self.eta,
            "eta_prime" => &mut self.eta_prime,
            "zeta" => &mut self.zeta,
            "lambda" => &mut self.lambda,
            "tau_us" => &mut self.tau_us,
            "v_mhz" => &mut self.v_mhz,
            "omega0_ratio" => &mut self.omega0_ratio,
            _ => return Err(format!("unknown sweep parameter `{key}`")),
        };
        *slot = value;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("two_kappa0_mhz", self.two_kappa0_mhz),
            ("delta_ratio", self.delta_ratio),
            ("tau_us", self.tau_us),
            ("v_mhz", self.v_mhz),
            ("omega0_ratio", self.omega0_ratio),
            ("lambda", self.lambda),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("physics.{k} must be positive, got {v}"));
            }
        }
        for (k, v) in
            [("detuning_ratio", self.detuning_ratio), ("eta", self.eta), ("eta_prime", self.eta_prime), ("zeta", self.zeta)]
        {
            if !v.is_finite() {
                return Err(format!("physics.{k} must be finite"));
            }
        }
        Ok(())
    }

    /// 2κ₀ in rad/s.
    pub fn two_kappa0(&self) -> f64 {
        self.two_kappa0_mhz * MHZ
    }

    pub fn tau(&self) -> f64 {
        self.tau_us * 1e-6
    }

    pub fn v(&self) -> f64 {
        self.v_mhz * MHZ
    }

    pub fn factors(&self) -> CouplingFactors {
        CouplingFactors { eta: self.eta, eta_prime: self.eta_prime, zeta: self.zeta, lambda: self.lambda }
    }

    pub fn sin_pulse(&self) -> SinPulseParams {
        SinPulseParams::from_ratios(self.two_kappa0(), self.detuning_ratio, self.delta_ratio).with_eta(self.eta)
    }

    pub fn rect_pulse(&self) -> rydsim::Result<RectPulseParams> {
        let w = self.two_kappa0();
        match_generalized_rabi_with(
            self.eta,
            self.eta_prime,
            self.zeta,
            self.detuning_ratio * w,
            self.omega0_ratio * w,
            self.n_prime,
        )
    }
}

impl Method {
    pub fn sin_gate(&self, p: &Physics) -> SinGateParams {
        let d = match self.deexcitation {
            DeexcitationKind::Repeat => Deexcitation::Repeat,
            DeexcitationKind::TimeReversed => Deexcitation::TimeReversed,
        };
        SinGateParams { pulse: p.sin_pulse(), factors: p.factors(), deexcitation: d }
    }

    pub fn blockade(&self, p: &Physics) -> BlockadeModel {
        match self.blockade {
            BlockadeKind::Perfect => BlockadeModel::Perfect,
            BlockadeKind::Finite => BlockadeModel::Finite { v: p.v() },
        }
    }

    pub fn compensation(&self, p: &Physics) -> Compensation {
        match self.compensation {
            CompensationKind::Idealized => Compensation::Idealized,
            CompensationKind::None => Compensation::None,
            CompensationKind::Explicit => Compensation::Explicit {
                omega_p: self.omega_p_ratio * p.two_kappa0(),
                delta_p: self.delta_p_ratio * p.two_kappa0(),
            },
        }
    }

    pub fn electronic_method(&self, p: &Physics) -> rydsim::Result<ElectronicMethod> {
        match self.electronic {
            PulseKind::Sinusoidal => Ok(ElectronicMethod::Sinusoidal(self.sin_gate(p))),
            PulseKind::TwoStep => Ok(ElectronicMethod::TwoStep(p.rect_pulse()?)),
            PulseKind::Rectangular => Err(rydsim::Error::Param("electronic gate takes `sinusoidal` or `two-step`".into())),
        }
    }

    pub fn nuclear_method(&self, p: &Physics) -> rydsim::Result<NuclearMethod> {
        match self.nuclear {
            PulseKind::Sinusoidal => Ok(NuclearMethod::Sinusoidal(self.sin_gate(p))),
            PulseKind::Rectangular => Ok(NuclearMethod::Rectangular(p.rect_pulse()?)),
            PulseKind::TwoStep => Err(rydsim::Error::Param("nuclear gate takes `sinusoidal` or `rectangular`".into())),
        }
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let c: ScenarioConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn validate(&self) -> Result<(), String> {
        self.physics.validate()?;
        if let Some(n) = &self.name {
            if n.is_empty() || n.contains(['/', '\\']) {
                return Err(format!("name `{n}` is not a plain file stem"));
            }
        }
        for s in &self.excite.initial {
            s.parse::<Level>().map_err(|e| format!("excite.initial `{s}`: {e}"))?;
        }
        if self.excite.drives.is_empty() || self.excite.initial.is_empty() {
            return Err("excite.drives and excite.initial must not be empty".into());
        }
        if self.excite.samples == 0 || self.excite.samples > 1_000_000 {
            return Err("excite.samples must be in 1..=1000000".into());
        }
        if !(self.excite.angle_over_pi > 0.0 && self.excite.angle_over_pi.is_finite()) {
            return Err("excite.angle_over_pi must be positive".into());
        }
        if self.levels.fields_gauss.iter().any(|b| !b.is_finite()) {
            return Err("levels.fields_gauss must be finite".into());
        }
        match (self.scenario, &self.sweep) {
            (Scenario::Sweep, None) => return Err("scenario `sweep` needs a [sweep] table".into()),
            (Scenario::Sweep, Some(s)) => {
                if !s.base.is_gate() {
                    return Err("sweep.base must be a gate scenario".into());
                }
                let pts = s.points()?;
                let mut probe = self.physics.clone();
                for v in pts {
                    probe.set(&s.parameter, v)?;
                    probe.validate()?;
                }
            }
            (_, Some(_)) => return Err("[sweep] is only allowed with scenario `sweep`".into()),
            _ => {}
        }
        Ok(())
    }
}
