//! Closed-form pulse relations: sinusoidal pulse areas, detuned Rabi cycle
//! phases, generalized Rabi frequency matching and phase compensation.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when checking `√(η²Ω²+Δ²) = 2NΩ`.
pub const MATCH_TOL: f64 = 1e-6;

/// Wraps a phase into (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Distance between two phases modulo 2π.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    wrap_phase(a - b).abs()
}

/// Sinusoidal pulse `Ω(t) = 2iκ sin(δt)` on a pair of transitions split by Δ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinPulseParams {
    pub kappa: f64,
    pub delta_env: f64,
    pub detuning: f64,
    #[serde(default = "unit")]
    pub eta: C64,
}

fn unit() -> C64 {
    C64::new(1.0, 0.0)
}

impl SinPulseParams {
    pub fn new(kappa: f64, delta_env: f64, detuning: f64) -> Self {
        SinPulseParams { kappa, delta_env, detuning, eta: unit() }
    }

    pub fn with_eta(mut self, eta: impl Into<C64>) -> Self {
        self.eta = eta.into();
        self
    }

    /// Parameters given as ratios to 2κ₀.
    pub fn from_ratios(two_kappa0: f64, detuning_ratio: f64, delta_ratio: f64) -> Self {
        SinPulseParams::new(0.5 * two_kappa0, delta_ratio * two_kappa0, detuning_ratio * two_kappa0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::Param(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !(self.delta_env > 0.0 && self.delta_env.is_finite()) {
            return Err(Error::Param(format!("delta_env must be positive, got {}", self.delta_env)));
        }
        if !self.detuning.is_finite() {
            return Err(Error::Param("detuning must be finite".into()));
        }
        if self.eta.norm() == 0.0 || !self.eta.norm().is_finite() {
            return Err(Error::Param("eta must be non-zero and finite".into()));
        }
        Ok(())
    }

    /// True when the envelope is not slow compared with the splitting
    /// (Δ/δ < 10), where the resonant/off-resonant separation degrades.
    pub fn outside_slow_regime(&self) -> bool {
        self.detuning.abs() / self.delta_env < 10.0
    }

    /// Duration whose pulse area κ[1−cos δT]/δ equals `angle`.
    pub fn duration(&self, angle: f64) -> Result<f64> {
        sin_pulse_duration(self.kappa, self.delta_env, angle)
    }
}

/// Ground and Rydberg amplitudes `(cos A, sin A)`, `A = κ[1−cos δt]/δ`, of a
/// resonant sinusoidal pulse.
pub fn sin_amplitudes(p: &SinPulseParams, t: f64) -> (f64, f64) {
    let a = sin_pulse_area(p.kappa, p.delta_env, t);
    (a.cos(), a.sin())
}

pub fn sin_pulse_area(kappa: f64, delta_env: f64, t: f64) -> f64 {
    kappa * (1.0 - (delta_env * t).cos()) / delta_env
}

/// Smallest positive T with κ[1−cos δT]/δ = angle.
pub fn sin_pulse_duration(kappa: f64, delta_env: f64, angle: f64) -> Result<f64> {
    if !(kappa > 0.0 && delta_env > 0.0) {
        return Err(Error::Param("kappa and delta_env must be positive".into()));
    }
    if !(angle > 0.0 && angle <= PI) {
        return Err(Error::Domain(format!("pulse angle {angle} outside (0, π]")));
    }
    let x = angle * delta_env / kappa;
    if x > 2.0 {
        return Err(Error::Domain(format!(
            "angle {angle} unreachable: maximal area of this envelope is {}",
            2.0 * kappa / delta_env
        )));
    }
    Ok((1.0 - x).acos() / delta_env)
}

/// Ground-state phase after N complete detuned Rabi cycles of a π-pulse
/// duration, `−(N + Δ/2Ω)π` wrapped into (−π, π].
pub fn detuned_cycle_phase(n: u32, detuning: f64, omega: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Param("N must be at least 1".into()));
    }
    if detuning == 0.0 {
        return Err(Error::Param("resonant drive has no detuned cycle".into()));
    }
    if omega.is_nan() || omega <= 0.0 {
        return Err(Error::Param("Rabi frequency must be positive".into()));
    }
    let lhs = (omega * omega + detuning * detuning).sqrt();
    let rhs = 2.0 * n as f64 * omega;
    if ((lhs - rhs) / rhs).abs() > MATCH_TOL {
        return Err(Error::Unmatched(format!("generalized Rabi frequency {lhs:e} is not {n}·2Ω = {rhs:e}")));
    }
    Ok(wrap_phase(-(n as f64 + detuning / (2.0 * omega)) * PI))
}

/// Rectangular-pulse parameters for the two-step and nuclear schemes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectPulseParams {
    pub omega0: f64,
    pub detuning: f64,
    pub eta: f64,
    pub eta_prime: f64,
    pub zeta: f64,
    pub lambda: f64,
    pub n: u32,
    pub n_prime: u32,
}

impl RectPulseParams {
    /// Parameters taken as given, without enforcing the matching condition.
    pub fn unmatched(omega0: f64, detuning: f64) -> Self {
        RectPulseParams { omega0, detuning, eta: 1.0, eta_prime: 1.0, zeta: 1.0, lambda: 1.0, n: 1, n_prime: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return Err(Error::Param(format!("omega0 must be positive, got {}", self.omega0)));
        }
        if self.n == 0 || self.n_prime == 0 {
            return Err(Error::Param("N and N' must be at least 1".into()));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Param("Lambda must be positive".into()));
        }
        if self.eta == 0.0 || !self.eta.is_finite() || !self.eta_prime.is_finite() || !self.zeta.is_finite() {
            return Err(Error::Param("coupling factors must be finite and eta non-zero".into()));
        }
        if self.detuning == 0.0 || !self.detuning.is_finite() {
            return Err(Error::Param("detuning must be finite and non-zero".into()));
        }
        Ok(())
    }

    /// Relative defects of the two matching conditions (ground and clock lines).
    pub fn match_defects(&self) -> (f64, f64) {
        let (o, d) = (self.omega0, self.detuning);
        let l1 = (self.eta * self.eta * o * o + d * d).sqrt();
        let r1 = 2.0 * self.n as f64 * o;
        let lo = self.lambda * o;
        let l2 = (self.eta_prime * self.eta_prime * lo * lo + self.zeta * self.zeta * d * d).sqrt();
        let r2 = 2.0 * self.n_prime as f64 * lo;
        (((l1 - r1) / r1).abs(), ((l2 - r2) / r2).abs())
    }

    pub fn is_matched(&self) -> bool {
        let (a, b) = self.match_defects();
        a <= MATCH_TOL && b <= MATCH_TOL
    }

    pub fn require_matched(&self) -> Result<()> {
        self.validate()?;
        let (a, b) = self.match_defects();
        if a > MATCH_TOL || b > MATCH_TOL {
            return Err(Error::Unmatched(format!("relative defects {a:e} and {b:e}")));
        }
        Ok(())
    }

    /// Resonant π-pulse durations on the ground and clock lines.
    pub fn pi_durations(&self) -> (f64, f64) {
        (PI / self.omega0, PI / (self.lambda * self.omega0))
    }

    /// Detuned-cycle phases (φ₂, φ₂′) of the n=1 ground and clock levels
    /// over one π-pulse duration each, wrapped into (−π, π].
    pub fn nuclear_phases(&self) -> (f64, f64) {
        let p = -(self.n as f64 + self.detuning / (2.0 * self.omega0)) * PI;
        let pp = -(self.n_prime as f64 + self.zeta * self.detuning / (2.0 * self.lambda * self.omega0)) * PI;
        (wrap_phase(p), wrap_phase(pp))
    }

    /// Phase φ of the electronic two-step scheme, with Ω₁ = Ω₀.
    pub fn two_step_phase(&self) -> f64 {
        wrap_phase(-(self.n as f64 + self.detuning / (2.0 * self.omega0)) * PI)
    }
}

fn omega_for(n: u32, eta: f64, detuning: f64) -> Option<f64> {
    let r = 4.0 * (n as f64).powi(2) - eta * eta;
    (r > 0.0).then(|| detuning.abs() / r.sqrt())
}

/// Adjusts Ω₀ to the value nearest `omega0_hint` that makes the generalized
/// Rabi frequency an even multiple of Ω₀, and sets Λ so the clock line
/// matches with the same N.
pub fn match_generalized_rabi(eta: f64, eta_prime: f64, zeta: f64, detuning: f64, omega0_hint: f64) -> Result<RectPulseParams> {
    match_generalized_rabi_with(eta, eta_prime, zeta, detuning, omega0_hint, None)
}

/// As [`match_generalized_rabi`], optionally forcing a different cycle count
/// N′ on the clock line.
pub fn match_generalized_rabi_with(
    eta: f64,
    eta_prime: f64,
    zeta: f64,
    detuning: f64,
    omega0_hint: f64,
    n_prime: Option<u32>,
) -> Result<RectPulseParams> {
    if detuning == 0.0 || !detuning.is_finite() {
        return Err(Error::Param("detuning must be finite and non-zero".into()));
    }
    if eta == 0.0 || !(eta.is_finite() && eta_prime.is_finite() && zeta.is_finite()) || zeta == 0.0 {
        return Err(Error::Param("eta and zeta must be non-zero and finite".into()));
    }
    let n_min = ((eta.abs() / 2.0).floor() as u32 + 1).max(1);
    let n = if omega0_hint > 0.0 && omega0_hint.is_finite() {
        let x = (eta * eta + (detuning / omega0_hint).powi(2)).sqrt() / 2.0;
        let lo = (x.floor() as u32).max(n_min);
        let hi = (x.ceil() as u32).max(n_min);
        let dist = |n: u32| omega_for(n, eta, detuning).map_or(f64::INFINITY, |o| (o - omega0_hint).abs());
        if dist(hi) < dist(lo) {
            hi
        } else {
            lo
        }
    } else {
        n_min
    };
    let omega0 = omega_for(n, eta, detuning).ok_or_else(|| Error::Param("no matching N".into()))?;
    let lambda = match n_prime {
        None => {
            let rad = detuning * detuning + omega0 * omega0 * (eta * eta - eta_prime * eta_prime);
            if rad <= 0.0 {
                return Err(Error::Param(format!("negative radicand {rad:e} in Lambda")));
            }
            (zeta * detuning).abs() / rad.sqrt()
        }
        Some(np) => {
            let r = 4.0 * (np as f64).powi(2) - eta_prime * eta_prime;
            if np == 0 || r <= 0.0 {
                return Err(Error::Param(format!("N' = {np} cannot match eta' = {eta_prime}")));
            }
            (zeta * detuning).abs() / (omega0 * r.sqrt())
        }
    };
    let p = RectPulseParams { omega0, detuning, eta, eta_prime, zeta, lambda, n, n_prime: n_prime.unwrap_or(n) };
    p.require_matched()?;
    Ok(p)
}

/// Detuned drive that imprints a chosen phase on a qubit level through
/// complete off-resonant cycles to an auxiliary level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompensationParams {
    /// Rabi frequency actually used (retuned from the requested one).
    pub omega_p: f64,
    pub delta_p: f64,
    pub t_pc: f64,
    /// Integer ℕ closing the phase balance.
    pub n_comp: i64,
    /// Number of generalized Rabi cycles t_pc·Ω̄/2π.
    pub cycles: u64,
    /// Per-cycle phase Θ.
    pub theta: f64,
    pub omega_bar: f64,
    /// Phase the drive imprints, modulo 2π.
    pub target: f64,
    pub residual: f64,
}

/// Θ = −(1 + δ/Ω̄)π, the phase of one complete detuned cycle.
pub fn cycle_phase(omega_p: f64, delta_p: f64) -> f64 {
    let bar = omega_p.hypot(delta_p);
    -(1.0 + delta_p / bar) * PI
}

/// Small-ratio expansion of [`cycle_phase`].
pub fn cycle_phase_approx(omega_p: f64, delta_p: f64) -> f64 {
    (-2.0 + omega_p * omega_p / (2.0 * delta_p * delta_p)) * PI
}

/// Plan a blue-detuned drive imprinting `target` (mod 2π) on the driven level.
///
/// The cycle count m is the smallest one able to reach the target with at
/// most the requested Rabi frequency; Ω_p is then lowered so that exactly m
/// cycles give the target phase.
pub fn phase_shift_plan(target: f64, omega_p: f64, delta_p: f64) -> Result<CompensationParams> {
    if !(delta_p > 0.0 && delta_p.is_finite()) {
        return Err(Error::Param("compensation detuning must be positive (blue)".into()));
    }
    if omega_p.is_nan() || omega_p <= 0.0 || omega_p / delta_p > 0.2 {
        return Err(Error::Param(format!("|Omega_p/delta_p| = {} outside (0, 0.2]", omega_p / delta_p)));
    }
    // Θ + 2π per cycle, in (0, π).
    let per_cycle = cycle_phase(omega_p, delta_p) + 2.0 * PI;
    let mut want = target.rem_euclid(2.0 * PI);
    if 2.0 * PI - want < 1e-12 {
        want = 0.0;
    }
    let (cycles, omega_used) = if want < 1e-12 {
        (0u64, omega_p)
    } else {
        let m = (want / per_cycle).ceil();
        if m > 1e6 {
            return Err(Error::Param(format!("phase needs {m} cycles, more than 10^6")));
        }
        let bar = delta_p / (1.0 - want / (m * PI));
        (m as u64, (bar * bar - delta_p * delta_p).max(0.0).sqrt())
    };
    let bar = omega_used.hypot(delta_p);
    let theta = cycle_phase(omega_used, delta_p);
    let t_pc = 2.0 * PI * cycles as f64 / bar;
    let acquired = theta * cycles as f64;
    let n_comp = ((target - acquired) / (2.0 * PI)).round() as i64;
    let residual = (acquired + 2.0 * PI * n_comp as f64 - target).abs();
    Ok(CompensationParams { omega_p: omega_used, delta_p, t_pc, n_comp, cycles, theta, omega_bar: bar, target, residual })
}

/// Plan removing the phase 4φ₂ accumulated by the nuclear-spin gate, i.e.
/// 4φ₂ + Θ·m + 2πℕ = 0.
pub fn compensation_plan(phi2: f64, omega_p: f64, delta_p: f64) -> Result<CompensationParams> {
    phase_shift_plan(-4.0 * phi2, omega_p, delta_p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn durations_in_natural_units() {
        let p = SinPulseParams::from_ratios(1.0, 10.0, 0.1);
        let unit = 2.0 * PI;
        assert!((p.duration(PI / 2.0).unwrap() / unit - 1.29717).abs() < 1e-4);
        assert!((p.duration(PI).unwrap() / unit - 1.8939).abs() < 1e-4);
        assert!(p.duration(1e-9).unwrap() < 1e-3);
        assert!(matches!(p.duration(3.5), Err(Error::Domain(_))));
        assert!(sin_pulse_duration(0.5, 0.5, PI).is_err());
    }

    #[test]
    fn amplitudes_reach_rydberg_state() {
        let p = SinPulseParams::from_ratios(1.0, 10.0, 0.1);
        assert_eq!(sin_amplitudes(&p, 0.0), (1.0, 0.0));
        let (g, r) = sin_amplitudes(&p, p.duration(PI / 2.0).unwrap());
        assert!(g.abs() < 1e-12 && (r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cycle_phase_closed_form() {
        let omega = 1.3;
        let phi = detuned_cycle_phase(1, 3f64.sqrt() * omega, omega).unwrap();
        assert!(phase_distance(phi, -(1.0 + 3f64.sqrt() / 2.0) * PI) < 1e-12);
        assert!(detuned_cycle_phase(1, 0.0, omega).is_err());
        assert!(matches!(detuned_cycle_phase(1, 2.0, 1.0), Err(Error::Unmatched(_))));
    }

    #[test]
    fn matching_unit_factors() {
        let p = match_generalized_rabi(1.0, 1.0, 1.0, 10.0, 2.0).unwrap();
        assert_eq!(p.lambda, 1.0);
        assert!(((p.omega0.powi(2) + 100.0).sqrt() - 2.0 * p.n as f64 * p.omega0).abs() < 1e-9);
        let (a, b) = p.nuclear_phases();
        assert!((a - b).abs() < 1e-9);
        let p2 = match_generalized_rabi(0.8, 0.8, 2.0, 10.0, 2.0).unwrap();
        assert_eq!(p2.lambda, 2.0);
    }

    #[test]
    fn matching_defaults_to_smallest_n() {
        let p = match_generalized_rabi(1.0, 1.0, 1.0, 3.0, -1.0).unwrap();
        assert_eq!(p.n, 1);
        assert!((p.omega0 - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn matching_rejects_negative_radicand() {
        assert!(match_generalized_rabi(0.1, 5.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn forced_n_prime() {
        let p = match_generalized_rabi_with(1.0, 1.0, 1.0, 10.0, 2.0, Some(4)).unwrap();
        assert_eq!(p.n_prime, 4);
        assert!(p.is_matched());
    }

    #[test]
    fn compensation_trivial_phase() {
        let c = compensation_plan(-3.0 * PI, 0.1, 1.0).unwrap();
        assert_eq!(c.cycles, 0);
        assert_eq!(c.t_pc, 0.0);
        assert!(c.residual < 1e-9);
    }

    #[test]
    fn compensation_cycles_are_whole() {
        for phi in [0.0395, -1.2, 2.9, 0.3] {
            let c = compensation_plan(phi, 0.15, 1.0).unwrap();
            let cycles = c.t_pc * c.omega_bar / (2.0 * PI);
            assert!((cycles - cycles.round()).abs() < 1e-6);
            assert!(c.omega_p <= 0.15 + 1e-15);
            assert!((4.0 * phi + c.theta * cycles.round() + 2.0 * PI * c.n_comp as f64).abs() < 1e-3);
        }
    }

    #[test]
    fn compensation_rejects_strong_drive() {
        assert!(compensation_plan(0.1, 0.5, 1.0).is_err());
        assert!(compensation_plan(0.1, 0.1, -1.0).is_err());
    }

    #[test]
    fn theta_expansion() {
        let exact = cycle_phase(0.1, 1.0);
        let approx = cycle_phase_approx(0.1, 1.0);
        assert!((exact / PI - approx / PI).abs() < 1e-4);
    }
}
