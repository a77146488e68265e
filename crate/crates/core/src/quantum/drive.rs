use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time profile of a Rabi frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Envelope {
    /// Ω(t) = Ω.
    Constant { omega: f64 },
    /// Ω(t) = 2iκ sin(δt).
    Sine { kappa: f64, delta_env: f64 },
}

impl Envelope {
    pub fn rabi(&self, t: f64) -> C64 {
        match *self {
            Envelope::Constant { omega } => C64::new(omega, 0.0),
            Envelope::Sine { kappa, delta_env } => C64::new(0.0, 2.0 * kappa * (delta_env * t).sin()),
        }
    }
}

/// Interval during which a drive is on. Time inside the window is measured
/// from `start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start: f64,
    pub end: f64,
}

impl Window {
    pub fn new(start: f64, end: f64) -> Self {
        Window { start, end }
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Upper-lower matrix element of a laser coupling:
/// `½·scale·Ω(τ)·exp(i(phase + detuning·τ))`, τ the local time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drive {
    pub envelope: Envelope,
    /// Fixed complex factor such as η, 1/η or Λ.
    #[serde(default = "one")]
    pub scale: C64,
    #[serde(default)]
    pub detuning: f64,
    /// Phase of the Rabi frequency.
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub window: Option<Window>,
    /// Play the windowed pulse backwards, `τ → len − τ`.
    #[serde(default)]
    pub time_reversed: bool,
    /// Cosine turn-on/turn-off time at both window edges.
    #[serde(default)]
    pub ramp: f64,
}

impl Drive {
    pub fn new(envelope: Envelope) -> Self {
        Drive { envelope, scale: one(), detuning: 0.0, phase: 0.0, window: None, time_reversed: false, ramp: 0.0 }
    }

    pub fn scaled(mut self, scale: impl Into<C64>) -> Self {
        self.scale = scale.into();
        self
    }

    pub fn detuned(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn windowed(mut self, start: f64, end: f64) -> Self {
        self.window = Some(Window::new(start, end));
        self
    }

    pub fn reversed(mut self, on: bool) -> Self {
        self.time_reversed = on;
        self
    }

    pub fn ramped(mut self, ramp: f64) -> Self {
        self.ramp = ramp;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.scale.re.is_finite()
            && self.scale.im.is_finite()
            && self.detuning.is_finite()
            && self.phase.is_finite()
            && self.ramp.is_finite();
        let env_ok = match self.envelope {
            Envelope::Constant { omega } => omega.is_finite(),
            Envelope::Sine { kappa, delta_env } => kappa.is_finite() && delta_env.is_finite(),
        };
        if !finite || !env_ok {
            return Err(Error::Param("drive has non-finite parameters".into()));
        }
        if self.ramp < 0.0 {
            return Err(Error::Param("ramp must be non-negative".into()));
        }
        match self.window {
            Some(w) => {
                if !(w.start.is_finite() && w.end.is_finite()) || w.is_empty() {
                    return Err(Error::Param(format!("empty drive window [{}, {}]", w.start, w.end)));
                }
                if 2.0 * self.ramp > w.len() {
                    return Err(Error::Param("ramp longer than half the window".into()));
                }
            }
            None => {
                if self.time_reversed || self.ramp > 0.0 {
                    return Err(Error::Param("time reversal and ramps need a drive window".into()));
                }
            }
        }
        Ok(())
    }

    /// Window edges, where the drive may be discontinuous.
    pub fn breakpoints(&self) -> Option<(f64, f64)> {
        self.window.map(|w| (w.start, w.end))
    }

    pub fn value(&self, t: f64) -> C64 {
        let (tau, len) = match self.window {
            Some(w) => {
                if t < w.start || t > w.end {
                    return C64::new(0.0, 0.0);
                }
                let len = w.len();
                let tau = t - w.start;
                (if self.time_reversed { len - tau } else { tau }, len)
            }
            None => (t, f64::INFINITY),
        };
        let mut amp = 0.5 * self.scale * self.envelope.rabi(tau) * C64::from_polar(1.0, self.phase + self.detuning * tau);
        if self.ramp > 0.0 {
            let edge = tau.min(len - tau);
            if edge < self.ramp {
                amp *= 0.5 * (1.0 - (PI * edge / self.ramp).cos());
            }
        }
        amp
    }
}
