//! Adaptive explicit Runge-Kutta integration (Dormand-Prince 8(5,3)) for
//! complex-valued first order systems.

use num_complex::Complex64 as C64;

use super::tableau::{A, B, C, E3, E5};
use crate::error::{Error, Result};

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ERROR_EXPONENT: f64 = -1.0 / 8.0;
const STAGES: usize = 12;

/// Step statistics of one integration call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Dop853 {
    /// Absolute error allowed per step on each controlled component.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for Dop853 {
    fn default() -> Self {
        Dop853 { tol: 1e-10, max_steps: 5_000_000 }
    }
}

fn rms(v: &[C64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    (v.iter().map(|z| z.norm_sqr()).sum::<f64>() / v.len() as f64).sqrt()
}

impl Dop853 {
    pub fn new(tol: f64) -> Self {
        Dop853 { tol, ..Default::default() }
    }

    /// Integrates `y' = f(t, y)` from `t0` to `t1` in place.
    ///
    /// Only the first `n_err` components enter step-size control; trailing
    /// components are carried along as quadratures. Steps are clipped so that
    /// every time in `stops` (sorted, inside `[t0, t1]`) is hit exactly and
    /// reported through `on_stop`.
    #[allow(clippy::too_many_arguments)]
    pub fn integrate<F, S>(
        &self,
        mut f: F,
        t0: f64,
        t1: f64,
        y: &mut [C64],
        n_err: usize,
        stops: &[f64],
        mut on_stop: S,
    ) -> Result<Stats>
    where
        F: FnMut(f64, &[C64], &mut [C64]) -> Result<()>,
        S: FnMut(f64, &[C64]),
    {
        let n = y.len();
        let n_err = n_err.min(n);
        let mut stats = Stats::default();
        let mut stop_iter = stops.iter().copied().filter(|&s| s >= t0 && s <= t1).peekable();
        while let Some(&s) = stop_iter.peek() {
            if s > t0 {
                break;
            }
            on_stop(t0, y);
            stop_iter.next();
        }
        if t1 <= t0 {
            return Ok(stats);
        }

        let mut k = vec![vec![C64::new(0.0, 0.0); n]; STAGES + 1];
        let mut ytmp = vec![C64::new(0.0, 0.0); n];
        let mut ynew = vec![C64::new(0.0, 0.0); n];
        let mut err5 = vec![C64::new(0.0, 0.0); n_err];
        let mut err3 = vec![C64::new(0.0, 0.0); n_err];

        let mut t = t0;
        f(t, y, &mut k[0])?;
        stats.evaluations += 1;
        let mut h_abs = self.initial_step(&mut f, t, y, &k[0].clone(), t1 - t0, n_err, &mut stats)?;

        while t < t1 {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(Error::Numerical(format!("integrator exceeded {} steps at t = {t:e}", self.max_steps)));
            }
            let target = stop_iter.peek().copied().unwrap_or(t1).min(t1);
            let mut rejected = false;
            loop {
                let min_step = 10.0 * f64::EPSILON * t.abs().max(1e-300);
                if h_abs < min_step {
                    return Err(Error::Numerical(format!("step size underflow at t = {t:e}")));
                }
                let clipped = t + h_abs >= target;
                let (h, t_new) = if clipped { (target - t, target) } else { (h_abs, t + h_abs) };

                for s in 1..STAGES {
                    for i in 0..n {
                        let mut acc = C64::new(0.0, 0.0);
                        for (j, kj) in k.iter().enumerate().take(s) {
                            let a = A[s][j];
                            if a != 0.0 {
                                acc += kj[i] * a;
                            }
                        }
                        ytmp[i] = y[i] + acc * h;
                    }
                    f(t + C[s] * h, &ytmp, &mut k[s])?;
                }
                for i in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    for (j, kj) in k.iter().enumerate().take(STAGES) {
                        acc += kj[i] * B[j];
                    }
                    ynew[i] = y[i] + acc * h;
                }
                f(t_new, &ynew, &mut k[STAGES])?;
                stats.evaluations += STAGES;

                for i in 0..n_err {
                    let mut e5 = C64::new(0.0, 0.0);
                    let mut e3 = C64::new(0.0, 0.0);
                    for (j, kj) in k.iter().enumerate() {
                        e5 += kj[i] * E5[j];
                        e3 += kj[i] * E3[j];
                    }
                    err5[i] = e5 / self.tol;
                    err3[i] = e3 / self.tol;
                }
                let e5n: f64 = err5.iter().map(|z| z.norm_sqr()).sum();
                let e3n: f64 = err3.iter().map(|z| z.norm_sqr()).sum();
                let error_norm = if e5n == 0.0 && e3n == 0.0 {
                    0.0
                } else {
                    let denom = e5n + 0.01 * e3n;
                    h.abs() * e5n / (denom * n_err.max(1) as f64).sqrt()
                };
                if !error_norm.is_finite() {
                    return Err(Error::Numerical(format!("non-finite error estimate at t = {t:e}")));
                }

                if error_norm < 1.0 {
                    let mut factor =
                        if error_norm == 0.0 { MAX_FACTOR } else { (SAFETY * error_norm.powf(ERROR_EXPONENT)).min(MAX_FACTOR) };
                    if rejected {
                        factor = factor.min(1.0);
                    }
                    // A step shortened to land on a stop says little about the next one.
                    if !clipped {
                        h_abs *= factor;
                    }
                    stats.accepted += 1;
                    t = t_new;
                    y.copy_from_slice(&ynew);
                    k.swap(0, STAGES);
                    break;
                } else {
                    h_abs *= (SAFETY * error_norm.powf(ERROR_EXPONENT)).max(MIN_FACTOR);
                    rejected = true;
                    stats.rejected += 1;
                }
            }
            while let Some(&s) = stop_iter.peek() {
                if s > t {
                    break;
                }
                on_stop(t, y);
                stop_iter.next();
            }
        }
        Ok(stats)
    }

    #[allow(clippy::too_many_arguments)]
    fn initial_step<F>(
        &self,
        f: &mut F,
        t0: f64,
        y0: &[C64],
        f0: &[C64],
        span: f64,
        n_err: usize,
        stats: &mut Stats,
    ) -> Result<f64>
    where
        F: FnMut(f64, &[C64], &mut [C64]) -> Result<()>,
    {
        let scale = self.tol;
        let d0 = rms(&y0[..n_err]) / scale;
        let d1 = rms(&f0[..n_err]) / scale;
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let y1: Vec<C64> = y0.iter().zip(f0).map(|(a, b)| a + b * h0).collect();
        let mut f1 = vec![C64::new(0.0, 0.0); y0.len()];
        f(t0 + h0, &y1, &mut f1)?;
        stats.evaluations += 1;
        let diff: Vec<C64> = f1[..n_err].iter().zip(&f0[..n_err]).map(|(a, b)| a - b).collect();
        let d2 = rms(&diff) / scale / h0;
        let h1 = if d1 <= 1e-15 && d2 <= 1e-15 { (h0 * 1e-3).max(1e-6 * span) } else { (0.01 / d1.max(d2)).powf(1.0 / 8.0) };
        Ok((100.0 * h0).min(h1).min(span))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let mut y = vec![C64::new(1.0, 0.0)];
        let lam = C64::new(-0.3, 2.0);
        Dop853::new(1e-12)
            .integrate(
                |_, y, dy| {
                    dy[0] = lam * y[0];
                    Ok(())
                },
                0.0,
                5.0,
                &mut y,
                1,
                &[],
                |_, _| {},
            )
            .unwrap();
        let exact = (lam * 5.0).exp();
        assert!((y[0] - exact).norm() < 1e-10);
    }

    #[test]
    fn stops_are_hit_exactly() {
        let mut y = vec![C64::new(1.0, 0.0)];
        let stops = [0.0, 0.25, 1.0, 2.0];
        let mut seen = vec![];
        Dop853::new(1e-10)
            .integrate(
                |_, y, dy| {
                    dy[0] = C64::new(0.0, -1.0) * y[0];
                    Ok(())
                },
                0.0,
                2.0,
                &mut y,
                1,
                &stops,
                |t, y| seen.push((t, y[0])),
            )
            .unwrap();
        assert_eq!(seen.len(), 4);
        for ((t, v), s) in seen.iter().zip(stops) {
            assert_eq!(*t, s);
            assert!((v - C64::new(0.0, -s).exp()).norm() < 1e-9);
        }
    }
}
