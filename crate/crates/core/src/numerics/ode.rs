//! Dormand-Prince 5(4) integrator with continuous (dense) output.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// An accepted step together with its dense-output polynomial.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    /// Derivative at `t1` (first-same-as-last stage).
    pub dy1: [f64; N],
    rcont: [[f64; N]; 5],
}

impl<const N: usize> Step<N> {
    /// Fifth-order continuous extension on `[t0, t1]`.
    pub fn interpolate(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let theta = (t - self.t0) / h;
        let theta1 = 1.0 - theta;
        let r = &self.rcont;
        std::array::from_fn(|i| r[0][i] + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i]))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ReachedEnd,
    Stopped,
    StepUnderflow,
    NonFinite,
    MaxSteps,
}

#[derive(Debug, Clone)]
pub struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub accepted: usize,
    pub rejected: usize,
    pub termination: Termination,
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    /// Steps smaller than `h_min_rel * |t|` (or `1e-300`) end the run.
    pub h_min_rel: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h_init: None, h_max: f64::INFINITY, h_min_rel: 1e-14, max_steps: 1_000_000 }
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

impl Dopri5 {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }

    /// Integrates `y' = rhs(t, y)` from `t0` towards `t_end`, calling
    /// `on_step` after every accepted step.
    pub fn integrate<const N: usize, F, C>(&self, mut rhs: F, t0: f64, y0: [f64; N], t_end: f64, mut on_step: C) -> Result<Outcome<N>>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        C: FnMut(&Step<N>) -> Control,
    {
        if t_end <= t0 {
            return Err(Error::Integrator(format!("empty interval [{t0}, {t_end}]")));
        }
        let mut t = t0;
        let mut y = y0;
        let mut k1 = rhs(t, &y);
        let mut h = self.h_init.unwrap_or_else(|| self.initial_step(&y, &k1, t_end - t0));
        let mut accepted = 0;
        let mut rejected = 0;
        let mut fac_old: f64 = 1e-4;
        let mut last_rejected = false;
        let termination = loop {
            if accepted + rejected >= self.max_steps {
                break Termination::MaxSteps;
            }
            if t >= t_end {
                break Termination::ReachedEnd;
            }
            let h_min = (self.h_min_rel * t.abs()).max(1e-300);
            if h < h_min {
                break Termination::StepUnderflow;
            }
            h = h.min(self.h_max);
            if t + h > t_end {
                h = t_end - t;
            }
            let k2 = rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
            let k3 = rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = rhs(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = rhs(t + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = rhs(t + h, &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
            let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = rhs(t + h, &y_new);

            let mut err_sq = 0.0;
            let mut finite = true;
            for i in 0..N {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err_sq += (e / sc) * (e / sc);
                finite &= y_new[i].is_finite() && k7[i].is_finite();
            }
            if !finite {
                // Shrink and retry; persistent non-finiteness ends the run.
                rejected += 1;
                h *= 0.25;
                if h < h_min {
                    break Termination::NonFinite;
                }
                last_rejected = true;
                continue;
            }
            let err = (err_sq / N as f64).sqrt();
            if err <= 1.0 {
                // Lund stabilisation (beta = 0.04) as in Hairer's code.
                let fac = (err.max(1e-10).powf(0.2 - 0.04 * 0.75) / fac_old.powf(0.04)) / 0.9;
                let fac = fac.clamp(0.1, 5.0);
                fac_old = err.max(1e-4);
                let rcont = {
                    let mut r = [[0.0; N]; 5];
                    for i in 0..N {
                        let ydiff = y_new[i] - y[i];
                        let bspl = h * k1[i] - ydiff;
                        r[0][i] = y[i];
                        r[1][i] = ydiff;
                        r[2][i] = bspl;
                        r[3][i] = ydiff - h * k7[i] - bspl;
                        r[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                    }
                    r
                };
                let step = Step { t0: t, t1: t + h, y0: y, y1: y_new, dy1: k7, rcont };
                accepted += 1;
                t += h;
                y = y_new;
                k1 = k7;
                let mut h_new = h / fac;
                if last_rejected {
                    h_new = h_new.min(h);
                }
                last_rejected = false;
                h = h_new;
                if on_step(&step) == Control::Stop {
                    break Termination::Stopped;
                }
            } else {
                rejected += 1;
                let fac = (err.powf(0.2 - 0.04 * 0.75) / 0.9).min(10.0);
                h /= fac;
                last_rejected = true;
            }
        };
        Ok(Outcome { t, y, accepted, rejected, termination })
    }

    fn initial_step<const N: usize>(&self, y: &[f64; N], dy: &[f64; N], span: f64) -> f64 {
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..N {
            let sc = self.atol + self.rtol * y[i].abs();
            d0 += (y[i] / sc).powi(2);
            d1 += (dy[i] / sc).powi(2);
        }
        let d0 = (d0 / N as f64).sqrt();
        let d1 = (d1 / N as f64).sqrt();
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(span).min(self.h_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_to_tolerance() {
        let solver = Dopri5::with_tolerances(1e-12, 1e-14);
        let out = solver.integrate(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 5.0, |_| Control::Continue).unwrap();
        assert_eq!(out.termination, Termination::ReachedEnd);
        assert!((out.y[0] - (-5.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn dense_output_is_high_order() {
        // Harmonic oscillator, compare interpolant against exact solution.
        let solver = Dopri5::with_tolerances(1e-9, 1e-12);
        let mut worst: f64 = 0.0;
        solver
            .integrate(
                |_, y: &[f64; 2]| [y[1], -y[0]],
                0.0,
                [0.0, 1.0],
                10.0,
                |step| {
                    for j in 1..10 {
                        let t = step.t0 + (step.t1 - step.t0) * j as f64 / 10.0;
                        let y = step.interpolate(t);
                        worst = worst.max((y[0] - t.sin()).abs()).max((y[1] - t.cos()).abs());
                    }
                    Control::Continue
                },
            )
            .unwrap();
        assert!(worst < 1e-8, "dense output error {worst:e}");
    }

    #[test]
    fn stop_request_is_honoured() {
        let solver = Dopri5::default();
        let out = solver
            .integrate(
                |_, _: &[f64; 1]| [1.0],
                0.0,
                [0.0],
                10.0,
                |s| {
                    if s.t1 > 1.0 {
                        Control::Stop
                    } else {
                        Control::Continue
                    }
                },
            )
            .unwrap();
        assert_eq!(out.termination, Termination::Stopped);
        assert!(out.t > 1.0 && out.t < 10.0);
    }
}
