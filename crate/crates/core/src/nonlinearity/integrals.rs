//! `f̃(s) = ∫₀^s f(z)/z dz` and `F(s) = ∫₀^s f(z) dz`.
//!
//! Both are computed on `(0, s]` through `z = s e^{-v}`, `v ∈ [0, ∞)`, which
//! turns the origin into a decaying tail and resolves power-type behaviour
//! at `0` without special casing.

use std::cell::RefCell;

use super::expr::Expr;
use crate::error::{Error, Result};
use crate::numerics::{integrate_to_infinity, Tolerance};

/// Minimal decay rate of `ln f(e^u)` per unit of `u` as `u → -∞` for
/// `∫₀ f(z)/z dz` to be accepted as convergent.
pub const ORIGIN_DECAY_RATE: f64 = 0.01;

/// `f(e^u)`, using the direct path where it is safe and the log-domain path
/// elsewhere.
pub(crate) fn value_at_log(f: &Expr, u: f64) -> Result<f64> {
    if u.abs() < 690.0 {
        f.eval(u.exp())
    } else {
        let ln_f = f.ln_eval(u)?;
        if ln_f > f64::MAX.ln() {
            return Err(Error::OutOfRange { s: u.exp(), log_value: ln_f });
        }
        Ok(ln_f.exp())
    }
}

/// Probe `f(z)/z` near the origin: the log-slope of `f` between
/// `z = e^{-100}` and `z = e^{-50}` must exceed [`ORIGIN_DECAY_RATE`].
pub fn origin_probe(f: &Expr) -> Result<f64> {
    let (u0, u1) = (-100.0, -50.0);
    let a = f.ln_eval(u0)?;
    let b = f.ln_eval(u1)?;
    if a == f64::NEG_INFINITY {
        return Ok(f64::INFINITY);
    }
    let rate = (b - a) / (u1 - u0);
    if rate < ORIGIN_DECAY_RATE {
        return Err(Error::DivergentAtOrigin(format!("ln f(e^u) decays at rate {rate:.4} as u -> -inf (need > {ORIGIN_DECAY_RATE})")));
    }
    Ok(rate)
}

fn integrate_log_substituted(f: &Expr, s: f64, tol: f64, weight: f64) -> Result<f64> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::Precondition(format!("integral upper limit must be finite and >= 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let ln_s = s.ln();
    let failure = RefCell::new(None);
    let integrand = |v: f64| {
        let u = ln_s - v;
        match value_at_log(f, u) {
            Ok(fv) => fv * (weight * u).exp(),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let result = integrate_to_infinity(integrand, 0.0, Tolerance::relative(tol));
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    result.map(|r| r.value)
}

/// `f̃(s) = ∫₀^s z⁻¹ f(z) dz` to relative accuracy `tol`.
pub fn tilde_f(f: &Expr, s: f64, tol: f64) -> Result<f64> {
    origin_probe(f)?;
    integrate_log_substituted(f, s, tol, 0.0)
}

/// `F(s) = ∫₀^s f(z) dz` to relative accuracy `tol`.
pub fn antiderivative_f(f: &Expr, s: f64, tol: f64) -> Result<f64> {
    integrate_log_substituted(f, s, tol, 1.0)
}
