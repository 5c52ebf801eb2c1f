//! Blow-up of `y' = f(y)`, `y(0) = y₀ > 0`.
//!
//! With `H(s) = ∫_s^∞ dz/f(z)` the solution satisfies `H(y(t)) = T - t`, so
//! the blow-up time is `T = H(y₀)` and trajectories are obtained by
//! inverting `H`. All integrals use `z = s e^u`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::Expr;
use crate::numerics::{brent, integrate_to_infinity, linear_fit, logspace, Control, Dopri5, Tolerance};

/// Tail exponent margin: `s/f(s)` must decay at least like `s^{-δ}`.
pub const TAIL_DELTA: f64 = 0.05;

/// Relative residual accepted when inverting `H`.
pub const INVERSION_RESIDUAL: f64 = 1e-10;

/// Log-slope of `s/f(s)` on `s ∈ {1e6, .., 1e12}`. Errors with
/// [`Error::NonIntegrableTail`] unless it is below `-TAIL_DELTA`.
pub fn tail_probe(f: &Expr) -> Result<f64> {
    let s: Vec<f64> = (6..=12).map(|k| 10f64.powi(k)).collect();
    let x: Vec<f64> = s.iter().map(|s| s.ln()).collect();
    let y = x.iter().map(|&u| Ok(u - f.ln_eval(u)?)).collect::<Result<Vec<_>>>()?;
    let (slope, _, _) = linear_fit(&x, &y);
    if !(slope < -TAIL_DELTA) {
        return Err(Error::NonIntegrableTail(format!(
            "s/f(s) decays like s^{slope:.4} on [1e6, 1e12]; need an exponent below -{TAIL_DELTA}"
        )));
    }
    Ok(slope)
}

/// `H(s) = ∫_s^∞ dz/f(z)`.
pub fn h_integral(f: &Expr, s: f64, tol: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("H needs s > 0, got {s}")));
    }
    let ln_s = s.ln();
    let mut failure = None;
    let r = integrate_to_infinity(
        |u| match f.ln_eval(ln_s + u) {
            Ok(l) => (ln_s + u - l).exp(),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        Tolerance::relative(tol),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r?.value)
}

/// Blow-up time `T = H(y₀)` after the tail probe.
pub fn blowup_time(f: &Expr, y0: f64, tol: f64) -> Result<f64> {
    if !(y0 > 0.0 && y0.is_finite()) {
        return Err(Error::InvalidParameter(format!("y0 = {y0} must be positive")));
    }
    tail_probe(f)?;
    h_integral(f, y0, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupProfile {
    pub y0: f64,
    pub t_blowup: f64,
    pub t: Vec<f64>,
    /// `T - t`, kept separately because `t` loses it close to `T`.
    pub t_minus_t: Vec<f64>,
    pub y: Vec<f64>,
    /// `(f(y)/y) (T - t)`.
    pub rho: Vec<f64>,
}

impl BlowupProfile {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Solves `H(y) = τ` for `y`, given `H(y₀) = t_blowup >= τ`.
fn invert_h(f: &Expr, y0: f64, t_blowup: f64, tau: f64) -> Result<f64> {
    if tau == t_blowup {
        return Ok(y0);
    }
    let target = tau.ln();
    let g = |v: f64| -> Result<f64> { Ok(h_integral(f, v.exp(), 1e-13)?.ln() - target) };
    let lo = y0.ln();
    let mut step = 1.0;
    let mut hi = lo + step;
    while g(hi)? > 0.0 {
        step *= 2.0;
        hi = lo + step;
        if step > 1e6 {
            return Err(Error::RootFinding(format!("cannot bracket H(y) = {tau:e}")));
        }
    }
    let mut failure = None;
    let v = brent(
        |v| match g(v) {
            Ok(x) => x,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-15,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let y = v?.exp();
    let residual = (h_integral(f, y, 1e-13)? - tau).abs() / tau;
    if residual > INVERSION_RESIDUAL {
        return Err(Error::RootFinding(format!("H inversion residual {residual:e} at T - t = {tau:e}")));
    }
    Ok(y)
}

fn rho(f: &Expr, y: f64, tau: f64) -> Result<f64> {
    Ok((f.ln_at(y)? - y.ln() + tau.ln()).exp())
}

/// Trajectory sampled at remaining times `T - t = τ_i`, each in `(0, T]`.
pub fn trajectory_remaining(f: &Expr, y0: f64, taus: &[f64]) -> Result<BlowupProfile> {
    let t_blowup = blowup_time(f, y0, 1e-13)?;
    let mut p = BlowupProfile { y0, t_blowup, t: vec![], t_minus_t: vec![], y: vec![], rho: vec![] };
    for &tau in taus {
        if !(tau > 0.0) {
            return Err(Error::InvalidParameter(format!("t >= T (T - t = {tau:e})")));
        }
        if tau > t_blowup {
            return Err(Error::InvalidParameter(format!("T - t = {tau} exceeds T = {t_blowup}")));
        }
        let y = invert_h(f, y0, t_blowup, tau)?;
        p.t.push(t_blowup - tau);
        p.t_minus_t.push(tau);
        p.y.push(y);
        p.rho.push(rho(f, y, tau)?);
    }
    Ok(p)
}

/// Trajectory on an increasing grid `t_i ∈ [0, T)`.
pub fn trajectory(f: &Expr, y0: f64, t_grid: &[f64]) -> Result<BlowupProfile> {
    if t_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter("t-grid must be strictly increasing".into()));
    }
    if t_grid.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidParameter("t-grid must start at t >= 0".into()));
    }
    let t_blowup = blowup_time(f, y0, 1e-13)?;
    if let Some(&t) = t_grid.iter().find(|&&t| t >= t_blowup) {
        return Err(Error::InvalidParameter(format!("t = {t} is not below T = {t_blowup}")));
    }
    let taus: Vec<f64> = t_grid.iter().map(|&t| t_blowup - t).collect();
    let mut p = trajectory_remaining(f, y0, &taus)?;
    p.t = t_grid.to_vec();
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateWindow {
    /// `t ∈ [t_a, t_b] ⊂ (0, T)`.
    Time { t_a: f64, t_b: f64 },
    /// `T - t ∈ [lo, hi]`.
    Remaining { hi: f64, lo: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub rho_min: f64,
    pub rho_max: f64,
    pub pass: bool,
    pub profile: BlowupProfile,
}

/// Scans `ρ = (f(y)/y)(T - t)` on a grid log-spaced in `T - t` (8 points
/// per decade, at least 9).
pub fn verify_rate(f: &Expr, y0: f64, window: RateWindow) -> Result<RateReport> {
    let t_blowup = blowup_time(f, y0, 1e-13)?;
    let (hi, lo) = match window {
        RateWindow::Time { t_a, t_b } => {
            if !(0.0 < t_a && t_a < t_b && t_b < t_blowup) {
                return Err(Error::InvalidParameter(format!("window [{t_a}, {t_b}] not inside (0, {t_blowup})")));
            }
            (t_blowup - t_a, t_blowup - t_b)
        }
        RateWindow::Remaining { hi, lo } => {
            if !(0.0 < lo && lo < hi && hi <= t_blowup) {
                return Err(Error::InvalidParameter(format!("need 0 < {lo} < {hi} <= T = {t_blowup}")));
            }
            (hi, lo)
        }
    };
    let points = ((hi / lo).log10() * 8.0).ceil().max(8.0) as usize + 1;
    let taus = logspace(hi, lo, points);
    let profile = trajectory_remaining(f, y0, &taus)?;
    let rho_min = profile.rho.iter().copied().fold(f64::INFINITY, f64::min);
    let rho_max = profile.rho.iter().copied().fold(0.0, f64::max);
    Ok(RateReport { rho_min, rho_max, pass: rho_min > 0.0 && rho_max.is_finite(), profile })
}

/// Forward Dormand-Prince integration of `(ln y)' = f(y)/y` on
/// `[0, frac T]`, compared with the inversion trajectory at `samples` times.
/// Returns the largest relative deviation in `y`.
pub fn forward_cross_check(f: &Expr, y0: f64, frac: f64, samples: usize) -> Result<f64> {
    if !(0.0 < frac && frac < 1.0) || samples == 0 {
        return Err(Error::InvalidParameter("need 0 < frac < 1 and samples > 0".into()));
    }
    let t_blowup = blowup_time(f, y0, 1e-13)?;
    let t_end = frac * t_blowup;
    let times: Vec<f64> = (1..=samples).map(|i| t_end * i as f64 / samples as f64).collect();
    let reference = trajectory(f, y0, &times)?;
    let mut failure = None;
    let mut got = Vec::with_capacity(samples);
    let mut next = 0;
    let solver = Dopri5::with_tolerances(1e-12, 1e-14);
    let outcome = solver.integrate(
        |_, v: &[f64; 1]| match f.ln_eval(v[0]) {
            Ok(l) => [(l - v[0]).exp()],
            Err(e) => {
                failure.get_or_insert(e);
                [f64::NAN]
            }
        },
        0.0,
        [y0.ln()],
        t_end,
        |step| {
            while next < times.len() && times[next] <= step.t1 {
                got.push(step.interpolate(times[next])[0].exp());
                next += 1;
            }
            Control::Continue
        },
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    if got.len() + 1 == samples && (outcome.t / t_end - 1.0).abs() < 1e-12 {
        got.push(outcome.y[0].exp());
    }
    if got.len() != samples {
        return Err(Error::Integrator(format!("forward run stopped after {} of {samples} samples", got.len())));
    }
    Ok(got.iter().zip(&reference.y).map(|(a, b)| (a / b - 1.0).abs()).fold(0.0, f64::max))
}
