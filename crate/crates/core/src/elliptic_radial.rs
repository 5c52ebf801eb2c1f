//! Radial shooting for `-(r^{n-1} v')' = r^{n-1} f(v)`, `v(0) = v₀`,
//! `v'(0) = 0`.
//!
//! The unknowns are `(v, w)` with `w = r^{n-1} v'`; the first point is
//! placed with the regular-centre expansion `v ≈ v₀ - f(v₀) r²/(2n)`.
//! `f` is extended by `0` for negative arguments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::builders::{radial_residual, Jet2};
use crate::nonlinearity::{antiderivative_f, critical_exponents, Case, Expr};
use crate::numerics::{brent, linear_fit, Control, Dopri5, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootOptions {
    pub r_max: f64,
    /// Relative tolerance of the integrator and of the crossing radius.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self { r_max: 1e3, tol: 1e-12, max_steps: 2_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShootOutcome {
    CrossesZero {
        radius: f64,
    },
    /// Positive on `[0, r_max]`. `decay_exponent` is the fitted log-slope
    /// of `v` over the last decade of `r`.
    PositiveGlobal {
        r_max: f64,
        decay_exponent: f64,
    },
    Inconclusive {
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialSample {
    pub r: f64,
    pub v: f64,
    pub dv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootDiagnostics {
    pub r_start: f64,
    pub accepted: usize,
    pub rejected: usize,
    /// Accepted steps where, with `v > 0`, `v'` was positive or
    /// `r^{n-1} v'` increased.
    pub monotonicity_violations: usize,
    /// Largest relative gap between `-r^{n-1} v'(r)` and
    /// `∫₀^r ρ^{n-1} f(v(ρ)) dρ` (accumulated by Gauss quadrature on the
    /// dense output) at the accepted steps.
    pub identity_max_rel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootResult {
    pub n: u32,
    pub v0: f64,
    pub outcome: ShootOutcome,
    pub samples: Vec<RadialSample>,
    pub diagnostics: ShootDiagnostics,
}

impl ShootResult {
    pub fn crosses_zero(&self) -> Option<f64> {
        match self.outcome {
            ShootOutcome::CrossesZero { radius } => Some(radius),
            _ => None,
        }
    }

    pub fn is_positive_global(&self) -> bool {
        matches!(self.outcome, ShootOutcome::PositiveGlobal { .. })
    }
}

fn f_ext(f: &Expr, v: f64) -> Result<f64> {
    if v <= 0.0 {
        Ok(0.0)
    } else {
        f.eval(v)
    }
}

// 5-point Gauss-Legendre on [-1, 1].
const GL_X: [f64; 5] = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
const GL_W: [f64; 5] =
    [0.568_888_888_888_888_9, 0.478_628_670_499_366_47, 0.478_628_670_499_366_47, 0.236_926_885_056_189_08, 0.236_926_885_056_189_08];

pub fn shoot(f: &Expr, n: u32, v0: f64, opts: &ShootOptions) -> Result<ShootResult> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    if !(v0 > 0.0 && v0.is_finite()) {
        return Err(Error::InvalidParameter(format!("v0 = {v0} must be positive")));
    }
    if !(opts.r_max > 0.0 && opts.tol > 0.0) {
        return Err(Error::InvalidParameter("r_max and tol must be positive".into()));
    }
    let nf = f64::from(n);
    let f0 = f_ext(f, v0)?;
    let scale = if f0 > 0.0 { (v0 / f0).sqrt() } else { 1.0 };
    let r0 = (1e-4 * scale).min(1e-3 * opts.r_max);
    let v_start = v0 - f0 * r0 * r0 / (2.0 * nf);
    let w_start = -f0 * r0.powf(nf) / nf;
    let mut samples = vec![RadialSample { r: 0.0, v: v0, dv: 0.0 }, RadialSample { r: r0, v: v_start, dv: w_start / r0.powf(nf - 1.0) }];

    let mut failure: Option<Error> = None;
    let mut crossing: Option<f64> = None;
    let mut violations = 0;
    let mut flux = f0 * r0.powf(nf) / nf;
    let mut identity_max_rel: f64 = 0.0;
    let solver = Dopri5 { max_steps: opts.max_steps, ..Dopri5::with_tolerances(opts.tol, opts.tol * v0 * 1e-3) };
    let rhs = |r: f64, y: &[f64; 2]| -> [f64; 2] {
        let fv = f_ext(f, y[0]).unwrap_or(f64::NAN);
        [y[1] / r.powf(nf - 1.0), -r.powf(nf - 1.0) * fv]
    };
    let outcome = solver.integrate(rhs, r0, [v_start, w_start], opts.r_max, |step| {
        let (ra, rb) = (step.t0, step.t1);
        let mut chunk = 0.0;
        for (x, w) in GL_X.iter().zip(GL_W) {
            let r = 0.5 * (ra + rb) + 0.5 * (rb - ra) * x;
            let v = step.interpolate(r)[0];
            match f_ext(f, v) {
                Ok(fv) => chunk += w * r.powf(nf - 1.0) * fv,
                Err(e) => {
                    failure.get_or_insert(e);
                    return Control::Stop;
                }
            }
        }
        flux += 0.5 * (rb - ra) * chunk;
        let w1 = step.y1[1];
        if step.y1[0] > 0.0 {
            let gap = (flux + w1).abs() / flux.abs().max(f64::MIN_POSITIVE);
            identity_max_rel = identity_max_rel.max(gap);
            if w1 > 0.0 || w1 > step.y0[1] + 1e-12 * step.y0[1].abs() {
                violations += 1;
            }
        }
        if step.y1[0] <= 0.0 {
            let root = brent(|r| step.interpolate(r)[0], ra, rb, opts.tol * rb);
            match root {
                Ok(r) => crossing = Some(r),
                Err(e) => {
                    failure.get_or_insert(e);
                }
            }
            return Control::Stop;
        }
        samples.push(RadialSample { r: rb, v: step.y1[0], dv: w1 / rb.powf(nf - 1.0) });
        Control::Continue
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let diagnostics_from =
        |accepted, rejected| ShootDiagnostics { r_start: r0, accepted, rejected, monotonicity_violations: violations, identity_max_rel };
    let (outcome, diagnostics) = match outcome {
        Ok(out) => {
            let diag = diagnostics_from(out.accepted, out.rejected);
            let oc = if let Some(radius) = crossing {
                ShootOutcome::CrossesZero { radius }
            } else {
                match out.termination {
                    Termination::ReachedEnd => {
                        ShootOutcome::PositiveGlobal { r_max: opts.r_max, decay_exponent: tail_exponent(&samples, opts.r_max) }
                    }
                    t => ShootOutcome::Inconclusive { reason: format!("integrator stopped at r = {:e}: {t:?}", out.t) },
                }
            };
            (oc, diag)
        }
        Err(e) => (ShootOutcome::Inconclusive { reason: e.to_string() }, diagnostics_from(0, 0)),
    };
    Ok(ShootResult { n, v0, outcome, samples, diagnostics })
}

fn tail_exponent(samples: &[RadialSample], r_max: f64) -> f64 {
    let tail: Vec<&RadialSample> = samples.iter().filter(|s| s.r >= 0.1 * r_max && s.v > 0.0).collect();
    if tail.len() < 2 {
        return f64::NAN;
    }
    let x: Vec<f64> = tail.iter().map(|s| s.r.ln()).collect();
    let y: Vec<f64> = tail.iter().map(|s| s.v.ln()).collect();
    linear_fit(&x, &y).0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchEntry {
    pub v0: f64,
    pub outcome: ShootOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub n: u32,
    pub r_max: f64,
    pub entries: Vec<SearchEntry>,
    /// Some `v₀` stayed positive up to `r_max`.
    pub existence_corroborated: bool,
}

pub fn entire_solution_search(f: &Expr, n: u32, v0_grid: &[f64], opts: &ShootOptions) -> Result<SearchSummary> {
    let mut entries = Vec::with_capacity(v0_grid.len());
    for &v0 in v0_grid {
        let r = shoot(f, n, v0, opts)?;
        entries.push(SearchEntry { v0, outcome: r.outcome });
    }
    let existence_corroborated = entries.iter().any(|e| matches!(e.outcome, ShootOutcome::PositiveGlobal { .. }));
    Ok(SearchSummary { n, r_max: opts.r_max, entries, existence_corroborated })
}

/// `u(r) = c_p r^{-β}`, `β = 2/(p-1)`, solving `-Δu = u^p` away from `0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularSteadyState {
    pub p: f64,
    pub n: u32,
    pub beta: f64,
    pub c_p: f64,
}

impl SingularSteadyState {
    pub fn eval(&self, r: f64) -> f64 {
        self.c_p * r.powf(-self.beta)
    }

    /// Largest relative residual of `-Δu = u^p` on the given radii.
    pub fn max_residual(&self, radii: &[f64]) -> Result<f64> {
        let f = Expr::power(self.p);
        let mut worst: f64 = 0.0;
        for &r in radii {
            let jet = Jet2::var(r).powf(-self.beta).scale(self.c_p);
            worst = worst.max(radial_residual(&f, self.n, r, jet)?);
        }
        Ok(worst)
    }
}

pub fn singular_steady_state(p: f64, n: u32) -> Result<SingularSteadyState> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("singular steady state needs n >= 3, got {n}")));
    }
    let ex = critical_exponents(n, Case::Elliptic)?;
    let (p_sg, p_s) = (ex.p_sg.value(), ex.p_s.value());
    if !(p > p_sg && p < p_s) {
        return Err(Error::InvalidParameter(format!("need p_sg = {p_sg} < p = {p} < p_S = {p_s}")));
    }
    let beta = 2.0 / (p - 1.0);
    let c_p = (beta * (f64::from(n) - 2.0 - beta)).powf(1.0 / (p - 1.0));
    Ok(SingularSteadyState { p, n, beta, c_p })
}

/// `φ(s) = s f(s) - (p_S + 1) F(s)` with `F(s) = ∫₀^s f`.
pub fn pohozaev_phi(f: &Expr, n: u32, s: f64) -> Result<f64> {
    let p_s = critical_exponents(n, Case::Elliptic)?.p_s;
    if !p_s.is_finite() {
        return Err(Error::InvalidParameter(format!("p_S is infinite for n = {n}")));
    }
    Ok(s * f.eval(s)? - (p_s.value() + 1.0) * antiderivative_f(f, s, 1e-12)?)
}

/// Largest grid point `s₀` such that `φ >= 0` on every grid point up to
/// `s₀`, or `None` if `φ` is already negative at the first point.
pub fn phi_nonnegative_up_to(f: &Expr, n: u32, s_grid: &[f64]) -> Result<Option<f64>> {
    let mut last = None;
    for &s in s_grid {
        if pohozaev_phi(f, n, s)? < 0.0 {
            break;
        }
        last = Some(s);
    }
    Ok(last)
}
