//! Constructors for the standard families of nonlinearities.

use serde::{Deserialize, Serialize};

use super::exponents::{critical_exponents, Case};
use super::expr::{iterated_exp_zero, Expr, PiecewisePower};
use crate::error::{Error, Result};

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        invalid(msg())
    }
}

/// Slowly varying factors `L(x)`; substituting `x = s + 1/s` gives the
/// two-sided variant (slow variation at both `0` and `∞`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SlowFactor {
    /// `log^a(K + x)`, `K > 1`.
    LogPower { a: f64, k: f64 },
    /// `log_m(K + x)`, `K > exp^m(0)`.
    IteratedLog { m: u32, k: f64 },
    /// `exp(log x / log(K + |log x|))`, `K > 1`.
    LogOverLogLog { k: f64 },
    /// `exp(|log x|^ν)`, `ν ∈ (0, 1)`.
    StretchedExp { nu: f64 },
    /// `[log(3 + x)]^{sin[log log(3 + x)]}`.
    OscillatingLog,
    /// `exp[|log x|^ν cos(|log x|^ν)]`, `ν ∈ (0, 1/2)`.
    OscillatingStretchedExp { nu: f64 },
    /// `1 + a sin(log^ν(2 + x))`, `ν ∈ (0, 1)`, `|a| < 1`.
    SineOfLogPower { a: f64, nu: f64 },
}

impl SlowFactor {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SlowFactor::LogPower { a, k } => require(k > 1.0 && a.is_finite(), || format!("log^a(K+s) needs K > 1 (got K={k})")),
            SlowFactor::IteratedLog { m, k } => {
                let floor = if m == 0 { 0.0 } else { iterated_exp_zero(m) };
                require(m >= 1 && k > floor, || format!("log_m(K+s) needs m >= 1 and K > exp^m(0) = {floor} (got m={m}, K={k})"))
            }
            SlowFactor::LogOverLogLog { k } => require(k > 1.0, || format!("exp(log s/log(K+|log s|)) needs K > 1 (got {k})")),
            SlowFactor::StretchedExp { nu } => require(nu > 0.0 && nu < 1.0, || format!("exp(|log s|^nu) needs nu in (0,1) (got {nu})")),
            SlowFactor::OscillatingLog => Ok(()),
            SlowFactor::OscillatingStretchedExp { nu } => {
                require(nu > 0.0 && nu < 0.5, || format!("exp(|log s|^nu cos |log s|^nu) needs nu in (0,1/2) (got {nu})"))
            }
            SlowFactor::SineOfLogPower { a, nu } => require(nu > 0.0 && nu < 1.0 && a.abs() < 1.0, || {
                format!("1 + a sin(log^nu(2+s)) needs nu in (0,1) and |a| < 1 (got a={a}, nu={nu})")
            }),
        }
    }

    /// `L(x)` for the argument expression `x`.
    pub fn apply(&self, x: Expr) -> Result<Expr> {
        self.validate()?;
        Ok(match *self {
            SlowFactor::LogPower { a, k } => x.shifted_log(k).pow_const(a),
            SlowFactor::IteratedLog { m, k } => x.iterated_log(m, k)?,
            SlowFactor::LogOverLogLog { k } => (x.clone().ln() / x.abs_log().shifted_log(k)).exp(),
            SlowFactor::StretchedExp { nu } => x.abs_log().pow_const(nu).exp(),
            SlowFactor::OscillatingLog => {
                let l = x.shifted_log(3.0);
                l.clone().pow(l.ln().sin())
            }
            SlowFactor::OscillatingStretchedExp { nu } => {
                let y = x.abs_log().pow_const(nu);
                (y.clone() * y.cos()).exp()
            }
            SlowFactor::SineOfLogPower { a, nu } => Expr::constant(1.0) + Expr::constant(a) * x.shifted_log(2.0).pow_const(nu).sin(),
        })
    }

    /// One representative of every catalog entry with admissible parameters.
    pub fn catalog() -> Vec<SlowFactor> {
        vec![
            SlowFactor::LogPower { a: 2.0, k: 2.0 },
            SlowFactor::LogPower { a: -1.5, k: 2.0 },
            SlowFactor::IteratedLog { m: 1, k: 2.0 },
            SlowFactor::IteratedLog { m: 2, k: 3.0 },
            SlowFactor::IteratedLog { m: 3, k: 16.0 },
            SlowFactor::LogOverLogLog { k: 2.0 },
            SlowFactor::StretchedExp { nu: 0.5 },
            SlowFactor::OscillatingLog,
            SlowFactor::OscillatingStretchedExp { nu: 0.25 },
            SlowFactor::SineOfLogPower { a: 0.5, nu: 0.5 },
        ]
    }
}

/// `s^p L(s)`, or `s^p L(s + 1/s)` when `two_sided`.
pub fn power_times_slow(p: f64, factor: SlowFactor, two_sided: bool) -> Result<Expr> {
    require(p > 0.0 && p.is_finite(), || format!("power must be positive, got {p}"))?;
    let x = if two_sided { Expr::var().reciprocal_augment() } else { Expr::var() };
    Ok(Expr::power(p) * factor.apply(x)?)
}

/// Piecewise power law with prescribed breakpoints and exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePowerSpec {
    /// `exponents[0]` on `[0, s_2)`, then one exponent per later interval.
    pub exponents: Vec<f64>,
    /// `s_2 < s_3 < ...` (entries may be `inf` when `ln s_i > 709`).
    pub breakpoints: Vec<f64>,
    pub ln_breakpoints: Vec<f64>,
    /// `ln c_k` with `f(s) = c_k s^{exponents[k]}` on interval `k`.
    pub ln_coefficients: Vec<f64>,
    pub m_bar: f64,
    pub p_bar: f64,
}

impl PiecewisePowerSpec {
    pub fn to_expr(&self) -> Result<Expr> {
        let ln_first = self.exponents[0] * self.ln_breakpoints[0];
        Ok(Expr::PiecewisePower(PiecewisePower::from_exponents(self.ln_breakpoints.clone(), ln_first, self.exponents.clone())?))
    }
}

/// Oscillating power law touching `s^p` at `s_2, s_4, ...` and `s^m` at
/// `s_3, s_5, ...`, with elasticity in `{p, m̄, p̄}` where `m̄ ∈ (ℓ, m)` and
/// `p̄ ∈ (p, p_star)` are midpoints. `n_segments` counts the intervals
/// after `[0, s_2)`.
pub fn build_piecewise_power(ell: f64, m: f64, p: f64, p_star: f64, n_segments: usize) -> Result<PiecewisePowerSpec> {
    require(1.0 < ell && ell < m && m < p && p < p_star, || {
        format!("need 1 < l < m < p < p_star, got l={ell}, m={m}, p={p}, p_star={p_star}")
    })?;
    require(n_segments >= 2, || format!("need at least 2 segments, got {n_segments}"))?;
    if !p_star.is_finite() {
        return invalid("p_star must be finite (replace an infinite p_* by a finite p > 1)");
    }
    let m_bar = 0.5 * (ell + m);
    let p_bar = 0.5 * (p + p_star);
    let mut ln_b = vec![2f64.ln()];
    let mut exponents = vec![p];
    for j in 0..n_segments {
        let last = *ln_b.last().unwrap();
        if j % 2 == 0 {
            exponents.push(m_bar);
            if j + 1 < n_segments {
                ln_b.push(last * (p - m_bar) / (m - m_bar));
            }
        } else {
            exponents.push(p_bar);
            if j + 1 < n_segments {
                ln_b.push(last * (p_bar - m) / (p_bar - p));
            }
        }
    }
    let pw = PiecewisePower::from_exponents(ln_b.clone(), p * ln_b[0], exponents.clone())?;
    let mut ln_coefficients = vec![0.0];
    for (k, &e) in exponents.iter().enumerate().skip(1) {
        ln_coefficients.push(pw.ln_values[k - 1] - e * ln_b[k - 1]);
    }
    Ok(PiecewisePowerSpec {
        exponents,
        breakpoints: ln_b.iter().map(|l| l.exp()).collect(),
        ln_breakpoints: ln_b,
        ln_coefficients,
        m_bar,
        p_bar,
    })
}

// ---------------------------------------------------------------------------
// Second-order forward-mode jets used to verify closed-form solutions.

#[derive(Debug, Clone, Copy)]
pub(crate) struct Jet2 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet2 {
    pub fn var(x: f64) -> Self {
        Self { v: x, d1: 1.0, d2: 0.0 }
    }
    pub fn cst(c: f64) -> Self {
        Self { v: c, d1: 0.0, d2: 0.0 }
    }
    pub fn add(self, o: Self) -> Self {
        Self { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }
    pub fn mul(self, o: Self) -> Self {
        Self { v: self.v * o.v, d1: self.d1 * o.v + self.v * o.d1, d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2 }
    }
    pub fn scale(self, c: f64) -> Self {
        Self { v: c * self.v, d1: c * self.d1, d2: c * self.d2 }
    }
    pub fn powf(self, e: f64) -> Self {
        let v = self.v.powf(e);
        let g1 = e * self.v.powf(e - 1.0);
        let g2 = e * (e - 1.0) * self.v.powf(e - 2.0);
        Self { v, d1: g1 * self.d1, d2: g2 * self.d1 * self.d1 + g1 * self.d2 }
    }
}

/// Relative residual of `-Δv = f(v)` for a radial profile `v(r)` given as a
/// jet, in dimension `n`. At `r = 0` the Laplacian is `n v''(0)`.
pub(crate) fn radial_residual(f: &Expr, n: u32, r: f64, v: Jet2) -> Result<f64> {
    let lap = if r == 0.0 { f64::from(n) * v.d2 } else { v.d2 + f64::from(n - 1) / r * v.d1 };
    let fv = f.eval(v.v)?;
    Ok((lap + fv).abs() / (lap.abs() + fv.abs()).max(f64::MIN_POSITIVE))
}

/// Coefficients of the bounded entire solution `(1+r²)^{-1/(p-1)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleCoefficients {
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    /// Largest relative residual found by the build-time check.
    pub max_residual: f64,
}

pub const COUNTEREXAMPLE_RESIDUAL_TOL: f64 = 1e-10;

/// `f(s) = [A + B min(s^{p-1}, 1)] s^p` with `A = 2α(n-2-2α)`,
/// `B = 4α(1+α)`, `α = 1/(p-1)`, for which `v = (1+r²)^{-α}` solves
/// `-Δv = f(v)` in `R^n`. Requires `n >= 3`, `p > n/(n-2)`.
///
/// The residual of `v` is checked on `r ∈ [0, 100]` before returning.
pub fn counterexample(n: u32, p: f64) -> Result<(Expr, CounterexampleCoefficients)> {
    require(n >= 3, || format!("counter-example needs n >= 3, got {n}"))?;
    let p_sg = f64::from(n) / f64::from(n - 2);
    require(p > p_sg && p.is_finite(), || format!("counter-example needs p > n/(n-2) = {p_sg}, got {p}"))?;
    let alpha = 1.0 / (p - 1.0);
    let a = 2.0 * alpha * (f64::from(n) - 2.0 - 2.0 * alpha);
    let b = 4.0 * alpha * (1.0 + alpha);
    let f = (Expr::constant(a) + Expr::constant(b) * Expr::var().min_clamp(p - 1.0)) * Expr::power(p);
    let mut max_residual: f64 = 0.0;
    for i in 0..=2000 {
        let r = 100.0 * f64::from(i) / 2000.0;
        let rj = Jet2::var(r);
        let v = Jet2::cst(1.0).add(rj.mul(rj)).powf(-alpha);
        max_residual = max_residual.max(radial_residual(&f, n, r, v)?);
    }
    if !(max_residual < COUNTEREXAMPLE_RESIDUAL_TOL) {
        return Err(Error::Precondition(format!("counter-example residual {max_residual:e} exceeds {COUNTEREXAMPLE_RESIDUAL_TOL:e}")));
    }
    Ok((f, CounterexampleCoefficients { alpha, a, b, max_residual }))
}

/// Switch point `a = [(p_B - m)/(q - p_B)]^{1/(q-m)}` of the nonlinearity
/// [`ftilde_counterexample`].
pub fn ftilde_counterexample_switch(m: f64, q: f64, n: u32) -> Result<f64> {
    let p_b = critical_exponents(n, Case::Parabolic)?.p_b.value();
    require(p_b.is_finite(), || format!("p_B is infinite for n = {n}; need n >= 2"))?;
    require(1.0 < m && m < p_b && p_b < q && q.is_finite(), || format!("need 1 < m < p_B < q, got m={m}, p_B={p_b}, q={q}"))?;
    Ok(((p_b - m) / (q - p_b)).powf(1.0 / (q - m)))
}

/// `f = s^m + s^q` on `[0, a]`, `(1 + a^{q-m}) s^m` for `s >= a`.
pub fn ftilde_counterexample(m: f64, q: f64, n: u32) -> Result<(Expr, f64)> {
    let a = ftilde_counterexample_switch(m, q, n)?;
    let f = Expr::piecewise(vec![a], vec![Expr::power(m) + Expr::power(q), Expr::constant(1.0 + a.powf(q - m)) * Expr::power(m)])?;
    Ok((f, a))
}

/// Named families with their parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "example", rename_all = "snake_case")]
pub enum Example {
    /// `s^p log^q(K + s)`.
    PowerLog { p: f64, q: f64, k: f64 },
    /// `s^{p + a sin[log log(3 + s + 1/s)]}`, `p ∈ (1, p_S)`, `a ∈ (0, p-1)`.
    OscillatingExponent { p: f64, a: f64, n: u32 },
    /// `s^p + s^q`, `1 < p, q < p_c`.
    PowerSum { p: f64, q: f64, n: u32, case: Case },
    /// `s^p` on `[0, 1]`, `s^q` beyond, `1 < p, q < p_c`.
    PowerSwitch { p: f64, q: f64, n: u32, case: Case },
    /// Oscillating piecewise power law between `s^m` and `s^p`.
    PiecewisePower { ell: f64, m: f64, p: f64, n: u32, case: Case, segments: usize },
    /// `s^p [c1 + (c2 - c1)(1 + sin log(1+s))/2]`, within `[c1 s^p, c2 s^p]`.
    PowerBand { p: f64, c1: f64, c2: f64 },
    /// `[A + B min(s^{p-1}, 1)] s^p` with an explicit entire solution.
    Counterexample { n: u32, p: f64 },
    /// The `f̃`-monotone but not `f`-monotone nonlinearity.
    FtildeCounterexample { m: f64, q: f64, n: u32 },
    /// `s^p L(s)` or `s^p L(s + 1/s)`.
    SlowlyVarying { p: f64, factor: SlowFactor, two_sided: bool },
}

/// Builds the expression tree of a catalog entry after validating its
/// parameter range.
pub fn build_example(example: &Example) -> Result<Expr> {
    match *example {
        Example::PowerLog { p, q, k } => {
            require(p > 1.0 && p.is_finite(), || format!("s^p log^q(K+s) needs p > 1, got {p}"))?;
            require(k >= 1.0 && k.is_finite(), || format!("s^p log^q(K+s) needs K >= 1, got {k}"))?;
            require(q.is_finite(), || "q must be finite".into())?;
            let base = Expr::power(p);
            Ok(if q == 0.0 {
                base
            } else if q == 1.0 {
                base * Expr::var().shifted_log(k)
            } else {
                base * Expr::var().shifted_log(k).pow_const(q)
            })
        }
        Example::OscillatingExponent { p, a, n } => {
            let p_s = critical_exponents(n, Case::Elliptic)?.p_s.value();
            require(p > 1.0 && p < p_s, || format!("need 1 < p < p_S = {p_s}, got p={p}"))?;
            require(a > 0.0 && a < p - 1.0, || format!("need 0 < a < p-1 = {}, got a={a}", p - 1.0))?;
            let h = Expr::var().reciprocal_augment().shifted_log(3.0).ln();
            Ok(Expr::var().pow(Expr::constant(p) + Expr::constant(a) * h.sin()))
        }
        Example::PowerSum { p, q, n, case } | Example::PowerSwitch { p, q, n, case } => {
            let p_c = critical_exponents(n, case)?.p_c.value();
            require(1.0 < p && p < p_c && 1.0 < q && q < p_c, || format!("need 1 < p, q < p_c = {p_c}, got p={p}, q={q}"))?;
            if matches!(example, Example::PowerSum { .. }) {
                Ok(Expr::power(p) + Expr::power(q))
            } else {
                Expr::piecewise(vec![1.0], vec![Expr::power(p), Expr::power(q)])
            }
        }
        Example::PiecewisePower { ell, m, p, n, case, segments } => {
            let p_star = critical_exponents(n, case)?.p_star.value();
            build_piecewise_power(ell, m, p, p_star, segments)?.to_expr()
        }
        Example::PowerBand { p, c1, c2 } => {
            require(p > 1.0 && 0.0 < c1 && c1 <= c2 && c2.is_finite(), || {
                format!("need p > 1 and 0 < c1 <= c2, got p={p}, c1={c1}, c2={c2}")
            })?;
            let wiggle = (Expr::constant(1.0) + Expr::var().shifted_log(1.0).sin()) * Expr::constant(0.5);
            Ok(Expr::power(p) * (Expr::constant(c1) + Expr::constant(c2 - c1) * wiggle))
        }
        Example::Counterexample { n, p } => counterexample(n, p).map(|(f, _)| f),
        Example::FtildeCounterexample { m, q, n } => ftilde_counterexample(m, q, n).map(|(f, _)| f),
        Example::SlowlyVarying { p, factor, two_sided } => power_times_slow(p, factor, two_sided),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::parse;

    #[test]
    fn example_one_tree() {
        let f = build_example(&Example::PowerLog { p: 2.0, q: 1.0, k: 2.0 }).unwrap();
        assert_eq!(f, parse("pow(s,2)*log(2+s)").unwrap());
        assert_eq!(f.eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn counterexample_coefficients() {
        let (_, c) = counterexample(5, 2.0).unwrap();
        assert_eq!((c.alpha, c.a, c.b), (1.0, 2.0, 8.0));
        assert!(c.max_residual < 1e-12);
        assert!(counterexample(3, 3.0).is_err(), "p = n/(n-2) is excluded");
    }

    #[test]
    fn piecewise_power_first_breakpoints() {
        let spec = build_piecewise_power(1.2, 1.5, 2.0, 3.0, 2).unwrap();
        let f = spec.to_expr().unwrap();
        assert_eq!(spec.breakpoints[0], 2.0);
        assert!((f.eval(2.0).unwrap() - 4.0).abs() < 1e-14);
        let s3 = spec.breakpoints[1];
        assert!((f.eval(s3).unwrap() / s3.powf(1.5) - 1.0).abs() < 1e-12);
        assert!(build_piecewise_power(1.5, 1.2, 2.0, 3.0, 2).is_err());
    }

    #[test]
    fn parameter_ranges_are_enforced() {
        assert!(build_example(&Example::PowerLog { p: 0.5, q: 1.0, k: 2.0 }).is_err());
        assert!(build_example(&Example::OscillatingExponent { p: 2.0, a: 1.5, n: 3 }).is_err());
        assert!(build_example(&Example::PowerSum { p: 2.0, q: 6.0, n: 3, case: Case::Elliptic }).is_err());
        assert!(SlowFactor::IteratedLog { m: 2, k: 2.0 }.apply(Expr::var()).is_err());
        assert!(SlowFactor::OscillatingStretchedExp { nu: 0.6 }.validate().is_err());
    }
}
