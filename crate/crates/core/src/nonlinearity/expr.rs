//! Expression trees for nonlinearities `f(s)`.
//!
//! A tree is evaluated three ways:
//! * directly in f64 (fast path for moderate `s`),
//! * with forward-mode dual numbers for the analytic derivative,
//! * in the log domain, returning `ln f(e^t)` for any finite `t`.
//!
//! The log-domain path never forms `s` itself, so it works far outside the
//! f64 range (classification probes `ln s` up to `1e12`).

use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::logvalue::LogValue;
use crate::error::{Error, Result};

/// Inside this window of `s` the direct f64 path is tried first.
pub const DIRECT_RANGE: (f64, f64) = (1e-300, 1e300);

/// A nonlinearity `s ↦ f(s)` as an immutable expression tree in the single
/// variable `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Const(f64),
    /// The variable `s`.
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Real power `base^exponent` (base must be positive unless the exponent
    /// is a constant integer).
    Pow(Box<Expr>, Box<Expr>),
    /// Natural logarithm. `log(c + g)` with constant `c > 0` is evaluated as
    /// `ln c + ln_1p(g / c)`.
    Log(Box<Expr>),
    /// `log_m(K + g)`: `m`-fold natural logarithm with shift `K`.
    IteratedLog {
        depth: u32,
        shift: f64,
        arg: Box<Expr>,
    },
    Exp(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Abs(Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    /// `pieces[0]` on `[0, breaks[0])`, `pieces[i]` on `[breaks[i-1], breaks[i])`.
    Piecewise {
        breaks: Vec<f64>,
        pieces: Vec<Expr>,
    },
    /// Continuous piecewise power law stored through log anchors.
    PiecewisePower(PiecewisePower),
}

/// `f(s) = exp(ln_v[i] + exponents[i+1] (ln s - ln_b[i]))` on
/// `[b[i], b[i+1])`, and `exp(ln_v[0] + exponents[0] (ln s - ln_b[0]))`
/// below the first breakpoint.
///
/// Anchors are generated by [`PiecewisePower::from_exponents`], which
/// computes each anchor value with the same expression used for the left
/// limit, so the function is continuous bit-for-bit in the log domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePower {
    pub ln_breaks: Vec<f64>,
    pub ln_values: Vec<f64>,
    pub exponents: Vec<f64>,
}

impl PiecewisePower {
    /// Builds the anchors from the first breakpoint, the value there, and
    /// the per-interval exponents (`exponents.len() == ln_breaks.len() + 1`).
    pub fn from_exponents(ln_breaks: Vec<f64>, ln_first_value: f64, exponents: Vec<f64>) -> Result<Self> {
        if ln_breaks.is_empty() || exponents.len() != ln_breaks.len() + 1 {
            return Err(Error::InvalidParameter("piecewise power needs k >= 1 breakpoints and k + 1 exponents".into()));
        }
        if !ln_breaks.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter("breakpoints must be strictly increasing".into()));
        }
        let mut ln_values = Vec::with_capacity(ln_breaks.len());
        ln_values.push(ln_first_value);
        for i in 1..ln_breaks.len() {
            let prev = ln_values[i - 1];
            ln_values.push(prev + exponents[i] * (ln_breaks[i] - ln_breaks[i - 1]));
        }
        Ok(Self { ln_breaks, ln_values, exponents })
    }

    fn segment(&self, ln_s: f64) -> usize {
        self.ln_breaks.partition_point(|&b| b <= ln_s)
    }

    pub fn ln_eval(&self, ln_s: f64) -> f64 {
        let k = self.segment(ln_s);
        let anchor = k.saturating_sub(1);
        self.ln_values[anchor] + self.exponents[k] * (ln_s - self.ln_breaks[anchor])
    }

    /// Logarithmic derivative `s f'(s) / f(s)` at `ln s`.
    pub fn elasticity(&self, ln_s: f64) -> f64 {
        self.exponents[self.segment(ln_s)]
    }
}

// ---------------------------------------------------------------------------
// Scalar abstraction shared by the f64 and dual-number paths.

pub(crate) trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn cst(c: f64) -> Self;
    fn val(self) -> f64;
    fn ln(self) -> Self;
    fn ln_1p(self) -> Self;
    fn exp(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn abs(self) -> Self;
    fn powf(self, e: Self) -> Self;
    fn powi(self, n: i32) -> Self;
    /// `exp(ln_value)` with logarithmic derivative `elasticity / s`.
    fn from_log(ln_value: f64, elasticity: f64, s: Self) -> Self;
}

impl Scalar for f64 {
    fn cst(c: f64) -> Self {
        c
    }
    fn val(self) -> f64 {
        self
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn ln_1p(self) -> Self {
        f64::ln_1p(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn powf(self, e: Self) -> Self {
        f64::powf(self, e)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn from_log(ln_value: f64, _elasticity: f64, _s: Self) -> Self {
        ln_value.exp()
    }
}

/// Forward-mode dual number `v + d ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual { v: self.v + o.v, d: self.d + o.d }
    }
}
impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual { v: self.v - o.v, d: self.d - o.d }
    }
}
impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual { v: self.v * o.v, d: self.d * o.v + self.v * o.d }
    }
}
impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        let v = self.v / o.v;
        Dual { v, d: (self.d - v * o.d) / o.v }
    }
}
impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual { v: -self.v, d: -self.d }
    }
}

impl Scalar for Dual {
    fn cst(c: f64) -> Self {
        Dual { v: c, d: 0.0 }
    }
    fn val(self) -> f64 {
        self.v
    }
    fn ln(self) -> Self {
        Dual { v: self.v.ln(), d: self.d / self.v }
    }
    fn ln_1p(self) -> Self {
        Dual { v: self.v.ln_1p(), d: self.d / (1.0 + self.v) }
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        Dual { v: e, d: e * self.d }
    }
    fn sin(self) -> Self {
        Dual { v: self.v.sin(), d: self.v.cos() * self.d }
    }
    fn cos(self) -> Self {
        Dual { v: self.v.cos(), d: -self.v.sin() * self.d }
    }
    fn abs(self) -> Self {
        if self.v < 0.0 {
            -self
        } else {
            self
        }
    }
    fn powf(self, e: Self) -> Self {
        let v = self.v.powf(e.v);
        let mut d = 0.0;
        if self.d != 0.0 {
            d += e.v * self.v.powf(e.v - 1.0) * self.d;
        }
        if e.d != 0.0 {
            d += v * self.v.ln() * e.d;
        }
        Dual { v, d }
    }
    fn powi(self, n: i32) -> Self {
        let v = self.v.powi(n);
        let d = if n == 0 { 0.0 } else { f64::from(n) * self.v.powi(n - 1) * self.d };
        Dual { v, d }
    }
    fn from_log(ln_value: f64, elasticity: f64, s: Self) -> Self {
        let v = ln_value.exp();
        Dual { v, d: v * elasticity / s.v * s.d }
    }
}

// ---------------------------------------------------------------------------

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn var() -> Expr {
        Expr::Var
    }

    /// `s^p`.
    pub fn power(p: f64) -> Expr {
        Expr::Var.pow_const(p)
    }

    pub fn pow_const(self, p: f64) -> Expr {
        Expr::Pow(Box::new(self), Box::new(Expr::Const(p)))
    }

    pub fn pow(self, e: Expr) -> Expr {
        Expr::Pow(Box::new(self), Box::new(e))
    }

    pub fn ln(self) -> Expr {
        Expr::Log(Box::new(self))
    }

    /// `log(K + self)`.
    pub fn shifted_log(self, shift: f64) -> Expr {
        Expr::Log(Box::new(Expr::Const(shift) + self))
    }

    /// `log_m(K + self)`; requires `K > exp^m(0)` so the value is positive
    /// for every nonnegative argument.
    pub fn iterated_log(self, depth: u32, shift: f64) -> Result<Expr> {
        if depth == 0 {
            return Err(Error::InvalidParameter("iterated log depth must be >= 1".into()));
        }
        let floor = iterated_exp_zero(depth);
        if !(shift > floor) {
            return Err(Error::InvalidParameter(format!(
                "iterated log of depth {depth} needs shift K > exp^{depth}(0) = {floor}, got {shift}"
            )));
        }
        Ok(Expr::IteratedLog { depth, shift, arg: Box::new(self) })
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    pub fn sin(self) -> Expr {
        Expr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Expr {
        Expr::Cos(Box::new(self))
    }

    pub fn abs(self) -> Expr {
        Expr::Abs(Box::new(self))
    }

    /// `|log self|`.
    pub fn abs_log(self) -> Expr {
        self.ln().abs()
    }

    /// `self + 1/self`, used to make one-sided factors two-sided.
    pub fn reciprocal_augment(self) -> Expr {
        self.clone() + Expr::Const(1.0) / self
    }

    /// `min(self^r, 1)`.
    pub fn min_clamp(self, r: f64) -> Expr {
        Expr::Min(Box::new(self.pow_const(r)), Box::new(Expr::Const(1.0)))
    }

    pub fn min(self, o: Expr) -> Expr {
        Expr::Min(Box::new(self), Box::new(o))
    }

    pub fn max(self, o: Expr) -> Expr {
        Expr::Max(Box::new(self), Box::new(o))
    }

    /// Piecewise definition with continuity at every breakpoint verified to
    /// relative `1e-12`.
    pub fn piecewise(breaks: Vec<f64>, pieces: Vec<Expr>) -> Result<Expr> {
        if pieces.len() != breaks.len() + 1 || breaks.is_empty() {
            return Err(Error::InvalidParameter("piecewise needs k >= 1 breakpoints and k + 1 pieces".into()));
        }
        if !breaks.iter().all(|b| *b > 0.0 && b.is_finite()) || !breaks.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter("piecewise breakpoints must be positive, finite and increasing".into()));
        }
        for (i, &b) in breaks.iter().enumerate() {
            let left = pieces[i].eval(b)?;
            let right = pieces[i + 1].eval(b)?;
            if (left - right).abs() > 1e-12 * left.abs().max(right.abs()) {
                return Err(Error::InvalidParameter(format!("piecewise expression discontinuous at s = {b}: {left} vs {right}")));
            }
        }
        Ok(Expr::Piecewise { breaks, pieces })
    }

    /// True when the tree does not reference `s`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var | Expr::Piecewise { .. } | Expr::PiecewisePower(_) => false,
            Expr::Neg(a) | Expr::Log(a) | Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) | Expr::Abs(a) | Expr::IteratedLog { arg: a, .. } => {
                a.is_constant()
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) | Expr::Min(a, b) | Expr::Max(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }

    /// Points where the tree is only piecewise smooth: explicit breakpoints
    /// plus `s = 1` for min/max/abs nodes (where clamps like `min(s^r, 1)`
    /// switch). Sorted, deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_breakpoints(&mut out);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn collect_breakpoints(&self, out: &mut Vec<f64>) {
        match self {
            Expr::Const(_) | Expr::Var => {}
            Expr::Piecewise { breaks, pieces } => {
                out.extend(breaks.iter().copied());
                pieces.iter().for_each(|p| p.collect_breakpoints(out));
            }
            Expr::PiecewisePower(pw) => {
                out.extend(pw.ln_breaks.iter().map(|b| b.exp()).filter(|b| b.is_finite()));
            }
            Expr::Min(a, b) | Expr::Max(a, b) => {
                out.push(1.0);
                a.collect_breakpoints(out);
                b.collect_breakpoints(out);
            }
            Expr::Abs(a) => {
                out.push(1.0);
                a.collect_breakpoints(out);
            }
            Expr::Neg(a) | Expr::Log(a) | Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) | Expr::IteratedLog { arg: a, .. } => {
                a.collect_breakpoints(out)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.collect_breakpoints(out);
                b.collect_breakpoints(out);
            }
        }
    }

    // -- evaluation ---------------------------------------------------------

    pub(crate) fn eval_scalar<T: Scalar>(&self, s: T) -> T {
        match self {
            Expr::Const(c) => T::cst(*c),
            Expr::Var => s,
            Expr::Neg(a) => -a.eval_scalar(s),
            Expr::Add(a, b) => a.eval_scalar(s) + b.eval_scalar(s),
            Expr::Sub(a, b) => a.eval_scalar(s) - b.eval_scalar(s),
            Expr::Mul(a, b) => a.eval_scalar(s) * b.eval_scalar(s),
            Expr::Div(a, b) => a.eval_scalar(s) / b.eval_scalar(s),
            Expr::Pow(a, b) => pow_scalar(a.eval_scalar(s), b, s),
            Expr::Log(a) => log_scalar(a, s),
            Expr::IteratedLog { depth, shift, arg } => {
                let x = arg.eval_scalar(s);
                let mut v = T::cst(shift.ln()) + (x / T::cst(*shift)).ln_1p();
                for _ in 1..*depth {
                    v = v.ln();
                }
                v
            }
            Expr::Exp(a) => a.eval_scalar(s).exp(),
            Expr::Sin(a) => a.eval_scalar(s).sin(),
            Expr::Cos(a) => a.eval_scalar(s).cos(),
            Expr::Abs(a) => a.eval_scalar(s).abs(),
            Expr::Min(a, b) => {
                let (x, y) = (a.eval_scalar(s), b.eval_scalar(s));
                if y.val() < x.val() {
                    y
                } else {
                    x
                }
            }
            Expr::Max(a, b) => {
                let (x, y) = (a.eval_scalar(s), b.eval_scalar(s));
                if y.val() > x.val() {
                    y
                } else {
                    x
                }
            }
            Expr::Piecewise { breaks, pieces } => {
                let k = breaks.partition_point(|&b| b <= s.val());
                pieces[k].eval_scalar(s)
            }
            Expr::PiecewisePower(pw) => {
                let ln_s = s.val().ln();
                T::from_log(pw.ln_eval(ln_s), pw.elasticity(ln_s), s)
            }
        }
    }

    /// Log-domain evaluation at `s = e^t`.
    pub(crate) fn eval_log(&self, t: f64) -> LogValue {
        match self {
            Expr::Const(c) => LogValue::from_f64(*c),
            Expr::Var => LogValue::positive(t),
            Expr::Neg(a) => a.eval_log(t).neg(),
            Expr::Add(a, b) => a.eval_log(t).add(b.eval_log(t)),
            Expr::Sub(a, b) => a.eval_log(t).sub(b.eval_log(t)),
            Expr::Mul(a, b) => a.eval_log(t).mul(b.eval_log(t)),
            Expr::Div(a, b) => a.eval_log(t).div(b.eval_log(t)),
            Expr::Pow(a, b) => {
                let base = a.eval_log(t);
                let e = b.eval_log(t).to_f64();
                base.powf(e)
            }
            Expr::Log(a) => a.eval_log(t).ln(),
            Expr::IteratedLog { depth, shift, arg } => {
                let mut v = LogValue::from_f64(*shift).add(arg.eval_log(t)).ln();
                for _ in 1..*depth {
                    v = v.ln();
                }
                v
            }
            Expr::Exp(a) => a.eval_log(t).exp(),
            Expr::Sin(a) => LogValue::from_f64(a.eval_log(t).to_f64().sin()),
            Expr::Cos(a) => LogValue::from_f64(a.eval_log(t).to_f64().cos()),
            Expr::Abs(a) => a.eval_log(t).abs(),
            Expr::Min(a, b) => {
                let (x, y) = (a.eval_log(t), b.eval_log(t));
                if y.cmp_value(x).is_lt() {
                    y
                } else {
                    x
                }
            }
            Expr::Max(a, b) => {
                let (x, y) = (a.eval_log(t), b.eval_log(t));
                if y.cmp_value(x).is_gt() {
                    y
                } else {
                    x
                }
            }
            Expr::Piecewise { breaks, pieces } => {
                let k = breaks.partition_point(|&b| b.ln() <= t);
                pieces[k].eval_log(t)
            }
            Expr::PiecewisePower(pw) => LogValue::positive(pw.ln_eval(t)),
        }
    }

    /// `f(s)` for `s >= 0`.
    ///
    /// Inside [`DIRECT_RANGE`] the f64 path is used; outside it, or when the
    /// direct path overflows, the value is computed from `ln f`. Overflow is
    /// reported as [`Error::OutOfRange`], never as an infinity.
    pub fn eval(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::Precondition(format!("f evaluated at s = {s} < 0")));
        }
        if s == 0.0 {
            let v = self.eval_scalar(0.0);
            return if v.is_finite() { Ok(v) } else { Err(Error::Undefined { s, reason: "no continuous extension at 0".into() }) };
        }
        if s >= DIRECT_RANGE.0 && s <= DIRECT_RANGE.1 {
            let v = self.eval_scalar(s);
            if v.is_finite() && v != 0.0 {
                return Ok(v);
            }
            if v.is_nan() {
                return Err(Error::Undefined { s, reason: "NaN in direct evaluation".into() });
            }
        }
        let ln_f = self.ln_eval(s.ln())?;
        if ln_f > f64::MAX.ln() {
            return Err(Error::OutOfRange { s, log_value: ln_f });
        }
        Ok(ln_f.exp())
    }

    /// `ln f(e^t)`, valid for any finite `t` where `f > 0`.
    pub fn ln_eval(&self, t: f64) -> Result<f64> {
        let v = self.eval_log(t);
        match v.sign {
            1 if !v.ln_abs.is_nan() => Ok(v.ln_abs),
            1 => Err(Error::Undefined { s: t.exp(), reason: "NaN in log-domain evaluation".into() }),
            0 => Ok(f64::NEG_INFINITY),
            _ => Err(Error::Undefined { s: t.exp(), reason: format!("negative value at ln s = {t}") }),
        }
    }

    /// `ln f(s)` for `s > 0`.
    pub fn ln_at(&self, s: f64) -> Result<f64> {
        self.ln_eval(s.ln())
    }

    /// `f'(s)`: analytic (dual numbers) where finite, otherwise a central
    /// difference with step `h = 1e-6 s`.
    pub fn derivative(&self, s: f64) -> Result<f64> {
        if s > 0.0 && s <= DIRECT_RANGE.1 {
            let d = self.eval_scalar(Dual { v: s, d: 1.0 }).d;
            if d.is_finite() {
                return Ok(d);
            }
        }
        let h = if s > 0.0 { 1e-6 * s } else { 1e-9 };
        let lo = (s - h).max(0.0);
        let hi = s + h;
        Ok((self.eval(hi)? - self.eval(lo)?) / (hi - lo))
    }

    /// Elasticity `s f'(s) / f(s)` at `s = e^t`, from the log-domain path by
    /// central differences in `t`.
    pub fn elasticity(&self, t: f64) -> Result<f64> {
        let h = 1e-5 * (1.0 + t.abs());
        Ok((self.ln_eval(t + h)? - self.ln_eval(t - h)?) / (2.0 * h))
    }
}

fn pow_scalar<T: Scalar>(base: T, exponent: &Expr, s: T) -> T {
    if let Expr::Const(p) = exponent {
        let p = *p;
        if base.val() == 0.0 {
            // Continuous extension 0^p = 0 for p > 0.
            return if p > 0.0 { base * T::cst(0.0) } else { T::cst(f64::NAN) };
        }
        if p.fract() == 0.0 && p.abs() <= 16.0 {
            return base.powi(p as i32);
        }
        if base.val() < 0.0 && p.fract() == 0.0 {
            let mag = (-base).powf(T::cst(p));
            return if (p as i64) % 2 == 0 { mag } else { -mag };
        }
        return base.powf(T::cst(p));
    }
    let e = exponent.eval_scalar(s);
    if base.val() == 0.0 {
        return if e.val() > 0.0 { base * T::cst(0.0) } else { T::cst(f64::NAN) };
    }
    base.powf(e)
}

fn log_scalar<T: Scalar>(arg: &Expr, s: T) -> T {
    if let Expr::Add(a, b) = arg {
        if let Expr::Const(c) = **a {
            if c > 0.0 {
                return T::cst(c.ln()) + (b.eval_scalar(s) / T::cst(c)).ln_1p();
            }
        }
        if let Expr::Const(c) = **b {
            if c > 0.0 {
                return T::cst(c.ln()) + (a.eval_scalar(s) / T::cst(c)).ln_1p();
            }
        }
    }
    arg.eval_scalar(s).ln()
}

/// `exp^m(0)`: 1, e, e^e, ...
pub fn iterated_exp_zero(depth: u32) -> f64 {
    (0..depth).fold(0.0f64, |acc, _| acc.exp())
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, o: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(o))
    }
}
impl Sub for Expr {
    type Output = Expr;
    fn sub(self, o: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(o))
    }
}
impl Mul for Expr {
    type Output = Expr;
    fn mul(self, o: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(o))
    }
}
impl Div for Expr {
    type Output = Expr;
    fn div(self, o: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(o))
    }
}
impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}
