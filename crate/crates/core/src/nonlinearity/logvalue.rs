//! Signed reals stored as `sign * exp(ln_abs)`.
//!
//! Used for the log-domain evaluation path, where intermediate magnitudes
//! routinely exceed the f64 range (e.g. `s = exp(1e12)`).

use std::cmp::Ordering;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    /// -1, 0 or 1.
    pub sign: i8,
    /// Natural log of the magnitude; meaningless when `sign == 0`.
    pub ln_abs: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue { sign: 0, ln_abs: f64::NEG_INFINITY };

    pub fn positive(ln_abs: f64) -> Self {
        if ln_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self { sign: 1, ln_abs }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x > 0.0 {
            Self { sign: 1, ln_abs: x.ln() }
        } else if x < 0.0 {
            Self { sign: -1, ln_abs: (-x).ln() }
        } else if x == 0.0 {
            Self::ZERO
        } else {
            Self { sign: 1, ln_abs: f64::NAN }
        }
    }

    /// Converts back to f64; overflows to ±inf, underflows to 0.
    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.ln_abs.exp(),
        }
    }

    pub fn is_nan(self) -> bool {
        self.sign != 0 && self.ln_abs.is_nan()
    }

    pub fn neg(self) -> Self {
        Self { sign: -self.sign, ..self }
    }

    pub fn abs(self) -> Self {
        Self { sign: self.sign.abs(), ..self }
    }

    pub fn mul(self, o: Self) -> Self {
        if self.sign == 0 || o.sign == 0 {
            return if self.is_nan() || o.is_nan() { Self::from_f64(f64::NAN) } else { Self::ZERO };
        }
        Self { sign: self.sign * o.sign, ln_abs: self.ln_abs + o.ln_abs }
    }

    pub fn div(self, o: Self) -> Self {
        if o.sign == 0 {
            return Self::from_f64(f64::NAN);
        }
        if self.sign == 0 {
            return Self::ZERO;
        }
        Self { sign: self.sign * o.sign, ln_abs: self.ln_abs - o.ln_abs }
    }

    pub fn add(self, o: Self) -> Self {
        if self.sign == 0 {
            return o;
        }
        if o.sign == 0 {
            return self;
        }
        let (hi, lo) = if self.ln_abs >= o.ln_abs { (self, o) } else { (o, self) };
        if hi.ln_abs.is_nan() || lo.ln_abs.is_nan() {
            return Self::from_f64(f64::NAN);
        }
        if hi.ln_abs == f64::INFINITY {
            if lo.ln_abs == f64::INFINITY && lo.sign != hi.sign {
                return Self::from_f64(f64::NAN);
            }
            return hi;
        }
        let gap = lo.ln_abs - hi.ln_abs;
        if hi.sign == lo.sign {
            Self { sign: hi.sign, ln_abs: hi.ln_abs + gap.exp().ln_1p() }
        } else if gap == 0.0 {
            Self::ZERO
        } else {
            Self { sign: hi.sign, ln_abs: hi.ln_abs + (-gap.exp_m1()).ln() }
        }
    }

    pub fn sub(self, o: Self) -> Self {
        self.add(o.neg())
    }

    /// Natural log of a positive value, as a plain log-domain number.
    pub fn ln(self) -> Self {
        match self.sign {
            1 => Self::from_f64(self.ln_abs),
            0 => Self { sign: -1, ln_abs: f64::INFINITY },
            _ => Self::from_f64(f64::NAN),
        }
    }

    pub fn exp(self) -> Self {
        let x = self.to_f64();
        if x.is_nan() {
            Self::from_f64(f64::NAN)
        } else {
            Self::positive(x)
        }
    }

    /// `self^e` for a positive base (zero base gives zero for `e > 0`).
    pub fn powf(self, e: f64) -> Self {
        match self.sign {
            1 => Self::positive(e * self.ln_abs),
            0 if e > 0.0 => Self::ZERO,
            0 if e == 0.0 => Self::positive(0.0),
            0 => Self { sign: 1, ln_abs: f64::INFINITY },
            _ if e.fract() == 0.0 && e.abs() < 2f64.powi(53) => {
                let odd = (e as i64) % 2 != 0;
                Self { sign: if odd { -1 } else { 1 }, ln_abs: e * self.ln_abs }
            }
            _ => Self::from_f64(f64::NAN),
        }
    }

    pub fn cmp_value(self, o: Self) -> Ordering {
        match self.sign.cmp(&o.sign) {
            Ordering::Equal => match self.sign {
                0 => Ordering::Equal,
                1 => self.ln_abs.total_cmp(&o.ln_abs),
                _ => o.ln_abs.total_cmp(&self.ln_abs),
            },
            ord => ord,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_matches_f64() {
        let xs = [-3.5, -1.0, 0.0, 0.25, 2.0, 7.5];
        for &a in &xs {
            for &b in &xs {
                let la = LogValue::from_f64(a);
                let lb = LogValue::from_f64(b);
                let close = |x: f64, y: f64| (x - y).abs() <= 1e-14 * (1.0 + y.abs());
                assert!(close(la.add(lb).to_f64(), a + b), "{a}+{b}");
                assert!(close(la.sub(lb).to_f64(), a - b), "{a}-{b}");
                assert!(close(la.mul(lb).to_f64(), a * b), "{a}*{b}");
                if b != 0.0 {
                    assert!(close(la.div(lb).to_f64(), a / b), "{a}/{b}");
                }
                assert_eq!(la.cmp_value(lb), a.partial_cmp(&b).unwrap());
            }
        }
    }

    #[test]
    fn huge_magnitudes_survive() {
        let big = LogValue::positive(1e6);
        let sum = big.add(LogValue::from_f64(2.0));
        assert_eq!(sum.ln_abs, 1e6);
        assert!((big.ln().to_f64() - 1e6).abs() < 1e-9);
        assert_eq!(big.powf(2.0).ln_abs, 2e6);
    }
}
