//! Critical exponents for a given dimension.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Elliptic (`-Δu = f(u)`) or parabolic (`u_t - Δu = f(u)`) problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Elliptic,
    Parabolic,
}

impl std::str::FromStr for Case {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "elliptic" => Ok(Case::Elliptic),
            "parabolic" => Ok(Case::Parabolic),
            _ => Err(Error::InvalidParameter(format!("unknown case '{s}' (elliptic|parabolic)"))),
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::Elliptic => "elliptic",
            Case::Parabolic => "parabolic",
        })
    }
}

/// An exact exponent: a reduced rational or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exponent {
    Rational { num: i64, den: i64 },
    Infinite,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Exponent {
    /// `num / den`, or `∞` when `den <= 0` (the positive-part convention).
    pub fn ratio(num: i64, den: i64) -> Self {
        if den <= 0 {
            return Exponent::Infinite;
        }
        let g = gcd(num, den);
        Exponent::Rational { num: num / g, den: den / g }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Rational { num, den } => num as f64 / den as f64,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Exponent::Rational { .. })
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(match (self, other) {
            (Exponent::Infinite, Exponent::Infinite) => Ordering::Equal,
            (Exponent::Infinite, _) => Ordering::Greater,
            (_, Exponent::Infinite) => Ordering::Less,
            (Exponent::Rational { num: a, den: b }, Exponent::Rational { num: c, den: d }) => {
                (i128::from(*a) * i128::from(*d)).cmp(&(i128::from(*c) * i128::from(*b)))
            }
        })
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Infinite => f.write_str("inf"),
            Exponent::Rational { num, den: 1 } => write!(f, "{num}"),
            Exponent::Rational { num, den } => write!(f, "{num}/{den}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalExponents {
    pub n: u32,
    pub case: Case,
    /// Sobolev exponent `(n+2)/(n-2)`.
    pub p_s: Exponent,
    /// `n/(n-2)_+`.
    pub p_sg: Exponent,
    /// Fujita exponent `(n+2)/n`.
    pub p_f: Exponent,
    /// `n(n+2)/(n-1)^2`.
    pub p_b: Exponent,
    pub p_c: Exponent,
    pub p_star: Exponent,
    pub p_dstar: Exponent,
    pub n_star: u32,
    /// `2(n+2)/(3n+2)`.
    pub m_star: Exponent,
}

/// Exponent table for dimension `n >= 1`.
pub fn critical_exponents(n: u32, case: Case) -> Result<CriticalExponents> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension n must be >= 1".into()));
    }
    let k = i64::from(n);
    let p_s = Exponent::ratio(k + 2, k - 2);
    let p_sg = Exponent::ratio(k, k - 2);
    let p_f = Exponent::ratio(k + 2, k);
    let p_b = Exponent::ratio(k * (k + 2), if n == 1 { 0 } else { (k - 1) * (k - 1) });
    let m_star = Exponent::ratio(2 * (k + 2), 3 * k + 2);
    let (p_c, p_star, p_dstar, n_star) = match case {
        Case::Elliptic => (p_s, p_sg, Exponent::ratio(k + 1, k - 1), 2),
        Case::Parabolic => (p_b, p_f, Exponent::ratio(k + 3, k + 1), 1),
    };
    Ok(CriticalExponents { n, case, p_s, p_sg, p_f, p_b, p_c, p_star, p_dstar, n_star, m_star })
}
