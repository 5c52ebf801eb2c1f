use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ClassificationReport, GridSpec, Spacing, Verdict, Witness};
use crate::error::{Error, Result};
use crate::nonlinearity::Expr;
use crate::numerics::logspace;

/// Relative tolerance for an increase of `s^{-m} f(s)` between adjacent
/// grid points.
pub const MONOTONE_TOL: f64 = 1e-13;

/// Dense log grid on `[lo, hi]` plus points clustered at every breakpoint
/// `b` of `f`: `b (1 ± k 1e-4)`, `k = 1..=50`. Thin intervals next to a
/// switch point are therefore always sampled.
pub fn monotone_grid(f: &Expr, lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let mut grid = logspace(lo, hi, points);
    for b in f.breakpoints() {
        if b > lo && b < hi {
            grid.push(b);
            for k in 1..=50 {
                let d = f64::from(k) * 1e-4;
                grid.extend([b * (1.0 - d), b * (1.0 + d)]);
            }
        }
    }
    grid.retain(|s| *s >= lo && *s <= hi);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub m: f64,
    pub verdict: Verdict,
    /// First increasing pair `(s_a, s_b)` with the quotient values.
    pub witness: Option<Witness>,
    pub grid: GridSpec,
}

impl MonotoneReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_report(&self, function: &str) -> ClassificationReport {
        let mut params = BTreeMap::new();
        params.insert("m".into(), self.m);
        params.insert("tol".into(), MONOTONE_TOL);
        ClassificationReport {
            function: function.to_string(),
            check: "monotone_quotient".into(),
            grid: vec![self.grid.clone()],
            verdict: self.verdict.clone(),
            witness: self.witness.clone(),
            params,
        }
    }
}

/// Checks that `s^{-m} f(s)` is nonincreasing on the grid (default:
/// [`monotone_grid`] on `[1e-6, 1e6]` with 20001 points).
pub fn monotone_quotient_check(f: &Expr, m: f64, s_grid: Option<&[f64]>) -> Result<MonotoneReport> {
    let default;
    let grid = match s_grid {
        Some(g) => g,
        None => {
            default = monotone_grid(f, 1e-6, 1e6, 20001);
            &default
        }
    };
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[0] < w[1])) || grid[0] <= 0.0 {
        return Err(Error::InvalidParameter("s-grid must be positive and strictly increasing".into()));
    }
    let mut prev = (grid[0], f.ln_at(grid[0])? - m * grid[0].ln());
    let mut witness = None;
    for &s in &grid[1..] {
        let g = f.ln_at(s)? - m * s.ln();
        if g - prev.1 > MONOTONE_TOL {
            witness = Some(Witness {
                ln_lambda: None,
                s: Some(s),
                value: (g - prev.1).exp_m1(),
                description: format!("s^-m f increases from s = {:.10e} to s = {s:.10e}", prev.0),
            });
            break;
        }
        prev = (s, g);
    }
    Ok(MonotoneReport {
        m,
        verdict: if witness.is_none() { Verdict::Pass } else { Verdict::Fail },
        witness,
        grid: GridSpec::new("s", Spacing::Explicit, grid),
    })
}
