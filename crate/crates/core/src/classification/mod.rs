//! Sampling-based corroboration and falsification of function-class
//! hypotheses.
//!
//! Every check works on finite grids and says so: a "pass" means that no
//! counterexample was found on the disclosed grid. All ratios
//! `f(λs)/f(λ)` are formed from `ln f`, so `λ` may lie far outside the f64
//! range.

mod hypotheses;
mod monotone;
mod variation;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use hypotheses::{
    liouville_hypothesis_check, power_log_clause, BranchFeasibility, HypothesisReport, LiouvilleSearch, PowerLogClause, DEFAULT_SMALL_Q,
};
pub use monotone::{monotone_grid, monotone_quotient_check, MonotoneReport, MONOTONE_TOL};
pub use variation::{
    almost_decreasing_inf, classify_variation, controlled_variation_inf, estimate_rv_index, growth_bound, superlinearity_profile,
    ControlledVariationReport, GrowthBound, LambdaGrid, Location, SuperlinearityReport, VariationReport, CONTROLLED_FLOOR, RV_RESIDUAL_TOL,
    RV_SPREAD_TOL, SUPERLINEAR_THRESHOLD,
};

/// Outcome of a sampled check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Regular { index: f64 },
    ControlledOnly,
    Falsified,
    Inconclusive,
    Pass,
    Fail,
}

/// Concrete sample point backing a verdict. `ln_lambda` is used instead of
/// `λ` because probes reach `|ln λ| = 1e12`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub ln_lambda: Option<f64>,
    pub s: Option<f64>,
    pub value: f64,
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
    /// Points listed explicitly (e.g. refined around breakpoints).
    Explicit,
}

/// Disclosure of a sample grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub variable: String,
    pub spacing: Spacing,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(variable: &str, spacing: Spacing, values: &[f64]) -> Self {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { variable: variable.to_string(), spacing, lo, hi, points: values.len() }
    }
}

/// Uniform report shape: `{function, check, grid, verdict, witness?, params}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub function: String,
    pub check: String,
    pub grid: Vec<GridSpec>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub params: BTreeMap<String, f64>,
}
