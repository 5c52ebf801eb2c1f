use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ClassificationReport, GridSpec, Spacing, Verdict, Witness};
use crate::error::{Error, Result};
use crate::nonlinearity::Expr;
use crate::numerics::{linear_fit, linspace, logspace};

/// Maximal spread of the fitted slopes over the last three `λ` for a
/// regular-variation verdict.
pub const RV_SPREAD_TOL: f64 = 0.02;
/// Maximal RMS deviation from a power law at any tested `λ`.
pub const RV_RESIDUAL_TOL: f64 = 0.05;
/// Sampled infima below this count as "tends to zero".
pub const CONTROLLED_FLOOR: f64 = 1e-8;
/// Profile value required at the largest sampled `s` for superlinearity.
pub const SUPERLINEAR_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Zero,
    Infinity,
}

impl std::str::FromStr for Location {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0" | "zero" => Ok(Location::Zero),
            "inf" | "infinity" => Ok(Location::Infinity),
            _ => Err(Error::InvalidParameter(format!("unknown location '{s}' (0|inf)"))),
        }
    }
}

/// Values of `ln λ` approaching a location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    pub location: Location,
    pub ln_lambdas: Vec<f64>,
}

impl LambdaGrid {
    fn signed(location: Location, magnitudes: impl Iterator<Item = f64>) -> Self {
        let sign = match location {
            Location::Zero => -1.0,
            Location::Infinity => 1.0,
        };
        Self { location, ln_lambdas: magnitudes.map(|m| sign * m).collect() }
    }

    /// `λ = 10^4, ..., 10^10` (or the reciprocals at `0`), one point per
    /// decade.
    pub fn standard(location: Location) -> Self {
        Self::signed(location, (4..=10).map(|k| f64::from(k) * std::f64::consts::LN_10))
    }

    /// `|ln λ| = 10, 100, ..., 10^12`; reaches the asymptotic regime of
    /// very slowly converging factors such as `exp(log s / log log s)`.
    pub fn deep(location: Location) -> Self {
        Self::signed(location, (1..=12).map(|k| 10f64.powi(k)))
    }

    pub fn spec(&self) -> GridSpec {
        let mags: Vec<f64> = self.ln_lambdas.iter().map(|t| t.abs()).collect();
        GridSpec::new("abs_ln_lambda", Spacing::Log, &mags)
    }
}

/// Default `s`-grid for slope fits: 33 log-spaced points on `[1/8, 8]`.
pub fn default_s_grid() -> Vec<f64> {
    logspace(0.125, 8.0, 33)
}

fn ln_ratio(f: &Expr, t0: f64, ln_f0: f64, u: f64) -> Result<f64> {
    Ok(f.ln_eval(t0 + u)? - ln_f0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationReport {
    pub location: Location,
    /// Slope extrapolated to `1/|ln λ| = 0` over the last three `λ`.
    pub index: f64,
    pub ln_lambdas: Vec<f64>,
    pub slopes: Vec<f64>,
    /// RMS deviation of `ln[f(λs)/f(λ)]` from the fitted line, per `λ`.
    pub residuals: Vec<f64>,
    /// `max - min` of the last three slopes.
    pub spread: f64,
    pub spread_tol: f64,
    pub residual_tol: f64,
    pub lambda_grid: GridSpec,
    pub s_grid: GridSpec,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

/// Estimates the regular-variation index of `f` at `0` or `∞` from
/// least-squares slopes of `ln[f(λs)/f(λ)]` against `ln s`.
pub fn estimate_rv_index(f: &Expr, lambdas: &LambdaGrid, s_grid: &[f64]) -> Result<VariationReport> {
    if lambdas.ln_lambdas.len() < 3 {
        return Err(Error::InvalidParameter("need at least 3 lambda values".into()));
    }
    if s_grid.len() < 3 || s_grid.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::InvalidParameter("s-grid needs >= 3 positive points".into()));
    }
    let us: Vec<f64> = s_grid.iter().map(|s| s.ln()).collect();
    let mut slopes = Vec::new();
    let mut residuals = Vec::new();
    for &t0 in &lambdas.ln_lambdas {
        let ln_f0 = f.ln_eval(t0)?;
        let ys = us.iter().map(|&u| ln_ratio(f, t0, ln_f0, u)).collect::<Result<Vec<_>>>()?;
        let (slope, _, rms) = linear_fit(&us, &ys);
        slopes.push(slope);
        residuals.push(rms);
    }
    let k = slopes.len();
    let tail = &slopes[k - 3..];
    let xs: Vec<f64> = lambdas.ln_lambdas[k - 3..].iter().map(|t| 1.0 / t.abs()).collect();
    let (_, index, _) = linear_fit(&xs, tail);
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = hi - lo;
    let worst_residual = residuals.iter().copied().enumerate().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    let (verdict, witness) = if !spread.is_finite() || !index.is_finite() {
        (Verdict::Inconclusive, None)
    } else if spread >= RV_SPREAD_TOL {
        let j = k - 3 + tail.iter().position(|&v| v == hi).unwrap();
        (
            Verdict::Inconclusive,
            Some(Witness {
                ln_lambda: Some(lambdas.ln_lambdas[j]),
                s: None,
                value: spread,
                description: format!("slopes over the last three lambdas spread by {spread:.4}"),
            }),
        )
    } else if worst_residual.1 >= RV_RESIDUAL_TOL {
        (
            Verdict::Inconclusive,
            Some(Witness {
                ln_lambda: Some(lambdas.ln_lambdas[worst_residual.0]),
                s: None,
                value: worst_residual.1,
                description: "ratio deviates from a power law".into(),
            }),
        )
    } else {
        (Verdict::Regular { index }, None)
    };
    Ok(VariationReport {
        location: lambdas.location,
        index,
        ln_lambdas: lambdas.ln_lambdas.clone(),
        slopes,
        residuals,
        spread,
        spread_tol: RV_SPREAD_TOL,
        residual_tol: RV_RESIDUAL_TOL,
        lambda_grid: lambdas.spec(),
        s_grid: GridSpec::new("s", Spacing::Log, s_grid),
        verdict,
        witness,
    })
}

impl VariationReport {
    pub fn to_report(&self, function: &str) -> ClassificationReport {
        let mut params = BTreeMap::new();
        params.insert("index".into(), self.index);
        params.insert("spread".into(), self.spread);
        params.insert("spread_tol".into(), self.spread_tol);
        params.insert("residual_tol".into(), self.residual_tol);
        params.insert("location_is_infinity".into(), f64::from(u8::from(self.location == Location::Infinity)));
        ClassificationReport {
            function: function.to_string(),
            check: "regular_variation".into(),
            grid: vec![self.lambda_grid.clone(), self.s_grid.clone()],
            verdict: self.verdict.clone(),
            witness: self.witness.clone(),
            params,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlledVariationReport {
    /// Sampled `inf f(λs)/f(λ)`.
    pub inf: f64,
    pub floor: f64,
    pub s_compact: (f64, f64),
    pub lambda_grid: GridSpec,
    pub s_grid: GridSpec,
    pub verdict: Verdict,
    /// Location of the sampled infimum.
    pub witness: Witness,
}

fn default_two_sided_lambdas() -> Vec<f64> {
    linspace(1e-10f64.ln(), 1e10f64.ln(), 401)
}

fn sampled_ratio_inf(f: &Expr, ln_lambdas: &[f64], us: &[f64], shift: f64) -> Result<(f64, f64, f64)> {
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for &t0 in ln_lambdas {
        let ln_f0 = f.ln_eval(t0)?;
        for &u in us {
            let r = ln_ratio(f, t0, ln_f0, u)? - shift * u;
            if r < best.0 {
                best = (r, t0, u);
            }
        }
    }
    Ok(best)
}

/// Sampled `inf_{λ, s ∈ [s_lo, s_hi]} f(λs)/f(λ)`; `ln_lambdas` defaults
/// to 401 points with `λ ∈ [1e-10, 1e10]`.
pub fn controlled_variation_inf(f: &Expr, s_lo: f64, s_hi: f64, ln_lambdas: Option<&[f64]>) -> Result<ControlledVariationReport> {
    if !(0.0 < s_lo && s_lo <= s_hi && s_hi.is_finite()) {
        return Err(Error::InvalidParameter(format!("compact [{s_lo}, {s_hi}] must lie in (0, inf)")));
    }
    let default = default_two_sided_lambdas();
    let lambdas = ln_lambdas.unwrap_or(&default);
    let s_grid = logspace(s_lo, s_hi, 33);
    let us: Vec<f64> = s_grid.iter().map(|s| s.ln()).collect();
    let (ln_inf, t0, u) = sampled_ratio_inf(f, lambdas, &us, 0.0)?;
    let inf = ln_inf.exp();
    let verdict = if inf > CONTROLLED_FLOOR { Verdict::Pass } else { Verdict::Falsified };
    Ok(ControlledVariationReport {
        inf,
        floor: CONTROLLED_FLOOR,
        s_compact: (s_lo, s_hi),
        lambda_grid: GridSpec::new("ln_lambda", Spacing::Linear, lambdas),
        s_grid: GridSpec::new("s", Spacing::Log, &s_grid),
        verdict,
        witness: Witness {
            ln_lambda: Some(t0),
            s: Some(u.exp()),
            value: inf,
            description: format!("ln f(lambda s) - ln f(lambda) = {ln_inf:.6e}"),
        },
    })
}

impl ControlledVariationReport {
    pub fn to_report(&self, function: &str) -> ClassificationReport {
        let mut params = BTreeMap::new();
        params.insert("inf".into(), self.inf);
        params.insert("floor".into(), self.floor);
        params.insert("s_lo".into(), self.s_compact.0);
        params.insert("s_hi".into(), self.s_compact.1);
        ClassificationReport {
            function: function.to_string(),
            check: "controlled_variation".into(),
            grid: vec![self.lambda_grid.clone(), self.s_grid.clone()],
            verdict: self.verdict.clone(),
            witness: Some(self.witness.clone()),
            params,
        }
    }
}

/// Sampled `inf_{λ>0, s ∈ (0,1]} g(λs)/g(λ)` for `g = s^{-shift} f`.
pub fn almost_decreasing_inf(f: &Expr, shift: f64) -> Result<ControlledVariationReport> {
    let lambdas = default_two_sided_lambdas();
    let s_grid = logspace(1e-6, 1.0, 49);
    let us: Vec<f64> = s_grid.iter().map(|s| s.ln()).collect();
    let (ln_inf, t0, u) = sampled_ratio_inf(f, &lambdas, &us, shift)?;
    let inf = ln_inf.exp();
    Ok(ControlledVariationReport {
        inf,
        floor: CONTROLLED_FLOOR,
        s_compact: (1e-6, 1.0),
        lambda_grid: GridSpec::new("ln_lambda", Spacing::Linear, &lambdas),
        s_grid: GridSpec::new("s", Spacing::Log, &s_grid),
        verdict: if inf > CONTROLLED_FLOOR { Verdict::Pass } else { Verdict::Falsified },
        witness: Witness { ln_lambda: Some(t0), s: Some(u.exp()), value: inf, description: format!("quotient exponent {shift}") },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperlinearityReport {
    pub s: Vec<f64>,
    /// Sampled `inf_λ f(λs)/(s f(λ))` for each `s`.
    pub profile: Vec<f64>,
    pub threshold: f64,
    pub lambda_grid: GridSpec,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

/// Sampled superlinearity profile `s ↦ inf_λ f(λs)/(s f(λ))`.
pub fn superlinearity_profile(f: &Expr, s_grid: Option<&[f64]>, ln_lambdas: Option<&[f64]>) -> Result<SuperlinearityReport> {
    let default_s = logspace(1.0, 1e12, 25);
    let s_grid = s_grid.unwrap_or(&default_s);
    if s_grid.is_empty() || s_grid.windows(2).any(|w| w[0] >= w[1]) || s_grid[0] <= 0.0 {
        return Err(Error::InvalidParameter("s-grid must be positive and increasing".into()));
    }
    let default_l = linspace(1e-10f64.ln(), 1e10f64.ln(), 201);
    let lambdas = ln_lambdas.unwrap_or(&default_l);
    let ln_f0 = lambdas.iter().map(|&t| f.ln_eval(t)).collect::<Result<Vec<_>>>()?;
    let mut profile = Vec::with_capacity(s_grid.len());
    let mut argmins = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let u = s.ln();
        let mut best = (f64::INFINITY, 0.0);
        for (&t0, &l0) in lambdas.iter().zip(&ln_f0) {
            let r = f.ln_eval(t0 + u)? - l0 - u;
            if r < best.0 {
                best = (r, t0);
            }
        }
        profile.push(best.0.exp());
        argmins.push(best.1);
    }
    let last = *profile.last().unwrap();
    let (verdict, witness) = if last > SUPERLINEAR_THRESHOLD {
        (Verdict::Pass, None)
    } else {
        (
            Verdict::Fail,
            Some(Witness {
                ln_lambda: Some(*argmins.last().unwrap()),
                s: Some(*s_grid.last().unwrap()),
                value: last,
                description: format!("profile at the largest s is {last:.4} <= {SUPERLINEAR_THRESHOLD}"),
            }),
        )
    };
    Ok(SuperlinearityReport {
        s: s_grid.to_vec(),
        profile,
        threshold: SUPERLINEAR_THRESHOLD,
        lambda_grid: GridSpec::new("ln_lambda", Spacing::Linear, lambdas),
        verdict,
        witness,
    })
}

impl SuperlinearityReport {
    pub fn to_report(&self, function: &str) -> ClassificationReport {
        let mut params = BTreeMap::new();
        params.insert("threshold".into(), self.threshold);
        params.insert("profile_at_max_s".into(), *self.profile.last().unwrap());
        ClassificationReport {
            function: function.to_string(),
            check: "superlinearity".into(),
            grid: vec![self.lambda_grid.clone(), GridSpec::new("s", Spacing::Log, &self.s)],
            verdict: self.verdict.clone(),
            witness: self.witness.clone(),
            params,
        }
    }
}

/// Exhibited constants for `inf_λ f(sλ)/f(λ) >= c s^q`, `s >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthBound {
    pub c: f64,
    pub q: f64,
    /// True when `q > 1` (and so `f` is superlinear on the grid).
    pub superlinear: bool,
    pub s_grid: GridSpec,
    pub lambda_grid: GridSpec,
}

/// Finds `c > 0`, `q` such that the sampled `inf_{λ>=1} f(sλ)/f(λ) >= c s^q`
/// for every sampled `s >= 1`. `q` is halfway between `1` and the smallest
/// log-slope of the sampled infimum over the upper half of the `s`-range;
/// `c` then absorbs the behaviour at moderate `s`.
pub fn growth_bound(f: &Expr, s_grid: Option<&[f64]>, ln_lambdas: Option<&[f64]>) -> Result<GrowthBound> {
    let default_s = logspace(1.0, 1e12, 49);
    let s_grid = s_grid.unwrap_or(&default_s);
    if s_grid.len() < 3 || s_grid.iter().any(|&s| s < 1.0) || s_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("growth bound needs an increasing grid with s >= 1".into()));
    }
    let default_l = linspace(0.0, 1e10f64.ln(), 201);
    let lambdas = ln_lambdas.unwrap_or(&default_l);
    let ln_f0 = lambdas.iter().map(|&t| f.ln_eval(t)).collect::<Result<Vec<_>>>()?;
    let mut phi = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let u = s.ln();
        let mut m = f64::INFINITY;
        for (&t0, &l0) in lambdas.iter().zip(&ln_f0) {
            m = m.min(f.ln_eval(t0 + u)? - l0);
        }
        phi.push(m);
    }
    let mid = s_grid.len() / 2;
    let q_max = (mid + 1..s_grid.len()).map(|k| (phi[k] - phi[mid]) / (s_grid[k].ln() - s_grid[mid].ln())).fold(f64::INFINITY, f64::min);
    let q = if q_max.is_finite() { 0.5 * (1.0 + q_max) } else { 1.0 };
    let ln_c = s_grid.iter().zip(&phi).map(|(s, p)| p - q * s.ln()).fold(f64::INFINITY, f64::min);
    Ok(GrowthBound {
        c: ln_c.exp(),
        q,
        superlinear: q > 1.0 && ln_c.is_finite(),
        s_grid: GridSpec::new("s", Spacing::Log, s_grid),
        lambda_grid: GridSpec::new("ln_lambda", Spacing::Linear, lambdas),
    })
}

/// Regular-variation estimate, downgraded to controlled-only or falsified
/// by a controlled-variation scan on `[1/2, 2]` when the slopes do not
/// converge.
pub fn classify_variation(f: &Expr, lambdas: &LambdaGrid) -> Result<VariationReport> {
    let mut report = estimate_rv_index(f, lambdas, &default_s_grid())?;
    if report.verdict == Verdict::Inconclusive {
        let cv = controlled_variation_inf(f, 0.5, 2.0, None)?;
        match cv.verdict {
            Verdict::Pass => report.verdict = Verdict::ControlledOnly,
            _ => {
                report.verdict = Verdict::Falsified;
                report.witness = Some(cv.witness);
            }
        }
    }
    Ok(report)
}
