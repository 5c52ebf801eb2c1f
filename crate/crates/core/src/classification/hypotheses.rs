use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::monotone::{monotone_grid, monotone_quotient_check};
use super::{ClassificationReport, GridSpec, Spacing, Verdict, Witness};
use crate::error::{Error, Result};
use crate::nonlinearity::integrals::value_at_log;
use crate::nonlinearity::{critical_exponents, tilde_f, Case, Expr};
use crate::numerics::{integrate, linear_fit, logspace, Tolerance};

/// Search parameters for the integral-form parabolic Liouville hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleSearch {
    pub n: u32,
    /// Grid points for each of `m_1`, `m_2` inside `(2/3, m*)`.
    pub m_points: usize,
    /// Points per branch `(0, 1]`, `(1, ∞)`.
    pub s_points: usize,
    /// Points in the open interval `(1, p_B)`.
    pub p_points: usize,
    pub s_lo: f64,
    pub s_hi: f64,
    /// A branch is infeasible when `ln[f / (s^m f̃^{2m-1})]` drifts towards
    /// `-∞` at the far end faster than this log-slope.
    pub slope_tol: f64,
}

impl Default for LiouvilleSearch {
    fn default() -> Self {
        Self { n: 3, m_points: 64, s_points: 512, p_points: 64, s_lo: 1e-6, s_hi: 1e6, slope_tol: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub id: String,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub params: BTreeMap<String, f64>,
}

/// Per-branch results of the lower bound `f >= c s^m f̃^{2m-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchFeasibility {
    pub m_values: Vec<f64>,
    /// Sampled infimum of `f / (s^m f̃^{2m-1})` on the branch.
    pub c_values: Vec<f64>,
    /// Far-end log-slope of the same ratio.
    pub tail_slopes: Vec<f64>,
    pub feasible: Vec<bool>,
}

impl BranchFeasibility {
    /// Largest feasible `c` and its `m`.
    pub fn best(&self) -> Option<(f64, f64)> {
        self.m_values
            .iter()
            .zip(&self.c_values)
            .zip(&self.feasible)
            .filter(|(_, ok)| **ok)
            .map(|((m, c), _)| (*m, *c))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub check: String,
    pub n: u32,
    pub p_b: f64,
    pub m_star: f64,
    pub conditions: Vec<ConditionResult>,
    /// Smallest sampled `p` with `f <= p f̃` on the grid.
    pub ftilde_p_min: Option<f64>,
    /// Sampled `p` for which `s^{-p} f` is nonincreasing.
    pub f_monotone_p: Vec<f64>,
    pub omega1: BranchFeasibility,
    pub omega2: BranchFeasibility,
    /// `(m_1, m_2, c)` maximising `c = min(c_1(m_1), c_2(m_2))`.
    pub best_pair: Option<(f64, f64, f64)>,
    pub feasible_cells: usize,
    pub total_cells: usize,
    pub p_grid: GridSpec,
    pub s_grid: GridSpec,
    pub m_grid: GridSpec,
    pub verdict: Verdict,
}

impl HypothesisReport {
    pub fn condition(&self, id: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.id == id)
    }

    pub fn to_reports(&self, function: &str) -> Vec<ClassificationReport> {
        self.conditions
            .iter()
            .map(|c| {
                let mut params = c.params.clone();
                params.insert("n".into(), f64::from(self.n));
                ClassificationReport {
                    function: function.to_string(),
                    check: c.id.clone(),
                    grid: vec![self.p_grid.clone(), self.s_grid.clone(), self.m_grid.clone()],
                    verdict: c.verdict.clone(),
                    witness: c.witness.clone(),
                    params,
                }
            })
            .collect()
    }
}

/// `ln f̃` on an increasing grid: one quadrature to the first point, then
/// increments `∫ f(e^u) du` between neighbours.
fn ln_tilde_on_grid(f: &Expr, grid: &[f64]) -> Result<Vec<f64>> {
    let mut acc = tilde_f(f, grid[0], 1e-12)?;
    let mut out = Vec::with_capacity(grid.len());
    out.push(acc.ln());
    for w in grid.windows(2) {
        let mut failure = None;
        let r = integrate(
            |u: f64| match value_at_log(f, u) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            w[0].ln(),
            w[1].ln(),
            Tolerance::relative(1e-12),
        );
        if let Some(e) = failure {
            return Err(e);
        }
        acc += r?.value;
        out.push(acc.ln());
    }
    Ok(out)
}

fn branch_feasibility(
    ms: &[f64],
    ln_s: &[f64],
    ln_f: &[f64],
    ln_ft: &[f64],
    tail: &[usize],
    infeasible_if: impl Fn(f64) -> bool,
) -> BranchFeasibility {
    let mut out = BranchFeasibility { m_values: ms.to_vec(), c_values: vec![], tail_slopes: vec![], feasible: vec![] };
    for &m in ms {
        let ratio: Vec<f64> = (0..ln_s.len()).map(|i| ln_f[i] - m * ln_s[i] - (2.0 * m - 1.0) * ln_ft[i]).collect();
        let ln_c = ratio.iter().copied().fold(f64::INFINITY, f64::min);
        let xs: Vec<f64> = tail.iter().map(|&i| ln_s[i]).collect();
        let ys: Vec<f64> = tail.iter().map(|&i| ratio[i]).collect();
        let (slope, _, _) = linear_fit(&xs, &ys);
        out.c_values.push(ln_c.exp());
        out.tail_slopes.push(slope);
        out.feasible.push(ln_c.is_finite() && !infeasible_if(slope));
    }
    out
}

/// Grid search for the hypotheses of the parabolic Liouville theorem in
/// integral form:
///
/// * `f(s) <= p f̃(s)` for some `p ∈ (1, p_B)` (automatic for `n = 1`);
/// * `f(s) >= c s^{m_i} f̃^{2m_i-1}(s)` on `(0,1]` (`i = 1`) and `(1,∞)`
///   (`i = 2`) with `2/3 < m_2 < m_1 < m*`.
///
/// The report also records for which sampled `p` the stronger condition
/// "`s^{-p} f` nonincreasing" holds.
pub fn liouville_hypothesis_check(f: &Expr, search: &LiouvilleSearch) -> Result<HypothesisReport> {
    let ex = critical_exponents(search.n, Case::Parabolic)?;
    let p_b = ex.p_b.value();
    let m_star = ex.m_star.value();
    if search.m_points == 0 || search.s_points < 8 || search.p_points == 0 {
        return Err(Error::InvalidParameter("search grids are too small".into()));
    }
    if !(0.0 < search.s_lo && search.s_lo < 1.0 && search.s_hi > 10.0) {
        return Err(Error::InvalidParameter("need 0 < s_lo < 1 and s_hi > 10".into()));
    }

    let omega1 = logspace(search.s_lo, 1.0, search.s_points);
    let omega2: Vec<f64> = logspace(1.0, search.s_hi, search.s_points + 1)[1..].to_vec();
    let dense = monotone_grid(f, search.s_lo, search.s_hi, 4001);
    let mut all: Vec<f64> = omega1.iter().chain(&omega2).chain(&dense).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    let ln_s: Vec<f64> = all.iter().map(|s| s.ln()).collect();
    let ln_f = all.iter().map(|&s| f.ln_at(s)).collect::<Result<Vec<_>>>()?;
    let ln_ft = ln_tilde_on_grid(f, &all)?;
    let index_of = |s: f64| all.binary_search_by(|x| x.total_cmp(&s)).expect("grid point present");

    // f <= p f̃ and the f-quotient monotonicity, per sampled p.
    let p_values: Vec<f64> = if p_b.is_finite() {
        (1..=search.p_points).map(|k| 1.0 + (p_b - 1.0) * k as f64 / (search.p_points + 1) as f64).collect()
    } else {
        Vec::new()
    };
    let mut ftilde_p_min = None;
    let mut ftilde_witness = None;
    let mut f_monotone_p = Vec::new();
    let mut monotone_witness = None;
    for &p in &p_values {
        let worst = (0..all.len()).map(|i| (i, ln_f[i] - p.ln() - ln_ft[i])).max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        if worst.1 <= 1e-9 {
            ftilde_p_min.get_or_insert(p);
        } else if ftilde_p_min.is_none() {
            ftilde_witness = Some(Witness {
                ln_lambda: None,
                s: Some(all[worst.0]),
                value: worst.1.exp(),
                description: format!("f / (p f~) > 1 for p = {p}"),
            });
        }
        let mono = monotone_quotient_check(f, p, Some(&dense))?;
        if mono.passed() {
            f_monotone_p.push(p);
        } else if monotone_witness.is_none() || p == *p_values.last().unwrap() {
            let mut w = mono.witness.unwrap();
            w.description = format!("p = {p}: {}", w.description);
            monotone_witness = Some(w);
        }
    }

    let mut conditions = Vec::new();
    let mut params = BTreeMap::new();
    params.insert("p_b".into(), p_b);
    let ftilde_ok = search.n == 1 || ftilde_p_min.is_some();
    if let Some(p) = ftilde_p_min {
        params.insert("p".into(), p);
    }
    conditions.push(ConditionResult {
        id: "f_le_p_ftilde".into(),
        verdict: if ftilde_ok { Verdict::Pass } else { Verdict::Fail },
        witness: if ftilde_ok { None } else { ftilde_witness },
        params,
    });
    let mut params = BTreeMap::new();
    params.insert("p_b".into(), p_b);
    params.insert("passing_p_count".into(), f_monotone_p.len() as f64);
    let mono_ok = search.n == 1 || !f_monotone_p.is_empty();
    conditions.push(ConditionResult {
        id: "f_over_s_p_nonincreasing".into(),
        verdict: if mono_ok { Verdict::Pass } else { Verdict::Fail },
        witness: if mono_ok { None } else { monotone_witness },
        params,
    });

    // Lower bound by f̃ on each branch.
    let ms: Vec<f64> = (1..=search.m_points).map(|j| 2.0 / 3.0 + (m_star - 2.0 / 3.0) * j as f64 / (search.m_points + 1) as f64).collect();
    let idx1: Vec<usize> = omega1.iter().map(|&s| index_of(s)).collect();
    let idx2: Vec<usize> = omega2.iter().map(|&s| index_of(s)).collect();
    let pick = |idx: &[usize]| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        (idx.iter().map(|&i| ln_s[i]).collect(), idx.iter().map(|&i| ln_f[i]).collect(), idx.iter().map(|&i| ln_ft[i]).collect())
    };
    let (s1, f1, t1) = pick(&idx1);
    let (s2, f2, t2) = pick(&idx2);
    let decade1: Vec<usize> = (0..s1.len()).filter(|&i| s1[i] <= s1[0] + std::f64::consts::LN_10).collect();
    let last2 = *s2.last().unwrap();
    let decade2: Vec<usize> = (0..s2.len()).filter(|&i| s2[i] >= last2 - std::f64::consts::LN_10).collect();
    let tol = search.slope_tol;
    let b1 = branch_feasibility(&ms, &s1, &f1, &t1, &decade1, |slope| slope > tol);
    let b2 = branch_feasibility(&ms, &s2, &f2, &t2, &decade2, |slope| slope < -tol);
    let mut best_pair: Option<(f64, f64, f64)> = None;
    let mut feasible_cells = 0;
    let mut total_cells = 0;
    for (i, &m1) in ms.iter().enumerate() {
        for (j, &m2) in ms.iter().enumerate() {
            if m2 >= m1 {
                continue;
            }
            total_cells += 1;
            if b1.feasible[i] && b2.feasible[j] {
                feasible_cells += 1;
                let c = b1.c_values[i].min(b2.c_values[j]);
                if best_pair.is_none_or(|b| c > b.2) {
                    best_pair = Some((m1, m2, c));
                }
            }
        }
    }
    let mut params = BTreeMap::new();
    params.insert("feasible_cells".into(), feasible_cells as f64);
    params.insert("total_cells".into(), total_cells as f64);
    params.insert("m_star".into(), m_star);
    if let Some((m1, m2, c)) = best_pair {
        params.insert("m1".into(), m1);
        params.insert("m2".into(), m2);
        params.insert("c".into(), c);
    }
    let lower_witness = if best_pair.is_some() {
        None
    } else {
        let j = b2.tail_slopes.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(j, _)| j).unwrap();
        Some(Witness {
            ln_lambda: None,
            s: Some(search.s_hi),
            value: b2.tail_slopes[j],
            description: format!("no feasible (m1, m2); on (1, inf) the best tail slope is {:.4} at m2 = {:.4}", b2.tail_slopes[j], ms[j]),
        })
    };
    conditions.push(ConditionResult {
        id: "lower_bound_by_ftilde".into(),
        verdict: if best_pair.is_some() { Verdict::Pass } else { Verdict::Fail },
        witness: lower_witness,
        params,
    });

    let verdict = if ftilde_ok && best_pair.is_some() { Verdict::Pass } else { Verdict::Fail };
    Ok(HypothesisReport {
        check: "parabolic_liouville_integral_form".into(),
        n: search.n,
        p_b,
        m_star,
        conditions,
        ftilde_p_min,
        f_monotone_p,
        omega1: b1,
        omega2: b2,
        best_pair,
        feasible_cells,
        total_cells,
        p_grid: GridSpec::new("p", Spacing::Linear, &p_values),
        s_grid: GridSpec::new("s", Spacing::Explicit, &all),
        m_grid: GridSpec::new("m", Spacing::Linear, &ms),
        verdict,
    })
}

/// Which clause of the classification of `s^p log^q(K+s)` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerLogClause {
    /// `1 < p < p_*`, `K > 1`.
    I,
    /// `p_* <= p < p_c`, `q < p_c - p`, `K >= 1`.
    Ii1,
    /// `p_* <= p < p_c`, `q = p_c - p`, `K > 1`.
    Ii2,
    /// `p_* <= p < p_c`, `q > p_c - p`, `K > (p_c-p)/q exp(q/(p_c-p) - 1)`.
    Ii3,
    /// Parabolic, `p_B <= p < p_S`, `|q| <= small_q`.
    Iii,
    /// A positive entire solution exists: `1 < p < p_S, q > p_S - p, K = 1`
    /// or `p >= p_S, q > 0, K >= 1`.
    EntireSolutionRegime,
    None,
}

/// Threshold used for "`|q|` small" in the parabolic clause.
pub const DEFAULT_SMALL_Q: f64 = 0.1;

const TIE: f64 = 1e-12;

/// Classifies `(p, q, K)` for `f = s^p log^q(K+s)`. Parameters on a
/// boundary between clauses (within `1e-12`) give [`PowerLogClause::None`].
pub fn power_log_clause(p: f64, q: f64, k: f64, n: u32, case: Case, small_q: f64) -> Result<PowerLogClause> {
    if !(p > 1.0) || !(k >= 1.0) || !q.is_finite() {
        return Err(Error::Precondition(format!("need p > 1, K >= 1 and finite q (p={p}, q={q}, K={k})")));
    }
    let ex = critical_exponents(n, case)?;
    let (p_star, p_c, p_s, p_b) = (ex.p_star.value(), ex.p_c.value(), ex.p_s.value(), ex.p_b.value());
    let gt = |a: f64, b: f64| a > b + TIE;
    let lt = |a: f64, b: f64| a < b - TIE;
    let eq = |a: f64, b: f64| (a - b).abs() <= TIE;
    let k_gt_1 = gt(k, 1.0);
    let k_is_1 = eq(k, 1.0);
    if lt(p, p_star) && k_gt_1 {
        return Ok(PowerLogClause::I);
    }
    if !lt(p, p_star) && lt(p, p_c) {
        {
            let gap = p_c - p;
            if lt(q, gap) {
                return Ok(PowerLogClause::Ii1);
            }
            if eq(q, gap) {
                return Ok(if k_gt_1 { PowerLogClause::Ii2 } else { PowerLogClause::None });
            }
            let bound = gap / q * (q / gap - 1.0).exp();
            if gt(k, bound) {
                return Ok(PowerLogClause::Ii3);
            }
        }
    }
    let entire = (lt(p, p_s) && gt(q, p_s - p) && k_is_1) || (!lt(p, p_s) && gt(q, 0.0));
    if entire {
        return Ok(PowerLogClause::EntireSolutionRegime);
    }
    if case == Case::Parabolic && !lt(p, p_b) && lt(p, p_s) && q.abs() <= small_q {
        return Ok(PowerLogClause::Iii);
    }
    Ok(PowerLogClause::None)
}
