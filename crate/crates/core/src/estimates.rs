//! Universal-estimate functionals evaluated on sampled solutions, and a
//! finite-difference verifier for the Gidas-Spruck type integral inequality
//!
//! ```text
//! α I_q + β J_q + γ K_q <= ½ ∫ v^q |∇v|² Δφ + ∫ v^q [Δv + (q-k) v^{-1} |∇v|²] ∇v·∇φ
//! ```
//!
//! with `I_q = ∫ φ v^{q-2} |∇v|⁴`, `J_q = ∫ φ v^{q-1} |∇v|² Δv`,
//! `K_q = ∫ φ v^q (Δv)²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::{Case, Expr};
use crate::parabolic_fd::{Geometry, Trajectory};

/// Spatial domain with an analytic distance to its boundary. Balls and
/// annuli are centred at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Interval {
        a: f64,
        b: f64,
    },
    Ball {
        n: u32,
        radius: f64,
    },
    /// `r_in < |x| < r_out`; `r_in = 0` is the punctured ball.
    Annulus {
        n: u32,
        r_in: f64,
        r_out: f64,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Ball { n, .. } | Domain::Annulus { n, .. } => *n as usize,
            Domain::Box { lo, .. } => lo.len(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Domain::Interval { a, b } => a < b && a.is_finite() && b.is_finite(),
            Domain::Ball { n, radius } => *n >= 1 && *radius > 0.0 && radius.is_finite(),
            Domain::Annulus { n, r_in, r_out } => *n >= 1 && *r_in >= 0.0 && r_in < r_out && r_out.is_finite(),
            Domain::Box { lo, hi } => !lo.is_empty() && lo.len() == hi.len() && lo.iter().zip(hi).all(|(a, b)| a < b && b.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid domain {self:?}")))
        }
    }

    /// `dist(x, ∂D)`, negative outside.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        let norm = || x.iter().map(|v| v * v).sum::<f64>().sqrt();
        match self {
            Domain::Interval { a, b } => (x[0] - a).min(b - x[0]),
            Domain::Ball { radius, .. } => radius - norm(),
            Domain::Annulus { r_in, r_out, .. } => {
                let r = norm();
                (r - r_in).min(r_out - r)
            }
            Domain::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).map(|(v, (a, b))| (v - a).min(b - v)).fold(f64::INFINITY, f64::min),
        }
    }

    /// Same geometry scaled by `1/λ` (the domain of `u(λ·)`).
    pub fn shrink(&self, lambda: f64) -> Domain {
        match self {
            Domain::Interval { a, b } => Domain::Interval { a: a / lambda, b: b / lambda },
            Domain::Ball { n, radius } => Domain::Ball { n: *n, radius: radius / lambda },
            Domain::Annulus { n, r_in, r_out } => Domain::Annulus { n: *n, r_in: r_in / lambda, r_out: r_out / lambda },
            Domain::Box { lo, hi } => {
                Domain::Box { lo: lo.iter().map(|v| v / lambda).collect(), hi: hi.iter().map(|v| v / lambda).collect() }
            }
        }
    }
}

/// Elliptic `d_E(x, y) = |x - y|` on `D`, or parabolic
/// `d_P((x,t),(y,s)) = |x - y| + |t - s|^{1/2}` on `D × (t0, t1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceModel {
    pub case: Case,
    pub domain: Domain,
    /// `(t0, t1)`, parabolic only.
    pub time: Option<(f64, f64)>,
}

impl DistanceModel {
    pub fn elliptic(domain: Domain) -> Result<Self> {
        domain.validate()?;
        Ok(Self { case: Case::Elliptic, domain, time: None })
    }

    pub fn parabolic(domain: Domain, t0: f64, t1: f64) -> Result<Self> {
        domain.validate()?;
        if !(t0 < t1 && t0.is_finite() && t1.is_finite()) {
            return Err(Error::InvalidParameter(format!("time interval ({t0}, {t1}) is empty")));
        }
        Ok(Self { case: Case::Parabolic, domain, time: Some((t0, t1)) })
    }

    /// Coordinates per point: spatial dimension, plus one (time, last) when
    /// parabolic.
    pub fn point_len(&self) -> usize {
        self.domain.dim() + usize::from(self.case == Case::Parabolic)
    }

    /// Distance between two points.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let m = self.domain.dim();
        let space = a[..m].iter().zip(&b[..m]).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        match self.case {
            Case::Elliptic => space,
            Case::Parabolic => space + (a[m] - b[m]).abs().sqrt(),
        }
    }

    /// Distance to the boundary of `D` (resp. `D × (t0, t1)`).
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        let m = self.domain.dim();
        let d = self.domain.boundary_distance(&x[..m]);
        match self.time {
            Some((t0, t1)) if self.case == Case::Parabolic => {
                let t = x[m];
                let gap = (t - t0).min(t1 - t);
                if gap <= 0.0 {
                    gap
                } else {
                    d.min(gap.sqrt())
                }
            }
            _ => d,
        }
    }
}

/// One member of a solution family: points of `D` (coordinates as in
/// [`DistanceModel::point_len`]) with values `u > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub id: String,
    pub points: Vec<Vec<f64>>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `sup (f(u)/u) d²` over all samples.
    Homogeneous,
    /// `sup (f(u)/u) / (1 + d^{-2})` over samples with `u >= 1`.
    Shifted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberValue {
    pub id: String,
    /// `None` when the member has no admissible point.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Argmax {
    pub member: String,
    pub index: usize,
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub functional: String,
    pub family: String,
    pub sup: f64,
    pub argmax: Argmax,
    pub members: Vec<MemberValue>,
}

impl EstimateReport {
    fn build(functional: &str, family: &str, members: Vec<(String, Option<(f64, usize, Vec<f64>)>)>) -> Result<Self> {
        let mut best: Option<(f64, Argmax)> = None;
        let mut out = Vec::with_capacity(members.len());
        for (id, v) in members {
            if let Some((value, index, point)) = &v {
                if best.as_ref().is_none_or(|(b, _)| value > b) {
                    best = Some((*value, Argmax { member: id.clone(), index: *index, point: point.clone() }));
                }
            }
            out.push(MemberValue { id, value: v.map(|x| x.0) });
        }
        let (sup, argmax) = best.ok_or_else(|| Error::NoAdmissiblePoints(format!("{functional}: no sample satisfies the restriction")))?;
        Ok(Self { functional: functional.into(), family: family.into(), sup, argmax, members: out })
    }
}

fn ln_ratio(f: &Expr, u: f64) -> Result<f64> {
    Ok(f.ln_at(u)? - u.ln())
}

/// Interior functional of a family of sampled solutions.
pub fn interior_constant(
    family: &[SampleSet],
    family_id: &str,
    f: &Expr,
    model: &DistanceModel,
    variant: Variant,
) -> Result<EstimateReport> {
    if family.is_empty() {
        return Err(Error::NoAdmissiblePoints("empty family".into()));
    }
    let len = model.point_len();
    let mut members = Vec::with_capacity(family.len());
    for set in family {
        if set.points.len() != set.u.len() {
            return Err(Error::InvalidParameter(format!("member {}: {} points, {} values", set.id, set.points.len(), set.u.len())));
        }
        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        for (i, (x, &u)) in set.points.iter().zip(&set.u).enumerate() {
            if x.len() != len {
                return Err(Error::InvalidParameter(format!("member {}: point {i} has {} coordinates, need {len}", set.id, x.len())));
            }
            if !(u > 0.0 && u.is_finite()) {
                return Err(Error::InvalidParameter(format!("member {}: u = {u} at point {i} is not positive", set.id)));
            }
            let d = model.boundary_distance(x);
            if !(d > 0.0) {
                return Err(Error::Precondition(format!("member {}: point {i} is not inside D", set.id)));
            }
            let value = match variant {
                Variant::Homogeneous => (ln_ratio(f, u)? + 2.0 * d.ln()).exp(),
                Variant::Shifted => {
                    if u < 1.0 {
                        continue;
                    }
                    ln_ratio(f, u)?.exp() / (1.0 + d.powi(-2))
                }
            };
            if best.as_ref().is_none_or(|(b, _, _)| value > *b) {
                best = Some((value, i, x.clone()));
            }
        }
        members.push((set.id.clone(), best));
    }
    let name = match variant {
        Variant::Homogeneous => "interior_homogeneous",
        Variant::Shifted => "interior_shifted",
    };
    EstimateReport::build(name, family_id, members)
}

fn snapshot_points(traj: &Trajectory) -> Vec<Vec<f64>> {
    match traj.geometry {
        Geometry::Interval { .. } => traj.grid.iter().map(|&x| vec![x]).collect(),
        Geometry::Ball { n, .. } => traj
            .grid
            .iter()
            .map(|&r| {
                let mut x = vec![0.0; n as usize];
                x[0] = r;
                x
            })
            .collect(),
    }
}

/// Space-time samples `(x, t)` of every stored snapshot with `0 < t < t_end`
/// and `u > 0`, one member per snapshot.
pub fn snapshot_family(traj: &Trajectory, t_end: f64) -> Vec<SampleSet> {
    let xs = snapshot_points(traj);
    traj.snapshots
        .iter()
        .filter(|s| s.t > 0.0 && s.t < t_end)
        .map(|s| {
            let (points, u) = xs
                .iter()
                .zip(&s.u)
                .filter(|(_, &u)| u > 0.0)
                .map(|(x, &u)| {
                    let mut p = x.clone();
                    p.push(s.t);
                    (p, u)
                })
                .unzip();
            SampleSet { id: format!("t={:.6e}", s.t), points, u }
        })
        .collect()
}

/// `sup (f(u)/u) / (1 + t^{-1} + (T̂ - t)^{-1})` over snapshots with
/// `0 < t < T̂` and grid points with `u >= 1`.
pub fn temporal_constant(traj: &Trajectory, f: &Expr, t_hat: f64) -> Result<EstimateReport> {
    if !(t_hat > 0.0 && t_hat.is_finite()) {
        return Err(Error::InvalidParameter(format!("T̂ = {t_hat} must be positive")));
    }
    let xs = snapshot_points(traj);
    let mut members = Vec::new();
    for s in traj.snapshots.iter().filter(|s| s.t > 0.0 && s.t < t_hat) {
        let weight = 1.0 + 1.0 / s.t + 1.0 / (t_hat - s.t);
        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        for (i, &u) in s.u.iter().enumerate() {
            if !(u >= 1.0) {
                continue;
            }
            let value = ln_ratio(f, u)?.exp() / weight;
            if best.as_ref().is_none_or(|(b, _, _)| value > *b) {
                let mut p = xs[i].clone();
                p.push(s.t);
                best = Some((value, i, p));
            }
        }
        members.push((format!("t={:.6e}", s.t), best));
    }
    EstimateReport::build("temporal", "trajectory", members)
}

/// Coefficients `(α, β, γ)` of the integral inequality.
pub fn gs_coefficients(n: u32, q: f64, k: f64) -> (f64, f64, f64) {
    let nf = f64::from(n);
    let alpha = -(nf - 1.0) / nf * k * k + (q - 1.0) * k - q * (q - 1.0) / 2.0;
    let beta = (nf + 2.0) / nf * k - 1.5 * q;
    let gamma = -(nf - 1.0) / nf;
    (alpha, beta, gamma)
}

/// Uniform grid on `[lo, hi]^n`, `n ∈ {1, 2}`, with `intervals + 1` nodes
/// per side. Samples are stored with the first coordinate fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubeGrid {
    pub n: u32,
    pub lo: f64,
    pub hi: f64,
    pub intervals: usize,
}

impl CubeGrid {
    pub fn new(n: u32, lo: f64, hi: f64, intervals: usize) -> Result<Self> {
        if !(n == 1 || n == 2) {
            return Err(Error::InvalidParameter(format!("grid dimension {n} not in {{1, 2}}")));
        }
        if !(lo < hi) || intervals < 6 {
            return Err(Error::InvalidParameter("need lo < hi and at least 6 intervals".into()));
        }
        Ok(Self { n, lo, hi, intervals })
    }

    pub fn h(&self) -> f64 {
        (self.hi - self.lo) / self.intervals as f64
    }

    pub fn side(&self) -> usize {
        self.intervals + 1
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.n)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, i: usize) -> f64 {
        if i == self.intervals {
            self.hi
        } else {
            self.lo + i as f64 * self.h()
        }
    }

    /// Coordinates of node `idx`.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let s = self.side();
        match self.n {
            1 => vec![self.coord(idx)],
            _ => vec![self.coord(idx % s), self.coord(idx / s)],
        }
    }

    pub fn sample(&self, g: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|i| g(&self.point(i))).collect()
    }

    /// Smallest node distance to the edge of the cube, in grid steps.
    fn layer(&self, idx: usize) -> usize {
        let s = self.side();
        let edge = |i: usize| i.min(self.intervals - i);
        match self.n {
            1 => edge(idx),
            _ => edge(idx % s).min(edge(idx / s)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsCheck {
    pub n: u32,
    pub q: f64,
    pub k: f64,
    pub h: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub i_q: f64,
    pub j_q: f64,
    pub k_q: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub slack: f64,
}

struct Derivs {
    grad: Vec<f64>,
    grad_sq: Vec<f64>,
    lap: Vec<f64>,
}

/// Central gradient and Laplacian at nodes with layer >= 1.
fn derivs(grid: &CubeGrid, w: &[f64]) -> Derivs {
    let dim = grid.n as usize;
    let s = grid.side();
    let h = grid.h();
    let len = grid.len();
    let mut grad = vec![0.0; len * dim];
    let mut grad_sq = vec![0.0; len];
    let mut lap = vec![0.0; len];
    for idx in 0..len {
        if grid.layer(idx) == 0 {
            continue;
        }
        let strides: &[usize] = if dim == 1 { &[1] } else { &[1, s] };
        for (a, &st) in strides.iter().enumerate() {
            let (m, p) = (w[idx - st], w[idx + st]);
            let g = (p - m) / (2.0 * h);
            grad[idx * dim + a] = g;
            grad_sq[idx] += g * g;
            lap[idx] += (p - 2.0 * w[idx] + m) / (h * h);
        }
    }
    Derivs { grad, grad_sq, lap }
}

/// Evaluates both sides of the inequality for samples `v > 0`, `φ >= 0` on
/// `grid`. `φ` must vanish on the three outermost node layers.
pub fn gs_inequality_check(v: &[f64], phi: &[f64], q: f64, k: f64, grid: &CubeGrid) -> Result<GsCheck> {
    let len = grid.len();
    if v.len() != len || phi.len() != len {
        return Err(Error::InvalidParameter(format!("expected {len} samples of v and φ")));
    }
    if !(q.is_finite() && k.is_finite()) || k == -1.0 {
        return Err(Error::InvalidParameter(format!("need finite q and k != -1, got q = {q}, k = {k}")));
    }
    if let Some(i) = v.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Precondition(format!("v = {} at node {i} is not positive", v[i])));
    }
    if let Some(i) = phi.iter().position(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter(format!("φ = {} at node {i} is negative", phi[i])));
    }
    if let Some(i) = (0..len).find(|&i| grid.layer(i) < 3 && phi[i] != 0.0) {
        return Err(Error::Precondition(format!("support of φ touches the boundary at {:?}", grid.point(i))));
    }
    let dim = grid.n as usize;
    let dv = derivs(grid, v);
    let dphi = derivs(grid, phi);
    let (mut i_q, mut j_q, mut k_q, mut rhs) = (0.0, 0.0, 0.0, 0.0);
    for idx in 0..len {
        if grid.layer(idx) < 2 {
            continue;
        }
        let (vi, g2, lap) = (v[idx], dv.grad_sq[idx], dv.lap[idx]);
        let vq = vi.powf(q);
        let p = phi[idx];
        if p != 0.0 {
            i_q += p * vq / (vi * vi) * g2 * g2;
            j_q += p * vq / vi * g2 * lap;
            k_q += p * vq * lap * lap;
        }
        let dot: f64 = (0..dim).map(|a| dv.grad[idx * dim + a] * dphi.grad[idx * dim + a]).sum();
        rhs += 0.5 * vq * g2 * dphi.lap[idx] + vq * (lap + (q - k) / vi * g2) * dot;
    }
    let cell = grid.h().powi(grid.n as i32);
    let (i_q, j_q, k_q, rhs) = (i_q * cell, j_q * cell, k_q * cell, rhs * cell);
    let (alpha, beta, gamma) = gs_coefficients(grid.n, q, k);
    let lhs = alpha * i_q + beta * j_q + gamma * k_q;
    Ok(GsCheck { n: grid.n, q, k, h: grid.h(), alpha, beta, gamma, i_q, j_q, k_q, lhs, rhs, slack: rhs - lhs })
}

/// Safety factor on the Richardson error coefficient.
pub const C_DISC_SAFETY: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsRefinement {
    pub coarse: GsCheck,
    pub fine: GsCheck,
    /// `C_DISC_SAFETY · |slack_h - slack_{h/2}| / (¾ h²)`.
    pub c_disc: f64,
    /// `(4 slack_{h/2} - slack_h) / 3`.
    pub extrapolated: f64,
    /// `slack_h >= -C_disc h²`.
    pub within_budget: bool,
    /// `max(0, -slack)` does not grow from `h` to `h/2`.
    pub improves: bool,
}

impl GsRefinement {
    pub fn pass(&self) -> bool {
        self.within_budget && self.improves
    }
}

/// Runs [`gs_inequality_check`] for closed-form `v`, `φ` on `grid` and on
/// the grid with half the step.
pub fn gs_refinement(v: impl Fn(&[f64]) -> f64, phi: impl Fn(&[f64]) -> f64, q: f64, k: f64, grid: &CubeGrid) -> Result<GsRefinement> {
    let fine_grid = CubeGrid { intervals: 2 * grid.intervals, ..*grid };
    let coarse = gs_inequality_check(&grid.sample(&v), &grid.sample(&phi), q, k, grid)?;
    let fine = gs_inequality_check(&fine_grid.sample(&v), &fine_grid.sample(&phi), q, k, &fine_grid)?;
    let h2 = coarse.h * coarse.h;
    let c_disc = C_DISC_SAFETY * (coarse.slack - fine.slack).abs() / (0.75 * h2);
    let extrapolated = (4.0 * fine.slack - coarse.slack) / 3.0;
    let within_budget = coarse.slack >= -c_disc * h2;
    let improves = (-fine.slack).max(0.0) <= (-coarse.slack).max(0.0);
    Ok(GsRefinement { coarse, fine, c_disc, extrapolated, within_budget, improves })
}

/// Smooth bump `exp(1 - 1/(1 - |x-c|²/ρ²))` supported in `B(c, ρ)`.
pub fn bump(center: &[f64], radius: f64) -> impl Fn(&[f64]) -> f64 + '_ {
    move |x: &[f64]| {
        let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (radius * radius);
        if r2 >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - r2)).exp()
        }
    }
}
