//! Finite differences for `u_t = Δu + f(u)` on an interval or a ball
//! (radial), with blow-up detection and rate diagnostics.
//!
//! Space: second-order conservative three-point stencil. For the ball it is
//! the finite-volume form of `r^{1-n}(r^{n-1}u_r)_r`, whose weights are
//! nonnegative at every node and which reduces to `2n(u_1-u_0)/h²` at the
//! centre. Time: three-stage SSP Runge-Kutta with
//! `dt = min(safety / max diag(L), reaction_safety / max f'(u))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::expr::Dual;
use crate::nonlinearity::Expr;
use crate::ode_blowup::h_integral;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    Interval {
        a: f64,
        b: f64,
    },
    /// Radial profile on `B_R ⊂ R^n`.
    Ball {
        n: u32,
        radius: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    Dirichlet0,
    Neumann0,
}

impl Geometry {
    /// Nodes `x_0 < .. < x_N` for `N = intervals`.
    pub fn nodes(&self, intervals: usize) -> Vec<f64> {
        let (lo, hi) = match *self {
            Geometry::Interval { a, b } => (a, b),
            Geometry::Ball { radius, .. } => (0.0, radius),
        };
        let h = (hi - lo) / intervals as f64;
        (0..=intervals).map(|i| if i == intervals { hi } else { lo + i as f64 * h }).collect()
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Geometry::Interval { a, b } if a < b && a.is_finite() && b.is_finite() => Ok(()),
            Geometry::Ball { n, radius } if n >= 1 && radius > 0.0 && radius.is_finite() => Ok(()),
            g => Err(Error::InvalidParameter(format!("invalid geometry {g:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationOptions {
    /// Number of grid intervals.
    pub intervals: usize,
    /// Fraction of the diffusive stability limit.
    pub safety: f64,
    /// `dt · max f'(u)` bound; controls accuracy near blow-up.
    pub reaction_safety: f64,
    /// Blow-up is declared once `max u` exceeds this.
    pub cap: f64,
    pub horizon: f64,
    /// Decay is declared once `max u` drops below this.
    pub decay_floor: f64,
    /// A snapshot is stored whenever `max u` has grown by this factor since
    /// the previous one.
    pub snapshot_growth: f64,
    /// A snapshot is also stored every `snapshot_dt` time units.
    pub snapshot_dt: f64,
    pub max_steps: usize,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            intervals: 256,
            safety: 0.9,
            reaction_safety: 0.02,
            cap: 1e12,
            horizon: 10.0,
            decay_floor: 1e-10,
            snapshot_growth: 2.0,
            snapshot_dt: 0.05,
            max_steps: 100_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    BlowUp,
    GlobalToHorizon,
    Decayed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
}

impl Snapshot {
    pub fn max(&self) -> f64 {
        self.u.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupEstimate {
    pub t_hat: f64,
    pub uncertainty: f64,
    /// Estimates from successive decades of `M`, latest first.
    pub windows: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub geometry: Geometry,
    pub bc: BoundaryCondition,
    pub grid: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    /// `(t, max u)` after every accepted step.
    pub history_t: Vec<f64>,
    pub history_m: Vec<f64>,
    pub termination: Termination,
    pub steps: usize,
    /// Smallest field value seen (nonnegativity diagnostic).
    pub min_value: f64,
    /// Blow-up declared because `f(u)` overflowed or `dt` underflowed
    /// before `max u` reached the cap.
    pub early_stop: bool,
    pub blowup: Option<BlowupEstimate>,
}

impl Trajectory {
    pub fn final_time(&self) -> f64 {
        *self.history_t.last().unwrap()
    }

    pub fn final_max(&self) -> f64 {
        *self.history_m.last().unwrap()
    }
}

struct Stencil {
    lower: Vec<f64>,
    upper: Vec<f64>,
    active: Vec<bool>,
}

fn stencil(geometry: Geometry, bc: BoundaryCondition, x: &[f64]) -> Stencil {
    let n_pts = x.len();
    let last = n_pts - 1;
    let h = (x[last] - x[0]) / last as f64;
    let mut lower = vec![0.0; n_pts];
    let mut upper = vec![0.0; n_pts];
    let mut active = vec![true; n_pts];
    match geometry {
        Geometry::Interval { .. } => {
            for i in 1..last {
                lower[i] = 1.0 / (h * h);
                upper[i] = 1.0 / (h * h);
            }
            match bc {
                BoundaryCondition::Dirichlet0 => {
                    active[0] = false;
                    active[last] = false;
                }
                BoundaryCondition::Neumann0 => {
                    upper[0] = 2.0 / (h * h);
                    lower[last] = 2.0 / (h * h);
                }
            }
        }
        Geometry::Ball { n, .. } => {
            let nf = f64::from(n);
            upper[0] = 2.0 * nf / (h * h);
            for i in 1..=last {
                let rm = x[i] - 0.5 * h;
                let rp = if i == last { x[i] } else { x[i] + 0.5 * h };
                let vol = (rp.powf(nf) - rm.powf(nf)) / nf;
                lower[i] = rm.powf(nf - 1.0) / (h * vol);
                if i < last {
                    upper[i] = rp.powf(nf - 1.0) / (h * vol);
                }
            }
            if bc == BoundaryCondition::Dirichlet0 {
                active[last] = false;
            }
        }
    }
    Stencil { lower, upper, active }
}

/// `du = L u + f(u)` on active nodes; returns `max f'(u)` when `want_slope`.
fn rhs(f: &Expr, st: &Stencil, u: &[f64], du: &mut [f64], want_slope: bool) -> f64 {
    let last = u.len() - 1;
    let mut slope: f64 = 0.0;
    for i in 0..=last {
        if !st.active[i] {
            du[i] = 0.0;
            continue;
        }
        let ui = u[i];
        let left = if i > 0 { st.lower[i] * (u[i - 1] - ui) } else { 0.0 };
        let right = if i < last { st.upper[i] * (u[i + 1] - ui) } else { 0.0 };
        let s = ui.max(0.0);
        let fv = if want_slope {
            let d = f.eval_scalar(Dual { v: s, d: 1.0 });
            if d.d.is_finite() {
                slope = slope.max(d.d);
            } else {
                slope = f64::INFINITY;
            }
            d.v
        } else {
            f.eval_scalar(s)
        };
        du[i] = left + right + fv;
    }
    slope
}

/// Runs the explicit scheme from `u0` (values at `geometry.nodes(opts.intervals)`).
pub fn simulate(f: &Expr, geometry: Geometry, bc: BoundaryCondition, u0: &[f64], opts: &SimulationOptions) -> Result<Trajectory> {
    geometry.validate()?;
    if opts.intervals < 2 {
        return Err(Error::InvalidParameter("need at least 2 grid intervals".into()));
    }
    if !(opts.safety > 0.0 && opts.safety <= 1.0 && opts.reaction_safety > 0.0 && opts.reaction_safety <= 1.0) {
        return Err(Error::InvalidParameter("safety factors must lie in (0, 1]".into()));
    }
    if !(opts.cap > 0.0 && opts.horizon > 0.0 && opts.snapshot_growth > 1.0 && opts.snapshot_dt > 0.0) {
        return Err(Error::InvalidParameter("cap, horizon, snapshot_dt must be positive, snapshot_growth > 1".into()));
    }
    let grid = geometry.nodes(opts.intervals);
    if u0.len() != grid.len() {
        return Err(Error::InvalidParameter(format!("u0 has {} values, grid has {}", u0.len(), grid.len())));
    }
    if let Some(v) = u0.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::Precondition(format!("initial data must be finite and nonnegative (found {v})")));
    }
    let st = stencil(geometry, bc, &grid);
    let dt_diff = 1.0 / st.lower.iter().zip(&st.upper).map(|(a, b)| a + b).fold(0.0, f64::max);

    let mut u: Vec<f64> = u0.to_vec();
    for (i, v) in u.iter_mut().enumerate() {
        if !st.active[i] {
            *v = 0.0;
        }
    }
    let len = u.len();
    let (mut k, mut u1, mut u2) = (vec![0.0; len], vec![0.0; len], vec![0.0; len]);
    let max_of = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let mut t = 0.0;
    let mut m = max_of(&u);
    let mut traj = Trajectory {
        geometry,
        bc,
        grid,
        snapshots: vec![Snapshot { t, u: u.clone() }],
        history_t: vec![t],
        history_m: vec![m],
        termination: Termination::GlobalToHorizon,
        steps: 0,
        min_value: u.iter().copied().fold(f64::INFINITY, f64::min),
        early_stop: false,
        blowup: None,
    };
    let mut last_snap_t = 0.0;
    let mut last_snap_m = m;
    loop {
        if m > opts.cap {
            traj.termination = Termination::BlowUp;
            break;
        }
        if m < opts.decay_floor {
            traj.termination = Termination::Decayed;
            break;
        }
        if t >= opts.horizon {
            traj.termination = Termination::GlobalToHorizon;
            break;
        }
        if traj.steps >= opts.max_steps {
            return Err(Error::Simulation(format!("step limit {} reached at t = {t}, max u = {m:e}", opts.max_steps)));
        }
        let slope = rhs(f, &st, &u, &mut k, true);
        let mut dt = opts.safety * dt_diff;
        if slope > 0.0 {
            dt = dt.min(opts.reaction_safety / slope);
        }
        if t + dt > opts.horizon {
            dt = opts.horizon - t;
        }
        if !(dt > 0.0) || t + dt == t {
            if m > 1.0 {
                traj.termination = Termination::BlowUp;
                traj.early_stop = true;
                break;
            }
            return Err(Error::Simulation(format!("time step underflow at t = {t}, max u = {m:e}")));
        }
        for i in 0..len {
            u1[i] = u[i] + dt * k[i];
        }
        rhs(f, &st, &u1, &mut k, false);
        for i in 0..len {
            u2[i] = 0.75 * u[i] + 0.25 * (u1[i] + dt * k[i]);
        }
        rhs(f, &st, &u2, &mut k, false);
        let mut finite = true;
        for i in 0..len {
            let v = u[i] / 3.0 + 2.0 / 3.0 * (u2[i] + dt * k[i]);
            finite &= v.is_finite();
            u1[i] = v;
        }
        if !finite {
            if m > 1e6 {
                traj.termination = Termination::BlowUp;
                traj.early_stop = true;
                break;
            }
            return Err(Error::Simulation(format!("non-finite field after t = {t}, max u = {m:e}, dt = {dt:e}")));
        }
        std::mem::swap(&mut u, &mut u1);
        t += dt;
        m = max_of(&u);
        traj.steps += 1;
        traj.min_value = traj.min_value.min(u.iter().copied().fold(f64::INFINITY, f64::min));
        traj.history_t.push(t);
        traj.history_m.push(m);
        if m >= last_snap_m * opts.snapshot_growth || t - last_snap_t >= opts.snapshot_dt {
            traj.snapshots.push(Snapshot { t, u: u.clone() });
            last_snap_t = t;
            last_snap_m = m;
        }
    }
    if traj.snapshots.last().map(|s| s.t) != Some(t) {
        traj.snapshots.push(Snapshot { t, u: u.clone() });
    }
    if traj.termination == Termination::BlowUp {
        traj.blowup = estimate_blowup_time(&traj, f).ok();
    }
    Ok(traj)
}

/// History points thinned to about `per_decade` per decade of `M`.
fn thinned(traj: &Traj, per_decade: f64) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    let step = 1.0 / per_decade;
    for (&t, &m) in traj.0.iter().zip(traj.1) {
        if m <= 0.0 {
            continue;
        }
        match out.last() {
            Some(&(_, pm)) if (m.log10() - pm.log10()) < step => {}
            _ => out.push((t, m)),
        }
    }
    out
}

type Traj<'a> = (&'a [f64], &'a [f64]);

/// `T̂` from `T ≈ t + H(M(t))` averaged over each of the last four decades
/// of `M`; the uncertainty is the spread of the per-decade values.
pub fn estimate_blowup_time(traj: &Trajectory, f: &Expr) -> Result<BlowupEstimate> {
    if traj.termination != Termination::BlowUp {
        return Err(Error::NotBlowup(format!("trajectory ended with {:?}", traj.termination)));
    }
    let points = thinned(&(&traj.history_t, &traj.history_m), 40.0);
    let top = traj.final_max().log10();
    let mut windows = Vec::new();
    for k in 0..4 {
        let (hi, lo) = (top - k as f64, top - (k + 1) as f64);
        let sel: Vec<&(f64, f64)> = points.iter().filter(|(_, m)| m.log10() <= hi && m.log10() > lo).collect();
        if sel.len() < 3 {
            break;
        }
        let mut acc = 0.0;
        for (t, m) in &sel {
            acc += t + h_integral(f, *m, 1e-12)?;
        }
        windows.push(acc / sel.len() as f64);
    }
    if windows.len() < 2 {
        return Err(Error::NotBlowup("fewer than two resolved decades of max u".into()));
    }
    let t_hat = windows[0];
    let uncertainty = windows.iter().map(|w| (w - t_hat).abs()).fold(0.0, f64::max);
    Ok(BlowupEstimate { t_hat, uncertainty, windows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub t: Vec<f64>,
    pub t_minus_t: Vec<f64>,
    pub max_u: Vec<f64>,
    /// `(f(M)/M)(T̂ - t)`.
    pub rho: Vec<f64>,
    pub sup: f64,
    pub inf: f64,
    /// Supremum over the last resolved decade of `T̂ - t`.
    pub sup_last_decade: f64,
}

/// `ρ(t) = (f(M)/M)(T̂ - t)` on history points with `T̂ - t` above ten times
/// the estimate's uncertainty (20 points per decade of `M`).
pub fn rate_report(traj: &Trajectory, f: &Expr, estimate: &BlowupEstimate) -> Result<RateReport> {
    let floor = (10.0 * estimate.uncertainty).max(1e-14 * estimate.t_hat.abs());
    let mut r = RateReport { t: vec![], t_minus_t: vec![], max_u: vec![], rho: vec![], sup: 0.0, inf: f64::INFINITY, sup_last_decade: 0.0 };
    for (t, m) in thinned(&(&traj.history_t, &traj.history_m), 20.0) {
        let tau = estimate.t_hat - t;
        if tau <= floor {
            continue;
        }
        let rho = (f.ln_at(m)? - m.ln() + tau.ln()).exp();
        r.t.push(t);
        r.t_minus_t.push(tau);
        r.max_u.push(m);
        r.rho.push(rho);
        r.sup = r.sup.max(rho);
        r.inf = r.inf.min(rho);
    }
    if r.rho.is_empty() {
        return Err(Error::NotBlowup("no resolved points before the estimated blow-up time".into()));
    }
    let tau_min = r.t_minus_t.iter().copied().fold(f64::INFINITY, f64::min);
    r.sup_last_decade = r.t_minus_t.iter().zip(&r.rho).filter(|(tau, _)| **tau <= 10.0 * tau_min).map(|(_, rho)| *rho).fold(0.0, f64::max);
    Ok(r)
}
