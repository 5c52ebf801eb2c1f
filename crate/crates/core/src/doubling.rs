//! Doubling selection on finite metric spaces.
//!
//! Given `M: D → (0, ∞)` and `y ∈ D` with `M(y) dist(y, Γ) > 2k`, finds
//! `x ∈ D` with
//!
//! * `M(x) dist(x, Γ) > 2k`,
//! * `M(x) >= M(y)`,
//! * `M(z) <= 2 M(x)` whenever `z ∈ D`, `d(z, x) <= k / M(x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack allowed in the triangle inequality at construction.
pub const TRIANGLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMetricSpace {
    n: usize,
    dist: Vec<f64>,
    in_d: Vec<bool>,
    d_set: Vec<usize>,
    /// `dist(x, Γ)` for every point, `+∞` when `Γ` is empty.
    dist_gamma: Vec<f64>,
}

impl FiniteMetricSpace {
    /// Builds `Σ = {0, .., N-1}` with the given distance matrix and the
    /// subset `D`. `Γ = Σ \ D`.
    pub fn new(dist: Vec<Vec<f64>>, d_set: &[usize]) -> Result<Self> {
        let n = dist.len();
        if n == 0 {
            return Err(Error::InvalidParameter("empty space".into()));
        }
        if dist.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidParameter("distance matrix must be square".into()));
        }
        let flat: Vec<f64> = dist.into_iter().flatten().collect();
        let at = |i: usize, j: usize| flat[i * n + j];
        for i in 0..n {
            if at(i, i) != 0.0 {
                return Err(Error::InvalidParameter(format!("d({i},{i}) = {} != 0", at(i, i))));
            }
            for j in 0..n {
                let d = at(i, j);
                if !(d.is_finite() && d >= 0.0) {
                    return Err(Error::InvalidParameter(format!("d({i},{j}) = {d} is not a finite nonnegative number")));
                }
                if d != at(j, i) {
                    return Err(Error::InvalidParameter(format!("d({i},{j}) != d({j},{i})")));
                }
                if i != j && d == 0.0 {
                    return Err(Error::InvalidParameter(format!("distinct points {i}, {j} at distance 0")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let rhs = at(i, j) + at(j, k);
                    if at(i, k) > rhs * (1.0 + TRIANGLE_TOL) {
                        return Err(Error::InvalidParameter(format!(
                            "triangle inequality fails: d({i},{k}) = {} > d({i},{j}) + d({j},{k}) = {rhs}",
                            at(i, k)
                        )));
                    }
                }
            }
        }
        let mut in_d = vec![false; n];
        for &i in d_set {
            if i >= n {
                return Err(Error::InvalidParameter(format!("point {i} of D outside the space")));
            }
            in_d[i] = true;
        }
        if !in_d.iter().any(|&b| b) {
            return Err(Error::InvalidParameter("D must be nonempty".into()));
        }
        let d_set: Vec<usize> = (0..n).filter(|&i| in_d[i]).collect();
        let dist_gamma = (0..n).map(|i| (0..n).filter(|&j| !in_d[j]).map(|j| at(i, j)).fold(f64::INFINITY, f64::min)).collect();
        Ok(Self { n, dist: flat, in_d, d_set, dist_gamma })
    }

    /// Shortest-path metric of a weighted graph given as a symmetric matrix
    /// (`∞` for missing edges). The graph must be connected.
    pub fn from_graph(weights: Vec<Vec<f64>>, d_set: &[usize]) -> Result<Self> {
        Self::new(metric_closure(weights)?, d_set)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn in_d(&self, i: usize) -> bool {
        self.in_d[i]
    }

    pub fn d_set(&self) -> &[usize] {
        &self.d_set
    }

    pub fn dist_to_gamma(&self, i: usize) -> f64 {
        self.dist_gamma[i]
    }
}

/// Floyd-Warshall closure of a symmetric weight matrix.
pub fn metric_closure(mut w: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>> {
    let n = w.len();
    if w.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidParameter("weight matrix must be square".into()));
    }
    for (i, row) in w.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for k in 0..n {
        for i in 0..n {
            let wik = w[i][k];
            if wik.is_infinite() {
                continue;
            }
            for j in 0..n {
                let cand = wik + w[k][j];
                if cand < w[i][j] {
                    w[i][j] = cand;
                }
            }
        }
    }
    if w.iter().flatten().any(|d| d.is_infinite()) {
        return Err(Error::InvalidParameter("graph is not connected".into()));
    }
    Ok(w)
}

/// Positive values of `M` on `D`, indexed by point of `Σ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MFunction {
    values: Vec<Option<f64>>,
}

impl MFunction {
    /// `values[i]` is `M` at the `i`-th point of `space.d_set()`.
    pub fn new(space: &FiniteMetricSpace, values: &[f64]) -> Result<Self> {
        if values.len() != space.d_set().len() {
            return Err(Error::InvalidParameter(format!("expected {} values of M, got {}", space.d_set().len(), values.len())));
        }
        let mut out = vec![None; space.len()];
        for (&i, &v) in space.d_set().iter().zip(values) {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("M({i}) = {v} must be positive and finite")));
            }
            out[i] = Some(v);
        }
        Ok(Self { values: out })
    }

    pub fn from_fn(space: &FiniteMetricSpace, m: impl Fn(usize) -> f64) -> Result<Self> {
        let values: Vec<f64> = space.d_set().iter().map(|&i| m(i)).collect();
        Self::new(space, &values)
    }

    /// `M(i)`; `None` outside `D`.
    pub fn get(&self, i: usize) -> Option<f64> {
        self.values.get(i).copied().flatten()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().flatten().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingTrace {
    pub x: usize,
    /// `x_0 = y, x_1, .., x_J = x`.
    pub path: Vec<usize>,
    /// `M(x_j)` along the path.
    pub m_values: Vec<f64>,
    /// `M(x_j) dist(x_j, Γ)` along the path.
    pub products: Vec<f64>,
    pub iterations: usize,
    /// `⌈log₂(max M / M(y))⌉ + 1`.
    pub iteration_bound: usize,
}

/// Runs the doubling selection from `y`. Candidates inside the closed ball
/// `B(x_j, k/M(x_j))` with `M > 2 M(x_j)` are ranked by largest `M`, then
/// lowest index.
pub fn doubling_select(space: &FiniteMetricSpace, m: &MFunction, k: f64, y: usize) -> Result<DoublingTrace> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("k = {k} must be positive")));
    }
    if y >= space.len() || !space.in_d(y) {
        return Err(Error::Precondition(format!("y = {y} is not a point of D")));
    }
    let my = m.get(y).expect("M defined on D");
    let product = my * space.dist_to_gamma(y);
    if !(product > 2.0 * k) {
        return Err(Error::Precondition(format!("M(y) dist(y, Γ) = {product} is not > 2k = {}", 2.0 * k)));
    }
    let iteration_bound = (m.max() / my).log2().ceil().max(0.0) as usize + 1;
    let mut x = y;
    let mut mx = my;
    let mut trace = DoublingTrace { x, path: vec![x], m_values: vec![mx], products: vec![product], iterations: 0, iteration_bound };
    loop {
        let radius = k / mx;
        let next = space
            .d_set()
            .iter()
            .filter(|&&z| space.d(z, x) <= radius)
            .map(|&z| (z, m.get(z).unwrap()))
            .filter(|&(_, mz)| mz > 2.0 * mx)
            .fold(None, |best: Option<(usize, f64)>, (z, mz)| match best {
                Some((_, mb)) if mb >= mz => best,
                _ => Some((z, mz)),
            });
        let Some((z, mz)) = next else { break };
        x = z;
        mx = mz;
        let p = mx * space.dist_to_gamma(x);
        assert!(p > 2.0 * k, "doubling invariant lost at point {x}: {p} <= {}", 2.0 * k);
        trace.path.push(x);
        trace.m_values.push(mx);
        trace.products.push(p);
        trace.iterations += 1;
        assert!(trace.iterations <= iteration_bound, "iteration bound exceeded");
    }
    trace.x = x;
    Ok(trace)
}
