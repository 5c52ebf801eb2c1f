//! Sample grids.

/// `n` points spaced evenly from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect(),
    }
}

/// `n` points spaced evenly in `ln` from `a` to `b` inclusive (`a, b > 0`).
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a.ln(), b.ln(), n)
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            if i == 0 {
                a
            } else if i + 1 == n {
                b
            } else {
                t.exp()
            }
        })
        .collect()
}

/// Least-squares slope and intercept of `y` against `x`, with the RMS
/// residual of the fit.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx) * (xi - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(xi, yi)| (yi - intercept - slope * xi).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logspace_hits_endpoints_exactly() {
        let g = logspace(1e-12, 1e12, 1001);
        assert_eq!(g[0], 1e-12);
        assert_eq!(g[1000], 1e12);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn fit_recovers_line() {
        let x = linspace(0.0, 1.0, 11);
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let (s, i, r) = linear_fit(&x, &y);
        assert!((s - 3.0).abs() < 1e-14 && (i + 1.0).abs() < 1e-14 && r < 1e-14);
    }
}
