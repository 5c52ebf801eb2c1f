use proptest::prelude::*;
use rvlab_core::nonlinearity::parse;
use rvlab_core::ode_blowup::*;
use rvlab_core::{Error, Expr};

/// Adaptive Simpson on `[a, b]`.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
}

#[test]
fn power_blowup_times() {
    assert!((blowup_time(&Expr::power(2.0), 1.0, 1e-12).unwrap() - 1.0).abs() < 1e-12);
    assert!((blowup_time(&Expr::power(3.0), 1.0, 1e-12).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn log_blowup_time_matches_simpson() {
    let f = parse("s^2*log(2+s)").unwrap();
    let t = blowup_time(&f, 1.0, 1e-12).unwrap();
    // ∫_1^∞ dz/(z² log(2+z)) with z = e^u, truncated where the tail is below 1e-17
    let oracle = simpson(&|u: f64| (-u).exp() / (2.0 + u.exp()).ln(), 0.0, 40.0, 1e-15);
    assert!((t - oracle).abs() / oracle <= 1e-10, "{t} vs {oracle}");
}

#[test]
fn linear_growth_has_no_blowup() {
    assert!(matches!(blowup_time(&Expr::var(), 1.0, 1e-10), Err(Error::NonIntegrableTail(_))));
    let f = parse("s*log(2+s)").unwrap();
    assert!(matches!(blowup_time(&f, 1.0, 1e-10), Err(Error::NonIntegrableTail(_))));
}

#[test]
fn quadratic_trajectory() {
    let p = trajectory(&Expr::power(2.0), 1.0, &[0.0, 0.5, 0.9]).unwrap();
    assert!((p.y[2] - 10.0).abs() < 1e-8);
    assert!((p.rho[2] - 1.0).abs() < 1e-8);
    assert!((p.y[1] - 2.0).abs() < 1e-9);
    assert!(trajectory(&Expr::power(2.0), 1.0, &[0.2, 1.0]).is_err());
}

#[test]
fn log_profile_is_increasing_and_rate_bounded_below() {
    let f = parse("s^2*log(2+s)").unwrap();
    let taus: Vec<f64> = (0..=16).map(|k| 10f64.powf(-0.5 * k as f64) * 0.5).collect();
    let p = trajectory_remaining(&f, 1.0, &taus).unwrap();
    for w in p.y.windows(2) {
        assert!(w[1] > w[0]);
    }
    for (tau, y) in p.t_minus_t.iter().zip(&p.y) {
        let h = h_integral(&f, *y, 1e-13).unwrap();
        assert!((h - tau).abs() / tau < 1e-9);
    }
    assert!(p.rho.iter().all(|r| *r > 0.5 && *r < 1.5), "{:?}", p.rho);
}

#[test]
fn rate_window_examples() {
    let r = verify_rate(&Expr::power(2.0), 1.0, RateWindow::Time { t_a: 0.1, t_b: 0.999 }).unwrap();
    assert!((r.rho_min - 1.0).abs() < 1e-8 && (r.rho_max - 1.0).abs() < 1e-8);
    let r = verify_rate(&Expr::power(1.5), 1.0, RateWindow::Remaining { hi: 1.0, lo: 1e-6 }).unwrap();
    assert!((r.rho_min - 2.0).abs() < 1e-8 && (r.rho_max - 2.0).abs() < 1e-8);
    let f = parse("s^2*log(2+s)^2").unwrap();
    let t = blowup_time(&f, 1.0, 1e-12).unwrap();
    let r = verify_rate(&f, 1.0, RateWindow::Remaining { hi: t, lo: 1e-8 }).unwrap();
    assert!(r.pass && r.rho_min > 0.0 && r.rho_max.is_finite());
}

#[test]
fn forward_integration_agrees() {
    for src in ["s^2", "s^3", "s^2*log(2+s)", "s^1.5*exp(sin(log(1+s)))"] {
        let f = parse(src).unwrap();
        let dev = forward_cross_check(&f, 1.0, 0.9, 20).unwrap();
        assert!(dev < 1e-6, "{src}: {dev}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn power_scaling(p in 1.2f64..5.0, y0 in 0.01f64..100.0) {
        let t = blowup_time(&Expr::power(p), y0, 1e-12).unwrap();
        let exact = y0.powf(1.0 - p) / (p - 1.0);
        prop_assert!((t / exact - 1.0).abs() < 1e-11);
    }

    #[test]
    fn power_rate_constant(p in 1.2f64..5.0, frac in 0.0f64..0.999) {
        let f = Expr::power(p);
        let t = blowup_time(&f, 1.0, 1e-12).unwrap();
        let prof = trajectory(&f, 1.0, &[frac * t]).unwrap();
        prop_assert!((prof.rho[0] * (p - 1.0) - 1.0).abs() < 1e-8);
    }
}
