use proptest::prelude::*;
use rvlab_core::nonlinearity::builders::ftilde_counterexample_switch;
use rvlab_core::nonlinearity::*;
use rvlab_core::numerics::logspace;

/// Adaptive Simpson, independent of the Gauss-Kronrod code under test.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
}

fn all_builder_outputs() -> Vec<(String, Expr)> {
    let mut out = Vec::new();
    let examples = [
        Example::PowerLog { p: 2.0, q: 1.0, k: 2.0 },
        Example::PowerLog { p: 5.0, q: 1.0, k: 1.0 },
        Example::PowerLog { p: 3.0, q: -2.0, k: 1.5 },
        Example::OscillatingExponent { p: 2.0, a: 0.5, n: 3 },
        Example::PowerSum { p: 2.0, q: 4.0, n: 3, case: Case::Elliptic },
        Example::PowerSwitch { p: 2.0, q: 4.0, n: 3, case: Case::Elliptic },
        Example::PiecewisePower { ell: 1.2, m: 1.5, p: 2.0, n: 3, case: Case::Elliptic, segments: 4 },
        Example::PowerBand { p: 2.0, c1: 1.0, c2: 3.0 },
        Example::Counterexample { n: 5, p: 2.0 },
        Example::FtildeCounterexample { m: 2.0, q: 9.0, n: 3 },
    ];
    for e in examples {
        out.push((format!("{e:?}"), build_example(&e).unwrap()));
    }
    for factor in SlowFactor::catalog() {
        for two_sided in [false, true] {
            let e = Example::SlowlyVarying { p: 2.0, factor, two_sided };
            out.push((format!("{e:?}"), build_example(&e).unwrap()));
        }
    }
    out
}

#[test]
fn builder_outputs_are_positive_on_log_grid() {
    for (name, f) in all_builder_outputs() {
        for s in logspace(1e-12, 1e12, 1000) {
            let v = f.eval(s).unwrap();
            assert!(v > 0.0 && v.is_finite(), "{name} at s={s:e}: {v}");
        }
    }
}

#[test]
fn log_and_direct_paths_agree() {
    for (name, f) in all_builder_outputs() {
        for s in logspace(1e-12, 1e12, 1000) {
            let direct = f.eval(s).unwrap();
            let via_log = f.ln_at(s).unwrap().exp();
            let rel = (direct - via_log).abs() / direct;
            assert!(rel < 1e-12, "{name} at s={s:e}: direct {direct:e}, log {via_log:e}, rel {rel:e}");
        }
    }
}

#[test]
fn evaluation_far_outside_f64_range() {
    let f = parse("pow(s,2)*log(2+s)").unwrap();
    // s = e^1000: ln f = 2000 + ln(1000 + ...).
    let ln_f = f.ln_eval(1000.0).unwrap();
    assert!((ln_f - (2000.0 + 1000f64.ln())).abs() < 1e-12);
    match f.eval(1e200) {
        Err(rvlab_core::Error::OutOfRange { log_value, .. }) => assert!(log_value > 900.0),
        other => panic!("expected out of range, got {other:?}"),
    }
    // Deep log-domain probes stay finite.
    let g = build_example(&Example::SlowlyVarying { p: 1.5, factor: SlowFactor::LogOverLogLog { k: 2.0 }, two_sided: true }).unwrap();
    assert!(g.ln_eval(1e12).unwrap().is_finite());
    assert!(g.ln_eval(-1e12).unwrap().is_finite());
}

#[test]
fn trivial_evaluations() {
    assert_eq!(Expr::power(2.0).eval(3.0).unwrap(), 9.0);
    assert_eq!(parse("pow(s,2)*log(2+s)").unwrap().eval(0.0).unwrap(), 0.0);
    let f = parse("pow(s,2+0.1*sin(log(log(3+s+1/s))))").unwrap();
    assert_eq!(f.eval(1.0).unwrap(), 1.0);
}

#[test]
fn tilde_f_of_power_law() {
    for p in [1.5, 2.0, 3.0, 5.0] {
        let f = Expr::power(p);
        for s in [1e-6, 0.3, 1.0, 2.0, 17.0, 1e4] {
            let got = tilde_f(&f, s, 1e-12).unwrap();
            let want = s.powf(p) / p;
            assert!((got - want).abs() <= 1e-11 * want, "p={p}, s={s}: {got} vs {want}");
        }
    }
}

#[test]
fn integrals_against_simpson_oracle() {
    let f = parse("pow(s,2)*log(2+s)").unwrap();
    let oracle_tilde = simpson(&|z: f64| z * (2.0 + z).ln(), 0.0, 1.0, 1e-15);
    let oracle_f = simpson(&|z: f64| z * z * (2.0 + z).ln(), 0.0, 1.0, 1e-15);
    let tilde = tilde_f(&f, 1.0, 1e-12).unwrap();
    let big_f = antiderivative_f(&f, 1.0, 1e-12).unwrap();
    assert!((tilde - oracle_tilde).abs() < 1e-12 * oracle_tilde, "{tilde} vs {oracle_tilde}");
    assert!((big_f - oracle_f).abs() < 1e-12 * oracle_f, "{big_f} vs {oracle_f}");
    assert!((antiderivative_f(&Expr::power(2.0), 1.0, 1e-13).unwrap() - 1.0 / 3.0).abs() < 1e-14);
    assert!((antiderivative_f(&Expr::power(3.0), 2.0, 1e-13).unwrap() - 4.0).abs() < 1e-13);
}

#[test]
fn ftilde_counterexample_integrals_and_switch() {
    let a = ftilde_counterexample_switch(2.0, 9.0, 3).unwrap();
    let expected = (1.75f64 / 5.25).powf(1.0 / 7.0);
    assert!((a - expected).abs() < 1e-15);
    assert!((a - (1.0f64 / 3.0).powf(1.0 / 7.0)).abs() < 1e-15);
    let (f, _) = ftilde_counterexample(2.0, 9.0, 3).unwrap();
    for s in [0.1, 0.5, 0.8, a] {
        let want = s * s / 2.0 + s.powi(9) / 9.0;
        let got = tilde_f(&f, s, 1e-13).unwrap();
        assert!((got - want).abs() < 1e-12 * want, "s={s}: {got} vs {want}");
    }
    // Beyond the switch: (1/m)(1 + a^{q-m}) s^m + (1/q - 1/m) a^q.
    let s = 3.0;
    let want = 0.5 * (1.0 + a.powi(7)) * s * s + (1.0 / 9.0 - 0.5) * a.powi(9);
    assert!((tilde_f(&f, s, 1e-13).unwrap() - want).abs() < 1e-11 * want);
}

#[test]
fn counterexample_residual_by_hand_derived_laplacian() {
    for (n, p) in [(5u32, 2.0f64), (3, 4.0), (4, 2.5), (7, 1.6)] {
        let (f, c) = counterexample(n, p).unwrap();
        let alpha = 1.0 / (p - 1.0);
        assert!((c.a - 2.0 * alpha * (n as f64 - 2.0 - 2.0 * alpha)).abs() < 1e-15);
        let mut worst: f64 = 0.0;
        for i in 0..=4000 {
            let r = 100.0 * i as f64 / 4000.0;
            let w = 1.0 + r * r;
            let v = w.powf(-alpha);
            let minus_lap =
                2.0 * alpha * (n as f64 - 2.0 - 2.0 * alpha) * w.powf(-alpha - 1.0) + 4.0 * alpha * (1.0 + alpha) * w.powf(-alpha - 2.0);
            let fv = f.eval(v).unwrap();
            worst = worst.max((minus_lap - fv).abs() / fv);
        }
        assert!(worst < 1e-10, "n={n}, p={p}: residual {worst:e}");
    }
    let (_, c) = counterexample(5, 2.0).unwrap();
    assert_eq!((c.a, c.b), (2.0, 8.0));
}

#[test]
fn piecewise_power_monotone_quotients() {
    for (ell, m, p, p_star, segs) in
        [(1.2, 1.5, 2.0, 3.0, 2usize), (1.2, 1.5, 2.0, 3.0, 6), (1.1, 1.3, 1.6, 5.0 / 3.0, 5), (1.05, 2.0, 3.0, 5.0, 4)]
    {
        let spec = build_piecewise_power(ell, m, p, p_star, segs).unwrap();
        let f = spec.to_expr().unwrap();
        let t_hi = spec.ln_breakpoints.last().unwrap() + 5.0;
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..10_000 {
            let t = -10.0 + (t_hi + 10.0) * i as f64 / 9_999.0;
            let ln_f = f.ln_eval(t).unwrap();
            let lo = ln_f - ell * t;
            let hi = ln_f - p_star * t;
            if let Some((plo, phi)) = prev {
                assert!(lo >= plo - 1e-12 * plo.abs().max(1.0), "s^-l f decreased at t={t}");
                assert!(hi <= phi + 1e-12 * phi.abs().max(1.0), "s^-p* f increased at t={t}");
            }
            prev = Some((lo, hi));
        }
        // Touches s^p at even breakpoints and s^m at odd ones.
        for (k, &lb) in spec.ln_breakpoints.iter().enumerate() {
            let target = if k % 2 == 0 { p } else { m } * lb;
            let got = f.ln_eval(lb).unwrap();
            assert!((got - target).abs() <= 1e-12 * target.abs().max(1.0), "k={k}: {got} vs {target}");
        }
    }
}

#[test]
fn slow_factor_examples_match_definitions() {
    let s: f64 = 7.5;
    let l = |f: SlowFactor| f.apply(Expr::var()).unwrap().eval(s).unwrap();
    assert!((l(SlowFactor::LogPower { a: 2.0, k: 2.0 }) - (2.0 + s).ln().powi(2)).abs() < 1e-14);
    assert!((l(SlowFactor::IteratedLog { m: 2, k: 3.0 }) - (3.0 + s).ln().ln()).abs() < 1e-14);
    let want = (s.ln() / (2.0 + s.ln().abs()).ln()).exp();
    assert!((l(SlowFactor::LogOverLogLog { k: 2.0 }) - want).abs() < 1e-13);
    let want = (3.0 + s).ln().powf((3.0 + s).ln().ln().sin());
    assert!((l(SlowFactor::OscillatingLog) - want).abs() < 1e-13);
    let y = s.ln().powf(0.25);
    assert!((l(SlowFactor::OscillatingStretchedExp { nu: 0.25 }) - (y * y.cos()).exp()).abs() < 1e-13);
    let want = 1.0 + 0.5 * (2.0 + s).ln().powf(0.5).sin();
    assert!((l(SlowFactor::SineOfLogPower { a: 0.5, nu: 0.5 }) - want).abs() < 1e-14);
}

// -- grammar round trip ------------------------------------------------------

fn finite_const() -> impl Strategy<Value = f64> {
    prop_oneof![(-1000i32..1000).prop_map(|k| k as f64 / 8.0), any::<f64>().prop_filter("finite", |x| x.is_finite()),]
}

fn expr_strategy() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![finite_const().prop_map(Expr::Const), Just(Expr::Var)];
    leaf.prop_recursive(6, 64, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| -a),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.pow(b)),
            inner.clone().prop_map(Expr::ln),
            inner.clone().prop_map(Expr::exp),
            inner.clone().prop_map(Expr::sin),
            inner.clone().prop_map(Expr::cos),
            inner.clone().prop_map(Expr::abs),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.min(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.max(b)),
            (inner.clone(), 1u32..4, 0.5f64..20.0).prop_map(|(a, m, extra)| {
                let k = rvlab_core::nonlinearity::expr::iterated_exp_zero(m) + extra;
                a.iterated_log(m, k).unwrap()
            }),
            (0.01f64..10.0, 0.5f64..4.0).prop_map(|(b, p)| { Expr::piecewise(vec![b], vec![Expr::power(p), Expr::power(p)]).unwrap() }),
            (proptest::collection::vec(0.1f64..3.0, 1..4), 1.0f64..4.0, -2.0f64..2.0).prop_map(|(gaps, p, lb)| {
                let mut ln_breaks = vec![lb];
                for g in &gaps {
                    ln_breaks.push(ln_breaks.last().unwrap() + g);
                }
                let exps = (0..=ln_breaks.len()).map(|i| p + 0.25 * i as f64).collect();
                Expr::PiecewisePower(PiecewisePower::from_exponents(ln_breaks, p * lb, exps).unwrap())
            }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn print_then_parse_is_identity(e in expr_strategy()) {
        let text = e.to_string();
        let back = parse(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert_eq!(back, e, "{}", text);
    }

    #[test]
    fn tilde_f_power_law_property(p in 1.1f64..6.0, ln_s in -20.0f64..20.0) {
        let s = ln_s.exp();
        let got = tilde_f(&Expr::power(p), s, 1e-12).unwrap();
        let want = s.powf(p) / p;
        prop_assert!((got - want).abs() <= 1e-11 * want);
    }

    #[test]
    fn exponent_table_orderings(n in 1u32..200) {
        for case in [Case::Elliptic, Case::Parabolic] {
            let e = critical_exponents(n, case).unwrap();
            prop_assert!(e.p_f < e.p_b);
            prop_assert!(e.p_sg <= e.p_s);
        }
    }
}
