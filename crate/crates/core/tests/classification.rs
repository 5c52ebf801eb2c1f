use proptest::prelude::*;
use rvlab_core::classification::*;
use rvlab_core::nonlinearity::*;
use rvlab_core::Case;

fn regular_index(r: &VariationReport) -> Option<f64> {
    match r.verdict {
        Verdict::Regular { index } => Some(index),
        _ => None,
    }
}

#[test]
fn catalog_indices_recovered_at_both_ends() {
    for p in [1.5, 2.0, 3.0] {
        for factor in SlowFactor::catalog() {
            let f = power_times_slow(p, factor, true).unwrap();
            for loc in [Location::Zero, Location::Infinity] {
                let r = estimate_rv_index(&f, &LambdaGrid::deep(loc), &default_grid()).unwrap();
                let idx = regular_index(&r).unwrap_or_else(|| panic!("{factor:?} p={p} {loc:?}: {:?}", r.verdict));
                assert!((idx - p).abs() < 0.05, "{factor:?} p={p} {loc:?}: {idx}");
            }
        }
    }
}

fn default_grid() -> Vec<f64> {
    rvlab_core::numerics::logspace(0.125, 8.0, 33)
}

#[test]
fn pure_power_index_is_exact() {
    let f = Expr::power(2.5);
    for loc in [Location::Zero, Location::Infinity] {
        let r = estimate_rv_index(&f, &LambdaGrid::standard(loc), &default_grid()).unwrap();
        assert!((regular_index(&r).unwrap() - 2.5).abs() < 1e-9);
        assert!(r.spread < 1e-9);
    }
}

#[test]
fn oscillating_exponent_is_controlled_but_not_regular() {
    let f = build_example(&Example::OscillatingExponent { p: 2.0, a: 0.3, n: 3 }).unwrap();
    for loc in [Location::Zero, Location::Infinity] {
        let r = classify_variation(&f, &LambdaGrid::deep(loc)).unwrap();
        assert_eq!(r.verdict, Verdict::ControlledOnly, "{loc:?}");
        assert!(r.witness.is_some());
    }
    let c = controlled_variation_inf(&f, 0.5, 2.0, None).unwrap();
    assert_eq!(c.verdict, Verdict::Pass);
    assert!(c.inf > 0.1);
}

#[test]
fn fast_growth_is_falsified() {
    let x = Expr::var();
    let f = (Expr::ln(x.clone()) * Expr::ln(x)).exp();
    let c = controlled_variation_inf(&f, 0.5, 2.0, None).unwrap();
    assert_eq!(c.verdict, Verdict::Falsified);
    assert!(c.witness.value < CONTROLLED_FLOOR);
    assert!(c.witness.ln_lambda.is_some());
    let r = classify_variation(&f, &LambdaGrid::standard(Location::Infinity)).unwrap();
    assert_eq!(r.verdict, Verdict::Falsified);
}

#[test]
fn monotone_quotient_power_log() {
    let x = Expr::var();
    let k2 = Expr::power(2.0) * Expr::pow_const(Expr::ln(Expr::constant(2.0) + x.clone()), 3.0);
    assert!(monotone_quotient_check(&k2, 4.99, None).unwrap().passed());
    let k1 = Expr::power(2.0) * Expr::pow_const(Expr::ln(Expr::constant(1.0) + x), 3.0);
    let r = monotone_quotient_check(&k1, 4.99, None).unwrap();
    assert_eq!(r.verdict, Verdict::Fail);
    let w = r.witness.unwrap();
    assert!(w.value > 0.0 && w.s.unwrap() < 1.0);
    assert!(monotone_quotient_check(&Expr::power(3.7), 3.7, None).unwrap().passed());
}

#[test]
fn piecewise_power_quotient_monotone_for_every_target() {
    let spec = build_piecewise_power(1.2, 1.5, 2.5, 3.0, 6).unwrap();
    let f = spec.to_expr().unwrap();
    assert!(monotone_quotient_check(&f, 3.0, None).unwrap().passed());
    assert!(!monotone_quotient_check(&f, 2.0, None).unwrap().passed());
}

#[test]
fn growth_bound_superlinear() {
    let f = power_times_slow(2.0, SlowFactor::LogPower { a: 2.0, k: 2.0 }, true).unwrap();
    let g = growth_bound(&f, None, None).unwrap();
    assert!(g.c > 0.0 && g.q > 1.0, "{g:?}");
    assert!(g.superlinear);
    let s = superlinearity_profile(&f, None, None).unwrap();
    assert_eq!(s.verdict, Verdict::Pass);
    assert!(s.profile.last().unwrap() > &SUPERLINEAR_THRESHOLD);

    let lin = Expr::var();
    assert_eq!(superlinearity_profile(&lin, None, None).unwrap().verdict, Verdict::Fail);
}

#[test]
fn almost_decreasing_for_power() {
    let r = almost_decreasing_inf(&Expr::power(2.0), 2.5).unwrap();
    assert!((r.inf - 1.0).abs() < 1e-9, "{}", r.inf);
    assert_eq!(r.verdict, Verdict::Pass);
    let r = almost_decreasing_inf(&Expr::power(2.0), 1.0).unwrap();
    assert!((r.inf - 1e-6).abs() < 1e-15, "{}", r.inf);
}

fn quick_search() -> LiouvilleSearch {
    LiouvilleSearch { m_points: 32, s_points: 256, p_points: 32, ..LiouvilleSearch::default() }
}

#[test]
fn linear_nonlinearity_fails_lower_bound() {
    let r = liouville_hypothesis_check(&Expr::var(), &quick_search()).unwrap();
    assert_eq!(r.condition("f_le_p_ftilde").unwrap().verdict, Verdict::Pass);
    assert_eq!(r.condition("lower_bound_by_ftilde").unwrap().verdict, Verdict::Fail);
    assert!(r.omega2.feasible.iter().all(|ok| !ok));
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(r.condition("lower_bound_by_ftilde").unwrap().witness.is_some());
}

#[test]
fn square_passes_with_explicit_constant() {
    let r = liouville_hypothesis_check(&Expr::power(2.0), &quick_search()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    // f = s^2, f~ = s^2/2: f / (s^m f~^{2m-1}) = 2^{2m-1} s^{4-5m}.
    for (i, &m) in r.omega1.m_values.iter().enumerate() {
        assert_eq!(r.omega1.feasible[i], m >= 0.8, "omega1 m={m}");
        assert_eq!(r.omega2.feasible[i], m <= 0.8, "omega2 m={m}");
        let c = 2f64.powf(2.0 * m - 1.0);
        if r.omega1.feasible[i] {
            assert!((r.omega1.c_values[i] / c - 1.0).abs() < 1e-8, "m={m}");
        }
        if r.omega2.feasible[i] {
            // infimum sits at the first sample to the right of s = 1
            let s1 = 1e6f64.powf(1.0 / 256.0);
            let want = c * s1.powf(4.0 - 5.0 * m);
            assert!((r.omega2.c_values[i] / want - 1.0).abs() < 1e-8, "m={m}");
        }
    }
    let (m1, m2, _) = r.best_pair.unwrap();
    assert!(m2 < 0.8 && 0.8 < m1);
}

#[test]
fn ftilde_counterexample_separates_conditions() {
    let (f, a) = ftilde_counterexample(2.0, 9.0, 3).unwrap();
    assert!((a - (1.0f64 / 3.0).powf(1.0 / 7.0)).abs() < 1e-12);
    let r = liouville_hypothesis_check(&f, &quick_search()).unwrap();
    let p_min = r.ftilde_p_min.expect("f <= p f~ for some sampled p");
    assert!(p_min < r.p_b);
    assert!(r.f_monotone_p.is_empty());
    let c = r.condition("f_over_s_p_nonincreasing").unwrap();
    assert_eq!(c.verdict, Verdict::Fail);
    let s = c.witness.as_ref().unwrap().s.unwrap();
    assert!(s < a * 1.01, "witness at {s}");
}

#[test]
fn power_log_clause_examples() {
    let e = Case::Elliptic;
    assert_eq!(power_log_clause(2.0, 1.0, 2.0, 3, e, DEFAULT_SMALL_Q).unwrap(), PowerLogClause::I);
    assert_eq!(power_log_clause(4.0, 1.0, 1.0, 3, e, DEFAULT_SMALL_Q).unwrap(), PowerLogClause::None);
    assert_eq!(power_log_clause(5.0, 1.0, 1.0, 3, e, DEFAULT_SMALL_Q).unwrap(), PowerLogClause::EntireSolutionRegime);
    assert_eq!(power_log_clause(4.0, 0.5, 1.0, 3, e, DEFAULT_SMALL_Q).unwrap(), PowerLogClause::Ii1);
    assert_eq!(power_log_clause(4.0, 1.0, 1.5, 3, e, DEFAULT_SMALL_Q).unwrap(), PowerLogClause::Ii2);
    // q = 2, p_c - p = 1: K must exceed e/2.
    let bound = std::f64::consts::E / 2.0;
    assert_eq!(power_log_clause(4.0, 2.0, bound + 0.01, 3, e, DEFAULT_SMALL_Q).unwrap(), PowerLogClause::Ii3);
    assert_eq!(power_log_clause(4.0, 2.0, bound - 0.01, 3, e, DEFAULT_SMALL_Q).unwrap(), PowerLogClause::None);
    assert_eq!(power_log_clause(2.0, 1.0, 1.0, 3, e, DEFAULT_SMALL_Q).unwrap(), PowerLogClause::None);
    assert!(power_log_clause(1.0, 1.0, 2.0, 3, e, DEFAULT_SMALL_Q).is_err());
    assert!(power_log_clause(2.0, 1.0, 0.5, 3, e, DEFAULT_SMALL_Q).is_err());
}

#[test]
fn power_log_clause_parabolic_small_q() {
    let ex = critical_exponents(3, Case::Parabolic).unwrap();
    let p = 0.5 * (ex.p_b.value() + ex.p_s.value());
    assert_eq!(power_log_clause(p, 0.05, 1.0, 3, Case::Parabolic, 0.1).unwrap(), PowerLogClause::Iii);
    assert_eq!(power_log_clause(p, 0.05, 1.0, 3, Case::Elliptic, 0.1).unwrap(), PowerLogClause::Ii1);
    assert_eq!(power_log_clause(p, 0.5, 1.0, 3, Case::Parabolic, 0.1).unwrap(), PowerLogClause::None);
}

#[test]
fn reports_serialize_with_grid_disclosure() {
    let r = estimate_rv_index(&Expr::power(2.0), &LambdaGrid::standard(Location::Infinity), &default_grid()).unwrap();
    let json = serde_json::to_value(r.to_report("s^2")).unwrap();
    for key in ["function", "check", "grid", "verdict", "params"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    assert!(json.get("witness").is_none());
    assert_eq!(json["verdict"]["kind"], "regular");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn regular_superlinear_functions_have_growth_bound(p in 1.2f64..4.0, a in -2.0f64..2.0) {
        let f = power_times_slow(p, SlowFactor::LogPower { a, k: 2.0 }, true).unwrap();
        let g = growth_bound(&f, None, None).unwrap();
        prop_assert!(g.c > 0.0 && g.q > 1.0);
        prop_assert_eq!(superlinearity_profile(&f, None, None).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn power_quotient_monotone_iff_m_ge_p(p in 1.1f64..6.0, dm in 0.01f64..1.0) {
        let f = Expr::power(p);
        let grid = rvlab_core::numerics::logspace(1e-3, 1e3, 200);
        prop_assert!(monotone_quotient_check(&f, p + dm, Some(&grid)).unwrap().passed());
        prop_assert!(!monotone_quotient_check(&f, p - dm, Some(&grid)).unwrap().passed());
    }

    #[test]
    fn clause_is_total(p in 1.01f64..8.0, q in -3.0f64..3.0, k in 1.0f64..4.0, n in 1u32..8) {
        for case in [Case::Elliptic, Case::Parabolic] {
            prop_assert!(power_log_clause(p, q, k, n, case, DEFAULT_SMALL_Q).is_ok());
        }
    }
}
