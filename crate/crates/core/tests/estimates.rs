use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rvlab_core::elliptic_radial::singular_steady_state;
use rvlab_core::estimates::*;
use rvlab_core::nonlinearity::{counterexample, parse};
use rvlab_core::parabolic_fd::{simulate, BoundaryCondition, Geometry, SimulationOptions, Termination};
use rvlab_core::{Error, Expr};

fn radial_set(id: &str, n: usize, radii: &[f64], u: impl Fn(f64) -> f64) -> SampleSet {
    SampleSet {
        id: id.into(),
        points: radii
            .iter()
            .map(|&r| {
                let mut x = vec![0.0; n];
                x[0] = r;
                x
            })
            .collect(),
        u: radii.iter().map(|&r| u(r)).collect(),
    }
}

#[test]
fn singular_steady_state_is_sharp() {
    let s = singular_steady_state(4.0, 3).unwrap();
    let model = DistanceModel::elliptic(Domain::Annulus { n: 3, r_in: 0.0, r_out: 1.0 }).unwrap();
    let f = Expr::power(4.0);
    let family: Vec<SampleSet> = (0..=40)
        .map(|i| {
            let r = 0.5 * 10f64.powf(-4.0 * f64::from(i) / 40.0);
            radial_set(&format!("r={r:e}"), 3, &[r], |r| s.eval(r))
        })
        .collect();
    let rep = interior_constant(&family, "singular", &f, &model, Variant::Homogeneous).unwrap();
    for m in &rep.members {
        let v = m.value.unwrap();
        assert!((v / (2.0 / 9.0) - 1.0).abs() < 1e-10, "{}: {v}", m.id);
    }
}

#[test]
fn constant_profile_peaks_at_incenter() {
    let model = DistanceModel::elliptic(Domain::Interval { a: 0.0, b: 1.0 }).unwrap();
    let xs: Vec<f64> = (1..100).map(|i| f64::from(i) / 100.0).collect();
    let set = SampleSet { id: "c".into(), points: xs.iter().map(|&x| vec![x]).collect(), u: vec![3.0; xs.len()] };
    let rep = interior_constant(&[set], "const", &Expr::power(2.0), &model, Variant::Homogeneous).unwrap();
    assert!((rep.sup - 0.75).abs() < 1e-14);
    assert_eq!(rep.argmax.point, vec![0.5]);
    assert_eq!(rep.argmax.index, 49);
}

#[test]
fn shifted_variant_restricts_to_large_values() {
    let model = DistanceModel::elliptic(Domain::Interval { a: 0.0, b: 1.0 }).unwrap();
    let set = SampleSet { id: "a".into(), points: vec![vec![0.25], vec![0.5]], u: vec![2.0, 0.5] };
    let rep = interior_constant(std::slice::from_ref(&set), "x", &Expr::power(2.0), &model, Variant::Shifted).unwrap();
    assert!((rep.sup - 2.0 / 17.0).abs() < 1e-15);
    let low = SampleSet { u: vec![0.5, 0.9], ..set };
    let err = interior_constant(&[low], "x", &Expr::power(2.0), &model, Variant::Shifted).unwrap_err();
    assert!(matches!(err, Error::NoAdmissiblePoints(_)));
}

#[test]
fn homogeneous_functional_is_scale_invariant() {
    let p = 3.0;
    let f = Expr::power(p);
    let u = |r: f64| 1.0 + r * r;
    let radii: Vec<f64> = (1..50).map(|i| f64::from(i) / 50.0).collect();
    let base = DistanceModel::elliptic(Domain::Ball { n: 2, radius: 1.0 }).unwrap();
    let r0 = interior_constant(&[radial_set("1", 2, &radii, u)], "s", &f, &base, Variant::Homogeneous).unwrap();
    for lambda in [0.1, 3.0, 1e3] {
        let model = DistanceModel::elliptic(base.domain.shrink(lambda)).unwrap();
        let scaled: Vec<f64> = radii.iter().map(|r| r / lambda).collect();
        let set = radial_set("l", 2, &scaled, |r| lambda.powf(2.0 / (p - 1.0)) * u(lambda * r));
        let rl = interior_constant(&[set], "s", &f, &model, Variant::Homogeneous).unwrap();
        assert!((rl.sup / r0.sup - 1.0).abs() < 1e-12, "λ = {lambda}");
        assert_eq!(rl.argmax.index, r0.argmax.index);
    }
}

#[test]
fn counterexample_breaks_the_interior_estimate() {
    let (f, _) = counterexample(5, 2.0).unwrap();
    let mut last = 0.0;
    for radius in [1.0, 10.0, 100.0, 1000.0] {
        let model = DistanceModel::elliptic(Domain::Ball { n: 5, radius }).unwrap();
        let radii: Vec<f64> = (0..200).map(|i| radius * f64::from(i) / 200.0).collect();
        let set = radial_set("v", 5, &radii, |r| 1.0 / (1.0 + r * r));
        let rep = interior_constant(&[set], "ball", &f, &model, Variant::Homogeneous).unwrap();
        assert!(rep.sup > 50.0 * last, "R = {radius}: {} vs {last}", rep.sup);
        last = rep.sup;
    }
}

#[test]
fn parabolic_snapshot_family_is_bounded() {
    let g = Geometry::Interval { a: 0.0, b: 1.0 };
    let f = Expr::power(2.0);
    let opts = SimulationOptions { intervals: 128, ..SimulationOptions::default() };
    let u0: Vec<f64> = g.nodes(128).iter().map(|x| 40.0 * (PI * x).sin()).collect();
    let tr = simulate(&f, g, BoundaryCondition::Dirichlet0, &u0, &opts).unwrap();
    let t_hat = tr.blowup.as_ref().unwrap().t_hat;
    let model = DistanceModel::parabolic(Domain::Interval { a: 0.0, b: 1.0 }, 0.0, t_hat).unwrap();
    let family = snapshot_family(&tr, t_hat);
    assert!(family.len() > 10);
    let rep = interior_constant(&family, "dirichlet", &f, &model, Variant::Homogeneous).unwrap();
    assert!(rep.sup.is_finite() && rep.sup > 0.1 && rep.sup < 10.0, "{}", rep.sup);
    assert!(rep.members.iter().all(|m| m.value.unwrap() <= rep.sup));
}

#[test]
fn flat_run_temporal_constant_is_at_most_one() {
    let g = Geometry::Interval { a: 0.0, b: 1.0 };
    let f = Expr::power(2.0);
    let opts = SimulationOptions { intervals: 16, ..SimulationOptions::default() };
    let tr = simulate(&f, g, BoundaryCondition::Neumann0, &[1.0; 17], &opts).unwrap();
    let t_hat = tr.blowup.as_ref().unwrap().t_hat;
    let rep = temporal_constant(&tr, &f, t_hat).unwrap();
    assert!(rep.sup <= 1.0 + 1e-3 && rep.sup > 0.9, "{}", rep.sup);
}

#[test]
fn decayed_run_covers_early_window_only() {
    let g = Geometry::Interval { a: 0.0, b: 1.0 };
    let f = Expr::power(2.0);
    let opts = SimulationOptions { intervals: 32, horizon: 2.0, ..SimulationOptions::default() };
    let u0: Vec<f64> = g.nodes(32).iter().map(|x| 2.0 * (PI * x).sin()).collect();
    let tr = simulate(&f, g, BoundaryCondition::Dirichlet0, &u0, &opts).unwrap();
    assert_ne!(tr.termination, Termination::BlowUp);
    let rep = temporal_constant(&tr, &f, 2.0 * tr.final_time()).unwrap();
    let first_empty = rep.members.iter().position(|m| m.value.is_none()).expect("u < 1 eventually");
    assert!(first_empty > 0);
    assert!(rep.members[first_empty..].iter().all(|m| m.value.is_none()));
}

#[test]
fn dirichlet_log_family_temporal_sup_is_stable() {
    let g = Geometry::Interval { a: 0.0, b: 1.0 };
    let f = parse("s^2*log(2+s)").unwrap();
    let run = |intervals: usize| {
        let opts = SimulationOptions { intervals, ..SimulationOptions::default() };
        let u0: Vec<f64> = g.nodes(intervals).iter().map(|x| 50.0 * (PI * x).sin()).collect();
        let tr = simulate(&f, g, BoundaryCondition::Dirichlet0, &u0, &opts).unwrap();
        temporal_constant(&tr, &f, tr.blowup.as_ref().unwrap().t_hat).unwrap().sup
    };
    let (a, b) = (run(32), run(64));
    assert!(a.is_finite() && (a / b - 1.0).abs() < 0.05, "{a} {b}");
}

#[test]
fn distance_models() {
    let e = DistanceModel::elliptic(Domain::Box { lo: vec![0.0, 0.0], hi: vec![2.0, 1.0] }).unwrap();
    assert_eq!(e.distance(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
    assert_eq!(e.boundary_distance(&[1.0, 0.25]), 0.25);
    let p = DistanceModel::parabolic(Domain::Interval { a: 0.0, b: 1.0 }, 0.0, 1.0).unwrap();
    assert_eq!(p.distance(&[0.0, 0.0], &[0.5, 0.25]), 1.0);
    assert_eq!(p.boundary_distance(&[0.5, 0.01]), 0.1);
    assert_eq!(p.boundary_distance(&[0.3, 0.5]), 0.3);
    let set = SampleSet { id: "edge".into(), points: vec![vec![1.0, 0.5]], u: vec![1.0] };
    assert!(matches!(interior_constant(&[set], "x", &Expr::power(2.0), &p, Variant::Homogeneous), Err(Error::Precondition(_))));
}

#[test]
fn gs_coefficient_arithmetic() {
    assert_eq!(gs_coefficients(1, 0.0, -2.0), (2.0, -6.0, 0.0));
    let (a, b, c) = gs_coefficients(3, 1.0, 1.0);
    assert!((a + 2.0 / 3.0).abs() < 1e-15 && (b - 5.0 / 3.0 + 1.5).abs() < 1e-15 && (c + 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn gs_constant_v_is_exact_equality() {
    for n in [1, 2] {
        let grid = CubeGrid::new(n, -1.0, 1.0, 64).unwrap();
        let c = gs_inequality_check(&vec![1.0; grid.len()], &grid.sample(bump(&[0.0, 0.0], 0.8)), 0.7, 0.3, &grid).unwrap();
        assert_eq!((c.i_q, c.j_q, c.k_q, c.rhs, c.slack), (0.0, 0.0, 0.0, 0.0, 0.0));
    }
}

fn simpson(g: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let inner: f64 = (1..m).map(|i| g(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (g(a) + g(b) + inner) * h / 3.0
}

#[test]
fn gs_terms_match_analytic_quadrature_in_1d() {
    // v = 2 + sin(πx), φ = (1 - (x/ρ)²)⁴ on |x| < ρ; all derivatives by hand
    let (q, k, rho) = (1.5, 0.4, 0.8);
    let v = |x: f64| 2.0 + (PI * x).sin();
    let dv = |x: f64| PI * (PI * x).cos();
    let d2v = |x: f64| -PI * PI * (PI * x).sin();
    let phi = |x: f64| if x.abs() < rho { (1.0 - (x / rho).powi(2)).powi(4) } else { 0.0 };
    let dphi = |x: f64| if x.abs() < rho { -8.0 * x / (rho * rho) * (1.0 - (x / rho).powi(2)).powi(3) } else { 0.0 };
    let d2phi = |x: f64| {
        if x.abs() < rho {
            let w = 1.0 - (x / rho).powi(2);
            -8.0 / (rho * rho) * w.powi(3) + 48.0 * x * x / rho.powi(4) * w.powi(2)
        } else {
            0.0
        }
    };
    let i_q = simpson(|x| phi(x) * v(x).powf(q - 2.0) * dv(x).powi(4), -rho, rho, 4000);
    let j_q = simpson(|x| phi(x) * v(x).powf(q - 1.0) * dv(x).powi(2) * d2v(x), -rho, rho, 4000);
    let k_q = simpson(|x| phi(x) * v(x).powf(q) * d2v(x).powi(2), -rho, rho, 4000);
    let rhs = simpson(
        |x| {
            let g2 = dv(x).powi(2);
            0.5 * v(x).powf(q) * g2 * d2phi(x) + v(x).powf(q) * (d2v(x) + (q - k) / v(x) * g2) * dv(x) * dphi(x)
        },
        -rho,
        rho,
        4000,
    );
    let grid = CubeGrid::new(1, -1.0, 1.0, 2048).unwrap();
    let c = gs_inequality_check(&grid.sample(|x| v(x[0])), &grid.sample(|x| phi(x[0])), q, k, &grid).unwrap();
    for (got, want) in [(c.i_q, i_q), (c.j_q, j_q), (c.k_q, k_q), (c.rhs, rhs)] {
        assert!((got - want).abs() < 1e-4 * (1.0 + want.abs()), "{got} vs {want}");
    }
}

fn random_case(rng: &mut ChaCha8Rng) -> (u32, f64, f64, [f64; 4]) {
    let n = rng.gen_range(1..=2);
    let q = rng.gen_range(-2.0..3.0);
    let mut k: f64 = rng.gen_range(-3.0..3.0);
    if (k + 1.0).abs() < 0.1 {
        k += 0.5;
    }
    let coeffs = [rng.gen_range(0.2..1.0), rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), rng.gen_range(-0.3..0.3)];
    (n, q, k, coeffs)
}

#[test]
fn gs_random_cases_converge() {
    let mut rng = ChaCha8Rng::seed_from_u64(83);
    for case in 0..20 {
        let (n, q, k, [a, w1, w2, c]) = random_case(&mut rng);
        let v = move |x: &[f64]| 2.0 + a * (PI * w1 * x[0]).sin() * x.get(1).map_or(1.0, |y| (PI * w2 * y).cos());
        let center = [c, -c];
        let grid = CubeGrid::new(n, -1.0, 1.0, 256).unwrap();
        let r = gs_refinement(v, bump(&center[..n as usize], 0.6), q, k, &grid).unwrap();
        assert!(r.pass(), "case {case}: n={n} q={q} k={k} {r:?}");
        assert!(r.extrapolated >= -1e-6 * (1.0 + r.fine.rhs.abs()), "case {case}: {}", r.extrapolated);
    }
}

#[test]
fn gs_rejects_bad_input() {
    let grid = CubeGrid::new(1, -1.0, 1.0, 64).unwrap();
    let v = vec![1.0; grid.len()];
    let wide = grid.sample(bump(&[0.0], 1.5));
    assert!(matches!(gs_inequality_check(&v, &wide, 0.0, 0.0, &grid), Err(Error::Precondition(_))));
    let phi = grid.sample(bump(&[0.0], 0.5));
    assert!(gs_inequality_check(&v, &phi, 0.0, -1.0, &grid).is_err());
    let neg = vec![-1.0; grid.len()];
    assert!(matches!(gs_inequality_check(&neg, &phi, 0.0, 0.0, &grid), Err(Error::Precondition(_))));
    assert!(CubeGrid::new(3, -1.0, 1.0, 64).is_err());
}

proptest! {
    #[test]
    fn distance_triangle_inequality(
        pts in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 3),
        parabolic in any::<bool>(),
    ) {
        let domain = Domain::Box { lo: vec![-10.0, -10.0], hi: vec![10.0, 10.0] };
        let m = if parabolic {
            DistanceModel::parabolic(domain, -10.0, 10.0).unwrap()
        } else {
            DistanceModel::elliptic(domain).unwrap()
        };
        let (a, b, c) = (&pts[0], &pts[1], &pts[2]);
        prop_assert!(m.distance(a, c) <= m.distance(a, b) + m.distance(b, c) + 1e-12);
        prop_assert_eq!(m.distance(a, b), m.distance(b, a));
        if parabolic {
            let time = (a[2] - b[2]).abs().sqrt();
            let space = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            prop_assert_eq!(m.distance(a, b), space + time);
        }
    }

    #[test]
    fn sup_dominates_members(us in prop::collection::vec(prop::collection::vec(0.01f64..100.0, 1..8), 1..6)) {
        let model = DistanceModel::elliptic(Domain::Interval { a: 0.0, b: 1.0 }).unwrap();
        let family: Vec<SampleSet> = us.iter().enumerate().map(|(i, u)| SampleSet {
            id: i.to_string(),
            points: (0..u.len()).map(|j| vec![(j as f64 + 1.0) / (u.len() as f64 + 1.0)]).collect(),
            u: u.clone(),
        }).collect();
        let rep = interior_constant(&family, "p", &Expr::power(1.5), &model, Variant::Homogeneous).unwrap();
        prop_assert!(rep.members.iter().all(|m| m.value.unwrap() <= rep.sup));
        let member = family.iter().find(|s| s.id == rep.argmax.member).unwrap();
        prop_assert_eq!(&member.points[rep.argmax.index], &rep.argmax.point);
    }
}
