//! Subcommand bodies.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};

use rvlab_core::classification::{
    almost_decreasing_inf, classify_variation, controlled_variation_inf, growth_bound, liouville_hypothesis_check, monotone_quotient_check,
    superlinearity_profile, ClassificationReport, LambdaGrid, LiouvilleSearch, Location, Verdict,
};
use rvlab_core::doubling::{doubling_select, FiniteMetricSpace, MFunction};
use rvlab_core::elliptic_radial::{
    entire_solution_search, shoot, singular_steady_state, SearchEntry, SearchSummary, ShootOptions, ShootOutcome,
};
use rvlab_core::estimates::{
    bump, gs_refinement, interior_constant, snapshot_family, temporal_constant, CubeGrid, DistanceModel, Domain, SampleSet, Variant,
};
use rvlab_core::nonlinearity::{parse, parse_with_params};
use rvlab_core::numerics::bisect_predicate;
use rvlab_core::ode_blowup::{blowup_time, tail_probe, verify_rate, RateWindow};
use rvlab_core::parabolic_fd::{rate_report, simulate as run_simulation, BoundaryCondition, Geometry, SimulationOptions, Trajectory};
use rvlab_core::{Error, Expr};

use crate::artifacts::Artifacts;
use crate::config::ExperimentConfig;
use crate::svg::{text_panel, Plot};
use crate::CliError;

pub struct Outcome {
    pub summary: String,
    pub files: Vec<PathBuf>,
}

/// Runs `cfg` and writes its artifacts into `out`.
pub fn execute(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, CliError> {
    let mut art = Artifacts::create(out, cfg)?;
    let summary = match cfg.subcommand.as_str() {
        "classify" => classify(cfg, &mut art)?,
        "blowup" => blowup(cfg, &mut art)?,
        "shoot" => shoot_cmd(cfg, &mut art)?,
        "simulate" => simulate(cfg, &mut art)?,
        "verify-estimate" => verify_estimate(cfg, &mut art)?,
        "doubling-demo" => doubling_demo(cfg, &mut art)?,
        "sweep" => sweep(cfg, &mut art)?,
        "report" => report(cfg, &mut art)?,
        other => return Err(CliError::Config(format!("unknown subcommand '{other}'"))),
    };
    let files = art.finish()?;
    Ok(Outcome { summary, files })
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn verdict_label(v: &Verdict) -> String {
    match v {
        Verdict::Regular { index } => format!("regular({index:.3})"),
        Verdict::ControlledOnly => "controlled-only".into(),
        Verdict::Falsified => "falsified".into(),
        Verdict::Inconclusive => "inconclusive".into(),
        Verdict::Pass => "pass".into(),
        Verdict::Fail => "fail".into(),
    }
}

fn classify(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<String, CliError> {
    let name = cfg.str("f");
    let f = parse(name)?;
    let check = cfg.str("check");
    let (verdict, report, summary): (Verdict, Json, Vec<ClassificationReport>) = match check {
        "variation" => {
            let loc: Location = cfg.str("at").parse()?;
            let grid = match cfg.str("lambda_grid") {
                "deep" => LambdaGrid::deep(loc),
                "standard" => LambdaGrid::standard(loc),
                g => return Err(config_err(format!("unknown lambda_grid '{g}' (deep|standard)"))),
            };
            let r = classify_variation(&f, &grid)?;
            (r.verdict.clone(), json!(r), vec![r.to_report(name)])
        }
        "controlled" => {
            let r = controlled_variation_inf(&f, cfg.f64("s_lo"), cfg.f64("s_hi"), None)?;
            (r.verdict.clone(), json!(r), vec![r.to_report(name)])
        }
        "almost_decreasing" => {
            let r = almost_decreasing_inf(&f, cfg.f64("shift"))?;
            (r.verdict.clone(), json!(r), vec![r.to_report(name)])
        }
        "superlinear" => {
            let r = superlinearity_profile(&f, None, None)?;
            (r.verdict.clone(), json!(r), vec![r.to_report(name)])
        }
        "growth" => {
            let r = growth_bound(&f, None, None)?;
            let v = if r.superlinear { Verdict::Pass } else { Verdict::Fail };
            (v, json!(r), vec![])
        }
        "monotone" => {
            let r = monotone_quotient_check(&f, cfg.f64("m"), None)?;
            (r.verdict.clone(), json!(r), vec![r.to_report(name)])
        }
        "hypotheses" => {
            let search = LiouvilleSearch { n: cfg.dim("n")?, ..LiouvilleSearch::default() };
            let r = liouville_hypothesis_check(&f, &search)?;
            (r.verdict.clone(), json!(r), r.to_reports(name))
        }
        c => return Err(config_err(format!("unknown check '{c}'"))),
    };
    let label = verdict_label(&verdict);
    art.json("classify.json", &json!({ "check": check, "verdict": label, "report": report, "summary": summary }))?;
    Ok(format!("{check}: {label}"))
}

fn blowup(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<String, CliError> {
    let f = parse(cfg.str("f"))?;
    let y0 = cfg.f64("y0");
    let tail = tail_probe(&f)?;
    let t = blowup_time(&f, y0, 1e-13)?;
    let rep = verify_rate(&f, y0, RateWindow::Remaining { hi: cfg.f64("tau_hi") * t, lo: cfg.f64("tau_lo") * t })?;
    let p = &rep.profile;
    art.csv("profile.csv", &["t", "t_minus_t", "y", "rho"], (0..p.len()).map(|i| vec![p.t[i], p.t_minus_t[i], p.y[i], p.rho[i]]))?;
    art.json(
        "blowup.json",
        &json!({
            "t_blowup": t,
            "tail_slope": tail,
            "rho_min": rep.rho_min,
            "rho_max": rep.rho_max,
            "pass": rep.pass,
            "points": p.len(),
        }),
    )?;
    let plot =
        Plot::new("rho = (f(y)/y)(T - t)", "T - t", "rho").log_x().series("rho", p.t_minus_t.iter().copied().zip(p.rho.iter().copied()));
    art.svg("rate.svg", &plot.render())?;
    Ok(format!("T = {t:.15e}, rho in [{:.10}, {:.10}]", rep.rho_min, rep.rho_max))
}

fn outcome_label(o: &ShootOutcome) -> String {
    match o {
        ShootOutcome::CrossesZero { radius } => format!("crosses zero at r = {radius:.6e}"),
        ShootOutcome::PositiveGlobal { r_max, decay_exponent } => {
            format!("positive up to r = {r_max:e} (decay exponent {decay_exponent:.3})")
        }
        ShootOutcome::Inconclusive { reason } => format!("inconclusive: {reason}"),
    }
}

fn thin<T: Clone>(v: &[T], keep: usize) -> Vec<T> {
    if keep == 0 || v.len() <= keep {
        return v.to_vec();
    }
    let mut idx: Vec<usize> = (0..keep).map(|i| i * (v.len() - 1) / (keep - 1)).collect();
    idx.dedup();
    idx.into_iter().map(|i| v[i].clone()).collect()
}

fn shoot_cmd(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<String, CliError> {
    let f = parse(cfg.str("f"))?;
    let n = cfg.dim("n")?;
    let opts = ShootOptions { r_max: cfg.f64("r_max"), tol: cfg.f64("tol"), ..ShootOptions::default() };
    let v0s = cfg.floats("v0");
    if v0s.is_empty() {
        return Err(config_err("v0 must list at least one value"));
    }
    let keep = cfg.count("trace_points")?;
    let mut runs = Vec::new();
    let mut entries = Vec::new();
    let mut plot = Plot::new("radial profiles", "r", "v").log_x();
    for (i, &v0) in v0s.iter().enumerate() {
        let r = shoot(&f, n, v0, &opts)?;
        let samples = thin(&r.samples, keep);
        art.csv(&format!("trace_{i}.csv"), &["r", "v", "dv"], samples.iter().map(|s| vec![s.r, s.v, s.dv]))?;
        plot = plot.series(&format!("v0 = {v0}"), samples.iter().filter(|s| s.r > 0.0).map(|s| (s.r, s.v)));
        runs.push(json!({ "v0": v0, "outcome": r.outcome, "diagnostics": r.diagnostics, "trace": format!("trace_{i}.csv") }));
        entries.push(SearchEntry { v0, outcome: r.outcome });
    }
    let existence_corroborated = entries.iter().any(|e| matches!(e.outcome, ShootOutcome::PositiveGlobal { .. }));
    let lines: Vec<String> = entries.iter().map(|e| format!("v0 = {}: {}", e.v0, outcome_label(&e.outcome))).collect();
    let summary = SearchSummary { n, r_max: opts.r_max, entries, existence_corroborated };
    art.json("shoot.json", &json!({ "existence_corroborated": existence_corroborated, "summary": summary, "runs": runs }))?;
    art.svg("profiles.svg", &plot.render())?;
    Ok(lines.join("\n"))
}

fn initial_profile(geometry: Geometry, kind: &str, amp: f64, intervals: usize) -> Result<Vec<f64>, CliError> {
    let nodes = geometry.nodes(intervals);
    let value = |x: f64| -> Result<f64, CliError> {
        Ok(match (geometry, kind) {
            (_, "flat") => amp,
            (Geometry::Interval { a, b }, "sine") => amp * (PI * (x - a) / (b - a)).sin(),
            (Geometry::Ball { radius, .. }, "sine") => amp * (0.5 * PI * x / radius).cos(),
            (Geometry::Interval { a, b }, "parabola") => 4.0 * amp * (x - a) * (b - x) / ((b - a) * (b - a)),
            (Geometry::Ball { radius, .. }, "parabola") => amp * (1.0 - (x / radius).powi(2)),
            _ => return Err(config_err(format!("unknown u0 profile '{kind}' (flat|sine|parabola)"))),
        }
        .max(0.0))
    };
    nodes.into_iter().map(value).collect()
}

/// Keeps history points where `M` grew by 1% or `t` advanced by
/// `horizon/2000` since the last kept point.
fn thin_history(tr: &mut Trajectory, horizon: f64) {
    let (t, m) = (std::mem::take(&mut tr.history_t), std::mem::take(&mut tr.history_m));
    let last = t.len() - 1;
    let (mut kt, mut km) = (t[0], m[0]);
    for i in 0..=last {
        if i == 0 || i == last || m[i] >= 1.01 * km || m[i] <= km / 1.01 || t[i] - kt >= horizon / 2000.0 {
            tr.history_t.push(t[i]);
            tr.history_m.push(m[i]);
            kt = t[i];
            km = m[i];
        }
    }
}

fn simulate(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<String, CliError> {
    let f = parse(cfg.str("f"))?;
    let geometry = match cfg.str("geometry") {
        "interval" => Geometry::Interval { a: cfg.f64("a"), b: cfg.f64("b") },
        "ball" => Geometry::Ball { n: cfg.dim("n")?, radius: cfg.f64("radius") },
        g => return Err(config_err(format!("unknown geometry '{g}' (interval|ball)"))),
    };
    let bc = match cfg.str("bc") {
        "dirichlet" => BoundaryCondition::Dirichlet0,
        "neumann" => BoundaryCondition::Neumann0,
        b => return Err(config_err(format!("unknown bc '{b}' (dirichlet|neumann)"))),
    };
    let intervals = cfg.count("intervals")?;
    let opts = SimulationOptions {
        intervals,
        safety: cfg.f64("safety"),
        reaction_safety: cfg.f64("reaction_safety"),
        cap: cfg.f64("cap"),
        horizon: cfg.f64("horizon"),
        decay_floor: cfg.f64("decay_floor"),
        snapshot_growth: cfg.f64("snapshot_growth"),
        snapshot_dt: cfg.f64("snapshot_dt"),
        ..SimulationOptions::default()
    };
    let u0 = initial_profile(geometry, cfg.str("u0"), cfg.f64("amplitude"), intervals.max(1))?;
    let mut tr = run_simulation(&f, geometry, bc, &u0, &opts)?;
    let rate = match &tr.blowup {
        Some(est) => Some(rate_report(&tr, &f, est)?),
        None => None,
    };
    thin_history(&mut tr, opts.horizon);
    let mut rows = Vec::new();
    for (k, s) in tr.snapshots.iter().enumerate() {
        for (x, u) in tr.grid.iter().zip(&s.u) {
            rows.push(vec![k as f64, s.t, *x, *u]);
        }
    }
    art.csv("snapshots.csv", &["snapshot", "t", "x", "u"], rows)?;
    art.csv("history.csv", &["t", "max_u"], tr.history_t.iter().zip(&tr.history_m).map(|(t, m)| vec![*t, *m]))?;
    let max_plot = Plot::new("max u", "t", "max u").log_y().series("M(t)", tr.history_t.iter().copied().zip(tr.history_m.iter().copied()));
    art.svg("max.svg", &max_plot.render())?;
    if let Some(r) = &rate {
        art.csv(
            "rate.csv",
            &["t", "t_minus_t", "max_u", "rho"],
            (0..r.t.len()).map(|i| vec![r.t[i], r.t_minus_t[i], r.max_u[i], r.rho[i]]),
        )?;
        let p = Plot::new("rho = (f(M)/M)(T - t)", "T - t", "rho")
            .log_x()
            .series("rho", r.t_minus_t.iter().copied().zip(r.rho.iter().copied()));
        art.svg("rate.svg", &p.render())?;
    }
    let (t_hat, unc) = tr.blowup.as_ref().map_or((None, None), |b| (Some(b.t_hat), Some(b.uncertainty)));
    art.json(
        "trajectory.json",
        &json!({
            "termination": tr.termination,
            "t_hat": t_hat,
            "uncertainty": unc,
            "final_time": tr.final_time(),
            "final_max": tr.final_max(),
            "steps": tr.steps,
            "rate": rate,
            "trajectory": tr,
        }),
    )?;
    Ok(match (t_hat, unc) {
        (Some(t), Some(u)) => format!("{:?}: T̂ = {t:.8} ± {u:.2e}", tr.termination),
        _ => format!("{:?} at t = {}", tr.termination, tr.final_time()),
    })
}

fn load_trajectory(cfg: &ExperimentConfig) -> Result<(Trajectory, Expr), CliError> {
    let path = cfg.str("input");
    if path.is_empty() {
        return Err(config_err("'input' must name a trajectory.json written by simulate"));
    }
    let text = fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {path}: {e}")))?;
    let doc: Json = serde_json::from_str(&text).map_err(|e| config_err(format!("{path} is not JSON: {e}")))?;
    let tr: Trajectory =
        serde_json::from_value(doc["result"]["trajectory"].clone()).map_err(|e| config_err(format!("{path} holds no trajectory: {e}")))?;
    let f_src = match cfg.str("f") {
        "" => doc["config"]["f"].as_str().ok_or_else(|| config_err(format!("{path} records no nonlinearity")))?.to_string(),
        s => s.to_string(),
    };
    Ok((tr, parse(&f_src)?))
}

fn spatial_domain(g: Geometry) -> Domain {
    match g {
        Geometry::Interval { a, b } => Domain::Interval { a, b },
        Geometry::Ball { n, radius } => Domain::Ball { n, radius },
    }
}

fn v_gs(x: &[f64]) -> f64 {
    2.0 + (PI * x[0]).sin() * x.get(1).map_or(1.0, |y| (PI * y).cos())
}

fn verify_estimate(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<String, CliError> {
    match cfg.str("functional") {
        "singular" => {
            let (p, n) = (cfg.f64("p"), cfg.dim("n")?);
            let s = singular_steady_state(p, n)?;
            let count = cfg.count("radii")?.max(2);
            let family: Vec<SampleSet> = (0..count)
                .map(|i| {
                    let r = 0.5 * 10f64.powf(-4.0 * i as f64 / (count - 1) as f64);
                    let mut x = vec![0.0; n as usize];
                    x[0] = r;
                    SampleSet { id: format!("r={r:e}"), points: vec![x], u: vec![s.eval(r)] }
                })
                .collect();
            let model = DistanceModel::elliptic(Domain::Annulus { n, r_in: 0.0, r_out: 1.0 })?;
            let rep = interior_constant(&family, "singular_steady_state", &Expr::power(p), &model, Variant::Homogeneous)?;
            let expected = s.beta * (f64::from(n) - 2.0 - s.beta);
            let dev = rep.members.iter().filter_map(|m| m.value).map(|v| (v / expected - 1.0).abs()).fold(0.0, f64::max);
            art.json(
                "estimate.json",
                &json!({ "functional": rep.functional, "sup": rep.sup, "expected": expected, "max_rel_deviation": dev, "report": rep }),
            )?;
            Ok(format!("sup = {:.15}, expected {expected:.15}, max rel. deviation {dev:.2e}", rep.sup))
        }
        "temporal" => {
            let (tr, f) = load_trajectory(cfg)?;
            let t_hat = tr.blowup.as_ref().ok_or_else(|| Error::NotBlowup("input trajectory did not blow up".into()))?.t_hat;
            let rep = temporal_constant(&tr, &f, t_hat)?;
            art.json("estimate.json", &json!({ "functional": rep.functional, "sup": rep.sup, "t_hat": t_hat, "report": rep }))?;
            Ok(format!("temporal sup = {:.6}", rep.sup))
        }
        "interior" => {
            let (tr, f) = load_trajectory(cfg)?;
            let t_hat = tr.blowup.as_ref().ok_or_else(|| Error::NotBlowup("input trajectory did not blow up".into()))?.t_hat;
            let model = DistanceModel::parabolic(spatial_domain(tr.geometry), 0.0, t_hat)?;
            let rep = interior_constant(&snapshot_family(&tr, t_hat), "snapshots", &f, &model, Variant::Homogeneous)?;
            art.json("estimate.json", &json!({ "functional": rep.functional, "sup": rep.sup, "t_hat": t_hat, "report": rep }))?;
            Ok(format!("interior sup = {:.6}", rep.sup))
        }
        "gs" => {
            let n = cfg.dim("n")?;
            let grid = CubeGrid::new(n, -1.0, 1.0, cfg.count("intervals")?)?;
            let cases = cfg.count("cases")?;
            let mut results = Vec::new();
            if cases == 0 {
                let center = [0.0, 0.0];
                results.push(gs_refinement(v_gs, bump(&center[..n as usize], 0.8), cfg.f64("q"), cfg.f64("k"), &grid)?);
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.int("seed") as u64);
                for _ in 0..cases {
                    let q = rng.gen_range(-2.0..3.0);
                    let mut k: f64 = rng.gen_range(-3.0..3.0);
                    if (k + 1.0).abs() < 0.1 {
                        k += 0.5;
                    }
                    let (a, w1, w2): (f64, f64, f64) = (rng.gen_range(0.2..1.0), rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
                    let c: f64 = rng.gen_range(-0.3..0.3);
                    let v = move |x: &[f64]| 2.0 + a * (PI * w1 * x[0]).sin() * x.get(1).map_or(1.0, |y| (PI * w2 * y).cos());
                    let center = [c, -c];
                    results.push(gs_refinement(v, bump(&center[..n as usize], 0.6), q, k, &grid)?);
                }
            }
            let passed = results.iter().filter(|r| r.pass()).count();
            let min_slack = results.iter().map(|r| r.coarse.slack).fold(f64::INFINITY, f64::min);
            art.json("estimate.json", &json!({ "functional": "gs_inequality", "passed": passed, "cases": results.len(), "min_slack": min_slack, "results": results }))?;
            Ok(format!("integral inequality: {passed}/{} within budget and improving", results.len()))
        }
        other => Err(config_err(format!("unknown functional '{other}' (temporal|interior|singular|gs)"))),
    }
}

fn read_matrix(path: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {path}: {e}")))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .enumerate()
        .map(|(i, l)| {
            l.split(',')
                .map(|c| c.trim().parse::<f64>().map_err(|_| config_err(format!("{path}: row {i}: '{c}' is not a number"))))
                .collect()
        })
        .collect()
}

fn as_indices(v: &[f64], what: &str) -> Result<Vec<usize>, CliError> {
    v.iter()
        .map(|&x| if x >= 0.0 && x.fract() == 0.0 { Ok(x as usize) } else { Err(config_err(format!("{what}: {x} is not an index"))) })
        .collect()
}

fn doubling_demo(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<String, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.int("seed") as u64);
    let mut peak = None;
    let dist = match cfg.str("matrix") {
        "" => {
            let n = cfg.count("points")?;
            if n < 2 {
                return Err(config_err("points must be at least 2"));
            }
            let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
            let c: (f64, f64) = (rng.gen(), rng.gen());
            peak = Some(pts.iter().map(|p| 1.0 / (1e-3 + (p.0 - c.0).powi(2) + (p.1 - c.1).powi(2))).collect::<Vec<f64>>());
            pts.iter().map(|a| pts.iter().map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()).collect()).collect()
        }
        path => read_matrix(path)?,
    };
    let n = dist.len();
    let d_set = match cfg.floats("d_set") {
        [] => (0..n).collect(),
        v => as_indices(v, "d_set")?,
    };
    let space = FiniteMetricSpace::new(dist, &d_set)?;
    let m_values: Vec<f64> = match cfg.floats("m_values") {
        [] => match &peak {
            Some(m) => space.d_set().iter().map(|&i| m[i]).collect(),
            None => return Err(config_err("m_values is required with an explicit matrix")),
        },
        v => v.to_vec(),
    };
    let m = MFunction::new(&space, &m_values)?;
    let k = cfg.f64("k");
    let y = match cfg.int("y") {
        y if y >= 0 => y as usize,
        _ => *space
            .d_set()
            .iter()
            .filter(|&&i| m.get(i).unwrap() * space.dist_to_gamma(i) > 2.0 * k)
            .min_by(|&&a, &&b| m.get(a).unwrap().total_cmp(&m.get(b).unwrap()))
            .ok_or_else(|| Error::Precondition("no point of D satisfies M(y) dist(y, Γ) > 2k".into()))?,
    };
    let trace = doubling_select(&space, &m, k, y)?;
    let x = trace.x;
    let mx = m.get(x).unwrap();
    let product_ok = mx * space.dist_to_gamma(x) > 2.0 * k;
    let monotone_ok = mx >= m.get(y).unwrap();
    let ball_ok = space.d_set().iter().all(|&z| space.d(z, x) > k / mx || m.get(z).unwrap() <= 2.0 * mx);
    let bound_ok = trace.iterations <= trace.iteration_bound;
    let all = product_ok && monotone_ok && ball_ok && bound_ok;
    art.json(
        "doubling.json",
        &json!({
            "points": n,
            "d_set": space.d_set(),
            "m_values": m_values,
            "k": k,
            "y": y,
            "x": x,
            "iterations": trace.iterations,
            "iteration_bound": trace.iteration_bound,
            "checks": { "product": product_ok, "monotone": monotone_ok, "doubling_ball": ball_ok, "iteration_bound": bound_ok },
            "all_checks": all,
            "trace": trace,
        }),
    )?;
    Ok(format!(
        "y = {y} -> x = {x} after {} iterations (bound {}); checks {}",
        trace.iterations,
        trace.iteration_bound,
        if all { "pass" } else { "FAIL" }
    ))
}

fn sweep(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<String, CliError> {
    let family = cfg.str("family").to_string();
    let param = cfg.str("param").to_string();
    let n = cfg.dim("n")?;
    let v0 = cfg.floats("v0").to_vec();
    if v0.is_empty() {
        return Err(config_err("v0 must list at least one value"));
    }
    let opts = ShootOptions { r_max: cfg.f64("r_max"), tol: cfg.f64("tol"), ..ShootOptions::default() };
    let (lo, hi) = (cfg.f64("lo"), cfg.f64("hi"));
    if !(lo < hi) {
        return Err(config_err("need lo < hi"));
    }
    let mut evals: Vec<(f64, bool)> = Vec::new();
    let mut oracle = |a: f64| -> Result<bool, CliError> {
        let params = BTreeMap::from([(param.clone(), a)]);
        let f = parse_with_params(&family, &params)?;
        let s = entire_solution_search(&f, n, &v0, &opts)?;
        evals.push((a, s.existence_corroborated));
        Ok(s.existence_corroborated)
    };
    let at_lo = oracle(lo)?;
    let at_hi = oracle(hi)?;
    let mut failure = None;
    let bracket = if at_lo != at_hi {
        Some(bisect_predicate(
            |a| match oracle(a) {
                Ok(v) => v == at_hi,
                Err(e) => {
                    failure.get_or_insert(e);
                    true
                }
            },
            lo,
            hi,
            cfg.count("iterations")?,
        ))
    } else {
        None
    };
    if let Some(e) = failure {
        return Err(e);
    }
    let onset = match (at_lo, at_hi) {
        (false, true) => "positive_global_above",
        (true, false) => "positive_global_below",
        (true, true) => "positive_global_throughout",
        (false, false) => "no_positive_global",
    };
    let evaluations: Vec<Json> = evals.iter().map(|(a, e)| json!({ "value": a, "positive_global": e })).collect();
    let mut sorted = evals.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    art.json(
        "sweep.json",
        &json!({
            "param": cfg.str("param"),
            "onset": onset,
            "bracket_lo": bracket.map(|b| b.0),
            "bracket_hi": bracket.map(|b| b.1),
            "evaluations": evaluations,
        }),
    )?;
    let plot = Plot::new("positive entire solution found", cfg.str("param"), "found (1) / not found (0)")
        .series("oracle", sorted.iter().map(|(a, e)| (*a, f64::from(u8::from(*e)))));
    art.svg("sweep.svg", &plot.render())?;
    Ok(match bracket {
        Some((a, b)) => format!("{onset}: threshold in [{a:.6}, {b:.6}]"),
        None => format!("{onset}: no change of outcome on [{lo}, {hi}]"),
    })
}

fn collect_json(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| config_err(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_json(&p, out)?;
        } else if p.extension().is_some_and(|e| e == "json") {
            out.push(p);
        }
    }
    Ok(())
}

fn report(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<String, CliError> {
    let root = PathBuf::from(cfg.str("dir"));
    let mut files = Vec::new();
    collect_json(&root, &mut files)?;
    let mut items = Vec::new();
    let mut lines = Vec::new();
    for p in files {
        if p.file_name().is_some_and(|n| n == "manifest.json") {
            continue;
        }
        let Ok(doc) = serde_json::from_str::<Json>(&fs::read_to_string(&p).unwrap_or_default()) else { continue };
        let meta = &doc["meta"];
        if meta["tool"] != "rvlab" || meta["subcommand"] == "report" {
            continue;
        }
        let headline: serde_json::Map<String, Json> = doc["result"]
            .as_object()
            .map(|o| o.iter().filter(|(_, v)| !v.is_object() && !v.is_array()).map(|(k, v)| (k.clone(), v.clone())).collect())
            .unwrap_or_default();
        let rel = p.strip_prefix(&root).unwrap_or(&p).display().to_string();
        let hash = meta["config_hash"].as_str().unwrap_or("");
        lines.push(format!(
            "{rel} [{} {}] {}",
            meta["subcommand"].as_str().unwrap_or("?"),
            &hash[..hash.len().min(12)],
            headline.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
        ));
        items.push(json!({
            "path": rel,
            "subcommand": meta["subcommand"],
            "version": meta["version"],
            "config_hash": meta["config_hash"],
            "config": doc["config"],
            "headline": headline,
        }));
    }
    if items.is_empty() {
        return Err(config_err(format!("no rvlab artifacts under {}", root.display())));
    }
    let count = items.len();
    art.json("report.json", &json!({ "artifacts": count, "items": items }))?;
    art.svg("report.svg", &text_panel("rvlab experiment report", &lines))?;
    Ok(format!("aggregated {count} artifacts"))
}
