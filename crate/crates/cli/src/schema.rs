//! Per-subcommand keys, types and defaults.

use crate::config::{KeySpec, Kind, Schema};

const fn key(name: &'static str, kind: Kind, default: Option<&'static str>, help: &'static str) -> KeySpec {
    KeySpec { name, kind, default, help }
}

const F: KeySpec = key("f", Kind::Str, None, "nonlinearity f(s), e.g. \"pow(s,2)*log(2+s)\"");

pub const CLASSIFY: Schema = Schema {
    name: "classify",
    about: "Sampled function-class checks on f",
    keys: &[
        F,
        key("check", Kind::Str, Some("variation"), "variation|controlled|almost_decreasing|superlinear|growth|monotone|hypotheses"),
        key("at", Kind::Str, Some("inf"), "location for regular variation: 0|inf"),
        key("lambda_grid", Kind::Str, Some("deep"), "deep|standard"),
        key("s_lo", Kind::Float, Some("0.5"), "compact s-interval, lower end (controlled)"),
        key("s_hi", Kind::Float, Some("2"), "compact s-interval, upper end (controlled)"),
        key("shift", Kind::Float, Some("0"), "exponent shift for almost_decreasing"),
        key("m", Kind::Float, Some("2"), "exponent of s^{-m} f (monotone)"),
        key("n", Kind::Int, Some("3"), "space dimension (hypotheses)"),
    ],
};

pub const BLOWUP: Schema = Schema {
    name: "blowup",
    about: "ODE blow-up time, trajectory and rate for y' = f(y)",
    keys: &[
        F,
        key("y0", Kind::Float, Some("1"), "initial value"),
        key("tau_hi", Kind::Float, Some("0.5"), "largest T - t, as a fraction of T"),
        key("tau_lo", Kind::Float, Some("1e-8"), "smallest T - t, as a fraction of T"),
    ],
};

pub const SHOOT: Schema = Schema {
    name: "shoot",
    about: "Radial shooting for -Δv = f(v) from v(0) = v0",
    keys: &[
        F,
        key("n", Kind::Int, Some("3"), "space dimension"),
        key("v0", Kind::Floats, Some("0.1,1,10"), "central values"),
        key("r_max", Kind::Float, Some("1000"), "outer radius"),
        key("tol", Kind::Float, Some("1e-12"), "integrator tolerance"),
        key("trace_points", Kind::Int, Some("400"), "samples kept per trace CSV"),
    ],
};

pub const SIMULATE: Schema = Schema {
    name: "simulate",
    about: "Finite differences for u_t = Δu + f(u)",
    keys: &[
        F,
        key("geometry", Kind::Str, Some("interval"), "interval|ball"),
        key("a", Kind::Float, Some("0"), "interval left end"),
        key("b", Kind::Float, Some("1"), "interval right end"),
        key("n", Kind::Int, Some("3"), "ball dimension"),
        key("radius", Kind::Float, Some("1"), "ball radius"),
        key("bc", Kind::Str, Some("dirichlet"), "dirichlet|neumann"),
        key("u0", Kind::Str, Some("sine"), "initial profile: flat|sine|parabola"),
        key("amplitude", Kind::Float, Some("10"), "initial amplitude"),
        key("intervals", Kind::Int, Some("256"), "grid intervals"),
        key("safety", Kind::Float, Some("0.9"), "fraction of the diffusive step limit"),
        key("reaction_safety", Kind::Float, Some("0.02"), "bound on dt · max f'(u)"),
        key("horizon", Kind::Float, Some("10"), "final time"),
        key("cap", Kind::Float, Some("1e12"), "blow-up threshold for max u"),
        key("decay_floor", Kind::Float, Some("1e-10"), "decay threshold for max u"),
        key("snapshot_growth", Kind::Float, Some("2"), "snapshot when max u grows by this factor"),
        key("snapshot_dt", Kind::Float, Some("0.05"), "snapshot interval in time"),
    ],
};

pub const VERIFY_ESTIMATE: Schema = Schema {
    name: "verify-estimate",
    about: "Estimate functionals and the integral inequality",
    keys: &[
        key("functional", Kind::Str, Some("temporal"), "temporal|interior|singular|gs"),
        key("input", Kind::Str, Some(""), "trajectory.json written by simulate (temporal, interior)"),
        key("f", Kind::Str, Some(""), "nonlinearity; defaults to the one recorded in the input"),
        key("p", Kind::Float, Some("4"), "exponent (singular)"),
        key("n", Kind::Int, Some("3"), "dimension (singular: space, gs: 1 or 2)"),
        key("radii", Kind::Int, Some("41"), "sampled radii in (0, 1/2] (singular)"),
        key("q", Kind::Float, Some("0"), "exponent q (gs)"),
        key("k", Kind::Float, Some("1"), "parameter k != -1 (gs)"),
        key("intervals", Kind::Int, Some("256"), "grid intervals on [-1, 1] (gs)"),
        key("cases", Kind::Int, Some("0"), "random (v, φ, q, k) cases instead of q, k (gs)"),
        key("seed", Kind::Int, Some("1"), "random seed (gs)"),
    ],
};

pub const DOUBLING_DEMO: Schema = Schema {
    name: "doubling-demo",
    about: "Doubling selection on a finite metric space",
    keys: &[
        key("matrix", Kind::Str, Some(""), "CSV distance matrix; random points in the unit square when empty"),
        key("d_set", Kind::Floats, Some(""), "indices of D (all points, so Γ is empty, when empty)"),
        key("m_values", Kind::Floats, Some(""), "M on D; for random spaces defaults to 1/(1e-3 + |x - c|²) with a random peak c"),
        key("points", Kind::Int, Some("200"), "random space size"),
        key("seed", Kind::Int, Some("1"), "random seed"),
        key("k", Kind::Float, Some("0.5"), "radius parameter k"),
        key("y", Kind::Int, Some("-1"), "start point; admissible point with the smallest M when negative"),
    ],
};

pub const SWEEP: Schema = Schema {
    name: "sweep",
    about: "Bisection for the onset of positive entire solutions in a parameter",
    keys: &[
        key("family", Kind::Str, None, "nonlinearity with a named parameter"),
        key("param", Kind::Str, Some("a"), "parameter name"),
        key("lo", Kind::Float, Some("0"), "lower end of the parameter range"),
        key("hi", Kind::Float, Some("4"), "upper end of the parameter range"),
        key("n", Kind::Int, Some("3"), "space dimension"),
        key("v0", Kind::Floats, Some("0.25,0.5,1,2,4"), "central values tried per parameter"),
        key("r_max", Kind::Float, Some("1000"), "outer radius"),
        key("tol", Kind::Float, Some("1e-10"), "integrator tolerance"),
        key("iterations", Kind::Int, Some("12"), "bisection steps"),
    ],
};

pub const REPORT: Schema = Schema {
    name: "report",
    about: "Aggregate an experiment directory",
    keys: &[key("dir", Kind::Str, None, "directory with rvlab artifacts")],
};

pub const ALL: &[Schema] = &[CLASSIFY, BLOWUP, SHOOT, SIMULATE, VERIFY_ESTIMATE, DOUBLING_DEMO, SWEEP, REPORT];

pub fn find(name: &str) -> Option<&'static Schema> {
    ALL.iter().find(|s| s.name == name)
}
