//! Nonlinearities `f(s)`: expression trees, their textual form, integrals,
//! critical exponents and the standard example families.

pub mod builders;
pub mod exponents;
pub mod expr;
pub mod integrals;
pub mod logvalue;
pub mod parse;

pub use builders::{
    build_example, build_piecewise_power, counterexample, ftilde_counterexample, power_times_slow, CounterexampleCoefficients, Example,
    PiecewisePowerSpec, SlowFactor,
};
pub use exponents::{critical_exponents, Case, CriticalExponents, Exponent};
pub use expr::{Expr, PiecewisePower};
pub use integrals::{antiderivative_f, tilde_f};
pub use logvalue::LogValue;
pub use parse::{parse, parse_with_params};
