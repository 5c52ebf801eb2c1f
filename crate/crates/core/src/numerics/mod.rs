//! Numerical building blocks shared by the analysis modules.

pub mod grid;
pub mod ode;
pub mod quadrature;
pub mod root;

pub use grid::{linear_fit, linspace, logspace};
pub use ode::{Control, Dopri5, Outcome, Step, Termination};
pub use quadrature::{integrate, integrate_to_infinity, QuadResult, Tolerance};
pub use root::{bisect_predicate, brent};
