//! Numerical toolkit for superlinear reaction-diffusion problems with
//! general (not necessarily power-like) nonlinearities.

pub mod classification;
pub mod doubling;
pub mod elliptic_radial;
pub mod error;
pub mod estimates;
pub mod nonlinearity;
pub mod numerics;
pub mod ode_blowup;
pub mod parabolic_fd;

pub use error::{Error, ErrorKind, Result};
pub use nonlinearity::{Case, Expr};
