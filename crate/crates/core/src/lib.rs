//! Numerical toolkit for the one-dimensional parabolic-elliptic chemotaxis
//! system with logistic source
//!
//! ```text
//! u_t = u_xx - chi (u^m v_x)_x + u (1 - u^alpha),    0 = v_xx - v + u^gamma
//! ```
//!
//! Modules follow the workflow: closed-form constants ([`params`]), the
//! screened-Poisson solve ([`elliptic`]), time stepping ([`cauchy`]), explicit
//! barriers ([`barriers`]), traveling-wave construction ([`wave`]), the
//! weighted-norm stability lab ([`stability`]) and spreading speeds ([`speed`]).

pub mod barriers;
pub mod cauchy;
pub mod config;
pub mod elliptic;
pub mod error;
pub mod grid;
pub mod io;
pub mod params;
pub mod plot;
pub mod speed;
pub mod stability;
mod tridiag;
pub mod wave;

pub use error::{Error, Result};
pub use grid::{Field, Grid};
pub use params::Params;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
