use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("c below c_star: c = {c} but the regime requires c > {c_min}")]
    SpeedBelowMinimum { c: f64, c_min: f64 },
    #[error("blow-up detected at t = {t}, x = {x}")]
    Blowup { t: f64, x: f64 },
    #[error("time step underflow at t = {t} (dt = {dt:e})")]
    Stiffness { t: f64, dt: f64 },
    #[error("no convergence after {iters} iterations (last residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },
    #[error("parameters outside every wave regime: {0}")]
    Regime(String),
    #[error("no front: profile never crosses level {level}")]
    NoFront { level: f64 },
    #[error("decay window too short: {length} < 5 length units")]
    WindowTooShort { length: f64 },
    #[error("normalization failed: {0}")]
    Normalization(String),
    #[error("config key `{key}`: {msg}")]
    Config { key: String, msg: String },
    #[error("{0}")]
    NoData(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
