//! Flat `key=value` run configuration (one pair per line, `#` comments).

use serde::Serialize;

use crate::cauchy::Dt;
use crate::error::{Error, Result};
use crate::params::Params;
use crate::wave::Method;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum EtaSetting {
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InitialCondition {
    /// smooth compact bump of half-width 5 at the origin
    Bump,
    /// 1 on x < 0, 0 on x > 0
    Step,
    /// 1 + 0.2 cos(x), bounded away from zero
    Positive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub chi: f64,
    pub m: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub c: Option<f64>,
    pub grid_left: Option<f64>,
    pub grid_right: Option<f64>,
    pub grid_h: f64,
    #[serde(serialize_with = "ser_dt")]
    pub dt: Dt,
    pub t_end: Option<f64>,
    pub method: Method,
    pub eta: EtaSetting,
    pub seed: u64,
    pub out_dir: String,
    pub level: f64,
    pub samples: usize,
    pub amplitude: f64,
    pub width: f64,
    pub center: f64,
    pub record_every: Option<f64>,
    pub ic: InitialCondition,
}

fn ser_dt<S: serde::Serializer>(dt: &Dt, s: S) -> std::result::Result<S::Ok, S::Error> {
    match dt {
        Dt::Auto => s.serialize_str("auto"),
        Dt::Fixed(v) => s.serialize_f64(*v),
    }
}

/// (key, default, meaning) for every accepted key.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("chi", "0", "chemotactic sensitivity"),
    ("m", "1", "density exponent in the flux, ≥ 1"),
    ("alpha", "1", "logistic exponent, ≥ 1"),
    ("gamma", "1", "signal production exponent, ≥ 1"),
    ("c", "(required by wave, stability, certify)", "wave speed"),
    ("grid.left", "(per subcommand)", "left end of the grid"),
    ("grid.right", "(per subcommand)", "right end of the grid"),
    ("grid.h", "0.05", "grid spacing"),
    ("dt", "auto", "time step or `auto`"),
    ("t_end", "(per subcommand)", "final time"),
    ("method", "fixed_point", "wave construction: fixed_point | relax"),
    ("eta", "auto", "weight exponent or `auto`"),
    ("seed", "1", "seed for randomized checks"),
    ("out_dir", "out", "output directory (CHEMOWAVE_OUT overrides)"),
    ("level", "0.5", "front level"),
    ("samples", "200", "random densities per certificate"),
    ("amplitude", "0.05", "perturbation amplitude"),
    ("width", "1", "perturbation width"),
    ("center", "0", "perturbation center"),
    ("record_every", "(per subcommand)", "output interval"),
    ("ic", "bump", "initial data for simulate: bump | step | positive"),
];

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            chi: 0.0,
            m: 1.0,
            alpha: 1.0,
            gamma: 1.0,
            c: None,
            grid_left: None,
            grid_right: None,
            grid_h: 0.05,
            dt: Dt::Auto,
            t_end: None,
            method: Method::FixedPoint,
            eta: EtaSetting::Auto,
            seed: 1,
            out_dir: "out".into(),
            level: 0.5,
            samples: 200,
            amplitude: 0.05,
            width: 1.0,
            center: 0.0,
            record_every: None,
            ic: InitialCondition::Bump,
        }
    }
}

fn err(key: &str, msg: impl Into<String>) -> Error {
    Error::Config { key: key.into(), msg: msg.into() }
}

fn num(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.trim().parse().map_err(|_| err(key, format!("malformed number `{v}`")))?;
    if !x.is_finite() {
        return Err(err(key, format!("non-finite value `{v}`")));
    }
    Ok(x)
}

fn count(key: &str, v: &str) -> Result<u64> {
    v.trim().parse().map_err(|_| err(key, format!("malformed integer `{v}`")))
}

/// Splits text into (key, value) pairs; blank lines and `#` comments skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(err(line, format!("line {}: expected key=value", ln + 1)));
        };
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl RunConfig {
    /// Defaults overridden by the pairs in `text`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (k, v) in parse_pairs(text)? {
            cfg.set(&k, &v)?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "chi" => self.chi = num(key, v)?,
            "m" => self.m = num(key, v)?,
            "alpha" => self.alpha = num(key, v)?,
            "gamma" => self.gamma = num(key, v)?,
            "c" => self.c = Some(num(key, v)?),
            "grid.left" => self.grid_left = Some(num(key, v)?),
            "grid.right" => self.grid_right = Some(num(key, v)?),
            "grid.h" => {
                let h = num(key, v)?;
                if h <= 0.0 {
                    return Err(err(key, "must be positive"));
                }
                self.grid_h = h;
            }
            "dt" => {
                self.dt = if v.eq_ignore_ascii_case("auto") {
                    Dt::Auto
                } else {
                    let d = num(key, v)?;
                    if d <= 0.0 {
                        return Err(err(key, "must be positive or `auto`"));
                    }
                    Dt::Fixed(d)
                }
            }
            "t_end" => {
                let t = num(key, v)?;
                if t <= 0.0 {
                    return Err(err(key, "must be positive"));
                }
                self.t_end = Some(t);
            }
            "method" => {
                self.method = match v {
                    "fixed_point" | "fixed-point" | "FixedPoint" => Method::FixedPoint,
                    "relax" | "coupled_relax" | "CoupledRelax" => Method::CoupledRelax,
                    _ => return Err(err(key, format!("unknown method `{v}` (fixed_point | relax)"))),
                }
            }
            "eta" => {
                self.eta = if v.eq_ignore_ascii_case("auto") { EtaSetting::Auto } else { EtaSetting::Value(num(key, v)?) }
            }
            "seed" => self.seed = count(key, v)?,
            "out_dir" => {
                if v.is_empty() {
                    return Err(err(key, "empty path"));
                }
                self.out_dir = v.to_string();
            }
            "level" => {
                let l = num(key, v)?;
                if !(l > 0.0 && l < 1.0) {
                    return Err(err(key, "must lie in (0,1)"));
                }
                self.level = l;
            }
            "samples" => {
                let n = count(key, v)?;
                if n == 0 || n > 100_000 {
                    return Err(err(key, "must lie in 1..=100000"));
                }
                self.samples = n as usize;
            }
            "amplitude" => self.amplitude = num(key, v)?,
            "width" => {
                let w = num(key, v)?;
                if w <= 0.0 {
                    return Err(err(key, "must be positive"));
                }
                self.width = w;
            }
            "center" => self.center = num(key, v)?,
            "record_every" => {
                let r = num(key, v)?;
                if r <= 0.0 {
                    return Err(err(key, "must be positive"));
                }
                self.record_every = Some(r);
            }
            "ic" => {
                self.ic = match v {
                    "bump" => InitialCondition::Bump,
                    "step" => InitialCondition::Step,
                    "positive" => InitialCondition::Positive,
                    _ => return Err(err(key, format!("unknown initial data `{v}` (bump | step | positive)"))),
                }
            }
            _ => return Err(err(key, "unknown key")),
        }
        Ok(())
    }

    pub fn params(&self) -> Result<Params> {
        Params::new(self.chi, self.m, self.alpha, self.gamma)
    }

    pub fn require_c(&self) -> Result<f64> {
        self.c.ok_or_else(|| err("c", "required for this subcommand"))
    }
}
