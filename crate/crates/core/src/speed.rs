//! Spreading speeds from compactly supported data, measured in the lab frame.

use rayon::prelude::*;
use serde::Serialize;

use crate::cauchy::{run_with, Dt, SimConfig};
use crate::error::{domain, Error, Result};
use crate::grid::{Field, Grid};
use crate::params::{c_star, c_star_star_value, validate_params, Params};

/// Rightmost abscissa where u crosses `level`, by linear interpolation.
pub fn front_position(u: &Field, level: f64) -> Result<f64> {
    let v = &u.values;
    for i in (0..v.len() - 1).rev() {
        let a = v[i] >= level;
        let b = v[i + 1] >= level;
        if a != b {
            let t = (v[i] - level) / (v[i] - v[i + 1]);
            return Ok(u.grid.x(i) + t * u.grid.h);
        }
    }
    Err(Error::NoFront { level })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontTrack {
    pub level: f64,
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub fitted_speed: f64,
    pub fit_r2: f64,
    pub grid_left: f64,
    pub grid_right: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedConfig {
    pub params: Params,
    pub h: f64,
    pub t_end: f64,
    pub level: f64,
    pub record_every: f64,
    pub dt: Dt,
}

impl SpeedConfig {
    pub fn new(params: Params) -> Self {
        SpeedConfig { params, h: 0.05, t_end: 60.0, level: 0.5, record_every: 0.5, dt: Dt::Auto }
    }
}

/// Smooth compact bump cos^2(pi x / (2 w)) on |x - center| < w.
pub fn compact_bump(grid: Grid, center: f64, w: f64) -> Field {
    Field::from_fn(grid, |x| {
        let z = (x - center) / w;
        if z.abs() < 1.0 {
            (0.5 * std::f64::consts::PI * z).cos().powi(2)
        } else {
            0.0
        }
    })
}

/// Least-squares slope and coefficient of determination.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, r2)
}

fn support(u0: &Field) -> Result<(f64, f64)> {
    let lo = u0.values.iter().position(|&v| v > 0.0);
    let hi = u0.values.iter().rposition(|&v| v > 0.0);
    match (lo, hi) {
        (Some(a), Some(b)) => Ok((u0.grid.x(a), u0.grid.x(b))),
        _ => domain("initial data must be nonzero"),
    }
}

fn track_once(cfg: &SpeedConfig, u0: &Field, left: f64, right: f64) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let grid = Grid::from_bounds(left, right, cfg.h)?;
    let init = Field::from_fn(grid, |x| {
        if x < u0.grid.x0 - 0.5 * u0.grid.h || x > u0.grid.right() + 0.5 * u0.grid.h {
            0.0
        } else {
            u0.interp_linear(x)
        }
    });
    let mut sim = SimConfig::lab(cfg.params, grid, cfg.t_end);
    sim.output_every = cfg.record_every;
    sim.dt = cfg.dt;
    let mut times = Vec::new();
    let mut pos = Vec::new();
    let mut rightmost = f64::NEG_INFINITY;
    run_with(&sim, init, |s| {
        if let Ok(x) = front_position(&s.u, cfg.level) {
            times.push(s.t);
            pos.push(x);
            rightmost = rightmost.max(x);
        }
        Ok(())
    })?;
    Ok((times, pos, rightmost))
}

pub fn spreading_speed(cfg: &SpeedConfig, u0: &Field) -> Result<FrontTrack> {
    validate_params(cfg.params)?;
    if cfg.t_end < 40.0 {
        return domain(format!("spreading runs need t_end ≥ 40 (got {})", cfg.t_end));
    }
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return domain(format!("level must lie in (0,1) (got {})", cfg.level));
    }
    u0.check_nonnegative()?;
    let (a, b) = support(u0)?;
    let c_est = 1.1 * c_star(&cfg.params).max(2.0);
    let left = a - 20.0;
    let mut right = b + c_est * cfg.t_end + 20.0;
    let mut warnings = Vec::new();
    let (mut times, mut pos, far) = track_once(cfg, u0, left, right)?;
    if far > right - 10.0 {
        warnings.push(format!("front reached x = {far} near the boundary {right}; grid extended once"));
        right += c_est * cfg.t_end;
        let again = track_once(cfg, u0, left, right)?;
        times = again.0;
        pos = again.1;
    }
    let half = 0.5 * cfg.t_end;
    let (ft, fp): (Vec<f64>, Vec<f64>) = times.iter().zip(&pos).filter(|(t, _)| **t >= half).map(|(t, p)| (*t, *p)).unzip();
    if ft.len() < 2 {
        return Err(Error::NoFront { level: cfg.level });
    }
    let (slope, r2) = linear_fit(&ft, &fp);
    Ok(FrontTrack {
        level: cfg.level,
        times,
        positions: pos,
        fitted_speed: slope,
        fit_r2: r2,
        grid_left: left,
        grid_right: right,
        warnings,
    })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepRanges {
    pub chi: Vec<f64>,
    pub m: Vec<f64>,
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub chi: f64,
    pub m: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub c_fit: f64,
    pub r2: f64,
    pub c_star: f64,
    pub c_star_star: f64,
    pub error: Option<String>,
}

pub const SWEEP_HEADER: &str = "chi,m,alpha,gamma,c_fit,r2,c_star,c_star_star";

impl SweepRanges {
    /// Parameter tuples in lexicographic (chi, m, alpha, gamma) order.
    pub fn tuples(&self) -> Vec<(f64, f64, f64, f64)> {
        let sorted = |v: &[f64]| {
            let mut v = v.to_vec();
            v.sort_by(|a, b| a.total_cmp(b));
            v.dedup();
            v
        };
        let (cs, ms, als, gs) = (sorted(&self.chi), sorted(&self.m), sorted(&self.alpha), sorted(&self.gamma));
        let mut out = Vec::new();
        for &c in &cs {
            for &m in &ms {
                for &a in &als {
                    for &g in &gs {
                        out.push((c, m, a, g));
                    }
                }
            }
        }
        out
    }
}

fn sweep_row(base: &SpeedConfig, u0: &Field, t: (f64, f64, f64, f64)) -> SweepRow {
    let (chi, m, alpha, gamma) = t;
    let mut row = SweepRow {
        chi,
        m,
        alpha,
        gamma,
        c_fit: f64::NAN,
        r2: f64::NAN,
        c_star: f64::NAN,
        c_star_star: f64::NAN,
        error: None,
    };
    let p = match Params::new(chi, m, alpha, gamma) {
        Ok(p) => p,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.c_star = c_star(&p);
    row.c_star_star = c_star_star_value(&p).unwrap_or(f64::NAN);
    let cfg = SpeedConfig { params: p, ..base.clone() };
    match spreading_speed(&cfg, u0) {
        Ok(tr) => {
            row.c_fit = tr.fitted_speed;
            row.r2 = tr.fit_r2;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Runs every tuple on a pool of `jobs` threads; rows keep lexicographic order.
pub fn sweep_speeds(ranges: &SweepRanges, base: &SpeedConfig, u0: &Field, jobs: usize) -> Result<Vec<SweepRow>> {
    let tuples = ranges.tuples();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    Ok(pool.install(|| tuples.par_iter().map(|&t| sweep_row(base, u0, t)).collect()))
}
