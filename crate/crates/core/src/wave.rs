//! Traveling-wave profiles in the moving frame z = x - ct.
//!
//! `FixedPoint` iterates u -> U(.; u), where U(.; u) is the steady state of the
//! density equation with the signal frozen at Psi(u^gamma), started from the
//! super-solution min{M, e^{-kappa x}}. `CoupledRelax` integrates the full
//! moving-frame system to rest from the same data.

use serde::Serialize;

use crate::barriers::signal;
use crate::cauchy::{pow, Dt, LeftBc, RightBc, SimConfig, State, Stepper};
use crate::error::{domain, Error, Result};
use crate::grid::{Field, Grid};
use crate::params::{
    barrier_constants, c_star, classify_regime, default_kappa1, default_kappa_tilde, kappa_of_speed, m_chi, x_minus,
    Params, RegimeTag,
};
use crate::speed::linear_fit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    FixedPoint,
    CoupledRelax,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveProblem {
    pub params: Params,
    pub c: f64,
    pub grid: Grid,
    pub method: Method,
    /// steady-state threshold on |u_t|
    pub tol_inner: f64,
    /// Picard threshold on |u^{k+1} - u^k|
    pub tol_outer: f64,
    pub max_outer: usize,
    pub damping: f64,
    /// give up an inner (or relaxation) solve after this much time
    pub max_time: f64,
}

/// Grid for the moving frame at spacing h. The right end puts the tail at
/// U ~ e^{-23}: the Robin end is exact only for the linear tail, and the
/// neglected e^{-2 kappa x} part drives a slow drift of size ~e^{-kappa R}. The left end lets the plateau settle to 1 - U ~ e^{-20}, with the
/// rate taken from the linearization u'' + cu' - alpha u = 0.
pub fn default_wave_grid(c: f64, alpha: f64, h: f64) -> Result<Grid> {
    let right = match kappa_of_speed(c) {
        Ok(k) => (23.0 / k + 5.0).max(40.0),
        Err(_) => 40.0,
    };
    let c = c.max(0.0);
    let lam = 0.5 * (-c + (c * c + 4.0 * alpha).sqrt());
    let left = (20.0 / lam).clamp(30.0, 200.0);
    Grid::from_bounds(-left, right, h)
}

impl WaveProblem {
    pub fn new(params: Params, c: f64) -> Result<Self> {
        Ok(WaveProblem {
            params,
            c,
            grid: default_wave_grid(c, params.alpha, 0.05)?,
            method: Method::FixedPoint,
            tol_inner: 1e-8,
            tol_outer: 1e-7,
            max_outer: 200,
            damping: 1.0,
            max_time: 2000.0,
        })
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    /// Minimal admissible speed for the parameter regime.
    pub fn min_speed(&self) -> Result<f64> {
        match classify_regime(&self.params) {
            RegimeTag::NegChi_AlphaLE => Ok(c_star(&self.params)),
            RegimeTag::PosChi_AlphaEQ => Ok(2.0),
            tag => Err(Error::Regime(format!(
                "no traveling-wave construction for regime {tag:?} (chi = {}, alpha = {}, m + gamma - 1 = {})",
                self.params.chi,
                self.params.alpha,
                self.params.m + self.params.gamma - 1.0
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let c_min = self.min_speed()?;
        if !(self.c > c_min) {
            return Err(Error::SpeedBelowMinimum { c: self.c, c_min });
        }
        if !(self.tol_inner > 0.0 && self.tol_outer > 0.0) {
            return domain("tolerances must be positive");
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return domain(format!("damping must lie in (0,1] (got {})", self.damping));
        }
        if self.max_outer == 0 {
            return domain("max_outer must be at least 1");
        }
        Ok(())
    }

    /// M = 1 for chi ≤ 0, M_chi otherwise.
    pub fn m_regime(&self) -> Result<f64> {
        m_chi(&self.params)
    }

    fn kappa(&self) -> Result<f64> {
        kappa_of_speed(self.c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveProfile {
    #[serde(skip)]
    pub u: Field,
    #[serde(skip)]
    pub v: Field,
    pub params: Params,
    pub c: f64,
    pub kappa: f64,
    pub kappa_fit: f64,
    pub left_limit: f64,
    pub right_limit: f64,
    pub monotonicity_violation: f64,
    pub outer_iters: usize,
    pub method: Method,
    /// last |u^{k+1} - u^k| (outer) or |u_t| (relaxation)
    pub residual: f64,
    pub residual_history: Vec<f64>,
    /// max over the run of u(t+dt) - u(t), positive part
    pub time_monotonicity_violation: f64,
    /// max over the run of the centered-difference u_x, positive part
    pub inner_slope_violation: f64,
    /// max over iterates of max(U^- - u, u - U^+), positive part
    pub sandwich_violation: f64,
    pub upper_bound_violation: f64,
    pub damping: f64,
    pub warnings: Vec<String>,
}

impl WaveProfile {
    /// Wraps a sampled profile (e.g. read from CSV) at speed c with the
    /// same diagnostics a construction would attach.
    pub fn from_samples(params: Params, c: f64, u: Field) -> Result<WaveProfile> {
        u.check_nonnegative()?;
        let pb = WaveProblem { grid: u.grid, ..WaveProblem::new(params, c)? };
        let kappa = pb.kappa()?;
        let prof = blank(&pb, kappa, &u);
        finish(&pb, u, prof)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Watch {
    time_mono: f64,
    slope: f64,
}

impl Watch {
    fn observe(&mut self, old: &[f64], new: &[f64], h: f64) {
        for (a, b) in old.iter().zip(new) {
            self.time_mono = self.time_mono.max(b - a);
        }
        for i in 1..new.len() - 1 {
            self.slope = self.slope.max((new[i + 1] - new[i - 1]) / (2.0 * h));
        }
    }
}

fn moving_config(pb: &WaveProblem, dt: f64) -> Result<SimConfig> {
    let mut cfg = SimConfig::moving(pb.params, pb.grid, pb.c, pb.max_time)?;
    cfg.bc_left = LeftBc::NeumannZero;
    cfg.dt = Dt::Fixed(dt);
    cfg.clamp_negative = true;
    Ok(cfg)
}

/// Upper bound of the reaction Jacobian for 0 ≤ u ≤ M, 0 ≤ V ≤ M^gamma.
pub(crate) fn reaction_bound(p: &Params, m_cap: f64) -> f64 {
    let a = p.chi.abs();
    let mg = pow(m_cap, p.gamma);
    1.0 + (1.0 + p.alpha) * pow(m_cap, p.alpha)
        + a * p.m * pow(m_cap, p.m - 1.0) * mg
        + a * (p.m + p.gamma) * pow(m_cap, p.m + p.gamma - 1.0)
}

fn step_until_rest(
    stepper: &mut Stepper,
    state: &mut State,
    dt: f64,
    tol: f64,
    t_max: f64,
    watch: &mut Watch,
) -> Result<f64> {
    let h = state.u.grid.h;
    let mut old = state.u.values.clone();
    loop {
        let info = stepper.step(state, dt)?;
        watch.observe(&old, &state.u.values, h);
        let rate = info.max_change / info.dt;
        if rate < tol {
            return Ok(rate);
        }
        if state.t >= t_max {
            return Err(Error::NoConvergence { iters: (state.t / dt).round() as usize, residual: rate });
        }
        old.copy_from_slice(&state.u.values);
    }
}

fn super_field(grid: Grid, kappa: f64, m_cap: f64) -> Field {
    Field::from_fn(grid, |x| (-kappa * x).exp().min(m_cap))
}

/// Lower barrier max{0, e^{-kappa x} - D e^{-kappa~ x}} with D = max(D_sub, value
/// putting x_minus at the left end + 5).
pub fn sandwich_lower(p: &Params, c: f64, m_cap: f64, grid: Grid) -> Result<Field> {
    let kappa = kappa_of_speed(c)?;
    let kt = default_kappa_tilde(p, kappa);
    let bc = barrier_constants(p, kappa, kt, m_cap)?;
    let d_floor = ((kt - kappa) * (grid.x0 + 5.0)).exp();
    let d = bc.d_sub.max(d_floor);
    let xm = x_minus(kappa, kt, d);
    Ok(Field::from_fn(grid, |x| {
        if x < xm {
            0.0
        } else {
            ((-kappa * x).exp() - d * (-kt * x).exp()).max(0.0)
        }
    }))
}

fn sandwich_gap(u: &Field, lower: &Field, upper: &Field) -> f64 {
    let mut g: f64 = 0.0;
    for i in 0..u.len() {
        g = g.max(u.values[i] - upper.values[i]).max(lower.values[i] - u.values[i]);
    }
    g
}

fn max_slope(u: &Field) -> f64 {
    let v = &u.values;
    let h = u.grid.h;
    (1..v.len() - 1).map(|i| (v[i + 1] - v[i - 1]) / (2.0 * h)).fold(0.0, f64::max)
}

fn finish(pb: &WaveProblem, u: Field, mut prof: WaveProfile) -> Result<WaveProfile> {
    let kappa = pb.kappa()?;
    let (v, _) = signal(&u, pb.params.gamma, Some(kappa))?;
    let m_cap = pb.m_regime()?;
    let bound = super_field(u.grid, kappa, m_cap);
    prof.upper_bound_violation = u.values.iter().zip(&bound.values).map(|(a, b)| a - b).fold(0.0, f64::max);
    prof.left_limit = u.values[0];
    prof.right_limit = u.values[u.len() - 1];
    prof.monotonicity_violation = max_slope(&u);
    prof.kappa_fit = match decay_fit(&u) {
        Ok((k, _)) => k,
        Err(e) => {
            prof.warnings.push(format!("decay fit unavailable: {e}"));
            f64::NAN
        }
    };
    prof.u = u;
    prof.v = v;
    Ok(prof)
}

fn blank(pb: &WaveProblem, kappa: f64, u: &Field) -> WaveProfile {
    WaveProfile {
        u: u.clone(),
        v: u.clone(),
        params: pb.params,
        c: pb.c,
        kappa,
        kappa_fit: f64::NAN,
        left_limit: f64::NAN,
        right_limit: f64::NAN,
        monotonicity_violation: f64::NAN,
        outer_iters: 0,
        method: pb.method,
        residual: f64::NAN,
        residual_history: Vec::new(),
        time_monotonicity_violation: 0.0,
        inner_slope_violation: 0.0,
        sandwich_violation: 0.0,
        upper_bound_violation: 0.0,
        damping: pb.damping,
        warnings: Vec::new(),
    }
}

/// Picard iteration of the frozen-signal steady-state map. Returns the
/// profile in its computed position (tail ~ e^{-kappa x}); see
/// [`normalize_translation`] for comparisons.
pub fn construct_fixed_point(pb: &WaveProblem) -> Result<WaveProfile> {
    pb.validate()?;
    let p = pb.params;
    let kappa = pb.kappa()?;
    let m_cap = pb.m_regime()?;
    let upper = super_field(pb.grid, kappa, m_cap);
    let lower = sandwich_lower(&p, pb.c, m_cap, pb.grid)?;
    let dt = (0.1 / reaction_bound(&p, m_cap)).min(0.1);
    let cfg = moving_config(pb, dt)?;
    let mut prof = blank(pb, kappa, &upper);
    let mut watch = Watch::default();
    let mut u = upper.clone();
    let mut theta = pb.damping;
    let mut rises = 0;
    let mut last = f64::INFINITY;
    prof.sandwich_violation = sandwich_gap(&u, &lower, &upper);
    for k in 1..=pb.max_outer {
        let (v, vx) = signal(&u, p.gamma, Some(kappa))?;
        let mut stepper = Stepper::frozen(cfg.clone(), &v, &vx)?;
        let mut state = stepper.init(0.0, upper.clone())?;
        step_until_rest(&mut stepper, &mut state, dt, pb.tol_inner, pb.max_time, &mut watch)?;
        let next = state.u;
        let diff = next.sup_diff(&u);
        if theta < 1.0 {
            for (a, b) in u.values.iter_mut().zip(&next.values) {
                *a += theta * (b - *a);
            }
        } else {
            u = next;
        }
        prof.sandwich_violation = prof.sandwich_violation.max(sandwich_gap(&u, &lower, &upper));
        prof.residual_history.push(diff);
        prof.residual = diff;
        prof.outer_iters = k;
        if diff < pb.tol_outer {
            prof.time_monotonicity_violation = watch.time_mono;
            prof.inner_slope_violation = watch.slope;
            prof.damping = theta;
            return finish(pb, u, prof);
        }
        rises = if diff > last { rises + 1 } else { 0 };
        if rises >= 2 && theta > 0.5 {
            theta = 0.5;
            rises = 0;
            prof.warnings.push(format!("outer residual rose twice; damping set to 0.5 at iteration {k}"));
        }
        last = diff;
    }
    Err(Error::NoConvergence { iters: pb.max_outer, residual: prof.residual })
}

/// Direct relaxation of the coupled moving-frame system. Below the minimal
/// speed there is no admissible decay rate; the run uses a Neumann right end
/// and reports the drifting front as non-convergence.
pub fn construct_relax(pb: &WaveProblem) -> Result<WaveProfile> {
    if pb.c < 2.0 {
        return relax_below_minimum(pb);
    }
    pb.validate()?;
    let p = pb.params;
    let kappa = pb.kappa()?;
    let m_cap = pb.m_regime()?;
    let upper = super_field(pb.grid, kappa, m_cap);
    let dt = (0.1 / reaction_bound(&p, m_cap)).min(0.1);
    let cfg = moving_config(pb, dt)?;
    let mut prof = blank(pb, kappa, &upper);
    let mut watch = Watch::default();
    let mut stepper = Stepper::new(cfg)?;
    let mut state = stepper.init(0.0, upper.clone())?;
    let rate = step_until_rest(&mut stepper, &mut state, dt, pb.tol_inner, pb.max_time, &mut watch)?;
    let lower = sandwich_lower(&p, pb.c, m_cap, pb.grid)?;
    prof.sandwich_violation = sandwich_gap(&state.u, &lower, &upper);
    prof.time_monotonicity_violation = watch.time_mono;
    prof.inner_slope_violation = watch.slope;
    prof.residual = rate;
    prof.residual_history.push(rate);
    prof.outer_iters = 1;
    finish(pb, state.u, prof)
}

fn relax_below_minimum(pb: &WaveProblem) -> Result<WaveProfile> {
    let mut cfg = SimConfig::lab(pb.params, pb.grid, pb.max_time);
    cfg.frame_speed = pb.c;
    cfg.bc_right = RightBc::NeumannZero;
    cfg.dt = Dt::Auto;
    let u0 = Field::from_fn(pb.grid, |x| (-x).exp().min(1.0));
    let mut stepper = Stepper::new(cfg)?;
    let mut state = stepper.init(0.0, u0)?;
    let x_start = crate::speed::front_position(&state.u, 0.5)?;
    let t_check = 50.0f64.min(pb.max_time);
    stepper.advance_to(&mut state, t_check)?;
    let x_end = crate::speed::front_position(&state.u, 0.5).unwrap_or(pb.grid.right());
    Err(Error::NoConvergence {
        iters: 0,
        residual: (x_end - x_start) / t_check,
    })
}

/// Slope of -ln U over the nodes with U in [1e-6, 1e-2]; also returns the window.
fn decay_fit(u: &Field) -> Result<(f64, (f64, f64))> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = (0..u.len())
        .filter(|&i| u.values[i] >= 1e-6 && u.values[i] <= 1e-2)
        .map(|i| (u.grid.x(i), -u.values[i].ln()))
        .unzip();
    let len = match (xs.first(), xs.last()) {
        (Some(a), Some(b)) => b - a,
        _ => 0.0,
    };
    if len < 5.0 || xs.len() < 3 {
        return Err(Error::WindowTooShort { length: len });
    }
    let (slope, _) = linear_fit(&xs, &ys);
    Ok((slope, (xs[0], xs[xs.len() - 1])))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveDiagnostics {
    pub kappa: f64,
    pub kappa1: f64,
    pub kappa_fit: f64,
    pub window: (f64, f64),
    /// max over the window's right half of e^{(kappa1-kappa)x} |U e^{kappa x} - 1|
    pub refined_score: f64,
    /// least-squares slope of ln of that quantity over the right half
    pub refined_trend: f64,
    pub refined_decreasing: bool,
    pub monotonicity_violation: f64,
    pub left_limit: f64,
    pub right_limit: f64,
}

pub fn diagnose(profile: &WaveProfile, kappa1: f64) -> Result<WaveDiagnostics> {
    let u = &profile.u;
    let kappa = profile.kappa;
    let (kfit, window) = decay_fit(u)?;
    let mid = 0.5 * (window.0 + window.1);
    let (xs, ls): (Vec<f64>, Vec<f64>) = (0..u.len())
        .filter(|&i| {
            let x = u.grid.x(i);
            x >= mid && x <= window.1
        })
        .map(|i| {
            let x = u.grid.x(i);
            let g = ((kappa1 - kappa) * x).exp() * (u.values[i] * (kappa * x).exp() - 1.0).abs();
            (x, g.ln())
        })
        .filter(|(_, l)| l.is_finite())
        .unzip();
    let score = ls.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)).exp();
    let trend = if xs.len() >= 2 { linear_fit(&xs, &ls).0 } else { f64::NAN };
    Ok(WaveDiagnostics {
        kappa,
        kappa1,
        kappa_fit: kfit,
        window,
        refined_score: score,
        refined_trend: trend,
        refined_decreasing: trend < 0.0,
        monotonicity_violation: max_slope(u),
        left_limit: u.values[0],
        right_limit: u.values[u.len() - 1],
    })
}

/// Diagnostics with the default refined exponent.
pub fn diagnose_default(profile: &WaveProfile, params: &Params) -> Result<WaveDiagnostics> {
    diagnose(profile, default_kappa1(params, profile.kappa))
}

/// Four-point Lagrange interpolation; linear in the end cells, constant
/// outside on the left and e^{-kappa} continuation on the right.
pub fn cubic_at(u: &Field, x: f64, kappa: f64) -> f64 {
    let g = u.grid;
    let v = &u.values;
    let n = v.len();
    let s = (x - g.x0) / g.h;
    if s <= 0.0 {
        return v[0];
    }
    if s >= (n - 1) as f64 {
        return v[n - 1] * (-kappa * (x - g.right())).exp();
    }
    let i = (s.floor() as usize).min(n - 2);
    let t = s - i as f64;
    if i == 0 || i + 2 >= n {
        return v[i] + t * (v[i + 1] - v[i]);
    }
    let (a, b, c, d) = (v[i - 1], v[i], v[i + 1], v[i + 2]);
    -t * (t - 1.0) * (t - 2.0) / 6.0 * a + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * b
        - (t + 1.0) * t * (t - 2.0) / 2.0 * c
        + (t + 1.0) * t * (t - 1.0) / 6.0 * d
}

/// Shifts the profile so that U(0) = level, resampling on the same grid.
pub fn normalize_translation(profile: &WaveProfile, level: f64) -> Result<WaveProfile> {
    let u = &profile.u;
    let v = &u.values;
    let above: Vec<bool> = v.iter().map(|&x| x >= level).collect();
    let crossings: Vec<usize> = (0..v.len() - 1).filter(|&i| above[i] != above[i + 1]).collect();
    if crossings.len() != 1 {
        return Err(Error::Normalization(format!("{} crossings of level {level}", crossings.len())));
    }
    let i = crossings[0];
    let f = |x: f64| cubic_at(u, x, profile.kappa) - level;
    let (mut a, mut b) = (u.grid.x(i), u.grid.x(i + 1));
    let fa = f(a);
    if fa == 0.0 {
        b = a;
    }
    for _ in 0..200 {
        if b - a <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
        let m = 0.5 * (a + b);
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    let shift = 0.5 * (a + b);
    let shifted = Field::from_fn(u.grid, |x| cubic_at(u, x + shift, profile.kappa));
    let (vv, _) = signal(&shifted, profile.params.gamma, Some(profile.kappa))?;
    let mut out = profile.clone();
    out.left_limit = shifted.values[0];
    out.right_limit = shifted.values[shifted.len() - 1];
    out.monotonicity_violation = max_slope(&shifted);
    out.u = shifted;
    out.v = vv;
    Ok(out)
}
