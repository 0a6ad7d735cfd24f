//! IMEX time stepping for the density equation in the lab or moving frame.
//!
//! Per step: diffusion and the advective term `a u_x` (velocity
//! `a = c - chi m u^{m-1} v_x`, lagged, first-order upwind) are implicit;
//! the logistic and signal source terms are explicit. The implicit matrix is
//! an M-matrix, so the step is monotone for dt * |reaction'| small.

use crate::elliptic::{KernelSolver, TailSpec};
use crate::error::{domain, Error, Result};
use crate::grid::{Field, Grid};
use crate::params::{kappa_of_speed, m_chi, validate_params, Params};
use crate::tridiag;

#[inline]
pub fn pow(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        x
    } else if e == 0.0 {
        1.0
    } else if e == 2.0 {
        x * x
    } else if e == e.trunc() && e.abs() < 64.0 {
        x.powi(e as i32)
    } else {
        x.powf(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dt {
    Fixed(f64),
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeftBc {
    NeumannZero,
    Dirichlet(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RightBc {
    NeumannZero,
    /// ghost value u_n = e^{-kappa h} u_{n-1}
    Robin(f64),
    Dirichlet(f64),
}

/// Closure of the signal integral outside the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignalTails {
    EndpointConstant,
    /// constant plateau on the left, exp(-rate x) on the right
    Front { rate: f64 },
}

impl SignalTails {
    pub fn spec(&self, s: &[f64]) -> TailSpec {
        match *self {
            SignalTails::EndpointConstant => TailSpec::endpoint_constant(s),
            SignalTails::Front { rate } => TailSpec::front(s, rate),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: Params,
    pub grid: Grid,
    pub frame_speed: f64,
    pub dt: Dt,
    pub t_end: f64,
    pub bc_left: LeftBc,
    pub bc_right: RightBc,
    pub output_every: f64,
    pub clamp_negative: bool,
    pub signal_tails: SignalTails,
    /// When set, the diffusion coefficient is tuned so that e^{-kappa x} is an
    /// exact discrete solution of the linearization at u = 0.
    pub fitted_decay: Option<f64>,
    /// Upper cap for automatic time steps.
    pub dt_max: f64,
}

impl SimConfig {
    pub fn lab(params: Params, grid: Grid, t_end: f64) -> Self {
        SimConfig {
            params,
            grid,
            frame_speed: 0.0,
            dt: Dt::Auto,
            t_end,
            bc_left: LeftBc::NeumannZero,
            bc_right: RightBc::NeumannZero,
            output_every: 1.0,
            clamp_negative: true,
            signal_tails: SignalTails::EndpointConstant,
            fitted_decay: None,
            dt_max: 0.1,
        }
    }

    pub fn moving(params: Params, grid: Grid, c: f64, t_end: f64) -> Result<Self> {
        let kappa = kappa_of_speed(c)?;
        Ok(SimConfig {
            frame_speed: c,
            bc_right: RightBc::Robin(kappa),
            signal_tails: SignalTails::Front { rate: params.gamma * kappa },
            fitted_decay: Some(kappa),
            ..SimConfig::lab(params, grid, t_end)
        })
    }

    pub fn validate(&self) -> Result<()> {
        validate_params(self.params)?;
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return domain(format!("t_end must be positive (got {})", self.t_end));
        }
        if !(self.output_every > 0.0) {
            return domain(format!("output_every must be positive (got {})", self.output_every));
        }
        if let Dt::Fixed(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return domain(format!("dt must be positive (got {dt})"));
            }
        }
        if !self.frame_speed.is_finite() {
            return domain("frame speed non-finite");
        }
        Ok(())
    }

    /// Diffusion coefficient used by the scheme.
    pub fn diffusion(&self) -> f64 {
        match self.fitted_decay {
            Some(kappa) if self.frame_speed > 0.0 => {
                let h = self.grid.h;
                let q = kappa * h;
                let denom = 2.0 * q.cosh() - 2.0;
                (self.frame_speed * (-(-q).exp_m1()) / h - 1.0) * h * h / denom
            }
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: Field,
    pub v: Field,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Monitors {
    pub level: f64,
    pub times: Vec<f64>,
    pub sup_u: Vec<f64>,
    pub inf_u: Vec<f64>,
    pub front_x: Vec<f64>,
    pub clamp_count: u64,
    pub node_steps: u64,
    pub warnings: Vec<String>,
}

impl Monitors {
    fn record(&mut self, s: &State) {
        self.times.push(s.t);
        self.sup_u.push(s.u.max());
        self.inf_u.push(s.u.min());
        self.front_x.push(crate::speed::front_position(&s.u, self.level).unwrap_or(f64::NAN));
    }
}

/// The signal either follows u (coupled system) or is held fixed.
#[derive(Debug, Clone)]
enum Signal {
    Coupled,
    Frozen { v: Vec<f64>, vx: Vec<f64> },
}

/// Owns the workspace of one run.
#[derive(Debug, Clone)]
pub struct Stepper {
    cfg: SimConfig,
    kernel: KernelSolver,
    eps: f64,
    signal: Signal,
    vx: Vec<f64>,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
    src: Vec<f64>,
    pub clamp_count: u64,
    pub node_steps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub dt: f64,
    /// max |u^{n+1} - u^n|
    pub max_change: f64,
}

impl Stepper {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.grid.n;
        let eps = cfg.diffusion();
        if !(eps > 0.0) {
            return domain(format!("grid too coarse for frame speed {} (fitted diffusion {eps})", cfg.frame_speed));
        }
        Ok(Stepper {
            kernel: KernelSolver::new(cfg.grid.h, 1.0, 1.0)?,
            eps,
            signal: Signal::Coupled,
            vx: vec![0.0; n],
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
            rhs: vec![0.0; n],
            scratch: vec![0.0; n],
            src: vec![0.0; n],
            clamp_count: 0,
            node_steps: 0,
            cfg,
        })
    }

    /// Same scheme with the signal frozen at (v, v_x).
    pub fn frozen(cfg: SimConfig, v: &Field, vx: &Field) -> Result<Self> {
        let mut s = Stepper::new(cfg)?;
        s.signal = Signal::Frozen { v: v.values.clone(), vx: vx.values.clone() };
        Ok(s)
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn diffusion(&self) -> f64 {
        self.eps
    }

    /// Builds a state from u, computing the signal.
    pub fn init(&mut self, t: f64, u: Field) -> Result<State> {
        if !u.grid.same_as(&self.cfg.grid) {
            return domain("initial data not on the configured grid");
        }
        Field::new(u.grid, u.values.clone())?;
        u.check_nonnegative()?;
        let mut v = vec![0.0; u.len()];
        self.refresh_signal(&u.values, &mut v)?;
        Ok(State { t, v: Field { grid: u.grid, values: v }, u })
    }

    fn refresh_signal(&mut self, u: &[f64], v: &mut [f64]) -> Result<()> {
        match &self.signal {
            Signal::Coupled => {
                let g = self.cfg.params.gamma;
                for (s, &x) in self.src.iter_mut().zip(u) {
                    *s = pow(x, g);
                }
                let tails = self.cfg.signal_tails.spec(&self.src);
                self.kernel.apply(&self.src, &tails, v, Some(&mut self.vx), &mut self.scratch)
            }
            Signal::Frozen { v: fv, vx } => {
                v.copy_from_slice(fv);
                self.vx.copy_from_slice(vx);
                Ok(())
            }
        }
    }

    /// Velocity and source at the current state; returns (Vmax, Rmax).
    fn coefficients(&mut self, u: &[f64], v: &[f64]) -> (f64, f64) {
        let p = self.cfg.params;
        let (chi, m, al, g) = (p.chi, p.m, p.alpha, p.gamma);
        let c = self.cfg.frame_speed;
        let mut vmax: f64 = 0.0;
        let mut rmax: f64 = 0.0;
        for i in 0..u.len() {
            let ui = u[i];
            let um1 = if m == 1.0 { 1.0 } else { pow(ui, m - 1.0) };
            let ua = pow(ui, al);
            let ug = pow(ui, g);
            let a = c - chi * m * um1 * self.vx[i];
            // velocity parked in `lower` until assembly
            self.lower[i] = a;
            let um = um1 * ui;
            let s = ui * (1.0 - ua) - chi * um * (v[i] - ug);
            self.src[i] = s;
            vmax = vmax.max(a.abs());
            let jac = 1.0 - (1.0 + al) * ua - chi * m * um1 * v[i] + chi * (m + g) * um1 * ug;
            rmax = rmax.max(jac.abs());
        }
        (vmax, rmax)
    }

    fn choose_dt(&self, vmax: f64, rmax: f64) -> f64 {
        match self.cfg.dt {
            Dt::Fixed(dt) => dt,
            Dt::Auto => {
                let mut dt = self.cfg.dt_max;
                if vmax > 0.0 {
                    dt = dt.min(0.5 * self.cfg.grid.h / vmax);
                }
                if rmax > 0.0 {
                    dt = dt.min(0.1 / rmax);
                }
                dt
            }
        }
    }

    /// Advances one step of at most `dt_limit`.
    pub fn step(&mut self, state: &mut State, dt_limit: f64) -> Result<StepInfo> {
        let n = self.cfg.grid.n;
        let h = self.cfg.grid.h;
        let (vmax, rmax) = self.coefficients(&state.u.values, &state.v.values);
        let dt_rule = self.choose_dt(vmax, rmax);
        if !(dt_rule >= 1e-10) {
            return Err(Error::Stiffness { t: state.t, dt: dt_rule });
        }
        let dt = dt_rule.min(dt_limit);
        let d = self.eps / (h * h);
        let u = &state.u.values;
        for i in 0..n {
            let a = self.lower[i];
            let ap = a.max(0.0) / h;
            let am = (-a).max(0.0) / h;
            let cu = -dt * (d + ap); // coefficient of u_{i+1}
            let cl = -dt * (d + am); // coefficient of u_{i-1}
            self.rhs[i] = u[i] + dt * self.src[i];
            self.diag[i] = 1.0 - cu - cl;
            self.upper[i] = cu;
            self.lower[i] = cl;
        }
        match self.cfg.bc_left {
            LeftBc::NeumannZero => {
                self.upper[0] += self.lower[0];
                self.lower[0] = 0.0;
            }
            LeftBc::Dirichlet(val) => {
                self.diag[0] = 1.0;
                self.upper[0] = 0.0;
                self.lower[0] = 0.0;
                self.rhs[0] = val;
            }
        }
        let last = n - 1;
        match self.cfg.bc_right {
            RightBc::NeumannZero => {
                self.lower[last] += self.upper[last];
                self.upper[last] = 0.0;
            }
            RightBc::Robin(kappa) => {
                self.diag[last] += self.upper[last] * (-kappa * h).exp();
                self.upper[last] = 0.0;
            }
            RightBc::Dirichlet(val) => {
                self.diag[last] = 1.0;
                self.upper[last] = 0.0;
                self.lower[last] = 0.0;
                self.rhs[last] = val;
            }
        }
        tridiag::solve(&self.lower, &self.diag, &self.upper, &mut self.rhs, &mut self.scratch)?;
        let t_new = state.t + dt;
        let mut max_change: f64 = 0.0;
        for i in 0..n {
            let mut x = self.rhs[i];
            if !x.is_finite() {
                return Err(Error::Blowup { t: t_new, x: self.cfg.grid.x(i) });
            }
            if x < 0.0 && self.cfg.clamp_negative {
                x = 0.0;
                self.clamp_count += 1;
            }
            max_change = max_change.max((x - state.u.values[i]).abs());
            state.u.values[i] = x;
        }
        self.node_steps += n as u64;
        let mut v = std::mem::take(&mut state.v.values);
        self.refresh_signal(&state.u.values, &mut v)?;
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::Blowup { t: t_new, x: self.cfg.grid.x(i) });
        }
        state.v.values = v;
        state.t = t_new;
        Ok(StepInfo { dt, max_change })
    }

    /// Steps until `t_target` (within 1e-12).
    pub fn advance_to(&mut self, state: &mut State, t_target: f64) -> Result<()> {
        while state.t < t_target - 1e-12 {
            self.step(state, t_target - state.t)?;
        }
        Ok(())
    }

    /// Current signal derivative (valid after `init` or `step`).
    pub fn signal_derivative(&self) -> &[f64] {
        &self.vx
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: State,
    pub monitors: Monitors,
    pub snapshots: Vec<State>,
}

/// Integrates to t_end calling `observe` at t = 0, every output interval and t_end.
pub fn run_with(config: &SimConfig, u0: Field, mut observe: impl FnMut(&State) -> Result<()>) -> Result<(State, Monitors)> {
    let mut stepper = Stepper::new(config.clone())?;
    let mut state = stepper.init(0.0, u0)?;
    let mut mon = Monitors { level: 0.5, ..Default::default() };
    mon.record(&state);
    observe(&state)?;
    let mut k = 1u64;
    loop {
        let target = (k as f64 * config.output_every).min(config.t_end);
        stepper.advance_to(&mut state, target)?;
        mon.record(&state);
        observe(&state)?;
        if target >= config.t_end {
            break;
        }
        k += 1;
    }
    mon.clamp_count = stepper.clamp_count;
    mon.node_steps = stepper.node_steps;
    if mon.clamp_count as f64 > 1e-3 * mon.node_steps as f64 {
        mon.warnings.push(format!(
            "negative values clamped in {} of {} node-steps",
            mon.clamp_count, mon.node_steps
        ));
    }
    Ok((state, mon))
}

pub fn run(config: &SimConfig, u0: Field) -> Result<RunOutput> {
    let mut snaps = Vec::new();
    let (state, monitors) = run_with(config, u0, |s| {
        snaps.push(s.clone());
        Ok(())
    })?;
    Ok(RunOutput { state, monitors, snapshots: snaps })
}

pub fn step(state: &State, config: &SimConfig) -> Result<State> {
    let mut stepper = Stepper::new(config.clone())?;
    let mut s = stepper.init(state.t, state.u.clone())?;
    stepper.step(&mut s, f64::INFINITY)?;
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundReport {
    NotApplicable(String),
    Checked(Vec<String>),
}

impl BoundReport {
    pub fn violations(&self) -> &[String] {
        match self {
            BoundReport::Checked(v) => v,
            BoundReport::NotApplicable(_) => &[],
        }
    }
}

/// Checks the invariant upper bounds against the current state.
///
/// chi <= 0: u <= max{1, sup u0}. For 0 < chi < min{1/2, chi*} with
/// alpha = m + gamma - 1 the comparison argument gives u <= max{M_chi, sup u0}.
pub fn monitor_bounds(state: &State, params: &Params, sup_u0: f64) -> BoundReport {
    use crate::params::{classify_regime, RegimeTag};
    let slack = 1e-6;
    let sup = state.u.max();
    let mut out = Vec::new();
    if params.chi <= 0.0 {
        let b = 1f64.max(sup_u0);
        if sup > b + slack {
            out.push(format!("sup exceeds max{{1,sup u0}}: {sup} > {b} at t = {}", state.t));
        }
        return BoundReport::Checked(out);
    }
    match classify_regime(params) {
        RegimeTag::PosChi_AlphaEQ => {
            let mc = m_chi(params).unwrap_or(f64::INFINITY);
            let b = mc.max(sup_u0);
            if sup > b + slack {
                out.push(format!("sup exceeds max{{M_chi,sup u0}}: {sup} > {b} at t = {}", state.t));
            }
            BoundReport::Checked(out)
        }
        RegimeTag::PosChi_AlphaGT => {
            BoundReport::NotApplicable(format!("no explicit bound for chi > 0, alpha > m+gamma-1 (sup u = {sup})"))
        }
        _ => BoundReport::NotApplicable(format!("chi = {} outside the tracked regimes", params.chi)),
    }
}
