//! Explicit super/sub-solutions and the residual of the frozen-signal operator
//!
//! ```text
//! A(W; u) = W'' + c W' - chi m W^{m-1} V' W' + W (1 - chi W^{m-1} V - (W^alpha - chi W^{m+gamma-1}))
//! ```
//!
//! with `V = Psi(u^gamma; 1, 1)`. Certificates sample u from the class
//! `0 <= u <= min{M, e^{-kappa x}}` and check the residual sign on a grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cauchy::pow;
use crate::elliptic::{solve_psi_with_derivative, TailSpec};
use crate::error::{domain, Result};
use crate::grid::{Field, Grid};
use crate::params::{
    barrier_constants, c_star, chi_star, classify_regime, d_small_for, default_kappa_tilde, kappa_of_speed, m_chi,
    speed_of_kappa, x_minus, x_plus, Params, RegimeTag,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierSpec {
    pub kappa: f64,
    pub kappa_tilde: f64,
    #[serde(rename = "M")]
    pub m_cap: f64,
    #[serde(rename = "D")]
    pub d_big: f64,
    #[serde(rename = "d")]
    pub d_small: f64,
}

impl BarrierSpec {
    /// kappa from c, kappa~ = 2 kappa when admissible, D = D_sub, d = d_sub.
    pub fn for_speed(p: &Params, c: f64, m_cap: f64) -> Result<Self> {
        let kappa = kappa_of_speed(c)?;
        let kt = default_kappa_tilde(p, kappa);
        let bc = barrier_constants(p, kappa, kt, m_cap)?;
        let spec = BarrierSpec { kappa, kappa_tilde: kt, m_cap, d_big: bc.d_sub, d_small: bc.d_small };
        spec.validate(p)?;
        Ok(spec)
    }

    pub fn validate(&self, p: &Params) -> Result<()> {
        let cap = ((1.0 + p.alpha) * self.kappa).min(p.m * self.kappa + 0.5).min(1.0);
        if !(self.kappa > 0.0 && self.kappa < self.kappa_tilde && self.kappa_tilde <= cap + 1e-14) {
            return domain(format!(
                "need 0 < kappa < kappa_tilde ≤ {cap} (got {}, {})",
                self.kappa, self.kappa_tilde
            ));
        }
        if self.m_cap < 1.0 || self.d_big <= 0.0 || self.d_small <= 0.0 {
            return domain("need M ≥ 1, D > 0, d > 0");
        }
        Ok(())
    }

    pub fn x_minus(&self) -> f64 {
        x_minus(self.kappa, self.kappa_tilde, self.d_big)
    }

    pub fn x_plus(&self) -> f64 {
        x_plus(self.kappa, self.kappa_tilde, self.d_big)
    }

    pub fn kink(&self) -> f64 {
        -self.m_cap.ln() / self.kappa
    }

    fn sub_raw(&self, x: f64) -> f64 {
        (-self.kappa * x).exp() - self.d_big * (-self.kappa_tilde * x).exp()
    }
}

pub fn eval_super(spec: &BarrierSpec, grid: Grid) -> Field {
    Field::from_fn(grid, |x| (-spec.kappa * x).exp().min(spec.m_cap))
}

pub fn eval_sub(spec: &BarrierSpec, grid: Grid, clipped: bool) -> Field {
    let xp = spec.x_plus();
    let top = spec.sub_raw(xp);
    Field::from_fn(grid, |x| if clipped && x <= xp { top } else { spec.sub_raw(x) })
}

fn is_integer(e: f64) -> bool {
    e == e.trunc()
}

/// Signal and its derivative for a density sampled on the grid; the right
/// tail continues u like e^{-kappa x} when kappa is known.
pub(crate) fn signal(u: &Field, gamma: f64, kappa: Option<f64>) -> Result<(Field, Field)> {
    let s = u.map(|x| pow(x, gamma));
    let tails = match kappa {
        Some(k) => TailSpec::front(&s.values, gamma * k),
        None => TailSpec::endpoint_constant(&s.values),
    };
    solve_psi_with_derivative(&s, 1.0, 1.0, tails)
}

#[inline]
fn pointwise(p: &Params, c: f64, w: f64, wp: f64, wpp: f64, v: f64, vp: f64) -> f64 {
    let wm1 = if p.m == 1.0 { 1.0 } else { pow(w, p.m - 1.0) };
    let reac = 1.0 - p.chi * wm1 * v - (pow(w, p.alpha) - p.chi * wm1 * pow(w, p.gamma));
    wpp + c * wp - p.chi * p.m * wm1 * vp * wp + w * reac
}

/// Residual at interior node i given W samples and the signal.
fn residual_node(p: &Params, c: f64, w: &[f64], h: f64, v: &[f64], vp: &[f64], i: usize) -> f64 {
    let wp = (w[i + 1] - w[i - 1]) / (2.0 * h);
    let wpp = (w[i + 1] - 2.0 * w[i] + w[i - 1]) / (h * h);
    pointwise(p, c, w[i], wp, wpp, v[i], vp[i])
}

/// Residual of A(W; u) on the interior nodes (first and last node dropped).
#[allow(non_snake_case)]
pub fn residual_A(W: &Field, u: &Field, params: &Params, c: f64) -> Result<Field> {
    W.require_same_grid(u)?;
    u.check_nonnegative()?;
    let p = params;
    let fractional = !is_integer(p.m - 1.0) || !is_integer(p.alpha) || !is_integer(p.m + p.gamma - 1.0);
    if fractional {
        if let Some(i) = W.values.iter().position(|&w| w < 0.0) {
            return domain(format!("W < 0 at x = {} with fractional exponents", W.grid.x(i)));
        }
    }
    let kappa = kappa_of_speed(c).ok();
    let (v, vp) = signal(u, p.gamma, kappa)?;
    let n = W.len();
    let h = W.grid.h;
    let vals = (1..n - 1).map(|i| residual_node(p, c, &W.values, h, &v.values, &vp.values, i)).collect();
    Field::new(W.grid.slice(1, n - 2)?, vals)
}

pub fn eps_disc(h: f64, w_scale: f64) -> f64 {
    1e-6 + 20.0 * h * h * w_scale
}

/// Smooth random field r(x) in (0,1): logistic squash of a few sinusoids.
#[derive(Debug, Clone)]
pub struct SmoothRandom {
    modes: Vec<(f64, f64, f64)>,
}

impl SmoothRandom {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes = (0..6)
            .map(|_| (rng.gen_range(0.3..1.2), rng.gen_range(0.05..1.5), rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        SmoothRandom { modes }
    }

    pub fn at(&self, x: f64) -> f64 {
        let s: f64 = self.modes.iter().map(|(a, f, ph)| a * (f * x + ph).sin()).sum();
        0.5 * (1.0 + s.tanh())
    }
}

/// u = min{M, e^{-kappa x}} * (0.2 + 0.8 r(x)); `scale` multiplies the
/// exponential (scale = M gives the wider class of the relaxed search).
pub fn random_envelope(grid: Grid, kappa: f64, m_cap: f64, scale: f64, seed: u64) -> Field {
    let r = SmoothRandom::new(seed);
    Field::from_fn(grid, |x| (scale * (-kappa * x).exp()).min(m_cap) * (0.2 + 0.8 * r.at(x)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub name: String,
    pub applicable: bool,
    pub pass: bool,
    /// signed margin: max residual for super-solutions, min residual for sub-solutions
    pub worst_residual: f64,
    pub worst_x: f64,
    pub eps_disc: f64,
    pub samples: usize,
    pub note: String,
}

impl Certificate {
    fn not_applicable(name: &str, note: String) -> Self {
        Certificate {
            name: name.into(),
            applicable: false,
            pass: true,
            worst_residual: f64::NAN,
            worst_x: f64::NAN,
            eps_disc: f64::NAN,
            samples: 0,
            note,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Sign {
    /// residual <= eps
    Super,
    /// residual >= -eps
    Sub,
}

struct Scan {
    worst: f64,
    worst_x: f64,
}

/// Scans nodes with x in (lo, hi) whose stencil stays in the grid.
#[allow(clippy::too_many_arguments)]
fn scan(
    p: &Params,
    c: f64,
    w: &[f64],
    grid: Grid,
    v: &[f64],
    vp: &[f64],
    lo: f64,
    hi: f64,
    sign: Sign,
    acc: &mut Scan,
) {
    for i in 1..grid.n - 1 {
        let x = grid.x(i);
        if x <= lo || x >= hi {
            continue;
        }
        let r = residual_node(p, c, w, grid.h, v, vp, i);
        let worse = match sign {
            Sign::Super => r > acc.worst,
            Sign::Sub => r < acc.worst,
        };
        if worse {
            acc.worst = r;
            acc.worst_x = x;
        }
    }
}

fn check(sign: Sign, worst: f64, eps: f64) -> bool {
    match sign {
        Sign::Super => worst <= eps,
        Sign::Sub => worst >= -eps,
    }
}

#[allow(clippy::too_many_arguments)]
fn certify_generic(
    name: &str,
    p: &Params,
    c: f64,
    w: &Field,
    region: (f64, f64),
    sign: Sign,
    env: (f64, f64, f64),
    samples: usize,
    seed: u64,
) -> Result<Certificate> {
    let grid = w.grid;
    let (kappa, m_cap, scale) = env;
    let w_scale = w
        .values
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let x = grid.x(*i);
            x > region.0 && x < region.1
        })
        .fold(0.0f64, |a, (_, v)| a.max(v.abs()));
    let eps = eps_disc(grid.h, w_scale);
    let mut acc = Scan {
        worst: match sign {
            Sign::Super => f64::NEG_INFINITY,
            Sign::Sub => f64::INFINITY,
        },
        worst_x: f64::NAN,
    };
    for k in 0..samples {
        let u = random_envelope(grid, kappa, m_cap, scale, seed.wrapping_add(k as u64));
        let (v, vp) = signal(&u, p.gamma, Some(kappa))?;
        scan(p, c, &w.values, grid, &v.values, &vp.values, region.0, region.1, sign, &mut acc);
    }
    Ok(Certificate {
        name: name.into(),
        applicable: true,
        pass: check(sign, acc.worst, eps),
        worst_residual: acc.worst,
        worst_x: acc.worst_x,
        eps_disc: eps,
        samples,
        note: String::new(),
    })
}

/// Which super-solution hypothesis set (if any) holds for (p, kappa, M).
fn super_hypothesis(p: &Params, kappa: f64, m_cap: f64) -> std::result::Result<&'static str, String> {
    let c = speed_of_kappa(kappa);
    if p.chi <= 0.0 && p.alpha <= p.m + p.gamma - 1.0 + 1e-12 {
        let mb = 1.0 / (kappa * (p.gamma.powi(2) * (1.0 + p.chi.abs()) + p.m * p.gamma * p.chi.abs()).sqrt());
        if c > c_star(p) && m_cap >= 1.0 && m_cap <= mb {
            return Ok("i");
        }
        return Err(format!("condition (i) needs c > c_star and 1 ≤ M ≤ {mb}"));
    }
    if (p.alpha - (p.m + p.gamma - 1.0)).abs() < 1e-12 && p.chi >= 0.0 && p.chi < chi_star(p.m, p.alpha, p.gamma) {
        let mc = m_chi(p).unwrap_or(f64::INFINITY);
        if m_cap >= mc {
            return Ok("ii");
        }
        return Err(format!("condition (ii) needs M ≥ M_chi = {mc}"));
    }
    Err("neither super-solution hypothesis set holds".into())
}

/// W = e^{-kappa x} on x ≥ -ln M / kappa (three nodes past the kink skipped).
pub fn certify_super(p: &Params, c: f64, m_cap: f64, grid: Grid, samples: usize, seed: u64) -> Result<Certificate> {
    let kappa = kappa_of_speed(c)?;
    if let Err(e) = super_hypothesis(p, kappa, m_cap) {
        return Ok(Certificate::not_applicable("super_exponential", e));
    }
    let spec = BarrierSpec { kappa, kappa_tilde: 1.0, m_cap, d_big: 1.0, d_small: 1.0 };
    let w = eval_super(&spec, grid);
    let lo = spec.kink() + 3.5 * grid.h;
    certify_generic("super_exponential", p, c, &w, (lo, f64::INFINITY), Sign::Super, (kappa, m_cap, 1.0), samples, seed)
}

/// W = M everywhere.
pub fn certify_constant_super(p: &Params, c: f64, m_cap: f64, grid: Grid, samples: usize, seed: u64) -> Result<Certificate> {
    let kappa = kappa_of_speed(c)?;
    if let Err(e) = super_hypothesis(p, kappa, m_cap) {
        return Ok(Certificate::not_applicable("super_constant", e));
    }
    let w = Field::from_fn(grid, |_| m_cap);
    certify_generic(
        "super_constant",
        p,
        c,
        &w,
        (f64::NEG_INFINITY, f64::INFINITY),
        Sign::Super,
        (kappa, m_cap, 1.0),
        samples,
        seed,
    )
}

/// W = e^{-kappa x} - D e^{-kappa~ x} on x > x_minus.
pub fn certify_sub(p: &Params, c: f64, spec: &BarrierSpec, grid: Grid, samples: usize, seed: u64) -> Result<Certificate> {
    certify_sub_env(p, c, spec, grid, samples, seed, 1.0)
}

fn certify_sub_env(
    p: &Params,
    c: f64,
    spec: &BarrierSpec,
    grid: Grid,
    samples: usize,
    seed: u64,
    scale: f64,
) -> Result<Certificate> {
    spec.validate(p)?;
    let w = eval_sub(spec, grid, false);
    let lo = spec.x_minus();
    let env = (spec.kappa, spec.m_cap, scale);
    certify_generic("sub_exponential", p, c, &w, (lo, f64::INFINITY), Sign::Sub, env, samples, seed)
}

/// W = d everywhere.
pub fn certify_constant_sub(p: &Params, c: f64, spec: &BarrierSpec, grid: Grid, samples: usize, seed: u64) -> Result<Certificate> {
    certify_constant_sub_env(p, c, spec, grid, samples, seed, 1.0)
}

fn certify_constant_sub_env(
    p: &Params,
    c: f64,
    spec: &BarrierSpec,
    grid: Grid,
    samples: usize,
    seed: u64,
    scale: f64,
) -> Result<Certificate> {
    spec.validate(p)?;
    let w = Field::from_fn(grid, |_| spec.d_small);
    let env = (spec.kappa, spec.m_cap, scale);
    certify_generic(
        "sub_constant",
        p,
        c,
        &w,
        (f64::NEG_INFINITY, f64::INFINITY),
        Sign::Sub,
        env,
        samples,
        seed,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertReport {
    pub params: Params,
    pub c: f64,
    pub regime: RegimeTag,
    pub spec: Option<BarrierSpec>,
    pub certificates: Vec<Certificate>,
    pub pass: bool,
    pub worst_residual: f64,
    pub worst_x: f64,
}

/// All four certificates for (p, c) with M = 1 (chi ≤ 0) or M_chi.
pub fn certify_all(p: &Params, c: f64, grid: Grid, samples: usize, seed: u64) -> Result<CertReport> {
    let m_cap = m_chi(p)?;
    let mut certs = vec![
        certify_super(p, c, m_cap, grid, samples, seed)?,
        certify_constant_super(p, c, m_cap, grid, samples, seed)?,
    ];
    let spec = BarrierSpec::for_speed(p, c, m_cap).ok();
    match &spec {
        Some(s) => {
            certs.push(certify_sub(p, c, s, grid, samples, seed)?);
            certs.push(certify_constant_sub(p, c, s, grid, samples, seed)?);
        }
        None => certs.push(Certificate::not_applicable("sub", "sub-solution constants undefined at this speed".into())),
    }
    let pass = certs.iter().all(|c| c.pass);
    // worst over applicable certificates, measured as violation relative to eps
    let mut worst = (f64::NEG_INFINITY, f64::NAN, f64::NAN);
    for cert in certs.iter().filter(|c| c.applicable) {
        let excess = if cert.name.starts_with("super") { cert.worst_residual } else { -cert.worst_residual };
        if excess - cert.eps_disc > worst.0 {
            worst = (excess - cert.eps_disc, cert.worst_residual, cert.worst_x);
        }
    }
    Ok(CertReport {
        params: *p,
        c,
        regime: classify_regime(p),
        spec,
        certificates: certs,
        pass,
        worst_residual: worst.1,
        worst_x: worst.2,
    })
}

/// Successive-difference order of the discrete super-solution residual:
/// returns (e(h), e(h/2), ratio) with e(h) = max |R_h - R_{h/2}| on common
/// nodes of (lo, hi) for one fixed random u.
pub fn residual_order(p: &Params, c: f64, m_cap: f64, bounds: (f64, f64), h: f64, region: (f64, f64), seed: u64) -> Result<(f64, f64, f64)> {
    let kappa = kappa_of_speed(c)?;
    let spec = BarrierSpec { kappa, kappa_tilde: 1.0, m_cap, d_big: 1.0, d_small: 1.0 };
    let mut res = Vec::new();
    for k in 0..3 {
        let hk = h / f64::from(1u32 << k);
        let grid = Grid::from_bounds(bounds.0, bounds.1, hk)?;
        let u = random_envelope(grid, kappa, m_cap, 1.0, seed);
        let w = eval_super(&spec, grid);
        let (v, vp) = signal(&u, p.gamma, Some(kappa))?;
        // sample on the coarse nodes
        let stride = 1usize << k;
        let coarse = Grid::from_bounds(bounds.0, bounds.1, h)?;
        let vals: Vec<(f64, f64)> = (1..coarse.n - 1)
            .filter(|&j| coarse.x(j) > region.0 && coarse.x(j) < region.1)
            .map(|j| {
                let i = j * stride;
                (coarse.x(j), residual_node(p, c, &w.values, hk, &v.values, &vp.values, i))
            })
            .collect();
        res.push(vals);
    }
    let diff = |a: &[(f64, f64)], b: &[(f64, f64)]| a.iter().zip(b).map(|(x, y)| (x.1 - y.1).abs()).fold(0.0, f64::max);
    let e1 = diff(&res[0], &res[1]);
    let e2 = diff(&res[1], &res[2]);
    Ok((e1, e2, e1 / e2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelaxedBarrier {
    #[serde(rename = "D")]
    pub d_big: f64,
    #[serde(rename = "d")]
    pub d_small: f64,
    pub evaluations: usize,
}

/// Numerical search for (D, d) making the sub-solution certificates pass for
/// the wider class 0 ≤ u ≤ min{M, M e^{-kappa x}}: double D (halve d) until a
/// pass, then bisect 20 times.
pub fn relaxed_sub_search(p: &Params, c: f64, m_cap: f64, grid: Grid, samples: usize, seed: u64) -> Result<RelaxedBarrier> {
    let kappa = kappa_of_speed(c)?;
    let kt = default_kappa_tilde(p, kappa);
    let mut spec = BarrierSpec { kappa, kappa_tilde: kt, m_cap, d_big: 1.0, d_small: 1.0 / (1.0 + p.chi.abs()) };
    let mut evals = 0;
    let pass_d = |spec: &BarrierSpec, evals: &mut usize| -> Result<bool> {
        *evals += 1;
        Ok(certify_sub_env(p, c, spec, grid, samples, seed, m_cap)?.pass)
    };
    let mut tries = 0;
    while !pass_d(&spec, &mut evals)? {
        spec.d_big *= 2.0;
        tries += 1;
        if tries > 60 || spec.x_minus() > grid.right() - 10.0 {
            return domain("relaxed search: no D found within the grid");
        }
    }
    let (mut lo, mut hi) = (if tries == 0 { 0.0 } else { spec.d_big / 2.0 }, spec.d_big);
    for _ in 0..20 {
        let mid = 0.5 * (lo + hi);
        if mid <= 0.0 {
            break;
        }
        spec.d_big = mid;
        if pass_d(&spec, &mut evals)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    spec.d_big = hi;
    spec.d_small = spec.d_small.min(d_small_for(p, kappa, kt, hi));
    let pass_c = |spec: &BarrierSpec, evals: &mut usize| -> Result<bool> {
        *evals += 1;
        Ok(certify_constant_sub_env(p, c, spec, grid, samples, seed, m_cap)?.pass)
    };
    let mut halvings = 0;
    while !pass_c(&spec, &mut evals)? {
        spec.d_small /= 2.0;
        halvings += 1;
        if halvings > 60 {
            return domain("relaxed search: no d found");
        }
    }
    if halvings > 0 {
        let (mut lo, mut hi) = (spec.d_small, 2.0 * spec.d_small);
        for _ in 0..20 {
            let mid = 0.5 * (lo + hi);
            spec.d_small = mid;
            if pass_c(&spec, &mut evals)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        spec.d_small = lo;
    }
    Ok(RelaxedBarrier { d_big: spec.d_big, d_small: spec.d_small, evaluations: evals })
}
