//! Weighted-L2 stability runs, a-priori profile estimates and uniqueness checks.

use serde::Serialize;

use crate::barriers::signal;
use crate::cauchy::{pow, Dt, SimConfig, Stepper};
use crate::elliptic::{solve_psi_with_derivative, TailSpec};
use crate::error::{domain, Result};
use crate::grid::Field;
use crate::params::{c_star_star_value, m_chi, predicted_lambda, profile_bounds, Params};
use crate::wave::{reaction_bound, WaveProfile};

fn trapezoid(h: f64, f: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = f.collect();
    let n = v.len();
    if n < 2 {
        return 0.0;
    }
    h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[n - 1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedNorm {
    pub value: f64,
    /// integrand at the right end exceeds 1e-12 of its maximum
    pub truncated: bool,
}

/// Trapezoid value of int e^{2 eta x} (u - ustar)^2.
pub fn weighted_norm(u: &Field, ustar: &Field, eta: f64) -> Result<WeightedNorm> {
    u.require_same_grid(ustar)?;
    let g = u.grid;
    let f: Vec<f64> = (0..g.n).map(|i| (2.0 * eta * g.x(i)).exp() * (u.values[i] - ustar.values[i]).powi(2)).collect();
    let max = f.iter().fold(0.0f64, |a, &b| a.max(b));
    let truncated = max > 0.0 && f[g.n - 1] >= 1e-12 * max;
    Ok(WeightedNorm { value: trapezoid(g.h, f.into_iter()), truncated })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbSpec {
    pub eta: f64,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl PerturbSpec {
    /// amplitude * exp(-((x - center)/width)^2), cut to zero beyond 8 widths.
    pub fn bump(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.width;
        if z.abs() > 8.0 {
            0.0
        } else {
            self.amplitude * (-z * z).exp()
        }
    }

    pub fn validate(&self, kappa: f64, chi: f64) -> Result<()> {
        let cap = 1.0 / (1.0 + chi.abs().powf(crate::params::SIGMA));
        if !(self.eta > kappa && self.eta < cap) {
            return domain(format!("eta = {} outside ({kappa}, {cap})", self.eta));
        }
        if !(self.width > 0.0) || !self.amplitude.is_finite() || !self.center.is_finite() {
            return domain("perturbation needs width > 0 and finite amplitude/center");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    /// c ≤ c**: decay is not covered, outcome recorded only
    Exploratory,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRecord {
    pub times: Vec<f64>,
    #[serde(rename = "W")]
    pub w: Vec<f64>,
    pub supdiff: Vec<f64>,
    pub lambda_pred: f64,
    pub eta: f64,
    pub c: f64,
    pub c_star_star: f64,
    pub verdict: Verdict,
    pub reasons: Vec<String>,
    pub warnings: Vec<String>,
}

impl DecayRecord {
    /// W(t)/W(0) at the recorded time closest to t.
    pub fn ratio_at(&self, t: f64) -> f64 {
        let i = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.w[i] / self.w[0]
    }
}

pub const DECAY_FACTOR: f64 = 1e-4;
pub const SLACK: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityOptions {
    pub t_end: f64,
    pub record_every: f64,
    /// time after which the envelope W(0) SLACK e^{2 lambda t} is enforced
    pub envelope_from: f64,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        StabilityOptions { t_end: 10.0, record_every: 0.1, envelope_from: 1.0 }
    }
}

/// Right end of the stability grid: the weight e^{2 eta x} times roundoff in
/// the tail (~1e-16 e^{-kappa x}) must stay far below the measured decay.
pub fn stability_right_end(eta: f64, kappa: f64) -> f64 {
    (20.0 / (eta - kappa)).max(20.0)
}

/// Evolves u0 = U* + bump in the moving frame alongside the unperturbed
/// evolution of U* under the same scheme and time steps. W(t) is the weighted
/// norm of their difference, which cancels the residual drift of the discrete
/// profile; supdiff is sup|u - U*|.
///
/// PASS iff W(t_end) ≤ 1e-4 W(0), W(t) ≤ 10 W(0) e^{2 lambda t} for t ≥ 1 and
/// sup|u - U*| < 1e-3 at t_end.
pub fn run_stability(profile: &WaveProfile, spec: &PerturbSpec, opts: &StabilityOptions) -> Result<DecayRecord> {
    let p = profile.params;
    let c = profile.c;
    spec.validate(profile.kappa, p.chi)?;
    if !(opts.t_end > 0.0 && opts.record_every > 0.0) {
        return domain("t_end and record_every must be positive");
    }
    let full = profile.u.grid;
    let right = stability_right_end(spec.eta, profile.kappa).min(full.right());
    let grid = full.slice(0, full.nearest(right))?;
    let ustar = Field::new(grid, profile.u.values[..grid.n].to_vec())?;
    let u0 = Field::new(grid, (0..grid.n).map(|i| ustar.values[i] + spec.bump(grid.x(i))).collect())?;
    if u0.min() < 0.0 {
        return domain("perturbed data U* + bump is negative somewhere");
    }
    let css = c_star_star_value(&p).unwrap_or(f64::NAN);
    let lambda = if c > css { predicted_lambda(&p, c, spec.eta).map(|l| l.lambda).ok() } else { None };
    let dt = (0.1 / reaction_bound(&p, u0.max().max(m_chi(&p).unwrap_or(1.0)))).min(0.025);
    let mut cfg = SimConfig::moving(p, grid, c, opts.t_end)?;
    cfg.dt = Dt::Fixed(dt);
    let mut pert = Stepper::new(cfg.clone())?;
    let mut base = Stepper::new(cfg)?;
    let mut sp = pert.init(0.0, u0)?;
    let mut sb = base.init(0.0, ustar.clone())?;
    let mut rec = DecayRecord {
        times: Vec::new(),
        w: Vec::new(),
        supdiff: Vec::new(),
        lambda_pred: lambda.unwrap_or(f64::NAN),
        eta: spec.eta,
        c,
        c_star_star: css,
        verdict: Verdict::Exploratory,
        reasons: Vec::new(),
        warnings: Vec::new(),
    };
    let mut truncated_at = None;
    let mut k = 0u64;
    loop {
        let t = (k as f64 * opts.record_every).min(opts.t_end);
        pert.advance_to(&mut sp, t)?;
        base.advance_to(&mut sb, t)?;
        let wn = weighted_norm(&sp.u, &sb.u, spec.eta)?;
        if wn.truncated && truncated_at.is_none() {
            truncated_at = Some(t);
        }
        rec.times.push(t);
        rec.w.push(wn.value);
        rec.supdiff.push(sp.u.sup_diff(&ustar));
        if t >= opts.t_end {
            break;
        }
        k += 1;
    }
    if let Some(t) = truncated_at {
        rec.warnings.push(format!("weighted integrand not negligible at the right end from t = {t}"));
    }
    if pert.clamp_count > 0 {
        rec.warnings.push(format!("negative values clamped {} times", pert.clamp_count));
    }
    let Some(lam) = lambda else {
        rec.reasons.push(format!("c = {c} ≤ c** = {css}: no decay prediction"));
        return Ok(rec);
    };
    let w0 = rec.w[0];
    let n = rec.w.len();
    if rec.w[n - 1] > DECAY_FACTOR * w0 {
        rec.reasons.push(format!("W(t_end)/W(0) = {:e} > {DECAY_FACTOR:e}", rec.w[n - 1] / w0));
    }
    for (t, w) in rec.times.iter().zip(&rec.w) {
        if *t >= opts.envelope_from && *w > SLACK * w0 * (2.0 * lam * t).exp() {
            rec.reasons.push(format!("W({t}) = {w:e} above {SLACK} W(0) e^(2 lambda t)"));
            break;
        }
    }
    if rec.supdiff[n - 1] >= 1e-3 {
        rec.reasons.push(format!("sup|u - U*| = {:e} at t_end", rec.supdiff[n - 1]));
    }
    rec.verdict = if rec.reasons.is_empty() { Verdict::Pass } else { Verdict::Fail };
    Ok(rec)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AprioriCheck {
    pub name: String,
    pub applicable: bool,
    pub pass: bool,
    /// largest value of (measured - bound); ≤ slack when passing
    pub worst_excess: f64,
    pub worst_x: f64,
    pub slack: f64,
    pub note: String,
}

struct Tally {
    excess: f64,
    x: f64,
}

impl Tally {
    fn new() -> Self {
        Tally { excess: f64::NEG_INFINITY, x: f64::NAN }
    }

    fn add(&mut self, e: f64, x: f64) {
        if e > self.excess {
            self.excess = e;
            self.x = x;
        }
    }

    fn into_check(self, name: &str, slack: f64) -> AprioriCheck {
        AprioriCheck {
            name: name.into(),
            applicable: true,
            pass: self.excess <= slack,
            worst_excess: self.excess,
            worst_x: self.x,
            slack,
            note: String::new(),
        }
    }
}

fn skipped(name: &str, note: String) -> AprioriCheck {
    AprioriCheck {
        name: name.into(),
        applicable: false,
        pass: true,
        worst_excess: f64::NAN,
        worst_x: f64::NAN,
        slack: f64::NAN,
        note,
    }
}

/// Signal and derivative bounds, the derivative bracket, the exponential
/// derivative bound and the log-derivative bound, each with slack 1e-6 + h.
pub fn apriori_checks(profile: &WaveProfile, params: &Params) -> Result<Vec<AprioriCheck>> {
    let p = params;
    let c = profile.c;
    let kappa = profile.kappa;
    let u = &profile.u;
    let g = u.grid;
    let slack = 1e-6 + g.h;
    if !(c > 2.0) || p.chi >= 0.5 {
        let why = format!("needs c > 2 and chi < 1/2 (c = {c}, chi = {})", p.chi);
        return Ok(["v_bounds", "v_refined", "ux_bracket", "ux_exponential", "ux_over_u"]
            .iter()
            .map(|n| skipped(n, why.clone()))
            .collect());
    }
    let mc = m_chi(p)?;
    let (v, vx) = signal(u, p.gamma, Some(kappa))?;
    let mg = pow(mc, p.gamma);
    let ux: Vec<f64> = (1..g.n - 1).map(|i| (u.values[i + 1] - u.values[i - 1]) / (2.0 * g.h)).collect();
    let mut out = Vec::new();

    let mut t = Tally::new();
    for i in 0..g.n {
        t.add(v.values[i].abs().max(vx.values[i].abs()) - mg, g.x(i));
    }
    out.push(t.into_check("v_bounds", slack));

    let gk = p.gamma * kappa;
    if gk < 1.0 {
        let mut t = Tally::new();
        for i in 0..g.n {
            let x = g.x(i);
            let b = mg.min((-gk * x).exp() / (1.0 - gk * gk));
            t.add(v.values[i].abs().max(vx.values[i].abs()) - b, x);
        }
        out.push(t.into_check("v_refined", slack));
    } else {
        out.push(skipped("v_refined", format!("needs c > gamma + 1/gamma (gamma kappa = {gk})")));
    }

    let e = pow(mc, p.m + p.gamma - 1.0);
    let a = p.chi.abs();
    let den = c - p.m * a * e;
    if den > 0.0 {
        let lo = -(a * pow(mc, p.m + p.gamma) + mc) / den;
        let hi = (a * pow(mc, p.m + p.gamma) + mc * (pow(mc, p.alpha) - 1.0)) / den;
        let mut t = Tally::new();
        for (k, d) in ux.iter().enumerate() {
            t.add((d - hi).max(lo - d), g.x(k + 1));
        }
        let mut chk = t.into_check("ux_bracket", slack);
        chk.note = format!("bracket [{lo}, {hi}]");
        out.push(chk);
    } else {
        out.push(skipped("ux_bracket", format!("needs c > m|chi|M^(m+gamma-1) = {}", p.m * a * e)));
    }

    let both = den > 0.0 && gk < 1.0;
    if both {
        let pb = profile_bounds(p, c, mc)?;
        let m2 = pb.m2.unwrap_or(0.0);
        let mut t = Tally::new();
        for (k, d) in ux.iter().enumerate() {
            let x = g.x(k + 1);
            let b = (1.0 + 2.0 / c) * (pb.m1 * (-kappa * x).exp() + m2 * (-gk * x).exp());
            t.add(d.abs() - b, x);
        }
        out.push(t.into_check("ux_exponential", slack));
        let mut t = Tally::new();
        for (k, d) in ux.iter().enumerate() {
            let uu = u.values[k + 1];
            if uu > 0.0 {
                t.add((d / uu).abs() - pb.m_tilde, g.x(k + 1));
            }
        }
        let mut chk = t.into_check("ux_over_u", slack);
        chk.note = format!("M_tilde = {}", pb.m_tilde);
        out.push(chk);
    } else {
        let why = "needs c > max{gamma + 1/gamma, m|chi|M^(m+gamma-1)}".to_string();
        out.push(skipped("ux_exponential", why.clone()));
        out.push(skipped("ux_over_u", why));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub sup_diff: f64,
    pub pass: bool,
    /// c > c** for the shared parameters
    pub within_hypotheses: bool,
}

/// sup |U1 - U2| for two normalized profiles of the same (params, c).
pub fn uniqueness_check(p1: &WaveProfile, p2: &WaveProfile) -> Result<f64> {
    Ok(uniqueness_report(p1, p2)?.sup_diff)
}

pub fn uniqueness_report(p1: &WaveProfile, p2: &WaveProfile) -> Result<UniquenessReport> {
    if p1.params != p2.params || p1.c != p2.c {
        return domain(format!(
            "profiles differ in parameters or speed ({:?}, c = {} vs {:?}, c = {})",
            p1.params, p1.c, p2.params, p2.c
        ));
    }
    if !p1.u.grid.same_as(&p2.u.grid) {
        return domain("profiles live on different grids");
    }
    let d = p1.u.sup_diff(&p2.u);
    let css = c_star_star_value(&p1.params).unwrap_or(f64::INFINITY);
    Ok(UniquenessReport { sup_diff: d, pass: d < 1e-4, within_hypotheses: p1.c > css })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticCheck {
    pub int_u2: f64,
    pub int_v2: f64,
    pub int_vx2: f64,
    pub bound_v: f64,
    pub bound_vx: f64,
    pub pass_v: bool,
    pub pass_vx: bool,
}

/// Compares the weighted signal difference with the weighted density difference.
pub fn weighted_elliptic_check(u1: &Field, u2: &Field, eta: f64, gamma: f64, m_cap: f64) -> Result<EllipticCheck> {
    if !(eta > 0.0 && eta < 1.0) {
        return domain(format!("eta must lie in (0,1) (got {eta})"));
    }
    if gamma < 1.0 {
        return domain(format!("gamma must be ≥ 1 (got {gamma})"));
    }
    u1.require_same_grid(u2)?;
    for f in [u1, u2] {
        if f.min() < 0.0 || f.max() > m_cap {
            return domain(format!("densities must lie in [0, {m_cap}]"));
        }
    }
    let g = u1.grid;
    let s = Field::new(g, (0..g.n).map(|i| pow(u2.values[i], gamma) - pow(u1.values[i], gamma)).collect())?;
    let (v, vx) = solve_psi_with_derivative(&s, 1.0, 1.0, TailSpec::endpoint_constant(&s.values))?;
    let w = |i: usize| (eta * g.x(i)).exp();
    let int_u2 = trapezoid(g.h, (0..g.n).map(|i| (w(i) * (u2.values[i] - u1.values[i])).powi(2)));
    let int_v2 = trapezoid(g.h, (0..g.n).map(|i| (w(i) * v.values[i]).powi(2)));
    let int_vx2 = trapezoid(g.h, (0..g.n).map(|i| (w(i) * (eta * v.values[i] + vx.values[i])).powi(2)));
    let k = gamma * gamma * pow(m_cap, 2.0 * (gamma - 1.0));
    let bound_v = k / (1.0 - eta).powi(2) * int_u2;
    let bound_vx = k / (1.0 - eta * eta) * int_u2;
    Ok(EllipticCheck {
        int_u2,
        int_v2,
        int_vx2,
        bound_v,
        bound_vx,
        pass_v: int_v2 <= bound_v * (1.0 + 1e-6),
        pass_vx: int_vx2 <= bound_vx * (1.0 + 1e-6),
    })
}
