//! Model parameters, regime classification and closed-form constants.

use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Fixed exponent used throughout the weighted-energy constant chain.
pub const SIGMA: f64 = 1.0 / 6.0;

/// Default factor for the evaluation constant M~ = tilde_factor * M_chi.
pub const TILDE_FACTOR: f64 = 1.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    pub chi: f64,
    pub m: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl Params {
    pub fn new(chi: f64, m: f64, alpha: f64, gamma: f64) -> Result<Self> {
        validate_params(Params { chi, m, alpha, gamma })
    }

    pub(crate) fn abs_chi(&self) -> f64 {
        self.chi.abs()
    }
}

impl Default for Params {
    fn default() -> Self {
        Params { chi: 0.0, m: 1.0, alpha: 1.0, gamma: 1.0 }
    }
}

pub fn validate_params(p: Params) -> Result<Params> {
    let named = [("chi", p.chi), ("m", p.m), ("alpha", p.alpha), ("gamma", p.gamma)];
    for (name, v) in named {
        if !v.is_finite() {
            return Err(Error::InvalidParam(format!("{name} non-finite")));
        }
    }
    for (name, v) in &named[1..] {
        if *v < 1.0 {
            return Err(Error::InvalidParam(format!("{name} must be ≥ 1 (got {v})")));
        }
    }
    Ok(p)
}

#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegimeTag {
    NegChi_AlphaLE,
    PosChi_AlphaEQ,
    PosChi_AlphaGT,
    Outside,
}

const EXP_TOL: f64 = 1e-12;

pub fn classify_regime(p: &Params) -> RegimeTag {
    let crit = p.m + p.gamma - 1.0;
    if p.chi <= 0.0 && p.alpha <= crit + EXP_TOL {
        RegimeTag::NegChi_AlphaLE
    } else if p.chi >= 0.0
        && (p.alpha - crit).abs() <= EXP_TOL
        && p.chi < 0.5f64.min(chi_star(p.m, p.alpha, p.gamma))
    {
        RegimeTag::PosChi_AlphaEQ
    } else if p.chi > 0.0 && p.alpha > crit + EXP_TOL {
        RegimeTag::PosChi_AlphaGT
    } else {
        RegimeTag::Outside
    }
}

/// Upper limit on chi in the global-boundedness result for chi > 0 and
/// alpha >= m + gamma - 1. Quotients with a zero denominator count as +inf.
pub fn chi_bound_boundedness(m: f64, gamma: f64) -> f64 {
    let q = |num: f64, den: f64| if den == 0.0 { f64::INFINITY } else { num / den };
    q(2.0 * m - 1.0, m - 1.0).min(q(m + gamma - 1.0, gamma - 1.0))
}

pub fn kappa_of_speed(c: f64) -> Result<f64> {
    if !c.is_finite() || c < 2.0 {
        return domain(format!("kappa_of_speed needs c ≥ 2 (got {c})"));
    }
    // product of roots is 1, so divide instead of subtracting close numbers
    Ok(2.0 / (c + (c * c - 4.0).sqrt()))
}

/// Inverse map kappa -> c = kappa + 1/kappa.
pub fn speed_of_kappa(kappa: f64) -> f64 {
    kappa + 1.0 / kappa
}

pub fn c_star(p: &Params) -> f64 {
    let a = p.abs_chi();
    let q = p.m * p.gamma * a + p.gamma * p.gamma * a + p.gamma * p.gamma;
    let sq = q.sqrt();
    (1.0 / p.m + p.m).max(1.0 / sq + sq)
}

pub fn chi_star(m: f64, _alpha: f64, gamma: f64) -> f64 {
    1.0f64.min((2.0 * m + 2.0 * gamma) / (m * m + m + 2.0 * gamma))
}

/// The alternative bound (2 gamma + 2)/(2 gamma + m + 1) quoted in the
/// introduction; reported for comparison only, `chi_star` governs.
pub fn chi_star_intro(m: f64, gamma: f64) -> f64 {
    (2.0 * gamma + 2.0) / (2.0 * gamma + m + 1.0)
}

pub fn m_chi(p: &Params) -> Result<f64> {
    if p.chi >= 1.0 {
        return domain(format!("M_chi requires chi < 1 (got {})", p.chi));
    }
    if p.chi <= 0.0 {
        Ok(1.0)
    } else {
        Ok((1.0 / (1.0 - p.chi)).powf(1.0 / p.alpha))
    }
}

/// Default refined decay exponent: midpoint of (kappa, min{(1+alpha)kappa, m kappa + 1/2, 1}).
pub fn default_kappa1(p: &Params, kappa: f64) -> f64 {
    let hi = ((1.0 + p.alpha) * kappa).min(p.m * kappa + 0.5).min(1.0);
    0.5 * (kappa + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedSpec {
    pub c: f64,
    pub kappa: f64,
    pub kappa1: f64,
}

impl SpeedSpec {
    pub fn new(p: &Params, c: f64) -> Result<Self> {
        let kappa = kappa_of_speed(c)?;
        Ok(SpeedSpec { c, kappa, kappa1: default_kappa1(p, kappa) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierConstants {
    pub m_barrier: f64,
    /// K_{M,kappa,kappa~,m,gamma} on the branch selected by gamma*kappa.
    pub k: f64,
    pub k_branch_eq: f64,
    pub k_branch_lt: f64,
    pub k_branch_gt: f64,
    /// General lower threshold for D in the sub-solution construction.
    pub d_general: f64,
    pub d_sub: f64,
    pub d_small: f64,
    pub x_minus: f64,
    pub x_plus: f64,
    /// True when the kappa~ = 2 kappa closed forms were used.
    pub closed_form: bool,
}

pub fn x_minus(kappa: f64, kappa_tilde: f64, d: f64) -> f64 {
    d.ln() / (kappa_tilde - kappa)
}

pub fn x_plus(kappa: f64, kappa_tilde: f64, d: f64) -> f64 {
    (kappa_tilde * d / kappa).ln() / (kappa_tilde - kappa)
}

/// Upper bound on the constant sub-solution level for a given D.
pub fn d_small_for(p: &Params, kappa: f64, kappa_tilde: f64, d: f64) -> f64 {
    let a = 1.0 / (1.0 + p.abs_chi());
    let b = (kappa / (kappa_tilde * d)).powf(kappa / (kappa_tilde - kappa)) * (1.0 - kappa / kappa_tilde);
    a.min(b)
}

pub fn barrier_constants(p: &Params, kappa: f64, kappa_tilde: f64, m_cap: f64) -> Result<BarrierConstants> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return domain(format!("kappa must lie in (0,1) (got {kappa})"));
    }
    if kappa_tilde <= kappa {
        return domain(format!("kappa_tilde ({kappa_tilde}) must exceed kappa ({kappa})"));
    }
    let a = p.abs_chi();
    let g = p.gamma;
    let gk = g * kappa;
    let pre = p.m * (kappa_tilde + kappa) + 1.0;
    let mg = m_cap.powf(g);
    let k_branch_eq = pre * (mg + 0.75);
    let k_branch_lt = if gk < 1.0 { pre / (1.0 - gk * gk) } else { f64::NAN };
    let k_branch_gt = if gk > 1.0 {
        pre * (mg * (gk * gk - 1.0) + gk) / (gk * gk - 1.0)
    } else {
        f64::NAN
    };
    let k = if gk == 1.0 {
        k_branch_eq
    } else if gk < 1.0 {
        k_branch_lt
    } else {
        k_branch_gt
    };
    let c = speed_of_kappa(kappa);
    let den = c * kappa_tilde - kappa_tilde * kappa_tilde - 1.0;
    if den <= 0.0 {
        return domain(format!("c*kappa_tilde - kappa_tilde^2 - 1 = {den} ≤ 0"));
    }
    let d_general = (1.0 + a * k) / den;
    let closed_form = (kappa_tilde - 2.0 * kappa).abs() <= 1e-14 * kappa && kappa < 0.5 && gk < 1.0;
    let (d_sub, d_small) = if closed_form {
        let one = 1.0 - gk * gk;
        let num = one + a * (3.0 * p.m * kappa + 1.0);
        let d_sub = 2.0 * num / one;
        (d_sub, (1.0 / (1.0 + a)).min(0.25 / d_sub))
    } else {
        (d_general, d_small_for(p, kappa, kappa_tilde, d_general))
    };
    let m_barrier = 1.0 / (kappa * (g * g + g * g * a + p.m * g * a).sqrt());
    Ok(BarrierConstants {
        m_barrier,
        k,
        k_branch_eq,
        k_branch_lt,
        k_branch_gt,
        d_general,
        d_sub,
        d_small,
        x_minus: x_minus(kappa, kappa_tilde, d_sub),
        x_plus: x_plus(kappa, kappa_tilde, d_sub),
        closed_form,
    })
}

/// Pieces of the weighted-energy chain that do not depend on c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyChain {
    pub m_tilde_chi: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub d_prime: f64,
    pub d_dprime: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c_star_star: f64,
}

fn m_dprime_at(p: &Params, mc: f64) -> f64 {
    let a = p.abs_chi();
    let s = a.powf(SIGMA);
    let e = p.m + p.gamma - 1.0;
    2.0 * ((1.0 + 2.0 * a * mc.powf(e) + mc.powf(p.alpha)) * s * s
        + a * p.m * mc.powf(p.m - 1.0) * (a * mc.powf(p.m + p.gamma) + mc.powf(p.alpha + 1.0)) * (p.gamma + s))
}

fn m_prime_at(p: &Params, mc: f64) -> f64 {
    p.abs_chi() * mc.powf(p.m + p.gamma) + mc.powf(1.0 + p.alpha)
}

fn m_tprime_low(p: &Params, mc: f64) -> f64 {
    let a = p.abs_chi();
    let s2 = a.powf(2.0 * SIGMA);
    let e = mc.powf(p.m + p.gamma - 1.0);
    let b = 2.5 + a * p.m * e;
    0.5 * s2 * (b + (b * b + 4.0 * a * e + 4.0 * mc.powf(p.alpha)).sqrt())
}

fn m_tprime_high(p: &Params, mc: f64) -> f64 {
    let a = p.abs_chi();
    let s = a.powf(SIGMA);
    let first = 8.0 * (1.0 + a + 2.0 * p.m * a) * (p.gamma + s) / (1.0 + p.gamma) * m_prime_at(p, mc);
    first.max(2.0 * m_dprime_at(p, mc))
}

fn m_tprime(p: &Params, mc: f64, c: f64) -> f64 {
    if c <= 2.5 {
        m_tprime_low(p, mc)
    } else {
        m_tprime_high(p, mc)
    }
}

pub fn energy_chain(p: &Params, tilde_factor: f64) -> Result<EnergyChain> {
    let mc = m_chi(p)?;
    let mt = tilde_factor * mc;
    let a = p.abs_chi();
    let (m, al, g) = (p.m, p.alpha, p.gamma);
    let s = a.powf(SIGMA);
    let s2 = s * s;
    let s3 = a.powf(3.0 * SIGMA);
    let e = m + g - 1.0;
    let b1 = m * mt.powf(e);
    let b2 = if m == 1.0 {
        0.0
    } else if m >= 2.0 {
        s * m * (m - 1.0) * mt.powf(e) * (a * mt.powf(m + g) + mt * (mt.powf(al) - 1.0))
    } else {
        m * mt.powf(e) * m_tprime_low(p, mc).max(m_tprime_high(p, mc))
    };
    let b3 = m * mt.powf(m - 1.0) * (a * mt.powf(m + g) + mt.powf(1.0 + al));
    let b4 = mt.powf(m);
    let g2 = g * g;
    let d_prime = s3 * b1 + 0.5 * b3 * (s2 + g2 * (1.0 + s).powi(2));
    let d_dprime = 0.5 * a.powf(1.0 + SIGMA) * b1
        + s3 * (2.0 * m + g) * mt.powf(e)
        + s * b2
        + 0.5 * s * b3 * (s + g2 * (1.0 + s))
        + 0.5 * s3 * b4 * (s2 + g2 * (1.0 + s).powi(2));
    let c1 = g + s + 1.0 / (g + s);
    let c2 = m * a * mc.powf(e) + s;
    let h = a.sqrt();
    let c3 = h * d_prime + 2.0 * (1.0 + h * d_dprime).sqrt();
    Ok(EnergyChain {
        m_tilde_chi: mt,
        b1,
        b2,
        b3,
        b4,
        d_prime,
        d_dprime,
        c1,
        c2,
        c3,
        c_star_star: c1.max(c2).max(c3),
    })
}

pub fn c_star_star_value(p: &Params) -> Result<f64> {
    Ok(energy_chain(p, TILDE_FACTOR)?.c_star_star)
}

/// Every named constant for (params, optional c). Fields that need a speed
/// are `None` when no c is given or when their hypotheses fail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsReport {
    pub chi: f64,
    pub m: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub regime: RegimeTag,
    pub c_star: f64,
    pub chi_star: f64,
    pub chi_star_intro: f64,
    #[serde(rename = "M_chi")]
    pub m_chi: f64,
    #[serde(rename = "M_tilde_chi")]
    pub m_tilde_chi: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    #[serde(rename = "D_prime")]
    pub d_prime: f64,
    #[serde(rename = "D_dprime")]
    pub d_dprime: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c_star_star: f64,
    #[serde(rename = "M_prime")]
    pub m_prime: f64,
    #[serde(rename = "M_dprime")]
    pub m_dprime: f64,
    pub c: Option<f64>,
    pub kappa: Option<f64>,
    pub kappa1: Option<f64>,
    #[serde(rename = "M_tprime")]
    pub m_tprime: Option<f64>,
    #[serde(rename = "M_barrier")]
    pub m_barrier: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[serde(rename = "D_sub")]
    pub d_sub: Option<f64>,
    pub d_sub_small: Option<f64>,
    pub x_minus: Option<f64>,
    pub x_plus: Option<f64>,
    #[serde(rename = "M_tilde")]
    pub m_tilde: Option<f64>,
    #[serde(rename = "M1")]
    pub m1: Option<f64>,
    #[serde(rename = "M2")]
    pub m2: Option<f64>,
}

/// Derivative bound constants at speed c with sup bound `mc`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileBounds {
    pub m1: f64,
    pub m2: Option<f64>,
    pub m_tilde: f64,
}

pub fn profile_bounds(p: &Params, c: f64, mc: f64) -> Result<ProfileBounds> {
    let kappa = kappa_of_speed(c)?;
    let a = p.abs_chi();
    let e = mc.powf(p.m + p.gamma - 1.0);
    let m1 = 1.0 + 2.0 * a * e + mc.powf(p.alpha);
    let gk = p.gamma * kappa;
    let den = (c - p.m * a * e) * (1.0 - gk * gk);
    let m2 = if c > p.m * a * e && gk < 1.0 {
        Some(a * p.m * mc.powf(p.m - 1.0) * (a * mc.powf(p.m + p.gamma) + mc.powf(p.alpha + 1.0)) / den)
    } else {
        None
    };
    let b = c + a * p.m * e;
    let m_tilde = 0.5 * (b + (b * b + 4.0 * a * e + 4.0 * mc.powf(p.alpha)).sqrt());
    Ok(ProfileBounds { m1, m2, m_tilde })
}

pub fn constants_report(p: &Params, c: Option<f64>) -> Result<ConstantsReport> {
    let p = validate_params(*p)?;
    let chain = energy_chain(&p, TILDE_FACTOR)?;
    let mc = m_chi(&p)?;
    let mut r = ConstantsReport {
        chi: p.chi,
        m: p.m,
        alpha: p.alpha,
        gamma: p.gamma,
        sigma: SIGMA,
        regime: classify_regime(&p),
        c_star: c_star(&p),
        chi_star: chi_star(p.m, p.alpha, p.gamma),
        chi_star_intro: chi_star_intro(p.m, p.gamma),
        m_chi: mc,
        m_tilde_chi: chain.m_tilde_chi,
        b1: chain.b1,
        b2: chain.b2,
        b3: chain.b3,
        b4: chain.b4,
        d_prime: chain.d_prime,
        d_dprime: chain.d_dprime,
        c1: chain.c1,
        c2: chain.c2,
        c3: chain.c3,
        c_star_star: chain.c_star_star,
        m_prime: m_prime_at(&p, mc),
        m_dprime: m_dprime_at(&p, mc),
        c,
        kappa: None,
        kappa1: None,
        m_tprime: None,
        m_barrier: None,
        k: None,
        d_sub: None,
        d_sub_small: None,
        x_minus: None,
        x_plus: None,
        m_tilde: None,
        m1: None,
        m2: None,
    };
    if let Some(c) = c {
        let spec = SpeedSpec::new(&p, c)?;
        r.kappa = Some(spec.kappa);
        r.kappa1 = Some(spec.kappa1);
        r.m_tprime = Some(m_tprime(&p, mc, c));
        let pb = profile_bounds(&p, c, mc)?;
        r.m1 = Some(pb.m1);
        r.m2 = pb.m2;
        r.m_tilde = Some(pb.m_tilde);
        if spec.kappa < 1.0 {
            if let Ok(bc) = barrier_constants(&p, spec.kappa, default_kappa_tilde(&p, spec.kappa), mc) {
                r.m_barrier = Some(bc.m_barrier);
                r.k = Some(bc.k);
                r.d_sub = Some(bc.d_sub);
                r.d_sub_small = Some(bc.d_small);
                r.x_minus = Some(bc.x_minus);
                r.x_plus = Some(bc.x_plus);
            }
        }
    }
    Ok(r)
}

/// kappa~ = 2 kappa when admissible, otherwise the largest admissible value.
pub fn default_kappa_tilde(p: &Params, kappa: f64) -> f64 {
    let cap = ((1.0 + p.alpha) * kappa).min(p.m * kappa + 0.5).min(1.0);
    if kappa < 0.5 && 2.0 * kappa <= cap {
        2.0 * kappa
    } else {
        cap
    }
}

/// Result of the weighted-energy quadratic at a weight exponent eta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaPrediction {
    pub lambda: f64,
    pub kappa_minus: f64,
    pub kappa_plus: f64,
}

fn quad_coeffs(p: &Params) -> Result<(f64, f64, f64)> {
    let ch = energy_chain(p, TILDE_FACTOR)?;
    let h = p.abs_chi().sqrt();
    Ok((h * ch.d_prime, 1.0 + h * ch.d_dprime, ch.c_star_star))
}

/// Roots kappa^- < kappa^+ of eta^2 - (c - h D') eta + (1 + h D'').
pub fn eta_window(p: &Params, c: f64) -> Result<(f64, f64)> {
    let (bp, q0, _) = quad_coeffs(p)?;
    let b = c - bp;
    let disc = b * b - 4.0 * q0;
    if disc <= 0.0 || b <= 0.0 {
        return domain(format!("no admissible eta window at c = {c}"));
    }
    let sq = disc.sqrt();
    let kp = 0.5 * (b + sq);
    Ok((q0 / kp, kp))
}

pub fn predicted_lambda(p: &Params, c: f64, eta: f64) -> Result<LambdaPrediction> {
    let (bp, q0, css) = quad_coeffs(p)?;
    if c <= css {
        return domain(format!("predicted decay needs c > c** = {css} (got {c})"));
    }
    let (km, kp) = eta_window(p, c)?;
    if !(eta > km && eta < kp) {
        return domain(format!("eta = {eta} outside ({km}, {kp})"));
    }
    Ok(LambdaPrediction { lambda: eta * eta - (c - bp) * eta + q0, kappa_minus: km, kappa_plus: kp })
}

/// Default weight exponent: midpoint of the admissible interval, i.e. of
/// (kappa, 1/(1+|chi|^sigma)) intersected with (kappa^-, kappa^+) when known.
pub fn default_eta(p: &Params, c: f64) -> Result<f64> {
    let kappa = kappa_of_speed(c)?;
    let mut lo = kappa;
    let mut hi = 1.0 / (1.0 + p.abs_chi().powf(SIGMA));
    if let Ok((km, kp)) = eta_window(p, c) {
        lo = lo.max(km);
        hi = hi.min(kp);
    }
    if lo >= hi {
        return domain(format!("empty weight window at c = {c}"));
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(chi: f64, m: f64, alpha: f64, gamma: f64) -> Params {
        Params::new(chi, m, alpha, gamma).unwrap()
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa_of_speed(2.0).unwrap(), 1.0);
        assert!((kappa_of_speed(2.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((kappa_of_speed(3.0).unwrap() - 0.3819660112501051).abs() < 1e-15);
        assert!(kappa_of_speed(1.99).is_err());
    }

    #[test]
    fn regimes() {
        assert_eq!(classify_regime(&p(-1.0, 1.0, 1.0, 1.0)), RegimeTag::NegChi_AlphaLE);
        assert_eq!(classify_regime(&p(0.25, 1.0, 1.0, 1.0)), RegimeTag::PosChi_AlphaEQ);
        assert_eq!(classify_regime(&p(0.25, 1.0, 3.0, 1.0)), RegimeTag::PosChi_AlphaGT);
        assert_eq!(classify_regime(&p(0.9, 1.0, 1.0, 1.0)), RegimeTag::Outside);
        assert_eq!(classify_regime(&p(-1.0, 1.0, 3.0, 1.0)), RegimeTag::Outside);
    }

    #[test]
    fn chi_star_examples() {
        assert_eq!(chi_star(1.0, 1.0, 1.0), 1.0);
        assert_eq!(chi_star(2.0, 1.0, 1.0), 0.75);
        assert_eq!(chi_star(3.0, 1.0, 2.0), 0.625);
    }

    #[test]
    fn m_chi_examples() {
        assert_eq!(m_chi(&p(-1.0, 1.0, 1.0, 1.0)).unwrap(), 1.0);
        assert!((m_chi(&p(0.25, 1.0, 1.0, 1.0)).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!((m_chi(&p(0.3, 1.0, 2.0, 1.0)).unwrap() - 1.1952286093343936).abs() < 1e-12);
        assert!(m_chi(&p(1.0, 1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn barrier_examples() {
        let bc = barrier_constants(&p(-1.0, 1.0, 1.0, 1.0), 0.25, 0.5, 1.0).unwrap();
        assert!(bc.closed_form);
        assert!((bc.k - 1.75 / 0.9375).abs() < 1e-12);
        assert!((bc.d_sub - 2.0 * 2.6875 / 0.9375).abs() < 1e-12);
        assert!((bc.d_small - 0.125 * 0.9375 / 2.6875).abs() < 1e-12);
        // the closed form dominates the general threshold
        assert!(bc.d_sub >= bc.d_general);
        assert!((x_minus(0.25, 0.5, std::f64::consts::E) - 4.0).abs() < 1e-14);
        let bc = barrier_constants(&p(0.0, 1.0, 1.0, 1.0), 0.4, 0.8, 1.0).unwrap();
        assert!((bc.m_barrier - 2.5).abs() < 1e-14);
        assert!(barrier_constants(&p(0.0, 1.0, 1.0, 1.0), 0.4, 0.3, 1.0).is_err());
    }

    #[test]
    fn k_branches() {
        // gamma*kappa = 1 and > 1 exercise the remaining branches
        let q = p(-0.5, 1.0, 3.0, 2.0);
        let bc = barrier_constants(&q, 0.5, 0.75, 1.0).unwrap();
        assert_eq!(bc.k, bc.k_branch_eq);
        assert!((bc.k - (1.0 * 1.25 + 1.0) * 1.75).abs() < 1e-14);
        let q = p(-0.5, 1.0, 3.0, 3.0);
        let bc = barrier_constants(&q, 0.5, 0.75, 2.0).unwrap();
        let gk: f64 = 1.5;
        let want = 2.25 * (8.0 * (gk * gk - 1.0) + gk) / (gk * gk - 1.0);
        assert!((bc.k - want).abs() < 1e-12);
    }

    #[test]
    fn c_star_examples() {
        assert_eq!(c_star(&p(0.0, 1.0, 1.0, 1.0)), 2.0);
        let want = 1.0 / 7f64.sqrt() + 7f64.sqrt();
        assert!((c_star(&p(-3.0, 1.0, 1.0, 1.0)) - want).abs() < 1e-12);
        let v = c_star(&p(-100.0, 1.0, 1.0, 1.0));
        assert!((v - 14.247981440343684).abs() < 1e-12);
    }

    #[test]
    fn c_star_star_oracles() {
        let ch = energy_chain(&p(-0.01, 1.0, 1.0, 1.0), TILDE_FACTOR).unwrap();
        assert!((ch.d_prime - 1.316345483243462).abs() < 1e-13);
        assert!((ch.d_dprime - 0.88556714235024352).abs() < 1e-13);
        assert!((ch.c1 - 2.1471448703084692).abs() < 1e-13);
        assert!((ch.c2 - 0.47415888336127789).abs() < 1e-13);
        assert!((ch.c3 - 2.2183129751405381).abs() < 1e-13);
        assert!((ch.c_star_star - 2.2183129751405381).abs() < 1e-13);

        let ch = energy_chain(&p(0.0, 1.0, 1.0, 1.0), TILDE_FACTOR).unwrap();
        assert_eq!((ch.c1, ch.c2, ch.c3, ch.c_star_star), (2.0, 0.0, 2.0, 2.0));
        assert_eq!(c_star_star_value(&p(0.0, 1.0, 2.0, 2.0)).unwrap(), 2.5);

        let ch = energy_chain(&p(-1.0, 1.0, 1.0, 1.0), TILDE_FACTOR).unwrap();
        assert!((ch.c3 - 12.472983791727881).abs() < 1e-11);
        let ch = energy_chain(&p(-0.001, 1.0, 1.0, 1.0), TILDE_FACTOR).unwrap();
        assert!((ch.c_star_star - 2.0759746926647958).abs() < 1e-13);
        assert!((ch.c3 - 2.0428531366616352).abs() < 1e-13);
        let v = c_star_star_value(&p(0.25, 1.0, 1.0, 1.0)).unwrap();
        assert!((v - 6.4607682628639854).abs() < 1e-12);
        let ch = energy_chain(&p(-0.5, 2.0, 2.0, 1.0), TILDE_FACTOR).unwrap();
        assert!((ch.b2 - 0.97324283876269192).abs() < 1e-13);
        assert!((ch.c_star_star - 11.616336626044767).abs() < 1e-11);
    }

    #[test]
    fn lambda_oracles() {
        let l = predicted_lambda(&p(0.0, 1.0, 1.0, 1.0), 3.0, 1.0).unwrap();
        assert_eq!(l.lambda, -1.0);
        let l = predicted_lambda(&p(0.0, 1.0, 1.0, 1.0), 2.5, 0.8).unwrap();
        assert!((l.lambda + 0.36).abs() < 1e-15);
        let l = predicted_lambda(&p(-0.001, 1.0, 1.0, 1.0), 3.0, 0.9).unwrap();
        assert!((l.lambda + 0.85016886076061802).abs() < 1e-13);
        let l = predicted_lambda(&p(-0.01, 1.0, 1.0, 1.0), 4.0, 0.475).unwrap();
        assert!((l.lambda + 0.5232918753109112).abs() < 1e-13);
        assert!(predicted_lambda(&p(-0.01, 1.0, 1.0, 1.0), 4.0, 0.1).is_err());
        assert!(predicted_lambda(&p(-1.0, 1.0, 1.0, 1.0), 4.0, 0.5).is_err());
    }

    #[test]
    fn validate_messages() {
        let e = Params::new(0.0, 0.5, 1.0, 1.0).unwrap_err().to_string();
        assert!(e.contains("m must be ≥ 1"), "{e}");
        let e = Params::new(f64::NAN, 1.0, 1.0, 1.0).unwrap_err().to_string();
        assert!(e.contains("chi non-finite"), "{e}");
    }

    #[test]
    fn report_keys() {
        let r = constants_report(&p(-1.0, 1.0, 1.0, 1.0), Some(4.0)).unwrap();
        assert!(r.m_barrier.unwrap() > 1.0);
        assert_eq!(r.c_star_star, r.c1.max(r.c2).max(r.c3));
        let r = constants_report(&p(0.0, 1.0, 1.0, 1.0), None).unwrap();
        assert!(r.kappa.is_none());
        assert_eq!(chi_bound_boundedness(1.0, 1.0), f64::INFINITY);
    }
}
