use chemowave::params::*;
use chemowave::{Error, Params};
use proptest::prelude::*;

fn p(chi: f64, m: f64, alpha: f64, gamma: f64) -> Params {
    Params::new(chi, m, alpha, gamma).unwrap()
}

#[test]
fn regime_examples() {
    assert_eq!(classify_regime(&p(-1.0, 1.0, 1.0, 1.0)), RegimeTag::NegChi_AlphaLE);
    assert_eq!(classify_regime(&p(0.25, 1.0, 1.0, 1.0)), RegimeTag::PosChi_AlphaEQ);
    assert_eq!(classify_regime(&p(0.25, 1.0, 3.0, 1.0)), RegimeTag::PosChi_AlphaGT);
    assert_eq!(classify_regime(&p(0.6, 1.0, 1.0, 1.0)), RegimeTag::Outside);
}

#[test]
fn c_star_values() {
    assert_eq!(c_star(&p(0.0, 1.0, 1.0, 1.0)), 2.0);
    let want = 1.0 / 7f64.sqrt() + 7f64.sqrt();
    assert!((c_star(&p(-3.0, 1.0, 1.0, 1.0)) - want).abs() < 1e-12);
    let r = c_star(&p(-1e4, 1.0, 1.0, 1.0)) / 100.0;
    assert!((r / 2f64.sqrt() - 1.0).abs() < 0.01, "{r}");
}

#[test]
fn c_star_monotone_in_abs_chi() {
    let mut prev = 0.0;
    for i in 0..1000 {
        let chi = -100.0 * i as f64 / 999.0;
        let c = c_star(&p(chi, 1.0, 1.0, 1.0));
        assert!(c >= prev - 1e-12, "chi {chi}");
        prev = c;
    }
}

#[test]
fn chi_star_and_m_chi() {
    assert_eq!(chi_star(1.0, 1.0, 1.0), 1.0);
    assert_eq!(chi_star(2.0, 1.0, 1.0), 0.75);
    assert_eq!(chi_star(3.0, 1.0, 2.0), 0.625);
    assert_eq!(m_chi(&p(-1.0, 1.0, 1.0, 1.0)).unwrap(), 1.0);
    assert!((m_chi(&p(0.25, 1.0, 1.0, 1.0)).unwrap() - 4.0 / 3.0).abs() < 1e-15);
    assert!((m_chi(&p(0.3, 1.0, 2.0, 1.0)).unwrap() - 1.1952286093343936).abs() < 1e-12);
    assert!(matches!(m_chi(&p(1.0, 1.0, 1.0, 1.0)), Err(Error::Domain(_))));
}

#[test]
fn barrier_constant_examples() {
    let b = barrier_constants(&p(-1.0, 1.0, 1.0, 1.0), 0.25, 0.5, 1.0).unwrap();
    assert!((b.k - 1.75 / 0.9375).abs() < 1e-12);
    assert!((b.d_sub - 2.0 * (0.9375 + 1.75) / 0.9375).abs() < 1e-12);
    assert!((b.d_small - 0.125 * 0.9375 / 2.6875).abs() < 1e-7);
    assert!((x_minus(0.25, 0.5, std::f64::consts::E) - 4.0).abs() < 1e-14);
    let b = barrier_constants(&p(0.0, 1.0, 1.0, 1.0), 0.4, 0.8, 1.0).unwrap();
    assert!((b.m_barrier - 2.5).abs() < 1e-14);
    assert!(barrier_constants(&p(0.0, 1.0, 1.0, 1.0), 0.4, 0.3, 1.0).is_err());
}

#[test]
fn c_star_star_examples() {
    let r = energy_chain(&p(0.0, 1.0, 1.0, 1.0), TILDE_FACTOR).unwrap();
    assert_eq!((r.c1, r.c2, r.c3, r.c_star_star), (2.0, 0.0, 2.0, 2.0));
    assert_eq!(c_star_star_value(&p(0.0, 1.0, 2.0, 2.0)).unwrap(), 2.5);
    let v = c_star_star_value(&p(-0.01, 1.0, 1.0, 1.0)).unwrap();
    assert!((v - 2.2183129751405381).abs() < 1e-12, "{v}");
}

#[test]
fn c_star_star_small_chi_rate() {
    let gap = |chi: f64| c_star_star_value(&p(chi, 1.0, 1.0, 1.0)).unwrap() - 2.0;
    let scale = gap(1e-3) / 1e-3f64.powf(SIGMA);
    for k in 3..=9 {
        let chi = 10f64.powi(-k);
        let ratio = gap(chi) / chi.powf(SIGMA);
        assert!(ratio > 0.0 && ratio <= 5.0 * scale, "chi {chi}: {ratio} vs {scale}");
        let floor = 1.0 + chi.powf(SIGMA) + 1.0 / (1.0 + chi.powf(SIGMA));
        assert!(gap(chi) + 2.0 >= floor - 1e-14);
    }
}

#[test]
fn validate_messages() {
    let e = Params::new(0.0, 0.5, 1.0, 1.0).unwrap_err().to_string();
    assert!(e.contains("m must be ≥ 1"), "{e}");
    let e = Params::new(f64::NAN, 1.0, 1.0, 1.0).unwrap_err().to_string();
    assert!(e.contains("chi non-finite"), "{e}");
}

#[test]
fn boundedness_quotients_are_infinite_at_one() {
    assert_eq!(chi_bound_boundedness(1.0, 1.0), f64::INFINITY);
    assert_eq!(chi_bound_boundedness(2.0, 1.0), 3.0);
}

#[test]
fn lambda_oracles() {
    let l = predicted_lambda(&p(0.0, 1.0, 1.0, 1.0), 3.0, 0.9).unwrap();
    assert!((l.lambda + 0.89).abs() < 1e-14);
    let l = predicted_lambda(&p(-0.001, 1.0, 1.0, 1.0), 3.0, 0.9).unwrap();
    assert!((l.lambda + 0.85016886076061802).abs() < 1e-12, "{}", l.lambda);
}

proptest! {
    #[test]
    fn kappa_is_a_root(c in 2.0f64..100.0) {
        let k = kappa_of_speed(c).unwrap();
        prop_assert!((k * k - c * k + 1.0).abs() < 1e-12);
        prop_assert!(k > 0.0 && k <= 1.0);
    }

    #[test]
    fn lambda_at_zero_chi_is_plain_quadratic(c in 2.05f64..10.0, t in 0.01f64..0.99) {
        let pp = p(0.0, 1.0, 1.0, 1.0);
        let (km, kp) = eta_window(&pp, c).unwrap();
        let eta = km + t * (kp - km);
        let l = predicted_lambda(&pp, c, eta).unwrap();
        prop_assert!((l.lambda - (eta * eta - c * eta + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn m_barrier_above_one_past_c_star(chi in -5.0f64..0.0, extra in 0.01f64..5.0) {
        let pp = p(chi, 1.0, 1.0, 1.0);
        let c = c_star(&pp) + extra;
        let k = kappa_of_speed(c).unwrap();
        let b = barrier_constants(&pp, k, default_kappa_tilde(&pp, k), 1.0).unwrap();
        prop_assert!(b.m_barrier > 1.0);
    }

    #[test]
    fn eta_window_ordering(chi in -0.05f64..0.0, extra in 0.05f64..3.0) {
        let pp = p(chi, 1.0, 1.0, 1.0);
        let c = c_star_star_value(&pp).unwrap() + extra;
        let (km, kp) = eta_window(&pp, c).unwrap();
        let k = kappa_of_speed(c).unwrap();
        let top = 1.0 / (1.0 + chi.abs().powf(SIGMA));
        prop_assert!(k <= km + 1e-12);
        prop_assert!(top < kp);
    }
}
