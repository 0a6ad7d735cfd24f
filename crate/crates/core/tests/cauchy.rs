use chemowave::cauchy::*;
use chemowave::{Field, Grid, Params};
use proptest::prelude::*;

fn gauss(g: Grid, a: f64) -> Field {
    Field::from_fn(g, |x| a * (-x * x).exp())
}

fn sup_run(chi: f64, u0: impl Fn(Grid) -> Field, t_end: f64) -> (RunOutput, f64) {
    let g = Grid::from_bounds(-60.0, 60.0, 0.1).unwrap();
    let p = Params::new(chi, 1.0, 1.0, 1.0).unwrap();
    let mut cfg = SimConfig::lab(p, g, t_end);
    cfg.output_every = 1.0;
    let u = u0(g);
    let s0 = u.max();
    (run(&cfg, u).unwrap(), s0)
}

fn chi_zero_at(h: f64, dt: f64) -> Field {
    let g = Grid::from_bounds(-30.0, 30.0, h).unwrap();
    let mut cfg = SimConfig::lab(Params::default(), g, 5.0);
    cfg.dt = Dt::Fixed(dt);
    cfg.output_every = 5.0;
    run(&cfg, gauss(g, 0.5)).unwrap().state.u
}

fn sup_gap(coarse: &Field, fine: &Field) -> f64 {
    (0..coarse.len()).map(|i| (coarse.values[i] - fine.interp_linear(coarse.grid.x(i))).abs()).fold(0.0, f64::max)
}

#[test]
fn self_convergence_chi_zero() {
    let worst = sup_gap(&chi_zero_at(0.1, 0.002), &chi_zero_at(0.025, 0.0005));
    assert!(worst < 1e-3, "{worst}");
}

#[test]
fn convergence_orders() {
    let reference = chi_zero_at(0.1, 0.000125);
    let r_t = sup_gap(&chi_zero_at(0.1, 0.004), &reference) / sup_gap(&chi_zero_at(0.1, 0.002), &reference);
    assert!(r_t >= 1.9, "time ratio {r_t}");
    let reference = chi_zero_at(0.025, 0.001);
    let r_h = sup_gap(&chi_zero_at(0.4, 0.001), &reference) / sup_gap(&chi_zero_at(0.2, 0.001), &reference);
    assert!(r_h >= 3.5, "space ratio {r_h}");
}

#[test]
fn repulsive_run_stays_below_initial_sup() {
    let (out, s0) = sup_run(-1.0, |g| gauss(g, 2.0), 50.0);
    let p = Params::new(-1.0, 1.0, 1.0, 1.0).unwrap();
    for s in &out.snapshots {
        assert!(s.u.max() <= 2.0 + 1e-8, "t {}", s.t);
        assert!(monitor_bounds(s, &p, s0).violations().is_empty());
    }
    assert!(out.state.u.max() <= 1.05);
    let scaled = State { t: out.state.t, u: out.state.u.map(|v| 3.0 * v), v: out.state.v.clone() };
    let v = monitor_bounds(&scaled, &p, 2.0);
    assert!(v.violations()[0].contains("sup exceeds max{1,sup u0}"));
}

#[test]
fn attractive_run_limit() {
    let (out, _) = sup_run(0.25, |g| gauss(g, 2.0), 50.0);
    assert!(out.state.u.max() <= 4.0 / 3.0 + 0.05, "{}", out.state.u.max());
}

#[test]
fn positive_data_relaxes_to_one() {
    let (out, _) = sup_run(0.25, |g| Field::from_fn(g, |x| 0.6 + 0.4 * (0.3 * x).sin()), 50.0);
    let u = &out.state.u;
    let (lo, hi) = (u.len() / 10, u.len() - u.len() / 10);
    let worst = u.values[lo..hi].iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    assert!(worst < 0.02, "{worst}");
}

#[test]
fn outside_regime_not_applicable() {
    let g = Grid::from_bounds(-5.0, 5.0, 0.1).unwrap();
    let s = State { t: 0.0, u: gauss(g, 1.0), v: gauss(g, 1.0) };
    let p = Params::new(0.9, 1.0, 1.0, 1.0).unwrap();
    assert!(matches!(monitor_bounds(&s, &p, 1.0), BoundReport::NotApplicable(_)));
}

#[test]
fn deterministic() {
    let (a, _) = sup_run(-0.5, |g| gauss(g, 1.5), 5.0);
    let (b, _) = sup_run(-0.5, |g| gauss(g, 1.5), 5.0);
    assert_eq!(a.state.u.values, b.state.u.values);
    assert_eq!(a.monitors.sup_u, b.monitors.sup_u);
}

#[test]
fn bad_config_rejected() {
    let g = Grid::from_bounds(-5.0, 5.0, 0.1).unwrap();
    let mut cfg = SimConfig::lab(Params::default(), g, 1.0);
    cfg.dt = Dt::Fixed(-1.0);
    assert!(run(&cfg, gauss(g, 1.0)).is_err());
    let cfg = SimConfig::lab(Params::default(), g, 1.0);
    let neg = Field::from_fn(g, |x| -x.abs());
    assert!(run(&cfg, neg).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn comparison_surrogate(chi in -2.0f64..0.0, a in 0.1f64..0.5, b in 0.0f64..0.5) {
        let g = Grid::from_bounds(-20.0, 20.0, 0.1).unwrap();
        let p = Params::new(chi, 1.0, 1.0, 1.0).unwrap();
        let mut cfg = SimConfig::lab(p, g, 3.0);
        cfg.output_every = 0.5;
        let lo = gauss(g, a);
        let hi = Field::from_fn(g, |x| (a + b) * (-x * x / 2.0).exp());
        let ra = run(&cfg, lo).unwrap();
        let rb = run(&cfg, hi).unwrap();
        for (sa, sb) in ra.snapshots.iter().zip(&rb.snapshots) {
            for i in 0..g.n {
                prop_assert!(sa.u.values[i] <= sb.u.values[i] + 1e-6);
            }
        }
    }
}
