use chemowave::speed::*;
use chemowave::{Error, Field, Grid, Params};
use proptest::prelude::*;

fn p(chi: f64) -> Params {
    Params::new(chi, 1.0, 1.0, 1.0).unwrap()
}

fn bump(h: f64, center: f64) -> Field {
    compact_bump(Grid::from_bounds(center - 10.0, center + 10.0, h).unwrap(), center, 5.0)
}

fn measure(chi: f64, h: f64, t_end: f64, center: f64) -> FrontTrack {
    let mut cfg = SpeedConfig::new(p(chi));
    cfg.h = h;
    cfg.t_end = t_end;
    spreading_speed(&cfg, &bump(h, center)).unwrap()
}

#[test]
fn front_position_examples() {
    let g = Grid::from_bounds(-10.0, 20.0, 0.01).unwrap();
    let u = Field::from_fn(g, |x| (-0.5 * (x - 3.0)).exp().min(1.0));
    assert!((front_position(&u, 0.5).unwrap() - 4.3862944).abs() < 1e-4);
    let flat = Field::from_fn(g, |_| 0.1);
    assert!(matches!(front_position(&flat, 0.5), Err(Error::NoFront { .. })));
    let step = Field::from_fn(g, |x| if x < 2.345 { 1.0 } else { 0.0 });
    assert!((front_position(&step, 0.5).unwrap() - 2.345).abs() <= g.h);
}

#[test]
fn kpp_and_attractive_speeds() {
    for chi in [0.0, 0.5] {
        let tr = measure(chi, 0.05, 60.0, 0.0);
        assert!((tr.fitted_speed / 2.0 - 1.0).abs() < 0.05, "chi {chi}: {}", tr.fitted_speed);
        assert!(tr.fit_r2 > 0.99);
    }
}

#[test]
fn strong_repulsion_recorded() {
    let tr = measure(-20.0, 0.1, 40.0, 0.0);
    eprintln!("chi = -20: fitted speed {:.4}", tr.fitted_speed);
    assert!(tr.fitted_speed >= 2.0 * 0.95);
}

#[test]
fn kpp_speed_below_two_for_every_h() {
    let speeds: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&h| measure(0.0, h, 60.0, 0.0).fitted_speed).collect();
    eprintln!("h = 0.1, 0.05, 0.025: {speeds:?}");
    // logarithmic front delay: x(t) ~ 2t - (3/2) ln t, fitted over [30, 60]
    let delayed = 2.0 - 1.5 * 2f64.ln() / 30.0;
    for s in &speeds {
        assert!(*s < 2.0);
        assert!((s - delayed).abs() < 0.01, "{s} vs {delayed}");
    }
    assert!((speeds[0] - speeds[2]).abs() < 2e-3);
}

#[test]
fn translation_invariant() {
    let a = measure(0.0, 0.05, 40.0, 0.0).fitted_speed;
    let b = measure(0.0, 0.05, 40.0, 10.0).fitted_speed;
    assert!((a - b).abs() < 1e-3, "{a} vs {b}");
}

#[test]
fn rejects_short_runs_and_zero_data() {
    let mut cfg = SpeedConfig::new(p(0.0));
    cfg.t_end = 30.0;
    assert!(spreading_speed(&cfg, &bump(0.05, 0.0)).is_err());
    let cfg = SpeedConfig::new(p(0.0));
    let zero = Field::zeros(Grid::from_bounds(-5.0, 5.0, 0.05).unwrap());
    assert!(spreading_speed(&cfg, &zero).is_err());
}

fn quick() -> SpeedConfig {
    let mut cfg = SpeedConfig::new(Params::default());
    cfg.h = 0.1;
    cfg.t_end = 40.0;
    cfg
}

#[test]
fn sweep_examples() {
    let u0 = bump(0.1, 0.0);
    let one = SweepRanges { chi: vec![0.0], m: vec![1.0], alpha: vec![1.0], gamma: vec![1.0] };
    let rows = sweep_speeds(&one, &quick(), &u0, 1).unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0].c_fit - 2.0).abs() < 0.1);
    assert_eq!((rows[0].c_star, rows[0].c_star_star), (2.0, 2.0));

    let empty = SweepRanges { chi: vec![], ..one.clone() };
    assert!(sweep_speeds(&empty, &quick(), &u0, 2).unwrap().is_empty());

    let grid = SweepRanges { chi: vec![0.0, -1.0, -0.5], m: vec![2.0, 1.0], alpha: vec![1.0], gamma: vec![1.0] };
    let rows = sweep_speeds(&grid, &quick(), &u0, 3).unwrap();
    let keys: Vec<(f64, f64)> = rows.iter().map(|r| (r.chi, r.m)).collect();
    assert_eq!(keys, vec![(-1.0, 1.0), (-1.0, 2.0), (-0.5, 1.0), (-0.5, 2.0), (0.0, 1.0), (0.0, 2.0)]);
    let serial = sweep_speeds(&grid, &quick(), &u0, 1).unwrap();
    assert_eq!(rows, serial);
}

#[test]
fn sweep_rows_carry_errors() {
    let bad = SweepRanges { chi: vec![0.0], m: vec![0.5], alpha: vec![1.0], gamma: vec![1.0] };
    let rows = sweep_speeds(&bad, &quick(), &bump(0.1, 0.0), 1).unwrap();
    assert!(rows[0].error.as_deref().unwrap().contains("m must be"));
    assert!(rows[0].c_fit.is_nan());
}

proptest! {
    #[test]
    fn fit_recovers_lines(a in -5.0f64..5.0, b in -10.0f64..10.0, n in 3usize..50) {
        let x: Vec<f64> = (0..n).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = x.iter().map(|t| a * t + b).collect();
        let (s, r2) = linear_fit(&x, &y);
        prop_assert!((s - a).abs() < 1e-9);
        prop_assert!(r2 > 1.0 - 1e-9);
    }

    #[test]
    fn crossing_of_shifted_exponential(s in -5.0f64..5.0, k in 0.2f64..2.0) {
        let g = Grid::from_bounds(-20.0, 40.0, 0.01).unwrap();
        let u = Field::from_fn(g, |x| (-k * (x - s)).exp().min(1.0));
        let x = front_position(&u, 0.5).unwrap();
        prop_assert!((x - (s + 2f64.ln() / k)).abs() < 1e-3);
    }
}
