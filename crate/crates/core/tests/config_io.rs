use chemowave::cauchy::Dt;
use chemowave::config::*;
use chemowave::io::*;
use chemowave::plot::{emit_plot, PlotKind};
use chemowave::wave::Method;
use chemowave::Error;
use proptest::prelude::*;

#[test]
fn empty_file_gives_defaults() {
    assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    assert_eq!(RunConfig::parse("\n# nothing\n   \n").unwrap(), RunConfig::default());
}

#[test]
fn errors_name_the_key() {
    for (text, key) in [
        ("chi=abc", "chi"),
        ("bogus=1", "bogus"),
        ("grid.h=0", "grid.h"),
        ("dt=-1", "dt"),
        ("method=newton", "method"),
        ("seed=1.5", "seed"),
        ("c=inf", "c"),
    ] {
        match RunConfig::parse(text) {
            Err(Error::Config { key: k, .. }) => assert_eq!(k, key, "{text}"),
            other => panic!("{text}: {other:?}"),
        }
    }
    let e = RunConfig::parse("chi=abc").unwrap_err().to_string();
    assert!(e.contains("chi"), "{e}");
    assert!(matches!(RunConfig::default().require_c(), Err(Error::Config { .. })));
}

#[test]
fn later_values_override() {
    let mut cfg = RunConfig::parse("chi=-1\nmethod=relax\ndt=0.01\neta=0.7\n").unwrap();
    assert_eq!(cfg.chi, -1.0);
    assert_eq!(cfg.method, Method::CoupledRelax);
    assert_eq!(cfg.dt, Dt::Fixed(0.01));
    assert_eq!(cfg.eta, EtaSetting::Value(0.7));
    cfg.set("chi", "0").unwrap();
    assert_eq!(cfg.chi, 0.0);
}

#[test]
fn csv_layout() {
    let s = csv_string(&["t", "W"], [[0.0, 1.0], [0.5, 0.25]]);
    assert_eq!(s, "t,W\n0.00000000000000e0,1.00000000000000e0\n5.00000000000000e-1,2.50000000000000e-1\n");
    let t = parse_csv(&s).unwrap();
    assert_eq!(t.column("W").unwrap(), vec![1.0, 0.25]);
    assert!(t.column("x").is_none());
}

#[test]
fn plot_scripts() {
    let dir = std::env::temp_dir().join(format!("chemowave-plot-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("profile.csv");
    std::fs::write(&csv, csv_string(&["x", "U", "V"], [[0.0, 1.0, 1.0], [1.0, 0.5, 0.6]])).unwrap();
    let text = emit_plot(&csv, PlotKind::Profile, &dir.join("p.gp")).unwrap();
    assert!(text.contains("'profile.csv'") && text.contains("title 'U'") && text.contains("title 'V'"));
    let decay = dir.join("decay.csv");
    std::fs::write(&decay, csv_string(&["t", "W"], [[0.0, 2.0], [1.0, 0.5]])).unwrap();
    let text = emit_plot(&decay, PlotKind::Decay { lambda: -0.89 }, &dir.join("d.gp")).unwrap();
    assert!(text.contains("set logscale y") && text.contains("exp(2*"));
    let empty = dir.join("empty.csv");
    std::fs::write(&empty, "t,W\n").unwrap();
    let e = emit_plot(&empty, PlotKind::Decay { lambda: -1.0 }, &dir.join("e.gp")).unwrap_err();
    assert!(e.to_string().contains("no data"));
    assert!(matches!(emit_plot(&dir.join("missing.csv"), PlotKind::Front, &dir.join("m.gp")), Err(Error::Io(_))));
    assert!(emit_plot(&decay, PlotKind::Front, &dir.join("f.gp")).is_err());
    std::fs::remove_dir_all(&dir).unwrap();
}

proptest! {
    #[test]
    fn csv_round_trip(rows in prop::collection::vec(prop::array::uniform3(-1e300f64..1e300), 0..20)) {
        let s = csv_string(&["a", "b", "c"], &rows);
        let t = parse_csv(&s).unwrap();
        prop_assert_eq!(t.rows.len(), rows.len());
        for (r, q) in t.rows.iter().zip(&rows) {
            for j in 0..3 {
                let rel = ((r[j] - q[j]) / q[j].abs().max(1e-300)).abs();
                prop_assert!(rel < 1e-14);
            }
        }
    }

    #[test]
    fn parse_field_never_panics(s in ".{0,40}") {
        let _ = parse_field(&s);
        let _ = parse_csv(&s);
    }

    #[test]
    fn config_parser_never_panics(s in "[a-z_.=#0-9 \\-\n]{0,80}") {
        let _ = RunConfig::parse(&s);
    }

    #[test]
    fn numeric_keys_round_trip(x in -1e6f64..1e6) {
        let cfg = RunConfig::parse(&format!("chi={x}\ncenter={x:e}\n")).unwrap();
        prop_assert_eq!(cfg.chi, x);
        prop_assert_eq!(cfg.center, x);
    }
}
