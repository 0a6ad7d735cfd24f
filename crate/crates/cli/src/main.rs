use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use chemowave::barriers::certify_all;
use chemowave::cauchy::{monitor_bounds, run_with, SimConfig};
use chemowave::config::{EtaSetting, InitialCondition, RunConfig, KEYS};
use chemowave::io::{csv_string, fields_csv};
use chemowave::params::{constants_report, default_eta};
use chemowave::plot::{emit_plot, PlotKind};
use chemowave::speed::{compact_bump, spreading_speed, sweep_speeds, SpeedConfig, SweepRanges, SWEEP_HEADER};
use chemowave::stability::{apriori_checks, run_stability, PerturbSpec, StabilityOptions, Verdict, DECAY_FACTOR, SLACK};
use chemowave::wave::{construct_fixed_point, construct_relax, default_wave_grid, diagnose_default, Method, WaveProblem};
use chemowave::{Error, Field, Grid};

const EXIT_ERROR: u8 = 1;
const EXIT_CHECK: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "chemowave", version, about = "Chemotaxis-logistic fronts: constants, simulations, waves, stability, speeds")]
struct Cli {
    /// key=value configuration file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Closed-form constants (c*, c**, M_chi, barrier constants)
    Constants(Common),
    /// Lab-frame Cauchy run with bound monitors
    Simulate(Common),
    /// Traveling-wave profile at speed c
    Wave(Common),
    /// Weighted-norm decay of a perturbed wave
    Stability(Common),
    /// Spreading speed from compact initial data
    Speed(Common),
    /// Spreading speeds over a parameter grid
    Sweep(SweepArgs),
    /// Residual-sign certificates for the explicit barriers
    Certify(Common),
}

#[derive(Args, Debug, Default)]
struct Common {
    #[arg(long, allow_negative_numbers = true)]
    chi: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    m: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    c: Option<String>,
    #[arg(long = "grid-left", allow_negative_numbers = true)]
    grid_left: Option<String>,
    #[arg(long = "grid-right", allow_negative_numbers = true)]
    grid_right: Option<String>,
    #[arg(long = "h", allow_negative_numbers = true)]
    h: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<String>,
    #[arg(long = "t-end", allow_negative_numbers = true)]
    t_end: Option<String>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    eta: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long = "out-dir")]
    out_dir: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    level: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    amplitude: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    width: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    center: Option<String>,
    #[arg(long = "record-every", allow_negative_numbers = true)]
    record_every: Option<String>,
    #[arg(long)]
    ic: Option<String>,
}

impl Common {
    fn pairs(&self) -> Vec<(&'static str, &String)> {
        let all = [
            ("chi", &self.chi),
            ("m", &self.m),
            ("alpha", &self.alpha),
            ("gamma", &self.gamma),
            ("c", &self.c),
            ("grid.left", &self.grid_left),
            ("grid.right", &self.grid_right),
            ("grid.h", &self.h),
            ("dt", &self.dt),
            ("t_end", &self.t_end),
            ("method", &self.method),
            ("eta", &self.eta),
            ("seed", &self.seed),
            ("out_dir", &self.out_dir),
            ("level", &self.level),
            ("samples", &self.samples),
            ("amplitude", &self.amplitude),
            ("width", &self.width),
            ("center", &self.center),
            ("record_every", &self.record_every),
            ("ic", &self.ic),
        ];
        all.into_iter().filter_map(|(k, v)| v.as_ref().map(|v| (k, v))).collect()
    }
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// comma-separated chi values
    #[arg(long, allow_negative_numbers = true, allow_hyphen_values = true)]
    chis: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    ms: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    alphas: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    gammas: Option<String>,
    /// worker threads
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

enum Failure {
    Usage(String),
    Error(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } => Failure::Usage(e.to_string()),
            Error::SpeedBelowMinimum { .. } | Error::Regime(_) => Failure::Check(e.to_string()),
            _ => Failure::Error(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Error(e.to_string())
    }
}

type Outcome = Result<Option<String>, Failure>;

fn help_keys() -> String {
    let mut s = String::from("Configuration keys (file `key=value`, flags override):\n");
    for (k, d, m) in KEYS {
        s.push_str(&format!("  {k:<13} default {d:<40} {m}\n"));
    }
    s.push_str("\nCHEMOWAVE_OUT overrides out_dir. Exit codes: 0 ok, 1 error, 2 check failed, 64 usage.\n");
    s
}

fn main() -> ExitCode {
    let cmd = <Cli as clap::CommandFactory>::command().after_help(help_keys());
    let cli = match cmd.try_get_matches().and_then(|m| <Cli as clap::FromArgMatches>::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(EXIT_CHECK)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Check(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_CHECK)
        }
        Err(Failure::Error(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn resolve(file: &Option<PathBuf>, common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match file {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    for (k, v) in common.pairs() {
        cfg.set(k, v)?;
    }
    if let Ok(dir) = std::env::var("CHEMOWAVE_OUT") {
        if !dir.is_empty() {
            cfg.out_dir = dir;
        }
    }
    Ok(cfg)
}

struct Output {
    dir: PathBuf,
    artifacts: Vec<String>,
}

impl Output {
    fn new(cfg: &RunConfig, sub: &str) -> Result<Self, Failure> {
        let dir = Path::new(&cfg.out_dir).join(sub);
        std::fs::create_dir_all(&dir)?;
        Ok(Output { dir, artifacts: Vec::new() })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn text(&mut self, name: &str, body: &str) -> Result<(), Failure> {
        std::fs::write(self.path(name), body)?;
        self.artifacts.push(name.into());
        Ok(())
    }

    fn json(&mut self, name: &str, v: &Value) -> Result<(), Failure> {
        let mut s = serde_json::to_string_pretty(v).map_err(|e| Failure::Error(e.to_string()))?;
        s.push('\n');
        self.text(name, &s)
    }

    fn plot(&mut self, csv: &str, kind: PlotKind, name: &str) -> Result<(), Failure> {
        emit_plot(&self.path(csv), kind, &self.path(name))?;
        self.artifacts.push(name.into());
        Ok(())
    }

    fn manifest(&mut self, sub: &str, cfg: &RunConfig, tolerances: Value, extra: Value) -> Result<(), Failure> {
        let m = json!({
            "tool": "chemowave",
            "version": chemowave::VERSION,
            "subcommand": sub,
            "config": cfg,
            "tolerances": tolerances,
            "artifacts": self.artifacts,
            "notes": extra,
        });
        let mut s = serde_json::to_string_pretty(&m).map_err(|e| Failure::Error(e.to_string()))?;
        s.push('\n');
        std::fs::write(self.path("manifest.json"), s)?;
        Ok(())
    }
}

fn say(s: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{s}");
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn grid_or(cfg: &RunConfig, left: f64, right: f64) -> Result<Grid, Failure> {
    Ok(Grid::from_bounds(cfg.grid_left.unwrap_or(left), cfg.grid_right.unwrap_or(right), cfg.grid_h)?)
}

fn run(cli: Cli) -> Outcome {
    match &cli.cmd {
        Cmd::Constants(c) => constants(&resolve(&cli.config, c)?),
        Cmd::Simulate(c) => simulate(&resolve(&cli.config, c)?),
        Cmd::Wave(c) => wave(&resolve(&cli.config, c)?),
        Cmd::Stability(c) => stability(&resolve(&cli.config, c)?),
        Cmd::Speed(c) => speed(&resolve(&cli.config, c)?),
        Cmd::Sweep(s) => sweep(&resolve(&cli.config, &s.common)?, s),
        Cmd::Certify(c) => certify(&resolve(&cli.config, c)?),
    }
}

fn constants(cfg: &RunConfig) -> Outcome {
    let p = cfg.params()?;
    let report = constants_report(&p, cfg.c)?;
    let v = to_json(&report);
    let mut out = Output::new(cfg, "constants")?;
    out.json("constants.json", &v)?;
    out.manifest("constants", cfg, json!({}), json!({}))?;
    say(&serde_json::to_string_pretty(&v).unwrap_or_default());
    Ok(None)
}

fn simulate(cfg: &RunConfig) -> Outcome {
    let p = cfg.params()?;
    let grid = grid_or(cfg, -50.0, 50.0)?;
    let t_end = cfg.t_end.unwrap_or(50.0);
    let u0 = match cfg.ic {
        InitialCondition::Bump => compact_bump(grid, 0.0, 5.0),
        InitialCondition::Step => Field::from_fn(grid, |x| if x < 0.0 { 1.0 } else { 0.0 }),
        InitialCondition::Positive => Field::from_fn(grid, |x| 1.0 + 0.2 * x.cos()),
    };
    let sup0 = u0.max();
    let mut sim = SimConfig::lab(p, grid, t_end);
    sim.dt = cfg.dt;
    sim.output_every = cfg.record_every.unwrap_or(1.0);
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    let mut bound_note = None;
    let (state, mon) = run_with(&sim, u0, |s| {
        rows.push([s.t, s.u.max(), s.u.min(), chemowave::speed::front_position(&s.u, cfg.level).unwrap_or(f64::NAN)]);
        match monitor_bounds(s, &p, sup0) {
            chemowave::cauchy::BoundReport::Checked(v) => violations.extend(v),
            chemowave::cauchy::BoundReport::NotApplicable(why) => bound_note = Some(why),
        }
        Ok(())
    })?;
    let mut out = Output::new(cfg, "simulate")?;
    out.text("simulate_final.csv", &fields_csv(&[("u", &state.u), ("v", &state.v)])?)?;
    out.text("simulate_monitor.csv", &csv_string(&["t", "sup_u", "inf_u", "front"], &rows))?;
    out.plot("simulate_monitor.csv", PlotKind::Monitor, "simulate_monitor.gp")?;
    let summary = json!({
        "t_end": state.t,
        "sup_u_final": state.u.max(),
        "inf_u_final": state.u.min(),
        "bound_violations": violations,
        "bound_note": bound_note,
        "warnings": mon.warnings,
        "clamp_count": mon.clamp_count,
    });
    out.json("simulate_summary.json", &summary)?;
    out.manifest("simulate", cfg, json!({"bound_slack": 1e-6}), json!({}))?;
    if violations.is_empty() {
        Ok(None)
    } else {
        Ok(Some(violations.join("; ")))
    }
}

fn build_wave(cfg: &RunConfig) -> Result<(WaveProblem, chemowave::wave::WaveProfile), Failure> {
    let p = cfg.params()?;
    let c = cfg.require_c()?;
    let mut pb = WaveProblem::new(p, c)?.with_method(cfg.method);
    let dflt = default_wave_grid(c, p.alpha, cfg.grid_h)?;
    pb.grid = grid_or(cfg, dflt.x0, dflt.right())?;
    let prof = match cfg.method {
        Method::FixedPoint => construct_fixed_point(&pb)?,
        Method::CoupledRelax => construct_relax(&pb)?,
    };
    Ok((pb, prof))
}

fn wave_tolerances(pb: &WaveProblem) -> Value {
    json!({"tol_inner": pb.tol_inner, "tol_outer": pb.tol_outer, "max_outer": pb.max_outer, "damping": pb.damping})
}

fn wave(cfg: &RunConfig) -> Outcome {
    let (pb, prof) = build_wave(cfg)?;
    let p = pb.params;
    let diag = diagnose_default(&prof, &p);
    let checks = apriori_checks(&prof, &p)?;
    let mut out = Output::new(cfg, "wave")?;
    out.text("wave_profile.csv", &fields_csv(&[("U", &prof.u), ("V", &prof.v)])?)?;
    out.plot("wave_profile.csv", PlotKind::Profile, "wave_profile.gp")?;
    out.plot("wave_profile.csv", PlotKind::LogDecay { kappa: prof.kappa }, "wave_logdecay.gp")?;
    let summary = json!({
        "profile": to_json(&prof),
        "diagnostics": match &diag { Ok(d) => to_json(d), Err(e) => json!({"error": e.to_string()}) },
        "apriori": to_json(&checks),
    });
    out.json("wave_diagnostics.json", &summary)?;
    out.manifest("wave", cfg, wave_tolerances(&pb), json!({"grid": [pb.grid.x0, pb.grid.right(), pb.grid.h]}))?;
    Ok(None)
}

fn stability(cfg: &RunConfig) -> Outcome {
    let (pb, prof) = build_wave(cfg)?;
    let p = pb.params;
    let eta = match cfg.eta {
        EtaSetting::Value(e) => e,
        EtaSetting::Auto => default_eta(&p, pb.c)?,
    };
    let spec = PerturbSpec { eta, amplitude: cfg.amplitude, center: cfg.center, width: cfg.width };
    let opts = StabilityOptions {
        t_end: cfg.t_end.unwrap_or(10.0),
        record_every: cfg.record_every.unwrap_or(0.1),
        ..StabilityOptions::default()
    };
    let rec = run_stability(&prof, &spec, &opts)?;
    let mut out = Output::new(cfg, "stability")?;
    let rows: Vec<[f64; 3]> = (0..rec.times.len()).map(|i| [rec.times[i], rec.w[i], rec.supdiff[i]]).collect();
    out.text("stability_decay.csv", &csv_string(&["t", "W", "supdiff"], &rows))?;
    out.plot("stability_decay.csv", PlotKind::Decay { lambda: rec.lambda_pred }, "stability_decay.gp")?;
    let mut summary = to_json(&rec);
    if let Value::Object(m) = &mut summary {
        for k in ["times", "W", "supdiff"] {
            m.remove(k);
        }
    }
    out.json("stability_summary.json", &summary)?;
    let mut tol = wave_tolerances(&pb);
    if let Value::Object(m) = &mut tol {
        m.insert("decay_factor".into(), json!(DECAY_FACTOR));
        m.insert("slack".into(), json!(SLACK));
        m.insert("envelope_from".into(), json!(opts.envelope_from));
        m.insert("supdiff_max".into(), json!(1e-3));
    }
    out.manifest("stability", cfg, tol, json!({"verdict": to_json(&rec.verdict)}))?;
    say(&format!("{:?}", rec.verdict));
    match rec.verdict {
        Verdict::Fail => Ok(Some(rec.reasons.join("; "))),
        _ => Ok(None),
    }
}

fn speed_config(cfg: &RunConfig, p: chemowave::Params) -> SpeedConfig {
    let mut sc = SpeedConfig::new(p);
    sc.h = cfg.grid_h;
    sc.t_end = cfg.t_end.unwrap_or(60.0);
    sc.level = cfg.level;
    sc.record_every = cfg.record_every.unwrap_or(0.5);
    sc.dt = cfg.dt;
    sc
}

fn bump_data(cfg: &RunConfig) -> Result<Field, Failure> {
    Ok(compact_bump(Grid::from_bounds(-10.0, 10.0, cfg.grid_h)?, 0.0, 5.0))
}

fn speed(cfg: &RunConfig) -> Outcome {
    let p = cfg.params()?;
    let sc = speed_config(cfg, p);
    let track = spreading_speed(&sc, &bump_data(cfg)?)?;
    let mut out = Output::new(cfg, "speed")?;
    let rows: Vec<[f64; 2]> = track.times.iter().zip(&track.positions).map(|(t, x)| [*t, *x]).collect();
    out.text("speed_front.csv", &csv_string(&["t", "position"], &rows))?;
    out.plot("speed_front.csv", PlotKind::Front, "speed_front.gp")?;
    let mut summary = to_json(&track);
    if let Value::Object(m) = &mut summary {
        m.remove("times");
        m.remove("positions");
        m.insert("c_star".into(), json!(chemowave::params::c_star(&p)));
    }
    out.json("speed_summary.json", &summary)?;
    out.manifest("speed", cfg, json!({"fit_window": "t >= t_end/2"}), json!({}))?;
    say(&chemowave::io::fmt_num(track.fitted_speed));
    Ok(None)
}

fn list(key: &str, s: &Option<String>, default: f64) -> Result<Vec<f64>, Failure> {
    match s {
        None => Ok(vec![default]),
        Some(t) if t.trim().is_empty() => Ok(Vec::new()),
        Some(t) => t
            .split(',')
            .map(|x| {
                chemowave::io::parse_field(x)
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Failure::Usage(format!("config key `{key}`: malformed number `{x}`")))
            })
            .collect(),
    }
}

fn sweep(cfg: &RunConfig, args: &SweepArgs) -> Outcome {
    let ranges = SweepRanges {
        chi: list("chis", &args.chis, cfg.chi)?,
        m: list("ms", &args.ms, cfg.m)?,
        alpha: list("alphas", &args.alphas, cfg.alpha)?,
        gamma: list("gammas", &args.gammas, cfg.gamma)?,
    };
    let sc = speed_config(cfg, chemowave::Params::default());
    let rows = sweep_speeds(&ranges, &sc, &bump_data(cfg)?, args.jobs)?;
    let header: Vec<&str> = SWEEP_HEADER.split(',').collect();
    let table: Vec<[f64; 8]> =
        rows.iter().map(|r| [r.chi, r.m, r.alpha, r.gamma, r.c_fit, r.r2, r.c_star, r.c_star_star]).collect();
    let errors: Vec<Value> = rows
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| json!({"chi": r.chi, "m": r.m, "alpha": r.alpha, "gamma": r.gamma, "error": e})))
        .collect();
    for e in &errors {
        eprintln!("sweep row failed: {e}");
    }
    let mut out = Output::new(cfg, "sweep")?;
    out.text("sweep.csv", &csv_string(&header, &table))?;
    out.manifest("sweep", cfg, json!({"fit_window": "t >= t_end/2"}), json!({"jobs": args.jobs, "row_errors": errors}))?;
    Ok(None)
}

fn certify(cfg: &RunConfig) -> Outcome {
    let p = cfg.params()?;
    let c = cfg.require_c()?;
    let grid = grid_or(cfg, -20.0, 60.0)?;
    let report = certify_all(&p, c, grid, cfg.samples, cfg.seed)?;
    let mut out = Output::new(cfg, "certify")?;
    out.json("certify.json", &to_json(&report))?;
    out.manifest(
        "certify",
        cfg,
        json!({"eps_disc": "1e-6 + 20 h^2 max|W|", "h": grid.h}),
        json!({"pass": report.pass}),
    )?;
    say(if report.pass { "PASS" } else { "FAIL" });
    if report.pass {
        Ok(None)
    } else {
        let failed: Vec<&str> = report.certificates.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        Ok(Some(format!("certificates failed: {}", failed.join(", "))))
    }
}
