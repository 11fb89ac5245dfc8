//! Command-line front end: equilibria, stability reports, simulation,
//! delay sweeps and the verification suite.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use sirdelay::acceptance;
use sirdelay::analytics::{sweep, SweepOptions};
use sirdelay::model::{find_disease_free, find_endemic};
use sirdelay::plot::svg_line_chart;
use sirdelay::stability::{analyze, ReportOptions};
use sirdelay::{integrate, presets, ScenarioConfig};

#[derive(Parser)]
#[command(name = "sirdelay", version, about = "Delayed SIR model with vaccination and treatment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List every equilibrium with its kind.
    Equilibria(Scenario),
    /// Full stability report for the target equilibrium.
    Stability(Scenario),
    /// Integrate the model and emit the time series.
    Simulate(Scenario),
    /// Classify the long-run regime over a delay grid.
    Sweep(Scenario),
    /// Run the verification suite over the bundled presets.
    Verify {
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

#[derive(Args)]
struct Scenario {
    /// Bundled preset name.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    preset: Option<String>,
    /// Scenario or bare model JSON file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Incubation delay: a value, or A:B:STEP for sweeps.
    #[arg(long)]
    tau: Option<String>,
    /// Recovery delay: a value, or A:B:STEP for sweeps.
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    horizon: Option<f64>,
    /// Fixed integration step.
    #[arg(long)]
    step: Option<f64>,
    /// Sampling interval of emitted time series.
    #[arg(long, default_value_t = 0.1)]
    stride: f64,
    /// Directory for emitted files; results go to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Also write an SVG chart of the simulated trajectory.
    #[arg(long)]
    plot: bool,
    /// Write the effective scenario to this file.
    #[arg(long)]
    dump_config: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

enum CliError {
    Config(String),
    Compute(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Compute(_) => 1,
            CliError::Config(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Compute(m) => write!(f, "computation error: {m}"),
        }
    }
}

fn config_err(e: impl fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn compute_err(e: impl fmt::Display) -> CliError {
    CliError::Compute(e.to_string())
}

type Result<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Equilibria(s) => equilibria(&s),
        Command::Stability(s) => stability(&s),
        Command::Simulate(s) => simulate(&s),
        Command::Sweep(s) => run_sweep(&s),
        Command::Verify { format } => return verify(format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sirdelay: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Parses `A` or `A:B:STEP` into the inclusive list of values.
fn parse_range(flag: &str, text: &str) -> Result<Vec<f64>> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::Config(format!("--{flag}: `{s}` is not a number")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if step <= 0.0 || b < a {
                return Err(CliError::Config(format!("--{flag}: need A <= B and STEP > 0 in `{text}`")));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|k| a + k as f64 * step).collect())
        }
        _ => Err(CliError::Config(format!("--{flag}: expected a value or A:B:STEP, got `{text}`"))),
    }
}

fn single(flag: &str, text: &Option<String>) -> Result<Option<f64>> {
    match text {
        None => Ok(None),
        Some(t) => match parse_range(flag, t)?.as_slice() {
            [v] => Ok(Some(*v)),
            _ => Err(CliError::Config(format!("--{flag}: a single value is required for this command"))),
        },
    }
}

/// Loads the scenario and applies single-valued overrides.
fn load(s: &Scenario, delays_are_ranges: bool) -> Result<ScenarioConfig> {
    let mut cfg = match (&s.preset, &s.config) {
        (Some(name), _) => presets::load(name).map_err(config_err)?,
        (None, Some(path)) => ScenarioConfig::load(path).map_err(config_err)?,
        (None, None) => return Err(CliError::Config("either --preset or --config is required".into())),
    };
    if !delays_are_ranges {
        let p = *cfg.model.params();
        let tau = single("tau", &s.tau)?.unwrap_or(p.tau);
        let delta = single("delta", &s.delta)?.unwrap_or(p.delta);
        cfg.model = cfg.model.with_delays(tau, delta).map_err(config_err)?;
    }
    if let Some(h) = s.horizon {
        cfg.horizon = h;
    }
    if let Some(h) = s.step {
        cfg.step = Some(h);
    }
    cfg.validate().map_err(config_err)?;
    if let Some(path) = &s.dump_config {
        write_file(path, &cfg.to_json())?;
    }
    Ok(cfg)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| compute_err(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| compute_err(format!("{}: {e}", path.display())))
}

/// Writes to `<out>/<file>` when `--out` is set, to stdout otherwise.
fn emit(s: &Scenario, file: &str, contents: &str) -> Result<()> {
    match &s.out {
        Some(dir) => {
            let path = dir.join(file);
            write_file(&path, contents)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        None => io::stdout().write_all(contents.as_bytes()).map_err(compute_err),
    }
}

fn scenario_label(cfg: &ScenarioConfig) -> String {
    cfg.name.clone().unwrap_or_else(|| "custom".into())
}

fn csv_string(write: impl FnOnce(&mut Vec<u8>) -> std::result::Result<(), csv::Error>) -> Result<String> {
    let mut buf = Vec::new();
    write(&mut buf).map_err(compute_err)?;
    String::from_utf8(buf).map_err(compute_err)
}

fn equilibria(s: &Scenario) -> Result<()> {
    let cfg = load(s, false)?;
    let dfe = find_disease_free(&cfg.model).equilibrium();
    let all: Vec<_> = dfe.into_iter().chain(find_endemic(&cfg.model)).collect();
    let text = match s.format {
        Some(Format::Json) => serde_json::to_string_pretty(&json!({ "scenario": scenario_label(&cfg), "equilibria": all }))
            .map_err(compute_err)?,
        Some(Format::Csv) => csv_string(|buf| {
            let mut w = csv::Writer::from_writer(buf);
            w.write_record(["kind", "x", "y", "z", "residual"])?;
            for e in &all {
                let kind = serde_json::to_value(e.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
                w.write_record([kind, e.state.x.to_string(), e.state.y.to_string(), e.state.z.to_string(), e.residual.to_string()])?;
            }
            w.flush()?;
            Ok(())
        })?,
        None => {
            let mut t = format!("{}: {} equilibria\n", scenario_label(&cfg), all.len());
            for e in &all {
                let st = e.state;
                t.push_str(&format!(
                    "  {:<12} ({:.9}, {:.9}, {:.9})  residual {:.1e}\n",
                    format!("{:?}", e.kind),
                    st.x,
                    st.y,
                    st.z,
                    e.residual
                ));
            }
            t
        }
    };
    let file = match s.format {
        Some(Format::Csv) => "equilibria.csv",
        Some(Format::Json) => "equilibria.json",
        None => "equilibria.txt",
    };
    emit(s, file, &text)
}

fn stability(s: &Scenario) -> Result<()> {
    let cfg = load(s, false)?;
    let report = analyze(&cfg, &ReportOptions::default()).map_err(compute_err)?;
    match s.format {
        Some(Format::Csv) => Err(CliError::Config("--format csv is not available for stability; use json".into())),
        Some(Format::Json) => {
            let doc = json!({ "scenario": cfg, "report": report });
            emit(s, "report.json", &serde_json::to_string_pretty(&doc).map_err(compute_err)?)
        }
        None => {
            let header = format!(
                "scenario: {} (history {}, horizon {})\n",
                scenario_label(&cfg),
                serde_json::to_string(&cfg.history).map_err(compute_err)?,
                cfg.horizon
            );
            emit(s, "report.txt", &format!("{header}{report}"))
        }
    }
}

fn simulate(s: &Scenario) -> Result<()> {
    let cfg = load(s, false)?;
    if s.format == Some(Format::Json) {
        return Err(CliError::Config("--format json is not available for simulate; time series are CSV".into()));
    }
    let traj = integrate(&cfg.model, &cfg.history, cfg.horizon, cfg.step_for(&cfg.model)).map_err(compute_err)?;
    let csv = csv_string(|buf| traj.write_csv(buf, s.stride))?;
    emit(s, "timeseries.csv", &csv)?;
    if s.plot {
        let p = cfg.model.params();
        let title = format!("{}: tau = {}, delta = {}", scenario_label(&cfg), p.tau, p.delta);
        let svg = svg_line_chart(&traj, s.stride, &title);
        let path = s.out.clone().unwrap_or_else(|| PathBuf::from(".")).join("trajectory.svg");
        write_file(&path, &svg)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn run_sweep(s: &Scenario) -> Result<()> {
    let cfg = load(s, true)?;
    let p = cfg.model.params();
    let grid: Vec<(f64, f64)> = if s.tau.is_some() || s.delta.is_some() {
        let taus = match &s.tau {
            Some(t) => parse_range("tau", t)?,
            None => vec![p.tau],
        };
        let deltas = match &s.delta {
            Some(d) => parse_range("delta", d)?,
            None => vec![p.delta],
        };
        taus.iter().flat_map(|t| deltas.iter().map(move |d| (*t, *d))).collect()
    } else {
        cfg.sweep.clone().ok_or_else(|| CliError::Config("no delay grid: pass --tau/--delta or set `sweep`".into()))?
    };
    if grid.iter().any(|(t, d)| *t < 0.0 || *d < 0.0) {
        return Err(CliError::Config("delays must be nonnegative".into()));
    }
    let opts = SweepOptions { step: cfg.step, target: cfg.target, ..Default::default() };
    let table = sweep(&cfg.model, &grid, &cfg.history, cfg.horizon, &opts).map_err(compute_err)?;
    match s.format {
        Some(Format::Csv) => emit(s, "sweep.csv", &csv_string(|buf| table.write_csv(buf))?),
        Some(Format::Json) => {
            let doc = json!({ "scenario": cfg, "sweep": table });
            emit(s, "sweep.json", &serde_json::to_string_pretty(&doc).map_err(compute_err)?)
        }
        None => {
            let mut t = format!(
                "{}: horizon {}, history {}\n{:>8} {:>8}  {:<22} {:>10} {:>10} {:>14}\n",
                scenario_label(&cfg),
                cfg.horizon,
                serde_json::to_string(&cfg.history).map_err(compute_err)?,
                "tau",
                "delta",
                "regime",
                "period",
                "amplitude",
                "max Re lambda"
            );
            for r in &table.rows {
                let (period, amp) = match r.classification.as_ref().map(|c| &c.kind) {
                    Some(sirdelay::analytics::Regime::SustainedOscillation { period, amplitude }) => {
                        (format!("{period:.3}"), format!("{amplitude:.3}"))
                    }
                    _ => (String::new(), String::new()),
                };
                let re = r.max_re_lambda.map(|v| format!("{v:.4}")).unwrap_or_default();
                t.push_str(&format!("{:>8} {:>8}  {:<22} {:>10} {:>10} {:>14}\n", r.tau, r.delta, r.label(), period, amp, re));
                if let Some(e) = &r.error {
                    t.push_str(&format!("{:>19}{e}\n", ""));
                }
            }
            emit(s, "sweep.txt", &t)
        }
    }
}

fn verify(format: Option<Format>) -> ExitCode {
    let results = acceptance::run_all();
    match format {
        Some(Format::Json) => match serde_json::to_string_pretty(&results) {
            Ok(t) => println!("{t}"),
            Err(e) => {
                eprintln!("sirdelay: computation error: {e}");
                return ExitCode::from(1);
            }
        },
        Some(Format::Csv) => {
            eprintln!("sirdelay: configuration error: --format csv is not available for verify");
            return ExitCode::from(2);
        }
        None => {
            for r in &results {
                println!("{r}");
            }
        }
    }
    let passed = results.iter().filter(|r| r.passed).count();
    eprintln!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
