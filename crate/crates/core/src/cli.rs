//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 numeric
//! failure, 4 I/O failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_regimes, CliConfig};
use crate::dynamics::{invariant_i, total_energy, TimeSeries, Trajectory};
use crate::error::{Error, Result};
use crate::integrator::Observable;
use crate::ordinal::OrdinalConfig;
use crate::pipeline::{
    classical_row, convergence_onset, format_sig12, regime_series, run_sweep, simulate,
    OutputFormat, Quantity, Regime, SweepConfig, LMC_RESCALE,
};
use crate::poincare::{detect_crossings, Direction, SectionPoints};
use crate::quantifiers::quantify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err.root() {
        Error::NumericOverflow { .. } => EXIT_NUMERIC,
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "semiclassical",
    version,
    about = "Semiclassical oscillator simulator with ordinal-pattern entropy and complexity analysis"
)]
pub struct Cli {
    /// TOML configuration file; every key is optional.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one trajectory and write it as CSV.
    Simulate(SimulateArgs),
    /// Print the quantifiers of one column of a CSV file as JSON.
    Quantify(QuantifyArgs),
    /// Sweep the relative energy and write one row per point.
    Sweep(SweepArgs),
    /// Write Poincaré-section points of one trajectory as CSV.
    Poincare(PoincareArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// conservative, dissipative, classical (I = 0, undamped) or
    /// classical-dissipative.
    #[arg(long, default_value = "conservative")]
    pub regime: String,

    /// Relative energy E_r >= 1; converted to I with the configured energy.
    #[arg(long, conflicts_with = "invariant")]
    pub er: Option<f64>,

    /// Motion invariant I, as an alternative to --er.
    #[arg(long)]
    pub invariant: Option<f64>,

    /// Integrator step [default: 0.001].
    #[arg(long)]
    pub dt: Option<f64>,

    /// Sampling interval [default: 0.01].
    #[arg(long)]
    pub dt_sample: Option<f64>,

    /// rk4 or adaptive [default: rk4].
    #[arg(long)]
    pub method: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub run: RunArgs,

    /// Number of samples [default: 20000].
    #[arg(long)]
    pub n_samples: Option<usize>,

    #[arg(long, default_value = "trajectory.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct QuantifyArgs {
    /// CSV file with a header row.
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,

    #[arg(long, default_value = "x2")]
    pub column: String,

    /// Embedding dimension.
    #[arg(long, default_value_t = 5)]
    pub d: usize,

    /// Embedding delay.
    #[arg(long, default_value_t = 1)]
    pub tau: usize,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// conservative, dissipative or both [default: from config, both].
    #[arg(long)]
    pub regime: Option<String>,

    /// Add a c_lmc_rescaled column holding 1.196 * c_lmc.
    #[arg(long)]
    pub rescale_lmc: bool,

    /// Output path [default: sweep.csv].
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// csv or json [default: csv].
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Args)]
pub struct PoincareArgs {
    #[command(flatten)]
    pub run: RunArgs,

    /// Number of samples [default: 200000].
    #[arg(long)]
    pub n_samples: Option<usize>,

    /// Section variable: x2, p2, l, a or pa [default: a].
    #[arg(long)]
    pub section_var: Option<String>,

    /// [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub section_value: Option<f64>,

    /// ascending, descending or both [default: ascending].
    #[arg(long)]
    pub direction: Option<String>,

    /// Observable on the horizontal axis [default: x2].
    #[arg(long)]
    pub plot_x: Option<String>,

    /// Observable on the vertical axis [default: p2].
    #[arg(long)]
    pub plot_y: Option<String>,

    #[arg(long, default_value = "section.csv")]
    pub out: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => CliConfig::load(path)?,
        None => CliConfig::default(),
    };
    match cli.command {
        Command::Simulate(args) => cmd_simulate(&config, &args),
        Command::Quantify(args) => cmd_quantify(&args),
        Command::Sweep(args) => cmd_sweep(&config, &args),
        Command::Poincare(args) => cmd_poincare(&config, &args),
    }
}

/// Regime plus the invariant a single run should use.
fn resolve_run(
    config: &CliConfig,
    run: &RunArgs,
    n_samples: Option<usize>,
) -> Result<(Regime, f64, SweepConfig)> {
    let mut cfg = config.sweep_config()?;
    if let Some(dt) = run.dt {
        cfg.integrator.dt = dt;
    }
    if let Some(dt_sample) = run.dt_sample {
        cfg.integrator.dt_sample = dt_sample;
    }
    if let Some(method) = &run.method {
        cfg.integrator.method = method.parse()?;
    }
    if let Some(n) = n_samples {
        cfg.integrator.n_samples = n;
    }
    cfg.integrator.validate()?;

    let (regime, classical) = match run.regime.as_str() {
        "classical" => (Regime::Conservative, true),
        "classical-dissipative" => (Regime::Dissipative, true),
        other => (other.parse::<Regime>()?, false),
    };
    if regime == Regime::Dissipative && !cfg.params.is_dissipative() {
        return Err(Error::Config(
            "the dissipative regime needs damping > 0".into(),
        ));
    }

    let invariant = match (classical, run.er, run.invariant) {
        (true, None, None) => 0.0,
        (true, _, _) => {
            return Err(Error::Config(
                "classical runs have I = 0; drop --er/--invariant".into(),
            ))
        }
        (false, Some(er), None) => {
            crate::dynamics::invariant_for_relative_energy(cfg.energy, er, cfg.params.omega_q)
                .map_err(|e| Error::Config(e.to_string()))?
        }
        (false, None, Some(i)) => {
            if !(i >= 0.0) {
                return Err(Error::Config(format!("--invariant must be >= 0, got {i}")));
            }
            i
        }
        (false, None, None) => {
            return Err(Error::Config(
                "give --er or --invariant (or use --regime classical)".into(),
            ))
        }
        (false, Some(_), Some(_)) => unreachable!("clap rejects --er with --invariant"),
    };
    Ok((regime, invariant, cfg))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_lines(path: &Path, header: &str, lines: impl Iterator<Item = String>) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{header}").map_err(io)?;
    for line in lines {
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_trajectory_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    let p = traj.params;
    write_lines(
        path,
        "t,x2,p2,l,a,pa,energy,invariant_i",
        traj.states.iter().enumerate().map(|(k, s)| {
            [
                traj.time(k),
                s.x2,
                s.p2,
                s.l,
                s.a,
                s.pa,
                total_energy(s, &p),
                invariant_i(s),
            ]
            .map(format_sig12)
            .join(",")
        }),
    )
}

pub fn write_section_csv(points: &SectionPoints, path: &Path) -> Result<()> {
    write_lines(
        path,
        "t,plot_x,plot_y",
        points
            .points
            .iter()
            .map(|pt| [pt.t, pt.x, pt.y].map(format_sig12).join(",")),
    )
}

fn cmd_simulate(config: &CliConfig, args: &SimulateArgs) -> Result<()> {
    let (regime, invariant, cfg) = resolve_run(config, &args.run, args.n_samples)?;
    let traj = simulate(invariant, regime, &cfg)?;
    write_trajectory_csv(&traj, &args.out)?;
    eprintln!(
        "wrote {} samples ({regime}, I = {invariant}) to {}",
        traj.len(),
        args.out.display()
    );
    Ok(())
}

/// Reads one named column of a headed CSV file.
pub fn read_column(path: &Path, column: &str) -> Result<Vec<f64>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Data(format!("{}: {other:?}", path.display())),
    })?;
    let headers = rdr
        .headers()
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?
        .clone();
    let idx = headers
        .iter()
        .position(|h| h.trim() == column)
        .ok_or_else(|| {
            let available: Vec<&str> = headers.iter().collect();
            Error::Config(format!(
                "column '{column}' not found in {}; available columns: {}",
                path.display(),
                available.join(", ")
            ))
        })?;
    let mut values = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        let field = rec.get(idx).unwrap_or("").trim();
        let v: f64 = field.parse().map_err(|_| {
            Error::Data(format!(
                "{}: row {}: '{field}' is not a number",
                path.display(),
                line + 1
            ))
        })?;
        values.push(v);
    }
    Ok(values)
}

fn cmd_quantify(args: &QuantifyArgs) -> Result<()> {
    let cfg = OrdinalConfig::new(args.d, args.tau)?;
    let values = read_column(&args.input, &args.column)?;
    let series = TimeSeries::from_values(values)?;
    let report = quantify(&series, &cfg)?;
    let json = serde_json::to_string(&report).map_err(|e| Error::Data(e.to_string()))?;
    println!("{json}");
    Ok(())
}

fn cmd_sweep(config: &CliConfig, args: &SweepArgs) -> Result<()> {
    let mut cfg = config.sweep_config()?;
    if let Some(r) = &args.regime {
        cfg.regimes = parse_regimes(r)?;
    }
    if let Some(out) = &args.out {
        cfg.output = out.clone();
    }
    if let Some(f) = &args.format {
        cfg.format = f.parse::<OutputFormat>()?;
    }
    let rows = run_sweep(&cfg)?;
    let rescale = args.rescale_lmc.then_some(LMC_RESCALE);
    crate::pipeline::write_results(&rows, &cfg.output, cfg.format, rescale)?;

    let failed = rows.iter().filter(|r| !r.status.is_ok()).count();
    println!("wrote {} rows to {}", rows.len(), cfg.output.display());
    if failed > 0 {
        eprintln!("warning: {failed} points failed; see the status column");
    }

    let tol = config.sweep.onset_tol;
    let run_length = config.sweep.onset_run_length;
    println!("convergence onset (tol = {tol}, run_length = {run_length}):");
    let mut regimes = cfg.regimes.clone();
    regimes.sort();
    regimes.dedup();
    for regime in regimes {
        let Some(classical) = classical_row(&rows, regime) else {
            println!("  {regime}: classical reference failed, no onset");
            continue;
        };
        for q in [Quantity::EntropyH, Quantity::CJs, Quantity::CLmc] {
            let reference = q.of(&classical.report);
            let series = regime_series(&rows, regime, q);
            let onset = if series.is_empty() {
                None
            } else {
                convergence_onset(&series, reference, tol, run_length)?
            };
            let shown = onset.map_or_else(|| "none".to_string(), format_sig12);
            println!(
                "  {regime} {}: classical = {}, onset E_r = {shown}",
                q.name(),
                format_sig12(reference)
            );
        }
    }
    Ok(())
}

fn cmd_poincare(config: &CliConfig, args: &PoincareArgs) -> Result<()> {
    let n_samples = args.n_samples.unwrap_or(config.section.n_samples);
    let (regime, invariant, cfg) = resolve_run(config, &args.run, Some(n_samples))?;
    let mut spec = config.section_spec()?;
    if let Some(v) = &args.section_var {
        spec.variable = v.parse()?;
    }
    if let Some(v) = args.section_value {
        spec.value = v;
    }
    if let Some(d) = &args.direction {
        spec.direction = d.parse::<Direction>()?;
    }
    if let Some(x) = &args.plot_x {
        spec.plot_x = x.parse::<Observable>()?;
    }
    if let Some(y) = &args.plot_y {
        spec.plot_y = y.parse::<Observable>()?;
    }
    spec.validate()?;

    let traj = simulate(invariant, regime, &cfg)?;
    let points = detect_crossings(&traj, &spec);
    write_section_csv(&points, &args.out)?;
    eprintln!(
        "wrote {} section points to {}",
        points.len(),
        args.out.display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::Domain("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::NumericOverflow { t: 1.0 }), EXIT_NUMERIC);
        let io = Error::io("/x", std::io::Error::other("boom"));
        assert_eq!(exit_code(&io), EXIT_IO);
        let tagged = Error::AtPoint {
            er: 2.0,
            regime: "conservative".into(),
            source: Box::new(Error::NumericOverflow { t: 3.0 }),
        };
        assert_eq!(exit_code(&tagged), EXIT_NUMERIC);
    }

    #[test]
    fn bad_flags_exit_two() {
        assert_eq!(run(["semiclassical", "simulate", "--bogus"]), EXIT_CONFIG);
        assert_eq!(
            run(["semiclassical", "simulate", "--er", "0.5"]),
            EXIT_CONFIG
        );
        assert_eq!(
            run([
                "semiclassical",
                "simulate",
                "--er",
                "2",
                "--invariant",
                "0.1"
            ]),
            EXIT_CONFIG
        );
    }
}
