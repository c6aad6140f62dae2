//! Relative-energy sweeps: one simulation and quantification per grid
//! point and regime, plus the classical (`I = 0`) reference per regime.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::dynamics::{
    initial_conditions, invariant_for_relative_energy, SystemParams, Trajectory,
};
use crate::error::{Error, Result};
use crate::integrator::{integrate, observable_series, IntegratorConfig, Observable};
use crate::ordinal::OrdinalConfig;
use crate::quantifiers::{quantify, QuantifierReport};

pub const CSV_HEADER: [&str; 10] = [
    "regime",
    "er",
    "invariant_i",
    "entropy_s",
    "entropy_h",
    "d_lmc",
    "c_lmc",
    "d_js",
    "c_js",
    "status",
];

pub const RESCALED_LMC_COLUMN: &str = "c_lmc_rescaled";

/// Presentation factor that brings `C_LMC` onto the scale of `C_JS`.
pub const LMC_RESCALE: f64 = 1.196;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Regime {
    Conservative,
    Dissipative,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Conservative => "conservative",
            Regime::Dissipative => "dissipative",
        }
    }

    /// Model parameters for this regime; conservative runs zero the damping.
    pub fn params(self, base: &SystemParams) -> SystemParams {
        match self {
            Regime::Conservative => base.with_damping(0.0),
            Regime::Dissipative => *base,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conservative" => Ok(Regime::Conservative),
            "dissipative" => Ok(Regime::Dissipative),
            other => Err(Error::Config(format!(
                "unknown regime '{other}' (expected conservative or dissipative)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Log,
    Linear,
}

impl FromStr for Spacing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" => Ok(Spacing::Log),
            "linear" => Ok(Spacing::Linear),
            other => Err(Error::Config(format!(
                "unknown spacing '{other}' (expected log or linear)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!(
                "unknown output format '{other}' (expected csv or json)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Initial energy `E(0)`, shared by both regimes.
    pub energy: f64,
    /// Damping here applies to the dissipative regime only.
    pub params: SystemParams,
    pub regimes: Vec<Regime>,
    pub er_min: f64,
    pub er_max: f64,
    pub n_points: usize,
    pub spacing: Spacing,
    pub pa_sign: f64,
    pub integrator: IntegratorConfig,
    pub ordinal: OrdinalConfig,
    pub output: PathBuf,
    pub format: OutputFormat,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            energy: 0.6,
            params: SystemParams::unit(0.05),
            regimes: vec![Regime::Conservative, Regime::Dissipative],
            er_min: 1.000001,
            er_max: 4e4,
            n_points: 150,
            spacing: Spacing::Log,
            pa_sign: 1.0,
            integrator: IntegratorConfig::default(),
            ordinal: OrdinalConfig::default(),
            output: PathBuf::from("sweep.csv"),
            format: OutputFormat::Csv,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.integrator.validate()?;
        self.ordinal.validate()?;
        if !(self.energy > 0.0 && self.energy.is_finite()) {
            return Err(Error::Config(format!(
                "energy must be positive, got {}",
                self.energy
            )));
        }
        if self.pa_sign != 1.0 && self.pa_sign != -1.0 {
            return Err(Error::Config(format!(
                "pa_sign must be 1 or -1, got {}",
                self.pa_sign
            )));
        }
        if self.regimes.contains(&Regime::Dissipative) && !self.params.is_dissipative() {
            return Err(Error::Config(
                "the dissipative regime needs damping > 0".into(),
            ));
        }
        check_grid(self.er_min, self.er_max, self.n_points)
    }
}

fn check_grid(er_min: f64, er_max: f64, n: usize) -> Result<()> {
    if !(er_min >= 1.0 && er_max > er_min && er_max.is_finite()) {
        return Err(Error::Config(format!(
            "E_r range must satisfy 1 <= er_min < er_max < inf, got [{er_min}, {er_max}]"
        )));
    }
    if n < 2 {
        return Err(Error::Config(format!(
            "need at least 2 grid points, got {n}"
        )));
    }
    Ok(())
}

/// `n` relative energies from `er_min` to `er_max` inclusive.
pub fn er_grid(er_min: f64, er_max: f64, n: usize, spacing: Spacing) -> Result<Vec<f64>> {
    check_grid(er_min, er_max, n)?;
    let last = (n - 1) as f64;
    let mut grid: Vec<f64> = match spacing {
        Spacing::Linear => (0..n)
            .map(|k| er_min + (er_max - er_min) * k as f64 / last)
            .collect(),
        Spacing::Log => {
            let (lo, hi) = (er_min.ln(), er_max.ln());
            (0..n)
                .map(|k| (lo + (hi - lo) * k as f64 / last).exp())
                .collect()
        }
    };
    grid[0] = er_min;
    grid[n - 1] = er_max;
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok,
    Error(String),
}

impl RowStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, RowStatus::Ok)
    }

    fn label(&self) -> String {
        match self {
            RowStatus::Ok => "ok".into(),
            RowStatus::Error(msg) => format!("error: {msg}"),
        }
    }

    fn parse(s: &str) -> RowStatus {
        match s.strip_prefix("error: ") {
            Some(msg) => RowStatus::Error(msg.to_string()),
            None if s == "ok" => RowStatus::Ok,
            None => RowStatus::Error(s.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub regime: Regime,
    /// Infinite for the classical reference row.
    pub er: f64,
    pub invariant_i: f64,
    pub report: QuantifierReport,
    pub status: RowStatus,
}

impl SweepRow {
    pub fn is_classical(&self) -> bool {
        self.er.is_infinite()
    }

    fn failed(regime: Regime, er: f64, invariant_i: f64, err: &Error) -> SweepRow {
        SweepRow {
            regime,
            er,
            invariant_i,
            report: QuantifierReport {
                entropy_s: f64::NAN,
                entropy_h: f64::NAN,
                d_lmc: f64::NAN,
                c_lmc: f64::NAN,
                d_js: f64::NAN,
                c_js: f64::NAN,
            },
            status: RowStatus::Error(err.to_string()),
        }
    }
}

/// The quantity a sweep column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    EntropyS,
    EntropyH,
    DLmc,
    CLmc,
    DJs,
    CJs,
}

impl Quantity {
    pub fn of(self, r: &QuantifierReport) -> f64 {
        match self {
            Quantity::EntropyS => r.entropy_s,
            Quantity::EntropyH => r.entropy_h,
            Quantity::DLmc => r.d_lmc,
            Quantity::CLmc => r.c_lmc,
            Quantity::DJs => r.d_js,
            Quantity::CJs => r.c_js,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Quantity::EntropyS => "S",
            Quantity::EntropyH => "H",
            Quantity::DLmc => "D_LMC",
            Quantity::CLmc => "C_LMC",
            Quantity::DJs => "D_JS",
            Quantity::CJs => "C_JS",
        }
    }
}

/// Trajectory for a given invariant (`0` for the classical analogue).
pub fn simulate(invariant: f64, regime: Regime, cfg: &SweepConfig) -> Result<Trajectory> {
    let params = regime.params(&cfg.params);
    let s0 = initial_conditions(cfg.energy, invariant, cfg.pa_sign, &params)?;
    integrate(&s0, &params, &cfg.integrator)
}

fn quantify_run(er: f64, invariant: f64, regime: Regime, cfg: &SweepConfig) -> Result<SweepRow> {
    let traj = simulate(invariant, regime, cfg)?;
    let series = observable_series(&traj, Observable::X2)?;
    let report = quantify(&series, &cfg.ordinal)?;
    Ok(SweepRow {
        regime,
        er,
        invariant_i: invariant,
        report,
        status: RowStatus::Ok,
    })
}

fn tag(er: f64, regime: Regime) -> impl FnOnce(Error) -> Error {
    move |e| Error::AtPoint {
        er,
        regime: regime.name().to_string(),
        source: Box::new(e),
    }
}

/// One grid point. The invariant follows from `E(0)` in both regimes.
pub fn run_point(er: f64, regime: Regime, cfg: &SweepConfig) -> Result<SweepRow> {
    let invariant = invariant_for_relative_energy(cfg.energy, er, cfg.params.omega_q)
        .map_err(tag(er, regime))?;
    quantify_run(er, invariant, regime, cfg).map_err(tag(er, regime))
}

/// Classical analogue (`I = 0`), reported with `E_r = inf`.
pub fn run_classical(regime: Regime, cfg: &SweepConfig) -> Result<SweepRow> {
    quantify_run(f64::INFINITY, 0.0, regime, cfg).map_err(tag(f64::INFINITY, regime))
}

/// Grid rows then the classical row, per regime in `Regime` order.
/// Failed points are kept with an error status.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let grid = er_grid(cfg.er_min, cfg.er_max, cfg.n_points, cfg.spacing)?;
    let mut regimes = cfg.regimes.clone();
    regimes.sort();
    regimes.dedup();

    let tasks: Vec<(Regime, f64)> = regimes
        .iter()
        .flat_map(|&r| {
            grid.iter()
                .copied()
                .chain(std::iter::once(f64::INFINITY))
                .map(move |er| (r, er))
        })
        .collect();
    log::info!("sweep: {} runs over {regimes:?}", tasks.len());

    let rows: Vec<SweepRow> = tasks
        .par_iter()
        .map(|&(regime, er)| {
            log::debug!("{regime} E_r = {er}");
            let result = if er.is_infinite() {
                run_classical(regime, cfg)
            } else {
                run_point(er, regime, cfg)
            };
            result.unwrap_or_else(|e| {
                log::warn!("{e}");
                let invariant = invariant_for_relative_energy(cfg.energy, er, cfg.params.omega_q)
                    .unwrap_or(f64::NAN);
                SweepRow::failed(regime, er, invariant, &e)
            })
        })
        .collect();
    log::info!(
        "sweep: done, {} failed",
        rows.iter().filter(|r| !r.status.is_ok()).count()
    );
    Ok(rows)
}

/// Grid rows of one regime as `(E_r, value)` pairs, skipping the classical
/// row and failed points.
pub fn regime_series(rows: &[SweepRow], regime: Regime, q: Quantity) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| r.regime == regime && !r.is_classical() && r.status.is_ok())
        .map(|r| (r.er, q.of(&r.report)))
        .collect()
}

pub fn classical_row(rows: &[SweepRow], regime: Regime) -> Option<&SweepRow> {
    rows.iter()
        .find(|r| r.regime == regime && r.is_classical() && r.status.is_ok())
}

/// Smallest grid `E_r` from which every later point lies within `tol` of
/// `classical_value`, provided that tail holds at least `run_length`
/// points.
pub fn convergence_onset(
    points: &[(f64, f64)],
    classical_value: f64,
    tol: f64,
    run_length: usize,
) -> Result<Option<f64>> {
    if points.is_empty() {
        return Err(Error::Validation(
            "no rows to search for convergence".into(),
        ));
    }
    if run_length == 0 {
        return Err(Error::Validation("run_length must be at least 1".into()));
    }
    if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return Err(Error::Validation("rows must be sorted by E_r".into()));
    }
    let mut start = points.len();
    while start > 0 && (points[start - 1].1 - classical_value).abs() <= tol {
        start -= 1;
    }
    if points.len() - start >= run_length {
        Ok(Some(points[start].0))
    } else {
        Ok(None)
    }
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros dropped.
pub fn format_sig12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        trim_zeros(&format!("{:.*}", (11 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn parse_number(s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::Data(format!("cannot parse '{s}' as a number")))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Data(format!("{}: {other:?}", path.display())),
    }
}

/// Writes rows as CSV or JSON. With `rescale_lmc`, an extra
/// `c_lmc_rescaled` column carries `factor * c_lmc`.
pub fn write_results(
    rows: &[SweepRow],
    path: &Path,
    format: OutputFormat,
    rescale_lmc: Option<f64>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    match format {
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(BufWriter::new(file));
            let mut header: Vec<&str> = CSV_HEADER.to_vec();
            if rescale_lmc.is_some() {
                header.push(RESCALED_LMC_COLUMN);
            }
            w.write_record(&header).map_err(|e| csv_err(path, e))?;
            for row in rows {
                let r = &row.report;
                let mut rec = vec![
                    row.regime.name().to_string(),
                    format_sig12(row.er),
                    format_sig12(row.invariant_i),
                    format_sig12(r.entropy_s),
                    format_sig12(r.entropy_h),
                    format_sig12(r.d_lmc),
                    format_sig12(r.c_lmc),
                    format_sig12(r.d_js),
                    format_sig12(r.c_js),
                    row.status.label(),
                ];
                if let Some(factor) = rescale_lmc {
                    rec.push(format_sig12(factor * r.c_lmc));
                }
                w.write_record(&rec).map_err(|e| csv_err(path, e))?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
        }
        OutputFormat::Json => {
            let num = |x: f64| -> Value {
                if x.is_infinite() {
                    Value::String(format_sig12(x))
                } else {
                    // NaN becomes null.
                    json!(x)
                }
            };
            let items: Vec<Value> = rows
                .iter()
                .map(|row| {
                    let r = &row.report;
                    let mut obj = json!({
                        "regime": row.regime.name(),
                        "er": num(row.er),
                        "invariant_i": num(row.invariant_i),
                        "entropy_s": num(r.entropy_s),
                        "entropy_h": num(r.entropy_h),
                        "d_lmc": num(r.d_lmc),
                        "c_lmc": num(r.c_lmc),
                        "d_js": num(r.d_js),
                        "c_js": num(r.c_js),
                        "status": row.status.label(),
                    });
                    if let Some(factor) = rescale_lmc {
                        obj[RESCALED_LMC_COLUMN] = num(factor * r.c_lmc);
                    }
                    obj
                })
                .collect();
            let mut w = BufWriter::new(file);
            serde_json::to_writer_pretty(&mut w, &items).map_err(|e| Error::io(path, e.into()))?;
            w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
            w.flush().map_err(|e| Error::io(path, e))?;
        }
    }
    Ok(())
}

/// Reads a CSV written by [`write_results`]. Extra columns are ignored.
pub fn read_results(path: &Path) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let expected: Vec<&str> = CSV_HEADER.to_vec();
    let actual: Vec<&str> = headers.iter().take(CSV_HEADER.len()).collect();
    if actual != expected {
        return Err(Error::Data(format!(
            "{}: unexpected header {:?}",
            path.display(),
            headers
        )));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let n = |k: usize| parse_number(&rec[k]);
        rows.push(SweepRow {
            regime: rec[0].parse()?,
            er: n(1)?,
            invariant_i: n(2)?,
            report: QuantifierReport {
                entropy_s: n(3)?,
                entropy_h: n(4)?,
                d_lmc: n(5)?,
                c_lmc: n(6)?,
                d_js: n(7)?,
                c_js: n(8)?,
            },
            status: RowStatus::parse(&rec[9]),
        });
    }
    Ok(rows)
}

/// Classical rows for each sampling interval, all else from `cfg`.
pub fn classical_sensitivity(
    cfg: &SweepConfig,
    dt_samples: &[f64],
) -> Result<Vec<(f64, SweepRow)>> {
    let jobs: Vec<(f64, Regime)> = dt_samples
        .iter()
        .flat_map(|&dt| cfg.regimes.iter().map(move |&r| (dt, r)))
        .collect();
    jobs.par_iter()
        .map(|&(dt_sample, regime)| {
            let mut c = cfg.clone();
            c.integrator.dt_sample = dt_sample;
            run_classical(regime, &c).map(|row| (dt_sample, row))
        })
        .collect()
}
