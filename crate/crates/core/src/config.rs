//! TOML run configuration. Every section and key is optional; defaults
//! reproduce the reference setup (`omega_q = omega_cl = coupling = 1`,
//! `E = 0.6`, damping `0.05` for dissipative runs, `d = 5`, `tau = 1`,
//! `N = 20000`). Unknown keys are rejected.
//!
//! ```toml
//! [system]
//! energy = 0.6
//! damping = 0.05
//!
//! [integrator]
//! dt_sample = 0.01
//!
//! [sweep]
//! regimes = "both"
//! n_points = 150
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::dynamics::SystemParams;
use crate::error::{Error, Result};
use crate::integrator::{IntegratorConfig, Method, Observable};
use crate::ordinal::OrdinalConfig;
use crate::pipeline::{OutputFormat, Regime, Spacing, SweepConfig};
use crate::poincare::{Direction, SectionSpec};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub omega_q: f64,
    pub omega_cl: f64,
    pub coupling: f64,
    /// Used by dissipative runs; conservative runs always use zero.
    pub damping: f64,
    pub energy: f64,
    pub pa_sign: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        SystemSection {
            omega_q: 1.0,
            omega_cl: 1.0,
            coupling: 1.0,
            damping: 0.05,
            energy: 0.6,
            pa_sign: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSection {
    pub method: String,
    pub dt: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub dt_sample: f64,
    pub n_samples: usize,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        IntegratorSection {
            method: "rk4".into(),
            dt: d.dt,
            rel_tol: d.rel_tol,
            abs_tol: d.abs_tol,
            dt_sample: d.dt_sample,
            n_samples: d.n_samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrdinalSection {
    pub d: usize,
    pub tau: usize,
}

impl Default for OrdinalSection {
    fn default() -> Self {
        OrdinalSection { d: 5, tau: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// `conservative`, `dissipative` or `both`.
    pub regimes: String,
    pub er_min: f64,
    pub er_max: f64,
    pub n_points: usize,
    pub spacing: String,
    pub output: PathBuf,
    pub format: String,
    pub onset_tol: f64,
    pub onset_run_length: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            regimes: "both".into(),
            er_min: 1.000001,
            er_max: 4e4,
            n_points: 150,
            spacing: "log".into(),
            output: PathBuf::from("sweep.csv"),
            format: "csv".into(),
            onset_tol: 0.005,
            onset_run_length: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SectionSection {
    pub variable: String,
    pub value: f64,
    pub direction: String,
    pub plot_x: String,
    pub plot_y: String,
    /// Samples integrated for a section; longer than a sweep run so that
    /// enough crossings accumulate.
    pub n_samples: usize,
}

impl Default for SectionSection {
    fn default() -> Self {
        SectionSection {
            variable: "a".into(),
            value: 0.0,
            direction: "ascending".into(),
            plot_x: "x2".into(),
            plot_y: "p2".into(),
            n_samples: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub system: SystemSection,
    pub integrator: IntegratorSection,
    pub ordinal: OrdinalSection,
    pub sweep: SweepSection,
    pub section: SectionSection,
}

pub fn parse_regimes(s: &str) -> Result<Vec<Regime>> {
    match s {
        "both" => Ok(vec![Regime::Conservative, Regime::Dissipative]),
        other => Ok(vec![other.parse()?]),
    }
}

impl CliConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: CliConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        CliConfig::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Checks every derived configuration.
    pub fn validate(&self) -> Result<()> {
        self.sweep_config()?.validate()?;
        self.section_spec()?.validate()?;
        if self.sweep.onset_run_length == 0 {
            return Err(Error::Config("onset_run_length must be at least 1".into()));
        }
        if !(self.sweep.onset_tol >= 0.0) {
            return Err(Error::Config("onset_tol must be >= 0".into()));
        }
        if self.section.n_samples < 2 {
            return Err(Error::Config("section n_samples must be at least 2".into()));
        }
        Ok(())
    }

    pub fn system_params(&self) -> Result<SystemParams> {
        let s = &self.system;
        SystemParams::new(s.omega_q, s.omega_cl, s.coupling, s.damping)
    }

    pub fn integrator_config(&self) -> Result<IntegratorConfig> {
        let i = &self.integrator;
        let cfg = IntegratorConfig {
            method: i.method.parse::<Method>()?,
            dt: i.dt,
            rel_tol: i.rel_tol,
            abs_tol: i.abs_tol,
            dt_sample: i.dt_sample,
            n_samples: i.n_samples,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn ordinal_config(&self) -> Result<OrdinalConfig> {
        OrdinalConfig::new(self.ordinal.d, self.ordinal.tau)
    }

    pub fn sweep_config(&self) -> Result<SweepConfig> {
        let s = &self.sweep;
        Ok(SweepConfig {
            energy: self.system.energy,
            params: self.system_params()?,
            regimes: parse_regimes(&s.regimes)?,
            er_min: s.er_min,
            er_max: s.er_max,
            n_points: s.n_points,
            spacing: s.spacing.parse::<Spacing>()?,
            pa_sign: self.system.pa_sign,
            integrator: self.integrator_config()?,
            ordinal: self.ordinal_config()?,
            output: s.output.clone(),
            format: s.format.parse::<OutputFormat>()?,
        })
    }

    pub fn section_spec(&self) -> Result<SectionSpec> {
        let s = &self.section;
        let spec = SectionSpec {
            variable: s.variable.parse::<Observable>()?,
            value: s.value,
            direction: s.direction.parse::<Direction>()?,
            plot_x: s.plot_x.parse::<Observable>()?,
            plot_y: s.plot_y.parse::<Observable>()?,
        };
        spec.validate()?;
        Ok(spec)
    }
}
