//! Time stepping and uniform sampling of the flow.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    invariant_i, total_energy, vector_field, DynState, SystemParams, TimeSeries, Trajectory,
};
use crate::error::{Error, Result};

/// Largest relative mismatch tolerated between `dt_sample` and a whole
/// number of fixed steps.
const STEP_MULTIPLE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Classical fixed-step fourth-order Runge-Kutta.
    Rk4,
    /// Dormand-Prince 5(4) with error control.
    Adaptive,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Method::Rk4),
            "adaptive" => Ok(Method::Adaptive),
            other => Err(Error::Config(format!(
                "unknown integration method '{other}' (expected rk4 or adaptive)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step, or the initial trial step for the adaptive method.
    pub dt: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub dt_sample: f64,
    pub n_samples: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rk4,
            dt: 1e-3,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            dt_sample: 0.01,
            n_samples: 20_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("dt", self.dt),
            ("dt_sample", self.dt_sample),
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.n_samples == 0 {
            return Err(Error::Config("n_samples must be at least 1".into()));
        }
        if self.method == Method::Rk4 {
            self.substeps()?;
        }
        Ok(())
    }

    /// Number of fixed steps per sampling interval.
    pub fn substeps(&self) -> Result<usize> {
        let ratio = self.dt_sample / self.dt;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > STEP_MULTIPLE_SLACK * ratio {
            return Err(Error::Config(format!(
                "dt_sample ({}) must be an integer multiple of dt ({})",
                self.dt_sample, self.dt
            )));
        }
        Ok(n as usize)
    }

    pub fn duration(&self) -> f64 {
        (self.n_samples.saturating_sub(1)) as f64 * self.dt_sample
    }
}

fn rk4(s: &DynState, p: &SystemParams, h: f64) -> DynState {
    let k1 = vector_field(s, p);
    let k2 = vector_field(&s.add_scaled(0.5 * h, k1), p);
    let k3 = vector_field(&s.add_scaled(0.5 * h, k2), p);
    let k4 = vector_field(&s.add_scaled(h, k3), p);
    let a = k1.to_array();
    let b = k2.to_array();
    let c = k3.to_array();
    let d = k4.to_array();
    let mut out = s.to_array();
    for i in 0..DynState::DIM {
        out[i] += h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]);
    }
    DynState::from_array(out)
}

/// One fourth-order Runge-Kutta step. A failure reports `t` as the
/// elapsed time `dt` from `state`.
pub fn step(state: &DynState, params: &SystemParams, dt: f64) -> Result<DynState> {
    if !(dt >= 0.0) {
        return Err(Error::Domain(format!("step size must be >= 0, got {dt}")));
    }
    if !state.is_finite() {
        return Err(Error::NumericOverflow { t: 0.0 });
    }
    let next = rk4(state, params, dt);
    if !next.is_finite() {
        return Err(Error::NumericOverflow { t: dt });
    }
    Ok(next)
}

// Dormand-Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Returns the fifth-order solution and the scaled error norm.
fn dopri_trial(
    s: &DynState,
    p: &SystemParams,
    h: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> (DynState, f64) {
    debug_assert_eq!(DP_C.len(), DP_A.len());
    let y0 = s.to_array();
    let mut k = [[0.0; 5]; 7];
    for stage in 0..7 {
        let mut y = y0;
        for (j, kj) in k.iter().enumerate().take(stage) {
            let a = DP_A[stage][j];
            if a != 0.0 {
                for i in 0..5 {
                    y[i] += h * a * kj[i];
                }
            }
        }
        k[stage] = vector_field(&DynState::from_array(y), p).to_array();
    }
    let mut y5 = y0;
    let mut err_sq = 0.0;
    for i in 0..5 {
        let mut hi = 0.0;
        let mut lo = 0.0;
        for stage in 0..7 {
            hi += DP_B5[stage] * k[stage][i];
            lo += DP_B4[stage] * k[stage][i];
        }
        y5[i] += h * hi;
        let scale = abs_tol + rel_tol * y0[i].abs().max(y5[i].abs());
        let e = h * (hi - lo) / scale;
        err_sq += e * e;
    }
    (DynState::from_array(y5), (err_sq / 5.0).sqrt())
}

struct Adaptive {
    h: f64,
}

impl Adaptive {
    const SAFETY: f64 = 0.9;
    const MIN_SHRINK: f64 = 0.2;
    const MAX_GROW: f64 = 5.0;
    const MAX_REJECTS: usize = 200;

    /// Advances `s` from `t` to exactly `t_end`.
    fn advance(
        &mut self,
        mut s: DynState,
        p: &SystemParams,
        mut t: f64,
        t_end: f64,
        cfg: &IntegratorConfig,
    ) -> Result<DynState> {
        let mut rejects = 0;
        while t < t_end {
            let remaining = t_end - t;
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h };
            let (next, err) = dopri_trial(&s, p, h, cfg.rel_tol, cfg.abs_tol);
            let factor = if err == 0.0 {
                Self::MAX_GROW
            } else {
                (Self::SAFETY * err.powf(-0.2)).clamp(Self::MIN_SHRINK, Self::MAX_GROW)
            };
            if err <= 1.0 && next.is_finite() {
                s = next;
                t = if last { t_end } else { t + h };
                if !last || factor < 1.0 {
                    self.h = h * factor;
                }
                rejects = 0;
            } else {
                rejects += 1;
                if rejects > Self::MAX_REJECTS {
                    return Err(Error::NumericOverflow { t });
                }
                self.h = h * if err.is_finite() {
                    factor
                } else {
                    Self::MIN_SHRINK
                };
            }
        }
        Ok(s)
    }
}

/// Samples `cfg.n_samples` states at spacing `cfg.dt_sample`, starting
/// with `state0` at `t = 0`.
pub fn integrate(
    state0: &DynState,
    params: &SystemParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    params.validate()?;
    if !state0.is_finite() {
        return Err(Error::NumericOverflow { t: 0.0 });
    }
    let i0 = invariant_i(state0);
    if i0 < -1e-12 * (state0.x2 * state0.p2).abs().max(1.0) {
        return Err(Error::Domain(format!(
            "initial state is inadmissible: I = {i0} < 0"
        )));
    }

    let mut states = Vec::with_capacity(cfg.n_samples);
    states.push(*state0);
    let mut s = *state0;
    match cfg.method {
        Method::Rk4 => {
            let n_sub = cfg.substeps()?;
            let h = cfg.dt_sample / n_sub as f64;
            for k in 1..cfg.n_samples {
                for j in 0..n_sub {
                    s = rk4(&s, params, h);
                    if !s.is_finite() {
                        let t = (k - 1) as f64 * cfg.dt_sample + (j + 1) as f64 * h;
                        return Err(Error::NumericOverflow { t });
                    }
                }
                states.push(s);
            }
        }
        Method::Adaptive => {
            let mut ctl = Adaptive {
                h: cfg.dt.min(cfg.dt_sample),
            };
            for k in 1..cfg.n_samples {
                let t = (k - 1) as f64 * cfg.dt_sample;
                s = ctl.advance(s, params, t, k as f64 * cfg.dt_sample, cfg)?;
                states.push(s);
            }
        }
    }

    Ok(Trajectory {
        params: *params,
        t0: 0.0,
        dt_sample: cfg.dt_sample,
        states,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observable {
    X2,
    P2,
    L,
    A,
    Pa,
    Energy,
}

impl Observable {
    pub const ALL: [Observable; 6] = [
        Observable::X2,
        Observable::P2,
        Observable::L,
        Observable::A,
        Observable::Pa,
        Observable::Energy,
    ];

    pub fn value(self, s: &DynState, p: &SystemParams) -> f64 {
        match self {
            Observable::X2 => s.x2,
            Observable::P2 => s.p2,
            Observable::L => s.l,
            Observable::A => s.a,
            Observable::Pa => s.pa,
            Observable::Energy => total_energy(s, p),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Observable::X2 => "x2",
            Observable::P2 => "p2",
            Observable::L => "l",
            Observable::A => "a",
            Observable::Pa => "pa",
            Observable::Energy => "energy",
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Observable::ALL
            .into_iter()
            .find(|o| o.name() == lower)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown observable '{s}' (expected one of x2, p2, l, a, pa, energy)"
                ))
            })
    }
}

pub fn observable_series(traj: &Trajectory, observable: Observable) -> Result<TimeSeries> {
    let values = traj
        .states
        .iter()
        .map(|s| observable.value(s, &traj.params))
        .collect();
    TimeSeries::new(traj.dt_sample, values)
}
