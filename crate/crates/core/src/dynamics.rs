//! Model constants, the five-variable mean-value flow, and its conserved
//! quantities.
//!
//! The semiclassical system (expectation values of a quantum oscillator
//! coupled to a classical reservoir) and its fully classical analogue share
//! the same right-hand side in the variables `(x2, p2, l, a, pa)`. The
//! classical system is the same flow restricted to the manifold `I = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficient on the square root in the `x2(0)` recipe. With `I = 0` this
/// gives `x2(0) = 0.02 E / omega_q`.
const X2_OFFSET_FRACTION: f64 = 0.98;

/// Relative slack for radicands that should be zero but land slightly
/// negative through rounding (the `E_r = 1` edge).
const RADICAND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega_q: f64,
    pub omega_cl: f64,
    pub coupling: f64,
    /// Damping on the reservoir momentum; zero means conservative.
    pub damping: f64,
}

impl SystemParams {
    pub fn new(omega_q: f64, omega_cl: f64, coupling: f64, damping: f64) -> Result<Self> {
        let p = SystemParams {
            omega_q,
            omega_cl,
            coupling,
            damping,
        };
        p.validate()?;
        Ok(p)
    }

    /// `omega_q = omega_cl = coupling = 1` with the given damping.
    pub fn unit(damping: f64) -> Self {
        SystemParams {
            omega_q: 1.0,
            omega_cl: 1.0,
            coupling: 1.0,
            damping,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.omega_q, self.omega_cl, self.coupling, self.damping]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("system parameters must be finite".into()));
        }
        if self.omega_q <= 0.0 || self.omega_cl <= 0.0 {
            return Err(Error::Config(format!(
                "frequencies must be positive (omega_q = {}, omega_cl = {})",
                self.omega_q, self.omega_cl
            )));
        }
        if self.coupling < 0.0 {
            return Err(Error::Config(format!(
                "coupling must be >= 0, got {}",
                self.coupling
            )));
        }
        if self.damping < 0.0 {
            return Err(Error::Config(format!(
                "damping must be >= 0, got {}",
                self.damping
            )));
        }
        Ok(())
    }

    pub fn is_dissipative(&self) -> bool {
        self.damping > 0.0
    }

    pub fn with_damping(self, damping: f64) -> Self {
        SystemParams { damping, ..self }
    }
}

/// `x2 = <x^2>`, `p2 = <p^2>`, `l = <xp + px>` (or `x^2`, `p^2`, `2xp` on
/// the classical manifold), and the reservoir pair `a`, `pa`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DynState {
    pub x2: f64,
    pub p2: f64,
    pub l: f64,
    pub a: f64,
    pub pa: f64,
}

impl DynState {
    pub const DIM: usize = 5;

    pub fn new(x2: f64, p2: f64, l: f64, a: f64, pa: f64) -> Self {
        DynState { x2, p2, l, a, pa }
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.x2, self.p2, self.l, self.a, self.pa]
    }

    pub fn from_array(v: [f64; 5]) -> Self {
        DynState::new(v[0], v[1], v[2], v[3], v[4])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// `self + h * rate`, componentwise.
    pub(crate) fn add_scaled(self, h: f64, rate: DynState) -> DynState {
        DynState {
            x2: self.x2 + h * rate.x2,
            p2: self.p2 + h * rate.p2,
            l: self.l + h * rate.l,
            a: self.a + h * rate.a,
            pa: self.pa + h * rate.pa,
        }
    }
}

/// Uniformly sampled state history; `states[k]` is the state at
/// `t0 + k * dt_sample`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: SystemParams,
    pub t0: f64,
    pub dt_sample: f64,
    pub states: Vec<DynState>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt_sample
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    dt_sample: f64,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(dt_sample: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt_sample > 0.0 && dt_sample.is_finite()) {
            return Err(Error::Validation(format!(
                "sampling interval must be positive, got {dt_sample}"
            )));
        }
        if values.is_empty() {
            return Err(Error::Validation("time series is empty".into()));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite value {} at index {k}",
                values[k]
            )));
        }
        Ok(TimeSeries { dt_sample, values })
    }

    /// Unit sampling interval, for series that carry no time axis.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        TimeSeries::new(1.0, values)
    }

    pub fn dt_sample(&self) -> f64 {
        self.dt_sample
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Time derivative of every component. Its divergence is `-damping`.
pub fn vector_field(s: &DynState, p: &SystemParams) -> DynState {
    let stiffness = p.omega_q + p.coupling * s.a * s.a;
    DynState {
        x2: p.omega_q * s.l,
        p2: -stiffness * s.l,
        l: 2.0 * (p.omega_q * s.p2 - stiffness * s.x2),
        a: p.omega_cl * s.pa,
        pa: -s.a * (p.omega_cl + p.coupling * s.x2) - p.damping * s.pa,
    }
}

/// `x2 * p2 - l^2 / 4`. Negative values mark an inadmissible state.
pub fn invariant_i(s: &DynState) -> f64 {
    s.x2 * s.p2 - 0.25 * s.l * s.l
}

/// Mean value of the Hamiltonian.
pub fn total_energy(s: &DynState, p: &SystemParams) -> f64 {
    0.5 * (p.omega_q * (s.x2 + s.p2)
        + p.omega_cl * (s.a * s.a + s.pa * s.pa)
        + p.coupling * s.a * s.a * s.x2)
}

/// `|E| / (sqrt(I) omega_q)`. For damped runs pass the initial energy.
pub fn relative_energy(energy: f64, invariant: f64, omega_q: f64) -> Result<f64> {
    if !(invariant > 0.0) {
        return Err(Error::Domain(format!(
            "relative energy needs I > 0 (got {invariant}); I = 0 is the classical limit E_r -> inf"
        )));
    }
    if !(omega_q > 0.0) {
        return Err(Error::Domain(format!("omega_q must be > 0, got {omega_q}")));
    }
    Ok(energy.abs() / (invariant.sqrt() * omega_q))
}

/// Inverse of [`relative_energy`]: `I = (E / (E_r omega_q))^2`. An infinite
/// `E_r` maps to the classical `I = 0`.
pub fn invariant_for_relative_energy(energy: f64, er: f64, omega_q: f64) -> Result<f64> {
    if er.is_nan() || er < 1.0 {
        return Err(Error::Domain(format!(
            "relative energy must satisfy E_r >= 1 (uncertainty bound), got {er}"
        )));
    }
    if er.is_infinite() {
        return Ok(0.0);
    }
    let r = energy.abs() / (er * omega_q);
    Ok(r * r)
}

/// Initial state with `L(0) = A(0) = 0` and the given energy and invariant.
pub fn initial_conditions(
    energy: f64,
    invariant: f64,
    pa_sign: f64,
    params: &SystemParams,
) -> Result<DynState> {
    initial_conditions_with_l(energy, invariant, 0.0, pa_sign, params)
}

/// Same recipe with a nonzero `L(0)`, where `I_L = I + L(0)^2 / 4` replaces
/// `I` under the square root.
pub fn initial_conditions_with_l(
    energy: f64,
    invariant: f64,
    l0: f64,
    pa_sign: f64,
    params: &SystemParams,
) -> Result<DynState> {
    params
        .validate()
        .map_err(|e| Error::Domain(e.to_string()))?;
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(Error::Domain(format!("energy must be > 0, got {energy}")));
    }
    if !(invariant >= 0.0 && invariant.is_finite()) {
        return Err(Error::Domain(format!(
            "invariant must be >= 0, got {invariant}"
        )));
    }
    if pa_sign != 1.0 && pa_sign != -1.0 {
        return Err(Error::Domain(format!(
            "pa_sign must be +1 or -1, got {pa_sign}"
        )));
    }

    let e_over_w = energy / params.omega_q;
    let i_l = invariant + 0.25 * l0 * l0;
    let bound = e_over_w * e_over_w;
    let mut radicand = bound - i_l;
    if radicand < 0.0 {
        if radicand < -RADICAND_SLACK * bound {
            return Err(Error::Domain(format!(
                "uncertainty bound violated (E_r < 1): I_L = {i_l} > (E/omega_q)^2 = {bound}"
            )));
        }
        radicand = 0.0;
    }
    let x2 = e_over_w - X2_OFFSET_FRACTION * radicand.sqrt();
    let p2 = if i_l > 0.0 { i_l / x2 } else { 0.0 };

    let a = 0.0;
    let mut pa_radicand = 2.0 * energy
        - params.omega_q * (x2 + p2)
        - params.coupling * a * a * x2
        - params.omega_cl * a * a;
    if pa_radicand < 0.0 {
        if pa_radicand < -RADICAND_SLACK * energy {
            return Err(Error::Domain(format!(
                "energy insufficient for P_A(0): radicand {pa_radicand}"
            )));
        }
        pa_radicand = 0.0;
    }
    let pa = pa_sign * pa_radicand.sqrt() / params.omega_cl.sqrt();

    Ok(DynState {
        x2,
        p2,
        l: l0,
        a,
        pa,
    })
}
