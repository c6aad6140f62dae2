//! Poincaré sections from sampled trajectories.
//!
//! A crossing is a sign change of `variable - value` between adjacent
//! samples. Every emitted coordinate is linearly interpolated at the
//! crossing fraction, so the error is quadratic in the sampling interval.

use std::str::FromStr;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::integrator::Observable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `variable - value` goes from negative to non-negative.
    Ascending,
    /// `variable - value` goes from positive to non-positive.
    Descending,
    Both,
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ascending" => Ok(Direction::Ascending),
            "descending" => Ok(Direction::Descending),
            "both" => Ok(Direction::Both),
            other => Err(Error::Config(format!(
                "unknown direction '{other}' (expected ascending, descending or both)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionSpec {
    pub variable: Observable,
    pub value: f64,
    pub direction: Direction,
    pub plot_x: Observable,
    pub plot_y: Observable,
}

impl Default for SectionSpec {
    /// `A = 0`, ascending, plotted in the `(x2, p2)` plane.
    fn default() -> Self {
        SectionSpec {
            variable: Observable::A,
            value: 0.0,
            direction: Direction::Ascending,
            plot_x: Observable::X2,
            plot_y: Observable::P2,
        }
    }
}

impl SectionSpec {
    pub fn validate(&self) -> Result<()> {
        if self.variable == Observable::Energy {
            return Err(Error::Config(
                "section variable must be one of x2, p2, l, a, pa".into(),
            ));
        }
        if !self.value.is_finite() {
            return Err(Error::Config(format!(
                "section value must be finite, got {}",
                self.value
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

/// Crossings in time order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SectionPoints {
    pub points: Vec<SectionPoint>,
}

impl SectionPoints {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn lerp(a: f64, b: f64, f: f64) -> f64 {
    a + f * (b - a)
}

pub fn detect_crossings(traj: &Trajectory, spec: &SectionSpec) -> SectionPoints {
    let p = &traj.params;
    let offset = |k: usize| spec.variable.value(&traj.states[k], p) - spec.value;
    let mut points = Vec::new();
    for k in 0..traj.len().saturating_sub(1) {
        let g0 = offset(k);
        let g1 = offset(k + 1);
        let up = g0 < 0.0 && g1 >= 0.0;
        let down = g0 > 0.0 && g1 <= 0.0;
        let hit = match spec.direction {
            Direction::Ascending => up,
            Direction::Descending => down,
            Direction::Both => up || down,
        };
        if !hit {
            continue;
        }
        let f = g0 / (g0 - g1);
        let (s0, s1) = (&traj.states[k], &traj.states[k + 1]);
        points.push(SectionPoint {
            x: lerp(spec.plot_x.value(s0, p), spec.plot_x.value(s1, p), f),
            y: lerp(spec.plot_y.value(s0, p), spec.plot_y.value(s1, p), f),
            t: lerp(traj.time(k), traj.time(k + 1), f),
        });
    }
    SectionPoints { points }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{DynState, SystemParams};
    use std::f64::consts::PI;

    fn sinusoid(dt: f64, t_end: f64) -> Trajectory {
        let n = (t_end / dt).floor() as usize + 1;
        let states = (0..n)
            .map(|k| {
                let t = k as f64 * dt;
                DynState::new(1.0 + 0.5 * t.cos(), 0.0, 0.0, t.sin(), t.cos())
            })
            .collect();
        Trajectory {
            params: SystemParams::unit(0.0),
            t0: 0.0,
            dt_sample: dt,
            states,
        }
    }

    #[test]
    fn sinusoid_zeros() {
        let traj = sinusoid(0.01, 20.0 * PI + 0.5);
        let up = detect_crossings(&traj, &SectionSpec::default());
        assert_eq!(up.len(), 10);
        for (k, pt) in up.points.iter().enumerate() {
            assert!(
                (pt.t - 2.0 * PI * (k + 1) as f64).abs() < 1e-3,
                "t = {}",
                pt.t
            );
        }
        let both = detect_crossings(
            &traj,
            &SectionSpec {
                direction: Direction::Both,
                ..SectionSpec::default()
            },
        );
        assert_eq!(both.len(), 2 * up.len());
        assert!(both.points.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn interpolated_variable_sits_on_section() {
        let traj = sinusoid(0.05, 30.0);
        let spec = SectionSpec {
            value: 0.3,
            direction: Direction::Both,
            plot_x: Observable::A,
            ..SectionSpec::default()
        };
        let pts = detect_crossings(&traj, &spec);
        assert!(!pts.is_empty());
        for pt in &pts.points {
            assert!((pt.x - 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn no_crossings() {
        let traj = Trajectory {
            params: SystemParams::unit(0.0),
            t0: 0.0,
            dt_sample: 0.1,
            states: vec![DynState::new(1.0, 1.0, 0.0, 1.0, 0.0); 100],
        };
        assert!(detect_crossings(&traj, &SectionSpec::default()).is_empty());
        let single = Trajectory {
            states: vec![DynState::default()],
            ..traj
        };
        assert!(detect_crossings(&single, &SectionSpec::default()).is_empty());
    }

    #[test]
    fn energy_is_not_a_section_variable() {
        let spec = SectionSpec {
            variable: Observable::Energy,
            ..SectionSpec::default()
        };
        assert!(spec.validate().is_err());
        assert!("sideways".parse::<Direction>().is_err());
    }
}
