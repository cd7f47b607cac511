//! Quasi-static point-mass speed model.
//!
//! With drag `d = e·v²` and uniform straight flight at elevation `φ`, the
//! propulsive power is `P = e·v³ + m·g·v·sin φ`. Calibrating against the
//! level-cruise limit (`φ = 0`) and the vertical-climb limit (`φ = 90°`)
//! fixes both the drag factor `e` and the maximum power `P_max`; the speed
//! at any other elevation is the positive root of `P(v) = P_max`.

use crate::grid::{GridSpec, LinkClass};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub const GRAVITY: f64 = 9.81;

const ROOT_REL_TOL: f64 = 1e-10;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerformanceError {
    #[error("max horizontal speed ({v_mh}) must exceed max vertical speed ({v_mv})")]
    DegenerateSpeeds { v_mv: f64, v_mh: f64 },
    #[error("mass and speeds must be positive and finite (m={m}, v_mv={v_mv}, v_mh={v_mh})")]
    InvalidParameter { m: f64, v_mv: f64, v_mh: f64 },
    #[error("speed scale {0} must lie in (0, 1]")]
    InvalidScale(f64),
    #[error("unknown aircraft type `{0}`")]
    UnknownAircraft(String),
}

/// Manufacturer data for one aircraft type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AircraftSpec {
    pub m: f64,
    pub v_mv: f64,
    pub v_mh: f64,
}

/// Calibrated performance record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AircraftPerformance {
    pub name: String,
    pub mass: f64,
    pub v_mv: f64,
    pub v_mh: f64,
    /// Drag factor `e` in `d = e·v²`, kg/m.
    pub drag: f64,
    /// Maximum propulsive power, W.
    pub p_max: f64,
}

impl AircraftPerformance {
    pub fn calibrate(
        name: impl Into<String>,
        m: f64,
        v_mv: f64,
        v_mh: f64,
    ) -> Result<Self, PerformanceError> {
        let finite_positive = |x: f64| x.is_finite() && x > 0.0;
        if !(finite_positive(m) && finite_positive(v_mv) && finite_positive(v_mh)) {
            return Err(PerformanceError::InvalidParameter { m, v_mv, v_mh });
        }
        if v_mh <= v_mv {
            return Err(PerformanceError::DegenerateSpeeds { v_mv, v_mh });
        }
        // e·v_mh³ = e·v_mv³ + m·g·v_mv
        let drag = m * GRAVITY * v_mv / (v_mh.powi(3) - v_mv.powi(3));
        Ok(Self {
            name: name.into(),
            mass: m,
            v_mv,
            v_mh,
            drag,
            p_max: drag * v_mh.powi(3),
        })
    }

    pub fn from_spec(
        name: impl Into<String>,
        spec: AircraftSpec,
    ) -> Result<Self, PerformanceError> {
        Self::calibrate(name, spec.m, spec.v_mv, spec.v_mh)
    }

    /// Power needed to hold speed `v` along a straight path at elevation `phi`.
    pub fn power_at(&self, v: f64, phi: f64) -> f64 {
        self.drag * v.powi(3) + self.mass * GRAVITY * v * phi.abs().sin()
    }

    /// Largest sustainable speed along a straight path at elevation `phi`.
    /// Climb and descent are treated alike, so only `|phi|` matters.
    pub fn max_speed_at_angle(&self, phi: f64) -> f64 {
        let phi = phi.abs().min(std::f64::consts::FRAC_PI_2);
        if phi == 0.0 {
            return self.v_mh;
        }
        let residual = |v: f64| self.power_at(v, phi) - self.p_max;
        let tol = ROOT_REL_TOL * self.p_max;
        let (mut lo, mut hi) = (self.v_mv, self.v_mh);
        if residual(lo).abs() <= tol {
            return lo;
        }
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..MAX_BISECTIONS {
            mid = 0.5 * (lo + hi);
            let f = residual(mid);
            if f.abs() <= tol * 1e-3 || hi - lo <= f64::EPSILON * hi {
                break;
            }
            if f > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        mid
    }

    /// Planned speed along a link: `scale` times the maximum at the link's elevation.
    pub fn link_speed(&self, link: &LinkClass, scale: f64) -> Result<f64, PerformanceError> {
        check_scale(scale)?;
        Ok(scale * self.max_speed_at_angle(link.elevation))
    }

    pub fn link_time(&self, link: &LinkClass, scale: f64) -> Result<f64, PerformanceError> {
        Ok(link.length / self.link_speed(link, scale)?)
    }

    /// Planned speeds for every link class of `grid`.
    pub fn link_speeds(
        &self,
        grid: &GridSpec,
        scale: f64,
    ) -> Result<Vec<(LinkClass, f64)>, PerformanceError> {
        grid.link_table()
            .into_iter()
            .map(|c| Ok((c, self.link_speed(&c, scale)?)))
            .collect()
    }
}

pub fn check_scale(scale: f64) -> Result<f64, PerformanceError> {
    if scale > 0.0 && scale <= 1.0 {
        Ok(scale)
    } else {
        Err(PerformanceError::InvalidScale(scale))
    }
}

/// Named aircraft types, calibrated on load. Ordered by name.
#[derive(Debug, Clone, PartialEq)]
pub struct Fleet {
    specs: BTreeMap<String, AircraftSpec>,
    aircraft: BTreeMap<String, AircraftPerformance>,
}

impl Fleet {
    pub fn from_specs(specs: BTreeMap<String, AircraftSpec>) -> Result<Self, PerformanceError> {
        let aircraft = specs
            .iter()
            .map(|(name, s)| {
                Ok((
                    name.clone(),
                    AircraftPerformance::from_spec(name.clone(), *s)?,
                ))
            })
            .collect::<Result<_, PerformanceError>>()?;
        Ok(Self { specs, aircraft })
    }

    /// The four multirotors used in the reference simulations.
    pub fn reference() -> Self {
        let specs = [
            ("DJI Mavic Air", 0.43, 4.0, 19.0),
            ("Self-Built Drone", 0.3, 4.0, 12.0),
            ("DJI Phantom 4", 1.375, 3.0, 20.0),
            ("DJI Matrice 600 Pro", 10.0, 5.0, 18.0),
        ]
        .into_iter()
        .map(|(n, m, v_mv, v_mh)| (n.to_string(), AircraftSpec { m, v_mv, v_mh }))
        .collect();
        Self::from_specs(specs).expect("reference fleet is valid")
    }

    /// A single-type fleet.
    pub fn single(name: &str, spec: AircraftSpec) -> Result<Self, PerformanceError> {
        Self::from_specs(BTreeMap::from([(name.to_string(), spec)]))
    }

    pub fn from_json(text: &str) -> Result<Self, FleetLoadError> {
        let specs: BTreeMap<String, AircraftSpec> = serde_json::from_str(text)?;
        Ok(Self::from_specs(specs)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.specs).expect("fleet specs serialize")
    }

    pub fn get(&self, name: &str) -> Result<&AircraftPerformance, PerformanceError> {
        self.aircraft
            .get(name)
            .ok_or_else(|| PerformanceError::UnknownAircraft(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.aircraft.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &AircraftPerformance> {
        self.aircraft.values()
    }

    pub fn specs(&self) -> &BTreeMap<String, AircraftSpec> {
        &self.specs
    }

    pub fn len(&self) -> usize {
        self.aircraft.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aircraft.is_empty()
    }
}

impl Default for Fleet {
    fn default() -> Self {
        Self::reference()
    }
}

#[derive(Debug, Error)]
pub enum FleetLoadError {
    #[error("fleet file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Performance(#[from] PerformanceError),
}
