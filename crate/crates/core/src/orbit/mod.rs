//! Orbital elements, propagation, station-relative geometry and
//! common-visibility search.

mod access;
mod propagate;
mod tle;
mod topo;

pub use access::{find_access_windows, AccessWindow, WindowSample};
pub use propagate::{circular_orbit, circular_orbit_over, propagate, PropagatorModel, StateVector};
pub use tle::{parse_tle, parse_tle_file, TleRecord};
pub use topo::{station_ecef, topocentric, GroundStation, TopoSample};

use serde::{Deserialize, Serialize};

/// Earth gravitational parameter (km³/s²).
pub const MU_EARTH: f64 = 398_600.441_8;
/// WGS-84 equatorial radius (km).
pub const EARTH_RADIUS_KM: f64 = 6_378.137;
/// WGS-84 flattening.
pub const WGS84_FLATTENING: f64 = 1.0 / 298.257_223_563;
/// Second zonal harmonic.
pub const J2: f64 = 1.082_626_68e-3;

/// Mean Keplerian elements at an epoch. Angles in radians, normalized to
/// `[0, 2π)`; mean motion in revolutions per day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitElements {
    pub epoch: f64,
    pub inclination: f64,
    pub raan: f64,
    pub eccentricity: f64,
    pub arg_perigee: f64,
    pub mean_anomaly: f64,
    pub mean_motion: f64,
    /// B* drag term, carried through but unused by the propagators here.
    pub drag_term: f64,
    pub catalog_id: u32,
}

impl OrbitElements {
    /// Mean motion in rad/s.
    pub fn mean_motion_rad_s(&self) -> f64 {
        self.mean_motion * std::f64::consts::TAU / crate::time::SECONDS_PER_DAY
    }

    /// Semi-major axis (km) from Kepler's third law.
    pub fn semi_major_axis_km(&self) -> f64 {
        let n = self.mean_motion_rad_s();
        (MU_EARTH / (n * n)).cbrt()
    }

    pub fn period_s(&self) -> f64 {
        crate::time::SECONDS_PER_DAY / self.mean_motion
    }

    pub(crate) fn validate(&self) -> crate::Result<()> {
        if !(0.0..1.0).contains(&self.eccentricity) {
            return Err(crate::Error::Range {
                what: "eccentricity",
                value: self.eccentricity,
                min: 0.0,
                max: 1.0,
            });
        }
        if !(self.mean_motion > 0.0) {
            return Err(crate::Error::Range {
                what: "mean_motion",
                value: self.mean_motion,
                min: 0.0,
                max: f64::INFINITY,
            });
        }
        Ok(())
    }
}

pub(crate) fn wrap_two_pi(x: f64) -> f64 {
    let w = x.rem_euclid(std::f64::consts::TAU);
    // rem_euclid may return TAU itself for tiny negative inputs
    if w >= std::f64::consts::TAU { 0.0 } else { w }
}
