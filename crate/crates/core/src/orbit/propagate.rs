use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use super::{wrap_two_pi, OrbitElements, EARTH_RADIUS_KM, J2, MU_EARTH};
use crate::error::{Error, Result};
use crate::time::{self, SECONDS_PER_DAY};

/// Largest |t − epoch| the propagators accept.
pub const PROPAGATION_LIMIT_DAYS: f64 = 7.0;

/// Inertial (TEME-like, Earth-centered) position and velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub t: f64,
    /// km
    pub position: Vector3<f64>,
    /// km/s
    pub velocity: Vector3<f64>,
}

impl StateVector {
    /// Specific orbital energy (km²/s²).
    pub fn specific_energy(&self) -> f64 {
        0.5 * self.velocity.norm_squared() - MU_EARTH / self.position.norm()
    }

    /// Specific angular momentum magnitude (km²/s).
    pub fn angular_momentum(&self) -> f64 {
        self.position.cross(&self.velocity).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagatorModel {
    /// Pure Keplerian motion.
    TwoBody,
    /// Keplerian motion with secular J2 drift of the node and perigee.
    #[default]
    J2Secular,
}

/// Propagate with the default model ([`PropagatorModel::J2Secular`]).
pub fn propagate(elements: &OrbitElements, t: f64) -> Result<StateVector> {
    elements.propagate(t, PropagatorModel::default())
}

impl OrbitElements {
    pub fn propagate(&self, t: f64, model: PropagatorModel) -> Result<StateVector> {
        let dt = t - self.epoch;
        if dt.abs() > PROPAGATION_LIMIT_DAYS * SECONDS_PER_DAY {
            return Err(Error::PropagationWindow {
                offset_days: dt / SECONDS_PER_DAY,
                limit_days: PROPAGATION_LIMIT_DAYS,
            });
        }
        let n = self.mean_motion_rad_s();
        let a = self.semi_major_axis_km();
        let e = self.eccentricity;

        let (raan_rate, argp_rate) = match model {
            PropagatorModel::TwoBody => (0.0, 0.0),
            PropagatorModel::J2Secular => {
                let p = a * (1.0 - e * e);
                let k = 1.5 * n * J2 * (EARTH_RADIUS_KM / p).powi(2);
                let (si, ci) = self.inclination.sin_cos();
                (-k * ci, 0.5 * k * (4.0 - 5.0 * si * si))
            }
        };
        let raan = self.raan + raan_rate * dt;
        let argp = self.arg_perigee + argp_rate * dt;
        let mean_anomaly = wrap_two_pi(self.mean_anomaly + n * dt);
        let ecc_anomaly = solve_kepler(mean_anomaly, e);
        let (se, ce) = ecc_anomaly.sin_cos();
        let root = (1.0 - e * e).sqrt();
        let r = a * (1.0 - e * ce);
        let perifocal_r = Vector3::new(a * (ce - e), a * root * se, 0.0);
        let vfac = (MU_EARTH * a).sqrt() / r;
        let perifocal_v = Vector3::new(-vfac * se, vfac * root * ce, 0.0);

        let plane = Rotation3::from_axis_angle(&Vector3::z_axis(), raan)
            * Rotation3::from_axis_angle(&Vector3::x_axis(), self.inclination);
        let rot = plane * Rotation3::from_axis_angle(&Vector3::z_axis(), argp);
        let position = rot * perifocal_r;
        // the drifting node and perigee rotate the orbit frame itself
        let frame_spin = Vector3::z() * raan_rate + plane * Vector3::z() * argp_rate;
        let velocity = rot * perifocal_v + frame_spin.cross(&position);
        Ok(StateVector { t, position, velocity })
    }
}

/// Newton iteration on Kepler's equation `E − e·sin E = M`.
pub(crate) fn solve_kepler(mean_anomaly: f64, e: f64) -> f64 {
    let mut ecc = if e < 0.8 { mean_anomaly } else { std::f64::consts::PI };
    for _ in 0..50 {
        let f = ecc - e * ecc.sin() - mean_anomaly;
        let step = f / (1.0 - e * ecc.cos());
        ecc -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    ecc
}

/// Circular orbit at `altitude_km` above the equatorial radius.
/// The satellite sits on the ascending node at `epoch`.
pub fn circular_orbit(altitude_km: f64, inclination_deg: f64, raan_deg: f64, epoch: f64) -> Result<OrbitElements> {
    if !(200.0..=2000.0).contains(&altitude_km) {
        return Err(Error::Range { what: "altitude_km", value: altitude_km, min: 200.0, max: 2000.0 });
    }
    if !(0.0..=180.0).contains(&inclination_deg) {
        return Err(Error::Range { what: "inclination_deg", value: inclination_deg, min: 0.0, max: 180.0 });
    }
    let a = EARTH_RADIUS_KM + altitude_km;
    let n = (MU_EARTH / (a * a * a)).sqrt();
    Ok(OrbitElements {
        epoch,
        inclination: inclination_deg.to_radians(),
        raan: wrap_two_pi(raan_deg.to_radians()),
        eccentricity: 0.0,
        arg_perigee: 0.0,
        mean_anomaly: 0.0,
        mean_motion: n * SECONDS_PER_DAY / std::f64::consts::TAU,
        drag_term: 0.0,
        catalog_id: 0,
    })
}

/// Circular orbit whose sub-satellite point at `epoch` is the given
/// (geocentric) latitude/longitude, on the ascending or descending half of
/// the orbit. Used to anchor a pass geometry while sweeping altitude.
pub fn circular_orbit_over(
    altitude_km: f64,
    inclination_deg: f64,
    latitude_deg: f64,
    longitude_deg: f64,
    ascending: bool,
    epoch: f64,
) -> Result<OrbitElements> {
    let mut el = circular_orbit(altitude_km, inclination_deg, 0.0, epoch)?;
    let (si, ci) = el.inclination.sin_cos();
    let ratio = latitude_deg.to_radians().sin() / si;
    if ratio.abs() > 1.0 {
        return Err(Error::Domain(format!(
            "latitude {latitude_deg} deg unreachable at inclination {inclination_deg} deg"
        )));
    }
    let u_asc = ratio.asin();
    let u = if ascending { u_asc } else { std::f64::consts::PI - u_asc };
    let (su, cu) = u.sin_cos();
    let right_ascension_offset = (ci * su).atan2(cu);
    el.raan = wrap_two_pi(longitude_deg.to_radians() + time::gmst(epoch) - right_ascension_offset);
    el.mean_anomaly = wrap_two_pi(u);
    Ok(el)
}
