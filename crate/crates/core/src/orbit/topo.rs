use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{StateVector, EARTH_RADIUS_KM, WGS84_FLATTENING};
use crate::time;

/// Geodetic site on the WGS-84 ellipsoid. Latitude/longitude in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStation {
    pub name: String,
    pub latitude: f64,
    pub longitude: f64,
    pub altitude_m: f64,
}

impl GroundStation {
    pub fn from_degrees(name: &str, latitude_deg: f64, longitude_deg: f64, altitude_m: f64) -> Self {
        let mut lon = longitude_deg.to_radians().rem_euclid(std::f64::consts::TAU);
        if lon > std::f64::consts::PI {
            lon -= std::f64::consts::TAU;
        }
        Self { name: name.to_string(), latitude: latitude_deg.to_radians(), longitude: lon, altitude_m }
    }

    /// Local east, north and up unit vectors in the Earth-fixed frame.
    pub fn enu_basis(&self) -> [Vector3<f64>; 3] {
        let (sp, cp) = self.latitude.sin_cos();
        let (sl, cl) = self.longitude.sin_cos();
        [
            Vector3::new(-sl, cl, 0.0),
            Vector3::new(-sp * cl, -sp * sl, cp),
            Vector3::new(cp * cl, cp * sl, sp),
        ]
    }
}

/// Earth-fixed position of a station (km).
pub fn station_ecef(station: &GroundStation) -> Vector3<f64> {
    let f = WGS84_FLATTENING;
    let e2 = f * (2.0 - f);
    let (sp, cp) = station.latitude.sin_cos();
    let (sl, cl) = station.longitude.sin_cos();
    let n = EARTH_RADIUS_KM / (1.0 - e2 * sp * sp).sqrt();
    let h = station.altitude_m / 1000.0;
    Vector3::new((n + h) * cp * cl, (n + h) * cp * sl, (n * (1.0 - e2) + h) * sp)
}

/// Satellite geometry seen from one station at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopoSample {
    pub t: f64,
    pub elevation: f64,
    pub azimuth: f64,
    pub range_m: f64,
    /// Positive when the satellite recedes.
    pub range_rate_mps: f64,
}

impl TopoSample {
    /// Line-of-sight unit vector in the station's (east, north, up) frame.
    pub fn line_of_sight_enu(&self) -> Vector3<f64> {
        let (se, ce) = self.elevation.sin_cos();
        let (sa, ca) = self.azimuth.sin_cos();
        Vector3::new(ce * sa, ce * ca, se)
    }
}

/// Rotate an inertial state into the Earth-fixed frame (km, km/s).
pub(crate) fn inertial_to_fixed(state: &StateVector) -> (Vector3<f64>, Vector3<f64>) {
    let theta = time::gmst(state.t);
    let omega = time::gmst_rate(state.t);
    let (s, c) = theta.sin_cos();
    let rot = |v: &Vector3<f64>| Vector3::new(c * v.x + s * v.y, -s * v.x + c * v.y, v.z);
    let r = rot(&state.position);
    let v = rot(&state.velocity) - Vector3::new(0.0, 0.0, omega).cross(&r);
    (r, v)
}

/// Inverse of [`inertial_to_fixed`].
#[cfg(test)]
pub(crate) fn fixed_to_inertial(t: f64, r: Vector3<f64>, v: Vector3<f64>) -> StateVector {
    let theta = time::gmst(t);
    let omega = time::gmst_rate(t);
    let (s, c) = theta.sin_cos();
    let rot = |w: &Vector3<f64>| Vector3::new(c * w.x - s * w.y, s * w.x + c * w.y, w.z);
    let v_inertial_fixedaxes = v + Vector3::new(0.0, 0.0, omega).cross(&r);
    StateVector { t, position: rot(&r), velocity: rot(&v_inertial_fixedaxes) }
}

/// Elevation, azimuth, range and range rate of `state` from `station`.
/// Elevation may be negative; callers filter.
pub fn topocentric(state: &StateVector, station: &GroundStation) -> TopoSample {
    let (r_sat, v_sat) = inertial_to_fixed(state);
    let rho = r_sat - station_ecef(station);
    let range = rho.norm();
    let los = rho / range;
    let [east, north, up] = station.enu_basis();
    let elevation = los.dot(&up).clamp(-1.0, 1.0).asin();
    let azimuth = los.dot(&east).atan2(los.dot(&north)).rem_euclid(std::f64::consts::TAU);
    TopoSample {
        t: state.t,
        elevation,
        azimuth,
        range_m: range * 1000.0,
        range_rate_mps: los.dot(&v_sat) * 1000.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::{circular_orbit, propagate};

    fn zenith_state(station: &GroundStation, altitude_km: f64, t: f64) -> StateVector {
        let [_, _, up] = station.enu_basis();
        let r = station_ecef(station) + up * altitude_km;
        fixed_to_inertial(t, r, Vector3::zeros())
    }

    #[test]
    fn zenith_geometry() {
        let site = GroundStation::from_degrees("Ngari", 32.3, 80.0, 5047.0);
        let t = 1.4748e9;
        let s = zenith_state(&site, 500.0, t);
        let topo = topocentric(&s, &site);
        assert!((topo.elevation.to_degrees() - 90.0).abs() < 0.1);
        assert!((topo.range_m / 1000.0 - 500.0).abs() < 1.0);
        assert!(topo.range_rate_mps.abs() < 1e-6);
    }

    #[test]
    fn range_rate_matches_finite_difference() {
        let el = circular_orbit(500.0, 97.4, 190.0, 1.4748e9).unwrap();
        let site = GroundStation::from_degrees("Delingha", 37.378, 97.727, 3153.0);
        for k in 0..40 {
            let t = el.epoch + 150.0 * k as f64;
            let at = |t: f64| topocentric(&propagate(&el, t).unwrap(), &site);
            let fd = (at(t + 0.5).range_m - at(t - 0.5).range_m) / 1.0;
            assert!((at(t).range_rate_mps - fd).abs() < 0.1, "k={k} {} {fd}", at(t).range_rate_mps);
        }
    }

    #[test]
    fn azimuth_elevation_reconstruct_line_of_sight() {
        let el = circular_orbit(600.0, 60.0, 10.0, 1.4748e9).unwrap();
        let site = GroundStation::from_degrees("x", -20.0, 150.0, 100.0);
        for k in 0..50 {
            let s = propagate(&el, el.epoch + 97.0 * k as f64).unwrap();
            let topo = topocentric(&s, &site);
            let (r, _) = inertial_to_fixed(&s);
            let direct = (r - station_ecef(&site)).normalize();
            let [e, n, u] = site.enu_basis();
            let rebuilt = topo.line_of_sight_enu();
            let rebuilt = e * rebuilt.x + n * rebuilt.y + u * rebuilt.z;
            assert!((rebuilt - direct).norm() < 1e-9);
        }
    }

    #[test]
    fn fixed_inertial_round_trip() {
        let el = circular_orbit(500.0, 97.4, 10.0, 1.4748e9).unwrap();
        let s = propagate(&el, el.epoch + 321.0).unwrap();
        let (r, v) = inertial_to_fixed(&s);
        let back = fixed_to_inertial(s.t, r, v);
        assert!((back.position - s.position).norm() < 1e-9);
        assert!((back.velocity - s.velocity).norm() < 1e-12);
    }

    #[test]
    fn longitude_normalized() {
        let st = GroundStation::from_degrees("w", 0.0, 190.0, 0.0);
        assert!((st.longitude.to_degrees() + 170.0).abs() < 1e-12);
        let st = GroundStation::from_degrees("e", 0.0, -180.0, 0.0);
        assert!((st.longitude.to_degrees() - 180.0).abs() < 1e-12);
    }
}
