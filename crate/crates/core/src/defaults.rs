//! Built-in orbit, ground stations and reference values.

use crate::orbit::GroundStation;

/// Micius-class element set at 2016-09-25 12:36:04 UTC.
///
/// Catalog number, designator, epoch, inclination, eccentricity and mean
/// motion follow the public record for the satellite; RAAN and mean anomaly
/// were fitted so that a Delingha–Lijiang common pass and a high Ngari pass
/// fall within the propagation guard. Not an archived TLE.
pub const MICIUS_TLE: &str = "MICIUS
1 41731U 16051A   16269.52504630  .00000520  00000-0  27000-4 0  9998
2 41731  97.3700 359.9853 0010000  90.0000 329.7630 15.24670000  5983
";

pub struct StationInfo {
    pub name: &'static str,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub altitude_m: f64,
    pub source: &'static str,
}

impl StationInfo {
    pub fn station(&self) -> GroundStation {
        GroundStation::from_degrees(self.name, self.latitude_deg, self.longitude_deg, self.altitude_m)
    }
}

pub const NGARI: StationInfo = StationInfo {
    name: "Ngari",
    latitude_deg: 32.326,
    longitude_deg: 80.026,
    altitude_m: 5047.0,
    source: "Ngari observatory, Tibet; coordinates from published site surveys",
};

pub const DELINGHA: StationInfo = StationInfo {
    name: "Delingha",
    latitude_deg: 37.378,
    longitude_deg: 97.727,
    altitude_m: 3153.0,
    source: "Delingha station, Qinghai; coordinates from published site surveys",
};

pub const LIJIANG: StationInfo = StationInfo {
    name: "Lijiang",
    latitude_deg: 26.694,
    longitude_deg: 100.029,
    altitude_m: 3200.0,
    source: "Gaomeigu (Lijiang) observatory, Yunnan; coordinates from published site surveys",
};

pub fn station_by_name(name: &str) -> Option<&'static StationInfo> {
    [&NGARI, &DELINGHA, &LIJIANG].into_iter().find(|s| s.name.eq_ignore_ascii_case(name))
}

/// Apertures used for the improved-terminal reference point.
pub const IMPROVED_R_S_M: f64 = 0.75;
pub const IMPROVED_R_R_M: f64 = 1.2;

pub const PULSE_RATE_WARNING: &str =
    "pulse_rate_hz = 1e14 reproduces the per-second block size behind the orbit totals; it is a simulation convention, not a realizable source rate";
