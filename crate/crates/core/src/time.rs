//! UTC timestamps as `f64` seconds since the Unix epoch, and the sidereal
//! angle used to rotate between inertial and Earth-fixed frames.
//!
//! Leap seconds are ignored throughout.

use chrono::{DateTime, NaiveDate, SecondsFormat, TimeZone, Utc};

use crate::error::{Error, Result};

pub const SECONDS_PER_DAY: f64 = 86_400.0;
const JD_UNIX_EPOCH: f64 = 2_440_587.5;
const JD_J2000: f64 = 2_451_545.0;

/// Julian date of a Unix timestamp.
pub fn julian_date(t: f64) -> f64 {
    JD_UNIX_EPOCH + t / SECONDS_PER_DAY
}

/// Unix timestamp of J2000.0 (2000-01-01T12:00:00).
const UNIX_J2000: f64 = (JD_J2000 - JD_UNIX_EPOCH) * SECONDS_PER_DAY;
const SECONDS_PER_CENTURY: f64 = 36_525.0 * SECONDS_PER_DAY;

/// Greenwich mean sidereal angle (rad, in `[0, 2π)`), IAU 1982 polynomial.
///
/// The dominant `876600h·T` term equals elapsed seconds exactly, so it is
/// reduced modulo one day before summing to keep sub-microsecond precision.
pub fn gmst(t: f64) -> f64 {
    let dt = t - UNIX_J2000;
    let tu = dt / SECONDS_PER_CENTURY;
    let seconds = 67_310.548_41 + dt.rem_euclid(SECONDS_PER_DAY) + 8_640_184.812_866 * tu
        + 0.093_104 * tu * tu
        - 6.2e-6 * tu * tu * tu;
    (seconds.rem_euclid(SECONDS_PER_DAY) * (std::f64::consts::TAU / SECONDS_PER_DAY))
        .rem_euclid(std::f64::consts::TAU)
}

/// Time derivative of [`gmst`] (rad/s): Earth's rotation rate consistent
/// with the polynomial.
pub fn gmst_rate(t: f64) -> f64 {
    let tu = (t - UNIX_J2000) / SECONDS_PER_CENTURY;
    let dsec_dt = 1.0 + (8_640_184.812_866 + 2.0 * 0.093_104 * tu - 3.0 * 6.2e-6 * tu * tu) / SECONDS_PER_CENTURY;
    dsec_dt * (std::f64::consts::TAU / SECONDS_PER_DAY)
}

/// Unix timestamp of a TLE-style epoch (full year, fractional day of year).
pub fn from_year_day(year: i32, day_of_year: f64) -> Result<f64> {
    let day = day_of_year.floor();
    let start = NaiveDate::from_yo_opt(year, day as u32)
        .ok_or_else(|| Error::Domain(format!("invalid day {day_of_year} of year {year}")))?
        .and_hms_opt(0, 0, 0)
        .expect("midnight exists");
    let base = Utc.from_utc_datetime(&start).timestamp() as f64;
    Ok(base + (day_of_year - day) * SECONDS_PER_DAY)
}

/// Year and fractional day-of-year of a Unix timestamp.
pub fn to_year_day(t: f64) -> (i32, f64) {
    let dt = to_datetime(t);
    let year = chrono::Datelike::year(&dt);
    let jan1 = from_year_day(year, 1.0).expect("Jan 1 exists");
    (year, 1.0 + (t - jan1) / SECONDS_PER_DAY)
}

pub fn to_datetime(t: f64) -> DateTime<Utc> {
    let whole = t.floor();
    let nanos = ((t - whole) * 1e9).round() as u32;
    let (whole, nanos) = if nanos >= 1_000_000_000 { (whole + 1.0, 0) } else { (whole, nanos) };
    Utc.timestamp_opt(whole as i64, nanos).single().expect("timestamp in range")
}

pub fn from_datetime(dt: &DateTime<Utc>) -> f64 {
    dt.timestamp() as f64 + f64::from(dt.timestamp_subsec_nanos()) * 1e-9
}

/// ISO-8601 rendering with millisecond precision, e.g. `2016-09-25T12:36:04.000Z`.
pub fn format_utc(t: f64) -> String {
    to_datetime(t).to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn parse_utc(s: &str) -> Result<f64> {
    DateTime::parse_from_rfc3339(s)
        .map(|dt| from_datetime(&dt.with_timezone(&Utc)))
        .map_err(|e| Error::Parse(format!("timestamp {s:?}: {e}")))
}
