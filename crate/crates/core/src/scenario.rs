//! Scenario files: strict JSON schema, default resolution and round-trip.
//!
//! Every key is optional except `satellite` and `stations`; anything left
//! out takes its default and the substitution is recorded. Unknown keys are
//! rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::channel::{calibrate_slant_mode, ChannelParams, FixedLosses, SlantMode, TurbulenceProfile};
use crate::defaults::{self, PULSE_RATE_WARNING};
use crate::error::{Error, Result};
use crate::mdi::{IntensitySetting, ProtocolParams};
use crate::orbit::{circular_orbit, circular_orbit_over, parse_tle, GroundStation, OrbitElements, PropagatorModel};
use crate::time;

// ---------------------------------------------------------------------------
// file schema

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScenario {
    pub satellite: Option<RawSatellite>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub propagator: Option<PropagatorModel>,
    pub stations: Option<Vec<RawStation>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel: Option<RawChannel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub turbulence: Option<RawTurbulence>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub protocol: Option<RawProtocol>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<RawSearch>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intensities: Option<IntensityPlan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub availability_factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSatellite {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tle: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tle_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub circular: Option<CircularSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircularSpec {
    pub altitude_km: f64,
    pub inclination_deg: f64,
    /// Epoch of the elements (RFC 3339).
    pub epoch: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raan_deg: Option<f64>,
    /// Alternative to `raan_deg`: pass over this point at `epoch`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub over: Option<OverSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverSpec {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub ascending: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawStation {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub latitude_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub longitude_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub altitude_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    /// Per-station channel overrides, merged over the global channel.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel: Option<RawChannel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub turbulence: Option<RawTurbulence>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawChannel {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wavelength_nm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_s_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_r_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_losses_db: Option<RawLosses>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divergence_urad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_elevation_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slant_mode: Option<SlantChoice>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawLosses {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optical: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub antenna: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detection: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTurbulence {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wind_rms_mps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_max_m: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawProtocol {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_e: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pulse_rate_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finite_size: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSearch {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlantChoice {
    /// Whichever mode best reproduces the reference pass losses.
    Calibrated,
    Literal,
    ZenithR0,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum IntensityPlan {
    Fixed(FixedIntensities),
    Optimize(OptimizeSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedIntensities {
    pub mu_a: f64,
    pub nu_a: f64,
    pub mu_b: f64,
    pub nu_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSpec {
    pub slot_seconds: f64,
}

impl FixedIntensities {
    pub fn setting(&self) -> IntensitySetting {
        IntensitySetting { mu_a: self.mu_a, nu_a: self.nu_a, mu_b: self.mu_b, nu_b: self.nu_b, omega: 0.0 }
    }
}

// ---------------------------------------------------------------------------
// resolved scenario

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SatelliteSource {
    Tle(String),
    Circular(CircularSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Station {
    pub name: String,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub altitude_m: f64,
    pub source: String,
    pub channel_override: Option<RawChannel>,
    pub turbulence_override: Option<RawTurbulence>,
}

impl Station {
    pub fn ground_station(&self) -> GroundStation {
        GroundStation::from_degrees(&self.name, self.latitude_deg, self.longitude_deg, self.altitude_m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Search {
    pub t0: f64,
    pub t1: f64,
    pub step_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub satellite: SatelliteSource,
    pub elements: OrbitElements,
    pub propagator: PropagatorModel,
    pub stations: Vec<Station>,
    /// Global channel as written (fully populated after resolution).
    pub channel: RawChannel,
    pub turbulence: RawTurbulence,
    pub protocol: ProtocolParams,
    pub search: Search,
    pub intensities: IntensityPlan,
    pub seed: u64,
    pub availability_factor: f64,
}

/// Scenario plus the list of defaults that were filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub scenario: Scenario,
    pub defaults_applied: Vec<String>,
    pub warnings: Vec<String>,
}

fn default_channel() -> RawChannel {
    let c = ChannelParams::default();
    let l = c.fixed_losses;
    RawChannel {
        wavelength_nm: Some(c.wavelength_m * 1e9),
        r_s_m: Some(c.r_s_m),
        r_r_m: Some(c.r_r_m),
        fixed_losses_db: Some(RawLosses {
            optical: Some(l.optical_db),
            antenna: Some(l.antenna_db),
            coupling: Some(l.coupling_db),
            detection: Some(l.detection_db),
        }),
        divergence_urad: Some(c.divergence_urad),
        min_elevation_deg: Some(c.min_elevation_rad.to_degrees()),
        slant_mode: Some(SlantChoice::Calibrated),
    }
}

fn default_turbulence() -> RawTurbulence {
    let t = TurbulenceProfile::default();
    RawTurbulence { c0: Some(t.c0), wind_rms_mps: Some(t.wind_rms_mps), z_max_m: Some(t.z_max_m) }
}

/// Field-wise `top` over `base`, logging every field taken from `base`
/// under `prefix` when `log` is given.
fn merge_channel(top: Option<&RawChannel>, base: &RawChannel, prefix: &str, log: Option<&mut Vec<String>>) -> RawChannel {
    let empty = RawChannel::default();
    let t = top.unwrap_or(&empty);
    let mut taken = Vec::new();
    macro_rules! pick {
        ($f:ident) => {{
            if t.$f.is_none() {
                taken.push(format!("{prefix}.{}", stringify!($f)));
            }
            t.$f.clone().or_else(|| base.$f.clone())
        }};
    }
    let empty_losses = RawLosses::default();
    let tl = t.fixed_losses_db.as_ref().unwrap_or(&empty_losses);
    let bl = base.fixed_losses_db.clone().unwrap_or_default();
    let mut loss = |v: Option<f64>, b: Option<f64>, name: &str| {
        if v.is_none() {
            taken.push(format!("{prefix}.fixed_losses_db.{name}"));
        }
        v.or(b)
    };
    let fixed_losses_db = Some(RawLosses {
        optical: loss(tl.optical, bl.optical, "optical"),
        antenna: loss(tl.antenna, bl.antenna, "antenna"),
        coupling: loss(tl.coupling, bl.coupling, "coupling"),
        detection: loss(tl.detection, bl.detection, "detection"),
    });
    let merged = RawChannel {
        wavelength_nm: pick!(wavelength_nm),
        r_s_m: pick!(r_s_m),
        r_r_m: pick!(r_r_m),
        fixed_losses_db,
        divergence_urad: pick!(divergence_urad),
        min_elevation_deg: pick!(min_elevation_deg),
        slant_mode: pick!(slant_mode),
    };
    if let Some(log) = log {
        log.extend(taken);
    }
    merged
}

fn merge_turbulence(top: Option<&RawTurbulence>, base: &RawTurbulence, prefix: &str, log: Option<&mut Vec<String>>) -> RawTurbulence {
    let empty = RawTurbulence::default();
    let t = top.unwrap_or(&empty);
    let mut taken = Vec::new();
    let mut pick = |v: Option<f64>, b: Option<f64>, name: &str| {
        if v.is_none() {
            taken.push(format!("{prefix}.{name}"));
        }
        v.or(b)
    };
    let merged = RawTurbulence {
        c0: pick(t.c0, base.c0, "c0"),
        wind_rms_mps: pick(t.wind_rms_mps, base.wind_rms_mps, "wind_rms_mps"),
        z_max_m: pick(t.z_max_m, base.z_max_m, "z_max_m"),
    };
    if let Some(log) = log {
        log.extend(taken);
    }
    merged
}

fn need(v: Option<f64>, what: &str) -> Result<f64> {
    v.ok_or_else(|| Error::Schema(format!("missing key `{what}`")))
}

static CALIBRATED: once_cell::sync::Lazy<Result<SlantMode>> = once_cell::sync::Lazy::new(|| calibrate_slant_mode().map(|c| c.chosen));

/// The slant mode picked by calibration against the reference pass.
pub fn calibrated_slant_mode() -> Result<SlantMode> {
    CALIBRATED.clone()
}

fn channel_params(c: &RawChannel) -> Result<ChannelParams> {
    let l = c.fixed_losses_db.clone().unwrap_or_default();
    let slant_mode = match c.slant_mode.unwrap_or(SlantChoice::Calibrated) {
        SlantChoice::Calibrated => calibrated_slant_mode()?,
        SlantChoice::Literal => SlantMode::Literal,
        SlantChoice::ZenithR0 => SlantMode::ZenithR0,
    };
    let p = ChannelParams {
        wavelength_m: need(c.wavelength_nm, "channel.wavelength_nm")? * 1e-9,
        r_s_m: need(c.r_s_m, "channel.r_s_m")?,
        r_r_m: need(c.r_r_m, "channel.r_r_m")?,
        fixed_losses: FixedLosses {
            optical_db: need(l.optical, "channel.fixed_losses_db.optical")?,
            antenna_db: need(l.antenna, "channel.fixed_losses_db.antenna")?,
            coupling_db: need(l.coupling, "channel.fixed_losses_db.coupling")?,
            detection_db: need(l.detection, "channel.fixed_losses_db.detection")?,
        },
        divergence_urad: need(c.divergence_urad, "channel.divergence_urad")?,
        min_elevation_rad: need(c.min_elevation_deg, "channel.min_elevation_deg")?.to_radians(),
        slant_mode,
    };
    p.validate()?;
    Ok(p)
}

impl Scenario {
    /// Resolved channel for station `i` (global values with its overrides).
    pub fn channel_for(&self, i: usize) -> Result<ChannelParams> {
        let merged = merge_channel(self.stations[i].channel_override.as_ref(), &self.channel, "", None);
        channel_params(&merged)
    }

    /// Resolved turbulence profile for station `i`.
    pub fn turbulence_for(&self, i: usize) -> Result<TurbulenceProfile> {
        let merged = merge_turbulence(self.stations[i].turbulence_override.as_ref(), &self.turbulence, "", None);
        let p = TurbulenceProfile {
            c0: need(merged.c0, "turbulence.c0")?,
            wind_rms_mps: need(merged.wind_rms_mps, "turbulence.wind_rms_mps")?,
            z_max_m: need(merged.z_max_m, "turbulence.z_max_m")?,
            site_altitude_m: self.stations[i].altitude_m,
        };
        p.validate()?;
        Ok(p)
    }

    /// Global channel (no station overrides).
    pub fn global_channel(&self) -> Result<ChannelParams> {
        channel_params(&self.channel)
    }

    pub fn ground_stations(&self) -> Vec<GroundStation> {
        self.stations.iter().map(Station::ground_station).collect()
    }

    /// Fully explicit file form; loading it back gives an equal scenario.
    pub fn to_raw(&self) -> RawScenario {
        let satellite = match &self.satellite {
            SatelliteSource::Tle(text) => RawSatellite { tle: Some(text.clone()), tle_file: None, circular: None },
            SatelliteSource::Circular(c) => RawSatellite { tle: None, tle_file: None, circular: Some(c.clone()) },
        };
        RawScenario {
            satellite: Some(satellite),
            propagator: Some(self.propagator),
            stations: Some(
                self.stations
                    .iter()
                    .map(|s| RawStation {
                        name: s.name.clone(),
                        latitude_deg: Some(s.latitude_deg),
                        longitude_deg: Some(s.longitude_deg),
                        altitude_m: Some(s.altitude_m),
                        source: Some(s.source.clone()),
                        channel: s.channel_override.clone(),
                        turbulence: s.turbulence_override.clone(),
                    })
                    .collect(),
            ),
            channel: Some(self.channel.clone()),
            turbulence: Some(self.turbulence.clone()),
            protocol: Some(RawProtocol {
                e_d: Some(self.protocol.e_d),
                e_0: Some(self.protocol.e_0),
                f_e: Some(self.protocol.f_e),
                y_0: Some(self.protocol.y_0),
                pulse_rate_hz: Some(self.protocol.pulse_rate_hz),
                n_sigma: Some(self.protocol.n_sigma),
                finite_size: Some(self.protocol.finite_size),
            }),
            search: Some(RawSearch {
                t0: Some(time::format_utc(self.search.t0)),
                t1: Some(time::format_utc(self.search.t1)),
                step_s: Some(self.search.step_s),
            }),
            intensities: Some(self.intensities),
            seed: Some(self.seed),
            availability_factor: Some(self.availability_factor),
        }
    }

    pub fn to_json_value(&self) -> Value {
        serde_json::to_value(self.to_raw()).expect("scenario serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("scenario serializes") + "\n"
    }
}

fn classify(e: serde_json::Error) -> Error {
    use serde_json::error::Category;
    match e.classify() {
        Category::Syntax | Category::Eof | Category::Io => Error::Parse(e.to_string()),
        Category::Data => Error::Schema(e.to_string()),
    }
}

/// Parses scenario JSON text. Relative `tle_file` paths resolve against `base_dir`.
pub fn parse_scenario(text: &str, base_dir: Option<&Path>) -> Result<Loaded> {
    let value: Value = serde_json::from_str(text).map_err(classify)?;
    scenario_from_value(value, base_dir)
}

pub fn scenario_from_value(value: Value, base_dir: Option<&Path>) -> Result<Loaded> {
    let raw: RawScenario = serde_json::from_value(value).map_err(classify)?;
    resolve(raw, base_dir)
}

pub fn load_scenario(path: &Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text, path.parent())
}

pub fn save_scenario(scenario: &Scenario, path: &Path) -> Result<()> {
    std::fs::write(path, scenario.to_json_string())?;
    Ok(())
}

fn resolve(raw: RawScenario, base_dir: Option<&Path>) -> Result<Loaded> {
    let mut log = Vec::new();
    let mut warnings = Vec::new();

    let sat = raw.satellite.ok_or_else(|| Error::Schema("missing key `satellite`".into()))?;
    let given = [sat.tle.is_some(), sat.tle_file.is_some(), sat.circular.is_some()].iter().filter(|b| **b).count();
    if given != 1 {
        return Err(Error::Schema("`satellite` needs exactly one of `tle`, `tle_file`, `circular`".into()));
    }
    let (satellite, elements) = if let Some(text) = sat.tle {
        let el = parse_tle(&text)?;
        (SatelliteSource::Tle(text), el)
    } else if let Some(file) = sat.tle_file {
        let path = match base_dir {
            Some(dir) if Path::new(&file).is_relative() => dir.join(&file),
            _ => file.clone().into(),
        };
        let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let el = parse_tle(&text)?;
        (SatelliteSource::Tle(text), el)
    } else {
        let c = sat.circular.expect("counted above");
        let epoch = time::parse_utc(&c.epoch)?;
        let el = match (&c.over, c.raan_deg) {
            (Some(o), None) => circular_orbit_over(c.altitude_km, c.inclination_deg, o.latitude_deg, o.longitude_deg, o.ascending, epoch)?,
            (None, Some(raan)) => circular_orbit(c.altitude_km, c.inclination_deg, raan, epoch)?,
            _ => return Err(Error::Schema("`satellite.circular` needs exactly one of `raan_deg`, `over`".into())),
        };
        (SatelliteSource::Circular(c), el)
    };

    let propagator = raw.propagator.unwrap_or_else(|| {
        log.push("propagator".into());
        PropagatorModel::default()
    });

    let raw_stations = raw.stations.ok_or_else(|| Error::Schema("missing key `stations`".into()))?;
    if raw_stations.is_empty() || raw_stations.len() > 2 {
        return Err(Error::Invariant(format!("scenario needs 1 or 2 stations, got {}", raw_stations.len())));
    }
    let mut stations = Vec::new();
    for (i, s) in raw_stations.into_iter().enumerate() {
        let known = defaults::station_by_name(&s.name);
        let mut coord = |v: Option<f64>, d: Option<f64>, key: &str| -> Result<f64> {
            match (v, d) {
                (Some(v), _) => Ok(v),
                (None, Some(d)) => {
                    log.push(format!("stations[{i}].{key}"));
                    Ok(d)
                }
                (None, None) => Err(Error::Schema(format!("missing key `stations[{i}].{key}` for unknown station `{}`", s.name))),
            }
        };
        let latitude_deg = coord(s.latitude_deg, known.map(|k| k.latitude_deg), "latitude_deg")?;
        let longitude_deg = coord(s.longitude_deg, known.map(|k| k.longitude_deg), "longitude_deg")?;
        let altitude_m = coord(s.altitude_m, known.map(|k| k.altitude_m), "altitude_m")?;
        if !(-90.0..=90.0).contains(&latitude_deg) || !longitude_deg.is_finite() || !(-500.0..=9000.0).contains(&altitude_m) {
            return Err(Error::Invariant(format!("station `{}` coordinates out of range", s.name)));
        }
        let source = match (s.source, known) {
            (Some(src), _) => src,
            (None, Some(k)) if s.latitude_deg.is_none() => k.source.to_string(),
            _ => "user supplied".to_string(),
        };
        stations.push(Station {
            name: s.name,
            latitude_deg,
            longitude_deg,
            altitude_m,
            source,
            channel_override: s.channel,
            turbulence_override: s.turbulence,
        });
    }

    let channel = merge_channel(raw.channel.as_ref(), &default_channel(), "channel", Some(&mut log));
    let turbulence = merge_turbulence(raw.turbulence.as_ref(), &default_turbulence(), "turbulence", Some(&mut log));

    let d = ProtocolParams::default();
    let rp = raw.protocol.unwrap_or_default();
    let mut pick = |v: Option<f64>, dv: f64, key: &str| {
        v.unwrap_or_else(|| {
            log.push(format!("protocol.{key}"));
            dv
        })
    };
    let protocol = ProtocolParams {
        e_d: pick(rp.e_d, d.e_d, "e_d"),
        e_0: pick(rp.e_0, d.e_0, "e_0"),
        f_e: pick(rp.f_e, d.f_e, "f_e"),
        y_0: pick(rp.y_0, d.y_0, "y_0"),
        pulse_rate_hz: pick(rp.pulse_rate_hz, d.pulse_rate_hz, "pulse_rate_hz"),
        n_sigma: pick(rp.n_sigma, d.n_sigma, "n_sigma"),
        finite_size: rp.finite_size.unwrap_or_else(|| {
            log.push("protocol.finite_size".into());
            d.finite_size
        }),
    };
    protocol.validate()?;
    if protocol.pulse_rate_hz == 1e14 {
        warnings.push(PULSE_RATE_WARNING.to_string());
    }

    let rs = raw.search.unwrap_or_default();
    let t0 = match rs.t0 {
        Some(s) => time::parse_utc(&s)?,
        None => {
            log.push("search.t0".into());
            elements.epoch
        }
    };
    let t1 = match rs.t1 {
        Some(s) => time::parse_utc(&s)?,
        None => {
            log.push("search.t1".into());
            t0 + time::SECONDS_PER_DAY
        }
    };
    let step_s = rs.step_s.unwrap_or_else(|| {
        log.push("search.step_s".into());
        1.0
    });
    if !(t1 > t0) {
        return Err(Error::EmptySearch { t0, t1 });
    }
    if !(step_s > 0.0 && step_s <= 10.0) {
        return Err(Error::Range { what: "search.step_s", value: step_s, min: 0.0, max: 10.0 });
    }

    let intensities = raw.intensities.unwrap_or_else(|| {
        log.push("intensities".into());
        let b = IntensitySetting::fixed_baseline();
        IntensityPlan::Fixed(FixedIntensities { mu_a: b.mu_a, nu_a: b.nu_a, mu_b: b.mu_b, nu_b: b.nu_b })
    });
    match &intensities {
        IntensityPlan::Fixed(f) => f.setting().validate()?,
        IntensityPlan::Optimize(o) => {
            if !(o.slot_seconds >= 1.0 && o.slot_seconds.is_finite()) {
                return Err(Error::Range { what: "intensities.optimize.slot_seconds", value: o.slot_seconds, min: 1.0, max: f64::INFINITY });
            }
        }
    }

    let seed = raw.seed.unwrap_or_else(|| {
        log.push("seed".into());
        1
    });
    let availability_factor = raw.availability_factor.unwrap_or_else(|| {
        log.push("availability_factor".into());
        1.0
    });
    if !(0.0..=1.0).contains(&availability_factor) {
        return Err(Error::Range { what: "availability_factor", value: availability_factor, min: 0.0, max: 1.0 });
    }

    let scenario = Scenario {
        satellite,
        elements,
        propagator,
        stations,
        channel,
        turbulence,
        protocol,
        search: Search { t0, t1, step_s },
        intensities,
        seed,
        availability_factor,
    };
    // surface channel/turbulence invariant violations at load time
    scenario.global_channel()?;
    for i in 0..scenario.stations.len() {
        scenario.channel_for(i)?;
        scenario.turbulence_for(i)?;
    }
    Ok(Loaded { scenario, defaults_applied: log, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> String {
        serde_json::json!({
            "satellite": { "tle": defaults::MICIUS_TLE },
            "stations": [ { "name": "Delingha" }, { "name": "Lijiang" } ]
        })
        .to_string()
    }

    #[test]
    fn minimal_file_takes_table_defaults() {
        let l = parse_scenario(&minimal(), None).unwrap();
        let s = &l.scenario;
        assert_eq!(s.protocol, ProtocolParams::default());
        let c = s.global_channel().unwrap();
        assert!((c.wavelength_m - 780e-9).abs() < 1e-18);
        assert_eq!((c.r_s_m, c.r_r_m), (0.065, 0.15));
        assert!((c.fixed_losses.total_db() - 11.9).abs() < 1e-12);
        assert!((c.min_elevation_rad.to_degrees() - 10.0).abs() < 1e-12);
        assert_eq!(c.slant_mode, SlantMode::ZenithR0);
        assert_eq!(s.turbulence_for(0).unwrap().c0, 1.7e-14);
        assert!(l.defaults_applied.iter().any(|d| d == "protocol.y_0"));
        assert!(l.defaults_applied.iter().any(|d| d == "channel.fixed_losses_db.coupling"));
        assert!(l.defaults_applied.iter().any(|d| d == "stations[1].altitude_m"));
        assert_eq!(l.warnings.len(), 1);
    }

    #[test]
    fn misspelled_key_is_named() {
        let text = serde_json::json!({
            "satellite": { "tle": defaults::MICIUS_TLE },
            "stations": [ { "name": "Delingha" } ],
            "channel": { "wavelenght": 780 }
        })
        .to_string();
        match parse_scenario(&text, None) {
            Err(Error::Schema(m)) => assert!(m.contains("wavelenght"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn error_families() {
        assert!(matches!(parse_scenario("{ not json", None), Err(Error::Parse(_))));
        assert!(matches!(parse_scenario(r#"{"stations": []}"#, None), Err(Error::Schema(_))));
        let bad = minimal().replace("\"stations\"", "\"protocol\":{\"e_d\":0.9},\"stations\"");
        assert!(matches!(parse_scenario(&bad, None), Err(Error::Invariant(_))));
        let three = serde_json::json!({
            "satellite": { "tle": defaults::MICIUS_TLE },
            "stations": [ { "name": "Delingha" }, { "name": "Lijiang" }, { "name": "Ngari" } ]
        });
        assert!(matches!(scenario_from_value(three, None), Err(Error::Invariant(_))));
        let unknown = serde_json::json!({ "satellite": { "tle": defaults::MICIUS_TLE }, "stations": [ { "name": "Nowhere" } ] });
        assert!(matches!(scenario_from_value(unknown, None), Err(Error::Schema(_))));
    }

    #[test]
    fn save_load_round_trip() {
        let text = serde_json::json!({
            "satellite": { "circular": { "altitude_km": 500.0, "inclination_deg": 97.4, "epoch": "2016-09-26T16:50:00Z",
                                         "over": { "latitude_deg": 32.0, "longitude_deg": 98.9, "ascending": true } } },
            "stations": [ { "name": "Delingha", "channel": { "r_s_m": 0.3 } }, { "name": "Lijiang", "turbulence": { "c0": 3e-14 } } ],
            "channel": { "slant_mode": "literal" },
            "intensities": { "optimize": { "slot_seconds": 5.0 } }
        })
        .to_string();
        let first = parse_scenario(&text, None).unwrap().scenario;
        let again = parse_scenario(&first.to_json_string(), None).unwrap();
        assert_eq!(again.scenario, first);
        assert!(again.defaults_applied.is_empty(), "{:?}", again.defaults_applied);
        assert_eq!(first.channel_for(0).unwrap().r_s_m, 0.3);
        assert_eq!(first.channel_for(1).unwrap().r_s_m, 0.065);
        assert_eq!(first.turbulence_for(1).unwrap().c0, 3e-14);
        assert_eq!(first.channel_for(1).unwrap().slant_mode, SlantMode::Literal);
    }

    #[test]
    fn tle_file_relative_to_scenario() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("sat.tle"), defaults::MICIUS_TLE).unwrap();
        let path = dir.path().join("s.json");
        std::fs::write(&path, r#"{"satellite":{"tle_file":"sat.tle"},"stations":[{"name":"Ngari"}]}"#).unwrap();
        let l = load_scenario(&path).unwrap();
        assert_eq!(l.scenario.elements.catalog_id, 41731);
    }
}
