//! Ground-to-satellite optical uplink: Hufnagel–Valley turbulence,
//! Fried parameter, long-term beam width and collected transmittance.

use std::collections::HashMap;

use once_cell::sync::Lazy;
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quadrature::{simpson_converged, Quadrature};
use crate::orbit::{AccessWindow, TopoSample};

/// Fried-parameter prefactor for SI inputs (λ in m, ∫Cn² in m^(1/3)).
pub const FRIED_SI_CONSTANT: f64 = 0.1847;
/// The same prefactor as commonly printed for λ in micrometres.
pub const FRIED_MICRON_CONSTANT: f64 = 1.1654e-8;
/// Link evaluation is refused below this elevation.
pub const ELEVATION_FLOOR_DEG: f64 = 5.0;

const QUAD_REL_TOL: f64 = 1e-4;
const QUAD_MAX_LEVELS: u32 = 20;

/// Checks that the micrometre-form constant and [`FRIED_SI_CONSTANT`]
/// describe the same law: `1.1654e-8 · (1e6)^1.2 ≈ 0.1847`.
pub fn fried_constant_self_check() -> Result<()> {
    let converted = FRIED_MICRON_CONSTANT * 10f64.powf(7.2);
    if (converted - FRIED_SI_CONSTANT).abs() < 1e-3 {
        Ok(())
    } else {
        Err(Error::Domain(format!("Fried constant mismatch: {converted} vs {FRIED_SI_CONSTANT}")))
    }
}

/// Hufnagel–Valley refractive-index structure profile, heights above the site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurbulenceProfile {
    /// Ground-level Cn² (m^(−2/3)).
    pub c0: f64,
    /// High-altitude rms wind (m/s).
    pub wind_rms_mps: f64,
    /// Upper integration limit above the site (m).
    pub z_max_m: f64,
    /// Site altitude (m); informational, heights are measured from here.
    pub site_altitude_m: f64,
}

impl Default for TurbulenceProfile {
    fn default() -> Self {
        Self { c0: 1.7e-14, wind_rms_mps: 21.0, z_max_m: 20_000.0, site_altitude_m: 0.0 }
    }
}

impl TurbulenceProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return Err(Error::Invariant(format!("turbulence c0 must be positive, got {}", self.c0)));
        }
        if !(self.z_max_m > 0.0 && self.z_max_m.is_finite()) {
            return Err(Error::Invariant(format!("turbulence z_max_m must be positive, got {}", self.z_max_m)));
        }
        if !(self.wind_rms_mps >= 0.0 && self.wind_rms_mps.is_finite()) {
            return Err(Error::Invariant(format!("wind_rms_mps must be non-negative, got {}", self.wind_rms_mps)));
        }
        Ok(())
    }

    fn hv(&self, h: f64) -> f64 {
        let w = self.wind_rms_mps / 27.0;
        0.005_94 * w * w * (1e-5 * h).powi(10) * (-h / 1000.0).exp()
            + 2.7e-16 * (-h / 1500.0).exp()
            + self.c0 * (-h / 100.0).exp()
    }

    fn cache_key(&self) -> [u64; 3] {
        [self.c0.to_bits(), self.wind_rms_mps.to_bits(), self.z_max_m.to_bits()]
    }
}

/// Cn² at height `h_m` above the site (m^(−2/3)).
pub fn cn2_at(h_m: f64, profile: &TurbulenceProfile) -> Result<f64> {
    if !(h_m >= 0.0) {
        return Err(Error::Domain(format!("height must be non-negative, got {h_m}")));
    }
    Ok(profile.hv(h_m))
}

/// Simpson quadrature of Cn² over `[lo, hi]` metres above the site.
pub fn integrate_cn2(profile: &TurbulenceProfile, lo: f64, hi: f64) -> Result<Quadrature> {
    if !(lo >= 0.0 && hi > lo) {
        return Err(Error::Domain(format!("bad integration range [{lo}, {hi}]")));
    }
    simpson_converged(|h| profile.hv(h), lo, hi, QUAD_REL_TOL, QUAD_MAX_LEVELS)
}

static COLUMN_CACHE: Lazy<RwLock<HashMap<[u64; 3], f64>>> = Lazy::new(|| RwLock::new(HashMap::new()));

/// Zenith column `∫₀^{z_max} Cn²(h) dh` (m^(1/3)), memoised per profile.
pub fn integrated_cn2(profile: &TurbulenceProfile) -> Result<f64> {
    profile.validate()?;
    let key = profile.cache_key();
    if let Some(v) = COLUMN_CACHE.read().get(&key) {
        return Ok(*v);
    }
    let value = integrate_cn2(profile, 0.0, profile.z_max_m)?.value;
    COLUMN_CACHE.write().insert(key, value);
    Ok(value)
}

/// How the path slant enters the Fried parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlantMode {
    /// r₀ carries a `(sin φ)^0.6` factor on top of the beam-width `1/sin φ`.
    Literal,
    /// r₀ is the zenith value; slant enters only through the beam width.
    ZenithR0,
}

/// Fried parameter (m) at `elevation_rad` for `wavelength_m`.
pub fn fried_parameter(wavelength_m: f64, elevation_rad: f64, profile: &TurbulenceProfile, mode: SlantMode) -> Result<f64> {
    if !(elevation_rad > 0.0 && elevation_rad <= std::f64::consts::FRAC_PI_2 + 1e-12) {
        return Err(Error::Domain(format!("elevation must be in (0, pi/2], got {elevation_rad}")));
    }
    if !(wavelength_m > 0.0) {
        return Err(Error::Domain(format!("wavelength must be positive, got {wavelength_m}")));
    }
    let column = integrated_cn2(profile)?;
    let slant = match mode {
        SlantMode::Literal => elevation_rad.sin().powf(0.6),
        SlantMode::ZenithR0 => 1.0,
    };
    Ok(FRIED_SI_CONSTANT * wavelength_m.powf(1.2) * slant / column.powf(0.6))
}

/// Fixed (geometry-independent) losses in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedLosses {
    pub optical_db: f64,
    pub antenna_db: f64,
    pub coupling_db: f64,
    pub detection_db: f64,
}

impl Default for FixedLosses {
    fn default() -> Self {
        Self { optical_db: 1.5, antenna_db: 1.5, coupling_db: 5.9, detection_db: 3.0 }
    }
}

impl FixedLosses {
    pub fn total_db(&self) -> f64 {
        self.optical_db + self.antenna_db + self.coupling_db + self.detection_db
    }

    /// Linear transmittance of all fixed losses combined.
    pub fn eta0(&self) -> f64 {
        db_to_linear(self.total_db())
    }
}

pub fn db_to_linear(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

pub fn linear_to_db(eta: f64) -> f64 {
    -10.0 * eta.log10()
}

/// Optical terminal and link constants for one uplink.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub wavelength_m: f64,
    /// Transmitter (ground) aperture radius.
    pub r_s_m: f64,
    /// Receiver (satellite) aperture radius.
    pub r_r_m: f64,
    pub fixed_losses: FixedLosses,
    /// Carried for reference only; the beam width comes from the aperture.
    pub divergence_urad: f64,
    pub min_elevation_rad: f64,
    pub slant_mode: SlantMode,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            wavelength_m: 780e-9,
            r_s_m: 0.065,
            r_r_m: 0.15,
            fixed_losses: FixedLosses::default(),
            divergence_urad: 14.0,
            min_elevation_rad: 10f64.to_radians(),
            slant_mode: SlantMode::ZenithR0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength_m > 300e-9 && self.wavelength_m < 2000e-9) {
            return Err(Error::Invariant(format!("wavelength {} m outside (300 nm, 2000 nm)", self.wavelength_m)));
        }
        if !(self.r_s_m > 0.0 && self.r_r_m > 0.0) {
            return Err(Error::Invariant("aperture radii must be positive".into()));
        }
        let l = &self.fixed_losses;
        if [l.optical_db, l.antenna_db, l.coupling_db, l.detection_db].iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Invariant("fixed losses must be non-negative dB".into()));
        }
        let min_deg = self.min_elevation_rad.to_degrees();
        if !(min_deg >= ELEVATION_FLOOR_DEG - 1e-9 && min_deg < 90.0) {
            return Err(Error::Invariant(format!("min elevation {min_deg} deg outside [5, 90)")));
        }
        Ok(())
    }
}

/// Long-term received beam width (m): diffraction spread times the
/// turbulence broadening factor.
pub fn beam_width(range_m: f64, elevation_rad: f64, params: &ChannelParams, r0_m: f64) -> Result<f64> {
    if !(range_m > 0.0 && r0_m > 0.0 && elevation_rad > 0.0) {
        return Err(Error::Domain(format!(
            "beam width needs positive range/r0/elevation, got {range_m}, {r0_m}, {elevation_rad}"
        )));
    }
    let rs = params.r_s_m;
    let diffraction = range_m * params.wavelength_m / (0.632 * rs * std::f64::consts::PI);
    let broadening = 1.0 + 0.83 / elevation_rad.sin() * (2.0 * rs / r0_m).powf(5.0 / 3.0);
    Ok(diffraction * broadening.powf(0.6))
}

/// Fraction of a Gaussian beam of width `omega_r_m` collected by an aperture
/// of radius `r_r_m`, times the fixed-loss transmittance `eta0`.
pub fn uplink_transmittance(omega_r_m: f64, r_r_m: f64, eta0: f64) -> Result<f64> {
    if !(omega_r_m > 0.0) {
        return Err(Error::Domain(format!("beam width must be positive, got {omega_r_m}")));
    }
    if !(eta0 > 0.0 && eta0 <= 1.0) {
        return Err(Error::Domain(format!("eta0 must be in (0, 1], got {eta0}")));
    }
    if !(r_r_m >= 0.0) {
        return Err(Error::Domain(format!("receiver radius must be non-negative, got {r_r_m}")));
    }
    Ok(eta0 * -(-2.0 * r_r_m * r_r_m / (omega_r_m * omega_r_m)).exp_m1())
}

/// One uplink evaluated at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UplinkBudget {
    pub eta: f64,
    pub loss_db: f64,
    pub omega_r_m: f64,
    pub r0_m: f64,
}

pub fn link_budget(topo: &TopoSample, params: &ChannelParams, profile: &TurbulenceProfile) -> Result<UplinkBudget> {
    let elevation_deg = topo.elevation.to_degrees();
    if topo.elevation < params.min_elevation_rad - 1e-12 {
        return Err(Error::BelowHorizon { elevation_deg, min_deg: params.min_elevation_rad.to_degrees() });
    }
    if elevation_deg < ELEVATION_FLOOR_DEG - 1e-9 {
        return Err(Error::Domain(format!("link evaluation refused below {ELEVATION_FLOOR_DEG} deg ({elevation_deg:.3})")));
    }
    let elevation = topo.elevation.min(std::f64::consts::FRAC_PI_2);
    let r0_m = fried_parameter(params.wavelength_m, elevation, profile, params.slant_mode)?;
    let omega_r_m = beam_width(topo.range_m, elevation, params, r0_m)?;
    let eta = uplink_transmittance(omega_r_m, params.r_r_m, params.fixed_losses.eta0())?;
    Ok(UplinkBudget { eta, loss_db: linear_to_db(eta), omega_r_m, r0_m })
}

/// Both uplinks of a dual-station window at one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudgetSample {
    pub t: f64,
    /// Integration weight of the sample (the window's step).
    pub dt_s: f64,
    pub eta_a: f64,
    pub eta_b: f64,
    pub loss_a_db: f64,
    pub loss_b_db: f64,
    pub loss_total_db: f64,
    pub omega_a_m: f64,
    pub omega_b_m: f64,
    pub r0_a_m: f64,
    pub r0_b_m: f64,
}

/// Per-sample dual-uplink budget with the same channel for both stations.
pub fn dual_link_series(window: &AccessWindow, params: &ChannelParams, profile: &TurbulenceProfile) -> Result<Vec<LinkBudgetSample>> {
    dual_link_series_with(window, (params, profile), (params, profile))
}

/// As [`dual_link_series`], with separate channel/profile per station.
pub fn dual_link_series_with(
    window: &AccessWindow,
    a: (&ChannelParams, &TurbulenceProfile),
    b: (&ChannelParams, &TurbulenceProfile),
) -> Result<Vec<LinkBudgetSample>> {
    if window.samples.is_empty() {
        return Err(Error::EmptyWindow);
    }
    (0..window.samples.len())
        .map(|i| {
            let (ta, tb) = window
                .pair(i)
                .ok_or_else(|| Error::Invariant("dual-link budget needs a two-station window".into()))?;
            let la = link_budget(&ta, a.0, a.1)?;
            let lb = link_budget(&tb, b.0, b.1)?;
            Ok(LinkBudgetSample {
                t: ta.t,
                dt_s: window.step_s,
                eta_a: la.eta,
                eta_b: lb.eta,
                loss_a_db: la.loss_db,
                loss_b_db: lb.loss_db,
                loss_total_db: la.loss_db + lb.loss_db,
                omega_a_m: la.omega_r_m,
                omega_b_m: lb.omega_r_m,
                r0_a_m: la.r0_m,
                r0_b_m: lb.r0_m,
            })
        })
        .collect()
}

/// Reference point used to pick the slant mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub elevation_deg: f64,
    pub range_km: f64,
    pub reference_loss_db: f64,
    pub literal_loss_db: f64,
    pub zenith_r0_loss_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlantCalibration {
    pub chosen: SlantMode,
    pub literal_max_error_db: f64,
    pub zenith_r0_max_error_db: f64,
    pub points: Vec<CalibrationPoint>,
}

/// Measured single-uplink losses for the reference pass: (elevation deg, range km, loss dB).
pub const CALIBRATION_REFERENCES: [(f64, f64, f64); 2] = [(75.9, 501.0, 42.5), (15.0, 1385.0, 52.3)];

/// Evaluate both slant modes against [`CALIBRATION_REFERENCES`] with the
/// default channel and profile; the mode with the smaller worst-case error wins.
pub fn calibrate_slant_mode() -> Result<SlantCalibration> {
    let profile = TurbulenceProfile::default();
    let loss = |mode: SlantMode, elevation_deg: f64, range_km: f64| -> Result<f64> {
        let params = ChannelParams { slant_mode: mode, min_elevation_rad: ELEVATION_FLOOR_DEG.to_radians(), ..Default::default() };
        let topo = TopoSample {
            t: 0.0,
            elevation: elevation_deg.to_radians(),
            azimuth: 0.0,
            range_m: range_km * 1000.0,
            range_rate_mps: 0.0,
        };
        Ok(link_budget(&topo, &params, &profile)?.loss_db)
    };
    let mut points = Vec::new();
    for (elevation_deg, range_km, reference_loss_db) in CALIBRATION_REFERENCES {
        points.push(CalibrationPoint {
            elevation_deg,
            range_km,
            reference_loss_db,
            literal_loss_db: loss(SlantMode::Literal, elevation_deg, range_km)?,
            zenith_r0_loss_db: loss(SlantMode::ZenithR0, elevation_deg, range_km)?,
        });
    }
    let worst = |f: fn(&CalibrationPoint) -> f64| {
        points.iter().map(|p| (f(p) - p.reference_loss_db).abs()).fold(0.0, f64::max)
    };
    let literal_max_error_db = worst(|p| p.literal_loss_db);
    let zenith_r0_max_error_db = worst(|p| p.zenith_r0_loss_db);
    let chosen = if literal_max_error_db < zenith_r0_max_error_db { SlantMode::Literal } else { SlantMode::ZenithR0 };
    Ok(SlantCalibration { chosen, literal_max_error_db, zenith_r0_max_error_db, points })
}
