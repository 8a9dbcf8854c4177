//! Decoy-state MDI-QKD with phase-randomized coherent pulses and threshold
//! detectors: gains, QBERs, single-photon yield/error and the secret
//! fraction per pulse.

mod finite;
pub mod oracle;

pub use finite::{bounds as finite_size_bounds, finite_size_rate, finite_size_rate_raw, FiniteSizeBounds};
pub use oracle::{mc_oracle_gains, mc_oracle_single_photon, McEstimate, McGains, McSinglePhoton};

use serde::{Deserialize, Serialize};

use crate::channel::LinkBudgetSample;
use crate::error::{Error, Result};
use crate::numerics::bessel::bessel_i0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Misalignment error probability.
    pub e_d: f64,
    /// Error probability of a dark count.
    pub e_0: f64,
    /// Error-correction inefficiency.
    pub f_e: f64,
    /// Background click probability per detector per gate.
    pub y_0: f64,
    pub pulse_rate_hz: f64,
    /// Gaussian multiplier used by the finite-size bounds.
    pub n_sigma: f64,
    /// Use [`finite_size_rate`] with `pulse_rate_hz` pulses per second.
    pub finite_size: bool,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self { e_d: 0.015, e_0: 0.5, f_e: 1.16, y_0: 3e-6, pulse_rate_hz: 1e14, n_sigma: 5.0, finite_size: false }
    }
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::Invariant(format!("protocol {what} out of range: {v}")));
        if !(0.0..=0.5).contains(&self.e_d) {
            return bad("e_d", self.e_d);
        }
        if !(0.0..=1.0).contains(&self.e_0) {
            return bad("e_0", self.e_0);
        }
        if !(self.f_e >= 1.0 && self.f_e.is_finite()) {
            return bad("f_e", self.f_e);
        }
        if !(self.y_0 >= 0.0 && self.y_0 < 1.0) {
            return bad("y_0", self.y_0);
        }
        if !(self.pulse_rate_hz > 0.0 && self.pulse_rate_hz.is_finite()) {
            return bad("pulse_rate_hz", self.pulse_rate_hz);
        }
        if !(self.n_sigma >= 0.0 && self.n_sigma.is_finite()) {
            return bad("n_sigma", self.n_sigma);
        }
        Ok(())
    }
}

/// Signal/decoy intensities per party; the vacuum intensity is always 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensitySetting {
    pub mu_a: f64,
    pub nu_a: f64,
    pub mu_b: f64,
    pub nu_b: f64,
    #[serde(default)]
    pub omega: f64,
}

impl IntensitySetting {
    pub const MU_CAP: f64 = 1.0;

    /// The fixed comparator: μ = 0.5, ν = 0.1 for both parties.
    pub fn fixed_baseline() -> Self {
        Self::symmetric(0.5, 0.1)
    }

    pub fn symmetric(mu: f64, nu: f64) -> Self {
        Self { mu_a: mu, nu_a: nu, mu_b: mu, nu_b: nu, omega: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (mu, nu) in [(self.mu_a, self.nu_a), (self.mu_b, self.nu_b)] {
            if !(mu > nu && nu >= 0.0 && mu <= Self::MU_CAP) {
                return Err(Error::Invariant(format!("intensities need 1 >= mu > nu >= 0, got mu={mu}, nu={nu}")));
            }
        }
        if self.omega != 0.0 {
            return Err(Error::Invariant(format!("vacuum intensity must be 0, got {}", self.omega)));
        }
        Ok(())
    }

    /// P₁₁: probability that both parties emit exactly one photon at signal intensity.
    pub fn p11(&self) -> f64 {
        self.mu_a * self.mu_b * (-self.mu_a - self.mu_b).exp()
    }

    pub fn swapped(&self) -> Self {
        Self { mu_a: self.mu_b, nu_a: self.nu_b, mu_b: self.mu_a, nu_b: self.nu_a, omega: self.omega }
    }
}

/// All per-instant protocol quantities at one transmittance pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub t: f64,
    pub q_z: f64,
    pub e_z: f64,
    pub q_x: f64,
    pub e_x: f64,
    pub y_11: f64,
    pub e_11: f64,
    pub p_11: f64,
    pub r_per_pulse: f64,
}

/// Gain and error-weighted gain for one basis: `(Q, E·Q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct BasisGain {
    pub q: f64,
    pub eq: f64,
}

impl BasisGain {
    pub fn qber(&self) -> f64 {
        if self.q > 0.0 {
            (self.eq / self.q).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }
}

pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("binary entropy argument must be in [0, 1], got {x}")));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

/// H₂ saturated at 1 from 0.5 upwards, for worst-case error bounds.
pub(crate) fn entropy_capped(x: f64) -> f64 {
    if x >= 0.5 {
        1.0
    } else {
        binary_entropy(x.max(0.0)).unwrap_or(1.0)
    }
}

fn check_eta(eta_a: f64, eta_b: f64) -> Result<()> {
    for eta in [eta_a, eta_b] {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Domain(format!("transmittance must be in [0, 1], got {eta}")));
        }
    }
    Ok(())
}

/// Z-basis gain at received intensities `la`, `lb`.
pub(crate) fn z_basis(la: f64, lb: f64, p: &ProtocolParams) -> BasisGain {
    let d = 1.0 - p.y_0;
    let mu = la + lb;
    let x = (la * lb).sqrt() / 2.0;
    let q_c = 2.0 * d * d * (-mu / 2.0).exp() * (1.0 - d * (-la / 2.0).exp()) * (1.0 - d * (-lb / 2.0).exp());
    let q_e = 2.0 * p.y_0 * d * d * (-mu / 2.0).exp() * (bessel_i0(2.0 * x) - d * (-mu / 2.0).exp());
    BasisGain { q: q_c + q_e, eq: p.e_d * q_c + (1.0 - p.e_d) * q_e }
}

/// X-basis gain at received intensities `la`, `lb`.
pub(crate) fn x_basis(la: f64, lb: f64, p: &ProtocolParams) -> BasisGain {
    let d = 1.0 - p.y_0;
    let mu = la + lb;
    let x = (la * lb).sqrt() / 2.0;
    let y = d * (-mu / 4.0).exp();
    let i0x = bessel_i0(x);
    let i02x = bessel_i0(2.0 * x);
    let q = 2.0 * y * y * (1.0 + 2.0 * y * y - 4.0 * y * i0x + i02x);
    let eq = p.e_0 * q - (p.e_0 - p.e_d) * 2.0 * y * y * (i02x - 1.0);
    BasisGain { q, eq }
}

pub fn gains_qber_z(setting: &IntensitySetting, eta_a: f64, eta_b: f64, protocol: &ProtocolParams) -> Result<(f64, f64)> {
    setting.validate()?;
    check_eta(eta_a, eta_b)?;
    let g = z_basis(setting.mu_a * eta_a, setting.mu_b * eta_b, protocol);
    Ok((g.q, g.qber()))
}

pub fn gains_qber_x(setting: &IntensitySetting, eta_a: f64, eta_b: f64, protocol: &ProtocolParams) -> Result<(f64, f64)> {
    setting.validate()?;
    check_eta(eta_a, eta_b)?;
    let g = x_basis(setting.mu_a * eta_a, setting.mu_b * eta_b, protocol);
    Ok((g.q, g.qber()))
}

/// Yield and X-basis error rate when both parties send exactly one photon.
pub fn single_photon_yield_error(eta_a: f64, eta_b: f64, protocol: &ProtocolParams) -> Result<(f64, f64)> {
    check_eta(eta_a, eta_b)?;
    let y11 = single_photon_yield(eta_a, eta_b, protocol);
    let ey = single_photon_error_yield(eta_a, eta_b, protocol, y11);
    let e11 = if y11 > 0.0 { (ey / y11).clamp(0.0, 1.0) } else { 0.0 };
    Ok((y11, e11))
}

pub(crate) fn single_photon_yield(eta_a: f64, eta_b: f64, p: &ProtocolParams) -> f64 {
    let d = 1.0 - p.y_0;
    let y0 = p.y_0;
    d * d
        * (eta_a * eta_b / 2.0
            + (2.0 * eta_a + 2.0 * eta_b - 3.0 * eta_a * eta_b) * y0
            + 4.0 * (1.0 - eta_a) * (1.0 - eta_b) * y0 * y0)
}

/// `e₁₁·Y₁₁`.
pub(crate) fn single_photon_error_yield(eta_a: f64, eta_b: f64, p: &ProtocolParams, y11: f64) -> f64 {
    let d = 1.0 - p.y_0;
    p.e_0 * y11 - (p.e_0 - p.e_d) * d * d * eta_a * eta_b / 2.0
}

/// Unclamped secret fraction per pulse; this is what the optimizer sees.
pub fn key_rate_raw(setting: &IntensitySetting, eta_a: f64, eta_b: f64, protocol: &ProtocolParams) -> Result<f64> {
    setting.validate()?;
    check_eta(eta_a, eta_b)?;
    let z = z_basis(setting.mu_a * eta_a, setting.mu_b * eta_b, protocol);
    let (y11, e11) = single_photon_yield_error(eta_a, eta_b, protocol)?;
    Ok(setting.p11() * y11 * (1.0 - binary_entropy(e11)?) - z.q * protocol.f_e * binary_entropy(z.qber())?)
}

/// Secret fraction per pulse, clamped at zero.
pub fn key_rate(setting: &IntensitySetting, eta_a: f64, eta_b: f64, protocol: &ProtocolParams) -> Result<f64> {
    Ok(key_rate_raw(setting, eta_a, eta_b, protocol)?.max(0.0))
}

/// Asymptotic or finite-size rate, depending on `protocol.finite_size`.
pub fn configured_rate(setting: &IntensitySetting, eta_a: f64, eta_b: f64, protocol: &ProtocolParams) -> Result<f64> {
    if protocol.finite_size {
        finite_size_rate(setting, eta_a, eta_b, protocol, protocol.pulse_rate_hz)
    } else {
        key_rate(setting, eta_a, eta_b, protocol)
    }
}

pub fn rate_point(t: f64, setting: &IntensitySetting, eta_a: f64, eta_b: f64, protocol: &ProtocolParams) -> Result<RatePoint> {
    let (q_z, e_z) = gains_qber_z(setting, eta_a, eta_b, protocol)?;
    let (q_x, e_x) = gains_qber_x(setting, eta_a, eta_b, protocol)?;
    let (y_11, e_11) = single_photon_yield_error(eta_a, eta_b, protocol)?;
    Ok(RatePoint {
        t,
        q_z,
        e_z,
        q_x,
        e_x,
        y_11,
        e_11,
        p_11: setting.p11(),
        r_per_pulse: configured_rate(setting, eta_a, eta_b, protocol)?,
    })
}

/// Bits from each sample: `r(t)·pulse_rate·Δt`, one setting per sample.
pub fn key_bits_per_sample(budget: &[LinkBudgetSample], schedule: &[IntensitySetting], protocol: &ProtocolParams) -> Result<Vec<f64>> {
    if schedule.len() < budget.len() {
        return Err(Error::ScheduleGap { covered: schedule.len(), needed: budget.len() });
    }
    budget
        .iter()
        .zip(schedule)
        .map(|(s, setting)| Ok(configured_rate(setting, s.eta_a, s.eta_b, protocol)? * protocol.pulse_rate_hz * s.dt_s))
        .collect()
}

pub fn orbit_key_total(budget: &[LinkBudgetSample], schedule: &[IntensitySetting], protocol: &ProtocolParams) -> Result<f64> {
    Ok(key_bits_per_sample(budget, schedule, protocol)?.iter().sum())
}
