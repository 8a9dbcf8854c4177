//! Gaussian worst-case fluctuation bounds on the rate inputs.
//!
//! This is a stand-in, not a composable finite-key analysis: each observed
//! quantity is shifted by `n_sigma` binomial standard errors in the direction
//! that lowers the rate. The single-photon terms take their statistical
//! width from the two-decoy combination
//! `S = e^{νa+νb}Q_νν − e^{νa}Q_ν0 − e^{νb}Q_0ν + Q_00`, so ν enters the
//! bound through the variance of `S/(νa·νb)`.

use super::{entropy_capped, single_photon_error_yield, single_photon_yield, x_basis, z_basis, IntensitySetting, ProtocolParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteSizeBounds {
    pub q_z_upper: f64,
    pub e_z_upper: f64,
    pub y_11_lower: f64,
    pub e_11_upper: f64,
}

pub fn bounds(setting: &IntensitySetting, eta_a: f64, eta_b: f64, p: &ProtocolParams, n_pulses: f64) -> Result<FiniteSizeBounds> {
    setting.validate()?;
    for eta in [eta_a, eta_b] {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Domain(format!("transmittance must be in [0, 1], got {eta}")));
        }
    }
    if !(n_pulses > 0.0) {
        return Err(Error::Domain(format!("n_pulses must be positive, got {n_pulses}")));
    }
    if setting.nu_a <= 0.0 || setting.nu_b <= 0.0 {
        return Err(Error::Domain("finite-size bounds need nonzero decoy intensities".into()));
    }
    let k = p.n_sigma;
    let n = n_pulses;
    let z = z_basis(setting.mu_a * eta_a, setting.mu_b * eta_b, p);
    let e_z = z.qber();
    let q_z_upper = (z.q + k * (z.q / n).sqrt()).min(1.0);
    let e_z_upper = if z.q > 0.0 { e_z + k * (e_z * (1.0 - e_z) / (n * z.q)).sqrt() } else { 0.0 };

    let (va, vb) = (setting.nu_a, setting.nu_b);
    let (la, lb) = (va * eta_a, vb * eta_b);
    let w = [((va + vb).exp(), la, lb), (va.exp(), la, 0.0), (vb.exp(), 0.0, lb), (1.0, 0.0, 0.0)];
    let mut var_y = 0.0;
    let mut var_t = 0.0;
    for (weight, a, b) in w {
        var_y += weight * weight * z_basis(a, b, p).q;
        var_t += weight * weight * x_basis(a, b, p).eq;
    }
    let scale = 1.0 / (va * vb * n.sqrt());
    let y11 = single_photon_yield(eta_a, eta_b, p);
    let ey11 = single_photon_error_yield(eta_a, eta_b, p, y11);
    let y_11_lower = y11 - k * var_y.sqrt() * scale;
    let e_11_upper = if y_11_lower > 0.0 { (ey11 + k * var_t.sqrt() * scale) / y_11_lower } else { 0.5 };
    Ok(FiniteSizeBounds { q_z_upper, e_z_upper, y_11_lower, e_11_upper })
}

/// Unclamped finite-size secret fraction per pulse.
pub fn finite_size_rate_raw(setting: &IntensitySetting, eta_a: f64, eta_b: f64, protocol: &ProtocolParams, n_pulses: f64) -> Result<f64> {
    let b = bounds(setting, eta_a, eta_b, protocol, n_pulses)?;
    let single = setting.p11() * b.y_11_lower.max(0.0) * (1.0 - entropy_capped(b.e_11_upper));
    Ok(single - b.q_z_upper * protocol.f_e * entropy_capped(b.e_z_upper))
}

pub fn finite_size_rate(setting: &IntensitySetting, eta_a: f64, eta_b: f64, protocol: &ProtocolParams, n_pulses: f64) -> Result<f64> {
    Ok(finite_size_rate_raw(setting, eta_a, eta_b, protocol, n_pulses)?.max(0.0))
}
