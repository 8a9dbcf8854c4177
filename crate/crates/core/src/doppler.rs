//! First-order Doppler shifts of the two uplinks and the sending-time
//! offset that aligns pulse arrivals at the satellite.
//!
//! Sign convention: an approaching satellite (negative range rate) gives a
//! positive frequency shift.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orbit::{AccessWindow, TopoSample};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
const MAX_RANGE_RATE: f64 = 2e4;
const MAX_PULSES: f64 = 1e7;

pub fn doppler_shift(range_rate_mps: f64, wavelength_m: f64) -> Result<f64> {
    if !(range_rate_mps.abs() < MAX_RANGE_RATE) {
        return Err(Error::Domain(format!("range rate {range_rate_mps} m/s is not a LEO geometry")));
    }
    if !(wavelength_m > 0.0) {
        return Err(Error::Domain(format!("wavelength must be positive, got {wavelength_m}")));
    }
    Ok(-range_rate_mps / wavelength_m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DopplerSample {
    pub t: f64,
    pub shift_a_hz: f64,
    pub shift_b_hz: f64,
    pub offset_hz: f64,
    pub wavelength_m: f64,
}

fn pairs(window: &AccessWindow) -> Result<Vec<(TopoSample, TopoSample)>> {
    if window.samples.is_empty() {
        return Err(Error::EmptyWindow);
    }
    (0..window.samples.len())
        .map(|i| window.pair(i).ok_or_else(|| Error::Invariant("two-station window required".into())))
        .collect()
}

pub fn doppler_series(window: &AccessWindow, wavelength_m: f64) -> Result<Vec<DopplerSample>> {
    pairs(window)?
        .into_iter()
        .map(|(a, b)| {
            let shift_a_hz = doppler_shift(a.range_rate_mps, wavelength_m)?;
            let shift_b_hz = doppler_shift(b.range_rate_mps, wavelength_m)?;
            Ok(DopplerSample { t: a.t, shift_a_hz, shift_b_hz, offset_hz: shift_a_hz - shift_b_hz, wavelength_m })
        })
        .collect()
}

/// ΔT_c = |L_A − L_B| / c.
pub fn sync_offset(range_a_m: f64, range_b_m: f64) -> Result<f64> {
    if !(range_a_m > 0.0 && range_b_m > 0.0) {
        return Err(Error::Domain(format!("ranges must be positive, got {range_a_m}, {range_b_m}")));
    }
    Ok((range_a_m - range_b_m).abs() / SPEED_OF_LIGHT)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyncSample {
    pub t: f64,
    pub delta_t_s: f64,
    pub range_a_m: f64,
    pub range_b_m: f64,
}

pub fn sync_series(window: &AccessWindow) -> Result<Vec<SyncSample>> {
    pairs(window)?
        .into_iter()
        .map(|(a, b)| Ok(SyncSample { t: a.t, delta_t_s: sync_offset(a.range_m, b.range_m)?, range_a_m: a.range_m, range_b_m: b.range_m }))
        .collect()
}

/// Range of one link as a cubic Hermite interpolant of (range, range rate)
/// samples; linear extrapolation past either end.
struct RangeTrack {
    t: Vec<f64>,
    r: Vec<f64>,
    rdot: Vec<f64>,
}

impl RangeTrack {
    fn new(samples: &[TopoSample]) -> Self {
        Self {
            t: samples.iter().map(|s| s.t).collect(),
            r: samples.iter().map(|s| s.range_m).collect(),
            rdot: samples.iter().map(|s| s.range_rate_mps).collect(),
        }
    }

    fn at(&self, t: f64) -> f64 {
        let n = self.t.len();
        if n == 1 || t <= self.t[0] {
            return self.r[0] + self.rdot[0] * (t - self.t[0]);
        }
        if t >= self.t[n - 1] {
            return self.r[n - 1] + self.rdot[n - 1] * (t - self.t[n - 1]);
        }
        let i = self.t.partition_point(|x| *x <= t) - 1;
        let h = self.t[i + 1] - self.t[i];
        let s = (t - self.t[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        self.r[i]
            + (3.0 * s2 - 2.0 * s3) * (self.r[i + 1] - self.r[i])
            + h * ((s3 - 2.0 * s2 + s) * self.rdot[i] + (s3 - s2) * self.rdot[i + 1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseArrival {
    /// Alice's send time.
    pub t_send: f64,
    /// Bob's send-time shift (s); negative means Bob sends earlier.
    pub bob_shift_s: f64,
    /// Arrival(B) − arrival(A) with Bob sending at the same instant.
    pub uncompensated_s: f64,
    /// Arrival(B) − arrival(A) after Bob's shift.
    pub residual_s: f64,
}

/// Arrival-time mismatch at the satellite for pulses sent every
/// `send_period_s` across the window. Bob's shift is ΔT_c (signed) taken
/// from the latest geometry sample at or before each send time.
pub fn compensated_arrivals(window: &AccessWindow, send_period_s: f64) -> Result<Vec<PulseArrival>> {
    if !(send_period_s > 0.0) {
        return Err(Error::Domain(format!("send period must be positive, got {send_period_s}")));
    }
    let pairs = pairs(window)?;
    let span = window.samples.last().map_or(0.0, |s| s.t) - window.samples[0].t;
    if span / send_period_s > MAX_PULSES {
        return Err(Error::Domain(format!("send period {send_period_s} s gives more than {MAX_PULSES} pulses")));
    }
    let a: Vec<TopoSample> = pairs.iter().map(|p| p.0).collect();
    let b: Vec<TopoSample> = pairs.iter().map(|p| p.1).collect();
    let (track_a, track_b) = (RangeTrack::new(&a), RangeTrack::new(&b));
    let t0 = a[0].t;
    let count = (span / send_period_s).floor() as usize + 1;
    let mut out = Vec::with_capacity(count);
    let mut idx = 0;
    for k in 0..count {
        let t = t0 + k as f64 * send_period_s;
        while idx + 1 < a.len() && a[idx + 1].t <= t {
            idx += 1;
        }
        let (la0, lb0) = (a[idx].range_m, b[idx].range_m);
        let shift = (la0 - lb0) / SPEED_OF_LIGHT;
        let la = track_a.at(t);
        let uncompensated_s = (track_b.at(t) - la) / SPEED_OF_LIGHT;
        // grouped so a frozen geometry cancels exactly
        let residual_s = ((track_b.at(t + shift) - lb0) - (la - la0)) / SPEED_OF_LIGHT;
        out.push(PulseArrival { t_send: t, bob_shift_s: shift, uncompensated_s, residual_s });
    }
    Ok(out)
}
