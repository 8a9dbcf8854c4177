//! Per-slot intensity optimization over a dual-uplink pass.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::LinkBudgetSample;
use crate::error::{Error, Result};
use crate::mdi::{configured_rate, finite_size_rate_raw, key_rate_raw, IntensitySetting, ProtocolParams};
use crate::numerics::nelder_mead::{minimize_bounded, NelderMeadOptions};

const GRID_POINTS: usize = 12;

/// A run of consecutive budget samples sharing one intensity setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub start: f64,
    pub end: f64,
    pub mean_eta_a: f64,
    pub mean_eta_b: f64,
    pub first_sample: usize,
    pub sample_count: usize,
}

impl Slot {
    pub fn samples(&self) -> std::ops::Range<usize> {
        self.first_sample..self.first_sample + self.sample_count
    }
}

/// Splits the budget into slots of `slot_seconds` anchored at the first
/// sample. Each sample covers `[t, t + dt)`, so the last slot may be short.
/// Slots that would hold no sample (step longer than the slot) are skipped.
pub fn slot_partition(budget: &[LinkBudgetSample], slot_seconds: f64) -> Result<Vec<Slot>> {
    if budget.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if !(slot_seconds >= 1.0 && slot_seconds.is_finite()) {
        return Err(Error::Range { what: "slot_seconds", value: slot_seconds, min: 1.0, max: f64::INFINITY });
    }
    let t0 = budget[0].t;
    let t_end = budget.last().map_or(t0, |s| s.t + s.dt_s);
    let index = |t: f64| ((t - t0) / slot_seconds + 1e-9).floor() as usize;
    let mut slots = Vec::new();
    let mut first = 0;
    while first < budget.len() {
        let k = index(budget[first].t);
        let mut last = first;
        while last + 1 < budget.len() && index(budget[last + 1].t) == k {
            last += 1;
        }
        let group = &budget[first..=last];
        let n = group.len() as f64;
        slots.push(Slot {
            start: t0 + k as f64 * slot_seconds,
            end: (t0 + (k + 1) as f64 * slot_seconds).min(t_end),
            mean_eta_a: group.iter().map(|s| s.eta_a).sum::<f64>() / n,
            mean_eta_b: group.iter().map(|s| s.eta_b).sum::<f64>() / n,
            first_sample: first,
            sample_count: group.len(),
        });
        first = last + 1;
    }
    Ok(slots)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityBounds {
    pub mu_min: f64,
    pub mu_max: f64,
    /// ν ranges over `[nu_min, μ/2]`.
    pub nu_min: f64,
}

impl Default for IntensityBounds {
    fn default() -> Self {
        Self { mu_min: 0.01, mu_max: 1.0, nu_min: 0.001 }
    }
}

impl IntensityBounds {
    /// Reported decoy when the objective does not depend on ν.
    fn nominal_nu(&self, mu: f64) -> f64 {
        (mu / 10.0).max(self.nu_min)
    }

    /// ν from its log-position `s ∈ [0, 1]` between `nu_min` and `μ/2`.
    fn nu_at(&self, mu: f64, s: f64) -> f64 {
        self.nu_min * (mu / 2.0 / self.nu_min).powf(s)
    }
}

/// Clamps to `[lo, hi]` and removes the rounding left by the log-space round trip at either bound.
fn snap(x: f64, lo: f64, hi: f64) -> f64 {
    let x = x.clamp(lo, hi);
    if x - lo <= 1e-12 * lo {
        lo
    } else if hi - x <= 1e-12 * hi {
        hi
    } else {
        x
    }
}

/// Optimizer coordinates: ln μ per party, plus the ν position per party
/// when the objective is the finite-size rate.
struct Objective<'a> {
    eta_a: f64,
    eta_b: f64,
    protocol: &'a ProtocolParams,
    bounds: IntensityBounds,
    symmetric: bool,
}

impl Objective<'_> {
    fn with_decoy(&self) -> bool {
        self.protocol.finite_size
    }

    fn dim(&self) -> usize {
        let per_party = if self.with_decoy() { 2 } else { 1 };
        if self.symmetric {
            per_party
        } else {
            2 * per_party
        }
    }

    fn setting(&self, x: &[f64]) -> IntensitySetting {
        let b = &self.bounds;
        let party = |c: &[f64]| {
            let mu = snap(c[0].exp(), b.mu_min, b.mu_max);
            let nu = if self.with_decoy() { b.nu_at(mu, c[1]) } else { b.nominal_nu(mu) };
            (mu, nu)
        };
        let per = x.len() / if self.symmetric { 1 } else { 2 };
        let (mu_a, nu_a) = party(&x[..per]);
        let (mu_b, nu_b) = if self.symmetric { (mu_a, nu_a) } else { party(&x[per..]) };
        IntensitySetting { mu_a, nu_a, mu_b, nu_b, omega: 0.0 }
    }

    fn rate(&self, s: &IntensitySetting) -> f64 {
        let r = if self.with_decoy() {
            finite_size_rate_raw(s, self.eta_a, self.eta_b, self.protocol, self.protocol.pulse_rate_hz)
        } else {
            key_rate_raw(s, self.eta_a, self.eta_b, self.protocol)
        };
        r.unwrap_or(f64::NEG_INFINITY)
    }

    fn box_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let (lo_mu, hi_mu) = (self.bounds.mu_min.ln(), self.bounds.mu_max.ln());
        let (lo, hi): (Vec<f64>, Vec<f64>) = if self.with_decoy() { (vec![lo_mu, 0.0], vec![hi_mu, 1.0]) } else { (vec![lo_mu], vec![hi_mu]) };
        if self.symmetric {
            (lo, hi)
        } else {
            (lo.repeat(2), hi.repeat(2))
        }
    }

    fn optimize(&self) -> (IntensitySetting, f64) {
        let (lo, hi) = self.box_bounds();
        let dim = self.dim();
        let axis = |i: usize, k: usize| lo[i] + (hi[i] - lo[i]) * k as f64 / (GRID_POINTS - 1) as f64;
        let mut best = (vec![0.0; dim], f64::NEG_INFINITY);
        let mut idx = vec![0usize; dim];
        loop {
            let x: Vec<f64> = (0..dim).map(|i| axis(i, idx[i])).collect();
            let r = self.rate(&self.setting(&x));
            if r > best.1 {
                best = (x, r);
            }
            let mut i = 0;
            while i < dim {
                idx[i] += 1;
                if idx[i] < GRID_POINTS {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == dim {
                break;
            }
        }
        let opts = NelderMeadOptions { initial_step: 1.0 / (GRID_POINTS - 1) as f64, ..Default::default() };
        let min = minimize_bounded(|x| -self.rate(&self.setting(x)), &best.0, &lo, &hi, &opts);
        let (x, r) = if -min.f > best.1 { (min.x, -min.f) } else { best };
        (self.setting(&x), r)
    }
}

/// Best setting for one transmittance pair. The search runs with the
/// stronger channel as party A and maps the result back, so exchanging the
/// channels exchanges the parties' intensities exactly. Equal channels are
/// searched on the symmetric subspace. The fixed baseline is returned unless
/// the search strictly beats it.
pub fn optimize_slot(mean_eta_a: f64, mean_eta_b: f64, protocol: &ProtocolParams, bounds: &IntensityBounds) -> Result<(IntensitySetting, f64)> {
    for eta in [mean_eta_a, mean_eta_b] {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Domain(format!("mean transmittance must be in [0, 1], got {eta}")));
        }
    }
    if mean_eta_a == 0.0 && mean_eta_b == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    if !(bounds.mu_min > 0.0 && bounds.mu_max <= IntensitySetting::MU_CAP && bounds.mu_min < bounds.mu_max && bounds.nu_min > 0.0 && bounds.nu_min < bounds.mu_min / 2.0 + 1e-15) {
        return Err(Error::Invariant(format!("bad intensity bounds {bounds:?}")));
    }
    let swap = mean_eta_a < mean_eta_b;
    let (ea, eb) = if swap { (mean_eta_b, mean_eta_a) } else { (mean_eta_a, mean_eta_b) };
    let objective = Objective { eta_a: ea, eta_b: eb, protocol, bounds: *bounds, symmetric: ea == eb };
    let (mut setting, _) = objective.optimize();
    let mut r_star = configured_rate(&setting, ea, eb, protocol)?;
    let baseline = IntensitySetting::fixed_baseline();
    let r_base = configured_rate(&baseline, ea, eb, protocol)?;
    if r_base >= r_star {
        setting = baseline;
        r_star = r_base;
    }
    if swap {
        setting = setting.swapped();
    }
    Ok((setting, r_star))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotPlan {
    pub slots: Vec<Slot>,
    pub settings: Vec<IntensitySetting>,
    /// Rate at each slot's mean transmittances.
    pub r_star: Vec<f64>,
    /// Bits per slot, evaluated sample by sample.
    pub slot_bits: Vec<f64>,
    pub total_bits: f64,
    /// Total with the fixed μ = 0.5, ν = 0.1 setting throughout.
    pub baseline_bits: f64,
    /// Total if every sample produced the slot-mean rate `r_star`.
    pub slot_average_bits: f64,
}

impl SlotPlan {
    /// One setting per budget sample.
    pub fn schedule(&self) -> Vec<IntensitySetting> {
        self.slots.iter().zip(&self.settings).flat_map(|(s, set)| std::iter::repeat(*set).take(s.sample_count)).collect()
    }
}

fn bits(samples: &[LinkBudgetSample], setting: &IntensitySetting, protocol: &ProtocolParams) -> Result<f64> {
    samples
        .iter()
        .map(|s| Ok(configured_rate(setting, s.eta_a, s.eta_b, protocol)? * protocol.pulse_rate_hz * s.dt_s))
        .sum()
}

/// Optimizes each slot independently (in parallel; results are assembled in
/// slot order). A slot keeps the fixed baseline when that yields at least as many bits
/// over the slot's own samples, so `total_bits ≥ baseline_bits` holds.
pub fn optimize_pass(budget: &[LinkBudgetSample], slot_seconds: f64, protocol: &ProtocolParams) -> Result<SlotPlan> {
    optimize_pass_with(budget, slot_seconds, protocol, &IntensityBounds::default())
}

pub fn optimize_pass_with(budget: &[LinkBudgetSample], slot_seconds: f64, protocol: &ProtocolParams, bounds: &IntensityBounds) -> Result<SlotPlan> {
    protocol.validate()?;
    let slots = slot_partition(budget, slot_seconds)?;
    let baseline = IntensitySetting::fixed_baseline();
    let per_slot = slots
        .par_iter()
        .map(|slot| {
            let samples = &budget[slot.samples()];
            let (opt, r_opt) = optimize_slot(slot.mean_eta_a, slot.mean_eta_b, protocol, bounds)?;
            let opt_bits = bits(samples, &opt, protocol)?;
            let base_bits = bits(samples, &baseline, protocol)?;
            let (setting, r, slot_bits) = if base_bits >= opt_bits {
                (baseline, configured_rate(&baseline, slot.mean_eta_a, slot.mean_eta_b, protocol)?, base_bits)
            } else {
                (opt, r_opt, opt_bits)
            };
            let duration: f64 = samples.iter().map(|s| s.dt_s).sum();
            Ok((setting, r, slot_bits, base_bits, r * protocol.pulse_rate_hz * duration))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SlotPlan {
        settings: per_slot.iter().map(|p| p.0).collect(),
        r_star: per_slot.iter().map(|p| p.1).collect(),
        slot_bits: per_slot.iter().map(|p| p.2).collect(),
        total_bits: per_slot.iter().map(|p| p.2).sum(),
        baseline_bits: per_slot.iter().map(|p| p.3).sum(),
        slot_average_bits: per_slot.iter().map(|p| p.4).sum(),
        slots,
    })
}
