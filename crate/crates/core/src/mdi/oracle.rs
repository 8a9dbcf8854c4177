//! Monte-Carlo simulation of the Bell-state measurement, used to arbitrate
//! the closed-form gains.
//!
//! Detector layout: two output ports (c, d) of a 50:50 beam splitter, each
//! followed by a polarizing splitter, giving modes cH, cV, dH, dV. A
//! phase-randomized coherent pulse is a coherent state with a uniformly
//! random phase, so one trial draws the relative phase θ and the
//! per-detector mean photon numbers follow from the interfering amplitudes.
//! Threshold detectors click with probability `1 − (1−y₀)e^{−m}`.
//!
//! Misalignment is a whole-pulse flip of Bob's state to the orthogonal
//! state of the same basis, with probability e_d.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{IntensitySetting, ProtocolParams};
use crate::error::{Error, Result};

const BATCHES: u64 = 64;
const MIN_TRIALS: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Basis {
    Z,
    X,
}

/// Polarization amplitudes (H, V) of bit `bit` in `basis`.
fn polarization(basis: Basis, bit: bool) -> [f64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match (basis, bit) {
        (Basis::Z, false) => [1.0, 0.0],
        (Basis::Z, true) => [0.0, 1.0],
        (Basis::X, false) => [s, s],
        (Basis::X, true) => [s, -s],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bell {
    Minus,
    Plus,
}

/// Declared Bell state for an exact two-detector click pattern over [cH, cV, dH, dV].
fn announce(clicks: [bool; 4]) -> Option<Bell> {
    match clicks {
        [true, false, false, true] | [false, true, true, false] => Some(Bell::Minus),
        [true, true, false, false] | [false, false, true, true] => Some(Bell::Plus),
        _ => None,
    }
}

/// Whether Alice's and Bob's sifted bits disagree with the announced state.
fn is_error(basis: Basis, bell: Bell, a: bool, b: bool) -> bool {
    match (basis, bell) {
        (Basis::Z, _) => a == b,
        (Basis::X, Bell::Minus) => a == b,
        (Basis::X, Bell::Plus) => a != b,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    trials: u64,
    success: u64,
    errors: u64,
}

impl Tally {
    fn add(self, o: Tally) -> Tally {
        Tally { trials: self.trials + o.trials, success: self.success + o.success, errors: self.errors + o.errors }
    }
}

/// Estimated gain and QBER for one basis with binomial standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub trials: u64,
    pub successes: u64,
    pub errors: u64,
    pub gain: f64,
    pub qber: f64,
    pub gain_se: f64,
    pub qber_se: f64,
}

impl From<Tally> for McEstimate {
    fn from(t: Tally) -> Self {
        let n = t.trials as f64;
        let gain = t.success as f64 / n;
        let qber = if t.success > 0 { t.errors as f64 / t.success as f64 } else { 0.0 };
        let qber_se = if t.success > 0 { (qber * (1.0 - qber) / t.success as f64).sqrt() } else { 0.0 };
        McEstimate {
            trials: t.trials,
            successes: t.success,
            errors: t.errors,
            gain,
            qber,
            gain_se: (gain * (1.0 - gain) / n).sqrt(),
            qber_se,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McGains {
    pub z: McEstimate,
    pub x: McEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSinglePhoton {
    /// Z-basis statistics; `gain` estimates Y₁₁.
    pub z: McEstimate,
    /// X-basis statistics; `qber` estimates e₁₁.
    pub x: McEstimate,
}

fn validate(eta_a: f64, eta_b: f64, protocol: &ProtocolParams, trials: u64) -> Result<()> {
    protocol.validate()?;
    for eta in [eta_a, eta_b] {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Domain(format!("transmittance must be in [0, 1], got {eta}")));
        }
    }
    if trials < MIN_TRIALS {
        return Err(Error::Domain(format!("oracle needs at least {MIN_TRIALS} trials, got {trials}")));
    }
    Ok(())
}

/// Runs `trials` trials split into a fixed number of batches, each with its
/// own ChaCha stream derived from `seed`, and sums the tallies in batch order.
fn run_batches<F>(trials: u64, seed: u64, stream_base: u64, trial: F) -> Tally
where
    F: Fn(&mut ChaCha8Rng) -> (bool, bool) + Sync,
{
    (0..BATCHES)
        .into_par_iter()
        .map(|batch| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_base + batch);
            let count = trials / BATCHES + u64::from(batch < trials % BATCHES);
            let mut t = Tally { trials: count, ..Default::default() };
            for _ in 0..count {
                let (ok, err) = trial(&mut rng);
                t.success += u64::from(ok);
                t.errors += u64::from(ok && err);
            }
            t
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::default(), Tally::add)
}

fn coherent_trial(rng: &mut ChaCha8Rng, basis: Basis, amp_a: f64, amp_b: f64, p: &ProtocolParams) -> (bool, bool) {
    let bits: u32 = rng.gen();
    let a = bits & 1 == 1;
    let b = bits & 2 == 2;
    let flip = rng.gen::<f64>() < p.e_d;
    let pa = polarization(basis, a);
    let pb = polarization(basis, b ^ flip);
    let cos = (rng.gen::<f64>() * std::f64::consts::TAU).cos();
    let dark_free = 1.0 - p.y_0;
    let mut clicks = [false; 4];
    for pol in 0..2 {
        let u = amp_a * pa[pol];
        let v = amp_b * pb[pol];
        let common = 0.5 * (u * u + v * v);
        let cross = u * v * cos;
        let mean_c = common + cross;
        let mean_d = common - cross;
        clicks[pol] = rng.gen::<f64>() >= dark_free * (-mean_c).exp();
        clicks[2 + pol] = rng.gen::<f64>() >= dark_free * (-mean_d).exp();
    }
    match announce(clicks) {
        Some(bell) => (true, is_error(basis, bell, a, b)),
        None => (false, false),
    }
}

/// Seeded simulation of Z- and X-basis gains and QBERs for signal intensities.
pub fn mc_oracle_gains(setting: &IntensitySetting, eta_a: f64, eta_b: f64, protocol: &ProtocolParams, trials: u64, seed: u64) -> Result<McGains> {
    setting.validate()?;
    validate(eta_a, eta_b, protocol, trials)?;
    let amp_a = (setting.mu_a * eta_a).sqrt();
    let amp_b = (setting.mu_b * eta_b).sqrt();
    let z = run_batches(trials, seed, 0, |rng| coherent_trial(rng, Basis::Z, amp_a, amp_b, protocol));
    let x = run_batches(trials, seed, BATCHES, |rng| coherent_trial(rng, Basis::X, amp_a, amp_b, protocol));
    Ok(McGains { z: z.into(), x: x.into() })
}

/// Output-mode amplitudes of one photon: Alice enters port c with +1/√2 on
/// both outputs, Bob the other input with +1/√2 on c and −1/√2 on d.
fn single_photon_modes(pol: [f64; 2], sign_d: f64) -> [f64; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [s * pol[0], s * pol[1], sign_d * s * pol[0], sign_d * s * pol[1]]
}

fn sample_index(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

fn single_photon_trial(rng: &mut ChaCha8Rng, basis: Basis, eta_a: f64, eta_b: f64, p: &ProtocolParams) -> (bool, bool) {
    let bits: u32 = rng.gen();
    let a = bits & 1 == 1;
    let b = bits & 2 == 2;
    let flip = rng.gen::<f64>() < p.e_d;
    let alice = single_photon_modes(polarization(basis, a), 1.0);
    let bob = single_photon_modes(polarization(basis, b ^ flip), -1.0);
    let survive_a = rng.gen::<f64>() < eta_a;
    let survive_b = rng.gen::<f64>() < eta_b;
    let mut clicks = [false; 4];
    match (survive_a, survive_b) {
        (true, true) => {
            // pairs (m, n), m ≤ n: P = |A_m B_n + A_n B_m|² for m ≠ n, 2|A_m B_m|² for m = n
            let mut weights = [0.0; 10];
            let mut pairs = [(0usize, 0usize); 10];
            let mut k = 0;
            for m in 0..4 {
                for n in m..4 {
                    weights[k] = if m == n {
                        2.0 * (alice[m] * bob[m]).powi(2)
                    } else {
                        (alice[m] * bob[n] + alice[n] * bob[m]).powi(2)
                    };
                    pairs[k] = (m, n);
                    k += 1;
                }
            }
            let (m, n) = pairs[sample_index(rng, &weights)];
            clicks[m] = true;
            clicks[n] = true;
        }
        (true, false) => clicks[sample_index(rng, &alice.map(|x| x * x))] = true,
        (false, true) => clicks[sample_index(rng, &bob.map(|x| x * x))] = true,
        (false, false) => {}
    }
    for c in &mut clicks {
        *c |= rng.gen::<f64>() < p.y_0;
    }
    match announce(clicks) {
        Some(bell) => (true, is_error(basis, bell, a, b)),
        None => (false, false),
    }
}

/// Seeded simulation restricted to exactly one photon from each party.
pub fn mc_oracle_single_photon(eta_a: f64, eta_b: f64, protocol: &ProtocolParams, trials: u64, seed: u64) -> Result<McSinglePhoton> {
    validate(eta_a, eta_b, protocol, trials)?;
    let z = run_batches(trials, seed, 2 * BATCHES, |rng| single_photon_trial(rng, Basis::Z, eta_a, eta_b, protocol));
    let x = run_batches(trials, seed, 3 * BATCHES, |rng| single_photon_trial(rng, Basis::X, eta_a, eta_b, protocol));
    Ok(McSinglePhoton { z: z.into(), x: x.into() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn click_patterns() {
        assert_eq!(announce([true, false, false, true]), Some(Bell::Minus));
        assert_eq!(announce([false, true, true, false]), Some(Bell::Minus));
        assert_eq!(announce([true, true, false, false]), Some(Bell::Plus));
        assert_eq!(announce([true, false, true, false]), None);
        assert_eq!(announce([true, true, true, false]), None);
    }

    #[test]
    fn two_photon_probabilities_sum_to_one() {
        for basis in [Basis::Z, Basis::X] {
            for (a, b) in [(false, false), (false, true), (true, true)] {
                let al = single_photon_modes(polarization(basis, a), 1.0);
                let bo = single_photon_modes(polarization(basis, b), -1.0);
                let mut total = 0.0;
                for m in 0..4 {
                    for n in m..4 {
                        total += if m == n { 2.0 * (al[m] * bo[m]).powi(2) } else { (al[m] * bo[n] + al[n] * bo[m]).powi(2) };
                    }
                }
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn silent_channel_gives_zero() {
        let p = ProtocolParams { y_0: 0.0, ..Default::default() };
        let g = mc_oracle_gains(&IntensitySetting::fixed_baseline(), 0.0, 0.0, &p, MIN_TRIALS, 1).unwrap();
        assert_eq!((g.z.successes, g.x.successes), (0, 0));
        let s = mc_oracle_single_photon(0.0, 0.0, &p, MIN_TRIALS, 1).unwrap();
        assert_eq!((s.z.successes, s.x.successes), (0, 0));
    }

    #[test]
    fn seeded_runs_repeat() {
        let p = ProtocolParams { y_0: 1e-3, ..Default::default() };
        let s = IntensitySetting::fixed_baseline();
        let a = mc_oracle_gains(&s, 0.3, 0.1, &p, 200_000, 42).unwrap();
        let b = mc_oracle_gains(&s, 0.3, 0.1, &p, 200_000, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, mc_oracle_gains(&s, 0.3, 0.1, &p, 200_000, 43).unwrap());
        assert!(mc_oracle_gains(&s, 0.3, 0.1, &p, 10, 42).is_err());
    }
}
