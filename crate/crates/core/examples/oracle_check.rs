//! Closed-form gains, error rates and single-photon quantities next to a
//! seeded Monte-Carlo simulation of the same measurement.

use satqkd::channel::db_to_linear;
use satqkd::mdi::{gains_qber_x, gains_qber_z, mc_oracle_gains, mc_oracle_single_photon, single_photon_yield_error, IntensitySetting, ProtocolParams};

fn main() -> satqkd::Result<()> {
    let trials: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2_000_000);
    let p = ProtocolParams::default();
    let setting = IntensitySetting::symmetric(0.5, 0.1);
    let (eta_a, eta_b) = (db_to_linear(6.0), db_to_linear(9.0));

    let (q_z, e_z) = gains_qber_z(&setting, eta_a, eta_b, &p)?;
    let (q_x, e_x) = gains_qber_x(&setting, eta_a, eta_b, &p)?;
    let (y11, e11) = single_photon_yield_error(eta_a, eta_b, &p)?;
    let mc = mc_oracle_gains(&setting, eta_a, eta_b, &p, trials, 7)?;
    let sp = mc_oracle_single_photon(eta_a, eta_b, &p, trials, 7)?;

    println!("{trials} trials per basis");
    println!("{:<5} {:>12} {:>12} {:>10} {:>7}", "", "closed form", "simulated", "std err", "z");
    let rows = [
        ("Q_z", q_z, mc.z.gain, mc.z.gain_se),
        ("E_z", e_z, mc.z.qber, mc.z.qber_se),
        ("Q_x", q_x, mc.x.gain, mc.x.gain_se),
        ("E_x", e_x, mc.x.qber, mc.x.qber_se),
        ("Y11", y11, sp.z.gain, sp.z.gain_se),
        ("e11", e11, sp.x.qber, sp.x.qber_se),
    ];
    for (name, cf, est, se) in rows {
        println!("{name:<5} {cf:>12.6} {est:>12.6} {se:>10.2e} {:>7.2}", (est - cf) / se);
    }
    Ok(())
}
