//! Doppler shifts on both uplinks of the Delingha/Lijiang pass, the
//! arrival-time offset between the two, and what remains after Bob shifts
//! his send times by the offset measured at the last geometry sample.

use satqkd::defaults::{DELINGHA, LIJIANG, MICIUS_TLE};
use satqkd::doppler::{compensated_arrivals, doppler_series, sync_series};
use satqkd::orbit::{find_access_windows, parse_tle, PropagatorModel};
use satqkd::time::{format_utc, parse_utc};

fn main() -> satqkd::Result<()> {
    let el = parse_tle(MICIUS_TLE)?;
    let t0 = parse_utc("2016-09-26T16:40:00Z")?;
    let stations = [DELINGHA.station(), LIJIANG.station()];
    let w = &find_access_windows(&el, PropagatorModel::J2Secular, &stations, 10f64.to_radians(), t0, t0 + 1200.0, 1.0)?[0];

    let d780 = doppler_series(w, 780e-9)?;
    let d1550 = doppler_series(w, 1550e-9)?;
    let sync = sync_series(w)?;
    println!("{:<26} {:>11} {:>11} {:>11} {:>11} {:>11}", "time", "A GHz", "B GHz", "A-B GHz", "A@1550", "dT_c us");
    for i in (0..d780.len()).step_by(20) {
        println!(
            "{:<26} {:>11.4} {:>11.4} {:>11.4} {:>11.4} {:>11.3}",
            format_utc(d780[i].t),
            d780[i].shift_a_hz / 1e9,
            d780[i].shift_b_hz / 1e9,
            d780[i].offset_hz / 1e9,
            d1550[i].shift_a_hz / 1e9,
            sync[i].delta_t_s * 1e6
        );
    }

    let arrivals = compensated_arrivals(w, 1e-3)?;
    let worst = |f: fn(&satqkd::doppler::PulseArrival) -> f64| arrivals.iter().map(|a| f(a).abs()).fold(0.0, f64::max);
    println!(
        "\n{} pulses at 1 kHz: max mismatch {:.3} us uncompensated, {:.3} us compensated (geometry refreshed every {} s)",
        arrivals.len(),
        worst(|a| a.uncompensated_s) * 1e6,
        worst(|a| a.residual_s) * 1e6,
        w.step_s
    );
    Ok(())
}
