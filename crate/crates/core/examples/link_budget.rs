//! Single-uplink loss along an Ngari pass, and the slant-mode calibration
//! used to pick how the zenith angle enters the Fried parameter.

use satqkd::channel::{calibrate_slant_mode, link_budget, ChannelParams, TurbulenceProfile};
use satqkd::defaults::{MICIUS_TLE, NGARI};
use satqkd::orbit::{find_access_windows, parse_tle, PropagatorModel};
use satqkd::time::{format_utc, parse_utc};

fn main() -> satqkd::Result<()> {
    let cal = calibrate_slant_mode()?;
    println!("slant mode: {:?} (worst error literal {:.2} dB, zenith_r0 {:.2} dB)", cal.chosen, cal.literal_max_error_db, cal.zenith_r0_max_error_db);
    for p in &cal.points {
        println!(
            "  {:>5.1} deg {:>6.0} km  reference {:.1} dB  literal {:.2}  zenith_r0 {:.2}",
            p.elevation_deg, p.range_km, p.reference_loss_db, p.literal_loss_db, p.zenith_r0_loss_db
        );
    }

    let el = parse_tle(MICIUS_TLE)?;
    let station = NGARI.station();
    let params = ChannelParams { slant_mode: cal.chosen, ..Default::default() };
    let profile = TurbulenceProfile { site_altitude_m: station.altitude_m, ..Default::default() };
    let t0 = parse_utc("2016-09-23T17:45:00Z")?;
    let windows = find_access_windows(&el, PropagatorModel::J2Secular, &[station], params.min_elevation_rad, t0, t0 + 1500.0, 1.0)?;

    println!("\n{:<26} {:>8} {:>9} {:>9} {:>8} {:>8}", "time", "elev", "range km", "loss dB", "w_R m", "r0 cm");
    for s in windows[0].samples.iter().step_by(20) {
        let topo = &s.topo[0];
        let b = link_budget(topo, &params, &profile)?;
        println!(
            "{:<26} {:>8.2} {:>9.1} {:>9.2} {:>8.2} {:>8.2}",
            format_utc(s.t),
            topo.elevation.to_degrees(),
            topo.range_m / 1e3,
            b.loss_db,
            b.omega_r_m,
            b.r0_m * 100.0
        );
    }
    Ok(())
}
