//! Common-visibility windows of the Micius orbit over Delingha and Lijiang
//! during one day, with the peak elevation seen from each station.

use satqkd::defaults::{DELINGHA, LIJIANG, MICIUS_TLE};
use satqkd::orbit::{find_access_windows, parse_tle, PropagatorModel};
use satqkd::time::{format_utc, parse_utc};

fn main() -> satqkd::Result<()> {
    let el = parse_tle(MICIUS_TLE)?;
    println!("epoch {}  period {:.1} min  a = {:.1} km", format_utc(el.epoch), el.period_s() / 60.0, el.semi_major_axis_km());

    let stations = [DELINGHA.station(), LIJIANG.station()];
    let t0 = parse_utc("2016-09-26T00:00:00Z")?;
    let windows = find_access_windows(&el, PropagatorModel::J2Secular, &stations, 10f64.to_radians(), t0, t0 + 86_400.0, 1.0)?;

    println!("{:<26} {:>9} {:>10} {:>10}", "start", "length s", "peak A", "peak B");
    for w in &windows {
        let peak = |i: usize| w.samples.iter().map(|s| s.topo[i].elevation.to_degrees()).fold(f64::MIN, f64::max);
        println!("{:<26} {:>9.1} {:>10.2} {:>10.2}", format_utc(w.start), w.duration(), peak(0), peak(1));
    }
    Ok(())
}
