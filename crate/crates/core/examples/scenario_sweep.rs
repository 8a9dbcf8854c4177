//! Window length over a grid of orbit altitudes and minimum elevations for
//! a circular orbit passing over the midpoint of the two stations.

use std::path::Path;

use satqkd::commands::RunOptions;
use satqkd::scenario::load_scenario;
use satqkd::sweep::{parse_sweep, sweep};

fn main() -> satqkd::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/scenarios");
    let base = load_scenario(&dir.join("circular_orbit.json"))?;
    let spec = parse_sweep(&std::fs::read_to_string(dir.join("sweep_altitude_elevation.json"))?)?;
    let result = sweep(&spec, &base, &RunOptions::default())?;
    print!("{}", result.table().to_csv()?);
    Ok(())
}
