use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{topocentric, GroundStation, OrbitElements, PropagatorModel, TopoSample};
use crate::error::{Error, Result};

/// Station geometries at one grid instant, in the order the stations were given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSample {
    pub t: f64,
    pub topo: Vec<TopoSample>,
}

/// Interval during which every listed station sees the satellite above the
/// minimum elevation, with geometry sampled on the search grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessWindow {
    pub start: f64,
    pub end: f64,
    pub step_s: f64,
    pub samples: Vec<WindowSample>,
}

impl AccessWindow {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn station_count(&self) -> usize {
        self.samples.first().map_or(0, |s| s.topo.len())
    }

    /// (station A, station B) geometry for sample `i` of a dual-station window.
    pub fn pair(&self, i: usize) -> Option<(TopoSample, TopoSample)> {
        match self.samples.get(i)?.topo.as_slice() {
            [a, b, ..] => Some((*a, *b)),
            _ => None,
        }
    }

    /// Sub-window holding samples `range`, with bounds at the first/last kept sample.
    pub fn slice(&self, range: std::ops::Range<usize>) -> AccessWindow {
        let samples = self.samples[range].to_vec();
        let start = samples.first().map_or(self.start, |s| s.t.max(self.start));
        let end = samples.last().map_or(self.end, |s| s.t.min(self.end));
        AccessWindow { start, end, step_s: self.step_s, samples }
    }
}

struct Geometry<'a> {
    elements: &'a OrbitElements,
    model: PropagatorModel,
    stations: &'a [GroundStation],
}

impl Geometry<'_> {
    fn sample(&self, t: f64) -> Result<WindowSample> {
        let state = self.elements.propagate(t, self.model)?;
        Ok(WindowSample { t, topo: self.stations.iter().map(|s| topocentric(&state, s)).collect() })
    }

    /// Smallest station elevation minus the threshold.
    fn margin(&self, t: f64, min_elevation: f64) -> Result<f64> {
        Ok(self.sample(t)?.topo.iter().map(|s| s.elevation).fold(f64::INFINITY, f64::min) - min_elevation)
    }

    /// Bisect a sign change of the margin; returns the bracket end on the visible side.
    fn refine(&self, mut inside: f64, mut outside: f64, min_elevation: f64, tol: f64) -> Result<f64> {
        while (inside - outside).abs() > tol {
            let mid = 0.5 * (inside + outside);
            if self.margin(mid, min_elevation)? >= 0.0 {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        Ok(inside)
    }
}

/// Maximal intervals within `[t0, t1]` where all `stations` see the satellite
/// at or above `min_elevation` (rad). The search grid is `t0 + k·step_s`
/// (plus `t1`); window bounds are refined by bisection to `step_s/100`.
/// Windows touching the ends of the search range are clipped to it.
pub fn find_access_windows(
    elements: &OrbitElements,
    model: PropagatorModel,
    stations: &[GroundStation],
    min_elevation: f64,
    t0: f64,
    t1: f64,
    step_s: f64,
) -> Result<Vec<AccessWindow>> {
    if !(t1 > t0) {
        return Err(Error::EmptySearch { t0, t1 });
    }
    if !(step_s > 0.0 && step_s <= 10.0) {
        return Err(Error::Range { what: "step_s", value: step_s, min: 0.0, max: 10.0 });
    }
    if stations.is_empty() {
        return Err(Error::Invariant("at least one ground station is required".into()));
    }
    let geometry = Geometry { elements, model, stations };
    let count = ((t1 - t0) / step_s).floor() as usize;
    let mut grid: Vec<f64> = (0..=count).map(|k| t0 + k as f64 * step_s).collect();
    if t1 - grid[count] > 1e-9 * step_s {
        grid.push(t1);
    }
    let samples: Vec<WindowSample> = grid.par_iter().map(|&t| geometry.sample(t)).collect::<Result<_>>()?;
    let visible = |s: &WindowSample| s.topo.iter().all(|g| g.elevation >= min_elevation);

    let tol = step_s / 100.0;
    let mut windows = Vec::new();
    let mut k = 0;
    while k < samples.len() {
        if !visible(&samples[k]) {
            k += 1;
            continue;
        }
        let first = k;
        while k + 1 < samples.len() && visible(&samples[k + 1]) {
            k += 1;
        }
        let last = k;
        k += 1;

        let start = if first == 0 {
            grid[0]
        } else {
            geometry.refine(grid[first], grid[first - 1], min_elevation, tol)?
        };
        let end = if last + 1 == samples.len() {
            grid[last]
        } else {
            geometry.refine(grid[last], grid[last + 1], min_elevation, tol)?
        };
        if end > start {
            windows.push(AccessWindow { start, end, step_s, samples: samples[first..=last].to_vec() });
        }
    }
    Ok(windows)
}
