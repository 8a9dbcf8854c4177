//! Grid sweeps: set scenario keys to every combination of axis values and
//! collect each run's summary.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::commands::{execute, metadata, write_outputs, Command, Report, RunOptions, Summary, META_FILE};
use crate::error::{Error, Result};
use crate::output::{format_float, Cell, Table};
use crate::scenario::{load_scenario, scenario_from_value, Loaded};

pub const MAX_AXES: usize = 4;
pub const MAX_POINTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    /// Dotted key path into the scenario file, e.g. `channel.r_s_m` or `stations.0.altitude_m`.
    pub path: String,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub command: Command,
    pub axes: Vec<Axis>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.command == Command::Validate {
            return Err(Error::Schema("`validate` cannot be swept".into()));
        }
        if self.axes.is_empty() || self.axes.len() > MAX_AXES {
            return Err(Error::Invariant(format!("a sweep needs 1 to {MAX_AXES} axes, got {}", self.axes.len())));
        }
        let mut points: usize = 1;
        for a in &self.axes {
            if a.values.is_empty() {
                return Err(Error::Invariant(format!("axis `{}` has no values", a.path)));
            }
            points = points.saturating_mul(a.values.len());
        }
        if points > MAX_POINTS {
            return Err(Error::Invariant(format!("sweep has {points} points, the limit is {MAX_POINTS}")));
        }
        Ok(())
    }

    pub fn point_count(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Axis value indices of grid point `k`; the last axis varies fastest.
    fn indices(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        for (slot, axis) in idx.iter_mut().zip(&self.axes).rev() {
            *slot = k % axis.values.len();
            k /= axis.values.len();
        }
        idx
    }
}

pub fn parse_sweep(text: &str) -> Result<SweepSpec> {
    let spec: SweepSpec = serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => Error::Schema(e.to_string()),
        _ => Error::Parse(e.to_string()),
    })?;
    spec.validate()?;
    Ok(spec)
}

/// Sets `path` in `doc`, creating missing object members along the way.
/// Array indices must already exist.
pub fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<()> {
    let bad = |why: &str| Error::Schema(format!("sweep axis path `{path}`: {why}"));
    let parts: Vec<&str> = path.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(bad("empty path component"));
    }
    let mut cur = doc;
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert(part.to_string(), value);
                    return Ok(());
                }
                map.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let n: usize = part.parse().map_err(|_| bad(&format!("`{part}` is not an array index")))?;
                let len = items.len();
                let slot = items.get_mut(n).ok_or_else(|| bad(&format!("index {n} out of range (length {len})")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(bad(&format!("`{part}` is not inside an object or array"))),
        };
    }
    unreachable!("loop returns on the last component")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    /// Axis values and summary for every grid point, in grid order.
    pub points: Vec<(Vec<Value>, Summary)>,
}

impl SweepResult {
    pub fn table(&self) -> Table {
        let mut header: Vec<&str> = self.spec.axes.iter().map(|a| a.path.as_str()).collect();
        header.extend(Summary::COLUMNS);
        let mut t = Table::new(&header);
        for (values, summary) in &self.points {
            let mut row: Vec<Cell> = values.iter().map(value_cell).collect();
            row.extend(summary.cells());
            t.push(row);
        }
        t
    }
}

fn value_cell(v: &Value) -> Cell {
    match v {
        Value::String(s) => Cell::Text(s.clone()),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => Cell::Text(format_float(x)),
            _ => Cell::Text(n.to_string()),
        },
        other => Cell::Text(other.to_string()),
    }
}

/// Runs every grid point (in parallel) and returns results in grid order.
pub fn sweep(spec: &SweepSpec, base: &Loaded, opts: &RunOptions) -> Result<SweepResult> {
    spec.validate()?;
    let doc = base.scenario.to_json_value();
    // resolve every point's scenario before any heavy work so path errors surface first
    let scenarios: Vec<(Vec<Value>, Loaded)> = (0..spec.point_count())
        .map(|k| {
            let idx = spec.indices(k);
            let values: Vec<Value> = idx.iter().zip(&spec.axes).map(|(i, a)| a.values[*i].clone()).collect();
            let mut d = doc.clone();
            for (axis, v) in spec.axes.iter().zip(&values) {
                set_path(&mut d, &axis.path, v.clone())?;
            }
            Ok((values, scenario_from_value(d, None)?))
        })
        .collect::<Result<_>>()?;
    let points = scenarios
        .into_par_iter()
        .map(|(values, loaded)| Ok((values, execute(spec.command, &loaded, opts)?.summary)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { spec: spec.clone(), points })
}

/// Loads both files, runs the sweep and writes `sweep.csv` plus `run_meta.json`.
/// `command`, when given, must match the spec's command.
pub fn run_sweep(command: Option<Command>, sweep_path: &Path, scenario_path: &Path, out_dir: &Path, opts: &RunOptions) -> Result<SweepResult> {
    let started = Instant::now();
    let text = std::fs::read_to_string(sweep_path).map_err(|e| Error::Io(format!("{}: {e}", sweep_path.display())))?;
    let spec = parse_sweep(&text)?;
    if let Some(c) = command {
        if c != spec.command {
            return Err(Error::Invariant(format!("command `{c}` does not match the sweep spec's `{}`", spec.command)));
        }
    }
    let base = load_scenario(scenario_path)?;
    let result = sweep(&spec, &base, opts)?;
    let csv = result.table().to_csv()?;
    let report = Report {
        command: spec.command,
        files: vec![("sweep.csv".to_string(), csv)],
        summary: Summary::default(),
        checks: Vec::new(),
        defaults_applied: Vec::new(),
    };
    let spec_json = serde_json::to_value(&spec).map_err(|e| Error::Io(e.to_string()))?;
    let meta = metadata(&base, &report, Some(spec_json), started.elapsed().as_secs_f64())?;
    let mut files = report.files;
    files.push((META_FILE.to_string(), meta));
    write_outputs(out_dir, &files)?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defaults;
    use crate::scenario::parse_scenario;
    use serde_json::json;

    fn base() -> Loaded {
        let v = json!({
            "satellite": { "tle": defaults::MICIUS_TLE },
            "stations": [ { "name": "Delingha" }, { "name": "Lijiang" } ],
            "search": { "t0": "2016-09-26T16:40:00Z", "t1": "2016-09-26T17:00:00Z", "step_s": 1.0 }
        });
        parse_scenario(&v.to_string(), None).unwrap()
    }

    #[test]
    fn grid_order_is_lexicographic() {
        let spec = SweepSpec {
            command: Command::Access,
            axes: vec![
                Axis { path: "a".into(), values: vec![json!(1), json!(2)] },
                Axis { path: "b".into(), values: vec![json!(1), json!(2), json!(3)] },
            ],
        };
        let order: Vec<_> = (0..6).map(|k| spec.indices(k)).collect();
        assert_eq!(order, vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 0], vec![1, 1], vec![1, 2]]);
    }

    #[test]
    fn path_setting() {
        let mut d = json!({ "channel": { "r_s_m": 0.1 }, "stations": [ { "name": "x" } ] });
        set_path(&mut d, "channel.r_s_m", json!(0.5)).unwrap();
        set_path(&mut d, "stations.0.channel.r_r_m", json!(1.0)).unwrap();
        assert_eq!(d["channel"]["r_s_m"], json!(0.5));
        assert_eq!(d["stations"][0]["channel"]["r_r_m"], json!(1.0));
        assert!(matches!(set_path(&mut d, "stations.3.name", json!("y")), Err(Error::Schema(_))));
        assert!(matches!(set_path(&mut d, "channel.r_s_m.deeper", json!(1)), Err(Error::Schema(_))));
    }

    #[test]
    fn unknown_key_path_is_schema_error() {
        let spec = SweepSpec { command: Command::Access, axes: vec![Axis { path: "channel.wavelenght".into(), values: vec![json!(800.0)] }] };
        assert!(matches!(sweep(&spec, &base(), &RunOptions::default()), Err(Error::Schema(_))));
    }

    #[test]
    fn limits() {
        let axis = |n: usize| Axis { path: "seed".into(), values: (0..n).map(|i| json!(i)).collect() };
        let too_many = SweepSpec { command: Command::Access, axes: vec![axis(1); 5] };
        assert!(too_many.validate().is_err());
        let too_big = SweepSpec { command: Command::Access, axes: vec![axis(100), axis(100), axis(11)] };
        assert!(too_big.validate().is_err());
        let v = SweepSpec { command: Command::Validate, axes: vec![axis(1)] };
        assert!(v.validate().is_err());
    }

    #[test]
    fn single_point_matches_direct_run() {
        let b = base();
        let spec = SweepSpec { command: Command::Keyrate, axes: vec![Axis { path: "channel.r_s_m".into(), values: vec![json!(0.75)] }] };
        let swept = sweep(&spec, &b, &RunOptions::default()).unwrap();
        let mut doc = b.scenario.to_json_value();
        set_path(&mut doc, "channel.r_s_m", json!(0.75)).unwrap();
        let direct = execute(Command::Keyrate, &scenario_from_value(doc, None).unwrap(), &RunOptions::default()).unwrap();
        assert_eq!(swept.points[0].1, direct.summary);
        let csv = swept.table().to_csv().unwrap();
        assert!(csv.starts_with("channel.r_s_m,window_count,total_duration_s,longest_window_s,min_loss_total_db,max_loss_total_db,total_bits\n0.75,1,"));
    }
}
