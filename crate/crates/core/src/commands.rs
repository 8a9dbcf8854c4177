//! Subcommands. Each one turns a resolved scenario into CSV tables and a
//! scalar summary in memory; [`run`] then writes them next to a
//! `run_meta.json` record.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::channel::{dual_link_series_with, link_budget, ChannelParams, LinkBudgetSample, SlantCalibration, TurbulenceProfile};
use crate::defaults;
use crate::doppler::{doppler_shift, sync_offset};
use crate::error::{Error, Result};
use crate::intensity::{optimize_pass, SlotPlan};
use crate::mdi::{rate_point, IntensitySetting};
use crate::orbit::{find_access_windows, parse_tle, AccessWindow, GroundStation, OrbitElements};
use crate::output::{Cell, Table};
use crate::scenario::{calibrated_slant_mode, load_scenario, IntensityPlan, Loaded, SatelliteSource, Scenario};

/// Slot length used by `optimize` when neither the scenario nor the command line gives one.
pub const DEFAULT_SLOT_SECONDS: f64 = 25.0;

pub const DOPPLER_SIGN_CONVENTION: &str = "shift = -range_rate / wavelength; positive while the satellite approaches the station";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Access,
    Linkbudget,
    Keyrate,
    Doppler,
    Optimize,
    Validate,
}

impl Command {
    pub const ALL: [Command; 6] =
        [Command::Access, Command::Linkbudget, Command::Keyrate, Command::Doppler, Command::Optimize, Command::Validate];

    pub fn name(self) -> &'static str {
        match self {
            Command::Access => "access",
            Command::Linkbudget => "linkbudget",
            Command::Keyrate => "keyrate",
            Command::Doppler => "doppler",
            Command::Optimize => "optimize",
            Command::Validate => "validate",
        }
    }

    pub fn csv_name(self) -> String {
        format!("{}.csv", self.name())
    }

    fn needs_two_stations(self) -> bool {
        matches!(self, Command::Keyrate | Command::Doppler | Command::Optimize)
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Schema(format!("unknown command `{s}`")))
    }
}

impl std::fmt::Display for Command {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    /// Overrides the scenario's slot length for `optimize` and optimized `keyrate`.
    pub slot_seconds: Option<f64>,
}

/// Scalar results of one command run; unused fields stay empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Summary {
    pub window_count: usize,
    pub total_duration_s: f64,
    pub longest_window_s: f64,
    pub min_loss_total_db: Option<f64>,
    pub max_loss_total_db: Option<f64>,
    pub total_bits: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline_bits: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slot_average_bits: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_abs_shift_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks_failed: Option<usize>,
}

impl Summary {
    pub const COLUMNS: [&'static str; 6] =
        ["window_count", "total_duration_s", "longest_window_s", "min_loss_total_db", "max_loss_total_db", "total_bits"];

    pub fn cells(&self) -> Vec<Cell> {
        vec![
            self.window_count.into(),
            self.total_duration_s.into(),
            self.longest_window_s.into(),
            self.min_loss_total_db.into(),
            self.max_loss_total_db.into(),
            self.total_bits.into(),
        ]
    }

    fn windows(windows: &[AccessWindow]) -> Self {
        Summary {
            window_count: windows.len(),
            total_duration_s: windows.iter().map(AccessWindow::duration).sum(),
            longest_window_s: windows.iter().map(AccessWindow::duration).fold(0.0, f64::max),
            ..Default::default()
        }
    }

    fn note_loss(&mut self, loss_db: f64) {
        self.min_loss_total_db = Some(self.min_loss_total_db.map_or(loss_db, |m| m.min(loss_db)));
        self.max_loss_total_db = Some(self.max_loss_total_db.map_or(loss_db, |m| m.max(loss_db)));
    }
}

/// One row of the `validate` report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub computed: f64,
    pub reference: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass_start: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.computed >= self.lower && self.computed <= self.upper
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: Command,
    /// (file name, contents) in write order.
    pub files: Vec<(String, String)>,
    pub summary: Summary,
    pub checks: Vec<Check>,
    /// Defaults the command itself filled in (on top of the scenario's).
    pub defaults_applied: Vec<String>,
}

impl Report {
    pub fn checks_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }
}

/// Per-station resolved channel and turbulence.
fn links(s: &Scenario) -> Result<Vec<(ChannelParams, TurbulenceProfile)>> {
    (0..s.stations.len()).map(|i| Ok((s.channel_for(i)?, s.turbulence_for(i)?))).collect()
}

/// Windows where every station is above its own minimum elevation.
fn scenario_windows(s: &Scenario, links: &[(ChannelParams, TurbulenceProfile)]) -> Result<Vec<AccessWindow>> {
    let min_el = links.iter().map(|l| l.0.min_elevation_rad).fold(f64::NEG_INFINITY, f64::max);
    find_access_windows(&s.elements, s.propagator, &s.ground_stations(), min_el, s.search.t0, s.search.t1, s.search.step_s)
}

fn dual_budget(window: &AccessWindow, links: &[(ChannelParams, TurbulenceProfile)]) -> Result<Vec<LinkBudgetSample>> {
    dual_link_series_with(window, (&links[0].0, &links[0].1), (&links[1].0, &links[1].1))
}

fn slot_seconds(s: &Scenario, opts: &RunOptions, log: &mut Vec<String>) -> f64 {
    match (opts.slot_seconds, s.intensities) {
        (Some(v), _) => v,
        (None, IntensityPlan::Optimize(o)) => o.slot_seconds,
        (None, IntensityPlan::Fixed(_)) => {
            log.push("intensities.optimize.slot_seconds".into());
            DEFAULT_SLOT_SECONDS
        }
    }
}

/// Runs `command` on an already loaded scenario without touching the filesystem.
pub fn execute(command: Command, loaded: &Loaded, opts: &RunOptions) -> Result<Report> {
    let s = &loaded.scenario;
    if command.needs_two_stations() && s.stations.len() != 2 {
        return Err(Error::Invariant(format!(
            "`{command}` needs exactly two stations (Alice and Bob), the scenario has {}",
            s.stations.len()
        )));
    }
    let mut log = Vec::new();
    let (files, summary, checks) = match command {
        Command::Access => {
            let (t, sum) = access(s)?;
            (vec![(command.csv_name(), t.to_csv()?)], sum, Vec::new())
        }
        Command::Linkbudget => {
            let (t, sum) = linkbudget(s)?;
            (vec![(command.csv_name(), t.to_csv()?)], sum, Vec::new())
        }
        Command::Keyrate => {
            let (t, sum) = keyrate(s, opts, &mut log)?;
            (vec![(command.csv_name(), t.to_csv()?)], sum, Vec::new())
        }
        Command::Doppler => {
            let (t, sum) = doppler(s)?;
            (vec![(command.csv_name(), t.to_csv()?)], sum, Vec::new())
        }
        Command::Optimize => {
            let (t, sum) = optimize(s, opts, &mut log)?;
            (vec![(command.csv_name(), t.to_csv()?)], sum, Vec::new())
        }
        Command::Validate => {
            let (t, sum, checks) = validate(s)?;
            (vec![(command.csv_name(), t.to_csv()?)], sum, checks)
        }
    };
    Ok(Report { command, files, summary, checks, defaults_applied: log })
}

fn access(s: &Scenario) -> Result<(Table, Summary)> {
    let links = links(s)?;
    let windows = scenario_windows(s, &links)?;
    let mut t = Table::new(&["window_index", "start_utc", "end_utc", "duration_s"]);
    for (i, w) in windows.iter().enumerate() {
        t.push(vec![i.into(), Cell::Time(w.start), Cell::Time(w.end), w.duration().into()]);
    }
    Ok((t, Summary::windows(&windows)))
}

fn linkbudget(s: &Scenario) -> Result<(Table, Summary)> {
    let links = links(s)?;
    let windows = scenario_windows(s, &links)?;
    let mut summary = Summary::windows(&windows);
    let mut t = Table::new(&[
        "t_utc", "elev_a_deg", "elev_b_deg", "range_a_km", "range_b_km", "loss_a_db", "loss_b_db", "loss_total_db",
    ]);
    for w in &windows {
        for sample in &w.samples {
            let a = &sample.topo[0];
            let la = link_budget(a, &links[0].0, &links[0].1)?;
            let row = match sample.topo.get(1) {
                Some(b) => {
                    let lb = link_budget(b, &links[1].0, &links[1].1)?;
                    let total = la.loss_db + lb.loss_db;
                    summary.note_loss(total);
                    vec![
                        Cell::Time(sample.t),
                        a.elevation.to_degrees().into(),
                        b.elevation.to_degrees().into(),
                        (a.range_m / 1000.0).into(),
                        (b.range_m / 1000.0).into(),
                        la.loss_db.into(),
                        lb.loss_db.into(),
                        total.into(),
                    ]
                }
                None => {
                    summary.note_loss(la.loss_db);
                    vec![
                        Cell::Time(sample.t),
                        a.elevation.to_degrees().into(),
                        Cell::Empty,
                        (a.range_m / 1000.0).into(),
                        Cell::Empty,
                        la.loss_db.into(),
                        Cell::Empty,
                        la.loss_db.into(),
                    ]
                }
            };
            t.push(row);
        }
    }
    Ok((t, summary))
}

/// One optimized plan per window.
fn plans(s: &Scenario, budgets: &[Vec<LinkBudgetSample>], slot: f64) -> Result<Vec<SlotPlan>> {
    budgets.iter().map(|b| optimize_pass(b, slot, &s.protocol)).collect()
}

fn keyrate(s: &Scenario, opts: &RunOptions, log: &mut Vec<String>) -> Result<(Table, Summary)> {
    let links = links(s)?;
    let windows = scenario_windows(s, &links)?;
    let budgets: Vec<_> = windows.iter().map(|w| dual_budget(w, &links)).collect::<Result<_>>()?;
    let schedules: Vec<Vec<IntensitySetting>> = match s.intensities {
        IntensityPlan::Fixed(f) => budgets.iter().map(|b| vec![f.setting(); b.len()]).collect(),
        IntensityPlan::Optimize(_) => {
            let slot = slot_seconds(s, opts, log);
            plans(s, &budgets, slot)?.iter().map(SlotPlan::schedule).collect()
        }
    };
    let mut summary = Summary::windows(&windows);
    let mut total = 0.0;
    let mut t = Table::new(&["t_utc", "eta_a", "eta_b", "q_z", "e_z", "y_11", "e_11", "r_per_pulse", "bits_this_step"]);
    for (budget, schedule) in budgets.iter().zip(&schedules) {
        for (b, setting) in budget.iter().zip(schedule) {
            summary.note_loss(b.loss_total_db);
            let p = rate_point(b.t, setting, b.eta_a, b.eta_b, &s.protocol)?;
            let bits = p.r_per_pulse * s.protocol.pulse_rate_hz * b.dt_s * s.availability_factor;
            total += bits;
            t.push(vec![
                Cell::Time(b.t),
                b.eta_a.into(),
                b.eta_b.into(),
                p.q_z.into(),
                p.e_z.into(),
                p.y_11.into(),
                p.e_11.into(),
                p.r_per_pulse.into(),
                bits.into(),
            ]);
        }
    }
    summary.total_bits = Some(total);
    Ok((t, summary))
}

fn doppler(s: &Scenario) -> Result<(Table, Summary)> {
    let links = links(s)?;
    let windows = scenario_windows(s, &links)?;
    let mut summary = Summary::windows(&windows);
    let mut max_shift: f64 = 0.0;
    let mut t = Table::new(&["t_utc", "shift_a_hz", "shift_b_hz", "offset_hz", "delta_t_c_s"]);
    for w in &windows {
        for i in 0..w.samples.len() {
            let (a, b) = w.pair(i).ok_or_else(|| Error::Invariant("doppler needs a two-station window".into()))?;
            let fa = doppler_shift(a.range_rate_mps, links[0].0.wavelength_m)?;
            let fb = doppler_shift(b.range_rate_mps, links[1].0.wavelength_m)?;
            max_shift = max_shift.max(fa.abs()).max(fb.abs());
            t.push(vec![Cell::Time(a.t), fa.into(), fb.into(), (fa - fb).into(), sync_offset(a.range_m, b.range_m)?.into()]);
        }
    }
    summary.max_abs_shift_hz = Some(max_shift);
    Ok((t, summary))
}

fn optimize(s: &Scenario, opts: &RunOptions, log: &mut Vec<String>) -> Result<(Table, Summary)> {
    let links = links(s)?;
    let windows = scenario_windows(s, &links)?;
    let budgets: Vec<_> = windows.iter().map(|w| dual_budget(w, &links)).collect::<Result<_>>()?;
    let slot = slot_seconds(s, opts, log);
    let plans = plans(s, &budgets, slot)?;
    let mut summary = Summary::windows(&windows);
    for b in budgets.iter().flatten() {
        summary.note_loss(b.loss_total_db);
    }
    let avail = s.availability_factor;
    let mut t = Table::new(&["slot_index", "start_utc", "end_utc", "mu_a", "nu_a", "mu_b", "nu_b", "r_star", "slot_bits"]);
    let mut index = 0usize;
    for plan in &plans {
        for ((slot, set), (r, bits)) in plan.slots.iter().zip(&plan.settings).zip(plan.r_star.iter().zip(&plan.slot_bits)) {
            t.push(vec![
                index.into(),
                Cell::Time(slot.start),
                Cell::Time(slot.end),
                set.mu_a.into(),
                set.nu_a.into(),
                set.mu_b.into(),
                set.nu_b.into(),
                (*r).into(),
                (bits * avail).into(),
            ]);
            index += 1;
        }
    }
    summary.total_bits = Some(plans.iter().map(|p| p.total_bits).sum::<f64>() * avail);
    summary.baseline_bits = Some(plans.iter().map(|p| p.baseline_bits).sum::<f64>() * avail);
    summary.slot_average_bits = Some(plans.iter().map(|p| p.slot_average_bits).sum::<f64>() * avail);
    Ok((t, summary))
}

// ---------------------------------------------------------------------------
// validate

/// Reference pass values and tolerances checked by `validate`.
pub mod reference {
    /// Single uplink, Ngari: minimum loss near zenith and loss at 15° elevation (dB).
    pub const NGARI_MIN_LOSS_DB: f64 = 42.5;
    pub const NGARI_LOSS_15_DEG_DB: f64 = 52.3;
    pub const NGARI_MAX_ELEVATION_DEG: f64 = 75.9;
    pub const SINGLE_LOSS_TOLERANCE_DB: f64 = 4.0;
    /// Dual uplink, Delingha + Lijiang at 10° minimum elevation.
    pub const DUAL_WINDOW_S: f64 = 278.0;
    pub const DUAL_WINDOW_TOLERANCE_S: f64 = 90.0;
    pub const DUAL_LOSS_BAND_DB: (f64, f64) = (94.0, 100.2);
    pub const DUAL_LOSS_MARGIN_DB: f64 = 5.0;
    /// Dual uplink with 0.75 m transmitters and 1.2 m receiver.
    pub const IMPROVED_MIN_LOSS_DB: f64 = 55.0;
    pub const IMPROVED_TOLERANCE_DB: f64 = 4.0;
    /// Half-width of the pass search around the element epoch.
    pub const SEARCH_DAYS: f64 = 6.9;
}

/// Window found on a coarse grid, re-sampled at 1 s.
fn refine_window(el: &OrbitElements, stations: &[GroundStation], min_el: f64, coarse: &AccessWindow) -> Result<AccessWindow> {
    let found = find_access_windows(el, Default::default(), stations, min_el, coarse.start - 30.0, coarse.end + 30.0, 1.0)?;
    found
        .into_iter()
        .max_by(|a, b| a.duration().total_cmp(&b.duration()))
        .ok_or_else(|| Error::Domain("pass vanished when re-sampled at 1 s".into()))
}

fn validate(s: &Scenario) -> Result<(Table, Summary, Vec<Check>)> {
    use reference::*;
    let elements = match &s.satellite {
        SatelliteSource::Tle(_) => s.elements.clone(),
        SatelliteSource::Circular(_) => parse_tle(defaults::MICIUS_TLE)?,
    };
    let channel = ChannelParams { slant_mode: calibrated_slant_mode()?, ..Default::default() };
    let min_el = channel.min_elevation_rad;
    let profile = |st: &GroundStation| TurbulenceProfile { site_altitude_m: st.altitude_m, ..Default::default() };
    let t0 = elements.epoch - SEARCH_DAYS * crate::time::SECONDS_PER_DAY;
    let t1 = elements.epoch + SEARCH_DAYS * crate::time::SECONDS_PER_DAY;
    let mut checks = Vec::new();
    let mut check = |name, computed, reference, lower, upper, pass_start| {
        checks.push(Check { name, computed, reference, lower, upper, pass_start });
    };

    // single uplink: pass whose peak elevation is closest to the reference
    let ngari = [defaults::NGARI.station()];
    let peak = |w: &AccessWindow| w.samples.iter().map(|x| x.topo[0].elevation).fold(f64::NEG_INFINITY, f64::max);
    let coarse = find_access_windows(&elements, Default::default(), &ngari, min_el, t0, t1, 10.0)?;
    let best = coarse
        .iter()
        .min_by(|a, b| {
            let d = |w| (peak(w) - NGARI_MAX_ELEVATION_DEG.to_radians()).abs();
            d(a).total_cmp(&d(b))
        })
        .ok_or_else(|| Error::Domain("no Ngari pass in the search range".into()))?;
    let w = refine_window(&elements, &ngari, min_el, best)?;
    let p = profile(&ngari[0]);
    let losses: Vec<(f64, f64)> = w
        .samples
        .iter()
        .map(|x| Ok((x.topo[0].elevation, link_budget(&x.topo[0], &channel, &p)?.loss_db)))
        .collect::<Result<_>>()?;
    let min_loss = losses.iter().map(|l| l.1).fold(f64::INFINITY, f64::min);
    let at_15 = losses
        .iter()
        .min_by(|a, b| (a.0 - 15f64.to_radians()).abs().total_cmp(&(b.0 - 15f64.to_radians()).abs()))
        .map(|l| l.1)
        .expect("window has samples");
    let tol = SINGLE_LOSS_TOLERANCE_DB;
    check("ngari_min_loss_db", min_loss, NGARI_MIN_LOSS_DB, NGARI_MIN_LOSS_DB - tol, NGARI_MIN_LOSS_DB + tol, w.start);
    check("ngari_loss_at_15deg_db", at_15, NGARI_LOSS_15_DEG_DB, NGARI_LOSS_15_DEG_DB - tol, NGARI_LOSS_15_DEG_DB + tol, w.start);

    // dual uplink: longest common window
    let pair = [defaults::DELINGHA.station(), defaults::LIJIANG.station()];
    let coarse = find_access_windows(&elements, Default::default(), &pair, min_el, t0, t1, 10.0)?;
    let longest = coarse
        .iter()
        .max_by(|a, b| a.duration().total_cmp(&b.duration()))
        .ok_or_else(|| Error::Domain("no common Delingha/Lijiang window in the search range".into()))?;
    let w = refine_window(&elements, &pair, min_el, longest)?;
    let (pa, pb) = (profile(&pair[0]), profile(&pair[1]));
    let budget = dual_link_series_with(&w, (&channel, &pa), (&channel, &pb))?;
    let lo = budget.iter().map(|b| b.loss_total_db).fold(f64::INFINITY, f64::min);
    let hi = budget.iter().map(|b| b.loss_total_db).fold(f64::NEG_INFINITY, f64::max);
    let (band_lo, band_hi) = (DUAL_LOSS_BAND_DB.0 - DUAL_LOSS_MARGIN_DB, DUAL_LOSS_BAND_DB.1 + DUAL_LOSS_MARGIN_DB);
    check("dual_window_s", w.duration(), DUAL_WINDOW_S, DUAL_WINDOW_S - DUAL_WINDOW_TOLERANCE_S, DUAL_WINDOW_S + DUAL_WINDOW_TOLERANCE_S, w.start);
    check("dual_min_loss_total_db", lo, DUAL_LOSS_BAND_DB.0, band_lo, band_hi, w.start);
    check("dual_max_loss_total_db", hi, DUAL_LOSS_BAND_DB.1, band_lo, band_hi, w.start);

    let improved = ChannelParams { r_s_m: defaults::IMPROVED_R_S_M, r_r_m: defaults::IMPROVED_R_R_M, ..channel };
    let better = dual_link_series_with(&w, (&improved, &pa), (&improved, &pb))?;
    let best_loss = better.iter().map(|b| b.loss_total_db).fold(f64::INFINITY, f64::min);
    check(
        "improved_aperture_min_loss_total_db",
        best_loss,
        IMPROVED_MIN_LOSS_DB,
        IMPROVED_MIN_LOSS_DB - IMPROVED_TOLERANCE_DB,
        IMPROVED_MIN_LOSS_DB + IMPROVED_TOLERANCE_DB,
        w.start,
    );

    let mut t = Table::new(&["check", "computed", "reference", "lower", "upper", "pass", "pass_start_utc"]);
    for c in &checks {
        t.push(vec![
            c.name.into(),
            c.computed.into(),
            c.reference.into(),
            c.lower.into(),
            c.upper.into(),
            c.passed().into(),
            Cell::Time(c.pass_start),
        ]);
    }
    let mut summary = Summary::windows(std::slice::from_ref(&w));
    summary.min_loss_total_db = Some(lo);
    summary.max_loss_total_db = Some(hi);
    summary.checks_failed = Some(checks.iter().filter(|c| !c.passed()).count());
    Ok((t, summary, checks))
}

// ---------------------------------------------------------------------------
// run + metadata

#[derive(Serialize)]
struct RunMeta<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    scenario: Value,
    defaults_applied: Vec<String>,
    warnings: &'a [String],
    calibration: SlantCalibration,
    slant_mode_per_station: Vec<crate::channel::SlantMode>,
    doppler_sign_convention: &'static str,
    summary: &'a Summary,
    #[serde(skip_serializing_if = "<[Check]>::is_empty")]
    checks: &'a [Check],
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<Value>,
    outputs: Vec<String>,
    wall_clock_s: f64,
}

pub const META_FILE: &str = "run_meta.json";

/// `run_meta.json` contents for a finished report.
pub fn metadata(loaded: &Loaded, report: &Report, sweep: Option<Value>, wall_clock_s: f64) -> Result<String> {
    let s = &loaded.scenario;
    let mut defaults_applied = loaded.defaults_applied.clone();
    defaults_applied.extend(report.defaults_applied.iter().cloned());
    let meta = RunMeta {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: report.command.name(),
        scenario: s.to_json_value(),
        defaults_applied,
        warnings: &loaded.warnings,
        calibration: crate::channel::calibrate_slant_mode()?,
        slant_mode_per_station: (0..s.stations.len()).map(|i| s.channel_for(i).map(|c| c.slant_mode)).collect::<Result<_>>()?,
        doppler_sign_convention: DOPPLER_SIGN_CONVENTION,
        summary: &report.summary,
        checks: &report.checks,
        sweep,
        outputs: report.files.iter().map(|f| f.0.clone()).collect(),
        wall_clock_s,
    };
    Ok(serde_json::to_string_pretty(&meta).map_err(|e| Error::Io(e.to_string()))? + "\n")
}

/// Writes `files` into `out_dir`; on any failure the files already written are removed.
pub fn write_outputs(out_dir: &Path, files: &[(String, String)]) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let mut written: Vec<PathBuf> = Vec::new();
    for (name, contents) in files {
        let path = out_dir.join(name);
        if let Err(e) = std::fs::write(&path, contents) {
            for p in &written {
                let _ = std::fs::remove_file(p);
            }
            let _ = std::fs::remove_file(&path);
            return Err(e.into());
        }
        written.push(path);
    }
    Ok(())
}

/// Loads the scenario, runs `command` and writes its CSV plus `run_meta.json` to `out_dir`.
pub fn run(command: Command, scenario_path: &Path, out_dir: &Path, opts: &RunOptions) -> Result<Report> {
    let started = Instant::now();
    let loaded = load_scenario(scenario_path)?;
    let mut report = execute(command, &loaded, opts)?;
    let meta = metadata(&loaded, &report, None, started.elapsed().as_secs_f64())?;
    report.files.push((META_FILE.to_string(), meta));
    write_outputs(out_dir, &report.files)?;
    Ok(report)
}
