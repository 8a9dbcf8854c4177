use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use satqkd::commands::{run, Command, RunOptions};
use satqkd::sweep::run_sweep;

/// Space-based MDI-QKD feasibility simulator.
#[derive(Debug, Parser)]
#[command(name = "satqkd", version)]
struct Cli {
    /// access | linkbudget | keyrate | doppler | optimize | validate
    #[arg(value_parser = parse_command)]
    command: Command,
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Slot length in seconds for intensity optimization.
    #[arg(long)]
    slot_seconds: Option<f64>,
    /// Sweep spec JSON; runs the grid instead of a single command.
    #[arg(long)]
    sweep: Option<PathBuf>,
}

fn parse_command(s: &str) -> Result<Command, String> {
    s.parse().map_err(|_: satqkd::Error| {
        let names: Vec<_> = Command::ALL.iter().map(|c| c.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

/// 0 success, 1 usage, 2 configuration, 3 numerical failure or failed validation.
fn exit_code<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let opts = RunOptions { slot_seconds: cli.slot_seconds };
    let outcome = match &cli.sweep {
        Some(spec) => run_sweep(Some(cli.command), spec, &cli.scenario, &cli.out, &opts).map(|r| {
            println!("sweep: {} points -> {}", r.points.len(), cli.out.join("sweep.csv").display());
            true
        }),
        None => run(cli.command, &cli.scenario, &cli.out, &opts).map(|r| {
            for c in &r.checks {
                let mark = if c.passed() { "PASS" } else { "FAIL" };
                println!("{mark} {}: {} (reference {}, accepted [{}, {}])", c.name, c.computed, c.reference, c.lower, c.upper);
            }
            println!("{}: wrote {}", r.command, r.files.iter().map(|f| f.0.as_str()).collect::<Vec<_>>().join(", "));
            r.checks_passed()
        }),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 3,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                2
            } else {
                3
            }
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(exit_code(std::env::args_os()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn scenario(name: &str) -> String {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/scenarios").join(name).display().to_string()
    }

    fn code(args: &[&str]) -> u8 {
        exit_code(std::iter::once("satqkd").chain(args.iter().copied()))
    }

    #[test]
    fn usage_errors_exit_1() {
        assert_eq!(code(&[]), 1);
        assert_eq!(code(&["keyrates", "--scenario", "x.json", "--out", "o"]), 1);
        assert_eq!(code(&["access", "--scenario", "x.json"]), 1);
        assert_eq!(code(&["--help"]), 0);
    }

    #[test]
    fn configuration_errors_exit_2() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        let out = out.to_str().unwrap();
        assert_eq!(code(&["keyrate", "--scenario", &scenario("micius_ngari.json"), "--out", out]), 2);
        assert!(!Path::new(out).join("keyrate.csv").exists());
        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, r#"{"satellite":{"tle_file":"none.tle"},"stations":[{"name":"Ngari"}],"channel":{"wavelenght":780}}"#).unwrap();
        assert_eq!(code(&["access", "--scenario", bad.to_str().unwrap(), "--out", out]), 2);
        assert_eq!(code(&["access", "--scenario", "does-not-exist.json", "--out", out]), 2);
        assert_eq!(code(&["access", "--scenario", &scenario("micius_dual.json"), "--out", out, "--sweep", &scenario("sweep_slots.json")]), 2);
    }

    #[test]
    fn success_and_failed_validation() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("ok");
        assert_eq!(code(&["access", "--scenario", &scenario("micius_dual.json"), "--out", out.to_str().unwrap()]), 0);
        assert!(out.join("access.csv").exists() && out.join("run_meta.json").exists());

        // a higher orbit cannot reproduce the reference passes
        let el = satqkd::orbit::circular_orbit(1500.0, 97.4, 10.0, satqkd::time::parse_utc("2016-09-26T00:00:00Z").unwrap()).unwrap();
        let (l1, l2) = satqkd::orbit::TleRecord::format(&el);
        let s = serde_json::json!({ "satellite": { "tle": format!("{l1}\n{l2}\n") }, "stations": [ { "name": "Ngari" } ] });
        let path = dir.path().join("high.json");
        std::fs::write(&path, s.to_string()).unwrap();
        let out = dir.path().join("val");
        assert_eq!(code(&["validate", "--scenario", path.to_str().unwrap(), "--out", out.to_str().unwrap()]), 3);
        assert!(out.join("validate.csv").exists());
    }
}
