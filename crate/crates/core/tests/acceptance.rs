//! Acceptance criteria 1-10. Runs as a plain binary (no libtest harness) so
//! every criterion prints one PASS/FAIL line; exits non-zero if any fail.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command as Process;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use satqkd::channel::{
    calibrate_slant_mode, db_to_linear, integrate_cn2, link_budget, linear_to_db, uplink_transmittance, ChannelParams, SlantMode,
    TurbulenceProfile,
};
use satqkd::commands::{execute, Command, RunOptions};
use satqkd::mdi::{
    binary_entropy, gains_qber_x, gains_qber_z, key_rate, mc_oracle_gains, mc_oracle_single_photon, single_photon_yield_error,
    IntensitySetting, ProtocolParams,
};
use satqkd::orbit::{parse_tle, OrbitElements, PropagatorModel, TopoSample};
use satqkd::scenario::{load_scenario, scenario_from_value, Loaded};
use satqkd::sweep::set_path;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/scenarios")
}

fn load(name: &str) -> Loaded {
    load_scenario(&scenarios().join(name)).expect("shipped scenario loads")
}

fn with(base: &Loaded, edits: &[(&str, serde_json::Value)]) -> Loaded {
    let mut doc = base.scenario.to_json_value();
    for (path, v) in edits {
        set_path(&mut doc, path, v.clone()).unwrap();
    }
    scenario_from_value(doc, None).unwrap()
}

fn rows(csv_text: &str) -> Vec<HashMap<String, String>> {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    let header = r.headers().unwrap().clone();
    r.records().map(|rec| header.iter().map(String::from).zip(rec.unwrap().iter().map(String::from)).collect()).collect()
}

fn num(row: &HashMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap_or_else(|_| panic!("column {key} = {:?}", row[key]))
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

// 1. Single-uplink calibration on the Ngari pass.
fn criterion_1() -> Outcome {
    let cal = calibrate_slant_mode().unwrap();
    let l = load("micius_ngari.json");
    assert_eq!(l.scenario.global_channel().unwrap().slant_mode, cal.chosen);
    let r = execute(Command::Linkbudget, &l, &RunOptions::default()).unwrap();
    let data = rows(r.file("linkbudget.csv").unwrap());
    let nearest = |deg: f64| {
        data.iter().min_by(|a, b| (num(a, "elev_a_deg") - deg).abs().total_cmp(&(num(b, "elev_a_deg") - deg).abs())).unwrap()
    };
    let (hi, lo) = (nearest(75.9), nearest(15.0));
    let (l_hi, l_lo) = (num(hi, "loss_a_db"), num(lo, "loss_a_db"));
    let pass = within(l_hi, 42.5, 4.0) && within(l_lo, 52.3, 4.0);
    outcome(
        pass,
        format!(
            "slant mode {:?}; {:.2} deg / {:.0} km -> {:.2} dB (42.5 +/- 4); {:.2} deg / {:.0} km -> {:.2} dB (52.3 +/- 4)",
            cal.chosen,
            num(hi, "elev_a_deg"),
            num(hi, "range_a_km"),
            l_hi,
            num(lo, "elev_a_deg"),
            num(lo, "range_a_km"),
            l_lo
        ),
    )
}

// 2. Dual-station window length and loss band.
fn criterion_2() -> Outcome {
    let l = load("micius_dual.json");
    let r = execute(Command::Linkbudget, &l, &RunOptions::default()).unwrap();
    let s = r.summary;
    let (lo, hi) = (s.min_loss_total_db.unwrap(), s.max_loss_total_db.unwrap());
    let pass = s.window_count == 1 && within(s.longest_window_s, 278.0, 90.0) && lo >= 89.0 && hi <= 105.2;
    outcome(pass, format!("window {:.1} s (278 +/- 90); total loss [{lo:.2}, {hi:.2}] dB within [89, 105.2]", s.longest_window_s))
}

// 3. Improved apertures.
fn criterion_3() -> Outcome {
    let l = with(&load("micius_dual.json"), &[("channel.r_s_m", 0.75.into()), ("channel.r_r_m", 1.2.into())]);
    let r = execute(Command::Linkbudget, &l, &RunOptions::default()).unwrap();
    let lo = r.summary.min_loss_total_db.unwrap();
    outcome(within(lo, 55.0, 4.0), format!("min total loss {lo:.2} dB (55 +/- 4) with R_s = 0.75 m, R_r = 1.2 m"))
}

// 4. Zero-rate cutoff for the fixed setting on symmetric channels.
fn criterion_4() -> Outcome {
    let p = ProtocolParams::default();
    let setting = IntensitySetting::fixed_baseline();
    let rate = |total_db: f64| {
        let eta = db_to_linear(total_db / 2.0);
        key_rate(&setting, eta, eta, &p).unwrap()
    };
    let (r50, r80) = (rate(50.0), rate(80.0));
    let (mut lo, mut hi) = (50.0, 80.0);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if rate(mid) > 0.0 {
            lo = mid
        } else {
            hi = mid
        }
    }
    // the rate must stay zero past the cutoff
    let dead_after = (0..=100).all(|k| rate(hi + (80.0 - hi) * k as f64 / 100.0) == 0.0);
    let pass = r50 > 0.0 && r80 == 0.0 && (55.0..=75.0).contains(&hi) && dead_after;
    outcome(pass, format!("R(50 dB) = {r50:.3e}, R(80 dB) = {r80}, cutoff {hi:.3} dB in [55, 75]"))
}

// 5. Doppler magnitude and wavelength scaling.
fn criterion_5() -> Outcome {
    let base = load("micius_dual.json");
    let run = |nm: f64| {
        let l = with(&base, &[("channel.wavelength_nm", nm.into())]);
        execute(Command::Doppler, &l, &RunOptions::default()).unwrap()
    };
    let (a, b) = (run(780.0), run(1550.0));
    let max = a.summary.max_abs_shift_hz.unwrap();
    let (ra, rb) = (rows(a.file("doppler.csv").unwrap()), rows(b.file("doppler.csv").unwrap()));
    let mut worst: f64 = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        for col in ["shift_a_hz", "shift_b_hz"] {
            let expect = num(x, col) * 780.0 / 1550.0;
            worst = worst.max((num(y, col) - expect).abs() / expect.abs().max(1.0));
        }
    }
    let pass = (7e9..=11e9).contains(&max) && ra.len() == rb.len() && !ra.is_empty() && worst <= 1e-12;
    outcome(pass, format!("max |shift| {:.3} GHz in [7, 11]; 1550/780 scaling worst relative deviation {worst:.1e}", max / 1e9))
}

// 6. e11 minimized at the symmetric split.
fn criterion_6() -> Outcome {
    let p = ProtocolParams::default();
    let mut failures = Vec::new();
    for total in [30.0, 50.0, 70.0] {
        let e11 = |d: f64| {
            let la = total / 2.0 + d;
            single_photon_yield_error(db_to_linear(la), db_to_linear(total - la), &p).unwrap().1
        };
        let centre = e11(0.0);
        for d in (-15..=15).filter(|d| *d != 0) {
            if e11(d as f64) <= centre {
                failures.push(format!("total {total} dB, offset {d} dB"));
            }
        }
    }
    outcome(failures.is_empty(), format!("31-point 1 dB grids at 30/50/70 dB total; violations: {failures:?}"))
}

// 7. Slotted intensity optimization on the improved-aperture scenario.
fn criterion_7() -> Outcome {
    let l = load("improved_aperture.json");
    let mut totals = Vec::new();
    let mut baseline = 0.0;
    for slot in [1.0, 5.0, 10.0, 15.0, 20.0, 25.0] {
        let r = execute(Command::Optimize, &l, &RunOptions { slot_seconds: Some(slot) }).unwrap();
        totals.push((slot, r.summary.total_bits.unwrap()));
        baseline = r.summary.baseline_bits.unwrap();
    }
    let max = totals.iter().map(|t| t.1).fold(0.0, f64::max);
    let min = totals.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    let ratio = totals[0].1 / baseline;
    let factor = (totals[0].1 / 1.9508e8).max(1.9508e8 / totals[0].1);
    let ratio_ok = ratio >= 10.0;
    let slots_ok = max <= 2.0 * min;
    let total_ok = factor <= 3.0;
    outcome(
        ratio_ok && slots_ok && total_ok,
        format!(
            "optimized/fixed ratio {ratio:.2} (need >= 10: {}); slot totals {:.3e}..{:.3e} (within 2x: {}); 1 s total {:.3e} is {factor:.2}x off 1.9508e8 (need <= 3: {})",
            ok(ratio_ok),
            min,
            max,
            ok(slots_ok),
            totals[0].1,
            ok(total_ok)
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "MISSED"
    }
}

// 8. Closed forms against the seeded Monte-Carlo oracle. Any point beyond
// 3 sigma is re-run at 10x the trials with a fresh seed; the follow-up is
// reported but does not change the verdict.
fn criterion_8() -> Outcome {
    const TRIALS: u64 = 10_000_000;
    type Point = (IntensitySetting, f64, f64, ProtocolParams);
    // (name, estimate, closed form, standard error)
    fn compare(point: &Point, trials: u64, seed: u64) -> Vec<(&'static str, f64, f64, f64)> {
        let (setting, eta_a, eta_b, p) = point;
        let (q_z, e_z) = gains_qber_z(setting, *eta_a, *eta_b, p).unwrap();
        let (q_x, e_x) = gains_qber_x(setting, *eta_a, *eta_b, p).unwrap();
        let (y11, e11) = single_photon_yield_error(*eta_a, *eta_b, p).unwrap();
        let mc = mc_oracle_gains(setting, *eta_a, *eta_b, p, trials, 100 + seed).unwrap();
        let sp = mc_oracle_single_photon(*eta_a, *eta_b, p, trials, 200 + seed).unwrap();
        let n = trials as f64;
        let gain_se = |q: f64| (q * (1.0 - q) / n).sqrt();
        let qber_se = |e: f64, q: f64| (e * (1.0 - e) / (n * q)).sqrt();
        vec![
            ("Q_z", mc.z.gain, q_z, gain_se(q_z)),
            ("E_z", mc.z.qber, e_z, qber_se(e_z, q_z)),
            ("Q_x", mc.x.gain, q_x, gain_se(q_x)),
            ("E_x", mc.x.qber, e_x, qber_se(e_x, q_x)),
            ("Y11", sp.z.gain, y11, gain_se(y11)),
            ("e11", sp.x.qber, e11, qber_se(e11, y11)),
        ]
    }
    fn z_score(est: f64, cf: f64, se: f64) -> f64 {
        if se > 0.0 {
            (est - cf) / se
        } else if est == cf {
            0.0
        } else {
            f64::INFINITY
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = (0.0f64, String::new());
    let mut outliers = Vec::new();
    for point in 0..20u64 {
        let eta_a = db_to_linear(rng.gen_range(3.0..13.0));
        let eta_b = db_to_linear(rng.gen_range(3.0..13.0));
        let mu_a = rng.gen_range(0.1..1.0);
        let mu_b = rng.gen_range(0.1..1.0);
        let setting = IntensitySetting { mu_a, nu_a: mu_a / 5.0, mu_b, nu_b: mu_b / 5.0, omega: 0.0 };
        let p = ProtocolParams { e_d: rng.gen_range(0.0..0.05), y_0: 10f64.powf(rng.gen_range(-6.0..-4.0)), ..Default::default() };
        let pt = (setting, eta_a, eta_b, p);
        for (name, est, cf, se) in compare(&pt, TRIALS, point) {
            let z = z_score(est, cf, se);
            if z.abs() > 3.0 {
                outliers.push((point, name, z, pt));
            }
            if z.abs() > worst.0.abs() {
                worst = (z, format!("{name} at point {point}"));
            }
        }
    }
    let follow_up: Vec<String> = outliers
        .iter()
        .map(|(point, name, z, pt)| {
            let again = compare(pt, 10 * TRIALS, 1000 + point);
            let (_, est, cf, se) = again.iter().find(|c| c.0 == *name).unwrap();
            format!("{name}@{point}: z {z:.2} at 1e7, {:.2} at 1e8 with a fresh seed", z_score(*est, *cf, *se))
        })
        .collect();
    outcome(
        outliers.is_empty(),
        format!(
            "20 points x 6 quantities at 1e7 trials; {} beyond 3 sigma; largest |z| = {:.2} ({}); follow-up: {follow_up:?}",
            outliers.len(),
            worst.0.abs(),
            worst.1
        ),
    )
}

fn hv_column(p: &TurbulenceProfile, hi: f64) -> f64 {
    // ∫₀^hi h^10 e^{-h/s} dh = 10! s^11 (1 - e^{-x} Σ_{k≤10} x^k/k!), x = hi/s
    let s: f64 = 1000.0;
    let x = hi / s;
    let (mut term, mut partial) = (1.0, 1.0);
    for k in 1..=10 {
        term *= x / k as f64;
        partial += term;
    }
    let fact10 = 3_628_800.0;
    let w = p.wind_rms_mps / 27.0;
    let wind = 0.005_94 * w * w * 1e-50 * fact10 * s.powi(11) * (1.0 - (-x).exp() * partial);
    wind + 2.7e-16 * 1500.0 * (1.0 - (-hi / 1500.0).exp()) + p.c0 * 100.0 * (1.0 - (-hi / 100.0).exp())
}

// 9. Numerical hygiene.
fn criterion_9() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    // energy over ten orbits
    let micius = parse_tle(satqkd::defaults::MICIUS_TLE).unwrap();
    let eccentric = OrbitElements { eccentricity: 0.05, arg_perigee: 1.0, ..micius };
    let mut worst_energy: f64 = 0.0;
    for el in [micius, eccentric] {
        let e0 = el.propagate(el.epoch, PropagatorModel::TwoBody).unwrap().specific_energy();
        for k in 0..=5000 {
            let t = el.epoch + 10.0 * el.period_s() * k as f64 / 5000.0;
            let e = el.propagate(t, PropagatorModel::TwoBody).unwrap().specific_energy();
            worst_energy = worst_energy.max(((e - e0) / e0).abs());
        }
    }
    pass &= worst_energy <= 1e-6;
    notes.push(format!("energy drift {worst_energy:.1e}"));

    // quadrature against the closed-form column
    let mut worst_quad: f64 = 0.0;
    for (c0, w, z) in [(1.7e-14, 21.0, 20_000.0), (3e-13, 30.0, 20_000.0), (1e-15, 10.0, 8_000.0)] {
        let p = TurbulenceProfile { c0, wind_rms_mps: w, z_max_m: z, ..Default::default() };
        let q = integrate_cn2(&p, 0.0, z).unwrap();
        worst_quad = worst_quad.max(q.relative_change()).max(((q.value - hv_column(&p, z)) / hv_column(&p, z)).abs());
    }
    pass &= worst_quad <= 1e-4;
    notes.push(format!("quadrature {worst_quad:.1e}"));

    // randomized invariants, 10^4 cases each
    const CASES: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut bad = [0usize; 4];
    for _ in 0..CASES {
        let omega = 10f64.powf(rng.gen_range(-3.0..3.0));
        let rr = rng.gen_range(0.0..5.0);
        let eta0: f64 = rng.gen_range(1e-6..1.0);
        let eta = uplink_transmittance(omega, rr, eta0).unwrap();
        if !(0.0..=eta0).contains(&eta) {
            bad[0] += 1;
        }
    }
    for _ in 0..CASES {
        let x = rng.gen_range(0.0..=1.0);
        let h = binary_entropy(x).unwrap();
        if !((0.0..=1.0).contains(&h) && (h - binary_entropy(1.0 - x).unwrap()).abs() <= 1e-12) {
            bad[1] += 1;
        }
    }
    for _ in 0..CASES {
        let mu_a = rng.gen_range(0.01..1.0);
        let mu_b = rng.gen_range(0.01..1.0);
        let s = IntensitySetting { mu_a, nu_a: mu_a * rng.gen_range(0.01..0.5), mu_b, nu_b: mu_b * rng.gen_range(0.01..0.5), omega: 0.0 };
        let p = ProtocolParams { e_d: rng.gen_range(0.0..0.5), y_0: 10f64.powf(rng.gen_range(-9.0..-2.0)), ..Default::default() };
        let ea = db_to_linear(rng.gen_range(0.0..60.0));
        let eb = db_to_linear(rng.gen_range(0.0..60.0));
        let (qz, ez) = gains_qber_z(&s, ea, eb, &p).unwrap();
        let (qx, ex) = gains_qber_x(&s, ea, eb, &p).unwrap();
        let (y, e) = single_photon_yield_error(ea, eb, &p).unwrap();
        let r = key_rate(&s, ea, eb, &p).unwrap();
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if ![qz, ez, qx, ex, y, e].into_iter().all(unit) || !(r >= 0.0 && r <= qz) {
            bad[2] += 1;
        }
    }
    let profile = TurbulenceProfile::default();
    for k in 0..CASES {
        let loss = rng.gen_range(0.0..200.0);
        let round = linear_to_db(db_to_linear(loss));
        let params = ChannelParams {
            slant_mode: if k % 2 == 0 { SlantMode::ZenithR0 } else { SlantMode::Literal },
            min_elevation_rad: 5f64.to_radians(),
            ..Default::default()
        };
        let topo = TopoSample {
            t: 0.0,
            elevation: rng.gen_range(5f64..90.0).to_radians(),
            azimuth: 0.0,
            range_m: rng.gen_range(4e5..2.5e6),
            range_rate_mps: 0.0,
        };
        let b = link_budget(&topo, &params, &profile).unwrap();
        let consistent = (round - loss).abs() <= 1e-9
            && (b.loss_db - linear_to_db(b.eta)).abs() <= 1e-12
            && b.eta <= params.fixed_losses.eta0()
            && b.loss_db >= params.fixed_losses.total_db() - 1e-9;
        if !consistent {
            bad[3] += 1;
        }
    }
    pass &= bad.iter().all(|b| *b == 0);
    notes.push(format!("fuzz violations (transmittance, entropy, probabilities, dB) = {bad:?} over {CASES} cases each"));
    outcome(pass, notes.join("; "))
}

// 10. Byte-identical outputs across repeated CLI runs.
fn criterion_10() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_satqkd");
    let dir = tempfile::tempdir().unwrap();
    let jobs: Vec<(&str, &str, Option<&str>)> = vec![
        ("access", "micius_dual.json", None),
        ("linkbudget", "micius_ngari.json", None),
        ("keyrate", "micius_dual.json", None),
        ("doppler", "micius_dual.json", None),
        ("optimize", "improved_aperture.json", None),
        ("validate", "micius_ngari.json", None),
        ("linkbudget", "micius_dual.json", Some("sweep_aperture.json")),
    ];
    let strip = |text: String| text.lines().filter(|l| !l.contains("\"wall_clock_s\"")).collect::<Vec<_>>().join("\n");
    let mut mismatches = Vec::new();
    let mut files_compared = 0;
    for (i, (cmd, scenario, sweep)) in jobs.iter().enumerate() {
        let mut outs = Vec::new();
        for rep in 0..2 {
            let out = dir.path().join(format!("{i}-{rep}"));
            let mut p = Process::new(exe);
            p.arg(cmd).arg("--scenario").arg(scenarios().join(scenario)).arg("--out").arg(&out);
            if let Some(s) = sweep {
                p.arg("--sweep").arg(scenarios().join(s));
            }
            let status = p.output().unwrap().status;
            assert!(status.success(), "{cmd} on {scenario} exited with {status}");
            outs.push(out);
        }
        let mut names: Vec<_> = std::fs::read_dir(&outs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        for name in names {
            let a = std::fs::read_to_string(outs[0].join(&name)).unwrap();
            let b = std::fs::read_to_string(outs[1].join(&name)).unwrap();
            let same = if name == "run_meta.json" { strip(a) == strip(b) } else { a == b };
            files_compared += 1;
            if !same {
                mismatches.push(format!("{cmd}/{}", name.to_string_lossy()));
            }
        }
    }
    outcome(mismatches.is_empty(), format!("{files_compared} files from {} command runs compared; mismatches: {mismatches:?}", jobs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("single-uplink calibration", criterion_1),
        ("dual-station window", criterion_2),
        ("improved apertures", criterion_3),
        ("zero-rate cutoff", criterion_4),
        ("Doppler shift", criterion_5),
        ("symmetric split minimizes e11", criterion_6),
        ("slotted intensity optimization", criterion_7),
        ("Monte-Carlo oracle agreement", criterion_8),
        ("numerical hygiene", criterion_9),
        ("determinism", criterion_10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = format!("criterion_{}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| id.contains(f.as_str())) {
            continue;
        }
        let started = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} ({name}): {} [{:.1} s]",
            if result.pass { "PASS" } else { "FAIL" },
            i + 1,
            result.detail,
            started.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("acceptance: {failed} criterion(s) failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
