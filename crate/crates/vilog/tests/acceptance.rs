//! Acceptance gate: seven end-to-end criteria, one test each, every tolerance
//! pinned as a named constant. Each test prints a single PASS/FAIL line
//! (visible with `cargo test -p vilog --test acceptance -- --nocapture`).

mod common;

use std::time::{Duration, Instant};

use vilog::diagnostics::{interval_stats, session_report, SessionReport};
use vilog::formats::{read_session, write_session};
use vilog::model::{MetadataSource, Session};
use vilog::simulator::{
    emit_raw_streams, simulate_raw_session, simulate_session, MotionProfile, SimConfig,
    SinusoidParams,
};
use vilog::sync::{fit_clock_map, interpolate_accel_at_gyro, synchronize_session};

// ---- pinned tolerances -----------------------------------------------------

/// Criterion 1: recovered camera-clock offset must land within ±1 ms.
const C1_OFFSET_TOL_NS: f64 = 1_000_000.0;
/// Criterion 1: recovered drift must land within ±2 ppm.
const C1_DRIFT_TOL_PPM: f64 = 2.0;
/// Criterion 1: centered frame times vs. ground truth, RMS below 1 ms.
const C1_RMS_LIMIT_NS: f64 = 1_000_000.0;
/// Criterion 1: the whole scenario (simulate, fit, sync, compare) in < 5 s.
const C1_RUNTIME_LIMIT: Duration = Duration::from_secs(5);
/// Criterion 2: achieved rates and mean intervals within 1 % of nominal.
const C2_RELATIVE_TOL: f64 = 0.01;
/// Criterion 3: interpolator vs. brute-force oracle, at most 1 ulp apart.
const C3_MAX_ULP: u64 = 1;
/// Criterion 3: number of random stream pairs (seeds 0..C3_PAIRS).
const C3_PAIRS: u64 = 100;
/// Criterion 4: number of simulated sessions round-tripped through disk.
const C4_SESSIONS: u64 = 50;
/// Criterion 6: single-pass std vs. two-pass oracle, within 5 % relative.
const C6_STD_TOL: f64 = 0.05;
/// Criterion 7: parse + sync + report a 600 s session in < 2 s.
const C7_TIME_LIMIT: Duration = Duration::from_secs(2);

/// The shared scenario for criteria 1, 2, and 7: a 600 s capture, 30 Hz
/// frames, 100 Hz IMU, 30 ms camera-clock offset, 10 ppm drift, 0.5 ms
/// timestamp jitter.
fn scenario_config() -> SimConfig {
    SimConfig {
        duration_s: 600.0,
        frame_rate_hz: 30.0,
        imu_rate_hz: 100.0,
        camera_clock_offset_ns: 30_000_000,
        camera_clock_drift_ppm: 10.0,
        timestamp_jitter_std_ns: 500_000.0,
        dropout_prob: 0.0,
        seed: 2024,
        ..SimConfig::default()
    }
}

fn report(num: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {num} ({name}): {verdict} — {detail}");
    assert!(pass, "criterion {num} ({name}) FAILED — {detail}");
}

// ---- criterion 1 -----------------------------------------------------------

#[test]
fn criterion_1_offset_and_drift_recovery() {
    let started = Instant::now();
    let config = scenario_config();
    let (session, truth) = simulate_session(&config).expect("simulate");
    assert_eq!(session.clock_marks.len(), 2, "simulator emits two marks");

    // The fitted map sends camera time to the IMU timeline, so the camera
    // clock's additive offset reappears negated and its rate factor inverted.
    let map = fit_clock_map(&session.clock_marks).expect("fit");
    let recovered_offset_ns = -(map.offset_ns() as f64);
    let recovered_drift_ppm = (1.0 / map.scale() - 1.0) * 1e6;
    let offset_err_ns = (recovered_offset_ns - truth.camera_clock_offset_ns as f64).abs();
    let drift_err_ppm = (recovered_drift_ppm - truth.camera_clock_drift_ppm).abs();

    let synced =
        synchronize_session(&session, &session.manifest.imu_clock).expect("synchronize");
    assert_eq!(synced.frames.len(), truth.frame_epochs.len());
    // Ground truth records start-of-exposure on the true clock; centering
    // moves both sides forward by the same half-(exposure+readout).
    let half_ns = (config.exposure_ns + config.readout_ns).div_ceil(2) as i64;
    let mut sum_sq = 0.0f64;
    for (frame, epoch) in synced.frames.iter().zip(&truth.frame_epochs) {
        let err = (frame.t_centered.ns() - (epoch.actual_ns + half_ns)) as f64;
        sum_sq += err * err;
    }
    let rms_ns = (sum_sq / synced.frames.len() as f64).sqrt();
    let elapsed = started.elapsed();

    let pass = offset_err_ns <= C1_OFFSET_TOL_NS
        && drift_err_ppm <= C1_DRIFT_TOL_PPM
        && rms_ns < C1_RMS_LIMIT_NS
        && elapsed < C1_RUNTIME_LIMIT;
    report(
        1,
        "offset and drift recovery",
        pass,
        &format!(
            "offset err {offset_err_ns:.1} ns (tol {C1_OFFSET_TOL_NS:.0}), \
             drift err {drift_err_ppm:.4} ppm (tol {C1_DRIFT_TOL_PPM}), \
             centered RMS {rms_ns:.1} ns (limit {C1_RMS_LIMIT_NS:.0}), \
             runtime {elapsed:.2?} (limit {C1_RUNTIME_LIMIT:?})"
        ),
    );
}

// ---- criterion 2 -----------------------------------------------------------

fn stream_rate_and_mean(report: &SessionReport, name: &str) -> (f64, f64) {
    let stream = report
        .streams
        .iter()
        .find(|s| s.name == name)
        .unwrap_or_else(|| panic!("report lists stream {name}"));
    let stats = stream
        .stats
        .as_ref()
        .unwrap_or_else(|| panic!("stream {name} has stats"));
    (stats.achieved_rate_hz, stats.mean_ns)
}

#[test]
fn criterion_2_rate_regime() {
    let (session, _) = simulate_session(&scenario_config()).expect("simulate");
    let rep = session_report(&session);

    let (frame_rate, frame_mean) = stream_rate_and_mean(&rep, "frames");
    let (imu_rate, imu_mean) = stream_rate_and_mean(&rep, "imu");

    let rel = |got: f64, want: f64| (got - want).abs() / want;
    let frame_rate_err = rel(frame_rate, 30.0);
    let frame_mean_err = rel(frame_mean, 1e9 / 30.0);
    let imu_rate_err = rel(imu_rate, 100.0);
    let imu_mean_err = rel(imu_mean, 1e7);

    let pass = frame_rate_err <= C2_RELATIVE_TOL
        && frame_mean_err <= C2_RELATIVE_TOL
        && imu_rate_err <= C2_RELATIVE_TOL
        && imu_mean_err <= C2_RELATIVE_TOL;
    report(
        2,
        "rate regime",
        pass,
        &format!(
            "frames {frame_rate:.4} Hz / mean {:.4} ms, imu {imu_rate:.4} Hz / mean {:.4} ms, \
             worst rel err {:.5} (tol {C2_RELATIVE_TOL})",
            frame_mean / 1e6,
            imu_mean / 1e6,
            frame_rate_err
                .max(frame_mean_err)
                .max(imu_rate_err)
                .max(imu_mean_err)
        ),
    );
}

// ---- criterion 3 -----------------------------------------------------------

#[test]
fn criterion_3_interpolation_oracle() {
    // Part one: the production interpolator against a bracket-scanning oracle
    // on randomized stream pairs.
    let mut max_ulp = 0u64;
    let mut compared = 0u64;
    let mut dropped = 0u64;
    for seed in 0..C3_PAIRS {
        let config = common::varied_config(seed);
        let (gyro, accel) = emit_raw_streams(&config).expect("emit streams");
        let knots: Vec<(i64, [f64; 3])> =
            accel.samples.iter().map(|s| (s.t_ns, s.value)).collect();
        let out = interpolate_accel_at_gyro(&gyro, &accel).expect("interpolate");

        let mut produced = out.samples.iter();
        let mut pair_dropped = 0usize;
        for g in &gyro.samples {
            match common::brute_force_accel_at(&knots, g.t_ns) {
                None => pair_dropped += 1,
                Some(want) => {
                    let got = produced
                        .next()
                        .expect("interpolator must keep every in-span epoch");
                    assert_eq!(got.t.ns(), g.t_ns, "seed {seed}: epoch mismatch");
                    for ((got_g, in_g), (got_a, want_a)) in got
                        .gyro
                        .iter()
                        .zip(&g.value)
                        .zip(got.accel.iter().zip(&want))
                    {
                        assert_eq!(
                            got_g.to_bits(),
                            in_g.to_bits(),
                            "seed {seed}: gyro values must pass through untouched"
                        );
                        max_ulp = max_ulp.max(common::ulp_diff(*got_a, *want_a));
                    }
                    compared += 1;
                }
            }
        }
        assert!(
            produced.next().is_none(),
            "seed {seed}: interpolator produced an epoch the oracle dropped"
        );
        assert_eq!(pair_dropped, out.dropped(), "seed {seed}: drop count");
        dropped += pair_dropped as u64;
    }

    // Part two: against an analytic sinusoid, the interpolation error must
    // respect the classical linear-interpolation bound (h^2 / 8) * max|f''|.
    let motion = MotionProfile::Sinusoidal {
        gyro: SinusoidParams {
            amplitude: [0.8, 0.5, 0.3],
            frequency_hz: [0.6, 1.1, 0.4],
            phase_rad: [0.0, 1.0, 2.0],
        },
        accel: SinusoidParams {
            amplitude: [1.5, 1.0, 0.7],
            frequency_hz: [1.0, 0.7, 1.3],
            phase_rad: [0.3, 2.1, 4.0],
        },
    };
    let config = SimConfig {
        duration_s: 10.0,
        imu_rate_hz: 100.0,
        timestamp_jitter_std_ns: 0.0,
        dropout_prob: 0.0,
        seed: 424_242,
        motion: motion.clone(),
        ..SimConfig::default()
    };
    let (gyro, accel) = emit_raw_streams(&config).expect("emit streams");
    let out = interpolate_accel_at_gyro(&gyro, &accel).expect("interpolate");
    let h_max_s = accel
        .samples
        .windows(2)
        .map(|w| w[1].t_ns - w[0].t_ns)
        .max()
        .expect("at least two accel samples") as f64
        * 1e-9;
    let bound = h_max_s * h_max_s / 8.0 * motion.max_accel_second_derivative();
    let mut max_analytic_err = 0.0f64;
    for s in &out.samples {
        let want = motion.accel_at(s.t.ns() as f64 * 1e-9);
        for (got, want) in s.accel.iter().zip(&want) {
            max_analytic_err = max_analytic_err.max((got - want).abs());
        }
    }

    let pass = max_ulp <= C3_MAX_ULP && max_analytic_err <= bound + 1e-9;
    report(
        3,
        "interpolation oracle",
        pass,
        &format!(
            "{compared} epochs over {C3_PAIRS} pairs ({dropped} dropped out-of-span), \
             max {max_ulp} ulp vs oracle (tol {C3_MAX_ULP}); \
             analytic err {max_analytic_err:.3e} vs bound {bound:.3e}"
        ),
    );
}

// ---- criterion 4 -----------------------------------------------------------

/// Bit-level spot check on top of `PartialEq`: float payloads must survive
/// the text roundtrip with their exact bit patterns.
fn assert_float_bits_survive(original: &Session, reread: &Session) {
    if let (Some(a), Some(b)) = (&original.imu_combined, &reread.imu_combined) {
        for (x, y) in a.iter().zip(b) {
            for c in 0..3 {
                assert_eq!(x.gyro[c].to_bits(), y.gyro[c].to_bits());
                assert_eq!(x.accel[c].to_bits(), y.accel[c].to_bits());
            }
        }
    }
    for (a, b) in [
        (&original.gyro_raw, &reread.gyro_raw),
        (&original.accel_raw, &reread.accel_raw),
    ] {
        if let (Some(a), Some(b)) = (a, b) {
            for (x, y) in a.samples.iter().zip(&b.samples) {
                for c in 0..3 {
                    assert_eq!(x.value[c].to_bits(), y.value[c].to_bits());
                }
            }
        }
    }
}

#[test]
fn criterion_4_roundtrip_identity() {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut raw_layouts = 0u64;
    for seed in 0..C4_SESSIONS {
        let config = common::varied_config(seed);
        let (mut session, _) = if seed % 2 == 0 {
            simulate_session(&config).expect("simulate")
        } else {
            raw_layouts += 1;
            simulate_raw_session(&config).expect("simulate raw")
        };
        // Push the optional fields through the roundtrip too.
        if seed % 3 == 0 {
            session.manifest.video_file = Some("capture.mp4".to_string());
        }
        if seed % 5 == 0 {
            for frame in session.frames.iter_mut().skip(1).step_by(2) {
                frame.focal_px = None;
                frame.principal_px = None;
                frame.metadata_source = MetadataSource::EmpiricalDefault;
            }
        }

        let path = dir.path().join(&format!("s{seed}"));
        write_session(&session, &path).expect("write");
        let reread = read_session(&path).expect("read");
        assert_eq!(reread, session, "seed {seed}: roundtrip must be identity");
        assert_float_bits_survive(&session, &reread);
    }
    report(
        4,
        "roundtrip identity",
        true,
        &format!(
            "{C4_SESSIONS} sessions ({raw_layouts} raw layout) wrote and re-read \
             with every field identical and float bits preserved"
        ),
    );
}

// ---- criterion 5 -----------------------------------------------------------

#[test]
fn criterion_5_simulation_determinism() {
    let dir = tempfile::tempdir().expect("temp dir");
    let run_simulate = |out: &str, seed: &str| {
        let out_path = dir.path().join(out);
        let code = vilog::cli::run([
            "vilog",
            "--quiet",
            "simulate",
            "--out",
            out_path.to_str().unwrap(),
            "--seed",
            seed,
            "--duration-s",
            "5",
            "--timestamp-jitter-std-ns",
            "300000",
            "--dropout-prob",
            "0.05",
        ]);
        assert_eq!(code, vilog::cli::EXIT_OK, "simulate must succeed");
        common::read_dir_recursive(&out_path)
    };

    let first = run_simulate("a", "11");
    let second = run_simulate("b", "11");
    let control = run_simulate("c", "12");

    let same_names = first.keys().eq(second.keys());
    let byte_identical = same_names && first == second;
    let total_bytes: usize = first.values().map(Vec::len).sum();

    // Negative control: a different seed must actually change the data.
    assert_ne!(
        first.get("imu.csv"),
        control.get("imu.csv"),
        "a different seed must produce different samples"
    );

    report(
        5,
        "simulation determinism",
        byte_identical,
        &format!(
            "two runs with the same seed produced {} byte-identical files \
             ({total_bytes} bytes); a third run with another seed differed",
            first.len()
        ),
    );
}

// ---- criterion 6 -----------------------------------------------------------

#[test]
fn criterion_6_statistics_identities() {
    let combined_cfg = SimConfig {
        duration_s: 30.0,
        timestamp_jitter_std_ns: 500_000.0,
        dropout_prob: 0.02,
        seed: 61,
        ..SimConfig::default()
    };
    let raw_cfg = SimConfig { seed: 62, ..combined_cfg.clone() };

    let (combined, _) = simulate_session(&combined_cfg).expect("simulate");
    let (raw, _) = simulate_raw_session(&raw_cfg).expect("simulate raw");

    let mut streams: Vec<(String, Vec<i64>)> = vec![
        (
            "frames".into(),
            combined.frames.iter().map(|f| f.t_start.ns()).collect(),
        ),
        (
            "imu".into(),
            combined
                .imu_combined
                .as_ref()
                .expect("combined layout")
                .iter()
                .map(|s| s.t.ns())
                .collect(),
        ),
    ];
    let gyro = raw.gyro_raw.as_ref().expect("raw layout");
    let accel = raw.accel_raw.as_ref().expect("raw layout");
    streams.push(("gyro".into(), gyro.timestamps().collect()));
    streams.push(("accel".into(), accel.timestamps().collect()));

    let mut worst_std_rel = 0.0f64;
    for (name, ts) in &streams {
        assert!(ts.len() > 100, "stream {name} is non-trivial");
        let stats = interval_stats(name, ts, None).expect("stats");

        // Exact identity: the intervals must sum to the span, no rounding.
        let oracle_sum = common::exact_interval_sum(ts);
        assert_eq!(
            oracle_sum,
            i128::from(stats.span_ns),
            "stream {name}: sum of intervals must equal last - first exactly"
        );
        assert_eq!(
            stats.mean_ns.to_bits(),
            (oracle_sum as f64 / (ts.len() - 1) as f64).to_bits(),
            "stream {name}: mean must come from the exact integer sum"
        );

        let oracle_std = common::two_pass_interval_std(ts);
        let rel = (stats.std_ns - oracle_std).abs() / oracle_std;
        worst_std_rel = worst_std_rel.max(rel);
    }

    let pass = worst_std_rel <= C6_STD_TOL;
    report(
        6,
        "statistics identities",
        pass,
        &format!(
            "interval sums matched spans exactly on {} streams; \
             single-pass std vs two-pass oracle worst rel err {worst_std_rel:.2e} \
             (tol {C6_STD_TOL})",
            streams.len()
        ),
    );
}

// ---- criterion 7 -----------------------------------------------------------

#[test]
fn criterion_7_throughput() {
    let dir = tempfile::tempdir().expect("temp dir");
    let (session, _) = simulate_session(&scenario_config()).expect("simulate");
    write_session(&session, dir.path()).expect("write");

    let started = Instant::now();
    let session = read_session(dir.path()).expect("read");
    let synced =
        synchronize_session(&session, &session.manifest.imu_clock).expect("synchronize");
    let rep = session_report(&session);
    let elapsed = started.elapsed();

    assert_eq!(session.frames.len(), 18_000);
    assert_eq!(synced.imu.len(), 60_000);
    assert!(rep.streams.iter().any(|s| s.present));

    let pass = elapsed < C7_TIME_LIMIT;
    report(
        7,
        "throughput",
        pass,
        &format!(
            "parsed + synced + reported {} frames / {} IMU rows in {elapsed:.2?} \
             (limit {C7_TIME_LIMIT:?})",
            session.frames.len(),
            synced.imu.len()
        ),
    );
}
