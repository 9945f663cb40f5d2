//! Helpers shared by the integration suites: independent oracles and
//! filesystem comparison utilities. Everything here is deliberately naive —
//! oracles must be simpler than the code they check.

#![allow(dead_code)] // each test binary uses its own subset

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use vilog::simulator::{MotionProfile, SimConfig, SinusoidParams};

/// Distance between two finite floats in representable-value steps.
///
/// Bit patterns are mapped onto a single monotone integer line (negative
/// floats mirrored below zero) so that adjacent representable values differ
/// by exactly 1 even across the sign boundary.
pub fn ulp_diff(a: f64, b: f64) -> u64 {
    fn lex(x: f64) -> i64 {
        let bits = x.to_bits() as i64;
        if bits < 0 {
            i64::MIN.wrapping_sub(bits)
        } else {
            bits
        }
    }
    lex(a).wrapping_sub(lex(b)).unsigned_abs()
}

/// Brute-force linear interpolation of an accel stream at one epoch: scan
/// every adjacent knot pair for a bracket instead of keeping a cursor.
///
/// Returns `None` outside the knot span. Knot hits return the stored value;
/// interior epochs use the convex combination `a0*(1-u) + a1*u`.
pub fn brute_force_accel_at(knots: &[(i64, [f64; 3])], t_ns: i64) -> Option<[f64; 3]> {
    let first = knots.first()?.0;
    let last = knots.last()?.0;
    if t_ns < first || t_ns > last {
        return None;
    }
    if let Some(&(_, v)) = knots.iter().find(|(kt, _)| *kt == t_ns) {
        return Some(v);
    }
    for pair in knots.windows(2) {
        let (t0, a0) = pair[0];
        let (t1, a1) = pair[1];
        if t0 < t_ns && t_ns < t1 {
            let u = (t_ns - t0) as f64 / (t1 - t0) as f64;
            return Some([
                a0[0] * (1.0 - u) + a1[0] * u,
                a0[1] * (1.0 - u) + a1[1] * u,
                a0[2] * (1.0 - u) + a1[2] * u,
            ]);
        }
    }
    unreachable!("epoch inside the span must be bracketed");
}

/// Two-pass population standard deviation of the interval sequence: mean
/// first, then squared deviations. The textbook formula the single-pass
/// accumulator is checked against.
pub fn two_pass_interval_std(timestamps_ns: &[i64]) -> f64 {
    let diffs: Vec<f64> = timestamps_ns
        .windows(2)
        .map(|p| (p[1] - p[0]) as f64)
        .collect();
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / diffs.len() as f64;
    var.sqrt()
}

/// Exact sum of consecutive intervals in 128-bit arithmetic.
pub fn exact_interval_sum(timestamps_ns: &[i64]) -> i128 {
    timestamps_ns
        .windows(2)
        .map(|p| p[1] as i128 - p[0] as i128)
        .sum()
}

/// Reads every file under `dir` (recursively) into a map keyed by the path
/// relative to `dir`, for byte-level directory comparison.
pub fn read_dir_recursive(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).expect("read_dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .expect("entry under root")
                    .to_string_lossy()
                    .into_owned();
                out.insert(rel, fs::read(&path).expect("read file"));
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

/// A deterministic spread of simulator configurations: rates, jitter,
/// dropout, clock parameters, and motion all vary with the seed so a block
/// of consecutive seeds exercises interleavings, dropped samples, knot hits,
/// and both motion profiles.
pub fn varied_config(seed: u64) -> SimConfig {
    let imu_rates = [50.0, 100.0, 200.0, 400.0];
    let frame_rates = [15.0, 24.0, 30.0, 60.0];
    let jitters = [0.0, 100_000.0, 500_000.0];
    let dropouts = [0.0, 0.02, 0.10];
    let motion = if seed.is_multiple_of(2) {
        MotionProfile::StaticGravity
    } else {
        let a = 0.3 + (seed % 7) as f64 * 0.2;
        let f = 0.4 + (seed % 5) as f64 * 0.3;
        MotionProfile::Sinusoidal {
            gyro: SinusoidParams {
                amplitude: [a, a * 0.5, a * 0.25],
                frequency_hz: [f, f * 1.7, f * 0.6],
                phase_rad: [0.0, 1.1, 2.2],
            },
            accel: SinusoidParams {
                amplitude: [a * 2.0, a, a * 0.7],
                frequency_hz: [f * 0.9, f * 1.3, f],
                phase_rad: [0.5, 1.6, 2.7],
            },
        }
    };
    SimConfig {
        duration_s: 1.0 + (seed % 4) as f64 * 0.5,
        imu_rate_hz: imu_rates[(seed % 4) as usize],
        frame_rate_hz: frame_rates[((seed / 4) % 4) as usize],
        camera_clock_offset_ns: ((seed as i64 % 7) - 3) * 10_000_000,
        camera_clock_drift_ppm: ((seed as i64 % 9) - 4) as f64 * 5.0,
        timestamp_jitter_std_ns: jitters[(seed % 3) as usize],
        dropout_prob: dropouts[((seed / 3) % 3) as usize],
        seed,
        motion,
        ..SimConfig::default()
    }
}
