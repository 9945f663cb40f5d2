//! Generate a synthetic capture session with known ground truth.
//!
//! The simulator plays a 20-second recording on a device whose camera clock
//! runs 30 ms ahead of the IMU clock and drifts 10 ppm fast, with 0.5 ms
//! timestamp jitter and occasional dropped samples. It writes the standard
//! on-disk layout plus a `groundtruth.json` sidecar holding the parameters
//! any downstream estimate can be checked against.
//!
//! Run with: `cargo run --example simulate_session`

use std::error::Error;

use vilog::formats::write_session;
use vilog::simulator::{simulate_session, write_ground_truth_sidecar, SimConfig};

fn main() -> Result<(), Box<dyn Error>> {
    let config = SimConfig {
        duration_s: 20.0,
        frame_rate_hz: 30.0,
        imu_rate_hz: 100.0,
        camera_clock_offset_ns: 30_000_000,
        camera_clock_drift_ppm: 10.0,
        timestamp_jitter_std_ns: 500_000.0,
        dropout_prob: 0.01,
        seed: 7,
        ..SimConfig::default()
    };

    let (session, truth) = simulate_session(&config)?;

    let out = std::env::temp_dir().join("vilog-example-simulate");
    write_session(&session, &out)?;
    write_ground_truth_sidecar(&truth, &out)?;

    println!("wrote session to {}", out.display());
    println!(
        "  frames: {} ({} dropped during simulation)",
        session.frames.len(),
        truth.dropped_frames
    );
    println!(
        "  imu samples: {} ({} dropped)",
        session.imu_combined.as_ref().map_or(0, Vec::len),
        truth.dropped_imu
    );
    println!("  clock marks: {}", session.clock_marks.len());
    println!(
        "ground truth: camera clock offset {} ns, drift {} ppm, seed {}",
        truth.camera_clock_offset_ns, truth.camera_clock_drift_ppm, truth.seed
    );
    println!(
        "the inverse map (camera -> imu) is scale {}, offset {} ns",
        truth.camera_to_imu.scale(),
        truth.camera_to_imu.offset_ns()
    );
    Ok(())
}
