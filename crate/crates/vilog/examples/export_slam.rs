//! Convert a capture into the imu0/cam0 layout SLAM toolchains expect.
//!
//! The export consumes a *synced* session: one clock, frames centered at
//! mid-exposure. It writes `imu0/data.csv` (timestamp, gyro xyz, accel xyz),
//! `cam0/data.csv` (timestamp, frame name), and `cam0/sensor.yaml` describing
//! the camera so downstream tools know what the timestamps mean.
//!
//! Run with: `cargo run --example export_slam`

use std::error::Error;
use std::fs;

use vilog::formats::{export_slam_layout, read_synced_session, write_synced_session};
use vilog::simulator::{simulate_raw_session, SimConfig};
use vilog::sync::synchronize_session;

fn main() -> Result<(), Box<dyn Error>> {
    // Start from the raw two-stream layout to exercise the whole chain:
    // simulate -> synchronize (fit map, center frames, interpolate accel)
    // -> persist the synced session -> export.
    let (session, _) = simulate_raw_session(&SimConfig {
        duration_s: 15.0,
        camera_clock_offset_ns: 20_000_000,
        camera_clock_drift_ppm: 12.0,
        timestamp_jitter_std_ns: 300_000.0,
        seed: 42,
        ..SimConfig::default()
    })?;

    let synced = synchronize_session(&session, &session.manifest.imu_clock)?;
    println!(
        "synced: {} frames, {} IMU samples on `{}` (accel interpolated: {})",
        synced.frames.len(),
        synced.imu.len(),
        synced.target_clock,
        synced.provenance.interpolated
    );

    let base = std::env::temp_dir().join("vilog-example-export");
    let synced_dir = base.join("synced");
    let slam_dir = base.join("slam");

    // Synced sessions round-trip through disk like raw ones; the export can
    // run in a separate process from the sync.
    write_synced_session(&synced, &synced_dir)?;
    let reloaded = read_synced_session(&synced_dir)?;
    export_slam_layout(&reloaded, &slam_dir)?;

    println!("exported SLAM layout under {}", slam_dir.display());
    for rel in ["imu0/data.csv", "cam0/data.csv", "cam0/sensor.yaml"] {
        let path = slam_dir.join(rel);
        println!("  {} ({} bytes)", rel, fs::metadata(&path)?.len());
    }

    println!("--- cam0/sensor.yaml ---");
    print!("{}", fs::read_to_string(slam_dir.join("cam0/sensor.yaml"))?);
    Ok(())
}
