//! Bring camera frames onto the IMU timeline.
//!
//! Cameras and IMUs usually stamp from different clocks; on many devices the
//! pair disagrees by tens of milliseconds plus a slow drift. The capture
//! format records correspondence marks (the same physical instant read on
//! both clocks at session start and end); fitting an affine map through them
//! recovers the offset and drift, and `synchronize_session` applies the map
//! and re-centers frame timestamps to mid-exposure.
//!
//! Run with: `cargo run --example synchronize_clocks`

use std::error::Error;

use vilog::simulator::{simulate_session, SimConfig};
use vilog::sync::{fit_clock_map, synchronize_session};

fn main() -> Result<(), Box<dyn Error>> {
    // Ground truth: the camera clock runs 45 ms ahead and 25 ppm fast.
    let config = SimConfig {
        duration_s: 120.0,
        camera_clock_offset_ns: 45_000_000,
        camera_clock_drift_ppm: 25.0,
        timestamp_jitter_std_ns: 500_000.0,
        seed: 31,
        ..SimConfig::default()
    };
    let (session, truth) = simulate_session(&config)?;

    // Fit the map camera -> imu from the session's marks alone.
    let map = fit_clock_map(&session.clock_marks)?;
    println!(
        "fitted map {} -> {}: scale {:.12}, offset {} ns",
        map.from_clock(),
        map.to_clock(),
        map.scale(),
        map.offset_ns()
    );
    // The camera's additive offset reappears negated (the map removes it),
    // and its rate factor inverted.
    println!(
        "  recovered camera offset: {:.3} ms (truth {:.3} ms)",
        -map.offset_ns() as f64 / 1e6,
        truth.camera_clock_offset_ns as f64 / 1e6
    );
    println!(
        "  recovered camera drift:  {:.3} ppm (truth {:.3} ppm)",
        (1.0 / map.scale() - 1.0) * 1e6,
        truth.camera_clock_drift_ppm
    );

    // Apply it: every frame lands on the IMU clock, centered mid-exposure.
    let synced = synchronize_session(&session, &session.manifest.imu_clock)?;
    println!(
        "synced {} frames and {} IMU samples onto `{}`",
        synced.frames.len(),
        synced.imu.len(),
        synced.target_clock
    );

    // With ground truth in hand we can score the alignment: compare each
    // centered frame time against the true mid-exposure instant.
    let half_ns = (config.exposure_ns + config.readout_ns).div_ceil(2) as i64;
    let sum_sq: f64 = synced
        .frames
        .iter()
        .zip(&truth.frame_epochs)
        .map(|(frame, epoch)| {
            let err = (frame.t_centered.ns() - (epoch.actual_ns + half_ns)) as f64;
            err * err
        })
        .sum();
    let rms_ns = (sum_sq / synced.frames.len() as f64).sqrt();
    println!("centered-frame-time RMS error vs truth: {rms_ns:.1} ns");

    // The map composes and inverts like any affine transform.
    let back = synced.provenance.applied_map.invert();
    println!(
        "inverse map {} -> {}: scale {:.12}, offset {} ns",
        back.from_clock(),
        back.to_clock(),
        back.scale(),
        back.offset_ns()
    );
    Ok(())
}
