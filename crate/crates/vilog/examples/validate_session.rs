//! Check a session against the format's invariants before trusting it.
//!
//! `validate_session` never stops at the first problem: it returns every
//! violation it can find, so a log with a stalled frame counter *and* an
//! out-of-order IMU block reports both. This example builds a deliberately
//! broken session, prints what validation finds, then repairs it and shows
//! the clean result.
//!
//! Run with: `cargo run --example validate_session`

use std::error::Error;

use vilog::model::{
    validate_session, ClockId, DeviceManifest, FrameRecord, ImuSample, MetadataSource, OsFamily,
    Session, TimebasedInstant,
};

fn main() -> Result<(), Box<dyn Error>> {
    let camera = ClockId::new("monotonic")?;
    let imu = ClockId::new("boottime")?;

    let frame = |index: u64, t_ns: i64| FrameRecord {
        index,
        t_start: TimebasedInstant::new(t_ns, camera.clone()),
        exposure_ns: 5_000_000,
        readout_ns: 30_000_000,
        focal_px: Some((512.0, 512.0)),
        principal_px: Some((320.0, 240.0)),
        metadata_source: MetadataSource::Measured,
    };
    let sample = |t_ns: i64| {
        ImuSample::new(
            TimebasedInstant::new(t_ns, imu.clone()),
            [0.01, -0.02, 0.0],
            [0.0, 0.0, 9.81],
        )
        .expect("finite components")
    };

    let mut session = Session {
        manifest: DeviceManifest {
            device: "example-phone".to_string(),
            os_family: OsFamily::Android,
            nominal_frame_rate_hz: 30.0,
            nominal_imu_rate_hz: 100.0,
            nominal_accel_rate_hz: None,
            camera_clock: camera.clone(),
            imu_clock: imu.clone(),
            video_file: None,
        },
        // Defect 1: the second frame repeats index 0 while time moves on.
        frames: vec![frame(0, 0), frame(0, 33_000_000), frame(2, 66_000_000)],
        gyro_raw: None,
        accel_raw: None,
        // Defect 2: the IMU block jumps backwards at its third sample.
        imu_combined: Some(vec![
            sample(0),
            sample(10_000_000),
            sample(9_000_000),
            sample(20_000_000),
        ]),
        clock_marks: Vec::new(),
    };

    let violations = validate_session(&session);
    println!("broken session: {} violation(s)", violations.len());
    for v in &violations {
        println!("  - {v}");
    }

    // Repair: restore the frame counter and sort the IMU block.
    session.frames[1].index = 1;
    if let Some(samples) = session.imu_combined.as_mut() {
        samples.sort_by_key(|s| s.t.ns());
    }

    let violations = validate_session(&session);
    println!(
        "repaired session: {} violation(s)",
        violations.len()
    );
    assert!(violations.is_empty());
    Ok(())
}
