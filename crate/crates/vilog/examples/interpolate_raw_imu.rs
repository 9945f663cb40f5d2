//! Rebuild a combined IMU stream from separate gyro and accel logs.
//!
//! Some platforms deliver the gyroscope and accelerometer as independent
//! streams at different rates. Visual-inertial pipelines want one sample per
//! gyro epoch, so the accelerometer is linearly interpolated at each gyro
//! timestamp. Epochs outside the accel time span are dropped (never
//! extrapolated) and counted.
//!
//! Run with: `cargo run --example interpolate_raw_imu`

use std::error::Error;

use vilog::simulator::{emit_raw_streams, MotionProfile, SimConfig, SinusoidParams};
use vilog::sync::interpolate_accel_at_gyro;

fn main() -> Result<(), Box<dyn Error>> {
    // A gently rocking device: sinusoidal rates on top of gravity. The gyro
    // samples at 100 Hz; the accelerometer at 50 Hz, offset by half a period,
    // so gyro epochs fall exactly between accel samples (the worst case for
    // linear interpolation).
    let motion = MotionProfile::Sinusoidal {
        gyro: SinusoidParams {
            amplitude: [0.5, 0.2, 0.1],
            frequency_hz: [0.7, 1.3, 0.4],
            phase_rad: [0.0, 0.8, 1.6],
        },
        accel: SinusoidParams {
            amplitude: [1.2, 0.8, 0.5],
            frequency_hz: [0.9, 0.5, 1.1],
            phase_rad: [0.2, 1.0, 2.4],
        },
    };
    let config = SimConfig {
        duration_s: 30.0,
        imu_rate_hz: 100.0,
        timestamp_jitter_std_ns: 200_000.0,
        seed: 5,
        motion: motion.clone(),
        ..SimConfig::default()
    };
    let (gyro, accel) = emit_raw_streams(&config)?;
    println!(
        "raw streams: {} gyro samples, {} accel samples (both on `{}`)",
        gyro.samples.len(),
        accel.samples.len(),
        gyro.clock
    );

    let combined = interpolate_accel_at_gyro(&gyro, &accel)?;
    println!(
        "combined: {} samples; dropped {} gyro epochs before the first accel \
         sample and {} after the last",
        combined.samples.len(),
        combined.dropped_before,
        combined.dropped_after
    );

    println!("first three combined samples:");
    for s in combined.samples.iter().take(3) {
        println!(
            "  t={:>12} ns  gyro=[{:+.4}, {:+.4}, {:+.4}] rad/s  accel=[{:+.4}, {:+.4}, {:+.4}] m/s^2",
            s.t.ns(),
            s.gyro[0],
            s.gyro[1],
            s.gyro[2],
            s.accel[0],
            s.accel[1],
            s.accel[2]
        );
    }

    // Because the motion is analytic we can score the interpolation and
    // compare it against the classical linear-interpolation error bound
    // (h^2 / 8) * max|signal''| for knot spacing h.
    let mut max_err = 0.0f64;
    for s in &combined.samples {
        let want = motion.accel_at(s.t.ns() as f64 * 1e-9);
        for (got, want) in s.accel.iter().zip(&want) {
            max_err = max_err.max((got - want).abs());
        }
    }
    let h_max_s = accel
        .samples
        .windows(2)
        .map(|w| w[1].t_ns - w[0].t_ns)
        .max()
        .expect("two or more accel samples") as f64
        * 1e-9;
    let bound = h_max_s * h_max_s / 8.0 * motion.max_accel_second_derivative();
    println!(
        "max interpolation error {max_err:.3e} m/s^2, theoretical bound {bound:.3e} m/s^2"
    );
    Ok(())
}
