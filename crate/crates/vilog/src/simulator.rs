//! Deterministic session simulator with exact ground truth.
//!
//! The simulator generates a session the same way a logging app would record
//! one, but against a known "true" timeline (which doubles as the IMU clock):
//!
//! 1. nominal sample epochs are laid out at the configured rates;
//! 2. each epoch gets Gaussian timing jitter (clamped to four standard
//!    deviations), is re-sorted, and collisions are bumped apart by 1 ns so
//!    streams stay strictly increasing;
//! 3. samples drop out independently with the configured probability;
//! 4. camera timestamps are pushed through the configured offset and drift,
//!    so the session needs real synchronization to line back up.
//!
//! Everything is driven by one seeded ChaCha8 generator, so a config maps to
//! exactly one session: the draw order is frames first (jitter, then
//! dropout), then each inertial stream in turn (jitter, then dropout; the
//! raw layout draws gyro before accel).

use std::io;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use thiserror::Error;

use crate::model::{
    ClockCorrespondence, ClockId, DeviceManifest, FrameRecord, ImuSample, MarkLabel,
    MetadataSource, OsFamily, RawSample, RawSampleStream, SampleKind, Session, TimebasedInstant,
};
use crate::sync::{round_half_up_ns, ClockMap};

/// Clock name used for simulated camera timestamps.
pub const SIM_CAMERA_CLOCK: &str = "monotonic";
/// Clock name used for simulated IMU timestamps; also the true timeline.
pub const SIM_IMU_CLOCK: &str = "boottime";
/// Device name written into simulated manifests.
pub const SIM_DEVICE_NAME: &str = "vilog-sim";
/// Focal length `(fx, fy)` stamped on every simulated frame.
pub const SIM_FOCAL_PX: (f64, f64) = (500.0, 500.0);
/// Principal point `(cx, cy)` stamped on every simulated frame.
pub const SIM_PRINCIPAL_PX: (f64, f64) = (640.0, 360.0);
/// Ground-truth sidecar written next to simulated sessions.
pub const GROUND_TRUTH_FILE: &str = "groundtruth.json";

const GRAVITY_MPS2: f64 = 9.81;
/// Jitter draws are clamped to this many standard deviations.
const JITTER_CLAMP_SIGMA: f64 = 4.0;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("invalid simulation config: {reason}")]
    InvalidConfig { reason: String },
}

/// Per-axis sinusoid parameters: `amplitude * sin(2*pi*frequency*t + phase)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SinusoidParams {
    pub amplitude: [f64; 3],
    pub frequency_hz: [f64; 3],
    pub phase_rad: [f64; 3],
}

impl SinusoidParams {
    pub fn zero() -> Self {
        SinusoidParams {
            amplitude: [0.0; 3],
            frequency_hz: [0.0; 3],
            phase_rad: [0.0; 3],
        }
    }

    fn at(&self, t_s: f64) -> [f64; 3] {
        std::array::from_fn(|axis| {
            self.amplitude[axis]
                * (2.0 * std::f64::consts::PI * self.frequency_hz[axis] * t_s
                    + self.phase_rad[axis])
                    .sin()
        })
    }

    fn is_finite(&self) -> bool {
        self.amplitude
            .iter()
            .chain(self.frequency_hz.iter())
            .chain(self.phase_rad.iter())
            .all(|v| v.is_finite())
    }
}

/// The analytic motion a simulated device undergoes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum MotionProfile {
    /// Device at rest: zero angular rate, gravity on the accelerometer z axis.
    StaticGravity,
    /// Independent per-axis sinusoids on top of static gravity.
    Sinusoidal {
        gyro: SinusoidParams,
        accel: SinusoidParams,
    },
}

impl MotionProfile {
    /// Angular rate at `t_s` seconds on the true timeline, rad/s.
    pub fn gyro_at(&self, t_s: f64) -> [f64; 3] {
        match self {
            MotionProfile::StaticGravity => [0.0; 3],
            MotionProfile::Sinusoidal { gyro, .. } => gyro.at(t_s),
        }
    }

    /// Specific force at `t_s` seconds, m/s^2, gravity included.
    pub fn accel_at(&self, t_s: f64) -> [f64; 3] {
        let base = [0.0, 0.0, GRAVITY_MPS2];
        match self {
            MotionProfile::StaticGravity => base,
            MotionProfile::Sinusoidal { accel, .. } => {
                let s = accel.at(t_s);
                [base[0] + s[0], base[1] + s[1], base[2] + s[2]]
            }
        }
    }

    /// Largest `|d^2 a / dt^2|` over all axes, for linear-interpolation error
    /// bounds: a sinusoid's second derivative peaks at `A * (2*pi*f)^2`.
    pub fn max_accel_second_derivative(&self) -> f64 {
        match self {
            MotionProfile::StaticGravity => 0.0,
            MotionProfile::Sinusoidal { accel, .. } => (0..3)
                .map(|axis| {
                    let w = 2.0 * std::f64::consts::PI * accel.frequency_hz[axis];
                    (accel.amplitude[axis] * w * w).abs()
                })
                .fold(0.0, f64::max),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            MotionProfile::StaticGravity => true,
            MotionProfile::Sinusoidal { gyro, accel } => gyro.is_finite() && accel.is_finite(),
        }
    }
}

/// Full description of a simulated recording.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub duration_s: f64,
    pub imu_rate_hz: f64,
    pub frame_rate_hz: f64,
    pub exposure_ns: u64,
    pub readout_ns: u64,
    /// Camera clock reads this much later than the true clock at t = 0.
    pub camera_clock_offset_ns: i64,
    /// Camera clock rate error in parts per million; the camera clock runs at
    /// `1 + drift_ppm * 1e-6` times the true rate.
    pub camera_clock_drift_ppm: f64,
    /// Standard deviation of per-sample timing jitter, nanoseconds.
    pub timestamp_jitter_std_ns: f64,
    /// Probability that any individual sample is lost.
    pub dropout_prob: f64,
    pub seed: u64,
    pub motion: MotionProfile,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            duration_s: 600.0,
            imu_rate_hz: 100.0,
            frame_rate_hz: 30.0,
            exposure_ns: 5_000_000,
            readout_ns: 30_000_000,
            camera_clock_offset_ns: 30_000_000,
            camera_clock_drift_ppm: 10.0,
            timestamp_jitter_std_ns: 500_000.0,
            dropout_prob: 0.0,
            seed: 0,
            motion: MotionProfile::StaticGravity,
        }
    }
}

impl SimConfig {
    /// Checks every field for physical plausibility; rates are capped at
    /// 1 GHz so epoch generation always terminates.
    pub fn validate(&self) -> Result<(), SimError> {
        let reject = |reason: String| Err(SimError::InvalidConfig { reason });
        if !self.duration_s.is_finite() || self.duration_s < 0.0 {
            return reject(format!("duration_s must be finite and >= 0, got {}", self.duration_s));
        }
        if self.duration_s > 1e6 {
            return reject(format!("duration_s must be at most 1e6 s, got {}", self.duration_s));
        }
        for (name, rate) in [("imu_rate_hz", self.imu_rate_hz), ("frame_rate_hz", self.frame_rate_hz)] {
            if !rate.is_finite() || rate <= 0.0 || rate > 1e9 {
                return reject(format!("{name} must be in (0, 1e9], got {rate}"));
            }
        }
        if !self.camera_clock_drift_ppm.is_finite() {
            return reject("camera_clock_drift_ppm must be finite".to_string());
        }
        if 1.0 + self.camera_clock_drift_ppm * 1e-6 <= 0.0 {
            return reject(format!(
                "camera_clock_drift_ppm {} makes the camera clock run backwards",
                self.camera_clock_drift_ppm
            ));
        }
        if !self.timestamp_jitter_std_ns.is_finite() || self.timestamp_jitter_std_ns < 0.0 {
            return reject(format!(
                "timestamp_jitter_std_ns must be finite and >= 0, got {}",
                self.timestamp_jitter_std_ns
            ));
        }
        if !self.dropout_prob.is_finite() || !(0.0..=1.0).contains(&self.dropout_prob) {
            return reject(format!("dropout_prob must be in [0, 1], got {}", self.dropout_prob));
        }
        if !self.motion.is_finite() {
            return reject("motion profile parameters must be finite".to_string());
        }
        Ok(())
    }

    fn duration_ns(&self) -> i64 {
        round_half_up_ns(self.duration_s * 1e9)
    }

    fn camera_factor(&self) -> f64 {
        1.0 + self.camera_clock_drift_ppm * 1e-6
    }

    /// Maps a true-timeline instant onto the simulated camera clock.
    fn camera_ns(&self, true_ns: i64) -> i64 {
        round_half_up_ns((true_ns + self.camera_clock_offset_ns) as f64 * self.camera_factor())
    }
}

/// One sample's nominal epoch and where jitter actually put it, both on the
/// true timeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EpochRecord {
    pub nominal_ns: i64,
    pub actual_ns: i64,
}

/// Everything a test needs to verify a simulated session, aligned with the
/// session's surviving samples.
#[derive(Clone, Debug, PartialEq)]
pub struct SimGroundTruth {
    /// The exact map that undoes the simulated camera clock: scale
    /// `1 / (1 + drift_ppm * 1e-6)`, offset `-camera_clock_offset_ns`.
    pub camera_to_imu: ClockMap,
    pub camera_clock_offset_ns: i64,
    pub camera_clock_drift_ppm: f64,
    pub seed: u64,
    /// Per surviving frame, in session order; `actual_ns` is the true-clock
    /// epoch before the camera transform.
    pub frame_epochs: Vec<EpochRecord>,
    /// Per surviving inertial sample. For the raw layout this describes the
    /// gyro stream, whose epochs the combined stream would be built on.
    pub imu_epochs: Vec<EpochRecord>,
    /// Timestamp collisions resolved by bumping 1 ns, summed over streams.
    pub collision_bumps: u64,
    pub dropped_frames: u64,
    pub dropped_imu: u64,
    pub motion: MotionProfile,
}

struct PlannedStream {
    records: Vec<EpochRecord>,
    bumps: u64,
    dropped: u64,
}

/// Lays out one stream's epochs: nominal grid, jitter, sort, collision bumps,
/// dropout. `phase_periods` shifts the grid by that fraction of a period.
fn plan_stream(
    rng: &mut ChaCha8Rng,
    duration_ns: i64,
    rate_hz: f64,
    phase_periods: f64,
    jitter_std_ns: f64,
    dropout_prob: f64,
) -> PlannedStream {
    let mut records = Vec::new();
    let mut k = 0u64;
    loop {
        let nominal = round_half_up_ns((k as f64 + phase_periods) * 1e9 / rate_hz);
        if nominal >= duration_ns {
            break;
        }
        records.push(EpochRecord {
            nominal_ns: nominal,
            actual_ns: nominal,
        });
        k += 1;
    }

    if jitter_std_ns > 0.0 {
        let normal = Normal::new(0.0, jitter_std_ns).expect("validated jitter std");
        let clamp = JITTER_CLAMP_SIGMA * jitter_std_ns;
        for r in &mut records {
            let j = normal.sample(rng).clamp(-clamp, clamp);
            r.actual_ns = r.nominal_ns + round_half_up_ns(j);
        }
        records.sort_by_key(|r| (r.actual_ns, r.nominal_ns));
    }

    let mut bumps = 0u64;
    for i in 1..records.len() {
        if records[i].actual_ns <= records[i - 1].actual_ns {
            records[i].actual_ns = records[i - 1].actual_ns + 1;
            bumps += 1;
        }
    }

    let mut dropped = 0u64;
    if dropout_prob > 0.0 {
        records.retain(|_| {
            let keep = rng.random::<f64>() >= dropout_prob;
            if !keep {
                dropped += 1;
            }
            keep
        });
    }

    PlannedStream {
        records,
        bumps,
        dropped,
    }
}

/// Builds the frame half of a session: records on the camera clock, marks at
/// the session boundaries, and the epoch ground truth.
struct PlannedFrames {
    frames: Vec<FrameRecord>,
    records: Vec<EpochRecord>,
    bumps: u64,
    dropped: u64,
}

fn plan_frames(rng: &mut ChaCha8Rng, config: &SimConfig, camera_clock: &ClockId) -> PlannedFrames {
    let planned = plan_stream(
        rng,
        config.duration_ns(),
        config.frame_rate_hz,
        0.0,
        config.timestamp_jitter_std_ns,
        config.dropout_prob,
    );
    let mut bumps = planned.bumps;

    let mut camera_ts: Vec<i64> = planned
        .records
        .iter()
        .map(|r| config.camera_ns(r.actual_ns))
        .collect();
    // Rounding through the camera transform can merge 1 ns-apart epochs;
    // restore strictness the same way jitter collisions are handled.
    for i in 1..camera_ts.len() {
        if camera_ts[i] <= camera_ts[i - 1] {
            camera_ts[i] = camera_ts[i - 1] + 1;
            bumps += 1;
        }
    }

    let frames = camera_ts
        .iter()
        .enumerate()
        .map(|(i, &t_cam)| FrameRecord {
            index: i as u64,
            t_start: TimebasedInstant::new(t_cam, camera_clock.clone()),
            exposure_ns: config.exposure_ns,
            readout_ns: config.readout_ns,
            focal_px: Some(SIM_FOCAL_PX),
            principal_px: Some(SIM_PRINCIPAL_PX),
            metadata_source: MetadataSource::Measured,
        })
        .collect();

    PlannedFrames {
        frames,
        records: planned.records,
        bumps,
        dropped: planned.dropped,
    }
}

fn sim_manifest(config: &SimConfig, raw_layout: bool) -> DeviceManifest {
    DeviceManifest {
        device: SIM_DEVICE_NAME.to_string(),
        os_family: OsFamily::Simulated,
        nominal_frame_rate_hz: config.frame_rate_hz,
        nominal_imu_rate_hz: config.imu_rate_hz,
        nominal_accel_rate_hz: raw_layout.then(|| config.imu_rate_hz / 2.0),
        camera_clock: ClockId::new(SIM_CAMERA_CLOCK).expect("static name"),
        imu_clock: ClockId::new(SIM_IMU_CLOCK).expect("static name"),
        video_file: None,
    }
}

fn sim_marks(config: &SimConfig, camera: &ClockId, imu: &ClockId) -> Vec<ClockCorrespondence> {
    let mark = |label, true_ns: i64| {
        ClockCorrespondence::new(
            label,
            TimebasedInstant::new(config.camera_ns(true_ns), camera.clone()),
            TimebasedInstant::new(true_ns, imu.clone()),
        )
        .expect("camera and imu clocks are distinct")
    };
    vec![
        mark(MarkLabel::SessionStart, 0),
        mark(MarkLabel::SessionEnd, config.duration_ns()),
    ]
}

fn ground_truth_map(config: &SimConfig, camera: &ClockId, imu: &ClockId) -> ClockMap {
    ClockMap::new(
        camera.clone(),
        imu.clone(),
        1.0 / config.camera_factor(),
        -config.camera_clock_offset_ns,
    )
    .expect("validated drift keeps the scale positive")
}

/// Simulates a session in the combined-IMU layout, with ground truth.
pub fn simulate_session(config: &SimConfig) -> Result<(Session, SimGroundTruth), SimError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let manifest = sim_manifest(config, false);
    let camera = manifest.camera_clock.clone();
    let imu_clock = manifest.imu_clock.clone();

    let frames = plan_frames(&mut rng, config, &camera);
    let imu_plan = plan_stream(
        &mut rng,
        config.duration_ns(),
        config.imu_rate_hz,
        0.0,
        config.timestamp_jitter_std_ns,
        config.dropout_prob,
    );

    let imu_samples: Vec<ImuSample> = imu_plan
        .records
        .iter()
        .map(|r| {
            let t_s = r.actual_ns as f64 * 1e-9;
            ImuSample {
                t: TimebasedInstant::new(r.actual_ns, imu_clock.clone()),
                gyro: config.motion.gyro_at(t_s),
                accel: config.motion.accel_at(t_s),
            }
        })
        .collect();

    let session = Session {
        clock_marks: sim_marks(config, &camera, &imu_clock),
        manifest,
        frames: frames.frames,
        gyro_raw: None,
        accel_raw: None,
        imu_combined: Some(imu_samples),
    };
    let truth = SimGroundTruth {
        camera_to_imu: ground_truth_map(config, &camera, &imu_clock),
        camera_clock_offset_ns: config.camera_clock_offset_ns,
        camera_clock_drift_ppm: config.camera_clock_drift_ppm,
        seed: config.seed,
        frame_epochs: frames.records,
        imu_epochs: imu_plan.records,
        collision_bumps: frames.bumps + imu_plan.bumps,
        dropped_frames: frames.dropped,
        dropped_imu: imu_plan.dropped,
        motion: config.motion.clone(),
    };
    Ok((session, truth))
}

/// Simulates a session in the raw two-stream layout: gyro at the IMU rate,
/// accelerometer at half that rate and phase-shifted by half its period, so
/// accel epochs interleave the gyro grid instead of landing on it.
pub fn simulate_raw_session(config: &SimConfig) -> Result<(Session, SimGroundTruth), SimError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let manifest = sim_manifest(config, true);
    let camera = manifest.camera_clock.clone();
    let imu_clock = manifest.imu_clock.clone();

    let frames = plan_frames(&mut rng, config, &camera);
    let (gyro, gyro_plan) = plan_raw_stream(&mut rng, config, &imu_clock, SampleKind::Gyro);
    let (accel, accel_plan) = plan_raw_stream(&mut rng, config, &imu_clock, SampleKind::Accel);

    let session = Session {
        clock_marks: sim_marks(config, &camera, &imu_clock),
        manifest,
        frames: frames.frames,
        gyro_raw: Some(gyro),
        accel_raw: Some(accel),
        imu_combined: None,
    };
    let truth = SimGroundTruth {
        camera_to_imu: ground_truth_map(config, &camera, &imu_clock),
        camera_clock_offset_ns: config.camera_clock_offset_ns,
        camera_clock_drift_ppm: config.camera_clock_drift_ppm,
        seed: config.seed,
        frame_epochs: frames.records,
        imu_epochs: gyro_plan.records,
        collision_bumps: frames.bumps + gyro_plan.bumps + accel_plan.bumps,
        dropped_frames: frames.dropped,
        dropped_imu: gyro_plan.dropped + accel_plan.dropped,
        motion: config.motion.clone(),
    };
    Ok((session, truth))
}

fn plan_raw_stream(
    rng: &mut ChaCha8Rng,
    config: &SimConfig,
    clock: &ClockId,
    kind: SampleKind,
) -> (RawSampleStream, PlannedStream) {
    let (rate, phase) = match kind {
        SampleKind::Gyro => (config.imu_rate_hz, 0.0),
        SampleKind::Accel => (config.imu_rate_hz / 2.0, 0.5),
    };
    let plan = plan_stream(
        rng,
        config.duration_ns(),
        rate,
        phase,
        config.timestamp_jitter_std_ns,
        config.dropout_prob,
    );
    let samples = plan
        .records
        .iter()
        .map(|r| {
            let t_s = r.actual_ns as f64 * 1e-9;
            RawSample {
                t_ns: r.actual_ns,
                value: match kind {
                    SampleKind::Gyro => config.motion.gyro_at(t_s),
                    SampleKind::Accel => config.motion.accel_at(t_s),
                },
            }
        })
        .collect();
    (
        RawSampleStream::new(kind, clock.clone(), samples),
        plan,
    )
}

/// Generates just the raw gyro/accel pair (no frames, no session wrapper),
/// with a fresh generator seeded from the config: gyro draws first, accel
/// second.
pub fn emit_raw_streams(config: &SimConfig) -> Result<(RawSampleStream, RawSampleStream), SimError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let imu_clock = ClockId::new(SIM_IMU_CLOCK).expect("static name");
    let (gyro, _) = plan_raw_stream(&mut rng, config, &imu_clock, SampleKind::Gyro);
    let (accel, _) = plan_raw_stream(&mut rng, config, &imu_clock, SampleKind::Accel);
    Ok((gyro, accel))
}

#[derive(Serialize)]
struct GroundTruthSidecar<'a> {
    seed: u64,
    camera_clock_offset_ns: i64,
    camera_clock_drift_ppm: f64,
    camera_to_imu: &'a ClockMap,
    collision_bumps: u64,
    dropped_frames: u64,
    dropped_imu: u64,
    frame_count: usize,
    imu_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    frame_true_span_ns: Option<[i64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    imu_true_span_ns: Option<[i64; 2]>,
}

/// Writes the summary-level `groundtruth.json` sidecar next to a simulated
/// session so tools outside this crate can check recovered offsets and
/// drifts.
pub fn write_ground_truth_sidecar(truth: &SimGroundTruth, dir: &Path) -> io::Result<()> {
    let span = |records: &[EpochRecord]| {
        records
            .first()
            .map(|f| [f.actual_ns, records[records.len() - 1].actual_ns])
    };
    let sidecar = GroundTruthSidecar {
        seed: truth.seed,
        camera_clock_offset_ns: truth.camera_clock_offset_ns,
        camera_clock_drift_ppm: truth.camera_clock_drift_ppm,
        camera_to_imu: &truth.camera_to_imu,
        collision_bumps: truth.collision_bumps,
        dropped_frames: truth.dropped_frames,
        dropped_imu: truth.dropped_imu,
        frame_count: truth.frame_epochs.len(),
        imu_count: truth.imu_epochs.len(),
        frame_true_span_ns: span(&truth.frame_epochs),
        imu_true_span_ns: span(&truth.imu_epochs),
    };
    let mut json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    json.push('\n');
    std::fs::write(dir.join(GROUND_TRUTH_FILE), json)
}
