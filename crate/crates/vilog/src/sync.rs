//! Camera–IMU time alignment: affine clock maps fitted from correspondence
//! marks, accelerometer resampling onto gyroscope epochs, exposure centering
//! of frame timestamps, and the whole-session synchronization pipeline.
//!
//! Conventions used throughout:
//!
//! * A [`ClockMap`] is `t_to = scale * t_from + offset_ns`, with the result
//!   rounded half-up to a whole nanosecond. `scale` is dimensionless and close
//!   to 1 for real oscillators; `offset_ns` absorbs the epoch difference.
//! * Interpolation never extrapolates. Gyro epochs outside the accelerometer's
//!   recorded span are dropped and counted, not guessed at; using bracketing
//!   samples on both sides halves the worst-case error compared to holding the
//!   last value, at the cost of waiting for the later sample.
//! * Fractional nanoseconds round half-up (`floor(x + 0.5)`) everywhere.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    validate_session, ClockId, ClockMismatch, DeviceManifest, FrameRecord, ImuSample,
    MetadataSource, RawSampleStream, SampleKind, Session, StreamName, TimebasedInstant, Violation,
};

/// Errors from fitting, remapping, or synchronizing.
#[derive(Debug, Error)]
pub enum SyncError {
    #[error(transparent)]
    ClockMismatch(#[from] ClockMismatch),
    #[error("gyro stream has no samples to interpolate at")]
    EmptyStream,
    #[error("stream kind mismatch: expected {expected} samples, found {found}")]
    WrongStreamKind {
        expected: SampleKind,
        found: SampleKind,
    },
    #[error("no clock marks available to fit a map between distinct clocks")]
    MissingClockMarks,
    #[error("clock marks do not all share one (clock_a, clock_b) pair")]
    MixedClockPairs,
    #[error("degenerate clock marks: {reason}")]
    DegenerateMarks { reason: String },
    #[error("invalid clock map: {reason}")]
    InvalidMap { reason: String },
    #[error("session failed validation ({} violation(s))", .0.len())]
    InvalidSession(Vec<Violation>),
    #[error("synchronized {stream} stream lost strict ordering at index {index}")]
    NonMonotonicOutput { stream: StreamName, index: usize },
}

/// Rounds to the nearest integer nanosecond, ties toward +infinity.
///
/// This is the single float-to-timestamp boundary for the whole crate; every
/// fractional nanosecond is resolved here so that all callers agree on tie
/// behavior.
pub fn round_half_up_ns(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

/// An affine mapping between two clocks: `t_to = scale * t_from + offset_ns`.
///
/// Fields are private so that every map in circulation satisfies
/// `scale > 0` and finite; construct via [`ClockMap::new`], [`ClockMap::identity`],
/// or [`fit_clock_map`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClockMap {
    from: ClockId,
    to: ClockId,
    scale: f64,
    offset_ns: i64,
}

impl ClockMap {
    pub fn new(from: ClockId, to: ClockId, scale: f64, offset_ns: i64) -> Result<Self, SyncError> {
        if !scale.is_finite() || scale <= 0.0 {
            return Err(SyncError::InvalidMap {
                reason: format!("scale must be finite and positive, got {scale}"),
            });
        }
        Ok(ClockMap {
            from,
            to,
            scale,
            offset_ns,
        })
    }

    /// The do-nothing map from a clock to itself.
    pub fn identity(clock: ClockId) -> Self {
        ClockMap {
            from: clock.clone(),
            to: clock,
            scale: 1.0,
            offset_ns: 0,
        }
    }

    pub fn from_clock(&self) -> &ClockId {
        &self.from
    }

    pub fn to_clock(&self) -> &ClockId {
        &self.to
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn offset_ns(&self) -> i64 {
        self.offset_ns
    }

    /// Applies the map to a bare nanosecond count from the source clock.
    pub fn apply_ns(&self, t_ns: i64) -> i64 {
        round_half_up_ns(self.scale * t_ns as f64 + self.offset_ns as f64)
    }

    /// Applies the map to an instant, checking that it is on the source clock.
    pub fn apply(&self, t: &TimebasedInstant) -> Result<TimebasedInstant, ClockMismatch> {
        if t.clock() != &self.from {
            return Err(ClockMismatch {
                expected: self.from.clone(),
                found: t.clock().clone(),
            });
        }
        Ok(TimebasedInstant::new(self.apply_ns(t.ns()), self.to.clone()))
    }

    /// The inverse map. Round-tripping a timestamp through a map and its
    /// inverse reproduces it to within 1 ns (the two rounding steps).
    pub fn invert(&self) -> ClockMap {
        ClockMap {
            from: self.to.clone(),
            to: self.from.clone(),
            scale: 1.0 / self.scale,
            offset_ns: round_half_up_ns(-(self.offset_ns as f64) / self.scale),
        }
    }
}

/// Fits an affine clock map from correspondence marks.
///
/// The map is oriented `t_a -> t_b` using the clocks of the first mark. One
/// mark pins a pure offset (scale 1); two marks determine offset and scale
/// exactly; three or more are fitted least-squares with the inputs centered
/// on their means so that the normal equations stay well-conditioned for
/// nanosecond-magnitude timestamps.
pub fn fit_clock_map(marks: &[crate::model::ClockCorrespondence]) -> Result<ClockMap, SyncError> {
    let first = marks.first().ok_or(SyncError::MissingClockMarks)?;
    let clock_a = first.t_a.clock().clone();
    let clock_b = first.t_b.clock().clone();
    for mark in &marks[1..] {
        if mark.t_a.clock() != &clock_a || mark.t_b.clock() != &clock_b {
            return Err(SyncError::MixedClockPairs);
        }
    }
    for (i, a) in marks.iter().enumerate() {
        for (j, b) in marks.iter().enumerate().skip(i + 1) {
            if a.t_a.ns() == b.t_a.ns() {
                return Err(SyncError::DegenerateMarks {
                    reason: format!(
                        "marks {i} and {j} share source timestamp {} ns",
                        a.t_a.ns()
                    ),
                });
            }
        }
    }

    let (scale, offset_ns) = match marks {
        [only] => (1.0, only.t_b.ns() - only.t_a.ns()),
        [m0, m1] => {
            let da = (m1.t_a.ns() - m0.t_a.ns()) as f64;
            let db = (m1.t_b.ns() - m0.t_b.ns()) as f64;
            let scale = db / da;
            let offset = round_half_up_ns(m0.t_b.ns() as f64 - scale * m0.t_a.ns() as f64);
            (scale, offset)
        }
        _ => {
            let n = marks.len() as f64;
            let sum_a: i128 = marks.iter().map(|m| m.t_a.ns() as i128).sum();
            let sum_b: i128 = marks.iter().map(|m| m.t_b.ns() as i128).sum();
            let mean_a = sum_a as f64 / n;
            let mean_b = sum_b as f64 / n;
            let mut sxx = 0.0;
            let mut sxy = 0.0;
            for m in marks {
                let da = m.t_a.ns() as f64 - mean_a;
                let db = m.t_b.ns() as f64 - mean_b;
                sxx += da * da;
                sxy += da * db;
            }
            if sxx == 0.0 {
                return Err(SyncError::DegenerateMarks {
                    reason: "all marks share one source timestamp".to_string(),
                });
            }
            let scale = sxy / sxx;
            let offset = round_half_up_ns(mean_b - scale * mean_a);
            (scale, offset)
        }
    };

    if !scale.is_finite() || scale <= 0.0 {
        return Err(SyncError::DegenerateMarks {
            reason: format!("fitted scale {scale} is not positive"),
        });
    }
    ClockMap::new(clock_a, clock_b, scale, offset_ns)
}

/// Accelerometer readings resampled onto gyroscope epochs.
#[derive(Clone, Debug, PartialEq)]
pub struct Interpolated {
    pub samples: Vec<ImuSample>,
    /// Gyro epochs before the first accel sample, dropped rather than
    /// extrapolated. When the accel stream is empty every epoch lands here.
    pub dropped_before: usize,
    /// Gyro epochs after the last accel sample.
    pub dropped_after: usize,
}

impl Interpolated {
    pub fn dropped(&self) -> usize {
        self.dropped_before + self.dropped_after
    }
}

/// Linearly interpolates the accelerometer at each gyroscope epoch, producing
/// combined IMU samples on the gyro timeline.
///
/// Epochs that coincide with an accel timestamp take that sample's value
/// exactly (no arithmetic); epochs outside the accel span are dropped and
/// counted. Both streams must be on the same clock and sorted.
///
/// Interpolation is *bracketing*: each epoch uses the accel samples on both
/// sides. An online logger restricted to past samples would instead hold or
/// extrapolate and lag the signal by up to one accel interval; offline
/// alignment has no reason to accept that error.
pub fn interpolate_accel_at_gyro(
    gyro: &RawSampleStream,
    accel: &RawSampleStream,
) -> Result<Interpolated, SyncError> {
    if gyro.kind != SampleKind::Gyro {
        return Err(SyncError::WrongStreamKind {
            expected: SampleKind::Gyro,
            found: gyro.kind,
        });
    }
    if accel.kind != SampleKind::Accel {
        return Err(SyncError::WrongStreamKind {
            expected: SampleKind::Accel,
            found: accel.kind,
        });
    }
    if gyro.clock != accel.clock {
        return Err(ClockMismatch {
            expected: gyro.clock.clone(),
            found: accel.clock.clone(),
        }
        .into());
    }
    if gyro.samples.is_empty() {
        return Err(SyncError::EmptyStream);
    }

    let acc = &accel.samples;
    if acc.is_empty() {
        return Ok(Interpolated {
            samples: Vec::new(),
            dropped_before: gyro.samples.len(),
            dropped_after: 0,
        });
    }

    let first = acc[0].t_ns;
    let last = acc[acc.len() - 1].t_ns;
    let mut samples = Vec::with_capacity(gyro.samples.len());
    let mut dropped_before = 0;
    let mut dropped_after = 0;
    // Upper-bracket cursor; gyro epochs are sorted, so it only moves forward.
    let mut hi = 0usize;

    for g in &gyro.samples {
        let t = g.t_ns;
        if t < first {
            dropped_before += 1;
            continue;
        }
        if t > last {
            dropped_after += 1;
            continue;
        }
        while acc[hi].t_ns < t {
            hi += 1;
        }
        let value = if acc[hi].t_ns == t {
            acc[hi].value
        } else {
            let a0 = &acc[hi - 1];
            let a1 = &acc[hi];
            let u = (t - a0.t_ns) as f64 / (a1.t_ns - a0.t_ns) as f64;
            [
                a0.value[0] * (1.0 - u) + a1.value[0] * u,
                a0.value[1] * (1.0 - u) + a1.value[1] * u,
                a0.value[2] * (1.0 - u) + a1.value[2] * u,
            ]
        };
        samples.push(ImuSample {
            t: TimebasedInstant::new(t, gyro.clock.clone()),
            gyro: g.value,
            accel: value,
        });
    }

    Ok(Interpolated {
        samples,
        dropped_before,
        dropped_after,
    })
}

/// The instant the middle sensor row is mid-exposure:
/// `t_start + (exposure_ns + readout_ns) / 2`, half-sum rounded half-up to a
/// whole nanosecond.
///
/// Centering makes a frame's timestamp commensurable with the IMU's: the raw
/// `t_start` leads the visual content of the frame by half the exposure plus
/// half the rolling-shutter readout.
pub fn center_frame_time(frame: &FrameRecord) -> TimebasedInstant {
    let half = (frame.exposure_ns as u128 + frame.readout_ns as u128).div_ceil(2);
    let t = frame.t_start.ns() as i128 + half as i128;
    let t = i64::try_from(t).expect("centered frame timestamp overflows i64 nanoseconds");
    TimebasedInstant::new(t, frame.t_start.clock().clone())
}

/// Rewrites frame timestamps through a clock map; everything else is copied.
pub fn remap_frames(
    frames: &[FrameRecord],
    map: &ClockMap,
) -> Result<Vec<FrameRecord>, ClockMismatch> {
    frames
        .iter()
        .map(|f| {
            Ok(FrameRecord {
                index: f.index,
                t_start: map.apply(&f.t_start)?,
                exposure_ns: f.exposure_ns,
                readout_ns: f.readout_ns,
                focal_px: f.focal_px,
                principal_px: f.principal_px,
                metadata_source: f.metadata_source,
            })
        })
        .collect()
}

/// Rewrites combined IMU timestamps through a clock map.
pub fn remap_imu_samples(
    samples: &[ImuSample],
    map: &ClockMap,
) -> Result<Vec<ImuSample>, ClockMismatch> {
    samples
        .iter()
        .map(|s| {
            Ok(ImuSample {
                t: map.apply(&s.t)?,
                gyro: s.gyro,
                accel: s.accel,
            })
        })
        .collect()
}

/// Rewrites a raw stream's timestamps through a clock map.
pub fn remap_raw_stream(
    stream: &RawSampleStream,
    map: &ClockMap,
) -> Result<RawSampleStream, ClockMismatch> {
    if stream.clock != *map.from_clock() {
        return Err(ClockMismatch {
            expected: map.from_clock().clone(),
            found: stream.clock.clone(),
        });
    }
    Ok(RawSampleStream {
        kind: stream.kind,
        clock: map.to_clock().clone(),
        samples: stream
            .samples
            .iter()
            .map(|s| crate::model::RawSample {
                t_ns: map.apply_ns(s.t_ns),
                value: s.value,
            })
            .collect(),
    })
}

/// A frame after clock remapping and exposure centering.
///
/// `exposure_ns` and `readout_ns` keep the original shutter values for
/// reference; `t_centered` has already absorbed them.
#[derive(Clone, Debug, PartialEq)]
pub struct SyncedFrame {
    pub index: u64,
    pub t_centered: TimebasedInstant,
    pub exposure_ns: u64,
    pub readout_ns: u64,
    pub focal_px: Option<(f64, f64)>,
    pub principal_px: Option<(f64, f64)>,
    pub metadata_source: MetadataSource,
}

/// How a synced session was produced, for downstream consumers that need to
/// audit or undo the alignment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyncProvenance {
    /// The camera-to-target map that was applied to frame timestamps.
    pub applied_map: ClockMap,
    /// True when the IMU stream was rebuilt by accel-at-gyro interpolation
    /// rather than taken from an already-combined stream.
    pub interpolated: bool,
    /// Gyro epochs dropped because they fell outside the accel span.
    pub dropped_gyro_epochs: u64,
}

/// A session with every stream on one clock and frame times centered.
#[derive(Clone, Debug, PartialEq)]
pub struct SyncedSession {
    /// Copy of the source manifest with `camera_clock` rewritten to the
    /// target clock.
    pub manifest: DeviceManifest,
    pub target_clock: ClockId,
    pub frames: Vec<SyncedFrame>,
    pub imu: Vec<ImuSample>,
    pub provenance: SyncProvenance,
}

impl SyncedSession {
    /// Verifies the output invariants: one clock everywhere and strictly
    /// increasing timestamps per stream.
    pub fn check(&self) -> Result<(), SyncError> {
        for frame in &self.frames {
            if frame.t_centered.clock() != &self.target_clock {
                return Err(ClockMismatch {
                    expected: self.target_clock.clone(),
                    found: frame.t_centered.clock().clone(),
                }
                .into());
            }
        }
        for sample in &self.imu {
            if sample.t.clock() != &self.target_clock {
                return Err(ClockMismatch {
                    expected: self.target_clock.clone(),
                    found: sample.t.clock().clone(),
                }
                .into());
            }
        }
        for (i, pair) in self.frames.windows(2).enumerate() {
            if pair[1].t_centered.ns() <= pair[0].t_centered.ns() {
                return Err(SyncError::NonMonotonicOutput {
                    stream: StreamName::Frames,
                    index: i + 1,
                });
            }
        }
        for (i, pair) in self.imu.windows(2).enumerate() {
            if pair[1].t.ns() <= pair[0].t.ns() {
                return Err(SyncError::NonMonotonicOutput {
                    stream: StreamName::ImuCombined,
                    index: i + 1,
                });
            }
        }
        Ok(())
    }
}

/// Runs the full alignment pipeline and returns a session on `target_clock`.
///
/// Steps, in order:
///
/// 1. validate the input session (any violation aborts);
/// 2. fit a camera-to-target clock map from the marks, or use the identity
///    when camera and IMU already share a clock;
/// 3. remap frame timestamps and center them mid-exposure;
/// 4. take the combined IMU stream as-is, or build one by interpolating the
///    raw accel stream at raw gyro epochs;
/// 5. verify the output is single-clock and strictly ordered.
///
/// `target_clock` must be the session's IMU clock: inertial data is never
/// resampled onto another timeline, frames are brought to it.
pub fn synchronize_session(
    session: &Session,
    target_clock: &ClockId,
) -> Result<SyncedSession, SyncError> {
    let violations = validate_session(session);
    if !violations.is_empty() {
        return Err(SyncError::InvalidSession(violations));
    }

    let manifest = &session.manifest;
    if target_clock != &manifest.imu_clock {
        return Err(ClockMismatch {
            expected: manifest.imu_clock.clone(),
            found: target_clock.clone(),
        }
        .into());
    }

    let map = if manifest.camera_clock == manifest.imu_clock {
        ClockMap::identity(manifest.imu_clock.clone())
    } else {
        if session.clock_marks.is_empty() {
            return Err(SyncError::MissingClockMarks);
        }
        orient_map(
            fit_clock_map(&session.clock_marks)?,
            &manifest.camera_clock,
            target_clock,
        )?
    };

    let remapped = remap_frames(&session.frames, &map)?;
    let frames: Vec<SyncedFrame> = remapped
        .iter()
        .map(|f| SyncedFrame {
            index: f.index,
            t_centered: center_frame_time(f),
            exposure_ns: f.exposure_ns,
            readout_ns: f.readout_ns,
            focal_px: f.focal_px,
            principal_px: f.principal_px,
            metadata_source: f.metadata_source,
        })
        .collect();

    let (imu, interpolated, dropped) = match &session.imu_combined {
        Some(samples) if !samples.is_empty() => (samples.clone(), false, 0u64),
        _ => {
            // validate_session guarantees a non-empty raw pair whenever the
            // combined stream is absent or empty.
            let gyro = session.gyro_raw.as_ref().expect("validated raw gyro");
            let accel = session.accel_raw.as_ref().expect("validated raw accel");
            let result = interpolate_accel_at_gyro(gyro, accel)?;
            let dropped = result.dropped() as u64;
            (result.samples, true, dropped)
        }
    };

    let mut out_manifest = manifest.clone();
    out_manifest.camera_clock = target_clock.clone();
    let synced = SyncedSession {
        manifest: out_manifest,
        target_clock: target_clock.clone(),
        frames,
        imu,
        provenance: SyncProvenance {
            applied_map: map,
            interpolated,
            dropped_gyro_epochs: dropped,
        },
    };
    synced.check()?;
    Ok(synced)
}

/// Points a fitted map in the camera-to-target direction, inverting it when
/// the marks were recorded the other way around.
fn orient_map(map: ClockMap, from: &ClockId, to: &ClockId) -> Result<ClockMap, SyncError> {
    if map.from_clock() == from && map.to_clock() == to {
        Ok(map)
    } else if map.from_clock() == to && map.to_clock() == from {
        Ok(map.invert())
    } else {
        Err(ClockMismatch {
            expected: from.clone(),
            found: map.from_clock().clone(),
        }
        .into())
    }
}
