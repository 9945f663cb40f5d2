//! Shared domain types for visual-inertial session logs: clock identities,
//! clock-tagged timestamps, sensor streams, frame metadata, and whole-session
//! validation.
//!
//! Everything here is an in-memory value type. Parsing and serialization live
//! in [`crate::formats`]; clock alignment lives in [`crate::sync`].

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Errors from constructing core types with invalid data.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("clock id must not be empty")]
    EmptyClockId,
    #[error("non-finite {what} component")]
    NonFinite { what: &'static str },
    #[error("clock correspondence must bridge two distinct clocks, got `{clock}` on both sides")]
    CorrespondenceSameClock { clock: ClockId },
}

/// Raised when timestamps from two different clocks are combined.
///
/// Mixing clocks is never a rounding problem or a warning: an instant on
/// `boottime` and an instant on `monotonic` have no defined difference until
/// a fitted [`crate::sync::ClockMap`] relates them.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("clock mismatch: expected `{expected}`, found `{found}`")]
pub struct ClockMismatch {
    pub expected: ClockId,
    pub found: ClockId,
}

/// Identifies the time source a timestamp was read from, e.g. `boottime`,
/// `monotonic`, or `host`.
///
/// Clock ids compare by exact string equality; two devices may both call a
/// clock `monotonic` and mean different oscillators, so ids are only
/// meaningful within one session.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ClockId(Arc<str>);

impl ClockId {
    /// Creates a clock id. The name must be non-empty.
    pub fn new(name: impl AsRef<str>) -> Result<Self, ModelError> {
        let name = name.as_ref();
        if name.is_empty() {
            return Err(ModelError::EmptyClockId);
        }
        Ok(ClockId(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ClockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for ClockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ClockId({:?})", &*self.0)
    }
}

impl Serialize for ClockId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for ClockId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let name = String::deserialize(deserializer)?;
        ClockId::new(&name).map_err(serde::de::Error::custom)
    }
}

/// An integer-nanosecond timestamp tagged with the clock it was read from.
///
/// Instants never silently cross clocks: subtraction checks clock equality
/// and ordering is undefined (`partial_cmp` returns `None`) across clocks.
/// All timestamps in this crate are whole nanoseconds; fractional values are
/// rounded half-up at the boundary where they enter.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TimebasedInstant {
    t_ns: i64,
    clock: ClockId,
}

impl TimebasedInstant {
    pub fn new(t_ns: i64, clock: ClockId) -> Self {
        TimebasedInstant { t_ns, clock }
    }

    /// Nanoseconds since the (arbitrary) epoch of this instant's clock.
    pub fn ns(&self) -> i64 {
        self.t_ns
    }

    pub fn clock(&self) -> &ClockId {
        &self.clock
    }

    pub fn same_clock(&self, other: &TimebasedInstant) -> bool {
        self.clock == other.clock
    }

    /// Signed duration `self - earlier` in nanoseconds.
    pub fn duration_since(&self, earlier: &TimebasedInstant) -> Result<i64, ClockMismatch> {
        if !self.same_clock(earlier) {
            return Err(ClockMismatch {
                expected: self.clock.clone(),
                found: earlier.clock.clone(),
            });
        }
        Ok(self.t_ns - earlier.t_ns)
    }

    /// A new instant shifted by `delta_ns` on the same clock.
    pub fn offset_by(&self, delta_ns: i64) -> TimebasedInstant {
        TimebasedInstant {
            t_ns: self.t_ns + delta_ns,
            clock: self.clock.clone(),
        }
    }
}

impl PartialOrd for TimebasedInstant {
    /// Instants on different clocks are unordered.
    fn partial_cmp(&self, other: &TimebasedInstant) -> Option<std::cmp::Ordering> {
        self.same_clock(other).then(|| self.t_ns.cmp(&other.t_ns))
    }
}

/// What a raw single-sensor stream carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SampleKind {
    Gyro,
    Accel,
}

impl fmt::Display for SampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleKind::Gyro => "gyro",
            SampleKind::Accel => "accel",
        })
    }
}

/// One raw three-axis reading. Units are rad/s for gyro streams and m/s^2 for
/// accel streams.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RawSample {
    pub t_ns: i64,
    pub value: [f64; 3],
}

/// A single-sensor stream as logged, before accel/gyro alignment.
///
/// All samples share `clock`; timestamps must be strictly increasing (checked
/// by [`validate_session`], not by construction, so that a malformed stream
/// can still be represented and described).
#[derive(Clone, Debug, PartialEq)]
pub struct RawSampleStream {
    pub kind: SampleKind,
    pub clock: ClockId,
    pub samples: Vec<RawSample>,
}

impl RawSampleStream {
    pub fn new(kind: SampleKind, clock: ClockId, samples: Vec<RawSample>) -> Self {
        RawSampleStream {
            kind,
            clock,
            samples,
        }
    }

    pub fn timestamps(&self) -> impl Iterator<Item = i64> + '_ {
        self.samples.iter().map(|s| s.t_ns)
    }

    pub fn first_ns(&self) -> Option<i64> {
        self.samples.first().map(|s| s.t_ns)
    }

    pub fn last_ns(&self) -> Option<i64> {
        self.samples.last().map(|s| s.t_ns)
    }
}

/// One combined inertial reading: angular rate and specific force at a single
/// gyroscope epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct ImuSample {
    pub t: TimebasedInstant,
    /// Angular rate, rad/s.
    pub gyro: [f64; 3],
    /// Specific force, m/s^2.
    pub accel: [f64; 3],
}

impl ImuSample {
    /// Builds a sample, rejecting NaN or infinite components.
    pub fn new(t: TimebasedInstant, gyro: [f64; 3], accel: [f64; 3]) -> Result<Self, ModelError> {
        if !gyro.iter().all(|v| v.is_finite()) {
            return Err(ModelError::NonFinite { what: "gyro" });
        }
        if !accel.iter().all(|v| v.is_finite()) {
            return Err(ModelError::NonFinite { what: "accel" });
        }
        Ok(ImuSample { t, gyro, accel })
    }
}

/// Whether per-frame optics came from the device at capture time or were
/// filled in from fallback constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetadataSource {
    Measured,
    /// Optics taken from device-model defaults rather than the capture API.
    #[serde(rename = "empirical")]
    EmpiricalDefault,
}

impl fmt::Display for MetadataSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetadataSource::Measured => "measured",
            MetadataSource::EmpiricalDefault => "empirical",
        })
    }
}

impl std::str::FromStr for MetadataSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "measured" => Ok(MetadataSource::Measured),
            "empirical" => Ok(MetadataSource::EmpiricalDefault),
            other => Err(format!(
                "unknown metadata source `{other}` (expected `measured` or `empirical`)"
            )),
        }
    }
}

/// Timestamp and optics metadata for one camera frame.
///
/// `t_start` marks the start of exposure of the first sensor row. The
/// mid-frame instant used for alignment is derived from it by
/// [`crate::sync::center_frame_time`], never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameRecord {
    pub index: u64,
    pub t_start: TimebasedInstant,
    /// Exposure duration of a single row.
    pub exposure_ns: u64,
    /// Rolling-shutter readout: delay between the first and last row starting
    /// to expose. Zero for a global shutter.
    pub readout_ns: u64,
    /// Focal length in pixels, `(fx, fy)`, when known.
    pub focal_px: Option<(f64, f64)>,
    /// Principal point in pixels, `(cx, cy)`, when known.
    pub principal_px: Option<(f64, f64)>,
    pub metadata_source: MetadataSource,
}

/// Why a clock correspondence was recorded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarkLabel {
    SessionStart,
    SessionEnd,
    /// Any additional mark taken mid-session.
    Extra,
}

impl fmt::Display for MarkLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MarkLabel::SessionStart => "session-start",
            MarkLabel::SessionEnd => "session-end",
            MarkLabel::Extra => "extra",
        })
    }
}

impl std::str::FromStr for MarkLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "session-start" => Ok(MarkLabel::SessionStart),
            "session-end" => Ok(MarkLabel::SessionEnd),
            "extra" => Ok(MarkLabel::Extra),
            other => Err(format!(
                "unknown mark label `{other}` (expected `session-start`, `session-end`, or `extra`)"
            )),
        }
    }
}

/// Two readings of the same physical instant on two different clocks,
/// recorded at the start and end of a capture session (and optionally in
/// between) so the offset and drift between the clocks can be fitted.
#[derive(Clone, Debug, PartialEq)]
pub struct ClockCorrespondence {
    pub label: MarkLabel,
    pub t_a: TimebasedInstant,
    pub t_b: TimebasedInstant,
}

impl ClockCorrespondence {
    /// Builds a correspondence; the two sides must be on distinct clocks.
    pub fn new(
        label: MarkLabel,
        t_a: TimebasedInstant,
        t_b: TimebasedInstant,
    ) -> Result<Self, ModelError> {
        if t_a.clock() == t_b.clock() {
            return Err(ModelError::CorrespondenceSameClock {
                clock: t_a.clock().clone(),
            });
        }
        Ok(ClockCorrespondence { label, t_a, t_b })
    }
}

/// Operating-system family of the recording device. Determines which
/// timestamping quirks to expect, not how data is parsed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OsFamily {
    Android,
    Ios,
    Simulated,
}

impl fmt::Display for OsFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OsFamily::Android => "android",
            OsFamily::Ios => "ios",
            OsFamily::Simulated => "simulated",
        })
    }
}

/// Device identity, nominal sensor rates, and clock names for one recording.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceManifest {
    pub device: String,
    pub os_family: OsFamily,
    pub nominal_frame_rate_hz: f64,
    pub nominal_imu_rate_hz: f64,
    /// Accelerometer rate when it differs from the gyro rate; `None` means
    /// the combined-IMU layout where both sensors share gyro epochs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nominal_accel_rate_hz: Option<f64>,
    pub camera_clock: ClockId,
    pub imu_clock: ClockId,
    /// Name of an opaque video blob recorded alongside the metadata, if any.
    /// The file is never parsed and never required to exist.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub video_file: Option<String>,
}

/// A complete recording: manifest, frame metadata, inertial streams, and
/// clock correspondence marks.
///
/// IMU data appears either as `imu_combined` (accel already aligned to gyro
/// epochs) or as the raw `gyro_raw`/`accel_raw` pair; a session may carry
/// both, and [`validate_session`] flags one that carries neither.
#[derive(Clone, Debug, PartialEq)]
pub struct Session {
    pub manifest: DeviceManifest,
    pub frames: Vec<FrameRecord>,
    pub gyro_raw: Option<RawSampleStream>,
    pub accel_raw: Option<RawSampleStream>,
    pub imu_combined: Option<Vec<ImuSample>>,
    pub clock_marks: Vec<ClockCorrespondence>,
}

/// Names a stream inside a [`Session`] for diagnostics and violations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StreamName {
    Frames,
    Gyro,
    Accel,
    #[serde(rename = "imu")]
    ImuCombined,
    #[serde(rename = "clockmarks")]
    ClockMarks,
}

impl fmt::Display for StreamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StreamName::Frames => "frames",
            StreamName::Gyro => "gyro",
            StreamName::Accel => "accel",
            StreamName::ImuCombined => "imu",
            StreamName::ClockMarks => "clockmarks",
        })
    }
}

/// A single invariant violation found by [`validate_session`].
///
/// Violations are data, not errors: a `Session` holding a broken stream is
/// still representable so the validator can describe everything wrong with it
/// in one pass. Indices are 0-based positions within the named stream.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// Timestamp at `index` is not strictly greater than its predecessor.
    NonMonotonic { stream: StreamName, index: usize },
    /// Frame `index` column does not strictly increase at this position.
    FrameIndexNotIncreasing { index: usize },
    /// An entry (or a raw stream's tag, when `index` is `None`) is on a
    /// different clock than the manifest declares for that stream.
    ClockMixed {
        stream: StreamName,
        index: Option<usize>,
        expected: ClockId,
        found: ClockId,
    },
    /// A raw stream is tagged with the wrong sensor kind.
    WrongKind {
        stream: StreamName,
        found: SampleKind,
    },
    /// A sample or optics value at `index` is NaN or infinite.
    NonFinite { stream: StreamName, index: usize },
    /// No IMU data: neither a non-empty combined stream nor a non-empty
    /// gyro/accel raw pair is present.
    MissingImu,
    /// A clock mark has the same clock on both sides.
    MarkSameClock { index: usize },
    /// A clock mark's (clock_a, clock_b) pair differs from the first mark's.
    MarkPairInconsistent { index: usize },
    /// A clock mark references a clock the manifest does not declare.
    MarkUnknownClock { index: usize, found: ClockId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonMonotonic { stream, index } => {
                write!(f, "{stream}[{index}]: timestamp not strictly increasing")
            }
            Violation::FrameIndexNotIncreasing { index } => {
                write!(f, "frames[{index}]: frame index not strictly increasing")
            }
            Violation::ClockMixed {
                stream,
                index: Some(index),
                expected,
                found,
            } => write!(
                f,
                "{stream}[{index}]: clock `{found}` does not match declared `{expected}`"
            ),
            Violation::ClockMixed {
                stream,
                index: None,
                expected,
                found,
            } => write!(
                f,
                "{stream}: stream clock `{found}` does not match declared `{expected}`"
            ),
            Violation::WrongKind { stream, found } => {
                write!(f, "{stream}: stream is tagged as `{found}` samples")
            }
            Violation::NonFinite { stream, index } => {
                write!(f, "{stream}[{index}]: non-finite value")
            }
            Violation::MissingImu => f.write_str(
                "no inertial data: need a non-empty combined IMU stream or a gyro/accel raw pair",
            ),
            Violation::MarkSameClock { index } => {
                write!(f, "clockmarks[{index}]: both sides on the same clock")
            }
            Violation::MarkPairInconsistent { index } => write!(
                f,
                "clockmarks[{index}]: clock pair differs from the first mark"
            ),
            Violation::MarkUnknownClock { index, found } => write!(
                f,
                "clockmarks[{index}]: clock `{found}` is not declared in the manifest"
            ),
        }
    }
}

/// Checks every session invariant and returns all violations found, in stream
/// order. An empty result means the session is well-formed; it does not mean
/// the data is plausible (see [`crate::diagnostics`] for that).
pub fn validate_session(session: &Session) -> Vec<Violation> {
    let mut out = Vec::new();
    let manifest = &session.manifest;

    check_frames(&mut out, session);

    if let Some(stream) = &session.gyro_raw {
        check_raw_stream(
            &mut out,
            stream,
            StreamName::Gyro,
            SampleKind::Gyro,
            &manifest.imu_clock,
        );
    }
    if let Some(stream) = &session.accel_raw {
        check_raw_stream(
            &mut out,
            stream,
            StreamName::Accel,
            SampleKind::Accel,
            &manifest.imu_clock,
        );
    }
    if let Some(samples) = &session.imu_combined {
        check_combined(&mut out, samples, &manifest.imu_clock);
    }

    let has_combined = session
        .imu_combined
        .as_ref()
        .is_some_and(|s| !s.is_empty());
    let has_raw_pair = session.gyro_raw.as_ref().is_some_and(|s| !s.samples.is_empty())
        && session
            .accel_raw
            .as_ref()
            .is_some_and(|s| !s.samples.is_empty());
    if !has_combined && !has_raw_pair {
        out.push(Violation::MissingImu);
    }

    check_marks(&mut out, session);
    out
}

fn check_frames(out: &mut Vec<Violation>, session: &Session) {
    let camera_clock = &session.manifest.camera_clock;
    for (i, frame) in session.frames.iter().enumerate() {
        if frame.t_start.clock() != camera_clock {
            out.push(Violation::ClockMixed {
                stream: StreamName::Frames,
                index: Some(i),
                expected: camera_clock.clone(),
                found: frame.t_start.clock().clone(),
            });
        }
        let optics_finite = frame
            .focal_px
            .iter()
            .chain(frame.principal_px.iter())
            .all(|(a, b)| a.is_finite() && b.is_finite());
        if !optics_finite {
            out.push(Violation::NonFinite {
                stream: StreamName::Frames,
                index: i,
            });
        }
        if i > 0 {
            let prev = &session.frames[i - 1];
            if frame.t_start.ns() <= prev.t_start.ns() {
                out.push(Violation::NonMonotonic {
                    stream: StreamName::Frames,
                    index: i,
                });
            }
            if frame.index <= prev.index {
                out.push(Violation::FrameIndexNotIncreasing { index: i });
            }
        }
    }
}

fn check_raw_stream(
    out: &mut Vec<Violation>,
    stream: &RawSampleStream,
    name: StreamName,
    expected_kind: SampleKind,
    expected_clock: &ClockId,
) {
    if stream.kind != expected_kind {
        out.push(Violation::WrongKind {
            stream: name,
            found: stream.kind,
        });
    }
    if stream.clock != *expected_clock {
        out.push(Violation::ClockMixed {
            stream: name,
            index: None,
            expected: expected_clock.clone(),
            found: stream.clock.clone(),
        });
    }
    for (i, sample) in stream.samples.iter().enumerate() {
        if !sample.value.iter().all(|v| v.is_finite()) {
            out.push(Violation::NonFinite { stream: name, index: i });
        }
        if i > 0 && sample.t_ns <= stream.samples[i - 1].t_ns {
            out.push(Violation::NonMonotonic { stream: name, index: i });
        }
    }
}

fn check_combined(out: &mut Vec<Violation>, samples: &[ImuSample], expected_clock: &ClockId) {
    let name = StreamName::ImuCombined;
    for (i, sample) in samples.iter().enumerate() {
        if sample.t.clock() != expected_clock {
            out.push(Violation::ClockMixed {
                stream: name,
                index: Some(i),
                expected: expected_clock.clone(),
                found: sample.t.clock().clone(),
            });
        }
        if !sample.gyro.iter().chain(sample.accel.iter()).all(|v| v.is_finite()) {
            out.push(Violation::NonFinite { stream: name, index: i });
        }
        if i > 0 && sample.t.ns() <= samples[i - 1].t.ns() {
            out.push(Violation::NonMonotonic { stream: name, index: i });
        }
    }
}

fn check_marks(out: &mut Vec<Violation>, session: &Session) {
    let manifest = &session.manifest;
    let known = [&manifest.camera_clock, &manifest.imu_clock];
    let first_pair = session
        .clock_marks
        .first()
        .map(|m| (m.t_a.clock().clone(), m.t_b.clock().clone()));
    for (i, mark) in session.clock_marks.iter().enumerate() {
        if mark.t_a.clock() == mark.t_b.clock() {
            out.push(Violation::MarkSameClock { index: i });
        }
        if let Some((ref a, ref b)) = first_pair {
            if i > 0 && (mark.t_a.clock() != a || mark.t_b.clock() != b) {
                out.push(Violation::MarkPairInconsistent { index: i });
            }
        }
        for side in [&mark.t_a, &mark.t_b] {
            if !known.contains(&side.clock()) {
                out.push(Violation::MarkUnknownClock {
                    index: i,
                    found: side.clock().clone(),
                });
            }
        }
    }
}
