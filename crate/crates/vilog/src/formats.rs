//! On-disk session layout: reading, writing, and exporting.
//!
//! A session directory holds `manifest.json` plus CSV streams:
//!
//! * `frames.csv` — `index,t_start_ns,exposure_ns,readout_ns,fx,fy,cx,cy,source`
//! * `imu.csv` — `t_ns,gx,gy,gz,ax,ay,az` (combined layout)
//! * `gyro.csv` / `accel.csv` — `t_ns,x,y,z` (raw layout)
//! * `clockmarks.csv` — `label,t_a_ns,t_b_ns`
//!
//! CSV files are UTF-8 with LF or CRLF line endings, one header row, `#`
//! comment lines, and blank lines allowed anywhere. Parsing is strict: wrong
//! column counts, unknown labels, non-finite numbers, or out-of-order
//! timestamps are errors that name the file and line. Floats are written in
//! shortest-roundtrip form, so write-then-read reproduces values bit for bit.
//!
//! Synced sessions reuse the same layout on one clock — the `t_start_ns`
//! column then holds centered timestamps — plus a `sync.json` provenance
//! sidecar. [`export_slam_layout`] converts a synced session into the
//! `imu0/` + `cam0/` directory convention common among SLAM tools.

use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    validate_session, ClockCorrespondence, ClockId, ClockMismatch, DeviceManifest, FrameRecord,
    ImuSample, MarkLabel, MetadataSource, RawSample, RawSampleStream, SampleKind, Session,
    TimebasedInstant, Violation,
};
use crate::sync::{SyncError, SyncProvenance, SyncedFrame, SyncedSession};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const FRAMES_FILE: &str = "frames.csv";
pub const IMU_FILE: &str = "imu.csv";
pub const GYRO_FILE: &str = "gyro.csv";
pub const ACCEL_FILE: &str = "accel.csv";
pub const CLOCKMARKS_FILE: &str = "clockmarks.csv";
/// Provenance sidecar present only in synced session directories.
pub const SYNC_FILE: &str = "sync.json";

const FRAMES_HEADER: &str = "index,t_start_ns,exposure_ns,readout_ns,fx,fy,cx,cy,source";
const IMU_HEADER: &str = "t_ns,gx,gy,gz,ax,ay,az";
const RAW_HEADER: &str = "t_ns,x,y,z";
const CLOCKMARKS_HEADER: &str = "label,t_a_ns,t_b_ns";

const SLAM_IMU_DATA: &str = "imu0/data.csv";
const SLAM_CAM_DATA: &str = "cam0/data.csv";
const SLAM_CAM_SENSOR: &str = "cam0/sensor.yaml";
const SLAM_IMU_HEADER: &str = "timestamp_ns,wx,wy,wz,ax,ay,az";
const SLAM_CAM_HEADER: &str = "timestamp_ns,frame_index";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("missing file: {path}")]
    MissingFile { path: PathBuf },
    #[error("{file}:{line}: {reason}")]
    MalformedLine {
        file: String,
        line: usize,
        reason: String,
    },
    #[error(transparent)]
    ClockMismatch(#[from] ClockMismatch),
    #[error("{file}:{line}: timestamp not strictly increasing")]
    NonMonotonicTimestamp { file: String, line: usize },
    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("session failed validation ({} violation(s)), refusing to write", .0.len())]
    InvalidSession(Vec<Violation>),
    #[error("input is not a synced single-clock session; run sync first")]
    UnsyncedInput,
}

/// The JSON document stored as `manifest.json`: the device manifest plus the
/// names of the stream files actually present in the directory.
#[derive(Serialize, Deserialize)]
struct ManifestDoc {
    #[serde(flatten)]
    manifest: DeviceManifest,
    files: FileSet,
}

#[derive(Serialize, Deserialize)]
struct FileSet {
    frames: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    imu: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gyro: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    accel: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    clockmarks: Option<String>,
}

/// The JSON document stored as `sync.json` next to a synced session.
#[derive(Serialize, Deserialize)]
struct SyncDoc {
    target_clock: ClockId,
    #[serde(flatten)]
    provenance: SyncProvenance,
}

fn read_text(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == io::ErrorKind::NotFound {
            FormatError::MissingFile {
                path: path.to_path_buf(),
            }
        } else {
            FormatError::IoFailure {
                path: path.to_path_buf(),
                source: e,
            }
        }
    })
}

fn write_text(path: &Path, content: &str) -> Result<(), FormatError> {
    std::fs::write(path, content).map_err(|e| FormatError::IoFailure {
        path: path.to_path_buf(),
        source: e,
    })
}

fn create_dir(path: &Path) -> Result<(), FormatError> {
    std::fs::create_dir_all(path).map_err(|e| FormatError::IoFailure {
        path: path.to_path_buf(),
        source: e,
    })
}

/// One data row of a CSV file: 1-based line number and trimmed fields.
struct Row<'a> {
    line: usize,
    fields: Vec<&'a str>,
}

/// Splits a CSV body into data rows, enforcing the exact header and a fixed
/// column count. Comment (`#`) and blank lines are skipped; a trailing `\r`
/// is tolerated on every line.
fn scan_csv<'a>(
    text: &'a str,
    file: &str,
    header: &str,
    arity: usize,
) -> Result<Vec<Row<'a>>, FormatError> {
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = content.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !saw_header {
            if trimmed != header {
                return Err(FormatError::MalformedLine {
                    file: file.to_string(),
                    line,
                    reason: format!("expected header `{header}`, found `{trimmed}`"),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = content.split(',').map(str::trim).collect();
        if fields.len() != arity {
            return Err(FormatError::MalformedLine {
                file: file.to_string(),
                line,
                reason: format!("expected {arity} columns, found {}", fields.len()),
            });
        }
        rows.push(Row { line, fields });
    }
    if !saw_header {
        return Err(FormatError::MalformedLine {
            file: file.to_string(),
            line: 1,
            reason: format!("missing header row `{header}`"),
        });
    }
    Ok(rows)
}

/// Parse context for one row: builds errors that name the file and line.
struct FieldCx<'a> {
    file: &'a str,
    line: usize,
}

impl FieldCx<'_> {
    fn err(&self, reason: String) -> FormatError {
        FormatError::MalformedLine {
            file: self.file.to_string(),
            line: self.line,
            reason,
        }
    }

    fn i64(&self, field: &str, what: &str) -> Result<i64, FormatError> {
        field
            .parse()
            .map_err(|_| self.err(format!("{what}: `{field}` is not a valid integer")))
    }

    fn u64(&self, field: &str, what: &str) -> Result<u64, FormatError> {
        field
            .parse()
            .map_err(|_| self.err(format!("{what}: `{field}` is not a valid non-negative integer")))
    }

    fn f64(&self, field: &str, what: &str) -> Result<f64, FormatError> {
        let v: f64 = field
            .parse()
            .map_err(|_| self.err(format!("{what}: `{field}` is not a valid number")))?;
        if !v.is_finite() {
            return Err(self.err(format!("{what}: `{field}` is not finite")));
        }
        Ok(v)
    }

    fn opt_f64(&self, field: &str, what: &str) -> Result<Option<f64>, FormatError> {
        if field.is_empty() {
            Ok(None)
        } else {
            self.f64(field, what).map(Some)
        }
    }
}

fn read_manifest_doc(root: &Path) -> Result<ManifestDoc, FormatError> {
    let path = root.join(MANIFEST_FILE);
    let text = read_text(&path)?;
    let doc: ManifestDoc = serde_json::from_str(&text).map_err(|e| FormatError::MalformedLine {
        file: MANIFEST_FILE.to_string(),
        line: e.line(),
        reason: e.to_string(),
    })?;
    let m = &doc.manifest;
    let mut rates = vec![
        ("nominal_frame_rate_hz", m.nominal_frame_rate_hz),
        ("nominal_imu_rate_hz", m.nominal_imu_rate_hz),
    ];
    if let Some(r) = m.nominal_accel_rate_hz {
        rates.push(("nominal_accel_rate_hz", r));
    }
    for (name, rate) in rates {
        if !rate.is_finite() || rate <= 0.0 {
            return Err(FormatError::MalformedLine {
                file: MANIFEST_FILE.to_string(),
                line: 1,
                reason: format!("{name} must be finite and positive, got {rate}"),
            });
        }
    }
    Ok(doc)
}

/// Reads a session directory into memory.
///
/// Structural problems (bad numbers, wrong arity, out-of-order timestamps)
/// are hard errors; semantic gaps like an empty IMU stream load fine and are
/// left for [`validate_session`] to flag.
pub fn read_session(root: &Path) -> Result<Session, FormatError> {
    let doc = read_manifest_doc(root)?;
    let manifest = doc.manifest;

    let frames = read_frame_rows(root, &doc.files.frames, &manifest.camera_clock)?
        .into_iter()
        .map(|row| row.into_frame())
        .collect();
    let imu_combined = match &doc.files.imu {
        Some(name) => Some(read_imu_csv(root, name, &manifest.imu_clock)?),
        None => None,
    };
    let gyro_raw = match &doc.files.gyro {
        Some(name) => Some(read_raw_csv(root, name, SampleKind::Gyro, &manifest.imu_clock)?),
        None => None,
    };
    let accel_raw = match &doc.files.accel {
        Some(name) => Some(read_raw_csv(root, name, SampleKind::Accel, &manifest.imu_clock)?),
        None => None,
    };
    let clock_marks = match &doc.files.clockmarks {
        Some(name) => read_marks_csv(root, name, &manifest)?,
        None => Vec::new(),
    };

    Ok(Session {
        manifest,
        frames,
        gyro_raw,
        accel_raw,
        imu_combined,
        clock_marks,
    })
}

/// A parsed `frames.csv` row before it becomes a raw or synced frame.
struct FrameRow {
    index: u64,
    t: TimebasedInstant,
    exposure_ns: u64,
    readout_ns: u64,
    focal_px: Option<(f64, f64)>,
    principal_px: Option<(f64, f64)>,
    metadata_source: MetadataSource,
}

impl FrameRow {
    fn into_frame(self) -> FrameRecord {
        FrameRecord {
            index: self.index,
            t_start: self.t,
            exposure_ns: self.exposure_ns,
            readout_ns: self.readout_ns,
            focal_px: self.focal_px,
            principal_px: self.principal_px,
            metadata_source: self.metadata_source,
        }
    }

    fn into_synced(self) -> SyncedFrame {
        SyncedFrame {
            index: self.index,
            t_centered: self.t,
            exposure_ns: self.exposure_ns,
            readout_ns: self.readout_ns,
            focal_px: self.focal_px,
            principal_px: self.principal_px,
            metadata_source: self.metadata_source,
        }
    }
}

fn read_frame_rows(root: &Path, name: &str, clock: &ClockId) -> Result<Vec<FrameRow>, FormatError> {
    let text = read_text(&root.join(name))?;
    let rows = scan_csv(&text, name, FRAMES_HEADER, 9)?;
    let mut out = Vec::with_capacity(rows.len());
    let mut prev: Option<(u64, i64)> = None;
    for row in rows {
        let cx = FieldCx {
            file: name,
            line: row.line,
        };
        let index = cx.u64(row.fields[0], "index")?;
        let t_ns = cx.i64(row.fields[1], "t_start_ns")?;
        let exposure_ns = cx.u64(row.fields[2], "exposure_ns")?;
        let readout_ns = cx.u64(row.fields[3], "readout_ns")?;
        let focal_px = read_pair(&cx, row.fields[4], row.fields[5], "fx", "fy")?;
        let principal_px = read_pair(&cx, row.fields[6], row.fields[7], "cx", "cy")?;
        let metadata_source: MetadataSource =
            row.fields[8].parse().map_err(|e: String| cx.err(e))?;

        if let Some((prev_index, prev_t)) = prev {
            if t_ns <= prev_t {
                return Err(FormatError::NonMonotonicTimestamp {
                    file: name.to_string(),
                    line: row.line,
                });
            }
            if index <= prev_index {
                return Err(cx.err(format!(
                    "index: {index} does not increase past {prev_index}"
                )));
            }
        }
        prev = Some((index, t_ns));
        out.push(FrameRow {
            index,
            t: TimebasedInstant::new(t_ns, clock.clone()),
            exposure_ns,
            readout_ns,
            focal_px,
            principal_px,
            metadata_source,
        });
    }
    Ok(out)
}

fn read_pair(
    cx: &FieldCx<'_>,
    a: &str,
    b: &str,
    a_name: &str,
    b_name: &str,
) -> Result<Option<(f64, f64)>, FormatError> {
    match (cx.opt_f64(a, a_name)?, cx.opt_f64(b, b_name)?) {
        (Some(a), Some(b)) => Ok(Some((a, b))),
        (None, None) => Ok(None),
        _ => Err(cx.err(format!(
            "{a_name} and {b_name} must both be present or both be empty"
        ))),
    }
}

fn read_imu_csv(root: &Path, name: &str, clock: &ClockId) -> Result<Vec<ImuSample>, FormatError> {
    let text = read_text(&root.join(name))?;
    let rows = scan_csv(&text, name, IMU_HEADER, 7)?;
    let mut out = Vec::with_capacity(rows.len());
    let mut prev: Option<i64> = None;
    for row in rows {
        let cx = FieldCx {
            file: name,
            line: row.line,
        };
        let t_ns = cx.i64(row.fields[0], "t_ns")?;
        let mut v = [0.0f64; 6];
        for (slot, (field, label)) in v.iter_mut().zip(
            row.fields[1..]
                .iter()
                .zip(["gx", "gy", "gz", "ax", "ay", "az"]),
        ) {
            *slot = cx.f64(field, label)?;
        }
        if let Some(p) = prev {
            if t_ns <= p {
                return Err(FormatError::NonMonotonicTimestamp {
                    file: name.to_string(),
                    line: row.line,
                });
            }
        }
        prev = Some(t_ns);
        out.push(ImuSample {
            t: TimebasedInstant::new(t_ns, clock.clone()),
            gyro: [v[0], v[1], v[2]],
            accel: [v[3], v[4], v[5]],
        });
    }
    Ok(out)
}

fn read_raw_csv(
    root: &Path,
    name: &str,
    kind: SampleKind,
    clock: &ClockId,
) -> Result<RawSampleStream, FormatError> {
    let text = read_text(&root.join(name))?;
    let rows = scan_csv(&text, name, RAW_HEADER, 4)?;
    let mut samples = Vec::with_capacity(rows.len());
    let mut prev: Option<i64> = None;
    for row in rows {
        let cx = FieldCx {
            file: name,
            line: row.line,
        };
        let t_ns = cx.i64(row.fields[0], "t_ns")?;
        let value = [
            cx.f64(row.fields[1], "x")?,
            cx.f64(row.fields[2], "y")?,
            cx.f64(row.fields[3], "z")?,
        ];
        if let Some(p) = prev {
            if t_ns <= p {
                return Err(FormatError::NonMonotonicTimestamp {
                    file: name.to_string(),
                    line: row.line,
                });
            }
        }
        prev = Some(t_ns);
        samples.push(RawSample { t_ns, value });
    }
    Ok(RawSampleStream::new(kind, clock.clone(), samples))
}

fn read_marks_csv(
    root: &Path,
    name: &str,
    manifest: &DeviceManifest,
) -> Result<Vec<ClockCorrespondence>, FormatError> {
    if manifest.camera_clock == manifest.imu_clock {
        // Marks relate two distinct clocks by definition; a manifest that
        // names one clock twice cannot carry them.
        return Err(ClockMismatch {
            expected: manifest.camera_clock.clone(),
            found: manifest.imu_clock.clone(),
        }
        .into());
    }
    let text = read_text(&root.join(name))?;
    let rows = scan_csv(&text, name, CLOCKMARKS_HEADER, 3)?;
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let cx = FieldCx {
            file: name,
            line: row.line,
        };
        let label: MarkLabel = row.fields[0].parse().map_err(|e: String| cx.err(e))?;
        let t_a = cx.i64(row.fields[1], "t_a_ns")?;
        let t_b = cx.i64(row.fields[2], "t_b_ns")?;
        out.push(
            ClockCorrespondence::new(
                label,
                TimebasedInstant::new(t_a, manifest.camera_clock.clone()),
                TimebasedInstant::new(t_b, manifest.imu_clock.clone()),
            )
            .expect("clocks checked distinct above"),
        );
    }
    Ok(out)
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn render_frames<'a>(frames: impl Iterator<Item = &'a FrameRow2<'a>>) -> String {
    let mut out = String::from(FRAMES_HEADER);
    out.push('\n');
    for f in frames {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            f.index,
            f.t_ns,
            f.exposure_ns,
            f.readout_ns,
            opt_cell(f.focal_px.map(|p| p.0)),
            opt_cell(f.focal_px.map(|p| p.1)),
            opt_cell(f.principal_px.map(|p| p.0)),
            opt_cell(f.principal_px.map(|p| p.1)),
            f.metadata_source,
        ));
    }
    out
}

/// Borrowed view of a frame for rendering; raw and synced frames both reduce
/// to it.
struct FrameRow2<'a> {
    index: u64,
    t_ns: i64,
    exposure_ns: u64,
    readout_ns: u64,
    focal_px: Option<(f64, f64)>,
    principal_px: Option<(f64, f64)>,
    metadata_source: &'a MetadataSource,
}

fn render_imu(samples: &[ImuSample]) -> String {
    let mut out = String::from(IMU_HEADER);
    out.push('\n');
    for s in samples {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            s.t.ns(),
            s.gyro[0],
            s.gyro[1],
            s.gyro[2],
            s.accel[0],
            s.accel[1],
            s.accel[2],
        ));
    }
    out
}

fn render_raw(stream: &RawSampleStream) -> String {
    let mut out = String::from(RAW_HEADER);
    out.push('\n');
    for s in &stream.samples {
        out.push_str(&format!(
            "{},{},{},{}\n",
            s.t_ns, s.value[0], s.value[1], s.value[2]
        ));
    }
    out
}

fn render_marks(marks: &[ClockCorrespondence]) -> String {
    let mut out = String::from(CLOCKMARKS_HEADER);
    out.push('\n');
    for m in marks {
        out.push_str(&format!("{},{},{}\n", m.label, m.t_a.ns(), m.t_b.ns()));
    }
    out
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    let mut json = serde_json::to_string_pretty(value).expect("document serializes");
    json.push('\n');
    write_text(path, &json)
}

/// Writes a session directory.
///
/// Structural violations (ordering, clock mixing, non-finite values) refuse
/// to write; a session whose only problem is missing IMU data is still
/// persisted, so degenerate captures can be stored and inspected. Only the
/// streams present in the session are written, and the manifest lists exactly
/// those files.
pub fn write_session(session: &Session, root: &Path) -> Result<(), FormatError> {
    let blocking: Vec<Violation> = validate_session(session)
        .into_iter()
        .filter(|v| !matches!(v, Violation::MissingImu))
        .collect();
    if !blocking.is_empty() {
        return Err(FormatError::InvalidSession(blocking));
    }

    create_dir(root)?;
    let rows: Vec<FrameRow2> = session
        .frames
        .iter()
        .map(|f| FrameRow2 {
            index: f.index,
            t_ns: f.t_start.ns(),
            exposure_ns: f.exposure_ns,
            readout_ns: f.readout_ns,
            focal_px: f.focal_px,
            principal_px: f.principal_px,
            metadata_source: &f.metadata_source,
        })
        .collect();
    write_text(&root.join(FRAMES_FILE), &render_frames(rows.iter()))?;

    let mut files = FileSet {
        frames: FRAMES_FILE.to_string(),
        imu: None,
        gyro: None,
        accel: None,
        clockmarks: None,
    };
    if let Some(samples) = &session.imu_combined {
        write_text(&root.join(IMU_FILE), &render_imu(samples))?;
        files.imu = Some(IMU_FILE.to_string());
    }
    if let Some(stream) = &session.gyro_raw {
        write_text(&root.join(GYRO_FILE), &render_raw(stream))?;
        files.gyro = Some(GYRO_FILE.to_string());
    }
    if let Some(stream) = &session.accel_raw {
        write_text(&root.join(ACCEL_FILE), &render_raw(stream))?;
        files.accel = Some(ACCEL_FILE.to_string());
    }
    if !session.clock_marks.is_empty() {
        write_text(&root.join(CLOCKMARKS_FILE), &render_marks(&session.clock_marks))?;
        files.clockmarks = Some(CLOCKMARKS_FILE.to_string());
    }

    write_json(
        &root.join(MANIFEST_FILE),
        &ManifestDoc {
            manifest: session.manifest.clone(),
            files,
        },
    )
}

fn check_synced(synced: &SyncedSession) -> Result<(), FormatError> {
    match synced.check() {
        Ok(()) => Ok(()),
        Err(SyncError::NonMonotonicOutput { stream, index }) => Err(FormatError::InvalidSession(
            vec![Violation::NonMonotonic { stream, index }],
        )),
        Err(_) => Err(FormatError::UnsyncedInput),
    }
}

/// Writes a synced session: the standard layout on a single clock (frame
/// timestamps centered) plus the `sync.json` provenance sidecar.
pub fn write_synced_session(synced: &SyncedSession, root: &Path) -> Result<(), FormatError> {
    check_synced(synced)?;
    create_dir(root)?;

    let rows: Vec<FrameRow2> = synced
        .frames
        .iter()
        .map(|f| FrameRow2 {
            index: f.index,
            t_ns: f.t_centered.ns(),
            exposure_ns: f.exposure_ns,
            readout_ns: f.readout_ns,
            focal_px: f.focal_px,
            principal_px: f.principal_px,
            metadata_source: &f.metadata_source,
        })
        .collect();
    write_text(&root.join(FRAMES_FILE), &render_frames(rows.iter()))?;
    write_text(&root.join(IMU_FILE), &render_imu(&synced.imu))?;
    write_json(
        &root.join(SYNC_FILE),
        &SyncDoc {
            target_clock: synced.target_clock.clone(),
            provenance: synced.provenance.clone(),
        },
    )?;
    write_json(
        &root.join(MANIFEST_FILE),
        &ManifestDoc {
            manifest: synced.manifest.clone(),
            files: FileSet {
                frames: FRAMES_FILE.to_string(),
                imu: Some(IMU_FILE.to_string()),
                gyro: None,
                accel: None,
                clockmarks: None,
            },
        },
    )
}

/// Reads a synced session directory. A directory without `sync.json`, or
/// whose manifest still names two clocks, is not synced and fails with
/// [`FormatError::UnsyncedInput`].
pub fn read_synced_session(root: &Path) -> Result<SyncedSession, FormatError> {
    let doc = read_manifest_doc(root)?;
    let manifest = doc.manifest;

    let sync_path = root.join(SYNC_FILE);
    let sync_text = match read_text(&sync_path) {
        Ok(text) => text,
        Err(FormatError::MissingFile { .. }) => return Err(FormatError::UnsyncedInput),
        Err(e) => return Err(e),
    };
    let sync_doc: SyncDoc =
        serde_json::from_str(&sync_text).map_err(|e| FormatError::MalformedLine {
            file: SYNC_FILE.to_string(),
            line: e.line(),
            reason: e.to_string(),
        })?;

    if manifest.camera_clock != manifest.imu_clock
        || sync_doc.target_clock != manifest.imu_clock
    {
        return Err(FormatError::UnsyncedInput);
    }

    let frames = read_frame_rows(root, &doc.files.frames, &sync_doc.target_clock)?
        .into_iter()
        .map(|row| row.into_synced())
        .collect();
    let imu_name = doc.files.imu.ok_or_else(|| FormatError::MissingFile {
        path: root.join(IMU_FILE),
    })?;
    let imu = read_imu_csv(root, &imu_name, &sync_doc.target_clock)?;

    let synced = SyncedSession {
        target_clock: sync_doc.target_clock,
        manifest,
        frames,
        imu,
        provenance: sync_doc.provenance,
    };
    check_synced(&synced)?;
    Ok(synced)
}

/// Exports a synced session into the `imu0/` + `cam0/` layout used by common
/// SLAM pipelines: per-sensor `data.csv` files plus a camera `sensor.yaml`.
pub fn export_slam_layout(synced: &SyncedSession, root: &Path) -> Result<(), FormatError> {
    check_synced(synced)?;
    create_dir(&root.join("imu0"))?;
    create_dir(&root.join("cam0"))?;

    let mut imu_csv = String::from(SLAM_IMU_HEADER);
    imu_csv.push('\n');
    for s in &synced.imu {
        imu_csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            s.t.ns(),
            s.gyro[0],
            s.gyro[1],
            s.gyro[2],
            s.accel[0],
            s.accel[1],
            s.accel[2],
        ));
    }
    write_text(&root.join(SLAM_IMU_DATA), &imu_csv)?;

    let mut cam_csv = String::from(SLAM_CAM_HEADER);
    cam_csv.push('\n');
    for f in &synced.frames {
        cam_csv.push_str(&format!("{},{}\n", f.t_centered.ns(), f.index));
    }
    write_text(&root.join(SLAM_CAM_DATA), &cam_csv)?;
    write_text(&root.join(SLAM_CAM_SENSOR), &render_sensor_yaml(synced))
}

fn render_sensor_yaml(synced: &SyncedSession) -> String {
    let mut out = String::new();
    out.push_str("sensor_type: camera\n");
    out.push_str(&format!("rate_hz: {}\n", synced.manifest.nominal_frame_rate_hz));
    out.push_str(&format!("clock: {}\n", synced.target_clock));
    out.push_str("timestamp_convention: centered-mid-exposure\n");
    if let Some(first) = synced.frames.first() {
        out.push_str(&format!("exposure_ns: {}\n", first.exposure_ns));
        out.push_str(&format!("readout_ns: {}\n", first.readout_ns));
        if let Some((fx, fy)) = first.focal_px {
            out.push_str(&format!("focal_px: [{fx}, {fy}]\n"));
        }
        if let Some((cx, cy)) = first.principal_px {
            out.push_str(&format!("principal_px: [{cx}, {cy}]\n"));
        }
        out.push_str(&format!("metadata_source: {}\n", first.metadata_source));
    }
    out.push_str(&format!("frames: {}\n", synced.frames.len()));
    out
}
