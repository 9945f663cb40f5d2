//! Sampling-rate and timing-quality diagnostics: inter-sample interval
//! statistics, gap detection against a nominal rate, interval histograms, and
//! a whole-session report.
//!
//! All interval arithmetic is integer nanoseconds; sums use i128 so they are
//! exact for any realistic session length. Variance is accumulated in a
//! single pass (Welford), which stays accurate when intervals cluster tightly
//! around a large mean — the common case for a healthy sensor stream.

use serde::Serialize;
use thiserror::Error;

use crate::model::{MetadataSource, Session};

/// Gaps are intervals longer than `multiplier * nominal_interval`; 1.5 means
/// "at least one missed sample".
pub const DEFAULT_GAP_MULTIPLIER: f64 = 1.5;

/// Histograms span `[0, 3 * nominal_interval)` in this many equal-width bins,
/// plus one overflow bin.
pub const DEFAULT_HISTOGRAM_BINS: usize = 60;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagnosticsError {
    #[error("need at least 2 timestamps for interval analysis, got {got}")]
    TooFewSamples { got: usize },
}

/// Summary statistics over the successive-difference intervals of one stream.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalStats {
    /// Stream these statistics describe, e.g. `frames` or `gyro`.
    pub stream: String,
    /// Number of intervals (one less than the number of timestamps).
    pub count: u64,
    /// Mean interval, from the exact integer sum of intervals.
    pub mean_ns: f64,
    /// Population standard deviation of the intervals.
    pub std_ns: f64,
    pub min_ns: i64,
    pub max_ns: i64,
    pub median_ns: i64,
    /// 99th percentile by the nearest-rank rule.
    pub p99_ns: i64,
    /// `1e9 / nominal_rate_hz`, when a nominal rate is known.
    pub nominal_interval_ns: Option<f64>,
    /// `last - first`; equals the sum of all intervals exactly.
    pub span_ns: i64,
    /// Achieved rate over the full span: `count * 1e9 / (last - first)`.
    pub achieved_rate_hz: f64,
}

/// Computes interval statistics for a strictly increasing timestamp sequence.
pub fn interval_stats(
    stream: &str,
    timestamps_ns: &[i64],
    nominal_rate_hz: Option<f64>,
) -> Result<IntervalStats, DiagnosticsError> {
    if timestamps_ns.len() < 2 {
        return Err(DiagnosticsError::TooFewSamples {
            got: timestamps_ns.len(),
        });
    }

    let mut intervals: Vec<i64> = Vec::with_capacity(timestamps_ns.len() - 1);
    let mut exact_sum: i128 = 0;
    // Welford's single-pass accumulation for the variance.
    let mut running_mean = 0.0f64;
    let mut m2 = 0.0f64;
    for (i, pair) in timestamps_ns.windows(2).enumerate() {
        let dt = pair[1] - pair[0];
        debug_assert!(dt > 0, "timestamps must be strictly increasing");
        intervals.push(dt);
        exact_sum += dt as i128;
        let delta = dt as f64 - running_mean;
        running_mean += delta / (i as f64 + 1.0);
        m2 += delta * (dt as f64 - running_mean);
    }

    let count = intervals.len() as u64;
    let mean_ns = exact_sum as f64 / count as f64;
    let std_ns = (m2 / count as f64).sqrt();

    intervals.sort_unstable();
    let min_ns = intervals[0];
    let max_ns = intervals[intervals.len() - 1];
    let median_ns = nearest_rank(&intervals, 0.50);
    let p99_ns = nearest_rank(&intervals, 0.99);

    let span = timestamps_ns[timestamps_ns.len() - 1] - timestamps_ns[0];
    let achieved_rate_hz = count as f64 * 1e9 / span as f64;

    Ok(IntervalStats {
        stream: stream.to_string(),
        count,
        mean_ns,
        std_ns,
        min_ns,
        max_ns,
        median_ns,
        p99_ns,
        nominal_interval_ns: nominal_rate_hz.map(|r| 1e9 / r),
        span_ns: span,
        achieved_rate_hz,
    })
}

/// Nearest-rank percentile on a sorted slice: the smallest element whose rank
/// is at least `ceil(q * n)`.
fn nearest_rank(sorted: &[i64], q: f64) -> i64 {
    debug_assert!(!sorted.is_empty());
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.saturating_sub(1).min(sorted.len() - 1)]
}

/// One detected recording gap.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Gap {
    /// Timestamp of the last sample before the gap.
    pub start_ns: i64,
    /// Length of the oversized interval.
    pub duration_ns: i64,
}

/// All gaps found in one stream, with the threshold that defined them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    pub gaps: Vec<Gap>,
    pub nominal_interval_ns: f64,
    pub multiplier: f64,
}

impl GapReport {
    pub fn is_clean(&self) -> bool {
        self.gaps.is_empty()
    }
}

/// Flags every interval strictly longer than `multiplier * nominal_interval`.
pub fn detect_gaps(timestamps_ns: &[i64], nominal_interval_ns: f64, multiplier: f64) -> GapReport {
    let threshold = multiplier * nominal_interval_ns;
    let gaps = timestamps_ns
        .windows(2)
        .filter(|pair| (pair[1] - pair[0]) as f64 > threshold)
        .map(|pair| Gap {
            start_ns: pair[0],
            duration_ns: pair[1] - pair[0],
        })
        .collect();
    GapReport {
        gaps,
        nominal_interval_ns,
        multiplier,
    }
}

/// Fixed-width interval histogram: bins over `[0, 3 * nominal)` plus an
/// overflow bin, so every interval of a strictly increasing stream is counted
/// exactly once.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub bins: Vec<HistogramBin>,
    pub nominal_interval_ns: f64,
}

/// One half-open bin `[start_ns, end_ns)`; the final overflow bin is
/// unbounded above and reports the largest observed interval as its end.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HistogramBin {
    pub start_ns: i64,
    pub end_ns: i64,
    pub count: u64,
}

impl Histogram {
    pub fn total_count(&self) -> u64 {
        self.bins.iter().map(|b| b.count).sum()
    }

    /// Renders the histogram as CSV with a `bin_start_ns,bin_end_ns,count`
    /// header, one row per bin.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_start_ns,bin_end_ns,count\n");
        for bin in &self.bins {
            out.push_str(&format!("{},{},{}\n", bin.start_ns, bin.end_ns, bin.count));
        }
        out
    }
}

/// Builds an interval histogram with `bins` equal-width bins over
/// `[0, 3 * nominal_interval_ns)` and one overflow bin.
pub fn interval_histogram(
    timestamps_ns: &[i64],
    nominal_interval_ns: f64,
    bins: usize,
) -> Result<Histogram, DiagnosticsError> {
    if timestamps_ns.len() < 2 {
        return Err(DiagnosticsError::TooFewSamples {
            got: timestamps_ns.len(),
        });
    }
    assert!(bins > 0, "histogram needs at least one bin");
    assert!(
        nominal_interval_ns.is_finite() && nominal_interval_ns > 0.0,
        "nominal interval must be positive"
    );

    let span = 3.0 * nominal_interval_ns;
    let edges: Vec<i64> = (0..=bins)
        .map(|i| crate::sync::round_half_up_ns(i as f64 * span / bins as f64))
        .collect();

    let mut counts = vec![0u64; bins + 1];
    let mut max_interval = 0i64;
    for pair in timestamps_ns.windows(2) {
        let dt = pair[1] - pair[0];
        max_interval = max_interval.max(dt);
        // partition_point returns the first edge > dt; its index minus one is
        // the bin. Intervals at or past the last edge land in overflow.
        let idx = edges.partition_point(|&e| e <= dt);
        counts[(idx.saturating_sub(1)).min(bins)] += 1;
    }

    let mut out = Vec::with_capacity(bins + 1);
    for i in 0..bins {
        out.push(HistogramBin {
            start_ns: edges[i],
            end_ns: edges[i + 1],
            count: counts[i],
        });
    }
    out.push(HistogramBin {
        start_ns: edges[bins],
        end_ns: max_interval.max(edges[bins]),
        count: counts[bins],
    });

    Ok(Histogram {
        bins: out,
        nominal_interval_ns,
    })
}

/// Diagnostics for one stream inside a session report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StreamReport {
    pub name: String,
    pub present: bool,
    /// `None` when the stream is absent or too short to analyze; `note`
    /// explains which.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<IntervalStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gaps: Option<GapReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histogram: Option<Histogram>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// How many frames carry device-measured optics versus fallback defaults.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpticsSummary {
    pub frame_count: u64,
    pub measured: u64,
    pub empirical: u64,
    /// `measured / frame_count`; 0 for a session with no frames.
    pub fraction_measured: f64,
}

/// Timing-quality report over every stream of a session.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SessionReport {
    pub device: String,
    pub os_family: String,
    pub streams: Vec<StreamReport>,
    pub optics: OpticsSummary,
}

/// Builds the full per-stream report for a session.
///
/// Streams that are absent or have fewer than two timestamps get a `note`
/// instead of statistics; this function itself never fails.
pub fn session_report(session: &Session) -> SessionReport {
    let manifest = &session.manifest;
    let accel_rate = manifest
        .nominal_accel_rate_hz
        .unwrap_or(manifest.nominal_imu_rate_hz);

    let frame_ts: Vec<i64> = session.frames.iter().map(|f| f.t_start.ns()).collect();
    let imu_ts: Vec<i64> = session
        .imu_combined
        .as_ref()
        .map(|s| s.iter().map(|x| x.t.ns()).collect())
        .unwrap_or_default();
    let gyro_ts: Vec<i64> = session
        .gyro_raw
        .as_ref()
        .map(|s| s.timestamps().collect())
        .unwrap_or_default();
    let accel_ts: Vec<i64> = session
        .accel_raw
        .as_ref()
        .map(|s| s.timestamps().collect())
        .unwrap_or_default();

    let streams = vec![
        stream_report(
            "frames",
            true,
            &frame_ts,
            manifest.nominal_frame_rate_hz,
        ),
        stream_report(
            "imu",
            session.imu_combined.is_some(),
            &imu_ts,
            manifest.nominal_imu_rate_hz,
        ),
        stream_report(
            "gyro",
            session.gyro_raw.is_some(),
            &gyro_ts,
            manifest.nominal_imu_rate_hz,
        ),
        stream_report("accel", session.accel_raw.is_some(), &accel_ts, accel_rate),
    ];

    let measured = session
        .frames
        .iter()
        .filter(|f| f.metadata_source == MetadataSource::Measured)
        .count() as u64;
    let frame_count = session.frames.len() as u64;
    let optics = OpticsSummary {
        frame_count,
        measured,
        empirical: frame_count - measured,
        fraction_measured: if frame_count == 0 {
            0.0
        } else {
            measured as f64 / frame_count as f64
        },
    };

    SessionReport {
        device: manifest.device.clone(),
        os_family: manifest.os_family.to_string(),
        streams,
        optics,
    }
}

fn stream_report(name: &str, declared: bool, timestamps: &[i64], nominal_rate_hz: f64) -> StreamReport {
    let present = declared && !timestamps.is_empty();
    if !present {
        return StreamReport {
            name: name.to_string(),
            present: false,
            stats: None,
            gaps: None,
            histogram: None,
            note: Some("stream absent".to_string()),
        };
    }
    match interval_stats(name, timestamps, Some(nominal_rate_hz)) {
        Ok(stats) => {
            let nominal = 1e9 / nominal_rate_hz;
            let gaps = detect_gaps(timestamps, nominal, DEFAULT_GAP_MULTIPLIER);
            let histogram = interval_histogram(timestamps, nominal, DEFAULT_HISTOGRAM_BINS).ok();
            StreamReport {
                name: name.to_string(),
                present: true,
                stats: Some(stats),
                gaps: Some(gaps),
                histogram,
                note: None,
            }
        }
        Err(DiagnosticsError::TooFewSamples { got }) => StreamReport {
            name: name.to_string(),
            present: true,
            stats: None,
            gaps: None,
            histogram: None,
            note: Some(format!("too few samples for interval analysis ({got})")),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        ClockId, DeviceManifest, FrameRecord, ImuSample, OsFamily, TimebasedInstant,
    };

    #[test]
    fn three_timestamp_example() {
        let stats = interval_stats("frames", &[0, 33_333_333, 66_666_666], Some(30.0)).unwrap();
        assert_eq!(stats.count, 2);
        assert_eq!(stats.mean_ns, 33_333_333.0);
        assert_eq!(stats.std_ns, 0.0);
        assert_eq!(stats.min_ns, 33_333_333);
        assert_eq!(stats.max_ns, 33_333_333);
        assert_eq!(stats.median_ns, 33_333_333);
        // 2 intervals over 66_666_666 ns: a shade over 30 Hz.
        assert!((stats.achieved_rate_hz - 30.000000300000004).abs() < 1e-9);
    }

    #[test]
    fn too_few_samples_rejected() {
        assert_eq!(
            interval_stats("imu", &[], None),
            Err(DiagnosticsError::TooFewSamples { got: 0 })
        );
        assert_eq!(
            interval_stats("imu", &[42], None),
            Err(DiagnosticsError::TooFewSamples { got: 1 })
        );
    }

    #[test]
    fn jitter_free_stream_has_exact_moments() {
        // 100 Hz for 600 s: every interval exactly 10 ms.
        let ts: Vec<i64> = (0..60_000).map(|k| k * 10_000_000).collect();
        let stats = interval_stats("imu", &ts, Some(100.0)).unwrap();
        assert_eq!(stats.count, 59_999);
        assert_eq!(stats.mean_ns, 1e7);
        assert_eq!(stats.median_ns, 10_000_000);
        assert_eq!(stats.p99_ns, 10_000_000);
        assert_eq!(stats.std_ns, 0.0);
        assert_eq!(stats.achieved_rate_hz, 100.0);
        assert_eq!(stats.nominal_interval_ns, Some(1e7));
    }

    #[test]
    fn welford_std_matches_two_pass_oracle() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut ts = vec![0i64];
        for _ in 0..5000 {
            ts.push(ts.last().unwrap() + 10_000_000 + rng.random_range(-2_000_000..2_000_000));
        }
        let stats = interval_stats("imu", &ts, None).unwrap();

        // Two-pass oracle: mean first, then squared deviations.
        let diffs: Vec<f64> = ts.windows(2).map(|p| (p[1] - p[0]) as f64).collect();
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / diffs.len() as f64;
        let std = var.sqrt();

        assert!((stats.std_ns - std).abs() / std < 1e-9, "{} vs {std}", stats.std_ns);
        assert!((stats.mean_ns - mean).abs() / mean < 1e-12);
        assert_eq!(stats.span_ns, ts[ts.len() - 1] - ts[0]);
    }

    #[test]
    fn interval_sum_is_exact() {
        let ts = [i64::MAX - 10_000, i64::MAX - 100, i64::MAX - 1];
        let stats = interval_stats("imu", &ts, None).unwrap();
        // mean * count must reproduce last - first exactly for exact sums.
        assert_eq!(
            (stats.mean_ns * stats.count as f64) as i64,
            ts[2] - ts[0]
        );
    }

    #[test]
    fn nearest_rank_percentiles() {
        // 100 intervals of 1..=100: p99 is the 99th value, median the 50th.
        let ts: Vec<i64> = std::iter::once(0)
            .chain((1..=100).scan(0i64, |acc, d| {
                *acc += d;
                Some(*acc)
            }))
            .collect();
        let stats = interval_stats("x", &ts, None).unwrap();
        assert_eq!(stats.count, 100);
        assert_eq!(stats.median_ns, 50);
        assert_eq!(stats.p99_ns, 99);
        assert_eq!(stats.max_ns, 100);
    }

    #[test]
    fn gap_detection_finds_planted_gap() {
        // 10 ms cadence with one 100 ms hole after t = 50 ms.
        let mut ts: Vec<i64> = (0..=5).map(|k| k * 10_000_000).collect();
        let resume = 50_000_000 + 100_000_000;
        ts.extend((0..5).map(|k| resume + k * 10_000_000));
        let report = detect_gaps(&ts, 1e7, DEFAULT_GAP_MULTIPLIER);
        assert_eq!(report.gaps.len(), 1);
        assert_eq!(report.gaps[0].start_ns, 50_000_000);
        assert_eq!(report.gaps[0].duration_ns, 100_000_000);
    }

    #[test]
    fn gap_threshold_is_strict() {
        // Interval exactly at the threshold (15 ms = 1.5 * 10 ms) is no gap.
        let ts = [0, 10_000_000, 25_000_000, 35_000_000];
        let report = detect_gaps(&ts, 1e7, 1.5);
        assert!(report.is_clean());

        let ts = [0, 10_000_000, 25_000_001, 35_000_001];
        let report = detect_gaps(&ts, 1e7, 1.5);
        assert_eq!(report.gaps.len(), 1);
        assert_eq!(report.gaps[0].duration_ns, 15_000_001);
    }

    #[test]
    fn gap_count_matches_planted_oracle() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        // Plant gaps at known positions in an otherwise clean 100 Hz stream.
        let mut ts = vec![0i64];
        let mut planted = 0;
        for i in 1..2000 {
            let dt = if i % 401 == 0 {
                planted += 1;
                30_000_000 + rng.random_range(0..5_000_000)
            } else {
                10_000_000 + rng.random_range(-1_000_000..1_000_000)
            };
            ts.push(ts.last().unwrap() + dt);
        }
        let report = detect_gaps(&ts, 1e7, 1.5);
        assert_eq!(report.gaps.len(), planted);

        // An infinite multiplier silences everything.
        assert!(detect_gaps(&ts, 1e7, f64::INFINITY).is_clean());
    }

    #[test]
    fn histogram_counts_every_interval_once() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut ts = vec![0i64];
        for _ in 0..3000 {
            // Mix of normal intervals and overflow-range outliers.
            let dt = if rng.random::<f64>() < 0.01 {
                rng.random_range(40_000_000..200_000_000)
            } else {
                rng.random_range(5_000_000..15_000_000)
            };
            ts.push(ts.last().unwrap() + dt);
        }
        let hist = interval_histogram(&ts, 1e7, DEFAULT_HISTOGRAM_BINS).unwrap();
        assert_eq!(hist.bins.len(), DEFAULT_HISTOGRAM_BINS + 1);
        assert_eq!(hist.total_count(), 3000);
        // Overflow bin holds everything at or past 30 ms.
        let overflow = hist.bins.last().unwrap();
        assert_eq!(overflow.start_ns, 30_000_000);
        let expected_overflow = ts.windows(2).filter(|p| p[1] - p[0] >= 30_000_000).count();
        assert_eq!(overflow.count as usize, expected_overflow);
    }

    #[test]
    fn histogram_bin_edges_partition_the_range() {
        let ts = [0, 5_000_000, 15_000_000, 30_000_000];
        let hist = interval_histogram(&ts, 1e7, 3).unwrap();
        // Edges at 0, 10 ms, 20 ms, 30 ms.
        assert_eq!(hist.bins[0].start_ns, 0);
        assert_eq!(hist.bins[0].end_ns, 10_000_000);
        assert_eq!(hist.bins[0].count, 1); // 5 ms
        assert_eq!(hist.bins[1].count, 2); // 10 ms and 15 ms
        assert_eq!(hist.bins[2].count, 0);
        assert_eq!(hist.bins[3].count, 0); // overflow empty
        assert_eq!(hist.total_count(), 3);

        let csv = hist.to_csv();
        assert!(csv.starts_with("bin_start_ns,bin_end_ns,count\n"));
        assert_eq!(csv.lines().count(), 1 + 4);
    }

    fn session_for_report() -> Session {
        let cam = ClockId::new("monotonic").unwrap();
        let imu_c = ClockId::new("boottime").unwrap();
        let frames = (0..10)
            .map(|i| FrameRecord {
                index: i,
                t_start: TimebasedInstant::new(i as i64 * 33_333_333, cam.clone()),
                exposure_ns: 5_000_000,
                readout_ns: 30_000_000,
                focal_px: None,
                principal_px: None,
                metadata_source: if i < 4 {
                    MetadataSource::Measured
                } else {
                    MetadataSource::EmpiricalDefault
                },
            })
            .collect();
        let imu = (0..50)
            .map(|i| {
                ImuSample::new(
                    TimebasedInstant::new(i * 10_000_000, imu_c.clone()),
                    [0.0; 3],
                    [0.0, 0.0, 9.81],
                )
                .unwrap()
            })
            .collect();
        Session {
            manifest: DeviceManifest {
                device: "report-test".to_string(),
                os_family: OsFamily::Ios,
                nominal_frame_rate_hz: 30.0,
                nominal_imu_rate_hz: 100.0,
                nominal_accel_rate_hz: None,
                camera_clock: cam,
                imu_clock: imu_c,
                video_file: None,
            },
            frames,
            gyro_raw: None,
            accel_raw: None,
            imu_combined: Some(imu),
            clock_marks: Vec::new(),
        }
    }

    #[test]
    fn session_report_covers_all_streams() {
        let report = session_report(&session_for_report());
        assert_eq!(report.device, "report-test");
        assert_eq!(report.os_family, "ios");
        assert_eq!(report.streams.len(), 4);

        let frames = &report.streams[0];
        assert!(frames.present);
        assert_eq!(frames.stats.as_ref().unwrap().count, 9);
        assert!(frames.gaps.as_ref().unwrap().is_clean());
        assert_eq!(
            frames.histogram.as_ref().unwrap().total_count(),
            9
        );

        let gyro = &report.streams[2];
        assert!(!gyro.present);
        assert_eq!(gyro.note.as_deref(), Some("stream absent"));

        assert_eq!(report.optics.frame_count, 10);
        assert_eq!(report.optics.measured, 4);
        assert_eq!(report.optics.empirical, 6);
        assert!((report.optics.fraction_measured - 0.4).abs() < 1e-15);
    }

    #[test]
    fn session_report_notes_short_streams() {
        let mut s = session_for_report();
        s.frames.truncate(1);
        let report = session_report(&s);
        let frames = &report.streams[0];
        assert!(frames.present);
        assert!(frames.stats.is_none());
        assert_eq!(
            frames.note.as_deref(),
            Some("too few samples for interval analysis (1)")
        );
    }

    #[test]
    fn session_report_serializes_to_json() {
        let report = session_report(&session_for_report());
        let json = serde_json::to_string_pretty(&report).unwrap();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["streams"][0]["name"], "frames");
        assert_eq!(value["optics"]["measured"], 4);
        // Absent streams serialize without stats objects.
        assert!(value["streams"][2].get("stats").is_none());
    }
}
