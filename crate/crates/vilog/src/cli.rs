//! Command-line front end: `simulate`, `validate`, `stats`, `sync`, and
//! `export` over session directories.
//!
//! Exit codes are part of the interface:
//!
//! * `0` — success
//! * `1` — the data is readable but wrong: validation violations, missing
//!   clock marks, unsynced input where synced is required
//! * `2` — usage errors: bad flags or bad config values
//! * `3` — I/O and parse errors
//!
//! Informational progress goes to stderr (silenced by `--quiet`);
//! machine-readable results go to stdout and honor `--format json`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::diagnostics::{session_report, SessionReport};
use crate::formats::{
    read_session, read_synced_session, write_session, write_synced_session, export_slam_layout,
    FormatError,
};
use crate::model::{validate_session, ClockId};
use crate::simulator::{
    simulate_raw_session, simulate_session, write_ground_truth_sidecar, MotionProfile, SimConfig,
    SimError, SinusoidParams,
};
use crate::sync::{synchronize_session, SyncError};

pub const EXIT_OK: i32 = 0;
/// Validation failures or violated data contracts.
pub const EXIT_DATA: i32 = 1;
/// Bad flags or bad configuration values.
pub const EXIT_USAGE: i32 = 2;
/// I/O failures and parse errors.
pub const EXIT_IO: i32 = 3;

#[derive(Parser)]
#[command(
    name = "vilog",
    version,
    about = "Visual-inertial session logs: simulate, validate, analyze, synchronize, export"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Suppress informational output on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    /// Seed override for `simulate`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Format for machine-readable results on stdout.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic session with a ground-truth sidecar.
    Simulate(SimulateArgs),
    /// Check a session directory against the format's invariants.
    Validate {
        /// Session directory.
        dir: PathBuf,
    },
    /// Report sampling statistics, gaps, and optics coverage.
    Stats {
        /// Session directory.
        dir: PathBuf,
        /// Also write interval histograms to this CSV file, one
        /// `# stream: <name>` section per stream.
        #[arg(long)]
        hist: Option<PathBuf>,
    },
    /// Fit the camera-to-IMU clock map and write a synced session.
    Sync {
        /// Raw session directory.
        dir: PathBuf,
        /// Destination directory for the synced session.
        #[arg(long)]
        out: PathBuf,
        /// Target clock name; defaults to the session's IMU clock.
        #[arg(long)]
        target_clock: Option<String>,
    },
    /// Convert a synced session to the imu0/cam0 SLAM layout.
    Export {
        /// Synced session directory (as produced by `sync`).
        dir: PathBuf,
        /// Destination directory for the export.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// Destination directory for the session.
    #[arg(long)]
    out: PathBuf,
    /// Flat `key = value` config file; the flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Emit the raw gyro/accel layout instead of a combined IMU stream.
    #[arg(long)]
    raw: bool,
    #[arg(long)]
    duration_s: Option<f64>,
    #[arg(long)]
    imu_rate_hz: Option<f64>,
    #[arg(long)]
    frame_rate_hz: Option<f64>,
    #[arg(long)]
    exposure_ns: Option<u64>,
    #[arg(long)]
    readout_ns: Option<u64>,
    #[arg(long)]
    camera_clock_offset_ns: Option<i64>,
    #[arg(long)]
    camera_clock_drift_ppm: Option<f64>,
    #[arg(long)]
    timestamp_jitter_std_ns: Option<f64>,
    #[arg(long)]
    dropout_prob: Option<f64>,
}

/// A command failure carrying its exit code; the message is printed to
/// stderr by [`run`].
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        let code = match &e {
            FormatError::UnsyncedInput | FormatError::InvalidSession(_) => EXIT_DATA,
            _ => EXIT_IO,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<SyncError> for Failure {
    fn from(e: SyncError) -> Self {
        let message = match &e {
            SyncError::InvalidSession(violations) => {
                let detail: Vec<String> = violations.iter().take(3).map(|v| v.to_string()).collect();
                format!("{e}: {}", detail.join("; "))
            }
            _ => e.to_string(),
        };
        Failure::new(EXIT_DATA, message)
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        Failure::new(EXIT_USAGE, e.to_string())
    }
}

/// Parses `argv` and runs one command, returning the process exit code.
/// Never panics on user input and never calls `std::process::exit` itself.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };

    let outcome = match &cli.command {
        Command::Simulate(args) => cmd_simulate(&cli, args),
        Command::Validate { dir } => cmd_validate(&cli, dir),
        Command::Stats { dir, hist } => cmd_stats(&cli, dir, hist.as_deref()),
        Command::Sync {
            dir,
            out,
            target_clock,
        } => cmd_sync(&cli, dir, out, target_clock.as_deref()),
        Command::Export { dir, out } => cmd_export(&cli, dir, out),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn info(cli: &Cli, message: impl AsRef<str>) {
    if !cli.quiet {
        eprintln!("{}", message.as_ref());
    }
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> Result<i32, Failure> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Failure::new(EXIT_IO, format!("cannot read config {}: {e}", path.display()))
            })?;
            parse_sim_config(&text, &path.display().to_string())?
        }
        None => SimConfig::default(),
    };

    if let Some(v) = cli.seed {
        config.seed = v;
    }
    macro_rules! override_field {
        ($($field:ident),+) => {
            $(if let Some(v) = args.$field { config.$field = v; })+
        };
    }
    override_field!(
        duration_s,
        imu_rate_hz,
        frame_rate_hz,
        exposure_ns,
        readout_ns,
        camera_clock_offset_ns,
        camera_clock_drift_ppm,
        timestamp_jitter_std_ns,
        dropout_prob
    );

    let (session, truth) = if args.raw {
        simulate_raw_session(&config)?
    } else {
        simulate_session(&config)?
    };
    write_session(&session, &args.out)?;
    write_ground_truth_sidecar(&truth, &args.out).map_err(|e| {
        Failure::new(
            EXIT_IO,
            format!("cannot write ground truth sidecar: {e}"),
        )
    })?;

    let imu_count = session
        .imu_combined
        .as_ref()
        .map(|s| s.len())
        .unwrap_or_else(|| {
            session.gyro_raw.as_ref().map_or(0, |s| s.samples.len())
                + session.accel_raw.as_ref().map_or(0, |s| s.samples.len())
        });
    info(
        cli,
        format!(
            "simulated {} frames and {} inertial samples into {}",
            session.frames.len(),
            imu_count,
            args.out.display()
        ),
    );
    info(
        cli,
        format!(
            "camera offset {} ns, drift {} ppm, seed {}",
            config.camera_clock_offset_ns, config.camera_clock_drift_ppm, config.seed
        ),
    );
    if cli.format == OutputFormat::Json {
        let summary = serde_json::json!({
            "out": args.out.display().to_string(),
            "frames": session.frames.len(),
            "inertial_samples": imu_count,
            "dropped_frames": truth.dropped_frames,
            "dropped_imu": truth.dropped_imu,
            "seed": config.seed,
        });
        println!("{summary}");
    }
    Ok(EXIT_OK)
}

fn cmd_validate(cli: &Cli, dir: &Path) -> Result<i32, Failure> {
    let session = read_session(dir)?;
    let violations = validate_session(&session);
    match cli.format {
        OutputFormat::Text => {
            for v in &violations {
                println!("violation: {v}");
            }
        }
        OutputFormat::Json => {
            let messages: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            let doc = serde_json::json!({
                "valid": violations.is_empty(),
                "violations": messages,
            });
            println!("{doc}");
        }
    }
    if violations.is_empty() {
        info(cli, format!("{}: ok", dir.display()));
        Ok(EXIT_OK)
    } else {
        info(
            cli,
            format!("{}: {} violation(s)", dir.display(), violations.len()),
        );
        Ok(EXIT_DATA)
    }
}

fn render_report_text(report: &SessionReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("device: {} ({})\n", report.device, report.os_family));
    for stream in &report.streams {
        match (&stream.stats, &stream.note) {
            (Some(stats), _) => {
                let gaps = stream.gaps.as_ref().map_or(0, |g| g.gaps.len());
                out.push_str(&format!(
                    "stream {}: count={} mean_ms={:.3} std_ms={:.3} min_ms={:.3} max_ms={:.3} \
                     median_ms={:.3} p99_ms={:.3} rate_hz={:.3} gaps={}\n",
                    stream.name,
                    stats.count,
                    stats.mean_ns / 1e6,
                    stats.std_ns / 1e6,
                    stats.min_ns as f64 / 1e6,
                    stats.max_ns as f64 / 1e6,
                    stats.median_ns as f64 / 1e6,
                    stats.p99_ns as f64 / 1e6,
                    stats.achieved_rate_hz,
                    gaps,
                ));
            }
            (None, Some(note)) => {
                out.push_str(&format!("stream {}: {note}\n", stream.name));
            }
            (None, None) => {}
        }
    }
    out.push_str(&format!(
        "optics: {} frames, {} measured, {} empirical ({:.1}% measured)\n",
        report.optics.frame_count,
        report.optics.measured,
        report.optics.empirical,
        report.optics.fraction_measured * 100.0,
    ));
    out
}

fn cmd_stats(cli: &Cli, dir: &Path, hist: Option<&Path>) -> Result<i32, Failure> {
    let session = read_session(dir)?;
    let report = session_report(&session);

    match cli.format {
        OutputFormat::Text => print!("{}", render_report_text(&report)),
        OutputFormat::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
        }
    }

    if let Some(path) = hist {
        let mut out = String::new();
        for stream in &report.streams {
            if let Some(histogram) = &stream.histogram {
                out.push_str(&format!("# stream: {}\n", stream.name));
                out.push_str(&histogram.to_csv());
            }
        }
        std::fs::write(path, out).map_err(|e| {
            Failure::new(
                EXIT_IO,
                format!("cannot write histogram {}: {e}", path.display()),
            )
        })?;
        info(cli, format!("histograms written to {}", path.display()));
    }
    Ok(EXIT_OK)
}

fn cmd_sync(
    cli: &Cli,
    dir: &Path,
    out: &Path,
    target_clock: Option<&str>,
) -> Result<i32, Failure> {
    let session = read_session(dir)?;
    let target = match target_clock {
        Some(name) => {
            ClockId::new(name).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?
        }
        None => session.manifest.imu_clock.clone(),
    };
    let synced = synchronize_session(&session, &target)?;
    write_synced_session(&synced, out)?;

    let map = &synced.provenance.applied_map;
    info(
        cli,
        format!(
            "applied map {} -> {}: scale {}, offset {} ns",
            map.from_clock(),
            map.to_clock(),
            map.scale(),
            map.offset_ns()
        ),
    );
    if synced.provenance.interpolated {
        info(
            cli,
            format!(
                "rebuilt IMU stream by interpolation ({} gyro epochs dropped)",
                synced.provenance.dropped_gyro_epochs
            ),
        );
    }
    info(cli, format!("synced session written to {}", out.display()));

    match cli.format {
        OutputFormat::Text => {
            println!(
                "target_clock={} scale={} offset_ns={} interpolated={} dropped_gyro_epochs={}",
                synced.target_clock,
                map.scale(),
                map.offset_ns(),
                synced.provenance.interpolated,
                synced.provenance.dropped_gyro_epochs,
            );
        }
        OutputFormat::Json => {
            let doc = serde_json::json!({
                "target_clock": synced.target_clock.as_str(),
                "map": &synced.provenance.applied_map,
                "interpolated": synced.provenance.interpolated,
                "dropped_gyro_epochs": synced.provenance.dropped_gyro_epochs,
                "frames": synced.frames.len(),
                "imu_samples": synced.imu.len(),
            });
            println!("{doc}");
        }
    }
    Ok(EXIT_OK)
}

fn cmd_export(cli: &Cli, dir: &Path, out: &Path) -> Result<i32, Failure> {
    let synced = read_synced_session(dir)?;
    export_slam_layout(&synced, out)?;
    info(
        cli,
        format!(
            "exported {} frames and {} IMU samples to {}",
            synced.frames.len(),
            synced.imu.len(),
            out.display()
        ),
    );
    if cli.format == OutputFormat::Json {
        let doc = serde_json::json!({
            "out": out.display().to_string(),
            "cam_rows": synced.frames.len(),
            "imu_rows": synced.imu.len(),
        });
        println!("{doc}");
    }
    Ok(EXIT_OK)
}

/// Parses the flat `key = value` simulate config format. Unknown keys,
/// syntax errors, and unparseable numbers are parse failures (exit 3);
/// out-of-range values surface later as usage errors when the config is
/// validated.
fn parse_sim_config(text: &str, file: &str) -> Result<SimConfig, Failure> {
    let mut config = SimConfig::default();
    let mut gyro = SinusoidParams::zero();
    let mut accel = SinusoidParams::zero();
    let mut motion: Option<String> = None;
    let mut saw_sinusoid_key = false;

    let parse_err = |line: usize, reason: String| {
        Failure::new(EXIT_IO, format!("{file}:{line}: {reason}"))
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(line_no, format!("expected `key = value`, found `{line}`")))?;
        let key = key.trim();
        let value = value.trim();

        let f64_value = || -> Result<f64, Failure> {
            value
                .parse()
                .map_err(|_| parse_err(line_no, format!("{key}: `{value}` is not a number")))
        };
        let u64_value = || -> Result<u64, Failure> {
            value.parse().map_err(|_| {
                parse_err(line_no, format!("{key}: `{value}` is not a non-negative integer"))
            })
        };
        let i64_value = || -> Result<i64, Failure> {
            value
                .parse()
                .map_err(|_| parse_err(line_no, format!("{key}: `{value}` is not an integer")))
        };
        let triple_value = || -> Result<[f64; 3], Failure> {
            let parts: Vec<&str> = value.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(parse_err(
                    line_no,
                    format!("{key}: expected three comma-separated numbers, found `{value}`"),
                ));
            }
            let mut out = [0.0; 3];
            for (slot, part) in out.iter_mut().zip(&parts) {
                *slot = part.parse().map_err(|_| {
                    parse_err(line_no, format!("{key}: `{part}` is not a number"))
                })?;
            }
            Ok(out)
        };

        match key {
            "duration_s" => config.duration_s = f64_value()?,
            "imu_rate_hz" => config.imu_rate_hz = f64_value()?,
            "frame_rate_hz" => config.frame_rate_hz = f64_value()?,
            "exposure_ns" => config.exposure_ns = u64_value()?,
            "readout_ns" => config.readout_ns = u64_value()?,
            "camera_clock_offset_ns" => config.camera_clock_offset_ns = i64_value()?,
            "camera_clock_drift_ppm" => config.camera_clock_drift_ppm = f64_value()?,
            "timestamp_jitter_std_ns" => config.timestamp_jitter_std_ns = f64_value()?,
            "dropout_prob" => config.dropout_prob = f64_value()?,
            "seed" => config.seed = u64_value()?,
            "motion" => match value {
                "static-gravity" | "sinusoidal" => motion = Some(value.to_string()),
                other => {
                    return Err(parse_err(
                        line_no,
                        format!(
                            "motion: `{other}` is not `static-gravity` or `sinusoidal`"
                        ),
                    ))
                }
            },
            "gyro_amplitude" => {
                gyro.amplitude = triple_value()?;
                saw_sinusoid_key = true;
            }
            "gyro_frequency_hz" => {
                gyro.frequency_hz = triple_value()?;
                saw_sinusoid_key = true;
            }
            "gyro_phase_rad" => {
                gyro.phase_rad = triple_value()?;
                saw_sinusoid_key = true;
            }
            "accel_amplitude" => {
                accel.amplitude = triple_value()?;
                saw_sinusoid_key = true;
            }
            "accel_frequency_hz" => {
                accel.frequency_hz = triple_value()?;
                saw_sinusoid_key = true;
            }
            "accel_phase_rad" => {
                accel.phase_rad = triple_value()?;
                saw_sinusoid_key = true;
            }
            other => {
                return Err(parse_err(line_no, format!("unknown key `{other}`")));
            }
        }
    }

    match motion.as_deref() {
        Some("sinusoidal") => config.motion = MotionProfile::Sinusoidal { gyro, accel },
        Some(_) | None if saw_sinusoid_key => {
            return Err(Failure::new(
                EXIT_IO,
                format!("{file}: sinusoid parameters require `motion = sinusoidal`"),
            ));
        }
        _ => {}
    }
    Ok(config)
}
