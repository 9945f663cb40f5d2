//! Toolkit for visual-inertial sensor recordings: an on-disk session layout,
//! strict parsing and validation, camera–IMU clock synchronization, sampling
//! diagnostics, a deterministic simulator with ground truth, and a SLAM-style
//! export.
//!
//! A session pairs rolling-shutter camera frame metadata with inertial
//! streams that were stamped by a different clock. The crate's job is to make
//! those streams commensurable: fit the affine map between the clocks from
//! recorded correspondence marks, center frame timestamps mid-exposure, and
//! align accelerometer readings onto gyroscope epochs — then prove the result
//! against simulated sessions whose true alignment is known exactly.
//!
//! Start with [`simulator::simulate_session`] to produce data, or
//! [`formats::read_session`] to load a directory; the `examples/` directory
//! walks through every major workflow end to end.

pub mod cli;
pub mod diagnostics;
pub mod formats;
pub mod model;
pub mod simulator;
pub mod sync;

pub use model::{
    ClockId, ClockMismatch, DeviceManifest, FrameRecord, ImuSample, RawSampleStream, Session,
    TimebasedInstant, Violation,
};
pub use sync::{ClockMap, SyncedSession};
