//! Event-camera stream statistics and the frame/event reconstruction model.
//!
//! The crate is `no_std` with `alloc`. It contains the pure numerical parts:
//!
//! - [`event`]: events, streams and stream transforms (slicing, reversal, rotation).
//! - [`noise`]: seeded noise injection (background activity, holes, jitter, count dispersion).
//! - [`evrep`]: the three-channel EvRep representation (polarity integral, count,
//!   inter-event interval spread), with a two-pass reference and a single-pass
//!   accumulator path.
//! - [`frame_event`]: reconstruction of the next (or previous) frame from a
//!   frame, a polarity integral and a [`CameraModel`].
//! - [`simulator`]: the inverse model, events from a frame pair by threshold crossing.
//! - [`estimate`]: per-pixel threshold and offset estimation and the
//!   five-channel EvRepSL representation.
//!
//! File formats, parallel drivers and the CLI live in the `evkit` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
mod grid;
mod math;
mod search;

pub mod estimate;
pub mod event;
pub mod evrep;
pub mod frame_event;
pub mod noise;
pub mod simulator;

pub use error::{Error, Result};
pub use estimate::{
    assemble_evrepsl, estimate_k, estimate_k_with, estimate_theta_given_k, fit_camera,
    fit_camera_with, refine_integral, refine_integral_frames, CandidateMap, EvRepSL, FitReport, KEstimate, SearchConfig,
    Sequential, TrainingPair,
};
pub use event::{Event, EventStream, Polarity};
pub use evrep::{
    compute_e_c, compute_e_i, compute_e_t, compute_evrep, compute_evrep_streaming, evrep_from_bands,
    temporal_from_sums, BandAccumulator, EvRep, TemporalMode,
};
pub use frame_event::{
    log_intensity_ratio, reconstruct_next, reconstruct_prev, reconstruction_error,
    reconstruction_mae, CameraModel, MaeReport, Reconstruction,
};
pub use grid::{ChannelField, ChannelKind, Frame};
pub use noise::{inject_noise, NoiseConfig, NoiseConfigBuilder};
pub use simulator::{simulate_pair, simulate_sequence, TimingMode, TimingModel};
