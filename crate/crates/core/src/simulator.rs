//! Events from frames by log-intensity threshold crossing: the inverse of
//! [`crate::reconstruct_next`], and the test oracle for the rest of the crate.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::event::{Event, EventStream, Polarity};
use crate::frame_event::{log_offset, CameraModel};
use crate::grid::{check_dims, Frame};
use crate::noise::{inject_noise, NoiseConfig};

/// Ratios `|delta| / theta` this close below an integer count as that integer.
/// Absorbs rounding in `ln`, e.g. `0.3 / 0.1 = 2.9999999999999996`.
const CROSSING_SNAP: f64 = 1e-9;

/// Placement of a pixel's events inside `[t0, t1)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum TimingMode {
    /// `n` events at `t0 + floor((i + 1) (t1 - t0) / (n + 1))`.
    #[default]
    Uniform,
    /// `t0 + 1, t0 + 2, ...`, capped at `t1 - 1`.
    LeadingEdge,
}

/// Timing mode plus optional Gaussian timestamp jitter.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TimingModel {
    pub mode: TimingMode,
    pub jitter_std: f64,
    pub seed: u64,
}

impl TimingModel {
    pub fn new(mode: TimingMode) -> Self {
        Self {
            mode,
            jitter_std: 0.0,
            seed: 0,
        }
    }

    pub fn with_jitter(mut self, jitter_std: f64, seed: u64) -> Self {
        self.jitter_std = jitter_std;
        self.seed = seed;
        self
    }
}

/// Number of threshold crossings for a log change `delta`.
#[inline]
pub(crate) fn crossings(delta: f64, theta: f64) -> u64 {
    libm::floor(delta.abs() / theta + CROSSING_SNAP) as u64
}

fn event_time(mode: TimingMode, t0: u64, t1: u64, i: u64, n: u64) -> u64 {
    match mode {
        TimingMode::Uniform => {
            let span = (t1 - t0) as u128;
            t0 + ((i as u128 + 1) * span / (n as u128 + 1)) as u64
        }
        TimingMode::LeadingEdge => (t0 + 1 + i).min(t1 - 1),
    }
}

fn pair_events(
    f0: &Frame,
    f1: &Frame,
    model: &CameraModel,
    t0: u64,
    t1: u64,
    mode: TimingMode,
    out: &mut Vec<Event>,
) -> Result<()> {
    check_dims(f0.dims(), f1.dims())?;
    check_dims(f0.dims(), model.dims())?;
    if t0 >= t1 {
        return Err(Error::InvalidWindow { t0, t1 });
    }
    let w = f0.width();
    let k = model.k();
    let start = out.len();
    for (i, ((&a, &b), &theta)) in f0
        .values()
        .iter()
        .zip(f1.values())
        .zip(model.theta().values())
        .enumerate()
    {
        let (x, y) = ((i % w as usize) as u16, (i / w as usize) as u16);
        if !(theta > 0.0) {
            return Err(Error::NonPositiveTheta { x, y, value: theta });
        }
        let delta = log_offset(b, k, i, w)? - log_offset(a, k, i, w)?;
        let n = crossings(delta, theta);
        if n == 0 {
            continue;
        }
        let p = if delta > 0.0 {
            Polarity::Positive
        } else {
            Polarity::Negative
        };
        for j in 0..n {
            out.push(Event::new(event_time(mode, t0, t1, j, n), x, y, p));
        }
    }
    out[start..].sort_by_key(|e| e.t);
    Ok(())
}

fn apply_jitter(stream: EventStream, timing: &TimingModel) -> Result<EventStream> {
    if timing.jitter_std == 0.0 {
        return Ok(stream);
    }
    let cfg = NoiseConfig::builder(timing.seed)
        .jitter_std(timing.jitter_std)
        .build()?;
    Ok(inject_noise(&stream, &cfg))
}

/// Per pixel, `delta = ln((f1 + k) / (f0 + k))` yields `floor(|delta| / theta)`
/// events of polarity `sign(delta)`, timed inside `[t0, t1)`. The output
/// window is `[t0, t1]`.
pub fn simulate_pair(
    f0: &Frame,
    f1: &Frame,
    model: &CameraModel,
    t0: u64,
    t1: u64,
    timing: &TimingModel,
) -> Result<EventStream> {
    let mut events = Vec::new();
    pair_events(f0, f1, model, t0, t1, timing.mode, &mut events)?;
    let stream = EventStream::from_parts_unchecked(f0.width(), f0.height(), t0, t1, events);
    apply_jitter(stream, timing)
}

/// Concatenates [`simulate_pair`] over consecutive frames, using each
/// frame's timestamp. Each pair quantizes independently; residuals are not
/// carried across intervals.
pub fn simulate_sequence(
    frames: &[Frame],
    model: &CameraModel,
    timing: &TimingModel,
) -> Result<EventStream> {
    if frames.len() < 2 {
        return Err(Error::NotEnoughFrames(frames.len()));
    }
    if let Some(index) = frames.windows(2).position(|w| w[1].t() <= w[0].t()) {
        return Err(Error::NonIncreasingTimestamps { index: index + 1 });
    }
    let mut events = Vec::new();
    for w in frames.windows(2) {
        pair_events(&w[0], &w[1], model, w[0].t(), w[1].t(), timing.mode, &mut events)?;
    }
    let first = &frames[0];
    let stream = EventStream::from_parts_unchecked(
        first.width(),
        first.height(),
        first.t(),
        frames[frames.len() - 1].t(),
        events,
    );
    apply_jitter(stream, timing)
}
