//! Throughput measurement for the EvRep kernels. File I/O stays outside the
//! timed region; the reported figure is the median over repeats.

use std::fmt;
use std::hint::black_box;
use std::time::Instant;

use evkit_core::{compute_evrep, compute_evrep_streaming, Event, EventStream, Polarity, TemporalMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum BenchPath {
    /// Per-channel reference computation (events grouped by pixel).
    Reference,
    /// Single pass with per-pixel accumulators.
    Streaming,
}

impl fmt::Display for BenchPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchPath::Reference => "reference",
            BenchPath::Streaming => "streaming",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub path: BenchPath,
    pub events_processed: usize,
    pub repeats: usize,
    /// Median seconds per run.
    pub wall_time: f64,
    /// Kilo-events per second at the median run time.
    pub throughput: f64,
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "path={}", self.path)?;
        writeln!(f, "events_processed={}", self.events_processed)?;
        writeln!(f, "repeats={}", self.repeats)?;
        writeln!(f, "wall_time_s={:.9}", self.wall_time)?;
        writeln!(f, "throughput_kev_s={:.3}", self.throughput)
    }
}

/// Runs `path` `repeats` times on `stream`.
pub fn run_bench(
    stream: &EventStream,
    path: BenchPath,
    mode: TemporalMode,
    repeats: usize,
) -> Result<BenchReport> {
    if repeats == 0 {
        return Err(Error::Invalid("repeat count must be at least 1".into()));
    }
    let mut times: Vec<f64> = (0..repeats)
        .map(|_| {
            let start = Instant::now();
            let rep = match path {
                BenchPath::Reference => compute_evrep(black_box(stream), mode),
                BenchPath::Streaming => compute_evrep_streaming(black_box(stream), mode),
            };
            black_box(rep);
            start.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    let mid = times.len() / 2;
    let wall_time = if times.len() % 2 == 1 {
        times[mid]
    } else {
        0.5 * (times[mid - 1] + times[mid])
    }
    .max(f64::MIN_POSITIVE);
    Ok(BenchReport {
        path,
        events_processed: stream.len(),
        repeats,
        wall_time,
        throughput: stream.len() as f64 / wall_time / 1000.0,
    })
}

/// `count` events at uniformly random pixels with uniform random polarity;
/// timestamps increase by 0..=3 microseconds per event.
pub fn synthetic_stream(count: usize, width: u16, height: u16, seed: u64) -> EventStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = 0u64;
    let events: Vec<Event> = (0..count)
        .map(|_| {
            t += rng.random_range(0..=3);
            let p = if rng.random::<bool>() {
                Polarity::Positive
            } else {
                Polarity::Negative
            };
            Event::new(t, rng.random_range(0..width), rng.random_range(0..height), p)
        })
        .collect();
    EventStream::new(width, height, 0, t, events).expect("synthetic stream is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_fields_consistent() {
        let s = synthetic_stream(10_000, 32, 32, 1);
        let r = run_bench(&s, BenchPath::Streaming, TemporalMode::Literal, 1).unwrap();
        assert_eq!(r.events_processed, 10_000);
        assert!(r.wall_time > 0.0);
        let expected = r.events_processed as f64 / r.wall_time / 1000.0;
        assert!((r.throughput - expected).abs() <= 1e-9 * expected);
        assert!(run_bench(&s, BenchPath::Reference, TemporalMode::Literal, 0).is_err());
    }

    #[test]
    fn key_value_output() {
        let s = synthetic_stream(100, 4, 4, 2);
        let text = run_bench(&s, BenchPath::Reference, TemporalMode::Literal, 3)
            .unwrap()
            .to_string();
        for key in ["path=reference", "events_processed=100", "repeats=3", "wall_time_s=", "throughput_kev_s="] {
            assert!(text.contains(key), "{text}");
        }
    }
}
