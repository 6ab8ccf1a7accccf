//! Multi-threaded drivers for the core kernels.
//!
//! `EVKIT_THREADS` caps the worker count; unset or `0` lets rayon decide.

use std::sync::Arc;

use evkit_core::evrep::evrep_from_bands;
use evkit_core::{BandAccumulator, CandidateMap, EvRep, Event, EventStream, TemporalMode};
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

pub const THREADS_ENV: &str = "EVKIT_THREADS";

/// Worker count from `EVKIT_THREADS` (0 = automatic).
pub fn configured_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

pub fn thread_pool(threads: usize) -> Arc<ThreadPool> {
    Arc::new(
        ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool"),
    )
}

/// EvRep with the pixel grid split into row bands, one accumulator per band.
/// Events are routed to bands in stream order, so each pixel still sees its
/// events sorted and the result equals [`evkit_core::compute_evrep_streaming`].
pub fn compute_evrep_parallel(stream: &EventStream, mode: TemporalMode, pool: &ThreadPool) -> EvRep {
    let (w, h) = stream.dims();
    let bands = (pool.current_num_threads() * 2).clamp(1, h.max(1) as usize);
    let rows_per = (h as usize).div_ceil(bands).max(1);
    let layout: Vec<(u16, u16)> = (0..h as usize)
        .step_by(rows_per)
        .map(|start| (start as u16, (rows_per.min(h as usize - start)) as u16))
        .collect();
    let mut routed: Vec<Vec<Event>> = vec![Vec::new(); layout.len()];
    for e in stream.events() {
        routed[e.y as usize / rows_per].push(*e);
    }
    let accs: Vec<BandAccumulator> = pool.install(|| {
        layout
            .par_iter()
            .zip(routed.par_iter())
            .map(|(&(start, rows), events)| {
                let mut acc = BandAccumulator::new(w, start, rows);
                acc.extend(events);
                acc
            })
            .collect()
    });
    evrep_from_bands(w, h, &accs, mode).expect("bands tile the grid")
}

/// Evaluates search candidates on a rayon pool; results keep input order.
#[derive(Clone)]
pub struct RayonCandidates {
    pool: Arc<ThreadPool>,
}

impl RayonCandidates {
    pub fn new(pool: Arc<ThreadPool>) -> Self {
        Self { pool }
    }
}

impl CandidateMap for RayonCandidates {
    fn map_losses(&self, candidates: &[f64], loss: &(dyn Fn(f64) -> f64 + Sync)) -> Vec<f64> {
        self.pool
            .install(|| candidates.par_iter().map(|&k| loss(k)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::synthetic_stream;
    use evkit_core::compute_evrep_streaming;

    #[test]
    fn parallel_equals_streaming() {
        let s = synthetic_stream(50_000, 37, 23, 3);
        for threads in [1, 3, 8] {
            let pool = thread_pool(threads);
            for mode in [TemporalMode::Literal, TemporalMode::Conventional] {
                assert_eq!(
                    compute_evrep_parallel(&s, mode, &pool),
                    compute_evrep_streaming(&s, mode)
                );
            }
        }
    }

    #[test]
    fn single_row_grid() {
        let s = synthetic_stream(1000, 64, 1, 1);
        let pool = thread_pool(4);
        assert_eq!(
            compute_evrep_parallel(&s, TemporalMode::Literal, &pool),
            compute_evrep_streaming(&s, TemporalMode::Literal)
        );
    }
}
