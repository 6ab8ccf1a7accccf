//! Seeded noise injection covering four sensor noise forms: background
//! activity, holes (dropped events), timestamp jitter and stochastic counts.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::error::{Error, Result};
use crate::event::{Event, EventStream, Polarity};

/// Validated noise parameters. Build with [`NoiseConfig::builder`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseConfig {
    ba_rate: f64,
    hole_prob: f64,
    jitter_std: f64,
    count_dispersion: f64,
    seed: u64,
}

impl NoiseConfig {
    /// Identity configuration: every noise form disabled.
    pub fn none(seed: u64) -> Self {
        Self {
            ba_rate: 0.0,
            hole_prob: 0.0,
            jitter_std: 0.0,
            count_dispersion: 0.0,
            seed,
        }
    }

    pub fn builder(seed: u64) -> NoiseConfigBuilder {
        NoiseConfigBuilder {
            cfg: Self::none(seed),
        }
    }

    /// Background-activity rate, events per pixel per second.
    pub fn ba_rate(&self) -> f64 {
        self.ba_rate
    }

    pub fn hole_prob(&self) -> f64 {
        self.hole_prob
    }

    /// Timestamp jitter standard deviation in microseconds.
    pub fn jitter_std(&self) -> f64 {
        self.jitter_std
    }

    pub fn count_dispersion(&self) -> f64 {
        self.count_dispersion
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_identity(&self) -> bool {
        self.ba_rate == 0.0
            && self.hole_prob == 0.0
            && self.jitter_std == 0.0
            && self.count_dispersion == 0.0
    }
}

#[derive(Clone, Debug)]
pub struct NoiseConfigBuilder {
    cfg: NoiseConfig,
}

impl NoiseConfigBuilder {
    pub fn ba_rate(mut self, events_per_pixel_second: f64) -> Self {
        self.cfg.ba_rate = events_per_pixel_second;
        self
    }

    pub fn hole_prob(mut self, p: f64) -> Self {
        self.cfg.hole_prob = p;
        self
    }

    pub fn jitter_std(mut self, micros: f64) -> Self {
        self.cfg.jitter_std = micros;
        self
    }

    pub fn count_dispersion(mut self, d: f64) -> Self {
        self.cfg.count_dispersion = d;
        self
    }

    pub fn build(self) -> Result<NoiseConfig> {
        let c = self.cfg;
        let non_negative = |v: f64| v.is_finite() && v >= 0.0;
        if !non_negative(c.ba_rate) {
            return Err(Error::InvalidNoiseConfig("ba_rate must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&c.hole_prob) {
            return Err(Error::InvalidNoiseConfig("hole_prob must be in [0, 1]"));
        }
        if !non_negative(c.jitter_std) {
            return Err(Error::InvalidNoiseConfig("jitter_std must be finite and >= 0"));
        }
        if !non_negative(c.count_dispersion) {
            return Err(Error::InvalidNoiseConfig(
                "count_dispersion must be finite and >= 0",
            ));
        }
        Ok(c)
    }
}

fn random_polarity(rng: &mut ChaCha8Rng) -> Polarity {
    if rng.random::<bool>() {
        Polarity::Positive
    } else {
        Polarity::Negative
    }
}

/// Applies holes, count dispersion, jitter and background activity, in that
/// order, then stably re-sorts. The window is unchanged; output is a pure
/// function of the input and `cfg` (including its seed).
///
/// Count dispersion: each pixel holding at least one event is perturbed with
/// probability `min(count_dispersion, 1)`; a fair coin then either inserts a
/// copy of one of its events shifted by one tick, or removes one of them.
pub fn inject_noise(stream: &EventStream, cfg: &NoiseConfig) -> EventStream {
    if cfg.is_identity() {
        return stream.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (t_start, t_end) = (stream.t_start(), stream.t_end());
    let mut events: Vec<Event> = stream.events().to_vec();

    if cfg.hole_prob > 0.0 {
        events.retain(|_| rng.random::<f64>() >= cfg.hole_prob);
    }

    if cfg.count_dispersion > 0.0 && !events.is_empty() {
        let prob = cfg.count_dispersion.min(1.0);
        let pixels = stream.pixel_count();
        let width = stream.width() as usize;
        // bucket event indices per pixel, pixel-major
        let mut starts = alloc::vec![0usize; pixels + 1];
        for e in &events {
            starts[e.y as usize * width + e.x as usize + 1] += 1;
        }
        for i in 0..pixels {
            starts[i + 1] += starts[i];
        }
        let mut fill = starts.clone();
        let mut order = alloc::vec![0usize; events.len()];
        for (i, e) in events.iter().enumerate() {
            let px = e.y as usize * width + e.x as usize;
            order[fill[px]] = i;
            fill[px] += 1;
        }
        let mut removed = alloc::vec![false; events.len()];
        let mut added = Vec::new();
        for px in 0..pixels {
            let bucket = &order[starts[px]..starts[px + 1]];
            if bucket.is_empty() || rng.random::<f64>() >= prob {
                continue;
            }
            let pick = bucket[rng.random_range(0..bucket.len())];
            if rng.random::<bool>() {
                let src = events[pick];
                let t = if rng.random::<bool>() {
                    src.t.saturating_add(1).min(t_end)
                } else {
                    src.t.saturating_sub(1).max(t_start)
                };
                added.push(Event::new(t, src.x, src.y, src.p));
            } else {
                removed[pick] = true;
            }
        }
        let mut idx = 0;
        events.retain(|_| {
            let keep = !removed[idx];
            idx += 1;
            keep
        });
        events.extend(added);
    }

    if cfg.jitter_std > 0.0 {
        let normal = Normal::new(0.0, cfg.jitter_std).expect("validated jitter_std");
        for e in events.iter_mut() {
            let t = e.t as f64 + normal.sample(&mut rng);
            let t = libm::round(t).clamp(t_start as f64, t_end as f64);
            e.t = t as u64;
        }
    }

    if cfg.ba_rate > 0.0 {
        let duration_s = (t_end - t_start) as f64 * 1e-6;
        let lambda = cfg.ba_rate * duration_s;
        if lambda > 0.0 {
            let poisson = Poisson::new(lambda).expect("positive finite rate");
            for y in 0..stream.height() {
                for x in 0..stream.width() {
                    let n = poisson.sample(&mut rng) as u64;
                    for _ in 0..n {
                        let t = rng.random_range(t_start..=t_end);
                        events.push(Event::new(t, x, y, random_polarity(&mut rng)));
                    }
                }
            }
        }
    }

    events.sort_by_key(|e| e.t);
    EventStream::from_parts_unchecked(stream.width(), stream.height(), t_start, t_end, events)
}
