//! Synthetic frame/event corpora shared by the integration tests.
#![allow(dead_code)]

use evkit_core::{simulate_pair, CameraModel, Frame, TimingModel, TrainingPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const INTERVAL_US: u64 = 50_000;
pub const PAIR_SPACING_US: u64 = 100_000;

/// Sum of a few random low-frequency sinusoids, scaled into `[lo, hi]`.
pub fn smooth_field(w: u16, h: u16, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Vec<f64> {
    let waves: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(0.5..2.5),
                rng.random_range(0.5..2.5),
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(0.3..1.0),
            )
        })
        .collect();
    let norm: f64 = waves.iter().map(|w| w.3).sum();
    let mut out = Vec::with_capacity(w as usize * h as usize);
    for y in 0..h {
        for x in 0..w {
            let (u, v) = (x as f64 / w as f64, y as f64 / h as f64);
            let s: f64 = waves
                .iter()
                .map(|&(a, b, ph, amp)| amp * (std::f64::consts::TAU * (a * u + b * v) + ph).sin())
                .sum();
            out.push(lo + (hi - lo) * 0.5 * (1.0 + s / norm));
        }
    }
    out
}

fn pair_from(f0: Frame, f1: Frame, model: &CameraModel) -> TrainingPair {
    let s = simulate_pair(&f0, &f1, model, f0.t(), f1.t(), &TimingModel::default()).unwrap();
    TrainingPair::new(f0, f1, s).unwrap()
}

/// Smooth pairs whose per-pixel log change is a whole number of thresholds,
/// so closed-form estimates are exact at the true parameters.
pub fn lattice_corpus(pairs: usize, w: u16, h: u16, theta: f64, k: f64, seed: u64) -> Vec<TrainingPair> {
    let model = CameraModel::uniform(w, h, theta, k).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..pairs)
        .map(|i| {
            let t0 = i as u64 * PAIR_SPACING_US;
            let base = smooth_field(w, h, &mut rng, 0.1, 0.9);
            let steps = smooth_field(w, h, &mut rng, -12.0, 12.0);
            let v1: Vec<f64> = base
                .iter()
                .zip(&steps)
                .map(|(&f, &s)| {
                    let lo = ((k / (f + k)).ln() / theta).ceil();
                    let hi = (((1.0 + k) / (f + k)).ln() / theta).floor();
                    let n = s.round().clamp(lo, hi);
                    ((f + k) * (n * theta).exp() - k).clamp(0.0, 1.0)
                })
                .collect();
            let f0 = Frame::new(w, h, base, t0).unwrap();
            let f1 = Frame::new(w, h, v1, t0 + INTERVAL_US).unwrap();
            pair_from(f0, f1, &model)
        })
        .collect()
}

/// Smooth pairs with unconstrained log change (non-zero quantization residuals).
pub fn smooth_corpus(pairs: usize, w: u16, h: u16, theta: f64, k: f64, seed: u64) -> Vec<TrainingPair> {
    let model = CameraModel::uniform(w, h, theta, k).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..pairs)
        .map(|i| {
            let t0 = i as u64 * PAIR_SPACING_US;
            let f0 = Frame::new(w, h, smooth_field(w, h, &mut rng, 0.05, 0.95), t0).unwrap();
            let f1 = Frame::new(w, h, smooth_field(w, h, &mut rng, 0.05, 0.95), t0 + INTERVAL_US).unwrap();
            pair_from(f0, f1, &model)
        })
        .collect()
}
