//! Threshold and offset estimation by minimizing reconstruction error.
//!
//! Given `k`, the threshold at a pixel with nonzero integral follows in
//! closed form from the reconstruction relation:
//!
//! ```text
//! theta = ln((f1 + k) / (f0 + k)) / E_I
//! ```
//!
//! so the only free parameter left is the scalar `k`. It is found by a coarse
//! grid followed by golden-section refinement of the mean absolute
//! reconstruction error on held-out pairs (even-indexed pairs fit `theta`,
//! odd-indexed pairs are scored).

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::event::EventStream;
use crate::evrep::{compute_e_i, EvRep};
use crate::frame_event::{log_offset, reconstruction_error, CameraModel, MaeReport};
use crate::grid::{check_dims, ChannelField, ChannelKind, Frame};
use crate::math::{median, median_in_place};
use crate::search::golden_section;

/// Thresholds at or below this fall back to the raw integral in [`refine_integral`].
pub const THETA_EPS: f64 = 1e-6;

/// Threshold assigned when no pixel anywhere has a usable estimate.
pub const THETA_FALLBACK: f64 = 0.0;

/// Lower end of the logarithmic part of the `k` grid.
const LOG_GRID_FLOOR: f64 = 1e-4;

/// Frames `f0`, `f1` and the events between them.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingPair {
    f0: Frame,
    f1: Frame,
    stream: EventStream,
    e_i: ChannelField,
}

impl TrainingPair {
    /// The stream window must equal `[f0.t, f1.t]` (as produced by
    /// [`EventStream::slice_by_time`]) and all dimensions must agree.
    pub fn new(f0: Frame, f1: Frame, stream: EventStream) -> Result<Self> {
        check_dims(f0.dims(), f1.dims())?;
        check_dims(f0.dims(), stream.dims())?;
        if f0.t() >= f1.t() {
            return Err(Error::InvalidWindow {
                t0: f0.t(),
                t1: f1.t(),
            });
        }
        if stream.t_start() != f0.t() || stream.t_end() != f1.t() {
            return Err(Error::WindowMismatch {
                t_start: stream.t_start(),
                t_end: stream.t_end(),
                t0: f0.t(),
                t1: f1.t(),
            });
        }
        let e_i = compute_e_i(&stream);
        Ok(Self { f0, f1, stream, e_i })
    }

    pub fn f0(&self) -> &Frame {
        &self.f0
    }

    pub fn f1(&self) -> &Frame {
        &self.f1
    }

    pub fn stream(&self) -> &EventStream {
        &self.stream
    }

    pub fn e_i(&self) -> &ChannelField {
        &self.e_i
    }

    pub fn dims(&self) -> (u16, u16) {
        self.f0.dims()
    }

    fn triple(&self) -> (&Frame, &Frame, &ChannelField) {
        (&self.f0, &self.f1, &self.e_i)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum PixelTheta {
    /// No net events.
    Inactive,
    /// Closed form came out negative.
    Floored,
    Valid(f64),
}

fn closed_form(pair: &TrainingPair, k: f64) -> Result<Vec<PixelTheta>> {
    let w = pair.f0.width();
    pair.e_i
        .values()
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            if e == 0.0 {
                return Ok(PixelTheta::Inactive);
            }
            let ratio = log_offset(pair.f1.values()[i], k, i, w)?
                - log_offset(pair.f0.values()[i], k, i, w)?;
            let theta = ratio / e;
            Ok(if theta < 0.0 {
                PixelTheta::Floored
            } else {
                PixelTheta::Valid(theta)
            })
        })
        .collect()
}

/// Replaces `None` entries by the median of valid neighbours in a 3x3 window,
/// then 5x5, then the global median, then [`THETA_FALLBACK`].
fn median_fill(values: &[Option<f64>], width: u16, height: u16) -> Vec<f64> {
    let (w, h) = (width as isize, height as isize);
    let mut global: Option<Option<f64>> = None;
    let mut scratch = Vec::with_capacity(25);
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if let Some(v) = v {
                return *v;
            }
            let (x, y) = ((i as isize) % w, (i as isize) / w);
            for radius in [1isize, 2] {
                scratch.clear();
                for yy in (y - radius).max(0)..=(y + radius).min(h - 1) {
                    for xx in (x - radius).max(0)..=(x + radius).min(w - 1) {
                        if let Some(v) = values[(yy * w + xx) as usize] {
                            scratch.push(v);
                        }
                    }
                }
                if let Some(m) = median_in_place(&mut scratch) {
                    return m;
                }
            }
            global
                .get_or_insert_with(|| median(values.iter().flatten().copied()))
                .unwrap_or(THETA_FALLBACK)
        })
        .collect()
}

/// Closed-form threshold per pixel for a given `k`. Negative values are
/// floored to 0; pixels without net events are median-filled from their
/// neighbourhood.
pub fn estimate_theta_given_k(pair: &TrainingPair, k: f64) -> Result<ChannelField> {
    if !k.is_finite() || k < 0.0 {
        return Err(Error::InvalidOffset(k));
    }
    let closed = closed_form(pair, k)?;
    let valid: Vec<Option<f64>> = closed
        .iter()
        .map(|c| match c {
            PixelTheta::Valid(v) => Some(*v),
            _ => None,
        })
        .collect();
    let (w, h) = pair.dims();
    let mut values = median_fill(&valid, w, h);
    for (v, c) in values.iter_mut().zip(&closed) {
        if *c == PixelTheta::Floored {
            *v = 0.0;
        }
    }
    Ok(ChannelField::new_unchecked(w, h, ChannelKind::Theta, values))
}

/// Per-pixel median across pairs of valid closed-form estimates; pixels that
/// were only ever floored get 0; pixels never active are median-filled.
fn aggregate_theta(per_pair: &[Vec<PixelTheta>], width: u16, height: u16) -> ChannelField {
    let pixels = width as usize * height as usize;
    let mut floored_only = alloc::vec![false; pixels];
    let mut scratch = Vec::with_capacity(per_pair.len());
    let agg: Vec<Option<f64>> = (0..pixels)
        .map(|i| {
            scratch.clear();
            let mut floored = false;
            for set in per_pair {
                match set[i] {
                    PixelTheta::Valid(v) => scratch.push(v),
                    PixelTheta::Floored => floored = true,
                    PixelTheta::Inactive => {}
                }
            }
            let m = median_in_place(&mut scratch);
            floored_only[i] = m.is_none() && floored;
            m
        })
        .collect();
    let mut values = median_fill(&agg, width, height);
    for (v, f) in values.iter_mut().zip(&floored_only) {
        if *f {
            *v = 0.0;
        }
    }
    ChannelField::new_unchecked(width, height, ChannelKind::Theta, values)
}

/// Continuous polarity integral `ln((f1 + k) / (f0 + k)) / theta`; pixels
/// with `theta <= THETA_EPS` keep the raw integral.
pub fn refine_integral(pair: &TrainingPair, model: &CameraModel) -> Result<ChannelField> {
    refine_integral_frames(&pair.f0, &pair.f1, &pair.e_i, model)
}

/// [`refine_integral`] on bare frames and a raw integral.
pub fn refine_integral_frames(
    f0: &Frame,
    f1: &Frame,
    e_i: &ChannelField,
    model: &CameraModel,
) -> Result<ChannelField> {
    check_dims(f0.dims(), f1.dims())?;
    check_dims(f0.dims(), e_i.dims())?;
    check_dims(f0.dims(), model.dims())?;
    let (w, h) = f0.dims();
    let k = model.k();
    let values = model
        .theta()
        .values()
        .iter()
        .zip(e_i.values())
        .enumerate()
        .map(|(i, (&theta, &raw))| {
            if theta > THETA_EPS {
                let ratio = log_offset(f1.values()[i], k, i, w)? - log_offset(f0.values()[i], k, i, w)?;
                Ok(ratio / theta)
            } else {
                Ok(raw)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ChannelField::new_unchecked(
        w,
        h,
        ChannelKind::RefinedIntegral,
        values,
    ))
}

/// EvRep plus the refined integral and threshold channels.
#[derive(Clone, Debug, PartialEq)]
pub struct EvRepSL {
    e_i: ChannelField,
    e_c: ChannelField,
    e_t: ChannelField,
    e_i_refined: ChannelField,
    theta: ChannelField,
}

impl EvRepSL {
    pub fn evrep(&self) -> EvRep {
        EvRep::from_channels(self.e_i.clone(), self.e_c.clone(), self.e_t.clone())
            .expect("validated at assembly")
    }

    pub fn e_i_refined(&self) -> &ChannelField {
        &self.e_i_refined
    }

    pub fn theta(&self) -> &ChannelField {
        &self.theta
    }

    pub fn dims(&self) -> (u16, u16) {
        self.e_c.dims()
    }

    /// Channels in order `E_I, E_C, E_T, refined E_I, theta`.
    pub fn channels(&self) -> [&ChannelField; 5] {
        [
            &self.e_i,
            &self.e_c,
            &self.e_t,
            &self.e_i_refined,
            &self.theta,
        ]
    }
}

/// Bundles the five channels. `refined` is re-tagged as a refined integral
/// and `theta` as a threshold field; any negative threshold is rejected.
pub fn assemble_evrepsl(
    evrep: &EvRep,
    refined: &ChannelField,
    theta: &ChannelField,
) -> Result<EvRepSL> {
    let dims = evrep.dims();
    check_dims(dims, refined.dims())?;
    check_dims(dims, theta.dims())?;
    if let Some((i, &value)) = theta
        .values()
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v >= 0.0))
    {
        return Err(Error::NegativeTheta {
            x: (i % dims.0 as usize) as u16,
            y: (i / dims.0 as usize) as u16,
            value,
        });
    }
    let (e_i, e_c, e_t) = evrep.clone().into_channels();
    Ok(EvRepSL {
        e_i,
        e_c,
        e_t,
        e_i_refined: ChannelField::new(
            dims.0,
            dims.1,
            ChannelKind::RefinedIntegral,
            refined.values().to_vec(),
        )?,
        theta: ChannelField::new(dims.0, dims.1, ChannelKind::Theta, theta.values().to_vec())?,
    })
}

/// Search settings for the offset `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchConfig {
    pub k_min: f64,
    pub k_max: f64,
    /// Golden-section refinement stops once the bracket is this narrow.
    pub tolerance: f64,
    pub grid_points: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            k_min: 0.0,
            k_max: 2.0,
            tolerance: 1e-6,
            grid_points: 33,
        }
    }
}

impl SearchConfig {
    fn validate(&self) -> Result<()> {
        if !(self.k_min.is_finite() && self.k_max.is_finite()) {
            return Err(Error::InvalidSearch("k range must be finite"));
        }
        if !(0.0 <= self.k_min && self.k_min < self.k_max) {
            return Err(Error::InvalidSearch("need 0 <= k_min < k_max"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidSearch("tolerance must be positive"));
        }
        if self.grid_points < 2 {
            return Err(Error::InvalidSearch("need at least two grid points"));
        }
        Ok(())
    }

    /// Candidate offsets, ascending. Log-spaced; when `k_min = 0` the grid
    /// is `0` followed by log-spaced points from `1e-4`.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.grid_points;
        let logspace = |lo: f64, hi: f64, m: usize| -> Vec<f64> {
            let (a, b) = (libm::log(lo), libm::log(hi));
            (0..m)
                .map(|i| {
                    if i == m - 1 {
                        hi
                    } else if i == 0 {
                        lo
                    } else {
                        libm::exp(a + (b - a) * i as f64 / (m - 1) as f64)
                    }
                })
                .collect()
        };
        if self.k_min > 0.0 {
            logspace(self.k_min, self.k_max, n)
        } else if self.k_max > LOG_GRID_FLOOR {
            let mut g = alloc::vec![0.0];
            g.extend(logspace(LOG_GRID_FLOOR, self.k_max, n - 1));
            g
        } else {
            (0..n)
                .map(|i| self.k_max * i as f64 / (n - 1) as f64)
                .collect()
        }
    }
}

/// Evaluates a batch of independent candidates. Implementations may run
/// them concurrently but must return losses in input order.
pub trait CandidateMap {
    fn map_losses(&self, candidates: &[f64], loss: &(dyn Fn(f64) -> f64 + Sync)) -> Vec<f64>;
}

/// Evaluates candidates one after another.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl CandidateMap for Sequential {
    fn map_losses(&self, candidates: &[f64], loss: &(dyn Fn(f64) -> f64 + Sync)) -> Vec<f64> {
        candidates.iter().map(|&k| loss(k)).collect()
    }
}

/// Result of the offset search.
#[derive(Clone, Debug, PartialEq)]
pub struct KEstimate {
    pub k: f64,
    pub loss: f64,
    /// The minimizer sits on `k_min` or `k_max`.
    pub boundary_hit: bool,
    /// Only one pair was given, so it served as both fit and held-out set.
    pub held_out_is_fit: bool,
    /// `(k, loss)` for every coarse grid point.
    pub grid: Vec<(f64, f64)>,
    pub evaluations: usize,
}

struct Objective<'a> {
    fit: Vec<&'a TrainingPair>,
    held: Vec<&'a TrainingPair>,
    dims: (u16, u16),
}

impl<'a> Objective<'a> {
    fn new(pairs: &'a [TrainingPair]) -> Result<Self> {
        let first = pairs.first().ok_or(Error::Empty)?;
        for p in pairs {
            check_dims(first.dims(), p.dims())?;
        }
        let (fit, held) = if pairs.len() == 1 {
            (alloc::vec![first], alloc::vec![first])
        } else {
            (
                pairs.iter().step_by(2).collect(),
                pairs.iter().skip(1).step_by(2).collect(),
            )
        };
        Ok(Self {
            fit,
            held,
            dims: first.dims(),
        })
    }

    fn theta(&self, k: f64) -> Result<ChannelField> {
        let sets = self
            .fit
            .iter()
            .map(|p| closed_form(p, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(aggregate_theta(&sets, self.dims.0, self.dims.1))
    }

    fn report(&self, k: f64) -> Result<MaeReport> {
        let model = CameraModel::new(self.theta(k)?, k)?;
        reconstruction_error(self.held.iter().map(|p| p.triple()), &model)
    }

    fn loss(&self, k: f64) -> f64 {
        self.report(k).map_or(f64::INFINITY, |r| r.mae)
    }
}

fn better(candidate: (f64, f64), best: (f64, f64)) -> bool {
    let ((k, l), (bk, bl)) = (candidate, best);
    l < bl || (l == bl && k < bk)
}

pub fn estimate_k(pairs: &[TrainingPair], config: &SearchConfig) -> Result<KEstimate> {
    estimate_k_with(pairs, config, &Sequential)
}

/// Minimizes held-out reconstruction MAE over `k`: coarse grid, then
/// golden-section refinement inside the grid cells adjacent to the best
/// point. Equal losses resolve to the smaller `k`.
pub fn estimate_k_with(
    pairs: &[TrainingPair],
    config: &SearchConfig,
    candidates: &dyn CandidateMap,
) -> Result<KEstimate> {
    config.validate()?;
    let objective = Objective::new(pairs)?;
    let grid_k = config.grid();
    let losses = candidates.map_losses(&grid_k, &|k| objective.loss(k));
    if losses.iter().all(|l| !l.is_finite()) {
        // surface the underlying error
        objective.report(grid_k[grid_k.len() - 1])?;
        return Err(Error::InvalidSearch("loss undefined on every candidate"));
    }
    let grid: Vec<(f64, f64)> = grid_k.iter().copied().zip(losses).collect();
    let mut best = (f64::INFINITY, f64::INFINITY);
    let mut best_idx = 0;
    for (i, &g) in grid.iter().enumerate() {
        if better(g, best) {
            best = g;
            best_idx = i;
        }
    }
    let lo = grid[best_idx.saturating_sub(1)].0;
    let hi = grid[(best_idx + 1).min(grid.len() - 1)].0;
    let mut evaluations = grid.len();
    golden_section(
        |k| objective.loss(k),
        lo,
        hi,
        config.tolerance,
        |k, l| {
            evaluations += 1;
            if better((k, l), best) {
                best = (k, l);
            }
        },
    );
    let boundary_hit = best.0 <= config.k_min + config.tolerance
        || best.0 >= config.k_max - config.tolerance;
    Ok(KEstimate {
        k: best.0,
        loss: best.1,
        boundary_hit,
        held_out_is_fit: pairs.len() == 1,
        grid,
        evaluations,
    })
}

/// Fitted camera model and fit diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    pub model: CameraModel,
    pub search: KEstimate,
    /// Held-out MAE at the fitted `k`.
    pub mae_heldout: f64,
    /// Pixels with nonzero integral in at least one pair.
    pub pixels_active: usize,
    /// Clamped pixels in the held-out reconstruction at the fitted `k`.
    pub clamp_count: usize,
}

pub fn fit_camera(pairs: &[TrainingPair], config: &SearchConfig) -> Result<FitReport> {
    fit_camera_with(pairs, config, &Sequential)
}

/// Runs the offset search, then aggregates per-pair closed-form thresholds
/// at the fitted `k` over all pairs (per-pixel median over active pairs,
/// median fill elsewhere).
pub fn fit_camera_with(
    pairs: &[TrainingPair],
    config: &SearchConfig,
    candidates: &dyn CandidateMap,
) -> Result<FitReport> {
    let search = estimate_k_with(pairs, config, candidates)?;
    let k = search.k;
    let objective = Objective::new(pairs)?;
    let held = objective.report(k)?;
    let sets = pairs
        .iter()
        .map(|p| closed_form(p, k))
        .collect::<Result<Vec<_>>>()?;
    let (w, h) = objective.dims;
    let theta = aggregate_theta(&sets, w, h);
    let pixels_active = (0..w as usize * h as usize)
        .filter(|&i| sets.iter().any(|s| s[i] != PixelTheta::Inactive))
        .count();
    Ok(FitReport {
        model: CameraModel::new(theta, k)?,
        search,
        mae_heldout: held.mae,
        pixels_active,
        clamp_count: held.clamped,
    })
}
