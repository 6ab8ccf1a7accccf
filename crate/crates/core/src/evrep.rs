//! The EvRep representation: per-pixel polarity integral `E_I`, event count
//! `E_C` and inter-event interval spread `E_T`.
//!
//! Two implementations are provided. [`compute_evrep`] is the reference: it
//! groups timestamps by pixel and evaluates each channel directly.
//! [`compute_evrep_streaming`] is a single pass keeping per-pixel integer
//! sums of intervals and squared intervals; because timestamps are integers
//! those sums are exact and the spread is recovered from them in closed form.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::event::{Event, EventStream};
use crate::grid::{check_dims, ChannelField, ChannelKind};
use crate::math::sqrt;

/// How the mean interval in `E_T` is formed.
///
/// With `n` events at a pixel there are `n - 1` intervals `d_i`.
/// - `Literal`: `mean = sum(d) / n`, `E_T = sqrt(sum((d_i - mean)^2) / (n - 1))`.
///   Defined for `n >= 2`.
/// - `Conventional`: sample standard deviation of the intervals,
///   `mean = sum(d) / (n - 1)`, divisor `n - 2`. Defined for `n >= 3`.
///
/// Pixels where the selected formula is undefined get 0.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum TemporalMode {
    #[default]
    Literal,
    Conventional,
}

/// The three EvRep channels over one stream.
#[derive(Clone, Debug, PartialEq)]
pub struct EvRep {
    e_i: ChannelField,
    e_c: ChannelField,
    e_t: ChannelField,
}

impl EvRep {
    /// Bundles channels after checking kinds, shared dimensions, `|E_I| <= E_C`
    /// and parity `E_I = E_C (mod 2)`.
    pub fn from_channels(e_i: ChannelField, e_c: ChannelField, e_t: ChannelField) -> Result<Self> {
        check_dims(e_c.dims(), e_i.dims())?;
        check_dims(e_c.dims(), e_t.dims())?;
        for (field, kind) in [
            (&e_i, ChannelKind::Integral),
            (&e_c, ChannelKind::Count),
            (&e_t, ChannelKind::Temporal),
        ] {
            if field.kind() != kind {
                return Err(Error::InvalidChannelValue {
                    kind,
                    index: 0,
                    value: field.values().first().copied().unwrap_or(0.0),
                });
            }
        }
        for (index, (&i, &c)) in e_i.values().iter().zip(e_c.values()).enumerate() {
            let parity_ok = (i as i64 - c as i64).rem_euclid(2) == 0;
            if i.abs() > c || !parity_ok {
                return Err(Error::InvalidChannelValue {
                    kind: ChannelKind::Integral,
                    index,
                    value: i,
                });
            }
        }
        Ok(Self { e_i, e_c, e_t })
    }

    pub fn e_i(&self) -> &ChannelField {
        &self.e_i
    }

    pub fn e_c(&self) -> &ChannelField {
        &self.e_c
    }

    pub fn e_t(&self) -> &ChannelField {
        &self.e_t
    }

    pub fn dims(&self) -> (u16, u16) {
        self.e_c.dims()
    }

    /// Channels in listing order `E_I, E_C, E_T`.
    pub fn channels(&self) -> [&ChannelField; 3] {
        [&self.e_i, &self.e_c, &self.e_t]
    }

    pub fn into_channels(self) -> (ChannelField, ChannelField, ChannelField) {
        (self.e_i, self.e_c, self.e_t)
    }

    pub fn rotate90(&self, quarter_turns: u8) -> Result<Self> {
        Ok(Self {
            e_i: self.e_i.rotate90(quarter_turns)?,
            e_c: self.e_c.rotate90(quarter_turns)?,
            e_t: self.e_t.rotate90(quarter_turns)?,
        })
    }
}

#[inline]
fn pixel_index(e: &Event, width: usize) -> usize {
    e.y as usize * width + e.x as usize
}

pub fn compute_e_c(stream: &EventStream) -> ChannelField {
    let width = stream.width() as usize;
    let mut counts = alloc::vec![0.0; stream.pixel_count()];
    for e in stream.events() {
        counts[pixel_index(e, width)] += 1.0;
    }
    ChannelField::new_unchecked(stream.width(), stream.height(), ChannelKind::Count, counts)
}

pub fn compute_e_i(stream: &EventStream) -> ChannelField {
    let width = stream.width() as usize;
    let mut sums = alloc::vec![0.0; stream.pixel_count()];
    for e in stream.events() {
        sums[pixel_index(e, width)] += e.p.sign() as f64;
    }
    ChannelField::new_unchecked(stream.width(), stream.height(), ChannelKind::Integral, sums)
}

/// Two-pass spread of consecutive intervals for one pixel's sorted timestamps.
fn temporal_two_pass(ts: &[u64], mode: TemporalMode) -> f64 {
    let n = ts.len();
    let (mean_div, var_div) = match mode {
        TemporalMode::Literal if n >= 2 => (n as f64, (n - 1) as f64),
        TemporalMode::Conventional if n >= 3 => ((n - 1) as f64, (n - 2) as f64),
        _ => return 0.0,
    };
    let deltas = ts.windows(2).map(|w| (w[1] - w[0]) as f64);
    let mean = deltas.clone().sum::<f64>() / mean_div;
    let ss: f64 = deltas.map(|d| (d - mean) * (d - mean)).sum();
    sqrt(ss / var_div)
}

/// Reference `E_T`: groups timestamps per pixel, then evaluates the
/// deviation sum directly.
pub fn compute_e_t(stream: &EventStream, mode: TemporalMode) -> ChannelField {
    let width = stream.width() as usize;
    let mut per_pixel: Vec<Vec<u64>> = alloc::vec![Vec::new(); stream.pixel_count()];
    for e in stream.events() {
        per_pixel[pixel_index(e, width)].push(e.t);
    }
    let values = per_pixel
        .iter()
        .map(|ts| temporal_two_pass(ts, mode))
        .collect();
    ChannelField::new_unchecked(stream.width(), stream.height(), ChannelKind::Temporal, values)
}

/// Reference EvRep: the three channel operations applied independently.
pub fn compute_evrep(stream: &EventStream, mode: TemporalMode) -> EvRep {
    EvRep {
        e_i: compute_e_i(stream),
        e_c: compute_e_c(stream),
        e_t: compute_e_t(stream, mode),
    }
}

/// `E_T` from the interval count sums: `n` events, `s1 = sum(d)`, `s2 = sum(d^2)`.
///
/// Literal:      `sum((d - s1/n)^2) = (n^2 s2 - (n + 1) s1^2) / n^2`
/// Conventional: `sum((d - s1/m)^2) = (m s2 - s1^2) / m`, with `m = n - 1`
///
/// Numerators are formed in exact integer arithmetic when they fit in 128
/// bits, so no cancellation occurs.
pub fn temporal_from_sums(n: u64, s1: u64, s2: u128, mode: TemporalMode) -> f64 {
    let s1 = s1 as u128;
    let n128 = n as u128;
    match mode {
        TemporalMode::Literal => {
            if n < 2 {
                return 0.0;
            }
            let exact = n128
                .checked_mul(n128)
                .and_then(|nn| nn.checked_mul(s2))
                .zip((n128 + 1).checked_mul(s1).and_then(|a| a.checked_mul(s1)));
            let var = match exact {
                Some((a, b)) => a.saturating_sub(b) as f64 / ((n128 * n128) as f64 * (n - 1) as f64),
                None => {
                    let (n, s1, s2) = (n as f64, s1 as f64, s2 as f64);
                    let mean = s1 / n;
                    ((s2 - 2.0 * mean * s1 + (n - 1.0) * mean * mean) / (n - 1.0)).max(0.0)
                }
            };
            sqrt(var)
        }
        TemporalMode::Conventional => {
            if n < 3 {
                return 0.0;
            }
            let m = n128 - 1;
            let exact = m.checked_mul(s2).zip(s1.checked_mul(s1));
            let var = match exact {
                Some((a, b)) => a.saturating_sub(b) as f64 / (m as f64 * (m - 1) as f64),
                None => {
                    let (m, s1, s2) = (m as f64, s1 as f64, s2 as f64);
                    ((s2 - s1 * s1 / m) / (m - 1.0)).max(0.0)
                }
            };
            sqrt(var)
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct PixelAccumulator {
    count: u64,
    polarity_sum: i64,
    last_t: u64,
    sum_dt: u64,
    sum_dt2: u128,
}

impl PixelAccumulator {
    #[inline]
    fn push(&mut self, e: &Event) {
        if self.count > 0 {
            let dt = e.t - self.last_t;
            self.sum_dt += dt;
            self.sum_dt2 += dt as u128 * dt as u128;
        }
        self.last_t = e.t;
        self.count += 1;
        self.polarity_sum += e.p.sign() as i64;
    }
}

/// Single-pass accumulators for a band of rows `[row_start, row_start + rows)`.
///
/// The pixel grid can be split into bands processed independently; since a
/// pixel belongs to exactly one band, merging bands is exact.
#[derive(Clone, Debug)]
pub struct BandAccumulator {
    width: u16,
    row_start: u16,
    rows: u16,
    cells: Vec<PixelAccumulator>,
}

impl BandAccumulator {
    pub fn new(width: u16, row_start: u16, rows: u16) -> Self {
        Self {
            width,
            row_start,
            rows,
            cells: alloc::vec![PixelAccumulator::default(); width as usize * rows as usize],
        }
    }

    pub fn row_start(&self) -> u16 {
        self.row_start
    }

    pub fn rows(&self) -> u16 {
        self.rows
    }

    pub fn contains_row(&self, y: u16) -> bool {
        y >= self.row_start && y - self.row_start < self.rows
    }

    /// Adds one event. Events for a given pixel must arrive in timestamp order,
    /// and `e.y` must fall inside the band.
    #[inline]
    pub fn push(&mut self, e: &Event) {
        debug_assert!(self.contains_row(e.y));
        let idx = (e.y - self.row_start) as usize * self.width as usize + e.x as usize;
        self.cells[idx].push(e);
    }

    pub fn extend<'a>(&mut self, events: impl IntoIterator<Item = &'a Event>) {
        for e in events {
            self.push(e);
        }
    }

    fn write_into(&self, mode: TemporalMode, e_i: &mut [f64], e_c: &mut [f64], e_t: &mut [f64]) {
        let offset = self.row_start as usize * self.width as usize;
        for (k, c) in self.cells.iter().enumerate() {
            let i = offset + k;
            e_c[i] = c.count as f64;
            e_i[i] = c.polarity_sum as f64;
            e_t[i] = temporal_from_sums(c.count, c.sum_dt, c.sum_dt2, mode);
        }
    }
}

/// Assembles EvRep from bands that together cover every row exactly once.
pub fn evrep_from_bands(
    width: u16,
    height: u16,
    bands: &[BandAccumulator],
    mode: TemporalMode,
) -> Result<EvRep> {
    let pixels = width as usize * height as usize;
    let mut covered = alloc::vec![false; height as usize];
    for b in bands {
        if b.width != width || b.row_start as usize + b.rows as usize > height as usize {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                found: (b.width, b.row_start + b.rows),
            });
        }
        for r in b.row_start..b.row_start + b.rows {
            if core::mem::replace(&mut covered[r as usize], true) {
                return Err(Error::DimensionMismatch {
                    expected: (width, height),
                    found: (b.width, r),
                });
            }
        }
    }
    if let Some(r) = covered.iter().position(|c| !c) {
        return Err(Error::DimensionMismatch {
            expected: (width, height),
            found: (width, r as u16),
        });
    }
    let mut e_i = alloc::vec![0.0; pixels];
    let mut e_c = alloc::vec![0.0; pixels];
    let mut e_t = alloc::vec![0.0; pixels];
    for b in bands {
        b.write_into(mode, &mut e_i, &mut e_c, &mut e_t);
    }
    Ok(EvRep {
        e_i: ChannelField::new_unchecked(width, height, ChannelKind::Integral, e_i),
        e_c: ChannelField::new_unchecked(width, height, ChannelKind::Count, e_c),
        e_t: ChannelField::new_unchecked(width, height, ChannelKind::Temporal, e_t),
    })
}

/// Single pass over the events with one accumulator per pixel.
pub fn compute_evrep_streaming(stream: &EventStream, mode: TemporalMode) -> EvRep {
    let mut band = BandAccumulator::new(stream.width(), 0, stream.height());
    band.extend(stream.events());
    evrep_from_bands(stream.width(), stream.height(), core::slice::from_ref(&band), mode)
        .expect("single band covers the grid")
}
