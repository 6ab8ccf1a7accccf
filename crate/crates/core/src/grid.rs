//! Pixel grids: normalized frames and per-pixel channel fields.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Maps a row-major grid through `quarter_turns` counter-clockwise rotations
/// using `(x, y) -> (height - 1 - y, x)` per turn.
pub(crate) fn rotate_grid<T: Copy>(
    width: u16,
    height: u16,
    values: &[T],
    quarter_turns: u8,
) -> (u16, u16, Vec<T>) {
    let (mut w, mut h) = (width, height);
    let mut cur = values.to_vec();
    for _ in 0..quarter_turns % 4 {
        let (nw, nh) = (h, w);
        let mut next = cur.clone();
        for y in 0..h as usize {
            for x in 0..w as usize {
                let nx = h as usize - 1 - y;
                let ny = x;
                next[ny * nw as usize + nx] = cur[y * w as usize + x];
            }
        }
        cur = next;
        w = nw;
        h = nh;
    }
    (w, h, cur)
}

/// Normalized grayscale image with values in `[0, 1]` and a timestamp in microseconds.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    width: u16,
    height: u16,
    values: Vec<f64>,
    t: u64,
}

impl Frame {
    pub fn new(width: u16, height: u16, values: Vec<f64>, t: u64) -> Result<Self> {
        let expected = width as usize * height as usize;
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: values.len(),
            });
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::FrameValueOutOfRange { index, value });
        }
        Ok(Self {
            width,
            height,
            values,
            t,
        })
    }

    /// Builds a frame from `f(x, y)`.
    pub fn from_fn(
        width: u16,
        height: u16,
        t: u64,
        mut f: impl FnMut(u16, u16) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::new(width, height, values, t)
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn height(&self) -> u16 {
        self.height
    }

    pub fn dims(&self) -> (u16, u16) {
        (self.width, self.height)
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: u16, y: u16) -> f64 {
        self.values[y as usize * self.width as usize + x as usize]
    }

    pub fn with_timestamp(mut self, t: u64) -> Self {
        self.t = t;
        self
    }
}

/// What a [`ChannelField`] holds. Each kind carries its own value invariant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    /// Event count per pixel; non-negative integers.
    Count,
    /// Net polarity sum per pixel; integers.
    Integral,
    /// Spread of inter-event intervals; non-negative.
    Temporal,
    /// Continuous-valued polarity integral; any finite value.
    RefinedIntegral,
    /// Contrast threshold; non-negative.
    Theta,
    /// Per-pixel log-intensity ratio between two frames.
    LogRatio,
}

impl ChannelKind {
    fn admits(self, v: f64) -> bool {
        if !v.is_finite() {
            return false;
        }
        match self {
            ChannelKind::Count => v >= 0.0 && v == libm::trunc(v),
            ChannelKind::Integral => v == libm::trunc(v),
            ChannelKind::Temporal | ChannelKind::Theta => v >= 0.0,
            ChannelKind::RefinedIntegral | ChannelKind::LogRatio => true,
        }
    }
}

/// Row-major per-pixel real values tagged with a [`ChannelKind`].
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelField {
    width: u16,
    height: u16,
    kind: ChannelKind,
    values: Vec<f64>,
}

impl ChannelField {
    pub fn new(width: u16, height: u16, kind: ChannelKind, values: Vec<f64>) -> Result<Self> {
        let expected = width as usize * height as usize;
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !kind.admits(**v))
        {
            return Err(Error::InvalidChannelValue { kind, index, value });
        }
        Ok(Self {
            width,
            height,
            kind,
            values,
        })
    }

    pub(crate) fn new_unchecked(
        width: u16,
        height: u16,
        kind: ChannelKind,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(values.len(), width as usize * height as usize);
        Self {
            width,
            height,
            kind,
            values,
        }
    }

    pub fn zeros(width: u16, height: u16, kind: ChannelKind) -> Self {
        Self::new_unchecked(
            width,
            height,
            kind,
            alloc::vec![0.0; width as usize * height as usize],
        )
    }

    /// Uniform field, e.g. a constant threshold.
    pub fn filled(width: u16, height: u16, kind: ChannelKind, value: f64) -> Result<Self> {
        Self::new(
            width,
            height,
            kind,
            alloc::vec![value; width as usize * height as usize],
        )
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn height(&self) -> u16 {
        self.height
    }

    pub fn dims(&self) -> (u16, u16) {
        (self.width, self.height)
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, x: u16, y: u16) -> f64 {
        self.values[y as usize * self.width as usize + x as usize]
    }

    /// Same field with every value negated. Only sign-symmetric kinds
    /// (integral, refined integral, log ratio) stay valid.
    pub fn negated(&self) -> Result<Self> {
        Self::new(
            self.width,
            self.height,
            self.kind,
            self.values.iter().map(|v| -v).collect(),
        )
    }

    /// Rotates the field the same way [`crate::EventStream::rotate90`] rotates coordinates.
    pub fn rotate90(&self, quarter_turns: u8) -> Result<Self> {
        if quarter_turns > 3 {
            return Err(Error::InvalidQuarterTurns(quarter_turns));
        }
        let (w, h, values) = rotate_grid(self.width, self.height, &self.values, quarter_turns);
        Ok(Self::new_unchecked(w, h, self.kind, values))
    }
}

pub(crate) fn check_dims(expected: (u16, u16), found: (u16, u16)) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_rejects_out_of_range() {
        assert!(matches!(
            Frame::new(2, 1, vec![0.5, 1.5], 0),
            Err(Error::FrameValueOutOfRange { index: 1, .. })
        ));
        assert!(Frame::new(2, 1, vec![0.0, 1.0], 0).is_ok());
        assert!(Frame::new(2, 1, vec![f64::NAN, 1.0], 0).is_err());
    }

    #[test]
    fn channel_kind_invariants() {
        assert!(ChannelField::new(1, 1, ChannelKind::Count, vec![-1.0]).is_err());
        assert!(ChannelField::new(1, 1, ChannelKind::Count, vec![1.5]).is_err());
        assert!(ChannelField::new(1, 1, ChannelKind::Integral, vec![-3.0]).is_ok());
        assert!(ChannelField::new(1, 1, ChannelKind::Theta, vec![-0.1]).is_err());
        assert!(ChannelField::new(1, 1, ChannelKind::RefinedIntegral, vec![-0.1]).is_ok());
        assert!(ChannelField::new(2, 2, ChannelKind::Theta, vec![0.1]).is_err());
    }

    #[test]
    fn rotate_grid_one_turn() {
        // 2x3 grid, value = index
        let vals: Vec<u32> = (0..6).collect();
        let (w, h, r) = rotate_grid(2, 3, &vals, 1);
        assert_eq!((w, h), (3, 2));
        // (0,0) -> (2,0)
        assert_eq!(r[2], 0);
        // (1,2) -> (0,1)
        assert_eq!(r[3], 5);
        let (_, _, back) = rotate_grid(2, 3, &vals, 4);
        assert_eq!(back, vals);
    }
}
