//! The frame/event relation under a linear intensity model.
//!
//! With normalized frames `f` and offset `k`, a pixel with threshold `theta`
//! and polarity integral `E_I` over `[t0, t1]` satisfies
//!
//! ```text
//! f1 = exp(theta * E_I) * (f0 + k) - k
//! ```
//!
//! and, running time backwards, `f0 = exp(-theta * E_I) * (f1 + k) - k`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{check_dims, ChannelField, ChannelKind, Frame};
use crate::math::{exp, ln};

/// Per-pixel contrast threshold plus the scalar intensity offset `k`.
/// One model describes one frame interval.
#[derive(Clone, Debug, PartialEq)]
pub struct CameraModel {
    theta: ChannelField,
    k: f64,
}

impl CameraModel {
    pub fn new(theta: ChannelField, k: f64) -> Result<Self> {
        if !k.is_finite() || k < 0.0 {
            return Err(Error::InvalidOffset(k));
        }
        if theta.kind() != ChannelKind::Theta {
            return Err(Error::InvalidChannelValue {
                kind: ChannelKind::Theta,
                index: 0,
                value: theta.values().first().copied().unwrap_or(0.0),
            });
        }
        Ok(Self { theta, k })
    }

    /// Same threshold at every pixel.
    pub fn uniform(width: u16, height: u16, theta: f64, k: f64) -> Result<Self> {
        Self::new(
            ChannelField::filled(width, height, ChannelKind::Theta, theta)?,
            k,
        )
    }

    pub fn theta(&self) -> &ChannelField {
        &self.theta
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn dims(&self) -> (u16, u16) {
        self.theta.dims()
    }
}

/// `ln(f + k)` at pixel `i`, failing on a non-positive argument.
#[inline]
pub(crate) fn log_offset(v: f64, k: f64, i: usize, width: u16) -> Result<f64> {
    let a = v + k;
    if a > 0.0 {
        Ok(ln(a))
    } else {
        Err(Error::LogDomain {
            x: (i % width as usize) as u16,
            y: (i / width as usize) as u16,
        })
    }
}

/// Per-pixel `ln((f1 + k) / (f0 + k))`, evaluated as a difference of logs
/// so that swapping the frames negates the result exactly.
pub fn log_intensity_ratio(f0: &Frame, f1: &Frame, k: f64) -> Result<ChannelField> {
    check_dims(f0.dims(), f1.dims())?;
    if !k.is_finite() || k < 0.0 {
        return Err(Error::InvalidOffset(k));
    }
    let w = f0.width();
    let values = f0
        .values()
        .iter()
        .zip(f1.values())
        .enumerate()
        .map(|(i, (&a, &b))| Ok(log_offset(b, k, i, w)? - log_offset(a, k, i, w)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ChannelField::new_unchecked(
        f0.width(),
        f0.height(),
        ChannelKind::LogRatio,
        values,
    ))
}

/// A reconstructed frame, its unclamped values, and how many pixels were clamped.
#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub frame: Frame,
    pub raw: Vec<f64>,
    pub clamped: usize,
}

fn reconstruct(
    base: &Frame,
    e_i: &ChannelField,
    model: &CameraModel,
    direction: f64,
) -> Result<Reconstruction> {
    check_dims(base.dims(), e_i.dims())?;
    check_dims(base.dims(), model.dims())?;
    let k = model.k;
    let raw: Vec<f64> = base
        .values()
        .iter()
        .zip(e_i.values())
        .zip(model.theta.values())
        .map(|((&f, &e), &th)| {
            let g = th * (direction * e);
            // (f + k) - k is not exact in floating point
            if g == 0.0 {
                f
            } else {
                exp(g) * (f + k) - k
            }
        })
        .collect();
    let mut clamped = 0;
    let values = raw
        .iter()
        .map(|&v| {
            let c = v.clamp(0.0, 1.0);
            if c != v {
                clamped += 1;
            }
            c
        })
        .collect();
    Ok(Reconstruction {
        frame: Frame::new(base.width(), base.height(), values, base.t())?,
        raw,
        clamped,
    })
}

/// Next frame from `f0` and the integral over the interval. The returned
/// frame keeps `f0`'s timestamp; relabel with [`Frame::with_timestamp`].
pub fn reconstruct_next(
    f0: &Frame,
    e_i: &ChannelField,
    model: &CameraModel,
) -> Result<Reconstruction> {
    reconstruct(f0, e_i, model, 1.0)
}

/// Previous frame from `f1`; identical to [`reconstruct_next`] with a negated integral.
pub fn reconstruct_prev(
    f1: &Frame,
    e_i: &ChannelField,
    model: &CameraModel,
) -> Result<Reconstruction> {
    reconstruct(f1, e_i, model, -1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaeReport {
    pub mae: f64,
    pub pixels: usize,
    pub clamped: usize,
}

/// Mean of `|f1_hat - f1|` over every pixel of every `(f0, f1, e_i)` triple,
/// using unclamped reconstructions.
pub fn reconstruction_error<'a, I>(triples: I, model: &CameraModel) -> Result<MaeReport>
where
    I: IntoIterator<Item = (&'a Frame, &'a Frame, &'a ChannelField)>,
{
    let mut total = 0.0;
    let mut pixels = 0usize;
    let mut clamped = 0usize;
    for (f0, f1, e_i) in triples {
        check_dims(f0.dims(), f1.dims())?;
        let r = reconstruct_next(f0, e_i, model)?;
        total += r
            .raw
            .iter()
            .zip(f1.values())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
        pixels += r.raw.len();
        clamped += r.clamped;
    }
    if pixels == 0 {
        return Err(Error::Empty);
    }
    Ok(MaeReport {
        mae: total / pixels as f64,
        pixels,
        clamped,
    })
}

pub fn reconstruction_mae<'a, I>(triples: I, model: &CameraModel) -> Result<f64>
where
    I: IntoIterator<Item = (&'a Frame, &'a Frame, &'a ChannelField)>,
{
    reconstruction_error(triples, model).map(|r| r.mae)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn px(v: f64) -> Frame {
        Frame::new(1, 1, vec![v], 0).unwrap()
    }

    fn integral(v: f64) -> ChannelField {
        ChannelField::new(1, 1, ChannelKind::Integral, vec![v]).unwrap()
    }

    #[test]
    fn log_ratio_cases() {
        let f = Frame::new(2, 1, vec![0.3, 0.7], 0).unwrap();
        assert!(log_intensity_ratio(&f, &f, 0.0)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));
        let r = log_intensity_ratio(&px(0.5), &px(0.6107), 0.0).unwrap();
        assert!((r.get(0, 0) - 0.2).abs() < 1e-4);
        assert!(matches!(
            log_intensity_ratio(&px(0.0), &px(0.5), 0.0),
            Err(Error::LogDomain { x: 0, y: 0 })
        ));
        assert!(log_intensity_ratio(&px(0.0), &px(0.5), 0.01).is_ok());
    }

    #[test]
    fn reconstruct_scalar_cases() {
        let m = CameraModel::uniform(1, 1, 0.1, 0.0).unwrap();
        let r = reconstruct_next(&px(0.5), &integral(2.0), &m).unwrap();
        assert!((r.raw[0] - 0.5 * libm::exp(0.2)).abs() < 1e-15);
        assert!((r.raw[0] - 0.61070).abs() < 1e-5);
        assert_eq!(r.clamped, 0);

        let m = CameraModel::uniform(1, 1, 0.2, 0.05).unwrap();
        let r = reconstruct_next(&px(0.9), &integral(3.0), &m).unwrap();
        assert!((r.raw[0] - 1.6811).abs() < 1e-4);
        assert_eq!(r.frame.values(), &[1.0]);
        assert_eq!(r.clamped, 1);

        let m = CameraModel::uniform(1, 1, 0.1, 0.0).unwrap();
        let r = reconstruct_prev(&px(0.6107), &integral(2.0), &m).unwrap();
        assert!((r.raw[0] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn zero_integral_is_identity() {
        let f = Frame::new(3, 1, vec![0.0, 0.25, 1.0], 7).unwrap();
        let m = CameraModel::uniform(3, 1, 0.3, 0.1).unwrap();
        let z = ChannelField::zeros(3, 1, ChannelKind::Integral);
        assert_eq!(reconstruct_next(&f, &z, &m).unwrap().frame, f);
        assert_eq!(reconstruct_prev(&f, &z, &m).unwrap().frame, f);
    }

    #[test]
    fn mae_cases() {
        let m = CameraModel::uniform(1, 1, 0.1, 0.0).unwrap();
        let z = integral(0.0);
        let (a, b) = (px(0.5), px(0.7));
        assert!((reconstruction_mae([(&a, &b, &z)], &m).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(reconstruction_mae([(&a, &a, &z)], &m).unwrap(), 0.0);
        assert!(matches!(
            reconstruction_mae(core::iter::empty(), &m),
            Err(Error::Empty)
        ));
    }

    #[test]
    fn model_validation() {
        assert!(CameraModel::uniform(1, 1, 0.1, -0.1).is_err());
        assert!(CameraModel::uniform(1, 1, -0.1, 0.1).is_err());
        let wrong_kind = ChannelField::zeros(1, 1, ChannelKind::Count);
        assert!(CameraModel::new(wrong_kind, 0.0).is_err());
        let m = CameraModel::uniform(2, 1, 0.1, 0.0).unwrap();
        assert!(matches!(
            reconstruct_next(&px(0.5), &integral(1.0), &m),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
