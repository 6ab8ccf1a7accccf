//! `EVRP` multi-channel tensors (EvRep: 3 channels, EvRepSL: 5 channels).

use evkit_core::{ChannelField, ChannelKind, EvRep, EvRepSL};

use super::{container_len, open_container, Writer};
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"EVRP";
const HEADER_LEN: usize = 2 + 2 + 2;

/// Channel kinds in EvRep order.
pub const EVREP_KINDS: [ChannelKind; 3] = [
    ChannelKind::Integral,
    ChannelKind::Count,
    ChannelKind::Temporal,
];

/// Channel kinds in EvRepSL order.
pub const EVREPSL_KINDS: [ChannelKind; 5] = [
    ChannelKind::Integral,
    ChannelKind::Count,
    ChannelKind::Temporal,
    ChannelKind::RefinedIntegral,
    ChannelKind::Theta,
];

/// Row-major `f32` channels of one size.
#[derive(Clone, Debug, PartialEq)]
pub struct EvrpTensor {
    pub width: u16,
    pub height: u16,
    pub channels: Vec<Vec<f32>>,
}

impl EvrpTensor {
    pub fn from_fields<'a>(fields: impl IntoIterator<Item = &'a ChannelField>) -> Result<Self> {
        let mut dims = None;
        let mut channels = Vec::new();
        for f in fields {
            match dims {
                None => dims = Some(f.dims()),
                Some(d) if d != f.dims() => {
                    return Err(evkit_core::Error::DimensionMismatch {
                        expected: d,
                        found: f.dims(),
                    }
                    .into())
                }
                _ => {}
            }
            channels.push(f.values().iter().map(|&v| v as f32).collect());
        }
        let (width, height) = dims.ok_or_else(|| Error::Invalid("tensor needs at least one channel".into()))?;
        if channels.len() > u16::MAX as usize {
            return Err(Error::Invalid("too many channels".into()));
        }
        Ok(Self {
            width,
            height,
            channels,
        })
    }

    pub fn from_evrep(evrep: &EvRep) -> Self {
        Self::from_fields(evrep.channels()).expect("EvRep channels share dimensions")
    }

    pub fn from_evrepsl(evrepsl: &EvRepSL) -> Self {
        Self::from_fields(evrepsl.channels()).expect("EvRepSL channels share dimensions")
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Channel `index` as a field of `kind`, validating the kind's invariant.
    pub fn field(&self, index: usize, kind: ChannelKind) -> Result<ChannelField> {
        let ch = self
            .channels
            .get(index)
            .ok_or_else(|| Error::Invalid(format!("channel {index} out of range (have {})", self.channels.len())))?;
        Ok(ChannelField::new(
            self.width,
            self.height,
            kind,
            ch.iter().map(|&v| v as f64).collect(),
        )?)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let pixels = self.width as usize * self.height as usize;
        let mut w = Writer::new(&MAGIC, HEADER_LEN + 4 * pixels * self.channels.len());
        w.u16(self.width);
        w.u16(self.height);
        w.u16(self.channels.len() as u16);
        for ch in &self.channels {
            for &v in ch {
                w.f32(v);
            }
        }
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = open_container(bytes, &MAGIC, HEADER_LEN, |probe| {
            let w = probe.u16()? as u64;
            let h = probe.u16()? as u64;
            let c = probe.u16()? as u64;
            container_len(HEADER_LEN, w * h * c, 4, bytes.len())
        })?;
        let width = r.u16()?;
        let height = r.u16()?;
        let count = r.u16()? as usize;
        let pixels = width as usize * height as usize;
        let channels = (0..count)
            .map(|_| (0..pixels).map(|_| r.f32()).collect::<Result<Vec<f32>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            width,
            height,
            channels,
        })
    }
}
