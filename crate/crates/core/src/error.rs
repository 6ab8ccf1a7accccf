use thiserror::Error;

use crate::grid::ChannelKind;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pixel ({x}, {y}) outside {width}x{height} grid")]
    OutOfBounds {
        x: u64,
        y: u64,
        width: u16,
        height: u16,
    },
    #[error("event {index} at t={t} is outside window [{t_start}, {t_end}]")]
    OutsideWindow {
        index: usize,
        t: u64,
        t_start: u64,
        t_end: u64,
    },
    #[error("events not sorted by timestamp at index {index}")]
    Unsorted { index: usize },
    #[error("invalid time window [{t0}, {t1}]")]
    InvalidWindow { t0: u64, t1: u64 },
    #[error("quarter turns must be 0..=3, got {0}")]
    InvalidQuarterTurns(u8),
    #[error("invalid noise configuration: {0}")]
    InvalidNoiseConfig(&'static str),
    #[error("{kind:?} value {value} at index {index} violates channel invariant")]
    InvalidChannelValue {
        kind: ChannelKind,
        index: usize,
        value: f64,
    },
    #[error("frame value {value} at index {index} outside [0, 1]")]
    FrameValueOutOfRange { index: usize, value: f64 },
    #[error("expected {expected} values, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("dimension mismatch: {expected:?} vs {found:?}")]
    DimensionMismatch {
        expected: (u16, u16),
        found: (u16, u16),
    },
    #[error("logarithm of non-positive intensity at pixel ({x}, {y})")]
    LogDomain { x: u16, y: u16 },
    #[error("threshold must be positive at pixel ({x}, {y}), got {value}")]
    NonPositiveTheta { x: u16, y: u16, value: f64 },
    #[error("threshold must be non-negative at pixel ({x}, {y}), got {value}")]
    NegativeTheta { x: u16, y: u16, value: f64 },
    #[error("offset k must be finite and non-negative, got {0}")]
    InvalidOffset(f64),
    #[error("empty input sequence")]
    Empty,
    #[error("invalid search configuration: {0}")]
    InvalidSearch(&'static str),
    #[error("need at least two frames, got {0}")]
    NotEnoughFrames(usize),
    #[error("frame timestamps must be strictly increasing (index {index})")]
    NonIncreasingTimestamps { index: usize },
    #[error("stream window [{t_start}, {t_end}] does not match frame times [{t0}, {t1}]")]
    WindowMismatch {
        t_start: u64,
        t_end: u64,
        t0: u64,
        t1: u64,
    },
}
