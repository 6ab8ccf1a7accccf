//! On-disk formats.
//!
//! Binary containers share one layout: a 4-byte magic, a little-endian
//! header and payload, then a CRC-32 (IEEE) over every preceding byte.
//!
//! | magic  | contents                                                        |
//! |--------|-----------------------------------------------------------------|
//! | `EVT1` | u16 width, u16 height, u64 t_start, u64 t_end, u64 count, then per event u64 t, u16 x, u16 y, i8 p |
//! | `EVRP` | u16 width, u16 height, u16 channels, then f32 values per channel, row-major |
//! | `ECAM` | u16 width, u16 height, f64 k, then f32 theta, row-major          |

pub mod ecam;
pub mod evrp;
pub mod evt1;
pub mod manifest;
pub mod pgm;
pub mod text;

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub(crate) fn new(magic: &[u8; 4], capacity: usize) -> Self {
        let mut buf = Vec::with_capacity(capacity + 8);
        buf.extend_from_slice(magic);
        Self { buf }
    }

    pub(crate) fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub(crate) fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub(crate) fn i8(&mut self, v: i8) {
        self.buf.push(v as u8);
    }

    pub(crate) fn f32(&mut self, v: f32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub(crate) fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub(crate) fn finish(mut self) -> Vec<u8> {
        let crc = crc32fast::hash(&self.buf);
        self.buf.extend_from_slice(&crc.to_le_bytes());
        self.buf
    }
}

/// Little-endian cursor over a checked payload.
pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let slice = self.bytes.get(self.pos..end).ok_or(Error::Truncated {
            needed: end,
            available: self.bytes.len(),
        })?;
        self.pos = end;
        Ok(slice.try_into().expect("length checked"))
    }

    pub(crate) fn u16(&mut self) -> Result<u16> {
        self.take().map(u16::from_le_bytes)
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        self.take().map(u64::from_le_bytes)
    }

    pub(crate) fn i8(&mut self) -> Result<i8> {
        self.take::<1>().map(|b| b[0] as i8)
    }

    pub(crate) fn f32(&mut self) -> Result<f32> {
        self.take().map(f32::from_le_bytes)
    }

    pub(crate) fn f64(&mut self) -> Result<f64> {
        self.take().map(f64::from_le_bytes)
    }
}

/// Checks magic, exact length (from `expected_len`, given the bytes after
/// the magic) and CRC; returns a reader positioned after the magic.
pub(crate) fn open_container<'a>(
    bytes: &'a [u8],
    magic: &[u8; 4],
    header_len: usize,
    expected_len: impl FnOnce(&mut Reader<'a>) -> Result<usize>,
) -> Result<Reader<'a>> {
    if bytes.len() < 4 || &bytes[..4] != magic {
        return Err(Error::BadMagic {
            expected: *magic,
            found: bytes[..bytes.len().min(4)].to_vec(),
        });
    }
    let min = 4 + header_len + 4;
    if bytes.len() < min {
        return Err(Error::Truncated {
            needed: min,
            available: bytes.len(),
        });
    }
    let mut probe = Reader { bytes, pos: 4 };
    let needed = expected_len(&mut probe)?;
    if bytes.len() < needed {
        return Err(Error::Truncated {
            needed,
            available: bytes.len(),
        });
    }
    if bytes.len() > needed {
        return Err(Error::TrailingBytes {
            extra: bytes.len() - needed,
        });
    }
    let (payload, tail) = bytes.split_at(needed - 4);
    let stored = u32::from_le_bytes(tail.try_into().expect("4 bytes"));
    let computed = crc32fast::hash(payload);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }
    Ok(Reader {
        bytes: payload,
        pos: 4,
    })
}

/// Total container size for `header` bytes plus `items * item_size`, or
/// `Truncated` on overflow.
pub(crate) fn container_len(header: usize, items: u64, item_size: usize, available: usize) -> Result<usize> {
    usize::try_from(items)
        .ok()
        .and_then(|n| n.checked_mul(item_size))
        .and_then(|n| n.checked_add(4 + header + 4))
        .ok_or(Error::Truncated {
            needed: usize::MAX,
            available,
        })
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads EVT1 (detected by magic) or text events. Text input needs `dims`.
pub fn load_events(
    path: &Path,
    dims: Option<(u16, u16)>,
    zero: text::ZeroPolarity,
) -> Result<evkit_core::EventStream> {
    let bytes = read_file(path)?;
    if evt1::is_evt1(&bytes) {
        let s = evt1::parse_binary_events(&bytes)?;
        if let Some(d) = dims {
            if d != s.dims() {
                return Err(evkit_core::Error::DimensionMismatch {
                    expected: d,
                    found: s.dims(),
                }
                .into());
            }
        }
        Ok(s)
    } else {
        let (w, h) = dims.ok_or_else(|| {
            Error::Invalid(format!(
                "{}: text events need --width and --height",
                path.display()
            ))
        })?;
        text::parse_text_events(&bytes, w, h, zero)
    }
}
