//! Binary PGM (`P5`) images with 8-bit samples.

use evkit_core::Frame;

use crate::error::{Error, Result};

/// Width, height and raw samples of a P5 image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gray8 {
    pub width: u16,
    pub height: u16,
    pub data: Vec<u8>,
}

fn header_token(bytes: &[u8], pos: &mut usize) -> Result<u32> {
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                    *pos += 1;
                }
            }
            Some(_) => break,
            None => return Err(Error::Pgm("unexpected end of header".into())),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Pgm(format!("bad header field at byte {start}")))
}

pub fn read_pgm(bytes: &[u8]) -> Result<Gray8> {
    if !bytes.starts_with(b"P5") {
        return Err(Error::Pgm("not a binary PGM (P5)".into()));
    }
    let mut pos = 2;
    let width = header_token(bytes, &mut pos)?;
    let height = header_token(bytes, &mut pos)?;
    let maxval = header_token(bytes, &mut pos)?;
    if !(1..=255).contains(&maxval) {
        return Err(Error::Pgm(format!("unsupported maxval {maxval}")));
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::Pgm("missing whitespace after maxval".into()));
    }
    pos += 1;
    let (width, height) = match (u16::try_from(width), u16::try_from(height)) {
        (Ok(w), Ok(h)) => (w, h),
        _ => return Err(Error::Pgm(format!("image too large: {width}x{height}"))),
    };
    let n = width as usize * height as usize;
    let data = bytes
        .get(pos..pos + n)
        .ok_or(Error::Truncated {
            needed: pos + n,
            available: bytes.len(),
        })?
        .to_vec();
    let data = if maxval == 255 {
        data
    } else {
        data.iter()
            .map(|&v| (v.min(maxval as u8) as u32 * 255 / maxval) as u8)
            .collect()
    };
    Ok(Gray8 {
        width,
        height,
        data,
    })
}

pub fn write_pgm(img: &Gray8) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

/// Sample `v` becomes `v / 255`.
pub fn frame_from_pgm(bytes: &[u8], t: u64) -> Result<Frame> {
    let img = read_pgm(bytes)?;
    Ok(Frame::new(
        img.width,
        img.height,
        img.data.iter().map(|&v| v as f64 / 255.0).collect(),
        t,
    )?)
}

/// Rounds `v * 255` to the nearest sample.
pub fn quantize(frame: &Frame) -> Gray8 {
    Gray8 {
        width: frame.width(),
        height: frame.height(),
        data: frame
            .values()
            .iter()
            .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect(),
    }
}

pub fn frame_to_pgm(frame: &Frame) -> Vec<u8> {
    write_pgm(&quantize(frame))
}
