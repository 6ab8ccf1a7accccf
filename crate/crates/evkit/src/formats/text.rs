//! Plain-text events: one `t x y p` line per event.

use std::fmt::Write as _;

use evkit_core::{Event, EventStream, Polarity};

use crate::error::{Error, Result};

/// How a `0` in the polarity column is read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum ZeroPolarity {
    /// `0` means a negative event (common dataset convention).
    #[default]
    Negative,
    /// Only `-1` and `1` are accepted.
    Reject,
}

/// Parses whitespace-separated `t x y p` lines. Blank lines and lines
/// starting with `#` are skipped. Unsorted input is stably sorted; the window
/// spans the smallest to largest timestamp (`[0, 0]` when empty).
pub fn parse_text_events(
    source: &[u8],
    width: u16,
    height: u16,
    zero: ZeroPolarity,
) -> Result<EventStream> {
    let text = std::str::from_utf8(source).map_err(|e| Error::Malformed {
        line: source[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1,
        message: "invalid UTF-8".into(),
    })?;
    let mut events = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let malformed = |message: String| Error::Malformed { line, message };
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(malformed(format!("expected 4 fields `t x y p`, got {}", fields.len())));
        }
        let int = |s: &str, name: &str| -> Result<i64> {
            s.parse::<i64>()
                .map_err(|_| malformed(format!("{name}: not an integer: {s:?}")))
        };
        let t = int(fields[0], "t")?;
        let x = int(fields[1], "x")?;
        let y = int(fields[2], "y")?;
        let p = int(fields[3], "p")?;
        if t < 0 {
            return Err(malformed(format!("negative timestamp {t}")));
        }
        if x < 0 || x >= width as i64 {
            return Err(malformed(format!("x={x} out of bounds for width {width}")));
        }
        if y < 0 || y >= height as i64 {
            return Err(malformed(format!("y={y} out of bounds for height {height}")));
        }
        let p = match (p, zero) {
            (1, _) => Polarity::Positive,
            (-1, _) | (0, ZeroPolarity::Negative) => Polarity::Negative,
            _ => return Err(malformed(format!("invalid polarity {p}"))),
        };
        events.push(Event::new(t as u64, x as u16, y as u16, p));
    }
    Ok(EventStream::from_unsorted(width, height, events)?)
}

pub fn write_text_events(stream: &EventStream) -> String {
    let mut out = String::with_capacity(stream.len() * 16);
    for e in stream.events() {
        let _ = writeln!(out, "{} {} {} {}", e.t, e.x, e.y, e.p.sign());
    }
    out
}
