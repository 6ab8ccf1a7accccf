//! `EVT1` binary event streams.

use evkit_core::{Event, EventStream, Polarity};

use super::{container_len, open_container, Writer};
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"EVT1";
const HEADER_LEN: usize = 2 + 2 + 8 + 8 + 8;
const EVENT_LEN: usize = 8 + 2 + 2 + 1;

pub fn write_binary_events(stream: &EventStream) -> Vec<u8> {
    let mut w = Writer::new(&MAGIC, HEADER_LEN + EVENT_LEN * stream.len());
    w.u16(stream.width());
    w.u16(stream.height());
    w.u64(stream.t_start());
    w.u64(stream.t_end());
    w.u64(stream.len() as u64);
    for e in stream.events() {
        w.u64(e.t);
        w.u16(e.x);
        w.u16(e.y);
        w.i8(e.p.sign());
    }
    w.finish()
}

pub fn parse_binary_events(bytes: &[u8]) -> Result<EventStream> {
    let mut r = open_container(bytes, &MAGIC, HEADER_LEN, |probe| {
        probe.u16()?;
        probe.u16()?;
        probe.u64()?;
        probe.u64()?;
        let count = probe.u64()?;
        container_len(HEADER_LEN, count, EVENT_LEN, bytes.len())
    })?;
    let width = r.u16()?;
    let height = r.u16()?;
    let t_start = r.u64()?;
    let t_end = r.u64()?;
    let count = r.u64()? as usize;
    let mut events = Vec::with_capacity(count);
    for _ in 0..count {
        let t = r.u64()?;
        let x = r.u16()?;
        let y = r.u16()?;
        let sign = r.i8()?;
        let p = Polarity::from_sign(sign).ok_or(Error::Polarity(sign))?;
        events.push(Event::new(t, x, y, p));
    }
    Ok(EventStream::new(width, height, t_start, t_end, events)?)
}

pub fn is_evt1(bytes: &[u8]) -> bool {
    bytes.starts_with(&MAGIC)
}
