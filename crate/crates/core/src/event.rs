//! Events, validated streams and stream transforms.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Sign of a brightness change.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(i8)]
pub enum Polarity {
    Negative = -1,
    Positive = 1,
}

impl Polarity {
    pub fn from_sign(sign: i8) -> Option<Self> {
        match sign {
            -1 => Some(Polarity::Negative),
            1 => Some(Polarity::Positive),
            _ => None,
        }
    }

    #[inline]
    pub fn sign(self) -> i8 {
        self as i8
    }

    pub fn flipped(self) -> Self {
        match self {
            Polarity::Negative => Polarity::Positive,
            Polarity::Positive => Polarity::Negative,
        }
    }
}

/// A single brightness-change record. `t` is in microseconds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Event {
    pub t: u64,
    pub x: u16,
    pub y: u16,
    pub p: Polarity,
}

impl Event {
    pub const fn new(t: u64, x: u16, y: u16, p: Polarity) -> Self {
        Self { t, x, y, p }
    }
}

/// Events on a `width x height` sensor inside the window `[t_start, t_end]`,
/// sorted by non-decreasing timestamp.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventStream {
    width: u16,
    height: u16,
    t_start: u64,
    t_end: u64,
    events: Vec<Event>,
}

impl EventStream {
    /// Validates ordering, bounds and the window.
    pub fn new(
        width: u16,
        height: u16,
        t_start: u64,
        t_end: u64,
        events: Vec<Event>,
    ) -> Result<Self> {
        if t_start > t_end {
            return Err(Error::InvalidWindow {
                t0: t_start,
                t1: t_end,
            });
        }
        let mut prev = t_start;
        for (index, e) in events.iter().enumerate() {
            if e.x >= width || e.y >= height {
                return Err(Error::OutOfBounds {
                    x: e.x as u64,
                    y: e.y as u64,
                    width,
                    height,
                });
            }
            if e.t < t_start || e.t > t_end {
                return Err(Error::OutsideWindow {
                    index,
                    t: e.t,
                    t_start,
                    t_end,
                });
            }
            if e.t < prev {
                return Err(Error::Unsorted { index });
            }
            prev = e.t;
        }
        Ok(Self {
            width,
            height,
            t_start,
            t_end,
            events,
        })
    }

    /// Stably sorts `events` and takes the window from the min/max timestamp
    /// (`[0, 0]` when empty).
    pub fn from_unsorted(width: u16, height: u16, mut events: Vec<Event>) -> Result<Self> {
        events.sort_by_key(|e| e.t);
        let t_start = events.first().map_or(0, |e| e.t);
        let t_end = events.last().map_or(0, |e| e.t);
        Self::new(width, height, t_start, t_end, events)
    }

    pub fn empty(width: u16, height: u16, t_start: u64, t_end: u64) -> Result<Self> {
        Self::new(width, height, t_start, t_end, Vec::new())
    }

    /// Skips validation. Callers guarantee every invariant.
    pub(crate) fn from_parts_unchecked(
        width: u16,
        height: u16,
        t_start: u64,
        t_end: u64,
        events: Vec<Event>,
    ) -> Self {
        debug_assert!(Self::new(width, height, t_start, t_end, events.clone()).is_ok());
        Self {
            width,
            height,
            t_start,
            t_end,
            events,
        }
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

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn t_start(&self) -> u64 {
        self.t_start
    }

    pub fn t_end(&self) -> u64 {
        self.t_end
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Events with `t0 <= t < t1`; the result's window is `[t0, t1]`.
    pub fn slice_by_time(&self, t0: u64, t1: u64) -> Result<Self> {
        if t0 > t1 {
            return Err(Error::InvalidWindow { t0, t1 });
        }
        let lo = self.events.partition_point(|e| e.t < t0);
        let hi = self.events.partition_point(|e| e.t < t1);
        let events = if lo < hi {
            self.events[lo..hi].to_vec()
        } else {
            Vec::new()
        };
        Ok(Self::from_parts_unchecked(
            self.width,
            self.height,
            t0,
            t1,
            events,
        ))
    }

    /// Time reversal inside the window: `(t, x, y, p) -> (t_start + t_end - t, x, y, -p)`.
    pub fn reverse(&self) -> Self {
        let pivot = self.t_start + self.t_end;
        let events = self
            .events
            .iter()
            .rev()
            .map(|e| Event::new(pivot - e.t, e.x, e.y, e.p.flipped()))
            .collect();
        Self::from_parts_unchecked(self.width, self.height, self.t_start, self.t_end, events)
    }

    /// Rotates coordinates by `quarter_turns` (0..=3); one turn maps
    /// `(x, y) -> (height - 1 - y, x)` and swaps width and height.
    pub fn rotate90(&self, quarter_turns: u8) -> Result<Self> {
        if quarter_turns > 3 {
            return Err(Error::InvalidQuarterTurns(quarter_turns));
        }
        let (w, h) = (self.width, self.height);
        let map = |e: &Event| -> Event {
            let (x, y) = (e.x, e.y);
            let (nx, ny) = match quarter_turns {
                0 => (x, y),
                1 => (h - 1 - y, x),
                2 => (w - 1 - x, h - 1 - y),
                _ => (y, w - 1 - x),
            };
            Event::new(e.t, nx, ny, e.p)
        };
        let (nw, nh) = if quarter_turns % 2 == 1 { (h, w) } else { (w, h) };
        let events = self.events.iter().map(map).collect();
        Ok(Self::from_parts_unchecked(
            nw,
            nh,
            self.t_start,
            self.t_end,
            events,
        ))
    }

    /// Adds `offset` to every timestamp and to the window.
    pub fn shifted(&self, offset: u64) -> Self {
        let events = self
            .events
            .iter()
            .map(|e| Event::new(e.t + offset, e.x, e.y, e.p))
            .collect();
        Self::from_parts_unchecked(
            self.width,
            self.height,
            self.t_start + offset,
            self.t_end + offset,
            events,
        )
    }
}
