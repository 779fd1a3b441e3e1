//! Event records, the 13-byte binary format, time windowing and bandwidth
//! accounting.

mod bandwidth;
mod io;
mod text;
mod window;

pub use bandwidth::{bandwidth_report, BandwidthStats, RGB_1080P_BYTES, RGB_VGA_BYTES};
pub use io::{
    read_event_stream, read_evt, write_event_stream, write_evt, EVT_HEADER_BYTES, EVT_MAGIC,
    RECORD_BYTES,
};
pub use text::{parse_event_csv, write_event_csv};
pub use window::{window_events, EventWindow};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EventError {
    #[error("blob length {len} is not a multiple of the {RECORD_BYTES}-byte record size")]
    TruncatedRecord { len: usize },
    #[error("event {index} at ({x}, {y}) lies outside the {width}x{height} sensor")]
    OutOfBounds {
        index: usize,
        x: u16,
        y: u16,
        width: u16,
        height: u16,
    },
    #[error("event {index} has timestamp {t} earlier than its predecessor {previous}")]
    NonMonotonicTimestamp { index: usize, previous: u64, t: u64 },
    #[error("event {index} has polarity byte {value}, expected +1 or -1")]
    InvalidPolarity { index: usize, value: i8 },
    #[error("window duration must be positive and stride must lie in (0, duration]; got duration {duration} us, stride {stride} us")]
    InvalidStride { duration: u64, stride: u64 },
    #[error("event {index} at t={t} lies outside window [{start}, {end}]")]
    OutsideWindow {
        index: usize,
        t: u64,
        start: u64,
        end: u64,
    },
    #[error("stream contains no events")]
    EmptyStream,
    #[error("bad .evt header: {0}")]
    BadHeader(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Sign of a brightness change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Negative,
    Positive,
}

impl Polarity {
    pub fn as_i8(self) -> i8 {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => -1,
        }
    }

    pub fn from_i8(value: i8) -> Option<Self> {
        match value {
            1 => Some(Polarity::Positive),
            -1 => Some(Polarity::Negative),
            _ => None,
        }
    }

    /// LNES channel index: 0 for positive, 1 for negative.
    #[inline]
    pub fn channel(self) -> usize {
        match self {
            Polarity::Positive => 0,
            Polarity::Negative => 1,
        }
    }
}

/// A single brightness-change event; `t` is in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Event {
    pub x: u16,
    pub y: u16,
    pub t: u64,
    pub polarity: Polarity,
}

impl Event {
    pub fn new(x: u16, y: u16, t: u64, polarity: Polarity) -> Self {
        Event { x, y, t, polarity }
    }
}

/// How out-of-order timestamps are handled when building a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimestampMode {
    /// Stable-sort the events by timestamp.
    #[default]
    Lenient,
    /// Reject the first event whose timestamp decreases.
    Strict,
}

/// A validated, time-ordered sequence of events from one sensor.
///
/// Immutable once built: every event is inside the sensor and timestamps are
/// non-decreasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventStream {
    width: u16,
    height: u16,
    events: Vec<Event>,
}

impl EventStream {
    pub fn new(
        width: u16,
        height: u16,
        mut events: Vec<Event>,
        mode: TimestampMode,
    ) -> Result<Self, EventError> {
        for (index, e) in events.iter().enumerate() {
            if e.x >= width || e.y >= height {
                return Err(EventError::OutOfBounds {
                    index,
                    x: e.x,
                    y: e.y,
                    width,
                    height,
                });
            }
        }
        if let Some(i) = events.windows(2).position(|w| w[1].t < w[0].t) {
            match mode {
                TimestampMode::Strict => {
                    return Err(EventError::NonMonotonicTimestamp {
                        index: i + 1,
                        previous: events[i].t,
                        t: events[i + 1].t,
                    })
                }
                TimestampMode::Lenient => events.sort_by_key(|e| e.t),
            }
        }
        Ok(EventStream {
            width,
            height,
            events,
        })
    }

    pub fn empty(width: u16, height: u16) -> Self {
        EventStream {
            width,
            height,
            events: Vec::new(),
        }
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn height(&self) -> u16 {
        self.height
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// First and last timestamp, if any events exist.
    pub fn time_span(&self) -> Option<(u64, u64)> {
        Some((self.events.first()?.t, self.events.last()?.t))
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lenient_mode_sorts_stably() {
        let evs = vec![
            Event::new(0, 0, 20, Polarity::Positive),
            Event::new(1, 0, 10, Polarity::Positive),
            Event::new(2, 0, 10, Polarity::Negative),
        ];
        let s = EventStream::new(4, 4, evs, TimestampMode::Lenient).unwrap();
        let xs: Vec<u16> = s.events().iter().map(|e| e.x).collect();
        assert_eq!(xs, vec![1, 2, 0]);
    }

    #[test]
    fn strict_mode_rejects_reordering() {
        let evs = vec![
            Event::new(0, 0, 20, Polarity::Positive),
            Event::new(1, 0, 10, Polarity::Positive),
        ];
        assert_eq!(
            EventStream::new(4, 4, evs, TimestampMode::Strict),
            Err(EventError::NonMonotonicTimestamp {
                index: 1,
                previous: 20,
                t: 10
            })
        );
    }

    #[test]
    fn bounds_checked() {
        let evs = vec![Event::new(4, 0, 0, Polarity::Positive)];
        assert!(matches!(
            EventStream::new(4, 4, evs, TimestampMode::Lenient),
            Err(EventError::OutOfBounds { index: 0, .. })
        ));
    }

    #[test]
    fn polarity_bytes() {
        assert_eq!(Polarity::from_i8(1), Some(Polarity::Positive));
        assert_eq!(Polarity::from_i8(-1), Some(Polarity::Negative));
        assert_eq!(Polarity::from_i8(0), None);
        assert_eq!(Polarity::Negative.as_i8(), -1);
    }
}
