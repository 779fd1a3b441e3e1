use super::{Event, EventError, EventStream};

/// A contiguous run of events that fall inside `[t_start, t_start + duration)`.
///
/// The last window of a stream is closed on the right, so an event exactly
/// `duration` after the start is kept rather than spilling into an extra
/// window. `partial` marks a trailing window whose interval runs past the
/// stream's final timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventWindow<'a> {
    events: &'a [Event],
    t_start: u64,
    duration: u64,
    partial: bool,
    sensor_width: u16,
    sensor_height: u16,
}

impl<'a> EventWindow<'a> {
    /// Wraps a slice as a window, checking `t_start <= t <= t_start + duration`
    /// for every event.
    pub fn new(
        events: &'a [Event],
        t_start: u64,
        duration: u64,
        sensor_width: u16,
        sensor_height: u16,
    ) -> Result<Self, EventError> {
        if duration == 0 {
            return Err(EventError::InvalidStride {
                duration,
                stride: duration,
            });
        }
        let end = t_start + duration;
        for (index, e) in events.iter().enumerate() {
            if e.t < t_start || e.t > end {
                return Err(EventError::OutsideWindow {
                    index,
                    t: e.t,
                    start: t_start,
                    end,
                });
            }
            if e.x >= sensor_width || e.y >= sensor_height {
                return Err(EventError::OutOfBounds {
                    index,
                    x: e.x,
                    y: e.y,
                    width: sensor_width,
                    height: sensor_height,
                });
            }
        }
        Ok(EventWindow {
            events,
            t_start,
            duration,
            partial: false,
            sensor_width,
            sensor_height,
        })
    }

    pub fn events(&self) -> &'a [Event] {
        self.events
    }

    pub fn t_start(&self) -> u64 {
        self.t_start
    }

    pub fn duration(&self) -> u64 {
        self.duration
    }

    pub fn t_end(&self) -> u64 {
        self.t_start + self.duration
    }

    pub fn is_partial(&self) -> bool {
        self.partial
    }

    pub fn sensor_width(&self) -> u16 {
        self.sensor_width
    }

    pub fn sensor_height(&self) -> u16 {
        self.sensor_height
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Splits a stream into windows of `duration` microseconds whose starts are
/// `stride` apart, beginning at the first event.
///
/// `stride == duration` tiles the timeline without overlap; a smaller stride
/// yields overlapping windows in which an event appears once per window
/// covering it. Windows between bursts may be empty.
pub fn window_events(
    stream: &EventStream,
    duration: u64,
    stride: u64,
) -> Result<Vec<EventWindow<'_>>, EventError> {
    if duration == 0 || stride == 0 || stride > duration {
        return Err(EventError::InvalidStride { duration, stride });
    }
    let Some((first, last)) = stream.time_span() else {
        return Ok(Vec::new());
    };
    let span = last - first;
    let count = if span <= duration {
        1
    } else {
        (span - duration).div_ceil(stride) + 1
    };

    let events = stream.events();
    let mut out = Vec::with_capacity(count as usize);
    for k in 0..count {
        let start = first + k * stride;
        let end = start + duration;
        let is_last = k + 1 == count;
        let lo = events.partition_point(|e| e.t < start);
        let hi = if is_last {
            events.len()
        } else {
            events.partition_point(|e| e.t < end)
        };
        out.push(EventWindow {
            events: &events[lo..hi],
            t_start: start,
            duration,
            partial: is_last && end > last,
            sensor_width: stream.width(),
            sensor_height: stream.height(),
        });
    }
    Ok(out)
}
