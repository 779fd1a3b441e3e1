//! Plain-text `x,y,t,p` event lists, used for conversion from other tools.

use super::{Event, EventError, EventStream, Polarity, TimestampMode};
use std::fmt::Write;

/// Parses one event per line as `x,y,t_us,p` (commas or whitespace). Blank
/// lines and lines starting with `#` are ignored. Polarity accepts `1`/`-1`
/// and, for compatibility with DVS dumps, `0` as negative.
pub fn parse_event_csv(
    text: &str,
    width: u16,
    height: u16,
    mode: TimestampMode,
) -> Result<EventStream, EventError> {
    let mut events = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| EventError::Parse {
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if fields.len() != 4 {
            return Err(err(format!("expected 4 fields, found {}", fields.len())));
        }
        let x: u16 = fields[0].parse().map_err(|e| err(format!("x: {e}")))?;
        let y: u16 = fields[1].parse().map_err(|e| err(format!("y: {e}")))?;
        let t: u64 = fields[2].parse().map_err(|e| err(format!("t: {e}")))?;
        let p: i8 = fields[3].parse().map_err(|e| err(format!("p: {e}")))?;
        let polarity = match p {
            1 => Polarity::Positive,
            0 | -1 => Polarity::Negative,
            other => return Err(err(format!("polarity {other}"))),
        };
        events.push(Event::new(x, y, t, polarity));
    }
    EventStream::new(width, height, events, mode)
}

pub fn write_event_csv(stream: &EventStream) -> String {
    let mut out = String::with_capacity(stream.len() * 16);
    for e in stream.events() {
        let _ = writeln!(out, "{},{},{},{}", e.x, e.y, e.t, e.polarity.as_i8());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_writes() {
        let text = "# x,y,t,p\n1,2,10,1\n3 4 20 0\n\n5,6,30,-1\n";
        let s = parse_event_csv(text, 8, 8, TimestampMode::Strict).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.events()[1].polarity, Polarity::Negative);
        assert_eq!(write_event_csv(&s), "1,2,10,1\n3,4,20,-1\n5,6,30,-1\n");
    }

    #[test]
    fn bad_line_reports_number() {
        let err = parse_event_csv("1,2,3\n", 8, 8, TimestampMode::Strict).unwrap_err();
        assert!(matches!(err, EventError::Parse { line: 1, .. }));
    }
}
