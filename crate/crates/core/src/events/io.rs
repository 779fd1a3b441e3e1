use super::{Event, EventError, EventStream, Polarity, TimestampMode};

/// On-wire size of one event: x:u16, y:u16, t:u64 (microseconds), p:i8,
/// all little-endian.
pub const RECORD_BYTES: usize = 13;

pub const EVT_MAGIC: &[u8; 4] = b"EVT1";
/// Magic, width:u16, height:u16, event count:u64.
pub const EVT_HEADER_BYTES: usize = 16;

fn decode_record(index: usize, rec: &[u8]) -> Result<Event, EventError> {
    let x = u16::from_le_bytes([rec[0], rec[1]]);
    let y = u16::from_le_bytes([rec[2], rec[3]]);
    let t = u64::from_le_bytes(rec[4..12].try_into().expect("8-byte slice"));
    let p = rec[12] as i8;
    let polarity = Polarity::from_i8(p).ok_or(EventError::InvalidPolarity { index, value: p })?;
    Ok(Event { x, y, t, polarity })
}

fn encode_record(e: &Event, out: &mut Vec<u8>) {
    out.extend_from_slice(&e.x.to_le_bytes());
    out.extend_from_slice(&e.y.to_le_bytes());
    out.extend_from_slice(&e.t.to_le_bytes());
    out.push(e.polarity.as_i8() as u8);
}

/// Decodes a headerless blob of 13-byte records.
pub fn read_event_stream(
    bytes: &[u8],
    width: u16,
    height: u16,
    mode: TimestampMode,
) -> Result<EventStream, EventError> {
    if !bytes.len().is_multiple_of(RECORD_BYTES) {
        return Err(EventError::TruncatedRecord { len: bytes.len() });
    }
    let events = bytes
        .chunks_exact(RECORD_BYTES)
        .enumerate()
        .map(|(i, rec)| decode_record(i, rec))
        .collect::<Result<Vec<_>, _>>()?;
    EventStream::new(width, height, events, mode)
}

/// Encodes the stream's events as a headerless record blob.
pub fn write_event_stream(stream: &EventStream) -> Vec<u8> {
    let mut out = Vec::with_capacity(stream.len() * RECORD_BYTES);
    for e in stream.events() {
        encode_record(e, &mut out);
    }
    out
}

/// Reads a `.evt` file image: 16-byte header followed by records.
pub fn read_evt(bytes: &[u8], mode: TimestampMode) -> Result<EventStream, EventError> {
    if bytes.len() < EVT_HEADER_BYTES {
        return Err(EventError::BadHeader(format!(
            "file is {} bytes, shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[0..4] != EVT_MAGIC {
        return Err(EventError::BadHeader("missing EVT1 magic".into()));
    }
    let width = u16::from_le_bytes([bytes[4], bytes[5]]);
    let height = u16::from_le_bytes([bytes[6], bytes[7]]);
    let count = u64::from_le_bytes(bytes[8..16].try_into().expect("8-byte slice"));
    let body = &bytes[EVT_HEADER_BYTES..];
    let stream = read_event_stream(body, width, height, mode)?;
    if stream.len() as u64 != count {
        return Err(EventError::BadHeader(format!(
            "header declares {count} events, body holds {}",
            stream.len()
        )));
    }
    Ok(stream)
}

pub fn write_evt(stream: &EventStream) -> Vec<u8> {
    let mut out = Vec::with_capacity(EVT_HEADER_BYTES + stream.len() * RECORD_BYTES);
    out.extend_from_slice(EVT_MAGIC);
    out.extend_from_slice(&stream.width().to_le_bytes());
    out.extend_from_slice(&stream.height().to_le_bytes());
    out.extend_from_slice(&(stream.len() as u64).to_le_bytes());
    out.extend_from_slice(&write_event_stream(stream));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stream(events: Vec<Event>) -> EventStream {
        EventStream::new(640, 480, events, TimestampMode::Strict).unwrap()
    }

    #[test]
    fn origin_record() {
        let blob = [0u8, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1];
        let s = read_event_stream(&blob, 640, 480, TimestampMode::Strict).unwrap();
        assert_eq!(s.events(), &[Event::new(0, 0, 0, Polarity::Positive)]);
    }

    #[test]
    fn empty_blob_is_empty_stream() {
        let s = read_event_stream(&[], 640, 480, TimestampMode::Strict).unwrap();
        assert!(s.is_empty());
        assert!(write_event_stream(&s).is_empty());
    }

    #[test]
    fn one_event_is_thirteen_bytes() {
        let s = stream(vec![Event::new(3, 4, 5, Polarity::Negative)]);
        assert_eq!(write_event_stream(&s).len(), 13);
    }

    #[test]
    fn two_events_same_pixel() {
        let s = stream(vec![
            Event::new(5, 7, 1000, Polarity::Negative),
            Event::new(5, 7, 2000, Polarity::Positive),
        ]);
        let blob = write_event_stream(&s);
        assert_eq!(blob.len(), 26);
        // x=5, y=7, t=1000 little-endian, p=-1
        assert_eq!(&blob[..13], &[5, 0, 7, 0, 0xE8, 0x03, 0, 0, 0, 0, 0, 0, 0xFF]);
        let back = read_event_stream(&blob, 640, 480, TimestampMode::Strict).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn truncated_blob() {
        assert_eq!(
            read_event_stream(&[0u8; 14], 640, 480, TimestampMode::Strict),
            Err(EventError::TruncatedRecord { len: 14 })
        );
    }

    #[test]
    fn zero_polarity_rejected() {
        let blob = [0u8; 13];
        assert_eq!(
            read_event_stream(&blob, 640, 480, TimestampMode::Strict),
            Err(EventError::InvalidPolarity { index: 0, value: 0 })
        );
    }

    #[test]
    fn out_of_bounds_rejected() {
        let s = EventStream::new(
            1000,
            1000,
            vec![Event::new(700, 10, 0, Polarity::Positive)],
            TimestampMode::Strict,
        )
        .unwrap();
        let blob = write_event_stream(&s);
        assert!(matches!(
            read_event_stream(&blob, 640, 480, TimestampMode::Strict),
            Err(EventError::OutOfBounds { x: 700, .. })
        ));
    }

    #[test]
    fn evt_header_checks() {
        let s = stream(vec![Event::new(1, 2, 3, Polarity::Positive)]);
        let mut file = write_evt(&s);
        assert_eq!(file.len(), EVT_HEADER_BYTES + RECORD_BYTES);
        assert_eq!(read_evt(&file, TimestampMode::Strict).unwrap(), s);
        file[8] = 2;
        assert!(matches!(
            read_evt(&file, TimestampMode::Strict),
            Err(EventError::BadHeader(_))
        ));
        file[0] = b'X';
        assert!(matches!(
            read_evt(&file, TimestampMode::Strict),
            Err(EventError::BadHeader(_))
        ));
    }

    fn arb_events(n: usize) -> impl Strategy<Value = Vec<Event>> {
        prop::collection::vec((0u16..640, 0u16..480, 0u64..50_000, any::<bool>()), 0..n).prop_map(
            |raw| {
                let mut evs: Vec<Event> = raw
                    .into_iter()
                    .map(|(x, y, t, p)| {
                        Event::new(x, y, t, if p { Polarity::Positive } else { Polarity::Negative })
                    })
                    .collect();
                evs.sort_by_key(|e| e.t);
                evs
            },
        )
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(events in arb_events(1000)) {
            let s = stream(events);
            let blob = write_event_stream(&s);
            prop_assert_eq!(blob.len(), s.len() * RECORD_BYTES);
            prop_assert_eq!(read_event_stream(&blob, 640, 480, TimestampMode::Strict).unwrap(), s.clone());
            prop_assert_eq!(read_evt(&write_evt(&s), TimestampMode::Strict).unwrap(), s);
        }
    }
}
