use super::{window_events, EventError, EventStream, RECORD_BYTES};

/// One 1920x1080 RGB frame at 3 bytes per pixel.
pub const RGB_1080P_BYTES: u64 = 1920 * 1080 * 3;
/// One 640x480 RGB frame at 3 bytes per pixel.
pub const RGB_VGA_BYTES: u64 = 640 * 480 * 3;

/// Per-window data volume of an event stream compared with raw RGB frames.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthStats {
    pub bytes_per_event: u64,
    pub event_count: u64,
    pub window_count: u64,
    pub mean_events_per_window: f64,
    pub mean_bytes_per_window: f64,
    pub rgb_1080p_bytes: u64,
    pub rgb_vga_bytes: u64,
    /// How many times larger a 1080p RGB frame is than the mean window.
    pub ratio_1080p: f64,
    pub ratio_vga: f64,
}

/// Bandwidth of `stream` split into non-overlapping windows of `duration`
/// microseconds.
pub fn bandwidth_report(stream: &EventStream, duration: u64) -> Result<BandwidthStats, EventError> {
    if stream.is_empty() {
        return Err(EventError::EmptyStream);
    }
    let windows = window_events(stream, duration, duration)?;
    let event_count = stream.len() as u64;
    let window_count = windows.len() as u64;
    let mean_events = event_count as f64 / window_count as f64;
    let mean_bytes = RECORD_BYTES as f64 * mean_events;
    Ok(BandwidthStats {
        bytes_per_event: RECORD_BYTES as u64,
        event_count,
        window_count,
        mean_events_per_window: mean_events,
        mean_bytes_per_window: mean_bytes,
        rgb_1080p_bytes: RGB_1080P_BYTES,
        rgb_vga_bytes: RGB_VGA_BYTES,
        ratio_1080p: RGB_1080P_BYTES as f64 / mean_bytes,
        ratio_vga: RGB_VGA_BYTES as f64 / mean_bytes,
    })
}
