//! Locally normalised event surfaces (LNES), their visualisation and
//! augmentation, and the confidence-weighted frame buffer that carries the
//! previous input forward.

mod augment;
mod repm;
mod viz;

pub use augment::{augment_lnes, BinaryMask};
pub use repm::{
    make_confidence_map, normalize_input, ConfidenceMap, ConfidenceProvider, ConstantConfidence,
    FrameBuffer, NetworkInput, SegmentationConfidence, CONFIDENCE_COLS, CONFIDENCE_ROWS,
};
pub use viz::{lnes_to_rgb, RgbBuffer};

use crate::events::EventWindow;
use crate::exec::Execution;
use thiserror::Error;

pub const LNES_WIDTH: usize = 256;
pub const LNES_HEIGHT: usize = 192;

#[derive(Debug, Error, PartialEq)]
pub enum LnesError {
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("LNES blob is {len} bytes; expected {expected}")]
    BadBlob { len: usize, expected: usize },
    #[error("value {value} at index {index} lies outside [{lo}, {hi}]")]
    OutOfRange {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("output resolution must be non-zero")]
    EmptyResolution,
}

/// Two-channel time surface; channel 0 holds positive events, channel 1
/// negative. Stored interleaved as `height x width x 2`.
///
/// Zero means either "no event" or "an event exactly at the window start";
/// the encoding does not distinguish the two.
#[derive(Debug, Clone, PartialEq)]
pub struct LnesFrame {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl LnesFrame {
    pub fn zeros(width: usize, height: usize) -> Self {
        LnesFrame {
            width,
            height,
            data: vec![0.0; width * height * 2],
        }
    }

    /// Builds a frame from interleaved data, checking every value is in [0, 1].
    pub fn from_vec(width: usize, height: usize, data: Vec<f32>) -> Result<Self, LnesError> {
        if data.len() != width * height * 2 {
            return Err(LnesError::BadBlob {
                len: data.len() * 4,
                expected: width * height * 8,
            });
        }
        if let Some(index) = data.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(LnesError::OutOfRange {
                index,
                value: data[index] as f64,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(LnesFrame {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, channel: usize) -> usize {
        (y * self.width + x) * 2 + channel
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, channel: usize) -> f32 {
        self.data[self.index(x, y, channel)]
    }

    #[cfg(test)]
    pub(crate) fn set(&mut self, x: usize, y: usize, channel: usize, value: f32) {
        let i = self.index(x, y, channel);
        self.data[i] = value;
    }

    pub(crate) fn ensure_dims(&self, width: usize, height: usize) -> Result<(), LnesError> {
        if self.dims() != (width, height) {
            return Err(LnesError::ShapeMismatch {
                expected: (width, height),
                found: self.dims(),
            });
        }
        Ok(())
    }

    /// `width:u32, height:u32` followed by the interleaved values as f32,
    /// all little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        encode_f32_blob(self.width, self.height, self.data.iter().copied())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, LnesError> {
        let (width, height, data) = decode_f32_blob(bytes)?;
        LnesFrame::from_vec(width, height, data)
    }
}

pub(crate) fn encode_f32_blob(
    width: usize,
    height: usize,
    values: impl ExactSizeIterator<Item = f32>,
) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + values.len() * 4);
    out.extend_from_slice(&(width as u32).to_le_bytes());
    out.extend_from_slice(&(height as u32).to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub(crate) fn decode_f32_blob(bytes: &[u8]) -> Result<(usize, usize, Vec<f32>), LnesError> {
    if bytes.len() < 8 {
        return Err(LnesError::BadBlob {
            len: bytes.len(),
            expected: 8,
        });
    }
    let width = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let expected = 8 + width * height * 2 * 4;
    if bytes.len() != expected {
        return Err(LnesError::BadBlob {
            len: bytes.len(),
            expected,
        });
    }
    let data = bytes[8..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((width, height, data))
}

/// Encodes a window into an LNES frame of `out_width x out_height`.
///
/// Each event stores `(t - t_start) / duration` in its polarity channel; a
/// later event at the same pixel and polarity overwrites an earlier one.
/// Sensor coordinates map to the output grid by `x * out_width / sensor_width`
/// (floor), which is exact for 640x480 to 256x192.
pub fn encode_lnes(
    window: &EventWindow<'_>,
    out_width: usize,
    out_height: usize,
) -> Result<LnesFrame, LnesError> {
    if out_width == 0 || out_height == 0 {
        return Err(LnesError::EmptyResolution);
    }
    let mut frame = LnesFrame::zeros(out_width, out_height);
    encode_into(window, &mut frame);
    Ok(frame)
}

/// Re-encodes into an existing frame, reusing its allocation.
pub fn encode_into(window: &EventWindow<'_>, frame: &mut LnesFrame) {
    frame.data.fill(0.0);
    let sw = window.sensor_width() as usize;
    let sh = window.sensor_height() as usize;
    let (ow, oh) = frame.dims();
    let t0 = window.t_start();
    let duration = window.duration() as f64;
    for e in window.events() {
        let x = e.x as usize * ow / sw;
        let y = e.y as usize * oh / sh;
        let v = ((e.t - t0) as f64 / duration) as f32;
        let i = (y * ow + x) * 2 + e.polarity.channel();
        frame.data[i] = v;
    }
}

/// Encodes many windows, one frame per window, in window order.
pub fn encode_windows(
    windows: &[EventWindow<'_>],
    out_width: usize,
    out_height: usize,
    exec: Execution,
) -> Result<Vec<LnesFrame>, LnesError> {
    if out_width == 0 || out_height == 0 {
        return Err(LnesError::EmptyResolution);
    }
    Ok(exec.map(windows, |w| {
        let mut f = LnesFrame::zeros(out_width, out_height);
        encode_into(w, &mut f);
        f
    }))
}
