use super::LnesFrame;

/// 8-bit interleaved RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbBuffer {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl RgbBuffer {
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

#[inline]
fn to_byte(v: f32) -> u8 {
    (v as f64 * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Positive channel to red, negative channel to blue, green left at zero.
/// Values scale by 255 and round half up.
pub fn lnes_to_rgb(frame: &LnesFrame) -> RgbBuffer {
    let mut data = Vec::with_capacity(frame.width() * frame.height() * 3);
    for px in frame.data().chunks_exact(2) {
        data.extend_from_slice(&[to_byte(px[0]), 0, to_byte(px[1])]);
    }
    RgbBuffer {
        width: frame.width(),
        height: frame.height(),
        data,
    }
}
