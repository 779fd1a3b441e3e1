//! Residual event propagation: the previous network input, weighted by the
//! previous confidence map, is added to the current LNES frame.

use super::{LnesError, LnesFrame};
use crate::grid::Grid;

pub const CONFIDENCE_ROWS: usize = 48;
pub const CONFIDENCE_COLS: usize = 64;

/// Per-pixel weights in [0, 1] at heatmap resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceMap(Grid);

impl ConfidenceMap {
    pub fn new(grid: Grid) -> Result<Self, LnesError> {
        if let Some(index) = grid.data().iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(LnesError::OutOfRange {
                index,
                value: grid.data()[index],
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(ConfidenceMap(grid))
    }

    pub fn constant(rows: usize, cols: usize, value: f64) -> Result<Self, LnesError> {
        ConfidenceMap::new(Grid::filled(rows, cols, value))
    }

    pub fn grid(&self) -> &Grid {
        &self.0
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `sigmoid(seg * feature)`, elementwise.
pub fn make_confidence_map(seg_mask: &Grid, feature_map: &Grid) -> Result<ConfidenceMap, LnesError> {
    if seg_mask.shape() != feature_map.shape() {
        return Err(LnesError::ShapeMismatch {
            expected: seg_mask.shape(),
            found: feature_map.shape(),
        });
    }
    let data = seg_mask
        .data()
        .iter()
        .zip(feature_map.data())
        .map(|(s, f)| sigmoid(s * f))
        .collect();
    let grid = Grid::from_vec(seg_mask.rows(), seg_mask.cols(), data).expect("shape preserved");
    Ok(ConfidenceMap(grid))
}

/// Network input in [-1, 1], interleaved `height x width x 2` like
/// [`LnesFrame`].
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkInput {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl NetworkInput {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize, channel: usize) -> f64 {
        self.data[(y * self.width + x) * 2 + channel]
    }

    /// Same layout as [`LnesFrame::to_bytes`], values narrowed to f32.
    pub fn to_bytes(&self) -> Vec<u8> {
        super::encode_f32_blob(self.width, self.height, self.data.iter().map(|&v| v as f32))
    }

    /// Maps back to [0, 1] per channel for visualisation.
    pub fn to_unit_frame(&self) -> LnesFrame {
        let data = self
            .data
            .iter()
            .map(|&v| ((v + 1.0) * 0.5).clamp(0.0, 1.0) as f32)
            .collect();
        LnesFrame {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

/// Affine map to [-1, 1]: `2 * v / m - 1` with `m = max(1, max(values))`.
///
/// A plain LNES frame (max <= 1) is mapped without rescaling and an all-zero
/// frame becomes -1 everywhere.
pub fn normalize_input(width: usize, height: usize, values: &[f64]) -> NetworkInput {
    assert_eq!(values.len(), width * height * 2, "input length");
    let m = values.iter().copied().fold(1.0, f64::max);
    let data = values.iter().map(|&v| 2.0 * (v / m) - 1.0).collect();
    NetworkInput {
        width,
        height,
        data,
    }
}

/// Source of the confidence map produced for each new input.
pub trait ConfidenceProvider {
    fn confidence(&mut self, input: &NetworkInput) -> ConfidenceMap;
}

impl<F> ConfidenceProvider for F
where
    F: FnMut(&NetworkInput) -> ConfidenceMap,
{
    fn confidence(&mut self, input: &NetworkInput) -> ConfidenceMap {
        self(input)
    }
}

/// Returns the same map for every frame.
#[derive(Debug, Clone)]
pub struct ConstantConfidence(pub ConfidenceMap);

impl ConfidenceProvider for ConstantConfidence {
    fn confidence(&mut self, _input: &NetworkInput) -> ConfidenceMap {
        self.0.clone()
    }
}

/// Confidence from a sequence of ground-truth segmentation masks:
/// `sigmoid(mask_q * feature)` for frame `q`. The last mask repeats once the
/// sequence runs out.
#[derive(Debug, Clone)]
pub struct SegmentationConfidence {
    masks: Vec<Grid>,
    feature: Grid,
    next: usize,
}

impl SegmentationConfidence {
    pub fn new(masks: Vec<Grid>, feature: Grid) -> Result<Self, LnesError> {
        let Some(first) = masks.first() else {
            return Err(LnesError::ShapeMismatch {
                expected: feature.shape(),
                found: (0, 0),
            });
        };
        let shape = first.shape();
        for m in masks.iter().chain(std::iter::once(&feature)) {
            if m.shape() != shape {
                return Err(LnesError::ShapeMismatch {
                    expected: shape,
                    found: m.shape(),
                });
            }
        }
        Ok(SegmentationConfidence {
            masks,
            feature,
            next: 0,
        })
    }

    /// Uses a constant feature map of `gain`.
    pub fn with_gain(masks: Vec<Grid>, gain: f64) -> Result<Self, LnesError> {
        let (r, c) = masks.first().map(Grid::shape).unwrap_or((0, 0));
        Self::new(masks, Grid::filled(r, c, gain))
    }
}

impl ConfidenceProvider for SegmentationConfidence {
    fn confidence(&mut self, _input: &NetworkInput) -> ConfidenceMap {
        let i = self.next.min(self.masks.len() - 1);
        self.next += 1;
        make_confidence_map(&self.masks[i], &self.feature).expect("shapes validated at construction")
    }
}

/// Holds the previous pre-normalisation input and the previous confidence
/// map. Both start at zero; steps must be applied in frame order.
#[derive(Debug, Clone)]
pub struct FrameBuffer {
    width: usize,
    height: usize,
    prev_input: Vec<f64>,
    prev_confidence: ConfidenceMap,
}

impl FrameBuffer {
    pub fn new(width: usize, height: usize, conf_rows: usize, conf_cols: usize) -> Self {
        FrameBuffer {
            width,
            height,
            prev_input: vec![0.0; width * height * 2],
            prev_confidence: ConfidenceMap(Grid::zeros(conf_rows, conf_cols)),
        }
    }

    /// 256x192 input with a 48x64 confidence map.
    pub fn standard() -> Self {
        Self::new(
            super::LNES_WIDTH,
            super::LNES_HEIGHT,
            CONFIDENCE_ROWS,
            CONFIDENCE_COLS,
        )
    }

    pub fn reset(&mut self) {
        self.prev_input.fill(0.0);
        self.prev_confidence.0.data_mut().fill(0.0);
    }

    pub fn prev_input(&self) -> &[f64] {
        &self.prev_input
    }

    pub fn prev_confidence(&self) -> &ConfidenceMap {
        &self.prev_confidence
    }

    /// Replaces the stored state, e.g. to resume a sequence.
    pub fn load(&mut self, prev_input: Vec<f64>, prev_confidence: ConfidenceMap) -> Result<(), LnesError> {
        if prev_input.len() != self.prev_input.len() {
            return Err(LnesError::ShapeMismatch {
                expected: (self.width, self.height),
                found: (prev_input.len(), 1),
            });
        }
        if prev_confidence.shape() != self.prev_confidence.shape() {
            return Err(LnesError::ShapeMismatch {
                expected: self.prev_confidence.shape(),
                found: prev_confidence.shape(),
            });
        }
        self.prev_input = prev_input;
        self.prev_confidence = prev_confidence;
        Ok(())
    }

    /// Combines the buffered input with `current`, normalises the result and
    /// asks `provider` for the confidence map to carry into the next step.
    ///
    /// The stored confidence map is bilinearly resized to the input
    /// resolution before weighting.
    pub fn step<P>(&mut self, current: &LnesFrame, provider: &mut P) -> Result<NetworkInput, LnesError>
    where
        P: ConfidenceProvider + ?Sized,
    {
        current.ensure_dims(self.width, self.height)?;
        let weights = self.prev_confidence.grid().resize_bilinear(self.height, self.width);
        let sum: Vec<f64> = self
            .prev_input
            .chunks_exact(2)
            .zip(current.data().chunks_exact(2))
            .zip(weights.data())
            .flat_map(|((prev, cur), &w)| [prev[0] * w + cur[0] as f64, prev[1] * w + cur[1] as f64])
            .collect();
        let input = normalize_input(self.width, self.height, &sum);
        let next = provider.confidence(&input);
        if next.shape() != self.prev_confidence.shape() {
            return Err(LnesError::ShapeMismatch {
                expected: self.prev_confidence.shape(),
                found: next.shape(),
            });
        }
        self.prev_input = sum;
        self.prev_confidence = next;
        Ok(input)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(w: usize, h: usize, f: impl Fn(usize) -> f32) -> LnesFrame {
        LnesFrame::from_vec(w, h, (0..w * h * 2).map(f).collect()).unwrap()
    }

    #[test]
    fn zero_mask_gives_half() {
        let c = make_confidence_map(&Grid::zeros(48, 64), &Grid::filled(48, 64, 7.0)).unwrap();
        assert!(c.grid().data().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn sigmoid_values() {
        let ones = Grid::filled(2, 2, 1.0);
        let c = make_confidence_map(&ones, &Grid::filled(2, 2, -1.0)).unwrap();
        assert!((c.grid().get(0, 0) - 0.2689414213699951).abs() < 1e-12);
        let big = make_confidence_map(&ones, &Grid::filled(2, 2, 30.0)).unwrap();
        assert!(big.grid().get(1, 1) > 1.0 - 1e-12);
        assert!(make_confidence_map(&ones, &Grid::zeros(2, 3)).is_err());
    }

    #[test]
    fn normalize_rules() {
        let n = normalize_input(1, 1, &[0.0, 0.0]);
        assert_eq!(n.data(), &[-1.0, -1.0]);
        let n = normalize_input(1, 1, &[0.5, 1.0]);
        assert_eq!(n.data(), &[0.0, 1.0]);
        let n = normalize_input(1, 1, &[2.0, 1.0]);
        assert_eq!(n.data(), &[1.0, 0.0]);
    }

    #[test]
    fn first_step_is_normalized_current() {
        let mut buf = FrameBuffer::new(8, 4, 2, 4);
        let cur = frame(8, 4, |i| (i % 5) as f32 / 4.0);
        let mut provider = ConstantConfidence(ConfidenceMap::constant(2, 4, 1.0).unwrap());
        let out = buf.step(&cur, &mut provider).unwrap();
        let cur64: Vec<f64> = cur.data().iter().map(|&v| v as f64).collect();
        assert_eq!(out, normalize_input(8, 4, &cur64));
    }

    #[test]
    fn full_confidence_retains_previous() {
        let mut buf = FrameBuffer::new(8, 4, 2, 4);
        let mut provider = ConstantConfidence(ConfidenceMap::constant(2, 4, 1.0).unwrap());
        let cur = frame(8, 4, |i| (i % 3) as f32 / 2.0);
        buf.step(&cur, &mut provider).unwrap();
        let stored = buf.prev_input().to_vec();
        let out = buf.step(&LnesFrame::zeros(8, 4), &mut provider).unwrap();
        assert_eq!(buf.prev_input(), &stored[..]);
        assert_eq!(out, normalize_input(8, 4, &stored));
    }

    #[test]
    fn zero_confidence_forgets_history() {
        let mut buf = FrameBuffer::new(8, 4, 2, 4);
        let mut provider = ConstantConfidence(ConfidenceMap::constant(2, 4, 0.0).unwrap());
        buf.step(&frame(8, 4, |_| 1.0), &mut provider).unwrap();
        let cur = frame(8, 4, |i| (i % 7) as f32 / 6.0);
        let out = buf.step(&cur, &mut provider).unwrap();
        let cur64: Vec<f64> = cur.data().iter().map(|&v| v as f64).collect();
        assert_eq!(out, normalize_input(8, 4, &cur64));
    }

    #[test]
    fn output_stays_in_range() {
        let mut buf = FrameBuffer::new(8, 4, 2, 4);
        let mut provider = ConstantConfidence(ConfidenceMap::constant(2, 4, 0.9).unwrap());
        for k in 0..10 {
            let out = buf.step(&frame(8, 4, |i| ((i + k) % 4) as f32 / 3.0), &mut provider).unwrap();
            assert!(out.data().iter().all(|v| (-1.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn shape_checks() {
        let mut buf = FrameBuffer::new(8, 4, 2, 4);
        let mut good = ConstantConfidence(ConfidenceMap::constant(2, 4, 0.5).unwrap());
        assert!(buf.step(&LnesFrame::zeros(4, 4), &mut good).is_err());
        let mut bad = ConstantConfidence(ConfidenceMap::constant(3, 4, 0.5).unwrap());
        assert!(buf.step(&LnesFrame::zeros(8, 4), &mut bad).is_err());
        assert!(ConfidenceMap::constant(1, 1, 1.5).is_err());
    }

    #[test]
    fn segmentation_provider_repeats_last_mask() {
        let masks = vec![Grid::zeros(2, 2), Grid::filled(2, 2, 1.0)];
        let mut p = SegmentationConfidence::with_gain(masks, 2.0).unwrap();
        let dummy = normalize_input(1, 1, &[0.0, 0.0]);
        assert_eq!(p.confidence(&dummy).grid().get(0, 0), 0.5);
        let expected = 1.0 / (1.0 + (-2.0f64).exp());
        assert_eq!(p.confidence(&dummy).grid().get(0, 0), expected);
        assert_eq!(p.confidence(&dummy).grid().get(1, 1), expected);
        assert!(SegmentationConfidence::with_gain(vec![], 1.0).is_err());
    }
}
