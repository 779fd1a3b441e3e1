use super::MetricsError;
use crate::grid::Grid;
use crate::pose::{VisibilityMask, NUM_JOINTS};
use nalgebra::Vector2;

pub const HEATMAP_ROWS: usize = 48;
pub const HEATMAP_COLS: usize = 64;
/// Gaussian width for ground-truth targets, in heatmap pixels.
pub const DEFAULT_SIGMA: f64 = 2.0;

/// One non-negative map per joint, all the same size.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmaps {
    maps: Vec<Grid>,
}

impl Heatmaps {
    /// Requires exactly 16 equal-shaped maps with values in `[0, 1]`.
    pub fn new(maps: Vec<Grid>) -> Result<Self, MetricsError> {
        if maps.len() != NUM_JOINTS {
            return Err(MetricsError::InvalidHeatmap(format!(
                "expected {NUM_JOINTS} channels, got {}",
                maps.len()
            )));
        }
        let shape = maps[0].shape();
        for (j, m) in maps.iter().enumerate() {
            if m.shape() != shape {
                return Err(MetricsError::ShapeMismatch {
                    left: (shape.0, shape.1, 0),
                    right: (m.rows(), m.cols(), j),
                });
            }
            if let Some((i, &v)) = m
                .data()
                .iter()
                .enumerate()
                .find(|(_, v)| !(0.0..=1.0).contains(*v))
            {
                return Err(MetricsError::OutOfRange {
                    index: j * m.data().len() + i,
                    value: v,
                    expected: "[0, 1]",
                });
            }
        }
        Ok(Heatmaps { maps })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Heatmaps {
            maps: vec![Grid::zeros(rows, cols); NUM_JOINTS],
        }
    }

    /// `(rows, cols, channels)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        let (r, c) = self.maps[0].shape();
        (r, c, self.maps.len())
    }

    pub fn map(&self, joint: usize) -> &Grid {
        &self.maps[joint]
    }

    pub fn maps(&self) -> &[Grid] {
        &self.maps
    }

    fn ensure_same_shape(&self, other: &Heatmaps) -> Result<(), MetricsError> {
        if self.shape() != other.shape() {
            return Err(MetricsError::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }
}

/// Unit-peak Gaussian targets at the standard 48x64 resolution. Joint
/// coordinates are `(x = column, y = row)` in heatmap pixels.
pub fn gaussian_heatmaps(
    joints: &[Vector2<f64>; NUM_JOINTS],
    visibility: &VisibilityMask,
    sigma: f64,
) -> Result<Heatmaps, MetricsError> {
    gaussian_heatmaps_sized(joints, visibility, sigma, HEATMAP_ROWS, HEATMAP_COLS)
}

pub fn gaussian_heatmaps_sized(
    joints: &[Vector2<f64>; NUM_JOINTS],
    visibility: &VisibilityMask,
    sigma: f64,
    rows: usize,
    cols: usize,
) -> Result<Heatmaps, MetricsError> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(MetricsError::InvalidSigma(sigma));
    }
    let denom = 2.0 * sigma * sigma;
    let maps = (0..NUM_JOINTS)
        .map(|j| {
            if !visibility.0[j] {
                return Grid::zeros(rows, cols);
            }
            let p = joints[j];
            Grid::from_fn(rows, cols, |r, c| {
                let dx = c as f64 - p.x;
                let dy = r as f64 - p.y;
                (-(dx * dx + dy * dy) / denom).exp()
            })
        })
        .collect();
    Ok(Heatmaps { maps })
}

/// Upsamples every map to 48x64 and averages them.
pub fn average_multiscale_heatmaps(maps: &[Heatmaps]) -> Result<Heatmaps, MetricsError> {
    let n = maps.len();
    if n == 0 {
        return Err(MetricsError::EmptyList);
    }
    let mut acc = vec![Grid::zeros(HEATMAP_ROWS, HEATMAP_COLS); NUM_JOINTS];
    for hm in maps {
        for (j, out) in acc.iter_mut().enumerate() {
            let up = hm.maps[j].resize_bilinear(HEATMAP_ROWS, HEATMAP_COLS);
            for (a, b) in out.data_mut().iter_mut().zip(up.data()) {
                *a += b;
            }
        }
    }
    for m in &mut acc {
        for v in m.data_mut() {
            *v /= n as f64;
        }
    }
    Ok(Heatmaps { maps: acc })
}

/// Sum of squared per-pixel differences over visible joints, divided by 16.
pub fn heatmap_loss(
    pred: &Heatmaps,
    gt: &Heatmaps,
    vis: &VisibilityMask,
) -> Result<f64, MetricsError> {
    pred.ensure_same_shape(gt)?;
    let mut sum = 0.0;
    for j in 0..NUM_JOINTS {
        if !vis.0[j] {
            continue;
        }
        sum += pred.maps[j]
            .data()
            .iter()
            .zip(gt.maps[j].data())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    Ok(sum / NUM_JOINTS as f64)
}

/// Location and value of a heatmap maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointPeak {
    /// `(x = column, y = row)`.
    pub position: Vector2<f64>,
    pub confidence: f64,
}

/// Argmax per joint; the lowest row-major index wins ties.
pub fn extract_joints_2d(heatmaps: &Heatmaps) -> [JointPeak; NUM_JOINTS] {
    std::array::from_fn(|j| {
        let m = &heatmaps.maps[j];
        let mut best = 0;
        for (i, &v) in m.data().iter().enumerate() {
            if v > m.data()[best] {
                best = i;
            }
        }
        JointPeak {
            position: Vector2::new((best % m.cols()) as f64, (best / m.cols()) as f64),
            confidence: m.data().get(best).copied().unwrap_or(0.0),
        }
    })
}
