//! Training losses, heatmap utilities and pose evaluation metrics.
//!
//! Losses are plain evaluation functions over finished predictions; nothing
//! here differentiates.

mod eval;
mod heatmap;
mod loss;
mod procrustes;

pub use eval::{evaluate_sequence, ActionMetrics, EvalFrame, EvalReport};
pub use heatmap::{
    average_multiscale_heatmaps, extract_joints_2d, gaussian_heatmaps, gaussian_heatmaps_sized,
    heatmap_loss, Heatmaps, JointPeak, DEFAULT_SIGMA, HEATMAP_COLS, HEATMAP_ROWS,
};
pub use loss::{
    bone_loss, joint3d_loss, joints_total_loss, reproj2d_loss, seg_ce_loss, total_loss,
    BoneLosses, LossWeights, SEG_EPS,
};
pub use procrustes::{mpjpe, pa_mpjpe, procrustes_align, Similarity};

use crate::grid::GridError;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize, usize),
        right: (usize, usize, usize),
    },
    #[error("no input maps")]
    EmptyList,
    #[error("target points are all coincident; alignment is undefined")]
    DegenerateConfiguration,
    #[error("sigma must be positive and finite, got {0}")]
    InvalidSigma(f64),
    #[error("invalid heatmap: {0}")]
    InvalidHeatmap(String),
    #[error("value {value} at index {index} outside {expected}")]
    OutOfRange {
        index: usize,
        value: f64,
        expected: &'static str,
    },
}

impl From<GridError> for MetricsError {
    fn from(e: GridError) -> Self {
        match e {
            GridError::ShapeMismatch { left, right } => MetricsError::ShapeMismatch {
                left: (left.0, left.1, 1),
                right: (right.0, right.1, 1),
            },
            GridError::LengthMismatch { rows, cols, len } => {
                MetricsError::InvalidHeatmap(format!("{len} values for a {rows}x{cols} map"))
            }
        }
    }
}
