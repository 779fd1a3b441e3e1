use super::MetricsError;
use crate::fisheye::FisheyeIntrinsics;
use crate::grid::Grid;
use crate::pose::{Joint, Pose3D, VisibilityMask, NUM_JOINTS};

/// Probability clamp for the segmentation cross-entropy.
pub const SEG_EPS: f64 = 1e-7;

/// Loss weights. `Default` gives the training configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub j3d: f64,
    pub j2d: f64,
    pub ba: f64,
    pub theta: f64,
    pub bl: f64,
    pub joints: f64,
    pub heatmap: f64,
    pub seg: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            j3d: 0.01,
            j2d: 0.01,
            ba: 1.0,
            theta: 0.001,
            bl: 0.001,
            joints: 1.0,
            heatmap: 20.0,
            seg: 0.1,
        }
    }
}

/// Mean over all 16 joints of the squared error of visible joints.
pub fn joint3d_loss(pred: &Pose3D, gt: &Pose3D, vis: &VisibilityMask) -> f64 {
    let sum: f64 = (0..NUM_JOINTS)
        .map(|j| vis.weight(j) * (pred.0[j] - gt.0[j]).norm_squared())
        .sum();
    sum / NUM_JOINTS as f64
}

/// Like [`joint3d_loss`] on fisheye pixels. A joint that fails to project in
/// either pose is treated as invisible.
pub fn reproj2d_loss(
    pred: &Pose3D,
    gt: &Pose3D,
    vis: &VisibilityMask,
    intr: &FisheyeIntrinsics,
) -> f64 {
    let mut sum = 0.0;
    for j in 0..NUM_JOINTS {
        if !vis.0[j] {
            continue;
        }
        if let (Ok(a), Ok(b)) = (intr.project(&pred.0[j]), intr.project(&gt.0[j])) {
            sum += (a - b).norm_squared();
        }
    }
    sum / NUM_JOINTS as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoneLosses {
    /// Mean of `1 - cos` between matching bones.
    pub orientation: f64,
    /// Mean squared bone-vector difference.
    pub length: f64,
    /// `lambda_theta * orientation + lambda_bl * length`.
    pub combined: f64,
}

/// Bone orientation and length losses over `topology` (parent, child) pairs.
/// A zero-length bone on either side has cosine 0.
pub fn bone_loss(
    pred: &Pose3D,
    gt: &Pose3D,
    topology: &[(Joint, Joint)],
    lambda_theta: f64,
    lambda_bl: f64,
) -> BoneLosses {
    if topology.is_empty() {
        return BoneLosses {
            orientation: 0.0,
            length: 0.0,
            combined: 0.0,
        };
    }
    let mut orient = 0.0;
    let mut length = 0.0;
    for &(parent, child) in topology {
        let p = pred.joint(child) - pred.joint(parent);
        let g = gt.joint(child) - gt.joint(parent);
        let denom = p.norm() * g.norm();
        let cos = if denom > 0.0 {
            (p.dot(&g) / denom).clamp(-1.0, 1.0)
        } else {
            0.0
        };
        orient += 1.0 - cos;
        length += (p - g).norm_squared();
    }
    let n = topology.len() as f64;
    let orientation = orient / n;
    let length = length / n;
    BoneLosses {
        orientation,
        length,
        combined: lambda_theta * orientation + lambda_bl * length,
    }
}

pub fn joints_total_loss(l_j3d: f64, l_j2d: f64, l_ba: f64, w: &LossWeights) -> f64 {
    w.j3d * l_j3d + w.j2d * l_j2d + w.ba * l_ba
}

pub fn total_loss(l_joints: f64, l_heatmap: f64, l_seg: f64, w: &LossWeights) -> f64 {
    w.joints * l_joints + w.heatmap * l_heatmap + w.seg * l_seg
}

/// Mean binary cross-entropy. `pred` must lie in `[0, 1]` and is clamped to
/// `[SEG_EPS, 1 - SEG_EPS]`; `gt` must be 0 or 1.
pub fn seg_ce_loss(pred: &Grid, gt: &Grid) -> Result<f64, MetricsError> {
    pred.ensure_same_shape(gt)?;
    let n = pred.data().len();
    if n == 0 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for (i, (&p, &s)) in pred.data().iter().zip(gt.data()).enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(MetricsError::OutOfRange {
                index: i,
                value: p,
                expected: "[0, 1]",
            });
        }
        if s != 0.0 && s != 1.0 {
            return Err(MetricsError::OutOfRange {
                index: i,
                value: s,
                expected: "{0, 1}",
            });
        }
        let p = p.clamp(SEG_EPS, 1.0 - SEG_EPS);
        sum -= if s == 1.0 { p.ln() } else { (1.0 - p).ln() };
    }
    Ok(sum / n as f64)
}
