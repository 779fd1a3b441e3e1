use super::MetricsError;
use crate::pose::{Pose3D, NUM_JOINTS};
use nalgebra::{Matrix3, Vector3};

/// `x -> scale * rotation * x + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub scale: f64,
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Similarity {
    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.scale * (self.rotation * p) + self.translation
    }
}

/// Mean Euclidean joint error.
pub fn mpjpe(pred: &Pose3D, gt: &Pose3D) -> f64 {
    mean_distance(pred.joints(), gt.joints())
}

fn mean_distance(a: &[Vector3<f64>], b: &[Vector3<f64>]) -> f64 {
    a.iter().zip(b).map(|(p, g)| (p - g).norm()).sum::<f64>() / a.len() as f64
}

fn centroid(points: &[Vector3<f64>]) -> Vector3<f64> {
    points.iter().sum::<Vector3<f64>>() / points.len() as f64
}

/// Least-squares similarity mapping `source` onto `target` (Umeyama).
///
/// Fails when the target points all coincide. A coincident source maps onto
/// the target centroid with scale 0.
pub fn procrustes_align(
    source: &[Vector3<f64>],
    target: &[Vector3<f64>],
) -> Result<Similarity, MetricsError> {
    assert_eq!(source.len(), target.len(), "point sets differ in length");
    if source.is_empty() {
        return Err(MetricsError::DegenerateConfiguration);
    }
    let n = source.len() as f64;
    let mu_s = centroid(source);
    let mu_t = centroid(target);
    let mut var_s = 0.0;
    let mut var_t = 0.0;
    let mut cov = Matrix3::zeros();
    for (s, t) in source.iter().zip(target) {
        let (ds, dt) = (s - mu_s, t - mu_t);
        var_s += ds.norm_squared();
        var_t += dt.norm_squared();
        cov += dt * ds.transpose();
    }
    let extent = mu_t.norm().max(1.0);
    if var_t.sqrt() <= 1e-12 * extent * n.sqrt() {
        return Err(MetricsError::DegenerateConfiguration);
    }
    if var_s == 0.0 {
        return Ok(Similarity {
            scale: 0.0,
            rotation: Matrix3::identity(),
            translation: mu_t,
        });
    }
    let svd = cov.svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut d = Matrix3::identity();
    if (u.determinant() * v_t.determinant()) < 0.0 {
        d[(2, 2)] = -1.0;
    }
    let rotation = u * d * v_t;
    let trace: f64 = (0..3).map(|i| svd.singular_values[i] * d[(i, i)]).sum();
    let scale = trace / var_s;
    Ok(Similarity {
        scale,
        rotation,
        translation: mu_t - scale * (rotation * mu_s),
    })
}

/// MPJPE after aligning `pred` onto `gt` with the optimal similarity.
pub fn pa_mpjpe(pred: &Pose3D, gt: &Pose3D) -> Result<f64, MetricsError> {
    let sim = procrustes_align(pred.joints(), gt.joints())?;
    let aligned: [Vector3<f64>; NUM_JOINTS] = std::array::from_fn(|j| sim.apply(&pred.0[j]));
    Ok(mean_distance(&aligned, gt.joints()))
}
