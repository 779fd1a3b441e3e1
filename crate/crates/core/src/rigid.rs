//! Rigid transforms and the hand-eye chain that places the head-mounted
//! camera in world coordinates.

use nalgebra::{Matrix3, Matrix4, Vector3};
use std::fmt::Write;
use thiserror::Error;

/// Rotation blocks must satisfy `|R^T R - I|_F` and `|det R - 1|` below this.
pub const ORTHONORMAL_TOL: f64 = 1e-9;
/// Products drifting further than this are projected back onto SO(3).
pub const DRIFT_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum RigidError {
    #[error("invalid rigid transform: {0}")]
    InvalidTransform(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Homogeneous 4x4 rigid transform; translation in millimetres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform(Matrix4<f64>);

fn orthonormality_error(r: &Matrix3<f64>) -> f64 {
    (r.transpose() * r - Matrix3::identity()).norm()
}

/// Closest rotation in the Frobenius sense (polar factor).
fn nearest_rotation(r: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = r.svd(true, true);
    let mut u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    if (u * v_t).determinant() < 0.0 {
        u.column_mut(2).neg_mut();
    }
    u * v_t
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform(Matrix4::identity())
    }

    /// Accepts `m` only if it is rigid to within [`ORTHONORMAL_TOL`] and the
    /// bottom row is exactly `(0, 0, 0, 1)`.
    pub fn new(m: Matrix4<f64>) -> Result<Self, RigidError> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(RigidError::InvalidTransform("non-finite entry".into()));
        }
        if m.fixed_view::<1, 4>(3, 0) != nalgebra::RowVector4::new(0.0, 0.0, 0.0, 1.0) {
            return Err(RigidError::InvalidTransform(format!(
                "bottom row is {:?}, expected (0, 0, 0, 1)",
                m.fixed_view::<1, 4>(3, 0).iter().collect::<Vec<_>>()
            )));
        }
        let r: Matrix3<f64> = m.fixed_view::<3, 3>(0, 0).into();
        let ortho = orthonormality_error(&r);
        if ortho > ORTHONORMAL_TOL {
            return Err(RigidError::InvalidTransform(format!(
                "rotation not orthonormal (|RtR - I| = {ortho:e})"
            )));
        }
        let det = r.determinant();
        if (det - 1.0).abs() > ORTHONORMAL_TOL {
            return Err(RigidError::InvalidTransform(format!("det R = {det}")));
        }
        Ok(RigidTransform(m))
    }

    pub fn from_parts(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self, RigidError> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&translation);
        RigidTransform::new(m)
    }

    /// Like [`RigidTransform::new`] but snaps a nearly-rigid matrix (rotation
    /// error up to `tol`) onto the closest rotation. Meant for matrices read
    /// from text with limited precision.
    pub fn from_matrix_projected(m: Matrix4<f64>, tol: f64) -> Result<Self, RigidError> {
        if let Ok(t) = RigidTransform::new(m) {
            return Ok(t);
        }
        let r: Matrix3<f64> = m.fixed_view::<3, 3>(0, 0).into();
        if r.iter().all(|v| v.is_finite()) && orthonormality_error(&r) <= tol && r.determinant() > 0.0 {
            let mut fixed = m;
            fixed.fixed_view_mut::<3, 3>(0, 0).copy_from(&nearest_rotation(&r));
            return RigidTransform::new(fixed);
        }
        RigidTransform::new(m)
    }

    pub fn translation_only(t: Vector3<f64>) -> Self {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&t);
        RigidTransform(m)
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn rotation(&self) -> Matrix3<f64> {
        self.0.fixed_view::<3, 3>(0, 0).into()
    }

    pub fn translation(&self) -> Vector3<f64> {
        self.0.fixed_view::<3, 1>(0, 3).into()
    }

    /// Closed-form inverse `[R^T, -R^T t]`.
    pub fn inverse(&self) -> Self {
        let rt = self.rotation().transpose();
        let t = -(rt * self.translation());
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&rt);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&t);
        RigidTransform(m)
    }

    /// `self * rhs`, re-orthonormalised when the rotation has drifted.
    pub fn compose(&self, rhs: &RigidTransform) -> RigidTransform {
        let mut m = self.0 * rhs.0;
        m.fixed_view_mut::<1, 4>(3, 0)
            .copy_from(&nalgebra::RowVector4::new(0.0, 0.0, 0.0, 1.0));
        let r: Matrix3<f64> = m.fixed_view::<3, 3>(0, 0).into();
        if orthonormality_error(&r) > DRIFT_TOL {
            m.fixed_view_mut::<3, 3>(0, 0).copy_from(&nearest_rotation(&r));
        }
        RigidTransform(m)
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation() * p + self.translation()
    }

    /// Parses 16 numbers, row-major, separated by whitespace or commas.
    pub fn parse(text: &str) -> Result<Self, RigidError> {
        let values = parse_numbers(text)?;
        if values.len() != 16 {
            return Err(RigidError::Parse(format!("expected 16 values, found {}", values.len())));
        }
        RigidTransform::from_matrix_projected(Matrix4::from_row_slice(&values), 1e-4)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in 0..4 {
            let row: Vec<String> = (0..4).map(|c| format!("{:?}", self.0[(r, c)])).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}

fn parse_numbers(text: &str) -> Result<Vec<f64>, RigidError> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| RigidError::Parse(format!("{s:?}: {e}"))))
        .collect()
}

/// Camera-from-head-checkerboard transform from the three checkerboard poses:
/// `M_CE = M_E * M_F^-1 * M_H`.
///
/// `floor_in_camera` is the floor board seen by the event camera (`M_E`);
/// `floor_in_rgb` and `head_in_rgb` are the floor and head boards seen by the
/// external RGB camera (`M_F`, `M_H`).
pub fn compose_hand_eye(
    floor_in_camera: &RigidTransform,
    floor_in_rgb: &RigidTransform,
    head_in_rgb: &RigidTransform,
) -> RigidTransform {
    floor_in_camera
        .compose(&floor_in_rgb.inverse())
        .compose(head_in_rgb)
}

/// World-to-device transform `M_WE = M_CE * M_WC`.
pub fn world_to_device(head_to_camera: &RigidTransform, world_to_head: &RigidTransform) -> RigidTransform {
    head_to_camera.compose(world_to_head)
}

pub fn transform_points(m: &RigidTransform, points: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
    let r = m.rotation();
    let t = m.translation();
    points.iter().map(|p| r * p + t).collect()
}

/// Parses `N x 3` points, one per line.
pub fn parse_points(text: &str) -> Result<Vec<Vector3<f64>>, RigidError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v = parse_numbers(line)?;
        if v.len() != 3 {
            return Err(RigidError::Parse(format!("line {}: expected 3 values, found {}", i + 1, v.len())));
        }
        out.push(Vector3::new(v[0], v[1], v[2]));
    }
    Ok(out)
}
