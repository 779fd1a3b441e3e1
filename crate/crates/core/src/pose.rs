//! The 16-joint egocentric skeleton, per-joint visibility, and bone topology.

use nalgebra::Vector3;
use std::fmt::Write;
use thiserror::Error;

pub const NUM_JOINTS: usize = 16;

/// Canonical joint order used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Joint {
    Head,
    Neck,
    RightShoulder,
    RightElbow,
    RightWrist,
    LeftShoulder,
    LeftElbow,
    LeftWrist,
    RightHip,
    RightKnee,
    RightAnkle,
    RightFoot,
    LeftHip,
    LeftKnee,
    LeftAnkle,
    LeftFoot,
}

impl Joint {
    pub const ALL: [Joint; NUM_JOINTS] = [
        Joint::Head,
        Joint::Neck,
        Joint::RightShoulder,
        Joint::RightElbow,
        Joint::RightWrist,
        Joint::LeftShoulder,
        Joint::LeftElbow,
        Joint::LeftWrist,
        Joint::RightHip,
        Joint::RightKnee,
        Joint::RightAnkle,
        Joint::RightFoot,
        Joint::LeftHip,
        Joint::LeftKnee,
        Joint::LeftAnkle,
        Joint::LeftFoot,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Joint::Head => "head",
            Joint::Neck => "neck",
            Joint::RightShoulder => "right_shoulder",
            Joint::RightElbow => "right_elbow",
            Joint::RightWrist => "right_wrist",
            Joint::LeftShoulder => "left_shoulder",
            Joint::LeftElbow => "left_elbow",
            Joint::LeftWrist => "left_wrist",
            Joint::RightHip => "right_hip",
            Joint::RightKnee => "right_knee",
            Joint::RightAnkle => "right_ankle",
            Joint::RightFoot => "right_foot",
            Joint::LeftHip => "left_hip",
            Joint::LeftKnee => "left_knee",
            Joint::LeftAnkle => "left_ankle",
            Joint::LeftFoot => "left_foot",
        }
    }
}

/// Parent/child joint pairs; each bone vector is `child - parent`.
///
/// A tree rooted at the neck that touches all 16 joints.
pub const CANONICAL_BONES: [(Joint, Joint); 15] = [
    (Joint::Neck, Joint::Head),
    (Joint::Neck, Joint::RightShoulder),
    (Joint::RightShoulder, Joint::RightElbow),
    (Joint::RightElbow, Joint::RightWrist),
    (Joint::Neck, Joint::LeftShoulder),
    (Joint::LeftShoulder, Joint::LeftElbow),
    (Joint::LeftElbow, Joint::LeftWrist),
    (Joint::Neck, Joint::RightHip),
    (Joint::RightHip, Joint::RightKnee),
    (Joint::RightKnee, Joint::RightAnkle),
    (Joint::RightAnkle, Joint::RightFoot),
    (Joint::Neck, Joint::LeftHip),
    (Joint::LeftHip, Joint::LeftKnee),
    (Joint::LeftKnee, Joint::LeftAnkle),
    (Joint::LeftAnkle, Joint::LeftFoot),
];

#[derive(Debug, Error, PartialEq)]
pub enum PoseError {
    #[error("expected {expected} values, found {found}")]
    WrongCount { expected: usize, found: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("joint {0} has a non-finite coordinate")]
    NonFinite(usize),
}

/// 16 joint positions in millimetres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose3D(pub [Vector3<f64>; NUM_JOINTS]);

impl Pose3D {
    pub fn zeros() -> Self {
        Pose3D([Vector3::zeros(); NUM_JOINTS])
    }

    pub fn from_fn(f: impl FnMut(usize) -> Vector3<f64>) -> Self {
        Pose3D(std::array::from_fn(f))
    }

    pub fn from_flat(values: &[f64]) -> Result<Self, PoseError> {
        if values.len() != NUM_JOINTS * 3 {
            return Err(PoseError::WrongCount {
                expected: NUM_JOINTS * 3,
                found: values.len(),
            });
        }
        let pose = Pose3D::from_fn(|i| Vector3::new(values[3 * i], values[3 * i + 1], values[3 * i + 2]));
        pose.validate()?;
        Ok(pose)
    }

    pub fn validate(&self) -> Result<(), PoseError> {
        match self.0.iter().position(|j| !j.iter().all(|v| v.is_finite())) {
            Some(i) => Err(PoseError::NonFinite(i)),
            None => Ok(()),
        }
    }

    pub fn joint(&self, joint: Joint) -> Vector3<f64> {
        self.0[joint.index()]
    }

    pub fn joints(&self) -> &[Vector3<f64>; NUM_JOINTS] {
        &self.0
    }

    pub fn flat(&self) -> Vec<f64> {
        self.0.iter().flat_map(|j| [j.x, j.y, j.z]).collect()
    }

    pub fn map(&self, f: impl Fn(&Vector3<f64>) -> Vector3<f64>) -> Pose3D {
        Pose3D(self.0.map(|j| f(&j)))
    }

    pub fn translated(&self, offset: &Vector3<f64>) -> Pose3D {
        self.map(|j| j + offset)
    }

    /// Bone vectors under [`CANONICAL_BONES`].
    pub fn bones(&self) -> [Vector3<f64>; 15] {
        CANONICAL_BONES.map(|(parent, child)| self.joint(child) - self.joint(parent))
    }

    /// Parses 48 numbers separated by commas or whitespace, in joint order
    /// (`x y z` per joint). Lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self, PoseError> {
        let mut values = Vec::with_capacity(48);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            for tok in line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
            {
                let v = tok.parse::<f64>().map_err(|e| PoseError::Parse {
                    line: i + 1,
                    message: format!("{tok:?}: {e}"),
                })?;
                values.push(v);
            }
        }
        Pose3D::from_flat(&values)
    }

    /// One joint per line, `x y z`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for j in &self.0 {
            let _ = writeln!(out, "{} {} {}", j.x, j.y, j.z);
        }
        out
    }
}

/// Per-joint visibility flags, in canonical joint order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VisibilityMask(pub [bool; NUM_JOINTS]);

impl VisibilityMask {
    pub fn all_visible() -> Self {
        VisibilityMask([true; NUM_JOINTS])
    }

    pub fn none_visible() -> Self {
        VisibilityMask([false; NUM_JOINTS])
    }

    #[inline]
    pub fn weight(&self, joint: usize) -> f64 {
        if self.0[joint] {
            1.0
        } else {
            0.0
        }
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&v| v).count()
    }

    pub fn and(&self, other: &VisibilityMask) -> VisibilityMask {
        VisibilityMask(std::array::from_fn(|i| self.0[i] && other.0[i]))
    }
}
