//! High-rate pose resampling and SMPL joint selection.

use super::SimulatorError;
use crate::pose::{Pose3D, NUM_JOINTS};
use nalgebra::Vector3;

/// Joints in the body model's extended joint set.
pub const SMPL_JOINT_COUNT: usize = 45;

/// 1-based SMPL joint index for each canonical joint.
pub const SMPL_TO_CANONICAL: [usize; NUM_JOINTS] =
    [16, 13, 18, 20, 22, 17, 19, 21, 3, 6, 9, 12, 2, 5, 8, 11];

/// A pose with its timestamp in microseconds.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedPose {
    pub t: f64,
    pub pose: Pose3D,
}

/// Selects the canonical 16 joints from 45 SMPL joints.
pub fn smpl_joint_map(smpl: &[Vector3<f64>]) -> Result<Pose3D, SimulatorError> {
    if smpl.len() != SMPL_JOINT_COUNT {
        return Err(SimulatorError::WrongJointCount {
            expected: SMPL_JOINT_COUNT,
            got: smpl.len(),
        });
    }
    Ok(Pose3D::from_fn(|j| smpl[SMPL_TO_CANONICAL[j] - 1]))
}

fn check_keyframes(keyframes: &[TimedPose]) -> Result<(), SimulatorError> {
    if keyframes.len() < 2 {
        return Err(SimulatorError::TooFewKeyframes(keyframes.len()));
    }
    for (i, w) in keyframes.windows(2).enumerate() {
        if w[1].t <= w[0].t || w[1].t.is_nan() {
            return Err(SimulatorError::UnorderedKeyframes(i + 1));
        }
    }
    Ok(())
}

/// Linear interpolation at time `t`, clamped to the keyframe span. Returns
/// keyframes unchanged at their own timestamps.
pub fn pose_at(keyframes: &[TimedPose], t: f64) -> Result<Pose3D, SimulatorError> {
    check_keyframes(keyframes)?;
    Ok(sample(keyframes, t))
}

fn sample(keyframes: &[TimedPose], t: f64) -> Pose3D {
    let last = keyframes.len() - 1;
    let seg = keyframes.partition_point(|k| k.t <= t).clamp(1, last) - 1;
    let (a, b) = (&keyframes[seg], &keyframes[seg + 1]);
    if t == a.t {
        return a.pose;
    }
    if t == b.t {
        return b.pose;
    }
    let alpha = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
    Pose3D::from_fn(|j| a.pose.0[j] + (b.pose.0[j] - a.pose.0[j]) * alpha)
}

/// Resamples onto the grid `first + i / rate` covering the keyframe span.
pub fn interpolate_poses(keyframes: &[TimedPose], rate_hz: f64) -> Result<Vec<TimedPose>, SimulatorError> {
    check_keyframes(keyframes)?;
    if !(rate_hz > 0.0 && rate_hz.is_finite()) {
        return Err(SimulatorError::InvalidRate(rate_hz));
    }
    let first = keyframes[0].t;
    let span = keyframes[keyframes.len() - 1].t - first;
    let step = 1e6 / rate_hz;
    // Tolerate rounding so a grid point landing on the last keyframe counts.
    let n = (span / step * (1.0 + 1e-12)).floor() as usize + 1;
    Ok((0..n)
        .map(|i| {
            let t = first + i as f64 * step;
            TimedPose { t, pose: sample(keyframes, t) }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pose(rng: &mut impl Rng) -> Pose3D {
        Pose3D::from_fn(|_| Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * 500.0)
    }

    #[test]
    fn smpl_selection() {
        let ident: Vec<_> = (1..=45).map(|i| Vector3::repeat(i as f64)).collect();
        let p = smpl_joint_map(&ident).unwrap();
        for (j, &k) in SMPL_TO_CANONICAL.iter().enumerate() {
            assert_eq!(p.0[j], Vector3::repeat(k as f64));
        }
        let mut input = vec![Vector3::zeros(); 45];
        input[15] = Vector3::new(1.0, 2.0, 3.0);
        assert_eq!(smpl_joint_map(&input).unwrap().0[0], Vector3::new(1.0, 2.0, 3.0));
        assert_eq!(
            smpl_joint_map(&input[..24]),
            Err(SimulatorError::WrongJointCount { expected: 45, got: 24 })
        );
    }

    #[test]
    fn smpl_matches_permuted_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let input: Vec<_> = (0..45).map(|_| Vector3::new(rng.random(), rng.random(), rng.random())).collect();
        // Oracle table written as (canonical name, SMPL 1-based index).
        let table = [
            ("head", 16), ("neck", 13), ("right_shoulder", 18), ("right_elbow", 20),
            ("right_wrist", 22), ("left_shoulder", 17), ("left_elbow", 19), ("left_wrist", 21),
            ("right_hip", 3), ("right_knee", 6), ("right_ankle", 9), ("right_foot", 12),
            ("left_hip", 2), ("left_knee", 5), ("left_ankle", 8), ("left_foot", 11),
        ];
        let p = smpl_joint_map(&input).unwrap();
        for (name, idx) in table {
            let j = crate::pose::Joint::ALL.iter().find(|j| j.name() == name).unwrap();
            assert_eq!(p.joint(*j), input[idx - 1], "{name}");
        }
    }

    #[test]
    fn midpoint_and_keyframes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let kf = vec![
            TimedPose { t: 0.0, pose: random_pose(&mut rng) },
            TimedPose { t: 1000.0, pose: random_pose(&mut rng) },
            TimedPose { t: 2500.0, pose: random_pose(&mut rng) },
        ];
        let mid = pose_at(&kf, 500.0).unwrap();
        for j in 0..NUM_JOINTS {
            let mean = (kf[0].pose.0[j] + kf[1].pose.0[j]) / 2.0;
            assert!((mid.0[j] - mean).norm() < 1e-12);
        }
        for k in &kf {
            assert_eq!(pose_at(&kf, k.t).unwrap(), k.pose);
        }
    }

    #[test]
    fn thirty_to_four_eighty() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let kf: Vec<_> = (0..10)
            .map(|i| TimedPose { t: i as f64 * 1e6 / 30.0, pose: random_pose(&mut rng) })
            .collect();
        let out = interpolate_poses(&kf, 480.0).unwrap();
        assert_eq!(out.len(), 9 * 16 + 1);
        for i in 0..9 {
            let inside = out.iter().filter(|p| p.t >= kf[i].t - 1e-6 && p.t < kf[i + 1].t - 1e-6).count();
            assert_eq!(inside, 16);
        }
        assert!((out.last().unwrap().t - kf[9].t).abs() < 1e-6);
    }

    #[test]
    fn errors() {
        let p = Pose3D::zeros();
        assert_eq!(
            interpolate_poses(&[TimedPose { t: 0.0, pose: p }], 480.0),
            Err(SimulatorError::TooFewKeyframes(1))
        );
        let kf = vec![TimedPose { t: 5.0, pose: p }, TimedPose { t: 5.0, pose: p }];
        assert_eq!(interpolate_poses(&kf, 480.0), Err(SimulatorError::UnorderedKeyframes(1)));
    }

    proptest! {
        #[test]
        fn piecewise_linear(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let kf: Vec<_> = (0..4)
                .map(|i| TimedPose { t: i as f64 * 1e6 / 30.0, pose: random_pose(&mut rng) })
                .collect();
            let out = interpolate_poses(&kf, 480.0).unwrap();
            for w in out.windows(3) {
                let same_seg = kf.iter().all(|k| !(k.t > w[0].t + 1e-6 && k.t < w[2].t - 1e-6));
                if same_seg {
                    for j in 0..NUM_JOINTS {
                        let d2 = w[2].pose.0[j] - 2.0 * w[1].pose.0[j] + w[0].pose.0[j];
                        prop_assert!(d2.norm() < 1e-9);
                    }
                }
            }
        }
    }
}
