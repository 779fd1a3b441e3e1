//! Ground-truth joint geometry: fisheye projection of the skeleton and
//! per-joint visibility by casting rays against a part-labelled body mesh.

mod bvh;
mod mesh;

pub use mesh::LabeledMesh;

use crate::exec::Execution;
use crate::fisheye::FisheyeIntrinsics;
use crate::pose::{Pose3D, VisibilityMask, NUM_JOINTS};
use nalgebra::{Vector2, Vector3};
use thiserror::Error;

/// Number of vertices polled around a ray's first hit.
pub const NEAREST_VERTICES: usize = 8;
/// Hits closer than this to the ray origin are ignored (mm).
pub const MIN_HIT_DISTANCE: f64 = 1e-9;
/// A pose whose centroid is further than this from the mesh bounds is
/// assumed to be in a different frame (mm).
pub const FRAME_MISMATCH_MARGIN: f64 = 1000.0;

#[derive(Debug, Error, PartialEq)]
pub enum VisibilityError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("pose centroid is {distance:.1} mm outside the mesh bounds; pose and mesh are probably in different frames")]
    FrameMismatch { distance: f64 },
}

/// Nearest intersection along a ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub point: Vector3<f64>,
    pub triangle: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vector3<f64>,
    /// Unit direction.
    pub dir: Vector3<f64>,
}

/// Möller-Trumbore ray/triangle test without back-face culling. Edges and
/// vertices count as inside, so a ray through a shared edge hits both
/// neighbours at the same distance and the lower triangle index wins.
#[inline]
pub(crate) fn intersect_triangle(
    origin: &Vector3<f64>,
    dir: &Vector3<f64>,
    v0: &Vector3<f64>,
    v1: &Vector3<f64>,
    v2: &Vector3<f64>,
) -> Option<f64> {
    let e1 = v1 - v0;
    let e2 = v2 - v0;
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - v0;
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&q) * inv;
    (t > MIN_HIT_DISTANCE).then_some(t)
}

/// Nearest hit by testing every triangle. Ties on distance go to the lower
/// triangle index.
pub fn ray_mesh_first_hit(origin: &Vector3<f64>, dir: &Vector3<f64>, mesh: &LabeledMesh) -> Option<Hit> {
    first_hit_exhaustive(origin, dir, mesh, f64::INFINITY)
}

fn first_hit_exhaustive(
    origin: &Vector3<f64>,
    dir: &Vector3<f64>,
    mesh: &LabeledMesh,
    max_t: f64,
) -> Option<Hit> {
    let mut best: Option<(f64, usize)> = None;
    for i in 0..mesh.triangles().len() {
        let [a, b, c] = mesh.triangle(i);
        if let Some(t) = intersect_triangle(origin, dir, &a, &b, &c) {
            if t <= max_t && best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, i));
            }
        }
    }
    best.map(|(distance, triangle)| Hit {
        point: origin + dir * distance,
        triangle,
        distance,
    })
}

/// A mesh with a BVH for repeated ray queries.
#[derive(Debug, Clone)]
pub struct MeshIndex {
    mesh: LabeledMesh,
    bvh: bvh::Bvh,
}

impl MeshIndex {
    pub fn new(mesh: LabeledMesh) -> Self {
        let bvh = bvh::Bvh::build(&mesh);
        MeshIndex { mesh, bvh }
    }

    pub fn mesh(&self) -> &LabeledMesh {
        &self.mesh
    }

    /// Same answer as [`ray_mesh_first_hit`].
    pub fn first_hit(&self, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<Hit> {
        self.bvh.first_hit(&self.mesh, origin, dir, f64::INFINITY)
    }

    pub fn first_hit_within(&self, origin: &Vector3<f64>, dir: &Vector3<f64>, max_t: f64) -> Option<Hit> {
        self.bvh.first_hit(&self.mesh, origin, dir, max_t)
    }

    pub fn first_hits(&self, rays: &[Ray], exec: Execution) -> Vec<Option<Hit>> {
        exec.map(rays, |r| self.first_hit(&r.origin, &r.dir))
    }

    /// Labels of the `k` vertices closest to `point` (ties by vertex index).
    pub fn nearest_labels(&self, point: &Vector3<f64>, k: usize) -> Vec<u8> {
        let verts = self.mesh.vertices();
        let mut idx: Vec<(f64, usize)> = verts
            .iter()
            .enumerate()
            .map(|(i, v)| ((v - point).norm_squared(), i))
            .collect();
        let k = k.min(idx.len());
        if k == 0 {
            return Vec::new();
        }
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < idx.len() {
            idx.select_nth_unstable_by(k - 1, cmp);
        }
        idx[..k].iter().map(|&(_, i)| self.mesh.labels()[i]).collect()
    }

    fn check_frame(&self, pose: &Pose3D) -> Result<(), VisibilityError> {
        let verts = self.mesh.vertices();
        if verts.is_empty() {
            return Ok(());
        }
        let (mut lo, mut hi) = (verts[0], verts[0]);
        for v in verts {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        let centroid = pose.joints().iter().sum::<Vector3<f64>>() / NUM_JOINTS as f64;
        let outside = (lo - centroid).sup(&(centroid - hi)).sup(&Vector3::zeros());
        let distance = outside.norm();
        if distance > FRAME_MISMATCH_MARGIN {
            return Err(VisibilityError::FrameMismatch { distance });
        }
        Ok(())
    }

    /// Occlusion test for every joint, looking from `camera_origin`.
    ///
    /// A joint is visible when the segment from the camera to the joint hits
    /// nothing, or when a strict majority of the [`NEAREST_VERTICES`] closest
    /// to the first hit carry the joint's own part label. Ties count as
    /// occluded.
    pub fn joint_visibility(
        &self,
        pose: &Pose3D,
        camera_origin: &Vector3<f64>,
    ) -> Result<VisibilityMask, VisibilityError> {
        self.check_frame(pose)?;
        let mut mask = [false; NUM_JOINTS];
        for (j, slot) in mask.iter_mut().enumerate() {
            let to_joint = pose.0[j] - camera_origin;
            let dist = to_joint.norm();
            if dist <= MIN_HIT_DISTANCE {
                *slot = true;
                continue;
            }
            let dir = to_joint / dist;
            *slot = match self.first_hit_within(camera_origin, &dir, dist) {
                None => true,
                Some(hit) => {
                    let labels = self.nearest_labels(&hit.point, NEAREST_VERTICES);
                    let own = labels.iter().filter(|&&l| l as usize == j).count();
                    2 * own > labels.len()
                }
            };
        }
        Ok(VisibilityMask(mask))
    }
}

/// Builds a [`MeshIndex`] and runs [`MeshIndex::joint_visibility`].
pub fn joint_visibility(
    pose: &Pose3D,
    mesh: &LabeledMesh,
    camera_origin: &Vector3<f64>,
) -> Result<VisibilityMask, VisibilityError> {
    MeshIndex::new(mesh.clone()).joint_visibility(pose, camera_origin)
}

/// Fisheye pixels of all joints.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedJoints {
    /// `None` where the joint cannot be projected (outside the field of view
    /// or at the camera centre).
    pub pixels: [Option<Vector2<f64>>; NUM_JOINTS],
    /// Projected and inside the image rectangle.
    pub in_image: [bool; NUM_JOINTS],
}

/// Projects a device-frame pose. Failures become flags, not errors.
pub fn project_joints(pose: &Pose3D, intr: &FisheyeIntrinsics) -> ProjectedJoints {
    let pixels: [Option<Vector2<f64>>; NUM_JOINTS] = std::array::from_fn(|j| intr.project(&pose.0[j]).ok());
    let in_image = std::array::from_fn(|j| pixels[j].is_some_and(|p| intr.contains_pixel(&p)));
    ProjectedJoints { pixels, in_image }
}

/// Full egocentric visibility with the camera at the device origin: a joint
/// must project inside the image and pass the occlusion test.
pub fn egocentric_visibility(
    pose: &Pose3D,
    index: &MeshIndex,
    intr: &FisheyeIntrinsics,
) -> Result<VisibilityMask, VisibilityError> {
    let projected = project_joints(pose, intr);
    let occlusion = index.joint_visibility(pose, &Vector3::zeros())?;
    Ok(occlusion.and(&VisibilityMask(projected.in_image)))
}

/// [`egocentric_visibility`] over many poses sharing one mesh.
pub fn egocentric_visibility_batch(
    poses: &[Pose3D],
    index: &MeshIndex,
    intr: &FisheyeIntrinsics,
    exec: Execution,
) -> Result<Vec<VisibilityMask>, VisibilityError> {
    exec.map(poses, |p| egocentric_visibility(p, index, intr))
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pose::Joint;
    use crate::rigid::tests::random_rigid;
    use crate::rigid::transform_points;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Axis-aligned square in the plane z = `z`, split into two triangles,
    /// all four corners labelled `label`.
    fn wall(z: f64, half: f64, label: u8) -> LabeledMesh {
        LabeledMesh::new(
            vec![
                Vector3::new(-half, -half, z),
                Vector3::new(half, -half, z),
                Vector3::new(half, half, z),
                Vector3::new(-half, half, z),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
            vec![label; 4],
        )
        .unwrap()
    }

    /// Like [`wall`] but tessellated into an `n`x`n` vertex grid.
    fn grid_wall(z: f64, half: f64, n: u32, label: u8) -> LabeledMesh {
        let step = 2.0 * half / (n - 1) as f64;
        let mut v = Vec::new();
        for r in 0..n {
            for c in 0..n {
                v.push(Vector3::new(-half + c as f64 * step, -half + r as f64 * step, z));
            }
        }
        let mut t = Vec::new();
        for r in 0..n - 1 {
            for c in 0..n - 1 {
                let i = r * n + c;
                t.push([i, i + 1, i + n + 1]);
                t.push([i, i + n + 1, i + n]);
            }
        }
        let count = v.len();
        LabeledMesh::new(v, t, vec![label; count]).unwrap()
    }

    fn merge(a: &LabeledMesh, b: &LabeledMesh) -> LabeledMesh {
        let off = a.vertices().len() as u32;
        let mut v = a.vertices().to_vec();
        v.extend_from_slice(b.vertices());
        let mut t = a.triangles().to_vec();
        t.extend(b.triangles().iter().map(|t| t.map(|i| i + off)));
        let mut l = a.labels().to_vec();
        l.extend_from_slice(b.labels());
        LabeledMesh::new(v, t, l).unwrap()
    }

    pub(crate) fn random_mesh(rng: &mut impl Rng, triangles: usize) -> LabeledMesh {
        let mut v = Vec::new();
        let mut t = Vec::new();
        let mut l = Vec::new();
        for i in 0..triangles {
            let c = Vector3::new(
                rng.random_range(-500.0..500.0),
                rng.random_range(-500.0..500.0),
                rng.random_range(200.0..1500.0),
            );
            for _ in 0..3 {
                v.push(c + Vector3::new(
                    rng.random_range(-80.0..80.0),
                    rng.random_range(-80.0..80.0),
                    rng.random_range(-80.0..80.0),
                ));
                l.push(rng.random_range(0..16u8));
            }
            let b = 3 * i as u32;
            t.push([b, b + 1, b + 2]);
        }
        LabeledMesh::new(v, t, l).unwrap()
    }

    fn pose_at(p: Vector3<f64>) -> Pose3D {
        Pose3D::from_fn(|_| p)
    }

    #[test]
    fn ray_into_facing_triangle() {
        let mesh = LabeledMesh::new(
            vec![
                Vector3::new(-1.0, -1.0, 100.0),
                Vector3::new(1.0, -1.0, 100.0),
                Vector3::new(0.0, 1.0, 100.0),
            ],
            vec![[0, 1, 2]],
            vec![0; 3],
        )
        .unwrap();
        let hit = ray_mesh_first_hit(&Vector3::zeros(), &Vector3::z(), &mesh).unwrap();
        assert_eq!(hit.distance, 100.0);
        assert_eq!(hit.triangle, 0);
        assert!(ray_mesh_first_hit(&Vector3::zeros(), &Vector3::x(), &mesh).is_none());
        assert!(ray_mesh_first_hit(&Vector3::zeros(), &-Vector3::z(), &mesh).is_none());
    }

    #[test]
    fn shared_edge_goes_to_lower_index() {
        // Ray along the diagonal shared by both triangles of the wall.
        let mesh = wall(50.0, 10.0, 0);
        let idx = MeshIndex::new(mesh.clone());
        let hit = ray_mesh_first_hit(&Vector3::zeros(), &Vector3::z(), &mesh).unwrap();
        assert_eq!(hit.triangle, 0);
        assert_eq!(idx.first_hit(&Vector3::zeros(), &Vector3::z()), Some(hit));
    }

    #[test]
    fn empty_mesh_all_visible() {
        let idx = MeshIndex::new(LabeledMesh::empty());
        let pose = Pose3D::from_fn(|j| Vector3::new(j as f64 * 10.0, 0.0, 500.0));
        assert_eq!(
            idx.joint_visibility(&pose, &Vector3::zeros()).unwrap(),
            VisibilityMask::all_visible()
        );
        let intr = FisheyeIntrinsics::synthetic_190();
        assert_eq!(
            egocentric_visibility(&pose, &idx, &intr).unwrap(),
            VisibilityMask::all_visible()
        );
    }

    #[test]
    fn torso_wall_hides_wrist() {
        let torso = wall(300.0, 400.0, Joint::Neck.index() as u8);
        let idx = MeshIndex::new(torso);
        let pose = pose_at(Vector3::new(10.0, -20.0, 600.0));
        let mask = idx.joint_visibility(&pose, &Vector3::zeros()).unwrap();
        assert!(!mask.0[Joint::RightWrist.index()]);
        assert!(mask.0[Joint::Neck.index()]);
    }

    #[test]
    fn own_part_first_hit_is_visible() {
        // Wrist surface directly in front of the wrist joint, torso behind it.
        let wrist = Joint::RightWrist.index() as u8;
        let mesh = merge(&grid_wall(400.0, 50.0, 4, wrist), &wall(800.0, 400.0, 1));
        let idx = MeshIndex::new(mesh.clone());
        let pose = pose_at(Vector3::new(0.0, 5.0, 420.0));
        let mask = idx.joint_visibility(&pose, &Vector3::zeros()).unwrap();
        assert!(mask.0[wrist as usize]);
        // Independent check of the first hit by the exhaustive scan.
        let hit = ray_mesh_first_hit(&Vector3::zeros(), &pose.0[0].normalize(), &mesh).unwrap();
        assert!(hit.triangle < 18);
        assert_eq!(mask.count(), 1);
    }

    #[test]
    fn label_tie_counts_as_occluded() {
        // Eight vertices around the hit: four own label, four other.
        let own = Joint::Head.index() as u8;
        let mut verts = Vec::new();
        let mut labels = Vec::new();
        for k in 0..8 {
            let a = k as f64 * std::f64::consts::FRAC_PI_4;
            verts.push(Vector3::new(10.0 * a.cos(), 10.0 * a.sin(), 100.0));
            labels.push(if k % 2 == 0 { own } else { 5 });
        }
        let tris = (0..8u32).map(|k| [k, (k + 1) % 8, (k + 2) % 8]).collect::<Vec<_>>();
        let mesh = LabeledMesh::new(verts, vec![tris[0], [0, 2, 4], [0, 4, 6]], labels).unwrap();
        let idx = MeshIndex::new(mesh);
        let pose = pose_at(Vector3::new(0.5, 0.5, 200.0));
        let mask = idx.joint_visibility(&pose, &Vector3::zeros()).unwrap();
        assert!(!mask.0[own as usize]);
    }

    #[test]
    fn removing_occluder_restores_visibility() {
        let torso = wall(300.0, 400.0, 1);
        let pose = pose_at(Vector3::new(10.0, 30.0, 600.0));
        let before = joint_visibility(&pose, &torso, &Vector3::zeros()).unwrap();
        assert!(!before.0[Joint::LeftFoot.index()]);
        let hit = ray_mesh_first_hit(&Vector3::zeros(), &pose.0[0].normalize(), &torso).unwrap();
        let after = joint_visibility(&pose, &torso.without_triangle(hit.triangle), &Vector3::zeros()).unwrap();
        assert!(after.0[Joint::LeftFoot.index()]);
    }

    #[test]
    fn occluders_behind_the_joint_do_not_count() {
        let mesh = wall(900.0, 400.0, 1);
        let pose = pose_at(Vector3::new(0.0, 0.0, 600.0));
        let mask = joint_visibility(&pose, &mesh, &Vector3::zeros()).unwrap();
        assert_eq!(mask, VisibilityMask::all_visible());
    }

    #[test]
    fn far_pose_is_frame_mismatch() {
        let mesh = wall(300.0, 400.0, 1);
        let pose = pose_at(Vector3::new(0.0, 0.0, 5000.0));
        assert!(matches!(
            joint_visibility(&pose, &mesh, &Vector3::zeros()),
            Err(VisibilityError::FrameMismatch { .. })
        ));
    }

    #[test]
    fn projection_flags() {
        let intr = FisheyeIntrinsics::synthetic_190();
        let mut pose = pose_at(Vector3::new(0.0, 0.0, 400.0));
        pose.0[3] = Vector3::new(0.0, 0.0, -400.0);
        let p = project_joints(&pose, &intr);
        assert_eq!(p.pixels[0], Some(Vector2::new(320.0, 240.0)));
        assert!(p.in_image[0]);
        assert!(p.pixels[3].is_none());
        assert!(!p.in_image[3]);
    }

    #[test]
    fn projection_matches_transform_then_project() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let intr = FisheyeIntrinsics::synthetic_190();
        let m = random_rigid(&mut rng);
        let device = Pose3D::from_fn(|_| {
            Vector3::new(
                rng.random_range(-300.0..300.0),
                rng.random_range(-300.0..300.0),
                rng.random_range(100.0..900.0),
            )
        });
        let world = Pose3D(std::array::from_fn(|j| m.inverse().transform_point(&device.0[j])));
        let back = transform_points(&m, world.joints());
        let projected = project_joints(&Pose3D(back.clone().try_into().unwrap()), &intr);
        for (j, p) in back.iter().enumerate() {
            let direct = intr.project(p).unwrap();
            assert_eq!(projected.pixels[j], Some(direct));
            let orig = intr.project(&device.0[j]).unwrap();
            assert!((orig - direct).norm() < 1e-6);
        }
    }

    #[test]
    fn bvh_matches_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mesh = random_mesh(&mut rng, 1000);
        let idx = MeshIndex::new(mesh.clone());
        let mut hits = 0;
        for _ in 0..2000 {
            let origin = Vector3::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0), 0.0);
            let target = Vector3::new(
                rng.random_range(-500.0..500.0),
                rng.random_range(-500.0..500.0),
                rng.random_range(200.0..1500.0),
            );
            let dir = (target - origin).normalize();
            let a = ray_mesh_first_hit(&origin, &dir, &mesh);
            let b = idx.first_hit(&origin, &dir);
            assert_eq!(a, b);
            hits += a.is_some() as usize;
        }
        assert!(hits > 200, "too few hits to be meaningful: {hits}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn visibility_invariant_under_rigid_motion(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mesh = random_mesh(&mut rng, 200);
            let pose = Pose3D::from_fn(|_| Vector3::new(
                rng.random_range(-400.0..400.0),
                rng.random_range(-400.0..400.0),
                rng.random_range(300.0..1400.0),
            ));
            let cam = Vector3::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0), 0.0);
            let m = random_rigid(&mut rng);
            let base = joint_visibility(&pose, &mesh, &cam).unwrap();
            let moved = joint_visibility(
                &pose.map(|p| m.transform_point(p)),
                &mesh.map_vertices(|v| m.transform_point(v)),
                &m.transform_point(&cam),
            ).unwrap();
            prop_assert_eq!(base, moved);
        }

        #[test]
        fn removing_a_non_first_hit_triangle_keeps_visible_joints(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mesh = random_mesh(&mut rng, 150);
            let pose = Pose3D::from_fn(|_| Vector3::new(
                rng.random_range(-400.0..400.0),
                rng.random_range(-400.0..400.0),
                rng.random_range(300.0..1400.0),
            ));
            let idx = MeshIndex::new(mesh.clone());
            let base = idx.joint_visibility(&pose, &Vector3::zeros()).unwrap();
            let removed = rng.random_range(0..mesh.triangles().len());
            let after = joint_visibility(&pose, &mesh.without_triangle(removed), &Vector3::zeros()).unwrap();
            for j in 0..NUM_JOINTS {
                let dist = pose.0[j].norm();
                let first = idx.first_hit_within(&Vector3::zeros(), &(pose.0[j] / dist), dist);
                if base.0[j] && first.is_none_or(|h| h.triangle != removed) {
                    prop_assert!(after.0[j]);
                }
            }
        }
    }
}
