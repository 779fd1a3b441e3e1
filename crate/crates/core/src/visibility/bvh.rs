//! Bounding-volume hierarchy over mesh triangles.
//!
//! Traversal returns exactly what the exhaustive scan returns: both use the
//! same ray-triangle test and the same `(distance, triangle index)` ordering,
//! and node boxes are padded so rounding can never cull a real hit.

use super::{intersect_triangle, Hit, LabeledMesh};
use nalgebra::Vector3;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    min: Vector3<f64>,
    max: Vector3<f64>,
}

impl Aabb {
    fn empty() -> Self {
        Aabb {
            min: Vector3::repeat(f64::INFINITY),
            max: Vector3::repeat(f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &Vector3<f64>) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    fn padded(mut self) -> Self {
        let scale = self.min.amax().max(self.max.amax());
        let pad = 1e-9 * (1.0 + scale);
        self.min.add_scalar_mut(-pad);
        self.max.add_scalar_mut(pad);
        self
    }

    /// Entry distance of the ray into the box, if it intersects within `[0, max_t]`.
    fn entry(&self, origin: &Vector3<f64>, inv_dir: &Vector3<f64>, max_t: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = max_t;
        for a in 0..3 {
            if inv_dir[a].is_infinite() {
                if origin[a] < self.min[a] || origin[a] > self.max[a] {
                    return None;
                }
                continue;
            }
            let mut near = (self.min[a] - origin[a]) * inv_dir[a];
            let mut far = (self.max[a] - origin[a]) * inv_dir[a];
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            t0 = t0.max(near);
            t1 = t1.min(far);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { bounds: Aabb, start: usize, end: usize },
    Inner { bounds: Aabb, left: usize, right: usize },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

#[derive(Debug, Clone)]
pub(super) struct Bvh {
    nodes: Vec<Node>,
    order: Vec<usize>,
}

impl Bvh {
    pub(super) fn build(mesh: &LabeledMesh) -> Self {
        let n = mesh.triangles().len();
        let centroids: Vec<Vector3<f64>> = (0..n)
            .map(|i| {
                let [a, b, c] = mesh.triangle(i);
                (a + b + c) / 3.0
            })
            .collect();
        let mut bvh = Bvh {
            nodes: Vec::with_capacity(2 * n / LEAF_SIZE + 1),
            order: (0..n).collect(),
        };
        if n > 0 {
            bvh.build_node(mesh, &centroids, 0, n);
        }
        bvh
    }

    fn build_node(&mut self, mesh: &LabeledMesh, centroids: &[Vector3<f64>], start: usize, end: usize) -> usize {
        let mut bounds = Aabb::empty();
        let mut cbounds = Aabb::empty();
        for &t in &self.order[start..end] {
            for v in mesh.triangle(t) {
                bounds.grow(&v);
            }
            cbounds.grow(&centroids[t]);
        }
        let bounds = bounds.padded();
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { bounds, start, end });
            return id;
        }
        self.nodes.push(Node::Leaf { bounds, start, end });
        let extent = cbounds.max - cbounds.min;
        let axis = extent.imax();
        let mid = (start + end) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            centroids[a][axis]
                .total_cmp(&centroids[b][axis])
                .then(a.cmp(&b))
        });
        let left = self.build_node(mesh, centroids, start, mid);
        let right = self.build_node(mesh, centroids, mid, end);
        self.nodes[id] = Node::Inner { bounds, left, right };
        id
    }

    pub(super) fn first_hit(
        &self,
        mesh: &LabeledMesh,
        origin: &Vector3<f64>,
        dir: &Vector3<f64>,
        max_t: f64,
    ) -> Option<Hit> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv_dir = dir.map(|d| 1.0 / d);
        let mut best: Option<(f64, usize)> = None;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            let limit = best.map_or(max_t, |(t, _)| t);
            if node.bounds().entry(origin, &inv_dir, limit).is_none() {
                continue;
            }
            match *node {
                Node::Leaf { start, end, .. } => {
                    for &tri in &self.order[start..end] {
                        let [a, b, c] = mesh.triangle(tri);
                        if let Some(t) = intersect_triangle(origin, dir, &a, &b, &c) {
                            if t <= max_t && best.is_none_or(|(bt, bi)| t < bt || (t == bt && tri < bi)) {
                                best = Some((t, tri));
                            }
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        best.map(|(distance, triangle)| Hit {
            point: origin + dir * distance,
            triangle,
            distance,
        })
    }
}
