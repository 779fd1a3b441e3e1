use super::VisibilityError;
use crate::pose::{Joint, NUM_JOINTS};
use nalgebra::Vector3;
use std::fmt::Write;

/// Triangle mesh whose vertices carry the body part (joint index) they
/// belong to.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledMesh {
    vertices: Vec<Vector3<f64>>,
    triangles: Vec<[u32; 3]>,
    labels: Vec<u8>,
}

impl LabeledMesh {
    pub fn new(
        vertices: Vec<Vector3<f64>>,
        triangles: Vec<[u32; 3]>,
        labels: Vec<u8>,
    ) -> Result<Self, VisibilityError> {
        if labels.len() != vertices.len() {
            return Err(VisibilityError::InvalidMesh(format!(
                "{} labels for {} vertices",
                labels.len(),
                vertices.len()
            )));
        }
        if let Some(l) = labels.iter().find(|&&l| l as usize >= NUM_JOINTS) {
            return Err(VisibilityError::InvalidMesh(format!("label {l} is not a joint index")));
        }
        if let Some(v) = vertices.iter().position(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(VisibilityError::InvalidMesh(format!("vertex {v} is not finite")));
        }
        let n = vertices.len() as u32;
        if let Some(t) = triangles.iter().position(|t| t.iter().any(|&i| i >= n)) {
            return Err(VisibilityError::InvalidMesh(format!(
                "triangle {t} references a vertex beyond {n}"
            )));
        }
        Ok(LabeledMesh {
            vertices,
            triangles,
            labels,
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn vertices(&self) -> &[Vector3<f64>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn triangle(&self, i: usize) -> [Vector3<f64>; 3] {
        self.triangles[i].map(|v| self.vertices[v as usize])
    }

    /// Same mesh with vertices mapped through `f`.
    pub fn map_vertices(&self, f: impl Fn(&Vector3<f64>) -> Vector3<f64>) -> LabeledMesh {
        LabeledMesh {
            vertices: self.vertices.iter().map(f).collect(),
            triangles: self.triangles.clone(),
            labels: self.labels.clone(),
        }
    }

    /// Same mesh without the triangle at `index`.
    pub fn without_triangle(&self, index: usize) -> LabeledMesh {
        let mut triangles = self.triangles.clone();
        triangles.remove(index);
        LabeledMesh {
            vertices: self.vertices.clone(),
            triangles,
            labels: self.labels.clone(),
        }
    }

    /// Parses the ASCII mesh format:
    ///
    /// ```text
    /// vertices N
    /// x y z label      (N lines; label is a joint index 0-15 or joint name)
    /// faces M
    /// a b c            (M lines; 0-based vertex indices)
    /// ```
    ///
    /// `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, VisibilityError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let parse_err = |line: usize, msg: String| VisibilityError::Parse { line, message: msg };

        let header = |lines: &mut dyn Iterator<Item = (usize, &str)>, key: &str| {
            let (n, l) = lines
                .next()
                .ok_or_else(|| parse_err(0, format!("missing `{key}` header")))?;
            let mut parts = l.split_whitespace();
            if parts.next() != Some(key) {
                return Err(parse_err(n, format!("expected `{key} <count>`")));
            }
            parts
                .next()
                .and_then(|c| c.parse::<usize>().ok())
                .ok_or_else(|| parse_err(n, format!("bad `{key}` count")))
        };

        let nv = header(&mut lines, "vertices")?;
        let mut vertices = Vec::with_capacity(nv);
        let mut labels = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (n, l) = lines
                .next()
                .ok_or_else(|| parse_err(0, "unexpected end of vertex list".into()))?;
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 4 {
                return Err(parse_err(n, format!("expected `x y z label`, found {} fields", f.len())));
            }
            let mut xyz = [0.0; 3];
            for (k, slot) in xyz.iter_mut().enumerate() {
                *slot = f[k].parse().map_err(|e| parse_err(n, format!("{:?}: {e}", f[k])))?;
            }
            vertices.push(Vector3::from(xyz));
            labels.push(parse_label(f[3]).ok_or_else(|| parse_err(n, format!("unknown label {:?}", f[3])))?);
        }

        let nf = header(&mut lines, "faces")?;
        let mut triangles = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (n, l) = lines
                .next()
                .ok_or_else(|| parse_err(0, "unexpected end of face list".into()))?;
            let f: Vec<u32> = l
                .split_whitespace()
                .map(|s| s.parse::<u32>())
                .collect::<Result<_, _>>()
                .map_err(|e| parse_err(n, e.to_string()))?;
            if f.len() != 3 {
                return Err(parse_err(n, format!("expected 3 indices, found {}", f.len())));
            }
            triangles.push([f[0], f[1], f[2]]);
        }
        if let Some((n, _)) = lines.next() {
            return Err(parse_err(n, "trailing content after faces".into()));
        }
        LabeledMesh::new(vertices, triangles, labels)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "vertices {}", self.vertices.len());
        for (v, l) in self.vertices.iter().zip(&self.labels) {
            let _ = writeln!(out, "{:?} {:?} {:?} {}", v.x, v.y, v.z, l);
        }
        let _ = writeln!(out, "faces {}", self.triangles.len());
        for t in &self.triangles {
            let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
        }
        out
    }
}

fn parse_label(s: &str) -> Option<u8> {
    if let Ok(i) = s.parse::<u8>() {
        return ((i as usize) < NUM_JOINTS).then_some(i);
    }
    Joint::ALL.iter().find(|j| j.name() == s).map(|j| j.index() as u8)
}
