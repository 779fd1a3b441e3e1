//! Polynomial omnidirectional camera model.
//!
//! A pixel maps to sensor coordinates `(u', v')` through the affine stretch
//! `[c d; e 1]` and the principal point. The forward polynomial `f(rho)`
//! turns sensor radius into the ray `(u', v', f(rho))`, so the incidence
//! angle is `atan2(rho, f(rho))`. Projection inverts that relation with the
//! inverse polynomial `rho(theta)` and polishes the result with Newton steps
//! on the forward model.

use nalgebra::{DMatrix, DVector, Vector2, Vector3};
use std::fmt::Write;
use std::path::Path;
use thiserror::Error;

/// Points closer than this to the camera centre (mm) cannot be projected.
pub const DEGENERATE_EPS: f64 = 1e-6;
/// Degree of the inverse polynomial fitted when a file omits it.
pub const DEFAULT_INVERSE_DEGREE: usize = 8;

const SYNTHETIC_190: &str = include_str!("../assets/synthetic_190.intr");

#[derive(Debug, Error, PartialEq)]
pub enum FisheyeError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("intrinsics invariant violated: {0}")]
    InvariantViolation(String),
    #[error("incidence angle {angle_deg:.4} deg exceeds half field of view {half_fov_deg:.4} deg")]
    OutsideFieldOfView { angle_deg: f64, half_fov_deg: f64 },
    #[error("point is within {DEGENERATE_EPS} mm of the camera centre")]
    DegeneratePoint,
    #[error("pixel ({u}, {v}) lies outside the image")]
    OutsideImage { u: f64, v: f64 },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisheyeIntrinsics {
    poly: Vec<f64>,
    inv_poly: Vec<f64>,
    center: Vector2<f64>,
    stretch: [f64; 3],
    width: u32,
    height: u32,
    fov_deg: f64,
    rho_max: f64,
}

#[inline]
fn polyval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

#[inline]
fn polyder(coeffs: &[f64], x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (i, &c)| acc * x + i as f64 * c)
}

impl FisheyeIntrinsics {
    /// Validates the model and fits the inverse polynomial when `inv_poly`
    /// is `None`.
    pub fn new(
        poly: Vec<f64>,
        inv_poly: Option<Vec<f64>>,
        center: (f64, f64),
        stretch: (f64, f64, f64),
        size: (u32, u32),
        fov_deg: f64,
    ) -> Result<Self, FisheyeError> {
        let bad = |m: String| Err(FisheyeError::InvariantViolation(m));
        let (width, height) = size;
        if width == 0 || height == 0 {
            return bad(format!("image size {width}x{height}"));
        }
        let (cx, cy) = center;
        if !(cx >= 0.0 && cx < width as f64 && cy >= 0.0 && cy < height as f64) {
            return bad(format!("principal point ({cx}, {cy}) outside {width}x{height} image"));
        }
        let (c, d, e) = stretch;
        if !(c - d * e).is_finite() || (c - d * e).abs() < 1e-12 {
            return bad(format!("stretch matrix singular: c - d*e = {}", c - d * e));
        }
        if !(fov_deg > 0.0 && fov_deg < 360.0) {
            return bad(format!("field of view {fov_deg} deg"));
        }
        if poly.is_empty() || poly[0] <= 0.0 || poly.iter().any(|v| !v.is_finite()) {
            return bad("forward polynomial needs a positive constant term".into());
        }
        let mut intr = FisheyeIntrinsics {
            poly,
            inv_poly: Vec::new(),
            center: Vector2::new(cx, cy),
            stretch: [c, d, e],
            width,
            height,
            fov_deg,
            rho_max: 0.0,
        };
        intr.rho_max = intr.find_rho_max()?;
        intr.inv_poly = match inv_poly {
            Some(p) if !p.is_empty() && p.iter().all(|v| v.is_finite()) => p,
            Some(_) => return bad("inverse polynomial is empty or non-finite".into()),
            None => intr.fit_inverse(DEFAULT_INVERSE_DEGREE),
        };
        Ok(intr)
    }

    /// The bundled synthetic 190 degree lens.
    pub fn synthetic_190() -> Self {
        parse_intrinsics(SYNTHETIC_190).expect("bundled intrinsics are valid")
    }

    pub fn poly(&self) -> &[f64] {
        &self.poly
    }

    pub fn inv_poly(&self) -> &[f64] {
        &self.inv_poly
    }

    pub fn center(&self) -> (f64, f64) {
        (self.center.x, self.center.y)
    }

    pub fn stretch(&self) -> (f64, f64, f64) {
        (self.stretch[0], self.stretch[1], self.stretch[2])
    }

    pub fn size(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn fov_deg(&self) -> f64 {
        self.fov_deg
    }

    pub fn half_fov(&self) -> f64 {
        (self.fov_deg * 0.5).to_radians()
    }

    /// Sensor radius at which the incidence angle reaches half the field of view.
    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    /// Incidence angle (radians from the optical axis) at sensor radius `rho`.
    pub fn incidence_angle(&self, rho: f64) -> f64 {
        rho.atan2(polyval(&self.poly, rho))
    }

    fn incidence_slope(&self, rho: f64) -> f64 {
        let f = polyval(&self.poly, rho);
        let df = polyder(&self.poly, rho);
        (f - rho * df) / (rho * rho + f * f)
    }

    /// Walks outward until the half field of view is reached, requiring the
    /// incidence angle to increase strictly along the way.
    fn find_rho_max(&self) -> Result<f64, FisheyeError> {
        let target = self.half_fov();
        let limit = 10.0 * (self.width as f64).hypot(self.height as f64);
        let step = 0.25;
        let mut prev = 0.0;
        let mut prev_theta = self.incidence_angle(0.0);
        loop {
            let rho = prev + step;
            if rho > limit {
                return Err(FisheyeError::InvariantViolation(format!(
                    "half field of view not reached within radius {limit:.1} px"
                )));
            }
            let theta = self.incidence_angle(rho);
            if theta <= prev_theta {
                return Err(FisheyeError::InvariantViolation(format!(
                    "incidence angle not increasing near radius {rho:.2} px"
                )));
            }
            if theta >= target {
                let (mut lo, mut hi) = (prev, rho);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.incidence_angle(mid) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return Ok(0.5 * (lo + hi));
            }
            prev = rho;
            prev_theta = theta;
        }
    }

    /// Least-squares fit of `rho(theta)` over `[0, half_fov]`, extended 2%
    /// past the edge so the seed stays sane right at the boundary.
    pub fn fit_inverse(&self, degree: usize) -> Vec<f64> {
        let n = 2000;
        let rows: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let rho = self.rho_max * 1.02 * i as f64 / (n - 1) as f64;
                (self.incidence_angle(rho), rho)
            })
            .collect();
        let a = DMatrix::from_fn(n, degree + 1, |r, c| rows[r].0.powi(c as i32));
        let b = DVector::from_iterator(n, rows.iter().map(|r| r.1));
        let svd = a.svd(true, true);
        let x = svd.solve(&b, 1e-14).expect("svd computed with u and v");
        x.iter().copied().collect()
    }

    /// Sensor radius for incidence angle `theta`: inverse polynomial seed,
    /// then Newton on the forward model.
    fn radius_for_angle(&self, theta: f64) -> f64 {
        let mut rho = polyval(&self.inv_poly, theta).clamp(0.0, self.rho_max * 1.05);
        for _ in 0..30 {
            let slope = self.incidence_slope(rho);
            if slope <= 0.0 {
                break;
            }
            let step = (self.incidence_angle(rho) - theta) / slope;
            rho = (rho - step).max(0.0);
            if step.abs() <= 1e-13 * (1.0 + rho) {
                break;
            }
        }
        rho
    }

    fn sensor_to_pixel(&self, s: Vector2<f64>) -> Vector2<f64> {
        let [c, d, e] = self.stretch;
        Vector2::new(c * s.x + d * s.y, e * s.x + s.y) + self.center
    }

    fn pixel_to_sensor(&self, px: Vector2<f64>) -> Vector2<f64> {
        let [c, d, e] = self.stretch;
        let q = px - self.center;
        let det = c - d * e;
        Vector2::new((q.x - d * q.y) / det, (c * q.y - e * q.x) / det)
    }

    /// Projects a camera-frame point (mm) to a pixel.
    pub fn project(&self, point: &Vector3<f64>) -> Result<Vector2<f64>, FisheyeError> {
        if point.norm() < DEGENERATE_EPS {
            return Err(FisheyeError::DegeneratePoint);
        }
        let r_xy = point.x.hypot(point.y);
        let theta = r_xy.atan2(point.z);
        let half = self.half_fov();
        if theta > half + 1e-12 {
            return Err(FisheyeError::OutsideFieldOfView {
                angle_deg: theta.to_degrees(),
                half_fov_deg: half.to_degrees(),
            });
        }
        if r_xy == 0.0 {
            return Ok(self.center);
        }
        let rho = self.radius_for_angle(theta);
        let s = Vector2::new(point.x / r_xy * rho, point.y / r_xy * rho);
        Ok(self.sensor_to_pixel(s))
    }

    /// Unit ray through a pixel.
    pub fn unproject(&self, pixel: &Vector2<f64>) -> Result<Vector3<f64>, FisheyeError> {
        let (u, v) = (pixel.x, pixel.y);
        if !(u >= 0.0 && u < self.width as f64 && v >= 0.0 && v < self.height as f64) {
            return Err(FisheyeError::OutsideImage { u, v });
        }
        let s = self.pixel_to_sensor(*pixel);
        let rho = s.norm();
        if rho > self.rho_max * (1.0 + 1e-12) {
            return Err(FisheyeError::OutsideFieldOfView {
                angle_deg: self.incidence_angle(rho).to_degrees(),
                half_fov_deg: self.fov_deg * 0.5,
            });
        }
        Ok(Vector3::new(s.x, s.y, polyval(&self.poly, rho)).normalize())
    }

    /// True when the pixel lies inside the image rectangle.
    pub fn contains_pixel(&self, pixel: &Vector2<f64>) -> bool {
        pixel.x >= 0.0 && pixel.x < self.width as f64 && pixel.y >= 0.0 && pixel.y < self.height as f64
    }

    /// Serialises to the key-value file format read by [`parse_intrinsics`].
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        let _ = writeln!(out, "poly = {}", join(&self.poly));
        let _ = writeln!(out, "inv_poly = {}", join(&self.inv_poly));
        let _ = writeln!(out, "center = {:?} {:?}", self.center.x, self.center.y);
        let _ = writeln!(out, "stretch = {}", join(&self.stretch));
        let _ = writeln!(out, "size = {} {}", self.width, self.height);
        let _ = writeln!(out, "fov_deg = {:?}", self.fov_deg);
        out
    }
}

/// Parses the `key = values` intrinsics format.
///
/// Keys: `poly` (forward coefficients, constant term first), `inv_poly`
/// (optional), `center` (cx cy), `stretch` (c d e), `size` (width height),
/// `fov_deg`. `#` starts a comment.
pub fn parse_intrinsics(text: &str) -> Result<FisheyeIntrinsics, FisheyeError> {
    let mut poly = None;
    let mut inv_poly = None;
    let mut center = None;
    let mut stretch = None;
    let mut size = None;
    let mut fov = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| FisheyeError::Parse(format!("line {}: expected key = value", i + 1)))?;
        let nums = value
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| FisheyeError::Parse(format!("line {}: {e}", i + 1)))?;
        let expect = |n: usize| {
            if nums.len() == n {
                Ok(())
            } else {
                Err(FisheyeError::Parse(format!(
                    "line {}: {} needs {n} values, found {}",
                    i + 1,
                    key.trim(),
                    nums.len()
                )))
            }
        };
        match key.trim() {
            "poly" => poly = Some(nums),
            "inv_poly" => inv_poly = Some(nums),
            "center" => {
                expect(2)?;
                center = Some((nums[0], nums[1]));
            }
            "stretch" => {
                expect(3)?;
                stretch = Some((nums[0], nums[1], nums[2]));
            }
            "size" => {
                expect(2)?;
                if nums.iter().any(|v| v.fract() != 0.0 || *v < 0.0 || *v > u32::MAX as f64) {
                    return Err(FisheyeError::Parse(format!("line {}: size must be integers", i + 1)));
                }
                size = Some((nums[0] as u32, nums[1] as u32));
            }
            "fov_deg" => {
                expect(1)?;
                fov = Some(nums[0]);
            }
            other => return Err(FisheyeError::Parse(format!("line {}: unknown key {other:?}", i + 1))),
        }
    }
    let missing = |k: &str| FisheyeError::Parse(format!("missing key {k:?}"));
    FisheyeIntrinsics::new(
        poly.ok_or_else(|| missing("poly"))?,
        inv_poly,
        center.ok_or_else(|| missing("center"))?,
        stretch.ok_or_else(|| missing("stretch"))?,
        size.ok_or_else(|| missing("size"))?,
        fov.ok_or_else(|| missing("fov_deg"))?,
    )
}

pub fn load_intrinsics(path: impl AsRef<Path>) -> Result<FisheyeIntrinsics, FisheyeError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| FisheyeError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_intrinsics(&text)
}
