//! Dense row-major 2D maps of `f64` and bilinear resampling.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid data length {len} does not match {rows}x{cols}")]
    LengthMismatch { rows: usize, cols: usize, len: usize },
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
}

/// A `rows x cols` map stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Grid {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Grid {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, GridError> {
        if data.len() != rows * cols {
            return Err(GridError::LengthMismatch {
                rows,
                cols,
                len: data.len(),
            });
        }
        Ok(Grid { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Grid { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn ensure_same_shape(&self, other: &Grid) -> Result<(), GridError> {
        if self.shape() != other.shape() {
            return Err(GridError::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Bilinear resize with half-pixel centres and edge clamping, so a
    /// constant map stays constant at any output size.
    pub fn resize_bilinear(&self, rows: usize, cols: usize) -> Grid {
        if (rows, cols) == self.shape() {
            return self.clone();
        }
        let ys = axis_weights(self.rows, rows);
        let xs = axis_weights(self.cols, cols);
        let mut out = Vec::with_capacity(rows * cols);
        for &(y0, y1, wy) in &ys {
            let r0 = &self.data[y0 * self.cols..(y0 + 1) * self.cols];
            let r1 = &self.data[y1 * self.cols..(y1 + 1) * self.cols];
            for &(x0, x1, wx) in &xs {
                let top = r0[x0] + (r0[x1] - r0[x0]) * wx;
                let bottom = r1[x0] + (r1[x1] - r1[x0]) * wx;
                out.push(top + (bottom - top) * wy);
            }
        }
        Grid {
            rows,
            cols,
            data: out,
        }
    }
}

/// Source sample pairs and interpolation weight for each output coordinate.
fn axis_weights(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|i| {
            let s = ((i as f64 + 0.5) * scale - 0.5).max(0.0);
            let i0 = (s.floor() as usize).min(src - 1);
            let i1 = (i0 + 1).min(src - 1);
            (i0, i1, s - i0 as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_survives_upsampling() {
        let g = Grid::filled(24, 32, 0.5);
        let up = g.resize_bilinear(48, 64);
        assert_eq!(up.shape(), (48, 64));
        assert!(up.data().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn identity_resize_is_clone() {
        let g = Grid::from_fn(3, 4, |r, c| (r * 4 + c) as f64);
        assert_eq!(g.resize_bilinear(3, 4), g);
    }

    #[test]
    fn doubling_interpolates_between_samples() {
        // 1x2 -> 1x4: centres at -0.25, 0.25, 0.75, 1.25 in source pixels.
        let g = Grid::from_vec(1, 2, vec![0.0, 1.0]).unwrap();
        let up = g.resize_bilinear(1, 4);
        assert_eq!(up.data(), &[0.0, 0.25, 0.75, 1.0]);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(matches!(
            Grid::from_vec(2, 2, vec![0.0; 3]),
            Err(GridError::LengthMismatch { .. })
        ));
    }
}
