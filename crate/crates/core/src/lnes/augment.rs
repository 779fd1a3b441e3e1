use super::{LnesError, LnesFrame};

/// Per-pixel boolean mask at LNES resolution, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self, LnesError> {
        if data.len() != width * height {
            return Err(LnesError::ShapeMismatch {
                expected: (width, height),
                found: (data.len(), 1),
            });
        }
        Ok(BinaryMask {
            width,
            height,
            data,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        BinaryMask {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn full(width: usize, height: usize) -> Self {
        BinaryMask {
            width,
            height,
            data: vec![true; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        BinaryMask {
            width,
            height,
            data,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }
}

/// Adds background events outside the human region to a foreground frame.
///
/// The background is zeroed wherever `human_mask` is set, added to the
/// foreground, and the sum is clamped to [0, 1].
pub fn augment_lnes(
    foreground: &LnesFrame,
    background: &LnesFrame,
    human_mask: &BinaryMask,
) -> Result<LnesFrame, LnesError> {
    let (w, h) = foreground.dims();
    background.ensure_dims(w, h)?;
    if human_mask.dims() != (w, h) {
        return Err(LnesError::ShapeMismatch {
            expected: (w, h),
            found: human_mask.dims(),
        });
    }
    let data = foreground
        .data()
        .chunks_exact(2)
        .zip(background.data().chunks_exact(2))
        .zip(human_mask.data())
        .flat_map(|((fg, bg), &human)| {
            if human {
                [fg[0], fg[1]]
            } else {
                [(fg[0] + bg[0]).min(1.0), (fg[1] + bg[1]).min(1.0)]
            }
        })
        .collect();
    Ok(LnesFrame {
        width: w,
        height: h,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frame(w: usize, h: usize, vals: &[f32]) -> LnesFrame {
        LnesFrame::from_vec(w, h, vals.to_vec()).unwrap()
    }

    #[test]
    fn empty_background_keeps_foreground() {
        let fg = frame(2, 1, &[0.1, 0.2, 0.3, 0.4]);
        let out = augment_lnes(&fg, &LnesFrame::zeros(2, 1), &BinaryMask::empty(2, 1)).unwrap();
        assert_eq!(out, fg);
    }

    #[test]
    fn full_mask_keeps_foreground() {
        let fg = frame(2, 1, &[0.1, 0.2, 0.3, 0.4]);
        let bg = frame(2, 1, &[0.9, 0.9, 0.9, 0.9]);
        let out = augment_lnes(&fg, &bg, &BinaryMask::full(2, 1)).unwrap();
        assert_eq!(out, fg);
    }

    #[test]
    fn sum_clamps_to_one() {
        let fg = frame(1, 1, &[0.8, 0.1]);
        let bg = frame(1, 1, &[0.6, 0.2]);
        let out = augment_lnes(&fg, &bg, &BinaryMask::empty(1, 1)).unwrap();
        assert_eq!(out.get(0, 0, 0), 1.0);
        assert_eq!(out.get(0, 0, 1), 0.1f32 + 0.2f32);
    }

    #[test]
    fn shape_mismatch() {
        let fg = LnesFrame::zeros(2, 2);
        assert!(augment_lnes(&fg, &LnesFrame::zeros(2, 1), &BinaryMask::empty(2, 2)).is_err());
        assert!(augment_lnes(&fg, &LnesFrame::zeros(2, 2), &BinaryMask::empty(1, 2)).is_err());
    }

    proptest! {
        #[test]
        fn human_region_untouched_and_range_kept(
            vals in prop::collection::vec((0.0f32..=1.0, 0.0f32..=1.0, any::<bool>()), 12)
        ) {
            let fg = frame(3, 2, &vals.iter().flat_map(|v| [v.0, v.1]).collect::<Vec<_>>()[..12]);
            let bg = frame(3, 2, &vals.iter().flat_map(|v| [v.1, v.0]).collect::<Vec<_>>()[..12]);
            let mask = BinaryMask::new(3, 2, vals.iter().map(|v| v.2).take(6).collect()).unwrap();
            let out = augment_lnes(&fg, &bg, &mask).unwrap();
            for y in 0..2 {
                for x in 0..3 {
                    for c in 0..2 {
                        let v = out.get(x, y, c);
                        prop_assert!((0.0..=1.0).contains(&v));
                        if mask.get(x, y) {
                            prop_assert_eq!(v, fg.get(x, y, c));
                        } else {
                            prop_assert!(v >= fg.get(x, y, c));
                        }
                    }
                }
            }
        }
    }
}
