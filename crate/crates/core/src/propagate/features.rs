//! Stride-4 descriptor grids.
//!
//! Each 4x4 cell gets an 8-dim appearance block (mean RGB, RGB standard
//! deviation, mean absolute horizontal and vertical luminance gradient),
//! L2-normalized, followed by its grid position `(x / gw, y / gh)` scaled by
//! [`POSITION_WEIGHT`].

use crate::mask::BinaryMask;
use crate::types::Frame;

pub const STRIDE: usize = 4;
pub const APPEARANCE_DIM: usize = 8;
pub const DESCRIPTOR_DIM: usize = APPEARANCE_DIM + 2;
pub const POSITION_WEIGHT: f32 = 0.3;

pub type Descriptor = [f32; DESCRIPTOR_DIM];

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGrid {
    pub gw: usize,
    pub gh: usize,
    pub keys: Vec<Descriptor>,
    /// Per-cell foreground fraction, when the grid is a memory entry.
    pub labels: Option<Vec<f32>>,
}

impl FeatureGrid {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn with_labels(mut self, labels: Vec<f32>) -> Self {
        assert_eq!(labels.len(), self.keys.len(), "one label per cell");
        self.labels = Some(labels);
        self
    }
}

pub fn grid_dims(width: usize, height: usize) -> (usize, usize) {
    (width.div_ceil(STRIDE), height.div_ceil(STRIDE))
}

fn luma(p: [u8; 3]) -> f32 {
    (0.299 * p[0] as f32 + 0.587 * p[1] as f32 + 0.114 * p[2] as f32) / 255.0
}

pub fn extract_features(frame: &Frame) -> FeatureGrid {
    let (w, h) = frame.dims();
    let (gw, gh) = grid_dims(w, h);
    let lum: Vec<f32> = (0..w * h).map(|i| luma(frame.rgb(i % w, i / w))).collect();
    let at = |x: usize, y: usize| lum[y * w + x];

    let mut keys = Vec::with_capacity(gw * gh);
    for cy in 0..gh {
        for cx in 0..gw {
            let (x0, x1) = (cx * STRIDE, ((cx + 1) * STRIDE).min(w));
            let (y0, y1) = (cy * STRIDE, ((cy + 1) * STRIDE).min(h));
            let cell = || (y0..y1).flat_map(move |y| (x0..x1).map(move |x| (x, y)));
            let n = ((x1 - x0) * (y1 - y0)) as f32;
            let mut mean = [0f32; 3];
            let mut grad = [0f32; 2];
            for (x, y) in cell() {
                let p = frame.rgb(x, y);
                for c in 0..3 {
                    mean[c] += p[c] as f32 / 255.0;
                }
                let (xl, xr) = (x.saturating_sub(1), (x + 1).min(w - 1));
                let (yu, yd) = (y.saturating_sub(1), (y + 1).min(h - 1));
                grad[0] += ((at(xr, y) - at(xl, y)) / 2.0).abs();
                grad[1] += ((at(x, yd) - at(x, yu)) / 2.0).abs();
            }
            for m in &mut mean {
                *m /= n;
            }
            let mut var = [0f32; 3];
            for (x, y) in cell() {
                let p = frame.rgb(x, y);
                for c in 0..3 {
                    let dv = p[c] as f32 / 255.0 - mean[c];
                    var[c] += dv * dv;
                }
            }
            let mut d = [0f32; DESCRIPTOR_DIM];
            for c in 0..3 {
                d[c] = mean[c];
                d[3 + c] = (var[c] / n).sqrt();
            }
            d[6] = grad[0] / n;
            d[7] = grad[1] / n;
            let norm = d[..APPEARANCE_DIM]
                .iter()
                .map(|v| v * v)
                .sum::<f32>()
                .sqrt();
            if norm > 0.0 {
                for v in &mut d[..APPEARANCE_DIM] {
                    *v /= norm;
                }
            }
            d[8] = POSITION_WEIGHT * cx as f32 / gw as f32;
            d[9] = POSITION_WEIGHT * cy as f32 / gh as f32;
            keys.push(d);
        }
    }
    FeatureGrid {
        gw,
        gh,
        keys,
        labels: None,
    }
}

/// Foreground fraction of each cell of `mask`.
pub fn cell_fractions(mask: &BinaryMask) -> Vec<f32> {
    let (w, h) = mask.dims();
    let (gw, gh) = grid_dims(w, h);
    let mut out = Vec::with_capacity(gw * gh);
    for cy in 0..gh {
        for cx in 0..gw {
            let (mut fg, mut n) = (0u32, 0u32);
            for y in cy * STRIDE..((cy + 1) * STRIDE).min(h) {
                for x in cx * STRIDE..((cx + 1) * STRIDE).min(w) {
                    fg += mask.get(x, y) as u32;
                    n += 1;
                }
            }
            out.push(fg as f32 / n as f32);
        }
    }
    out
}

/// Bilinear upsampling of a cell grid to `width x height`, row-major.
pub fn upsample(soft: &[f32], width: usize, height: usize) -> Vec<f32> {
    let (gw, gh) = grid_dims(width, height);
    assert_eq!(
        soft.len(),
        gw * gh,
        "soft grid does not match the frame size"
    );
    let sample = |coord: usize, cells: usize| -> (usize, usize, f32) {
        let u = ((coord as f32 + 0.5) / STRIDE as f32 - 0.5).clamp(0.0, (cells - 1) as f32);
        let i0 = u.floor() as usize;
        let i1 = (i0 + 1).min(cells - 1);
        (i0, i1, u - i0 as f32)
    };
    let xs: Vec<_> = (0..width).map(|x| sample(x, gw)).collect();
    let mut out = Vec::with_capacity(width * height);
    for y in 0..height {
        let (y0, y1, ty) = sample(y, gh);
        for &(x0, x1, tx) in &xs {
            let top = soft[y0 * gw + x0] * (1.0 - tx) + soft[y0 * gw + x1] * tx;
            let bottom = soft[y1 * gw + x0] * (1.0 - tx) + soft[y1 * gw + x1] * tx;
            out.push(top * (1.0 - ty) + bottom * ty);
        }
    }
    out
}

/// [`upsample`] thresholded at 0.5.
pub fn soft_to_mask(soft: &[f32], width: usize, height: usize) -> BinaryMask {
    let p = upsample(soft, width, height);
    BinaryMask::from_fn(width, height, |x, y| p[y * width + x] >= 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dot(a: &Descriptor, b: &Descriptor) -> f32 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn uniform_frame_has_equal_appearance() {
        let g = extract_features(&Frame::filled(1, 17, 9, [90, 90, 90]).unwrap());
        assert_eq!((g.gw, g.gh), (5, 3));
        for k in &g.keys {
            assert_eq!(k[..APPEARANCE_DIM], g.keys[0][..APPEARANCE_DIM]);
        }
        assert_ne!(g.keys[0][8..], g.keys[g.len() - 1][8..]);
    }

    #[test]
    fn deterministic() {
        let mut px = vec![0u8; 20 * 20 * 3];
        for (i, p) in px.iter_mut().enumerate() {
            *p = (i * 37 % 251) as u8;
        }
        let f = Frame::new(1, 20, 20, px).unwrap();
        assert_eq!(extract_features(&f), extract_features(&f.clone()));
    }

    #[test]
    fn red_cell_is_nearest_to_red_query() {
        let (w, h) = (32, 32);
        let mut px = vec![0u8; w * h * 3];
        for y in 8..12 {
            for x in 12..16 {
                px[(y * w + x) * 3] = 255;
            }
        }
        let g = extract_features(&Frame::new(1, w, h, px).unwrap());
        let q = extract_features(&Frame::filled(1, 4, 4, [255, 0, 0]).unwrap()).keys[0];
        let best = (0..g.len())
            .max_by(|&a, &b| dot(&q, &g.keys[a]).total_cmp(&dot(&q, &g.keys[b])))
            .unwrap();
        assert_eq!((best % g.gw, best / g.gw), (3, 2));
    }

    #[test]
    fn soft_to_mask_extremes() {
        assert_eq!(soft_to_mask(&[1.0; 16], 16, 16), BinaryMask::full(16, 16));
        assert_eq!(soft_to_mask(&[0.0; 16], 16, 16), BinaryMask::empty(16, 16));
    }

    #[test]
    fn soft_to_mask_step_splits_near_cell_boundary() {
        // Left two cell columns foreground, right two background.
        let soft: Vec<f32> = (0..16).map(|i| if i % 4 < 2 { 1.0 } else { 0.0 }).collect();
        let m = soft_to_mask(&soft, 16, 16);
        // Brute-force bilinear value along one row.
        let value = |x: usize| {
            let u = ((x as f32 + 0.5) / 4.0 - 0.5).clamp(0.0, 3.0);
            let i0 = u.floor() as usize;
            let t = u - i0 as f32;
            let s = |i: usize| if i.min(3) < 2 { 1.0 } else { 0.0 };
            s(i0) * (1.0 - t) + s(i0 + 1) * t
        };
        for y in 0..16 {
            for x in 0..16 {
                assert_eq!(m.get(x, y), value(x) >= 0.5);
            }
        }
        let last_fg = (0..16).filter(|&x| m.get(x, 0)).max().unwrap();
        assert!((last_fg as i64 - 7).abs() <= STRIDE as i64);
        assert_eq!(last_fg, 7);
    }

    #[test]
    fn cell_fraction_counts_partial_cells() {
        let m = BinaryMask::from_fn(6, 4, |x, _| x >= 4);
        assert_eq!(cell_fractions(&m), vec![0.0, 1.0]);
        let m = BinaryMask::from_fn(4, 4, |x, y| x < 2 && y < 2);
        assert_eq!(cell_fractions(&m), vec![0.25]);
    }
}
