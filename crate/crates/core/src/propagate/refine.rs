//! Pixel-level boundary refinement.
//!
//! The readout works on a stride-4 grid, so the upsampled soft mask is only
//! accurate away from object boundaries. Pixels in the uncertain band
//! `BAND_LO < p < BAND_HI` are instead decided by a color table built from
//! the key frame around the key mask: a pixel whose quantized color was seen
//! there takes that color's majority label. Unseen colors, and everything
//! outside the band, fall back to `p >= 0.5`.

use crate::mask::BinaryMask;
use crate::types::Frame;

use super::features::{grid_dims, upsample, STRIDE};

pub const BAND_LO: f32 = 0.1;
pub const BAND_HI: f32 = 0.9;
/// Quantization levels per channel.
pub const LEVELS: usize = 16;
/// Context around the key mask used to build the table, in grid cells.
pub const CONTEXT_CELLS: usize = 2;

fn bucket(p: [u8; 3]) -> usize {
    let q = |v: u8| v as usize * LEVELS / 256;
    (q(p[0]) * LEVELS + q(p[1])) * LEVELS + q(p[2])
}

#[derive(Debug, Clone)]
pub struct ColorTable {
    /// Per bucket `(foreground, total)` pixel counts.
    counts: Vec<(u32, u32)>,
}

impl ColorTable {
    /// Counts key-frame pixels in cells within [`CONTEXT_CELLS`] of any
    /// foreground cell.
    pub fn from_key(frame: &Frame, mask: &BinaryMask) -> Self {
        let (w, h) = frame.dims();
        let (gw, gh) = grid_dims(w, h);
        let mut fg_cell = vec![false; gw * gh];
        for (x, y) in mask.foreground() {
            fg_cell[(y / STRIDE) * gw + x / STRIDE] = true;
        }
        let c = CONTEXT_CELLS;
        let mut near = vec![false; gw * gh];
        for cy in 0..gh {
            for cx in 0..gw {
                if fg_cell[cy * gw + cx] {
                    for ny in cy.saturating_sub(c)..(cy + c + 1).min(gh) {
                        for nx in cx.saturating_sub(c)..(cx + c + 1).min(gw) {
                            near[ny * gw + nx] = true;
                        }
                    }
                }
            }
        }
        let mut counts = vec![(0u32, 0u32); LEVELS * LEVELS * LEVELS];
        for y in 0..h {
            for x in 0..w {
                if near[(y / STRIDE) * gw + x / STRIDE] {
                    let e = &mut counts[bucket(frame.rgb(x, y))];
                    e.0 += mask.get(x, y) as u32;
                    e.1 += 1;
                }
            }
        }
        Self { counts }
    }

    /// Majority label of the pixel's color, if the color was seen.
    pub fn label(&self, rgb: [u8; 3]) -> Option<bool> {
        let (fg, total) = self.counts[bucket(rgb)];
        (total > 0).then_some(2 * fg >= total)
    }
}

/// Binary mask from the grid soft labels, refined in the boundary band.
pub fn decode_mask(soft: &[f32], frame: &Frame, table: &ColorTable) -> BinaryMask {
    let (w, h) = frame.dims();
    let p = upsample(soft, w, h);
    BinaryMask::from_fn(w, h, |x, y| {
        let v = p[y * w + x];
        if v > BAND_LO && v < BAND_HI {
            if let Some(label) = table.label(frame.rgb(x, y)) {
                return label;
            }
        }
        v >= 0.5
    })
}
