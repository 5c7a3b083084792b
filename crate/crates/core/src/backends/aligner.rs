//! Histogram/shape aligner.
//!
//! Image side: a 5x5x5 RGB histogram of the masked pixels (mass-normalized,
//! 125 dims) followed by three shape terms of the masked region: bounding-box
//! fill ratio, width/height aspect clamped to `[0, 4]` and divided by 4, and
//! the isoperimetric quotient `4*pi*area / perimeter^2` clamped to `[0, 1]`
//! with the perimeter counted as boundary pixels. Nothing depends on absolute
//! position, so the embedding is translation invariant.
//!
//! Text side: the image embedding of an ideal prototype, a solid canonical
//! shape on a 64x64 canvas. `any` averages the three shape prototypes.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::backends::{Embedding, Expression};
use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::shape::{rasterize, Color, Shape};
use crate::types::Frame;

pub const HISTOGRAM_BINS: usize = 5;
pub const EMBED_DIM: usize = HISTOGRAM_BINS * HISTOGRAM_BINS * HISTOGRAM_BINS + 3;

const PROTOTYPE_CANVAS: usize = 64;
const PROTOTYPE_BACKGROUND: [u8; 3] = [32, 32, 32];

#[inline]
fn bin(v: u8) -> usize {
    v as usize * HISTOGRAM_BINS / 256
}

pub fn histogram_embed_masked(frame: &Frame, mask: &BinaryMask) -> Result<Embedding> {
    mask.ensure_dims(frame.width(), frame.height())?;
    let Some((x0, y0, x1, y1)) = mask.bbox() else {
        return Err(Error::EmptyMask);
    };
    let mut values = vec![0.0; EMBED_DIM];
    let mut area = 0usize;
    for (x, y) in mask.foreground() {
        let [r, g, b] = frame.rgb(x, y);
        values[(bin(r) * HISTOGRAM_BINS + bin(g)) * HISTOGRAM_BINS + bin(b)] += 1.0;
        area += 1;
    }
    let area_f = area as f64;
    for v in &mut values[..EMBED_DIM - 3] {
        *v /= area_f;
    }

    let bw = (x1 - x0 + 1) as f64;
    let bh = (y1 - y0 + 1) as f64;
    let perimeter = mask.boundary().count() as f64;
    values[EMBED_DIM - 3] = area_f / (bw * bh);
    values[EMBED_DIM - 2] = (bw / bh).clamp(0.0, 4.0) / 4.0;
    values[EMBED_DIM - 1] = (4.0 * PI * area_f / (perimeter * perimeter)).clamp(0.0, 1.0);
    Ok(Embedding(values))
}

fn prototype_size(shape: Shape) -> f64 {
    match shape {
        Shape::Circle => 24.0,
        Shape::Square => 20.0,
        Shape::Triangle => 26.0,
    }
}

/// Solid `color` `shape` centered on the prototype canvas, and its mask.
pub fn prototype(color: Color, shape: Shape) -> (Frame, BinaryMask) {
    let n = PROTOTYPE_CANVAS;
    let c = (n as f64 - 1.0) / 2.0;
    let mut mask = BinaryMask::empty(n, n);
    rasterize(shape, c, c, prototype_size(shape), n, n, |x, y| {
        mask.set(x, y, true)
    });
    let rgb = color.rgb();
    let mut pixels = Vec::with_capacity(n * n * 3);
    for &fg in mask.bits() {
        pixels.extend_from_slice(if fg { &rgb } else { &PROTOTYPE_BACKGROUND });
    }
    let frame = Frame::new(1, n, n, pixels).expect("prototype canvas is well formed");
    (frame, mask)
}

fn prototypes() -> &'static HashMap<(Color, Option<Shape>), Embedding> {
    static CACHE: OnceLock<HashMap<(Color, Option<Shape>), Embedding>> = OnceLock::new();
    CACHE.get_or_init(|| {
        let mut map = HashMap::new();
        for color in Color::ALL {
            let mut sum = vec![0.0; EMBED_DIM];
            for shape in Shape::ALL {
                let (frame, mask) = prototype(color, shape);
                let e = histogram_embed_masked(&frame, &mask).expect("prototype mask is non-empty");
                for (s, v) in sum.iter_mut().zip(e.values()) {
                    *s += v;
                }
                map.insert((color, Some(shape)), e);
            }
            let k = Shape::ALL.len() as f64;
            map.insert(
                (color, None),
                Embedding(sum.into_iter().map(|v| v / k).collect()),
            );
        }
        map
    })
}

pub fn text_embed(text: &str) -> Result<Embedding> {
    let expr = Expression::parse(text)?;
    Ok(prototypes()[&(expr.color, expr.shape)].clone())
}
