//! Color-threshold referring segmenter for the synthetic grammar.
//!
//! Pixels within Euclidean RGB distance [`COLOR_TOLERANCE`] of the named
//! color are matched; the largest 4-connected component of matched pixels
//! (earliest scan-order start on ties) is the mask. Confidence is
//!
//! ```text
//! |kept| / (|lattice points in hull(kept)| + |matched \ kept|)
//! ```
//!
//! which is 1 exactly when the kept region is digitally convex and no other
//! matched pixel exists, and drops with notches, holes, or competing regions
//! of the same color.

use crate::backends::{Expression, SegmentationResult};
use crate::error::Result;
use crate::mask::BinaryMask;
use crate::types::Frame;

pub const COLOR_TOLERANCE: f64 = 60.0;

pub fn color_segment(frame: &Frame, text: &str) -> Result<SegmentationResult> {
    let expr = Expression::parse(text)?;
    let (w, h) = frame.dims();
    let target = expr.color.rgb();
    let tol2 = (COLOR_TOLERANCE * COLOR_TOLERANCE) as i32;
    let matched = BinaryMask::from_fn(w, h, |x, y| {
        let p = frame.rgb(x, y);
        let d2: i32 = (0..3)
            .map(|c| {
                let d = p[c] as i32 - target[c] as i32;
                d * d
            })
            .sum();
        d2 <= tol2
    });

    let Some(kept) = largest_component(&matched) else {
        return Ok(SegmentationResult {
            mask: BinaryMask::empty(w, h),
            confidence: 0.0,
        });
    };
    let kept_count = kept.count();
    let stray = matched.count() - kept_count;
    let confidence = kept_count as f64 / (hull_lattice_count(&kept) + stray) as f64;
    Ok(SegmentationResult {
        mask: kept,
        confidence,
    })
}

/// Largest 4-connected foreground component; ties go to the component whose
/// first pixel comes earliest in scan order.
pub fn largest_component(mask: &BinaryMask) -> Option<BinaryMask> {
    let (w, h) = mask.dims();
    let mut label = vec![0u32; w * h];
    let mut best: Option<(u32, usize)> = None;
    let mut next = 1u32;
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !mask.bits()[start] || label[start] != 0 {
            continue;
        }
        let id = next;
        next += 1;
        label[start] = id;
        stack.push(start);
        let mut size = 0;
        while let Some(i) = stack.pop() {
            size += 1;
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if mask.bits()[j] && label[j] == 0 {
                    label[j] = id;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        if best.is_none_or(|(_, n)| size > n) {
            best = Some((id, size));
        }
    }
    let (id, _) = best?;
    Some(BinaryMask::from_fn(w, h, |x, y| label[y * w + x] == id))
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull of lattice points (monotone chain, collinear points dropped).
fn convex_hull(mut pts: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(pts.len() * 2);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Number of pixel centers inside the convex hull of the mask's pixels.
pub fn hull_lattice_count(mask: &BinaryMask) -> usize {
    let (w, h) = mask.dims();
    let mut extremes = Vec::new();
    let (mut x0, mut x1, mut y0, mut y1) = (usize::MAX, 0, usize::MAX, 0);
    for y in 0..h {
        let row = &mask.bits()[y * w..(y + 1) * w];
        let (Some(l), Some(r)) = (row.iter().position(|&b| b), row.iter().rposition(|&b| b)) else {
            continue;
        };
        extremes.push((l as i64, y as i64));
        extremes.push((r as i64, y as i64));
        x0 = x0.min(l);
        x1 = x1.max(r);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if extremes.is_empty() {
        return 0;
    }
    let hull = convex_hull(extremes);
    let n = hull.len();
    let mut count = 0;
    for y in y0..=y1 {
        for x in x0..=x1 {
            let p = (x as i64, y as i64);
            let inside = match n {
                1 => true,
                _ => (0..n).all(|i| cross(hull[i], hull[(i + 1) % n], p) >= 0),
            };
            if inside {
                count += 1;
            }
        }
    }
    count
}
