//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use findtrack_core::BinaryMask;

pub fn oracle_j(a: &BinaryMask, b: &BinaryMask) -> f64 {
    let (mut inter, mut union) = (0usize, 0usize);
    for (x, y) in a.bits().iter().zip(b.bits()) {
        inter += (*x && *y) as usize;
        union += (*x || *y) as usize;
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Foreground pixels with a background 4-neighbor; outside the image is
/// background.
pub fn oracle_boundary(m: &BinaryMask) -> Vec<(i64, i64)> {
    let (w, h) = (m.width() as i64, m.height() as i64);
    let fg = |x: i64, y: i64| x >= 0 && y >= 0 && x < w && y < h && m.get(x as usize, y as usize);
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if fg(x, y) && (!fg(x - 1, y) || !fg(x + 1, y) || !fg(x, y - 1) || !fg(x, y + 1)) {
                out.push((x, y));
            }
        }
    }
    out
}

pub fn oracle_f(a: &BinaryMask, b: &BinaryMask) -> f64 {
    match (a.count() == 0, b.count() == 0) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let diag = ((a.width().pow(2) + a.height().pow(2)) as f64).sqrt();
    let r = ((0.008 * diag).round() as i64).max(1);
    let (ba, bb) = (oracle_boundary(a), oracle_boundary(b));
    let matched = |from: &[(i64, i64)], to: &[(i64, i64)]| {
        from.iter()
            .filter(|p| {
                to.iter()
                    .any(|q| (p.0 - q.0).pow(2) + (p.1 - q.1).pow(2) <= r * r)
            })
            .count() as f64
    };
    let precision = matched(&ba, &bb) / ba.len() as f64;
    let recall = matched(&bb, &ba) / bb.len() as f64;
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Deterministic random mask made of a few rectangles and noise pixels.
pub fn random_mask(seed: u64, w: usize, h: usize) -> BinaryMask {
    let mut g = findtrack_core::synthgen::Lcg::new(seed);
    let mut m = BinaryMask::empty(w, h);
    let rects = g.int(0, 3);
    for _ in 0..rects {
        let x0 = g.int(0, w as i64 - 1) as usize;
        let y0 = g.int(0, h as i64 - 1) as usize;
        let x1 = g.int(x0 as i64, w as i64 - 1) as usize;
        let y1 = g.int(y0 as i64, h as i64 - 1) as usize;
        for y in y0..=y1 {
            for x in x0..=x1 {
                m.set(x, y, true);
            }
        }
    }
    let flips = g.int(0, (w * h / 8) as i64);
    for _ in 0..flips {
        let x = g.int(0, w as i64 - 1) as usize;
        let y = g.int(0, h as i64 - 1) as usize;
        let v = m.get(x, y);
        m.set(x, y, !v);
    }
    m
}
