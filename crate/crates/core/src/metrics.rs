//! Region similarity J, boundary F-measure F, and their mean.
//!
//! Conventions: a frame where both masks are empty scores J = F = 1, a frame
//! where exactly one is empty scores 0. Boundary pixels are foreground pixels
//! with a 4-neighbor in the background (the image border counts as
//! background), matched within `max(1, round(0.008 * diagonal))` pixels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::types::MaskSequence;

fn check_dims(pred: &BinaryMask, gt: &BinaryMask) -> Result<()> {
    pred.ensure_dims(gt.width(), gt.height())
}

pub fn region_j(pred: &BinaryMask, gt: &BinaryMask) -> Result<f64> {
    check_dims(pred, gt)?;
    let union = pred.union_count(gt);
    if union == 0 {
        return Ok(1.0);
    }
    Ok(pred.intersection_count(gt) as f64 / union as f64)
}

pub fn boundary_tolerance(width: usize, height: usize) -> usize {
    let diag = ((width * width + height * height) as f64).sqrt();
    ((0.008 * diag).round() as usize).max(1)
}

/// Pixels within Euclidean distance `r` of any set pixel.
fn dilate(mask: &BinaryMask, r: usize) -> BinaryMask {
    let (w, h) = mask.dims();
    let r = r as i64;
    let offsets: Vec<(i64, i64)> = (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
        .filter(|(dx, dy)| dx * dx + dy * dy <= r * r)
        .collect();
    let mut out = BinaryMask::empty(w, h);
    for (x, y) in mask.foreground() {
        for &(dx, dy) in &offsets {
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                out.set(nx as usize, ny as usize, true);
            }
        }
    }
    out
}

pub fn contour_f(pred: &BinaryMask, gt: &BinaryMask) -> Result<f64> {
    check_dims(pred, gt)?;
    match (pred.is_empty(), gt.is_empty()) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        _ => {}
    }
    let r = boundary_tolerance(pred.width(), pred.height());
    let pb = pred.boundary();
    let gb = gt.boundary();
    let precision = pb.intersection_count(&dilate(&gb, r)) as f64 / pb.count() as f64;
    let recall = gb.intersection_count(&dilate(&pb, r)) as f64 / gb.count() as f64;
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "JF")]
    pub jf: f64,
}

impl Scores {
    pub fn new(j: f64, f: f64) -> Self {
        Self {
            j,
            f,
            jf: (j + f) / 2.0,
        }
    }
}

/// Per-frame J and F for a sequence.
pub fn frame_scores(pred: &MaskSequence, gt: &MaskSequence) -> Result<Vec<(f64, f64)>> {
    if pred.len() != gt.len() {
        return Err(Error::LengthMismatch {
            expected: gt.len(),
            actual: pred.len(),
        });
    }
    pred.masks()
        .par_iter()
        .zip(gt.masks())
        .map(|(p, g)| Ok((region_j(p, g)?, contour_f(p, g)?)))
        .collect()
}

/// Frame-averaged J and F, and their mean.
pub fn evaluate_sequence(pred: &MaskSequence, gt: &MaskSequence) -> Result<Scores> {
    let per_frame = frame_scores(pred, gt)?;
    if per_frame.is_empty() {
        return Err(Error::invalid("sequence", "no frames to evaluate"));
    }
    let n = per_frame.len() as f64;
    let j = per_frame.iter().map(|s| s.0).sum::<f64>() / n;
    let f = per_frame.iter().map(|s| s.1).sum::<f64>() / n;
    Ok(Scores::new(j, f))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceScore {
    pub name: String,
    #[serde(flatten)]
    pub scores: Scores,
}

/// `{"sequences":[{"name":..,"J":..,"F":..,"JF":..}],"mean":{"J":..,"F":..,"JF":..}}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub sequences: Vec<SequenceScore>,
    pub mean: Scores,
}

impl EvalReport {
    pub fn new(sequences: Vec<SequenceScore>) -> Self {
        let n = sequences.len().max(1) as f64;
        let j = sequences.iter().map(|s| s.scores.j).sum::<f64>() / n;
        let f = sequences.iter().map(|s| s.scores.f).sum::<f64>() / n;
        Self {
            sequences,
            mean: Scores::new(j, f),
        }
    }
}
