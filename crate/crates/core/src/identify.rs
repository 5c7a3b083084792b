//! Key-frame identification.
//!
//! N frames are sampled uniformly (always including the first and last),
//! each is segmented, and each mask is scored by
//! `w1 * confidence + w2 * clamp(alignment, 0, 1)` where the alignment is the
//! cosine similarity of the masked-region and expression embeddings. The
//! best-scoring candidate with a non-empty mask becomes the key frame.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backends::{Aligner, Embedding, Segmenter};
use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::types::{PipelineConfig, ScoredMask, VideoSequence};

/// Candidate frame indices for a video of `num_frames` frames.
///
/// For `n >= 2` this is `floor((i - 1) * (T - 1) / (n - 1)) + 1` for
/// `i = 1..=n` with duplicates dropped; `n == 1` gives the middle frame.
pub fn sample_candidates(num_frames: usize, n: usize) -> Vec<usize> {
    assert!(
        num_frames >= 1 && n >= 1,
        "frame and candidate counts are >= 1"
    );
    if n == 1 {
        return vec![num_frames.div_ceil(2)];
    }
    let mut out: Vec<usize> = Vec::with_capacity(n.min(num_frames));
    for i in 1..=n {
        let j = (i - 1) * (num_frames - 1) / (n - 1) + 1;
        if out.last() != Some(&j) {
            out.push(j);
        }
    }
    out
}

/// Cosine similarity of two embeddings, in `[-1, 1]`.
pub fn alignment_score(image: &Embedding, text: &Embedding) -> Result<f64> {
    if image.dim() != text.dim() {
        return Err(Error::DimensionMismatch {
            expected: (text.dim(), 1),
            actual: (image.dim(), 1),
        });
    }
    let (nu, nv) = (image.norm(), text.norm());
    if nu == 0.0 || nv == 0.0 || !nu.is_finite() || !nv.is_finite() {
        return Err(Error::ZeroNormEmbedding);
    }
    let dot: f64 = image
        .values()
        .iter()
        .zip(text.values())
        .map(|(a, b)| (a / nu) * (b / nv))
        .sum();
    Ok(dot.clamp(-1.0, 1.0))
}

/// Combined mask score. Negative alignment contributes nothing.
pub fn mask_score(confidence: f64, alignment: f64, w1: f64, w2: f64) -> f64 {
    w1 * confidence + w2 * alignment.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub indices: Vec<usize>,
    pub scored: Vec<ScoredMask>,
}

/// Per-candidate record, serialized as
/// `{"frame":j,"confidence":..,"alignment":..,"score":..,"empty":..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub frame: usize,
    pub confidence: f64,
    pub alignment: f64,
    pub score: f64,
    pub empty: bool,
}

impl From<&ScoredMask> for CandidateRecord {
    fn from(s: &ScoredMask) -> Self {
        Self {
            frame: s.frame_index,
            confidence: s.confidence,
            alignment: s.alignment,
            score: s.score,
            empty: s.mask.is_empty(),
        }
    }
}

impl CandidateSet {
    pub fn records(&self) -> Vec<CandidateRecord> {
        self.scored.iter().map(CandidateRecord::from).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationResult {
    pub key_frame: usize,
    pub key_mask: BinaryMask,
    pub diagnostics: Vec<CandidateRecord>,
}

/// JSON view of an identification: `{"key_frame":k,"candidates":[...]}`.
/// `key_frame` is null when every candidate mask was empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentificationReport {
    pub key_frame: Option<usize>,
    pub candidates: Vec<CandidateRecord>,
}

impl IdentificationResult {
    pub fn report(&self) -> IdentificationReport {
        IdentificationReport {
            key_frame: Some(self.key_frame),
            candidates: self.diagnostics.clone(),
        }
    }
}

/// Argmax of the score, lowest frame index on ties, skipping empty masks.
pub fn select_key_frame(candidates: &CandidateSet) -> Result<IdentificationResult> {
    let mut order: Vec<&ScoredMask> = candidates.scored.iter().collect();
    order.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.frame_index.cmp(&b.frame_index))
    });
    let winner = order
        .into_iter()
        .find(|s| !s.mask.is_empty())
        .ok_or(Error::AllCandidatesEmpty)?;
    Ok(IdentificationResult {
        key_frame: winner.frame_index,
        key_mask: winner.mask.clone(),
        diagnostics: candidates.records(),
    })
}

/// Segments and scores every sampled candidate frame.
///
/// Candidates are evaluated in parallel; results come back in frame order.
/// Empty masks get alignment 0 without consulting the aligner.
pub fn score_candidates<S, A>(
    video: &VideoSequence,
    config: &PipelineConfig,
    segmenter: &S,
    aligner: &A,
) -> Result<CandidateSet>
where
    S: Segmenter + ?Sized,
    A: Aligner + ?Sized,
{
    config.validate()?;
    let indices = sample_candidates(video.len(), config.num_candidates);
    let text = aligner.embed_text(video.expression())?;
    let scored = indices
        .par_iter()
        .map(|&j| {
            let at = |source: Error| Error::AtFrame {
                frame: j,
                source: Box::new(source),
            };
            let frame = video.frame(j).expect("candidate index within 1..=T");
            let seg = segmenter.segment(frame, video.expression()).map_err(at)?;
            seg.validate(frame).map_err(at)?;
            let alignment = if seg.mask.is_empty() {
                0.0
            } else {
                let image = aligner.embed_masked_image(frame, &seg.mask).map_err(at)?;
                alignment_score(&image, &text).map_err(at)?
            };
            Ok(ScoredMask {
                frame_index: j,
                score: mask_score(seg.confidence, alignment, config.w1, config.w2),
                confidence: seg.confidence,
                alignment,
                mask: seg.mask,
            })
        })
        .collect::<Vec<Result<ScoredMask>>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(CandidateSet { indices, scored })
}

pub fn identify_target<S, A>(
    video: &VideoSequence,
    config: &PipelineConfig,
    segmenter: &S,
    aligner: &A,
) -> Result<IdentificationResult>
where
    S: Segmenter + ?Sized,
    A: Aligner + ?Sized,
{
    select_key_frame(&score_candidates(video, config, segmenter, aligner)?)
}
