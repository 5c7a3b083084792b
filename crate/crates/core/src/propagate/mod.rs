//! Bidirectional mask propagation from the key frame.
//!
//! The video is split at the key frame into a forward clip `k..=T` and a
//! backward clip `k..=1`. Each clip is tracked independently with its own
//! memory bank seeded from the key frame and its mask; the key frame keeps
//! the key mask unchanged.

pub mod features;
pub mod memory;
pub mod refine;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::types::{Frame, MaskSequence, PipelineConfig, VideoSequence};

pub use features::{cell_fractions, extract_features, soft_to_mask, upsample, FeatureGrid};
pub use memory::{memory_read, memory_write, MemoryBank};
pub use refine::{decode_mask, ColorTable};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClipPair {
    pub forward: Vec<usize>,
    pub backward: Vec<usize>,
}

pub fn split_sequence(num_frames: usize, k: usize) -> Result<ClipPair> {
    if k == 0 || k > num_frames {
        return Err(Error::KeyFrameOutOfRange { k, len: num_frames });
    }
    Ok(ClipPair {
        forward: (k..=num_frames).collect(),
        backward: (1..=k).rev().collect(),
    })
}

/// Readout statistics for one tracked frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepStats {
    pub frame: usize,
    pub step: usize,
    pub mean_soft: f32,
    pub written: bool,
    pub working: usize,
    pub long_term: usize,
}

/// Tracks one clip frame by frame.
#[derive(Debug, Clone)]
pub struct Tracker {
    bank: MemoryBank,
    table: ColorTable,
    width: usize,
    height: usize,
    interval: usize,
    step: usize,
}

impl Tracker {
    pub fn new(key_frame: &Frame, key_mask: &BinaryMask, config: &PipelineConfig) -> Result<Self> {
        key_mask.ensure_dims(key_frame.width(), key_frame.height())?;
        config.validate()?;
        let reference = extract_features(key_frame).with_labels(cell_fractions(key_mask));
        Ok(Self {
            bank: MemoryBank::new(reference, config.long_term_enabled),
            table: ColorTable::from_key(key_frame, key_mask),
            width: key_frame.width(),
            height: key_frame.height(),
            interval: config.memory_interval,
            step: 0,
        })
    }

    pub fn bank(&self) -> &MemoryBank {
        &self.bank
    }

    /// Predicts the mask of the next clip frame and updates memory.
    pub fn step(&mut self, frame: &Frame) -> Result<(BinaryMask, StepStats)> {
        if frame.dims() != (self.width, self.height) {
            return Err(Error::DimensionMismatch {
                expected: (self.width, self.height),
                actual: frame.dims(),
            });
        }
        self.step += 1;
        let features = extract_features(frame);
        let soft = memory_read(&features, &self.bank);
        let mask = decode_mask(&soft, frame, &self.table);
        let entry = features.with_labels(cell_fractions(&mask));
        let written = memory_write(&mut self.bank, entry, self.step, self.interval);
        let stats = StepStats {
            frame: frame.index(),
            step: self.step,
            mean_soft: soft.iter().sum::<f32>() / soft.len() as f32,
            written,
            working: self.bank.working_len(),
            long_term: self.bank.long_term_len(),
        };
        Ok((mask, stats))
    }
}

/// Tracks `frames` (clip order, key frame first) from `key_mask`.
pub fn track_clip(
    frames: &[&Frame],
    key_mask: &BinaryMask,
    config: &PipelineConfig,
) -> Result<Vec<BinaryMask>> {
    Ok(track_clip_traced(frames, key_mask, config)?.0)
}

pub fn track_clip_traced(
    frames: &[&Frame],
    key_mask: &BinaryMask,
    config: &PipelineConfig,
) -> Result<(Vec<BinaryMask>, Vec<StepStats>)> {
    let Some((first, rest)) = frames.split_first() else {
        return Ok((Vec::new(), Vec::new()));
    };
    let mut tracker = Tracker::new(first, key_mask, config)?;
    let mut masks = Vec::with_capacity(frames.len());
    let mut stats = Vec::with_capacity(rest.len());
    masks.push(key_mask.clone());
    for frame in rest {
        let (mask, s) = tracker.step(frame)?;
        masks.push(mask);
        stats.push(s);
    }
    Ok((masks, stats))
}

pub fn propagate(
    video: &VideoSequence,
    k: usize,
    key_mask: &BinaryMask,
    config: &PipelineConfig,
) -> Result<MaskSequence> {
    Ok(propagate_traced(video, k, key_mask, config)?.0)
}

/// Like [`propagate`], also returning per-frame readout statistics for both
/// clips (forward first).
pub fn propagate_traced(
    video: &VideoSequence,
    k: usize,
    key_mask: &BinaryMask,
    config: &PipelineConfig,
) -> Result<(MaskSequence, Vec<StepStats>)> {
    let clips = split_sequence(video.len(), k)?;
    key_mask.ensure_dims(video.width(), video.height())?;
    let clip_frames = |idx: &[usize]| -> Vec<&Frame> {
        idx.iter()
            .map(|&i| video.frame(i).expect("clip index within 1..=T"))
            .collect()
    };
    let forward = clip_frames(&clips.forward);
    let backward = clip_frames(&clips.backward);
    let (fw, bw) = rayon::join(
        || track_clip_traced(&forward, key_mask, config),
        || track_clip_traced(&backward, key_mask, config),
    );
    let (fw_masks, fw_stats) = fw?;
    let (bw_masks, bw_stats) = bw?;

    let mut slots: Vec<Option<BinaryMask>> = vec![None; video.len()];
    for (&i, m) in clips.forward.iter().zip(fw_masks) {
        slots[i - 1] = Some(m);
    }
    // The backward clip's first mask is the key mask, already placed.
    for (&i, m) in clips.backward.iter().zip(bw_masks).skip(1) {
        slots[i - 1] = Some(m);
    }
    let masks = slots
        .into_iter()
        .map(|m| m.expect("clips cover every frame"))
        .collect();
    let mut stats = fw_stats;
    stats.extend(bw_stats);
    Ok((MaskSequence::new(masks)?, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_examples() {
        let c = split_sequence(10, 4).unwrap();
        assert_eq!(c.forward, (4..=10).collect::<Vec<_>>());
        assert_eq!(c.backward, vec![4, 3, 2, 1]);
        let c = split_sequence(10, 1).unwrap();
        assert_eq!(c.backward, vec![1]);
        assert_eq!(c.forward.len(), 10);
        let c = split_sequence(10, 10).unwrap();
        assert_eq!(c.forward, vec![10]);
        assert_eq!(c.backward, (1..=10).rev().collect::<Vec<_>>());
        assert!(matches!(
            split_sequence(10, 0),
            Err(Error::KeyFrameOutOfRange { .. })
        ));
        assert!(matches!(
            split_sequence(10, 11),
            Err(Error::KeyFrameOutOfRange { .. })
        ));
    }

    #[test]
    fn single_frame_returns_key_mask() {
        let f = Frame::filled(1, 8, 8, [10, 20, 30]).unwrap();
        let video = VideoSequence::new(vec![f], "the red circle").unwrap();
        let mask = BinaryMask::from_fn(8, 8, |x, y| x < 3 && y > 4);
        let out = propagate(&video, 1, &mask, &PipelineConfig::default()).unwrap();
        assert_eq!(out.masks(), &[mask]);
    }

    #[test]
    fn empty_reference_stays_empty() {
        let frames: Vec<Frame> = (1..=6)
            .map(|i| Frame::filled(i, 16, 16, [(i * 30) as u8, 0, 0]).unwrap())
            .collect();
        let refs: Vec<&Frame> = frames.iter().collect();
        let masks = track_clip(
            &refs,
            &BinaryMask::empty(16, 16),
            &PipelineConfig::default(),
        )
        .unwrap();
        assert!(masks.iter().all(BinaryMask::is_empty));
    }

    #[test]
    fn rejects_mismatched_key_mask() {
        let f = Frame::filled(1, 8, 8, [0; 3]).unwrap();
        let video = VideoSequence::new(vec![f], "x").unwrap();
        assert!(matches!(
            propagate(
                &video,
                1,
                &BinaryMask::empty(4, 4),
                &PipelineConfig::default()
            ),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
