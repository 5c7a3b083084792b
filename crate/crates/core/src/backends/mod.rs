//! Segmentation and alignment backends.
//!
//! A [`Segmenter`] maps `(frame, expression)` to a mask with a confidence in
//! `[0, 1]` (its own estimate of the mask's IoU with the truth). An
//! [`Aligner`] embeds a masked image region and an expression into a common
//! space; their cosine similarity is the alignment score.
//!
//! Built in: a color-threshold segmenter and a histogram/shape aligner over
//! the `the <color> <shape>` grammar. Anything else is reached over the
//! newline-delimited JSON protocol in [`remote`].

pub mod aligner;
pub mod color;
pub mod expression;
pub mod remote;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::types::Frame;

pub use aligner::{histogram_embed_masked, text_embed, EMBED_DIM};
pub use color::color_segment;
pub use expression::Expression;
pub use remote::{RemoteSession, DEFAULT_TIMEOUT};

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationResult {
    pub mask: BinaryMask,
    pub confidence: f64,
}

impl SegmentationResult {
    /// Checks the result against the query frame.
    pub fn validate(&self, frame: &Frame) -> Result<()> {
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(Error::Protocol(format!(
                "confidence {} outside [0, 1]",
                self.confidence
            )));
        }
        self.mask
            .ensure_dims(frame.width(), frame.height())
            .map_err(|e| Error::Protocol(e.to_string()))
    }
}

/// Feature vector produced by an aligner. Not necessarily unit length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Embedding(pub Vec<f64>);

impl Embedding {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

pub trait Segmenter: Send + Sync {
    fn segment(&self, frame: &Frame, text: &str) -> Result<SegmentationResult>;
}

pub trait Aligner: Send + Sync {
    fn embed_masked_image(&self, frame: &Frame, mask: &BinaryMask) -> Result<Embedding>;
    fn embed_text(&self, text: &str) -> Result<Embedding>;
}

/// A backend providing both ports.
pub trait Backend: Segmenter + Aligner {
    /// Whether calls for different frames may run in parallel.
    fn concurrent(&self) -> bool {
        true
    }
}

/// The deterministic built-in backend (`builtin:color`).
#[derive(Debug, Clone, Copy, Default)]
pub struct BuiltinBackend;

impl Segmenter for BuiltinBackend {
    fn segment(&self, frame: &Frame, text: &str) -> Result<SegmentationResult> {
        color_segment(frame, text)
    }
}

impl Aligner for BuiltinBackend {
    fn embed_masked_image(&self, frame: &Frame, mask: &BinaryMask) -> Result<Embedding> {
        histogram_embed_masked(frame, mask)
    }

    fn embed_text(&self, text: &str) -> Result<Embedding> {
        text_embed(text)
    }
}

impl Backend for BuiltinBackend {}

/// Opens a backend from a selector: `builtin:color`, `stdio:<command>` or
/// `tcp:<host>:<port>`.
pub fn open_backend(selector: &str) -> Result<Box<dyn Backend>> {
    if selector == "builtin:color" || selector == "builtin" {
        return Ok(Box::new(BuiltinBackend));
    }
    if selector.starts_with("stdio:") || selector.starts_with("tcp:") {
        return Ok(Box::new(RemoteSession::connect(selector, DEFAULT_TIMEOUT)?));
    }
    Err(Error::invalid(
        "backend selector",
        format!("{selector:?} (expected builtin:color, stdio:<command> or tcp:<host>:<port>)"),
    ))
}
