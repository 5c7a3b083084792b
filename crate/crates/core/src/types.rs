use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::BinaryMask;

/// One RGB video frame. `index` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    index: usize,
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Frame {
    pub fn new(index: usize, width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if index == 0 {
            return Err(Error::invalid("frame", "index is 1-based"));
        }
        if width == 0 || height == 0 {
            return Err(Error::invalid("frame", "width and height must be >= 1"));
        }
        if pixels.len() != width * height * 3 {
            return Err(Error::invalid(
                "frame",
                format!(
                    "{} bytes for a {width}x{height} RGB buffer (expected {})",
                    pixels.len(),
                    width * height * 3
                ),
            ));
        }
        Ok(Self {
            index,
            width,
            height,
            pixels,
        })
    }

    /// Solid-color frame, mostly for tests.
    pub fn filled(index: usize, width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        let pixels = rgb
            .iter()
            .copied()
            .cycle()
            .take(width * height * 3)
            .collect();
        Self::new(index, width, height, pixels)
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn rgb(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn with_index(mut self, index: usize) -> Result<Self> {
        if index == 0 {
            return Err(Error::invalid("frame", "index is 1-based"));
        }
        self.index = index;
        Ok(self)
    }
}

/// Frames `1..=T` of equal size plus the referring expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoSequence {
    frames: Vec<Frame>,
    expression: String,
}

impl VideoSequence {
    pub fn new(frames: Vec<Frame>, expression: impl Into<String>) -> Result<Self> {
        let expression = expression.into();
        if expression.trim().is_empty() {
            return Err(Error::invalid("video", "expression is empty"));
        }
        let Some(first) = frames.first() else {
            return Err(Error::invalid("video", "no frames"));
        };
        let dims = first.dims();
        for (i, frame) in frames.iter().enumerate() {
            if frame.index() != i + 1 {
                return Err(Error::invalid(
                    "video",
                    format!("frame at position {} has index {}", i + 1, frame.index()),
                ));
            }
            if frame.dims() != dims {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    actual: frame.dims(),
                });
            }
        }
        Ok(Self { frames, expression })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    /// Frame by 1-based index.
    pub fn frame(&self, index: usize) -> Option<&Frame> {
        index.checked_sub(1).and_then(|i| self.frames.get(i))
    }

    pub fn expression(&self) -> &str {
        &self.expression
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn with_expression(mut self, expression: impl Into<String>) -> Result<Self> {
        let expression = expression.into();
        if expression.trim().is_empty() {
            return Err(Error::invalid("video", "expression is empty"));
        }
        self.expression = expression;
        Ok(self)
    }
}

/// A candidate mask with its confidence, raw alignment and combined score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredMask {
    pub frame_index: usize,
    pub mask: BinaryMask,
    pub confidence: f64,
    pub alignment: f64,
    pub score: f64,
}

/// One mask per frame, in frame order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskSequence {
    masks: Vec<BinaryMask>,
}

impl MaskSequence {
    pub fn new(masks: Vec<BinaryMask>) -> Result<Self> {
        if let Some(first) = masks.first() {
            let dims = first.dims();
            for m in &masks {
                m.ensure_dims(dims.0, dims.1)?;
            }
        }
        Ok(Self { masks })
    }

    pub fn empty(len: usize, width: usize, height: usize) -> Self {
        Self {
            masks: vec![BinaryMask::empty(width, height); len],
        }
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn masks(&self) -> &[BinaryMask] {
        &self.masks
    }

    /// Mask by 1-based frame index.
    pub fn get(&self, index: usize) -> Option<&BinaryMask> {
        index.checked_sub(1).and_then(|i| self.masks.get(i))
    }

    pub fn into_masks(self) -> Vec<BinaryMask> {
        self.masks
    }
}

pub const DEFAULT_NUM_CANDIDATES: usize = 5;
pub const DEFAULT_WEIGHT: f64 = 0.5;
pub const DEFAULT_MEMORY_INTERVAL: usize = 3;
pub const DEFAULT_BACKEND: &str = "builtin:color";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub num_candidates: usize,
    pub w1: f64,
    pub w2: f64,
    pub memory_interval: usize,
    pub long_term_enabled: bool,
    pub backend: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            num_candidates: DEFAULT_NUM_CANDIDATES,
            w1: DEFAULT_WEIGHT,
            w2: DEFAULT_WEIGHT,
            memory_interval: DEFAULT_MEMORY_INTERVAL,
            long_term_enabled: false,
            backend: DEFAULT_BACKEND.to_string(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_candidates == 0 {
            return Err(Error::invalid("config", "num_candidates must be >= 1"));
        }
        if !(self.w1.is_finite() && self.w2.is_finite()) || self.w1 < 0.0 || self.w2 < 0.0 {
            return Err(Error::invalid("config", "weights must be finite and >= 0"));
        }
        if self.w1 + self.w2 <= 0.0 {
            return Err(Error::invalid("config", "w1 + w2 must be > 0"));
        }
        if self.memory_interval == 0 {
            return Err(Error::invalid("config", "memory_interval must be >= 1"));
        }
        Ok(())
    }

    pub fn with_weights(mut self, w1: f64, w2: f64) -> Self {
        self.w1 = w1;
        self.w2 = w2;
        self
    }
}
