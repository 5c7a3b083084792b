//! FindTrack: referring video object segmentation in two decoupled stages.
//!
//! [`identify`] samples candidate frames, segments each from the expression,
//! and picks the key frame by a weighted mix of segmentation confidence and
//! image-text alignment. [`propagate`] then tracks the key mask forward and
//! backward through the video with a memory-based tracker.

pub mod backends;
pub mod cli;
pub mod error;
pub mod identify;
pub mod io;
pub mod mask;
pub mod metrics;
pub mod propagate;
pub mod shape;
pub mod synthgen;
pub mod types;

pub use error::{Error, Result};
pub use identify::{identify_target, sample_candidates, IdentificationResult};
pub use mask::{BinaryMask, RleMask};
pub use metrics::{evaluate_sequence, EvalReport, Scores};
pub use propagate::propagate;
pub use types::{Frame, MaskSequence, PipelineConfig, VideoSequence};
