//! Quality metrics and correlation statistics.

mod correlation;
mod lsd;
pub mod nodes;
mod sdtw;
mod warpq;

use thiserror::Error;

use crate::dsp::DspError;

pub use correlation::{average_ranks, pearson, spearman};
pub use lsd::{lsd_score, LsdParams};
pub use sdtw::{sdtw_cost, W_DIAG, W_HORZ, W_VERT};
pub use warpq::{patch_starts, score_features, warpq_score, Aggregation, PatchParams, WarpqParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("feature dimension mismatch: reference has {reference}, patch has {patch}")]
    DimensionMismatch { reference: usize, patch: usize },
    #[error("patch of {patch} frames is longer than the reference ({reference} frames)")]
    PatchLongerThanReference { patch: usize, reference: usize },
    #[error("patch needs at least 2 frames, got {0}")]
    PatchTooShort(usize),
    #[error("no voiced frames in the {0} signal")]
    NoVoicedFrames(String),
    #[error("too few frames after VAD (reference {reference}, degraded {degraded})")]
    TooShortAfterVad { reference: usize, degraded: usize },
    #[error("sample rates differ: {reference} Hz vs {degraded} Hz")]
    RateMismatch { reference: u32, degraded: u32 },
    #[error("length mismatch: {x} vs {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("correlation of a constant sequence is undefined")]
    ConstantInput,
    #[error(transparent)]
    Dsp(#[from] DspError),
}

impl MetricError {
    pub fn kind(&self) -> &'static str {
        match self {
            MetricError::DimensionMismatch { .. } => "DimensionMismatch",
            MetricError::PatchLongerThanReference { .. } => "PatchLongerThanReference",
            MetricError::PatchTooShort(_) => "PatchTooShort",
            MetricError::NoVoicedFrames(_) => "NoVoicedFrames",
            MetricError::TooShortAfterVad { .. } => "TooShortAfterVad",
            MetricError::RateMismatch { .. } => "RateMismatch",
            MetricError::LengthMismatch { .. } => "LengthMismatch",
            MetricError::TooFewPoints(_) => "TooFewPoints",
            MetricError::ConstantInput => "ConstantInput",
            MetricError::Dsp(e) => e.kind(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchScore {
    pub patch_index: usize,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricResult {
    pub metric_name: String,
    pub score: f64,
    pub per_patch: Option<Vec<PatchScore>>,
}
