use super::{sdtw_cost, MetricError, MetricResult, PatchScore};
use crate::audio::Signal;
use crate::dsp::{cmvn, mfcc, vad_mask, FeatureConfig, FeatureMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    Median,
    Mean,
}

impl Aggregation {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "median" => Some(Aggregation::Median),
            "mean" => Some(Aggregation::Mean),
            _ => None,
        }
    }

    pub fn apply(self, costs: &[f64]) -> f64 {
        match self {
            Aggregation::Mean => costs.iter().sum::<f64>() / costs.len() as f64,
            Aggregation::Median => {
                let mut v = costs.to_vec();
                v.sort_by(f64::total_cmp);
                let mid = v.len() / 2;
                if v.len() % 2 == 1 {
                    v[mid]
                } else {
                    (v[mid - 1] + v[mid]) / 2.0
                }
            }
        }
    }
}

/// Patch geometry and aggregation for scoring one feature pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchParams {
    /// Patch length in seconds, converted to frames via the feature hop.
    pub patch_secs: f64,
    /// Overrides `patch_secs` when set.
    pub patch_frames: Option<usize>,
    /// Defaults to half the patch length.
    pub patch_hop: Option<usize>,
    pub aggregation: Aggregation,
}

impl Default for PatchParams {
    fn default() -> Self {
        Self {
            patch_secs: 0.4,
            patch_frames: None,
            patch_hop: None,
            aggregation: Aggregation::Median,
        }
    }
}

impl PatchParams {
    pub fn frames_for(&self, feats: &FeatureMatrix) -> usize {
        self.patch_frames.unwrap_or_else(|| {
            (self.patch_secs * feats.sample_rate() as f64 / feats.frame_hop() as f64).round() as usize
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarpqParams {
    pub features: FeatureConfig,
    pub vad_threshold_db: f64,
    pub patches: PatchParams,
}

impl Default for WarpqParams {
    fn default() -> Self {
        Self {
            features: FeatureConfig::default(),
            vad_threshold_db: -35.0,
            patches: PatchParams::default(),
        }
    }
}

/// Patch starts covering `n` frames with windows of `len` frames every `hop`.
pub fn patch_starts(n: usize, len: usize, hop: usize) -> Vec<usize> {
    if n < len {
        return Vec::new();
    }
    (0..=(n - len)).step_by(hop.max(1)).collect()
}

/// Scores already-prepared (gated, normalized) reference and degraded features.
///
/// The degraded features are cut into patches; each patch is aligned to the
/// whole reference. When either side is shorter than one patch the patch
/// shrinks to fit, down to a minimum of two frames.
pub fn score_features(
    reference: &FeatureMatrix,
    degraded: &FeatureMatrix,
    params: &PatchParams,
) -> Result<MetricResult, MetricError> {
    let wanted = params.frames_for(degraded).max(2);
    let len = wanted.min(degraded.frames()).min(reference.frames());
    if len < 2 {
        return Err(MetricError::TooShortAfterVad {
            reference: reference.frames(),
            degraded: degraded.frames(),
        });
    }
    let hop = params.patch_hop.unwrap_or(len / 2).max(1);
    let per_patch = patch_starts(degraded.frames(), len, hop)
        .into_iter()
        .enumerate()
        .map(|(patch_index, start)| {
            Ok(PatchScore {
                patch_index,
                cost: sdtw_cost(reference, &degraded.slice(start..start + len))?,
            })
        })
        .collect::<Result<Vec<_>, MetricError>>()?;
    let costs: Vec<f64> = per_patch.iter().map(|p| p.cost).collect();
    Ok(MetricResult {
        metric_name: "warpq".into(),
        score: params.aggregation.apply(&costs),
        per_patch: Some(per_patch),
    })
}

fn prepared(sig: &Signal, which: &str, params: &WarpqParams) -> Result<FeatureMatrix, MetricError> {
    let f = &params.features;
    let mask = vad_mask(sig, f.frame_len, f.hop, params.vad_threshold_db)?;
    if mask.count_kept() == 0 {
        return Err(MetricError::NoVoicedFrames(which.to_string()));
    }
    let feats = mfcc(sig, f)?.select(&mask)?;
    if feats.frames() < 2 {
        return Err(MetricError::TooShortAfterVad {
            reference: if which == "ref" { feats.frames() } else { 0 },
            degraded: if which == "deg" { feats.frames() } else { 0 },
        });
    }
    Ok(cmvn(&feats)?)
}

/// VAD gate, MFCC and CMVN on both signals, then patch-wise SDTW.
pub fn warpq_score(reference: &Signal, degraded: &Signal, params: &WarpqParams) -> Result<MetricResult, MetricError> {
    let r = prepared(reference, "ref", params)?;
    let d = prepared(degraded, "deg", params)?;
    score_features(&r, &d, &params.patches)
}
