//! Feature-extraction nodes. Each accepts either a single signal or a
//! `{ref, deg}` pair store and produces output of the same shape.

use super::{cmvn, mel_spectrogram, mfcc, vad_mask, DspError, FeatureConfig, FeatureMatrix, VadMask};
use crate::audio::Signal;
use crate::graph::{emit, BuildContext, ExecOutcome, GraphError, Node, NodeError, NodeSpec, Params, RunContext};
use crate::store::{ResultStore, StoreError, Value};

/// Applies `f` to a signal, or to each member of a `{ref, deg}` pair.
fn map_signals(
    value: &Value,
    key: &str,
    mut f: impl FnMut(&Signal, Option<&str>) -> Result<Value, NodeError>,
) -> Result<Value, NodeError> {
    match value {
        Value::Signal(s) => f(s, None),
        Value::Store(pair) => {
            let mut out = ResultStore::new();
            for member in ["ref", "deg"] {
                out.insert(member, f(pair.signal(member)?, Some(member))?);
            }
            Ok(Value::Store(out))
        }
        other => Err(StoreError::WrongType {
            key: key.to_string(),
            expected: "Signal or {ref, deg} store",
            found: other.type_name(),
        }
        .into()),
    }
}

fn mask_for<'a>(masks: Option<&'a Value>, member: Option<&str>, key: &str) -> Result<Option<&'a VadMask>, NodeError> {
    let Some(v) = masks else { return Ok(None) };
    let wrong = |found: &'static str| StoreError::WrongType {
        key: key.to_string(),
        expected: "Mask",
        found,
    };
    match (v, member) {
        (Value::Mask(m), _) => Ok(Some(m)),
        (Value::Store(s), Some(member)) => Ok(Some(s.mask(member)?)),
        (other, _) => Err(wrong(other.type_name()).into()),
    }
}

/// Energy VAD per signal.
pub struct VadNode {
    input: String,
    frame_len: usize,
    hop: usize,
    threshold_db: f64,
    output_key: Option<String>,
}

impl Node for VadNode {
    fn execute(&self, store: &mut ResultStore, _: &mut RunContext) -> Result<ExecOutcome, NodeError> {
        let out = map_signals(store.get(&self.input)?, &self.input, |s, _| {
            Ok(Value::Mask(vad_mask(s, self.frame_len, self.hop, self.threshold_db)?))
        })?;
        emit(store, &self.output_key, out);
        Ok(ExecOutcome::Continue)
    }
}

fn framing(p: &Params<'_>) -> Result<(usize, usize), GraphError> {
    let d = FeatureConfig::default();
    let frame_len = p.usize_or("frame_len", d.frame_len)?;
    let hop = p.usize_or("hop", d.hop)?;
    if !frame_len.is_power_of_two() {
        return Err(p.invalid("frame_len", "must be a power of two"));
    }
    if hop == 0 || hop > frame_len {
        return Err(p.invalid("hop", "must be in 1..=frame_len"));
    }
    Ok((frame_len, hop))
}

pub fn build_vad(spec: &NodeSpec, _: &BuildContext<'_>) -> Result<Box<dyn Node>, GraphError> {
    let p = spec.params();
    let (frame_len, hop) = framing(&p)?;
    let threshold_db = p.f64_or("threshold_db", -35.0)?;
    if threshold_db >= 0.0 {
        return Err(p.invalid("threshold_db", "must be negative"));
    }
    Ok(Box::new(VadNode {
        input: p.str_or("input", "signals")?,
        frame_len,
        hop,
        threshold_db,
        output_key: spec.output_key.clone(),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Mfcc,
    MelSpectrogram,
}

/// MFCC or log-mel features, optionally gated by a VAD mask and normalized
/// with CMVN (after gating).
pub struct FeatureNode {
    kind: FeatureKind,
    input: String,
    mask: Option<String>,
    config: FeatureConfig,
    normalize: bool,
    output_key: Option<String>,
}

impl FeatureNode {
    fn features(&self, sig: &Signal, mask: Option<&VadMask>) -> Result<FeatureMatrix, DspError> {
        let mut feats = match self.kind {
            FeatureKind::Mfcc => mfcc(sig, &self.config)?,
            FeatureKind::MelSpectrogram => mel_spectrogram(sig, &self.config)?,
        };
        if let Some(mask) = mask {
            feats = feats.select(mask)?;
        }
        if self.normalize {
            feats = cmvn(&feats)?;
        }
        Ok(feats)
    }
}

impl Node for FeatureNode {
    fn execute(&self, store: &mut ResultStore, _: &mut RunContext) -> Result<ExecOutcome, NodeError> {
        let masks = match &self.mask {
            Some(k) => Some(store.get(k)?),
            None => None,
        };
        let mask_key = self.mask.as_deref().unwrap_or("");
        let out = map_signals(store.get(&self.input)?, &self.input, |s, member| {
            let mask = mask_for(masks, member, mask_key)?;
            Ok(Value::Matrix(self.features(s, mask)?))
        })?;
        emit(store, &self.output_key, out);
        Ok(ExecOutcome::Continue)
    }
}

fn build_features(kind: FeatureKind, spec: &NodeSpec) -> Result<Box<dyn Node>, GraphError> {
    let p = spec.params();
    let d = FeatureConfig::default();
    let (frame_len, hop) = framing(&p)?;
    let config = FeatureConfig {
        frame_len,
        hop,
        n_mels: p.usize_or("n_mels", d.n_mels)?,
        n_coeffs: p.usize_or("n_coeffs", d.n_coeffs)?,
        fmin: p.f64_or("fmin", d.fmin)?,
        fmax: p.opt_f64("fmax")?,
    };
    if config.n_mels < 2 {
        return Err(p.invalid("n_mels", "must be at least 2"));
    }
    if kind == FeatureKind::Mfcc && (config.n_coeffs == 0 || config.n_coeffs > config.n_mels) {
        return Err(p.invalid("n_coeffs", "must be in 1..=n_mels"));
    }
    Ok(Box::new(FeatureNode {
        kind,
        input: p.str_or("input", "signals")?,
        mask: p.opt_str("mask")?,
        config,
        normalize: p.bool_or("cmvn", true)?,
        output_key: spec.output_key.clone(),
    }))
}

pub fn build_mfcc(spec: &NodeSpec, _: &BuildContext<'_>) -> Result<Box<dyn Node>, GraphError> {
    build_features(FeatureKind::Mfcc, spec)
}

pub fn build_melspec(spec: &NodeSpec, _: &BuildContext<'_>) -> Result<Box<dyn Node>, GraphError> {
    build_features(FeatureKind::MelSpectrogram, spec)
}
