use super::{lsd_score, score_features, Aggregation, LsdParams, PatchParams};
use crate::graph::{emit, BuildContext, ExecOutcome, GraphError, Node, NodeError, NodeSpec, RunContext};
use crate::store::{ResultStore, Value};

/// Patch-wise SDTW between the `ref` and `deg` matrices of a feature pair.
/// Writes the aggregated score; per-patch costs go to `<output_key>_patches`.
pub struct SdtwNode {
    input: String,
    params: PatchParams,
    output_key: Option<String>,
}

impl Node for SdtwNode {
    fn execute(&self, store: &mut ResultStore, _: &mut RunContext) -> Result<ExecOutcome, NodeError> {
        let pair = store.store(&self.input)?;
        let result = score_features(pair.matrix("ref")?, pair.matrix("deg")?, &self.params)?;
        if let Some(key) = &self.output_key {
            let patches = result
                .per_patch
                .unwrap_or_default()
                .iter()
                .map(|p| Value::Scalar(p.cost))
                .collect();
            store.insert(format!("{key}_patches"), Value::List(patches));
        }
        emit(store, &self.output_key, Value::Scalar(result.score));
        Ok(ExecOutcome::Continue)
    }
}

pub fn build_sdtw(spec: &NodeSpec, _: &BuildContext<'_>) -> Result<Box<dyn Node>, GraphError> {
    let p = spec.params();
    let d = PatchParams::default();
    let patch_secs = p.f64_or("patch_secs", d.patch_secs)?;
    if patch_secs <= 0.0 {
        return Err(p.invalid("patch_secs", "must be positive"));
    }
    let patch_frames = p.opt_usize("patch_frames")?;
    if matches!(patch_frames, Some(n) if n < 2) {
        return Err(p.invalid("patch_frames", "must be at least 2"));
    }
    let patch_hop = p.opt_usize("patch_hop")?;
    if patch_hop == Some(0) {
        return Err(p.invalid("patch_hop", "must be positive"));
    }
    let agg = p.str_or("aggregation", "median")?;
    let aggregation = Aggregation::parse(&agg).ok_or_else(|| p.invalid("aggregation", "expected 'median' or 'mean'"))?;
    Ok(Box::new(SdtwNode {
        input: p.str_or("input", "features")?,
        params: PatchParams {
            patch_secs,
            patch_frames,
            patch_hop,
            aggregation,
        },
        output_key: spec.output_key.clone(),
    }))
}

/// Log-spectral distance on a `{ref, deg}` signal pair, as a single node.
pub struct LsdNode {
    input: String,
    params: LsdParams,
    output_key: Option<String>,
}

impl Node for LsdNode {
    fn execute(&self, store: &mut ResultStore, _: &mut RunContext) -> Result<ExecOutcome, NodeError> {
        let pair = store.store(&self.input)?;
        let result = lsd_score(pair.signal("ref")?, pair.signal("deg")?, &self.params)?;
        emit(store, &self.output_key, Value::Scalar(result.score));
        Ok(ExecOutcome::Continue)
    }
}

pub fn build_lsd(spec: &NodeSpec, _: &BuildContext<'_>) -> Result<Box<dyn Node>, GraphError> {
    let p = spec.params();
    let d = LsdParams::default();
    let frame_len = p.usize_or("frame_len", d.frame_len)?;
    let hop = p.usize_or("hop", d.hop)?;
    if !frame_len.is_power_of_two() {
        return Err(p.invalid("frame_len", "must be a power of two"));
    }
    if hop == 0 || hop > frame_len {
        return Err(p.invalid("hop", "must be in 1..=frame_len"));
    }
    Ok(Box::new(LsdNode {
        input: p.str_or("input", "signals")?,
        params: LsdParams { frame_len, hop },
        output_key: spec.output_key.clone(),
    }))
}
