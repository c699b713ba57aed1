//! Built-in node types.

use crate::audio::nodes as audio;
use crate::dsp::nodes as dsp;
use crate::graph::{nodes as flow, Registry};
use crate::metrics::nodes as metrics;
use crate::outputs::nodes as outputs;

pub fn register_all(reg: &mut Registry) {
    reg.register("identity", flow::build_identity)
        .register("halt", flow::build_halt)
        .register("set", flow::build_set)
        .register("scale", flow::build_scale)
        .register("loop", flow::build_loop)
        .register("encapsulation", flow::build_encapsulation)
        .register("sink", flow::build_sink)
        .register("load_dataset", audio::build_load_dataset)
        .register("load_audio", audio::build_load_audio)
        .register("load_pair", audio::build_load_pair)
        .register("vad", dsp::build_vad)
        .register("mfcc", dsp::build_mfcc)
        .register("melspec", dsp::build_melspec)
        .register("sdtw", metrics::build_sdtw)
        .register("lsd", metrics::build_lsd)
        .register("attach_scores", outputs::build_attach_scores)
        .register("write_csv", outputs::build_write_csv)
        .register("latex_table", outputs::build_latex_table)
        .register("scatter_svg", outputs::build_scatter_svg);
}
