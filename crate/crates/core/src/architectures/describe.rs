use std::fmt::Write;

use super::cost::count_params;
use super::graph::{LayerKind, NetGraph};
use crate::error::Result;

/// Human-readable table of a graph: a stage summary (one row per coarse
/// stage), then every layer, then totals. Columns are separated by `" | "`.
pub fn describe(g: &NetGraph) -> Result<String> {
    let report = count_params(g)?;
    let [c, h, w] = g.input_dims();
    let mut out = String::new();
    writeln!(out, "architecture: {}", g.arch()).unwrap();
    writeln!(out, "classes: {}", g.num_classes()).unwrap();
    writeln!(out, "input: {c}x{h}x{w}").unwrap();
    writeln!(out).unwrap();

    writeln!(out, "stage | config | output size | params").unwrap();
    for stage in g.stages() {
        let members: Vec<usize> = (0..g.layers().len())
            .filter(|&i| g.layers()[i].stage == stage.name)
            .collect();
        let Some(&last) = members.last() else { continue };
        let [oc, oh, ow] = g.shapes()[last];
        let size = match g.layers()[last].kind {
            LayerKind::Softmax | LayerKind::Linear { .. } => oc.to_string(),
            _ => format!("{oh}x{ow}"),
        };
        let params: usize = members.iter().map(|&i| report.rows[i].params).sum();
        writeln!(out, "{} | {} | {} | {}", stage.name, stage.config, size, params).unwrap();
    }
    writeln!(out).unwrap();

    writeln!(out, "layer | kind | config | output | params").unwrap();
    for row in &report.rows {
        let [oc, oh, ow] = row.out_dims;
        writeln!(out, "{} | {} | {} | {oc}x{oh}x{ow} | {}", row.id, row.kind, row.config, row.params).unwrap();
    }
    writeln!(out).unwrap();
    writeln!(
        out,
        "total params: {} ({:.2}M)",
        report.total_params,
        report.params_millions()
    )
    .unwrap();
    writeln!(out, "running stats: {}", report.total_running_stats).unwrap();
    writeln!(out, "total MACs: {}", report.total_macs).unwrap();
    Ok(out)
}

/// Per-layer CSV: `id,kind,config,out_c,out_h,out_w,params,macs`.
pub fn params_csv(g: &NetGraph) -> Result<String> {
    let report = count_params(g)?;
    let mut out = String::from("id,kind,config,out_c,out_h,out_w,params,macs\n");
    for r in &report.rows {
        let [c, h, w] = r.out_dims;
        writeln!(out, "{},{},\"{}\",{c},{h},{w},{},{}", r.id, r.kind, r.config, r.params, r.macs).unwrap();
    }
    writeln!(out, "total,,,,,,{},{}", report.total_params, report.total_macs).unwrap();
    Ok(out)
}
