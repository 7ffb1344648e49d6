use super::graph::{Chw, LayerKind, NetGraph};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostRow {
    pub id: String,
    pub kind: &'static str,
    pub config: String,
    pub stage: String,
    pub out_dims: Chw,
    pub params: usize,
    /// Batch-norm running mean and variance, stored but not learned.
    pub running_stats: usize,
    pub macs: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostReport {
    pub rows: Vec<CostRow>,
    pub total_params: usize,
    pub total_running_stats: usize,
    pub total_macs: u64,
}

impl CostReport {
    pub fn params_millions(&self) -> f64 {
        self.total_params as f64 / 1e6
    }
}

/// Learnable parameter count of one layer given its input dims.
pub fn layer_params(kind: &LayerKind, input: Chw) -> usize {
    match *kind {
        LayerKind::Conv { out_channels, kernel, bias, .. } => {
            out_channels * input[0] * kernel * kernel + if bias { out_channels } else { 0 }
        }
        LayerKind::BatchNorm => 2 * input[0],
        LayerKind::Linear { out_features } => {
            let features = input[0] * input[1] * input[2];
            features * out_features + out_features
        }
        _ => 0,
    }
}

/// Multiply-accumulates per image: conv `out_elems * in_ch * k^2`, linear
/// `in * out`, zero for every other layer.
pub fn layer_macs(kind: &LayerKind, input: Chw, output: Chw) -> u64 {
    match *kind {
        LayerKind::Conv { kernel, .. } => {
            (output[0] * output[1] * output[2]) as u64 * (input[0] * kernel * kernel) as u64
        }
        LayerKind::Linear { out_features } => (input[0] * input[1] * input[2] * out_features) as u64,
        _ => 0,
    }
}

fn report(g: &NetGraph) -> CostReport {
    let shapes = g.shapes();
    let rows: Vec<CostRow> = g
        .layers()
        .iter()
        .enumerate()
        .map(|(i, layer)| {
            let input = g.inputs_of(i).first().map_or(g.input_dims(), |&j| shapes[j]);
            CostRow {
                id: layer.id.clone(),
                kind: layer.kind.name(),
                config: layer.kind.config(),
                stage: layer.stage.clone(),
                out_dims: shapes[i],
                params: layer_params(&layer.kind, input),
                running_stats: if layer.kind == LayerKind::BatchNorm { 2 * input[0] } else { 0 },
                macs: layer_macs(&layer.kind, input, shapes[i]),
            }
        })
        .collect();
    CostReport {
        total_params: rows.iter().map(|r| r.params).sum(),
        total_running_stats: rows.iter().map(|r| r.running_stats).sum(),
        total_macs: rows.iter().map(|r| r.macs).sum(),
        rows,
    }
}

/// Per-layer and total learnable parameters (running statistics reported
/// separately, not included in the total).
pub fn count_params(g: &NetGraph) -> Result<CostReport> {
    Ok(report(g))
}

/// Per-layer and total multiply-accumulates for one image at the graph's input size.
pub fn count_macs(g: &NetGraph) -> Result<CostReport> {
    Ok(report(g))
}
