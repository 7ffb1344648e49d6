use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::layers::{conv2d_out_size, pool_out_size};

use super::Arch;

/// `(channels, height, width)` of one activation, batch axis excluded.
pub type Chw = [usize; 3];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LayerKind {
    Input,
    Conv {
        out_channels: usize,
        kernel: usize,
        stride: usize,
        pad: usize,
        bias: bool,
    },
    MaxPool {
        kernel: usize,
        stride: usize,
    },
    GlobalAvgPool,
    BatchNorm,
    Relu,
    Concat,
    Linear {
        out_features: usize,
    },
    Softmax,
}

impl LayerKind {
    pub fn name(&self) -> &'static str {
        match self {
            LayerKind::Input => "input",
            LayerKind::Conv { .. } => "conv",
            LayerKind::MaxPool { .. } => "maxpool",
            LayerKind::GlobalAvgPool => "global_avgpool",
            LayerKind::BatchNorm => "batchnorm",
            LayerKind::Relu => "relu",
            LayerKind::Concat => "concat",
            LayerKind::Linear { .. } => "linear",
            LayerKind::Softmax => "softmax",
        }
    }

    /// Short config string used in printed tables, e.g. `5x5,64,s2,p3`.
    pub fn config(&self) -> String {
        match *self {
            LayerKind::Conv { out_channels, kernel, stride, pad, bias } => {
                let b = if bias { ",bias" } else { "" };
                format!("{kernel}x{kernel},{out_channels},s{stride},p{pad}{b}")
            }
            LayerKind::MaxPool { kernel, stride } => format!("max {kernel}x{kernel},s{stride}"),
            LayerKind::GlobalAvgPool => "avg global".into(),
            LayerKind::Linear { out_features } => format!("fc {out_features}"),
            _ => "-".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerSpec {
    pub id: String,
    pub kind: LayerKind,
    pub inputs: Vec<String>,
    /// Coarse stage the layer belongs to (e.g. `"Convolution 1"`), used to
    /// group rows in the summary table.
    pub stage: String,
}

/// Display row for a stage of the summary table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stage {
    pub name: String,
    pub config: String,
}

/// Validated, topologically ordered layer DAG ending in a softmax sink.
#[derive(Clone, Debug)]
pub struct NetGraph {
    arch: Arch,
    layers: Vec<LayerSpec>,
    stages: Vec<Stage>,
    input_dims: Chw,
    num_classes: usize,
    edges: Vec<Vec<usize>>,
    shapes: Vec<Chw>,
}

impl NetGraph {
    pub fn new(
        arch: Arch,
        layers: Vec<LayerSpec>,
        stages: Vec<Stage>,
        input_dims: Chw,
        num_classes: usize,
    ) -> Result<Self> {
        let edges = resolve_edges(&layers)?;
        let inputs = layers.iter().filter(|l| l.kind == LayerKind::Input).count();
        if inputs != 1 || layers[0].kind != LayerKind::Input {
            return Err(Error::Graph("graph needs exactly one input node, first".into()));
        }
        let sinks = layers.iter().filter(|l| l.kind == LayerKind::Softmax).count();
        if sinks != 1 || layers.last().map(|l| &l.kind) != Some(&LayerKind::Softmax) {
            return Err(Error::Graph("graph needs exactly one softmax sink, last".into()));
        }
        let mut consumed = vec![false; layers.len()];
        edges.iter().flatten().for_each(|&i| consumed[i] = true);
        if let Some(i) = (0..layers.len() - 1).find(|&i| !consumed[i]) {
            return Err(Error::Graph(format!("layer '{}' has no consumers", layers[i].id)));
        }
        let shapes = propagate(&layers, &edges, input_dims)?;
        let out = *shapes.last().unwrap();
        if out != [num_classes, 1, 1] {
            return Err(Error::LayerShape {
                layer: layers.last().unwrap().id.clone(),
                reason: format!("softmax receives {out:?}, expected [{num_classes}, 1, 1]"),
            });
        }
        Ok(Self {
            arch,
            layers,
            stages,
            input_dims,
            num_classes,
            edges,
            shapes,
        })
    }

    pub fn arch(&self) -> Arch {
        self.arch
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn input_dims(&self) -> Chw {
        self.input_dims
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Indices of the layers feeding layer `i`.
    pub fn inputs_of(&self, i: usize) -> &[usize] {
        &self.edges[i]
    }

    /// Output dims of every layer, computed at construction.
    pub fn shapes(&self) -> &[Chw] {
        &self.shapes
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.layers.iter().position(|l| l.id == id)
    }
}

fn resolve_edges(layers: &[LayerSpec]) -> Result<Vec<Vec<usize>>> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let mut edges = Vec::with_capacity(layers.len());
    for (i, layer) in layers.iter().enumerate() {
        let arity_ok = match layer.kind {
            LayerKind::Input => layer.inputs.is_empty(),
            LayerKind::Concat => layer.inputs.len() >= 2,
            _ => layer.inputs.len() == 1,
        };
        if !arity_ok {
            return Err(Error::Graph(format!(
                "layer '{}' ({}) has {} inputs",
                layer.id,
                layer.kind.name(),
                layer.inputs.len()
            )));
        }
        let mut ins = Vec::with_capacity(layer.inputs.len());
        for src in &layer.inputs {
            // only earlier layers are visible, which also rules out cycles
            let j = *seen.get(src.as_str()).ok_or_else(|| {
                Error::Graph(format!("layer '{}' references unknown or later layer '{src}'", layer.id))
            })?;
            ins.push(j);
        }
        if seen.insert(&layer.id, i).is_some() {
            return Err(Error::Graph(format!("duplicate layer id '{}'", layer.id)));
        }
        edges.push(ins);
    }
    if layers.is_empty() {
        return Err(Error::Graph("empty graph".into()));
    }
    Ok(edges)
}

/// Output `(C, H, W)` for every layer; the first failure names its layer.
pub(crate) fn propagate(layers: &[LayerSpec], edges: &[Vec<usize>], input_dims: Chw) -> Result<Vec<Chw>> {
    let mut shapes: Vec<Chw> = Vec::with_capacity(layers.len());
    for (layer, ins) in layers.iter().zip(edges) {
        let fail = |reason: String| Error::LayerShape {
            layer: layer.id.clone(),
            reason,
        };
        let first = ins.first().map(|&j| shapes[j]);
        let out = match (&layer.kind, first) {
            (LayerKind::Input, _) => input_dims,
            (&LayerKind::Conv { out_channels, kernel, stride, pad, .. }, Some([_, h, w])) => [
                out_channels,
                conv2d_out_size(h, kernel, stride, pad).map_err(|e| fail(e.to_string()))?,
                conv2d_out_size(w, kernel, stride, pad).map_err(|e| fail(e.to_string()))?,
            ],
            (&LayerKind::MaxPool { kernel, stride }, Some([c, h, w])) => [
                c,
                pool_out_size(h, kernel, stride).map_err(|e| fail(e.to_string()))?,
                pool_out_size(w, kernel, stride).map_err(|e| fail(e.to_string()))?,
            ],
            (LayerKind::GlobalAvgPool, Some([c, _, _])) => [c, 1, 1],
            (LayerKind::BatchNorm | LayerKind::Relu | LayerKind::Softmax, Some(s)) => s,
            (LayerKind::Concat, Some([_, h, w])) => {
                let mut c = 0;
                for &j in ins {
                    let [cj, hj, wj] = shapes[j];
                    if (hj, wj) != (h, w) {
                        return Err(fail(format!(
                            "concat inputs disagree spatially: {h}x{w} vs {hj}x{wj} from '{}'",
                            layers[j].id
                        )));
                    }
                    c += cj;
                }
                [c, h, w]
            }
            (&LayerKind::Linear { out_features }, Some(_)) => [out_features, 1, 1],
            (_, None) => return Err(fail("missing input".into())),
        };
        shapes.push(out);
    }
    Ok(shapes)
}

impl fmt::Display for LayerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.id, self.kind.name())
    }
}

/// Incremental graph construction with the conv -> BN -> ReLU idiom.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    layers: Vec<LayerSpec>,
    stages: Vec<Stage>,
    stage: String,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Subsequent layers are grouped under `name`.
    pub fn stage(&mut self, name: impl Into<String>, config: impl Into<String>) -> &mut Self {
        let name = name.into();
        self.stages.push(Stage {
            name: name.clone(),
            config: config.into(),
        });
        self.stage = name;
        self
    }

    pub fn push(&mut self, id: impl Into<String>, kind: LayerKind, inputs: &[&str]) -> String {
        let id = id.into();
        self.layers.push(LayerSpec {
            id: id.clone(),
            kind,
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            stage: self.stage.clone(),
        });
        id
    }

    pub fn extend(&mut self, layers: Vec<LayerSpec>) {
        for mut l in layers {
            l.stage = self.stage.clone();
            self.layers.push(l);
        }
    }

    /// `id` conv followed by `id_bn` and `id_relu`; returns the ReLU id.
    #[allow(clippy::too_many_arguments)]
    pub fn conv_bn_relu(
        &mut self,
        id: &str,
        input: &str,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        pad: usize,
        bias: bool,
    ) -> String {
        let conv = self.push(id, LayerKind::Conv { out_channels, kernel, stride, pad, bias }, &[input]);
        let bn = self.push(format!("{id}_bn"), LayerKind::BatchNorm, &[&conv]);
        self.push(format!("{id}_relu"), LayerKind::Relu, &[&bn])
    }

    pub(crate) fn into_layers(self) -> Vec<LayerSpec> {
        self.layers
    }

    pub fn finish(self, arch: Arch, input_dims: Chw, num_classes: usize) -> Result<NetGraph> {
        NetGraph::new(arch, self.layers, self.stages, input_dims, num_classes)
    }
}
