//! Executable network: a [`NetGraph`] plus the parameters of its layers.
//!
//! Forward passes record the activations the backward pass needs; the
//! backward pass walks the graph in reverse, summing gradients where a
//! layer fans out (the squeeze output feeds every expand branch).

use crate::architectures::{Arch, LayerKind, NetGraph};
use crate::error::{shape, Error, Result};
use crate::layers::{
    batchnorm_backward, batchnorm_forward, batchnorm_inference, concat_channels,
    conv2d_backward_with, conv2d_forward, global_avgpool_backward, global_avgpool_forward,
    linear_backward, linear_forward, maxpool_backward, maxpool_forward, relu_backward,
    relu_forward, softmax, softmax_cross_entropy, split_channels, BatchNormParams, ConvParams,
    LinearParams, Mode,
};
use crate::tensor::{Rng, Tensor4};

/// Parameters owned by one graph layer.
#[derive(Clone, Debug, PartialEq)]
pub enum LayerParams {
    None,
    Conv(ConvParams),
    BatchNorm(BatchNormParams),
    Linear(LinearParams),
}

/// A learnable tensor exposed to the optimizer.
pub struct Learnable<'a> {
    pub name: String,
    pub values: &'a mut [f32],
    /// Conv and linear weights take weight decay; biases and BN affine do not.
    pub decay: bool,
}

/// Read-only view of a stored tensor (learnable or running statistic).
#[derive(Debug)]
pub struct TensorRef<'a> {
    pub name: String,
    pub dims: Vec<usize>,
    pub values: &'a [f32],
}

/// Gradients in the same order as [`Network::learnables_mut`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub tensors: Vec<Vec<f32>>,
}

/// Activations recorded by a training-mode forward pass.
pub struct ForwardPass {
    outputs: Vec<Option<Tensor4>>,
    argmax: Vec<Option<Vec<usize>>>,
    batch: usize,
}

impl ForwardPass {
    /// Softmax probabilities, `(N, classes, 1, 1)`.
    pub fn probs(&self) -> &Tensor4 {
        self.outputs.last().and_then(Option::as_ref).expect("softmax output")
    }
}

#[derive(Clone, Debug)]
pub struct Network {
    graph: NetGraph,
    params: Vec<LayerParams>,
}

impl Network {
    /// Fresh parameters: He-normal conv/linear weights, zero biases,
    /// BN gamma 1, beta 0, running mean 0, running var 1.
    pub fn new(graph: NetGraph, rng: &mut Rng) -> Result<Self> {
        let shapes = graph.shapes().to_vec();
        let mut params = Vec::with_capacity(graph.layers().len());
        for (i, layer) in graph.layers().iter().enumerate() {
            let input = graph.inputs_of(i).first().map(|&j| shapes[j]);
            let p = match (&layer.kind, input) {
                (&LayerKind::Conv { out_channels, kernel, stride, pad, bias }, Some([c, _, _])) => {
                    LayerParams::Conv(ConvParams::init(c, out_channels, kernel, stride, pad, bias, rng)?)
                }
                (LayerKind::BatchNorm, Some([c, _, _])) => LayerParams::BatchNorm(BatchNormParams::new(c)),
                (&LayerKind::Linear { out_features }, Some([c, h, w])) => {
                    LayerParams::Linear(LinearParams::init(c * h * w, out_features, rng)?)
                }
                _ => LayerParams::None,
            };
            params.push(p);
        }
        Ok(Self { graph, params })
    }

    pub fn from_arch(arch: Arch, num_classes: usize, seed: u64) -> Result<Self> {
        Self::new(arch.build(num_classes)?, &mut Rng::new(seed))
    }

    pub fn graph(&self) -> &NetGraph {
        &self.graph
    }

    pub fn arch(&self) -> Arch {
        self.graph.arch()
    }

    pub fn num_classes(&self) -> usize {
        self.graph.num_classes()
    }

    pub fn layer_params(&self) -> &[LayerParams] {
        &self.params
    }

    fn check_input(&self, x: &Tensor4) -> Result<()> {
        let [c, h, w] = self.graph.input_dims();
        if [x.c(), x.h(), x.w()] != [c, h, w] {
            return Err(shape(format!(
                "network expects (N, {c}, {h}, {w}) input, got {:?}",
                x.dims()
            )));
        }
        Ok(())
    }

    /// Which outputs the backward pass reads: inputs of conv/BN/linear
    /// layers, the logits, and ReLU outputs (their own mask).
    fn retained(&self) -> Vec<bool> {
        let layers = self.graph.layers();
        let mut keep = vec![false; layers.len()];
        for (i, layer) in layers.iter().enumerate() {
            match layer.kind {
                LayerKind::Conv { .. } | LayerKind::BatchNorm | LayerKind::Linear { .. } | LayerKind::Softmax => {
                    self.graph.inputs_of(i).iter().for_each(|&j| keep[j] = true)
                }
                LayerKind::Relu => keep[i] = true,
                _ => {}
            }
        }
        *keep.last_mut().unwrap() = true;
        keep
    }

    fn last_use(&self) -> Vec<usize> {
        let n = self.graph.layers().len();
        let mut last = (0..n).collect::<Vec<_>>();
        for i in 0..n {
            for &j in self.graph.inputs_of(i) {
                last[j] = last[j].max(i);
            }
        }
        last
    }

    fn run_layer(
        &mut self,
        i: usize,
        x: &Tensor4,
        outputs: &[Option<Tensor4>],
        mode: Mode,
    ) -> Result<(Tensor4, Option<Vec<usize>>)> {
        let ins = self.graph.inputs_of(i);
        let input = |k: usize| -> &Tensor4 { outputs[ins[k]].as_ref().expect("live input") };
        let kind = self.graph.layers()[i].kind.clone();
        let out = match (kind, &mut self.params[i]) {
            (LayerKind::Input, _) => x.clone(),
            (LayerKind::Conv { .. }, LayerParams::Conv(p)) => conv2d_forward(input(0), p)?,
            (LayerKind::BatchNorm, LayerParams::BatchNorm(p)) => match mode {
                Mode::Train => batchnorm_forward(input(0), p, Mode::Train)?,
                Mode::Eval => batchnorm_inference(input(0), p)?,
            },
            (LayerKind::Relu, _) => relu_forward(input(0)),
            (LayerKind::MaxPool { kernel, stride }, _) => {
                let (y, idx) = maxpool_forward(input(0), kernel, stride)?;
                return Ok((y, (mode == Mode::Train).then_some(idx)));
            }
            (LayerKind::GlobalAvgPool, _) => global_avgpool_forward(input(0))?,
            (LayerKind::Concat, _) => {
                let parts: Vec<&Tensor4> = (0..ins.len()).map(input).collect();
                concat_channels(&parts)?
            }
            (LayerKind::Linear { .. }, LayerParams::Linear(p)) => linear_forward(input(0), p)?,
            (LayerKind::Softmax, _) => softmax(input(0)),
            (kind, _) => {
                return Err(Error::Graph(format!("layer {i} ({}) is missing its parameters", kind.name())))
            }
        };
        Ok((out, None))
    }

    /// Training-mode forward pass: batch-statistics BN (running stats
    /// updated) with every activation needed by [`Network::backward`] kept.
    pub fn forward_train(&mut self, x: &Tensor4) -> Result<ForwardPass> {
        self.check_input(x)?;
        let keep = self.retained();
        let last = self.last_use();
        let n = self.graph.layers().len();
        let mut outputs: Vec<Option<Tensor4>> = vec![None; n];
        let mut argmax = vec![None; n];
        for i in 0..n {
            let (y, idx) = self.run_layer(i, x, &outputs, Mode::Train)?;
            outputs[i] = Some(y);
            argmax[i] = idx;
            for &j in self.graph.inputs_of(i) {
                if !keep[j] && last[j] == i {
                    outputs[j] = None;
                }
            }
        }
        Ok(ForwardPass {
            outputs,
            argmax,
            batch: x.n(),
        })
    }

    /// Eval-mode class probabilities, `(N, classes, 1, 1)`. Parameters are untouched.
    pub fn predict(&self, x: &Tensor4) -> Result<Tensor4> {
        self.check_input(x)?;
        let last = self.last_use();
        let n = self.graph.layers().len();
        // run_layer needs &mut only for train-mode BN; eval never writes
        let mut scratch = self.clone();
        let mut outputs: Vec<Option<Tensor4>> = vec![None; n];
        for i in 0..n {
            let (y, _) = scratch.run_layer(i, x, &outputs, Mode::Eval)?;
            outputs[i] = Some(y);
            for &j in self.graph.inputs_of(i) {
                if last[j] == i {
                    outputs[j] = None;
                }
            }
        }
        Ok(outputs.pop().flatten().expect("softmax output"))
    }

    /// Mean cross-entropy loss against `labels` and the gradients of every
    /// learnable tensor.
    pub fn backward(&self, pass: ForwardPass, labels: &[usize]) -> Result<(f32, Gradients)> {
        let ForwardPass { mut outputs, mut argmax, batch } = pass;
        if labels.len() != batch {
            return Err(shape(format!("{} labels for a batch of {batch}", labels.len())));
        }
        let layers = self.graph.layers();
        let n = layers.len();
        let shapes = self.graph.shapes();
        let dims_of = |j: usize| -> [usize; 4] {
            let [c, h, w] = shapes[j];
            [batch, c, h, w]
        };

        let logits_idx = self.graph.inputs_of(n - 1)[0];
        let ce = softmax_cross_entropy(outputs[logits_idx].as_ref().expect("logits"), labels)?;
        if !ce.loss.is_finite() {
            return Err(Error::NonFinite("training loss".into()));
        }

        let mut grads: Vec<Option<Tensor4>> = vec![None; n];
        grads[logits_idx] = Some(ce.grad_logits);
        let mut layer_grads: Vec<Vec<Vec<f32>>> = vec![Vec::new(); n];

        let push = |grads: &mut Vec<Option<Tensor4>>, j: usize, g: Tensor4| {
            match &mut grads[j] {
                Some(acc) => acc.data_mut().iter_mut().zip(g.data()).for_each(|(a, &b)| *a += b),
                slot @ None => *slot = Some(g),
            }
        };

        for i in (1..n - 1).rev() {
            let Some(g) = grads[i].take() else {
                outputs[i] = None;
                continue;
            };
            let ins = self.graph.inputs_of(i);
            let src = ins[0];
            let input_is_data = layers[src].kind == LayerKind::Input;
            let x = || outputs[src].as_ref().expect("retained input");
            match (&layers[i].kind, &self.params[i]) {
                (LayerKind::Conv { .. }, LayerParams::Conv(p)) => {
                    let cg = conv2d_backward_with(x(), p, &g, !input_is_data)?;
                    layer_grads[i].push(cg.grad_weight.into_vec());
                    if let Some(b) = cg.grad_bias {
                        layer_grads[i].push(b);
                    }
                    if !input_is_data {
                        push(&mut grads, src, cg.grad_x);
                    }
                }
                (LayerKind::BatchNorm, LayerParams::BatchNorm(p)) => {
                    let bg = batchnorm_backward(x(), p, &g)?;
                    layer_grads[i].push(bg.grad_gamma);
                    layer_grads[i].push(bg.grad_beta);
                    push(&mut grads, src, bg.grad_x);
                }
                (LayerKind::Linear { .. }, LayerParams::Linear(p)) => {
                    let lg = linear_backward(x(), p, &g)?;
                    layer_grads[i].push(lg.grad_weight);
                    layer_grads[i].push(lg.grad_bias);
                    push(&mut grads, src, lg.grad_x);
                }
                (LayerKind::Relu, _) => {
                    let y = outputs[i].as_ref().expect("relu output");
                    push(&mut grads, src, relu_backward(y, &g)?);
                }
                (LayerKind::MaxPool { .. }, _) => {
                    let idx = argmax[i].take().expect("maxpool indices");
                    push(&mut grads, src, maxpool_backward(&idx, &g, dims_of(src))?);
                }
                (LayerKind::GlobalAvgPool, _) => {
                    push(&mut grads, src, global_avgpool_backward(&g, dims_of(src))?);
                }
                (LayerKind::Concat, _) => {
                    let widths: Vec<usize> = ins.iter().map(|&j| shapes[j][0]).collect();
                    for (&j, part) in ins.iter().zip(split_channels(&g, &widths)?) {
                        push(&mut grads, j, part);
                    }
                }
                (kind, _) => {
                    return Err(Error::Graph(format!("cannot differentiate layer {i} ({})", kind.name())))
                }
            }
            outputs[i] = None;
        }

        let tensors = layer_grads.into_iter().flatten().collect();
        Ok((ce.loss, Gradients { tensors }))
    }

    /// Learnable tensors in graph order: conv `weight[, bias]`, BN `gamma, beta`,
    /// linear `weight, bias`.
    pub fn learnables_mut(&mut self) -> Vec<Learnable<'_>> {
        let mut out = Vec::new();
        for (layer, p) in self.graph.layers().iter().zip(self.params.iter_mut()) {
            let id = &layer.id;
            match p {
                LayerParams::Conv(c) => {
                    out.push(Learnable { name: format!("{id}.weight"), values: c.weight.data_mut(), decay: true });
                    if let Some(b) = &mut c.bias {
                        out.push(Learnable { name: format!("{id}.bias"), values: b, decay: false });
                    }
                }
                LayerParams::BatchNorm(b) => {
                    out.push(Learnable { name: format!("{id}.gamma"), values: &mut b.gamma, decay: false });
                    out.push(Learnable { name: format!("{id}.beta"), values: &mut b.beta, decay: false });
                }
                LayerParams::Linear(l) => {
                    out.push(Learnable { name: format!("{id}.weight"), values: &mut l.weight, decay: true });
                    out.push(Learnable { name: format!("{id}.bias"), values: &mut l.bias, decay: false });
                }
                LayerParams::None => {}
            }
        }
        out
    }

    /// Every stored tensor, learnables followed by running statistics per layer.
    pub fn tensors<'a>(&'a self) -> Vec<TensorRef<'a>> {
        let mut out = Vec::new();
        for (layer, p) in self.graph.layers().iter().zip(&self.params) {
            let id = &layer.id;
            let mut add = |suffix: &str, dims: Vec<usize>, values: &'a [f32]| {
                out.push(TensorRef { name: format!("{id}.{suffix}"), dims, values })
            };
            match p {
                LayerParams::Conv(c) => {
                    add("weight", c.weight.dims().to_vec(), c.weight.data());
                    if let Some(b) = &c.bias {
                        add("bias", vec![b.len()], b);
                    }
                }
                LayerParams::BatchNorm(b) => {
                    let d = vec![b.channels];
                    add("gamma", d.clone(), &b.gamma);
                    add("beta", d.clone(), &b.beta);
                    add("running_mean", d.clone(), &b.running_mean);
                    add("running_var", d, &b.running_var);
                }
                LayerParams::Linear(l) => {
                    add("weight", vec![l.out_features, l.in_features], &l.weight);
                    add("bias", vec![l.out_features], &l.bias);
                }
                LayerParams::None => {}
            }
        }
        out
    }

    /// Mutable access to a stored tensor by name (see [`Network::tensors`]).
    pub fn tensor_mut(&mut self, name: &str) -> Option<&mut [f32]> {
        let (id, suffix) = name.rsplit_once('.')?;
        let i = self.graph.index_of(id)?;
        match (&mut self.params[i], suffix) {
            (LayerParams::Conv(c), "weight") => Some(c.weight.data_mut()),
            (LayerParams::Conv(c), "bias") => c.bias.as_deref_mut(),
            (LayerParams::BatchNorm(b), "gamma") => Some(&mut b.gamma),
            (LayerParams::BatchNorm(b), "beta") => Some(&mut b.beta),
            (LayerParams::BatchNorm(b), "running_mean") => Some(&mut b.running_mean),
            (LayerParams::BatchNorm(b), "running_var") => Some(&mut b.running_var),
            (LayerParams::Linear(l), "weight") => Some(&mut l.weight),
            (LayerParams::Linear(l), "bias") => Some(&mut l.bias),
            _ => None,
        }
    }

    pub fn param_count(&self) -> usize {
        self.params
            .iter()
            .map(|p| match p {
                LayerParams::Conv(c) => c.param_count(),
                LayerParams::BatchNorm(b) => b.param_count(),
                LayerParams::Linear(l) => l.param_count(),
                LayerParams::None => 0,
            })
            .sum()
    }

    pub fn running_stat_count(&self) -> usize {
        self.params
            .iter()
            .map(|p| match p {
                LayerParams::BatchNorm(b) => 2 * b.channels,
                _ => 0,
            })
            .sum()
    }

    pub fn ensure_finite(&self) -> Result<()> {
        for t in self.tensors() {
            if !t.values.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite(t.name));
            }
        }
        Ok(())
    }
}
