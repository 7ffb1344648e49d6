use super::graph::{propagate, Chw, GraphBuilder, LayerKind, LayerSpec};
use super::Variant;
use crate::error::{invalid, Result};

/// Expand-branch kernels and the pads that keep their outputs aligned.
pub const BRANCH_KERNELS: [(usize, usize); 4] = [(1, 0), (3, 1), (5, 2), (7, 3)];

/// Squeeze + four-branch expand block on an `in_depth`-channel input.
///
/// Variant A squeezes to `N/4` channels, variant B keeps `N`. Every expand
/// branch has `N/2` filters, so the concatenated output is `2N` channels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NuLiteBlockSpec {
    pub variant: Variant,
    pub in_depth: usize,
}

impl NuLiteBlockSpec {
    pub fn new(variant: Variant, in_depth: usize) -> Result<Self> {
        if in_depth == 0 || !in_depth.is_multiple_of(2) {
            return Err(invalid(format!("block depth {in_depth} must be a positive even number")));
        }
        if variant == Variant::A && !in_depth.is_multiple_of(4) {
            return Err(invalid(format!("variant A block depth {in_depth} must be divisible by 4")));
        }
        Ok(Self { variant, in_depth })
    }

    pub fn squeeze_width(&self) -> usize {
        match self.variant {
            Variant::A => self.in_depth / 4,
            Variant::B => self.in_depth,
        }
    }

    pub fn branch_width(&self) -> usize {
        self.in_depth / 2
    }

    pub fn out_channels(&self) -> usize {
        BRANCH_KERNELS.len() * self.branch_width()
    }

    /// Learnable parameters: bias-free convs plus BN gamma/beta.
    pub fn param_count(&self) -> usize {
        let (n, s, e) = (self.in_depth, self.squeeze_width(), self.branch_width());
        let kernel_area: usize = BRANCH_KERNELS.iter().map(|(k, _)| k * k).sum();
        n * s + s * e * kernel_area + 2 * (s + BRANCH_KERNELS.len() * e)
    }
}

/// Layers of one block, reading from a layer outside the fragment.
#[derive(Clone, Debug)]
pub struct BlockFragment {
    pub layers: Vec<LayerSpec>,
    pub input: String,
    pub output: String,
}

impl BlockFragment {
    /// Output dims of every fragment layer given the dims of `input`.
    pub fn propagate(&self, input_dims: Chw) -> Result<Vec<Chw>> {
        let mut all = vec![LayerSpec {
            id: self.input.clone(),
            kind: LayerKind::Input,
            inputs: vec![],
            stage: String::new(),
        }];
        all.extend(self.layers.iter().cloned());
        let edges: Vec<Vec<usize>> = all
            .iter()
            .map(|l| {
                l.inputs
                    .iter()
                    .map(|src| all.iter().position(|o| &o.id == src).expect("fragment edge"))
                    .collect()
            })
            .collect();
        let mut shapes = propagate(&all, &edges, input_dims)?;
        shapes.remove(0);
        Ok(shapes)
    }

    pub fn find(&self, id: &str) -> Option<&LayerSpec> {
        self.layers.iter().find(|l| l.id == id)
    }
}

/// Squeeze 1x1 conv, then 1/3/5/7 expand branches concatenated. Ids are
/// `{prefix}_squeeze`, `{prefix}_expand{k}x{k}` and `{prefix}_concat`.
pub fn build_nu_lite_block(spec: &NuLiteBlockSpec, input: &str, prefix: &str) -> BlockFragment {
    let mut b = GraphBuilder::new();
    let squeeze = b.conv_bn_relu(&format!("{prefix}_squeeze"), input, spec.squeeze_width(), 1, 1, 0, false);
    let branches: Vec<String> = BRANCH_KERNELS
        .iter()
        .map(|&(k, pad)| b.conv_bn_relu(&format!("{prefix}_expand{k}x{k}"), &squeeze, spec.branch_width(), k, 1, pad, false))
        .collect();
    let refs: Vec<&str> = branches.iter().map(String::as_str).collect();
    let output = b.push(format!("{prefix}_concat"), LayerKind::Concat, &refs);
    BlockFragment {
        layers: b.into_layers(),
        input: input.to_string(),
        output,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn variant_widths() {
        let a = NuLiteBlockSpec::new(Variant::A, 64).unwrap();
        assert_eq!((a.squeeze_width(), a.branch_width(), a.out_channels()), (16, 32, 128));
        let b = NuLiteBlockSpec::new(Variant::B, 128).unwrap();
        assert_eq!((b.squeeze_width(), b.branch_width(), b.out_channels()), (128, 64, 256));
    }

    #[test]
    fn invalid_depths() {
        assert!(NuLiteBlockSpec::new(Variant::A, 6).is_err());
        assert!(NuLiteBlockSpec::new(Variant::B, 6).is_ok());
        assert!(NuLiteBlockSpec::new(Variant::B, 7).is_err());
        assert!(NuLiteBlockSpec::new(Variant::A, 0).is_err());
    }

    #[test]
    fn block_a64_params() {
        // squeeze 1*1*64*16 = 1024, branches 16*32*(1+9+25+49) = 43008,
        // BN 2*(16 + 4*32) = 288
        let spec = NuLiteBlockSpec::new(Variant::A, 64).unwrap();
        assert_eq!(spec.param_count(), 1024 + 43008 + 288);
        assert_eq!(spec.param_count(), 44320);
    }

    #[test]
    fn fragment_preserves_spatial_dims() {
        let spec = NuLiteBlockSpec::new(Variant::A, 64).unwrap();
        let frag = build_nu_lite_block(&spec, "pool2", "block1");
        let shapes = frag.propagate([64, 28, 28]).unwrap();
        assert_eq!(*shapes.last().unwrap(), [128, 28, 28]);
        assert_eq!(frag.output, "block1_concat");
    }

    #[test]
    fn wrong_pad_names_layer() {
        let spec = NuLiteBlockSpec::new(Variant::A, 64).unwrap();
        let mut frag = build_nu_lite_block(&spec, "in", "blk");
        for l in &mut frag.layers {
            if l.id == "blk_expand5x5" {
                if let LayerKind::Conv { pad, .. } = &mut l.kind {
                    *pad = 1;
                }
            }
        }
        match frag.propagate([64, 28, 28]) {
            Err(Error::LayerShape { layer, .. }) => assert_eq!(layer, "blk_concat"),
            other => panic!("expected layer shape error, got {other:?}"),
        }
    }
}
