use super::block::{build_nu_lite_block, NuLiteBlockSpec};
use super::graph::{GraphBuilder, LayerKind, NetGraph};
use super::{Arch, Variant};
use crate::error::{invalid, Result};

/// Network input: RGB crops of 224x224.
pub const INPUT_DIMS: [usize; 3] = [3, 224, 224];

fn check_classes(num_classes: usize) -> Result<()> {
    if num_classes < 2 {
        return Err(invalid(format!("num_classes must be >= 2, got {num_classes}")));
    }
    Ok(())
}

/// The two-block NU-LiteNet stack. Every convolution is bias-free and
/// followed by batch norm and ReLU.
pub fn build_nu_litenet(variant: Variant, num_classes: usize) -> Result<NetGraph> {
    check_classes(num_classes)?;
    let tag = match variant {
        Variant::A => "A",
        Variant::B => "B",
    };
    let mut b = GraphBuilder::new();
    b.stage("Input", "-");
    let data = b.push("data", LayerKind::Input, &[]);

    b.stage("Convolution 1", "5x5,64,s2,p3");
    let x = b.conv_bn_relu("conv1", &data, 64, 5, 2, 3, false);
    b.stage("Pooling 1", "max 3x3,s2");
    let x = b.push("pool1", LayerKind::MaxPool { kernel: 3, stride: 2 }, &[&x]);
    b.stage("Convolution 2", "1x1,64,s1,p0");
    let x = b.conv_bn_relu("conv2", &x, 64, 1, 1, 0, false);
    b.stage("Convolution 3", "3x3,64,s1,p1");
    let x = b.conv_bn_relu("conv3", &x, 64, 3, 1, 1, false);
    b.stage("Pooling 2", "max 3x3,s2");
    let x = b.push("pool2", LayerKind::MaxPool { kernel: 3, stride: 2 }, &[&x]);

    let spec1 = NuLiteBlockSpec::new(variant, 64)?;
    b.stage("NU-Lite-Block 1", format!("Block-{tag},{}", spec1.out_channels()));
    let block1 = build_nu_lite_block(&spec1, &x, "block1");
    b.extend(block1.layers);
    b.stage("Pooling 3", "max 3x3,s2");
    let x = b.push("pool3", LayerKind::MaxPool { kernel: 3, stride: 2 }, &[&block1.output]);

    let spec2 = NuLiteBlockSpec::new(variant, spec1.out_channels())?;
    b.stage("NU-Lite-Block 2", format!("Block-{tag},{}", spec2.out_channels()));
    let block2 = build_nu_lite_block(&spec2, &x, "block2");
    b.extend(block2.layers);

    b.stage("Pooling 4", "average pool");
    let x = b.push("pool4", LayerKind::GlobalAvgPool, &[&block2.output]);
    b.stage("Fully connected", format!("fc {num_classes},softmax"));
    let x = b.push("fc", LayerKind::Linear { out_features: num_classes }, &[&x]);
    b.push("prob", LayerKind::Softmax, &[&x]);

    let arch = match variant {
        Variant::A => Arch::NuLiteA,
        Variant::B => Arch::NuLiteB,
    };
    b.finish(arch, INPUT_DIMS, num_classes)
}

fn fire(b: &mut GraphBuilder, id: &str, input: &str, squeeze: usize, expand: usize) -> String {
    let s = b.conv_bn_relu(&format!("{id}_squeeze"), input, squeeze, 1, 1, 0, false);
    let e1 = b.conv_bn_relu(&format!("{id}_expand1x1"), &s, expand, 1, 1, 0, false);
    let e3 = b.conv_bn_relu(&format!("{id}_expand3x3"), &s, expand, 3, 1, 1, false);
    b.push(format!("{id}_concat"), LayerKind::Concat, &[&e1, &e3])
}

/// SqueezeNet v1.0: 7x7/96 stem, eight fire modules with max pooling after
/// conv1, fire4 and fire8, and a 1x1 classifier conv averaged to the class
/// scores. Every conv, the classifier included, is followed by batch norm
/// and ReLU and carries no bias. Dropout is omitted.
pub fn build_squeezenet(num_classes: usize) -> Result<NetGraph> {
    check_classes(num_classes)?;
    let mut b = GraphBuilder::new();
    b.stage("Input", "-");
    let data = b.push("data", LayerKind::Input, &[]);
    b.stage("Convolution 1", "7x7,96,s2,p0");
    let mut x = b.conv_bn_relu("conv1", &data, 96, 7, 2, 0, false);
    b.stage("Pooling 1", "max 3x3,s2");
    x = b.push("pool1", LayerKind::MaxPool { kernel: 3, stride: 2 }, &[&x]);

    let fires: [(usize, usize, usize); 8] = [
        (2, 16, 64),
        (3, 16, 64),
        (4, 32, 128),
        (5, 32, 128),
        (6, 48, 192),
        (7, 48, 192),
        (8, 64, 256),
        (9, 64, 256),
    ];
    for (idx, squeeze, expand) in fires {
        b.stage(format!("Fire {idx}"), format!("s{squeeze},e{expand}+{expand}"));
        x = fire(&mut b, &format!("fire{idx}"), &x, squeeze, expand);
        if idx == 4 || idx == 8 {
            b.stage(format!("Pooling {idx}"), "max 3x3,s2");
            x = b.push(format!("pool{idx}"), LayerKind::MaxPool { kernel: 3, stride: 2 }, &[&x]);
        }
    }

    b.stage("Convolution 10", format!("1x1,{num_classes},s1,p0"));
    let x = b.conv_bn_relu("conv10", &x, num_classes, 1, 1, 0, false);
    b.stage("Pooling 10", "average pool");
    let x = b.push("pool10", LayerKind::GlobalAvgPool, &[&x]);
    b.stage("Softmax", "softmax");
    b.push("prob", LayerKind::Softmax, &[&x]);
    b.finish(Arch::SqueezeNet, INPUT_DIMS, num_classes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stage_shape(g: &NetGraph, stage: &str) -> [usize; 3] {
        let i = g.layers().iter().rposition(|l| l.stage == stage).unwrap();
        g.shapes()[i]
    }

    #[test]
    fn nu_lite_a_shape_trace() {
        let g = build_nu_litenet(Variant::A, 50).unwrap();
        let trace: Vec<[usize; 3]> = [
            "Input",
            "Convolution 1",
            "Pooling 1",
            "Convolution 2",
            "Convolution 3",
            "Pooling 2",
            "NU-Lite-Block 1",
            "Pooling 3",
            "NU-Lite-Block 2",
            "Pooling 4",
            "Fully connected",
        ]
        .iter()
        .map(|s| stage_shape(&g, s))
        .collect();
        assert_eq!(
            trace,
            vec![
                [3, 224, 224],
                [64, 113, 113],
                [64, 56, 56],
                [64, 56, 56],
                [64, 56, 56],
                [64, 28, 28],
                [128, 28, 28],
                [128, 14, 14],
                [256, 14, 14],
                [256, 1, 1],
                [50, 1, 1],
            ]
        );
    }

    #[test]
    fn squeezenet_shapes() {
        let g = build_squeezenet(50).unwrap();
        assert_eq!(stage_shape(&g, "Convolution 1"), [96, 109, 109]);
        assert_eq!(stage_shape(&g, "Pooling 1"), [96, 54, 54]);
        assert_eq!(stage_shape(&g, "Pooling 4"), [256, 27, 27]);
        assert_eq!(stage_shape(&g, "Pooling 8"), [512, 13, 13]);
        assert_eq!(stage_shape(&g, "Fire 9"), [512, 13, 13]);
        assert_eq!(stage_shape(&g, "Softmax"), [50, 1, 1]);
    }

    #[test]
    fn squeezenet_param_formula() {
        // weights plus BN gamma/beta, no biases
        let fire = |cin: usize, s: usize, e: usize| cin * s + s * e + 9 * s * e + 2 * (s + 2 * e);
        let body = 3 * 49 * 96
            + 2 * 96
            + fire(96, 16, 64)
            + fire(128, 16, 64)
            + fire(128, 32, 128)
            + fire(256, 32, 128)
            + fire(256, 48, 192)
            + fire(384, 48, 192)
            + fire(384, 64, 256)
            + fire(512, 64, 256);
        for classes in [12, 50] {
            let total = crate::architectures::count_params(&build_squeezenet(classes).unwrap())
                .unwrap()
                .total_params;
            assert_eq!(total, body + 512 * classes + 2 * classes);
        }
        assert_eq!(body + 512 * 50 + 100, 764_100);
    }

    #[test]
    fn class_count_validation() {
        assert!(build_nu_litenet(Variant::A, 1).is_err());
        assert!(build_squeezenet(0).is_err());
    }
}
