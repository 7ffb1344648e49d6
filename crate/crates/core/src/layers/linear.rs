use super::gemm::{gemm, Mat};
use crate::error::{shape, Result};
use crate::tensor::{Rng, Tensor4};

/// Fully connected layer. `weight` is row-major `(out_features, in_features)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearParams {
    pub in_features: usize,
    pub out_features: usize,
    pub weight: Vec<f32>,
    pub bias: Vec<f32>,
}

impl LinearParams {
    /// He-normal weights, zero bias.
    pub fn init(in_features: usize, out_features: usize, rng: &mut Rng) -> Result<Self> {
        let w = Tensor4::randn(
            [out_features, in_features, 1, 1],
            (2.0 / in_features as f32).sqrt(),
            rng,
        )?;
        Self::new(in_features, out_features, w.into_vec(), vec![0.0; out_features])
    }

    pub fn new(in_features: usize, out_features: usize, weight: Vec<f32>, bias: Vec<f32>) -> Result<Self> {
        if weight.len() != in_features * out_features || bias.len() != out_features {
            return Err(shape(format!(
                "linear {in_features}->{out_features} got weight len {} and bias len {}",
                weight.len(),
                bias.len()
            )));
        }
        Ok(Self {
            in_features,
            out_features,
            weight,
            bias,
        })
    }

    pub fn param_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    fn check(&self, x: &Tensor4) -> Result<()> {
        if x.sample_len() != self.in_features {
            return Err(shape(format!(
                "linear expects {} features, got {} (dims {:?})",
                self.in_features,
                x.sample_len(),
                x.dims()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct LinearGrads {
    pub grad_x: Tensor4,
    pub grad_weight: Vec<f32>,
    pub grad_bias: Vec<f32>,
}

/// `y = x W^T + b` with `x` flattened to `(N, C*H*W)`; output is `(N, out, 1, 1)`.
pub fn linear_forward(x: &Tensor4, p: &LinearParams) -> Result<Tensor4> {
    p.check(x)?;
    let n = x.n();
    let mut out = vec![0.0; n * p.out_features];
    for row in out.chunks_mut(p.out_features) {
        row.copy_from_slice(&p.bias);
    }
    gemm(
        Mat::new(x.data(), n, p.in_features),
        Mat::t(&p.weight, p.in_features, p.out_features),
        1.0,
        &mut out,
    );
    Tensor4::from_vec([n, p.out_features, 1, 1], out)
}

pub fn linear_backward(x: &Tensor4, p: &LinearParams, grad_out: &Tensor4) -> Result<LinearGrads> {
    p.check(x)?;
    let n = x.n();
    if grad_out.n() != n || grad_out.sample_len() != p.out_features {
        return Err(shape(format!(
            "linear grad_out dims {:?} do not match ({n}, {})",
            grad_out.dims(),
            p.out_features
        )));
    }
    let g = grad_out.data();
    let mut grad_x = vec![0.0; n * p.in_features];
    gemm(
        Mat::new(g, n, p.out_features),
        Mat::new(&p.weight, p.out_features, p.in_features),
        0.0,
        &mut grad_x,
    );
    let mut grad_weight = vec![0.0; p.weight.len()];
    gemm(
        Mat::t(g, p.out_features, n),
        Mat::new(x.data(), n, p.in_features),
        0.0,
        &mut grad_weight,
    );
    let mut grad_bias = vec![0.0f32; p.out_features];
    for row in g.chunks(p.out_features) {
        grad_bias.iter_mut().zip(row).for_each(|(b, &v)| *b += v);
    }
    Ok(LinearGrads {
        grad_x: Tensor4::from_vec(x.dims(), grad_x)?,
        grad_weight,
        grad_bias,
    })
}
