//! Differentiable operators. Every operator is a pure function of its
//! inputs and an explicit parameter record; batch norm's train-mode forward
//! is the only one that writes state (its running statistics).

mod activation;
mod batchnorm;
mod conv;
pub(crate) mod gemm;
mod linear;
mod pool;
mod softmax;

pub use activation::{concat_channels, relu_backward, relu_forward, split_channels};
pub use batchnorm::{
    batchnorm_backward, batchnorm_forward, batchnorm_inference, BatchNormGrads, BatchNormParams, BN_EPSILON, BN_MOMENTUM,
};
pub use conv::{conv2d_backward, conv2d_forward, ConvGrads, ConvParams};
pub(crate) use conv::conv2d_backward_with;
pub use linear::{linear_backward, linear_forward, LinearGrads, LinearParams};
pub use pool::{global_avgpool_backward, global_avgpool_forward, maxpool_backward, maxpool_forward};
pub use softmax::{softmax, softmax_cross_entropy, SoftmaxLoss};

use crate::error::{invalid, shape, Result};

/// Batch norm behavior: batch statistics (train) or running statistics (eval).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// `floor((h + 2*pad - k) / stride) + 1`
pub fn conv2d_out_size(h: usize, k: usize, stride: usize, pad: usize) -> Result<usize> {
    if k == 0 || stride == 0 {
        return Err(invalid("kernel and stride must be >= 1"));
    }
    let padded = h + 2 * pad;
    if padded < k {
        return Err(shape(format!("kernel {k} larger than padded input {padded}")));
    }
    Ok((padded - k) / stride + 1)
}

/// Ceil-mode pooling size, `ceil((h - k) / stride) + 1`.
///
/// Requires `stride <= k` so the last window always starts inside the input.
pub fn pool_out_size(h: usize, k: usize, stride: usize) -> Result<usize> {
    if k == 0 || stride == 0 {
        return Err(invalid("kernel and stride must be >= 1"));
    }
    if stride > k {
        return Err(invalid(format!("pool stride {stride} exceeds kernel {k}")));
    }
    if h < k {
        return Err(shape(format!("pool kernel {k} larger than input {h}")));
    }
    Ok((h - k).div_ceil(stride) + 1)
}
