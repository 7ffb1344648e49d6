use rayon::prelude::*;

use super::conv2d_out_size;
use super::gemm::{gemm, Mat};
use crate::error::{invalid, shape, Result};
use crate::tensor::{Rng, Tensor4};

/// Square-kernel 2-D convolution with zero padding.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvParams {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pad: usize,
    /// `(out_channels, in_channels, kernel, kernel)`
    pub weight: Tensor4,
    pub bias: Option<Vec<f32>>,
}

impl ConvParams {
    /// He-normal weights, `std = sqrt(2 / (in_channels * k * k))`, zero bias.
    pub fn init(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        pad: usize,
        bias: bool,
        rng: &mut Rng,
    ) -> Result<Self> {
        let fan_in = (in_channels * kernel * kernel) as f32;
        let weight = Tensor4::randn(
            [out_channels, in_channels, kernel, kernel],
            (2.0 / fan_in).sqrt(),
            rng,
        )?;
        let bias = bias.then(|| vec![0.0; out_channels]);
        Self::new(weight, bias, stride, pad)
    }

    pub fn new(weight: Tensor4, bias: Option<Vec<f32>>, stride: usize, pad: usize) -> Result<Self> {
        let [out_channels, in_channels, kh, kw] = weight.dims();
        if kh != kw {
            return Err(invalid(format!("conv kernel must be square, got {kh}x{kw}")));
        }
        if stride == 0 {
            return Err(invalid("conv stride must be >= 1"));
        }
        if let Some(b) = &bias {
            if b.len() != out_channels {
                return Err(shape(format!(
                    "conv bias has {} entries for {out_channels} output channels",
                    b.len()
                )));
            }
        }
        Ok(Self {
            in_channels,
            out_channels,
            kernel: kh,
            stride,
            pad,
            weight,
            bias,
        })
    }

    pub fn param_count(&self) -> usize {
        self.weight.len() + self.bias.as_ref().map_or(0, Vec::len)
    }

    fn out_hw(&self, x: &Tensor4) -> Result<(usize, usize)> {
        if x.c() != self.in_channels {
            return Err(shape(format!(
                "conv expects {} input channels, got {}",
                self.in_channels,
                x.c()
            )));
        }
        Ok((
            conv2d_out_size(x.h(), self.kernel, self.stride, self.pad)?,
            conv2d_out_size(x.w(), self.kernel, self.stride, self.pad)?,
        ))
    }

    fn is_pointwise(&self) -> bool {
        self.kernel == 1 && self.stride == 1 && self.pad == 0
    }
}

#[derive(Clone, Debug)]
pub struct ConvGrads {
    pub grad_x: Tensor4,
    pub grad_weight: Tensor4,
    pub grad_bias: Option<Vec<f32>>,
}

/// Geometry of one sample's im2col lowering.
#[derive(Clone, Copy)]
struct Lowering {
    channels: usize,
    h: usize,
    w: usize,
    k: usize,
    stride: usize,
    pad: usize,
    out_h: usize,
    out_w: usize,
}

impl Lowering {
    fn rows(&self) -> usize {
        self.channels * self.k * self.k
    }

    fn cols(&self) -> usize {
        self.out_h * self.out_w
    }

    fn im2col(&self, x: &[f32], col: &mut [f32]) {
        let Lowering { channels, h, w, k, stride, pad, out_h, out_w } = *self;
        let p = out_h * out_w;
        for c in 0..channels {
            let plane = &x[c * h * w..(c + 1) * h * w];
            for ky in 0..k {
                for kx in 0..k {
                    let row = (c * k + ky) * k + kx;
                    let dst = &mut col[row * p..(row + 1) * p];
                    for oy in 0..out_h {
                        let iy = (oy * stride + ky) as isize - pad as isize;
                        let line = &mut dst[oy * out_w..(oy + 1) * out_w];
                        if iy < 0 || iy >= h as isize {
                            line.fill(0.0);
                            continue;
                        }
                        let src = &plane[iy as usize * w..(iy as usize + 1) * w];
                        for (ox, v) in line.iter_mut().enumerate() {
                            let ix = (ox * stride + kx) as isize - pad as isize;
                            *v = if ix >= 0 && ix < w as isize { src[ix as usize] } else { 0.0 };
                        }
                    }
                }
            }
        }
    }

    fn col2im(&self, col: &[f32], x: &mut [f32]) {
        let Lowering { channels, h, w, k, stride, pad, out_h, out_w } = *self;
        let p = out_h * out_w;
        for c in 0..channels {
            let plane = &mut x[c * h * w..(c + 1) * h * w];
            for ky in 0..k {
                for kx in 0..k {
                    let row = (c * k + ky) * k + kx;
                    let src = &col[row * p..(row + 1) * p];
                    for oy in 0..out_h {
                        let iy = (oy * stride + ky) as isize - pad as isize;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        let dst = &mut plane[iy as usize * w..(iy as usize + 1) * w];
                        for (ox, &g) in src[oy * out_w..(oy + 1) * out_w].iter().enumerate() {
                            let ix = (ox * stride + kx) as isize - pad as isize;
                            if ix >= 0 && ix < w as isize {
                                dst[ix as usize] += g;
                            }
                        }
                    }
                }
            }
        }
    }
}

fn lowering(x: &Tensor4, p: &ConvParams, out_h: usize, out_w: usize) -> Lowering {
    Lowering {
        channels: x.c(),
        h: x.h(),
        w: x.w(),
        k: p.kernel,
        stride: p.stride,
        pad: p.pad,
        out_h,
        out_w,
    }
}

/// Forward convolution via per-sample im2col + GEMM.
pub fn conv2d_forward(x: &Tensor4, p: &ConvParams) -> Result<Tensor4> {
    let (out_h, out_w) = p.out_hw(x)?;
    let low = lowering(x, p, out_h, out_w);
    let mut out = Tensor4::zeros([x.n(), p.out_channels, out_h, out_w])?;
    let out_len = out.sample_len();
    let in_len = x.sample_len();
    let (rows, cols) = (low.rows(), low.cols());
    let weight = p.weight.data();

    out.data_mut()
        .par_chunks_mut(out_len)
        .zip(x.data().par_chunks(in_len))
        .for_each(|(dst, src)| {
            let mut scratch;
            let col: &[f32] = if p.is_pointwise() {
                src
            } else {
                scratch = vec![0.0; rows * cols];
                low.im2col(src, &mut scratch);
                &scratch
            };
            gemm(
                Mat::new(weight, p.out_channels, rows),
                Mat::new(col, rows, cols),
                0.0,
                dst,
            );
            if let Some(bias) = &p.bias {
                for (plane, &b) in dst.chunks_mut(cols).zip(bias) {
                    plane.iter_mut().for_each(|v| *v += b);
                }
            }
        });
    Ok(out)
}

/// Gradients of a convolution with respect to input, weight and bias.
///
/// Per-sample weight gradients are computed independently and then summed
/// in ascending sample order, so the result does not depend on scheduling.
pub fn conv2d_backward(x: &Tensor4, p: &ConvParams, grad_out: &Tensor4) -> Result<ConvGrads> {
    conv2d_backward_with(x, p, grad_out, true)
}

/// As [`conv2d_backward`]; with `need_grad_x == false` the input gradient
/// is left as zeros and its GEMM is skipped.
pub(crate) fn conv2d_backward_with(x: &Tensor4, p: &ConvParams, grad_out: &Tensor4, need_grad_x: bool) -> Result<ConvGrads> {
    let (out_h, out_w) = p.out_hw(x)?;
    let expected = [x.n(), p.out_channels, out_h, out_w];
    if grad_out.dims() != expected {
        return Err(shape(format!(
            "conv grad_out dims {:?} do not match forward output {expected:?}",
            grad_out.dims()
        )));
    }
    let low = lowering(x, p, out_h, out_w);
    let (rows, cols) = (low.rows(), low.cols());
    let weight = p.weight.data();
    let mut grad_x = Tensor4::zeros(x.dims())?;
    let in_len = x.sample_len();
    let out_len = grad_out.sample_len();

    let partials: Vec<Vec<f32>> = grad_x
        .data_mut()
        .par_chunks_mut(in_len)
        .zip(x.data().par_chunks(in_len))
        .zip(grad_out.data().par_chunks(out_len))
        .map(|((gx, src), g)| {
            let mut gw = vec![0.0; p.out_channels * rows];
            if p.is_pointwise() {
                gemm(Mat::new(g, p.out_channels, cols), Mat::t(src, cols, rows), 0.0, &mut gw);
                if need_grad_x {
                    gemm(Mat::t(weight, rows, p.out_channels), Mat::new(g, p.out_channels, cols), 0.0, gx);
                }
            } else {
                let mut col = vec![0.0; rows * cols];
                low.im2col(src, &mut col);
                gemm(Mat::new(g, p.out_channels, cols), Mat::t(&col, cols, rows), 0.0, &mut gw);
                if need_grad_x {
                    gemm(Mat::t(weight, rows, p.out_channels), Mat::new(g, p.out_channels, cols), 0.0, &mut col);
                    low.col2im(&col, gx);
                }
            }
            gw
        })
        .collect();

    let mut grad_weight = Tensor4::zeros(p.weight.dims())?;
    for part in &partials {
        for (acc, &v) in grad_weight.data_mut().iter_mut().zip(part) {
            *acc += v;
        }
    }

    let grad_bias = p.bias.as_ref().map(|_| {
        let mut gb = vec![0.0f64; p.out_channels];
        for sample in grad_out.data().chunks(out_len) {
            for (acc, plane) in gb.iter_mut().zip(sample.chunks(cols)) {
                *acc += plane.iter().map(|&v| v as f64).sum::<f64>();
            }
        }
        gb.into_iter().map(|v| v as f32).collect()
    });

    Ok(ConvGrads {
        grad_x,
        grad_weight,
        grad_bias,
    })
}
