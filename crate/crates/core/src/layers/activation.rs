use crate::error::{shape, Result};
use crate::tensor::Tensor4;

pub fn relu_forward(x: &Tensor4) -> Tensor4 {
    let mut out = x.clone();
    out.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
    out
}

/// Passes gradient only where the forward input was strictly positive.
pub fn relu_backward(x: &Tensor4, grad_out: &Tensor4) -> Result<Tensor4> {
    if x.dims() != grad_out.dims() {
        return Err(shape(format!(
            "relu grad_out dims {:?} do not match input {:?}",
            grad_out.dims(),
            x.dims()
        )));
    }
    let mut grad_x = grad_out.clone();
    for (g, &v) in grad_x.data_mut().iter_mut().zip(x.data()) {
        if v <= 0.0 {
            *g = 0.0;
        }
    }
    Ok(grad_x)
}

/// Concatenates along the channel axis, preserving part order.
pub fn concat_channels(parts: &[&Tensor4]) -> Result<Tensor4> {
    let first = parts
        .first()
        .ok_or_else(|| shape("concat of an empty list"))?;
    let [n, _, h, w] = first.dims();
    for p in parts {
        if p.n() != n || p.h() != h || p.w() != w {
            return Err(shape(format!(
                "concat parts disagree on N/H/W: {:?} vs {:?}",
                first.dims(),
                p.dims()
            )));
        }
    }
    let channels: usize = parts.iter().map(|p| p.c()).sum();
    let mut data = Vec::with_capacity(n * channels * h * w);
    for i in 0..n {
        for p in parts {
            data.extend_from_slice(p.sample(i));
        }
    }
    Tensor4::from_vec([n, channels, h, w], data)
}

/// Inverse of [`concat_channels`]: splits `t` into consecutive channel groups.
pub fn split_channels(t: &Tensor4, channels: &[usize]) -> Result<Vec<Tensor4>> {
    if channels.iter().sum::<usize>() != t.c() {
        return Err(shape(format!(
            "split sizes {channels:?} do not sum to {} channels",
            t.c()
        )));
    }
    let [n, _, h, w] = t.dims();
    let hw = h * w;
    let mut parts: Vec<Vec<f32>> = channels.iter().map(|&c| Vec::with_capacity(n * c * hw)).collect();
    for i in 0..n {
        let sample = t.sample(i);
        let mut start = 0;
        for (buf, &c) in parts.iter_mut().zip(channels) {
            buf.extend_from_slice(&sample[start * hw..(start + c) * hw]);
            start += c;
        }
    }
    parts
        .into_iter()
        .zip(channels)
        .map(|(data, &c)| Tensor4::from_vec([n, c, h, w], data))
        .collect()
}
