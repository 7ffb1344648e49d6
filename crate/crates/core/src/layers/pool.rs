use super::pool_out_size;
use crate::error::{shape, Result};
use crate::tensor::Tensor4;

/// Ceil-mode max pooling. Windows overhanging the bottom/right edge are
/// truncated to their in-bounds elements. Returns the output together with
/// the flat input offset of every selected maximum (first maximum wins ties).
pub fn maxpool_forward(x: &Tensor4, kernel: usize, stride: usize) -> Result<(Tensor4, Vec<usize>)> {
    let (h, w) = (x.h(), x.w());
    let oh = pool_out_size(h, kernel, stride)?;
    let ow = pool_out_size(w, kernel, stride)?;
    let mut out = Tensor4::zeros([x.n(), x.c(), oh, ow])?;
    let mut argmax = vec![0usize; out.len()];
    let src = x.data();
    let dst = out.data_mut();

    for plane in 0..x.n() * x.c() {
        let base = plane * h * w;
        for oy in 0..oh {
            let y0 = oy * stride;
            let y1 = (y0 + kernel).min(h);
            for ox in 0..ow {
                let x0 = ox * stride;
                let x1 = (x0 + kernel).min(w);
                let mut best = base + y0 * w + x0;
                for iy in y0..y1 {
                    for ix in x0..x1 {
                        let off = base + iy * w + ix;
                        if src[off] > src[best] {
                            best = off;
                        }
                    }
                }
                let o = (plane * oh + oy) * ow + ox;
                dst[o] = src[best];
                argmax[o] = best;
            }
        }
    }
    Ok((out, argmax))
}

/// Routes each output gradient to its recorded argmax; overlapping windows accumulate.
pub fn maxpool_backward(argmax: &[usize], grad_out: &Tensor4, in_dims: [usize; 4]) -> Result<Tensor4> {
    if argmax.len() != grad_out.len() {
        return Err(shape(format!(
            "maxpool backward: {} indices for {} gradients",
            argmax.len(),
            grad_out.len()
        )));
    }
    let mut grad_x = Tensor4::zeros(in_dims)?;
    let gx = grad_x.data_mut();
    for (&idx, &g) in argmax.iter().zip(grad_out.data()) {
        let slot = gx
            .get_mut(idx)
            .ok_or_else(|| shape(format!("maxpool argmax {idx} out of range for {in_dims:?}")))?;
        *slot += g;
    }
    Ok(grad_x)
}

/// Spatial mean per channel, `(N, C, 1, 1)`.
pub fn global_avgpool_forward(x: &Tensor4) -> Result<Tensor4> {
    let hw = x.h() * x.w();
    let data = x
        .data()
        .chunks(hw)
        .map(|plane| (plane.iter().map(|&v| v as f64).sum::<f64>() / hw as f64) as f32)
        .collect();
    Tensor4::from_vec([x.n(), x.c(), 1, 1], data)
}

pub fn global_avgpool_backward(grad_out: &Tensor4, in_dims: [usize; 4]) -> Result<Tensor4> {
    let [n, c, h, w] = in_dims;
    if grad_out.dims() != [n, c, 1, 1] {
        return Err(shape(format!(
            "avgpool grad_out dims {:?} do not match input {in_dims:?}",
            grad_out.dims()
        )));
    }
    let hw = h * w;
    let scale = 1.0 / hw as f32;
    let mut grad_x = Tensor4::zeros(in_dims)?;
    for (plane, &g) in grad_x.data_mut().chunks_mut(hw).zip(grad_out.data()) {
        plane.fill(g * scale);
    }
    Ok(grad_x)
}
