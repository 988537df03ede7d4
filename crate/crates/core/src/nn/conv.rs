//! Raw 1-D convolution, transpose convolution and pooling kernels.
//!
//! Convolutions are stride 1 with zero "same" padding of (K-1)/2 per side,
//! so they preserve length. The whole batch is lowered to one matrix
//! product via im2col. The transpose convolution is the exact adjoint of
//! the convolution's linear map, realized by flipping the kernel and
//! swapping its channel axes, which lets both directions share one code
//! path.

use super::gemm::{gemm_nn, gemm_nt, gemm_tn};

/// cols[(c*K + kk) * (B*L) + (b*L + i)] = x_padded[b, c, i + kk - pad]
fn im2col(x: &[f64], batch: usize, ch: usize, len: usize, k: usize) -> Vec<f64> {
    let pad = (k - 1) / 2;
    let bl = batch * len;
    let mut cols = vec![0.0; ch * k * bl];
    for c in 0..ch {
        for kk in 0..k {
            let row = &mut cols[(c * k + kk) * bl..(c * k + kk + 1) * bl];
            for b in 0..batch {
                let src = &x[(b * ch + c) * len..(b * ch + c + 1) * len];
                let dst = &mut row[b * len..(b + 1) * len];
                // dst[i] = src[i + kk - pad] where in range
                let shift = kk as i64 - pad as i64;
                if shift >= 0 {
                    let s = shift as usize;
                    dst[..len - s].copy_from_slice(&src[s..]);
                } else {
                    let s = (-shift) as usize;
                    dst[s..].copy_from_slice(&src[..len - s]);
                }
            }
        }
    }
    cols
}

/// Scatter-add the column matrix back into input layout.
fn col2im(cols: &[f64], batch: usize, ch: usize, len: usize, k: usize, dx: &mut [f64]) {
    let pad = (k - 1) / 2;
    let bl = batch * len;
    for c in 0..ch {
        for kk in 0..k {
            let row = &cols[(c * k + kk) * bl..(c * k + kk + 1) * bl];
            let shift = kk as i64 - pad as i64;
            for b in 0..batch {
                let src = &row[b * len..(b + 1) * len];
                let dst = &mut dx[(b * ch + c) * len..(b * ch + c + 1) * len];
                if shift >= 0 {
                    let s = shift as usize;
                    for (d, v) in dst[s..].iter_mut().zip(&src[..len - s]) {
                        *d += v;
                    }
                } else {
                    let s = (-shift) as usize;
                    for (d, v) in dst[..len - s].iter_mut().zip(&src[s..]) {
                        *d += v;
                    }
                }
            }
        }
    }
}

/// out[b, co, i] = bias[co] + sum_{ci,kk} w[co, ci, kk] * x_pad[b, ci, i+kk-pad]
pub fn conv1d_forward(
    x: &[f64],
    w: &[f64],
    bias: &[f64],
    batch: usize,
    c_in: usize,
    c_out: usize,
    len: usize,
    k: usize,
) -> Vec<f64> {
    let bl = batch * len;
    let cols = im2col(x, batch, c_in, len, k);
    let mut tmp = vec![0.0; c_out * bl];
    gemm_nn(w, &cols, &mut tmp, c_out, c_in * k, bl);
    let mut out = vec![0.0; batch * c_out * len];
    for b in 0..batch {
        for co in 0..c_out {
            let src = &tmp[co * bl + b * len..co * bl + (b + 1) * len];
            let dst = &mut out[(b * c_out + co) * len..(b * c_out + co + 1) * len];
            let bv = bias[co];
            for (d, v) in dst.iter_mut().zip(src) {
                *d = v + bv;
            }
        }
    }
    out
}

/// Gradients of the convolution: returns (dx, dw, dbias).
pub fn conv1d_backward(
    x: &[f64],
    w: &[f64],
    dout: &[f64],
    batch: usize,
    c_in: usize,
    c_out: usize,
    len: usize,
    k: usize,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let bl = batch * len;
    // regroup dout into [c_out, B*L]
    let mut dtmp = vec![0.0; c_out * bl];
    for b in 0..batch {
        for co in 0..c_out {
            let src = &dout[(b * c_out + co) * len..(b * c_out + co + 1) * len];
            dtmp[co * bl + b * len..co * bl + (b + 1) * len].copy_from_slice(src);
        }
    }
    let cols = im2col(x, batch, c_in, len, k);

    let mut dw = vec![0.0; c_out * c_in * k];
    gemm_nt(&dtmp, &cols, &mut dw, c_out, bl, c_in * k);

    let mut dcols = vec![0.0; c_in * k * bl];
    gemm_tn(w, &dtmp, &mut dcols, c_in * k, c_out, bl);
    let mut dx = vec![0.0; batch * c_in * len];
    col2im(&dcols, batch, c_in, len, k, &mut dx);

    let mut dbias = vec![0.0; c_out];
    for co in 0..c_out {
        dbias[co] = dtmp[co * bl..(co + 1) * bl].iter().sum();
    }
    (dx, dw, dbias)
}

/// w[ca, cb, kk] -> out[cb, ca, K-1-kk]; its own inverse up to axis naming.
pub fn flip_swap_kernel(w: &[f64], c_a: usize, c_b: usize, k: usize) -> Vec<f64> {
    let mut out = vec![0.0; w.len()];
    for ca in 0..c_a {
        for cb in 0..c_b {
            for kk in 0..k {
                out[(cb * c_a + ca) * k + (k - 1 - kk)] = w[(ca * c_b + cb) * k + kk];
            }
        }
    }
    out
}

/// Adjoint of `conv1d_forward`'s linear map, plus bias.
/// x: [B, c_a, L]; w: [c_a, c_b, K]; output [B, c_b, L].
pub fn conv1d_transpose_forward(
    x: &[f64],
    w: &[f64],
    bias: &[f64],
    batch: usize,
    c_a: usize,
    c_b: usize,
    len: usize,
    k: usize,
) -> Vec<f64> {
    let wf = flip_swap_kernel(w, c_a, c_b, k);
    conv1d_forward(x, &wf, bias, batch, c_a, c_b, len, k)
}

pub fn conv1d_transpose_backward(
    x: &[f64],
    w: &[f64],
    dout: &[f64],
    batch: usize,
    c_a: usize,
    c_b: usize,
    len: usize,
    k: usize,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let wf = flip_swap_kernel(w, c_a, c_b, k);
    let (dx, dwf, dbias) = conv1d_backward(x, &wf, dout, batch, c_a, c_b, len, k);
    let dw = flip_swap_kernel(&dwf, c_b, c_a, k);
    (dx, dw, dbias)
}

/// Window-2 stride-2 max pooling; odd trailing element is dropped.
/// Returns the pooled values and, per output element, the source index
/// within the length axis (ties break to the first position).
pub fn max_pool_forward(
    x: &[f64],
    batch: usize,
    ch: usize,
    len: usize,
) -> (Vec<f64>, Vec<u32>) {
    let out_len = len / 2;
    let mut out = vec![0.0; batch * ch * out_len];
    let mut idx = vec![0u32; batch * ch * out_len];
    for bc in 0..batch * ch {
        let src = &x[bc * len..(bc + 1) * len];
        let o = &mut out[bc * out_len..(bc + 1) * out_len];
        let ix = &mut idx[bc * out_len..(bc + 1) * out_len];
        for i in 0..out_len {
            let (a, b) = (src[2 * i], src[2 * i + 1]);
            if b > a {
                o[i] = b;
                ix[i] = (2 * i + 1) as u32;
            } else {
                o[i] = a;
                ix[i] = (2 * i) as u32;
            }
        }
    }
    (out, idx)
}

pub fn max_pool_backward(
    dout: &[f64],
    idx: &[u32],
    batch: usize,
    ch: usize,
    len: usize,
) -> Vec<f64> {
    let out_len = len / 2;
    let mut dx = vec![0.0; batch * ch * len];
    for bc in 0..batch * ch {
        let d = &dout[bc * out_len..(bc + 1) * out_len];
        let ix = &idx[bc * out_len..(bc + 1) * out_len];
        let dst = &mut dx[bc * len..(bc + 1) * len];
        for i in 0..out_len {
            dst[ix[i] as usize] += d[i];
        }
    }
    dx
}

/// Nearest-neighbor duplication: [.., L] -> [.., 2L].
pub fn unpool_dup_forward(x: &[f64], rows: usize, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * len * 2];
    for r in 0..rows {
        let src = &x[r * len..(r + 1) * len];
        let dst = &mut out[r * len * 2..(r + 1) * len * 2];
        for i in 0..len {
            dst[2 * i] = src[i];
            dst[2 * i + 1] = src[i];
        }
    }
    out
}

pub fn unpool_dup_backward(dout: &[f64], rows: usize, len: usize) -> Vec<f64> {
    let mut dx = vec![0.0; rows * len];
    for r in 0..rows {
        let src = &dout[r * len * 2..(r + 1) * len * 2];
        let dst = &mut dx[r * len..(r + 1) * len];
        for i in 0..len {
            dst[i] = src[2 * i] + src[2 * i + 1];
        }
    }
    dx
}

/// Scatter pooled values back to their recorded positions, zero elsewhere.
pub fn unpool_idx_forward(
    x: &[f64],
    idx: &[u32],
    batch: usize,
    ch: usize,
    out_len: usize,
) -> Vec<f64> {
    let in_len = x.len() / (batch * ch);
    let mut out = vec![0.0; batch * ch * out_len];
    for bc in 0..batch * ch {
        let src = &x[bc * in_len..(bc + 1) * in_len];
        let ix = &idx[bc * in_len..(bc + 1) * in_len];
        let dst = &mut out[bc * out_len..(bc + 1) * out_len];
        for i in 0..in_len {
            dst[ix[i] as usize] = src[i];
        }
    }
    out
}

pub fn unpool_idx_backward(
    dout: &[f64],
    idx: &[u32],
    batch: usize,
    ch: usize,
    out_len: usize,
    in_len: usize,
) -> Vec<f64> {
    let mut dx = vec![0.0; batch * ch * in_len];
    for bc in 0..batch * ch {
        let d = &dout[bc * out_len..(bc + 1) * out_len];
        let ix = &idx[bc * in_len..(bc + 1) * in_len];
        let dst = &mut dx[bc * in_len..(bc + 1) * in_len];
        for i in 0..in_len {
            dst[i] = d[ix[i] as usize];
        }
    }
    dx
}
