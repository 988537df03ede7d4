//! Reverse-mode differentiation over a linear tape.
//!
//! Building a forward pass records one node per operation; `backward` walks
//! the tape once in reverse, handing each node its output gradient and
//! letting it push gradients to its inputs. Nodes are identified by index,
//! so the whole engine is two parallel vectors and no graph bookkeeping.

use super::conv;
use super::gemm::{gemm_nn, gemm_nt, gemm_tn};
use super::params::ParameterSet;
use super::tensor::Tensor;
use crate::rng::Rng;

/// Handle to a tape node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(pub(crate) usize);

/// Whether batch statistics (train) or running statistics (eval) drive
/// batch normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Per-node gradients produced by a backward pass.
pub struct Grads {
    slots: Vec<Option<Tensor>>,
}

impl Grads {
    fn add(&mut self, id: usize, g: Tensor) {
        match &mut self.slots[id] {
            Some(t) => t.add_assign(&g),
            slot @ None => *slot = Some(g),
        }
    }

    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.slots[v.0].as_ref()
    }
}

type BackFn = Box<dyn Fn(&[Tensor], &Tensor, &mut Grads)>;

#[derive(Default)]
pub struct Tape {
    values: Vec<Tensor>,
    backs: Vec<Option<BackFn>>,
    bindings: Vec<(usize, String)>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, value: Tensor, back: Option<BackFn>) -> Var {
        debug_assert!(value.all_finite(), "non-finite value entering the tape");
        let id = self.values.len();
        self.values.push(value);
        self.backs.push(back);
        Var(id)
    }

    /// A leaf that no gradient flows past.
    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(t, None)
    }

    /// A leaf bound to a named parameter; `apply_grads` accumulates its
    /// gradient back into the parameter set.
    pub fn param(&mut self, params: &ParameterSet, name: &str) -> Var {
        let v = params.value(name).clone();
        let id = self.values.len();
        self.values.push(v);
        self.backs.push(None);
        self.bindings.push((id, name.to_string()));
        Var(id)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.values[v.0]
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.values[v.0].shape()
    }

    /// Reverse pass from a single-element loss node.
    pub fn backward(&self, loss: Var) -> Grads {
        assert_eq!(
            self.values[loss.0].len(),
            1,
            "backward requires a scalar loss"
        );
        let mut grads = Grads {
            slots: vec![None; self.values.len()],
        };
        grads.slots[loss.0] = Some(Tensor::new(
            self.values[loss.0].shape().to_vec(),
            vec![1.0],
        ));
        for id in (0..=loss.0).rev() {
            let Some(back) = &self.backs[id] else { continue };
            let Some(g) = grads.slots[id].take() else {
                continue;
            };
            back(&self.values, &g, &mut grads);
        }
        grads
    }

    /// Accumulate gradients of bound parameters into the set. Bindings whose
    /// names are not in `params` are skipped, so a graph can mix parameters
    /// from several sets (generator vs discriminator) and each optimizer
    /// step applies only its own player's gradients.
    pub fn apply_grads(&self, grads: &Grads, params: &mut ParameterSet) {
        for (id, name) in &self.bindings {
            if !params.contains(name) {
                continue;
            }
            if let Some(g) = grads.slots[*id].as_ref() {
                let p = params.get_mut(name);
                p.grad.add_assign(g);
            }
        }
    }

    // ---- shape ops -------------------------------------------------------

    pub fn reshape(&mut self, x: Var, shape: Vec<usize>) -> Var {
        let old = self.values[x.0].shape().to_vec();
        let v = self.values[x.0].clone().reshaped(shape);
        self.push(
            v,
            Some(Box::new(move |_vals, g, grads| {
                grads.add(x.0, g.clone().reshaped(old.clone()));
            })),
        )
    }

    /// Stack along the first dimension; all inputs share trailing dims.
    pub fn concat_rows(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty());
        let trailing: Vec<usize> = self.values[parts[0].0].shape()[1..].to_vec();
        let mut rows = 0;
        let mut data = Vec::new();
        let mut splits = Vec::new();
        for &p in parts {
            let t = &self.values[p.0];
            assert_eq!(&t.shape()[1..], trailing.as_slice(), "concat_rows shape mismatch");
            rows += t.shape()[0];
            splits.push((p.0, t.shape().to_vec(), data.len()));
            data.extend_from_slice(t.data());
        }
        let mut shape = vec![rows];
        shape.extend_from_slice(&trailing);
        self.push(
            Tensor::new(shape, data),
            Some(Box::new(move |_vals, g, grads| {
                for (id, shape, offset) in &splits {
                    let n: usize = shape.iter().product();
                    let piece = g.data()[*offset..offset + n].to_vec();
                    grads.add(*id, Tensor::new(shape.clone(), piece));
                }
            })),
        )
    }

    /// Rows lo..hi of the first dimension.
    pub fn slice_rows(&mut self, x: Var, lo: usize, hi: usize) -> Var {
        let t = &self.values[x.0];
        let shape = t.shape().to_vec();
        assert!(lo < hi && hi <= shape[0]);
        let stride: usize = shape[1..].iter().product();
        let data = t.data()[lo * stride..hi * stride].to_vec();
        let mut out_shape = vec![hi - lo];
        out_shape.extend_from_slice(&shape[1..]);
        let full = shape.clone();
        self.push(
            Tensor::new(out_shape, data),
            Some(Box::new(move |_vals, g, grads| {
                let mut dx = Tensor::zeros(full.clone());
                dx.data_mut()[lo * stride..hi * stride].copy_from_slice(g.data());
                grads.add(x.0, dx);
            })),
        )
    }

    /// Columns lo..hi of a [B, n] tensor.
    pub fn slice_cols(&mut self, x: Var, lo: usize, hi: usize) -> Var {
        let t = &self.values[x.0];
        assert_eq!(t.shape().len(), 2);
        let (b, n) = (t.shape()[0], t.shape()[1]);
        assert!(lo < hi && hi <= n);
        let mut data = Vec::with_capacity(b * (hi - lo));
        for row in 0..b {
            data.extend_from_slice(&t.data()[row * n + lo..row * n + hi]);
        }
        self.push(
            Tensor::new(vec![b, hi - lo], data),
            Some(Box::new(move |_vals, g, grads| {
                let w = hi - lo;
                let mut dx = Tensor::zeros(vec![b, n]);
                for row in 0..b {
                    dx.data_mut()[row * n + lo..row * n + hi]
                        .copy_from_slice(&g.data()[row * w..(row + 1) * w]);
                }
                grads.add(x.0, dx);
            })),
        )
    }

    /// Concatenate two [B, *] tensors along the second dimension.
    pub fn concat_cols(&mut self, a: Var, b: Var) -> Var {
        let (ta, tb) = (&self.values[a.0], &self.values[b.0]);
        assert_eq!(ta.shape().len(), 2);
        assert_eq!(tb.shape().len(), 2);
        assert_eq!(ta.shape()[0], tb.shape()[0], "concat_cols batch mismatch");
        let (rows, na, nb) = (ta.shape()[0], ta.shape()[1], tb.shape()[1]);
        let mut data = Vec::with_capacity(rows * (na + nb));
        for row in 0..rows {
            data.extend_from_slice(&ta.data()[row * na..(row + 1) * na]);
            data.extend_from_slice(&tb.data()[row * nb..(row + 1) * nb]);
        }
        self.push(
            Tensor::new(vec![rows, na + nb], data),
            Some(Box::new(move |_vals, g, grads| {
                let n = na + nb;
                let mut da = Tensor::zeros(vec![rows, na]);
                let mut db = Tensor::zeros(vec![rows, nb]);
                for row in 0..rows {
                    da.data_mut()[row * na..(row + 1) * na]
                        .copy_from_slice(&g.data()[row * n..row * n + na]);
                    db.data_mut()[row * nb..(row + 1) * nb]
                        .copy_from_slice(&g.data()[row * n + na..(row + 1) * n]);
                }
                grads.add(a.0, da);
                grads.add(b.0, db);
            })),
        )
    }

    // ---- elementwise -----------------------------------------------------

    fn binary(
        &mut self,
        a: Var,
        b: Var,
        f: impl Fn(f64, f64) -> f64,
        back: impl Fn(&[Tensor], &Tensor, &mut Grads) + 'static,
    ) -> Var {
        let (ta, tb) = (&self.values[a.0], &self.values[b.0]);
        assert_eq!(ta.shape(), tb.shape(), "elementwise shape mismatch");
        let data = ta
            .data()
            .iter()
            .zip(tb.data())
            .map(|(&x, &y)| f(x, y))
            .collect();
        self.push(
            Tensor::new(ta.shape().to_vec(), data),
            Some(Box::new(back)),
        )
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.binary(a, b, |x, y| x + y, move |_vals, g, grads| {
            grads.add(a.0, g.clone());
            grads.add(b.0, g.clone());
        })
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.binary(a, b, |x, y| x - y, move |_vals, g, grads| {
            grads.add(a.0, g.clone());
            let neg = Tensor::new(g.shape().to_vec(), g.data().iter().map(|v| -v).collect());
            grads.add(b.0, neg);
        })
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.binary(a, b, |x, y| x * y, move |vals, g, grads| {
            let (ta, tb) = (&vals[a.0], &vals[b.0]);
            let da = Tensor::new(
                g.shape().to_vec(),
                g.data().iter().zip(tb.data()).map(|(&gv, &y)| gv * y).collect(),
            );
            let db = Tensor::new(
                g.shape().to_vec(),
                g.data().iter().zip(ta.data()).map(|(&gv, &x)| gv * x).collect(),
            );
            grads.add(a.0, da);
            grads.add(b.0, db);
        })
    }

    fn unary(
        &mut self,
        x: Var,
        f: impl Fn(f64) -> f64,
        back: impl Fn(&[Tensor], &Tensor, &mut Grads) + 'static,
    ) -> Var {
        let t = &self.values[x.0];
        let data = t.data().iter().map(|&v| f(v)).collect();
        self.push(Tensor::new(t.shape().to_vec(), data), Some(Box::new(back)))
    }

    pub fn scale(&mut self, x: Var, c: f64) -> Var {
        self.unary(x, |v| c * v, move |_vals, g, grads| {
            grads.add(
                x.0,
                Tensor::new(g.shape().to_vec(), g.data().iter().map(|v| c * v).collect()),
            );
        })
    }

    pub fn add_const(&mut self, x: Var, c: f64) -> Var {
        self.unary(x, |v| v + c, move |_vals, g, grads| {
            grads.add(x.0, g.clone());
        })
    }

    pub fn exp(&mut self, x: Var) -> Var {
        let out = self.unary(x, f64::exp, move |_, _, _| {});
        // rebuild backward with access to the output value
        let out_id = out.0;
        self.backs[out_id] = Some(Box::new(move |vals, g, grads| {
            let d = vals[out_id]
                .data()
                .iter()
                .zip(g.data())
                .map(|(&y, &gv)| y * gv)
                .collect();
            grads.add(x.0, Tensor::new(g.shape().to_vec(), d));
        }));
        out
    }

    pub fn clamp(&mut self, x: Var, lo: f64, hi: f64) -> Var {
        self.unary(x, |v| v.clamp(lo, hi), move |vals, g, grads| {
            let d = vals[x.0]
                .data()
                .iter()
                .zip(g.data())
                .map(|(&v, &gv)| if v > lo && v < hi { gv } else { 0.0 })
                .collect();
            grads.add(x.0, Tensor::new(g.shape().to_vec(), d));
        })
    }

    pub fn relu(&mut self, x: Var) -> Var {
        self.unary(x, |v| v.max(0.0), move |vals, g, grads| {
            let d = vals[x.0]
                .data()
                .iter()
                .zip(g.data())
                .map(|(&v, &gv)| if v > 0.0 { gv } else { 0.0 })
                .collect();
            grads.add(x.0, Tensor::new(g.shape().to_vec(), d));
        })
    }

    pub fn leaky_relu(&mut self, x: Var, alpha: f64) -> Var {
        self.unary(
            x,
            move |v| if v > 0.0 { v } else { alpha * v },
            move |vals, g, grads| {
                let d = vals[x.0]
                    .data()
                    .iter()
                    .zip(g.data())
                    .map(|(&v, &gv)| if v > 0.0 { gv } else { alpha * gv })
                    .collect();
                grads.add(x.0, Tensor::new(g.shape().to_vec(), d));
            },
        )
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        let t = &self.values[x.0];
        let data: Vec<f64> = t
            .data()
            .iter()
            .map(|&v| {
                if v >= 0.0 {
                    1.0 / (1.0 + (-v).exp())
                } else {
                    let e = v.exp();
                    e / (1.0 + e)
                }
            })
            .collect();
        let shape = t.shape().to_vec();
        let out_id = self.values.len();
        self.push(
            Tensor::new(shape, data),
            Some(Box::new(move |vals, g, grads| {
                let d = vals[out_id]
                    .data()
                    .iter()
                    .zip(g.data())
                    .map(|(&s, &gv)| s * (1.0 - s) * gv)
                    .collect();
                grads.add(x.0, Tensor::new(g.shape().to_vec(), d));
            })),
        )
    }

    /// Row-wise softmax of a [B, K] tensor.
    pub fn softmax(&mut self, x: Var) -> Var {
        let t = &self.values[x.0];
        assert_eq!(t.shape().len(), 2);
        let (b, k) = (t.shape()[0], t.shape()[1]);
        let mut data = vec![0.0; b * k];
        for row in 0..b {
            let src = &t.data()[row * k..(row + 1) * k];
            let max = src.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let dst = &mut data[row * k..(row + 1) * k];
            let mut sum = 0.0;
            for (d, &v) in dst.iter_mut().zip(src) {
                *d = (v - max).exp();
                sum += *d;
            }
            for d in dst.iter_mut() {
                *d /= sum;
            }
        }
        let out_id = self.values.len();
        self.push(
            Tensor::new(vec![b, k], data),
            Some(Box::new(move |vals, g, grads| {
                let s = &vals[out_id];
                let mut d = vec![0.0; b * k];
                for row in 0..b {
                    let sv = &s.data()[row * k..(row + 1) * k];
                    let gv = &g.data()[row * k..(row + 1) * k];
                    let dot: f64 = sv.iter().zip(gv).map(|(&a, &b)| a * b).sum();
                    for j in 0..k {
                        d[row * k + j] = sv[j] * (gv[j] - dot);
                    }
                }
                grads.add(x.0, Tensor::new(vec![b, k], d));
            })),
        )
    }

    // ---- linear layers ---------------------------------------------------

    /// x: [B, n], w: [m, n], b: [m] -> [B, m]
    pub fn dense(&mut self, x: Var, w: Var, b: Var) -> Var {
        let (tx, tw, tb) = (&self.values[x.0], &self.values[w.0], &self.values[b.0]);
        assert_eq!(tx.shape().len(), 2, "dense input must be [B, n]");
        let (batch, n) = (tx.shape()[0], tx.shape()[1]);
        let (m, wn) = (tw.shape()[0], tw.shape()[1]);
        assert_eq!(n, wn, "dense shape mismatch: input {n}, weight {wn}");
        assert_eq!(tb.shape(), &[m]);
        let mut out = vec![0.0; batch * m];
        gemm_nt(tx.data(), tw.data(), &mut out, batch, n, m);
        for row in 0..batch {
            for j in 0..m {
                out[row * m + j] += tb.data()[j];
            }
        }
        self.push(
            Tensor::new(vec![batch, m], out),
            Some(Box::new(move |vals, g, grads| {
                let (tx, tw) = (&vals[x.0], &vals[w.0]);
                let mut dx = vec![0.0; batch * n];
                gemm_nn(g.data(), tw.data(), &mut dx, batch, m, n);
                let mut dw = vec![0.0; m * n];
                gemm_tn(g.data(), tx.data(), &mut dw, m, batch, n);
                let mut db = vec![0.0; m];
                for row in 0..batch {
                    for j in 0..m {
                        db[j] += g.data()[row * m + j];
                    }
                }
                grads.add(x.0, Tensor::new(vec![batch, n], dx));
                grads.add(w.0, Tensor::new(vec![m, n], dw));
                grads.add(b.0, Tensor::new(vec![m], db));
            })),
        )
    }

    /// x: [B, c_in, L], w: [c_out, c_in, K] (odd K), b: [c_out] -> [B, c_out, L]
    pub fn conv1d(&mut self, x: Var, w: Var, b: Var) -> Var {
        let (tx, tw, tb) = (&self.values[x.0], &self.values[w.0], &self.values[b.0]);
        assert_eq!(tx.shape().len(), 3, "conv input must be [B, C, L]");
        assert_eq!(tw.shape().len(), 3, "conv weight must be [C_out, C_in, K]");
        let (batch, c_in, len) = (tx.shape()[0], tx.shape()[1], tx.shape()[2]);
        let (c_out, w_in, k) = (tw.shape()[0], tw.shape()[1], tw.shape()[2]);
        assert_eq!(c_in, w_in, "conv channel mismatch");
        assert_eq!(k % 2, 1, "conv kernel size must be odd");
        assert_eq!(tb.shape(), &[c_out]);
        let out = conv::conv1d_forward(tx.data(), tw.data(), tb.data(), batch, c_in, c_out, len, k);
        self.push(
            Tensor::new(vec![batch, c_out, len], out),
            Some(Box::new(move |vals, g, grads| {
                let (dx, dw, db) = conv::conv1d_backward(
                    vals[x.0].data(),
                    vals[w.0].data(),
                    g.data(),
                    batch,
                    c_in,
                    c_out,
                    len,
                    k,
                );
                grads.add(x.0, Tensor::new(vec![batch, c_in, len], dx));
                grads.add(w.0, Tensor::new(vec![c_out, c_in, k], dw));
                grads.add(b.0, Tensor::new(vec![c_out], db));
            })),
        )
    }

    /// Adjoint of `conv1d`. x: [B, c_a, L], w: [c_a, c_b, K], b: [c_b].
    pub fn conv1d_transpose(&mut self, x: Var, w: Var, b: Var) -> Var {
        let (tx, tw, tb) = (&self.values[x.0], &self.values[w.0], &self.values[b.0]);
        assert_eq!(tx.shape().len(), 3);
        assert_eq!(tw.shape().len(), 3);
        let (batch, c_a, len) = (tx.shape()[0], tx.shape()[1], tx.shape()[2]);
        let (w_a, c_b, k) = (tw.shape()[0], tw.shape()[1], tw.shape()[2]);
        assert_eq!(c_a, w_a, "transpose conv channel mismatch");
        assert_eq!(k % 2, 1, "conv kernel size must be odd");
        assert_eq!(tb.shape(), &[c_b]);
        let out = conv::conv1d_transpose_forward(
            tx.data(),
            tw.data(),
            tb.data(),
            batch,
            c_a,
            c_b,
            len,
            k,
        );
        self.push(
            Tensor::new(vec![batch, c_b, len], out),
            Some(Box::new(move |vals, g, grads| {
                let (dx, dw, db) = conv::conv1d_transpose_backward(
                    vals[x.0].data(),
                    vals[w.0].data(),
                    g.data(),
                    batch,
                    c_a,
                    c_b,
                    len,
                    k,
                );
                grads.add(x.0, Tensor::new(vec![batch, c_a, len], dx));
                grads.add(w.0, Tensor::new(vec![c_a, c_b, k], dw));
                grads.add(b.0, Tensor::new(vec![c_b], db));
            })),
        )
    }

    /// Window-2 stride-2 max pooling over the length axis; also returns the
    /// winning indices for optional index-based unpooling.
    pub fn max_pool(&mut self, x: Var) -> (Var, Vec<u32>) {
        let t = &self.values[x.0];
        assert_eq!(t.shape().len(), 3);
        let (batch, ch, len) = (t.shape()[0], t.shape()[1], t.shape()[2]);
        assert!(len >= 2, "max_pool needs length >= 2");
        let (out, idx) = conv::max_pool_forward(t.data(), batch, ch, len);
        let idx_back = idx.clone();
        let v = self.push(
            Tensor::new(vec![batch, ch, len / 2], out),
            Some(Box::new(move |_vals, g, grads| {
                let dx = conv::max_pool_backward(g.data(), &idx_back, batch, ch, len);
                grads.add(x.0, Tensor::new(vec![batch, ch, len], dx));
            })),
        );
        (v, idx)
    }

    /// Duplication unpooling: [B, C, L] -> [B, C, 2L].
    pub fn max_unpool_dup(&mut self, x: Var) -> Var {
        let t = &self.values[x.0];
        assert_eq!(t.shape().len(), 3);
        let (batch, ch, len) = (t.shape()[0], t.shape()[1], t.shape()[2]);
        let out = conv::unpool_dup_forward(t.data(), batch * ch, len);
        self.push(
            Tensor::new(vec![batch, ch, len * 2], out),
            Some(Box::new(move |_vals, g, grads| {
                let dx = conv::unpool_dup_backward(g.data(), batch * ch, len);
                grads.add(x.0, Tensor::new(vec![batch, ch, len], dx));
            })),
        )
    }

    /// Scatter pooled values back to their recorded positions.
    pub fn max_unpool_idx(&mut self, x: Var, idx: &[u32], out_len: usize) -> Var {
        let t = &self.values[x.0];
        assert_eq!(t.shape().len(), 3);
        let (batch, ch, len) = (t.shape()[0], t.shape()[1], t.shape()[2]);
        assert_eq!(idx.len(), batch * ch * len);
        let out = conv::unpool_idx_forward(t.data(), idx, batch, ch, out_len);
        let idx_back = idx.to_vec();
        self.push(
            Tensor::new(vec![batch, ch, out_len], out),
            Some(Box::new(move |_vals, g, grads| {
                let dx =
                    conv::unpool_idx_backward(g.data(), &idx_back, batch, ch, out_len, len);
                grads.add(x.0, Tensor::new(vec![batch, ch, len], dx));
            })),
        )
    }

    /// Batch normalization over the channel axis (dim 1); rank-2 input is
    /// treated as [B, C]. In train mode the batch statistics are returned so
    /// the caller can fold them into running buffers; batch size must be at
    /// least 2. In eval mode `running` supplies the statistics.
    pub fn batch_norm(
        &mut self,
        x: Var,
        gamma: Var,
        beta: Var,
        running: (&[f64], &[f64]),
        mode: Mode,
    ) -> (Var, Option<(Vec<f64>, Vec<f64>)>) {
        const EPS: f64 = 1e-5;
        let t = &self.values[x.0];
        let shape = t.shape().to_vec();
        assert!(shape.len() == 2 || shape.len() == 3, "batch_norm wants [B,C] or [B,C,L]");
        let batch = shape[0];
        let ch = shape[1];
        let spatial: usize = shape[2..].iter().product();
        assert_eq!(self.values[gamma.0].shape(), &[ch]);
        assert_eq!(self.values[beta.0].shape(), &[ch]);

        let (mean, var) = match mode {
            Mode::Train => {
                assert!(batch >= 2, "batch_norm in train mode needs batch >= 2");
                let n = (batch * spatial) as f64;
                let mut mean = vec![0.0; ch];
                let mut var = vec![0.0; ch];
                for b in 0..batch {
                    for c in 0..ch {
                        let row = &t.data()[(b * ch + c) * spatial..(b * ch + c + 1) * spatial];
                        mean[c] += row.iter().sum::<f64>();
                    }
                }
                for m in &mut mean {
                    *m /= n;
                }
                for b in 0..batch {
                    for c in 0..ch {
                        let row = &t.data()[(b * ch + c) * spatial..(b * ch + c + 1) * spatial];
                        var[c] += row.iter().map(|&v| (v - mean[c]) * (v - mean[c])).sum::<f64>();
                    }
                }
                for v in &mut var {
                    *v /= n;
                }
                (mean, var)
            }
            Mode::Eval => {
                assert_eq!(running.0.len(), ch);
                assert_eq!(running.1.len(), ch);
                (running.0.to_vec(), running.1.to_vec())
            }
        };

        let inv_std: Vec<f64> = var.iter().map(|&v| 1.0 / (v + EPS).sqrt()).collect();
        let gamma_v = self.values[gamma.0].data().to_vec();
        let beta_v = self.values[beta.0].data().to_vec();
        let mut x_hat = vec![0.0; t.len()];
        let mut out = vec![0.0; t.len()];
        for b in 0..batch {
            for c in 0..ch {
                let base = (b * ch + c) * spatial;
                for s in 0..spatial {
                    let xh = (t.data()[base + s] - mean[c]) * inv_std[c];
                    x_hat[base + s] = xh;
                    out[base + s] = gamma_v[c] * xh + beta_v[c];
                }
            }
        }

        let stats = match mode {
            Mode::Train => Some((mean.clone(), var.clone())),
            Mode::Eval => None,
        };
        let inv_std_back = inv_std;
        let x_hat_back = x_hat;
        let out_var = self.push(
            Tensor::new(shape.clone(), out),
            Some(Box::new(move |vals, g, grads| {
                let gamma_now = vals[gamma.0].data();
                let n = (batch * spatial) as f64;
                let mut dgamma = vec![0.0; ch];
                let mut dbeta = vec![0.0; ch];
                for b in 0..batch {
                    for c in 0..ch {
                        let base = (b * ch + c) * spatial;
                        for s in 0..spatial {
                            dgamma[c] += g.data()[base + s] * x_hat_back[base + s];
                            dbeta[c] += g.data()[base + s];
                        }
                    }
                }
                let mut dx = vec![0.0; g.len()];
                match mode {
                    Mode::Train => {
                        // dx = gamma*inv_std/N * (N*g - sum(g) - x_hat*sum(g*x_hat))
                        for b in 0..batch {
                            for c in 0..ch {
                                let base = (b * ch + c) * spatial;
                                let scale = gamma_now[c] * inv_std_back[c] / n;
                                for s in 0..spatial {
                                    dx[base + s] = scale
                                        * (n * g.data()[base + s]
                                            - dbeta[c]
                                            - x_hat_back[base + s] * dgamma[c]);
                                }
                            }
                        }
                    }
                    Mode::Eval => {
                        for b in 0..batch {
                            for c in 0..ch {
                                let base = (b * ch + c) * spatial;
                                let scale = gamma_now[c] * inv_std_back[c];
                                for s in 0..spatial {
                                    dx[base + s] = scale * g.data()[base + s];
                                }
                            }
                        }
                    }
                }
                grads.add(x.0, Tensor::new(shape.clone(), dx));
                grads.add(gamma.0, Tensor::new(vec![ch], dgamma));
                grads.add(beta.0, Tensor::new(vec![ch], dbeta));
            })),
        );
        (out_var, stats)
    }

    // ---- losses (per-example vectors over the batch) -----------------------

    fn logsumexp(row: &[f64]) -> f64 {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        max + row.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
    }

    /// Per-example softmax cross-entropy against a constant one-hot target.
    pub fn cross_entropy_vec(&mut self, logits: Var, target: &Tensor) -> Var {
        let t = &self.values[logits.0];
        assert_eq!(t.shape(), target.shape(), "cross entropy shape mismatch");
        let (b, k) = (t.shape()[0], t.shape()[1]);
        let mut loss = vec![0.0; b];
        for row in 0..b {
            let lr = &t.data()[row * k..(row + 1) * k];
            let tr = &target.data()[row * k..(row + 1) * k];
            let lse = Self::logsumexp(lr);
            let dot: f64 = lr.iter().zip(tr).map(|(&l, &y)| l * y).sum();
            loss[row] = lse - dot;
        }
        let target_back = target.clone();
        self.push(
            Tensor::new(vec![b], loss),
            Some(Box::new(move |vals, g, grads| {
                let t = &vals[logits.0];
                let mut d = vec![0.0; b * k];
                for row in 0..b {
                    let lr = &t.data()[row * k..(row + 1) * k];
                    let tr = &target_back.data()[row * k..(row + 1) * k];
                    let lse = Self::logsumexp(lr);
                    let gv = g.data()[row];
                    for j in 0..k {
                        d[row * k + j] = gv * ((lr[j] - lse).exp() - tr[j]);
                    }
                }
                grads.add(logits.0, Tensor::new(vec![b, k], d));
            })),
        )
    }

    /// Per-example Bernoulli negative log-likelihood of targets x in [0,1]
    /// under probabilities p in (0,1); p is clamped away from {0,1} so the
    /// loss stays finite.
    pub fn bernoulli_nll_vec(&mut self, p: Var, x: &Tensor) -> Var {
        const LO: f64 = 1e-12;
        let t = &self.values[p.0];
        assert_eq!(t.shape(), x.shape(), "bernoulli shape mismatch");
        let (b, d) = (t.shape()[0], t.shape()[1]);
        let mut loss = vec![0.0; b];
        for row in 0..b {
            let pr = &t.data()[row * d..(row + 1) * d];
            let xr = &x.data()[row * d..(row + 1) * d];
            let mut acc = 0.0;
            for (&pv, &xv) in pr.iter().zip(xr) {
                let pc = pv.clamp(LO, 1.0 - LO);
                acc -= xv * pc.ln() + (1.0 - xv) * (1.0 - pc).ln();
            }
            loss[row] = acc;
        }
        let x_back = x.clone();
        self.push(
            Tensor::new(vec![b], loss),
            Some(Box::new(move |vals, g, grads| {
                let t = &vals[p.0];
                let mut dp = vec![0.0; b * d];
                for row in 0..b {
                    let gv = g.data()[row];
                    for j in 0..d {
                        let pv = t.data()[row * d + j];
                        if pv <= LO || pv >= 1.0 - LO {
                            continue; // clamped region has zero derivative
                        }
                        let xv = x_back.data()[row * d + j];
                        dp[row * d + j] = gv * (-xv / pv + (1.0 - xv) / (1.0 - pv));
                    }
                }
                grads.add(p.0, Tensor::new(vec![b, d], dp));
            })),
        )
    }

    /// Per-example squared-error reconstruction: 0.5 * sum((xhat - x)^2),
    /// the unit-variance Gaussian NLL up to an additive constant.
    pub fn gaussian_sq_nll_vec(&mut self, xhat: Var, x: &Tensor) -> Var {
        let t = &self.values[xhat.0];
        assert_eq!(t.shape(), x.shape());
        let (b, d) = (t.shape()[0], t.shape()[1]);
        let mut loss = vec![0.0; b];
        for row in 0..b {
            let hr = &t.data()[row * d..(row + 1) * d];
            let xr = &x.data()[row * d..(row + 1) * d];
            loss[row] = 0.5
                * hr.iter()
                    .zip(xr)
                    .map(|(&h, &v)| (h - v) * (h - v))
                    .sum::<f64>();
        }
        let x_back = x.clone();
        self.push(
            Tensor::new(vec![b], loss),
            Some(Box::new(move |vals, g, grads| {
                let t = &vals[xhat.0];
                let mut dh = vec![0.0; b * d];
                for row in 0..b {
                    let gv = g.data()[row];
                    for j in 0..d {
                        dh[row * d + j] =
                            gv * (t.data()[row * d + j] - x_back.data()[row * d + j]);
                    }
                }
                grads.add(xhat.0, Tensor::new(vec![b, d], dh));
            })),
        )
    }

    /// Per-example KL(q || N(0, I)) for a diagonal Gaussian:
    /// -0.5 * sum(1 + logvar - mu^2 - exp(logvar)); never negative.
    pub fn kl_diag_gaussian_vec(&mut self, mu: Var, logvar: Var) -> Var {
        let (tm, tl) = (&self.values[mu.0], &self.values[logvar.0]);
        assert_eq!(tm.shape(), tl.shape());
        let (b, d) = (tm.shape()[0], tm.shape()[1]);
        let mut loss = vec![0.0; b];
        for row in 0..b {
            let mr = &tm.data()[row * d..(row + 1) * d];
            let lr = &tl.data()[row * d..(row + 1) * d];
            loss[row] = -0.5
                * mr.iter()
                    .zip(lr)
                    .map(|(&m, &l)| 1.0 + l - m * m - l.exp())
                    .sum::<f64>();
        }
        self.push(
            Tensor::new(vec![b], loss),
            Some(Box::new(move |vals, g, grads| {
                let (tm, tl) = (&vals[mu.0], &vals[logvar.0]);
                let mut dm = vec![0.0; b * d];
                let mut dl = vec![0.0; b * d];
                for row in 0..b {
                    let gv = g.data()[row];
                    for j in 0..d {
                        dm[row * d + j] = gv * tm.data()[row * d + j];
                        dl[row * d + j] = gv * 0.5 * (tl.data()[row * d + j].exp() - 1.0);
                    }
                }
                grads.add(mu.0, Tensor::new(vec![b, d], dm));
                grads.add(logvar.0, Tensor::new(vec![b, d], dl));
            })),
        )
    }

    /// Per-example entropy -sum(p ln p) of a [B, K] probability tensor.
    pub fn entropy_vec(&mut self, probs: Var) -> Var {
        const LO: f64 = 1e-12;
        let t = &self.values[probs.0];
        let (b, k) = (t.shape()[0], t.shape()[1]);
        let mut out = vec![0.0; b];
        for row in 0..b {
            out[row] = -t.data()[row * k..(row + 1) * k]
                .iter()
                .map(|&p| {
                    let pc = p.max(LO);
                    p * pc.ln()
                })
                .sum::<f64>();
        }
        self.push(
            Tensor::new(vec![b], out),
            Some(Box::new(move |vals, g, grads| {
                let t = &vals[probs.0];
                let mut d = vec![0.0; b * k];
                for row in 0..b {
                    let gv = g.data()[row];
                    for j in 0..k {
                        let pc = t.data()[row * k + j].max(LO);
                        d[row * k + j] = gv * (-(pc.ln() + 1.0));
                    }
                }
                grads.add(probs.0, Tensor::new(vec![b, k], d));
            })),
        )
    }

    /// Per-example log softmax probability of one class: logit_c - logsumexp.
    pub fn log_prob_class_vec(&mut self, logits: Var, class: usize) -> Var {
        let t = &self.values[logits.0];
        let (b, k) = (t.shape()[0], t.shape()[1]);
        assert!(class < k);
        let mut out = vec![0.0; b];
        for row in 0..b {
            let lr = &t.data()[row * k..(row + 1) * k];
            out[row] = lr[class] - Self::logsumexp(lr);
        }
        self.push(
            Tensor::new(vec![b], out),
            Some(Box::new(move |vals, g, grads| {
                let t = &vals[logits.0];
                let mut d = vec![0.0; b * k];
                for row in 0..b {
                    let lr = &t.data()[row * k..(row + 1) * k];
                    let lse = Self::logsumexp(lr);
                    let gv = g.data()[row];
                    for j in 0..k {
                        let p = (lr[j] - lse).exp();
                        d[row * k + j] = gv * (if j == class { 1.0 - p } else { -p });
                    }
                }
                grads.add(logits.0, Tensor::new(vec![b, k], d));
            })),
        )
    }

    /// Per-example log(1 - softmax_class): logsumexp excluding the class,
    /// minus the full logsumexp. Stable for probabilities near 1.
    pub fn log_prob_not_class_vec(&mut self, logits: Var, class: usize) -> Var {
        let t = &self.values[logits.0];
        let (b, k) = (t.shape()[0], t.shape()[1]);
        assert!(class < k && k >= 2);
        let mut out = vec![0.0; b];
        for row in 0..b {
            let lr = &t.data()[row * k..(row + 1) * k];
            let rest: Vec<f64> = lr
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != class)
                .map(|(_, &v)| v)
                .collect();
            out[row] = Self::logsumexp(&rest) - Self::logsumexp(lr);
        }
        self.push(
            Tensor::new(vec![b], out),
            Some(Box::new(move |vals, g, grads| {
                let t = &vals[logits.0];
                let mut d = vec![0.0; b * k];
                for row in 0..b {
                    let lr = &t.data()[row * k..(row + 1) * k];
                    let rest: Vec<f64> = lr
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != class)
                        .map(|(_, &v)| v)
                        .collect();
                    let lse_rest = Self::logsumexp(&rest);
                    let lse = Self::logsumexp(lr);
                    let gv = g.data()[row];
                    for j in 0..k {
                        let p = (lr[j] - lse).exp();
                        let p_rest = if j == class {
                            0.0
                        } else {
                            (lr[j] - lse_rest).exp()
                        };
                        d[row * k + j] = gv * (p_rest - p);
                    }
                }
                grads.add(logits.0, Tensor::new(vec![b, k], d));
            })),
        )
    }

    /// Mean of a [B] vector, as a scalar node.
    pub fn mean_batch(&mut self, v: Var) -> Var {
        let t = &self.values[v.0];
        assert_eq!(t.shape().len(), 1);
        let b = t.shape()[0];
        let mean = t.data().iter().sum::<f64>() / b as f64;
        self.push(
            Tensor::scalar(mean),
            Some(Box::new(move |_vals, g, grads| {
                let gv = g.item() / b as f64;
                grads.add(v.0, Tensor::new(vec![b], vec![gv; b]));
            })),
        )
    }

    /// Reparameterized Gaussian sample z = mu + exp(logvar/2) * eps with
    /// eps ~ N(0, I); logvar is clamped to [-10, 10] first.
    pub fn sample_gaussian(&mut self, mu: Var, logvar: Var, rng: &mut Rng) -> Var {
        let shape = self.values[mu.0].shape().to_vec();
        assert_eq!(self.values[logvar.0].shape(), shape.as_slice());
        let clamped = self.clamp(logvar, -10.0, 10.0);
        let half = self.scale(clamped, 0.5);
        let sd = self.exp(half);
        let n: usize = shape.iter().product();
        let eps = Tensor::new(shape, (0..n).map(|_| rng.normal()).collect());
        let eps = self.constant(eps);
        let noise = self.mul(sd, eps);
        self.add(mu, noise)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t2(rows: usize, cols: usize, data: Vec<f64>) -> Tensor {
        Tensor::new(vec![rows, cols], data)
    }

    #[test]
    fn relu_and_leaky_values() {
        let mut tape = Tape::new();
        let x = tape.constant(t2(1, 3, vec![-1.0, 0.0, 2.0]));
        let r = tape.relu(x);
        assert_eq!(tape.value(r).data(), &[0.0, 0.0, 2.0]);
        let l = tape.leaky_relu(x, 0.2);
        assert_eq!(tape.value(l).data(), &[-0.2, 0.0, 2.0]);
    }

    #[test]
    fn softmax_of_zeros_is_uniform() {
        let mut tape = Tape::new();
        let x = tape.constant(t2(2, 5, vec![0.0; 10]));
        let s = tape.softmax(x);
        for &v in tape.value(s).data() {
            assert!((v - 0.2).abs() < 1e-12);
        }
        let sums: f64 = tape.value(s).data()[..5].iter().sum();
        assert!((sums - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_of_uniform_logits_is_ln_k() {
        let mut tape = Tape::new();
        let logits = tape.constant(t2(1, 5, vec![0.3; 5]));
        let target = t2(1, 5, vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        let ce = tape.cross_entropy_vec(logits, &target);
        assert!((tape.value(ce).data()[0] - 5.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn kl_examples() {
        let mut tape = Tape::new();
        // mu = 0, sigma = 1 -> 0
        let mu = tape.constant(t2(1, 3, vec![0.0; 3]));
        let lv = tape.constant(t2(1, 3, vec![0.0; 3]));
        let kl = tape.kl_diag_gaussian_vec(mu, lv);
        assert!(tape.value(kl).data()[0].abs() < 1e-12);
        // mu = 1, sigma = 1, one dim -> 0.5
        let mu = tape.constant(t2(1, 1, vec![1.0]));
        let lv = tape.constant(t2(1, 1, vec![0.0]));
        let kl = tape.kl_diag_gaussian_vec(mu, lv);
        assert!((tape.value(kl).data()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn kl_is_nonnegative_on_random_inputs() {
        let mut rng = Rng::new(3);
        let mut tape = Tape::new();
        let mu = tape.constant(t2(8, 4, (0..32).map(|_| rng.normal() * 2.0).collect()));
        let lv = tape.constant(t2(8, 4, (0..32).map(|_| rng.normal()).collect()));
        let kl = tape.kl_diag_gaussian_vec(mu, lv);
        for &v in tape.value(kl).data() {
            assert!(v >= 0.0);
        }
    }

    #[test]
    fn dense_identity_and_zero_weight() {
        let mut tape = Tape::new();
        let x = tape.constant(t2(1, 3, vec![1.0, 2.0, 3.0]));
        let eye = tape.constant(t2(
            3,
            3,
            vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        ));
        let zero_b = tape.constant(Tensor::zeros(vec![3]));
        let y = tape.dense(x, eye, zero_b);
        assert_eq!(tape.value(y).data(), &[1.0, 2.0, 3.0]);

        let zero_w = tape.constant(Tensor::zeros(vec![2, 3]));
        let b = tape.constant(Tensor::new(vec![2], vec![5.0, -1.0]));
        let y = tape.dense(x, zero_w, b);
        assert_eq!(tape.value(y).data(), &[5.0, -1.0]);
    }

    #[test]
    fn backward_of_sum_of_squares_is_two_w() {
        let mut params = ParameterSet::new();
        params.insert("w", Tensor::new(vec![1, 4], vec![1.0, -2.0, 3.0, 0.5]));
        let mut tape = Tape::new();
        let w = tape.param(&params, "w");
        let sq = tape.mul(w, w);
        let loss_vec = tape.reshape(sq, vec![4]);
        let loss = tape.mean_batch(loss_vec);
        let loss = tape.scale(loss, 4.0); // sum, not mean
        let grads = tape.backward(loss);
        tape.apply_grads(&grads, &mut params);
        let g = params.get("w").grad.data();
        assert_eq!(g, &[2.0, -4.0, 6.0, 1.0]);
    }

    #[test]
    fn unused_parameter_gets_zero_gradient() {
        let mut params = ParameterSet::new();
        params.insert("used", Tensor::scalar(3.0));
        params.insert("unused", Tensor::scalar(7.0));
        let mut tape = Tape::new();
        let u = tape.param(&params, "used");
        let _lonely = tape.param(&params, "unused");
        let loss = tape.mul(u, u);
        let grads = tape.backward(loss);
        tape.apply_grads(&grads, &mut params);
        assert_eq!(params.get("used").grad.data(), &[6.0]);
        assert_eq!(params.get("unused").grad.data(), &[0.0]);
    }

    #[test]
    fn batch_norm_zero_variance_channel_returns_beta() {
        let mut tape = Tape::new();
        let x = tape.constant(t2(4, 2, vec![5.0, 1.0, 5.0, 2.0, 5.0, 3.0, 5.0, 4.0]));
        let gamma = tape.constant(Tensor::new(vec![2], vec![1.0, 1.0]));
        let beta = tape.constant(Tensor::new(vec![2], vec![-0.5, 0.25]));
        let (y, stats) = tape.batch_norm(x, gamma, beta, (&[], &[]), Mode::Train);
        let (mean, var) = stats.unwrap();
        assert!((mean[0] - 5.0).abs() < 1e-12);
        assert!(var[0].abs() < 1e-12);
        // channel 0 is constant: output collapses to beta
        for row in 0..4 {
            assert!((tape.value(y).data()[row * 2] - (-0.5)).abs() < 1e-6);
        }
    }

    #[test]
    fn batch_norm_train_standardizes() {
        let mut tape = Tape::new();
        let x = tape.constant(t2(4, 1, vec![1.0, 2.0, 3.0, 4.0]));
        let gamma = tape.constant(Tensor::new(vec![1], vec![1.0]));
        let beta = tape.constant(Tensor::new(vec![1], vec![0.0]));
        let (y, _) = tape.batch_norm(x, gamma, beta, (&[], &[]), Mode::Train);
        let data = tape.value(y).data();
        let mean: f64 = data.iter().sum::<f64>() / 4.0;
        let var: f64 = data.iter().map(|v| v * v).sum::<f64>() / 4.0 - mean * mean;
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-4); // eps shifts it slightly below 1
    }

    #[test]
    #[should_panic(expected = "batch >= 2")]
    fn batch_norm_train_rejects_batch_of_one() {
        let mut tape = Tape::new();
        let x = tape.constant(t2(1, 2, vec![1.0, 2.0]));
        let gamma = tape.constant(Tensor::new(vec![2], vec![1.0; 2]));
        let beta = tape.constant(Tensor::zeros(vec![2]));
        tape.batch_norm(x, gamma, beta, (&[], &[]), Mode::Train);
    }

    #[test]
    fn sample_gaussian_is_deterministic_and_clamps() {
        let mut tape = Tape::new();
        let mu = tape.constant(t2(2, 3, vec![1.0; 6]));
        let lv = tape.constant(t2(2, 3, vec![-50.0; 6])); // clamps to -10
        let mut rng = Rng::new(5);
        let z = tape.sample_gaussian(mu, lv, &mut rng);
        for &v in tape.value(z).data() {
            assert!((v - 1.0).abs() < 0.05, "sd should be ~e^-5");
        }
        let mut tape2 = Tape::new();
        let mu2 = tape2.constant(t2(2, 3, vec![1.0; 6]));
        let lv2 = tape2.constant(t2(2, 3, vec![-50.0; 6]));
        let mut rng2 = Rng::new(5);
        let z2 = tape2.sample_gaussian(mu2, lv2, &mut rng2);
        assert_eq!(tape.value(z).data(), tape2.value(z2).data());
    }

    #[test]
    fn sample_gaussian_mean_approaches_mu() {
        let mut rng = Rng::new(9);
        let n = 100_000;
        let mut tape = Tape::new();
        let mu = tape.constant(t2(1, 1, vec![0.7]));
        let lv = tape.constant(t2(1, 1, vec![0.0]));
        let mut sum = 0.0;
        for _ in 0..n {
            let z = tape.sample_gaussian(mu, lv, &mut rng);
            sum += tape.value(z).data()[0];
        }
        let mean = sum / n as f64;
        // 3 standard errors of the MC mean (sigma = 1)
        assert!((mean - 0.7).abs() < 3.0 / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn log_prob_class_matches_softmax() {
        let mut tape = Tape::new();
        let logits = tape.constant(t2(1, 5, vec![0.1, -0.4, 2.0, 0.0, 1.0]));
        let s = tape.softmax(logits);
        let lp = tape.log_prob_class_vec(logits, 2);
        let lnp = tape.value(s).data()[2].ln();
        assert!((tape.value(lp).data()[0] - lnp).abs() < 1e-12);
        let lnp_not = (1.0 - tape.value(s).data()[2]).ln();
        let lpn = tape.log_prob_not_class_vec(logits, 2);
        assert!((tape.value(lpn).data()[0] - lnp_not).abs() < 1e-12);
    }

    #[test]
    fn uniform_five_way_softmax_gan_arithmetic() {
        // untrained discriminator with uniform outputs:
        // -log(1 - p_fake) = -log(4/5), -log(p_fake) = -log(1/5)
        let mut tape = Tape::new();
        let logits = tape.constant(t2(1, 5, vec![0.0; 5]));
        let not_fake = tape.log_prob_not_class_vec(logits, 4);
        let fake = tape.log_prob_class_vec(logits, 4);
        assert!((-tape.value(not_fake).data()[0] - (5.0f64 / 4.0).ln()).abs() < 1e-12);
        assert!((-tape.value(fake).data()[0] - 5.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn entropy_of_onehot_is_zero_and_uniform_is_ln_k() {
        let mut tape = Tape::new();
        let onehot = tape.constant(t2(1, 4, vec![0.0, 1.0, 0.0, 0.0]));
        let h = tape.entropy_vec(onehot);
        assert!(tape.value(h).data()[0].abs() < 1e-9);
        let uniform = tape.constant(t2(1, 4, vec![0.25; 4]));
        let h = tape.entropy_vec(uniform);
        assert!((tape.value(h).data()[0] - 4.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn slice_and_concat_invert() {
        let mut tape = Tape::new();
        let a = tape.constant(t2(2, 2, vec![1.0, 2.0, 3.0, 4.0]));
        let b = tape.constant(t2(2, 3, vec![5.0, 6.0, 7.0, 8.0, 9.0, 10.0]));
        let cat = tape.concat_cols(a, b);
        assert_eq!(tape.value(cat).shape(), &[2, 5]);
        let back = tape.slice_cols(cat, 2, 5);
        assert_eq!(tape.value(back).data(), tape.value(b).data());
        let rows = tape.concat_rows(&[a, a]);
        assert_eq!(tape.value(rows).shape(), &[4, 2]);
        let first = tape.slice_rows(rows, 0, 2);
        assert_eq!(tape.value(first).data(), tape.value(a).data());
    }
}
