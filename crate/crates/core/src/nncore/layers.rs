//! Forward and backward kernels for the layers of the sequential stack.
//!
//! Sequence tensors are `[batch, length, channels]`; convolution weights are
//! `[filters, in_channels, kernel]`; dense weights are `[out, in]`.

use rand::Rng;

use super::{NnError, Tensor};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Valid (unpadded) stride-1 convolution.
pub fn conv1d_forward<T: Scalar>(
    x: &Tensor<T>,
    w: &Tensor<T>,
    b: &Tensor<T>,
) -> Result<Tensor<T>, NnError> {
    x.expect_rank(3)?;
    w.expect_rank(3)?;
    let (n, len, cin) = (x.dim(0), x.dim(1), x.dim(2));
    let (filters, wc, k) = (w.dim(0), w.dim(1), w.dim(2));
    if wc != cin {
        return Err(NnError::Shape(format!(
            "conv weight expects {wc} input channels, input has {cin}"
        )));
    }
    b.expect_shape(&[filters])?;
    if k == 0 || len < k {
        return Err(NnError::Shape(format!(
            "sequence length {len} shorter than kernel {k}"
        )));
    }
    let lout = len - k + 1;
    let (xd, wd, bd) = (x.data(), w.data(), b.data());
    let mut out = Vec::with_capacity(n * lout * filters);
    for s in 0..n {
        let xs = &xd[s * len * cin..(s + 1) * len * cin];
        for t in 0..lout {
            for f in 0..filters {
                let wf = &wd[f * cin * k..(f + 1) * cin * k];
                let mut acc = bd[f];
                for c in 0..cin {
                    let wfc = &wf[c * k..(c + 1) * k];
                    for (j, &wv) in wfc.iter().enumerate() {
                        acc += xs[(t + j) * cin + c] * wv;
                    }
                }
                out.push(acc);
            }
        }
    }
    Tensor::new(vec![n, lout, filters], out)
}

/// Adjoint of [`conv1d_forward`]. Returns `(grad_x, grad_w, grad_b)`.
pub fn conv1d_backward<T: Scalar>(
    x: &Tensor<T>,
    w: &Tensor<T>,
    grad_out: &Tensor<T>,
) -> Result<(Tensor<T>, Tensor<T>, Tensor<T>), NnError> {
    let (n, len, cin) = (x.dim(0), x.dim(1), x.dim(2));
    let (filters, _, k) = (w.dim(0), w.dim(1), w.dim(2));
    let lout = len + 1 - k;
    grad_out.expect_shape(&[n, lout, filters])?;
    let (xd, wd, gd) = (x.data(), w.data(), grad_out.data());
    let mut gx = vec![T::zero(); x.len()];
    let mut gw = vec![T::zero(); w.len()];
    let mut gb = vec![T::zero(); filters];
    for s in 0..n {
        let xo = s * len * cin;
        for t in 0..lout {
            let g_row = &gd[(s * lout + t) * filters..(s * lout + t + 1) * filters];
            for (f, &g) in g_row.iter().enumerate() {
                if g == T::zero() {
                    continue;
                }
                gb[f] += g;
                for c in 0..cin {
                    for j in 0..k {
                        let xi = xo + (t + j) * cin + c;
                        let wi = (f * cin + c) * k + j;
                        gw[wi] += g * xd[xi];
                        gx[xi] += g * wd[wi];
                    }
                }
            }
        }
    }
    Ok((
        Tensor::new(x.shape().to_vec(), gx)?,
        Tensor::new(w.shape().to_vec(), gw)?,
        Tensor::new(vec![filters], gb)?,
    ))
}

pub fn relu<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    x.map(|v| if v > T::zero() { v } else { T::zero() })
}

/// Gradient passes where the pre-activation is strictly positive.
pub fn relu_backward<T: Scalar>(
    pre: &Tensor<T>,
    grad_out: &Tensor<T>,
) -> Result<Tensor<T>, NnError> {
    grad_out.expect_shape(pre.shape())?;
    let data = pre
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&p, &g)| if p > T::zero() { g } else { T::zero() })
        .collect();
    Tensor::new(pre.shape().to_vec(), data)
}

/// Non-overlapping max pooling along the length axis.
///
/// Returns the pooled tensor and, per output element, the flat index into `x`
/// of the winning input (first index on ties). A trailing partial window is dropped.
pub fn maxpool1d_forward<T: Scalar>(
    x: &Tensor<T>,
    pool: usize,
) -> Result<(Tensor<T>, Vec<usize>), NnError> {
    x.expect_rank(3)?;
    let (n, len, ch) = (x.dim(0), x.dim(1), x.dim(2));
    if pool == 0 || len < pool {
        return Err(NnError::Shape(format!(
            "sequence length {len} shorter than pool {pool}"
        )));
    }
    let lout = len / pool;
    let xd = x.data();
    let mut out = Vec::with_capacity(n * lout * ch);
    let mut argmax = Vec::with_capacity(n * lout * ch);
    for s in 0..n {
        for t in 0..lout {
            for c in 0..ch {
                let mut best = (s * len + t * pool) * ch + c;
                for j in 1..pool {
                    let i = (s * len + t * pool + j) * ch + c;
                    if xd[i] > xd[best] {
                        best = i;
                    }
                }
                out.push(xd[best]);
                argmax.push(best);
            }
        }
    }
    Ok((Tensor::new(vec![n, lout, ch], out)?, argmax))
}

pub fn maxpool1d_backward<T: Scalar>(
    input_shape: &[usize],
    argmax: &[usize],
    grad_out: &Tensor<T>,
) -> Result<Tensor<T>, NnError> {
    if argmax.len() != grad_out.len() {
        return Err(NnError::Shape(format!(
            "pool cache holds {} indices, gradient has {} values",
            argmax.len(),
            grad_out.len()
        )));
    }
    let mut gx = Tensor::zeros(input_shape.to_vec());
    let gd = gx.data_mut();
    for (&i, &g) in argmax.iter().zip(grad_out.data()) {
        if i >= gd.len() {
            return Err(NnError::Shape(format!("pool index {i} out of range")));
        }
        gd[i] += g;
    }
    Ok(gx)
}

/// Inverted dropout. Returns the output and the per-element scale mask
/// (`0` for dropped elements, `1/(1-rate)` for kept ones).
pub fn dropout<T: Scalar, R: Rng + ?Sized>(
    x: &Tensor<T>,
    rate: f64,
    mode: Mode,
    rng: &mut R,
) -> Result<(Tensor<T>, Tensor<T>), NnError> {
    if !(0.0..1.0).contains(&rate) {
        return Err(NnError::InvalidRate(rate));
    }
    if mode == Mode::Infer || rate == 0.0 {
        return Ok((x.clone(), Tensor::filled(x.shape().to_vec(), T::one())));
    }
    let keep = T::lit(1.0 / (1.0 - rate));
    let mask = Tensor::from_fn(x.shape().to_vec(), |_| {
        if rng.random::<f64>() < rate {
            T::zero()
        } else {
            keep
        }
    });
    Ok((x.mul(&mask)?, mask))
}

/// `[batch, L, C]` → `[batch, L*C]`.
pub fn flatten<T: Scalar>(x: Tensor<T>) -> Result<Tensor<T>, NnError> {
    let batch = *x
        .shape()
        .first()
        .ok_or_else(|| NnError::Shape("empty shape".into()))?;
    let rest = x.len().checked_div(batch).unwrap_or(0);
    x.reshape(vec![batch, rest])
}

pub fn unflatten<T: Scalar>(x: Tensor<T>, shape: &[usize]) -> Result<Tensor<T>, NnError> {
    x.reshape(shape.to_vec())
}

/// `out = x · wᵀ + b`.
pub fn dense_forward<T: Scalar>(
    x: &Tensor<T>,
    w: &Tensor<T>,
    b: &Tensor<T>,
) -> Result<Tensor<T>, NnError> {
    x.expect_rank(2)?;
    w.expect_rank(2)?;
    let (n, fin) = (x.dim(0), x.dim(1));
    let (fout, wi) = (w.dim(0), w.dim(1));
    if wi != fin {
        return Err(NnError::Shape(format!(
            "dense weight expects {wi} inputs, got {fin}"
        )));
    }
    b.expect_shape(&[fout])?;
    let (xd, wd, bd) = (x.data(), w.data(), b.data());
    let mut out = Vec::with_capacity(n * fout);
    for s in 0..n {
        let xs = &xd[s * fin..(s + 1) * fin];
        for o in 0..fout {
            let wo = &wd[o * fin..(o + 1) * fin];
            let mut acc = bd[o];
            for (&a, &b) in xs.iter().zip(wo) {
                acc += a * b;
            }
            out.push(acc);
        }
    }
    Tensor::new(vec![n, fout], out)
}

/// Adjoint of [`dense_forward`]. Returns `(grad_x, grad_w, grad_b)`.
pub fn dense_backward<T: Scalar>(
    x: &Tensor<T>,
    w: &Tensor<T>,
    grad_out: &Tensor<T>,
) -> Result<(Tensor<T>, Tensor<T>, Tensor<T>), NnError> {
    let (n, fin) = (x.dim(0), x.dim(1));
    let fout = w.dim(0);
    grad_out.expect_shape(&[n, fout])?;
    let (xd, wd, gd) = (x.data(), w.data(), grad_out.data());
    let mut gx = vec![T::zero(); n * fin];
    let mut gw = vec![T::zero(); fout * fin];
    let mut gb = vec![T::zero(); fout];
    for s in 0..n {
        let xs = &xd[s * fin..(s + 1) * fin];
        let gxs = &mut gx[s * fin..(s + 1) * fin];
        for o in 0..fout {
            let g = gd[s * fout + o];
            if g == T::zero() {
                continue;
            }
            gb[o] += g;
            let wo = &wd[o * fin..(o + 1) * fin];
            let gwo = &mut gw[o * fin..(o + 1) * fin];
            for i in 0..fin {
                gwo[i] += g * xs[i];
                gxs[i] += g * wo[i];
            }
        }
    }
    Ok((
        Tensor::new(vec![n, fin], gx)?,
        Tensor::new(vec![fout, fin], gw)?,
        Tensor::new(vec![fout], gb)?,
    ))
}

/// Row-wise softmax, shifted by the row maximum.
pub fn softmax<T: Scalar>(x: &Tensor<T>) -> Result<Tensor<T>, NnError> {
    x.expect_rank(2)?;
    let k = x.dim(1);
    let mut out = Vec::with_capacity(x.len());
    for row in x.data().chunks(k.max(1)) {
        let m = row.iter().copied().fold(T::neg_infinity(), T::max);
        let start = out.len();
        let mut sum = T::zero();
        for &v in row {
            let e = (v - m).exp();
            sum += e;
            out.push(e);
        }
        out[start..].iter_mut().for_each(|e| *e /= sum);
    }
    Tensor::new(x.shape().to_vec(), out)
}

/// Offset inside the log of the cross-entropy.
pub const CE_EPS: f64 = 1e-12;

/// Mean categorical cross-entropy and its gradient with respect to the
/// pre-softmax logits, `(probs - one_hot) / batch`.
pub fn cross_entropy<T: Scalar>(
    probs: &Tensor<T>,
    one_hot: &Tensor<T>,
) -> Result<(T, Tensor<T>), NnError> {
    one_hot.expect_shape(probs.shape())?;
    probs.expect_rank(2)?;
    let n = probs.dim(0);
    if n == 0 {
        return Ok((T::zero(), probs.clone()));
    }
    let eps = T::lit(CE_EPS);
    let mut loss = T::zero();
    for (&p, &y) in probs.data().iter().zip(one_hot.data()) {
        if y > T::zero() {
            loss -= y * (p + eps).ln();
        }
    }
    let nb = T::from_usize_lossy(n);
    let grad = probs
        .data()
        .iter()
        .zip(one_hot.data())
        .map(|(&p, &y)| (p - y) / nb)
        .collect();
    Ok((loss / nb, Tensor::new(probs.shape().to_vec(), grad)?))
}
