use rand::Rng;
use serde::{Deserialize, Serialize};

use super::layers::*;
use super::{NnError, ParamStore, Tensor};
use crate::scalar::Scalar;

/// Layer stack hyper-parameters:
/// conv(k)+ReLU → pool → dropout → conv(k)+ReLU → pool → dropout → flatten →
/// dense+ReLU → dropout → dense+softmax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub input_len: usize,
    pub input_channels: usize,
    pub conv1_filters: usize,
    pub conv1_kernel: usize,
    pub conv2_filters: usize,
    pub conv2_kernel: usize,
    pub pool_size: usize,
    pub drop1: f64,
    pub drop2: f64,
    pub drop3: f64,
    pub dense_units: usize,
    pub num_classes: usize,
}

/// Sequence lengths after each shape-changing stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageShapes {
    pub conv1: usize,
    pub pool1: usize,
    pub conv2: usize,
    pub pool2: usize,
    pub flat: usize,
}

impl ModelConfig {
    /// The reference architecture for sequences of length `input_len`.
    pub fn paper(input_len: usize) -> Self {
        Self {
            input_len,
            input_channels: 1,
            conv1_filters: 64,
            conv1_kernel: 3,
            conv2_filters: 128,
            conv2_kernel: 3,
            pool_size: 2,
            drop1: 0.5,
            drop2: 0.6,
            drop3: 0.6,
            dense_units: 256,
            num_classes: 4,
        }
    }

    pub fn shapes(&self) -> Result<StageShapes, NnError> {
        let bad = |m: String| NnError::InvalidConfig(m);
        if self.conv1_kernel == 0 || self.conv2_kernel == 0 || self.pool_size == 0 {
            return Err(bad("kernel and pool sizes must be at least 1".into()));
        }
        let conv1 = (self.input_len + 1)
            .checked_sub(self.conv1_kernel)
            .filter(|&l| l > 0)
            .ok_or_else(|| {
                bad(format!(
                    "input length {} too short for conv1",
                    self.input_len
                ))
            })?;
        let pool1 = conv1 / self.pool_size;
        let conv2 = (pool1 + 1)
            .checked_sub(self.conv2_kernel)
            .filter(|&l| l > 0)
            .ok_or_else(|| {
                bad(format!(
                    "input length {} too short for conv2",
                    self.input_len
                ))
            })?;
        let pool2 = conv2 / self.pool_size;
        if pool2 == 0 {
            return Err(bad(format!(
                "input length {} too short for the second pooling stage",
                self.input_len
            )));
        }
        Ok(StageShapes {
            conv1,
            pool1,
            conv2,
            pool2,
            flat: pool2 * self.conv2_filters,
        })
    }

    pub fn validate(&self) -> Result<StageShapes, NnError> {
        for (name, r) in [
            ("drop1", self.drop1),
            ("drop2", self.drop2),
            ("drop3", self.drop3),
        ] {
            if !(0.0..1.0).contains(&r) {
                return Err(NnError::InvalidConfig(format!("{name}={r} outside [0, 1)")));
            }
        }
        if self.input_channels == 0
            || self.conv1_filters == 0
            || self.conv2_filters == 0
            || self.dense_units == 0
            || self.num_classes == 0
        {
            return Err(NnError::InvalidConfig(
                "layer widths must be positive".into(),
            ));
        }
        self.shapes()
    }
}

/// Everything the backward pass needs from a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    input: Tensor<T>,
    conv1_pre: Tensor<T>,
    pool1_argmax: Vec<usize>,
    drop1_mask: Tensor<T>,
    conv2_in: Tensor<T>,
    conv2_pre: Tensor<T>,
    pool2_argmax: Vec<usize>,
    drop2_mask: Tensor<T>,
    pool2_shape: Vec<usize>,
    dense1_in: Tensor<T>,
    dense1_pre: Tensor<T>,
    drop3_mask: Tensor<T>,
    out_in: Tensor<T>,
    pub probs: Tensor<T>,
}

fn finite<T: Scalar>(t: Tensor<T>, layer: &str) -> Result<Tensor<T>, NnError> {
    if t.is_finite() {
        Ok(t)
    } else {
        Err(NnError::NonFinite(layer.to_string()))
    }
}

/// Runs the stack on `x` of shape `[batch, input_len, input_channels]`.
pub fn model_forward<T: Scalar, R: Rng + ?Sized>(
    cfg: &ModelConfig,
    params: &ParamStore<T>,
    x: &Tensor<T>,
    mode: Mode,
    rng: &mut R,
) -> Result<(Tensor<T>, ForwardCache<T>), NnError> {
    cfg.shapes()?;
    x.expect_rank(3)?;
    if x.dim(1) != cfg.input_len || x.dim(2) != cfg.input_channels {
        return Err(NnError::Shape(format!(
            "input shape {:?} does not match [_, {}, {}]",
            x.shape(),
            cfg.input_len,
            cfg.input_channels
        )));
    }
    let c1 = params.layer("conv1")?;
    let conv1_pre = finite(conv1d_forward(x, &c1.weight, &c1.bias)?, "conv1")?;
    let (p1, pool1_argmax) = maxpool1d_forward(&relu(&conv1_pre), cfg.pool_size)?;
    let (conv2_in, drop1_mask) = dropout(&p1, cfg.drop1, mode, rng)?;

    let c2 = params.layer("conv2")?;
    let conv2_pre = finite(conv1d_forward(&conv2_in, &c2.weight, &c2.bias)?, "conv2")?;
    let (p2, pool2_argmax) = maxpool1d_forward(&relu(&conv2_pre), cfg.pool_size)?;
    let (d2, drop2_mask) = dropout(&p2, cfg.drop2, mode, rng)?;
    let pool2_shape = d2.shape().to_vec();
    let dense1_in = flatten(d2)?;

    let d1 = params.layer("dense1")?;
    let dense1_pre = finite(dense_forward(&dense1_in, &d1.weight, &d1.bias)?, "dense1")?;
    let (out_in, drop3_mask) = dropout(&relu(&dense1_pre), cfg.drop3, mode, rng)?;

    let dout = params.layer("dense_out")?;
    let logits = finite(
        dense_forward(&out_in, &dout.weight, &dout.bias)?,
        "dense_out",
    )?;
    let probs = finite(softmax(&logits)?, "softmax")?;

    let cache = ForwardCache {
        input: x.clone(),
        conv1_pre,
        pool1_argmax,
        drop1_mask,
        conv2_in,
        conv2_pre,
        pool2_argmax,
        drop2_mask,
        pool2_shape,
        dense1_in,
        dense1_pre,
        drop3_mask,
        out_in,
        probs: probs.clone(),
    };
    Ok((probs, cache))
}

/// Mean cross-entropy of the cached forward pass against `one_hot`, and the
/// gradient of that loss with respect to every parameter.
pub fn model_backward<T: Scalar>(
    params: &ParamStore<T>,
    cache: &ForwardCache<T>,
    one_hot: &Tensor<T>,
) -> Result<(T, ParamStore<T>), NnError> {
    let (loss, g_logits) = cross_entropy(&cache.probs, one_hot)?;
    let mut grads = params.zeros_like();

    let dout = params.layer("dense_out")?;
    let (g, gw, gb) = dense_backward(&cache.out_in, &dout.weight, &g_logits)?;
    set(&mut grads, "dense_out", gw, gb)?;
    let g = relu_backward(&cache.dense1_pre, &g.mul(&cache.drop3_mask)?)?;

    let d1 = params.layer("dense1")?;
    let (g, gw, gb) = dense_backward(&cache.dense1_in, &d1.weight, &g)?;
    set(&mut grads, "dense1", gw, gb)?;
    let g = unflatten(g, &cache.pool2_shape)?.mul(&cache.drop2_mask)?;
    let g = maxpool1d_backward(cache.conv2_pre.shape(), &cache.pool2_argmax, &g)?;
    let g = relu_backward(&cache.conv2_pre, &g)?;

    let c2 = params.layer("conv2")?;
    let (g, gw, gb) = conv1d_backward(&cache.conv2_in, &c2.weight, &g)?;
    set(&mut grads, "conv2", gw, gb)?;
    let g = g.mul(&cache.drop1_mask)?;
    let g = maxpool1d_backward(cache.conv1_pre.shape(), &cache.pool1_argmax, &g)?;
    let g = relu_backward(&cache.conv1_pre, &g)?;

    let c1 = params.layer("conv1")?;
    let (_, gw, gb) = conv1d_backward(&cache.input, &c1.weight, &g)?;
    set(&mut grads, "conv1", gw, gb)?;

    for (name, t) in grads.tensors() {
        if !t.is_finite() {
            return Err(NnError::NonFinite(name.to_string()));
        }
    }
    Ok((loss, grads))
}

fn set<T: Scalar>(
    grads: &mut ParamStore<T>,
    name: &str,
    gw: Tensor<T>,
    gb: Tensor<T>,
) -> Result<(), NnError> {
    let l = grads.layer_mut(name)?;
    l.weight = gw;
    l.bias = gb;
    Ok(())
}

/// A configured network with its weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Model<T> {
    pub cfg: ModelConfig,
    pub params: ParamStore<T>,
}

impl<T: Scalar> Model<T> {
    pub fn new(cfg: ModelConfig, params: ParamStore<T>) -> Self {
        Self { cfg, params }
    }

    /// Inference-mode class probabilities, `[batch, num_classes]`.
    pub fn predict(&self, x: &Tensor<T>) -> Result<Tensor<T>, NnError> {
        // Dropout is the identity in inference mode, so the generator is never drawn from.
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
        Ok(model_forward(&self.cfg, &self.params, x, Mode::Infer, &mut rng)?.0)
    }

    /// Wraps a row-major `[rows, input_len * input_channels]` matrix as model input.
    pub fn input_tensor(&self, rows: usize, data: Vec<T>) -> Result<Tensor<T>, NnError> {
        Tensor::new(
            vec![rows, self.cfg.input_len, self.cfg.input_channels],
            data,
        )
    }
}
