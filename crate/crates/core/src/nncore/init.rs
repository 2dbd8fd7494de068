use rand::Rng;

use super::{LayerParams, ModelConfig, NnError, ParamStore, Tensor};
use crate::rng::{SeedStreams, Stream};
use crate::scalar::Scalar;

fn uniform<T: Scalar, R: Rng + ?Sized>(shape: Vec<usize>, bound: f64, rng: &mut R) -> Tensor<T> {
    Tensor::from_fn(shape, |_| T::lit(rng.random_range(-bound..=bound)))
}

/// He-uniform bound for a layer feeding a ReLU.
pub(crate) fn he_bound(fan_in: usize) -> f64 {
    (6.0 / fan_in as f64).sqrt()
}

pub(crate) fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Seeded initialisation: He-uniform for the ReLU layers, Glorot-uniform for
/// the output layer, zero biases.
pub fn init_params<T: Scalar>(cfg: &ModelConfig, seed: u64) -> Result<ParamStore<T>, NnError> {
    let s = cfg.validate()?;
    let mut rng = SeedStreams::new(seed).rng(Stream::Init, 0);
    let mut layer = |name: &str, wshape: Vec<usize>, bound: f64, out: usize| LayerParams {
        name: name.to_string(),
        weight: uniform(wshape, bound, &mut rng),
        bias: Tensor::zeros(vec![out]),
    };
    let fan1 = cfg.input_channels * cfg.conv1_kernel;
    let fan2 = cfg.conv1_filters * cfg.conv2_kernel;
    Ok(ParamStore {
        layers: vec![
            layer(
                "conv1",
                vec![cfg.conv1_filters, cfg.input_channels, cfg.conv1_kernel],
                he_bound(fan1),
                cfg.conv1_filters,
            ),
            layer(
                "conv2",
                vec![cfg.conv2_filters, cfg.conv1_filters, cfg.conv2_kernel],
                he_bound(fan2),
                cfg.conv2_filters,
            ),
            layer(
                "dense1",
                vec![cfg.dense_units, s.flat],
                he_bound(s.flat),
                cfg.dense_units,
            ),
            layer(
                "dense_out",
                vec![cfg.num_classes, cfg.dense_units],
                glorot_bound(cfg.dense_units, cfg.num_classes),
                cfg.num_classes,
            ),
        ],
    })
}
