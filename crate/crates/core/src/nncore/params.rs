use super::{NnError, Tensor};
use crate::scalar::Scalar;

/// Stable layer names, in forward order.
pub const LAYER_NAMES: [&str; 4] = ["conv1", "conv2", "dense1", "dense_out"];

#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams<T> {
    pub name: String,
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

/// Learnable weights of every layer, keyed by name. Also used for gradients
/// and optimizer moments, which mirror its shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamStore<T> {
    pub layers: Vec<LayerParams<T>>,
}

impl<T: Scalar> ParamStore<T> {
    pub fn layer(&self, name: &str) -> Result<&LayerParams<T>, NnError> {
        self.layers
            .iter()
            .find(|l| l.name == name)
            .ok_or_else(|| NnError::UnknownLayer(name.to_string()))
    }

    pub fn layer_mut(&mut self, name: &str) -> Result<&mut LayerParams<T>, NnError> {
        self.layers
            .iter_mut()
            .find(|l| l.name == name)
            .ok_or_else(|| NnError::UnknownLayer(name.to_string()))
    }

    /// Same layout, every value zero.
    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|l| LayerParams {
                    name: l.name.clone(),
                    weight: Tensor::zeros(l.weight.shape().to_vec()),
                    bias: Tensor::zeros(l.bias.shape().to_vec()),
                })
                .collect(),
        }
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.len() + l.bias.len())
            .sum()
    }

    /// `(layer name, tensor)` pairs, weight before bias.
    pub fn tensors(&self) -> impl Iterator<Item = (&str, &Tensor<T>)> {
        self.layers
            .iter()
            .flat_map(|l| [(l.name.as_str(), &l.weight), (l.name.as_str(), &l.bias)])
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = (&str, &mut Tensor<T>)> {
        self.layers.iter_mut().flat_map(|l| {
            let name = l.name.as_str();
            [(name, &mut l.weight), (name, &mut l.bias)]
        })
    }

    pub fn same_layout(&self, other: &Self) -> bool {
        self.layers.len() == other.layers.len()
            && self.layers.iter().zip(&other.layers).all(|(a, b)| {
                a.name == b.name
                    && a.weight.shape() == b.weight.shape()
                    && a.bias.shape() == b.bias.shape()
            })
    }

    /// Flat value at global index `i` (weights then bias, layer by layer).
    pub fn get_flat(&self, mut i: usize) -> T {
        for (_, t) in self.tensors() {
            if i < t.len() {
                return t.data()[i];
            }
            i -= t.len();
        }
        panic!("parameter index out of range");
    }

    pub fn set_flat(&mut self, mut i: usize, v: T) {
        for (_, t) in self.tensors_mut() {
            if i < t.len() {
                t.data_mut()[i] = v;
                return;
            }
            i -= t.len();
        }
        panic!("parameter index out of range");
    }

    /// Bitwise equality, distinguishing `0.0`/`-0.0` and NaN payloads.
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.same_layout(other)
            && self.tensors().zip(other.tensors()).all(|((_, a), (_, b))| {
                a.data()
                    .iter()
                    .zip(b.data())
                    .all(|(x, y)| x.as_f64().to_bits() == y.as_f64().to_bits())
            })
    }
}
