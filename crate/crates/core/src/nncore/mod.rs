//! From-scratch tensor machinery and the sequential 1-D convolutional classifier.

mod init;
mod layers;
mod model;
mod params;
mod tensor;

pub use init::init_params;
pub use layers::{
    conv1d_backward, conv1d_forward, cross_entropy, dense_backward, dense_forward, dropout,
    flatten, maxpool1d_backward, maxpool1d_forward, relu, relu_backward, softmax, unflatten, Mode,
    CE_EPS,
};
pub use model::{model_backward, model_forward, ForwardCache, Model, ModelConfig, StageShapes};
pub use params::{LayerParams, ParamStore, LAYER_NAMES};
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("dropout rate {0} outside [0, 1)")]
    InvalidRate(f64),
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite values produced by layer `{0}`")]
    NonFinite(String),
    #[error("unknown layer `{0}`")]
    UnknownLayer(String),
}
