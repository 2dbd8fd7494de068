//! Knee-osteoarthritis grading from bioimpedance readings.
//!
//! Modules:
//! - [`dataio`]: CSV ingestion, label encoding, standardisation, stratified split.
//! - [`nncore`]: tensors and the hand-differentiated 1-D CNN.
//! - [`trainer`]: Adam, early stopping with best-weight restore, checkpoints.
//! - [`metrics`]: confusion matrix, per-class report, one-vs-rest ROC/AUC.
//! - [`acqsim`]: DFT impedance-converter and relay-scan simulator.
//! - [`pipeline`] and [`config`]: the end-to-end run used by the `koa` binary.
//!
//! The numeric core is generic over [`Scalar`] (`f32`, `f64`); the aliases
//! below fix it to `f64`, which is what the pipeline uses.

// Range checks are written `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod acqsim;
pub mod config;
pub mod dataio;
pub mod metrics;
pub mod nncore;
pub mod pipeline;
pub mod rng;
pub mod scalar;
pub mod trainer;

pub use scalar::Scalar;

pub type Tensor64 = nncore::Tensor<f64>;
pub type Tensor32 = nncore::Tensor<f32>;
pub type ParamStore64 = nncore::ParamStore<f64>;
pub type ParamStore32 = nncore::ParamStore<f32>;
pub type Model64 = nncore::Model<f64>;
pub type Model32 = nncore::Model<f32>;
pub type EncodedDataset64 = dataio::EncodedDataset<f64>;
pub type ScalerParams64 = dataio::ScalerParams<f64>;
