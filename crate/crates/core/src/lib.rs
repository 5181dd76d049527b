//! Personal health mention detection with figurative-usage features.

pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod figurative;
pub mod harness;
pub mod neuralnet;
pub mod phm;
pub mod scalar;

pub use error::{Error, ErrorKind, Result};
pub use scalar::Scalar;

pub type EmbeddingTable64 = embeddings::EmbeddingTable<f64>;
pub type EmbeddingTable32 = embeddings::EmbeddingTable<f32>;
pub type FigurativeDetector64 = figurative::FigurativeDetector<f64>;
pub type FigurativeDetector32 = figurative::FigurativeDetector<f32>;
pub type CnnModel64 = phm::CnnModel<f64>;
pub type CnnModel32 = phm::CnnModel<f32>;
pub type Tensor64 = neuralnet::Tensor<f64>;
pub type Tensor32 = neuralnet::Tensor<f32>;
