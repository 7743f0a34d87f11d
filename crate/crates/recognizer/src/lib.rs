//! Frame-wise surgical gesture recognizer trained with hand-written
//! backpropagation in `f64`.
//!
//! Each arm's feature sequence goes through a [`TemporalEncoder`]; the two
//! codes and the vision features become the three nodes of a relational
//! [`GraphLayer`], whose outputs feed a per-frame softmax classifier.

pub mod checkpoint;
pub mod config;
pub mod data;
pub mod dataset;
pub mod encoder;
pub mod error;
pub mod gradcheck;
pub mod graph;
pub mod layers;
pub mod loss;
pub mod model;
pub mod params;
pub mod tensor;
pub mod train;

pub use config::{Activation, GraphConfig, ModelConfig, Profile, TemporalEncoderConfig};
pub use encoder::TemporalEncoder;
pub use error::{Error, Result};
pub use graph::{relational_graph_step, GraphLayer};
pub use model::{Model, TrialInput};
pub use tensor::Mat;
pub use train::{train, ClassWeighting, EpochMetrics, ModelState, TrainConfig, TrainOutcome, TrialData};
