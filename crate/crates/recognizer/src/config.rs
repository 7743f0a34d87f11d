use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalEncoderConfig {
    pub encoder_channels: Vec<usize>,
    pub decoder_channels: Vec<usize>,
    /// Odd temporal kernel width in frames.
    pub kernel: usize,
    pub recurrent_hidden: usize,
    /// Width of both branches, which are averaged.
    pub output_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphConfig {
    pub hidden_dim: usize,
    pub dropout: f64,
    pub layers: usize,
    pub activation: Activation,
}

/// Architecture plus the input widths and gesture vocabulary it was built for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub profile: String,
    pub encoder: TemporalEncoderConfig,
    pub graph: GraphConfig,
    pub vision_dim: usize,
    pub kinematic_dim: usize,
    /// Gesture ids, in output-column order.
    pub classes: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// Narrow layers that train in seconds on a CPU.
    Desk,
    /// Published layer widths.
    Paper,
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Profile::Desk),
            "paper" => Ok(Profile::Paper),
            other => Err(Error::validation(format!("unknown profile {other:?} (desk|paper)"))),
        }
    }
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Desk => "desk",
            Profile::Paper => "paper",
        }
    }

    pub fn model_config(self, vision_dim: usize, kinematic_dim: usize, classes: Vec<u32>) -> ModelConfig {
        let (enc, dec, kernel, rec, out, hidden) = match self {
            Profile::Desk => (vec![16, 24, 32], vec![24, 16, 16], 15, 32, 16, 16),
            Profile::Paper => (vec![64, 96, 128], vec![96, 64, 64], 51, 128, 64, 64),
        };
        ModelConfig {
            profile: self.name().into(),
            encoder: TemporalEncoderConfig {
                encoder_channels: enc,
                decoder_channels: dec,
                kernel,
                recurrent_hidden: rec,
                output_dim: out,
            },
            graph: GraphConfig {
                hidden_dim: hidden,
                dropout: 0.2,
                layers: 1,
                activation: Activation::Relu,
            },
            vision_dim,
            kinematic_dim,
            classes,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let e = &self.encoder;
        if e.kernel % 2 == 0 {
            return Err(Error::validation("kernel must be odd"));
        }
        if e.encoder_channels.is_empty() || e.encoder_channels.len() != e.decoder_channels.len() {
            return Err(Error::validation("encoder and decoder need the same non-zero depth"));
        }
        if self.classes.len() < 2 {
            return Err(Error::validation("need at least 2 gesture classes"));
        }
        if !(0.0..1.0).contains(&self.graph.dropout) {
            return Err(Error::validation("dropout must be in [0, 1)"));
        }
        if [e.recurrent_hidden, e.output_dim, self.graph.hidden_dim, self.vision_dim, self.kinematic_dim, self.graph.layers]
            .contains(&0)
        {
            return Err(Error::validation("zero-sized layer"));
        }
        Ok(())
    }
}
