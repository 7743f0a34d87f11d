use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ModelConfig;
use crate::encoder::{EncoderCache, TemporalEncoder};
use crate::error::{Error, Result};
use crate::graph::GraphLayer;
use crate::layers::Linear;
use crate::loss::softmax_rows;
use crate::params::ParamStore;
use crate::tensor::Mat;

/// Scale of the classifier's initial weights; small so that an untrained
/// model predicts nearly uniform distributions.
const CLASSIFIER_GAIN: f64 = 0.01;

/// Per-frame inputs of one trial; all three have the same row count.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialInput {
    pub vision: Mat,
    pub left: Mat,
    pub right: Mat,
}

impl TrialInput {
    pub fn frames(&self) -> usize {
        self.vision.rows
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub params: ParamStore,
    left: TemporalEncoder,
    right: TemporalEncoder,
    vision_in: Linear,
    left_in: Linear,
    right_in: Linear,
    graph: Vec<GraphLayer>,
    classifier: Linear,
}

/// Everything the backward pass needs from a forward pass.
#[derive(Debug, Clone)]
pub struct Trace {
    left_cache: EncoderCache,
    right_cache: EncoderCache,
    left_code: Mat,
    right_code: Mat,
    /// Graph inputs per layer, plus the final output.
    states: Vec<[Mat; 3]>,
    pre: Vec<[Mat; 3]>,
    /// Dropout multipliers per layer (empty when disabled).
    drop: Vec<Option<[Vec<f64>; 3]>>,
    joined: Mat,
    pub probs: Mat,
}

impl Model {
    /// Fresh model with seeded random weights and zero biases.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        Self::with_classifier_gain(config, seed, CLASSIFIER_GAIN)
    }

    /// Like [`new`](Self::new) with the classifier's initial weight bound
    /// scaled by `gain` instead of the near-uniform default.
    pub fn with_classifier_gain(config: ModelConfig, seed: u64, gain: f64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::default();
        let e = &config.encoder;
        let hd = config.graph.hidden_dim;
        let left = TemporalEncoder::new(&mut store, "left", config.kinematic_dim, e, &mut rng);
        let right = TemporalEncoder::new(&mut store, "right", config.kinematic_dim, e, &mut rng);
        let vision_in = Linear::new(&mut store, "vision_in", config.vision_dim, hd, true, 1.0, &mut rng);
        let left_in = Linear::new(&mut store, "left_in", e.output_dim, hd, true, 1.0, &mut rng);
        let right_in = Linear::new(&mut store, "right_in", e.output_dim, hd, true, 1.0, &mut rng);
        let graph = (0..config.graph.layers)
            .map(|l| GraphLayer::new(&mut store, &format!("graph{l}"), hd, config.graph.activation, &mut rng))
            .collect();
        let classifier = Linear::new(&mut store, "classifier", 3 * hd, config.classes.len(), true, gain, &mut rng);
        Ok(Self {
            config,
            params: store,
            left,
            right,
            vision_in,
            left_in,
            right_in,
            graph,
            classifier,
        })
    }

    pub fn classes(&self) -> usize {
        self.config.classes.len()
    }

    pub fn check_input(&self, x: &TrialInput) -> Result<()> {
        let t = x.vision.rows;
        if x.left.rows != t || x.right.rows != t {
            return Err(Error::validation(format!(
                "frame counts differ: vision {t}, left {}, right {}",
                x.left.rows, x.right.rows
            )));
        }
        if x.vision.cols != self.config.vision_dim {
            return Err(Error::validation(format!(
                "vision width {} but model expects {}",
                x.vision.cols, self.config.vision_dim
            )));
        }
        if x.left.cols != self.config.kinematic_dim || x.right.cols != self.config.kinematic_dim {
            return Err(Error::validation(format!(
                "kinematic width {}/{} but model expects {}",
                x.left.cols, x.right.cols, self.config.kinematic_dim
            )));
        }
        Ok(())
    }

    /// Forward pass with parameters `p`. Dropout is applied when `rng` is given.
    pub fn forward_with(&self, p: &[f64], x: &TrialInput, mut rng: Option<&mut ChaCha8Rng>) -> Result<Trace> {
        self.check_input(x)?;
        let (left_code, left_cache) = self.left.forward(p, &x.left)?;
        let (right_code, right_cache) = self.right.forward(p, &x.right)?;
        let mut h = [
            self.vision_in.forward(p, &x.vision),
            self.left_in.forward(p, &left_code),
            self.right_in.forward(p, &right_code),
        ];
        let rate = self.config.graph.dropout;
        let mut states = Vec::new();
        let mut pres = Vec::new();
        let mut drops = Vec::new();
        for layer in &self.graph {
            let (pre, mut post) = layer.forward(p, &h);
            let drop = match rng.as_deref_mut() {
                Some(r) if rate > 0.0 => {
                    let keep = 1.0 / (1.0 - rate);
                    let masks: [Vec<f64>; 3] = std::array::from_fn(|i| {
                        (0..post[i].data.len())
                            .map(|_| if r.random::<f64>() < rate { 0.0 } else { keep })
                            .collect()
                    });
                    for (m, mask) in post.iter_mut().zip(&masks) {
                        m.data.iter_mut().zip(mask).for_each(|(v, k)| *v *= k);
                    }
                    Some(masks)
                }
                _ => None,
            };
            states.push(std::mem::replace(&mut h, post));
            pres.push(pre);
            drops.push(drop);
        }
        let joined = Mat::hcat(&[&h[0], &h[1], &h[2]]);
        states.push(h);
        let probs = softmax_rows(&self.classifier.forward(p, &joined));
        Ok(Trace {
            left_cache,
            right_cache,
            left_code,
            right_code,
            states,
            pre: pres,
            drop: drops,
            joined,
            probs,
        })
    }

    pub fn forward(&self, x: &TrialInput, rng: Option<&mut ChaCha8Rng>) -> Result<Trace> {
        self.forward_with(&self.params.values, x, rng)
    }

    /// Accumulates into `grads` the gradient of a loss whose derivative with
    /// respect to the classifier logits is `dlogits`.
    pub fn backward_with(&self, p: &[f64], x: &TrialInput, tr: &Trace, dlogits: &Mat, grads: &mut [f64]) {
        let hd = self.config.graph.hidden_dim;
        let djoined = self.classifier.backward(p, &tr.joined, dlogits, grads);
        let parts = djoined.hsplit(&[hd, hd, hd]);
        let mut dh: [Mat; 3] = [parts[0].clone(), parts[1].clone(), parts[2].clone()];
        for (l, layer) in self.graph.iter().enumerate().rev() {
            if let Some(masks) = &tr.drop[l] {
                for (g, m) in dh.iter_mut().zip(masks) {
                    g.data.iter_mut().zip(m).for_each(|(g, k)| *g *= k);
                }
            }
            dh = layer.backward(p, &tr.states[l], &tr.pre[l], &dh, grads);
        }
        self.vision_in.backward(p, &x.vision, &dh[0], grads);
        let dl = self.left_in.backward(p, &tr.left_code, &dh[1], grads);
        self.left.backward(p, &x.left, &tr.left_cache, &dl, grads);
        let dr = self.right_in.backward(p, &tr.right_code, &dh[2], grads);
        self.right.backward(p, &x.right, &tr.right_cache, &dr, grads);
    }

    /// Per-frame class probabilities, dropout off.
    pub fn predict_frames(&self, x: &TrialInput) -> Result<Mat> {
        Ok(self.forward(x, None)?.probs)
    }

    /// Arg-max class index per frame.
    pub fn predict_classes(&self, x: &TrialInput) -> Result<Vec<usize>> {
        let probs = self.predict_frames(x)?;
        Ok((0..probs.rows).map(|t| argmax(probs.row(t))).collect())
    }

    pub fn graph_layers(&self) -> &[GraphLayer] {
        &self.graph
    }

    pub fn encoders(&self) -> [&TemporalEncoder; 2] {
        [&self.left, &self.right]
    }
}

pub fn argmax(row: &[f64]) -> usize {
    row.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0
}
