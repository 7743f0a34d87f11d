//! Per-arm temporal encoder: a convolutional encoder/decoder branch for short
//! range structure and an LSTM branch for long range, averaged.

use rand_chacha::ChaCha8Rng;

use crate::config::TemporalEncoderConfig;
use crate::error::{Error, Result};
use crate::layers::{avg_pool2, avg_pool2_backward, relu, relu_backward, upsample2, upsample2_backward, Conv1d, Linear, Lstm, LstmCache};
use crate::params::ParamStore;
use crate::tensor::Mat;

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalEncoder {
    pub kernel: usize,
    encoder: Vec<Conv1d>,
    decoder: Vec<Conv1d>,
    conv_head: Linear,
    lstm: Lstm,
    lstm_head: Linear,
}

/// Intermediate activations of one forward pass.
#[derive(Debug, Clone)]
pub struct EncoderCache {
    /// Input of each encoder conv, then of each decoder conv.
    conv_inputs: Vec<Mat>,
    /// ReLU output of each conv.
    conv_outputs: Vec<Mat>,
    /// Lengths before each pooling.
    lengths: Vec<usize>,
    conv_top: Mat,
    lstm_cache: LstmCache,
    lstm_out: Mat,
}

impl TemporalEncoder {
    pub fn new(store: &mut ParamStore, name: &str, input: usize, cfg: &TemporalEncoderConfig, rng: &mut ChaCha8Rng) -> Self {
        let mut encoder = Vec::new();
        let mut c = input;
        for (i, &out) in cfg.encoder_channels.iter().enumerate() {
            encoder.push(Conv1d::new(store, &format!("{name}.enc{i}"), c, out, cfg.kernel, rng));
            c = out;
        }
        let mut decoder = Vec::new();
        for (i, &out) in cfg.decoder_channels.iter().enumerate() {
            decoder.push(Conv1d::new(store, &format!("{name}.dec{i}"), c, out, cfg.kernel, rng));
            c = out;
        }
        let conv_head = Linear::new(store, &format!("{name}.conv_head"), c, cfg.output_dim, true, 1.0, rng);
        let lstm = Lstm::new(store, &format!("{name}.lstm"), input, cfg.recurrent_hidden, rng);
        let lstm_head = Linear::new(store, &format!("{name}.lstm_head"), cfg.recurrent_hidden, cfg.output_dim, true, 1.0, rng);
        Self {
            kernel: cfg.kernel,
            encoder,
            decoder,
            conv_head,
            lstm,
            lstm_head,
        }
    }

    pub fn output_dim(&self) -> usize {
        self.conv_head.output
    }

    pub fn forward(&self, p: &[f64], x: &Mat) -> Result<(Mat, EncoderCache)> {
        if x.rows < self.kernel {
            return Err(Error::validation(format!(
                "sequence of {} frames is shorter than the {}-frame kernel; pad it to at least {} frames",
                x.rows, self.kernel, self.kernel
            )));
        }
        let mut conv_inputs = Vec::new();
        let mut conv_outputs = Vec::new();
        let mut lengths = Vec::new();
        let mut h = x.clone();
        for conv in &self.encoder {
            let y = relu(&conv.forward(p, &h));
            conv_inputs.push(std::mem::replace(&mut h, avg_pool2(&y)));
            lengths.push(y.rows);
            conv_outputs.push(y);
        }
        for (conv, &len) in self.decoder.iter().zip(lengths.iter().rev()) {
            let up = upsample2(&h, len);
            let y = relu(&conv.forward(p, &up));
            conv_inputs.push(up);
            conv_outputs.push(y.clone());
            h = y;
        }
        let mut out = self.conv_head.forward(p, &h);
        let (lstm_out, lstm_cache) = self.lstm.forward(p, x);
        out.add_assign(&self.lstm_head.forward(p, &lstm_out));
        out.scale(0.5);
        Ok((
            out,
            EncoderCache {
                conv_inputs,
                conv_outputs,
                lengths,
                conv_top: h,
                lstm_cache,
                lstm_out,
            },
        ))
    }

    pub fn backward(&self, p: &[f64], x: &Mat, cache: &EncoderCache, g: &Mat, grads: &mut [f64]) -> Mat {
        let mut half = g.clone();
        half.scale(0.5);

        let d_lstm_out = self.lstm_head.backward(p, &cache.lstm_out, &half, grads);
        let mut dx = self.lstm.backward(p, x, &cache.lstm_cache, &d_lstm_out, grads);

        let mut dh = self.conv_head.backward(p, &cache.conv_top, &half, grads);
        let n_enc = self.encoder.len();
        for (k, conv) in self.decoder.iter().enumerate().rev() {
            let i = n_enc + k;
            let dy = relu_backward(&cache.conv_outputs[i], &dh);
            let dup = conv.backward(p, &cache.conv_inputs[i], &dy, grads);
            let below = if k == 0 {
                cache.lengths[n_enc - 1].div_ceil(2)
            } else {
                cache.conv_outputs[i - 1].rows
            };
            dh = upsample2_backward(below, &dup);
        }
        for (i, conv) in self.encoder.iter().enumerate().rev() {
            let dy = relu_backward(&cache.conv_outputs[i], &avg_pool2_backward(cache.lengths[i], &dh));
            dh = conv.backward(p, &cache.conv_inputs[i], &dy, grads);
        }
        dx.add_assign(&dh);
        dx
    }
}
