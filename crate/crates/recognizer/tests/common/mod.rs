#![allow(dead_code)]

use axode_recognizer::{Mat, Model, Profile, TemporalEncoderConfig, TrialData, TrialInput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rand_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    Mat {
        rows,
        cols,
        data: (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect(),
    }
}

pub fn random_trial(seed: u64, frames: usize, vision: usize, kin: usize, classes: usize) -> TrialData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TrialData {
        name: format!("random{seed}"),
        input: TrialInput {
            vision: rand_mat(&mut rng, frames, vision),
            left: rand_mat(&mut rng, frames, kin),
            right: rand_mat(&mut rng, frames, kin),
        },
        labels: (0..frames).map(|t| (t / 7) % classes).collect(),
        mask: vec![true; frames],
    }
}

/// Same topology as the desk profile with much narrower layers.
pub fn tiny_model(seed: u64, vision: usize, kin: usize, classes: usize) -> Model {
    let mut cfg = Profile::Desk.model_config(vision, kin, (1..=classes as u32).collect());
    cfg.encoder = TemporalEncoderConfig {
        encoder_channels: vec![4, 5, 6],
        decoder_channels: vec![5, 4, 4],
        kernel: 5,
        recurrent_hidden: 6,
        output_dim: 4,
    };
    cfg.graph.hidden_dim = 4;
    Model::new(cfg, seed).unwrap()
}
