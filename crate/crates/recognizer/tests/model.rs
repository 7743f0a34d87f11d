mod common;

use axode_recognizer::params::ParamStore;
use axode_recognizer::{relational_graph_step, Activation, Error, GraphLayer, Mat, Model, Profile, TemporalEncoder, TrialInput};
use common::{rand_mat, random_trial, tiny_model};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn zero_input_gives_zero_encoding() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut store = ParamStore::default();
    let cfg = Profile::Desk.model_config(1, 5, vec![1, 2]).encoder;
    let enc = TemporalEncoder::new(&mut store, "enc", 5, &cfg, &mut rng);
    let (y, _) = enc.forward(&store.values, &Mat::zeros(40, 5)).unwrap();
    assert!(y.data.iter().all(|&v| v == 0.0));
}

#[test]
fn paper_profile_output_shape() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut store = ParamStore::default();
    let cfg = Profile::Paper.model_config(1, 9, vec![1, 2]).encoder;
    let enc = TemporalEncoder::new(&mut store, "enc", 9, &cfg, &mut rng);
    let (y, _) = enc.forward(&store.values, &rand_mat(&mut rng, 200, 9)).unwrap();
    assert_eq!((y.rows, y.cols), (200, 64));
}

#[test]
fn short_sequence_is_rejected() {
    let model = Model::new(Profile::Desk.model_config(4, 5, vec![1, 2]), 0).unwrap();
    let x = random_trial(1, 14, 4, 5, 2).input;
    match model.predict_frames(&x) {
        Err(Error::Validation(msg)) => assert!(msg.contains("pad"), "{msg}"),
        other => panic!("expected validation error, got {other:?}"),
    }
    assert!(model.predict_frames(&random_trial(1, 15, 4, 5, 2).input).is_ok());
}

fn layer_with(weights: impl Fn(usize, usize) -> f64, activation: Activation, dim: usize) -> (GraphLayer, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut store = ParamStore::default();
    let layer = GraphLayer::new(&mut store, "g", dim, activation, &mut rng);
    for dst in 0..3 {
        for src in 0..3 {
            let w = layer.weights[dst][src].slice_mut(&mut store.values);
            for r in 0..dim {
                for c in 0..dim {
                    w[r * dim + c] = if r == c { weights(dst, src) } else { 0.0 };
                }
            }
        }
    }
    (layer, store.values)
}

#[test]
fn zero_relations_give_activation_of_zero() {
    let (layer, p) = layer_with(|_, _| 0.0, Activation::Relu, 3);
    let h = [vec![1.0, -2.0, 3.0], vec![0.5, 0.5, 0.5], vec![-1.0, 4.0, 2.0]];
    for out in relational_graph_step(&layer, &p, &h) {
        assert_eq!(out, vec![0.0; 3]);
    }
}

#[test]
fn identity_relations_sum_neighbours() {
    let (layer, p) = layer_with(|_, _| 1.0, Activation::Relu, 3);
    let h = [vec![1.0, -2.0, 3.0], vec![0.5, 0.5, -5.0], vec![-1.0, 4.0, 2.0]];
    let out = relational_graph_step(&layer, &p, &h);
    let want: Vec<f64> = (0..3).map(|k| (h[0][k] + h[1][k] + h[2][k]).max(0.0)).collect();
    for node in out {
        assert_eq!(node, want);
    }
}

#[test]
fn identity_activation_superposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut store = ParamStore::default();
    let layer = GraphLayer::new(&mut store, "g", 4, Activation::Identity, &mut rng);
    let p = store.values;
    let rv = |rng: &mut ChaCha8Rng| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
    let a = [rv(&mut rng), rv(&mut rng), rv(&mut rng)];
    let b = [a[0].clone(), rv(&mut rng), a[2].clone()];
    let sum = [a[0].clone(), a[1].iter().zip(&b[1]).map(|(x, y)| x + y).collect(), a[2].clone()];
    let zero_other = [a[0].clone(), vec![0.0; 4], a[2].clone()];
    let (fa, fb, fs, f0) = (
        relational_graph_step(&layer, &p, &a),
        relational_graph_step(&layer, &p, &b),
        relational_graph_step(&layer, &p, &sum),
        relational_graph_step(&layer, &p, &zero_other),
    );
    // f(a + b) = f(a) + f(b) - f(0) when only the left state varies
    for n in 0..3 {
        for k in 0..4 {
            assert!((fs[n][k] - (fa[n][k] + fb[n][k] - f0[n][k])).abs() < 1e-12);
        }
    }
}

#[test]
fn message_order_changes_outputs_only_by_rounding() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut store = ParamStore::default();
    let dim = 8;
    let layer = GraphLayer::new(&mut store, "g", dim, Activation::Identity, &mut rng);
    let h: [Vec<f64>; 3] = std::array::from_fn(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect());
    let out = relational_graph_step(&layer, &store.values, &h);
    for dst in 0..3 {
        // accumulate messages in reverse sender order
        let mut rev = vec![0.0; dim];
        for src in (0..3).rev() {
            let w = layer.weights[dst][src].slice(&store.values);
            for r in 0..dim {
                rev[r] += (0..dim).map(|c| w[r * dim + c] * h[src][c]).sum::<f64>();
            }
        }
        for r in 0..dim {
            assert!((rev[r] - out[dst][r]).abs() < 1e-12);
        }
    }
    // fixed order is reproducible bit for bit
    assert_eq!(out, relational_graph_step(&layer, &store.values, &h));
}

#[test]
fn predictions_are_distributions() {
    let model = tiny_model(6, 6, 5, 4);
    let probs = model.predict_frames(&random_trial(6, 30, 6, 5, 4).input).unwrap();
    assert_eq!((probs.rows, probs.cols), (30, 4));
    for t in 0..probs.rows {
        let s: f64 = probs.row(t).iter().sum();
        assert!((s - 1.0).abs() < 1e-9);
    }
}

#[test]
fn untrained_model_is_near_uniform() {
    let model = Model::new(Profile::Desk.model_config(16, 5, vec![1, 2, 3]), 7).unwrap();
    let probs = model.predict_frames(&random_trial(7, 50, 16, 5, 3).input).unwrap();
    assert!(probs.data.iter().all(|p| (p - 1.0 / 3.0).abs() < 0.02));
}

#[test]
fn mismatched_lengths_are_rejected() {
    let model = tiny_model(8, 6, 5, 3);
    let mut x = random_trial(8, 30, 6, 5, 3).input;
    x.left = Mat::zeros(29, 5);
    assert!(matches!(model.predict_frames(&x), Err(Error::Validation(_))));
    let wrong_width = TrialInput {
        vision: Mat::zeros(30, 7),
        ..random_trial(8, 30, 6, 5, 3).input
    };
    assert!(model.predict_frames(&wrong_width).is_err());
}

#[test]
fn same_seed_same_model() {
    let a = Model::new(Profile::Desk.model_config(8, 5, vec![1, 2]), 11).unwrap();
    let b = Model::new(Profile::Desk.model_config(8, 5, vec![1, 2]), 11).unwrap();
    assert_eq!(a.params, b.params);
}
