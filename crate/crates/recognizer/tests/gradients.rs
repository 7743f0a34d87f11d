mod common;

use axode_recognizer::gradcheck::{gradient_check, relative_error};
use axode_recognizer::params::ParamStore;
use axode_recognizer::train::loss_and_grad;
use axode_recognizer::{Activation, GraphLayer, Mat, Model, Profile, TemporalEncoder, TrialInput};
use common::{rand_mat, random_trial, tiny_model};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn fresh_desk_model_matches_finite_differences() {
    let model = Model::new(Profile::Desk.model_config(16, 5, vec![1, 2, 3]), 1).unwrap();
    let trial = random_trial(101, 32, 16, 5, 3);
    let report = gradient_check(&model, &trial, &[1.0, 2.0, 0.5], 150, 1).unwrap();
    assert!(report.checked >= 100);
    assert!(report.max_rel_error < 1e-4, "{report:?}");
}

#[test]
fn identity_graph_model_matches_finite_differences() {
    let mut cfg = Profile::Desk.model_config(16, 5, vec![1, 2, 3]);
    cfg.graph.activation = Activation::Identity;
    let model = Model::new(cfg, 2).unwrap();
    let trial = random_trial(102, 24, 16, 5, 3);
    let report = gradient_check(&model, &trial, &[1.0; 3], 120, 2).unwrap();
    assert!(report.max_rel_error < 1e-4, "{report:?}");
}

#[test]
fn zero_batch_gives_zero_input_layer_gradients() {
    let model = tiny_model(3, 6, 5, 3);
    let mut trial = random_trial(103, 20, 6, 5, 3);
    trial.input = TrialInput {
        vision: Mat::zeros(20, 6),
        left: Mat::zeros(20, 5),
        right: Mat::zeros(20, 5),
    };
    let (_, grads) = loss_and_grad(&model, &model.params.values, &trial, &[1.0; 3], None).unwrap();
    for name in ["vision_in.weight", "left.enc0.weight", "right.enc0.weight", "left.lstm.w_x", "right.lstm.w_x"] {
        let info = model.params.find(name).unwrap();
        assert!(info.id.slice(&grads).iter().all(|&g| g == 0.0), "{name}");
    }
    // the loss still depends on the classifier bias
    let bias = model.params.find("classifier.bias").unwrap();
    assert!(bias.id.slice(&grads).iter().any(|&g| g != 0.0));
}

/// Projects an output onto fixed random weights so a scalar can be differentiated.
fn projection(rng: &mut ChaCha8Rng, m: &Mat) -> Mat {
    rand_mat(rng, m.rows, m.cols)
}

fn dot(a: &Mat, b: &Mat) -> f64 {
    a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum()
}

#[test]
fn encoder_jacobian_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut store = ParamStore::default();
    let cfg = Profile::Desk.model_config(1, 4, vec![1, 2]).encoder;
    let enc = TemporalEncoder::new(&mut store, "enc", 4, &cfg, &mut rng);
    let x = rand_mat(&mut rng, 30, 4);
    let (y, cache) = enc.forward(&store.values, &x).unwrap();
    assert_eq!((y.rows, y.cols), (30, cfg.output_dim));
    let c = projection(&mut rng, &y);
    let mut grads = store.zeros_like();
    let dx = enc.backward(&store.values, &x, &cache, &c, &mut grads);

    let h = 1e-6;
    let f = |p: &[f64], x: &Mat| dot(&enc.forward(p, x).unwrap().0, &c);
    let mut p = store.values.clone();
    for _ in 0..60 {
        let k = rng.random_range(0..p.len());
        let v = p[k];
        p[k] = v + h;
        let up = f(&p, &x);
        p[k] = v - h;
        let down = f(&p, &x);
        p[k] = v;
        let numeric = (up - down) / (2.0 * h);
        assert!(relative_error(grads[k], numeric) < 1e-4, "param {k}: {} vs {numeric}", grads[k]);
    }
    let mut xp = x.clone();
    for _ in 0..30 {
        let k = rng.random_range(0..xp.data.len());
        let v = xp.data[k];
        xp.data[k] = v + h;
        let up = f(&store.values, &xp);
        xp.data[k] = v - h;
        let down = f(&store.values, &xp);
        xp.data[k] = v;
        let numeric = (up - down) / (2.0 * h);
        assert!(relative_error(dx.data[k], numeric) < 1e-4, "input {k}: {} vs {numeric}", dx.data[k]);
    }
}

#[test]
fn linear_graph_step_gradients_are_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut store = ParamStore::default();
    let layer = GraphLayer::new(&mut store, "g", 6, Activation::Identity, &mut rng);
    let h: [Mat; 3] = std::array::from_fn(|_| rand_mat(&mut rng, 5, 6));
    let (pre, post) = layer.forward(&store.values, &h);
    let c: [Mat; 3] = std::array::from_fn(|i| projection(&mut rng, &post[i]));
    let mut grads = store.zeros_like();
    layer.backward(&store.values, &h, &pre, &c, &mut grads);

    let f = |p: &[f64]| {
        let (_, out) = layer.forward(p, &h);
        (0..3).map(|i| dot(&out[i], &c[i])).sum::<f64>()
    };
    let mut p = store.values.clone();
    let mut worst = 0f64;
    for k in 0..p.len() {
        let v = p[k];
        p[k] = v + 1e-6;
        let up = f(&p);
        p[k] = v - 1e-6;
        let down = f(&p);
        p[k] = v;
        worst = worst.max(relative_error(grads[k], (up - down) / 2e-6));
    }
    assert!(worst < 1e-7, "{worst}");
}

#[test]
fn relu_graph_step_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut store = ParamStore::default();
    let layer = GraphLayer::new(&mut store, "g", 5, Activation::Relu, &mut rng);
    let h: [Mat; 3] = std::array::from_fn(|_| rand_mat(&mut rng, 4, 5));
    let (pre, post) = layer.forward(&store.values, &h);
    let c: [Mat; 3] = std::array::from_fn(|i| projection(&mut rng, &post[i]));
    let mut grads = store.zeros_like();
    let dh = layer.backward(&store.values, &h, &pre, &c, &mut grads);
    let f = |p: &[f64], h: &[Mat; 3]| {
        let (_, out) = layer.forward(p, h);
        (0..3).map(|i| dot(&out[i], &c[i])).sum::<f64>()
    };
    let mut p = store.values.clone();
    for k in 0..p.len() {
        let v = p[k];
        p[k] = v + 1e-6;
        let up = f(&p, &h);
        p[k] = v - 1e-6;
        let down = f(&p, &h);
        p[k] = v;
        assert!(relative_error(grads[k], (up - down) / 2e-6) < 1e-4);
    }
    let mut hp = h.clone();
    for node in 0..3 {
        for k in 0..hp[node].data.len() {
            let v = hp[node].data[k];
            hp[node].data[k] = v + 1e-6;
            let up = f(&store.values, &hp);
            hp[node].data[k] = v - 1e-6;
            let down = f(&store.values, &hp);
            hp[node].data[k] = v;
            assert!(relative_error(dh[node].data[k], (up - down) / 2e-6) < 1e-4);
        }
    }
}
