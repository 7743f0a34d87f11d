//! Three-node relational message passing over vision, left and right states.
//!
//! Node `i` receives `W_{j→i} h_j` from each other node `j` plus
//! `W_{self,i} h_i`; messages are summed in fixed node order and passed
//! through the activation. Weights have no bias.

use rand_chacha::ChaCha8Rng;

use crate::config::Activation;
use crate::params::{glorot, Init, ParamId, ParamStore};
use crate::tensor::{axpy, dot, Mat};

pub const NODES: [&str; 3] = ["vision", "left", "right"];

/// One relation weight per ordered node pair; `weights[dst][src]`, the
/// diagonal being the self-relation.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphLayer {
    pub dim: usize,
    pub activation: Activation,
    pub weights: [[ParamId; 3]; 3],
}

impl GraphLayer {
    pub fn new(store: &mut ParamStore, name: &str, dim: usize, activation: Activation, rng: &mut ChaCha8Rng) -> Self {
        // three summed messages: shrink so the output scale matches the input
        let bound = glorot(dim, dim) / 3f64.sqrt();
        let weights = std::array::from_fn(|dst| {
            std::array::from_fn(|src| {
                let rel = if src == dst {
                    format!("{name}.self_{}", NODES[dst])
                } else {
                    format!("{name}.{}_to_{}", NODES[src], NODES[dst])
                };
                store.alloc(rel, &[dim, dim], Init::Uniform(bound), rng)
            })
        });
        Self { dim, activation, weights }
    }

    /// Pre-activation sums and activated outputs for every node.
    pub fn forward(&self, p: &[f64], h: &[Mat; 3]) -> ([Mat; 3], [Mat; 3]) {
        let d = self.dim;
        let pre: [Mat; 3] = std::array::from_fn(|dst| {
            let mut out = Mat::zeros(h[0].rows, d);
            for src in 0..3 {
                let w = self.weights[dst][src].slice(p);
                for t in 0..out.rows {
                    let hs = h[src].row(t);
                    let o = out.row_mut(t);
                    for (r, v) in o.iter_mut().enumerate() {
                        *v += dot(&w[r * d..(r + 1) * d], hs);
                    }
                }
            }
            out
        });
        let post = pre.clone().map(|mut m| {
            m.data.iter_mut().for_each(|v| *v = self.activation.apply(*v));
            m
        });
        (pre, post)
    }

    pub fn backward(&self, p: &[f64], h: &[Mat; 3], pre: &[Mat; 3], g: &[Mat; 3], grads: &mut [f64]) -> [Mat; 3] {
        let d = self.dim;
        let mut dh: [Mat; 3] = std::array::from_fn(|i| Mat::zeros(h[i].rows, d));
        for dst in 0..3 {
            let mut dpre = g[dst].clone();
            if self.activation == Activation::Relu {
                dpre.data.iter_mut().zip(&pre[dst].data).for_each(|(g, z)| {
                    if *z <= 0.0 {
                        *g = 0.0
                    }
                });
            }
            for src in 0..3 {
                let id = self.weights[dst][src];
                let w = id.slice(p).to_vec();
                let dw = id.slice_mut(grads);
                for t in 0..dpre.rows {
                    let (gr, hs) = (dpre.row(t), h[src].row(t));
                    for (r, &gv) in gr.iter().enumerate() {
                        if gv != 0.0 {
                            axpy(gv, hs, &mut dw[r * d..(r + 1) * d]);
                            axpy(gv, &w[r * d..(r + 1) * d], dh[src].row_mut(t));
                        }
                    }
                }
            }
        }
        dh
    }
}

/// One message-passing step on per-node state vectors.
pub fn relational_graph_step(layer: &GraphLayer, p: &[f64], h: &[Vec<f64>; 3]) -> [Vec<f64>; 3] {
    let m = h.clone().map(|v| Mat::from_rows(&[v]));
    let (_, post) = layer.forward(p, &m);
    post.map(|m| m.data)
}
