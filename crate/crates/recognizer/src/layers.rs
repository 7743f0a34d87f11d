//! Building blocks with explicit forward and backward passes. Backward
//! functions accumulate parameter gradients into a flat buffer shaped like the
//! [`ParamStore`](crate::params::ParamStore) and return the input gradient.

use rand_chacha::ChaCha8Rng;

use crate::params::{glorot, Init, ParamId, ParamStore};
use crate::tensor::{axpy, dot, Mat};

/// Row-wise affine map `y = W x + b`, `W` stored `[out][in]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linear {
    pub input: usize,
    pub output: usize,
    pub weight: ParamId,
    pub bias: Option<ParamId>,
}

impl Linear {
    pub fn new(store: &mut ParamStore, name: &str, input: usize, output: usize, bias: bool, gain: f64, rng: &mut ChaCha8Rng) -> Self {
        let weight = store.alloc(format!("{name}.weight"), &[output, input], Init::Uniform(gain * glorot(input, output)), rng);
        let bias = bias.then(|| store.alloc(format!("{name}.bias"), &[output], Init::Zeros, rng));
        Self { input, output, weight, bias }
    }

    pub fn forward(&self, p: &[f64], x: &Mat) -> Mat {
        debug_assert_eq!(x.cols, self.input);
        let w = self.weight.slice(p);
        let mut y = Mat::zeros(x.rows, self.output);
        for t in 0..x.rows {
            let xr = x.row(t);
            let yr = y.row_mut(t);
            for (o, yo) in yr.iter_mut().enumerate() {
                *yo = dot(&w[o * self.input..(o + 1) * self.input], xr);
            }
            if let Some(b) = self.bias {
                axpy(1.0, b.slice(p), yr);
            }
        }
        y
    }

    pub fn backward(&self, p: &[f64], x: &Mat, g: &Mat, grads: &mut [f64]) -> Mat {
        let n = self.input;
        let w = self.weight.slice(p);
        let mut dx = Mat::zeros(x.rows, n);
        {
            let dw = self.weight.slice_mut(grads);
            for t in 0..x.rows {
                let (xr, gr) = (x.row(t), g.row(t));
                let dxr = dx.row_mut(t);
                for (o, &go) in gr.iter().enumerate() {
                    if go != 0.0 {
                        axpy(go, xr, &mut dw[o * n..(o + 1) * n]);
                        axpy(go, &w[o * n..(o + 1) * n], dxr);
                    }
                }
            }
        }
        if let Some(b) = self.bias {
            let db = b.slice_mut(grads);
            for t in 0..g.rows {
                axpy(1.0, g.row(t), db);
            }
        }
        dx
    }
}

/// Temporal convolution with zero "same" padding; weights stored
/// `[kernel][out][in]` so the inner loop runs over contiguous input channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conv1d {
    pub input: usize,
    pub output: usize,
    pub kernel: usize,
    pub weight: ParamId,
    pub bias: ParamId,
}

impl Conv1d {
    pub fn new(store: &mut ParamStore, name: &str, input: usize, output: usize, kernel: usize, rng: &mut ChaCha8Rng) -> Self {
        assert!(kernel % 2 == 1, "kernel must be odd");
        let bound = glorot(input * kernel, output * kernel);
        let weight = store.alloc(format!("{name}.weight"), &[kernel, output, input], Init::Uniform(bound), rng);
        let bias = store.alloc(format!("{name}.bias"), &[output], Init::Zeros, rng);
        Self { input, output, kernel, weight, bias }
    }

    fn taps(&self, t: usize, len: usize) -> impl Iterator<Item = (usize, usize)> {
        let half = self.kernel / 2;
        (0..self.kernel).filter_map(move |j| {
            let src = (t + j).checked_sub(half)?;
            (src < len).then_some((j, src))
        })
    }

    pub fn forward(&self, p: &[f64], x: &Mat) -> Mat {
        let (ci, co) = (self.input, self.output);
        let w = self.weight.slice(p);
        let b = self.bias.slice(p);
        let mut y = Mat::zeros(x.rows, co);
        for t in 0..x.rows {
            let yr = y.row_mut(t);
            yr.copy_from_slice(b);
            for (j, src) in self.taps(t, x.rows) {
                let xr = x.row(src);
                let wj = &w[j * co * ci..(j + 1) * co * ci];
                for (o, yo) in yr.iter_mut().enumerate() {
                    *yo += dot(&wj[o * ci..(o + 1) * ci], xr);
                }
            }
        }
        y
    }

    pub fn backward(&self, p: &[f64], x: &Mat, g: &Mat, grads: &mut [f64]) -> Mat {
        let (ci, co) = (self.input, self.output);
        let w = self.weight.slice(p);
        let mut dx = Mat::zeros(x.rows, ci);
        {
            let dw = self.weight.slice_mut(grads);
            for t in 0..x.rows {
                let gr = g.row(t);
                for (j, src) in self.taps(t, x.rows) {
                    let xr = x.row(src);
                    let base = j * co * ci;
                    for (o, &go) in gr.iter().enumerate() {
                        if go != 0.0 {
                            axpy(go, xr, &mut dw[base + o * ci..base + (o + 1) * ci]);
                            axpy(go, &w[base + o * ci..base + (o + 1) * ci], dx.row_mut(src));
                        }
                    }
                }
            }
        }
        let db = self.bias.slice_mut(grads);
        for t in 0..g.rows {
            axpy(1.0, g.row(t), db);
        }
        dx
    }
}

/// Single-layer LSTM, gate order input, forget, cell, output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lstm {
    pub input: usize,
    pub hidden: usize,
    pub w_x: ParamId,
    pub w_h: ParamId,
    pub bias: ParamId,
}

/// Per-step activations kept for backpropagation through time.
#[derive(Debug, Clone)]
pub struct LstmCache {
    /// Gate activations `[i | f | g | o]` per step.
    gates: Mat,
    cell: Mat,
    tanh_cell: Mat,
    hidden: Mat,
}

impl Lstm {
    pub fn new(store: &mut ParamStore, name: &str, input: usize, hidden: usize, rng: &mut ChaCha8Rng) -> Self {
        let bound = 1.0 / (hidden as f64).sqrt();
        let w_x = store.alloc(format!("{name}.w_x"), &[4 * hidden, input], Init::Uniform(bound), rng);
        let w_h = store.alloc(format!("{name}.w_h"), &[4 * hidden, hidden], Init::Uniform(bound), rng);
        let bias = store.alloc(format!("{name}.bias"), &[4 * hidden], Init::Zeros, rng);
        // forget gate starts open
        store.values[bias.offset + hidden..bias.offset + 2 * hidden].fill(1.0);
        Self { input, hidden, w_x, w_h, bias }
    }

    pub fn forward(&self, p: &[f64], x: &Mat) -> (Mat, LstmCache) {
        let (h, n) = (self.hidden, self.input);
        let (wx, wh, b) = (self.w_x.slice(p), self.w_h.slice(p), self.bias.slice(p));
        let t_len = x.rows;
        let mut cache = LstmCache {
            gates: Mat::zeros(t_len, 4 * h),
            cell: Mat::zeros(t_len, h),
            tanh_cell: Mat::zeros(t_len, h),
            hidden: Mat::zeros(t_len, h),
        };
        let mut h_prev = vec![0.0; h];
        let mut c_prev = vec![0.0; h];
        for t in 0..t_len {
            let xr = x.row(t);
            let gates = cache.gates.row_mut(t);
            for (r, a) in gates.iter_mut().enumerate() {
                *a = b[r] + dot(&wx[r * n..(r + 1) * n], xr) + dot(&wh[r * h..(r + 1) * h], &h_prev);
            }
            for k in 0..h {
                gates[k] = sigmoid(gates[k]);
                gates[h + k] = sigmoid(gates[h + k]);
                gates[2 * h + k] = gates[2 * h + k].tanh();
                gates[3 * h + k] = sigmoid(gates[3 * h + k]);
            }
            for k in 0..h {
                let c = gates[h + k] * c_prev[k] + gates[k] * gates[2 * h + k];
                let tc = c.tanh();
                c_prev[k] = c;
                h_prev[k] = gates[3 * h + k] * tc;
            }
            cache.cell.row_mut(t).copy_from_slice(&c_prev);
            cache.tanh_cell.row_mut(t).copy_from_slice(&c_prev.iter().map(|c| c.tanh()).collect::<Vec<_>>());
            cache.hidden.row_mut(t).copy_from_slice(&h_prev);
        }
        (cache.hidden.clone(), cache)
    }

    pub fn backward(&self, p: &[f64], x: &Mat, cache: &LstmCache, g: &Mat, grads: &mut [f64]) -> Mat {
        let (h, n) = (self.hidden, self.input);
        let (wx, wh) = (self.w_x.slice(p), self.w_h.slice(p));
        let t_len = x.rows;
        let mut dx = Mat::zeros(t_len, n);
        let mut dwx = vec![0.0; 4 * h * n];
        let mut dwh = vec![0.0; 4 * h * h];
        let mut db = vec![0.0; 4 * h];
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        let mut da = vec![0.0; 4 * h];
        let zeros = vec![0.0; h];
        for t in (0..t_len).rev() {
            let gates = cache.gates.row(t);
            let tc = cache.tanh_cell.row(t);
            let c_prev = if t > 0 { cache.cell.row(t - 1) } else { &zeros };
            let h_prev = if t > 0 { cache.hidden.row(t - 1) } else { &zeros };
            let gr = g.row(t);
            for k in 0..h {
                let (i, f, gg, o) = (gates[k], gates[h + k], gates[2 * h + k], gates[3 * h + k]);
                let dh = gr[k] + dh_next[k];
                let dc = dh * o * (1.0 - tc[k] * tc[k]) + dc_next[k];
                da[k] = dc * gg * i * (1.0 - i);
                da[h + k] = dc * c_prev[k] * f * (1.0 - f);
                da[2 * h + k] = dc * i * (1.0 - gg * gg);
                da[3 * h + k] = dh * tc[k] * o * (1.0 - o);
                dc_next[k] = dc * f;
            }
            dh_next.fill(0.0);
            let xr = x.row(t);
            let dxr = dx.row_mut(t);
            for (r, &a) in da.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                db[r] += a;
                axpy(a, xr, &mut dwx[r * n..(r + 1) * n]);
                axpy(a, h_prev, &mut dwh[r * h..(r + 1) * h]);
                axpy(a, &wx[r * n..(r + 1) * n], dxr);
                axpy(a, &wh[r * h..(r + 1) * h], &mut dh_next);
            }
        }
        axpy(1.0, &dwx, self.w_x.slice_mut(grads));
        axpy(1.0, &dwh, self.w_h.slice_mut(grads));
        axpy(1.0, &db, self.bias.slice_mut(grads));
        dx
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn relu(x: &Mat) -> Mat {
    Mat {
        data: x.data.iter().map(|v| v.max(0.0)).collect(),
        ..*x
    }
}

/// Gradient through a ReLU given its output.
pub fn relu_backward(y: &Mat, g: &Mat) -> Mat {
    Mat {
        data: y.data.iter().zip(&g.data).map(|(y, g)| if *y > 0.0 { *g } else { 0.0 }).collect(),
        ..*g
    }
}

/// Averages pairs of consecutive steps; an odd last step passes through.
pub fn avg_pool2(x: &Mat) -> Mat {
    let rows = x.rows.div_ceil(2);
    let mut y = Mat::zeros(rows, x.cols);
    for t in 0..rows {
        let a = x.row(2 * t);
        if 2 * t + 1 < x.rows {
            let b = x.row(2 * t + 1);
            y.row_mut(t).iter_mut().zip(a.iter().zip(b)).for_each(|(y, (a, b))| *y = 0.5 * (a + b));
        } else {
            y.row_mut(t).copy_from_slice(a);
        }
    }
    y
}

pub fn avg_pool2_backward(input_rows: usize, g: &Mat) -> Mat {
    let mut dx = Mat::zeros(input_rows, g.cols);
    for t in 0..g.rows {
        if 2 * t + 1 < input_rows {
            axpy(0.5, g.row(t), dx.row_mut(2 * t));
            axpy(0.5, g.row(t), dx.row_mut(2 * t + 1));
        } else {
            axpy(1.0, g.row(t), dx.row_mut(2 * t));
        }
    }
    dx
}

/// Repeats every step twice and crops to `rows`.
pub fn upsample2(x: &Mat, rows: usize) -> Mat {
    let mut y = Mat::zeros(rows, x.cols);
    for t in 0..rows {
        y.row_mut(t).copy_from_slice(x.row(t / 2));
    }
    y
}

pub fn upsample2_backward(input_rows: usize, g: &Mat) -> Mat {
    let mut dx = Mat::zeros(input_rows, g.cols);
    for t in 0..g.rows {
        axpy(1.0, g.row(t), dx.row_mut(t / 2));
    }
    dx
}
