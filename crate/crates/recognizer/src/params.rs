//! All trainable parameters live in one flat vector; layers hold handles.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Handle to one named tensor inside a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamId {
    pub offset: usize,
    pub len: usize,
}

impl ParamId {
    #[inline]
    pub fn slice<'a>(&self, flat: &'a [f64]) -> &'a [f64] {
        &flat[self.offset..self.offset + self.len]
    }

    #[inline]
    pub fn slice_mut<'a>(&self, flat: &'a mut [f64]) -> &'a mut [f64] {
        &mut flat[self.offset..self.offset + self.len]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamInfo {
    pub name: String,
    pub shape: Vec<usize>,
    pub id: ParamId,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamStore {
    pub values: Vec<f64>,
    pub info: Vec<ParamInfo>,
}

/// How a freshly allocated tensor is filled.
#[derive(Debug, Clone, Copy)]
pub enum Init {
    Zeros,
    Const(f64),
    Uniform(f64),
}

impl ParamStore {
    pub fn alloc(&mut self, name: impl Into<String>, shape: &[usize], init: Init, rng: &mut ChaCha8Rng) -> ParamId {
        let len = shape.iter().product();
        let id = ParamId {
            offset: self.values.len(),
            len,
        };
        self.values.extend((0..len).map(|_| match init {
            Init::Zeros => 0.0,
            Init::Const(c) => c,
            Init::Uniform(a) => rng.random_range(-a..=a),
        }));
        self.info.push(ParamInfo {
            name: name.into(),
            shape: shape.to_vec(),
            id,
        });
        id
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn zeros_like(&self) -> Vec<f64> {
        vec![0.0; self.values.len()]
    }

    pub fn find(&self, name: &str) -> Option<&ParamInfo> {
        self.info.iter().find(|p| p.name == name)
    }
}

/// Glorot-style uniform bound.
pub fn glorot(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}
