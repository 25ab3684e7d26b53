use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Result};
use crate::numkit::DenseMatrix;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Self::Tanh => x.tanh(),
            Self::Relu => x.max(0.0),
            Self::Identity => x,
        }
    }
}

/// Stack of affine layers, each followed by the activation.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    weights: Vec<DenseMatrix>,
    biases: Vec<Vec<f64>>,
    activation: Activation,
}

impl MlpParams {
    pub fn new(weights: Vec<DenseMatrix>, biases: Vec<Vec<f64>>, activation: Activation) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return dim_err("need one bias per weight matrix and at least one layer");
        }
        for (i, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if b.len() != w.rows() {
                return dim_err(format!("layer {i}: bias length {} for {} outputs", b.len(), w.rows()));
            }
            if i > 0 && weights[i - 1].rows() != w.cols() {
                return dim_err(format!("layer {i} expects {} inputs, previous layer gives {}", w.cols(), weights[i - 1].rows()));
            }
            if b.iter().any(|v| !v.is_finite()) {
                return dim_err("biases must be finite");
            }
        }
        Ok(Self { weights, biases, activation })
    }

    /// Uniform(−1/√fan_in, 1/√fan_in) weights and biases.
    pub fn random(widths: &[usize], activation: Activation, rng: &mut Rng) -> Result<Self> {
        if widths.len() < 2 {
            return dim_err("an MLP needs input and output widths");
        }
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in widths.windows(2) {
            let bound = 1.0 / (w[0].max(1) as f64).sqrt();
            weights.push(DenseMatrix::from_fn(w[1], w[0], |_, _| rng.gen_range(-bound..bound)));
            biases.push((0..w[1]).map(|_| rng.gen_range(-bound..bound)).collect());
        }
        Self::new(weights, biases, activation)
    }

    pub fn identity(d: usize) -> Self {
        Self { weights: vec![DenseMatrix::identity(d)], biases: vec![vec![0.0; d]], activation: Activation::Identity }
    }

    /// Single affine layer with zero weights and biases.
    pub fn zeros(input: usize, output: usize, activation: Activation) -> Self {
        Self { weights: vec![DenseMatrix::zeros(output, input)], biases: vec![vec![0.0; output]], activation }
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.last().expect("non-empty").rows()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return dim_err(format!("MLP expects {} inputs, got {}", self.input_dim(), x.len()));
        }
        let mut h = x.to_vec();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            h = w.matvec(&h)?;
            for (v, bi) in h.iter_mut().zip(b) {
                *v = self.activation.apply(*v + bi);
            }
        }
        Ok(h)
    }
}
