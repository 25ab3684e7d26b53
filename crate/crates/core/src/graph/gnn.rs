use std::str::FromStr;

use rand::Rng as _;

use super::mlp::{Activation, MlpParams};
use super::Graph;
use crate::error::{arg_err, dim_err, Error, Result};
use crate::numkit::{DenseMatrix, SparseMatrix};
use crate::rng::Rng;
use crate::tree_sum::{tree_sum_scalars, tree_sum_vectors};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavour {
    Conv,
    Attn,
    Mpnn,
}

impl Flavour {
    pub const ALL: [Flavour; 3] = [Flavour::Conv, Flavour::Attn, Flavour::Mpnn];

    pub fn name(self) -> &'static str {
        match self {
            Self::Conv => "conv",
            Self::Attn => "attn",
            Self::Mpnn => "mpnn",
        }
    }
}

impl FromStr for Flavour {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conv" => Ok(Self::Conv),
            "attn" => Ok(Self::Attn),
            "mpnn" => Ok(Self::Mpnn),
            other => arg_err(format!("unknown flavour {other:?} (expected conv, attn or mpnn)")),
        }
    }
}

/// Scores `qᵀ tanh(W x_u + U x_v)`, softmax-normalised over the neighbourhood.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams {
    pub w: DenseMatrix,
    pub u: DenseMatrix,
    pub q: Vec<f64>,
}

impl AttentionParams {
    pub fn random(d: usize, width: usize, rng: &mut Rng) -> Self {
        let bound = 1.0 / (d.max(1) as f64).sqrt();
        let qb = 1.0 / (width.max(1) as f64).sqrt();
        Self {
            w: DenseMatrix::from_fn(width, d, |_, _| rng.gen_range(-bound..bound)),
            u: DenseMatrix::from_fn(width, d, |_, _| rng.gen_range(-bound..bound)),
            q: (0..width).map(|_| rng.gen_range(-qb..qb)).collect(),
        }
    }

    fn score(&self, xu: &[f64], xv: &[f64]) -> Result<f64> {
        let a = self.w.matvec(xu)?;
        let b = self.u.matvec(xv)?;
        Ok(self.q.iter().zip(a.iter().zip(&b)).map(|(q, (a, b))| q * (a + b).tanh()).sum())
    }
}

/// Parameters of one message-passing layer `h_u = φ(x_u ∥ ⊕_v m_uv)`.
///
/// `psi` maps `x_v` (conv, attn) or `x_u ∥ x_v` (mpnn) to a message; `phi`
/// reads the node features concatenated with the aggregate. With
/// `self_loops` every node also receives its own message.
#[derive(Debug, Clone, PartialEq)]
pub struct GnnParams {
    pub psi: MlpParams,
    pub phi: MlpParams,
    pub attention: Option<AttentionParams>,
    pub self_loops: bool,
}

impl GnnParams {
    pub fn random(flavour: Flavour, d: usize, hidden: usize, out: usize, rng: &mut Rng) -> Result<Self> {
        let psi_in = if flavour == Flavour::Mpnn { 2 * d } else { d };
        let psi = MlpParams::random(&[psi_in, hidden], Activation::Tanh, rng)?;
        let phi = MlpParams::random(&[d + hidden, out], Activation::Tanh, rng)?;
        let attention = (flavour == Flavour::Attn).then(|| AttentionParams::random(d, hidden, rng));
        Ok(Self { psi, phi, attention, self_loops: true })
    }

    /// Input feature width expected by `phi`.
    pub fn input_dim(&self) -> usize {
        self.phi.input_dim() - self.psi.output_dim()
    }
}

fn neighbourhood(g: &Graph, u: usize, self_loops: bool) -> Vec<usize> {
    let mut nb = g.neighbours(u);
    if self_loops {
        if let Err(pos) = nb.binary_search(&u) {
            nb.insert(pos, u);
        }
    }
    nb
}

/// Shared update: `h_u = φ(x_u ∥ Σ_v message(u, v))`, neighbours in index
/// order, summed over the fixed reduction tree.
fn aggregate(
    g: &Graph,
    phi: &MlpParams,
    self_loops: bool,
    width: usize,
    mut message: impl FnMut(usize, usize) -> Result<Vec<f64>>,
) -> Result<DenseMatrix> {
    let d = g.feature_dim();
    if phi.input_dim() != d + width {
        return dim_err(format!("φ expects {} inputs, features ∥ aggregate give {}", phi.input_dim(), d + width));
    }
    let mut out = DenseMatrix::zeros(g.n(), phi.output_dim());
    for u in 0..g.n() {
        let msgs = neighbourhood(g, u, self_loops)
            .into_iter()
            .map(|v| message(u, v))
            .collect::<Result<Vec<_>>>()?;
        if msgs.iter().any(|m| m.len() != width) {
            return dim_err(format!("messages must have width {width}"));
        }
        let mut input = g.features().row(u).to_vec();
        input.extend(tree_sum_vectors(&msgs, width));
        out.row_mut(u).copy_from_slice(&phi.forward(&input)?);
    }
    Ok(out)
}

fn psi_rows(g: &Graph, psi: &MlpParams) -> Result<Vec<Vec<f64>>> {
    (0..g.n()).map(|v| psi.forward(g.features().row(v))).collect()
}

/// Attention layer with the attention mechanism replaced by `coeff(u, v)`.
pub fn attn_forward_with(g: &Graph, params: &GnnParams, coeff: impl Fn(usize, usize) -> f64) -> Result<DenseMatrix> {
    let psi = psi_rows(g, &params.psi)?;
    aggregate(g, &params.phi, params.self_loops, params.psi.output_dim(), |u, v| {
        let c = coeff(u, v);
        Ok(psi[v].iter().map(|p| c * p).collect())
    })
}

/// Message-passing layer with the message function replaced by `message(u, v)`.
pub fn mpnn_forward_with(
    g: &Graph,
    phi: &MlpParams,
    self_loops: bool,
    width: usize,
    message: impl Fn(usize, usize) -> Vec<f64>,
) -> Result<DenseMatrix> {
    aggregate(g, phi, self_loops, width, |u, v| Ok(message(u, v)))
}

/// Softmax attention weights of node `u` over its neighbourhood, in index order.
pub fn attention_coefficients(g: &Graph, att: &AttentionParams, self_loops: bool, u: usize) -> Result<Vec<(usize, f64)>> {
    let nb = neighbourhood(g, u, self_loops);
    let xu = g.features().row(u);
    let scores = nb.iter().map(|&v| att.score(xu, g.features().row(v))).collect::<Result<Vec<_>>>()?;
    if scores.is_empty() {
        return Ok(Vec::new());
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let z = tree_sum_scalars(&exps);
    if !z.is_finite() || z <= 0.0 || !max.is_finite() {
        return Err(Error::DegenerateAttention { node: u });
    }
    Ok(nb.into_iter().zip(exps).map(|(v, e)| (v, e / z)).collect())
}

fn degrees(g: &Graph, self_loops: bool) -> Vec<f64> {
    (0..g.n()).map(|u| neighbourhood(g, u, self_loops).len() as f64).collect()
}

pub fn gnn_forward(g: &Graph, flavour: Flavour, params: &GnnParams) -> Result<DenseMatrix> {
    let d = g.feature_dim();
    match flavour {
        Flavour::Conv => {
            let deg = degrees(g, params.self_loops);
            attn_forward_with(g, params, |u, v| 1.0 / (deg[u] * deg[v]).sqrt())
        }
        Flavour::Attn => {
            let Some(att) = &params.attention else {
                return arg_err("attention flavour needs attention parameters");
            };
            if att.w.cols() != d || att.u.cols() != d || att.q.len() != att.w.rows() || att.u.rows() != att.w.rows() {
                return dim_err("attention parameter shapes do not match the features");
            }
            let coeffs = (0..g.n())
                .map(|u| attention_coefficients(g, att, params.self_loops, u))
                .collect::<Result<Vec<_>>>()?;
            attn_forward_with(g, params, |u, v| {
                coeffs[u].iter().find(|(w, _)| *w == v).map(|&(_, a)| a).expect("v is a neighbour of u")
            })
        }
        Flavour::Mpnn => {
            if params.psi.input_dim() != 2 * d {
                return dim_err(format!("mpnn ψ expects {} inputs, needs {}", params.psi.input_dim(), 2 * d));
            }
            aggregate(g, &params.phi, params.self_loops, params.psi.output_dim(), |u, v| {
                let mut pair = g.features().row(u).to_vec();
                pair.extend_from_slice(g.features().row(v));
                params.psi.forward(&pair)
            })
        }
    }
}

/// `φ(Σ_u ψ(x_u))` with the fixed reduction tree; the empty set maps to `φ(0)`.
pub fn deepsets_forward(x: &DenseMatrix, psi: &MlpParams, phi: &MlpParams) -> Result<Vec<f64>> {
    if psi.output_dim() != phi.input_dim() {
        return dim_err("ψ output width must equal φ input width");
    }
    let rows = (0..x.rows()).map(|u| psi.forward(x.row(u))).collect::<Result<Vec<_>>>()?;
    phi.forward(&tree_sum_vectors(&rows, psi.output_dim()))
}

/// `αX + β·(1/n)𝟙𝟙ᵀX`.
pub fn set_linear_equivariant(x: &DenseMatrix, alpha: f64, beta: f64) -> Result<DenseMatrix> {
    let n = x.rows();
    if n == 0 {
        return arg_err("set must be non-empty");
    }
    let means: Vec<f64> = (0..x.cols()).map(|c| tree_sum_scalars(&x.column(c)) / n as f64).collect();
    Ok(DenseMatrix::from_fn(n, x.cols(), |r, c| alpha * x[(r, c)] + beta * means[c]))
}

/// Sinusoidal encodings: `(u, 2i) ↦ sin(u/10000^{2i/d})`, `(u, 2i+1) ↦ cos(…)`.
pub fn positional_encoding(n: usize, d: usize) -> Result<DenseMatrix> {
    if d % 2 != 0 {
        return arg_err(format!("encoding width must be even, got {d}"));
    }
    Ok(DenseMatrix::from_fn(n, d, |u, c| {
        let i = c / 2;
        let angle = u as f64 / 10000f64.powf(2.0 * i as f64 / d as f64);
        if c % 2 == 0 {
            angle.sin()
        } else {
            angle.cos()
        }
    }))
}

/// Attention layer on the complete graph with self-edges.
///
/// With `use_positional` the features are extended by sinusoidal encodings
/// whose width is whatever `params` expects beyond `x.cols()`.
pub fn transformer_forward(x: &DenseMatrix, params: &GnnParams, use_positional: bool) -> Result<DenseMatrix> {
    let n = x.rows();
    let features = if use_positional {
        let extra = params.input_dim().checked_sub(x.cols()).filter(|&e| e > 0);
        let Some(extra) = extra else {
            return dim_err("parameters leave no room for positional encodings");
        };
        DenseMatrix::hstack(&[x.clone(), positional_encoding(n, extra)?])?
    } else {
        x.clone()
    };
    let mut t = Vec::with_capacity(n * n);
    for u in 0..n {
        for v in 0..n {
            t.push((u, v, 1.0));
        }
    }
    let complete = Graph::new(SparseMatrix::from_triplets(n, n, t)?, features, false, true)?;
    gnn_forward(&complete, Flavour::Attn, params)
}
