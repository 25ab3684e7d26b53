//! Permutation-symmetric layers on sets and graphs.

mod gnn;
mod mlp;
mod wl;

pub use gnn::{
    attention_coefficients, attn_forward_with, deepsets_forward, gnn_forward, mpnn_forward_with,
    positional_encoding, set_linear_equivariant, transformer_forward, AttentionParams, Flavour, GnnParams,
};
pub use mlp::{Activation, MlpParams};
pub use wl::{wl_distinguish, wl_refine, wl_refine_joint, ColourHistogram};

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{arg_err, dim_err, Error, Result};
use crate::numkit::{DenseMatrix, SparseMatrix};
use crate::rng::Rng;

/// Bijection on `0..n`; node `u` moves to position `image[u]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &v in &image {
            if v >= image.len() || seen[v] {
                return arg_err(format!("{image:?} is not a permutation"));
            }
            seen[v] = true;
        }
        Ok(Self { image })
    }

    pub fn identity(n: usize) -> Self {
        Self { image: (0..n).collect() }
    }

    pub fn random(n: usize, rng: &mut Rng) -> Self {
        let mut image: Vec<usize> = (0..n).collect();
        image.shuffle(rng);
        Self { image }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.image.len()];
        for (u, &v) in self.image.iter().enumerate() {
            inv[v] = u;
        }
        Self { image: inv }
    }

    /// `PX`: row `u` of `x` becomes row `image[u]`.
    pub fn apply_rows(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.rows() != self.image.len() {
            return dim_err(format!("permutation of {} applied to {} rows", self.image.len(), x.rows()));
        }
        let mut out = DenseMatrix::zeros(x.rows(), x.cols());
        for (u, &v) in self.image.iter().enumerate() {
            out.row_mut(v).copy_from_slice(x.row(u));
        }
        Ok(out)
    }
}

/// Adjacency plus node features.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: SparseMatrix,
    features: DenseMatrix,
    directed: bool,
}

impl Graph {
    pub fn new(adjacency: SparseMatrix, features: DenseMatrix, directed: bool, allow_self_loops: bool) -> Result<Self> {
        let n = adjacency.rows();
        if adjacency.cols() != n || features.rows() != n {
            return dim_err(format!(
                "adjacency {}x{} with {} feature rows",
                adjacency.rows(),
                adjacency.cols(),
                features.rows()
            ));
        }
        if !directed && adjacency.asymmetry() != 0.0 {
            return arg_err("undirected graph needs a symmetric adjacency");
        }
        if !allow_self_loops && (0..n).any(|u| adjacency.get(u, u) != 0.0) {
            return arg_err("self-loops are not allowed");
        }
        Ok(Self { adjacency, features, directed })
    }

    /// Undirected graph from an edge list; duplicate edges collapse.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], features: DenseMatrix) -> Result<Self> {
        let mut t = Vec::with_capacity(2 * edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n {
                return arg_err(format!("edge ({u}, {v}) out of range for {n} nodes"));
            }
            if u == v {
                return arg_err(format!("self-loop at {u}"));
            }
            t.push((u, v, 1.0));
            t.push((v, u, 1.0));
        }
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        t.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
        Self::new(SparseMatrix::from_triplets(n, n, t)?, features, false, false)
    }

    /// Erdős–Rényi graph with uniform(−1, 1) features.
    pub fn random(n: usize, d: usize, edge_prob: f64, rng: &mut Rng) -> Self {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen::<f64>() < edge_prob {
                    edges.push((u, v));
                }
            }
        }
        let features = DenseMatrix::from_fn(n, d, |_, _| rng.gen_range(-1.0..1.0));
        Self::from_edges(n, &edges, features).expect("generated edges are valid")
    }

    pub fn n(&self) -> usize {
        self.adjacency.rows()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn adjacency(&self) -> &SparseMatrix {
        &self.adjacency
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Sorted out-neighbours of `u`.
    pub fn neighbours(&self, u: usize) -> Vec<usize> {
        self.adjacency.row(u).filter(|&(_, w)| w != 0.0).map(|(v, _)| v).collect()
    }

    pub fn with_features(&self, features: DenseMatrix) -> Result<Self> {
        if features.rows() != self.n() {
            return dim_err("feature rows must match node count");
        }
        Ok(Self { adjacency: self.adjacency.clone(), features, directed: self.directed })
    }

    /// Sorted undirected edge list `(u, v)` with `u < v` (all arcs if directed).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n() {
            for v in self.neighbours(u) {
                if self.directed || u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Parse "n d", then "u v" edge lines, then `n` feature rows of `d` values.
    ///
    /// The last `n` non-empty lines are the feature rows (none when `d = 0`),
    /// which keeps the format unambiguous when `d = 2`.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let parse_err = |line: usize, message: String| Error::Parse { line, message };
        let (hl, header) = *lines.first().ok_or_else(|| parse_err(1, "missing header".into()))?;
        let head: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(hl, format!("{e}")))?;
        let [n, d] = head[..] else {
            return Err(parse_err(hl, "header must be \"n d\"".into()));
        };
        let feature_lines = if d == 0 { 0 } else { n };
        if lines.len() < 1 + feature_lines {
            return Err(parse_err(hl, format!("expected {feature_lines} feature rows")));
        }
        let split = lines.len() - feature_lines;
        let mut edges = Vec::new();
        for &(ln, l) in &lines[1..split] {
            let uv: Vec<usize> = l
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| parse_err(ln, format!("{e}")))?;
            let [u, v] = uv[..] else {
                return Err(parse_err(ln, "edge lines hold two node indices".into()));
            };
            edges.push((u, v));
        }
        let mut data = Vec::with_capacity(n * d);
        for &(ln, l) in &lines[split..] {
            let row: Vec<f64> = l
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| parse_err(ln, format!("{e}")))?;
            if row.len() != d {
                return Err(parse_err(ln, format!("feature row has {} values, expected {d}", row.len())));
            }
            data.extend(row);
        }
        Self::from_edges(n, &edges, DenseMatrix::new(n, d, data)?)
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{} {}\n", self.n(), self.feature_dim());
        for (u, v) in self.edges() {
            let _ = writeln!(s, "{u} {v}");
        }
        if self.feature_dim() > 0 {
            for u in 0..self.n() {
                let row: Vec<String> = self.features.row(u).iter().map(|v| format!("{v:?}")).collect();
                let _ = writeln!(s, "{}", row.join(" "));
            }
        }
        s
    }
}

/// Features `PX`, adjacency `PAPᵀ`; entries are moved, never recomputed.
pub fn permute_graph(g: &Graph, p: &Permutation) -> Result<Graph> {
    if p.len() != g.n() {
        return dim_err(format!("permutation of {} on a graph of {} nodes", p.len(), g.n()));
    }
    Ok(Graph {
        adjacency: g.adjacency.permute_symmetric(p.image())?,
        features: p.apply_rows(&g.features)?,
        directed: g.directed,
    })
}
