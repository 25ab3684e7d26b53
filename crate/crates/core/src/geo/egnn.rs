use rand::Rng as _;

use crate::error::{arg_err, dim_err, Result};
use crate::graph::MlpParams;
use crate::mesh::Point3;
use crate::numkit::DenseMatrix;
use crate::rng::Rng;
use crate::tree_sum::tree_sum_vectors;

pub type Rotation3 = [[f64; 3]; 3];

/// Points with features and undirected neighbour lists.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricGraph {
    positions: Vec<Point3>,
    features: DenseMatrix,
    neighbours: Vec<Vec<usize>>,
}

impl GeometricGraph {
    pub fn new(positions: Vec<Point3>, features: DenseMatrix, edges: &[(usize, usize)]) -> Result<Self> {
        let n = positions.len();
        if features.rows() != n {
            return dim_err(format!("{} feature rows for {n} points", features.rows()));
        }
        if positions.iter().flatten().any(|c| !c.is_finite()) {
            return arg_err("positions must be finite");
        }
        let mut neighbours = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n || u == v {
                return arg_err(format!("invalid edge ({u}, {v})"));
            }
            neighbours[u].push(v);
            neighbours[v].push(u);
        }
        for nb in &mut neighbours {
            nb.sort_unstable();
            nb.dedup();
        }
        Ok(Self { positions, features, neighbours })
    }

    /// Random positions in the unit cube, uniform(−1, 1) features, each edge kept with `edge_prob`.
    pub fn random(n: usize, d: usize, edge_prob: f64, rng: &mut Rng) -> Self {
        let positions = (0..n).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let features = DenseMatrix::from_fn(n, d, |_, _| rng.gen_range(-1.0..1.0));
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen::<f64>() < edge_prob {
                    edges.push((u, v));
                }
            }
        }
        Self::new(positions, features, &edges).expect("generated graph is valid")
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[Point3] {
        &self.positions
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn neighbours(&self, u: usize) -> &[usize] {
        &self.neighbours[u]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n()).flat_map(|u| self.neighbours[u].iter().filter(move |&&v| u < v).map(move |&v| (u, v))).collect()
    }

    /// Relabel node `u` as `perm[u]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let p = crate::graph::Permutation::new(perm.to_vec())?;
        if p.len() != self.n() {
            return dim_err("permutation size differs from node count");
        }
        let mut positions = vec![[0.0; 3]; self.n()];
        for (u, &v) in perm.iter().enumerate() {
            positions[v] = self.positions[u];
        }
        let edges: Vec<(usize, usize)> = self.edges().iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        Self::new(positions, p.apply_rows(&self.features)?, &edges)
    }
}

/// `ψ_f`, `ψ_c` read `f_u ∥ f_v ∥ ‖x_u − x_v‖²`; `φ` reads `f_u ∥ aggregate`.
#[derive(Debug, Clone, PartialEq)]
pub struct EgnnParams {
    pub psi_f: MlpParams,
    pub psi_c: MlpParams,
    pub phi: MlpParams,
}

impl EgnnParams {
    pub fn new(psi_f: MlpParams, psi_c: MlpParams, phi: MlpParams) -> Result<Self> {
        if psi_c.output_dim() != 1 {
            return dim_err("ψ_c must output a single scalar");
        }
        if psi_f.input_dim() != psi_c.input_dim() {
            return dim_err("ψ_f and ψ_c read the same edge input");
        }
        let d2 = psi_f.input_dim().checked_sub(1).filter(|v| v % 2 == 0);
        match d2 {
            Some(d2) if phi.input_dim() == d2 / 2 + psi_f.output_dim() => Ok(Self { psi_f, psi_c, phi }),
            _ => dim_err("φ must read the node features plus the ψ_f aggregate"),
        }
    }

    pub fn random(d: usize, hidden: usize, out: usize, rng: &mut Rng) -> Result<Self> {
        use crate::graph::Activation::Tanh;
        Self::new(
            MlpParams::random(&[2 * d + 1, hidden], Tanh, rng)?,
            MlpParams::random(&[2 * d + 1, 1], Tanh, rng)?,
            MlpParams::random(&[d + hidden, out], Tanh, rng)?,
        )
    }

    pub fn feature_dim(&self) -> usize {
        (self.psi_f.input_dim() - 1) / 2
    }
}

/// One layer of E(n)-equivariant message passing; both sums run over the
/// neighbours of each node through the fixed reduction tree.
pub fn egnn_layer(g: &GeometricGraph, p: &EgnnParams) -> Result<(DenseMatrix, Vec<Point3>)> {
    let d = g.features.cols();
    if p.feature_dim() != d {
        return dim_err(format!("parameters expect {} features, graph has {d}", p.feature_dim()));
    }
    let mut feats = DenseMatrix::zeros(g.n(), p.phi.output_dim());
    let mut positions = Vec::with_capacity(g.n());
    for u in 0..g.n() {
        let xu = g.positions[u];
        let mut msgs = Vec::with_capacity(g.neighbours[u].len());
        let mut shifts = Vec::with_capacity(g.neighbours[u].len());
        for &v in &g.neighbours[u] {
            let diff = [xu[0] - g.positions[v][0], xu[1] - g.positions[v][1], xu[2] - g.positions[v][2]];
            let dist2 = diff[0] * diff[0] + diff[1] * diff[1] + diff[2] * diff[2];
            let mut input = g.features.row(u).to_vec();
            input.extend_from_slice(g.features.row(v));
            input.push(dist2);
            msgs.push(p.psi_f.forward(&input)?);
            let w = p.psi_c.forward(&input)?[0];
            shifts.push(vec![diff[0] * w, diff[1] * w, diff[2] * w]);
        }
        let agg = tree_sum_vectors(&msgs, p.psi_f.output_dim());
        let mut input = g.features.row(u).to_vec();
        input.extend(agg);
        feats.row_mut(u).copy_from_slice(&p.phi.forward(&input)?);
        let s = tree_sum_vectors(&shifts, 3);
        positions.push([xu[0] + s[0], xu[1] + s[1], xu[2] + s[2]]);
    }
    Ok((feats, positions))
}

fn apply(r: &Rotation3, p: Point3) -> Point3 {
    [0, 1, 2].map(|i| r[i][0] * p[0] + r[i][1] * p[1] + r[i][2] * p[2])
}

/// `x ↦ Rx + t` on positions; `R` must be orthogonal to 1e-10.
pub fn e3_transform(g: &GeometricGraph, r: &Rotation3, t: Point3) -> Result<GeometricGraph> {
    let err = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| {
            let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
            (dot - if i == j { 1.0 } else { 0.0 }).abs()
        })
        .fold(0.0, f64::max);
    if err > 1e-10 {
        return arg_err(format!("matrix is not orthogonal (‖RᵀR − I‖ = {err:e})"));
    }
    let positions = g.positions.iter().map(|&p| {
        let q = apply(r, p);
        [q[0] + t[0], q[1] + t[1], q[2] + t[2]]
    });
    Ok(GeometricGraph { positions: positions.collect(), features: g.features.clone(), neighbours: g.neighbours.clone() })
}

/// Orthogonal matrix from Gram–Schmidt on Gaussian-ish columns; with
/// `reflect` the determinant is −1.
pub fn random_orthogonal(rng: &mut Rng, reflect: bool) -> Rotation3 {
    loop {
        let cols: Vec<Point3> = (0..3).map(|_| [0; 3].map(|_| rng.gen_range(-1.0..1.0))).collect();
        let mut q: Vec<Point3> = Vec::new();
        for c in cols {
            let mut v = c;
            for b in &q {
                let d = v[0] * b[0] + v[1] * b[1] + v[2] * b[2];
                v = [v[0] - d * b[0], v[1] - d * b[1], v[2] - d * b[2]];
            }
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n < 1e-3 {
                break;
            }
            q.push([v[0] / n, v[1] / n, v[2] / n]);
        }
        if q.len() == 3 {
            let mut r = [[0.0; 3]; 3];
            for (j, col) in q.iter().enumerate() {
                for i in 0..3 {
                    r[i][j] = col[i];
                }
            }
            if (det(&r) < 0.0) != reflect {
                for row in &mut r {
                    row[2] = -row[2];
                }
            }
            return r;
        }
    }
}

pub(crate) fn det(r: &Rotation3) -> f64 {
    r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
        + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
}
