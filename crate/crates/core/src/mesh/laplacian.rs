use std::collections::BTreeMap;

use super::metric::{heron_area, DiscreteMetric};
use super::{cross, dot, norm, sub, TriMesh};
use crate::error::{dim_err, Error, Result};
use crate::numkit::SparseMatrix;

/// Symmetric stiffness `L` and lumped (barycentric) mass `M`.
///
/// `L_uv = −w_uv` off the diagonal and `L_uu = Σ_v w_uv`, so the geometric
/// Laplacian is `M⁻¹L`.
#[derive(Debug, Clone)]
pub struct LaplacianPair {
    stiffness: SparseMatrix,
    mass: SparseMatrix,
    weights: Vec<(usize, usize, f64)>,
}

impl LaplacianPair {
    fn from_weights(n: usize, weights: BTreeMap<(usize, usize), f64>, areas: Vec<f64>) -> Result<Self> {
        if let Some((u, a)) = areas.iter().enumerate().find(|(_, a)| !(**a > 0.0)) {
            return Err(Error::Degenerate(format!("vertex {u} has barycentric area {a}")));
        }
        let mut diag = vec![0.0; n];
        let mut t = Vec::with_capacity(2 * weights.len() + n);
        for (&(u, v), &w) in &weights {
            t.push((u, v, -w));
            t.push((v, u, -w));
            diag[u] += w;
            diag[v] += w;
        }
        t.extend(diag.iter().enumerate().map(|(u, &d)| (u, u, d)));
        Ok(Self {
            stiffness: SparseMatrix::from_triplets(n, n, t)?,
            mass: SparseMatrix::diagonal(&areas),
            weights: weights.into_iter().map(|((u, v), w)| (u, v, w)).collect(),
        })
    }

    pub fn stiffness(&self) -> &SparseMatrix {
        &self.stiffness
    }

    pub fn mass(&self) -> &SparseMatrix {
        &self.mass
    }

    pub fn n(&self) -> usize {
        self.stiffness.rows()
    }

    /// Edge weights `(u, v, w_uv)` with `u < v`.
    pub fn weights(&self) -> &[(usize, usize, f64)] {
        &self.weights
    }

    pub fn mass_diagonal(&self) -> Vec<f64> {
        self.mass.diagonal_values()
    }

    /// `(Lx)_u = Σ_v w_uv (x_u − x_v)`; constants map to exactly zero.
    pub fn apply_stiffness(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n() {
            return dim_err(format!("signal of length {} on {} vertices", x.len(), self.n()));
        }
        let mut y = vec![0.0; x.len()];
        for &(u, v, w) in &self.weights {
            let d = w * (x[u] - x[v]);
            y[u] += d;
            y[v] -= d;
        }
        Ok(y)
    }

    /// `M⁻¹Lx`, the geometric Laplacian.
    pub fn apply_geometric(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = self.apply_stiffness(x)?;
        for (v, a) in y.iter_mut().zip(self.mass_diagonal()) {
            *v /= a;
        }
        Ok(y)
    }
}

/// Cotangent Laplacian from corner angles of the embedded mesh.
///
/// Each face adds `cot(angle at k)/2` to the weight of the opposite edge
/// `(i, j)` and a third of its area to each corner; boundary edges keep the
/// single cotangent they have.
pub fn cotan_laplacian(m: &TriMesh) -> Result<LaplacianPair> {
    let n = m.n_vertices();
    let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut areas = vec![0.0; n];
    let p = m.vertices();
    let h = m.mean_edge_length();
    for (fi, f) in m.faces().iter().enumerate() {
        let area = m.face_area(fi);
        if !(area > super::DEGENERATE_AREA * h * h) {
            return Err(Error::Degenerate(format!("face {fi} has area {area:e}")));
        }
        for c in 0..3 {
            let (i, j, k) = (f[(c + 1) % 3], f[(c + 2) % 3], f[c]);
            let e1 = sub(p[i], p[k]);
            let e2 = sub(p[j], p[k]);
            let cot = dot(e1, e2) / norm(cross(e1, e2));
            *weights.entry((i.min(j), i.max(j))).or_insert(0.0) += 0.5 * cot;
            areas[k] += area / 3.0;
        }
    }
    LaplacianPair::from_weights(n, weights, areas)
}

/// Cotangent Laplacian from edge lengths only: each face contributes
/// `(ℓ_jk² + ℓ_ik² − ℓ_ij²)/(8 a)` to edge `(i, j)`, with Heron areas `a`.
pub fn cotan_laplacian_intrinsic(metric: &DiscreteMetric) -> Result<LaplacianPair> {
    let n = metric.n_vertices();
    let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut areas = vec![0.0; n];
    for (fi, f) in metric.faces().iter().enumerate() {
        let l = metric.face_lengths(fi)?;
        let area = heron_area(l);
        if !(area > 0.0) {
            return Err(Error::Degenerate(format!("face {fi} has zero area")));
        }
        for c in 0..3 {
            let (i, j, k) = (f[(c + 1) % 3], f[(c + 2) % 3], f[c]);
            // Corner c is opposite l[c]; the other two lengths meet at k.
            let (opp, a, b) = (l[c], l[(c + 1) % 3], l[(c + 2) % 3]);
            *weights.entry((i.min(j), i.max(j))).or_insert(0.0) += (a * a + b * b - opp * opp) / (8.0 * area);
            areas[k] += area / 3.0;
        }
    }
    LaplacianPair::from_weights(n, weights, areas)
}
