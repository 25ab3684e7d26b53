use std::collections::HashMap;

use super::{norm, sub, TriMesh};
use crate::error::{arg_err, Error, Result};

/// Edge lengths on a fixed connectivity.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMetric {
    n_vertices: usize,
    faces: Vec<[usize; 3]>,
    edges: Vec<(usize, usize)>,
    lengths: Vec<f64>,
    index: HashMap<(usize, usize), usize>,
}

impl DiscreteMetric {
    /// `lengths[i]` belongs to `edges[i]` (`u < v`). Every face must satisfy
    /// the strict triangle inequality.
    pub fn new(n_vertices: usize, faces: Vec<[usize; 3]>, edges: Vec<(usize, usize)>, lengths: Vec<f64>) -> Result<Self> {
        if edges.len() != lengths.len() {
            return arg_err("one length per edge required");
        }
        if let Some(l) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return arg_err(format!("edge lengths must be positive and finite, got {l}"));
        }
        let index: HashMap<(usize, usize), usize> =
            edges.iter().enumerate().map(|(i, &(u, v))| ((u.min(v), u.max(v)), i)).collect();
        let metric = Self { n_vertices, faces, edges, lengths, index };
        for (fi, f) in metric.faces.iter().enumerate() {
            if f.iter().any(|&v| v >= n_vertices) {
                return arg_err(format!("face {fi} index out of range"));
            }
            let [a, b, c] = metric.face_lengths(fi)?;
            if !(a < b + c && b < a + c && c < a + b) {
                return Err(Error::Degenerate(format!("face {fi} violates the triangle inequality ({a}, {b}, {c})")));
            }
        }
        Ok(metric)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn length(&self, u: usize, v: usize) -> Option<f64> {
        self.index.get(&(u.min(v), u.max(v))).map(|&i| self.lengths[i])
    }

    /// Lengths of the edges opposite corners 0, 1, 2 of face `f`.
    pub fn face_lengths(&self, f: usize) -> Result<[f64; 3]> {
        let [i, j, k] = self.faces[f];
        let get = |u, v| self.length(u, v).ok_or_else(|| Error::InvalidArgument(format!("edge ({u}, {v}) has no length")));
        Ok([get(j, k)?, get(i, k)?, get(i, j)?])
    }

    /// Every length multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.n_vertices, self.faces.clone(), self.edges.clone(), self.lengths.iter().map(|l| l * c).collect())
    }
}

/// Euclidean edge lengths of an embedded mesh.
pub fn discrete_metric(m: &TriMesh) -> Result<DiscreteMetric> {
    let edges = m.edges();
    let lengths = edges.iter().map(|&(u, v)| norm(sub(m.vertices()[u], m.vertices()[v]))).collect();
    DiscreteMetric::new(m.n_vertices(), m.faces().to_vec(), edges, lengths)
}

/// Heron's formula in the cancellation-free ordering `a ≥ b ≥ c`.
pub(crate) fn heron_area(l: [f64; 3]) -> f64 {
    let mut s = l;
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    0.25 * p.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::icosphere;

    #[test]
    fn simple_triangles() {
        let h = 3f64.sqrt() / 2.0;
        let eq = TriMesh::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, h, 0.0]], vec![[0, 1, 2]]).unwrap();
        let m = discrete_metric(&eq).unwrap();
        assert!(m.lengths().iter().all(|l| (l - 1.0).abs() < 1e-15));
        let rt = TriMesh::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], vec![[0, 1, 2]]).unwrap();
        let m = discrete_metric(&rt).unwrap();
        assert_eq!(m.length(0, 1), Some(1.0));
        assert_eq!(m.length(2, 0), Some(1.0));
        assert_eq!(m.length(1, 2), Some(2f64.sqrt()));
    }

    #[test]
    fn rigid_motion_preserves_lengths() {
        let s = icosphere(1).unwrap();
        let (c, sn) = (0.3f64.cos(), 0.3f64.sin());
        let moved = s.map_vertices(|p| [c * p[0] - sn * p[1] + 2.0, sn * p[0] + c * p[1] - 1.0, p[2] + 0.5]).unwrap();
        let a = discrete_metric(&s).unwrap();
        let b = discrete_metric(&moved).unwrap();
        for (x, y) in a.lengths().iter().zip(b.lengths()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn triangle_inequality_enforced() {
        let r = DiscreteMetric::new(3, vec![[0, 1, 2]], vec![(0, 1), (0, 2), (1, 2)], vec![1.0, 1.0, 2.0]);
        assert!(matches!(r, Err(Error::Degenerate(_))));
        assert!(DiscreteMetric::new(3, vec![[0, 1, 2]], vec![(0, 1), (0, 2)], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn heron_examples() {
        assert!((heron_area([1.0, 1.0, 1.0]) - 3f64.sqrt() / 4.0).abs() < 1e-16);
        assert!((heron_area([3.0, 4.0, 5.0]) - 6.0).abs() < 1e-14);
        // Needle triangle: the naive semiperimeter form loses most digits here.
        let needle = heron_area([1.0, 1.0, 1e-8]);
        assert!((needle - 0.5e-8 * (1.0 - 0.25e-16f64).sqrt()).abs() < 1e-22);
    }
}
