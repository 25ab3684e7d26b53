//! Triangle meshes as discrete manifolds.

mod io;
mod laplacian;
mod metric;

pub use io::MeshFormat;
pub use laplacian::{cotan_laplacian, cotan_laplacian_intrinsic, LaplacianPair};
pub use metric::{discrete_metric, DiscreteMetric};

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng as _;

use crate::error::{arg_err, Error, Result};

pub type Point3 = [f64; 3];

#[inline]
pub(crate) fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross(a: Point3, b: Point3) -> Point3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[inline]
pub(crate) fn norm(a: Point3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub(crate) fn scale(a: Point3, s: f64) -> Point3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Relative area threshold below which a face counts as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Point3>,
    faces: Vec<[usize; 3]>,
}

impl TriMesh {
    /// Checks indices, repeated corners and face areas against
    /// `1e-12·(mean edge length)²`.
    pub fn new(vertices: Vec<Point3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let n = vertices.len();
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return arg_err("vertex coordinates must be finite");
        }
        for (i, f) in faces.iter().enumerate() {
            if f.iter().any(|&v| v >= n) {
                return arg_err(format!("face {i} {f:?}: index out of range for {n} vertices"));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::Degenerate(format!("face {i} {f:?} repeats a vertex")));
            }
        }
        let mesh = Self { vertices, faces };
        let h = mesh.mean_edge_length();
        for (i, f) in mesh.faces.iter().enumerate() {
            let a = mesh.face_area(i);
            if !(a > DEGENERATE_AREA * h * h) {
                return Err(Error::Degenerate(format!("face {i} {f:?} has area {a:e}")));
            }
        }
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [i, j, k] = self.faces[f];
        let (a, b, c) = (self.vertices[i], self.vertices[j], self.vertices[k]);
        0.5 * norm(cross(sub(b, a), sub(c, a)))
    }

    /// Unit normal of face `f` following its orientation.
    pub fn face_normal(&self, f: usize) -> Point3 {
        let [i, j, k] = self.faces[f];
        let (a, b, c) = (self.vertices[i], self.vertices[j], self.vertices[k]);
        let n = cross(sub(b, a), sub(c, a));
        scale(n, 1.0 / norm(n))
    }

    /// Undirected edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let set: BTreeSet<(usize, usize)> = self
            .faces
            .iter()
            .flat_map(|f| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        set.into_iter().collect()
    }

    pub fn mean_edge_length(&self) -> f64 {
        let e = self.edges();
        if e.is_empty() {
            return 0.0;
        }
        e.iter().map(|&(u, v)| norm(sub(self.vertices[u], self.vertices[v]))).sum::<f64>() / e.len() as f64
    }

    /// Faces incident to each vertex.
    pub fn vertex_faces(&self) -> Vec<Vec<usize>> {
        let mut vf = vec![Vec::new(); self.n_vertices()];
        for (fi, f) in self.faces.iter().enumerate() {
            for &v in f {
                vf[v].push(fi);
            }
        }
        vf
    }

    /// Sorted vertex neighbours per vertex.
    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_vertices()];
        for (u, v) in self.edges() {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    /// Same connectivity, new positions.
    pub fn with_vertices(&self, vertices: Vec<Point3>) -> Result<Self> {
        if vertices.len() != self.vertices.len() {
            return arg_err("vertex count must not change");
        }
        Self::new(vertices, self.faces.clone())
    }

    /// Apply `f` to every position.
    pub fn map_vertices(&self, f: impl Fn(Point3) -> Point3) -> Result<Self> {
        self.with_vertices(self.vertices.iter().map(|&p| f(p)).collect())
    }

    pub fn tetrahedron() -> Self {
        let v = vec![[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
        let f = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
        Self::new(v, f).expect("tetrahedron is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifoldReport {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub boundary_edges: Vec<(usize, usize)>,
    pub non_manifold_edges: Vec<(usize, usize)>,
    pub non_manifold_vertices: Vec<usize>,
    /// Directed edges traversed by two faces in the same direction.
    pub inconsistent_orientation: Vec<(usize, usize)>,
}

impl ManifoldReport {
    pub fn is_manifold(&self) -> bool {
        self.non_manifold_edges.is_empty() && self.non_manifold_vertices.is_empty() && self.inconsistent_orientation.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_edges.is_empty()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices as i64 - self.edges as i64 + self.faces as i64
    }
}

pub fn validate_manifold(m: &TriMesh) -> ManifoldReport {
    let mut edge_faces: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for f in &m.faces {
        for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
            *edge_faces.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            *directed.entry((a, b)).or_insert(0) += 1;
        }
    }
    let boundary_edges = edge_faces.iter().filter(|(_, &c)| c == 1).map(|(&e, _)| e).collect();
    let non_manifold_edges = edge_faces.iter().filter(|(_, &c)| c > 2).map(|(&e, _)| e).collect();
    let inconsistent_orientation = directed.iter().filter(|(_, &c)| c > 1).map(|(&e, _)| e).collect();

    let mut non_manifold_vertices = Vec::new();
    for (u, faces) in m.vertex_faces().iter().enumerate() {
        if faces.is_empty() {
            continue;
        }
        // Link of u: the edges opposite u in its faces, as an undirected graph.
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &fi in faces {
            let f = m.faces[fi];
            let others: Vec<usize> = f.iter().copied().filter(|&v| v != u).collect();
            adj.entry(others[0]).or_default().push(others[1]);
            adj.entry(others[1]).or_default().push(others[0]);
        }
        let link_vertices = adj.len();
        let link_edges = faces.len();
        let max_degree = adj.values().map(Vec::len).max().unwrap_or(0);
        let start = *adj.keys().next().expect("non-empty link");
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(a) = stack.pop() {
            for &b in &adj[&a] {
                if seen.insert(b) {
                    stack.push(b);
                }
            }
        }
        let connected = seen.len() == link_vertices;
        let path_or_loop = link_edges == link_vertices || link_edges + 1 == link_vertices;
        if !(connected && max_degree <= 2 && path_or_loop) {
            non_manifold_vertices.push(u);
        }
    }
    ManifoldReport {
        vertices: m.n_vertices(),
        edges: edge_faces.len(),
        faces: m.n_faces(),
        boundary_edges,
        non_manifold_edges,
        non_manifold_vertices,
        inconsistent_orientation,
    }
}

/// Largest subdivision level accepted by [`icosphere`].
pub const MAX_SUBDIVISIONS: usize = 6;

fn normalise(p: Point3) -> Point3 {
    scale(p, 1.0 / norm(p))
}

/// Unit icosahedron, 4-way split `subdivisions` times with midpoints pushed
/// back onto the sphere. Faces are oriented outwards.
pub fn icosphere(subdivisions: usize) -> Result<TriMesh> {
    if subdivisions > MAX_SUBDIVISIONS {
        return arg_err(format!("at most {MAX_SUBDIVISIONS} subdivisions, got {subdivisions}"));
    }
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Point3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .into_iter()
    .map(normalise)
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut mid: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Point3>| -> usize {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                let (p, q) = (verts[key.0], verts[key.1]);
                verts.push(normalise([(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0, (p[2] + q[2]) / 2.0]));
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    TriMesh::new(verts, faces)
}

/// Displace every vertex by an independent vector drawn uniformly from the
/// ball of radius `epsilon·(mean edge length)`.
pub fn jitter_mesh(m: &TriMesh, epsilon: f64, seed: u64) -> Result<TriMesh> {
    if !(0.0..0.1).contains(&epsilon) {
        return arg_err(format!("jitter fraction {epsilon} outside [0, 0.1)"));
    }
    if epsilon == 0.0 {
        return Ok(m.clone());
    }
    let radius = epsilon * m.mean_edge_length();
    let mut rng = crate::rng::stream(seed, "jitter_mesh");
    let vertices = m
        .vertices
        .iter()
        .map(|&p| loop {
            let d: Point3 = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            if dot(d, d) <= 1.0 {
                break [p[0] + radius * d[0], p[1] + radius * d[1], p[2] + radius * d[2]];
            }
        })
        .collect();
    m.with_vertices(vertices)
}

/// Vertex correspondence induced by a symmetry `f` of the point set:
/// `map[u]` is the vertex at `f(x_u)` (within `tol`).
pub fn symmetry_pointmap(m: &TriMesh, f: impl Fn(Point3) -> Point3, tol: f64) -> Result<Vec<usize>> {
    let mut order: Vec<usize> = (0..m.n_vertices()).collect();
    order.sort_by(|&a, &b| m.vertices[a][0].total_cmp(&m.vertices[b][0]));
    let xs: Vec<f64> = order.iter().map(|&i| m.vertices[i][0]).collect();
    let mut map = Vec::with_capacity(m.n_vertices());
    for &p in &m.vertices {
        let q = f(p);
        let lo = xs.partition_point(|&x| x < q[0] - tol);
        let hit = order[lo..]
            .iter()
            .take_while(|&&i| m.vertices[i][0] <= q[0] + tol)
            .find(|&&i| norm(sub(m.vertices[i], q)) <= tol);
        match hit {
            Some(&i) => map.push(i),
            None => return arg_err(format!("no vertex at image {q:?}")),
        }
    }
    let mut seen = vec![false; map.len()];
    for &i in &map {
        if std::mem::replace(&mut seen[i], true) {
            return arg_err("symmetry maps two vertices to the same image");
        }
    }
    Ok(map)
}
