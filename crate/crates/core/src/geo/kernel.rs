use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{arg_err, dim_err, Error, Result};
use crate::numkit::{nullspace_basis, DenseMatrix};
use crate::tree_sum::tree_sum_vectors;

use super::gauge::Connection;

/// Rotation orders of the blocks of a feature vector: order 0 is a scalar,
/// order `m ≥ 1` a 2-vector rotating by `mϑ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureType(Vec<u32>);

impl FeatureType {
    pub fn new(orders: Vec<u32>) -> Self {
        Self(orders)
    }

    pub fn scalars(count: usize) -> Self {
        Self(vec![0; count])
    }

    pub fn orders(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.iter().map(|&m| if m == 0 { 1 } else { 2 }).sum()
    }

    /// Block-diagonal representation matrix at angle `theta`.
    pub fn rho(&self, theta: f64) -> DenseMatrix {
        let mut r = DenseMatrix::zeros(self.dim(), self.dim());
        let mut i = 0;
        for &m in &self.0 {
            if m == 0 {
                r[(i, i)] = 1.0;
                i += 1;
            } else {
                let (s, c) = (f64::from(m) * theta).sin_cos();
                r[(i, i)] = c;
                r[(i, i + 1)] = -s;
                r[(i + 1, i)] = s;
                r[(i + 1, i + 1)] = c;
                i += 2;
            }
        }
        r
    }
}

impl fmt::Display for FeatureType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl FromStr for FeatureType {
    type Err = Error;

    /// Accepts `[0,0,1]` or `0,0,1`.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('[').trim_end_matches(']').trim();
        if inner.is_empty() {
            return Ok(Self(Vec::new()));
        }
        inner
            .split(',')
            .map(|p| p.trim().parse::<u32>().map_err(|e| Error::InvalidArgument(format!("bad rotation order {p:?}: {e}"))))
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

/// Angle bin of `angle` on the `n`-bin grid.
pub(crate) fn snap(angle: f64, n: usize) -> usize {
    (angle * n as f64 / TAU).round().rem_euclid(n as f64) as usize % n
}

fn bin_angle(b: usize, n: usize) -> f64 {
    TAU * b as f64 / n as f64
}

/// Self-interaction matrix plus one neighbour matrix per angle bin.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeKernel {
    rho_in: FeatureType,
    rho_out: FeatureType,
    theta_self: DenseMatrix,
    theta_neigh: Vec<DenseMatrix>,
}

impl GaugeKernel {
    pub fn new(rho_in: FeatureType, rho_out: FeatureType, theta_self: DenseMatrix, theta_neigh: Vec<DenseMatrix>) -> Result<Self> {
        if theta_neigh.is_empty() {
            return arg_err("at least one angle bin required");
        }
        let shape = (rho_out.dim(), rho_in.dim());
        if std::iter::once(&theta_self).chain(&theta_neigh).any(|m| (m.rows(), m.cols()) != shape) {
            return dim_err(format!("kernel matrices must be {}×{}", shape.0, shape.1));
        }
        Ok(Self { rho_in, rho_out, theta_self, theta_neigh })
    }

    pub fn zeros(rho_in: FeatureType, rho_out: FeatureType, bins: usize) -> Result<Self> {
        let z = DenseMatrix::zeros(rho_out.dim(), rho_in.dim());
        Self::new(rho_in, rho_out, z.clone(), vec![z; bins])
    }

    /// Linear combination `Σ cₖ basis[k]`.
    pub fn combine(basis: &[GaugeKernel], coeffs: &[f64]) -> Result<Self> {
        let first = basis.first().ok_or_else(|| Error::InvalidArgument("empty basis".into()))?;
        if coeffs.len() != basis.len() {
            return dim_err(format!("{} coefficients for {} basis kernels", coeffs.len(), basis.len()));
        }
        let mut out = Self::zeros(first.rho_in.clone(), first.rho_out.clone(), first.bins())?;
        for (k, &c) in basis.iter().zip(coeffs) {
            if k.rho_in != out.rho_in || k.rho_out != out.rho_out || k.bins() != out.bins() {
                return dim_err("basis kernels disagree in type or resolution");
            }
            out.theta_self = out.theta_self.add(&k.theta_self.scale(c))?;
            for (o, t) in out.theta_neigh.iter_mut().zip(&k.theta_neigh) {
                *o = o.add(&t.scale(c))?;
            }
        }
        Ok(out)
    }

    pub fn rho_in(&self) -> &FeatureType {
        &self.rho_in
    }

    pub fn rho_out(&self) -> &FeatureType {
        &self.rho_out
    }

    pub fn bins(&self) -> usize {
        self.theta_neigh.len()
    }

    pub fn theta_self(&self) -> &DenseMatrix {
        &self.theta_self
    }

    pub fn theta_neigh(&self, bin: usize) -> &DenseMatrix {
        &self.theta_neigh[bin]
    }

    /// Flattened parameters: `Θ_self` then each bin, row-major.
    pub fn to_vector(&self) -> Vec<f64> {
        std::iter::once(&self.theta_self).chain(&self.theta_neigh).flat_map(|m| m.as_slice().iter().copied()).collect()
    }

    /// Largest violation of `Θ_self ρ_in(θ) = ρ_out(θ) Θ_self` and
    /// `Θ_neigh(φ + θ) ρ_in(θ) = ρ_out(θ) Θ_neigh(φ)` over the bin grid.
    pub fn constraint_residual(&self) -> f64 {
        let n = self.bins();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let (ri, ro) = (self.rho_in.rho(bin_angle(j, n)), self.rho_out.rho(bin_angle(j, n)));
            let lhs = self.theta_self.matmul(&ri).expect("shapes checked");
            worst = worst.max(lhs.sub(&ro.matmul(&self.theta_self).expect("shapes checked")).expect("same shape").max_abs());
            for b in 0..n {
                let lhs = self.theta_neigh[(b + j) % n].matmul(&ri).expect("shapes checked");
                let rhs = ro.matmul(&self.theta_neigh[b]).expect("shapes checked");
                worst = worst.max(lhs.sub(&rhs).expect("same shape").max_abs());
            }
        }
        worst
    }
}

/// Matrix of a linear map given by its action on each unit vector.
fn operator_matrix(dim: usize, rows: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(rows, dim);
    let mut e = vec![0.0; dim];
    for c in 0..dim {
        e[c] = 1.0;
        for (r, v) in f(&e).into_iter().enumerate() {
            a[(r, c)] = v;
        }
        e[c] = 0.0;
    }
    a
}

/// Orthonormal basis (in the flattened parameter space) of all kernels
/// satisfying both gauge constraints on the `bins`-element rotation grid.
pub fn kernel_constraint_basis(rho_in: &FeatureType, rho_out: &FeatureType, bins: usize) -> Result<Vec<GaugeKernel>> {
    if bins == 0 {
        return arg_err("at least one angle bin required");
    }
    let (dout, din) = (rho_out.dim(), rho_in.dim());
    let block = dout * din;
    let reps: Vec<(DenseMatrix, DenseMatrix)> =
        (0..bins).map(|j| (rho_in.rho(bin_angle(j, bins)), rho_out.rho(bin_angle(j, bins)))).collect();
    let as_matrix = |v: &[f64]| DenseMatrix::new(dout, din, v.to_vec()).expect("block length");

    let self_constraints = operator_matrix(block, bins * block, |v| {
        let t = as_matrix(v);
        reps.iter()
            .flat_map(|(ri, ro)| t.matmul(ri).unwrap().sub(&ro.matmul(&t).unwrap()).unwrap().as_slice().to_vec())
            .collect()
    });
    let neigh_constraints = operator_matrix(bins * block, bins * bins * block, |v| {
        let t: Vec<DenseMatrix> = v.chunks(block).map(as_matrix).collect();
        let mut out = Vec::with_capacity(bins * bins * block);
        for (j, (ri, ro)) in reps.iter().enumerate() {
            for b in 0..bins {
                out.extend_from_slice(t[(b + j) % bins].matmul(ri).unwrap().sub(&ro.matmul(&t[b]).unwrap()).unwrap().as_slice());
            }
        }
        out
    });

    // Entries are O(1) combinations of cos and sin; anything near 1e-16 is
    // rounding (e.g. sin π) and would otherwise set the nullspace cutoff scale.
    let clean = |a: DenseMatrix| DenseMatrix::from_fn(a.rows(), a.cols(), |r, c| if a[(r, c)].abs() < 1e-12 { 0.0 } else { a[(r, c)] });
    let (self_constraints, neigh_constraints) = (clean(self_constraints), clean(neigh_constraints));

    let zero = DenseMatrix::zeros(dout, din);
    let mut basis = Vec::new();
    let ns = nullspace_basis(&self_constraints, 1e-6);
    for k in 0..ns.cols() {
        let t = as_matrix(&ns.column(k));
        basis.push(GaugeKernel::new(rho_in.clone(), rho_out.clone(), t, vec![zero.clone(); bins])?);
    }
    let nn = nullspace_basis(&neigh_constraints, 1e-6);
    for k in 0..nn.cols() {
        let col = nn.column(k);
        let t = col.chunks(block).map(as_matrix).collect();
        basis.push(GaugeKernel::new(rho_in.clone(), rho_out.clone(), zero.clone(), t)?);
    }
    Ok(basis)
}

/// `h_u = Θ_self x_u + Σ_v Θ_neigh(ϑ_uv) ρ_in(g_{v→u}) x_v`, with `ϑ` and `g`
/// snapped to the kernel's angle grid.
pub fn gauge_conv(conn: &Connection, kernel: &GaugeKernel, x: &DenseMatrix) -> Result<DenseMatrix> {
    let residual = kernel.constraint_residual();
    if residual > 1e-8 {
        return Err(Error::KernelConstraint { residual });
    }
    let n = conn.n_vertices();
    if x.rows() != n || x.cols() != kernel.rho_in.dim() {
        return dim_err(format!("features must be {n}×{}", kernel.rho_in.dim()));
    }
    let bins = kernel.bins();
    let rho: Vec<DenseMatrix> = (0..bins).map(|b| kernel.rho_in.rho(bin_angle(b, bins))).collect();
    let dout = kernel.rho_out.dim();
    let mut h = DenseMatrix::zeros(n, dout);
    for u in 0..n {
        let transports = conn.transports_into(u)?;
        let mut terms = vec![kernel.theta_self.matvec(x.row(u))?];
        for ((&v, &th), &g) in conn.neighbours(u).iter().zip(conn.thetas(u)).zip(transports) {
            let moved = rho[snap(g, bins)].matvec(x.row(v))?;
            terms.push(kernel.theta_neigh[snap(th, bins)].matvec(&moved)?);
        }
        h.row_mut(u).copy_from_slice(&tree_sum_vectors(&terms, dout));
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{gauge_transform, one_ring_log_map, tangent_frames, transport_angles};
    use crate::mesh::icosphere;
    use rand::Rng;

    fn ft(s: &str) -> FeatureType {
        s.parse().unwrap()
    }

    /// Dimension of the invariant subspace from the character formula
    /// `(1/N) Σ_j tr(T_j)`, where `T_j` is the action of the `j`-th rotation
    /// on kernel space.
    fn character_dimension(rin: &FeatureType, rout: &FeatureType, n: usize) -> f64 {
        let mut total = 0.0;
        for j in 0..n {
            let th = TAU * j as f64 / n as f64;
            let (ri, ro) = (rin.rho(th), rout.rho(th));
            // T(Θ) = ρ_out Θ ρ_in⁻¹ has trace tr(ρ_out)·tr(ρ_in⁻¹).
            let tr_out: f64 = (0..ro.rows()).map(|i| ro[(i, i)]).sum();
            let tr_in: f64 = (0..ri.rows()).map(|i| ri[(i, i)]).sum();
            let self_trace = tr_out * tr_in;
            // On the neighbour part bins are also cyclically shifted by j; only j = 0 has fixed bins.
            let neigh_trace = if j == 0 { n as f64 * self_trace } else { 0.0 };
            total += self_trace + neigh_trace;
        }
        total / n as f64
    }

    #[test]
    fn feature_type_parsing() {
        assert_eq!(ft("[0,0,1]"), FeatureType::new(vec![0, 0, 1]));
        assert_eq!(ft(" 2 , 0 "), FeatureType::new(vec![2, 0]));
        assert_eq!(ft("[0,0,1]").dim(), 4);
        assert_eq!(ft("[0,0,1]").to_string(), "[0,0,1]");
        assert!("[0,x]".parse::<FeatureType>().is_err());
    }

    #[test]
    fn trivial_types_give_constant_kernels() {
        for n in [1, 3, 8] {
            let b = kernel_constraint_basis(&ft("[0]"), &ft("[0]"), n).unwrap();
            assert_eq!(b.len(), 2);
            let neigh: Vec<_> = b.iter().filter(|k| k.theta_self().max_abs() == 0.0).collect();
            assert_eq!(neigh.len(), 1);
            let v0 = neigh[0].theta_neigh(0)[(0, 0)];
            assert!((0..n).all(|j| (neigh[0].theta_neigh(j)[(0, 0)] - v0).abs() < 1e-10));
        }
    }

    #[test]
    fn vector_self_kernel_is_rotation_commutant() {
        let b = kernel_constraint_basis(&ft("[1]"), &ft("[1]"), 8).unwrap();
        let selfs: Vec<_> = b.iter().filter(|k| k.theta_self().max_abs() > 0.0).collect();
        assert_eq!(selfs.len(), 2);
        for k in selfs {
            let t = k.theta_self();
            assert!((t[(0, 0)] - t[(1, 1)]).abs() < 1e-10 && (t[(0, 1)] + t[(1, 0)]).abs() < 1e-10);
        }
    }

    #[test]
    fn single_bin_is_unconstrained() {
        let (a, b) = (ft("[0,1]"), ft("[2,0]"));
        let basis = kernel_constraint_basis(&a, &b, 1).unwrap();
        assert_eq!(basis.len(), 3 * 3 * 2);
    }

    #[test]
    fn basis_is_sound_complete_and_orthonormal() {
        for (a, b) in [("[0]", "[1]"), ("[1]", "[1]"), ("[0,1]", "[2]"), ("[1,1]", "[0,2]"), ("[0,0,1]", "[1,0]"), ("[2]", "[1]")] {
            for n in [1, 2, 3, 4, 5, 8] {
                let (ra, rb) = (ft(a), ft(b));
                let basis = kernel_constraint_basis(&ra, &rb, n).unwrap();
                let expected = character_dimension(&ra, &rb, n);
                assert!((basis.len() as f64 - expected).abs() < 1e-9, "{a}->{b} N={n}: {} vs {expected}", basis.len());
                let vecs: Vec<Vec<f64>> = basis.iter().map(GaugeKernel::to_vector).collect();
                for (i, k) in basis.iter().enumerate() {
                    assert!(k.constraint_residual() < 1e-8);
                    for (j, w) in vecs.iter().enumerate() {
                        let d: f64 = vecs[i].iter().zip(w).map(|(p, q)| p * q).sum();
                        assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn zero_neighbour_kernel_is_pointwise() {
        let m = icosphere(1).unwrap();
        let c = transport_angles(&one_ring_log_map(&m, &tangent_frames(&m).unwrap()).unwrap()).unwrap();
        let (a, b) = (ft("[0,1]"), ft("[1]"));
        let basis = kernel_constraint_basis(&a, &b, 4).unwrap();
        let coeffs: Vec<f64> = basis.iter().map(|k| if k.theta_self().max_abs() > 0.0 { 0.7 } else { 0.0 }).collect();
        let k = GaugeKernel::combine(&basis, &coeffs).unwrap();
        let x = DenseMatrix::from_fn(m.n_vertices(), 3, |r, q| ((r + 2 * q) as f64).cos());
        let h = gauge_conv(&c, &k, &x).unwrap();
        let expect = x.matmul(&k.theta_self().transpose()).unwrap();
        assert!(h.sub(&expect).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn scalar_kernel_sums_neighbours() {
        let m = icosphere(1).unwrap();
        let c = transport_angles(&one_ring_log_map(&m, &tangent_frames(&m).unwrap()).unwrap()).unwrap();
        let one = DenseMatrix::from_rows(&[vec![1.0]]).unwrap();
        let k = GaugeKernel::new(ft("[0]"), ft("[0]"), one.scale(2.0), vec![one; 6]).unwrap();
        let x = DenseMatrix::from_fn(m.n_vertices(), 1, |r, _| r as f64);
        let h = gauge_conv(&c, &k, &x).unwrap();
        for u in 0..m.n_vertices() {
            let s: f64 = c.neighbours(u).iter().map(|&v| v as f64).sum();
            assert!((h[(u, 0)] - 2.0 * u as f64 - s).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_unconstrained_kernel() {
        let m = icosphere(0).unwrap();
        let c = transport_angles(&one_ring_log_map(&m, &tangent_frames(&m).unwrap()).unwrap()).unwrap();
        let t = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let k = GaugeKernel::new(ft("[1]"), ft("[1]"), t.clone(), vec![t; 4]).unwrap();
        let x = DenseMatrix::zeros(m.n_vertices(), 2);
        assert!(matches!(gauge_conv(&c, &k, &x), Err(Error::KernelConstraint { .. })));
    }

    #[test]
    fn gauge_equivariance_on_grid_rotations() {
        let m = icosphere(2).unwrap();
        let fr = tangent_frames(&m).unwrap();
        let c = transport_angles(&one_ring_log_map(&m, &fr).unwrap()).unwrap();
        let (a, b) = (ft("[0,1,2]"), ft("[0,1]"));
        for n in [4, 8, 16] {
            let mut rng = crate::rng::trial_stream(5, "gauge-unit", n as u64);
            let basis = kernel_constraint_basis(&a, &b, n).unwrap();
            let coeffs: Vec<f64> = basis.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
            let k = GaugeKernel::combine(&basis, &coeffs).unwrap();
            let x = DenseMatrix::from_fn(m.n_vertices(), a.dim(), |_, _| rng.gen_range(-1.0..1.0));
            let angles: Vec<f64> = (0..m.n_vertices()).map(|_| bin_angle(rng.gen_range(0..n), n)).collect();
            let h = gauge_conv(&c, &k, &x).unwrap();
            let (_, c2, x2) = gauge_transform(&fr, &c, &x, &a, &angles).unwrap();
            let h2 = gauge_conv(&c2, &k, &x2).unwrap();
            for u in 0..m.n_vertices() {
                let want = b.rho(-angles[u]).matvec(h.row(u)).unwrap();
                for (p, q) in want.iter().zip(h2.row(u)) {
                    assert!((p - q).abs() < 1e-8, "N={n} u={u}");
                }
            }
        }
    }
}
