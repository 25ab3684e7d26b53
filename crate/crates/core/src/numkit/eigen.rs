use crate::error::{arg_err, dim_err, Error, Result};

use super::{DenseMatrix, SparseMatrix};

/// Default relative convergence tolerance of the Jacobi solver.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Sweep cap of the Jacobi solver.
pub const MAX_SWEEPS: usize = 100;

/// Eigenpairs sorted by ascending eigenvalue, one eigenvector per column.
///
/// Each eigenvector has its largest-magnitude entry positive (ties within a
/// relative 1e-9 resolved towards the lowest index), so repeated runs and
/// runs on slightly different operators are directly comparable.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }
}

/// Flip `v` so its largest-magnitude entry is positive.
pub fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return;
    }
    let pick = v
        .iter()
        .position(|x| x.abs() >= max * (1.0 - 1e-9))
        .expect("some entry attains the maximum");
    if v[pick] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn sym_eig(a: &DenseMatrix, tol: f64) -> Result<EigenSystem> {
    let n = a.rows();
    let Some(asym) = a.asymmetry() else {
        return dim_err(format!("sym_eig needs a square matrix, got {}x{}", a.rows(), a.cols()));
    };
    if !(tol > 0.0) {
        return arg_err("tolerance must be positive");
    }
    let scale = a.max_abs();
    if asym > tol * scale {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    // Symmetrise so the rotations see exactly symmetric data.
    let mut m = DenseMatrix::from_fn(n, n, |r, c| 0.5 * (a[(r, c)] + a[(c, r)]));
    let (values, vt) = jacobi_in_place(&mut m, tol)?;
    Ok(assemble(values, vt, n, n))
}

/// Rows of the returned matrix are eigenvectors (unsorted).
///
/// Each sweep visits every off-diagonal pair once in round-robin order: a
/// round holds n/2 disjoint pairs, so its rotations commute and can be
/// applied to whole rows and then to column pairs within each row, keeping
/// every memory access contiguous.
fn jacobi_in_place(m: &mut DenseMatrix, tol: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = m.rows();
    let mut vt = vec![0.0; n * n];
    for i in 0..n {
        vt[i * n + i] = 1.0;
    }
    let total = m.frobenius_norm();
    let a = m.data_mut();
    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for r in 0..n {
            for c in r + 1..n {
                s += 2.0 * a[r * n + c] * a[r * n + c];
            }
        }
        s.sqrt()
    };
    // Round-robin schedule; an odd size gets a dummy player `n`.
    let players = n + n % 2;
    let mut seats: Vec<usize> = (0..players).collect();
    // (p, q, c, s, new a_pp, new a_qq)
    let mut rotations: Vec<(usize, usize, f64, f64, f64, f64)> = Vec::with_capacity(players / 2);
    let mut sweep = 0;
    loop {
        let off = off_norm(a);
        if off <= tol * total || total == 0.0 {
            break;
        }
        if sweep == MAX_SWEEPS {
            return Err(Error::NoConvergence { iterations: sweep, residual: off / total });
        }
        for _round in 0..players.saturating_sub(1) {
            rotations.clear();
            for i in 0..players / 2 {
                let (x, y) = (seats[i], seats[players - 1 - i]);
                if x >= n || y >= n {
                    continue;
                }
                let (p, q) = (x.min(y), x.max(y));
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                rotations.push((p, q, c, t * c, app - t * apq, aqq + t * apq));
            }
            for &(p, q, c, s, _, _) in &rotations {
                rotate_rows(a, n, p, q, c, s);
                rotate_rows(&mut vt, n, p, q, c, s);
            }
            for k in 0..n {
                let row = &mut a[k * n..(k + 1) * n];
                for &(p, q, c, s, _, _) in &rotations {
                    let (xp, xq) = (row[p], row[q]);
                    row[p] = c * xp - s * xq;
                    row[q] = s * xp + c * xq;
                }
            }
            // Each pair is touched only by its own rotation, so the closed forms hold.
            for &(p, q, _, _, np, nq) in &rotations {
                a[p * n + p] = np;
                a[q * n + q] = nq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
            seats[1..].rotate_right(1);
        }
        sweep += 1;
    }
    let values = (0..n).map(|i| a[i * n + i]).collect();
    Ok((values, vt))
}

fn rotate_rows(a: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = a.split_at_mut(q * n);
    let rp = &mut head[p * n..p * n + n];
    let rq = &mut tail[..n];
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// Sort ascending, keep the first `k`, fix signs.
fn assemble(values: Vec<f64>, vt: Vec<f64>, n: usize, k: usize) -> EigenSystem {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    order.truncate(k);
    let mut vectors = DenseMatrix::zeros(n, k);
    let mut sorted = Vec::with_capacity(k);
    for (col, &i) in order.iter().enumerate() {
        let mut v = vt[i * n..(i + 1) * n].to_vec();
        fix_sign(&mut v);
        vectors.set_column(col, &v);
        sorted.push(values[i]);
    }
    EigenSystem { values: sorted, vectors }
}

/// `L φ = λ M φ` for the `k` smallest λ, with `M` diagonal positive.
///
/// Reduced to a standard problem through `M^{-1/2} L M^{-1/2}`; the returned
/// eigenvectors are M-orthonormal.
pub fn generalized_sym_eig(l: &SparseMatrix, m: &SparseMatrix, k: usize) -> Result<EigenSystem> {
    let n = l.rows();
    if l.cols() != n || m.rows() != n || m.cols() != n {
        return dim_err("generalized eigenproblem needs square operators of equal size");
    }
    if !m.is_diagonal() {
        return arg_err("mass matrix must be diagonal");
    }
    if k > n {
        return arg_err(format!("requested {k} eigenpairs of a {n}-dimensional problem"));
    }
    let mass = m.diagonal_values();
    if let Some(i) = mass.iter().position(|&v| !(v > 0.0)) {
        return arg_err(format!("mass entry {i} is not positive ({})", mass[i]));
    }
    let asym = l.asymmetry();
    if asym > DEFAULT_TOL * l.max_abs() {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let d: Vec<f64> = mass.iter().map(|v| 1.0 / v.sqrt()).collect();
    let mut scaled = DenseMatrix::zeros(n, n);
    for r in 0..n {
        for (c, v) in l.row(r) {
            scaled[(r, c)] = d[r] * v * d[c];
        }
    }
    let sym = DenseMatrix::from_fn(n, n, |r, c| 0.5 * (scaled[(r, c)] + scaled[(c, r)]));
    let mut work = sym;
    let (values, mut vt) = jacobi_in_place(&mut work, DEFAULT_TOL)?;
    for row in 0..n {
        for (x, di) in vt[row * n..(row + 1) * n].iter_mut().zip(&d) {
            *x *= di;
        }
    }
    Ok(assemble(values, vt, n, k))
}

/// Orthonormal basis (as columns) of the numerical nullspace of `a`.
///
/// The dimension is the number of eigenvalues of `aᵀa` at or below
/// `tol²·‖a‖₂²`; every returned column satisfies `‖a v‖ ≲ tol·‖a‖₂`.
pub fn nullspace_basis(a: &DenseMatrix, tol: f64) -> DenseMatrix {
    let cols = a.cols();
    if a.max_abs() == 0.0 {
        return DenseMatrix::identity(cols);
    }
    let gram = a.transpose().matmul(a).expect("aᵀa shapes agree");
    let mut work = gram;
    // aᵀa is symmetric by construction; Jacobi on it converges unconditionally.
    let (values, vt) = match jacobi_in_place(&mut work, DEFAULT_TOL) {
        Ok(r) => r,
        Err(_) => unreachable!("Jacobi on a Gram matrix converges"),
    };
    let sys = assemble(values, vt, cols, cols);
    let top = sys.values.last().copied().unwrap_or(0.0).max(0.0);
    let cutoff = tol * tol * top;
    let dim = sys.values.iter().take_while(|&&v| v <= cutoff).count();
    DenseMatrix::from_fn(cols, dim, |r, c| sys.vectors[(r, c)])
}
