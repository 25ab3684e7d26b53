use super::SpectralBasis;
use crate::error::{arg_err, dim_err, Result};
use crate::numkit::DenseMatrix;

/// Linear map between Fourier coefficient spaces of two bases.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalMap {
    c: DenseMatrix,
}

impl FunctionalMap {
    pub fn new(c: DenseMatrix) -> Self {
        Self { c }
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.c
    }

    /// Coefficients on the target basis from coefficients on the source basis.
    pub fn transfer(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.c.matvec(coeffs)
    }

    /// `max |CᵀC − I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let ctc = self.c.transpose().matmul(&self.c).expect("shapes agree");
        ctc.sub(&DenseMatrix::identity(self.c.cols())).expect("square").max_abs()
    }
}

/// `C = Φ_Bᵀ M_B Π Φ_A`, where `Π` moves the value at vertex `u` of A to
/// vertex `pointmap[u]` of B.
pub fn fmap_from_pointmap(a: &SpectralBasis, b: &SpectralBasis, pointmap: &[usize]) -> Result<FunctionalMap> {
    if pointmap.len() != a.n() || a.n() != b.n() {
        return dim_err("pointmap must biject the vertex sets of equally sized meshes");
    }
    let mut seen = vec![false; b.n()];
    for &v in pointmap {
        if v >= b.n() || std::mem::replace(&mut seen[v], true) {
            return arg_err("pointmap is not a bijection");
        }
    }
    let (ka, kb) = (a.k(), b.k());
    let mut c = DenseMatrix::zeros(kb, ka);
    for i in 0..kb {
        for j in 0..ka {
            let mut acc = 0.0;
            for (u, &v) in pointmap.iter().enumerate() {
                acc += b.vectors()[(v, i)] * b.mass()[v] * a.vectors()[(u, j)];
            }
            c[(i, j)] = acc;
        }
    }
    Ok(FunctionalMap { c })
}

/// `C Q Cᵀ`.
pub fn fmap_conjugate_operator(c: &FunctionalMap, q: &DenseMatrix) -> Result<DenseMatrix> {
    if q.rows() != q.cols() || q.rows() != c.c.cols() {
        return dim_err(format!("operator {}x{} does not match map {}x{}", q.rows(), q.cols(), c.c.rows(), c.c.cols()));
    }
    c.c.matmul(q)?.matmul(&c.c.transpose())
}
