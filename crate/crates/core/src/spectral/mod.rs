//! Fourier analysis and filtering on meshes: Laplacian eigenbases, spectral
//! and path-computed filters, the domain-perturbation experiment and
//! functional maps.

mod filters;
mod fmap;
mod stability;

pub use filters::{
    apply_cayley_filter, apply_poly_filter, apply_transfer_direct, cayley_transfer, fit_cayley_filter, fit_poly_filter,
    poly_transfer, CayleyFilter, PolyFilter,
};
pub use fmap::{fmap_conjugate_operator, fmap_from_pointmap, FunctionalMap};
pub use stability::{perturbation_stability_experiment, StabilityKind, StabilityRecord, StabilitySetup};

use crate::error::{arg_err, dim_err, Error, Result};
use crate::mesh::LaplacianPair;
use crate::numkit::{generalized_sym_eig, DenseMatrix, SparseMatrix};

/// Default basis size cap.
pub const DEFAULT_BASIS_SIZE: usize = 64;

/// Eigenpairs of `Lφ = λMφ`, ascending, M-orthonormal.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    values: Vec<f64>,
    vectors: DenseMatrix,
    mass: Vec<f64>,
}

impl SpectralBasis {
    /// The `k` lowest eigenpairs of the pair.
    pub fn compute(pair: &LaplacianPair, k: usize) -> Result<Self> {
        let sys = generalized_sym_eig(pair.stiffness(), pair.mass(), k)?;
        if let Some(&l0) = sys.values.first() {
            if l0 < -1e-9 {
                return Err(Error::InvalidArgument(format!("operator is not positive semidefinite (λ₀ = {l0:e})")));
            }
        }
        Ok(Self { values: sys.values, vectors: sys.vectors, mass: pair.mass_diagonal() })
    }

    /// Basis of size `min(n, 64)`.
    pub fn compute_default(pair: &LaplacianPair) -> Result<Self> {
        Self::compute(pair, pair.n().min(DEFAULT_BASIS_SIZE))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvectors as columns.
    pub fn vectors(&self) -> &DenseMatrix {
        &self.vectors
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn n(&self) -> usize {
        self.mass.len()
    }

    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.vectors.column(j)
    }

    /// `max |ΦᵀMΦ − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let k = self.k();
        let mut worst = 0.0f64;
        for a in 0..k {
            for b in a..k {
                let ip: f64 = (0..self.n()).map(|u| self.vectors[(u, a)] * self.mass[u] * self.vectors[(u, b)]).sum();
                worst = worst.max((ip - if a == b { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n() {
            return dim_err(format!("signal of length {} on {} vertices", x.len(), self.n()));
        }
        Ok(())
    }

    /// `Σ_j c_j φ_j`.
    pub fn synthesize(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() > self.k() {
            return dim_err(format!("{} coefficients for a basis of size {}", coeffs.len(), self.k()));
        }
        Ok((0..self.n())
            .map(|u| coeffs.iter().enumerate().map(|(j, c)| c * self.vectors[(u, j)]).sum())
            .collect())
    }

    /// `⟨x, y⟩_M`.
    pub fn mass_inner(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(y).zip(&self.mass).map(|((a, b), m)| a * b * m).sum()
    }
}

/// `x̂_k = φ_kᵀ M x`.
pub fn fourier_coefficients(basis: &SpectralBasis, x: &[f64]) -> Result<Vec<f64>> {
    basis.check_len(x)?;
    let mx: Vec<f64> = x.iter().zip(basis.mass()).map(|(a, m)| a * m).collect();
    basis.vectors.matvec_transposed(&mx)
}

/// Partial Fourier sum and its approximation bound.
#[derive(Debug, Clone)]
pub struct Truncation {
    pub reconstruction: Vec<f64>,
    /// Squared M-norm of the residual.
    pub error: f64,
    /// `xᵀLx / λ_{N+1}`; infinite when the basis has no eigenvalue beyond `N`.
    pub bound: f64,
}

/// Keep coefficients `0..=n_keep`; the error is bounded by the Dirichlet
/// energy over the first discarded eigenvalue.
pub fn truncated_reconstruction(basis: &SpectralBasis, stiffness: &SparseMatrix, x: &[f64], n_keep: usize) -> Result<Truncation> {
    if n_keep >= basis.k() {
        return arg_err(format!("N = {n_keep} must be below the basis size {}", basis.k()));
    }
    let coeffs = fourier_coefficients(basis, x)?;
    let reconstruction = basis.synthesize(&coeffs[..=n_keep])?;
    let residual: Vec<f64> = x.iter().zip(&reconstruction).map(|(a, b)| a - b).collect();
    let error = basis.mass_inner(&residual, &residual);
    let bound = match basis.values.get(n_keep + 1) {
        None => f64::INFINITY,
        // xᵀLx ≥ 0 exactly; rounding can push it a hair below zero.
        Some(&lam) if lam > 1e-10 => dirichlet_energy(stiffness, x)?.max(0.0) / lam,
        Some(&lam) => return arg_err(format!("λ_(N+1) = {lam:e} is too small to bound the error")),
    };
    Ok(Truncation { reconstruction, error, bound })
}

/// `xᵀLx`.
pub fn dirichlet_energy(l: &SparseMatrix, x: &[f64]) -> Result<f64> {
    let lx = l.matvec(x)?;
    Ok(x.iter().zip(&lx).map(|(a, b)| a * b).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{cotan_laplacian, icosphere};
    use rand::Rng;

    fn sphere_basis(level: usize, k: usize) -> (LaplacianPair, SpectralBasis) {
        let pair = cotan_laplacian(&icosphere(level).unwrap()).unwrap();
        let basis = SpectralBasis::compute(&pair, k).unwrap();
        (pair, basis)
    }

    #[test]
    fn basis_is_mass_orthonormal() {
        let (_, b) = sphere_basis(1, 42);
        assert!(b.orthonormality_error() < 1e-8);
        assert!(b.values()[0].abs() < 1e-9);
        assert!(b.values().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn coefficient_examples() {
        let (_, b) = sphere_basis(1, 42);
        let c = fourier_coefficients(&b, &b.vector(5)).unwrap();
        for (j, v) in c.iter().enumerate() {
            assert!((v - if j == 5 { 1.0 } else { 0.0 }).abs() < 1e-8);
        }
        let c = fourier_coefficients(&b, &vec![2.0; 42]).unwrap();
        assert!(c[0].abs() > 1.0);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-8));
        let mut rng = crate::rng::seeded(3);
        let x: Vec<f64> = (0..42).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = fourier_coefficients(&b, &x).unwrap();
        let lhs: f64 = c.iter().map(|v| v * v).sum();
        assert!((lhs - b.mass_inner(&x, &x)).abs() < 1e-10);
        assert!(fourier_coefficients(&b, &x[..5]).is_err());
    }

    #[test]
    fn truncation_examples() {
        let (pair, b) = sphere_basis(1, 42);
        let mut rng = crate::rng::seeded(4);
        let x: Vec<f64> = (0..42).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let full = truncated_reconstruction(&b, pair.stiffness(), &x, 41).unwrap();
        assert!(full.error <= 1e-12);
        let t = truncated_reconstruction(&b, pair.stiffness(), &b.vector(0), 0).unwrap();
        // Both sides are rounding noise here: the residual is ~1e-32.
        assert!(t.error < 1e-20 && t.bound >= 0.0 && t.bound < 1e-12, "{} {}", t.error, t.bound);
        for n in [3, 8, 15] {
            let t = truncated_reconstruction(&b, pair.stiffness(), &x, n).unwrap();
            assert!(t.error <= t.bound * (1.0 + 1e-6));
        }
        assert!(truncated_reconstruction(&b, pair.stiffness(), &x, 42).is_err());
    }

    #[test]
    fn dirichlet_energy_examples() {
        let (pair, b) = sphere_basis(1, 42);
        assert!(dirichlet_energy(pair.stiffness(), &vec![1.5; 42]).unwrap().abs() < 1e-12);
        for j in [1, 7, 30] {
            let e = dirichlet_energy(pair.stiffness(), &b.vector(j)).unwrap();
            assert!((e - b.values()[j]).abs() < 1e-8);
        }
    }
}
