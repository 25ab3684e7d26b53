//! Dense and sparse linear-algebra kernels.
//!
//! Everything here is a pure function of immutable inputs. The symmetric
//! eigensolver is cyclic Jacobi on dense storage; sparse operators are
//! densified before decomposition, which is fine at the mesh sizes used in
//! this crate (a few thousand vertices at most).

mod complex;
mod dense;
mod eigen;
mod sparse;

pub use complex::{complex_linear_solve, ComplexLu, ComplexMatrix, ComplexVector};
pub use dense::DenseMatrix;
pub use eigen::{
    fix_sign, generalized_sym_eig, nullspace_basis, sym_eig, EigenSystem, DEFAULT_TOL, MAX_SWEEPS,
};
pub use num_complex::Complex64;
pub use sparse::SparseMatrix;
