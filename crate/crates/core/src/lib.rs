//! Forward computations for symmetry-aware neural layers.
//!
//! The crate covers five kinds of domains, each with the linear layers,
//! pooling and readouts that respect its symmetry group:
//!
//! - [`grid`]: periodic 1-D grids, circulant convolution, the DFT and the
//!   translation-invariant (but deformation-unstable) representations.
//! - [`groups`]: finite groups, their actions and representations, and group
//!   convolution.
//! - [`graph`]: permutation-symmetric set and graph layers plus the
//!   Weisfeiler-Lehman colour refinement.
//! - [`mesh`] and [`spectral`]: triangle meshes, cotangent Laplacians,
//!   spectral filters and functional maps.
//! - [`geo`]: E(3)-equivariant message passing and gauge-equivariant mesh
//!   convolution.
//! - [`seq`]: recurrent models over the temporal grid.
//!
//! Dense and sparse kernels shared by all of the above live in [`numkit`].

pub mod error;
pub mod geo;
pub mod graph;
pub mod grid;
pub mod groups;
pub mod mesh;
pub mod numkit;
pub mod rng;
pub mod seq;
pub mod spectral;
pub(crate) mod tree_sum;

pub use error::{Error, Result};
