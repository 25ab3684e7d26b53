use std::time::Instant;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::filters::{apply_cayley_filter, apply_poly_filter, fit_cayley_filter, fit_poly_filter};
use super::{fourier_coefficients, SpectralBasis};
use crate::error::{arg_err, Result};
use crate::mesh::{cotan_laplacian, jitter_mesh, LaplacianPair, TriMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityKind {
    /// Per-eigenvector weights on index-matched bases.
    DirectHighpass,
    Poly(usize),
    Cayley(usize),
}

impl StabilityKind {
    pub fn name(self) -> String {
        match self {
            Self::DirectHighpass => "direct-highpass".into(),
            Self::Poly(r) => format!("poly({r})"),
            Self::Cayley(r) => format!("cayley({r})"),
        }
    }

    /// `direct-highpass`, `poly`, `cayley`, with `degree` for the latter two.
    pub fn parse(kind: &str, degree: usize) -> Result<Self> {
        match kind {
            "direct-highpass" | "direct" => Ok(Self::DirectHighpass),
            "poly" => Ok(Self::Poly(degree)),
            "cayley" => Ok(Self::Cayley(degree)),
            other => arg_err(format!("unknown transfer kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub mesh: String,
    pub epsilon: f64,
    pub kind: String,
    pub discrepancy: f64,
    pub runtime_ms: u64,
    pub seed: u64,
}

/// Reference mesh, basis, input signal and high-pass bump shared by runs at
/// different perturbation sizes.
#[derive(Debug, Clone)]
pub struct StabilitySetup {
    mesh: TriMesh,
    k: usize,
    seed: u64,
    pair: LaplacianPair,
    basis: SpectralBasis,
    signal: Vec<f64>,
    centre: f64,
    width: f64,
}

impl StabilitySetup {
    /// Bump `exp(−(λ−λ_hi)²/(2σ²))` with `λ_hi` the 90th-percentile basis
    /// eigenvalue and `σ` a twentieth of the basis spectral range; the input
    /// signal is uniform(−1, 1) per vertex from `seed`.
    pub fn new(mesh: &TriMesh, k: usize, seed: u64) -> Result<Self> {
        let pair = cotan_laplacian(mesh)?;
        let basis = SpectralBasis::compute(&pair, k)?;
        let vals = basis.values();
        let idx = ((0.9 * (vals.len() - 1) as f64).round() as usize).min(vals.len() - 1);
        let centre = vals[idx];
        let width = (vals[vals.len() - 1] - vals[0]) / 20.0;
        if !(width > 0.0) {
            return arg_err("basis spectrum has zero range");
        }
        let mut rng = crate::rng::stream(seed, "stability_signal");
        let signal = (0..mesh.n_vertices()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Ok(Self { mesh: mesh.clone(), k, seed, pair, basis, signal, centre, width })
    }

    pub fn bump(&self, lambda: f64) -> f64 {
        (-(lambda - self.centre).powi(2) / (2.0 * self.width * self.width)).exp()
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    pub fn signal(&self) -> &[f64] {
        &self.signal
    }

    /// `‖y − ỹ‖/‖y‖` between the filter applied on the reference mesh and on
    /// its jittered copy.
    pub fn run(&self, epsilon: f64, kind: StabilityKind) -> Result<f64> {
        if !(0.0..=0.02).contains(&epsilon) {
            return arg_err(format!("epsilon {epsilon} outside [0, 0.02]"));
        }
        let other = jitter_mesh(&self.mesh, epsilon, self.seed)?;
        let pair2 = cotan_laplacian(&other)?;
        let x = &self.signal;
        let (y, y2) = match kind {
            StabilityKind::DirectHighpass => {
                let weights: Vec<f64> = self.basis.values().iter().map(|&l| self.bump(l)).collect();
                let basis2 = SpectralBasis::compute(&pair2, self.k)?;
                let apply = |b: &SpectralBasis| -> Result<Vec<f64>> {
                    let c = fourier_coefficients(b, x)?;
                    let scaled: Vec<f64> = c.iter().zip(&weights).map(|(c, w)| c * w).collect();
                    b.synthesize(&scaled)
                };
                (apply(&self.basis)?, apply(&basis2)?)
            }
            StabilityKind::Poly(r) => {
                let f = fit_poly_filter(self.basis.values(), |l| self.bump(l), r)?;
                (apply_poly_filter(&self.pair, &f, x)?, apply_poly_filter(&pair2, &f, x)?)
            }
            StabilityKind::Cayley(r) => {
                let f = fit_cayley_filter(self.basis.values(), |l| self.bump(l), r)?;
                (apply_cayley_filter(&self.pair, &f, x)?, apply_cayley_filter(&pair2, &f, x)?)
            }
        };
        let num: f64 = y.iter().zip(&y2).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let den: f64 = y.iter().map(|a| a * a).sum::<f64>().sqrt();
        if den == 0.0 {
            return arg_err("filter output vanishes on the reference mesh");
        }
        Ok(num / den)
    }
}

/// One run of the experiment, timed.
pub fn perturbation_stability_experiment(
    mesh: &TriMesh,
    mesh_name: &str,
    epsilon: f64,
    kind: StabilityKind,
    seed: u64,
) -> Result<StabilityRecord> {
    let start = Instant::now();
    let setup = StabilitySetup::new(mesh, mesh.n_vertices().min(super::DEFAULT_BASIS_SIZE), seed)?;
    let discrepancy = setup.run(epsilon, kind)?;
    Ok(StabilityRecord {
        mesh: mesh_name.to_string(),
        epsilon,
        kind: kind.name(),
        discrepancy,
        runtime_ms: start.elapsed().as_millis() as u64,
        seed,
    })
}
