use num_complex::Complex64;

use super::SpectralBasis;
use crate::error::{arg_err, dim_err, Result};
use crate::mesh::LaplacianPair;
use crate::numkit::{ComplexLu, ComplexMatrix, DenseMatrix};

/// Power-series filter `Σ_l α_l Δ^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFilter {
    coeffs: Vec<f64>,
}

impl PolyFilter {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return arg_err("polynomial filters need at least one finite coefficient");
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// Rational filter `Re Σ_l α_l ((Δ − i)/(Δ + i))^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct CayleyFilter {
    coeffs: Vec<Complex64>,
}

impl CayleyFilter {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return arg_err("Cayley filters need at least one finite coefficient");
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// `p̂(λ) = Σ_l α_l λ^l`.
pub fn poly_transfer(f: &PolyFilter, lambda: f64) -> f64 {
    f.coeffs.iter().rev().fold(0.0, |acc, c| acc * lambda + c)
}

/// `p̂(λ) = Re Σ_l α_l ((λ − i)/(λ + i))^l`.
pub fn cayley_transfer(f: &CayleyFilter, lambda: f64) -> f64 {
    let c = Complex64::new(lambda, -1.0) / Complex64::new(lambda, 1.0);
    let mut z = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for a in &f.coeffs {
        acc += a * z;
        z *= c;
    }
    acc.re
}

/// `Φ diag(p̂(λ)) Φᵀ M x`.
pub fn apply_transfer_direct(basis: &SpectralBasis, transfer: impl Fn(f64) -> f64, x: &[f64]) -> Result<Vec<f64>> {
    let coeffs = super::fourier_coefficients(basis, x)?;
    let scaled: Vec<f64> = coeffs.iter().zip(basis.values()).map(|(c, &l)| transfer(l) * c).collect();
    basis.synthesize(&scaled)
}

/// Horner evaluation with sparse products by `Δ = M⁻¹L`; no eigendecomposition.
pub fn apply_poly_filter(pair: &LaplacianPair, f: &PolyFilter, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != pair.n() {
        return dim_err(format!("signal of length {} on {} vertices", x.len(), pair.n()));
    }
    let top = *f.coeffs.last().expect("non-empty");
    let mut y: Vec<f64> = x.iter().map(|v| top * v).collect();
    for &a in f.coeffs.iter().rev().skip(1) {
        y = pair.apply_geometric(&y)?;
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += a * xi;
        }
    }
    Ok(y)
}

/// Iterated solves `(L + iM) z_l = (L − iM) z_{l−1}`, i.e.
/// `z_l = (Δ + i)^{-1}(Δ − i) z_{l−1}`, returning `Re Σ_l α_l z_l`.
pub fn apply_cayley_filter(pair: &LaplacianPair, f: &CayleyFilter, x: &[f64]) -> Result<Vec<f64>> {
    let n = pair.n();
    if x.len() != n {
        return dim_err(format!("signal of length {n} expected, got {}", x.len()));
    }
    let mass = pair.mass_diagonal();
    let mut z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut acc: Vec<Complex64> = z.iter().map(|&v| f.coeffs[0] * v).collect();
    if f.coeffs.len() > 1 {
        let dense = pair.stiffness().to_dense();
        let mut imag = DenseMatrix::zeros(n, n);
        for (u, &m) in mass.iter().enumerate() {
            imag[(u, u)] = m;
        }
        let lu = ComplexLu::factor(&ComplexMatrix::from_parts(n, dense.as_slice(), imag.as_slice())?)?;
        for a in &f.coeffs[1..] {
            let re: Vec<f64> = z.iter().map(|v| v.re).collect();
            let im: Vec<f64> = z.iter().map(|v| v.im).collect();
            let lre = pair.apply_stiffness(&re)?;
            let lim = pair.apply_stiffness(&im)?;
            // (L − iM)(re + i·im) = (L·re + M·im) + i(L·im − M·re)
            let rhs: Vec<Complex64> =
                (0..n).map(|u| Complex64::new(lre[u] + mass[u] * im[u], lim[u] - mass[u] * re[u])).collect();
            z = lu.solve(&rhs)?;
            for (s, v) in acc.iter_mut().zip(&z) {
                *s += a * v;
            }
        }
    }
    Ok(acc.iter().map(|v| v.re).collect())
}

/// Solve the small normal equations `AᵀA c = Aᵀb` (rows of `A` are samples).
fn least_squares(rows: &[Vec<f64>], targets: &[f64]) -> Result<Vec<f64>> {
    let m = rows.first().map_or(0, Vec::len);
    let mut ata = DenseMatrix::zeros(m, m);
    let mut atb = vec![0.0; m];
    for (r, &t) in rows.iter().zip(targets) {
        for i in 0..m {
            atb[i] += r[i] * t;
            for j in 0..m {
                ata[(i, j)] += r[i] * r[j];
            }
        }
    }
    // Tiny ridge keeps rank-deficient sample sets solvable.
    let ridge = 1e-12 * (0..m).map(|i| ata[(i, i)]).fold(0.0, f64::max);
    for i in 0..m {
        ata[(i, i)] += ridge;
    }
    let lu = ComplexLu::factor(&ComplexMatrix::from_parts(m, ata.as_slice(), &vec![0.0; m * m])?)?;
    let rhs: Vec<Complex64> = atb.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Ok(lu.solve(&rhs)?.iter().map(|v| v.re).collect())
}

/// Least-squares polynomial of `degree` matching `target` at `samples`.
///
/// The fit runs in the rescaled variable `λ/max|λ|` for conditioning and the
/// coefficients are mapped back to powers of `λ`.
pub fn fit_poly_filter(samples: &[f64], target: impl Fn(f64) -> f64, degree: usize) -> Result<PolyFilter> {
    if samples.len() <= degree {
        return arg_err(format!("{} samples cannot determine a degree-{degree} fit", samples.len()));
    }
    let s = samples.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let rows: Vec<Vec<f64>> = samples.iter().map(|&l| (0..=degree).map(|p| (l / s).powi(p as i32)).collect()).collect();
    let ys: Vec<f64> = samples.iter().map(|&l| target(l)).collect();
    let beta = least_squares(&rows, &ys)?;
    PolyFilter::new(beta.iter().enumerate().map(|(p, b)| b / s.powi(p as i32)).collect())
}

/// Least-squares Cayley filter of `degree` matching `target` at `samples`.
pub fn fit_cayley_filter(samples: &[f64], target: impl Fn(f64) -> f64, degree: usize) -> Result<CayleyFilter> {
    if samples.len() <= 2 * degree {
        return arg_err(format!("{} samples cannot determine a degree-{degree} Cayley fit", samples.len()));
    }
    // Re(α_l e^{ilθ}) = a_l cos(lθ) − b_l sin(lθ), θ = arg((λ−i)/(λ+i)).
    let rows: Vec<Vec<f64>> = samples
        .iter()
        .map(|&l| {
            let theta = (Complex64::new(l, -1.0) / Complex64::new(l, 1.0)).arg();
            let mut r = vec![1.0];
            for p in 1..=degree {
                r.push((p as f64 * theta).cos());
                r.push(-(p as f64 * theta).sin());
            }
            r
        })
        .collect();
    let ys: Vec<f64> = samples.iter().map(|&l| target(l)).collect();
    let c = least_squares(&rows, &ys)?;
    let mut coeffs = vec![Complex64::new(c[0], 0.0)];
    for p in 0..degree {
        coeffs.push(Complex64::new(c[1 + 2 * p], c[2 + 2 * p]));
    }
    CayleyFilter::new(coeffs)
}
