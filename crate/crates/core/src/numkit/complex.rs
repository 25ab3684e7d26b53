use num_complex::Complex64;

use crate::error::{dim_err, Error, Result};

pub type ComplexVector = Vec<Complex64>;

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return dim_err(format!("{} entries for {n}x{n} complex matrix", data.len()));
        }
        Ok(Self { n, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        Self { n, data }
    }

    /// `re + i·im` from two real matrices given row-major.
    pub fn from_parts(n: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != n * n || im.len() != n * n {
            return dim_err("complex parts have wrong length");
        }
        Ok(Self { n, data: re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.n + c]
    }

    pub fn matvec(&self, x: &[Complex64]) -> Result<ComplexVector> {
        if x.len() != self.n {
            return dim_err("complex matvec length mismatch");
        }
        Ok((0..self.n)
            .map(|r| self.data[r * self.n..(r + 1) * self.n].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }
}

/// LU factorisation with partial pivoting, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct ComplexLu {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

const PIVOT_THRESHOLD: f64 = 1e-14;

impl ComplexLu {
    pub fn factor(a: &ComplexMatrix) -> Result<Self> {
        let n = a.n;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = lu.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        for k in 0..n {
            let (p, pmag) = (k..n)
                .map(|r| (r, lu[r * n + k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmag <= PIVOT_THRESHOLD * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::Singular { column: k, pivot: pmag });
            }
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for r in k + 1..n {
                let factor = lu[r * n + k] / pivot;
                lu[r * n + k] = factor;
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let (upper, lower) = lu.split_at_mut(r * n);
                let krow = &upper[k * n + k + 1..k * n + n];
                for (x, &u) in lower[k + 1..n].iter_mut().zip(krow) {
                    *x -= factor * u;
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<ComplexVector> {
        let n = self.n;
        if b.len() != n {
            return dim_err("right-hand side length mismatch");
        }
        let mut y: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let mut s = y[r];
            for c in 0..r {
                s -= self.lu[r * n + c] * y[c];
            }
            y[r] = s;
        }
        for r in (0..n).rev() {
            let mut s = y[r];
            for c in r + 1..n {
                s -= self.lu[r * n + c] * y[c];
            }
            y[r] = s / self.lu[r * n + r];
        }
        Ok(y)
    }
}

/// Solve `a z = b` by partial-pivoting LU.
pub fn complex_linear_solve(a: &ComplexMatrix, b: &[Complex64]) -> Result<ComplexVector> {
    ComplexLu::factor(a)?.solve(b)
}
