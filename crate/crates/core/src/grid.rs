//! Signals on the periodic 1-D grid `Z_n`.
//!
//! Convolution follows the circulant convention `y_u = Σ_v x_v θ_{u−v}`.
//! Cross-correlation (the form used by group convolution) is obtained by
//! reflecting the filter, see [`CirculantFilter::reflected`].

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{arg_err, dim_err, Error, Result};
use crate::numkit::ComplexVector;

/// Multi-channel signal on the ring `Z_n`, stored position-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSignal {
    n: usize,
    channels: usize,
    data: Vec<f64>,
}

impl GridSignal {
    pub fn new(n: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || channels == 0 {
            return arg_err("grid signals need n ≥ 1 and at least one channel");
        }
        if data.len() != n * channels {
            return dim_err(format!("{} samples for {n} positions × {channels} channels", data.len()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return arg_err("grid samples must be finite");
        }
        Ok(Self { n, channels, data })
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(n, 1, values)
    }

    pub fn from_channels(channels: &[Vec<f64>]) -> Result<Self> {
        let n = channels.first().map_or(0, Vec::len);
        if channels.iter().any(|c| c.len() != n) {
            return dim_err("channels differ in length");
        }
        let mut data = Vec::with_capacity(n * channels.len());
        for u in 0..n {
            data.extend(channels.iter().map(|c| c[u]));
        }
        Self::new(n, channels.len(), data)
    }

    pub fn zeros(n: usize, channels: usize) -> Self {
        Self { n, channels, data: vec![0.0; n * channels] }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false: grids have at least one position.
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn get(&self, u: usize, c: usize) -> f64 {
        self.data[u * self.channels + c]
    }

    pub fn channel(&self, c: usize) -> Vec<f64> {
        (0..self.n).map(|u| self.get(u, c)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn single_channel(&self) -> Result<&[f64]> {
        if self.channels != 1 {
            return arg_err(format!("expected a single-channel signal, got {} channels", self.channels));
        }
        Ok(&self.data)
    }

    fn map_channels(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let outs: Vec<Vec<f64>> = (0..self.channels).map(|c| f(&self.channel(c))).collect();
        Self::from_channels(&outs)
    }

    /// One row per position, one comma-separated column per channel.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for u in 0..self.n {
            let row: Vec<String> = (0..self.channels).map(|c| format!("{:?}", self.get(u, c))).collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(Error::Parse { line: i + 1, message: "inconsistent channel count".into() });
                }
            }
            rows.push(row);
        }
        let channels = rows.first().map_or(0, Vec::len);
        Self::new(rows.len(), channels, rows.concat())
    }
}

/// Filter taps `θ_0..θ_{n−1}` of a circulant matrix `C(θ) = (θ_{u−v mod n})`.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantFilter {
    taps: Vec<f64>,
}

impl CirculantFilter {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() || taps.iter().any(|v| !v.is_finite()) {
            return arg_err("filter taps must be non-empty and finite");
        }
        Ok(Self { taps })
    }

    /// Zero-pad a short support to length `n`.
    pub fn padded(support: &[f64], n: usize) -> Result<Self> {
        if support.len() > n {
            return dim_err(format!("support of {} taps exceeds grid length {n}", support.len()));
        }
        let mut taps = support.to_vec();
        taps.resize(n, 0.0);
        Self::new(taps)
    }

    pub fn delta(n: usize) -> Self {
        let mut taps = vec![0.0; n];
        taps[0] = 1.0;
        Self { taps }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// `θ'_w = θ_{−w mod n}`; convolving with it cross-correlates with `θ`.
    pub fn reflected(&self) -> Self {
        let n = self.taps.len();
        Self { taps: (0..n).map(|w| self.taps[(n - w) % n]).collect() }
    }
}

/// Per-position displacements `τ(u)` in samples.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpField {
    tau: Vec<f64>,
}

impl WarpField {
    pub fn new(tau: Vec<f64>) -> Result<Self> {
        let n = tau.len();
        if n == 0 || tau.iter().any(|t| !t.is_finite()) {
            return arg_err("warp field must be non-empty and finite");
        }
        let max = tau.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        if max >= n as f64 / 2.0 {
            return arg_err(format!("max |τ| = {max} is not below n/2"));
        }
        let jump = tau.windows(2).fold(0.0f64, |m, w| m.max((w[1] - w[0]).abs()));
        if jump >= 1.0 {
            return arg_err(format!("max |τ(u+1) − τ(u)| = {jump} is not below 1"));
        }
        Ok(Self { tau })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..n).map(|u| f(u as f64)).collect())
    }

    pub fn displacements(&self) -> &[f64] {
        &self.tau
    }

    /// Discrete Dirichlet energy `Σ (τ(u+1) − τ(u))²`, the deformation cost.
    pub fn deformation_cost(&self) -> f64 {
        self.tau.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum()
    }
}

/// `y_u = Σ_v x_v θ_{u−v mod n}`, channel-wise.
///
/// The sum runs over the filter index, so shifting the input reproduces the
/// shifted output bit for bit.
pub fn circulant_apply(theta: &CirculantFilter, x: &GridSignal) -> Result<GridSignal> {
    let n = x.len();
    if theta.len() != n {
        return dim_err(format!("filter of length {} on a grid of length {n}", theta.len()));
    }
    x.map_channels(|xs| {
        (0..n)
            .map(|u| {
                let mut acc = 0.0;
                for (w, &t) in theta.taps.iter().enumerate() {
                    acc += t * xs[(u + n - w) % n];
                }
                acc
            })
            .collect()
    })
}

/// Cross-correlation `y_k = Σ_u x_u θ_{u−k mod n}`, channel-wise.
pub fn cross_correlate(x: &GridSignal, theta: &CirculantFilter) -> Result<GridSignal> {
    circulant_apply(&theta.reflected(), x)
}

/// `y_u = x_{u−v mod n}`.
pub fn shift(x: &GridSignal, v: i64) -> GridSignal {
    let n = x.len() as i64;
    let s = v.rem_euclid(n) as usize;
    let n = x.len();
    let mut data = Vec::with_capacity(x.data.len());
    for u in 0..n {
        let src = (u + n - s) % n;
        data.extend_from_slice(&x.data[src * x.channels..(src + 1) * x.channels]);
    }
    GridSignal { n, channels: x.channels, data }
}

fn twiddles(n: usize, inverse: bool) -> Vec<Complex64> {
    let sign = if inverse { 1.0 } else { -1.0 };
    (0..n).map(|j| Complex64::from_polar(1.0, sign * 2.0 * PI * j as f64 / n as f64)).collect()
}

/// Unitary DFT by direct summation, `x̂_k = n^{-1/2} Σ_u x_u e^{∓2πiku/n}`.
pub fn dft_direct(x: &[Complex64], inverse: bool) -> ComplexVector {
    let n = x.len();
    let w = twiddles(n, inverse);
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (u, &xu) in x.iter().enumerate() {
                acc += xu * w[(k * u) % n];
            }
            acc * scale
        })
        .collect()
}

/// Unitary radix-2 FFT; `x.len()` must be a power of two.
pub fn fft_radix2(x: &[Complex64], inverse: bool) -> Result<ComplexVector> {
    let n = x.len();
    if !n.is_power_of_two() {
        return arg_err(format!("radix-2 FFT needs a power-of-two length, got {n}"));
    }
    let bits = n.trailing_zeros();
    let mut a: Vec<Complex64> = (0..n)
        .map(|i| x[if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) }])
        .collect();
    let w = twiddles(n, inverse);
    let mut len = 2;
    while len <= n {
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for j in 0..len / 2 {
                let t = w[j * stride] * a[start + j + len / 2];
                let u = a[start + j];
                a[start + j] = u + t;
                a[start + j + len / 2] = u - t;
            }
        }
        len <<= 1;
    }
    let scale = 1.0 / (n as f64).sqrt();
    a.iter_mut().for_each(|v| *v *= scale);
    Ok(a)
}

/// Unitary DFT of complex samples; uses the radix-2 path for powers of two.
pub fn dft_complex(x: &[Complex64], inverse: bool) -> ComplexVector {
    if x.len().is_power_of_two() {
        fft_radix2(x, inverse).expect("length is a power of two")
    } else {
        dft_direct(x, inverse)
    }
}

/// Unitary DFT of a single-channel real signal.
pub fn dft(x: &GridSignal, inverse: bool) -> Result<ComplexVector> {
    let xs = x.single_channel()?;
    let c: Vec<Complex64> = xs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Ok(dft_complex(&c, inverse))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolMode {
    Average,
    Max,
}

/// Grid coarsening by non-overlapping windows.
pub fn grid_pool(x: &GridSignal, window: usize, mode: PoolMode) -> Result<GridSignal> {
    if window == 0 || x.len() % window != 0 {
        return arg_err(format!("window {window} does not divide grid length {}", x.len()));
    }
    let m = x.len() / window;
    x.map_channels(|xs| {
        xs.chunks(window)
            .map(|w| match mode {
                PoolMode::Average => w.iter().sum::<f64>() / window as f64,
                PoolMode::Max => w.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            })
            .collect::<Vec<_>>()
    })
    .map(|s| {
        debug_assert_eq!(s.len(), m);
        s
    })
}

/// `x_τ(u) = x(u − τ(u))` with periodic piecewise-linear interpolation.
pub fn warp_signal(x: &GridSignal, tau: &WarpField) -> Result<GridSignal> {
    let n = x.len();
    if tau.tau.len() != n {
        return dim_err(format!("warp of length {} on grid of length {n}", tau.tau.len()));
    }
    x.map_channels(|xs| {
        (0..n)
            .map(|u| {
                let p = (u as f64 - tau.tau[u]).rem_euclid(n as f64);
                let i = p.floor();
                let f = p - i;
                let i = (i as usize) % n;
                (1.0 - f) * xs[i] + f * xs[(i + 1) % n]
            })
            .collect()
    })
}

/// `R_x(v) = Σ_u x_u x_{u−v mod n}`.
///
/// Products are summed in sorted order, so any integer shift of `x` (which
/// only permutes the products) gives a bit-identical result.
pub fn autocorrelation(x: &GridSignal) -> Result<GridSignal> {
    let xs = x.single_channel()?;
    let n = xs.len();
    let mut products = vec![0.0; n];
    let r = (0..n)
        .map(|v| {
            for (u, p) in products.iter_mut().enumerate() {
                *p = xs[u] * xs[(u + n - v) % n];
            }
            products.sort_by(f64::total_cmp);
            products.iter().sum()
        })
        .collect();
    GridSignal::from_values(r)
}

/// `|x̂_k|` per frequency.
///
/// Evaluated from the autocorrelation (`|x̂_k|² = n^{-1} Σ_v R_x(v) cos(2πkv/n)`),
/// which makes the output bit-identical under integer shifts of `x`.
pub fn fourier_modulus(x: &GridSignal) -> Result<GridSignal> {
    let r = autocorrelation(x)?;
    let n = x.len();
    let rs = r.as_slice();
    let out = (0..n)
        .map(|k| {
            let mut acc = 0.0;
            for (v, &rv) in rs.iter().enumerate() {
                acc += rv * (2.0 * PI * ((k * v) % n) as f64 / n as f64).cos();
            }
            (acc / n as f64).max(0.0).sqrt()
        })
        .collect();
    GridSignal::from_values(out)
}

/// Register `x` to the anchor `a(x) = argmax_u |(x⋆h)(u)|` (lowest index on ties):
/// `y_u = x_{u + a(x) mod n}`.
pub fn registration_invariant(x: &GridSignal, h: &CirculantFilter) -> Result<GridSignal> {
    x.single_channel()?;
    let c = circulant_apply(h, x)?;
    let mut anchor = 0;
    let mut best = f64::NEG_INFINITY;
    for (u, v) in c.as_slice().iter().enumerate() {
        if v.abs() > best {
            best = v.abs();
            anchor = u;
        }
    }
    Ok(shift(x, -(anchor as i64)))
}

fn complex_samples(x: &GridSignal) -> Result<Vec<Complex64>> {
    match x.channels() {
        1 => Ok(x.as_slice().iter().map(|&v| Complex64::new(v, 0.0)).collect()),
        2 => Ok(x.as_slice().chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()),
        c => arg_err(format!("expected a real or (re, im) signal, got {c} channels")),
    }
}

/// Unit-norm modulated Gaussian `e^{2πi k0 u/n} e^{−(u−n/2)²/(2σ²)}` as
/// (real, imaginary) channels.
pub fn gabor_signal(n: usize, k0: usize, sigma: f64) -> Result<GridSignal> {
    if !(sigma > 0.0 && sigma < n as f64 / 8.0) {
        return arg_err(format!("sigma {sigma} outside (0, n/8)"));
    }
    if 2 * k0 >= n {
        return arg_err(format!("k0 {k0} must be below n/2"));
    }
    let half = n as f64 / 2.0;
    let raw: Vec<Complex64> = (0..n)
        .map(|u| {
            let env = (-(u as f64 - half).powi(2) / (2.0 * sigma * sigma)).exp();
            Complex64::from_polar(env, 2.0 * PI * ((k0 * u) % n) as f64 / n as f64)
        })
        .collect();
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let re = raw.iter().map(|z| z.re / norm).collect();
    let im = raw.iter().map(|z| z.im / norm).collect();
    GridSignal::from_channels(&[re, im])
}

/// `‖ |x̂_τ| − |x̂| ‖ / ‖x‖` for a Gabor atom under the dilation `τ(u) = s(u − n/2)`.
pub fn modulus_instability_ratio(n: usize, k0: usize, sigma: f64, s: f64) -> Result<f64> {
    if !(s.abs() < 0.5) {
        return arg_err(format!("dilation factor {s} must satisfy |s| < 0.5"));
    }
    let x = gabor_signal(n, k0, sigma)?;
    let half = n as f64 / 2.0;
    let tau = WarpField::from_fn(n, |u| s * (u - half))?;
    let xt = warp_signal(&x, &tau)?;
    let a = dft_complex(&complex_samples(&x)?, false);
    let b = dft_complex(&complex_samples(&xt)?, false);
    let diff = a.iter().zip(&b).map(|(p, q)| (q.norm() - p.norm()).powi(2)).sum::<f64>().sqrt();
    Ok(diff / x.norm())
}
