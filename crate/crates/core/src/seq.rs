//! Recurrent models on the one-dimensional time grid: SimpleRNN with
//! fixed-point initial states, LSTM, the time-warping-invariant gated RNN and
//! chrono initialisation.

use std::fmt::Write as _;

use rand::Rng as _;

use crate::error::{arg_err, dim_err, Error, Result};
use crate::numkit::DenseMatrix;
use crate::rng::Rng;

/// `T` steps of `k`-wide real vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    width: usize,
    steps: Vec<Vec<f64>>,
}

impl Sequence {
    pub fn new(width: usize, steps: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(t) = steps.iter().position(|s| s.len() != width) {
            return dim_err(format!("step {t} has width {}, expected {width}", steps[t].len()));
        }
        if steps.iter().flatten().any(|v| !v.is_finite()) {
            return arg_err("sequence values must be finite");
        }
        Ok(Self { width, steps })
    }

    pub fn zeros(len: usize, width: usize) -> Self {
        Self { width, steps: vec![vec![0.0; width]; len] }
    }

    /// Standard-normal-free helper: uniform(−a, a) entries.
    pub fn random(len: usize, width: usize, amplitude: f64, rng: &mut Rng) -> Self {
        let steps = (0..len).map(|_| (0..width).map(|_| rng.gen_range(-amplitude..=amplitude)).collect()).collect();
        Self { width, steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn step(&self, t: usize) -> &[f64] {
        &self.steps[t]
    }

    pub fn steps(&self) -> &[Vec<f64>] {
        &self.steps
    }

    pub fn last(&self) -> Option<&[f64]> {
        self.steps.last().map(Vec::as_slice)
    }

    /// Sequence without its first `count` steps.
    pub fn drop_first(&self, count: usize) -> Self {
        Self { width: self.width, steps: self.steps[count.min(self.len())..].to_vec() }
    }

    /// Largest absolute difference between equally shaped sequences.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.len() != other.len() || self.width != other.width {
            return dim_err("sequences differ in shape");
        }
        Ok(self.steps.iter().flatten().zip(other.steps.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    /// One row per step.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for step in &self.steps {
            let row: Vec<String> = step.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut steps: Vec<Vec<f64>> = Vec::new();
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
            if steps.first().is_some_and(|f| f.len() != row.len()) {
                return Err(Error::Parse { line: i + 1, message: "inconsistent width".into() });
            }
            steps.push(row);
        }
        let width = steps.first().map_or(0, Vec::len);
        Self::new(width, steps)
    }
}

/// Logistic function kept strictly inside (0, 1), so saturated gates never
/// round to exactly 0 or 1.
pub fn logistic(x: f64) -> f64 {
    let v = 1.0 / (1.0 + (-x).exp());
    v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

fn affine(w: &DenseMatrix, z: &[f64], u: &DenseMatrix, h: &[f64], b: &[f64]) -> Vec<f64> {
    let wz = w.matvec(z).expect("input width checked");
    let uh = u.matvec(h).expect("state width checked");
    wz.iter().zip(&uh).zip(b).map(|((a, c), d)| a + c + d).collect()
}

fn check_block(w: &DenseMatrix, u: &DenseMatrix, b: &[f64], what: &str) -> Result<()> {
    let m = b.len();
    if w.rows() != m || u.rows() != m || u.cols() != m {
        return dim_err(format!("{what}: W must be {m}×k and U {m}×{m}"));
    }
    let finite = w.as_slice().iter().chain(u.as_slice()).chain(b).all(|v| v.is_finite());
    if !finite {
        return arg_err(format!("{what}: parameters must be finite"));
    }
    Ok(())
}

fn random_block(k: usize, m: usize, rng: &mut Rng) -> (DenseMatrix, DenseMatrix, Vec<f64>) {
    let (sk, sm) = (1.0 / (k.max(1) as f64).sqrt(), 1.0 / (m.max(1) as f64).sqrt());
    let w = DenseMatrix::from_fn(m, k, |_, _| rng.gen_range(-sk..sk));
    let u = DenseMatrix::from_fn(m, m, |_, _| rng.gen_range(-sm..sm));
    let b = (0..m).map(|_| rng.gen_range(-sm..sm)).collect();
    (w, u, b)
}

/// `R(z, h) = tanh(Wz + Uh + b)`. `W` is stored `m×k` so it acts on
/// column vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleRnnParams {
    pub w: DenseMatrix,
    pub u: DenseMatrix,
    pub b: Vec<f64>,
}

impl SimpleRnnParams {
    pub fn new(w: DenseMatrix, u: DenseMatrix, b: Vec<f64>) -> Result<Self> {
        check_block(&w, &u, &b, "SimpleRNN")?;
        Ok(Self { w, u, b })
    }

    pub fn zeros(k: usize, m: usize) -> Self {
        Self { w: DenseMatrix::zeros(m, k), u: DenseMatrix::zeros(m, m), b: vec![0.0; m] }
    }

    pub fn random(k: usize, m: usize, rng: &mut Rng) -> Self {
        let (w, u, b) = random_block(k, m, rng);
        Self { w, u, b }
    }

    pub fn input_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn state_dim(&self) -> usize {
        self.b.len()
    }

    /// Copy with `U` rescaled so its spectral norm equals `target`.
    pub fn with_recurrent_norm(&self, target: f64) -> Self {
        let n = spectral_norm(&self.u);
        let s = if n > 0.0 { target / n } else { 0.0 };
        Self { u: self.u.scale(s), ..self.clone() }
    }

    /// Copy with `U` multiplied by `factor`.
    pub fn with_recurrent_scaled(&self, factor: f64) -> Self {
        Self { u: self.u.scale(factor), ..self.clone() }
    }

    /// Gelfand estimate `‖U³²‖_F^{1/32}` of the spectral radius of `U`.
    pub fn spectral_radius_estimate(&self) -> f64 {
        let mut p = self.u.clone();
        let mut log_scale = 0.0;
        for _ in 0..5 {
            p = p.matmul(&p).expect("square");
            let f = p.frobenius_norm();
            if f == 0.0 {
                return 0.0;
            }
            p = p.scale(1.0 / f);
            log_scale = 2.0 * log_scale + f.ln();
        }
        (log_scale / 32.0).exp()
    }

    pub fn step(&self, z: &[f64], h: &[f64]) -> Vec<f64> {
        affine(&self.w, z, &self.u, h, &self.b).into_iter().map(f64::tanh).collect()
    }

    fn check(&self, z: &Sequence, h0: &[f64]) -> Result<()> {
        if z.width() != self.input_dim() || h0.len() != self.state_dim() {
            return dim_err(format!(
                "expected inputs of width {} and a state of width {}, got {} and {}",
                self.input_dim(),
                self.state_dim(),
                z.width(),
                h0.len()
            ));
        }
        Ok(())
    }
}

/// Largest singular value by power iteration on `UᵀU`.
pub fn spectral_norm(u: &DenseMatrix) -> f64 {
    let n = u.cols();
    if n == 0 || u.max_abs() == 0.0 {
        return 0.0;
    }
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 / n as f64).collect();
    let mut sigma = 0.0;
    for _ in 0..500 {
        let w = u.matvec_transposed(&u.matvec(&v).expect("square")).expect("square");
        let nrm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm == 0.0 {
            return 0.0;
        }
        let next = nrm.sqrt();
        v = w.into_iter().map(|x| x / nrm).collect();
        if (next - sigma).abs() <= 1e-14 * next {
            return next;
        }
        sigma = next;
    }
    sigma
}

/// All summaries `h¹..h^T` of `h^t = tanh(Wz^t + Uh^{t−1} + b)`.
pub fn simple_rnn_forward(z: &Sequence, h0: &[f64], p: &SimpleRnnParams) -> Result<Sequence> {
    p.check(z, h0)?;
    let mut h = h0.to_vec();
    let mut out = Vec::with_capacity(z.len());
    for step in z.steps() {
        h = p.step(step, &h);
        out.push(h.clone());
    }
    Ok(Sequence { width: p.state_dim(), steps: out })
}

/// Result of iterating `h ↦ R(0, h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub state: Vec<f64>,
    /// `‖R(0, h_k) − h_k‖` after each iteration.
    pub residuals: Vec<f64>,
}

/// Initial state with `R(0, h0) = h0`, found by plain iteration from zero.
pub fn rnn_fixed_point(p: &SimpleRnnParams, tol: f64, max_iter: usize) -> Result<FixedPoint> {
    let zero = vec![0.0; p.input_dim()];
    let mut h = vec![0.0; p.state_dim()];
    let mut residuals = Vec::new();
    for _ in 0..=max_iter {
        let next = p.step(&zero, &h);
        let r = next.iter().zip(&h).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        residuals.push(r);
        if r <= tol {
            return Ok(FixedPoint { state: h, residuals });
        }
        h = next;
    }
    Err(Error::NoConvergence { iterations: max_iter, residual: *residuals.last().expect("at least one step") })
}

/// `t'` zero steps followed by `z`.
pub fn pad_left(z: &Sequence, t_prime: usize) -> Sequence {
    let mut steps = vec![vec![0.0; z.width()]; t_prime];
    steps.extend(z.steps.iter().cloned());
    Sequence { width: z.width, steps }
}

/// Candidate, input, forget and output blocks; each `W` is `m×k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub candidate: SimpleRnnParams,
    pub input: SimpleRnnParams,
    pub forget: SimpleRnnParams,
    pub output: SimpleRnnParams,
}

impl LstmParams {
    pub fn new(candidate: SimpleRnnParams, input: SimpleRnnParams, forget: SimpleRnnParams, output: SimpleRnnParams) -> Result<Self> {
        let shape = (candidate.input_dim(), candidate.state_dim());
        if [&input, &forget, &output].iter().any(|b| (b.input_dim(), b.state_dim()) != shape) {
            return dim_err("LSTM blocks disagree in shape");
        }
        Ok(Self { candidate, input, forget, output })
    }

    pub fn zeros(k: usize, m: usize) -> Self {
        let z = SimpleRnnParams::zeros(k, m);
        Self { candidate: z.clone(), input: z.clone(), forget: z.clone(), output: z }
    }

    pub fn random(k: usize, m: usize, rng: &mut Rng) -> Self {
        Self {
            candidate: SimpleRnnParams::random(k, m, rng),
            input: SimpleRnnParams::random(k, m, rng),
            forget: SimpleRnnParams::random(k, m, rng),
            output: SimpleRnnParams::random(k, m, rng),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.candidate.input_dim()
    }

    pub fn state_dim(&self) -> usize {
        self.candidate.state_dim()
    }
}

/// Per-step values of an LSTM run.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmTrace {
    pub summaries: Sequence,
    pub cells: Sequence,
    /// Smallest and largest gate value seen over all steps and gates.
    pub gate_range: (f64, f64),
}

pub fn lstm_forward(z: &Sequence, h0: &[f64], c0: &[f64], p: &LstmParams) -> Result<LstmTrace> {
    p.candidate.check(z, h0)?;
    if c0.len() != p.state_dim() {
        return dim_err(format!("cell state has width {}, expected {}", c0.len(), p.state_dim()));
    }
    let (mut h, mut c) = (h0.to_vec(), c0.to_vec());
    let (mut hs, mut cs) = (Vec::with_capacity(z.len()), Vec::with_capacity(z.len()));
    let mut range = (f64::INFINITY, f64::NEG_INFINITY);
    let gate = |b: &SimpleRnnParams, z: &[f64], h: &[f64]| -> Vec<f64> {
        affine(&b.w, z, &b.u, h, &b.b).into_iter().map(logistic).collect()
    };
    for step in z.steps() {
        let cand = p.candidate.step(step, &h);
        let i = gate(&p.input, step, &h);
        let f = gate(&p.forget, step, &h);
        let o = gate(&p.output, step, &h);
        for g in i.iter().chain(&f).chain(&o) {
            range = (range.0.min(*g), range.1.max(*g));
        }
        c = (0..c.len()).map(|j| i[j] * cand[j] + f[j] * c[j]).collect();
        h = (0..c.len()).map(|j| o[j] * c[j].tanh()).collect();
        hs.push(h.clone());
        cs.push(c.clone());
    }
    let width = p.state_dim();
    Ok(LstmTrace { summaries: Sequence { width, steps: hs }, cells: Sequence { width, steps: cs }, gate_range: range })
}

/// Inner update `R` plus the gate `Γ = logistic(W_Γ z + U_Γ h + b_Γ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GatedRnnParams {
    pub inner: SimpleRnnParams,
    pub gate: SimpleRnnParams,
}

impl GatedRnnParams {
    pub fn new(inner: SimpleRnnParams, gate: SimpleRnnParams) -> Result<Self> {
        if (inner.input_dim(), inner.state_dim()) != (gate.input_dim(), gate.state_dim()) {
            return dim_err("gate and inner update disagree in shape");
        }
        Ok(Self { inner, gate })
    }

    /// Gate with no input or state dependence: `Γ = logistic(bias)` in every component.
    pub fn with_constant_gate(inner: SimpleRnnParams, bias: f64) -> Self {
        let (k, m) = (inner.input_dim(), inner.state_dim());
        let gate = SimpleRnnParams { w: DenseMatrix::zeros(m, k), u: DenseMatrix::zeros(m, m), b: vec![bias; m] };
        Self { inner, gate }
    }
}

/// `h^t = Γ ⊙ R(z^t, h^{t−1}) + (1 − Γ) ⊙ h^{t−1}` with `Γ` evaluated at `(z^t, h^{t−1})`.
pub fn gated_rnn_forward(z: &Sequence, h0: &[f64], p: &GatedRnnParams) -> Result<Sequence> {
    p.inner.check(z, h0)?;
    let mut h = h0.to_vec();
    let mut out = Vec::with_capacity(z.len());
    for step in z.steps() {
        let r = p.inner.step(step, &h);
        let g: Vec<f64> = affine(&p.gate.w, step, &p.gate.u, &h, &p.gate.b).into_iter().map(logistic).collect();
        h = (0..h.len()).map(|j| g[j] * r[j] + (1.0 - g[j]) * h[j]).collect();
        out.push(h.clone());
    }
    Ok(Sequence { width: p.inner.state_dim(), steps: out })
}

/// Gate biases `b = −log(U(T_l, T_h) − 1)`, so that `logistic(b) = 1/T`.
pub fn chrono_init(t_low: f64, t_high: f64, m: usize, seed: u64) -> Result<Vec<f64>> {
    if !(t_low > 1.0) || !(t_high >= t_low) || !t_high.is_finite() {
        return arg_err(format!("need 1 < t_low ≤ t_high, got ({t_low}, {t_high})"));
    }
    let mut rng = crate::rng::stream(seed, "chrono_init");
    Ok((0..m).map(|_| -(rng.gen_range(t_low..=t_high) - 1.0).ln()).collect())
}

/// Place step `t` of `z` at output index `arrival[t]`, with zeros at the
/// indices nothing arrives at. Only dilations are allowed: arrivals must
/// strictly increase, so no input step is skipped.
pub fn time_warp_sequence(z: &Sequence, arrival: &[usize]) -> Result<Sequence> {
    if arrival.len() != z.len() {
        return dim_err(format!("{} arrival times for {} steps", arrival.len(), z.len()));
    }
    if let Some(t) = (1..arrival.len()).find(|&t| arrival[t] <= arrival[t - 1]) {
        return arg_err(format!("warp contracts time at step {t}: steps would be dropped"));
    }
    let len = arrival.last().map_or(0, |&a| a + 1);
    let mut out = Sequence::zeros(len, z.width());
    for (t, &a) in arrival.iter().enumerate() {
        out.steps[a].clone_from(&z.steps[t]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> Rng {
        crate::rng::seeded(seed)
    }

    #[test]
    fn zero_params_give_zero_summaries() {
        let z = Sequence::random(5, 3, 1.0, &mut rng(1));
        let h = simple_rnn_forward(&z, &[0.0; 4], &SimpleRnnParams::zeros(3, 4)).unwrap();
        assert!(h.steps().iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn single_step_and_markov_property() {
        let mut r = rng(2);
        let p = SimpleRnnParams::random(3, 4, &mut r);
        let z = Sequence::random(6, 3, 1.0, &mut r);
        let h0 = vec![0.1, -0.2, 0.3, 0.0];
        let h = simple_rnn_forward(&z, &h0, &p).unwrap();
        let one = simple_rnn_forward(&Sequence::new(3, vec![z.step(0).to_vec()]).unwrap(), &h0, &p).unwrap();
        let wz = p.w.matvec(z.step(0)).unwrap();
        let uh = p.u.matvec(&h0).unwrap();
        for j in 0..4 {
            assert_eq!(one.step(0)[j], (wz[j] + uh[j] + p.b[j]).tanh());
        }
        let rest = simple_rnn_forward(&z.drop_first(1), h.step(0), &p).unwrap();
        assert_eq!(rest, h.drop_first(1));
    }

    #[test]
    fn fixed_point_cases() {
        let mut r = rng(3);
        let mut p = SimpleRnnParams::random(2, 6, &mut r);
        let zero_bias = SimpleRnnParams { b: vec![0.0; 6], ..p.clone() };
        let fp = rnn_fixed_point(&zero_bias, 1e-12, 10).unwrap();
        assert_eq!(fp.state, vec![0.0; 6]);
        assert_eq!(fp.residuals.len(), 1);
        p = p.with_recurrent_norm(0.9);
        assert!((spectral_norm(&p.u) - 0.9).abs() < 1e-10);
        assert!(p.spectral_radius_estimate() <= 0.9 + 1e-9);
        let fp = rnn_fixed_point(&p, 1e-12, 1000).unwrap();
        let again = p.step(&[0.0; 2], &fp.state);
        let res = again.iter().zip(&fp.state).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(res <= 1e-12);
    }

    #[test]
    fn padded_shift_equivariance() {
        let mut r = rng(4);
        let p = SimpleRnnParams::random(3, 5, &mut r).with_recurrent_norm(0.8);
        let h0 = rnn_fixed_point(&p, 1e-14, 10_000).unwrap().state;
        let z = Sequence::random(12, 3, 1.0, &mut r);
        for s in 1..=3 {
            let padded = pad_left(&z, 3);
            let h = simple_rnn_forward(&padded, &h0, &p).unwrap();
            let h_shift = simple_rnn_forward(&padded.drop_first(s), &h0, &p).unwrap();
            assert!(h_shift.max_abs_diff(&h.drop_first(s)).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn padding() {
        let z = Sequence::new(1, vec![vec![7.0]]).unwrap();
        assert_eq!(pad_left(&z, 0), z);
        assert_eq!(pad_left(&z, 2).steps(), &[vec![0.0], vec![0.0], vec![7.0]]);
        let y = Sequence::random(4, 2, 1.0, &mut rng(5));
        assert_eq!(pad_left(&y, 3).drop_first(3), y);
    }

    #[test]
    fn lstm_zero_weights_closed_form() {
        let c0 = vec![0.8, -0.4];
        let z = Sequence::random(5, 3, 1.0, &mut rng(6));
        let tr = lstm_forward(&z, &[0.3, 0.1], &c0, &LstmParams::zeros(3, 2)).unwrap();
        for t in 0..5 {
            for j in 0..2 {
                let c = 0.5f64.powi(t as i32 + 1) * c0[j];
                assert!((tr.cells.step(t)[j] - c).abs() < 1e-15);
                assert!((tr.summaries.step(t)[j] - 0.5 * c.tanh()).abs() < 1e-15);
            }
        }
        assert_eq!(tr.gate_range, (0.5, 0.5));
    }

    #[test]
    fn lstm_perfect_memory() {
        let mut r = rng(7);
        let mut p = LstmParams::random(2, 3, &mut r);
        p.forget.b = vec![20.0; 3];
        p.input.b = vec![-20.0; 3];
        let c0 = vec![0.5, -1.0, 2.0];
        let z = Sequence::random(100, 2, 0.5, &mut r);
        let tr = lstm_forward(&z, &[0.0; 3], &c0, &p).unwrap();
        let last = tr.cells.last().unwrap();
        for j in 0..3 {
            assert!((last[j] - c0[j]).abs() < 1e-6);
        }
    }

    #[test]
    fn lstm_single_step_oracle() {
        let mut r = rng(8);
        let p = LstmParams::random(2, 2, &mut r);
        let z = Sequence::new(2, vec![vec![0.4, -0.9]]).unwrap();
        let (h0, c0) = ([0.2, -0.1], [0.5, 0.3]);
        let tr = lstm_forward(&z, &h0, &c0, &p).unwrap();
        let lin = |b: &SimpleRnnParams, j: usize| {
            b.w[(j, 0)] * 0.4 + b.w[(j, 1)] * -0.9 + b.u[(j, 0)] * h0[0] + b.u[(j, 1)] * h0[1] + b.b[j]
        };
        let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
        for j in 0..2 {
            let c = sig(lin(&p.input, j)) * lin(&p.candidate, j).tanh() + sig(lin(&p.forget, j)) * c0[j];
            let h = sig(lin(&p.output, j)) * c.tanh();
            assert!((tr.cells.step(0)[j] - c).abs() < 1e-14);
            assert!((tr.summaries.step(0)[j] - h).abs() < 1e-14);
        }
    }

    #[test]
    fn gates_stay_open_interval_for_large_inputs() {
        let mut r = rng(9);
        let p = LstmParams::random(3, 4, &mut r);
        let z = Sequence::random(30, 3, 1e3, &mut r);
        let tr = lstm_forward(&z, &[0.0; 4], &[0.0; 4], &p).unwrap();
        assert!(tr.gate_range.0 > 0.0 && tr.gate_range.1 < 1.0);
        assert!(tr.summaries.steps().iter().flatten().all(|v| v.is_finite()));
        assert!(logistic(1e3) < 1.0 && logistic(-1e3) > 0.0);
    }

    #[test]
    fn gated_limits() {
        let mut r = rng(10);
        let inner = SimpleRnnParams::random(2, 4, &mut r);
        let z = Sequence::random(15, 2, 1.0, &mut r);
        let h0 = vec![0.2, 0.1, -0.3, 0.4];
        let open = gated_rnn_forward(&z, &h0, &GatedRnnParams::with_constant_gate(inner.clone(), 40.0)).unwrap();
        assert!(open.max_abs_diff(&simple_rnn_forward(&z, &h0, &inner).unwrap()).unwrap() < 1e-10);
        let shut = gated_rnn_forward(&z, &h0, &GatedRnnParams::with_constant_gate(inner, -40.0)).unwrap();
        assert!(shut.steps().iter().all(|h| h.iter().zip(&h0).all(|(a, b)| (a - b).abs() < 1e-10)));
    }

    #[test]
    fn chrono_values() {
        for &t in &[2.0, 10.0] {
            for b in chrono_init(t, t, 5, 1).unwrap() {
                let g = logistic(b);
                assert!((g - 1.0 / t).abs() <= 4.0 * f64::EPSILON / t);
            }
        }
        assert_eq!(chrono_init(2.0, 2.0, 3, 1).unwrap(), vec![0.0; 3]);
        let gates: Vec<f64> = chrono_init(5.0, 50.0, 1000, 11).unwrap().into_iter().map(logistic).collect();
        assert!(gates.iter().all(|&g| (0.02..=0.2).contains(&g)));
        let mean = gates.iter().sum::<f64>() / gates.len() as f64;
        assert!((0.02..=0.2).contains(&mean));
        assert!(chrono_init(1.0, 3.0, 2, 1).is_err());
        assert!(chrono_init(4.0, 3.0, 2, 1).is_err());
    }

    #[test]
    fn warping() {
        let z = Sequence::random(4, 2, 1.0, &mut rng(12));
        assert_eq!(time_warp_sequence(&z, &[0, 1, 2, 3]).unwrap(), z);
        let d = time_warp_sequence(&z, &[0, 2, 4, 6]).unwrap();
        assert_eq!(d.len(), 7);
        for t in 0..7 {
            if t % 2 == 0 {
                assert_eq!(d.step(t), z.step(t / 2));
            } else {
                assert_eq!(d.step(t), &[0.0, 0.0]);
            }
        }
        assert!(time_warp_sequence(&z, &[0, 0, 1, 1]).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let z = Sequence::random(5, 3, 1.0, &mut rng(13));
        assert_eq!(Sequence::from_csv(&z.to_csv()).unwrap(), z);
        assert!(matches!(Sequence::from_csv("1,2\n3\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn scaled_recurrence_fails_to_converge() {
        let p = SimpleRnnParams::random(2, 8, &mut rng(100)).with_recurrent_norm(0.9);
        assert!(rnn_fixed_point(&p, 1e-12, 1000).is_ok());
        let err = rnn_fixed_point(&p.with_recurrent_scaled(50.0), 1e-12, 1000).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { iterations: 1000, .. }));
    }

    #[test]
    fn dilation_rescales_the_gate() {
        // Scalar gate 0.1 on the original clock, 0.05 on the doubled one.
        for s in 0..10 {
            let mut r = rng(200 + s);
            let inner = SimpleRnnParams::random(4, 4, &mut r);
            let z = Sequence::random(20, 4, 0.1, &mut r);
            let h0 = vec![0.0; 4];
            let base = gated_rnn_forward(&z, &h0, &GatedRnnParams::with_constant_gate(inner.clone(), -(9.0f64).ln())).unwrap();
            let arrival: Vec<usize> = (0..20).map(|t| 2 * t).collect();
            let zd = time_warp_sequence(&z, &arrival).unwrap();
            let dil = gated_rnn_forward(&zd, &h0, &GatedRnnParams::with_constant_gate(inner, -(19.0f64).ln())).unwrap();
            let d = base.last().unwrap().iter().zip(dil.last().unwrap()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            assert!(d <= 5e-2, "seed {s}: {d}");
        }
    }
}
