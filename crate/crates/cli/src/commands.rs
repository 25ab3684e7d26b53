use std::f64::consts::TAU;
use std::path::Path;

use gdlkit::geo::{
    e3_transform, egnn_layer, enclosed_angle_defect, gauge_conv, gauge_transform, holonomy, kernel_constraint_basis,
    one_ring_log_map, random_orthogonal, tangent_frames, transport_angles, wrap_pi, EgnnParams, FeatureType, GaugeKernel,
    GeometricGraph,
};
use gdlkit::graph::{gnn_forward, permute_graph, Flavour, GnnParams, Graph, Permutation};
use gdlkit::grid::{autocorrelation, gabor_signal, modulus_instability_ratio, registration_invariant, shift, CirculantFilter, GridSignal};
use gdlkit::groups::{
    cube_rotation_action, cyclic_action, dihedral3_action, revcomp_product_action, verify_group_axioms, FiniteGroup,
};
use gdlkit::mesh::{cotan_laplacian, icosphere, TriMesh};
use gdlkit::numkit::DenseMatrix;
use gdlkit::seq::{chrono_init, logistic, pad_left, rnn_fixed_point, simple_rnn_forward, Sequence, SimpleRnnParams};
use gdlkit::spectral::{perturbation_stability_experiment, SpectralBasis, StabilityKind};
use gdlkit::{rng, Error, Result};
use rand::Rng as _;
use rayon::prelude::*;
use serde_json::json;

use crate::report::Report;

/// Run `f(trial)` for every trial, optionally in parallel; results keep trial order.
fn trials<T: Send>(count: usize, parallel: bool, f: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    if parallel {
        (0..count as u64).into_par_iter().map(&f).collect()
    } else {
        (0..count as u64).map(f).collect()
    }
}

/// A mesh file, or a built-in `icosphere:K`.
pub fn load_mesh(spec: &str) -> Result<TriMesh> {
    match spec.strip_prefix("icosphere:") {
        Some(k) => icosphere(k.parse().map_err(|_| Error::InvalidArgument(format!("bad subdivision level {k:?}")))?),
        None => TriMesh::load(Path::new(spec)),
    }
}

pub fn fourier_instability(n: usize, k0: usize, sigma: f64, s: f64, seed: u64) -> Result<Report> {
    let mut r = Report::new("fourier-instability", seed);
    r.param("n", n).param("k0", k0).param("sigma", sigma).param("s", s);
    let ratio = modulus_instability_ratio(n, k0, sigma, s)?;
    r.metric("ratio", ratio).verdict("ratio_at_least_one", ratio >= 1.0);

    // Shift invariance of the registration and autocorrelation of the real part.
    let x = GridSignal::from_values(gabor_signal(n, k0, sigma)?.channel(0))?;
    let h = CirculantFilter::padded(&[0.25, 0.5, 0.25], n)?;
    let (reg, auto) = (registration_invariant(&x, &h)?, autocorrelation(&x)?);
    let mut g = rng::stream(seed, "cli_fourier_shifts");
    let (mut reg_ok, mut auto_ok) = (true, true);
    for _ in 0..4 {
        let v = g.gen_range(1..n as i64);
        let xs = shift(&x, v);
        reg_ok &= registration_invariant(&xs, &h)? == reg;
        auto_ok &= autocorrelation(&xs)? == auto;
    }
    r.verdict("registration_shift_invariant", reg_ok).verdict("autocorrelation_shift_invariant", auto_ok);
    Ok(r)
}

pub fn group_table(name: &str, n: usize, seed: u64) -> Result<Report> {
    let mut r = Report::new("group table", seed);
    r.param("name", name);
    let group: FiniteGroup = match name {
        "Zn" => {
            r.param("n", n);
            cyclic_action(n)?.0
        }
        "D3" => dihedral3_action().0,
        "Oh" => cube_rotation_action().0,
        "revcomp" => {
            r.param("n", n);
            revcomp_product_action(n)?.0
        }
        other => return Err(Error::InvalidArgument(format!("unknown group {other:?} (expected Zn, D3, Oh or revcomp)"))),
    };
    let axioms = verify_group_axioms(&group);
    r.metric("order", group.order() as f64);
    r.verdict("closure", axioms.closure.passed)
        .verdict("associativity", axioms.associativity.passed)
        .verdict("identity", axioms.identity.passed)
        .verdict("inverse", axioms.inverse.passed);
    r.data = Some(json!({ "order": group.order(), "table": group.table() }));
    Ok(r)
}

pub fn gnn_equivariance(flavour: &str, n: usize, d: usize, count: usize, parallel: bool, seed: u64) -> Result<Report> {
    let mut r = Report::new("gnn equivariance", seed);
    r.param("flavour", flavour).param("n", n).param("d", d).param("trials", count);
    let flavours: Vec<Flavour> = if flavour == "all" { Flavour::ALL.to_vec() } else { vec![flavour.parse()?] };
    for fl in flavours {
        let errors = trials(count, parallel, |t| {
            let mut g = rng::trial_stream(seed, &format!("cli_gnn_{}", fl.name()), t);
            let graph = Graph::random(n, d, 0.3, &mut g);
            let params = GnnParams::random(fl, d, 8, 4, &mut g)?;
            let p = Permutation::random(n, &mut g);
            let moved = p.apply_rows(&gnn_forward(&graph, fl, &params)?)?;
            let direct = gnn_forward(&permute_graph(&graph, &p)?, fl, &params)?;
            Ok(moved.sub(&direct)?.max_abs())
        })?;
        let worst = errors.into_iter().fold(0.0, f64::max);
        r.metric(&format!("{}_max_error", fl.name()), worst).verdict(&format!("{}_equivariant", fl.name()), worst <= 1e-11);
    }
    Ok(r)
}

pub fn mesh_spectrum(mesh: &str, k: usize, seed: u64) -> Result<Report> {
    let mut r = Report::new("mesh spectrum", seed);
    r.param("mesh", mesh).param("k", k);
    let m = load_mesh(mesh)?;
    let pair = cotan_laplacian(&m)?;
    let basis = SpectralBasis::compute(&pair, k.min(m.n_vertices()))?;
    let width = basis.k().to_string().len();
    for (j, v) in basis.values().iter().enumerate() {
        r.metric(&format!("eigenvalue_{j:0width$}"), *v);
    }
    let ortho = basis.orthonormality_error();
    let constant = pair.apply_stiffness(&vec![1.0; m.n_vertices()])?;
    r.metric("orthonormality_error", ortho).metric("vertices", m.n_vertices() as f64);
    r.verdict("smallest_eigenvalue_nonnegative", basis.values()[0] >= -1e-9)
        .verdict("mass_orthonormal", ortho <= 1e-8)
        .verdict("constants_in_kernel", constant.iter().all(|&v| v == 0.0));
    r.data = Some(json!({ "eigenvalues": basis.values() }));
    Ok(r)
}

pub fn mesh_stability(mesh: &str, epsilon: f64, kind: &str, degree: usize, seed: u64) -> Result<(Report, u64)> {
    let mut r = Report::new("mesh stability", seed);
    r.param("mesh", mesh).param("epsilon", epsilon).param("kind", kind).param("degree", degree);
    let m = load_mesh(mesh)?;
    let rec = perturbation_stability_experiment(&m, mesh, epsilon, StabilityKind::parse(kind, degree)?, seed)?;
    r.metric("discrepancy", rec.discrepancy).verdict("discrepancy_finite", rec.discrepancy.is_finite());
    Ok((r, rec.runtime_ms))
}

pub fn egnn_equivariance(n: usize, d: usize, count: usize, parallel: bool, seed: u64) -> Result<Report> {
    let mut r = Report::new("egnn equivariance", seed);
    r.param("n", n).param("d", d).param("trials", count);
    let errors = trials(count, parallel, |t| {
        let mut g = rng::trial_stream(seed, "cli_egnn", t);
        let graph = GeometricGraph::random(n, d, 0.4, &mut g);
        let params = EgnnParams::random(d, 8, d, &mut g)?;
        let rot = random_orthogonal(&mut g, t % 2 == 1);
        let shift = [g.gen_range(-2.0..2.0), g.gen_range(-2.0..2.0), g.gen_range(-2.0..2.0)];
        let (f, x) = egnn_layer(&graph, &params)?;
        let (f2, x2) = egnn_layer(&e3_transform(&graph, &rot, shift)?, &params)?;
        let mut pos_err: f64 = 0.0;
        for (p, q) in x.iter().zip(&x2) {
            for i in 0..3 {
                let want = rot[i][0] * p[0] + rot[i][1] * p[1] + rot[i][2] * p[2] + shift[i];
                pos_err = pos_err.max((want - q[i]).abs());
            }
        }
        let feat_err = f.sub(&f2)?.max_abs();
        let perm = Permutation::random(n, &mut g);
        let (f3, x3) = egnn_layer(&graph.permuted(perm.image())?, &params)?;
        let mut perm_err = perm.apply_rows(&f)?.sub(&f3)?.max_abs();
        for (u, &v) in perm.image().iter().enumerate() {
            for i in 0..3 {
                perm_err = perm_err.max((x[u][i] - x3[v][i]).abs());
            }
        }
        Ok((pos_err, feat_err, perm_err))
    })?;
    let worst = |sel: fn(&(f64, f64, f64)) -> f64| errors.iter().map(sel).fold(0.0, f64::max);
    let (pos, feat, perm) = (worst(|e| e.0), worst(|e| e.1), worst(|e| e.2));
    r.metric("position_error", pos).metric("feature_error", feat).metric("permutation_error", perm);
    r.verdict("e3_equivariant", pos <= 1e-10 && feat <= 1e-10).verdict("permutation_equivariant", perm <= 1e-11);
    Ok(r)
}

pub fn gauge_equivariance(mesh: &str, orders: &str, bins: usize, seed: u64) -> Result<Report> {
    let mut r = Report::new("gauge equivariance", seed);
    r.param("mesh", mesh).param("orders", orders).param("bins", bins);
    let ft: FeatureType = orders.parse()?;
    let m = load_mesh(mesh)?;
    let frames = tangent_frames(&m)?;
    let conn = transport_angles(&one_ring_log_map(&m, &frames)?)?;
    let basis = kernel_constraint_basis(&ft, &ft, bins)?;
    r.metric("basis_dimension", basis.len() as f64);
    let mut g = rng::stream(seed, "cli_gauge");
    let n = m.n_vertices();
    if !basis.is_empty() {
        let coeffs: Vec<f64> = basis.iter().map(|_| g.gen_range(-1.0..1.0)).collect();
        let kernel = GaugeKernel::combine(&basis, &coeffs)?;
        let x = DenseMatrix::from_fn(n, ft.dim(), |_, _| g.gen_range(-1.0..1.0));
        let angles: Vec<f64> = (0..n).map(|_| TAU * g.gen_range(0..bins) as f64 / bins as f64).collect();
        let h = gauge_conv(&conn, &kernel, &x)?;
        let (_, conn2, x2) = gauge_transform(&frames, &conn, &x, &ft, &angles)?;
        let h2 = gauge_conv(&conn2, &kernel, &x2)?;
        let mut err: f64 = 0.0;
        for u in 0..n {
            let want = ft.rho(-angles[u]).matvec(h.row(u))?;
            err = err.max(want.iter().zip(h2.row(u)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
        let residual = basis.iter().map(GaugeKernel::constraint_residual).fold(0.0, f64::max);
        r.metric("equivariance_error", err).metric("constraint_residual", residual);
        r.verdict("gauge_equivariant", err <= 1e-8).verdict("basis_sound", residual <= 1e-8);
    }
    let mut hol: f64 = 0.0;
    for u in (0..n).filter(|&u| !conn.is_boundary(u)) {
        hol = hol.max(wrap_pi(holonomy(&conn, u)? - enclosed_angle_defect(&m, &conn, u)).abs());
    }
    let anti = conn.antisymmetry_error()?;
    r.metric("holonomy_error", hol).metric("antisymmetry_error", anti);
    r.verdict("holonomy_matches_defect", hol <= 1e-8).verdict("transport_antisymmetric", anti <= 1e-12);
    Ok(r)
}

pub fn rnn_shift_equivariance(steps: usize, m: usize, k: usize, seed: u64) -> Result<Report> {
    let mut r = Report::new("rnn shift-equivariance", seed);
    r.param("T", steps).param("m", m).param("k", k);
    let mut g = rng::stream(seed, "cli_rnn");
    let p = SimpleRnnParams::random(k, m, &mut g).with_recurrent_norm(0.8);
    let fp = rnn_fixed_point(&p, 1e-14, 10_000)?;
    let z = Sequence::random(steps, k, 1.0, &mut g);
    let padded = pad_left(&z, 3);
    let h = simple_rnn_forward(&padded, &fp.state, &p)?;
    let mut err: f64 = 0.0;
    for s in 1..=3 {
        let hs = simple_rnn_forward(&padded.drop_first(s), &fp.state, &p)?;
        err = err.max(hs.max_abs_diff(&h.drop_first(s))?);
    }
    let residual = *fp.residuals.last().expect("at least one iteration");
    r.metric("shift_error", err).metric("fixed_point_residual", residual).metric("fixed_point_iterations", fp.residuals.len() as f64);
    r.verdict("shift_equivariant", err <= 1e-10).verdict("fixed_point", residual <= 1e-12);
    Ok(r)
}

pub fn lstm_chrono(t_low: f64, t_high: f64, m: usize, seed: u64) -> Result<Report> {
    let mut r = Report::new("lstm chrono", seed);
    r.param("tlow", t_low).param("thigh", t_high).param("m", m);
    let gates: Vec<f64> = chrono_init(t_low, t_high, m, seed)?.into_iter().map(logistic).collect();
    let min = gates.iter().copied().fold(f64::INFINITY, f64::min);
    let max = gates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = gates.iter().sum::<f64>() / gates.len().max(1) as f64;
    let (lo, hi) = (1.0 / t_high, 1.0 / t_low);
    // A few ulps of slack at each end: logistic(−log(T − 1)) rounds around 1/T.
    let inside = |v: f64| v >= lo * (1.0 - 4.0 * f64::EPSILON) && v <= hi * (1.0 + 4.0 * f64::EPSILON);
    r.metric("gate_min", min).metric("gate_max", max).metric("gate_mean", mean);
    r.verdict("gates_within_horizons", gates.iter().all(|&v| inside(v))).verdict("mean_within_horizons", inside(mean));
    Ok(r)
}
