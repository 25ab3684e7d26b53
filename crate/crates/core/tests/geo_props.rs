use std::f64::consts::TAU;

use gdlkit::geo::{
    e3_transform, egnn_layer, gauge_conv, gauge_transform, holonomy, kernel_constraint_basis, one_ring_log_map,
    random_orthogonal, tangent_frames, transport_angles, wrap_pi, EgnnParams, FeatureType, GaugeKernel, GeometricGraph,
};
use gdlkit::graph::Permutation;
use gdlkit::mesh::{icosphere, jitter_mesh, TriMesh};
use gdlkit::numkit::DenseMatrix;
use gdlkit::rng::seeded;
use proptest::prelude::*;
use rand::Rng;

fn feature_type() -> impl Strategy<Value = FeatureType> {
    prop::collection::vec(0u32..=3, 1..=3).prop_map(FeatureType::new)
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Each star face's corners contribute their share of their vertex's defect.
fn enclosed_defect(m: &TriMesh, u: usize) -> f64 {
    let p = m.vertices();
    let angle = |f: &[usize; 3], c: usize| {
        let o = p[f[c]];
        let a = [0, 1, 2].map(|i| p[f[(c + 1) % 3]][i] - o[i]);
        let b = [0, 1, 2].map(|i| p[f[(c + 2) % 3]][i] - o[i]);
        let n = cross(a, b);
        (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt().atan2(a[0] * b[0] + a[1] * b[1] + a[2] * b[2])
    };
    let mut total = vec![0.0; m.n_vertices()];
    for f in m.faces() {
        for c in 0..3 {
            total[f[c]] += angle(f, c);
        }
    }
    m.faces()
        .iter()
        .filter(|f| f.contains(&u))
        .map(|f| (0..3).map(|c| angle(f, c) * (TAU - total[f[c]]) / total[f[c]]).sum::<f64>())
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn egnn_is_e3_and_permutation_equivariant(n in 1usize..=12, d in 1usize..=4, reflect in any::<bool>(), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let g = GeometricGraph::random(n, d, 0.5, &mut rng);
        let p = EgnnParams::random(d, 6, 3, &mut rng).unwrap();
        let (f, x) = egnn_layer(&g, &p).unwrap();
        let r = random_orthogonal(&mut rng, reflect);
        let t = [0; 3].map(|_| rng.gen_range(-3.0..3.0));
        let (f2, x2) = egnn_layer(&e3_transform(&g, &r, t).unwrap(), &p).unwrap();
        prop_assert!(f2.sub(&f).unwrap().max_abs() <= 1e-10);
        for (a, b) in x.iter().zip(&x2) {
            for i in 0..3 {
                prop_assert!((r[i][0] * a[0] + r[i][1] * a[1] + r[i][2] * a[2] + t[i] - b[i]).abs() <= 1e-10);
            }
        }
        let perm = Permutation::random(n, &mut rng);
        let (f3, x3) = egnn_layer(&g.permuted(perm.image()).unwrap(), &p).unwrap();
        prop_assert!(f3.sub(&perm.apply_rows(&f).unwrap()).unwrap().max_abs() <= 1e-11);
        for (u, &v) in perm.image().iter().enumerate() {
            prop_assert!((0..3).all(|i| (x[u][i] - x3[v][i]).abs() <= 1e-11));
        }
    }

    #[test]
    fn gauge_conv_commutes_with_frame_rotations(
        rin in feature_type(), rout in feature_type(), bins in prop::sample::select(vec![4usize, 8, 16]), seed in any::<u64>(),
    ) {
        let m = jitter_mesh(&icosphere(1).unwrap(), 0.01, seed).unwrap();
        let frames = tangent_frames(&m).unwrap();
        let conn = transport_angles(&one_ring_log_map(&m, &frames).unwrap()).unwrap();
        let basis = kernel_constraint_basis(&rin, &rout, bins).unwrap();
        let mut rng = seeded(seed);
        let kernel = GaugeKernel::combine(&basis, &basis.iter().map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>()).unwrap();
        let n = m.n_vertices();
        let x = DenseMatrix::from_fn(n, rin.dim(), |_, _| rng.gen_range(-1.0..1.0));
        let angles: Vec<f64> = (0..n).map(|_| TAU * rng.gen_range(0..bins) as f64 / bins as f64).collect();
        let h = gauge_conv(&conn, &kernel, &x).unwrap();
        let (_, conn2, x2) = gauge_transform(&frames, &conn, &x, &rin, &angles).unwrap();
        let h2 = gauge_conv(&conn2, &kernel, &x2).unwrap();
        for u in 0..n {
            let want = rout.rho(-angles[u]).matvec(h.row(u)).unwrap();
            for (a, b) in want.iter().zip(h2.row(u)) {
                prop_assert!((a - b).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn constraint_basis_is_sound(rin in feature_type(), rout in feature_type(), bins in 1usize..=8) {
        let basis = kernel_constraint_basis(&rin, &rout, bins).unwrap();
        for k in &basis {
            prop_assert!(k.constraint_residual() <= 1e-8);
        }
        // Orthonormal in the flattened parameter space.
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let ip: f64 = a.to_vector().iter().zip(b.to_vector()).map(|(x, y)| x * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((ip - want).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn connection_geometry(level in 0usize..=2, eps in 0.0f64..0.02, seed in any::<u64>()) {
        let m = jitter_mesh(&icosphere(level).unwrap(), eps, seed).unwrap();
        let frames = tangent_frames(&m).unwrap();
        prop_assert!(frames.orthonormality_error() <= 1e-10);
        for u in 0..m.n_vertices() {
            let c = cross(frames.e1(u), frames.e2(u));
            prop_assert!((0..3).all(|i| (c[i] - frames.normal(u)[i]).abs() <= 1e-10));
        }
        let conn = transport_angles(&one_ring_log_map(&m, &frames).unwrap()).unwrap();
        prop_assert!(conn.antisymmetry_error().unwrap() <= 1e-12);
        for u in 0..m.n_vertices() {
            for &v in conn.neighbours(u) {
                prop_assert_eq!(conn.radius(u, v).unwrap(), conn.radius(v, u).unwrap());
            }
            let hol = holonomy(&conn, u).unwrap();
            prop_assert!(wrap_pi(hol - enclosed_defect(&m, u)).abs() <= 1e-8);
        }
    }
}
