use gdlkit::mesh::{cotan_laplacian, icosphere, jitter_mesh};
use gdlkit::numkit::{sym_eig, Complex64, DenseMatrix, DEFAULT_TOL};
use gdlkit::rng::seeded;
use gdlkit::spectral::{
    apply_cayley_filter, apply_poly_filter, apply_transfer_direct, cayley_transfer, fmap_conjugate_operator,
    poly_transfer, truncated_reconstruction, CayleyFilter, FunctionalMap, PolyFilter, SpectralBasis, StabilityKind,
    StabilitySetup,
};
use proptest::prelude::*;
use rand::Rng;

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn path_filters_match_spectral_transfer(eps in 0.0f64..0.02, r in 0usize..=6, seed in any::<u64>()) {
        let m = jitter_mesh(&icosphere(1).unwrap(), eps, seed).unwrap();
        let pair = cotan_laplacian(&m).unwrap();
        let basis = SpectralBasis::compute(&pair, pair.n()).unwrap();
        let lmax = *basis.values().last().unwrap();
        let mut rng = seeded(seed);
        let x: Vec<f64> = (0..pair.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let poly = PolyFilter::new((0..=r).map(|l| rng.gen_range(-1.0..1.0) / lmax.powi(l as i32)).collect()).unwrap();
        let direct = apply_transfer_direct(&basis, |l| poly_transfer(&poly, l), &x).unwrap();
        prop_assert!(max_diff(&apply_poly_filter(&pair, &poly, &x).unwrap(), &direct) <= 1e-7);
        let cayley = CayleyFilter::new(
            (0..=r.min(3)).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
        ).unwrap();
        let direct = apply_transfer_direct(&basis, |l| cayley_transfer(&cayley, l), &x).unwrap();
        prop_assert!(max_diff(&apply_cayley_filter(&pair, &cayley, &x).unwrap(), &direct) <= 1e-6);
    }

    #[test]
    fn truncation_error_is_bounded(eps in 0.0f64..0.02, n_keep in 0usize..40, seed in any::<u64>()) {
        let m = jitter_mesh(&icosphere(1).unwrap(), eps, seed).unwrap();
        let pair = cotan_laplacian(&m).unwrap();
        let basis = SpectralBasis::compute(&pair, 42).unwrap();
        let mut rng = seeded(seed);
        for _ in 0..10 {
            let x: Vec<f64> = (0..42).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let t = truncated_reconstruction(&basis, pair.stiffness(), &x, n_keep).unwrap();
            prop_assert!(t.error <= t.bound * (1.0 + 1e-6));
        }
    }

    #[test]
    fn conjugation_preserves_spectrum(k in 1usize..=16, seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let sym = |rng: &mut gdlkit::rng::Rng| {
            let mut a = DenseMatrix::zeros(k, k);
            for i in 0..k {
                for j in i..k {
                    let v = rng.gen_range(-1.0..1.0);
                    a[(i, j)] = v;
                    a[(j, i)] = v;
                }
            }
            a
        };
        let q = sym(&mut rng);
        // Eigenvectors of an unrelated symmetric matrix give an orthogonal C.
        let c = FunctionalMap::new(sym_eig(&sym(&mut rng), DEFAULT_TOL).unwrap().vectors);
        prop_assert!(c.orthogonality_error() <= 1e-10);
        let conj = fmap_conjugate_operator(&c, &q).unwrap();
        let conj = conj.add(&conj.transpose()).unwrap().scale(0.5);
        let (a, b) = (sym_eig(&q, DEFAULT_TOL).unwrap().values, sym_eig(&conj, DEFAULT_TOL).unwrap().values);
        prop_assert!(max_diff(&a, &b) <= 1e-9);
        let trace = |m: &DenseMatrix| (0..k).map(|i| m[(i, i)]).sum::<f64>();
        prop_assert!((trace(&q) - trace(&conj)).abs() <= 1e-9);
    }
}

#[test]
fn polynomial_discrepancy_grows_linearly() {
    let setup = StabilitySetup::new(&icosphere(3).unwrap(), 64, 42).unwrap();
    let eps = [0.002, 0.005, 0.01];
    let d: Vec<f64> = eps.iter().map(|&e| setup.run(e, StabilityKind::Poly(6)).unwrap()).collect();
    // Least-squares slope through the origin.
    let c = d.iter().zip(&eps).map(|(d, e)| d * e).sum::<f64>() / eps.iter().map(|e| e * e).sum::<f64>();
    for (d, e) in d.iter().zip(&eps) {
        assert!(*d <= 1.5 * c * e, "d({e}) = {d}, fitted slope {c}");
    }
    assert!(setup.run(0.0, StabilityKind::Poly(6)).unwrap() == 0.0);
}
