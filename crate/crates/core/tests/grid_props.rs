use gdlkit::grid::{
    autocorrelation, circulant_apply, dft, dft_direct, fft_radix2, fourier_modulus, modulus_instability_ratio,
    registration_invariant, shift, CirculantFilter, GridSignal,
};
use gdlkit::numkit::Complex64;
use gdlkit::rng::seeded;
use proptest::prelude::*;
use rand::Rng;
use std::f64::consts::TAU;

fn signal(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn bits(x: &GridSignal) -> Vec<u64> {
    x.as_slice().iter().map(|v| v.to_bits()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn circulant_filters_commute(n in 1usize..=64, seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let x = GridSignal::from_values(signal(n, &mut rng)).unwrap();
        let th = CirculantFilter::new(signal(n, &mut rng)).unwrap();
        let eta = CirculantFilter::new(signal(n, &mut rng)).unwrap();
        let a = circulant_apply(&th, &circulant_apply(&eta, &x).unwrap()).unwrap();
        let b = circulant_apply(&eta, &circulant_apply(&th, &x).unwrap()).unwrap();
        for (p, q) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert!((p - q).abs() <= 1e-10);
        }
    }

    #[test]
    fn shift_equivariance_is_exact(n in 1usize..=48, v in -100i64..100, seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let x = GridSignal::from_values(signal(n, &mut rng)).unwrap();
        let th = CirculantFilter::new(signal(n, &mut rng)).unwrap();
        let lhs = circulant_apply(&th, &shift(&x, v)).unwrap();
        let rhs = shift(&circulant_apply(&th, &x).unwrap(), v);
        prop_assert_eq!(bits(&lhs), bits(&rhs));
    }

    #[test]
    fn shift_is_diagonal_in_fourier_basis(n in 1usize..=40, k in 0usize..40) {
        let k = k % n;
        // Basis vector k in the frequency domain, taken back to signal space.
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[k] = Complex64::new(1.0, 0.0);
        let phi = dft_direct(&e, true);
        let shifted: Vec<Complex64> = (0..n).map(|u| phi[(u + n - 1) % n]).collect();
        let expect = Complex64::from_polar(1.0, -TAU * k as f64 / n as f64);
        for u in 0..n {
            prop_assert!((shifted[u] - expect * phi[u]).norm() <= 1e-12);
        }
    }

    #[test]
    fn fast_and_direct_dft_agree(p in 0u32..=9, inverse in any::<bool>(), seed in any::<u64>()) {
        let n = 1usize << p;
        let mut rng = seeded(seed);
        let x: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let a = fft_radix2(&x, inverse).unwrap();
        let b = dft_direct(&x, inverse);
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p - q).norm() <= 1e-11);
        }
    }

    #[test]
    fn dft_round_trip(n in 1usize..=70, seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let x = signal(n, &mut rng);
        let f = dft(&GridSignal::from_values(x.clone()).unwrap(), false).unwrap();
        let back = dft_direct(&f, true);
        for (a, b) in back.iter().zip(&x) {
            prop_assert!((a.re - b).abs() <= 1e-12 && a.im.abs() <= 1e-12);
        }
    }

    #[test]
    fn invariant_representations_are_bit_identical_under_shifts(n in 2usize..=64, v in -70i64..70, seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let x = GridSignal::from_values(signal(n, &mut rng)).unwrap();
        let h = CirculantFilter::padded(&signal(3.min(n), &mut rng), n).unwrap();
        let xs = shift(&x, v);
        prop_assert_eq!(bits(&registration_invariant(&x, &h).unwrap()), bits(&registration_invariant(&xs, &h).unwrap()));
        prop_assert_eq!(bits(&fourier_modulus(&x).unwrap()), bits(&fourier_modulus(&xs).unwrap()));
        prop_assert_eq!(bits(&autocorrelation(&x).unwrap()), bits(&autocorrelation(&xs).unwrap()));
    }
}

#[test]
fn instability_grows_with_frequency() {
    let ratios: Vec<f64> = [8, 32, 128, 256].iter().map(|&k| modulus_instability_ratio(1024, k, 32.0, 0.05).unwrap()).collect();
    assert!(ratios.windows(2).all(|w| w[0] <= w[1]), "{ratios:?}");
    assert!(modulus_instability_ratio(1024, 200, 32.0, 0.05).unwrap() >= 1.0);
    assert!(modulus_instability_ratio(1024, 5, 32.0, 0.05).unwrap() <= 0.3);
}
