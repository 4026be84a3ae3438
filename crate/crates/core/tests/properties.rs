use parasmooth::grid_spectral::{
    inner_product, sobolev_norm, spectral_derivative, transform_backward, transform_forward,
    GridSpec, ScalarField,
};
use parasmooth::monitor::energy_weights;
use proptest::prelude::*;

fn field(dim: usize, n: usize) -> impl Strategy<Value = ScalarField> {
    let g = GridSpec::periodic(dim, n).unwrap();
    prop::collection::vec(-1.0f64..1.0, g.total())
        .prop_map(move |v| ScalarField::from_values(g, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parseval(u in field(2, 8)) {
        let spectral = sobolev_norm(&u, 0);
        let quadrature = inner_product(&u, &u).unwrap();
        prop_assert!((spectral - quadrature).abs() <= 1e-10 * spectral.max(1e-300));
    }

    #[test]
    fn round_trip(u in field(1, 32)) {
        let back = transform_backward(&transform_forward(&u));
        let scale = u.values().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        for (a, b) in u.values().iter().zip(back.values().iter()) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn hermitian_symmetry(u in field(3, 8)) {
        prop_assert!(transform_forward(&u).hermitian_defect() < 1e-14);
        let d = spectral_derivative(&u, 2).unwrap();
        prop_assert!(d.to_spectral().hermitian_defect() < 1e-14);
    }

    // exact in one dimension
    #[test]
    fn norm_consistency_1d(u in field(1, 16), k in 0usize..5) {
        let direct = sobolev_norm(&u, k + 1);
        let via = sobolev_norm(&spectral_derivative(&u, 0).unwrap(), k);
        prop_assert!((direct - via).abs() <= 1e-10 * direct.max(1e-300));
    }

    // k = 0 in any dimension
    #[test]
    fn norm_consistency_first_order(u in field(2, 8)) {
        let direct = sobolev_norm(&u, 1);
        let via: f64 = (0..2).map(|a| sobolev_norm(&spectral_derivative(&u, a).unwrap(), 0)).sum();
        prop_assert!((direct - via).abs() <= 1e-10 * direct.max(1e-300));
    }

    // for n ≥ 2 and k ≥ 1 the unweighted multi-index sum is bounded by the
    // axis-wise sum, which counts mixed derivatives with multiplicity
    #[test]
    fn norm_consistency_bound(u in field(2, 8), k in 1usize..4) {
        let direct = sobolev_norm(&u, k + 1);
        let via: f64 = (0..2).map(|a| sobolev_norm(&spectral_derivative(&u, a).unwrap(), k)).sum();
        prop_assert!(direct <= via * (1.0 + 1e-12));
    }

    #[test]
    fn weight_identity(theta in 0.01f64..10.0, t in 1e-6f64..10.0) {
        let w = energy_weights(theta, t, 8);
        prop_assert_eq!(w[0], 1.0);
        for k in 1..=8 {
            let rec = w[k - 1] * theta * t / (2.0 * k as f64);
            prop_assert!((w[k] - rec).abs() <= 1e-15 * rec.abs());
        }
    }
}
