use muskat::spectral::{
    calderon_power, derivative, hilbert, pointwise_product, Complex, GridSpec, SpectralField, CONV,
};
use proptest::prelude::*;

fn field(k: usize) -> impl Strategy<Value = SpectralField> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), k).prop_map(move |c| {
        let grid = GridSpec::new(k).unwrap();
        let modes: Vec<Complex> = c.iter().map(|&(a, b)| Complex::new(a, b)).collect();
        SpectralField::from_positive_modes(grid, &modes).unwrap()
    })
}

fn field_pair(k: usize) -> impl Strategy<Value = (SpectralField, SpectralField)> {
    (field(k), field(k))
}

fn max_gap(a: &SpectralField, b: &SpectralField) -> f64 {
    let k = a.band_limit() as i64;
    (-k..=k)
        .map(|n| (a.coeff(n) - b.coeff(n)).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn physical_round_trip(f in (1usize..40).prop_flat_map(field)) {
        let back = SpectralField::from_physical(f.grid(), &f.to_physical()).unwrap();
        prop_assert!(max_gap(&f, &back) <= 1e-13);
    }

    #[test]
    fn multipliers_commute(f in (1usize..40).prop_flat_map(field), s in 0.0f64..3.0, order in 0u32..4) {
        let a = hilbert(&calderon_power(&derivative(&f, order), s));
        let b = derivative(&calderon_power(&hilbert(&f), s), order);
        let scale = f.wiener(0.0) * (f.band_limit() as f64).powf(s + order as f64);
        prop_assert!(max_gap(&a, &b) <= 1e-13 * scale.max(1.0));
    }

    #[test]
    fn hilbert_squares_to_minus_identity_off_mean(f in (1usize..40).prop_flat_map(field)) {
        let f = f.project_mean_zero();
        let hh = hilbert(&hilbert(&f));
        prop_assert_eq!(max_gap(&hh, &f.scale(-1.0)), 0.0);
    }

    #[test]
    fn derivative_is_minus_hilbert_of_lambda(f in (1usize..40).prop_flat_map(field)) {
        let lhs = derivative(&f, 1);
        let rhs = hilbert(&calderon_power(&f, 1.0)).scale(-1.0);
        prop_assert_eq!(max_gap(&lhs, &rhs), 0.0);
    }

    #[test]
    fn wiener_norms_increase_with_order(f in (1usize..40).prop_flat_map(field), a in 0.0f64..3.0, d in 0.0f64..2.0) {
        let f = f.project_mean_zero();
        prop_assert!(f.wiener(a) <= f.wiener(a + d) * (1.0 + 1e-14));
    }

    #[test]
    fn sobolev_controls_l2(f in (1usize..40).prop_flat_map(field), s in 0.0f64..3.0) {
        let f = f.project_mean_zero();
        prop_assert!(f.l2() <= f.sobolev(s) * (1.0 + 1e-14));
    }

    #[test]
    fn wiener_bounds_sup_norm(f in (1usize..40).prop_flat_map(field)) {
        let sup = f.to_physical().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(sup <= f.wiener(0.0) * CONST_SUP);
    }

    #[test]
    fn product_is_commutative_and_exact((f, g) in (1usize..24).prop_flat_map(field_pair)) {
        let fg = pointwise_product(&f, &g).unwrap();
        let gf = pointwise_product(&g, &f).unwrap();
        prop_assert!(max_gap(&fg, &gf) <= 1e-14 * f.wiener(0.0) * g.wiener(0.0));
        let fine = fg.grid();
        let (fs, gs) = (f.resample(fine).to_physical(), g.resample(fine).to_physical());
        for ((p, a), b) in fg.to_physical().iter().zip(&fs).zip(&gs) {
            prop_assert!((p - a * b).abs() <= 1e-13 * (1.0 + f.wiener(0.0) * g.wiener(0.0)));
        }
    }

    #[test]
    fn multipliers_preserve_reality(f in (1usize..40).prop_flat_map(field), s in 0.0f64..3.0) {
        let g = hilbert(&calderon_power(&f, s));
        prop_assert_eq!(g.coeff(0).im, 0.0);
        let k = f.band_limit() as i64;
        for n in 1..=k {
            prop_assert_eq!(g.coeff(-n), g.coeff(n).conj());
        }
    }
}

/// `|f(x)| <= (2 pi)^{-1/2} sum |f^(n)|`.
const CONST_SUP: f64 = CONV * (1.0 + 1e-12);
