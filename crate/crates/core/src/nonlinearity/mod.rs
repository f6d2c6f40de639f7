//! The quadratic right-hand side
//! `nu [Lambda(f Lambda^3 f) - d(f d^3 f)] + [Lambda(f Lambda f) + d(f d f)]`
//! in three independent forms, and the trilinear forms `N` and `M`.

mod pv;
pub mod symbols;
mod trilinear;

use crate::spectral::{analyze, calderon_power, derivative, Complex, SpectralField, CONV};

pub use pv::{rhs_pv_quadrature, PvResult};
pub use symbols::{sigma1, sigma3, verify_symbol_bounds, InequalityReport, SymbolPair};
pub use trilinear::{trilinear_m, trilinear_m_fourier, trilinear_n, trilinear_n_fourier};

/// Pseudo-spectral evaluation: four products on the field's own grid,
/// exact on the retained band. The mean is projected out.
pub fn rhs_pseudospectral(f: &SpectralField, nu: f64) -> SpectralField {
    let k = f.band_limit();
    let u = f.to_physical();
    let lam = calderon_power(f, 1.0).to_physical();
    let du = derivative(f, 1).to_physical();
    let x0 = -std::f64::consts::PI;
    let product = |w: &[f64]| -> Vec<Complex> {
        let p: Vec<f64> = u.iter().zip(w).map(|(a, b)| a * b).collect();
        analyze(&p, x0, k)
    };
    let p1 = product(&lam);
    let p2 = product(&du);
    let (p3, p4) = if nu != 0.0 {
        let lam3 = calderon_power(f, 3.0).to_physical();
        let d3 = derivative(f, 3).to_physical();
        (product(&lam3), product(&d3))
    } else {
        let zero = vec![Complex::new(0.0, 0.0); k + 1];
        (zero.clone(), zero)
    };
    let mut out = vec![Complex::new(0.0, 0.0); k + 1];
    for n in 1..=k {
        let nf = n as f64;
        let grav = nf * p1[n] + Complex::new(0.0, nf) * p2[n];
        let cap = nf * p3[n] - Complex::new(0.0, nf) * p4[n];
        out[n] = grav + nu * cap;
    }
    SpectralField::from_half_spectrum(f.grid(), out)
}

/// Direct `O(K^2)` convolution with the integer symbols. Only pairs on the
/// symbol support contribute, so the inner loop runs over `|n| > |k|`.
pub fn rhs_convolution(f: &SpectralField, nu: f64) -> SpectralField {
    let k_max = f.band_limit() as i64;
    let mut out = vec![Complex::new(0.0, 0.0); f.band_limit() + 1];
    for k in 1..=k_max {
        let mut acc = Complex::new(0.0, 0.0);
        for n in (k + 1)..=k_max {
            let p = k - n;
            if p < -k_max {
                continue;
            }
            let w = sigma1(k, n) as f64 + nu * sigma3(k, n) as f64;
            acc += f.coeff(n) * f.coeff(p) * w;
        }
        out[k as usize] = acc * CONV;
    }
    SpectralField::from_half_spectrum(f.grid(), out)
}

/// `B(a, b)^(k) = (2pi)^{-1/2} sum_n a^(n) b^(k-n) sigma1(k, n)` on the band
/// of `a`, i.e. `Lambda(a Lambda b) + d(a d b)`. `B(f, f)` is the gravity
/// right-hand side.
pub fn bilinear_gravity(a: &SpectralField, b: &SpectralField) -> SpectralField {
    let mut out = vec![Complex::new(0.0, 0.0); a.band_limit() + 1];
    bilinear_gravity_into(a.half_spectrum(), b.half_spectrum(), &mut out);
    SpectralField::from_half_spectrum(a.grid(), out)
}

/// Slice form of [`bilinear_gravity`], accumulating into `out` (modes
/// `0..=K`, `K = out.len() - 1`).
pub(crate) fn bilinear_gravity_into(a: &[Complex], b: &[Complex], out: &mut [Complex]) {
    let k_max = out.len() as i64 - 1;
    let get = |c: &[Complex], n: i64| -> Complex {
        match c.get(n.unsigned_abs() as usize) {
            Some(z) if n >= 0 => *z,
            Some(z) => z.conj(),
            None => Complex::new(0.0, 0.0),
        }
    };
    for k in 1..=k_max {
        let mut acc = Complex::new(0.0, 0.0);
        for n in (k + 1)..=(a.len() as i64 - 1) {
            let an = a[n as usize];
            if an.re == 0.0 && an.im == 0.0 {
                continue;
            }
            acc += an * get(b, k - n) * sigma1(k, n) as f64;
        }
        out[k as usize] += acc * CONV;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn two_mode(k: usize) -> SpectralField {
        let g = GridSpec::new(k).unwrap();
        &SpectralField::cosine(g, 1, 1.0).unwrap() + &SpectralField::cosine(g, 2, 1.0).unwrap()
    }

    // f = cos x + cos 2x:
    //   f Lambda f = 3/2 + 3/2 cos x + 1/2 cos 2x + 3/2 cos 3x + cos 4x
    //   f^2        = 1 + cos x + 1/2 cos 2x + cos 3x + 1/2 cos 4x
    // and d(f f') = (f^2 / 2)''.
    fn f_lambda_f(x: f64) -> f64 {
        1.5 + 1.5 * x.cos() + 0.5 * (2.0 * x).cos() + 1.5 * (3.0 * x).cos() + (4.0 * x).cos()
    }

    fn f_squared(x: f64) -> f64 {
        1.0 + x.cos() + 0.5 * (2.0 * x).cos() + (3.0 * x).cos() + 0.5 * (4.0 * x).cos()
    }

    fn hand_expansion(x: f64) -> f64 {
        let lam = 1.5 * x.cos()
            + 2.0 * 0.5 * (2.0 * x).cos()
            + 3.0 * 1.5 * (3.0 * x).cos()
            + 4.0 * (4.0 * x).cos();
        let dd = -0.5 * x.cos()
            - 0.5 * 4.0 * 0.5 * (2.0 * x).cos()
            - 0.5 * 9.0 * (3.0 * x).cos()
            - 0.5 * 16.0 * 0.5 * (4.0 * x).cos();
        lam + dd
    }

    #[test]
    fn hand_expansion_reduces_to_cos_x() {
        for j in 0..16 {
            let x = -PI + j as f64 * 0.4;
            let (c1, c2) = (x.cos(), (2.0 * x).cos());
            assert_abs_diff_eq!(f_lambda_f(x), (c1 + c2) * (c1 + 2.0 * c2), epsilon = 1e-14);
            assert_abs_diff_eq!(f_squared(x), (c1 + c2).powi(2), epsilon = 1e-14);
            assert_abs_diff_eq!(hand_expansion(x), x.cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn two_mode_rhs_is_cos_x() {
        for k in [2, 4, 16] {
            let f = two_mode(k);
            let expected = SpectralField::cosine(f.grid(), 1, 1.0).unwrap();
            for rhs in [rhs_pseudospectral(&f, 0.0), rhs_convolution(&f, 0.0)] {
                let diff = &rhs - &expected;
                assert!(diff.wiener(0.0) < 1e-12, "{}", diff.wiener(0.0));
            }
            let b = bilinear_gravity(&f, &f);
            assert!((&b - &expected).wiener(0.0) < 1e-12);
        }
    }

    #[test]
    fn zero_field() {
        let g = GridSpec::new(8).unwrap();
        let z = SpectralField::zeros(g);
        assert!(rhs_pseudospectral(&z, 0.3).is_zero());
        assert!(rhs_convolution(&z, 0.3).is_zero());
    }

    fn field_strategy(k: usize) -> impl Strategy<Value = SpectralField> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), k).prop_map(move |v| {
            let g = GridSpec::new(k).unwrap();
            let modes: Vec<Complex> = v
                .iter()
                .enumerate()
                .map(|(i, &(a, b))| Complex::new(a, b) / ((i + 1) as f64).powi(3))
                .collect();
            SpectralField::from_positive_modes(g, &modes).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn single_modes_are_annihilated(m in 1usize..12, a in -3.0f64..3.0, nu in 0.0f64..2.0) {
            let g = GridSpec::new(12).unwrap();
            let f = SpectralField::cosine(g, m, a).unwrap();
            let scale = a * a * (m as f64).powi(4) * (1.0 + nu * (m as f64).powi(2));
            prop_assert!(rhs_pseudospectral(&f, nu).wiener(0.0) <= 1e-13 * scale.max(1.0));
            prop_assert!(rhs_convolution(&f, nu).is_zero());
        }

        #[test]
        fn spectral_paths_agree(f in field_strategy(16), nu in 0.0f64..1.0) {
            let a = rhs_pseudospectral(&f, nu);
            let b = rhs_convolution(&f, nu);
            prop_assert!((&a - &b).wiener(0.0) < 1e-10);
            prop_assert_eq!(a.coeff(0), Complex::new(0.0, 0.0));
        }

        #[test]
        fn output_mode_only_sees_higher_modes(f in field_strategy(10), cut in 1usize..10) {
            // Output mode k only draws on |n| > |k|, so data supported on
            // modes <= cut produce nothing above cut.
            let g = f.grid();
            let mut low = SpectralField::zeros(g);
            for n in 1..=cut {
                low.set_coeff(n, f.coeff(n as i64)).unwrap();
            }
            let r = rhs_convolution(&low, 0.4);
            for n in (cut + 1)..=g.band_limit() {
                prop_assert_eq!(r.coeff(n as i64), Complex::new(0.0, 0.0));
            }
        }
    }
}
