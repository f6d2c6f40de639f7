use crate::error::Result;
use crate::spectral::{calderon_power, derivative, hilbert, triple_integral, SpectralField, CONV};

fn same_grid(fields: &[&SpectralField]) -> Result<()> {
    let g = fields[0].grid();
    for f in &fields[1..] {
        if f.grid() != g {
            return Err(crate::error::Error::GridMismatch(format!(
                "trilinear form on {:?} and {:?}",
                g,
                f.grid()
            )));
        }
    }
    Ok(())
}

/// `N(g1, g2, g3) = \int g1 (H - 1) d g2 (H + 1) d g3 dx` by trapezoid
/// quadrature on the shared grid, exact since `N >= 3K + 1`.
pub fn trilinear_n(g1: &SpectralField, g2: &SpectralField, g3: &SpectralField) -> Result<f64> {
    same_grid(&[g1, g2, g3])?;
    let d2 = derivative(g2, 1);
    let d3 = derivative(g3, 1);
    let a = (&hilbert(&d2) - &d2).to_physical();
    let b = (&hilbert(&d3) + &d3).to_physical();
    Ok(triple_integral(&g1.to_physical(), &a, &b))
}

/// `M(g1, g2, g3) = nu \int g1 (Lambda^3 g2 Lambda g3 + d^3 g2 d g3) dx`.
pub fn trilinear_m(
    g1: &SpectralField,
    g2: &SpectralField,
    g3: &SpectralField,
    nu: f64,
) -> Result<f64> {
    same_grid(&[g1, g2, g3])?;
    let u = g1.to_physical();
    let l3 = calderon_power(g2, 3.0).to_physical();
    let l1 = calderon_power(g3, 1.0).to_physical();
    let d3 = derivative(g2, 3).to_physical();
    let d1 = derivative(g3, 1).to_physical();
    Ok(nu * (triple_integral(&u, &l3, &l1) + triple_integral(&u, &d3, &d1)))
}

/// Symmetric case `N(g, h, h)` as the reduced series
/// `4 (2pi)^{-1/2} sum_{0<k<n} (n-k) k Re(conj(g_n) h_{n-k} h_k)`.
/// Mixed-sign interactions cancel in pairs because the last two slots agree.
pub fn trilinear_n_fourier(g: &SpectralField, h: &SpectralField) -> Result<f64> {
    same_grid(&[g, h])?;
    Ok(4.0 * CONV * reduced_sum(g, h, |q, r| q * r))
}

/// Symmetric case `M(g, h, h)` as
/// `4 nu (2pi)^{-1/2} sum_{0<k<n} (n-k)^3 k Re(conj(g_n) h_{n-k} h_k)`.
pub fn trilinear_m_fourier(g: &SpectralField, h: &SpectralField, nu: f64) -> Result<f64> {
    same_grid(&[g, h])?;
    Ok(4.0 * nu * CONV * reduced_sum(g, h, |q, r| q * q * q * r))
}

fn reduced_sum(g: &SpectralField, h: &SpectralField, weight: impl Fn(f64, f64) -> f64) -> f64 {
    let k_max = g.band_limit() as i64;
    let mut acc = 0.0;
    for n in 2..=k_max {
        let gn = g.coeff(n).conj();
        if gn.re == 0.0 && gn.im == 0.0 {
            continue;
        }
        for k in 1..n {
            let q = n - k;
            acc += weight(q as f64, k as f64) * (gn * h.coeff(q) * h.coeff(k)).re;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::rhs_pseudospectral;
    use crate::spectral::{Complex, GridSpec};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Midpoint quadrature of a closed-form integrand, independent of the
    /// spectral machinery.
    fn integrate(g: impl Fn(f64) -> f64) -> f64 {
        let m = 2048;
        let h = 2.0 * PI / m as f64;
        (0..m).map(|j| g(-PI + (j as f64 + 0.5) * h)).sum::<f64>() * h
    }

    #[test]
    fn closed_forms() {
        let grid = GridSpec::new(4).unwrap();
        let c1 = SpectralField::cosine(grid, 1, 1.0).unwrap();
        let c2 = SpectralField::cosine(grid, 2, 1.0).unwrap();
        // (H - 1) d cos x = cos x + sin x and (H + 1) d cos x = cos x - sin x,
        // so the integrand is g cos 2x.
        assert_abs_diff_eq!(integrate(|x| (2.0 * x).cos().powi(2)), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(
            integrate(|x| x.cos() * (2.0 * x).cos()),
            0.0,
            epsilon = 1e-12
        );

        assert_abs_diff_eq!(trilinear_n(&c1, &c1, &c1).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(trilinear_n(&c2, &c1, &c1).unwrap(), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(trilinear_n_fourier(&c2, &c1).unwrap(), PI, epsilon = 1e-12);
        let z = SpectralField::zeros(grid);
        assert_eq!(trilinear_n(&z, &c1, &c1).unwrap(), 0.0);

        for nu in [0.1, 1.0, 3.5] {
            assert_abs_diff_eq!(
                trilinear_m(&c2, &c1, &c1, nu).unwrap(),
                nu * PI,
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                trilinear_m_fourier(&c2, &c1, nu).unwrap(),
                nu * PI,
                epsilon = 1e-12
            );
        }
        // cos 3x carries no doubled mode of cos x.
        let c3 = SpectralField::cosine(grid, 3, 1.0).unwrap();
        assert_abs_diff_eq!(
            trilinear_m(&c3, &c1, &c1, 1.0).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert!(trilinear_n(&c1, &SpectralField::zeros(GridSpec::new(5).unwrap()), &c1).is_err());
    }

    fn random_field(k: usize) -> impl Strategy<Value = SpectralField> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), k).prop_map(move |v| {
            let modes: Vec<Complex> = v
                .iter()
                .enumerate()
                .map(|(i, &(a, b))| Complex::new(a, b) / ((i + 1) as f64).powi(3))
                .collect();
            SpectralField::from_positive_modes(GridSpec::new(k).unwrap(), &modes).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn fourier_and_integral_paths_agree(g in random_field(12), h in random_field(12), nu in 0.0f64..2.0) {
            let n_int = trilinear_n(&g, &h, &h).unwrap();
            let n_sum = trilinear_n_fourier(&g, &h).unwrap();
            prop_assert!((n_int - n_sum).abs() < 1e-10, "{} {}", n_int, n_sum);
            let m_int = trilinear_m(&g, &h, &h, nu).unwrap();
            let m_sum = trilinear_m_fourier(&g, &h, nu).unwrap();
            prop_assert!((m_int - m_sum).abs() < 1e-10, "{} {}", m_int, m_sum);
        }

        #[test]
        fn energy_pairing_equals_n(f in random_field(16)) {
            let rhs = rhs_pseudospectral(&f, 0.0);
            let pairing = triple_integral(
                &f.to_physical(),
                &rhs.to_physical(),
                &vec![1.0; f.grid().phys_points()],
            );
            let n = trilinear_n(&f, &f, &f).unwrap();
            prop_assert!((pairing - n).abs() < 1e-10, "{} {}", pairing, n);
        }
    }
}
