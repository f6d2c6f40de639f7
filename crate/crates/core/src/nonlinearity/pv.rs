use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{analyze, calderon_power, derivative, synthesize, Complex, SpectralField};

/// Gravity right-hand side from the singular-integral representation,
/// with a Richardson estimate of the quadrature error.
#[derive(Clone, Debug)]
pub struct PvResult {
    pub field: SpectralField,
    /// `A^0` distance to the same quadrature at half resolution.
    pub error_estimate: f64,
    pub quad_points: usize,
}

/// Evaluates
/// `(4pi)^{-1} p.v. \int [u(x) - u(x-y)] / sin^2(y/2) Lambda u(x-y) dy + (u'(x))^2`
/// on `M` points with the midpoint nodes `y_j = -pi + (j + 1/2) 2pi/M`. The
/// nodes are symmetric about `y = 0` and never touch it, so the odd
/// singular part cancels exactly.
///
/// Requires `M` even, `M >= 512` and `M / 2 >= 3K + 1` so the half-resolution
/// comparison still resolves the band.
pub fn rhs_pv_quadrature(f: &SpectralField, quad_points: usize) -> Result<PvResult> {
    let m = quad_points;
    let k = f.band_limit();
    if m % 2 != 0 || m < 512 {
        return Err(Error::InvalidInput(format!(
            "quadrature needs an even point count >= 512, got {m}"
        )));
    }
    if m / 2 < 3 * k + 1 {
        return Err(Error::InvalidInput(format!(
            "{m} quadrature points are too few for band {k}"
        )));
    }
    let field = pv_on(f, m);
    let half = (m / 2 + 1) & !1;
    let coarse = pv_on(f, half);
    let error_estimate = (&field - &coarse).wiener(0.0);
    Ok(PvResult {
        field,
        error_estimate,
        quad_points: m,
    })
}

fn pv_on(f: &SpectralField, m: usize) -> SpectralField {
    let h = 2.0 * PI / m as f64;
    let half = f.half_spectrum();
    let u_x = synthesize(half, m, 0.0);
    let du_x = synthesize(derivative(f, 1).half_spectrum(), m, 0.0);
    // Values at the shifted nodes z_p = (p - 1/2) h, so x_i - y_j = z_{i-j+m/2}.
    let u_z = synthesize(half, m, -0.5 * h);
    let lu_z = synthesize(calderon_power(f, 1.0).half_spectrum(), m, -0.5 * h);
    let weights: Vec<f64> = (0..m)
        .map(|j| {
            let y = -PI + (j as f64 + 0.5) * h;
            h / (4.0 * PI * (0.5 * y).sin().powi(2))
        })
        .collect();
    let values: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| {
            let ui = u_x[i];
            let mut acc = 0.0;
            for (j, w) in weights.iter().enumerate() {
                let p = (i + m + m / 2 - j) % m;
                acc += w * (ui - u_z[p]) * lu_z[p];
            }
            acc + du_x[i] * du_x[i]
        })
        .collect();
    let mut coeffs = analyze(&values, 0.0, f.band_limit());
    coeffs[0] = Complex::new(0.0, 0.0);
    SpectralField::from_half_spectrum(f.grid(), coeffs)
}
