//! Band-limited real fields on the torus `[-pi, pi)`.
//!
//! Coefficients use the unitary convention
//! `f^(n) = (2pi)^{-1/2} \int f e^{-inx} dx`, so the Fourier coefficient of a
//! product carries a convolution factor `(2pi)^{-1/2}`. Only the nonnegative
//! half of the spectrum is stored; negative modes follow from Hermitian
//! symmetry.

mod fft;
mod norms;
pub(crate) mod snapshot;

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

pub use fft::fast_len;
pub(crate) use fft::{analyze, synthesize};
pub use norms::{norms, Extrema, NormReport};
pub use snapshot::Snapshot;

use crate::error::{Error, Result};

pub type Complex = num_complex::Complex64;

/// `(2pi)^{-1/2}`, the factor picked up by Fourier-side convolutions.
pub const CONV: f64 = 0.398_942_280_401_432_7;

/// Band limit plus physical resolution of a field.
///
/// `phys_points >= 3 * band_limit + 1` so that cubic integrands and
/// products truncated back to the band are computed without aliasing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    band_limit: usize,
    phys_points: usize,
}

impl GridSpec {
    /// Grid with the smallest 5-smooth point count satisfying the 3K+1 rule.
    pub fn new(band_limit: usize) -> Result<Self> {
        if band_limit == 0 {
            return Err(Error::InvalidInput("band limit must be positive".into()));
        }
        Ok(GridSpec {
            band_limit,
            phys_points: fast_len(3 * band_limit + 1),
        })
    }

    pub fn with_points(band_limit: usize, phys_points: usize) -> Result<Self> {
        if band_limit == 0 {
            return Err(Error::InvalidInput("band limit must be positive".into()));
        }
        if phys_points < 3 * band_limit + 1 {
            return Err(Error::InvalidInput(format!(
                "{phys_points} physical points cannot resolve products at band {band_limit} (need >= {})",
                3 * band_limit + 1
            )));
        }
        Ok(GridSpec {
            band_limit,
            phys_points,
        })
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn phys_points(&self) -> usize {
        self.phys_points
    }

    /// True when the point count factors into 2, 3 and 5 only.
    pub fn is_transform_friendly(&self) -> bool {
        fft::is_fast_len(self.phys_points)
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = 2.0 * PI / self.phys_points as f64;
        (0..self.phys_points).map(|j| -PI + h * j as f64).collect()
    }
}

/// A real band-limited field stored by its coefficients for `0 <= n <= K`.
///
/// Fields handed to the evolution are mean-zero. Intermediate products may
/// carry a mean in the `n = 0` slot; [`SpectralField::project_mean_zero`]
/// removes it.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        SpectralField {
            grid,
            coeffs: vec![Complex::new(0.0, 0.0); grid.band_limit + 1],
        }
    }

    /// Build from `(n, coefficient)` pairs with `1 <= |n| <= K`. A negative
    /// `n` stores the conjugate at `|n|`.
    pub fn from_modes(grid: GridSpec, modes: &[(i64, Complex)]) -> Result<Self> {
        let mut f = SpectralField::zeros(grid);
        for &(n, c) in modes {
            if n == 0 {
                return Err(Error::InvalidInput("mode 0 must stay zero".into()));
            }
            let c = if n < 0 { c.conj() } else { c };
            f.set_coeff(n.unsigned_abs() as usize, c)?;
        }
        Ok(f)
    }

    /// Build from the coefficients of modes `1..=K`.
    pub fn from_positive_modes(grid: GridSpec, modes: &[Complex]) -> Result<Self> {
        if modes.len() != grid.band_limit {
            return Err(Error::GridMismatch(format!(
                "{} coefficients supplied for band {}",
                modes.len(),
                grid.band_limit
            )));
        }
        let mut coeffs = Vec::with_capacity(modes.len() + 1);
        coeffs.push(Complex::new(0.0, 0.0));
        coeffs.extend_from_slice(modes);
        Ok(SpectralField { grid, coeffs })
    }

    pub(crate) fn from_half_spectrum(grid: GridSpec, mut coeffs: Vec<Complex>) -> Self {
        coeffs.resize(grid.band_limit + 1, Complex::new(0.0, 0.0));
        coeffs[0].im = 0.0;
        SpectralField { grid, coeffs }
    }

    /// `a cos(m x)`.
    pub fn cosine(grid: GridSpec, m: usize, a: f64) -> Result<Self> {
        Self::from_modes(
            grid,
            &[(m as i64, Complex::new(a * (PI / 2.0).sqrt(), 0.0))],
        )
    }

    /// `a sin(m x)`.
    pub fn sine(grid: GridSpec, m: usize, a: f64) -> Result<Self> {
        Self::from_modes(
            grid,
            &[(m as i64, Complex::new(0.0, -a * (PI / 2.0).sqrt()))],
        )
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn band_limit(&self) -> usize {
        self.grid.band_limit
    }

    /// Coefficients of modes `0..=K`.
    pub fn half_spectrum(&self) -> &[Complex] {
        &self.coeffs
    }

    /// Coefficient of mode `n` for any integer `n`; zero outside the band.
    pub fn coeff(&self, n: i64) -> Complex {
        let m = n.unsigned_abs() as usize;
        match self.coeffs.get(m) {
            Some(c) if n >= 0 => *c,
            Some(c) => c.conj(),
            None => Complex::new(0.0, 0.0),
        }
    }

    pub fn set_coeff(&mut self, n: usize, c: Complex) -> Result<()> {
        if n > self.grid.band_limit {
            return Err(Error::InvalidInput(format!(
                "mode {n} exceeds band limit {}",
                self.grid.band_limit
            )));
        }
        self.coeffs[n] = if n == 0 { Complex::new(c.re, 0.0) } else { c };
        Ok(())
    }

    /// Mean value over the torus.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re * CONV
    }

    pub fn project_mean_zero(mut self) -> Self {
        self.coeffs[0] = Complex::new(0.0, 0.0);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Embed into (or truncate onto) a grid with a different band.
    pub fn resample(&self, grid: GridSpec) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.truncate(grid.band_limit + 1);
        Self::from_half_spectrum(grid, coeffs)
    }

    /// Apply a Fourier multiplier given by its symbol on `n >= 0`. The symbol
    /// must satisfy `m(-n) = conj(m(n))` so the result stays real.
    pub fn apply_multiplier(&self, symbol: impl Fn(i64) -> Complex) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c * symbol(n as i64))
            .collect();
        Self::from_half_spectrum(self.grid, coeffs)
    }

    pub fn map_real_multiplier(&self, symbol: impl Fn(i64) -> f64) -> Self {
        self.apply_multiplier(|n| Complex::new(symbol(n), 0.0))
    }

    /// Samples on the grid nodes `-pi + 2 pi j / N`.
    pub fn to_physical(&self) -> Vec<f64> {
        synthesize(&self.coeffs, self.grid.phys_points, -PI)
    }

    /// Samples on `m` equispaced nodes starting at `-pi`, `m > 2K`.
    pub fn sample(&self, m: usize) -> Vec<f64> {
        synthesize(&self.coeffs, m, -PI)
    }

    /// Inverse of [`SpectralField::to_physical`] for band-limited data.
    pub fn from_physical(grid: GridSpec, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.phys_points {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                grid.phys_points
            )));
        }
        Ok(Self::from_half_spectrum(
            grid,
            analyze(samples, -PI, grid.band_limit),
        ))
    }

    /// Direct evaluation of the trigonometric sum at one point.
    pub fn eval_at(&self, x: f64) -> f64 {
        self.eval_derivative_at(x, 0)
    }

    /// `d^order f / dx^order` at one point.
    pub fn eval_derivative_at(&self, x: f64, order: u32) -> f64 {
        let unit = Complex::new(0.0, 1.0).powu(order);
        let mut acc = if order == 0 { self.coeffs[0].re } else { 0.0 };
        for (n, c) in self.coeffs.iter().enumerate().skip(1) {
            let e = Complex::from_polar((n as f64).powi(order as i32), n as f64 * x);
            acc += 2.0 * (c * e * unit).re;
        }
        acc * CONV
    }

    fn check_same_grid(&self, other: &Self, what: &str) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{what}: {:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other, "add")?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other, "sub")?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex, Complex) -> Complex) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| op(*a, *b))
            .collect();
        SpectralField {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        SpectralField {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;

    /// Panics on grid mismatch; use [`SpectralField::try_add`] otherwise.
    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.try_add(rhs).expect("adding fields on different grids")
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;

    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.try_sub(rhs)
            .expect("subtracting fields on different grids")
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;

    fn mul(self, s: f64) -> SpectralField {
        self.scale(s)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;

    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

fn sgn(n: i64) -> f64 {
    match n.cmp(&0) {
        std::cmp::Ordering::Less => -1.0,
        std::cmp::Ordering::Equal => 0.0,
        std::cmp::Ordering::Greater => 1.0,
    }
}

/// Hilbert transform, multiplier `-i sgn(n)`.
pub fn hilbert(f: &SpectralField) -> SpectralField {
    f.apply_multiplier(|n| Complex::new(0.0, -sgn(n)))
}

/// `Lambda^s`, multiplier `|n|^s`. Mode 0 is annihilated unless `s == 0`.
pub fn calderon_power(f: &SpectralField, s: f64) -> SpectralField {
    if s == 0.0 {
        return f.clone();
    }
    f.map_real_multiplier(|n| {
        if n == 0 {
            0.0
        } else {
            (n.abs() as f64).powf(s)
        }
    })
}

/// `d^order/dx^order`, multiplier `(in)^order`.
pub fn derivative(f: &SpectralField, order: u32) -> SpectralField {
    let unit = Complex::new(0.0, 1.0).powu(order);
    f.apply_multiplier(|n| unit * (n as f64).powi(order as i32))
}

/// Exact product of two fields on the same grid.
///
/// The result lives on the band `2K` (mode 0 retained); it is computed by
/// sampling both factors on at least `4K + 1` points so no mode of the
/// product aliases.
pub fn pointwise_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.check_same_grid(g, "pointwise_product")?;
    let out_band = 2 * f.band_limit();
    let m = fast_len(2 * out_band + 1);
    let fs = synthesize(&f.coeffs, m, -PI);
    let gs = synthesize(&g.coeffs, m, -PI);
    let prod: Vec<f64> = fs.iter().zip(&gs).map(|(a, b)| a * b).collect();
    let grid = GridSpec::new(out_band)?;
    Ok(SpectralField::from_half_spectrum(
        grid,
        analyze(&prod, -PI, out_band),
    ))
}

/// Exact `\int_T f g h dx` for fields on a shared grid.
pub(crate) fn triple_integral(f: &[f64], g: &[f64], h: &[f64]) -> f64 {
    let n = f.len();
    let sum: f64 = f.iter().zip(g).zip(h).map(|((a, b), c)| a * b * c).sum();
    sum * 2.0 * PI / n as f64
}

/// Checks the integer homogeneity of the gravity and capillary symbols under
/// `(k, n) -> (lambda k, lambda n)`: degree 2 and degree 4 respectively.
pub fn scale_symbol_check(lambda: i64, kmax: i64) -> bool {
    use crate::nonlinearity::symbols::{sigma1, sigma3};
    if lambda < 1 || kmax < 1 {
        return false;
    }
    let l = lambda as i128;
    for k in -kmax..=kmax {
        for n in -kmax..=kmax {
            let s1 = sigma1(k, n) as i128;
            let s1_scaled = sigma1(lambda * k, lambda * n) as i128;
            if s1_scaled != l * l * s1 {
                return false;
            }
            if sigma3(lambda * k, lambda * n) != l.pow(4) * sigma3(k, n) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(k: usize) -> GridSpec {
        GridSpec::new(k).unwrap()
    }

    fn assert_fields_close(a: &SpectralField, b: &SpectralField, tol: f64) {
        assert_eq!(a.grid(), b.grid());
        for (x, y) in a.half_spectrum().iter().zip(b.half_spectrum()) {
            assert!((x - y).norm() <= tol, "{x} vs {y}");
        }
    }

    #[test]
    fn grid_rule_and_friendly_sizes() {
        let g = grid(32);
        assert!(g.phys_points() >= 97);
        assert!(g.is_transform_friendly());
        assert!(GridSpec::with_points(32, 96).is_err());
        assert!(GridSpec::new(0).is_err());
    }

    #[test]
    fn hilbert_single_modes() {
        let g = grid(8);
        let c3 = SpectralField::cosine(g, 3, 1.0).unwrap();
        assert_fields_close(
            &hilbert(&c3),
            &SpectralField::sine(g, 3, 1.0).unwrap(),
            1e-15,
        );
        let s1 = SpectralField::sine(g, 1, 1.0).unwrap();
        assert_fields_close(
            &hilbert(&s1),
            &SpectralField::cosine(g, 1, -1.0).unwrap(),
            1e-15,
        );
        assert!(hilbert(&SpectralField::zeros(g)).is_zero());
    }

    #[test]
    fn calderon_single_modes() {
        let g = grid(8);
        let c2 = SpectralField::cosine(g, 2, 1.0).unwrap();
        assert_fields_close(&calderon_power(&c2, 1.0), &c2.scale(2.0), 1e-15);
        let s1 = SpectralField::sine(g, 1, 1.0).unwrap();
        assert_fields_close(&calderon_power(&s1, 3.0), &s1, 1e-15);
        let c4 = SpectralField::cosine(g, 4, 1.0).unwrap();
        assert_fields_close(&calderon_power(&c4, 0.5), &c4.scale(2.0), 1e-15);
        assert_eq!(calderon_power(&c4, 0.0), c4);
    }

    #[test]
    fn derivative_single_modes() {
        let g = grid(8);
        let c1 = SpectralField::cosine(g, 1, 1.0).unwrap();
        assert_fields_close(
            &derivative(&c1, 1),
            &SpectralField::sine(g, 1, -1.0).unwrap(),
            1e-15,
        );
        assert_fields_close(&derivative(&c1, 2), &c1.scale(-1.0), 1e-15);
        let s2 = SpectralField::sine(g, 2, 1.0).unwrap();
        assert_fields_close(
            &derivative(&s2, 3),
            &SpectralField::cosine(g, 2, -8.0).unwrap(),
            1e-14,
        );
    }

    #[test]
    fn product_to_sum_identities() {
        let g = grid(4);
        let c1 = SpectralField::cosine(g, 1, 1.0).unwrap();
        let c2 = SpectralField::cosine(g, 2, 1.0).unwrap();
        let sq = pointwise_product(&c1, &c1).unwrap();
        assert_eq!(sq.band_limit(), 8);
        // (1 + cos 2x) / 2
        assert_abs_diff_eq!(sq.mean(), 0.5, epsilon = 1e-15);
        let expected = SpectralField::cosine(sq.grid(), 2, 0.5).unwrap();
        assert_fields_close(&sq.clone().project_mean_zero(), &expected, 1e-15);

        let mixed = pointwise_product(&c1, &c2).unwrap();
        let expected = &SpectralField::cosine(mixed.grid(), 1, 0.5).unwrap()
            + &SpectralField::cosine(mixed.grid(), 3, 0.5).unwrap();
        assert_fields_close(&mixed, &expected, 1e-15);

        let zero = pointwise_product(&c1, &SpectralField::zeros(g)).unwrap();
        assert!(zero.half_spectrum().iter().all(|c| c.norm() < 1e-300));

        let other = SpectralField::zeros(grid(5));
        assert!(matches!(
            pointwise_product(&c1, &other),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn physical_samples_match_direct_evaluation() {
        let g = grid(5);
        let f = SpectralField::from_modes(
            g,
            &[(1, Complex::new(0.3, -0.2)), (4, Complex::new(-0.1, 0.7))],
        )
        .unwrap();
        for (x, v) in g.nodes().iter().zip(f.to_physical()) {
            assert_abs_diff_eq!(f.eval_at(*x), v, epsilon = 1e-14);
        }
        let c = SpectralField::cosine(g, 1, 1.0).unwrap();
        assert_abs_diff_eq!(c.eval_at(0.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn hilbert_squares_to_minus_identity_and_multipliers_commute() {
        let g = grid(6);
        let f = SpectralField::from_modes(
            g,
            &[(2, Complex::new(0.5, 0.25)), (6, Complex::new(-0.3, 0.1))],
        )
        .unwrap();
        assert_fields_close(&hilbert(&hilbert(&f)), &f.scale(-1.0), 0.0);
        assert_eq!(
            hilbert(&calderon_power(&f, 1.7)),
            calderon_power(&hilbert(&f), 1.7)
        );
        // H Lambda has symbol -i n, so d = -H Lambda and Lambda = H d.
        assert_fields_close(
            &derivative(&f, 1),
            &hilbert(&calderon_power(&f, 1.0)).scale(-1.0),
            1e-15,
        );
        assert_fields_close(
            &calderon_power(&f, 1.0),
            &hilbert(&derivative(&f, 1)),
            1e-15,
        );
    }

    #[test]
    fn scaling_homogeneity() {
        assert!(scale_symbol_check(1, 16));
        assert!(scale_symbol_check(2, 64));
        assert!(scale_symbol_check(3, 32));
        assert!(!scale_symbol_check(0, 4));
    }

    #[test]
    fn mode_zero_rejected_and_out_of_band_reads_zero() {
        let g = grid(3);
        assert!(SpectralField::from_modes(g, &[(0, Complex::new(1.0, 0.0))]).is_err());
        let f = SpectralField::cosine(g, 3, 1.0).unwrap();
        assert_eq!(f.coeff(7), Complex::new(0.0, 0.0));
        assert_eq!(f.coeff(-3), f.coeff(3).conj());
        assert!(SpectralField::cosine(g, 4, 1.0).is_err());
    }
}
