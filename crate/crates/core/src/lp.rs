//! Homogeneous Littlewood-Paley blocks on the circle.
//!
//! `phi(t) = chi(t/2) - chi(t)` with `chi` a smooth step from 1 on
//! `[0, 3/4]` to 0 on `[4/3, inf)`, so `phi` lives on the annulus
//! `(3/4, 8/3)`. `Delta_q` multiplies mode `n` by `phi(|n| / 2^q)`, divided by
//! the lattice sum `sum_q phi(|n| / 2^q)` so the blocks add up to the
//! identity up to summation rounding.

use rayon::prelude::*;
use serde::Serialize;

use crate::ensemble::EnsembleSpec;
use crate::error::Result;
use crate::spectral::{pointwise_product, Complex, GridSpec, SpectralField, CONV};

const INNER: f64 = 0.75;
const OUTER: f64 = 4.0 / 3.0;

fn psi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth step: 0 for `x <= 0`, 1 for `x >= 1`.
fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        psi(x) / (psi(x) + psi(1.0 - x))
    }
}

pub fn chi(t: f64) -> f64 {
    // 1 - step(x) = step(1 - x), kept in this form so values near the
    // edges of the transition do not round to 0 or 1.
    smooth_step(1.0 - (t - INNER) / (OUTER - INNER))
}

/// Unnormalized annulus bump, zero outside `(3/4, 8/3)`.
pub fn phi(t: f64) -> f64 {
    // chi(t/2) = 1 for t <= 3/2 and chi(t) = 0 for t >= 4/3.
    if t <= 1.5 {
        smooth_step((t - INNER) / (OUTER - INNER))
    } else {
        chi(0.5 * t)
    }
}

fn raw_block(n: u64, q: i32) -> f64 {
    phi(n as f64 * (-(q as f64)).exp2())
}

/// Blocks touching mode `n >= 1`.
fn blocks_of(n: u64) -> std::ops::RangeInclusive<i32> {
    let top = 63 - n.leading_zeros() as i32;
    (top - 2)..=(top + 2)
}

/// Normalized weight of mode `n` in block `q`.
pub fn block_weight(n: i64, q: i32) -> f64 {
    let n = n.unsigned_abs();
    if n == 0 {
        return 0.0;
    }
    let w = raw_block(n, q);
    if w == 0.0 {
        return 0.0;
    }
    let total: f64 = blocks_of(n).map(|p| raw_block(n, p)).sum();
    w / total
}

/// Weight of mode `n` in `S_q = sum_{q' <= q - 1} Delta_{q'}`.
pub fn low_pass_weight(n: i64, q: i32) -> f64 {
    let m = n.unsigned_abs();
    if m == 0 {
        return 0.0;
    }
    let blocks = blocks_of(m);
    if q > *blocks.end() {
        return 1.0;
    }
    blocks
        .filter(|&p| p < q)
        .map(|p| block_weight(n, p))
        .sum()
}

/// Range of `q` whose block meets `1 <= |n| <= K`.
pub fn block_range(band_limit: usize) -> (i32, i32) {
    let mut hi = -1;
    while INNER * ((hi + 1) as f64).exp2() < band_limit as f64 {
        hi += 1;
    }
    (-1, hi)
}

/// Table of block weights for one band limit.
#[derive(Clone, Debug)]
pub struct DyadicFilter {
    pub band_limit: usize,
    pub q_min: i32,
    pub q_max: i32,
    /// `weights[q - q_min][n]` for `n = 0..=K`.
    pub weights: Vec<Vec<f64>>,
}

impl DyadicFilter {
    pub fn new(band_limit: usize) -> Self {
        let (q_min, q_max) = block_range(band_limit);
        let weights = (q_min..=q_max)
            .map(|q| (0..=band_limit as i64).map(|n| block_weight(n, q)).collect())
            .collect();
        DyadicFilter {
            band_limit,
            q_min,
            q_max,
            weights,
        }
    }

    /// Largest deviation of `sum_q weight` from 1 over `1 <= n <= K`.
    pub fn partition_defect(&self) -> f64 {
        (1..=self.band_limit)
            .map(|n| {
                let s: f64 = self.weights.iter().map(|w| w[n]).sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

pub fn delta_q(u: &SpectralField, q: i32) -> SpectralField {
    u.map_real_multiplier(|n| block_weight(n, q))
}

pub fn s_q(u: &SpectralField, q: i32) -> SpectralField {
    u.map_real_multiplier(|n| low_pass_weight(n, q))
}

/// `Delta_q(ab) - a Delta_q b`, on the product band.
pub fn dyadic_commutator(q: i32, a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    let ab = pointwise_product(a, b)?;
    let a_db = pointwise_product(a, &delta_q(b, q))?;
    Ok(&delta_q(&ab, q) - &a_db)
}

/// The four pieces of `Delta_q(uv)`:
///
/// * `S_{q-1}u Delta_q v`
/// * `sum_{|q-q'|<=4} [Delta_q, S_{q'-1}u] Delta_{q'} v`
/// * `sum_{|q-q'|<=4} (S_{q'-1}u - S_{q-1}u) Delta_q Delta_{q'} v`
/// * `sum_{q'>q-4} Delta_q(S_{q'+2}v Delta_{q'} u)`
#[derive(Clone, Debug)]
pub struct BonyTerms {
    pub paraproduct: SpectralField,
    pub commutator: SpectralField,
    pub correction: SpectralField,
    pub remainder: SpectralField,
    /// `Delta_q(uv)` computed directly.
    pub target: SpectralField,
}

impl BonyTerms {
    pub fn sum(&self) -> SpectralField {
        &(&(&self.paraproduct + &self.commutator) + &self.correction) + &self.remainder
    }

    /// `A^0` distance between the four-term sum and `Delta_q(uv)`.
    pub fn defect(&self) -> f64 {
        (&self.sum() - &self.target).wiener(0.0)
    }
}

pub fn bony_terms(u: &SpectralField, v: &SpectralField, q: i32) -> Result<BonyTerms> {
    let target = delta_q(&pointwise_product(u, v)?, q);
    let zero = SpectralField::zeros(target.grid());
    let s_u = s_q(u, q - 1);
    let paraproduct = pointwise_product(&s_u, &delta_q(v, q))?;

    let mut commutator = zero.clone();
    let mut correction = zero.clone();
    for qp in (q - 4)..=(q + 4) {
        let dv = delta_q(v, qp);
        let s_qp = s_q(u, qp - 1);
        commutator = &commutator + &dyadic_commutator(q, &s_qp, &dv)?;
        let diff = &s_qp - &s_u;
        correction = &correction + &pointwise_product(&diff, &delta_q(&dv, q))?;
    }

    let (_, q_max) = block_range(u.band_limit());
    let mut remainder = zero;
    for qp in (q - 3)..=q_max.max(q - 3) {
        let prod = pointwise_product(&s_q(v, qp + 2), &delta_q(u, qp))?;
        remainder = &remainder + &delta_q(&prod, q);
    }
    Ok(BonyTerms {
        paraproduct,
        commutator,
        correction,
        remainder,
        target,
    })
}

/// Product by direct convolution on the band `2K`. Output modes reached by
/// no pair of nonzero coefficients come out exactly zero, which the FFT
/// product only gives up to rounding.
pub fn product_by_convolution(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    let k = a.band_limit() as i64;
    if a.grid() != b.grid() {
        return Err(crate::error::Error::GridMismatch(format!(
            "product_by_convolution: {:?} vs {:?}",
            a.grid(),
            b.grid()
        )));
    }
    let nonzero: Vec<(i64, Complex)> = (-k..=k)
        .map(|n| (n, b.coeff(n)))
        .filter(|(_, c)| *c != Complex::new(0.0, 0.0))
        .collect();
    let out: Vec<Complex> = (0..=2 * k)
        .map(|m| {
            let mut acc = Complex::new(0.0, 0.0);
            for &(n, bn) in &nonzero {
                let j = m - n;
                if j.abs() <= k {
                    let aj = a.coeff(j);
                    if aj != Complex::new(0.0, 0.0) {
                        acc += aj * bn;
                    }
                }
            }
            acc * CONV
        })
        .collect();
    Ok(SpectralField::from_half_spectrum(GridSpec::new(2 * k as usize)?, out))
}

/// `A^0` size of `Delta_q(S_{q'-1}a Delta_{q'} b)`; it vanishes for
/// `|q - q'| >= 5`.
pub fn orthogonality_residual(a: &SpectralField, b: &SpectralField, q: i32, qp: i32) -> Result<f64> {
    let p = product_by_convolution(&s_q(a, qp - 1), &delta_q(b, qp))?;
    Ok(delta_q(&p, q).wiener(0.0))
}

/// `A^0` size of `Delta_q(Delta_{q'}a Delta_{q'+d} b)`, `|d| <= 1`; it vanishes
/// for `q' < q - 4`.
pub fn high_high_residual(a: &SpectralField, b: &SpectralField, q: i32, qp: i32, d: i32) -> Result<f64> {
    let p = product_by_convolution(&delta_q(a, qp), &delta_q(b, qp + d))?;
    Ok(delta_q(&p, q).wiener(0.0))
}

/// `(sum_q 2^{pqs} ||Delta_q u||_{L^p}^p)^{1/p}`. For `p = 2` the block
/// norms come from Parseval; otherwise from a trapezoid rule on
/// `max(64, 16K)` points, exact for even integer `p <= 15`.
pub fn wsp_norm(u: &SpectralField, s: f64, p: f64) -> f64 {
    let (q_min, q_max) = block_range(u.band_limit());
    let m = (16 * u.band_limit()).max(64);
    let h = 2.0 * std::f64::consts::PI / m as f64;
    let mut acc = 0.0;
    for q in q_min..=q_max {
        let d = delta_q(u, q);
        let lp_p = if p == 2.0 {
            d.l2().powi(2)
        } else {
            d.sample(m).iter().map(|x| x.abs().powf(p)).sum::<f64>() * h
        };
        acc += (p * q as f64 * s).exp2() * lp_p;
    }
    acc.powf(1.0 / p)
}

fn commutator_ratio(u: &SpectralField, v: &SpectralField) -> Result<f64> {
    let du = crate::spectral::derivative(u, 1).extrema().linf();
    let vn = v.l2();
    if du == 0.0 || vn == 0.0 {
        return Ok(0.0);
    }
    let (q_min, q_max) = block_range(u.band_limit());
    let mut worst: f64 = 0.0;
    for q in q_min..=q_max {
        let c = dyadic_commutator(q, u, v)?.l2();
        worst = worst.max(c / ((-(q as f64)).exp2() * du * vn));
    }
    Ok(worst)
}

/// Largest `||[Delta_q, u] v||_{L^2} / (2^{-q} ||u'||_{L^inf} ||v||_{L^2})` over
/// `count` seeded pairs and all blocks. Pairs with a zero denominator are
/// skipped.
pub fn commutator_constant_probe(spec: &EnsembleSpec, grid: GridSpec, count: usize) -> Result<f64> {
    let ratios: Result<Vec<f64>> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let u = spec.sample(grid, 2 * i)?;
            let v = spec.sample(grid, 2 * i + 1)?;
            commutator_ratio(&u, &v)
        })
        .collect();
    Ok(ratios?.into_iter().fold(0.0, f64::max))
}

/// Largest `2^{qs} ||Delta_q u||_{L^2} / ||u||_{H^s}` over the ensemble.
pub fn dyadic_regularity_probe(spec: &EnsembleSpec, grid: GridSpec, count: usize, s: f64) -> Result<f64> {
    let (q_min, q_max) = block_range(grid.band_limit());
    let mut worst: f64 = 0.0;
    for i in 0..count as u64 {
        let u = spec.sample(grid, i)?;
        let hs = u.sobolev(s);
        if hs == 0.0 {
            continue;
        }
        for q in q_min..=q_max {
            worst = worst.max((q as f64 * s).exp2() * delta_q(&u, q).l2() / hs);
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct LpCheck {
    pub id: &'static str,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LpReport {
    pub checks: Vec<LpCheck>,
    pub commutator_constant: (f64, f64),
    pub regularity_constant: (f64, f64),
    pub wsp_h_ratio: Vec<(f64, f64)>,
}

impl LpReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Reconstruction, Bony identity and almost-orthogonality over `trials`
/// seeded pairs at band `k`, plus the measured constants at `k` and `2k`.
pub fn lp_check(seed: u64, trials: usize, k: usize) -> Result<LpReport> {
    let spec = EnsembleSpec::new(seed);
    let grid = GridSpec::new(k)?;
    let (q_min, q_max) = block_range(k);
    let per_pair: Result<Vec<(f64, f64, f64, f64)>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let u = spec.sample(grid, 2 * i)?;
            let v = spec.sample(grid, 2 * i + 1)?;
            let mut recon = SpectralField::zeros(grid);
            for q in q_min..=q_max {
                recon = &recon + &delta_q(&u, q);
            }
            let recon_err = (&recon - &u).wiener(0.0);
            let mut bony: f64 = 0.0;
            let mut ortho: f64 = 0.0;
            let mut high: f64 = 0.0;
            for q in q_min..=q_max + 1 {
                bony = bony.max(bony_terms(&u, &v, q)?.defect());
                for qp in (q_min - 1)..=(q_max + 1) {
                    if (q - qp).abs() >= 5 {
                        ortho = ortho.max(orthogonality_residual(&u, &v, q, qp)?);
                    }
                    if qp < q - 4 {
                        for d in -1..=1 {
                            high = high.max(high_high_residual(&u, &v, q, qp, d)?);
                        }
                    }
                }
            }
            Ok((recon_err, bony, ortho, high))
        })
        .collect();
    let per_pair = per_pair?;
    let max_of = |f: fn(&(f64, f64, f64, f64)) -> f64| per_pair.iter().map(f).fold(0.0, f64::max);
    let recon = max_of(|r| r.0);
    let bony = max_of(|r| r.1);
    let ortho = max_of(|r| r.2);
    let high = max_of(|r| r.3);
    let g2 = GridSpec::new(2 * k)?;
    let commutator_constant = (
        commutator_constant_probe(&spec, grid, trials)?,
        commutator_constant_probe(&spec, g2, trials)?,
    );
    let regularity_constant = (
        dyadic_regularity_probe(&spec, grid, trials, 1.0)?,
        dyadic_regularity_probe(&spec, g2, trials, 1.0)?,
    );
    let probe = spec.sample(grid, 0)?;
    let wsp_h_ratio = [0.0, 1.0, 2.0]
        .iter()
        .map(|&s| (s, wsp_norm(&probe, s, 2.0) / probe.sobolev(s)))
        .collect();
    let stable = |(a, b): (f64, f64)| (b / a - 1.0).abs();
    let checks = vec![
        LpCheck { id: "reconstruction", pass: recon <= 1e-12, value: recon, tolerance: 1e-12 },
        LpCheck { id: "bony_identity", pass: bony <= 1e-12, value: bony, tolerance: 1e-12 },
        LpCheck { id: "almost_orthogonality", pass: ortho == 0.0, value: ortho, tolerance: 0.0 },
        LpCheck { id: "high_high_support", pass: high == 0.0, value: high, tolerance: 0.0 },
        LpCheck {
            id: "commutator_constant_stability",
            pass: stable(commutator_constant) <= 0.2,
            value: stable(commutator_constant),
            tolerance: 0.2,
        },
        LpCheck {
            id: "regularity_constant_stability",
            pass: stable(regularity_constant) <= 0.2,
            value: stable(regularity_constant),
            tolerance: 0.2,
        },
    ];
    Ok(LpReport {
        checks,
        commutator_constant,
        regularity_constant,
        wsp_h_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Complex;
    use proptest::prelude::*;

    #[test]
    fn bump_support() {
        assert_eq!(phi(0.75), 0.0);
        assert_eq!(phi(8.0 / 3.0), 0.0);
        assert_eq!(phi(0.5), 0.0);
        assert_eq!(phi(3.0), 0.0);
        assert!(phi(0.76) > 0.0 && phi(2.6) > 0.0);
        assert_eq!(chi(0.7), 1.0);
        assert_eq!(chi(1.4), 0.0);
    }

    #[test]
    fn mode_one_blocks() {
        let blocks: Vec<i32> = (-6..6).filter(|&q| block_weight(1, q) != 0.0).collect();
        assert_eq!(blocks, vec![-1, 0]);
    }

    #[test]
    fn block_ranges() {
        assert_eq!(block_range(1), (-1, 0));
        assert_eq!(block_range(32), (-1, 5));
        assert_eq!(block_range(48), (-1, 5));
        assert_eq!(block_range(49), (-1, 6));
        for k in [1usize, 5, 16, 64, 100] {
            let (lo, hi) = block_range(k);
            let touched: Vec<i32> = (-10..12)
                .filter(|&q| (1..=k as i64).any(|n| block_weight(n, q) != 0.0))
                .collect();
            assert_eq!(touched.first(), Some(&lo));
            assert_eq!(touched.last(), Some(&hi));
            assert!(DyadicFilter::new(k).partition_defect() <= 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn low_pass_examples() {
        let g = GridSpec::new(8).unwrap();
        let u = &SpectralField::cosine(g, 1, 1.0).unwrap() + &SpectralField::cosine(g, 8, 1.0).unwrap();
        let s = s_q(&u, 2);
        assert_eq!(s, SpectralField::cosine(g, 1, 1.0).unwrap());
        assert_eq!(s_q(&u, 20), u);
        assert!(s_q(&u, -1).is_zero());
        assert!(delta_q(&SpectralField::zeros(g), 1).is_zero());
    }

    #[test]
    fn shifted_low_pass_breaks_orthogonality() {
        // Delta_q(S_{q'} a Delta_{q'} b) need not vanish for q < q' - 4:
        // S_{q'} reaches high enough to cancel the block of b down to mode 1.
        let g = GridSpec::new(64).unwrap();
        let a = SpectralField::cosine(g, 41, 1.0).unwrap();
        let b = SpectralField::cosine(g, 40, 1.0).unwrap();
        let p = product_by_convolution(&s_q(&a, 5), &delta_q(&b, 5)).unwrap();
        assert!(low_pass_weight(41, 5) > 0.0 && block_weight(40, 5) > 0.0);
        let leak = delta_q(&p, -1).wiener(0.0);
        assert!(leak > 1e-9, "{leak:e}");
        assert_eq!(orthogonality_residual(&a, &b, -1, 5).unwrap(), 0.0);
    }

    #[test]
    fn commutator_examples() {
        let g = GridSpec::new(8).unwrap();
        let c = SpectralField::cosine(g, 3, 1.0).unwrap();
        let z = SpectralField::zeros(g);
        assert!(dyadic_commutator(1, &z, &c).unwrap().is_zero());
        // Brute force for a = b = cos 3x: cos^2 3x = 1/2 + cos(6x)/2.
        let direct = dyadic_commutator(2, &c, &c).unwrap();
        let sq = pointwise_product(&c, &c).unwrap();
        let expected = &delta_q(&sq, 2) - &pointwise_product(&c, &delta_q(&c, 2)).unwrap();
        assert_eq!(direct, expected);
        let w6 = block_weight(6, 2);
        let w3 = block_weight(3, 2);
        let brute = SpectralField::cosine(sq.grid(), 6, 0.5 * (w6 - w3)).unwrap();
        let mean_part = -0.5 * w3 * (2.0 * std::f64::consts::PI).sqrt();
        assert!((direct.coeff(0).re - mean_part).abs() < 1e-14);
        assert!((direct.coeff(6) - brute.coeff(6)).norm() < 1e-14);
    }

    #[test]
    fn wsp_homogeneity_and_zero() {
        let g = GridSpec::new(16).unwrap();
        let u = EnsembleSpec::new(3).sample(g, 0).unwrap();
        assert_eq!(wsp_norm(&SpectralField::zeros(g), 1.0, 3.0), 0.0);
        for p in [1.0, 2.0, 4.0] {
            let a = wsp_norm(&u, 0.5, p);
            assert!((wsp_norm(&u.scale(2.0), 0.5, p) / a - 2.0).abs() < 1e-12);
        }
        let c = SpectralField::cosine(g, 1, 1.0).unwrap();
        let ratios: Vec<f64> = [0.0, 1.0, 2.0].iter().map(|&s| wsp_norm(&c, s, 2.0) / c.sobolev(s)).collect();
        for r in &ratios {
            assert!(*r > 0.25 && *r <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn bony_zero_and_single_pair() {
        let g = GridSpec::new(16).unwrap();
        let spec = EnsembleSpec::new(11);
        let v = spec.sample(g, 1).unwrap();
        let z = SpectralField::zeros(g);
        let t = bony_terms(&z, &v, 2).unwrap();
        for f in [&t.paraproduct, &t.commutator, &t.correction, &t.remainder] {
            assert!(f.is_zero());
        }
        let u = spec.sample(g, 0).unwrap();
        for q in -1..=6 {
            assert!(bony_terms(&u, &v, q).unwrap().defect() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn convolution_product_matches_fft(coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..24)) {
            let g = GridSpec::new(coeffs.len() / 2).unwrap();
            let h = coeffs.len() / 2;
            let a: Vec<Complex> = coeffs[..h].iter().map(|&(x, y)| Complex::new(x, y)).collect();
            let b: Vec<Complex> = coeffs[h..2 * h].iter().map(|&(x, y)| Complex::new(y, x)).collect();
            let a = SpectralField::from_positive_modes(g, &a).unwrap();
            let b = SpectralField::from_positive_modes(g, &b).unwrap();
            let d = (&product_by_convolution(&a, &b).unwrap() - &pointwise_product(&a, &b).unwrap()).wiener(0.0);
            prop_assert!(d <= 1e-13);
        }

        #[test]
        fn reconstruction(coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40)) {
            let g = GridSpec::new(coeffs.len()).unwrap();
            let modes: Vec<Complex> = coeffs.iter().map(|&(a, b)| Complex::new(a, b)).collect();
            let u = SpectralField::from_positive_modes(g, &modes).unwrap();
            let (lo, hi) = block_range(g.band_limit());
            let mut sum = SpectralField::zeros(g);
            for q in lo..=hi {
                sum = &sum + &delta_q(&u, q);
            }
            prop_assert!((&sum - &u).wiener(0.0) <= 1e-12);
            prop_assert!((&s_q(&u, hi + 1) - &u).wiener(0.0) <= 1e-12);
        }
    }
}
