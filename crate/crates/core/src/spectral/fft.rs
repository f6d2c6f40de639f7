//! Thin wrappers over `rustfft` with a per-thread planner.
//!
//! Sample points are `x_j = x0 + 2*pi*j/M`; coefficients follow the
//! unitary convention `f(x) = (2pi)^{-1/2} sum_n c_n e^{inx}`.

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::FftPlanner;

use super::Complex;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn forward_in_place(buf: &mut [Complex]) {
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    plan.process(buf);
}

fn inverse_in_place(buf: &mut [Complex]) {
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    plan.process(buf);
}

/// Evaluate the real field with nonnegative-mode coefficients `half`
/// (index = wavenumber) at `m` equispaced points starting at `x0`.
pub(crate) fn synthesize(half: &[Complex], m: usize, x0: f64) -> Vec<f64> {
    let band = half.len().saturating_sub(1);
    assert!(m > 2 * band, "synthesis on {m} points aliases band {band}");
    let norm = (2.0 * PI).sqrt().recip();
    let mut buf = vec![Complex::new(0.0, 0.0); m];
    buf[0] = half[0] * norm;
    for (n, c) in half.iter().enumerate().skip(1) {
        let shifted = c * Complex::from_polar(norm, n as f64 * x0);
        buf[n] = shifted;
        buf[m - n] = shifted.conj();
    }
    inverse_in_place(&mut buf);
    buf.into_iter().map(|z| z.re).collect()
}

/// Project `samples` (taken at `x0 + 2*pi*j/M`) onto modes `0..=band`.
pub(crate) fn analyze(samples: &[f64], x0: f64, band: usize) -> Vec<Complex> {
    let m = samples.len();
    assert!(m > band, "cannot resolve band {band} from {m} samples");
    let mut buf: Vec<Complex> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    forward_in_place(&mut buf);
    let scale = (2.0 * PI).sqrt() / m as f64;
    (0..=band)
        .map(|n| {
            let c = buf[n] * Complex::from_polar(scale, -(n as f64) * x0);
            if n == 0 {
                Complex::new(c.re, 0.0)
            } else {
                c
            }
        })
        .collect()
}

/// Smallest integer `>= min` whose only prime factors are 2, 3 and 5.
pub fn fast_len(min: usize) -> usize {
    let mut n = min.max(1);
    loop {
        let mut r = n;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return n;
        }
        n += 1;
    }
}

pub(crate) fn is_fast_len(n: usize) -> bool {
    fast_len(n) == n
}
