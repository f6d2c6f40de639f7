//! Integer symbols of the quadratic nonlinearity.
//!
//! Indexing: `k` is the output mode, `n` the summation index and `k - n` the
//! partner mode, so that the Fourier coefficient of the right-hand side is
//! `(2pi)^{-1/2} sum_n f^(n) f^(k-n) [sigma1(k,n) + nu sigma3(k,n)]`.

use rayon::prelude::*;
use serde::Serialize;

/// Gravity symbol `|k||k-n| - k(k-n)`.
pub fn sigma1(k: i64, n: i64) -> i64 {
    let p = k - n;
    k.abs() * p.abs() - k * p
}

/// Capillary symbol `|k||k-n|^3 - k(k-n)^3`.
pub fn sigma3(k: i64, n: i64) -> i128 {
    let (k, p) = (k as i128, (k - n) as i128);
    k.abs() * p.abs().pow(3) - k * p.pow(3)
}

/// Both symbols evaluated at one `(k, n)` pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymbolPair {
    pub k: i64,
    pub n: i64,
    pub sigma1: i64,
    pub sigma3: i128,
}

impl SymbolPair {
    pub fn new(k: i64, n: i64) -> Self {
        SymbolPair {
            k,
            n,
            sigma1: sigma1(k, n),
            sigma3: sigma3(k, n),
        }
    }

    /// `k` and `k - n` are both nonzero with opposite signs; equivalently
    /// `0 < |k| < |n|` with `k` and `n` of the same sign.
    pub fn on_support(&self) -> bool {
        self.k * (self.k - self.n) < 0
    }
}

pub const SYMBOL_KMAX_LIMIT: i64 = 4096;

/// Outcome of one exhaustive inequality check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    pub id: &'static str,
    pub kmax: i64,
    pub pass: bool,
    /// Largest `lhs / rhs` seen (1 is the boundary); for the support check,
    /// the fraction of pairs that misbehave.
    pub worst_ratio: f64,
    pub violations: u64,
    pub first_counterexample: Option<(i64, i64)>,
}

#[derive(Clone, Copy, Default)]
struct Tally {
    worst: f64,
    violations: u64,
    first: Option<(i64, i64)>,
}

impl Tally {
    fn record(&mut self, k: i64, n: i64, lhs: i128, rhs: i128) {
        if rhs > 0 {
            self.worst = self.worst.max(lhs as f64 / rhs as f64);
        } else if lhs > 0 {
            self.worst = f64::INFINITY;
        }
        if lhs > rhs {
            self.flag(k, n);
        }
    }

    fn flag(&mut self, k: i64, n: i64) {
        self.violations += 1;
        self.first = match self.first {
            Some(prev) if prev <= (k, n) => Some(prev),
            _ => Some((k, n)),
        };
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.worst = self.worst.max(other.worst);
        self.violations += other.violations;
        self.first = match (self.first, other.first) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self
    }
}

const IDS: [&str; 4] = ["support", "comm_fourier", "a1_estimate", "capillary"];

fn check_row(k: i64, kmax: i64) -> [Tally; 4] {
    let mut t = [Tally::default(); 4];
    for n in -kmax..=kmax {
        if n == 0 {
            continue;
        }
        let s = SymbolPair::new(k, n);
        let (k_, n_, p_) = (k as i128, n as i128, (k - n) as i128);
        let same_sign = (k > 0) == (n > 0);
        let characterized = k.abs() < n.abs() && same_sign;
        let expected = if characterized {
            2 * k_.abs() * p_.abs()
        } else {
            0
        };
        if s.on_support() != characterized
            || (s.sigma1 != 0) != characterized
            || s.sigma1 as i128 != expected
            || (s.sigma3 != 0) != characterized
        {
            t[0].flag(k, n);
        }
        let s1 = s.sigma1 as i128;
        t[1].record(k, n, s1, 2 * n_.abs() * p_.abs());
        t[2].record(k, n, (k_ * s1).abs(), 2 * n_ * n_ * p_.abs());
        t[3].record(k, n, (k_ * s.sigma3).abs(), 2 * n_ * n_ * p_.abs().pow(3));
    }
    t
}

/// Exhaustively checks, over `0 < |k|, |n| <= kmax`:
///
/// * `support`: `sigma1 != 0` exactly when `0 < |k| < |n|` with `sgn k = sgn n`,
///   where it equals `2|k||k-n|` (and `sigma3` shares the support);
/// * `comm_fourier`: `sigma1 <= 2|n||k-n|`;
/// * `a1_estimate`: `|k sigma1| <= 2 n^2 |k-n|`;
/// * `capillary`: `|k sigma3| <= 2 n^2 |k-n|^3`.
///
/// Rows of `k` are processed in parallel. `kmax` is clamped to
/// [`SYMBOL_KMAX_LIMIT`], within which all products fit in `i128`.
pub fn verify_symbol_bounds(kmax: i64) -> Vec<InequalityReport> {
    let kmax = kmax.clamp(1, SYMBOL_KMAX_LIMIT);
    let tallies = (-kmax..=kmax)
        .into_par_iter()
        .filter(|&k| k != 0)
        .map(|k| check_row(k, kmax))
        .reduce(
            || [Tally::default(); 4],
            |a, b| {
                let mut out = a;
                for i in 0..4 {
                    out[i] = a[i].merge(b[i]);
                }
                out
            },
        );
    let pairs = (2 * kmax as u64).pow(2);
    IDS.iter()
        .zip(tallies)
        .enumerate()
        .map(|(i, (id, t))| InequalityReport {
            id,
            kmax,
            pass: t.violations == 0,
            worst_ratio: if i == 0 {
                t.violations as f64 / pairs as f64
            } else {
                t.worst
            },
            violations: t.violations,
            first_counterexample: t.first,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_values() {
        assert_eq!(sigma1(1, 2), 2);
        assert_eq!(sigma1(3, 1), 0);
        assert_eq!(sigma1(-1, -3), 4);
        assert_eq!(sigma3(1, 2), 2);
        assert_eq!(sigma3(-1, -3), 16);
        assert_eq!(sigma3(2, 1), 0);
    }

    #[test]
    fn small_exhaustive_check_passes_with_tight_bounds() {
        let reports = verify_symbol_bounds(32);
        assert_eq!(reports.len(), 4);
        for r in &reports {
            assert!(r.pass, "{r:?}");
            assert_eq!(r.first_counterexample, None);
        }
        // On the support |k sigma1| / (2 n^2 |k-n|) = k^2 / n^2, largest at
        // (k, n) = (31, 32).
        assert_eq!(reports[0].worst_ratio, 0.0);
        assert!(reports[2].worst_ratio < 1.0 && reports[2].worst_ratio > 0.9);
    }

    #[test]
    fn tally_tracks_lexicographic_first() {
        let mut t = Tally::default();
        t.record(5, 1, 3, 2);
        t.record(-2, 7, 3, 2);
        t.record(4, 4, 1, 2);
        assert_eq!(t.violations, 2);
        assert_eq!(t.first, Some((-2, 7)));
        assert_eq!(t.worst, 1.5);
    }

    proptest! {
        #[test]
        fn sigma1_closed_form(k in -2000i64..2000, n in -2000i64..2000) {
            let s = SymbolPair::new(k, n);
            let opposite = k != 0 && k != n && (k > 0) != (k - n > 0);
            prop_assert_eq!(s.on_support(), opposite);
            let expected = if opposite { 2 * k.abs() * (k - n).abs() } else { 0 };
            prop_assert_eq!(s.sigma1, expected);
            prop_assert!(s.sigma1 >= 0 && s.sigma3 >= 0);
        }

        #[test]
        fn symbols_are_even(k in -2000i64..2000, n in -2000i64..2000) {
            prop_assert_eq!(sigma1(-k, -n), sigma1(k, n));
            prop_assert_eq!(sigma3(-k, -n), sigma3(k, n));
        }
    }
}
