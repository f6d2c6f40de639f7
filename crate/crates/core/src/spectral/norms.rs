use serde::Serialize;

use super::{derivative, SpectralField};

/// Scalar norms of one field. Wiener and Sobolev norms are homogeneous and
/// sum over all of `Z` (both signs of `n`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormReport {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    /// Strip half-width `nu_a` used for `a1_strip`.
    pub strip: f64,
    /// `sum |n| e^{nu_a |n|} |f^(n)|`.
    pub a1_strip: f64,
    /// `(order, homogeneous H^order norm)` for each requested order.
    pub sobolev: Vec<(f64, f64)>,
    pub l2: f64,
    pub linf: f64,
    pub max_f: f64,
    pub min_f: f64,
    pub linf_dxf: f64,
}

impl NormReport {
    pub fn sobolev_order(&self, order: f64) -> Option<f64> {
        self.sobolev
            .iter()
            .find(|(s, _)| *s == order)
            .map(|(_, v)| *v)
    }
}

/// Location and value of the extrema of a field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extrema {
    pub max: f64,
    pub argmax: f64,
    pub min: f64,
    pub argmin: f64,
}

impl Extrema {
    pub fn linf(&self) -> f64 {
        self.max.abs().max(self.min.abs())
    }
}

fn weight_pow(n: usize, alpha: f64) -> f64 {
    if alpha == 0.0 {
        1.0
    } else if n == 0 {
        0.0
    } else {
        (n as f64).powf(alpha)
    }
}

impl SpectralField {
    /// `A^alpha = sum_n |n|^alpha |f^(n)|`. Mode 0 only counts for `alpha = 0`.
    pub fn wiener(&self, alpha: f64) -> f64 {
        self.wiener_weighted(alpha, 0.0)
    }

    /// `A^alpha_nu = sum_n |n|^alpha e^{nu |n|} |f^(n)|`.
    pub fn wiener_weighted(&self, alpha: f64, nu: f64) -> f64 {
        let c = self.half_spectrum();
        let mut acc = weight_pow(0, alpha) * c[0].norm();
        for (n, z) in c.iter().enumerate().skip(1) {
            let a = z.norm();
            if a != 0.0 {
                acc += 2.0 * weight_pow(n, alpha) * (nu * n as f64).exp() * a;
            }
        }
        acc
    }

    /// Homogeneous `H^alpha` norm `(sum_n |n|^{2 alpha} |f^(n)|^2)^{1/2}`.
    pub fn sobolev(&self, alpha: f64) -> f64 {
        self.sobolev_sq(alpha).sqrt()
    }

    pub fn sobolev_sq(&self, alpha: f64) -> f64 {
        let c = self.half_spectrum();
        let mut acc = weight_pow(0, 2.0 * alpha) * c[0].norm_sqr();
        for (n, z) in c.iter().enumerate().skip(1) {
            acc += 2.0 * weight_pow(n, 2.0 * alpha) * z.norm_sqr();
        }
        acc
    }

    pub fn l2(&self) -> f64 {
        self.sobolev(0.0)
    }

    /// Extrema from `max(8K, 64)` samples refined by golden-section search
    /// to `1e-10` in `x`.
    pub fn extrema(&self) -> Extrema {
        let m = (8 * self.band_limit()).max(64);
        let samples = self.sample(m);
        let h = 2.0 * std::f64::consts::PI / m as f64;
        let node = |j: usize| -std::f64::consts::PI + h * j as f64;
        let (mut jmax, mut jmin) = (0, 0);
        for (j, v) in samples.iter().enumerate() {
            if *v > samples[jmax] {
                jmax = j;
            }
            if *v < samples[jmin] {
                jmin = j;
            }
        }
        let (argmax, max) = refine(
            |x| self.eval_derivative_at(x, 0),
            |x, k| self.eval_derivative_at(x, k),
            node(jmax),
            h,
            samples[jmax],
        );
        let neg = |x, k| -self.eval_derivative_at(x, k);
        let (argmin, neg_min) = refine(|x| neg(x, 0), neg, node(jmin), h, -samples[jmin]);
        Extrema {
            max,
            argmax,
            min: -neg_min,
            argmin,
        }
    }
}

/// Golden-section maximization of `g` on `[x0 - h, x0 + h]` followed by a
/// Newton polish on `g'` (value comparisons alone stall near `sqrt(eps)` in
/// `x` at a smooth peak). `dg(x, k)` is the `k`-th derivative. Never returns
/// less than the seed value `g0 = g(x0)`.
fn refine(
    g: impl Fn(f64) -> f64,
    dg: impl Fn(f64, u32) -> f64,
    x0: f64,
    h: f64,
    g0: f64,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (x0 - h, x0 + h);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while b - a > 1e-10 {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..4 {
        let curv = dg(x, 2);
        if curv >= 0.0 {
            break;
        }
        let next = x - dg(x, 1) / curv;
        if (next - x0).abs() > h {
            break;
        }
        x = next;
    }
    let gx = g(x);
    if gx >= g0 {
        (x, gx)
    } else {
        (x0, g0)
    }
}

/// Full norm report at strip width `strip` and the given Sobolev orders.
pub fn norms(f: &SpectralField, strip: f64, sobolev_orders: &[f64]) -> NormReport {
    let ext = f.extrema();
    let dx = derivative(f, 1).extrema();
    NormReport {
        a0: f.wiener(0.0),
        a1: f.wiener(1.0),
        a2: f.wiener(2.0),
        strip,
        a1_strip: f.wiener_weighted(1.0, strip),
        sobolev: sobolev_orders.iter().map(|&s| (s, f.sobolev(s))).collect(),
        l2: f.l2(),
        linf: ext.linf(),
        max_f: ext.max,
        min_f: ext.min,
        linf_dxf: dx.linf(),
    }
}
