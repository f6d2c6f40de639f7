//! Power-series construction `f_R = lambda sum_{l<=R} lambda^l f^(l)` for the
//! gravity equation, with each term solving a forced linear problem
//!
//! `f^(l)_t + Lambda f^(l) = sum_{j<l} B(f^(j), f^(l-1-j))`, `f^(l)(0) = 0`,
//!
//! seeded by `f^(0) = e^{-t Lambda} f_0 / lambda`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolve::{evolve, SolverConfig};
use crate::nonlinearity::bilinear_gravity_into;
use crate::spectral::{Complex, GridSpec, SpectralField};

/// Stored terms of the series on a uniform time grid over `[0, T*]`.
#[derive(Clone, Debug)]
pub struct SeriesExpansion {
    pub lambda: f64,
    pub order: usize,
    pub t_star: f64,
    pub time_grid: Vec<f64>,
    /// `terms[l][i]` is `f^(l)` at `time_grid[i]`.
    pub terms: Vec<Vec<SpectralField>>,
    grid: GridSpec,
}

pub const MAX_CATALAN_INDEX: usize = 30;

/// Catalan numbers by `C_l = sum_{j<l} C_j C_{l-1-j}`, `C_0 = 1`.
pub fn catalan(l: usize) -> Result<u64> {
    if l > MAX_CATALAN_INDEX {
        return Err(Error::InvalidInput(format!(
            "Catalan index {l} exceeds {MAX_CATALAN_INDEX}"
        )));
    }
    let mut c = vec![1u64; l + 1];
    for m in 1..=l {
        c[m] = (0..m).map(|j| c[j] * c[m - 1 - j]).sum();
    }
    Ok(c[l])
}

/// `f^(0)` at each node: coefficients `e^{-t|n|} f_0^(n) / lambda`.
pub fn ck_zero_term(
    f0: &SpectralField,
    lambda: f64,
    time_grid: &[f64],
) -> Result<Vec<SpectralField>> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidInput(format!(
            "scale factor {lambda} must be positive"
        )));
    }
    Ok(time_grid
        .iter()
        .map(|&t| {
            f0.map_real_multiplier(|n| (-t * n.abs() as f64).exp() / lambda)
                .project_mean_zero()
        })
        .collect())
}

impl SeriesExpansion {
    /// Scale factor `lambda = ||f_0||_{A^1_1}`, horizon `T* = horizon / (4 lambda)`
    /// with `horizon = 4 lambda T*` in `(0, 1)`, `m` time intervals and terms
    /// up to order `r`.
    pub fn build(f0: &SpectralField, r: usize, m: usize, horizon: f64) -> Result<Self> {
        if m < 2 || m % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "time grid needs an even number of intervals, got {m}"
            )));
        }
        if !(horizon > 0.0 && horizon < 1.0) {
            return Err(Error::InvalidInput(format!(
                "4 lambda T* = {horizon} must lie in (0, 1)"
            )));
        }
        let f0 = f0.clone().project_mean_zero();
        let lambda = f0.wiener_weighted(1.0, 1.0);
        if lambda == 0.0 {
            return Err(Error::InvalidInput("series needs nonzero data".into()));
        }
        let t_star = horizon / (4.0 * lambda);
        let time_grid: Vec<f64> = (0..=m).map(|i| t_star * i as f64 / m as f64).collect();
        let zero = ck_zero_term(&f0, lambda, &time_grid)?;
        let mut exp = SeriesExpansion {
            lambda,
            order: 0,
            t_star,
            time_grid,
            terms: vec![zero],
            grid: f0.grid(),
        };
        for l in 1..=r {
            ck_recurse(&mut exp, l)?;
        }
        Ok(exp)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn step(&self) -> f64 {
        self.time_grid[1] - self.time_grid[0]
    }

    pub fn node_index(&self, t: f64) -> Result<usize> {
        let h = self.step();
        let i = (t / h).round();
        if i < 0.0 || i as usize >= self.time_grid.len() || (i * h - t).abs() > 1e-9 * h {
            return Err(Error::OffGrid { t });
        }
        Ok(i as usize)
    }

    /// `lambda sum_{l<=r} lambda^l f^(l)(t)` for `r <= order`.
    pub fn partial_sum(&self, t: f64, r: usize) -> Result<SpectralField> {
        let i = self.node_index(t)?;
        let r = r.min(self.order);
        let mut acc = SpectralField::zeros(self.grid);
        let mut w = self.lambda;
        for l in 0..=r {
            acc = &acc + &self.terms[l][i].scale(w);
            w *= self.lambda;
        }
        Ok(acc)
    }

    /// `||lambda^{l+1} f^(l)(t)||_{A^1_1}` for each stored `l`.
    pub fn term_norms(&self, t: f64) -> Result<Vec<f64>> {
        let i = self.node_index(t)?;
        Ok((0..=self.order)
            .map(|l| self.lambda.powi(l as i32 + 1) * self.terms[l][i].wiener_weighted(1.0, 1.0))
            .collect())
    }

    /// Geometric tail `(lambda / 2) sum_{l > R} (4 lambda t)^l`.
    pub fn tail_bound(&self, t: f64) -> f64 {
        let q = 4.0 * self.lambda * t;
        0.5 * self.lambda * q.powi(self.order as i32 + 1) / (1.0 - q)
    }

    /// Bound on `||f_R(t)||_{A^1_1}`:
    /// `||f_0||_{A^1_1} + (lambda / 2) (4 lambda t) / (1 - 4 lambda t)`.
    pub fn strip_bound(&self, t: f64) -> f64 {
        let q = 4.0 * self.lambda * t;
        self.lambda + 0.5 * self.lambda * q / (1.0 - q)
    }
}

/// Fills in term `l` from terms `0..l` by the recursive trapezoid rule
/// `I_{i+1} = e^{-h|k|} I_i + (h/2) (e^{-h|k|} F_i + F_{i+1})`.
pub fn ck_recurse(exp: &mut SeriesExpansion, l: usize) -> Result<()> {
    if l == 0 || exp.terms.len() != l {
        return Err(Error::InvalidInput(format!(
            "term {l} requires exactly terms 0..{l} to be present ({} stored)",
            exp.terms.len()
        )));
    }
    let k = exp.grid.band_limit();
    let terms = &exp.terms;
    let forcing: Vec<Vec<Complex>> = (0..exp.time_grid.len())
        .into_par_iter()
        .map(|i| {
            let mut out = vec![Complex::new(0.0, 0.0); k + 1];
            for j in 0..l {
                bilinear_gravity_into(
                    terms[j][i].half_spectrum(),
                    terms[l - 1 - j][i].half_spectrum(),
                    &mut out,
                );
            }
            out
        })
        .collect();
    let h = exp.step();
    let decay: Vec<f64> = (0..=k).map(|n| (-h * n as f64).exp()).collect();
    let mut current = vec![Complex::new(0.0, 0.0); k + 1];
    let mut term = Vec::with_capacity(forcing.len());
    term.push(SpectralField::zeros(exp.grid));
    for i in 0..forcing.len() - 1 {
        for n in 1..=k {
            current[n] =
                decay[n] * current[n] + 0.5 * h * (decay[n] * forcing[i][n] + forcing[i + 1][n]);
        }
        term.push(SpectralField::from_positive_modes(exp.grid, &current[1..])?);
    }
    exp.terms.push(term);
    exp.order = l;
    Ok(())
}

/// Per-node comparison of `A_l = 2 ||f^(l)(t)||_{A^1_{R-l+1}}` with `C_l t^l`.
#[derive(Clone, Debug, Serialize)]
pub struct CatalanRow {
    pub l: usize,
    pub t: f64,
    pub a_raw: f64,
    /// `A_l / A_0(0)^{l+1}`, the quantity the majorant controls.
    pub a_normalized: f64,
    pub majorant: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalanReport {
    /// `A_0(0) = 2 ||f_0||_{A^1_{R+1}} / lambda`.
    pub a0_initial: f64,
    pub rows: Vec<CatalanRow>,
    pub all_pass: bool,
    /// Whether the unnormalized `A_l <= C_l t^l` also holds everywhere.
    pub raw_all_pass: bool,
}

/// The induction gives `A_l(t) <= C_l A_0^{l+1} t^l` once `A_0(s) <= A_0` on
/// `[0, t]`; since `A_0(s)` is nonincreasing, `A_0 = A_0(0)` works.
pub fn catalan_bound_check(exp: &SeriesExpansion) -> Result<CatalanReport> {
    let r = exp.order;
    let strip = |l: usize| (r - l + 1) as f64;
    let a_of = |l: usize, i: usize| 2.0 * exp.terms[l][i].wiener_weighted(1.0, strip(l));
    let a0 = a_of(0, 0);
    let mut rows = Vec::new();
    for l in 0..=r {
        let c = catalan(l)? as f64;
        for (i, &t) in exp.time_grid.iter().enumerate() {
            let a_raw = a_of(l, i);
            let a_normalized = a_raw / a0.powi(l as i32 + 1);
            let majorant = c * t.powi(l as i32);
            rows.push(CatalanRow {
                l,
                t,
                a_raw,
                a_normalized,
                majorant,
                pass: a_normalized <= majorant * (1.0 + 1e-12),
            });
        }
    }
    let all_pass = rows.iter().all(|r| r.pass);
    let raw_all_pass = rows.iter().all(|r| r.a_raw <= r.majorant * (1.0 + 1e-12));
    Ok(CatalanReport {
        a0_initial: a0,
        rows,
        all_pass,
        raw_all_pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareRow {
    pub t: f64,
    pub a1_series: f64,
    pub a1_evolve: f64,
    /// `||f_R(t) - f(t)||_{A^1} / ||f_0||_{A^1}`.
    pub rel_diff: f64,
    pub tail_bound: f64,
}

pub const COMPARE_CSV_HEADER: &str = "t,a1_series,a1_evolve,rel_diff,tail_bound";

/// Series against the time stepper at `dt = T*/M` on `[0, T*/2]`.
pub fn ck_compare(exp: &SeriesExpansion, f0: &SpectralField) -> Result<Vec<CompareRow>> {
    let m = exp.time_grid.len() - 1;
    let half = m / 2;
    let mut cfg = SolverConfig::new(0.0, exp.step(), exp.time_grid[half], exp.grid);
    cfg.snapshot_stride = 1;
    cfg.blowup_a1_threshold = f64::MAX;
    let traj = evolve(f0, &cfg)?;
    if traj.snapshots.len() != half + 1 {
        return Err(Error::InsufficientSnapshots(format!(
            "time stepper stopped after {} of {} steps",
            traj.snapshots.len() - 1,
            half
        )));
    }
    let a1_0 = f0.wiener(1.0);
    (0..=half)
        .map(|i| {
            let t = exp.time_grid[i];
            let series = exp.partial_sum(t, exp.order)?;
            let stepped = &traj.snapshots[i].1;
            let diff = (&series - stepped).wiener(1.0);
            Ok(CompareRow {
                t,
                a1_series: series.wiener(1.0),
                a1_evolve: stepped.wiener(1.0),
                rel_diff: if a1_0 > 0.0 { diff / a1_0 } else { diff },
                tail_bound: exp.tail_bound(t),
            })
        })
        .collect()
}

/// Largest `A^1` gap between expansions at `m` and `m / 2` intervals over
/// the shared nodes, an estimate of the time-quadrature error.
pub fn quadrature_error_estimate(
    f0: &SpectralField,
    r: usize,
    m: usize,
    horizon: f64,
) -> Result<f64> {
    let fine = SeriesExpansion::build(f0, r, m, horizon)?;
    let coarse = SeriesExpansion::build(f0, r, m / 2, horizon)?;
    let mut worst: f64 = 0.0;
    for &t in &coarse.time_grid {
        let d = (&fine.partial_sum(t, r)? - &coarse.partial_sum(t, r)?).wiener(1.0);
        worst = worst.max(d);
    }
    Ok(worst)
}
