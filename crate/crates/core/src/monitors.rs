//! Decay and energy inequalities checked along computed trajectories.
//!
//! Every check first evaluates its hypothesis gate. When the gate fails, or
//! the run stopped early, the verdict is recorded as not applicable and
//! carries no pass/fail claim.

use rayon::prelude::*;
use serde::Serialize;

use crate::ensemble::EnsembleSpec;
use crate::error::{Error, Result};
use crate::evolve::{evolve, linear_propagator, SolverConfig, Trajectory, DISSIPATION_ORDERS};
use crate::nonlinearity::{rhs_pseudospectral, trilinear_m_fourier, trilinear_n_fourier};
use crate::spectral::{GridSpec, SpectralField};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonitorVerdict {
    pub id: &'static str,
    pub applicable: bool,
    /// `None` whenever `applicable` is false.
    pub passed: Option<bool>,
    /// Minimum over time of RHS - LHS.
    pub worst_margin: f64,
    pub first_violation_t: Option<f64>,
    pub tolerance: f64,
    pub gates: Vec<(String, f64)>,
    pub extras: Vec<(String, f64)>,
}

impl MonitorVerdict {
    fn new(id: &'static str, tolerance: f64) -> Self {
        MonitorVerdict {
            id,
            applicable: false,
            passed: None,
            worst_margin: f64::INFINITY,
            first_violation_t: None,
            tolerance,
            gates: Vec::new(),
            extras: Vec::new(),
        }
    }

    fn gate(mut self, name: &str, value: f64) -> Self {
        self.gates.push((name.to_string(), value));
        self
    }

    fn extra(&mut self, name: &str, value: f64) {
        self.extras.push((name.to_string(), value));
    }

    /// Folds one time sample: `margin` is RHS - LHS, `allowed` the slack.
    fn observe(&mut self, t: f64, margin: f64, allowed: f64) {
        self.worst_margin = self.worst_margin.min(margin);
        let ok = margin >= -allowed;
        if !ok && self.first_violation_t.is_none() {
            self.first_violation_t = Some(t);
        }
    }

    fn conclude(mut self) -> Self {
        if self.applicable {
            self.passed = Some(self.first_violation_t.is_none() && self.worst_margin.is_finite());
        } else {
            self.passed = None;
            self.worst_margin = f64::NAN;
            self.first_violation_t = None;
        }
        self
    }

    /// Applicable and failed.
    pub fn failed(&self) -> bool {
        self.passed == Some(false)
    }

    pub fn report_line(&self) -> String {
        let status = match self.passed {
            None => "n/a",
            Some(true) => "pass",
            Some(false) => "FAIL",
        };
        let mut s = format!(
            "{:<22} {:<4} margin={:.6e} tol={:.1e}",
            self.id, status, self.worst_margin, self.tolerance
        );
        if let Some(t) = self.first_violation_t {
            s.push_str(&format!(" first_violation_t={t}"));
        }
        for (k, v) in self.gates.iter().chain(&self.extras) {
            s.push_str(&format!(" {k}={v:.6e}"));
        }
        s
    }
}

/// Tolerances and constant proxies for the monitors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct MonitorConfig {
    pub max_principle_tol: f64,
    pub a1_tol: f64,
    pub a0_tol: f64,
    pub energy_tol: f64,
    /// Smallness threshold on `sup_t ||f||_{H^{3/2}}` for the `L^2` estimate.
    pub l2_h32_threshold: f64,
    /// Proxy for the constant in the `H^{3/2}` smallness condition.
    pub h32_constant: f64,
    pub epsilon: f64,
    /// Proxy for `1/C` in the `H^2` smallness condition.
    pub h2_constant: f64,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig {
            max_principle_tol: 1e-6,
            a1_tol: 1e-8,
            a0_tol: 1e-6,
            energy_tol: 1e-8,
            l2_h32_threshold: 0.1,
            h32_constant: 10.0,
            epsilon: 0.5,
            h2_constant: 0.05,
        }
    }
}

/// Rows after the initial one, where `RHS - LHS = 0` holds trivially; the
/// initial row alone for a run without steps.
fn evolved(traj: &Trajectory) -> &[crate::evolve::StepRecord] {
    let s = &traj.steps;
    if s.len() > 1 {
        &s[1..]
    } else {
        s
    }
}

fn sup_over_run(traj: &Trajectory, norm: impl Fn(&crate::evolve::StepRecord) -> f64) -> f64 {
    traj.steps.iter().map(norm).fold(0.0, f64::max)
}

/// `max_x f(t) <= max_x f0 + tol` and `min_x f(t) >= min_x f0 - tol`, gated
/// on `sup_t ||f||_{A^1} <= 1`.
pub fn check_max_principle(traj: &Trajectory, tol: f64) -> MonitorVerdict {
    let sup_a1 = sup_over_run(traj, |r| r.norms.a1);
    let mut v = MonitorVerdict::new("max_principle", tol).gate("sup_A1", sup_a1);
    v.applicable = traj.completed() && sup_a1 <= 1.0;
    if v.applicable {
        let first = &traj.steps[0].norms;
        for r in evolved(traj) {
            let m = (first.max_f - r.norms.max_f).min(r.norms.min_f - first.min_f);
            v.observe(r.t, m, tol);
        }
    }
    v.conclude()
}

/// `A^1` is nonincreasing, and the central difference of `A^1` satisfies
/// `d/dt A^1 + (1 - 2 A^1) A^2 <= 0`, each with slack `tol (1 + A^2)` per step.
/// Gated on `||f0||_{A^1} < 1/2`.
pub fn check_a1_monotone(traj: &Trajectory, tol: f64) -> MonitorVerdict {
    let a1_0 = traj.steps[0].norms.a1;
    let mut v = MonitorVerdict::new("a1_monotone", tol).gate("A1_0", a1_0);
    v.applicable = traj.completed() && a1_0 < 0.5;
    if !v.applicable {
        return v.conclude();
    }
    let s = &traj.steps;
    let mut worst_derivative = f64::INFINITY;
    for w in s.windows(2) {
        let slack = tol * (1.0 + w[0].norms.a2);
        v.observe(w[1].t, w[0].norms.a1 - w[1].norms.a1, slack);
    }
    for w in s.windows(3) {
        let (a, b, c) = (&w[0], &w[1], &w[2]);
        let slack = tol * (1.0 + b.norms.a2);
        let da1 = (c.norms.a1 - a.norms.a1) / (c.t - a.t);
        let m = -(da1 + (1.0 - 2.0 * b.norms.a1) * b.norms.a2);
        worst_derivative = worst_derivative.min(m);
        v.observe(b.t, m, slack);
    }
    v.extra("worst_derivative_margin", worst_derivative);
    v.conclude()
}

/// `||f(t)||_{A^0} <= ||f0||_{A^0} e^{-(1 - 2||f0||_{A^1})(1 + nu) t} (1 + tol)`,
/// gated on `||f0||_{A^1} < 1/2`. Reports the least-squares decay rate of
/// `log A^0`.
pub fn check_a0_decay(traj: &Trajectory, tol: f64) -> MonitorVerdict {
    let nu = traj.config.nu;
    let first = &traj.steps[0].norms;
    let rate = (1.0 - 2.0 * first.a1) * (1.0 + nu);
    let mut v = MonitorVerdict::new("a0_decay", tol).gate("A1_0", first.a1);
    v.applicable = traj.completed() && first.a1 < 0.5;
    if !v.applicable {
        return v.conclude();
    }
    for r in evolved(traj) {
        let bound = first.a0 * (-rate * r.t).exp();
        v.observe(r.t, bound - r.norms.a0, tol * bound);
    }
    v.extra("theorem_rate", rate);
    if let Some(fit) = fitted_rate(traj) {
        v.extra("fitted_rate", fit);
    }
    v.conclude()
}

/// Slope of the least-squares line through `(t, -log A^0)` over samples with
/// `A^0 > 0`.
pub fn fitted_rate(traj: &Trajectory) -> Option<f64> {
    let pts: Vec<(f64, f64)> = traj
        .steps
        .iter()
        .filter(|r| r.norms.a0 > 0.0)
        .map(|r| (r.t, -r.norms.a0.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `||f||^2_{L^2} + \int ||Lambda^{1/2} f||^2 <= ||f0||^2_{L^2} (1 + tol)` for the
/// gravity-only equation, gated on `sup_t ||f||_{H^{3/2}}`. Also reports
/// `max_t |||f||^2 + 2\int ||Lambda^{1/2} f||^2 - ||f0||^2|`, the integrated
/// nonlinear transfer `2\int\int f ((Lambda f)^2 - (df)^2)`. It vanishes for a
/// single mode, where the inequality's slack is exactly the dissipation.
pub fn check_energy_l2(traj: &Trajectory, cfg: &MonitorConfig) -> MonitorVerdict {
    let sup_h32 = sup_over_run(traj, |r| r.norms.sobolev_order(1.5).unwrap_or(f64::INFINITY));
    let mut v = MonitorVerdict::new("energy_L2", cfg.energy_tol)
        .gate("sup_H32", sup_h32)
        .gate("nu", traj.config.nu);
    v.applicable = traj.completed() && traj.config.nu == 0.0 && sup_h32 <= cfg.l2_h32_threshold;
    if !v.applicable {
        return v.conclude();
    }
    let e0 = traj.steps[0].norms.l2.powi(2);
    let mut balance: f64 = 0.0;
    for r in evolved(traj) {
        let e = r.norms.l2.powi(2);
        let d = r.diss_gravity[0];
        v.observe(r.t, e0 - (e + d), cfg.energy_tol * e0);
        balance = balance.max((e + 2.0 * d - e0).abs());
    }
    v.extra("nonlinear_transfer", balance);
    v.conclude()
}

fn h32_gate(h32e: f64, constant: f64, epsilon: f64) -> f64 {
    let tail = h32e * h32e.ln() + 1.0;
    1.0f64.min(epsilon * epsilon / (constant * tail * tail))
}

/// `H^{3/2} cap H^{3/2+eps}` energy inequality with cumulative dissipation,
/// for the gravity-only equation. Only `eps = 1/2` is tracked along runs.
pub fn check_energy_h32(traj: &Trajectory, cfg: &MonitorConfig) -> Result<MonitorVerdict> {
    let upper = 1.5 + cfg.epsilon;
    let Some(ui) = DISSIPATION_ORDERS.iter().position(|&s| s == upper) else {
        return Err(Error::InvalidInput(format!(
            "epsilon = {} is not tracked; H^{upper} is not among the recorded orders",
            cfg.epsilon
        )));
    };
    let li = DISSIPATION_ORDERS.iter().position(|&s| s == 1.5).expect("H^{3/2} is tracked");
    let first = &traj.steps[0].norms;
    let h32 = first.sobolev_order(1.5).unwrap_or(f64::INFINITY);
    let h32e = first.sobolev_order(upper).unwrap_or(f64::INFINITY);
    let bound = h32_gate(h32e, cfg.h32_constant, cfg.epsilon);
    let mut v = MonitorVerdict::new("energy_H32", cfg.energy_tol)
        .gate("H32_0", h32)
        .gate("smallness_bound", bound)
        .gate("nu", traj.config.nu);
    v.applicable = traj.completed() && traj.config.nu == 0.0 && h32 < bound;
    if !v.applicable {
        return Ok(v.conclude());
    }
    let e0 = h32 * h32 + h32e * h32e;
    for r in evolved(traj) {
        let a = r.norms.sobolev_order(1.5).unwrap_or(f64::INFINITY);
        let b = r.norms.sobolev_order(upper).unwrap_or(f64::INFINITY);
        let lhs = a * a + b * b + r.diss_gravity[li] + r.diss_gravity[ui];
        v.observe(r.t, e0 - lhs, cfg.energy_tol * e0);
    }
    Ok(v.conclude())
}

/// `||f||^2_{H^2} + \int [nu ||Lambda^{3/2} f||^2_{H^2} + ||Lambda^{1/2} f||^2_{H^2}]
/// <= ||f0||^2_{H^2} (1 + tol)`, gated on `nu > 0` and
/// `||f0||_{H^2} <= c min(1, nu^{-1/4})`.
pub fn check_energy_h2(traj: &Trajectory, cfg: &MonitorConfig) -> MonitorVerdict {
    let nu = traj.config.nu;
    let h2 = traj.steps[0].norms.sobolev_order(2.0).unwrap_or(f64::INFINITY);
    let bound = cfg.h2_constant * 1.0f64.min(nu.powf(-0.25));
    let mut v = MonitorVerdict::new("energy_H2", cfg.energy_tol)
        .gate("H2_0", h2)
        .gate("smallness_bound", bound)
        .gate("nu", nu);
    v.applicable = traj.completed() && nu > 0.0 && h2 <= bound;
    if !v.applicable {
        return v.conclude();
    }
    let e0 = h2 * h2;
    for r in evolved(traj) {
        let h = r.norms.sobolev_order(2.0).unwrap_or(f64::INFINITY);
        let lhs = h * h + r.diss_gravity[2] + r.diss_capillary[2];
        v.observe(r.t, e0 - lhs, cfg.energy_tol * e0);
    }
    v.conclude()
}

/// `f_t = -(Lambda + nu Lambda^3) f + N(f)` evaluated from the semi-discrete
/// right-hand side.
pub fn time_derivative(f: &SpectralField, nu: f64) -> SpectralField {
    let lin = f.map_real_multiplier(|n| {
        let m = n.unsigned_abs() as f64;
        -(m + nu * m * m * m)
    });
    &lin + &rhs_pseudospectral(f, nu)
}

/// `\int ||f_t||^2_{H^1}` over the snapshots (trapezoid), and its ratio to
/// `S (1 + S (1 + eps^{-1/2})) + H32^3 + H^{3/2+eps}^3` with `S` the initial
/// `H^{3/2} cap H^{3/2+eps}` energy. Only finiteness is asserted.
pub fn check_time_derivative(traj: &Trajectory, cfg: &MonitorConfig) -> MonitorVerdict {
    let nu = traj.config.nu;
    let mut v = MonitorVerdict::new("time_derivative", 0.0);
    v.applicable = traj.completed();
    if !v.applicable {
        return v.conclude();
    }
    let dens: Vec<(f64, f64)> = traj
        .snapshots
        .iter()
        .map(|(t, f)| (*t, time_derivative(f, nu).sobolev_sq(1.0)))
        .collect();
    let integral: f64 = dens
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum();
    let f0 = traj.initial();
    let a = f0.sobolev(1.5);
    let b = f0.sobolev(1.5 + cfg.epsilon);
    let s = a * a + b * b;
    let shape = s * (1.0 + s * (1.0 + cfg.epsilon.powf(-0.5))) + a.powi(3) + b.powi(3);
    let constant = if shape > 0.0 { integral / shape } else { 0.0 };
    v.worst_margin = 0.0;
    if !integral.is_finite() {
        v.first_violation_t = traj.steps.last().map(|r| r.t);
    }
    v.extra("integral", integral);
    v.extra("measured_constant", constant);
    v.conclude()
}

/// `(t, ||f_x||_{L^inf})` along the run, with a flag for monotone growth.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TurningSeries {
    pub series: Vec<(f64, f64)>,
    pub monotone_growth: bool,
}

pub fn turning_monitor(traj: &Trajectory) -> TurningSeries {
    let series: Vec<(f64, f64)> = traj.steps.iter().map(|r| (r.t, r.norms.linf_dxf)).collect();
    let monotone_growth = series.len() > 1
        && series.windows(2).all(|w| w[1].1 >= w[0].1)
        && series.last().unwrap().1 > series[0].1;
    TurningSeries {
        series,
        monotone_growth,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrilinearConstants {
    pub samples: usize,
    /// `max |N(g,h,h)| / (||g||_{H^{3/2}} ||h||^2_{H^{1/2}})`.
    pub n_ratio: f64,
    /// `max |M(g,h,h)| / (nu ||g||_{H^2} ||h||^{1/2}_{H^{1/2}} ||h||^{3/2}_{H^{3/2}})`.
    pub m_ratio: f64,
}

pub fn n_ratio(g: &SpectralField, h: &SpectralField) -> Result<Option<f64>> {
    let den = g.sobolev(1.5) * h.sobolev(0.5).powi(2);
    if den == 0.0 {
        return Ok(None);
    }
    Ok(Some(trilinear_n_fourier(g, h)?.abs() / den))
}

pub fn m_ratio(g: &SpectralField, h: &SpectralField, nu: f64) -> Result<Option<f64>> {
    let den = nu * g.sobolev(2.0) * h.sobolev(0.5).sqrt() * h.sobolev(1.5).powf(1.5);
    if den == 0.0 {
        return Ok(None);
    }
    Ok(Some(trilinear_m_fourier(g, h, nu)?.abs() / den))
}

/// Largest observed trilinear ratios over `count` seeded `(g, h)` pairs.
/// Pairs with a zero denominator are excluded.
pub fn measure_trilinear_constants(
    spec: &EnsembleSpec,
    grid: GridSpec,
    count: usize,
    nu: f64,
) -> Result<TrilinearConstants> {
    let rows: Result<Vec<(Option<f64>, Option<f64>)>> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let g = spec.sample(grid, 2 * i)?;
            let h = spec.sample(grid, 2 * i + 1)?;
            Ok((n_ratio(&g, &h)?, m_ratio(&g, &h, nu)?))
        })
        .collect();
    let rows = rows?;
    let fold = |it: &mut dyn Iterator<Item = Option<f64>>| it.flatten().fold(0.0, f64::max);
    Ok(TrilinearConstants {
        samples: rows.len(),
        n_ratio: fold(&mut rows.iter().map(|r| r.0)),
        m_ratio: fold(&mut rows.iter().map(|r| r.1)),
    })
}

/// Observational twin run: evolves `f0` and `f0 + delta p` for a seeded
/// perturbation `p` of unit `A^0` norm and records
/// `||f(t) - g(t)||_{A^0} / delta` at the common snapshots.
pub fn twin_run_divergence(
    f0: &SpectralField,
    cfg: &SolverConfig,
    seed: u64,
    delta: f64,
) -> Result<Vec<(f64, f64)>> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidInput(format!("perturbation size must be positive, got {delta}")));
    }
    let p = EnsembleSpec::new(seed).sample(f0.grid(), 0)?;
    let p = p.scale(1.0 / p.wiener(0.0));
    let g0 = f0 + &p.scale(delta);
    let (a, b) = rayon::join(|| evolve(f0, cfg), || evolve(&g0, cfg));
    let (a, b) = (a?, b?);
    Ok(a.snapshots
        .iter()
        .zip(&b.snapshots)
        .take_while(|(x, y)| x.0 == y.0)
        .map(|(x, y)| (x.0, (&x.1 - &y.1).wiener(0.0) / delta))
        .collect())
}

/// Runs every trajectory monitor in parallel.
pub fn run_all(traj: &Trajectory, cfg: &MonitorConfig) -> Result<Vec<MonitorVerdict>> {
    type Check<'a> = Box<dyn Fn() -> Result<MonitorVerdict> + Send + Sync + 'a>;
    let checks: Vec<Check> = vec![
        Box::new(|| Ok(check_max_principle(traj, cfg.max_principle_tol))),
        Box::new(|| Ok(check_a1_monotone(traj, cfg.a1_tol))),
        Box::new(|| Ok(check_a0_decay(traj, cfg.a0_tol))),
        Box::new(|| Ok(check_energy_l2(traj, cfg))),
        Box::new(|| check_energy_h32(traj, cfg)),
        Box::new(|| Ok(check_energy_h2(traj, cfg))),
        Box::new(|| Ok(check_time_derivative(traj, cfg))),
    ];
    checks.par_iter().map(|c| c()).collect()
}

/// Exact single-mode solution `a e^{-(m + nu m^3) t} cos(mx)`.
pub fn single_mode_exact(grid: GridSpec, m: usize, a: f64, nu: f64, t: f64) -> Result<SpectralField> {
    SpectralField::cosine(grid, m, a * linear_propagator(m as i64, nu, t))
}
