//! Fixed-step integrating-factor time stepping of
//! `f_t = -(Lambda + nu Lambda^3) f + N(f)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::rhs_pseudospectral;
use crate::spectral::snapshot::fmt_f64;
use crate::spectral::{norms, Complex, GridSpec, NormReport, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "IFRK4")]
    IfRk4,
    #[serde(rename = "IFEuler")]
    IfEuler,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub grid: GridSpec,
    pub scheme: Scheme,
    pub blowup_a1_threshold: f64,
    pub snapshot_stride: usize,
}

impl SolverConfig {
    pub fn new(nu: f64, dt: f64, t_end: f64, grid: GridSpec) -> Self {
        SolverConfig {
            nu,
            dt,
            t_end,
            grid,
            scheme: Scheme::IfRk4,
            blowup_a1_threshold: 10.0,
            snapshot_stride: 100,
        }
    }

    /// Rejects invalid parameters and returns advisory warnings, currently
    /// only the step-size heuristic `dt <= 0.5 / (nu K^3 + K)`.
    pub fn validate(&self) -> Result<Vec<String>> {
        let finite = [self.nu, self.dt, self.t_end, self.blowup_a1_threshold]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("solver parameters must be finite".into()));
        }
        if self.nu < 0.0 {
            return Err(Error::Config(format!("nu = {} is negative", self.nu)));
        }
        if self.dt < 0.0 || self.t_end <= 0.0 || self.dt > self.t_end {
            return Err(Error::Config(format!(
                "need 0 <= dt <= t_end and t_end > 0 (dt = {}, t_end = {})",
                self.dt, self.t_end
            )));
        }
        if self.dt == 0.0 {
            return Err(Error::Config("dt must be positive".into()));
        }
        if self.blowup_a1_threshold <= 0.0 {
            return Err(Error::Config("blow-up threshold must be positive".into()));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::Config("snapshot stride must be positive".into()));
        }
        let k = self.grid.band_limit() as f64;
        let limit = 0.5 / (self.nu * k.powi(3) + k);
        let mut warnings = Vec::new();
        if self.dt > limit {
            warnings.push(format!(
                "dt = {} exceeds the step heuristic 0.5/(nu K^3 + K) = {limit:.3e}",
                self.dt
            ));
        }
        Ok(warnings)
    }

    pub fn num_steps(&self) -> usize {
        let n = (self.t_end / self.dt).round();
        if (n * self.dt - self.t_end).abs() <= 1e-9 * self.t_end {
            n as usize
        } else {
            (self.t_end / self.dt).ceil() as usize
        }
    }
}

/// `e^{-tau (|n| + nu |n|^3)}`.
pub fn linear_propagator(n: i64, nu: f64, tau: f64) -> f64 {
    let m = n.unsigned_abs() as f64;
    (-tau * (m + nu * m * m * m)).exp()
}

/// Linear symbol `|n| + nu |n|^3`.
pub(crate) fn linear_symbol(n: usize, nu: f64) -> f64 {
    let m = n as f64;
    m + nu * m * m * m
}

/// One-step map with the exponentials cached for a fixed `dt`.
#[derive(Clone, Debug)]
pub struct Stepper {
    nu: f64,
    dt: f64,
    scheme: Scheme,
    e_full: Vec<f64>,
    e_half: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: GridSpec, nu: f64, dt: f64, scheme: Scheme) -> Self {
        let k = grid.band_limit();
        Stepper {
            nu,
            dt,
            scheme,
            e_full: (0..=k)
                .map(|n| linear_propagator(n as i64, nu, dt))
                .collect(),
            e_half: (0..=k)
                .map(|n| linear_propagator(n as i64, nu, 0.5 * dt))
                .collect(),
        }
    }

    pub fn from_config(cfg: &SolverConfig) -> Self {
        Self::new(cfg.grid, cfg.nu, cfg.dt, cfg.scheme)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn rhs(&self, u: &[Complex], f: &SpectralField) -> Vec<Complex> {
        let field = SpectralField::from_half_spectrum(f.grid(), u.to_vec());
        let n = rhs_pseudospectral(&field, self.nu);
        n.half_spectrum().iter().map(|c| c * self.dt).collect()
    }

    /// Advances `f` by `dt`. The mean and Hermitian structure are restored
    /// on output.
    pub fn step(&self, f: &SpectralField) -> SpectralField {
        if self.dt == 0.0 {
            return f.clone();
        }
        let u = f.half_spectrum();
        let (e, e2) = (&self.e_full, &self.e_half);
        let len = u.len();
        let out: Vec<Complex> = match self.scheme {
            Scheme::IfEuler => {
                let k1 = self.rhs(u, f);
                (0..len).map(|n| e[n] * (u[n] + k1[n])).collect()
            }
            Scheme::IfRk4 => {
                let k1 = self.rhs(u, f);
                let u2: Vec<Complex> = (0..len).map(|n| e2[n] * (u[n] + 0.5 * k1[n])).collect();
                let k2 = self.rhs(&u2, f);
                let u3: Vec<Complex> = (0..len).map(|n| e2[n] * u[n] + 0.5 * k2[n]).collect();
                let k3 = self.rhs(&u3, f);
                let u4: Vec<Complex> = (0..len).map(|n| e[n] * u[n] + e2[n] * k3[n]).collect();
                let k4 = self.rhs(&u4, f);
                (0..len)
                    .map(|n| {
                        e[n] * u[n] + (e[n] * k1[n] + 2.0 * e2[n] * (k2[n] + k3[n]) + k4[n]) / 6.0
                    })
                    .collect()
            }
        };
        SpectralField::from_half_spectrum(f.grid(), out).project_mean_zero()
    }
}

/// One step of the configured scheme; a non-finite result is an error.
pub fn step(f: &SpectralField, cfg: &SolverConfig) -> Result<SpectralField> {
    let g = Stepper::from_config(cfg).step(f);
    if g.is_finite() {
        Ok(g)
    } else {
        Err(Error::NonFinite { t: cfg.dt })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    Blowup { t: f64, a1: f64 },
    Nan { t: f64 },
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::Blowup { .. } => "blowup",
            Termination::Nan { .. } => "nan",
        }
    }
}

/// Sobolev orders at which cumulative dissipation is tracked.
pub const DISSIPATION_ORDERS: [f64; 3] = [0.0, 1.5, 2.0];

/// Diagnostics of one accepted step (the row at `t = 0` has `dt = 0`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub norms: NormReport,
    /// `\int_0^t ||Lambda^{1/2} f||^2_{H^s}` for each order in
    /// [`DISSIPATION_ORDERS`].
    pub diss_gravity: [f64; 3],
    /// `\int_0^t nu ||Lambda^{3/2} f||^2_{H^s}`.
    pub diss_capillary: [f64; 3],
}

impl StepRecord {
    pub fn diss_total(&self, i: usize) -> f64 {
        self.diss_gravity[i] + self.diss_capillary[i]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub config: SolverConfig,
    /// `(t, f)` every `snapshot_stride` steps plus the initial and final states.
    pub snapshots: Vec<(f64, SpectralField)>,
    pub steps: Vec<StepRecord>,
    pub termination: Termination,
}

pub const CSV_HEADER: &str = "t,norm_A0,norm_A1,norm_A2,norm_L2,norm_H32,norm_H2,max_f,min_f,linf_dxf,diss_L2_cum,diss_H32_cum,diss_H2_cum,dt";

/// Running integrals of the two dissipation densities. The time quadrature
/// is the trapezoid rule with its Euler-Maclaurin endpoint correction,
/// using the exact time derivative `2 Re(conj(f^) f^_t)` of each density.
struct DissipationIntegrator {
    nu: f64,
    prev: Option<([f64; 6], [f64; 6])>,
    cum: [f64; 6],
}

impl DissipationIntegrator {
    fn new(nu: f64) -> Self {
        DissipationIntegrator {
            nu,
            prev: None,
            cum: [0.0; 6],
        }
    }

    /// Densities and their time derivatives: entries `0..3` gravity,
    /// `3..6` capillary.
    fn densities(&self, f: &SpectralField) -> ([f64; 6], [f64; 6]) {
        let n_hat = rhs_pseudospectral(f, self.nu);
        let mut g = [0.0; 6];
        let mut dg = [0.0; 6];
        for (n, c) in f.half_spectrum().iter().enumerate().skip(1) {
            let m = n as f64;
            let ft = -linear_symbol(n, self.nu) * c + n_hat.half_spectrum()[n];
            let a = 2.0 * c.norm_sqr();
            let da = 4.0 * (c.conj() * ft).re;
            for (i, s) in DISSIPATION_ORDERS.iter().enumerate() {
                let w = m.powf(2.0 * s);
                g[i] += w * m * a;
                dg[i] += w * m * da;
                g[i + 3] += self.nu * w * m.powi(3) * a;
                dg[i + 3] += self.nu * w * m.powi(3) * da;
            }
        }
        (g, dg)
    }

    fn advance(&mut self, f: &SpectralField, dt: f64) {
        let cur = self.densities(f);
        if let Some((g0, dg0)) = self.prev {
            for i in 0..6 {
                self.cum[i] += 0.5 * dt * (g0[i] + cur.0[i]) - dt * dt / 12.0 * (cur.1[i] - dg0[i]);
            }
        }
        self.prev = Some(cur);
    }

    fn split(&self) -> ([f64; 3], [f64; 3]) {
        (
            [self.cum[0], self.cum[1], self.cum[2]],
            [self.cum[3], self.cum[4], self.cum[5]],
        )
    }
}

/// Integrates from `f0` to `t_end`, or until `A^1` exceeds the blow-up
/// threshold or a coefficient stops being finite.
pub fn evolve(f0: &SpectralField, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if f0.grid() != cfg.grid {
        return Err(Error::GridMismatch(format!(
            "initial data on {:?}, solver on {:?}",
            f0.grid(),
            cfg.grid
        )));
    }
    let f0 = f0.clone().project_mean_zero();
    let steps = cfg.num_steps();
    let stepper = Stepper::from_config(cfg);
    let mut diss = DissipationIntegrator::new(cfg.nu);
    let orders = [1.5, 2.0];

    let record = |t: f64, dt: f64, f: &SpectralField, diss: &DissipationIntegrator| {
        let (g, c) = diss.split();
        StepRecord {
            t,
            dt,
            norms: norms(f, 0.0, &orders),
            diss_gravity: g,
            diss_capillary: c,
        }
    };

    diss.advance(&f0, 0.0);
    let mut records = vec![record(0.0, 0.0, &f0, &diss)];
    let mut snapshots = vec![(0.0, f0.clone())];
    let mut termination = Termination::Completed;
    let mut f = f0;
    let mut t_prev = 0.0;
    for i in 1..=steps {
        let t = if i == steps {
            cfg.t_end
        } else {
            i as f64 * cfg.dt
        };
        let h = t - t_prev;
        let next = if (h - cfg.dt).abs() <= 1e-12 * cfg.dt {
            stepper.step(&f)
        } else {
            Stepper::new(cfg.grid, cfg.nu, h, cfg.scheme).step(&f)
        };
        if !next.is_finite() {
            termination = Termination::Nan { t };
            break;
        }
        f = next;
        diss.advance(&f, h);
        let rec = record(t, h, &f, &diss);
        let a1 = rec.norms.a1;
        records.push(rec);
        t_prev = t;
        if a1 > cfg.blowup_a1_threshold || !a1.is_finite() {
            termination = if a1.is_finite() {
                Termination::Blowup { t, a1 }
            } else {
                Termination::Nan { t }
            };
            break;
        }
        if i % cfg.snapshot_stride == 0 || i == steps {
            snapshots.push((t, f.clone()));
        }
    }
    if termination != Termination::Completed {
        let last_t = records.last().map(|r| r.t).unwrap_or(0.0);
        if snapshots.last().map(|s| s.0) != Some(last_t) {
            snapshots.push((last_t, f.clone()));
        }
    }
    Ok(Trajectory {
        config: cfg.clone(),
        snapshots,
        steps: records,
        termination,
    })
}

impl Trajectory {
    pub fn completed(&self) -> bool {
        self.termination == Termination::Completed
    }

    pub fn initial(&self) -> &SpectralField {
        &self.snapshots[0].1
    }

    pub fn final_field(&self) -> &SpectralField {
        &self
            .snapshots
            .last()
            .expect("trajectory has an initial snapshot")
            .1
    }

    pub fn csv_row(r: &StepRecord) -> String {
        let n = &r.norms;
        let cols = [
            r.t,
            n.a0,
            n.a1,
            n.a2,
            n.l2,
            n.sobolev_order(1.5).unwrap_or(f64::NAN),
            n.sobolev_order(2.0).unwrap_or(f64::NAN),
            n.max_f,
            n.min_f,
            n.linf_dxf,
            r.diss_total(0),
            r.diss_total(1),
            r.diss_total(2),
            r.dt,
        ];
        cols.iter()
            .map(|v| fmt_f64(*v))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.steps {
            writeln!(w, "{}", Self::csv_row(r))?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

/// `A^0` residual of the mild formulation
/// `f^(t) - e^{-tL} f^_0 - \int_0^t e^{-(t-s)L} N^(s) ds` at each sample
/// time, with the time integral taken by trapezoid over the stored
/// snapshots. Sample times must coincide with snapshot times.
pub fn mild_residual(traj: &Trajectory, sample_times: &[f64]) -> Result<Vec<f64>> {
    if traj.snapshots.len() < 2 {
        return Err(Error::InsufficientSnapshots(format!(
            "{} snapshot(s); the time integral needs at least 2",
            traj.snapshots.len()
        )));
    }
    let nu = traj.config.nu;
    let nonlinear: Vec<SpectralField> = traj
        .snapshots
        .iter()
        .map(|(_, f)| rhs_pseudospectral(f, nu))
        .collect();
    let f0 = traj.initial();
    let scale = 1e-12 * traj.snapshots.last().unwrap().0.max(1.0);
    sample_times
        .iter()
        .map(|&t| {
            let j = traj
                .snapshots
                .iter()
                .position(|(s, _)| (s - t).abs() <= scale)
                .ok_or(Error::OffGrid { t })?;
            let tj = traj.snapshots[j].0;
            let fj = &traj.snapshots[j].1;
            let mut r = 0.0;
            for n in 1..=fj.band_limit() {
                let l = linear_symbol(n, nu);
                let mut integral = Complex::new(0.0, 0.0);
                for i in 0..j {
                    let (s0, s1) = (traj.snapshots[i].0, traj.snapshots[i + 1].0);
                    let a = (-(tj - s0) * l).exp() * nonlinear[i].half_spectrum()[n];
                    let b = (-(tj - s1) * l).exp() * nonlinear[i + 1].half_spectrum()[n];
                    integral += 0.5 * (s1 - s0) * (a + b);
                }
                let res =
                    fj.half_spectrum()[n] - (-tj * l).exp() * f0.half_spectrum()[n] - integral;
                r += 2.0 * res.norm();
            }
            Ok(r)
        })
        .collect()
}
