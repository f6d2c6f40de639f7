//! Config-driven experiments behind the `muskat` binary.
//!
//! Every command writes its artifacts under the output directory. CSV and
//! JSON bodies depend only on the config; wall-clock data goes to
//! `meta.json`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ck::{catalan_bound_check, ck_compare, SeriesExpansion, COMPARE_CSV_HEADER};
use crate::ensemble::EnsembleSpec;
use crate::error::{Error, Result};
use crate::evolve::{evolve, Scheme, SolverConfig, Trajectory};
use crate::lp::{block_range, bony_terms, delta_q, lp_check};
use crate::monitors::{measure_trilinear_constants, run_all, turning_monitor, MonitorConfig, MonitorVerdict};
use crate::nonlinearity::{
    rhs_convolution, rhs_pseudospectral, rhs_pv_quadrature, trilinear_m, trilinear_m_fourier, trilinear_n,
    trilinear_n_fourier, verify_symbol_bounds,
};
use crate::spectral::snapshot::fmt_f64;
use crate::spectral::{GridSpec, Snapshot, SpectralField};

/// Process exit status of a command.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Exit {
    Ok = 0,
    CheckFailed = 1,
    ConfigError = 2,
    Blowup = 3,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }

    fn worst(self, other: Exit) -> Exit {
        if other.code() > self.code() {
            other
        } else {
            self
        }
    }
}

/// Initial data presets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `a cos(m x)`.
    SingleMode { a: f64, m: usize },
    /// `a1 cos x + a2 cos 2x`.
    TwoMode { a1: f64, a2: f64 },
    /// Seeded ensemble sample 0 with `K` random modes.
    Random {
        #[serde(default)]
        seed: Option<u64>,
        #[serde(rename = "K")]
        k: usize,
        #[serde(default = "default_decay")]
        decay_exponent: f64,
        /// Rescale to this `A^1` norm.
        #[serde(default)]
        a1_norm: Option<f64>,
    },
    FromSnapshot { path: PathBuf },
}

fn default_decay() -> f64 {
    3.0
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::SingleMode { a: 0.1, m: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    #[serde(rename = "K")]
    pub k: usize,
    /// Physical points; defaults to the smallest fast size `>= 3K + 1`.
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub blowup_a1_threshold: f64,
    pub snapshot_stride: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            k: 32,
            n: None,
            nu: 0.0,
            dt: 1e-3,
            t_end: 1.0,
            scheme: Scheme::IfRk4,
            blowup_a1_threshold: 10.0,
            snapshot_stride: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CkSection {
    pub order: usize,
    pub nodes: usize,
    /// `4 lambda T*`.
    pub horizon: f64,
    /// Largest accepted `rel_diff`.
    pub tolerance: f64,
}

impl Default for CkSection {
    fn default() -> Self {
        CkSection {
            order: 12,
            nodes: 256,
            horizon: 0.5,
            tolerance: 1e-5,
        }
    }
}

/// Band and sample count of a seeded probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    #[serde(rename = "K")]
    pub k: usize,
    pub trials: usize,
}

fn default_identities() -> ProbeSection {
    ProbeSection { k: 16, trials: 20 }
}

fn default_lp() -> ProbeSection {
    ProbeSection { k: 32, trials: 50 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub scales: Vec<f64>,
    pub nus: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            scales: vec![0.5, 1.0, 2.0],
            nus: vec![0.0, 1.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub output_dir: PathBuf,
    pub initial: InitialData,
    pub solver: SolverSection,
    pub monitors: MonitorConfig,
    pub ck: CkSection,
    #[serde(default = "default_identities")]
    pub identities: ProbeSection,
    #[serde(default = "default_lp")]
    pub lp: ProbeSection,
    pub sweep: SweepSection,
    pub kmax: i64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: None,
            output_dir: PathBuf::from("out"),
            initial: InitialData::default(),
            solver: SolverSection::default(),
            monitors: MonitorConfig::default(),
            ck: CkSection::default(),
            identities: default_identities(),
            lp: default_lp(),
            sweep: SweepSection::default(),
            kmax: 256,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub kmax: Option<i64>,
    pub trials: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    /// Reads a config. Relative snapshot paths resolve against the config's
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        if let InitialData::FromSnapshot { path: snap } = &mut cfg.initial {
            if snap.is_relative() {
                if let Some(dir) = path.parent() {
                    *snap = dir.join(&*snap);
                }
            }
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = Some(seed);
            if let InitialData::Random { seed: s, .. } = &mut self.initial {
                *s = Some(seed);
            }
        }
        if let Some(out) = &o.out {
            self.output_dir = out.clone();
        }
        if let Some(k) = o.kmax {
            self.kmax = k;
        }
        if let Some(t) = o.trials {
            self.identities.trials = t;
            self.lp.trials = t;
        }
    }

    /// Range and reference checks, run before any compute.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match &self.initial {
            InitialData::SingleMode { a, m } => {
                if !a.is_finite() || *m == 0 || *m > self.solver.k {
                    return bad(format!("single_mode needs finite a and 1 <= m <= K, got a = {a}, m = {m}"));
                }
            }
            InitialData::TwoMode { a1, a2 } => {
                if !a1.is_finite() || !a2.is_finite() || self.solver.k < 2 {
                    return bad("two_mode needs finite amplitudes and K >= 2".into());
                }
            }
            InitialData::Random {
                seed,
                k,
                decay_exponent,
                a1_norm,
            } => {
                if seed.is_none() && self.seed.is_none() {
                    return bad("random initial data needs a seed".into());
                }
                if *k == 0 || *k > self.solver.k || !decay_exponent.is_finite() {
                    return bad(format!("random preset needs 1 <= K <= {} and a finite decay", self.solver.k));
                }
                if a1_norm.is_some_and(|a| !(a.is_finite() && a >= 0.0)) {
                    return bad("a1_norm must be finite and nonnegative".into());
                }
            }
            InitialData::FromSnapshot { path } => {
                if !path.is_file() {
                    return bad(format!("snapshot {} does not exist", path.display()));
                }
            }
        }
        self.grid()?;
        self.solver_config()?.validate()?;
        let ck = &self.ck;
        if ck.nodes < 2 || ck.nodes % 2 != 0 || !(ck.horizon > 0.0 && ck.horizon < 1.0) || !(ck.tolerance >= 0.0) {
            return bad("ck needs an even node count >= 2, horizon in (0, 1) and tolerance >= 0".into());
        }
        for (name, p) in [("identities", &self.identities), ("lp", &self.lp)] {
            if p.k == 0 || p.trials == 0 {
                return bad(format!("{name} needs K >= 1 and trials >= 1"));
            }
        }
        if self.kmax < 1 || self.kmax > crate::nonlinearity::symbols::SYMBOL_KMAX_LIMIT {
            return bad(format!(
                "kmax must lie in [1, {}]",
                crate::nonlinearity::symbols::SYMBOL_KMAX_LIMIT
            ));
        }
        let s = &self.sweep;
        if s.scales.iter().chain(&s.nus).any(|v| !v.is_finite()) || s.nus.iter().any(|&n| n < 0.0) {
            return bad("sweep values must be finite and nu >= 0".into());
        }
        let m = &self.monitors;
        let vals = [
            m.max_principle_tol,
            m.a1_tol,
            m.a0_tol,
            m.energy_tol,
            m.l2_h32_threshold,
            m.h32_constant,
            m.epsilon,
            m.h2_constant,
        ];
        if vals.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("monitor tolerances and constants must be finite and nonnegative".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        let r = match self.solver.n {
            Some(n) => GridSpec::with_points(self.solver.k, n),
            None => GridSpec::new(self.solver.k),
        };
        r.map_err(|e| Error::Config(e.to_string()))
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let s = &self.solver;
        Ok(SolverConfig {
            nu: s.nu,
            dt: s.dt,
            t_end: s.t_end,
            grid: self.grid()?,
            scheme: s.scheme,
            blowup_a1_threshold: s.blowup_a1_threshold,
            snapshot_stride: s.snapshot_stride,
        })
    }

    pub fn initial_field(&self) -> Result<SpectralField> {
        let grid = self.grid()?;
        match &self.initial {
            InitialData::SingleMode { a, m } => SpectralField::cosine(grid, *m, *a),
            InitialData::TwoMode { a1, a2 } => {
                Ok(&SpectralField::cosine(grid, 1, *a1)? + &SpectralField::cosine(grid, 2, *a2)?)
            }
            InitialData::Random {
                seed,
                k,
                decay_exponent,
                a1_norm,
            } => {
                let seed = seed
                    .or(self.seed)
                    .ok_or_else(|| Error::Config("random initial data needs a seed".into()))?;
                let spec = EnsembleSpec {
                    seed,
                    decay_exponent: *decay_exponent,
                    amplitude: 1.0,
                    scale_to_a1: *a1_norm,
                };
                Ok(spec.sample(GridSpec::new(*k)?, 0)?.resample(grid))
            }
            InitialData::FromSnapshot { path } => Ok(Snapshot::read(path)?.field.resample(grid)),
        }
    }

    /// SHA-256 of the canonical JSON form with the output directory
    /// blanked, hex encoded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let body = serde_json::to_string(&c).expect("config serializes");
        hex_digest(body.as_bytes())
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let body = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    write_file(path, &(body + "\n"))
}

#[derive(Serialize)]
struct Meta<'a> {
    command: &'a str,
    version: &'a str,
    unix_time: u64,
    config_hash: String,
    warnings: Vec<String>,
    exit_code: i32,
}

fn write_meta(cfg: &ExperimentConfig, command: &str, warnings: Vec<String>, exit: Exit) -> Result<()> {
    let unix_time = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = Meta {
        command,
        version: env!("CARGO_PKG_VERSION"),
        unix_time,
        config_hash: cfg.hash(),
        warnings,
        exit_code: exit.code(),
    };
    write_json(&cfg.output_dir.join("meta.json"), &meta)
}

/// Result of a command: its exit status and a human-readable summary.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub exit: Exit,
    pub summary: String,
}

fn verdict_exit(verdicts: &[MonitorVerdict]) -> Exit {
    if verdicts.iter().any(|v| v.failed()) {
        Exit::CheckFailed
    } else {
        Exit::Ok
    }
}

fn write_trajectory(dir: &Path, traj: &Trajectory) -> Result<()> {
    write_file(&dir.join("trajectory.csv"), &traj.to_csv())?;
    for (i, (t, f)) in traj.snapshots.iter().enumerate() {
        let snap = Snapshot {
            nu: traj.config.nu,
            t: *t,
            field: f.clone(),
        };
        write_file(&dir.join("snapshots").join(format!("snap_{i:05}.json")), &snap.to_json())?;
    }
    Ok(())
}

fn verdict_report(traj: &Trajectory, verdicts: &[MonitorVerdict]) -> String {
    let mut s = format!("termination {}\n", traj.termination.label());
    for v in verdicts {
        s.push_str(&v.report_line());
        s.push('\n');
    }
    let turning = turning_monitor(traj);
    s.push_str(&format!(
        "turning                n/a  linf_dxf_0={:.6e} linf_dxf_end={:.6e} monotone_growth={}\n",
        turning.series.first().map(|p| p.1).unwrap_or(0.0),
        turning.series.last().map(|p| p.1).unwrap_or(0.0),
        turning.monotone_growth
    ));
    s
}

/// Evolves the configured data, runs the monitors and writes
/// `trajectory.csv`, `snapshots/`, `verdicts.txt`, `verdicts.json` and
/// `meta.json`.
pub fn cmd_evolve(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let solver = cfg.solver_config()?;
    let warnings = solver.validate()?;
    let f0 = cfg.initial_field()?;
    let traj = evolve(&f0, &solver)?;
    let verdicts = run_all(&traj, &cfg.monitors)?;
    let dir = &cfg.output_dir;
    write_trajectory(dir, &traj)?;
    let report = verdict_report(&traj, &verdicts);
    write_file(&dir.join("verdicts.txt"), &report)?;
    write_json(&dir.join("verdicts.json"), &verdicts)?;
    let exit = if traj.completed() {
        verdict_exit(&verdicts)
    } else {
        Exit::Blowup
    };
    write_meta(cfg, "evolve", warnings, exit)?;
    Ok(Outcome { exit, summary: report })
}

/// Builds the series for the configured data, compares it with the time
/// stepper on `[0, T*/2]` and checks the Catalan majorant. Writes
/// `ck_compare.csv` and `catalan.csv`.
pub fn cmd_ck_compare(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    if cfg.solver.nu != 0.0 {
        return Err(Error::Config("the series solution is built for nu = 0".into()));
    }
    let f0 = cfg.initial_field()?.project_mean_zero();
    let exp = SeriesExpansion::build(&f0, cfg.ck.order, cfg.ck.nodes, cfg.ck.horizon)?;
    let rows = ck_compare(&exp, &f0)?;
    let catalan = catalan_bound_check(&exp)?;
    let mut csv = format!("{COMPARE_CSV_HEADER}\n");
    for r in &rows {
        let cols = [r.t, r.a1_series, r.a1_evolve, r.rel_diff, r.tail_bound];
        csv.push_str(&cols.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","));
        csv.push('\n');
    }
    let mut cat = String::from("l,t,a_raw,a_normalized,majorant,pass\n");
    for r in &catalan.rows {
        let _ = writeln!(
            cat,
            "{},{},{},{},{},{}",
            r.l,
            fmt_f64(r.t),
            fmt_f64(r.a_raw),
            fmt_f64(r.a_normalized),
            fmt_f64(r.majorant),
            r.pass
        );
    }
    let dir = &cfg.output_dir;
    write_file(&dir.join("ck_compare.csv"), &csv)?;
    write_file(&dir.join("catalan.csv"), &cat)?;
    let worst = rows.iter().map(|r| r.rel_diff).fold(0.0, f64::max);
    let ok = worst <= cfg.ck.tolerance && catalan.all_pass;
    let exit = if ok { Exit::Ok } else { Exit::CheckFailed };
    let summary = format!(
        "lambda={:.6e} t_star={:.6e} max_rel_diff={worst:.3e} (tol {:.1e}) catalan_normalized={} catalan_raw={}\n",
        exp.lambda, exp.t_star, cfg.ck.tolerance, catalan.all_pass, catalan.raw_all_pass
    );
    write_meta(cfg, "ck-compare", Vec::new(), exit)?;
    Ok(Outcome { exit, summary })
}

/// Exhaustive symbol inequalities up to `kmax`; writes `symbols.json`.
pub fn cmd_verify_symbols(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let reports = verify_symbol_bounds(cfg.kmax);
    write_json(&cfg.output_dir.join("symbols.json"), &reports)?;
    let mut summary = String::new();
    for r in &reports {
        let _ = writeln!(
            summary,
            "{:<12} {} violations={} worst_ratio={:.6e}",
            r.id,
            if r.pass { "pass" } else { "FAIL" },
            r.violations,
            r.worst_ratio
        );
    }
    let exit = if reports.iter().all(|r| r.pass) {
        Exit::Ok
    } else {
        Exit::CheckFailed
    };
    write_meta(cfg, "verify-symbols", Vec::new(), exit)?;
    Ok(Outcome { exit, summary })
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub id: &'static str,
    pub worst: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// `\int f g dx` from the coefficients.
fn inner(f: &SpectralField, g: &SpectralField) -> f64 {
    let (a, b) = (f.half_spectrum(), g.half_spectrum());
    let mut s = (a[0].conj() * b[0]).re;
    for (x, y) in a.iter().zip(b).skip(1) {
        s += 2.0 * (x.conj() * y).re;
    }
    s
}

/// The oracle suite over `trials` seeded fields at band `k`.
pub fn identity_suite(seed: u64, trials: usize, k: usize) -> Result<Vec<IdentityCheck>> {
    let spec = EnsembleSpec::new(seed);
    let grid = GridSpec::new(k)?;
    let quad = (2 * (3 * k + 1)).max(512).next_multiple_of(2);
    let rows: Result<Vec<[f64; 7]>> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let f = spec.sample(grid, 2 * i)?;
            let h = spec.sample(grid, 2 * i + 1)?;
            let mut paths: f64 = 0.0;
            for nu in [0.0, 1.0] {
                paths = paths.max((&rhs_pseudospectral(&f, nu) - &rhs_convolution(&f, nu)).wiener(0.0));
            }
            let pv = (&rhs_pv_quadrature(&f, quad)?.field - &rhs_convolution(&f, 0.0)).wiener(0.0);
            let energy = (inner(&f, &rhs_pseudospectral(&f, 0.0)) - trilinear_n_fourier(&f, &f)?).abs();
            let tri_n = (trilinear_n(&f, &h, &h)? - trilinear_n_fourier(&f, &h)?).abs();
            let tri_m = (trilinear_m(&f, &h, &h, 1.0)? - trilinear_m_fourier(&f, &h, 1.0)?).abs();
            let (lo, hi) = block_range(k);
            let mut recon = SpectralField::zeros(grid);
            let mut bony: f64 = 0.0;
            for q in lo..=hi {
                recon = &recon + &delta_q(&f, q);
                bony = bony.max(bony_terms(&f, &h, q)?.defect());
            }
            let recon = (&recon - &f).wiener(0.0);
            Ok([paths, pv, energy, tri_n, tri_m, recon, bony])
        })
        .collect();
    let rows = rows?;
    let spec: [(&'static str, f64); 7] = [
        ("rhs_spectral_paths", 1e-10),
        ("rhs_pv_quadrature", 1e-8),
        ("energy_identity", 1e-10),
        ("trilinear_N_paths", 1e-10),
        ("trilinear_M_paths", 1e-10),
        ("lp_reconstruction", 1e-12),
        ("bony_identity", 1e-12),
    ];
    Ok(spec
        .iter()
        .enumerate()
        .map(|(j, &(id, tolerance))| {
            let worst = rows.iter().map(|r| r[j]).fold(0.0, f64::max);
            IdentityCheck {
                id,
                worst,
                tolerance,
                pass: worst <= tolerance,
            }
        })
        .collect())
}

/// Oracle-equivalence suite; writes `identities.json`.
pub fn cmd_verify_identities(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let seed = cfg.seed.unwrap_or(0);
    let checks = identity_suite(seed, cfg.identities.trials, cfg.identities.k)?;
    write_json(&cfg.output_dir.join("identities.json"), &checks)?;
    let mut summary = String::new();
    for c in &checks {
        let _ = writeln!(
            summary,
            "{:<20} {} worst={:.3e} tol={:.0e}",
            c.id,
            if c.pass { "pass" } else { "FAIL" },
            c.worst,
            c.tolerance
        );
    }
    let exit = if checks.iter().all(|c| c.pass) {
        Exit::Ok
    } else {
        Exit::CheckFailed
    };
    write_meta(cfg, "verify-identities", Vec::new(), exit)?;
    Ok(Outcome { exit, summary })
}

#[derive(Serialize)]
struct LpOutput {
    lp: crate::lp::LpReport,
    trilinear_k: crate::monitors::TrilinearConstants,
    trilinear_2k: crate::monitors::TrilinearConstants,
}

/// Littlewood-Paley probes plus the measured trilinear constants at `K`
/// and `2K`; writes `lp_check.json`.
pub fn cmd_lp_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let seed = cfg.seed.unwrap_or(0);
    let ProbeSection { k, trials } = cfg.lp;
    let lp = lp_check(seed, trials, k)?;
    let spec = EnsembleSpec::new(seed);
    let trilinear_k = measure_trilinear_constants(&spec, GridSpec::new(k)?, trials, 1.0)?;
    let trilinear_2k = measure_trilinear_constants(&spec, GridSpec::new(2 * k)?, trials, 1.0)?;
    let mut summary = String::new();
    for c in &lp.checks {
        let _ = writeln!(
            summary,
            "{:<30} {} value={:.3e} tol={:.1e}",
            c.id,
            if c.pass { "pass" } else { "FAIL" },
            c.value,
            c.tolerance
        );
    }
    let _ = writeln!(
        summary,
        "commutator_constant K={k}: {:.6e}  K={}: {:.6e}",
        lp.commutator_constant.0,
        2 * k,
        lp.commutator_constant.1
    );
    let _ = writeln!(
        summary,
        "trilinear N ratio {:.6e} -> {:.6e}, M ratio {:.6e} -> {:.6e}",
        trilinear_k.n_ratio, trilinear_2k.n_ratio, trilinear_k.m_ratio, trilinear_2k.m_ratio
    );
    let exit = if lp.all_pass() { Exit::Ok } else { Exit::CheckFailed };
    write_json(
        &cfg.output_dir.join("lp_check.json"),
        &LpOutput {
            lp,
            trilinear_k,
            trilinear_2k,
        },
    )?;
    write_meta(cfg, "lp-check", Vec::new(), exit)?;
    Ok(Outcome { exit, summary })
}

pub const SWEEP_INDEX_HEADER: &str =
    "cell,scale,nu,config_hash,termination,final_t,final_A0,final_A1,final_L2,final_H2,monitors_failed";

/// Runs every `(scale, nu)` cell in parallel, one deterministic run each.
/// Writes `cells/cell_NNN.csv` and `index.csv`.
pub fn cmd_sweep(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let f0 = cfg.initial_field()?;
    let cells: Vec<(f64, f64)> = cfg
        .sweep
        .scales
        .iter()
        .flat_map(|&s| cfg.sweep.nus.iter().map(move |&n| (s, n)))
        .collect();
    let results: Result<Vec<(String, Exit)>> = cells
        .par_iter()
        .enumerate()
        .map(|(i, &(scale, nu))| {
            let mut cell_cfg = cfg.clone();
            cell_cfg.solver.nu = nu;
            let mut solver = cell_cfg.solver_config()?;
            solver.nu = nu;
            let traj = evolve(&f0.scale(scale), &solver)?;
            let verdicts = run_all(&traj, &cfg.monitors)?;
            write_file(&cfg.output_dir.join("cells").join(format!("cell_{i:03}.csv")), &traj.to_csv())?;
            let hash = hex_digest(format!("{}:{}:{}", cell_cfg.hash(), fmt_f64(scale), fmt_f64(nu)).as_bytes());
            let last = traj.steps.last().expect("trajectory has a first row");
            let failed = verdicts.iter().filter(|v| v.failed()).count();
            let row = format!(
                "{i},{},{},{hash},{},{},{},{},{},{},{failed}",
                fmt_f64(scale),
                fmt_f64(nu),
                traj.termination.label(),
                fmt_f64(last.t),
                fmt_f64(last.norms.a0),
                fmt_f64(last.norms.a1),
                fmt_f64(last.norms.l2),
                fmt_f64(last.norms.sobolev_order(2.0).unwrap_or(f64::NAN)),
            );
            let exit = if !traj.completed() {
                Exit::Blowup
            } else {
                verdict_exit(&verdicts)
            };
            Ok((row, exit))
        })
        .collect();
    let results = results?;
    let mut index = format!("{SWEEP_INDEX_HEADER}\n");
    let mut exit = Exit::Ok;
    for (row, e) in &results {
        index.push_str(row);
        index.push('\n');
        exit = exit.worst(*e);
    }
    write_file(&cfg.output_dir.join("index.csv"), &index)?;
    write_meta(cfg, "sweep", Vec::new(), exit)?;
    Ok(Outcome {
        exit,
        summary: format!("{} cells, exit {}\n", results.len(), exit.code()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_presets_and_rejects_unknown_fields() {
        let cfg = ExperimentConfig::from_json(
            r#"{"seed": 3, "initial": {"preset": "random", "K": 8}, "solver": {"K": 16, "dt": 0.01, "t_end": 0.1}}"#,
        )
        .unwrap();
        assert_eq!(
            cfg.initial,
            InitialData::Random {
                seed: None,
                k: 8,
                decay_exponent: 3.0,
                a1_norm: None
            }
        );
        cfg.validate().unwrap();
        assert!(ExperimentConfig::from_json(r#"{"solver": {"K": 16, "dt_typo": 1}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"initial": {"preset": "two_mode", "a1": 1}}"#).is_err());
        assert!(ExperimentConfig::from_json("{").is_err());
    }

    #[test]
    fn validation_catches_ranges() {
        let mut cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        cfg.initial = InitialData::Random {
            seed: None,
            k: 8,
            decay_exponent: 3.0,
            a1_norm: None,
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.apply(&Overrides {
            seed: Some(1),
            ..Default::default()
        });
        cfg.validate().unwrap();
        cfg.solver.dt = -1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.initial = InitialData::FromSnapshot {
            path: PathBuf::from("/nonexistent/snap.json"),
        };
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.initial = InitialData::SingleMode { a: 0.1, m: 40 };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn initial_presets() {
        let mut cfg = ExperimentConfig::default();
        cfg.solver.k = 8;
        cfg.initial = InitialData::TwoMode { a1: 0.1, a2: 0.2 };
        let f = cfg.initial_field().unwrap();
        let expected = &SpectralField::cosine(cfg.grid().unwrap(), 1, 0.1).unwrap()
            + &SpectralField::cosine(cfg.grid().unwrap(), 2, 0.2).unwrap();
        assert_eq!(f, expected);
        cfg.initial = InitialData::Random {
            seed: Some(4),
            k: 4,
            decay_exponent: 3.0,
            a1_norm: Some(0.4),
        };
        let f = cfg.initial_field().unwrap();
        assert!((f.wiener(1.0) - 0.4).abs() < 1e-15);
        assert!(f.coeff(5).norm() == 0.0);
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        b.output_dir = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.solver.nu = 1.0;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn zero_data_evolve_is_clean() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::default();
        cfg.solver.k = 8;
        cfg.solver.t_end = 0.05;
        cfg.solver.dt = 0.01;
        cfg.initial = InitialData::SingleMode { a: 0.0, m: 1 };
        cfg.output_dir = dir.path().to_path_buf();
        let out = cmd_evolve(&cfg).unwrap();
        assert_eq!(out.exit, Exit::Ok);
        let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(crate::evolve::CSV_HEADER));
        for line in lines {
            let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            assert!(cols[1..13].iter().all(|v| *v == 0.0), "{line}");
        }
        assert!(dir.path().join("meta.json").is_file());
        assert!(dir.path().join("snapshots/snap_00000.json").is_file());
    }

    #[test]
    fn identity_suite_small() {
        let checks = identity_suite(1, 2, 8).unwrap();
        for c in checks {
            assert!(c.pass, "{c:?}");
        }
    }
}
