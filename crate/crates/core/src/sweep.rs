//! Drive-frequency sweeps over qubit modes and drive strengths, and the CSV
//! tables written by the command-line tool.
//!
//! Numbers are written with 17 significant digits; +∞ is `inf` and failed
//! values are `nan` with the reason in the `error` column.

use rayon::prelude::*;
use std::io::Write;

use crate::circuit::{linspace, CircuitMapRow, ModelParams};
use crate::error::{Error, Result};
use crate::hilbert::HilbertSpace;
use crate::linalg;
use crate::metrics::{metrics_from, noise_spectra, MetricsRow, SpectrumModel};
use crate::pipeline::{mode_population_difference, solve_mode, QubitMode, SolveOptions};
use crate::propagate::{relax_to_stationary, Rk4Options};
use crate::rwa::{Resonance, TrackedSpectrum};
use crate::spectra::{efficiency, measurement_time};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub params: ModelParams,
    pub omega_from: f64,
    pub omega_to: f64,
    pub points: usize,
    pub modes: Vec<QubitMode>,
    /// Drive strengths; `None` uses `params.f`.
    pub f_list: Option<Vec<f64>>,
    pub solve: SolveOptions,
    /// Compute Γ, T_meas and efficiency per point.
    pub metrics: bool,
    pub spectrum_model: SpectrumModel,
}

impl SweepConfig {
    pub fn new(params: ModelParams, omega_from: f64, omega_to: f64, points: usize) -> Self {
        Self {
            params,
            omega_from,
            omega_to,
            points,
            modes: vec![QubitMode::DetectorOnly],
            f_list: None,
            solve: SolveOptions::default(),
            metrics: false,
            spectrum_model: SpectrumModel::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::Config(format!("points must be >= 2, got {}", self.points)));
        }
        if !(self.omega_from < self.omega_to) {
            return Err(Error::Config(format!(
                "sweep range must satisfy from < to, got [{}, {}]",
                self.omega_from, self.omega_to
            )));
        }
        if let Some(list) = &self.f_list {
            if list.is_empty() {
                return Err(Error::Config("f_list must not be empty".into()));
            }
            if list.iter().any(|f| !f.is_finite()) {
                return Err(Error::Config("f_list entries must be finite".into()));
            }
        }
        if self.solve.n_fock < 2 {
            return Err(Error::Config(format!("n_fock must be >= 2, got {}", self.solve.n_fock)));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        linspace(self.omega_from, self.omega_to, self.points)
    }

    pub fn drives(&self) -> Vec<f64> {
        self.f_list.clone().unwrap_or_else(|| vec![self.params.f])
    }

    /// Modes in output order, without duplicates.
    pub fn ordered_modes(&self) -> Vec<QubitMode> {
        let mut m = self.modes.clone();
        m.sort();
        m.dedup();
        m
    }

    fn needs_discrimination(&self) -> bool {
        self.metrics || (self.modes.contains(&QubitMode::Up) && self.modes.contains(&QubitMode::Down))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub omega_ex: f64,
    pub f: f64,
    pub mode: QubitMode,
    pub a: f64,
    pub a_abs: f64,
    pub p_inf: f64,
    pub d: f64,
    pub gamma: f64,
    pub t_meas: f64,
    pub efficiency: f64,
    pub null_residual: f64,
    pub n_fock_used: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
struct PointResult {
    rows: Vec<SweepRow>,
    metrics: Option<std::result::Result<MetricsRow, String>>,
}

fn solve_point(cfg: &SweepConfig, p: &ModelParams, modes: &[QubitMode]) -> PointResult {
    let n_fock = cfg.solve.n_fock;
    let mut rows: Vec<SweepRow> = Vec::with_capacity(modes.len());
    let mut amps = std::collections::HashMap::new();
    for &mode in modes {
        let row = match solve_mode(p, mode, &cfg.solve) {
            Ok(sol) => {
                let a = sol.amplitude();
                amps.insert(mode, a);
                SweepRow {
                    omega_ex: p.omega_ex,
                    f: p.f,
                    mode,
                    a,
                    a_abs: a.abs(),
                    p_inf: mode_population_difference(&sol, mode, p),
                    d: f64::NAN,
                    gamma: f64::NAN,
                    t_meas: f64::NAN,
                    efficiency: f64::NAN,
                    null_residual: sol.steady.residual,
                    n_fock_used: n_fock,
                    error: None,
                }
            }
            Err(e) => failed_row(p, mode, n_fock, &e.to_string()),
        };
        rows.push(row);
    }

    let mut metrics = None;
    if cfg.needs_discrimination() {
        let amp = |m: QubitMode| -> std::result::Result<f64, String> {
            match amps.get(&m) {
                Some(a) => Ok(*a),
                None => solve_mode(p, m, &cfg.solve)
                    .map(|s| s.amplitude())
                    .map_err(|e| e.to_string()),
            }
        };
        let pair = amp(QubitMode::Up).and_then(|u| amp(QubitMode::Down).map(|d| (u, d)));
        let m = pair.and_then(|(a_up, a_down)| {
            if cfg.metrics {
                noise_spectra(p, cfg.spectrum_model, &cfg.solve)
                    .map(|s| metrics_from(p, a_up, a_down, &s))
                    .map_err(|e| e.to_string())
            } else {
                let d = (a_up - a_down).abs();
                Ok(MetricsRow {
                    omega_ex: p.omega_ex,
                    f: p.f,
                    a_up,
                    a_down,
                    d,
                    s_chi_zero: f64::NAN,
                    s_chi2_qubit: f64::NAN,
                    gamma: f64::NAN,
                    t_meas: f64::NAN,
                    efficiency: f64::NAN,
                    kappa_eff: f64::NAN,
                    gamma_harm: f64::NAN,
                })
            }
        });
        for row in &mut rows {
            match &m {
                Ok(m) => {
                    row.d = m.d;
                    row.gamma = m.gamma;
                    row.t_meas = m.t_meas;
                    row.efficiency = m.efficiency;
                }
                Err(e) if row.error.is_none() => row.error = Some(e.clone()),
                Err(_) => {}
            }
        }
        metrics = Some(m);
    }
    PointResult { rows, metrics }
}

fn failed_row(p: &ModelParams, mode: QubitMode, n_fock: usize, err: &str) -> SweepRow {
    SweepRow {
        omega_ex: p.omega_ex,
        f: p.f,
        mode,
        a: f64::NAN,
        a_abs: f64::NAN,
        p_inf: f64::NAN,
        d: f64::NAN,
        gamma: f64::NAN,
        t_meas: f64::NAN,
        efficiency: f64::NAN,
        null_residual: f64::NAN,
        n_fock_used: n_fock,
        error: Some(err.to_owned()),
    }
}

/// Sweep output: rows ordered by f, then mode, then ω_ex, plus one metrics
/// record per (f, ω_ex) when discrimination was computed.
#[derive(Debug, Clone, Default)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub metrics: Vec<std::result::Result<MetricsRow, (f64, f64, String)>>,
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let modes = cfg.ordered_modes();
    let grid = cfg.grid();
    let drives = cfg.drives();
    if modes.is_empty() && !cfg.metrics {
        return Ok(SweepOutput::default());
    }
    let tasks: Vec<(usize, usize)> = (0..drives.len())
        .flat_map(|i| (0..grid.len()).map(move |k| (i, k)))
        .collect();
    let results: Vec<PointResult> = tasks
        .par_iter()
        .map(|&(i, k)| {
            let p = cfg.params.with_drive(drives[i]).with_omega_ex(grid[k]);
            solve_point(cfg, &p, &modes)
        })
        .collect();

    let mut out = SweepOutput::default();
    for i in 0..drives.len() {
        let block = &results[i * grid.len()..(i + 1) * grid.len()];
        for (j, _) in modes.iter().enumerate() {
            out.rows.extend(block.iter().map(|r| r.rows[j].clone()));
        }
        for (k, r) in block.iter().enumerate() {
            if let Some(m) = &r.metrics {
                out.metrics
                    .push(m.clone().map_err(|e| (drives[i], grid[k], e)));
            }
        }
    }
    Ok(out)
}

/// Numeric CSV field: 17 significant digits, `inf`/`-inf`/`nan` sentinels.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_text(s: &str) -> String {
    s.replace([',', '\n', '\r'], ";")
}

pub const SWEEP_HEADER: &str = "omega_ex[Omega],f[Omega],qubit_mode,A[chi0],A_abs[chi0],P_inf,D[chi0],Gamma[Omega],T_meas[2pi/Omega],efficiency,null_residual,n_fock_used,error";

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_num(r.omega_ex),
            fmt_num(r.f),
            r.mode.name(),
            fmt_num(r.a),
            fmt_num(r.a_abs),
            fmt_num(r.p_inf),
            fmt_num(r.d),
            fmt_num(r.gamma),
            fmt_num(r.t_meas),
            fmt_num(r.efficiency),
            fmt_num(r.null_residual),
            r.n_fock_used,
            r.error.as_deref().map(fmt_text).unwrap_or_default()
        )?;
    }
    Ok(())
}

pub const METRICS_HEADER: &str = "omega_ex[Omega],f[Omega],A_up[chi0],A_down[chi0],D[chi0],S_chi_0[chi0^2/Omega],S_chi2_qb[chi0^4/Omega],Gamma[Omega],Gamma_over_gamma,T_meas[2pi/Omega],efficiency,kappa_eff,Gamma_harm[Omega],error";

pub fn write_metrics_csv<W: Write>(
    rows: &[std::result::Result<MetricsRow, (f64, f64, String)>],
    damping: f64,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "{METRICS_HEADER}")?;
    for r in rows {
        match r {
            Ok(m) => writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},",
                fmt_num(m.omega_ex),
                fmt_num(m.f),
                fmt_num(m.a_up),
                fmt_num(m.a_down),
                fmt_num(m.d),
                fmt_num(m.s_chi_zero),
                fmt_num(m.s_chi2_qubit),
                fmt_num(m.gamma),
                fmt_num(m.gamma / damping),
                fmt_num(m.t_meas),
                fmt_num(m.efficiency),
                fmt_num(m.kappa_eff),
                fmt_num(m.gamma_harm),
            )?,
            Err((f, w_ex, e)) => writeln!(
                w,
                "{},{},nan,nan,nan,nan,nan,nan,nan,nan,nan,nan,nan,{}",
                fmt_num(*w_ex),
                fmt_num(*f),
                fmt_text(e)
            )?,
        }
    }
    Ok(())
}

pub const CIRCUIT_MAP_HEADER: &str = "phi_ex[Phi0],alpha_over_Omega,g_over_Omega,Omega[rad/s]";

pub fn write_circuit_map_csv<W: Write>(rows: &[CircuitMapRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CIRCUIT_MAP_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_num(r.phi_ex),
            fmt_num(r.alpha),
            fmt_num(r.g),
            fmt_num(r.omega_rad_s)
        )?;
    }
    Ok(())
}

pub const RESONANCE_HEADER: &str = "N,omega_center[Omega],omega_N[Omega],gap[Omega],gap_rabi_formula[Omega],gap_ratio,branch_weight,resolved";

pub fn write_resonances_csv<W: Write>(rows: &[Resonance], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{RESONANCE_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.photons,
            fmt_num(r.center),
            fmt_num(r.omega_ex),
            fmt_num(r.gap),
            fmt_num(r.gap_formula),
            fmt_num(r.gap / r.gap_formula),
            fmt_num(r.branch_weight),
            if r.resolved { "yes" } else { "unresolved" }
        )?;
    }
    Ok(())
}

pub const SPECTRUM_HEADER: &str = "omega[Omega],S[chi0^k/Omega]";

pub fn write_spectrum_csv<W: Write>(rows: &[(f64, f64)], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{SPECTRUM_HEADER}")?;
    for (x, s) in rows {
        writeln!(w, "{},{}", fmt_num(*x), fmt_num(*s))?;
    }
    Ok(())
}

pub const QUASIENERGY_HEADER: &str = "omega_ex[Omega],branch,quasienergy[Omega],min_overlap";

pub fn write_quasienergies_csv<W: Write>(t: &TrackedSpectrum, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{QUASIENERGY_HEADER}")?;
    for (b, branch) in t.branches.iter().enumerate() {
        for (k, e) in branch.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{}",
                fmt_num(t.omega_ex[k]),
                b,
                fmt_num(*e),
                fmt_num(t.min_overlap[k])
            )?;
        }
    }
    Ok(())
}

/// Tolerance of the stationary-state oracle comparison.
pub const ORACLE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub omega_ex: f64,
    pub mode: QubitMode,
    pub n_fock: usize,
    /// max |ρ_null − ρ_RK4| over all elements in the product basis.
    pub max_diff: f64,
    pub step: f64,
    pub horizon: f64,
    pub steps: u128,
    pub step_change: f64,
    pub pass: bool,
    pub error: Option<String>,
}

/// Compares the null-space stationary state with RK4 propagation from the
/// Fock vacuum (qubit in τz = −1 where present). Propagation uses
/// `reference_n_fock` levels (default `n_fock`); a smaller null-space state
/// is compared after padding with zeros.
pub fn oracle_compare(
    p: &ModelParams,
    mode: QubitMode,
    omegas: &[f64],
    n_fock: usize,
    reference_n_fock: Option<usize>,
    rk4: &Rk4Options,
) -> Vec<OracleReport> {
    let n_ref = reference_n_fock.unwrap_or(n_fock).max(n_fock);
    omegas
        .iter()
        .map(|&w| {
            let q = p.with_omega_ex(w);
            let report = |e: Error| OracleReport {
                omega_ex: w,
                mode,
                n_fock,
                max_diff: f64::NAN,
                step: f64::NAN,
                horizon: f64::NAN,
                steps: 0,
                step_change: f64::NAN,
                pass: false,
                error: Some(e.to_string()),
            };
            let sol = match solve_mode(&q, mode, &SolveOptions::with_n_fock(n_fock)) {
                Ok(s) => s,
                Err(e) => return report(e),
            };
            let reference = if n_ref == n_fock {
                sol.clone()
            } else {
                match solve_mode(&q, mode, &SolveOptions::with_n_fock(n_ref)) {
                    Ok(s) => s,
                    Err(e) => return report(e),
                }
            };
            let rho0 = reference.spectrum.to_quasi(&initial_state(reference.spectrum.space));
            match relax_to_stationary(&reference.liouvillian, &rho0, q.gamma, rk4) {
                Ok(prop) => {
                    let b = reference.spectrum.to_product(&prop.rho);
                    let a = embed(&sol.spectrum.to_product(&sol.steady.rho), b.nrows());
                    let max_diff = linalg::max_abs_diff(&a, &b);
                    OracleReport {
                        omega_ex: w,
                        mode,
                        n_fock,
                        max_diff,
                        step: prop.step,
                        horizon: prop.horizon,
                        steps: prop.steps,
                        step_change: prop.step_change,
                        pass: max_diff < ORACLE_TOLERANCE,
                        error: None,
                    }
                }
                Err(e) => report(e),
            }
        })
        .collect()
}

/// Product-basis indices are 2n + q (or n), so a smaller truncation is the
/// leading block of a larger one.
fn embed(m: &linalg::CMat, dim: usize) -> linalg::CMat {
    let mut out = linalg::zeros(dim, dim);
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out[(i, j)] = m[(i, j)];
        }
    }
    out
}

/// Product-basis density matrix of |0⟩ (⊗ |↓⟩).
pub fn initial_state(space: HilbertSpace) -> linalg::CMat {
    let d = space.dim();
    let i = if space.has_qubit() {
        space.index(0, Some(crate::circuit::QubitLevel::Down))
    } else {
        space.index(0, None)
    };
    let mut rho = linalg::zeros(d, d);
    rho[(i, i)] = linalg::c64::new(1.0, 0.0);
    rho
}

pub const ORACLE_HEADER: &str = "omega_ex[Omega],qubit_mode,n_fock,max_abs_diff,rk4_step[1/Omega],horizon[1/Omega],rk4_steps,step_halving_change,status,error";

pub fn write_oracle_csv<W: Write>(rows: &[OracleReport], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{ORACLE_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_num(r.omega_ex),
            r.mode.name(),
            r.n_fock,
            fmt_num(r.max_diff),
            fmt_num(r.step),
            fmt_num(r.horizon),
            r.steps,
            fmt_num(r.step_change),
            if r.pass { "PASS" } else { "FAIL" },
            r.error.as_deref().map(fmt_text).unwrap_or_default()
        )?;
    }
    Ok(())
}

/// T_meas and efficiency recomputed from a discrimination value, for
/// callers that already have the noise spectra.
pub fn readout_figures(d: f64, s_chi_zero: f64, gamma: f64) -> (f64, f64) {
    let t = measurement_time(d, s_chi_zero);
    (t, efficiency(gamma, t))
}
