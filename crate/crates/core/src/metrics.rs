//! Readout metrics per drive frequency: discrimination power, relaxation
//! rate, measurement time and efficiency.

use serde::{Deserialize, Serialize};

use crate::circuit::{ModelParams, QubitLevel};
use crate::error::Result;
use crate::pipeline::{solve_coupled, solve_detector, solve_pinned, ModelSolution, SolveOptions};
use crate::spectra::{
    efficiency, harmonic_estimates, measurement_time, relaxation_rate, Operator, PairSpectrum,
};

/// Which stationary state supplies the noise spectra for Γ and T_meas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumModel {
    /// Detector alone at the bare frequency (lowest order in g).
    #[default]
    Detector,
    /// Detector with Ω → Ω + g.
    Up,
    /// Detector with Ω → Ω − g.
    Down,
    /// Full qubit-detector model.
    Coupled,
}

pub fn solve_spectrum_model(
    p: &ModelParams,
    model: SpectrumModel,
    opts: &SolveOptions,
) -> Result<ModelSolution> {
    match model {
        SpectrumModel::Detector => solve_detector(p, opts),
        SpectrumModel::Up => solve_detector(&p.shifted_detector(QubitLevel::Up), opts),
        SpectrumModel::Down => solve_detector(&p.shifted_detector(QubitLevel::Down), opts),
        SpectrumModel::Coupled => solve_coupled(p, opts),
    }
}

/// Symmetrized spectra of χ+ and χ+² for one stationary state.
#[derive(Debug, Clone)]
pub struct NoiseSpectra {
    pub chi: PairSpectrum,
    pub chi2: PairSpectrum,
    pub omega_qb: f64,
}

impl NoiseSpectra {
    pub fn from_solution(sol: &ModelSolution) -> Result<Self> {
        let eig = sol.liouvillian.eigendecompose()?;
        let w = sol.params.omega_ex;
        let fc = &sol.components;
        Ok(Self {
            chi: PairSpectrum::new(&eig, fc, &sol.steady, Operator::Chi, Operator::Chi, w)?,
            chi2: PairSpectrum::new(&eig, fc, &sol.steady, Operator::Chi2, Operator::Chi2, w)?,
            omega_qb: sol.params.omega_qb(),
        })
    }

    /// S_{χ+}(0)
    pub fn s_chi_zero(&self) -> f64 {
        self.chi.eval(0.0)
    }

    /// S_{χ+²}(−ω_qb)
    pub fn s_chi2_qubit(&self) -> f64 {
        self.chi2.eval(-self.omega_qb)
    }
}

pub fn noise_spectra(
    p: &ModelParams,
    model: SpectrumModel,
    opts: &SolveOptions,
) -> Result<NoiseSpectra> {
    NoiseSpectra::from_solution(&solve_spectrum_model(p, model, opts)?)
}

/// Symmetrized spectrum of (op_a, op_b) on a frequency grid.
pub fn spectrum_scan(
    p: &ModelParams,
    model: SpectrumModel,
    op_a: Operator,
    op_b: Operator,
    omegas: &[f64],
    opts: &SolveOptions,
) -> Result<Vec<(f64, f64)>> {
    let sol = solve_spectrum_model(p, model, opts)?;
    let eig = sol.liouvillian.eigendecompose()?;
    let pair = PairSpectrum::new(&eig, &sol.components, &sol.steady, op_a, op_b, p.omega_ex)?;
    Ok(omegas.iter().map(|&w| (w, pair.eval(w))).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub omega_ex: f64,
    pub f: f64,
    pub a_up: f64,
    pub a_down: f64,
    /// |A_up − A_down|, units of χ0.
    pub d: f64,
    /// S_{χ+}(0), units of χ0²/Ω.
    pub s_chi_zero: f64,
    /// S_{χ+²}(−ω_qb), units of χ0⁴/Ω.
    pub s_chi2_qubit: f64,
    /// Units of Ω.
    pub gamma: f64,
    /// Units of 2π/Ω.
    pub t_meas: f64,
    pub efficiency: f64,
    pub kappa_eff: f64,
    pub gamma_harm: f64,
}

/// Discrimination power, noise and readout metrics at `p.omega_ex`.
pub fn metrics_point(
    p: &ModelParams,
    opts: &SolveOptions,
    model: SpectrumModel,
) -> Result<MetricsRow> {
    let up = solve_pinned(p, QubitLevel::Up, opts)?;
    let down = solve_pinned(p, QubitLevel::Down, opts)?;
    let spectra = noise_spectra(p, model, opts)?;
    Ok(metrics_from(p, up.amplitude(), down.amplitude(), &spectra))
}

pub fn metrics_from(p: &ModelParams, a_up: f64, a_down: f64, spectra: &NoiseSpectra) -> MetricsRow {
    let d = (a_up - a_down).abs();
    let s_chi_zero = spectra.s_chi_zero();
    let s_chi2_qubit = spectra.s_chi2_qubit();
    let gamma = relaxation_rate(p, s_chi2_qubit);
    let t_meas = measurement_time(d, s_chi_zero);
    let h = harmonic_estimates(p);
    MetricsRow {
        omega_ex: p.omega_ex,
        f: p.f,
        a_up,
        a_down,
        d,
        s_chi_zero,
        s_chi2_qubit,
        gamma,
        t_meas,
        efficiency: efficiency(gamma, t_meas),
        kappa_eff: h.kappa_eff,
        gamma_harm: h.gamma_harm,
    }
}
