//! Model assembly: parameters → Hamiltonian → generator → steady state.

use serde::{Deserialize, Serialize};

use crate::circuit::{ModelParams, QubitLevel};
use crate::error::{Error, Result};
use crate::hilbert::HilbertSpace;
use crate::liouvillian::{build_rate_tensor_with, fourier_components, FourierComponents, Liouvillian, RateOptions};
use crate::rwa::{build_rwa_hamiltonian_with, quasienergy_spectrum, QuasiSpectrum, RwaTerms};
use crate::steady::{population_difference, response_amplitude, steady_state, SteadyState};

pub const DEFAULT_N_FOCK: usize = 20;

/// How the qubit enters a response calculation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QubitMode {
    /// Full qubit-detector model.
    Coupled,
    /// Qubit held in τz = +1.
    Up,
    /// Qubit held in τz = −1.
    Down,
    /// Detector alone at the bare frequency.
    DetectorOnly,
}

impl QubitMode {
    pub const ALL: [QubitMode; 4] = [
        QubitMode::Coupled,
        QubitMode::Up,
        QubitMode::Down,
        QubitMode::DetectorOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QubitMode::Coupled => "coupled",
            QubitMode::Up => "up",
            QubitMode::Down => "down",
            QubitMode::DetectorOnly => "detector-only",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "coupled" => Some(QubitMode::Coupled),
            "up" | "pinned-up" => Some(QubitMode::Up),
            "down" | "pinned-down" => Some(QubitMode::Down),
            "detector-only" | "detector" => Some(QubitMode::DetectorOnly),
            _ => None,
        }
    }

    pub fn level(self) -> Option<QubitLevel> {
        match self {
            QubitMode::Up => Some(QubitLevel::Up),
            QubitMode::Down => Some(QubitLevel::Down),
            _ => None,
        }
    }
}

/// Model used for pinned qubit states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PinnedModel {
    /// Detector alone with Ω → Ω ± g.
    #[default]
    ShiftedDetector,
    /// Qubit-detector model without the two-photon exchange term, steady
    /// state projected on the τz sector.
    CoupledSector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub n_fock: usize,
    pub rates: RateOptions,
    pub pinned: PinnedModel,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            n_fock: DEFAULT_N_FOCK,
            rates: RateOptions::default(),
            pinned: PinnedModel::default(),
        }
    }
}

impl SolveOptions {
    pub fn with_n_fock(n_fock: usize) -> Self {
        Self {
            n_fock,
            ..Self::default()
        }
    }
}

/// Everything computed for one parameter point.
#[derive(Debug, Clone)]
pub struct ModelSolution {
    pub params: ModelParams,
    pub spectrum: QuasiSpectrum,
    pub components: FourierComponents,
    pub liouvillian: Liouvillian,
    pub steady: SteadyState,
}

impl ModelSolution {
    pub fn amplitude(&self) -> f64 {
        response_amplitude(&self.steady, &self.components)
    }

    pub fn population_difference(&self) -> Result<f64> {
        population_difference(&self.steady, &self.components, &self.params)
    }
}

fn assemble(
    p: &ModelParams,
    space: HilbertSpace,
    terms: RwaTerms,
    rates: RateOptions,
) -> Result<(QuasiSpectrum, FourierComponents, Liouvillian)> {
    p.validate()?;
    for w in p.regime_warnings() {
        log::warn!("{w}");
    }
    let qs = quasienergy_spectrum(&build_rwa_hamiltonian_with(p, space, terms))?;
    let fc = fourier_components(&qs);
    let liou = build_rate_tensor_with(&fc, &qs, p, rates)?;
    Ok((qs, fc, liou))
}

/// Detector without qubit at the frequency `p.omega`; g is ignored.
pub fn solve_detector(p: &ModelParams, opts: &SolveOptions) -> Result<ModelSolution> {
    let space = HilbertSpace::detector(opts.n_fock)?;
    let (qs, fc, liou) = assemble(p, space, RwaTerms::default(), opts.rates)?;
    let steady = steady_state(&liou, None)?;
    Ok(ModelSolution {
        params: *p,
        spectrum: qs,
        components: fc,
        liouvillian: liou,
        steady,
    })
}

/// Full qubit-detector model.
pub fn solve_coupled(p: &ModelParams, opts: &SolveOptions) -> Result<ModelSolution> {
    solve_coupled_with(p, opts, RwaTerms::default(), None)
}

fn solve_coupled_with(
    p: &ModelParams,
    opts: &SolveOptions,
    terms: RwaTerms,
    sector: Option<QubitLevel>,
) -> Result<ModelSolution> {
    let space = HilbertSpace::with_qubit(opts.n_fock)?;
    let (qs, fc, liou) = assemble(p, space, terms, opts.rates)?;
    let steady = steady_state(&liou, sector)?;
    Ok(ModelSolution {
        params: *p,
        spectrum: qs,
        components: fc,
        liouvillian: liou,
        steady,
    })
}

/// Detector response with the qubit held in `level`.
pub fn solve_pinned(p: &ModelParams, level: QubitLevel, opts: &SolveOptions) -> Result<ModelSolution> {
    match opts.pinned {
        PinnedModel::ShiftedDetector => solve_detector(&p.shifted_detector(level), opts),
        PinnedModel::CoupledSector => solve_coupled_with(
            p,
            opts,
            RwaTerms {
                two_photon_exchange: false,
            },
            Some(level),
        ),
    }
}

pub fn solve_mode(p: &ModelParams, mode: QubitMode, opts: &SolveOptions) -> Result<ModelSolution> {
    match mode {
        QubitMode::Coupled => solve_coupled(p, opts),
        QubitMode::Up => solve_pinned(p, QubitLevel::Up, opts),
        QubitMode::Down => solve_pinned(p, QubitLevel::Down, opts),
        QubitMode::DetectorOnly => solve_detector(p, opts),
    }
}

/// P∞ reported for a mode: the stationary value where a qubit is present,
/// ±cosθ for a pinned qubit outside the coupled model, NaN otherwise.
pub fn mode_population_difference(sol: &ModelSolution, mode: QubitMode, p: &ModelParams) -> f64 {
    if sol.spectrum.space.has_qubit() {
        return sol.population_difference().unwrap_or(f64::NAN);
    }
    match mode.level() {
        Some(level) => level.tau_z() * p.theta().cos(),
        None => f64::NAN,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    pub n_fock: usize,
    pub n_fock_check: usize,
    pub amplitude: f64,
    pub amplitude_check: f64,
    pub rel_change: f64,
    pub converged: bool,
}

/// Relative convergence threshold for the Fock truncation.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-4;

/// Compares A of the detector at `n_fock` and `2 n_fock` levels.
pub fn check_truncation_convergence(p: &ModelParams, n_fock: usize) -> Result<ConvergenceReport> {
    let a = solve_detector(p, &SolveOptions::with_n_fock(n_fock))?.amplitude();
    let b = solve_detector(p, &SolveOptions::with_n_fock(2 * n_fock))?.amplitude();
    let rel_change = if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    };
    Ok(ConvergenceReport {
        n_fock,
        n_fock_check: 2 * n_fock,
        amplitude: a,
        amplitude_check: b,
        rel_change,
        converged: rel_change < CONVERGENCE_TOLERANCE,
    })
}

/// Doubles n_fock from `start` until converged or `cap` is exceeded.
pub fn required_n_fock(p: &ModelParams, start: usize, cap: usize) -> Result<ConvergenceReport> {
    let mut n = start.max(2);
    loop {
        let r = check_truncation_convergence(p, n)?;
        if r.converged {
            return Ok(r);
        }
        if 2 * n > cap {
            return Err(Error::NotConverged {
                cap,
                rel_change: r.rel_change,
            });
        }
        n *= 2;
    }
}
