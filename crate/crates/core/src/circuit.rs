//! Circuit parameters of the SQUID detector and flux qubit, and their
//! reduction to the dimensionless Duffing model.
//!
//! Everything downstream of this module works in units with ħ = k_B = 1 and
//! the detector frequency Ω = 1.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Magnetic flux quantum h/2e in Wb.
pub const FLUX_QUANTUM: f64 = 2.067_833_848e-15;
/// Reduced Planck constant in J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Drive, coupling and nonlinearity above this fraction of Ω leave the
/// weak-driving regime in which the RWA model is derived.
pub const WEAK_REGIME_LIMIT: f64 = 0.1;
/// Largest |ω_qb − 2ω_ex| (units of Ω) for which the two-photon RWA of the
/// qubit-detector coupling is trusted.
pub const QUBIT_DETUNING_LIMIT: f64 = 0.5;

/// Physical circuit description (SI units; fluxes in units of Φ0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    /// Shunt capacitance, F.
    pub c_s: f64,
    /// Critical current of each junction, A.
    pub i_c0: f64,
    /// Qubit persistent current, A.
    pub i_p: f64,
    /// Qubit-SQUID mutual inductance, H.
    pub m: f64,
    /// External SQUID flux, Φ0.
    pub phi_ex: f64,
    /// Drive current amplitude, A.
    pub i_0: f64,
    /// Qubit flux bias, Φ0.
    pub phi_qb: f64,
    /// Qubit tunnel splitting, rad/s.
    pub delta: f64,
}

impl CircuitParams {
    /// The detector used for the parameter-ratio plots: C_s = 7.65 pF,
    /// I_c0 = 200 nA, I_p = 300 nA, M = 40 pH. Drive and qubit bias are
    /// placeholders.
    pub fn reference() -> Self {
        Self {
            c_s: 7.65e-12,
            i_c0: 200e-9,
            i_p: 300e-9,
            m: 40e-12,
            phi_ex: 0.1,
            i_0: 1e-9,
            phi_qb: 0.5,
            delta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("C_s", self.c_s),
            ("I_c0", self.i_c0),
            ("I_p", self.i_p),
            ("M", self.m),
            ("phi_ex", self.phi_ex),
            ("I_0", self.i_0),
            ("Phi_qb", self.phi_qb),
            ("Delta", self.delta),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        if self.c_s <= 0.0 {
            return Err(positive("C_s", self.c_s));
        }
        if self.i_c0 <= 0.0 {
            return Err(positive("I_c0", self.i_c0));
        }
        if self.i_p < 0.0 {
            return Err(non_negative("I_p", self.i_p));
        }
        if self.m < 0.0 {
            return Err(non_negative("M", self.m));
        }
        if (PI * self.phi_ex).cos().abs() < 1e-12 {
            return Err(Error::DegenerateFlux {
                phi_ex: self.phi_ex,
            });
        }
        Ok(())
    }
}

fn positive(name: &'static str, v: f64) -> Error {
    Error::InvalidParameter {
        name,
        reason: format!("must be > 0, got {v}"),
    }
}

fn non_negative(name: &'static str, v: f64) -> Error {
    Error::InvalidParameter {
        name,
        reason: format!("must be >= 0, got {v}"),
    }
}

/// Dimensionless model parameters, all in units of Ω (ħ = k_B = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega: f64,
    pub alpha: f64,
    pub f: f64,
    pub g: f64,
    pub eps: f64,
    pub delta: f64,
    pub gamma: f64,
    pub temp: f64,
    pub omega_ex: f64,
}

/// Qubit basis state, labelled by the τz eigenvalue. `Down` (τz = −1) is
/// the qubit ground state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QubitLevel {
    Up,
    Down,
}

impl QubitLevel {
    pub fn tau_z(self) -> f64 {
        match self {
            QubitLevel::Up => 1.0,
            QubitLevel::Down => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            QubitLevel::Up => QubitLevel::Down,
            QubitLevel::Down => QubitLevel::Up,
        }
    }
}

impl ModelParams {
    /// Mixing angle, tan θ = Δ/ε. Returns 0 when ε = Δ = 0, where it is
    /// undefined; `validate` rejects that case whenever g ≠ 0.
    pub fn theta(&self) -> f64 {
        if self.eps == 0.0 && self.delta == 0.0 {
            0.0
        } else {
            self.delta.atan2(self.eps)
        }
    }

    pub fn omega_qb(&self) -> f64 {
        self.eps.hypot(self.delta)
    }

    /// δΩ = Ω − ω_ex
    pub fn detuning(&self) -> f64 {
        self.omega - self.omega_ex
    }

    /// δω_qb = ω_qb − 2ω_ex
    pub fn qubit_detuning(&self) -> f64 {
        self.omega_qb() - 2.0 * self.omega_ex
    }

    pub fn with_omega_ex(mut self, omega_ex: f64) -> Self {
        self.omega_ex = omega_ex;
        self
    }

    pub fn with_drive(mut self, f: f64) -> Self {
        self.f = f;
        self
    }

    /// Detector alone with the frequency shifted by the qubit state,
    /// Ω → Ω ± g. The returned parameters have g = 0.
    pub fn shifted_detector(&self, level: QubitLevel) -> Self {
        Self {
            omega: self.omega + level.tau_z() * self.g,
            g: 0.0,
            ..*self
        }
    }

    /// Soft checks of the weak-coupling regime.
    pub fn regime_warnings(&self) -> Vec<String> {
        let mut out: Vec<String> = [("alpha", self.alpha), ("f", self.f), ("g", self.g)]
            .into_iter()
            .filter(|(_, v)| v.abs() > WEAK_REGIME_LIMIT * self.omega)
            .map(|(name, v)| {
                format!("{name} = {v} exceeds {WEAK_REGIME_LIMIT} Omega; outside the weak-driving regime")
            })
            .collect();
        let detuning = self.omega_qb() - 2.0 * self.omega_ex;
        if self.g != 0.0 && detuning.abs() > QUBIT_DETUNING_LIMIT * self.omega {
            out.push(format!(
                "omega_qb - 2 omega_ex = {detuning} exceeds {QUBIT_DETUNING_LIMIT} Omega; the qubit RWA may not hold"
            ));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("Omega", self.omega),
            ("alpha", self.alpha),
            ("f", self.f),
            ("g", self.g),
            ("eps", self.eps),
            ("delta", self.delta),
            ("gamma", self.gamma),
            ("temp", self.temp),
            ("omega_ex", self.omega_ex),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        if self.omega <= 0.0 {
            return Err(positive("Omega", self.omega));
        }
        if self.gamma < 0.0 {
            return Err(non_negative("gamma", self.gamma));
        }
        if self.temp < 0.0 {
            return Err(non_negative("temp", self.temp));
        }
        if self.g != 0.0 && self.eps == 0.0 && self.delta == 0.0 {
            return Err(Error::InvalidParameter {
                name: "eps",
                reason: "theta is undefined for eps = delta = 0".into(),
            });
        }
        Ok(())
    }
}

/// Named parameter sets of the reference readout setup.
pub fn reference_parameter_sets() -> Vec<(&'static str, ModelParams)> {
    let detector = ModelParams {
        omega: 1.0,
        alpha: 0.01,
        f: 0.006,
        g: 0.0,
        eps: 2.2,
        delta: 0.05,
        gamma: 1.6e-4,
        temp: 0.006,
        omega_ex: 0.98,
    };
    let coupled = ModelParams {
        g: 0.0012,
        ..detector
    };
    vec![("fig1-detector-only", detector), ("fig2-coupled", coupled)]
}

pub fn parameter_set(name: &str) -> Option<ModelParams> {
    reference_parameter_sets()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, p)| p)
}

/// Prefactor convention for the quartic term of the SQUID potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuarticConvention {
    /// α = 3 I_c φ0 χ0⁴.
    #[default]
    Reference,
    /// α = I_c φ0 χ0⁴ / 2, from the x⁴/24 Taylor coefficient of the
    /// cosine potential taken at face value.
    CosineTaylor,
}

/// Result of the circuit reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitMapping {
    /// Model parameters in units of Ω. γ, T and ω_ex are not fixed by the
    /// circuit and take the reference values.
    pub model: ModelParams,
    /// Detector frequency Ω in rad/s.
    pub omega_rad_s: f64,
    /// Zero-point displacement of the phase, χ0 = (ħ/2mΩ)^{1/2}.
    pub chi0: f64,
    /// Bilinear coupling g̃ in units of Ω, with g = 2 g̃ χ0².
    pub g_tilde: f64,
    pub alpha: f64,
    pub g: f64,
    pub f: f64,
}

pub fn map_circuit_to_model(c: &CircuitParams) -> Result<CircuitMapping> {
    map_circuit_to_model_with(c, QuarticConvention::Reference)
}

pub fn map_circuit_to_model_with(
    c: &CircuitParams,
    convention: QuarticConvention,
) -> Result<CircuitMapping> {
    c.validate()?;
    let phi0 = FLUX_QUANTUM / (2.0 * PI);
    let (s, co) = (PI * c.phi_ex).sin_cos();
    let i_c = 2.0 * c.i_c0 * co.abs();
    let mass = phi0 * phi0 * c.c_s;
    let omega = (i_c / (phi0 * c.c_s)).sqrt();
    let chi0 = (HBAR / (2.0 * mass * omega)).sqrt();
    let energy = HBAR * omega;

    let quartic = match convention {
        QuarticConvention::Reference => 3.0,
        QuarticConvention::CosineTaylor => 0.5,
    };
    let alpha = quartic * i_c * phi0 * chi0.powi(4) / energy;
    let f = c.i_0 * phi0 * chi0 / energy;
    let g_tilde = 2.0 * c.i_p * c.i_c0 * c.m * s / energy;
    let g = 2.0 * g_tilde * chi0 * chi0;
    let eps = 2.0 * c.i_p * FLUX_QUANTUM * (c.phi_qb - 0.5) / energy;
    let delta = c.delta / omega;

    let reference = reference_parameter_sets()[0].1;
    let model = ModelParams {
        omega: 1.0,
        alpha,
        f,
        g,
        eps,
        delta,
        ..reference
    };
    Ok(CircuitMapping {
        model,
        omega_rad_s: omega,
        chi0,
        g_tilde,
        alpha,
        g,
        f,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitMapRow {
    pub phi_ex: f64,
    pub alpha: f64,
    pub g: f64,
    pub omega_rad_s: f64,
}

/// α/Ω and g/Ω over an evenly spaced φ_ex grid.
pub fn circuit_map_scan(
    c: &CircuitParams,
    phi_from: f64,
    phi_to: f64,
    points: usize,
    convention: QuarticConvention,
) -> Result<Vec<CircuitMapRow>> {
    if points < 2 {
        return Err(Error::Config(format!("points must be >= 2, got {points}")));
    }
    if !(phi_from < phi_to) {
        return Err(Error::Config(format!(
            "phi range must satisfy from < to, got [{phi_from}, {phi_to}]"
        )));
    }
    linspace(phi_from, phi_to, points)
        .into_iter()
        .map(|phi_ex| {
            let m = map_circuit_to_model_with(&CircuitParams { phi_ex, ..*c }, convention)?;
            Ok(CircuitMapRow {
                phi_ex,
                alpha: m.alpha,
                g: m.g,
                omega_rad_s: m.omega_rad_s,
            })
        })
        .collect()
}

/// Location of the α/Ω = g/Ω crossing on a scan, linearly interpolated.
pub fn ratio_crossing(rows: &[CircuitMapRow]) -> Option<f64> {
    rows.windows(2).find_map(|w| {
        let d0 = w[0].g - w[0].alpha;
        let d1 = w[1].g - w[1].alpha;
        if d0 == 0.0 {
            Some(w[0].phi_ex)
        } else if d0.signum() != d1.signum() {
            let t = d0 / (d0 - d1);
            Some(w[0].phi_ex + t * (w[1].phi_ex - w[0].phi_ex))
        } else {
            None
        }
    })
}

pub fn linspace(from: f64, to: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![from],
        _ => (0..points)
            .map(|i| {
                if i + 1 == points {
                    to
                } else {
                    from + (to - from) * i as f64 / (points - 1) as f64
                }
            })
            .collect(),
    }
}
