//! Run configuration: a TOML file with `[circuit]` and/or `[model]`
//! parameter sections plus one section per command.
//!
//! `[circuit]` keys carry their SI unit in the name (`C_s_pF`, `I_c0_nA`,
//! `M_pH`, `Delta_GHz` is Δ/2π); `[model]` keys are in units of Ω and override
//! whatever the circuit produced. Parameters not given anywhere fall back to
//! the `base` parameter set (default `fig1-detector-only`).

use serde::{Deserialize, Serialize};

use crate::circuit::{
    map_circuit_to_model_with, parameter_set, CircuitParams, ModelParams, QuarticConvention,
};
use crate::error::{Error, Result};
use crate::metrics::SpectrumModel;
use crate::pipeline::{PinnedModel, QubitMode, SolveOptions, DEFAULT_N_FOCK};
use crate::spectra::Operator;
use crate::sweep::SweepConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub circuit: Option<CircuitSection>,
    pub model: Option<ModelSection>,
    pub sweep: Option<SweepSection>,
    pub circuit_map: Option<CircuitMapSection>,
    pub resonances: Option<ResonanceSection>,
    pub spectrum: Option<SpectrumSection>,
    pub oracle: Option<OracleSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSection {
    #[serde(rename = "C_s_pF")]
    pub c_s_pf: f64,
    #[serde(rename = "I_c0_nA")]
    pub i_c0_na: f64,
    #[serde(rename = "I_p_nA", default)]
    pub i_p_na: f64,
    #[serde(rename = "M_pH", default)]
    pub m_ph: f64,
    #[serde(default)]
    pub phi_ex: f64,
    #[serde(rename = "I_0_nA", default)]
    pub i_0_na: f64,
    /// Qubit flux bias in units of Φ0; with `Delta_GHz` absent too, ε and Δ
    /// come from the base set.
    #[serde(rename = "Phi_qb")]
    pub phi_qb: Option<f64>,
    #[serde(rename = "Delta_GHz")]
    pub delta_ghz: Option<f64>,
    #[serde(default)]
    pub quartic: QuarticConvention,
}

impl CircuitSection {
    pub fn params(&self) -> CircuitParams {
        CircuitParams {
            c_s: self.c_s_pf * 1e-12,
            i_c0: self.i_c0_na * 1e-9,
            i_p: self.i_p_na * 1e-9,
            m: self.m_ph * 1e-12,
            phi_ex: self.phi_ex,
            i_0: self.i_0_na * 1e-9,
            phi_qb: self.phi_qb.unwrap_or(0.5),
            delta: 2.0 * std::f64::consts::PI * self.delta_ghz.unwrap_or(0.0) * 1e9,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub base: Option<String>,
    pub omega: Option<f64>,
    pub alpha: Option<f64>,
    pub f: Option<f64>,
    pub g: Option<f64>,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub temp: Option<f64>,
    pub omega_ex: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub omega_ex_from: Option<f64>,
    pub omega_ex_to: Option<f64>,
    pub points: Option<usize>,
    pub modes: Option<Vec<String>>,
    pub f_list: Option<Vec<f64>>,
    pub n_fock: Option<usize>,
    /// Also compute Γ, T_meas and the efficiency per point.
    pub metrics: Option<bool>,
    pub pinned: Option<PinnedModel>,
    /// Model whose noise spectra enter Γ and T_meas.
    pub spectrum_model: Option<SpectrumModel>,
    pub out: Option<String>,
    /// Per-frequency readout metrics CSV, written when metrics are on.
    pub metrics_out: Option<String>,
    /// Optional CSV of quasienergy branches over the same grid.
    pub quasienergies_out: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitMapSection {
    #[serde(default)]
    pub phi_from: f64,
    #[serde(default = "default_phi_to")]
    pub phi_to: f64,
    #[serde(default = "default_map_points")]
    pub points: usize,
    pub out: Option<String>,
}

impl Default for CircuitMapSection {
    fn default() -> Self {
        Self {
            phi_from: 0.0,
            phi_to: default_phi_to(),
            points: default_map_points(),
            out: None,
        }
    }
}

fn default_phi_to() -> f64 {
    0.4
}

fn default_map_points() -> usize {
    401
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceSection {
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    pub n_fock: Option<usize>,
    pub out: Option<String>,
}

impl Default for ResonanceSection {
    fn default() -> Self {
        Self {
            n_max: default_n_max(),
            n_fock: None,
            out: None,
        }
    }
}

fn default_n_max() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub operator: Operator,
    pub operator_b: Option<Operator>,
    pub omega_from: f64,
    pub omega_to: f64,
    pub points: usize,
    #[serde(default)]
    pub model: SpectrumModel,
    pub n_fock: Option<usize>,
    pub out: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub omega_ex: Vec<f64>,
    #[serde(default = "default_oracle_mode")]
    pub mode: String,
    pub n_fock: Option<usize>,
    /// Truncation used for the propagated reference (default `n_fock`).
    pub reference_n_fock: Option<usize>,
    #[serde(default = "default_horizon")]
    pub horizon_gamma: f64,
    #[serde(default = "default_step_fraction")]
    pub step_fraction: f64,
    pub out: Option<String>,
}

fn default_oracle_mode() -> String {
    "detector-only".into()
}

fn default_horizon() -> f64 {
    20.0
}

fn default_step_fraction() -> f64 {
    0.01
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let text = preset(name).ok_or_else(|| {
            config_err(format!(
                "unknown preset `{name}`; available: {}",
                PRESETS.iter().map(|p| p.0).collect::<Vec<_>>().join(", ")
            ))
        })?;
        Self::parse(text)
    }

    /// Model parameters: base set, then the circuit mapping, then `[model]`.
    pub fn model_params(&self) -> Result<ModelParams> {
        let base_name = self
            .model
            .as_ref()
            .and_then(|m| m.base.as_deref())
            .unwrap_or("fig1-detector-only");
        let mut p = parameter_set(base_name)
            .ok_or_else(|| config_err(format!("unknown parameter set `{base_name}`")))?;
        if let Some(c) = &self.circuit {
            let m = map_circuit_to_model_with(&c.params(), c.quartic)?;
            let qubit_given = c.phi_qb.is_some() || c.delta_ghz.is_some();
            p = ModelParams {
                eps: if qubit_given { m.model.eps } else { p.eps },
                delta: if qubit_given { m.model.delta } else { p.delta },
                gamma: p.gamma,
                temp: p.temp,
                omega_ex: p.omega_ex,
                ..m.model
            };
        }
        if let Some(m) = &self.model {
            let set = |slot: &mut f64, v: Option<f64>| {
                if let Some(v) = v {
                    *slot = v;
                }
            };
            set(&mut p.omega, m.omega);
            set(&mut p.alpha, m.alpha);
            set(&mut p.f, m.f);
            set(&mut p.g, m.g);
            set(&mut p.eps, m.eps);
            set(&mut p.delta, m.delta);
            set(&mut p.gamma, m.gamma);
            set(&mut p.temp, m.temp);
            set(&mut p.omega_ex, m.omega_ex);
        }
        p.validate().map_err(|e| match e {
            Error::InvalidParameter { .. } => config_err(e.to_string()),
            other => other,
        })?;
        Ok(p)
    }

    pub fn sweep_section(&self) -> SweepSection {
        self.sweep.clone().unwrap_or_default()
    }

    pub fn sweep_config(&self) -> Result<SweepConfig> {
        let cfg = self.sweep_config_unvalidated()?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sweep settings before range checks, for callers that apply overrides.
    pub fn sweep_config_unvalidated(&self) -> Result<SweepConfig> {
        let s = self.sweep_section();
        let modes = match &s.modes {
            None => vec![QubitMode::DetectorOnly],
            Some(list) => parse_modes(list)?,
        };
        let cfg = SweepConfig {
            params: self.model_params()?,
            omega_from: s.omega_ex_from.unwrap_or(0.96),
            omega_to: s.omega_ex_to.unwrap_or(1.005),
            points: s.points.unwrap_or(800),
            modes,
            f_list: s.f_list.clone(),
            solve: SolveOptions {
                n_fock: s.n_fock.unwrap_or(DEFAULT_N_FOCK),
                pinned: s.pinned.unwrap_or_default(),
                ..SolveOptions::default()
            },
            metrics: s.metrics.unwrap_or(false),
            spectrum_model: s.spectrum_model.unwrap_or_default(),
        };
        Ok(cfg)
    }
}

pub fn parse_modes<S: AsRef<str>>(list: &[S]) -> Result<Vec<QubitMode>> {
    list.iter()
        .map(|s| {
            QubitMode::parse(s.as_ref()).ok_or_else(|| {
                config_err(format!(
                    "unknown qubit mode `{}` (expected coupled, up, down or detector-only)",
                    s.as_ref()
                ))
            })
        })
        .collect()
}

/// Shipped figure configurations.
pub const PRESETS: [(&str, &str); 6] = [
    ("fig0", include_str!("../presets/fig0.cfg")),
    ("fig1", include_str!("../presets/fig1.cfg")),
    ("fig2", include_str!("../presets/fig2.cfg")),
    ("fig3", include_str!("../presets/fig3.cfg")),
    ("fig4", include_str!("../presets/fig4.cfg")),
    ("fig5", include_str!("../presets/fig5.cfg")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|p| p.0 == name).map(|p| p.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_parse() {
        for (name, _) in PRESETS {
            let c = Config::preset(name).unwrap();
            c.model_params().unwrap();
            if c.sweep.is_some() {
                c.sweep_config().unwrap();
            }
        }
    }

    #[test]
    fn model_overrides_circuit() {
        let c = Config::parse(
            "[circuit]\nC_s_pF = 7.65\nI_c0_nA = 200\nI_p_nA = 300\nM_pH = 40\nphi_ex = 0.1\n\n[model]\nalpha = 0.02\n",
        )
        .unwrap();
        let p = c.model_params().unwrap();
        assert_eq!(p.alpha, 0.02);
        assert!(p.g > 0.011 && p.g < 0.013, "{}", p.g);
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let e = Config::parse("[model]\nalpah = 0.01\n").unwrap_err();
        assert!(e.is_config());
        let e = Config::parse("[sweep]\nmodes = [\"sideways\"]\n")
            .unwrap()
            .sweep_config()
            .unwrap_err();
        assert!(e.is_config());
    }

    #[test]
    fn degenerate_flux_is_a_config_error() {
        let e = Config::parse("[circuit]\nC_s_pF = 7.65\nI_c0_nA = 200\nphi_ex = 0.5\n")
            .unwrap()
            .model_params()
            .unwrap_err();
        assert!(e.is_config());
    }

    #[test]
    fn base_set_defaults() {
        let c = Config::parse("[model]\nbase = \"fig2-coupled\"\n").unwrap();
        assert_eq!(c.model_params().unwrap(), parameter_set("fig2-coupled").unwrap());
        assert_eq!(
            Config::default().model_params().unwrap(),
            parameter_set("fig1-detector-only").unwrap()
        );
    }
}
