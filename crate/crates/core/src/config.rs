//! TOML run configuration.
//!
//! ```toml
//! [hamiltonian]
//! E = 0.0            # GeV (or E_eV)
//! omega_eV = 1e-7    # or omega, in GeV
//!
//! [dissipation]      # GeV
//! a = 0.0
//! alpha = 0.71e-21
//! gamma = 0.71e-21
//!
//! [time]             # exactly one of t (GeV^-1), t_seconds, inv_t (GeV)
//! inv_t = 5.83e-21
//!
//! [grid]
//! phi_min = -9.42477796076938
//! phi_max = 9.42477796076938
//! points = 32
//! ```
//!
//! Further optional sections: `[simulate]`, `[count_model]`, `[fit]`,
//! `[extraction]` and `[fit_values]`.

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::estimate::Estimate;
use crate::fitting::{DampingForm, FitConfig};
use crate::generator::{DissipationParams, HamiltonianParams};
use crate::interference::{phase_grid, Branch, CountModel};
use crate::units::{ev_to_gev, seconds_to_inv_gev};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("[{section}] {key}: {message}")]
    Invalid {
        section: &'static str,
        key: &'static str,
        message: String,
    },
    #[error("missing [{0}] section")]
    Missing(&'static str),
}

fn invalid(section: &'static str, key: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        section,
        key,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHamiltonian {
    #[serde(rename = "E")]
    energy: Option<f64>,
    #[serde(rename = "E_eV")]
    energy_ev: Option<f64>,
    omega: Option<f64>,
    #[serde(rename = "omega_eV")]
    omega_ev: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawDissipation {
    a: f64,
    b: f64,
    c: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    t: Option<f64>,
    t_seconds: Option<f64>,
    inv_t: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub phi_min: f64,
    pub phi_max: f64,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        let span = 3.0 * std::f64::consts::PI;
        Self {
            phi_min: -span,
            phi_max: span,
            points: 32,
        }
    }
}

impl GridConfig {
    pub fn phases(&self) -> Vec<f64> {
        phase_grid(self.phi_min, self.phi_max, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulateOutput {
    #[default]
    Intensity,
    Counts,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    /// Phase offset of the exit projectors, radians.
    pub theta: f64,
    pub output: SimulateOutput,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCountModel {
    n0_plus: f64,
    n0_minus: f64,
    contrast_plus: f64,
    contrast_minus: f64,
    #[serde(default)]
    theta: f64,
    #[serde(default = "unit_exposure")]
    exposure: f64,
}

fn unit_exposure() -> f64 {
    1.0
}

/// Where the fringe contrast used in the extraction comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContrastSource {
    /// Extrema of the fitted curves over the scanned range.
    #[default]
    Curve,
    /// Values supplied in the configuration.
    Calibrated,
    /// Elimination of `α t` under the reduced `a = 0` model.
    Simplified,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExtraction {
    #[serde(default)]
    form: DampingForm,
    #[serde(default)]
    contrast: ContrastSource,
    contrast_plus: Option<f64>,
    #[serde(default)]
    contrast_plus_sigma: f64,
    contrast_minus: Option<f64>,
    #[serde(default)]
    contrast_minus_sigma: f64,
    #[serde(default)]
    simplified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionConfig {
    pub form: DampingForm,
    pub contrast: ContrastSource,
    /// Calibrated contrasts `[plus, minus]`, when given.
    pub calibrated: Option<[Estimate; 2]>,
    pub simplified: bool,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            form: DampingForm::Linearized,
            contrast: ContrastSource::Curve,
            calibrated: None,
            simplified: false,
        }
    }
}

impl ExtractionConfig {
    pub fn calibrated_contrast(&self, branch: Branch) -> Option<Estimate> {
        self.calibrated.map(|c| match branch {
            Branch::Plus => c[0],
            Branch::Minus => c[1],
        })
    }
}

/// Fitted fringe coefficients entered by hand, one set per exit beam.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchValues {
    #[serde(default)]
    pub n0: f64,
    #[serde(default)]
    pub n0_sigma: f64,
    pub p: f64,
    #[serde(default)]
    pub p_sigma: f64,
    #[serde(default)]
    pub q: f64,
    #[serde(default)]
    pub q_sigma: f64,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub theta_sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitValues {
    pub plus: Option<BranchValues>,
    pub minus: Option<BranchValues>,
}

impl FitValues {
    pub fn branch(&self, branch: Branch) -> Option<&BranchValues> {
        match branch {
            Branch::Plus => self.plus.as_ref(),
            Branch::Minus => self.minus.as_ref(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    hamiltonian: Option<RawHamiltonian>,
    dissipation: Option<RawDissipation>,
    time: Option<RawTime>,
    grid: Option<GridConfig>,
    simulate: Option<SimulateConfig>,
    count_model: Option<RawCountModel>,
    fit: Option<FitConfig>,
    extraction: Option<RawExtraction>,
    fit_values: Option<FitValues>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountModelConfig {
    pub n0: (f64, f64),
    pub contrast: (f64, f64),
    pub theta: f64,
    pub exposure: f64,
}

/// Validated configuration. Energies in GeV, times in GeV⁻¹.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub hamiltonian: HamiltonianParams,
    pub dissipation: DissipationParams,
    pub time: Option<f64>,
    pub grid: GridConfig,
    pub simulate: SimulateConfig,
    pub count_model: Option<CountModelConfig>,
    pub fit: FitConfig,
    pub extraction: ExtractionConfig,
    pub fit_values: Option<FitValues>,
}

fn one_of(
    section: &'static str,
    options: [(&'static str, Option<f64>); 2],
) -> Result<Option<(&'static str, f64)>, ConfigError> {
    match options {
        [(k1, Some(_)), (k2, Some(_))] => Err(invalid(section, k2, format!("conflicts with {k1}"))),
        [(k, Some(v)), _] | [_, (k, Some(v))] => Ok(Some((k, v))),
        _ => Ok(None),
    }
}

fn finite(section: &'static str, key: &'static str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(section, key, "must be finite"))
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        let mut config = RunConfig::default();

        if let Some(h) = raw.hamiltonian {
            if let Some((key, e)) = one_of("hamiltonian", [("E", h.energy), ("E_eV", h.energy_ev.map(ev_to_gev))])? {
                config.hamiltonian.energy = finite("hamiltonian", key, e)?;
            }
            if let Some((key, w)) = one_of(
                "hamiltonian",
                [("omega", h.omega), ("omega_eV", h.omega_ev.map(ev_to_gev))],
            )? {
                config.hamiltonian.omega = finite("hamiltonian", key, w)?;
            }
        }

        if let Some(d) = raw.dissipation {
            let params = DissipationParams::new(d.a, d.b, d.c, d.alpha, d.beta, d.gamma);
            for (key, v) in ["a", "b", "c", "alpha", "beta", "gamma"].into_iter().zip(params.as_array()) {
                finite("dissipation", key, v)?;
            }
            config.dissipation = params;
        }

        if let Some(time) = raw.time {
            let t = match (time.t, time.t_seconds, time.inv_t) {
                (Some(t), None, None) => ("t", t),
                (None, Some(s), None) => ("t_seconds", seconds_to_inv_gev(s)),
                (None, None, Some(inv)) => {
                    if !(inv > 0.0) {
                        return Err(invalid("time", "inv_t", "must be positive"));
                    }
                    ("inv_t", 1.0 / inv)
                }
                (None, None, None) => return Err(invalid("time", "t", "one of t, t_seconds, inv_t is required")),
                _ => return Err(invalid("time", "t", "give only one of t, t_seconds, inv_t")),
            };
            let (key, t) = t;
            if !(t >= 0.0 && t.is_finite()) {
                return Err(invalid("time", key, "must be finite and non-negative"));
            }
            config.time = Some(t);
        }

        if let Some(grid) = raw.grid {
            if grid.points == 0 {
                return Err(invalid("grid", "points", "must be at least 1"));
            }
            if !(grid.phi_min <= grid.phi_max) {
                return Err(invalid("grid", "phi_max", "must not be below phi_min"));
            }
            config.grid = grid;
        }

        config.simulate = raw.simulate.unwrap_or_default();

        if let Some(m) = raw.count_model {
            for (key, c) in [("contrast_plus", m.contrast_plus), ("contrast_minus", m.contrast_minus)] {
                if !(c > 0.0 && c <= 1.0) {
                    return Err(invalid("count_model", key, "must lie in (0, 1]"));
                }
            }
            for (key, n) in [("n0_plus", m.n0_plus), ("n0_minus", m.n0_minus)] {
                if !(n > 0.0 && n.is_finite()) {
                    return Err(invalid("count_model", key, "must be positive"));
                }
            }
            if !(m.exposure > 0.0) {
                return Err(invalid("count_model", "exposure", "must be positive"));
            }
            config.count_model = Some(CountModelConfig {
                n0: (m.n0_plus, m.n0_minus),
                contrast: (m.contrast_plus, m.contrast_minus),
                theta: m.theta,
                exposure: m.exposure,
            });
        }

        if let Some(fit) = raw.fit {
            if !(fit.relative_tolerance > 0.0) {
                return Err(invalid("fit", "relative_tolerance", "must be positive"));
            }
            if fit.multistart_count == 0 {
                return Err(invalid("fit", "multistart_count", "must be at least 1"));
            }
            config.fit = fit;
        }

        if let Some(e) = raw.extraction {
            let calibrated = match (e.contrast_plus, e.contrast_minus) {
                (Some(p), Some(m)) => Some([
                    Estimate::new(p, e.contrast_plus_sigma),
                    Estimate::new(m, e.contrast_minus_sigma),
                ]),
                (None, None) => None,
                (None, Some(_)) => return Err(invalid("extraction", "contrast_plus", "required with contrast_minus")),
                (Some(_), None) => return Err(invalid("extraction", "contrast_minus", "required with contrast_plus")),
            };
            if e.contrast == ContrastSource::Calibrated && calibrated.is_none() {
                return Err(invalid(
                    "extraction",
                    "contrast",
                    "calibrated contrast needs contrast_plus and contrast_minus",
                ));
            }
            config.extraction = ExtractionConfig {
                form: e.form,
                contrast: e.contrast,
                calibrated,
                simplified: e.simplified,
            };
        }

        config.fit_values = raw.fit_values;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Flight time, GeV⁻¹.
    pub fn require_time(&self) -> Result<f64, ConfigError> {
        self.time.ok_or(ConfigError::Missing("time"))
    }

    /// Count model with `A`, `|B|`, `θ_B` taken from `[dissipation]`.
    pub fn count_model(&self) -> Result<CountModel, ConfigError> {
        let m = self.count_model.ok_or(ConfigError::Missing("count_model"))?;
        Ok(CountModel::from_dissipation(
            m.n0,
            m.contrast,
            m.theta,
            &self.dissipation,
            self.require_time()?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_example_parses() {
        let text = r#"
[hamiltonian]
E = 2.5e-11
omega_eV = 1e-7

[dissipation]
a = 0.0
alpha = 0.71e-21
gamma = 0.71e-21

[time]
inv_t = 5.83e-21

[grid]
phi_min = -3.0
phi_max = 3.0
points = 7

[count_model]
n0_plus = 942
n0_minus = 366
contrast_plus = 0.19
contrast_minus = 0.54
theta = 0.03

[fit]
multistart_count = 2
seed = 9
theta_mode = "shared"

[extraction]
form = "logarithmic"
contrast = "calibrated"
contrast_plus = 0.19
contrast_plus_sigma = 0.02
contrast_minus = 0.54
contrast_minus_sigma = 0.03
simplified = true

[fit_values.minus]
p = 0.46
p_sigma = 0.02
q = 0.06
q_sigma = 0.02
"#;
        let c = RunConfig::from_toml_str(text).unwrap();
        assert!((c.hamiltonian.omega - 1e-16).abs() < 1e-30);
        assert_eq!(c.hamiltonian.energy, 2.5e-11);
        assert_eq!(c.dissipation.alpha, 0.71e-21);
        assert!((c.require_time().unwrap() * 5.83e-21 - 1.0).abs() < 1e-15);
        assert_eq!(c.grid.phases().len(), 7);
        assert_eq!(c.fit.multistart_count, 2);
        assert_eq!(c.fit.max_iterations, FitConfig::default().max_iterations);
        assert_eq!(c.extraction.form, DampingForm::Logarithmic);
        assert_eq!(c.extraction.calibrated_contrast(Branch::Minus), Some(Estimate::new(0.54, 0.03)));
        assert!(c.extraction.simplified);
        let fv = c.fit_values.unwrap();
        assert!(fv.plus.is_none());
        assert_eq!(fv.minus.unwrap().q, 0.06);
        let model = c.count_model().unwrap();
        assert_eq!(model.a_comb, 0.71e-21);
    }

    #[test]
    fn empty_config_uses_defaults() {
        let c = RunConfig::from_toml_str("").unwrap();
        assert_eq!(c.dissipation, DissipationParams::ZERO);
        assert_eq!(c.grid.points, 32);
        assert!(c.time.is_none());
        assert!(matches!(c.require_time(), Err(ConfigError::Missing("time"))));
    }

    #[test]
    fn unknown_key_reports_location() {
        let err = RunConfig::from_toml_str("[dissipation]\na = 1e-22\nalfa = 2e-22\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
        assert!(msg.contains("alfa"), "{msg}");
    }

    #[test]
    fn malformed_value_reports_location() {
        let err = RunConfig::from_toml_str("[dissipation]\nalpha = fast\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn conflicting_and_invalid_keys() {
        let err = RunConfig::from_toml_str("[time]\nt = 1.0\ninv_t = 2.0\n").unwrap_err();
        assert!(err.to_string().starts_with("[time]"), "{err}");
        let err = RunConfig::from_toml_str("[hamiltonian]\nomega = 1e-16\nomega_eV = 1e-7\n").unwrap_err();
        assert!(err.to_string().contains("omega_eV"), "{err}");
        let err = RunConfig::from_toml_str("[grid]\npoints = 0\n").unwrap_err();
        assert!(err.to_string().contains("points"), "{err}");
        let err = RunConfig::from_toml_str("[extraction]\ncontrast = \"calibrated\"\n").unwrap_err();
        assert!(err.to_string().contains("contrast"), "{err}");
        let err = RunConfig::from_toml_str(
            "[count_model]\nn0_plus = 1\nn0_minus = 1\ncontrast_plus = 1.5\ncontrast_minus = 0.5\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("contrast_plus"), "{err}");
    }

    #[test]
    fn seconds_are_converted() {
        let c = RunConfig::from_toml_str("[time]\nt_seconds = 1e-4\n").unwrap();
        assert!((c.time.unwrap() - 1e-4 / crate::units::HBAR_GEV_S).abs() < 1e6);
    }
}
