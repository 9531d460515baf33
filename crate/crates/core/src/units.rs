//! Natural-unit conversions and unit-tagged report values.
//!
//! Energies are in GeV and times in GeV⁻¹ throughout the crate.

use serde::{Deserialize, Serialize};

use crate::estimate::Estimate;

/// Reduced Planck constant, GeV·s.
pub const HBAR_GEV_S: f64 = 6.582_119_569e-25;
/// GeV per eV.
pub const GEV_PER_EV: f64 = 1e-9;

/// Seconds to GeV⁻¹ (`t / ħ`).
pub fn seconds_to_inv_gev(seconds: f64) -> f64 {
    seconds / HBAR_GEV_S
}

pub fn inv_gev_to_seconds(t: f64) -> f64 {
    t * HBAR_GEV_S
}

pub fn ev_to_gev(ev: f64) -> f64 {
    ev * GEV_PER_EV
}

pub fn gev_to_ev(gev: f64) -> f64 {
    gev / GEV_PER_EV
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "GeV")]
    GeV,
    #[serde(rename = "GeV^-1")]
    InvGeV,
    #[serde(rename = "GeV^2")]
    GeV2,
    #[serde(rename = "GeV^3")]
    GeV3,
    #[serde(rename = "rad")]
    Radians,
    #[serde(rename = "counts")]
    Counts,
    #[serde(rename = "dimensionless")]
    Dimensionless,
}

impl Unit {
    /// `GeV^power` for the powers used by the positivity residuals.
    pub fn gev_power(power: i32) -> Option<Self> {
        match power {
            -1 => Some(Unit::InvGeV),
            0 => Some(Unit::Dimensionless),
            1 => Some(Unit::GeV),
            2 => Some(Unit::GeV2),
            3 => Some(Unit::GeV3),
            _ => None,
        }
    }
}

/// A number with its unit and optional one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    pub unit: Unit,
}

impl Quantity {
    pub fn exact(value: f64, unit: Unit) -> Self {
        Self {
            value,
            sigma: None,
            unit,
        }
    }

    pub fn measured(estimate: Estimate, unit: Unit) -> Self {
        Self {
            value: estimate.value,
            sigma: Some(estimate.sigma),
            unit,
        }
    }

    pub fn gev(value: f64) -> Self {
        Self::exact(value, Unit::GeV)
    }

    pub fn count(value: f64) -> Self {
        Self::exact(value, Unit::Counts)
    }

    pub fn pure(value: f64) -> Self {
        Self::exact(value, Unit::Dimensionless)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_round_trip() {
        let t = 1.0 / 5.83e-21;
        assert!((seconds_to_inv_gev(inv_gev_to_seconds(t)) - t).abs() < 1e-6 * t);
        assert!((ev_to_gev(1e-7) - 1e-16).abs() < 1e-30);
        assert!((gev_to_ev(1e-16) - 1e-7).abs() < 1e-21);
        // 1 s is about 1.52e24 GeV⁻¹
        assert!((seconds_to_inv_gev(1.0) / 1.519_267_4e24 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn quantity_json_carries_unit() {
        let q = Quantity::measured(Estimate::new(0.84e-21, 0.41e-21), Unit::GeV);
        let json = serde_json::to_string(&q).unwrap();
        assert_eq!(json, r#"{"value":8.4e-22,"sigma":4.1e-22,"unit":"GeV"}"#);
        let exact = serde_json::to_string(&Quantity::exact(3.0, Unit::InvGeV)).unwrap();
        assert_eq!(exact, r#"{"value":3.0,"unit":"GeV^-1"}"#);
        assert_eq!(Unit::gev_power(3), Some(Unit::GeV3));
        assert_eq!(Unit::gev_power(4), None);
    }
}
