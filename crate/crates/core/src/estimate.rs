//! Value with a one-standard-deviation uncertainty.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub sigma: f64,
}

impl Estimate {
    pub const fn new(value: f64, sigma: f64) -> Self {
        Self { value, sigma }
    }

    pub const fn exact(value: f64) -> Self {
        Self { value, sigma: 0.0 }
    }

    /// `|value - reference| / sigma`; infinite when `sigma` is zero and the
    /// values differ.
    pub fn pull(&self, reference: f64) -> f64 {
        let diff = (self.value - reference).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.sigma
        }
    }

    pub fn within(&self, reference: f64, n_sigma: f64) -> bool {
        self.pull(reference) <= n_sigma
    }

    pub fn relative_sigma(&self) -> f64 {
        self.sigma / self.value.abs()
    }
}

/// Inverse-variance weighted mean. Entries with zero or non-finite sigma are
/// skipped; returns `None` when nothing is left.
pub fn inverse_variance_mean(values: &[Estimate]) -> Option<Estimate> {
    let (mut weight_sum, mut weighted) = (0.0, 0.0);
    for e in values {
        if !(e.sigma > 0.0 && e.sigma.is_finite() && e.value.is_finite()) {
            continue;
        }
        let w = 1.0 / (e.sigma * e.sigma);
        weight_sum += w;
        weighted += w * e.value;
    }
    (weight_sum > 0.0).then(|| Estimate::new(weighted / weight_sum, weight_sum.sqrt().recip()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_mean() {
        let m = inverse_variance_mean(&[Estimate::new(1.0, 1.0), Estimate::new(3.0, 1.0)]).unwrap();
        assert_eq!(m.value, 2.0);
        assert!((m.sigma - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);

        let m = inverse_variance_mean(&[Estimate::new(1.0, 1.0), Estimate::new(10.0, 0.0)]).unwrap();
        assert_eq!(m, Estimate::new(1.0, 1.0));
        assert!(inverse_variance_mean(&[]).is_none());
    }

    #[test]
    fn pulls() {
        let e = Estimate::new(1.0, 0.5);
        assert_eq!(e.pull(2.0), 2.0);
        assert!(e.within(2.0, 2.0));
        assert!(!e.within(2.1, 2.0));
        assert_eq!(Estimate::exact(1.0).pull(1.0), 0.0);
    }
}
