//! Regularized `sin(x)/x` factors.

/// Below this `|x|` the series `1 - x²/6` replaces `sin(x)/x`.
pub const SERIES_CUTOFF: f64 = 1e-8;

/// `sin(x) / x`, equal to 1 at the origin.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < SERIES_CUTOFF {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `sin(ω t) / ω`, which tends to `t` as `ω → 0`.
pub fn sin_over(omega: f64, t: f64) -> f64 {
    t * sinc(omega * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuous_across_cutoff() {
        let below = sinc(0.999_999 * SERIES_CUTOFF);
        let above = sinc(1.000_001 * SERIES_CUTOFF);
        assert!((below - above).abs() < 1e-15);
        assert_eq!(sinc(0.0), 1.0);
        assert_eq!(sin_over(0.0, 3.5), 3.5);
    }

    #[test]
    fn matches_direct_ratio() {
        for x in [0.1, -1.0, 3.0, 20.0] {
            assert!((sinc(x) - x.sin() / x).abs() < 1e-16);
        }
        assert!((sin_over(2.0, 0.3) - (0.6f64).sin() / 2.0).abs() < 1e-16);
    }
}
