use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::interference::{fringe_counts, Branch, CountModel, FringeParams, FringeSample};

/// How observed counts relate to the model expectation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exposure {
    /// The infinite-exposure limit: counts equal the expectation.
    Expected,
    /// Poisson draws around `factor` times the expectation.
    Poisson(f64),
}

fn draw(mean: f64, rng: &mut ChaCha8Rng) -> f64 {
    if mean > 0.0 {
        Poisson::new(mean).map(|d| d.sample(rng)).unwrap_or(mean)
    } else {
        0.0
    }
}

/// Counts for both exit beams at each phase, with Poisson sigmas.
///
/// # Panics
///
/// If a Poisson exposure factor is not positive.
pub fn synthesize_from_params(
    plus: &FringeParams,
    minus: &FringeParams,
    grid: &[f64],
    exposure: Exposure,
    seed: u64,
) -> Vec<FringeSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    grid.iter()
        .map(|&phi| {
            let expected_plus = fringe_counts(plus, phi, Branch::Plus);
            let expected_minus = fringe_counts(minus, phi, Branch::Minus);
            let (n_plus, n_minus) = match exposure {
                Exposure::Expected => (expected_plus, expected_minus),
                Exposure::Poisson(factor) => {
                    assert!(factor > 0.0, "exposure must be positive, got {factor}");
                    let n_plus = draw(factor * expected_plus, &mut rng);
                    (n_plus, draw(factor * expected_minus, &mut rng))
                }
            };
            FringeSample::with_poisson_errors(phi, n_plus, n_minus)
        })
        .collect()
}

/// Synthetic fringe scan drawn from the realistic count model.
pub fn synthesize_counts(truth: &CountModel, grid: &[f64], exposure: Exposure, seed: u64) -> Vec<FringeSample> {
    synthesize_from_params(
        &truth.fringe_params(Branch::Plus),
        &truth.fringe_params(Branch::Minus),
        grid,
        exposure,
        seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interference::{count_pattern, default_phase_grid};

    fn model() -> CountModel {
        CountModel {
            n0_plus: 942.0,
            n0_minus: 366.0,
            contrast_plus: 0.19,
            contrast_minus: 0.54,
            theta: 0.03,
            a_comb: 0.84e-21,
            b_mod: 0.65e-21,
            theta_b: 0.0,
            t: 1.0 / 5.83e-21,
        }
    }

    #[test]
    fn expected_exposure_is_the_model_curve() {
        let m = model();
        let grid = default_phase_grid();
        for s in synthesize_counts(&m, &grid, Exposure::Expected, 0) {
            for b in Branch::BOTH {
                assert_eq!(s.counts(b), count_pattern(&m, s.phi, b));
            }
        }
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let grid = default_phase_grid();
        let a = synthesize_counts(&model(), &grid, Exposure::Poisson(1.0), 42);
        let b = synthesize_counts(&model(), &grid, Exposure::Poisson(1.0), 42);
        let c = synthesize_counts(&model(), &grid, Exposure::Poisson(1.0), 43);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|s| s.counts_plus.fract() == 0.0 && s.counts_minus.fract() == 0.0));
    }

    #[test]
    fn exposure_scales_the_mean() {
        let grid = [0.0];
        let runs = 2000;
        let mean: f64 = (0..runs)
            .map(|seed| synthesize_counts(&model(), &grid, Exposure::Poisson(4.0), seed)[0].counts_minus)
            .sum::<f64>()
            / runs as f64;
        let want = 4.0 * count_pattern(&model(), 0.0, Branch::Minus);
        assert!((mean - want).abs() < 4.0 * (want / runs as f64).sqrt(), "{mean} vs {want}");
    }
}
