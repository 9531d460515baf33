use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use sgi::estimate::Estimate;
use sgi::fitting::{
    combined_alpha_simplified, extract_a_alpha, extract_ab, fit_pattern, synthesize_counts, synthesize_from_params,
    DampingForm, Exposure, FitConfig, SimplifiedInput,
};
use sgi::generator::{check_complete_positivity, DissipationParams};
use sgi::interference::{default_phase_grid, fringe_counts, Branch, CountModel, FringeParams};

const INV_T: f64 = 5.83e-21;

fn model(d: &DissipationParams) -> CountModel {
    CountModel::from_dissipation((942.0, 366.0), (0.19, 0.54), 0.03, d, 1.0 / INV_T)
}

#[test]
fn reduced_chi_squared_is_near_one() {
    let truth = model(&DissipationParams::new(0.1, 0.0, 0.0, 0.74, 0.0, 0.74).scaled(1e-21));
    let grid = default_phase_grid();
    let good = (0..200u64)
        .into_par_iter()
        .filter(|&seed| {
            let data = synthesize_counts(&truth, &grid, Exposure::Poisson(1.0), 100 + seed);
            let fit = fit_pattern(&data, &FitConfig::default()).unwrap();
            let r = fit.reduced_chi2();
            fit.converged && (0.5..=1.6).contains(&r)
        })
        .count();
    assert!(good >= 190, "{good}/200 fits with chi2/dof in [0.5, 1.6]");
}

#[test]
fn poisson_draws_average_to_the_expectation() {
    let plus = FringeParams {
        n0: 942.0,
        p: 0.16,
        q: 0.02,
        theta: 0.03,
    };
    let minus = FringeParams {
        n0: 366.0,
        p: 0.47,
        q: 0.05,
        theta: 0.03,
    };
    let phi = 0.7;
    let n = 10_000;
    let (sum_plus, sum_minus) = (0..n).fold((0.0, 0.0), |(sp, sm), seed| {
        let s = synthesize_from_params(&plus, &minus, &[phi], Exposure::Poisson(1.0), seed)[0];
        (sp + s.counts_plus, sm + s.counts_minus)
    });
    for (sum, expected) in [
        (sum_plus, fringe_counts(&plus, phi, Branch::Plus)),
        (sum_minus, fringe_counts(&minus, phi, Branch::Minus)),
    ] {
        let mean = sum / n as f64;
        let bound = 4.0 * expected.sqrt() / (n as f64).sqrt();
        assert!((mean - expected).abs() < bound, "mean {mean} vs {expected} (bound {bound})");
    }
}

#[test]
fn reduced_model_recovers_alpha() {
    let alpha = 1e-21;
    let truth = model(&DissipationParams::simplified(alpha));
    let grid = default_phase_grid();
    let seeds = 500;
    let hits = (0..seeds as u64)
        .into_par_iter()
        .filter(|&seed| {
            let data = synthesize_counts(&truth, &grid, Exposure::Poisson(1.0), 20_000 + seed);
            let Ok(fit) = fit_pattern(&data, &FitConfig::default()) else {
                return false;
            };
            let inputs: Vec<SimplifiedInput> = [Branch::Plus, Branch::Minus]
                .into_iter()
                .map(|b| SimplifiedInput {
                    branch: b,
                    p: fit.p(b),
                    q: fit.q(b),
                    theta: fit.theta(b),
                })
                .collect();
            combined_alpha_simplified(&inputs, INV_T).is_ok_and(|r| r.alpha.within(alpha, 3.0))
        })
        .count();
    assert!(hits * 100 >= seeds * 99, "{hits}/{seeds} within 3 sigma");
}

#[test]
fn cp_valid_truth_gives_nonnegative_rates() {
    let d = DissipationParams::new(0.1, 0.0, 0.0, 0.74, 0.0, 0.74).scaled(1e-21);
    assert!(check_complete_positivity(&d).is_cp);
    let truth = model(&d);
    let grid = default_phase_grid();
    let runs = 500;
    let hits = (0..runs as u64)
        .into_par_iter()
        .filter(|&seed| {
            let data = synthesize_counts(&truth, &grid, Exposure::Poisson(1.0), 40_000 + seed);
            let fit = fit_pattern(&data, &FitConfig::default()).unwrap();
            let b = Branch::Minus;
            let mut rng = ChaCha8Rng::seed_from_u64(60_000 + seed);
            let contrast = truth.contrast_minus + Normal::new(0.0, 0.03).unwrap().sample(&mut rng);
            let Ok(ab) = extract_ab(fit.p(b), fit.q(b), Estimate::new(contrast, 0.03), INV_T, DampingForm::Linearized)
            else {
                return false;
            };
            let pair = extract_a_alpha(ab.a_comb, ab.re_b, Some(ab.covariance));
            pair.a.value + 3.0 * pair.a.sigma >= 0.0 && pair.alpha.value + 3.0 * pair.alpha.sigma >= 0.0
        })
        .count();
    assert!(hits * 100 >= runs * 99, "{hits}/{runs} consistent with a, alpha >= 0");
}
