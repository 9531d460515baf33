//! Levenberg-Marquardt minimization of a sum of squared residuals.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop once an accepted step lowers χ² by less than this fraction.
    pub relative_tolerance: f64,
    /// Parameter steps must also fall below this (relative to `|x| + 1`).
    pub step_tolerance: f64,
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub x: DVector<f64>,
    pub chi2: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// χ² below this counts as an exact fit.
const ZERO_RESIDUAL: f64 = 1e-24;
const MAX_DAMPING: f64 = 1e16;

fn chi2_of(r: &DVector<f64>) -> f64 {
    r.norm_squared()
}

/// Minimizes `|r(x)|²` starting from `x0`, with the Marquardt diagonal scaling.
pub fn minimize<R, J>(residuals: R, jacobian: J, x0: DVector<f64>, opts: &LmOptions) -> LmOutcome
where
    R: Fn(&DVector<f64>) -> DVector<f64>,
    J: Fn(&DVector<f64>) -> DMatrix<f64>,
{
    let mut x = x0;
    let mut r = residuals(&x);
    let mut chi2 = chi2_of(&r);
    let mut lambda = 1e-3;
    let n = x.len();

    for iteration in 1..=opts.max_iterations {
        if !chi2.is_finite() {
            break;
        }
        if chi2 <= ZERO_RESIDUAL {
            return LmOutcome {
                x,
                chi2,
                iterations: iteration - 1,
                converged: true,
            };
        }
        let jac = jacobian(&x);
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;

        loop {
            let mut damped = jtj.clone();
            for k in 0..n {
                let diag = jtj[(k, k)].max(1e-300);
                damped[(k, k)] += lambda * diag;
            }
            let step = match damped.cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => {
                    lambda *= 10.0;
                    if lambda > MAX_DAMPING {
                        break;
                    }
                    continue;
                }
            };
            let trial = &x + &step;
            let r_trial = residuals(&trial);
            let chi2_trial = chi2_of(&r_trial);
            if chi2_trial.is_finite() && chi2_trial <= chi2 {
                let decrease = chi2 - chi2_trial;
                let small_step = step
                    .iter()
                    .zip(x.iter())
                    .all(|(s, xi)| s.abs() <= opts.step_tolerance * (xi.abs() + 1.0));
                x = trial;
                r = r_trial;
                chi2 = chi2_trial;
                lambda = (lambda * 0.1).max(1e-12);
                if (decrease <= opts.relative_tolerance * chi2 && small_step) || chi2 <= ZERO_RESIDUAL {
                    return LmOutcome {
                        x,
                        chi2,
                        iterations: iteration,
                        converged: true,
                    };
                }
                break;
            }
            lambda *= 10.0;
            if lambda > MAX_DAMPING {
                break;
            }
        }
        if lambda > MAX_DAMPING {
            // no damped step lowers χ² any further: a minimum to working precision
            return LmOutcome {
                x,
                chi2,
                iterations: iteration,
                converged: chi2.is_finite(),
            };
        }
    }
    LmOutcome {
        x,
        chi2,
        iterations: opts.max_iterations,
        converged: false,
    }
}
