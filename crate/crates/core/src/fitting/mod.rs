//! χ² fitting of the fringe count model and extraction of the dissipative
//! constants from the fitted coefficients.

mod extract;
pub mod lm;
mod synth;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimate::Estimate;
use crate::interference::{contrast_from_extrema, fringe_counts, Branch, FringeParams, FringeSample};
use crate::sinc::sinc;

pub use extract::{
    b_from_projection, combined_alpha_simplified, extract_a_alpha, extract_ab, AbExtraction, AlphaPair, BProjection,
    BSeparation, BranchAlpha, DampingForm, ExtractError, ExtractionFlags, SimplifiedAlpha, SimplifiedInput,
    MIN_SIGNIFICANCE,
};
pub use synth::{synthesize_counts, synthesize_from_params, Exposure};

/// Minimum number of phase settings per branch.
pub const MIN_POINTS_PER_BRANCH: usize = 6;
/// Curvature with a scaled condition number below this is treated as singular.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("no data points")]
    EmptyData,
    #[error("{branch:?} branch has {points} points, at least {MIN_POINTS_PER_BRANCH} are needed")]
    TooFewPoints { branch: Branch, points: usize },
    #[error("data point {index} has non-positive sigma")]
    NonPositiveSigma { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaMode {
    /// Separate phase offset for each exit beam.
    #[default]
    PerBranch,
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub max_iterations: usize,
    pub relative_tolerance: f64,
    pub multistart_count: usize,
    pub seed: u64,
    pub theta_mode: ThetaMode,
    /// Hold `Q± = 0` (standard quantum mechanics).
    pub fix_q: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            relative_tolerance: 1e-10,
            multistart_count: 4,
            seed: 0,
            theta_mode: ThetaMode::PerBranch,
            fix_q: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Parameter name to best-fit value.
    pub estimates: BTreeMap<String, f64>,
    /// Parameter name to one-sigma uncertainty (`null` when undetermined).
    pub uncertainties: BTreeMap<String, f64>,
    /// Order of the covariance rows and columns.
    pub parameters: Vec<String>,
    pub covariance: Vec<Vec<f64>>,
    pub chi2: f64,
    pub dof: i64,
    pub converged: bool,
    pub iterations: usize,
    pub theta_mode: ThetaMode,
    pub fix_q: bool,
    /// Unit-norm null direction of the curvature, when it is singular.
    pub degenerate_direction: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    N0(Branch),
    P(Branch),
    Q(Branch),
    Theta(Option<Branch>),
}

impl Slot {
    fn name(self) -> String {
        match self {
            Slot::N0(b) => format!("n0_{}", b.suffix()),
            Slot::P(b) => format!("p_{}", b.suffix()),
            Slot::Q(b) => format!("q_{}", b.suffix()),
            Slot::Theta(Some(b)) => format!("theta_{}", b.suffix()),
            Slot::Theta(None) => "theta".to_owned(),
        }
    }
}

/// Maps the free-parameter vector onto per-branch fringe coefficients.
#[derive(Debug, Clone)]
struct Layout {
    slots: Vec<Slot>,
}

impl Layout {
    fn new(mode: ThetaMode, fix_q: bool) -> Self {
        let mut slots = Vec::new();
        for b in Branch::BOTH {
            slots.push(Slot::N0(b));
            slots.push(Slot::P(b));
            if !fix_q {
                slots.push(Slot::Q(b));
            }
            if mode == ThetaMode::PerBranch {
                slots.push(Slot::Theta(Some(b)));
            }
        }
        if mode == ThetaMode::Shared {
            slots.push(Slot::Theta(None));
        }
        Self { slots }
    }

    fn len(&self) -> usize {
        self.slots.len()
    }

    fn unpack(&self, x: &DVector<f64>) -> [FringeParams; 2] {
        let mut out = [FringeParams {
            n0: 0.0,
            p: 0.0,
            q: 0.0,
            theta: 0.0,
        }; 2];
        for (slot, &v) in self.slots.iter().zip(x.iter()) {
            match *slot {
                Slot::N0(b) => out[idx(b)].n0 = v,
                Slot::P(b) => out[idx(b)].p = v,
                Slot::Q(b) => out[idx(b)].q = v,
                Slot::Theta(Some(b)) => out[idx(b)].theta = v,
                Slot::Theta(None) => {
                    out[0].theta = v;
                    out[1].theta = v;
                }
            }
        }
        out
    }

    fn pack(&self, params: &[FringeParams; 2]) -> DVector<f64> {
        DVector::from_iterator(
            self.len(),
            self.slots.iter().map(|slot| match *slot {
                Slot::N0(b) => params[idx(b)].n0,
                Slot::P(b) => params[idx(b)].p,
                Slot::Q(b) => params[idx(b)].q,
                Slot::Theta(Some(b)) => params[idx(b)].theta,
                Slot::Theta(None) => params[1].theta,
            }),
        )
    }
}

fn idx(b: Branch) -> usize {
    match b {
        Branch::Plus => 0,
        Branch::Minus => 1,
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn canonical_angle(theta: f64) -> f64 {
    let wrapped = theta.rem_euclid(2.0 * PI);
    if wrapped > PI {
        wrapped - 2.0 * PI
    } else {
        wrapped
    }
}

fn validate(data: &[FringeSample]) -> Result<(), FitError> {
    if data.is_empty() {
        return Err(FitError::EmptyData);
    }
    for (index, s) in data.iter().enumerate() {
        if !(s.sigma_plus > 0.0 && s.sigma_minus > 0.0) {
            return Err(FitError::NonPositiveSigma { index });
        }
    }
    Ok(())
}

/// Σ over points and both exit beams of `((N_obs - N_model) / σ)²`.
pub fn chi_squared(data: &[FringeSample], plus: &FringeParams, minus: &FringeParams) -> Result<f64, FitError> {
    validate(data)?;
    Ok(data
        .iter()
        .flat_map(|s| {
            [(Branch::Plus, plus), (Branch::Minus, minus)]
                .map(|(b, params)| ((s.counts(b) - fringe_counts(params, s.phi, b)) / s.sigma(b)).powi(2))
        })
        .sum())
}

fn residual_vector(layout: &Layout, data: &[FringeSample], x: &DVector<f64>) -> DVector<f64> {
    let params = layout.unpack(x);
    DVector::from_iterator(
        2 * data.len(),
        data.iter().flat_map(|s| {
            Branch::BOTH.map(|b| (s.counts(b) - fringe_counts(&params[idx(b)], s.phi, b)) / s.sigma(b))
        }),
    )
}

fn jacobian_matrix(layout: &Layout, data: &[FringeSample], x: &DVector<f64>) -> DMatrix<f64> {
    let params = layout.unpack(x);
    let mut jac = DMatrix::zeros(2 * data.len(), layout.len());
    for (i, s) in data.iter().enumerate() {
        for b in Branch::BOTH {
            let row = 2 * i + idx(b);
            let fp = &params[idx(b)];
            let sign = b.sign();
            let cos = (fp.theta + s.phi).cos();
            let sin = (fp.theta + s.phi).sin();
            let shape = sinc(s.phi);
            let scale = -1.0 / s.sigma(b);
            for (col, slot) in layout.slots.iter().enumerate() {
                let dn = match *slot {
                    Slot::N0(sb) if sb == b => 1.0 + sign * (fp.p * cos + fp.q * shape),
                    Slot::P(sb) if sb == b => fp.n0 * sign * cos,
                    Slot::Q(sb) if sb == b => fp.n0 * sign * shape,
                    Slot::Theta(Some(sb)) if sb == b => -fp.n0 * sign * fp.p * sin,
                    Slot::Theta(None) => -fp.n0 * sign * fp.p * sin,
                    _ => 0.0,
                };
                jac[(row, col)] = scale * dn;
            }
        }
    }
    jac
}

/// Data-driven starting point: mean counts, raw-extrema contrast, `Q = 0`,
/// `θ = 0`.
fn initial_guess(data: &[FringeSample]) -> [FringeParams; 2] {
    Branch::BOTH.map(|b| {
        let counts: Vec<f64> = data.iter().map(|s| s.counts(b)).collect();
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        let hi = counts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = counts.iter().copied().fold(f64::INFINITY, f64::min);
        let p = contrast_from_extrema(hi, lo).unwrap_or(0.0).clamp(0.01, 0.99);
        FringeParams {
            n0: mean.max(1.0),
            p,
            q: 0.0,
            theta: 0.0,
        }
    })
}

fn perturbed(base: &[FringeParams; 2], rng: &mut ChaCha8Rng, fix_q: bool) -> [FringeParams; 2] {
    let theta = rng.random_range(-PI..PI);
    base.map(|fp| FringeParams {
        n0: fp.n0 * rng.random_range(0.9..1.1),
        p: fp.p * rng.random_range(0.5..1.5),
        q: if fix_q { 0.0 } else { rng.random_range(-0.1..0.1) },
        theta,
    })
}

/// Puts each branch into the `P >= 0`, `θ ∈ (-π, π]` convention, flipping
/// the matching covariance rows.
fn canonicalize(layout: &Layout, x: &mut DVector<f64>, cov: &mut DMatrix<f64>) {
    let slot_of = |target: Slot| layout.slots.iter().position(|&s| s == target);
    let flip = |x: &mut DVector<f64>, cov: &mut DMatrix<f64>, k: usize| {
        x[k] = -x[k];
        for j in 0..cov.ncols() {
            cov[(k, j)] = -cov[(k, j)];
        }
        for i in 0..cov.nrows() {
            cov[(i, k)] = -cov[(i, k)];
        }
    };

    let p_slots: Vec<usize> = Branch::BOTH.iter().filter_map(|&b| slot_of(Slot::P(b))).collect();
    match slot_of(Slot::Theta(None)) {
        Some(theta_slot) => {
            if p_slots.iter().all(|&k| x[k] < 0.0) {
                for &k in &p_slots {
                    flip(x, cov, k);
                }
                x[theta_slot] += PI;
            }
            x[theta_slot] = canonical_angle(x[theta_slot]);
        }
        None => {
            for b in Branch::BOTH {
                let (Some(p), Some(t)) = (slot_of(Slot::P(b)), slot_of(Slot::Theta(Some(b)))) else {
                    continue;
                };
                if x[p] < 0.0 {
                    flip(x, cov, p);
                    x[t] += PI;
                }
                x[t] = canonical_angle(x[t]);
            }
        }
    }
}

/// Covariance `(JᵀJ)⁻¹` of the weighted residuals, plus the null direction
/// when the curvature is singular.
///
/// Conditioning is judged with counts measured relative to `N0`, so every
/// coordinate is dimensionless. Parameters along a null direction get an
/// infinite variance.
fn covariance(layout: &Layout, jac: &DMatrix<f64>, x: &DVector<f64>) -> (DMatrix<f64>, Option<Vec<f64>>) {
    let n = jac.ncols();
    let curvature = jac.transpose() * jac;
    let scales: Vec<f64> = layout
        .slots
        .iter()
        .zip(x.iter())
        .map(|(slot, &v)| match slot {
            Slot::N0(_) => v.abs().max(1.0),
            _ => 1.0,
        })
        .collect();
    let scaled = DMatrix::from_fn(n, n, |i, j| curvature[(i, j)] * scales[i] * scales[j]);
    let eig = scaled.clone().symmetric_eigen();
    let (min_k, min_val) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty");
    let max_val = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let cutoff = DEGENERACY_THRESHOLD * max_val;

    let inv_scaled = scaled.pseudo_inverse(cutoff).unwrap_or_else(|_| DMatrix::zeros(n, n));
    let mut cov = DMatrix::from_fn(n, n, |i, j| inv_scaled[(i, j)] * scales[i] * scales[j]);

    if min_val > cutoff {
        return (cov, None);
    }
    let v = eig.eigenvectors.column(min_k);
    let raw: Vec<f64> = (0..n).map(|i| v[i] * scales[i]).collect();
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    let direction: Vec<f64> = raw.into_iter().map(|x| x / norm).collect();
    for (k, component) in v.iter().enumerate() {
        if component.abs() > 1e-3 {
            cov[(k, k)] = f64::INFINITY;
        }
    }
    (cov, Some(direction))
}

/// Fits both exit beams of the fringe model to the data.
///
/// The best of `multistart_count` damped least-squares runs is kept; the
/// first starts from a data-driven guess, the rest from seeded perturbations
/// of it.
pub fn fit_pattern(data: &[FringeSample], config: &FitConfig) -> Result<FitResult, FitError> {
    validate(data)?;
    if data.len() < MIN_POINTS_PER_BRANCH {
        return Err(FitError::TooFewPoints {
            branch: Branch::Plus,
            points: data.len(),
        });
    }

    let layout = Layout::new(config.theta_mode, config.fix_q);
    let base = initial_guess(data);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let starts: Vec<[FringeParams; 2]> = std::iter::once(base)
        .chain((1..config.multistart_count.max(1)).map(|_| perturbed(&base, &mut rng, config.fix_q)))
        .collect();

    let opts = lm::LmOptions {
        max_iterations: config.max_iterations,
        relative_tolerance: config.relative_tolerance,
        step_tolerance: 1e-10,
    };

    let best = starts
        .iter()
        .map(|start| {
            lm::minimize(
                |x| residual_vector(&layout, data, x),
                |x| jacobian_matrix(&layout, data, x),
                layout.pack(start),
                &opts,
            )
        })
        .reduce(|best, next| {
            let better = match (next.converged, best.converged) {
                (true, false) => true,
                (false, true) => false,
                _ => next.chi2 < best.chi2,
            };
            if better {
                next
            } else {
                best
            }
        })
        .expect("at least one start");

    let jac = jacobian_matrix(&layout, data, &best.x);
    let (mut cov, degenerate) = covariance(&layout, &jac, &best.x);
    let mut x = best.x.clone();
    canonicalize(&layout, &mut x, &mut cov);

    let names: Vec<String> = layout.slots.iter().map(|s| s.name()).collect();
    let estimates = names.iter().cloned().zip(x.iter().copied()).collect();
    let uncertainties = names
        .iter()
        .enumerate()
        .map(|(k, name)| (name.clone(), cov[(k, k)].max(0.0).sqrt()))
        .collect();
    let covariance = (0..layout.len())
        .map(|i| (0..layout.len()).map(|j| cov[(i, j)]).collect())
        .collect();

    Ok(FitResult {
        estimates,
        uncertainties,
        parameters: names,
        covariance,
        chi2: best.chi2,
        dof: (2 * data.len()) as i64 - layout.len() as i64,
        converged: best.converged,
        iterations: best.iterations,
        theta_mode: config.theta_mode,
        fix_q: config.fix_q,
        degenerate_direction: degenerate,
    })
}

impl FitResult {
    fn value(&self, name: &str) -> f64 {
        self.estimates.get(name).copied().unwrap_or(0.0)
    }

    fn estimate(&self, name: &str) -> Estimate {
        Estimate::new(
            self.value(name),
            self.uncertainties.get(name).copied().unwrap_or(0.0),
        )
    }

    fn theta_name(&self, branch: Branch) -> String {
        match self.theta_mode {
            ThetaMode::PerBranch => format!("theta_{}", branch.suffix()),
            ThetaMode::Shared => "theta".to_owned(),
        }
    }

    pub fn params(&self, branch: Branch) -> FringeParams {
        let s = branch.suffix();
        FringeParams {
            n0: self.value(&format!("n0_{s}")),
            p: self.value(&format!("p_{s}")),
            q: self.value(&format!("q_{s}")),
            theta: self.value(&self.theta_name(branch)),
        }
    }

    pub fn n0(&self, branch: Branch) -> Estimate {
        self.estimate(&format!("n0_{}", branch.suffix()))
    }

    pub fn p(&self, branch: Branch) -> Estimate {
        self.estimate(&format!("p_{}", branch.suffix()))
    }

    pub fn q(&self, branch: Branch) -> Estimate {
        self.estimate(&format!("q_{}", branch.suffix()))
    }

    pub fn theta(&self, branch: Branch) -> Estimate {
        self.estimate(&self.theta_name(branch))
    }

    /// Covariance between two named parameters; zero if either is not free.
    pub fn covariance_of(&self, a: &str, b: &str) -> f64 {
        let i = self.parameters.iter().position(|n| n == a);
        let j = self.parameters.iter().position(|n| n == b);
        match (i, j) {
            (Some(i), Some(j)) => self.covariance[i][j],
            _ => 0.0,
        }
    }

    pub fn reduced_chi2(&self) -> f64 {
        self.chi2 / self.dof as f64
    }
}
