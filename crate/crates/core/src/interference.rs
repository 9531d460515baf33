//! Exit-beam observables and fringe models.
//!
//! The ideal intensities come from projecting the propagated state on the two
//! exit projectors. Real count data are described by the phenomenological
//! model
//!
//! ```text
//!     N±(φ) = N0± { 1 ± [ P± cos(θ + φ) + Q± sin(φ)/φ ] }
//!     P± = C± exp(-A t),   Q± = C± |B| t cos(θ - θ_B)
//! ```
//!
//! where `C±` are the fringe contrasts and `φ = 2ωt` is the scanned phase.

use std::io::{Read, Write};

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bloch::DensityMatrix;
use crate::estimate::Estimate;
use crate::generator::{derived_combos, DissipationParams};
use crate::sinc::{sin_over, sinc};

/// `|cos θ|` below this makes the simplified contrast undefined.
pub const MIN_COS_THETA: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum InterferenceError {
    #[error("extrema out of order: n_min = {n_min} exceeds n_max = {n_max}")]
    ExtremaOrder { n_max: f64, n_min: f64 },
    #[error("extrema must satisfy n_max > 0 and n_min >= 0 (got {n_max}, {n_min})")]
    ExtremaRange { n_max: f64, n_min: f64 },
    #[error("cos(theta) = {0:e} is too close to zero to eliminate the damping term")]
    DegenerateTheta(f64),
    #[error("fringe table: {0}")]
    Csv(#[from] csv::Error),
    #[error("fringe table row {row}: {message}")]
    InvalidRow { row: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitProjector {
    pub theta: f64,
    pub branch: Branch,
}

/// Damping envelope used in the ideal pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Envelope {
    /// `exp(-A t)`, the closed form.
    #[default]
    Exponential,
    /// `1 - A t`, exactly what the first-order propagator produces.
    FirstOrder,
}

/// Physical parameters of the realistic count model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountModel {
    pub n0_plus: f64,
    pub n0_minus: f64,
    pub contrast_plus: f64,
    pub contrast_minus: f64,
    pub theta: f64,
    /// `A = α + a`, GeV.
    pub a_comb: f64,
    /// `|B|`, GeV.
    pub b_mod: f64,
    pub theta_b: f64,
    /// Flight time, GeV^-1.
    pub t: f64,
}

/// Per-branch coefficients of the fitted fringe form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeParams {
    pub n0: f64,
    pub p: f64,
    pub q: f64,
    pub theta: f64,
}

/// One phase setting with the counts in both exit beams.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeSample {
    pub phi: f64,
    #[serde(rename = "n_plus")]
    pub counts_plus: f64,
    #[serde(rename = "sigma_plus")]
    pub sigma_plus: f64,
    #[serde(rename = "n_minus")]
    pub counts_minus: f64,
    #[serde(rename = "sigma_minus")]
    pub sigma_minus: f64,
}

/// Poisson standard deviation `sqrt(max(n, 1))`.
pub fn poisson_sigma(counts: f64) -> f64 {
    counts.max(1.0).sqrt()
}

impl FringeSample {
    pub fn with_poisson_errors(phi: f64, counts_plus: f64, counts_minus: f64) -> Self {
        Self {
            phi,
            counts_plus,
            sigma_plus: poisson_sigma(counts_plus),
            counts_minus,
            sigma_minus: poisson_sigma(counts_minus),
        }
    }

    pub fn counts(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Plus => self.counts_plus,
            Branch::Minus => self.counts_minus,
        }
    }

    pub fn sigma(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Plus => self.sigma_plus,
            Branch::Minus => self.sigma_minus,
        }
    }
}

impl CountModel {
    /// Model built from the dissipative constants through `A`, `|B|`, `θ_B`.
    pub fn from_dissipation(
        n0: (f64, f64),
        contrast: (f64, f64),
        theta: f64,
        d: &DissipationParams,
        t: f64,
    ) -> Self {
        let combos = derived_combos(d);
        Self {
            n0_plus: n0.0,
            n0_minus: n0.1,
            contrast_plus: contrast.0,
            contrast_minus: contrast.1,
            theta,
            a_comb: combos.a_comb,
            b_mod: combos.b_mod,
            theta_b: combos.theta_b,
            t,
        }
    }

    pub fn n0(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Plus => self.n0_plus,
            Branch::Minus => self.n0_minus,
        }
    }

    pub fn contrast(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Plus => self.contrast_plus,
            Branch::Minus => self.contrast_minus,
        }
    }

    /// `P± = C± exp(-A t)`.
    pub fn p(&self, branch: Branch) -> f64 {
        self.contrast(branch) * (-self.a_comb * self.t).exp()
    }

    /// `Q± = C± |B| t cos(θ - θ_B)`.
    pub fn q(&self, branch: Branch) -> f64 {
        self.contrast(branch) * self.b_mod * self.t * (self.theta - self.theta_b).cos()
    }

    pub fn fringe_params(&self, branch: Branch) -> FringeParams {
        FringeParams {
            n0: self.n0(branch),
            p: self.p(branch),
            q: self.q(branch),
            theta: self.theta,
        }
    }

    /// `N0+ C+ - N0- C-` for the exact model values.
    pub fn conservation_residual(&self) -> f64 {
        self.n0_plus * self.contrast_plus - self.n0_minus * self.contrast_minus
    }
}

pub fn projector_matrix(p: &ExitProjector) -> Matrix2<Complex64> {
    // e^{i(θ+π)} = -e^{iθ}; the explicit sign keeps O+ + O- = 1 exactly
    let phase = Complex64::from_polar(0.5, p.theta) * p.branch.sign();
    let half = Complex64::new(0.5, 0.0);
    Matrix2::new(half, phase, phase.conj(), half)
}

/// `Tr[O ρ]`.
pub fn intensity(rho: &DensityMatrix, p: &ExitProjector) -> f64 {
    (projector_matrix(p) * rho.to_matrix()).trace().re
}

/// Closed-form exit intensity for the aligned incident state.
///
/// The larger of the two intensities is evaluated directly and the other is
/// its complement. Since the larger one lies in `[0.5, 2]` whenever the
/// bracket is at most 3 in magnitude, the subtraction from 1 is exact and
/// `I+ + I- == 1.0` holds in floating point.
pub fn ideal_pattern(
    theta: f64,
    omega: f64,
    t: f64,
    d: &DissipationParams,
    branch: Branch,
    envelope: Envelope,
) -> f64 {
    let combos = derived_combos(d);
    let damping = match envelope {
        Envelope::Exponential => (-combos.a_comb * t).exp(),
        Envelope::FirstOrder => 1.0 - combos.a_comb * t,
    };
    let bracket = damping * (theta + 2.0 * omega * t).cos()
        + combos.b_mod * sin_over(2.0 * omega, t) * (theta - combos.theta_b).cos();
    let (plus, minus) = if bracket >= 0.0 {
        let plus = 0.5 + 0.5 * bracket;
        (plus, 1.0 - plus)
    } else {
        let minus = 0.5 - 0.5 * bracket;
        (1.0 - minus, minus)
    };
    match branch {
        Branch::Plus => plus,
        Branch::Minus => minus,
    }
}

/// `N0 { 1 ± [P cos(θ + φ) + Q sin(φ)/φ] }`.
pub fn fringe_counts(params: &FringeParams, phi: f64, branch: Branch) -> f64 {
    params.n0 * (1.0 + branch.sign() * (params.p * (params.theta + phi).cos() + params.q * sinc(phi)))
}

pub fn count_pattern(m: &CountModel, phi: f64, branch: Branch) -> f64 {
    fringe_counts(&m.fringe_params(branch), phi, branch)
}

/// `(N_max - N_min) / (N_max + N_min)`.
pub fn contrast_from_extrema(n_max: f64, n_min: f64) -> Result<f64, InterferenceError> {
    if n_min > n_max {
        return Err(InterferenceError::ExtremaOrder { n_max, n_min });
    }
    if !(n_max > 0.0 && n_min >= 0.0) {
        return Err(InterferenceError::ExtremaRange { n_max, n_min });
    }
    Ok((n_max - n_min) / (n_max + n_min))
}

/// Contrast from the extrema of a smooth fringe curve sampled on `points`
/// evenly spaced phases over `[phi_min, phi_max]`.
pub fn contrast_from_curve(
    params: &FringeParams,
    branch: Branch,
    phi_min: f64,
    phi_max: f64,
    points: usize,
) -> Result<f64, InterferenceError> {
    let (lo, hi) = phase_grid(phi_min, phi_max, points)
        .into_iter()
        .map(|phi| fringe_counts(params, phi, branch))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), n| (lo.min(n), hi.max(n)));
    contrast_from_extrema(hi, lo)
}

/// `points` evenly spaced phases including both end points.
pub fn phase_grid(phi_min: f64, phi_max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![phi_min],
        n => {
            let step = (phi_max - phi_min) / (n - 1) as f64;
            (0..n).map(|k| phi_min + step * k as f64).collect()
        }
    }
}

/// Default scan: 32 phases over `[-3π, 3π]`.
pub fn default_phase_grid() -> Vec<f64> {
    let span = 3.0 * std::f64::consts::PI;
    phase_grid(-span, span, 32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservationCheck {
    pub plus_product: Estimate,
    pub minus_product: Estimate,
    /// `N0+ C+ - N0- C-` in counts.
    pub residual: Estimate,
    /// `|residual| / sigma`.
    pub pull: f64,
}

fn product(x: Estimate, y: Estimate) -> Estimate {
    Estimate::new(
        x.value * y.value,
        (y.value * x.sigma).hypot(x.value * y.sigma),
    )
}

/// Particle-conservation residual `N0+ C+ - N0- C-` with first-order error
/// propagation over four independent inputs.
pub fn conservation_residual(
    n0_plus: Estimate,
    contrast_plus: Estimate,
    n0_minus: Estimate,
    contrast_minus: Estimate,
) -> ConservationCheck {
    let plus_product = product(n0_plus, contrast_plus);
    let minus_product = product(n0_minus, contrast_minus);
    let residual = Estimate::new(
        plus_product.value - minus_product.value,
        plus_product.sigma.hypot(minus_product.sigma),
    );
    ConservationCheck {
        plus_product,
        minus_product,
        residual,
        pull: residual.pull(0.0),
    }
}

/// Fringe contrast of the reduced (`a = 0`) model, `C = P + Q / cos θ`,
/// obtained by eliminating `α t` between the linearized `P` and `Q`.
pub fn simplified_contrast(p: Estimate, q: Estimate, theta: Estimate) -> Result<Estimate, InterferenceError> {
    let cos = theta.value.cos();
    if cos.abs() < MIN_COS_THETA {
        return Err(InterferenceError::DegenerateTheta(cos));
    }
    let value = p.value + q.value / cos;
    let d_theta = q.value * theta.value.sin() / (cos * cos);
    let sigma = (p.sigma.powi(2) + (q.sigma / cos).powi(2) + (d_theta * theta.sigma).powi(2)).sqrt();
    Ok(Estimate::new(value, sigma))
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    phi: f64,
    n_plus: f64,
    #[serde(default)]
    sigma_plus: Option<f64>,
    n_minus: f64,
    #[serde(default)]
    sigma_minus: Option<f64>,
}

/// Reads `phi,n_plus,sigma_plus,n_minus,sigma_minus`. The sigma columns may be
/// missing or empty, in which case Poisson errors are used.
pub fn read_fringe_csv<R: Read>(reader: R) -> Result<Vec<FringeSample>, InterferenceError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (idx, row) in rdr.deserialize::<CsvRow>().enumerate() {
        let row = row?;
        let line = idx + 2;
        if row.n_plus < 0.0 || row.n_minus < 0.0 {
            return Err(InterferenceError::InvalidRow {
                row: line,
                message: "negative counts".into(),
            });
        }
        let sigma_plus = row.sigma_plus.unwrap_or_else(|| poisson_sigma(row.n_plus));
        let sigma_minus = row.sigma_minus.unwrap_or_else(|| poisson_sigma(row.n_minus));
        if !(sigma_plus > 0.0 && sigma_minus > 0.0) {
            return Err(InterferenceError::InvalidRow {
                row: line,
                message: "sigma must be positive".into(),
            });
        }
        out.push(FringeSample {
            phi: row.phi,
            counts_plus: row.n_plus,
            sigma_plus,
            counts_minus: row.n_minus,
            sigma_minus,
        });
    }
    Ok(out)
}

pub fn write_fringe_csv<W: Write>(writer: W, samples: &[FringeSample]) -> Result<(), InterferenceError> {
    let mut wtr = csv::Writer::from_writer(writer);
    for s in samples {
        wtr.serialize(s)?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{propagate_perturbative, PropagationRequest};
    use crate::generator::HamiltonianParams;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn projector_examples() {
        let plus = projector_matrix(&ExitProjector { theta: 0.0, branch: Branch::Plus });
        assert_eq!(plus, Matrix2::new(c(0.5), c(0.5), c(0.5), c(0.5)));
        let minus = projector_matrix(&ExitProjector { theta: 0.0, branch: Branch::Minus });
        assert_eq!(minus, Matrix2::new(c(0.5), c(-0.5), c(-0.5), c(0.5)));
    }

    #[test]
    fn projectors_are_complementary_idempotents() {
        for k in 0..1000 {
            let theta = -7.0 + 14.0 * k as f64 / 999.0;
            let p = projector_matrix(&ExitProjector { theta, branch: Branch::Plus });
            let m = projector_matrix(&ExitProjector { theta, branch: Branch::Minus });
            assert_eq!(p + m, Matrix2::identity());
            assert!((p * p - p).norm() <= 1e-14);
            assert!((m * m - m).norm() <= 1e-14);
            assert_abs_diff_eq!(p.trace().re, 1.0);
            let mut eig: Vec<f64> = p.symmetric_eigenvalues().iter().copied().collect();
            eig.sort_by(f64::total_cmp);
            assert_abs_diff_eq!(eig[0], 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(eig[1], 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn intensity_examples() {
        let rho = DensityMatrix::incident_aligned();
        let plus = ExitProjector { theta: 0.0, branch: Branch::Plus };
        let minus = ExitProjector { theta: 0.0, branch: Branch::Minus };
        assert_abs_diff_eq!(intensity(&rho, &plus), 1.0);
        assert_abs_diff_eq!(intensity(&rho, &minus), 0.0);
        for theta in [0.0, 0.4, 2.0, -3.0] {
            for branch in Branch::BOTH {
                let i = intensity(&DensityMatrix::maximally_mixed(), &ExitProjector { theta, branch });
                assert_abs_diff_eq!(i, 0.5);
            }
        }
        let rho = DensityMatrix::new(0.3, 0.6, Complex64::new(0.1, 0.2));
        let sum = intensity(&rho, &ExitProjector { theta: 0.7, branch: Branch::Plus })
            + intensity(&rho, &ExitProjector { theta: 0.7, branch: Branch::Minus });
        assert_abs_diff_eq!(sum, rho.trace(), epsilon = 1e-15);
    }

    #[test]
    fn ideal_pattern_without_dissipation() {
        let d = DissipationParams::ZERO;
        for (theta, omega, t) in [(0.3f64, 1e-20f64, 1e20f64), (-1.0, 2.0, 0.1), (0.0, 0.0, 5.0)] {
            let want = 0.5 * (1.0 + (theta + 2.0 * omega * t).cos());
            assert_abs_diff_eq!(
                ideal_pattern(theta, omega, t, &d, Branch::Plus, Envelope::Exponential),
                want,
                epsilon = 1e-15
            );
        }
        // antinode
        let t = 1.0;
        let omega = PI / 2.0;
        assert_abs_diff_eq!(ideal_pattern(0.0, omega, t, &d, Branch::Plus, Envelope::Exponential), 0.0);
        assert_abs_diff_eq!(ideal_pattern(0.0, omega, t, &d, Branch::Minus, Envelope::Exponential), 1.0);
    }

    #[test]
    fn first_order_pattern_matches_trace_formula() {
        let d = DissipationParams::new(0.3, 0.1, 0.1, 0.7, 0.05, 0.6).scaled(1e-21);
        let t = 1.0 / 5.83e-21;
        for (theta, omega) in [(0.03, 1e-20), (0.09, -2e-20), (1.0, 0.0)] {
            let state = propagate_perturbative(&PropagationRequest::new(
                DensityMatrix::incident_aligned(),
                HamiltonianParams { energy: 0.0, omega },
                d,
                t,
            ))
            .unwrap()
            .state;
            for branch in Branch::BOTH {
                let traced = intensity(&state, &ExitProjector { theta, branch });
                let closed = ideal_pattern(theta, omega, t, &d, branch, Envelope::FirstOrder);
                assert_abs_diff_eq!(traced, closed, epsilon = 1e-12);
            }
        }
    }

    fn reference_minus_model() -> CountModel {
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
    fn count_pattern_examples() {
        let mut m = reference_minus_model();
        m.contrast_plus = 0.0;
        for phi in [-2.0, 0.0, 1.0, 7.0] {
            assert_eq!(count_pattern(&m, phi, Branch::Plus), 942.0);
        }

        let m = reference_minus_model();
        let p = m.p(Branch::Minus);
        let q = m.q(Branch::Minus);
        assert_abs_diff_eq!(p, 0.46, epsilon = 0.01);
        assert_abs_diff_eq!(q, 0.06, epsilon = 0.01);

        let mut flat = m;
        flat.theta = 0.0;
        let p = flat.p(Branch::Minus);
        let q = flat.q(Branch::Minus);
        assert_abs_diff_eq!(count_pattern(&flat, 0.0, Branch::Minus), 366.0 * (1.0 - (p + q)), epsilon = 1e-12);
        assert_abs_diff_eq!(count_pattern(&flat, 0.0, Branch::Plus), 942.0 * (1.0 + flat.p(Branch::Plus) + flat.q(Branch::Plus)), epsilon = 1e-12);
    }

    #[test]
    fn count_pattern_reduces_to_time_form() {
        // φ = 2ωt turns the count form back into the time-domain pattern
        let m = reference_minus_model();
        let omega = 1.3e-20;
        let phi = 2.0 * omega * m.t;
        let d = DissipationParams::new(0.095e-21, 0.0, 0.0, 0.745e-21, 0.0, 0.0);
        for branch in Branch::BOTH {
            let ideal = ideal_pattern(m.theta, omega, m.t, &d, branch, Envelope::Exponential);
            let n = m.n0(branch) * (1.0 + m.contrast(branch) * (2.0 * ideal - 1.0));
            assert_abs_diff_eq!(count_pattern(&m, phi, branch), n, epsilon = 1e-9);
        }
    }

    #[test]
    fn damping_term_is_periodic() {
        let mut m = reference_minus_model();
        m.b_mod = 0.0;
        for phi in [-5.0, -0.3, 0.0, 2.2] {
            for branch in Branch::BOTH {
                assert_abs_diff_eq!(
                    count_pattern(&m, phi, branch),
                    count_pattern(&m, phi + 2.0 * PI, branch),
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn contrast_examples() {
        assert_eq!(contrast_from_extrema(100.0, 100.0).unwrap(), 0.0);
        assert_eq!(contrast_from_extrema(200.0, 0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(contrast_from_extrema(942.0 * 1.19, 942.0 * 0.81).unwrap(), 0.19, epsilon = 1e-15);
        assert!(matches!(
            contrast_from_extrema(1.0, 2.0),
            Err(InterferenceError::ExtremaOrder { .. })
        ));
        assert!(contrast_from_extrema(0.0, 0.0).is_err());
    }

    #[test]
    fn contrast_recovered_from_dense_standard_curve() {
        for (n0, contrast, theta) in [(942.0, 0.19, 0.09), (366.0, 0.54, 0.03)] {
            let params = FringeParams { n0, p: contrast, q: 0.0, theta };
            for branch in Branch::BOTH {
                let est = contrast_from_curve(&params, branch, -3.0 * PI, 3.0 * PI, 40_001).unwrap();
                assert_abs_diff_eq!(est, contrast, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn conservation_examples() {
        let sym = conservation_residual(
            Estimate::new(500.0, 5.0),
            Estimate::new(0.4, 0.02),
            Estimate::new(500.0, 5.0),
            Estimate::new(0.4, 0.02),
        );
        assert_eq!(sym.residual.value, 0.0);

        let check = conservation_residual(
            Estimate::new(942.0, 6.0),
            Estimate::new(0.19, 0.02),
            Estimate::new(366.0, 4.0),
            Estimate::new(0.54, 0.03),
        );
        assert_abs_diff_eq!(check.plus_product.value, 178.98, epsilon = 1e-9);
        assert_abs_diff_eq!(check.minus_product.value, 197.64, epsilon = 1e-9);
        assert!(check.pull <= 1.5, "{check:?}");

        let shifted = conservation_residual(
            Estimate::exact(942.0),
            Estimate::exact(0.20),
            Estimate::exact(366.0),
            Estimate::exact(0.54),
        );
        assert_abs_diff_eq!(shifted.residual.value, -9.24, epsilon = 1e-9);
        assert_abs_diff_eq!(reference_minus_model().conservation_residual(), 178.98 - 197.64, epsilon = 1e-9);
    }

    #[test]
    fn simplified_contrast_examples() {
        let e = |v| Estimate::new(v, 0.0);
        let minus = simplified_contrast(e(0.46), e(0.06), e(0.03)).unwrap();
        assert_abs_diff_eq!(minus.value, 0.52, epsilon = 5e-4);
        let plus = simplified_contrast(e(0.17), e(0.02), e(0.09)).unwrap();
        assert!((0.19..=0.20).contains(&plus.value), "{plus:?}");
        assert_eq!(simplified_contrast(e(0.3), e(0.0), e(1.1)).unwrap().value, 0.3);
        assert!(matches!(
            simplified_contrast(e(0.3), e(0.1), e(PI / 2.0)),
            Err(InterferenceError::DegenerateTheta(_))
        ));
    }

    #[test]
    fn csv_defaults_to_poisson_errors() {
        let text = "phi,n_plus,n_minus\n0.0,100,25\n0.5,0,4\n";
        let rows = read_fringe_csv(text.as_bytes()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].sigma_plus, 10.0);
        assert_eq!(rows[0].sigma_minus, 5.0);
        assert_eq!(rows[1].sigma_plus, 1.0);

        let text = "phi,n_plus,sigma_plus,n_minus,sigma_minus\n0.1,100,3.5,25,\n";
        let rows = read_fringe_csv(text.as_bytes()).unwrap();
        assert_eq!(rows[0].sigma_plus, 3.5);
        assert_eq!(rows[0].sigma_minus, 5.0);
    }

    #[test]
    fn csv_rejects_bad_rows() {
        assert!(read_fringe_csv("phi,n_plus,n_minus\n0.0,-1,25\n".as_bytes()).is_err());
        assert!(read_fringe_csv("phi,n_plus,sigma_plus,n_minus\n0.0,1,0,25\n".as_bytes()).is_err());
        assert!(read_fringe_csv("phi,n_plus\n0.0,1\n".as_bytes()).is_err());
    }

    #[test]
    fn csv_written_table_reads_back() {
        let rows = vec![FringeSample::with_poisson_errors(0.25, 81.0, 16.0)];
        let mut buf = Vec::new();
        write_fringe_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("phi,n_plus,sigma_plus,n_minus,sigma_minus\n"));
        assert_eq!(read_fringe_csv(text.as_bytes()).unwrap(), rows);
    }

    #[test]
    fn grids() {
        assert!(phase_grid(0.0, 1.0, 0).is_empty());
        assert_eq!(phase_grid(0.0, 1.0, 1), vec![0.0]);
        let g = default_phase_grid();
        assert_eq!(g.len(), 32);
        assert_abs_diff_eq!(g[0], -3.0 * PI);
        assert_abs_diff_eq!(g[31], 3.0 * PI, epsilon = 1e-14);
    }
}
