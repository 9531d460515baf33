use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimate::{inverse_variance_mean, Estimate};
use crate::interference::{simplified_contrast, Branch, InterferenceError, MIN_COS_THETA};

/// Signal-to-noise on `P` below which the damping term is reported as
/// unidentifiable.
pub const MIN_SIGNIFICANCE: f64 = 3.0;

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("fringe contrast must be positive, got {0}")]
    NonPositiveContrast(f64),
    #[error("inverse flight time must be positive, got {0}")]
    NonPositiveInvT(f64),
    #[error("logarithmic damping needs P > 0, got {0}")]
    NonPositiveRatio(f64),
    #[error(transparent)]
    Interference(#[from] InterferenceError),
}

/// How `A t` is recovered from the damping ratio `P / 𝒞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingForm {
    /// `A t = 1 - P / 𝒞`.
    #[default]
    Linearized,
    /// `A t = -ln(P / 𝒞)`.
    Logarithmic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ExtractionFlags {
    /// `P > 𝒞`, so the fitted damping is negative.
    pub negative_a: bool,
    /// `P` is not significantly different from zero.
    pub unidentifiable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbExtraction {
    #[serde(rename = "A")]
    pub a_comb: Estimate,
    #[serde(rename = "ReB")]
    pub re_b: Estimate,
    /// Covariance of `A` and `Re B`, induced by the shared contrast.
    pub covariance: f64,
    pub form: DampingForm,
    pub flags: ExtractionFlags,
}

/// Recovers `A` and `Re B` (GeV) from the fitted `P`, `Q` and the fringe
/// contrast, with first-order error propagation over independent inputs.
pub fn extract_ab(
    p: Estimate,
    q: Estimate,
    contrast: Estimate,
    inv_t: f64,
    form: DampingForm,
) -> Result<AbExtraction, ExtractError> {
    let c = contrast.value;
    if !(c > 0.0) {
        return Err(ExtractError::NonPositiveContrast(c));
    }
    if !(inv_t > 0.0) {
        return Err(ExtractError::NonPositiveInvT(inv_t));
    }

    let ratio = p.value / c;
    // derivatives of A t with respect to P and 𝒞
    let (at, d_p, d_c) = match form {
        DampingForm::Linearized => (1.0 - ratio, -1.0 / c, p.value / (c * c)),
        DampingForm::Logarithmic => {
            if !(p.value > 0.0) {
                return Err(ExtractError::NonPositiveRatio(p.value));
            }
            (-ratio.ln(), -1.0 / p.value, 1.0 / c)
        }
    };
    let bt = q.value / c;
    let (e_q, e_c) = (1.0 / c, -q.value / (c * c));

    let a_comb = Estimate::new(
        at * inv_t,
        inv_t * (d_p * p.sigma).hypot(d_c * contrast.sigma),
    );
    let re_b = Estimate::new(
        bt * inv_t,
        inv_t * (e_q * q.sigma).hypot(e_c * contrast.sigma),
    );
    let covariance = inv_t * inv_t * d_c * e_c * contrast.sigma * contrast.sigma;

    Ok(AbExtraction {
        a_comb,
        re_b,
        covariance,
        form,
        flags: ExtractionFlags {
            negative_a: a_comb.value < 0.0,
            unidentifiable: p.value == 0.0 || p.value.abs() < MIN_SIGNIFICANCE * p.sigma,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaPair {
    pub a: Estimate,
    pub alpha: Estimate,
}

/// `a = (A - Re B) / 2`, `α = (A + Re B) / 2`.
///
/// `covariance` is `cov(A, Re B)`; `None` treats the inputs as independent.
pub fn extract_a_alpha(a_comb: Estimate, re_b: Estimate, covariance: Option<f64>) -> AlphaPair {
    let cov = covariance.unwrap_or(0.0);
    let sum_sq = a_comb.sigma * a_comb.sigma + re_b.sigma * re_b.sigma;
    AlphaPair {
        a: Estimate::new(
            (a_comb.value - re_b.value) / 2.0,
            0.5 * (sum_sq - 2.0 * cov).max(0.0).sqrt(),
        ),
        alpha: Estimate::new(
            (a_comb.value + re_b.value) / 2.0,
            0.5 * (sum_sq + 2.0 * cov).max(0.0).sqrt(),
        ),
    }
}

/// Fitted coefficients of one exit beam for the reduced (`a = 0`) model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplifiedInput {
    pub branch: Branch,
    pub p: Estimate,
    pub q: Estimate,
    pub theta: Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchAlpha {
    pub branch: Branch,
    pub contrast: Estimate,
    /// Dimensionless `α t`.
    pub alpha_t: Estimate,
    /// GeV.
    pub alpha: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplifiedAlpha {
    pub branches: Vec<BranchAlpha>,
    /// Inverse-variance mean over branches, GeV.
    pub alpha: Estimate,
}

/// `α` under the reduced model `P = 𝒞 (1 - α t)`, `Q = 𝒞 α t cos θ`.
///
/// With `u = Q / cos θ`, both relations give `α t = u / (P + u)` once `𝒞` is
/// eliminated, so each beam supplies one determination; the beams are then
/// combined by inverse variance.
pub fn combined_alpha_simplified(inputs: &[SimplifiedInput], inv_t: f64) -> Result<SimplifiedAlpha, ExtractError> {
    if !(inv_t > 0.0) {
        return Err(ExtractError::NonPositiveInvT(inv_t));
    }
    let mut branches = Vec::with_capacity(inputs.len());
    for input in inputs {
        let contrast = simplified_contrast(input.p, input.q, input.theta)?;
        if !(contrast.value > 0.0) {
            return Err(ExtractError::NonPositiveContrast(contrast.value));
        }
        let cos = input.theta.value.cos();
        let u = input.q.value / cos;
        let c2 = contrast.value * contrast.value;
        let d_p = -u / c2;
        let d_u = input.p.value / c2;
        let d_q = d_u / cos;
        let d_theta = d_u * input.q.value * input.theta.value.sin() / (cos * cos);
        let alpha_t = Estimate::new(
            u / contrast.value,
            ((d_p * input.p.sigma).powi(2) + (d_q * input.q.sigma).powi(2) + (d_theta * input.theta.sigma).powi(2))
                .sqrt(),
        );
        branches.push(BranchAlpha {
            branch: input.branch,
            contrast,
            alpha_t,
            alpha: Estimate::new(alpha_t.value * inv_t, alpha_t.sigma * inv_t),
        });
    }

    let values: Vec<Estimate> = branches.iter().map(|b| b.alpha).collect();
    let alpha = inverse_variance_mean(&values).unwrap_or_else(|| {
        // all determinations exact: plain mean
        let n = values.len().max(1) as f64;
        Estimate::exact(values.iter().map(|e| e.value).sum::<f64>() / n)
    });
    Ok(SimplifiedAlpha { branches, alpha })
}

/// Projection `|B| cos(θ - θ_B)` measured in one dataset, GeV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BProjection {
    pub value: Estimate,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BSeparation {
    #[serde(rename = "ReB")]
    pub re_b: Estimate,
    #[serde(rename = "ImB")]
    pub im_b: Estimate,
    /// False when the phases do not span two independent directions.
    pub identifiable: bool,
}

/// Weighted least-squares split of `B` into real and imaginary parts from
/// projections `Re B cos θ + Im B sin θ` taken at several phases.
///
/// A single dataset, or datasets at effectively equal phases, cannot
/// separate the two; the result is then flagged and only `Re B` is filled.
pub fn b_from_projection(projections: &[BProjection]) -> BSeparation {
    let mut normal = [[0.0; 2]; 2];
    let mut rhs = [0.0; 2];
    for proj in projections {
        let w = if proj.value.sigma > 0.0 {
            proj.value.sigma.powi(-2)
        } else {
            1.0
        };
        let row = [proj.theta.cos(), proj.theta.sin()];
        for i in 0..2 {
            rhs[i] += w * row[i] * proj.value.value;
            for j in 0..2 {
                normal[i][j] += w * row[i] * row[j];
            }
        }
    }
    let det = normal[0][0] * normal[1][1] - normal[0][1] * normal[1][0];
    let trace_sq = (normal[0][0] + normal[1][1]).powi(2);
    if projections.len() < 2 || !(det > MIN_COS_THETA * trace_sq) {
        let re_b = projections
            .first()
            .map(|p| {
                let cos = p.theta.cos();
                Estimate::new(p.value.value / cos, p.value.sigma / cos.abs())
            })
            .unwrap_or(Estimate::exact(0.0));
        return BSeparation {
            re_b,
            im_b: Estimate::new(0.0, f64::INFINITY),
            identifiable: false,
        };
    }
    let inv = [
        [normal[1][1] / det, -normal[0][1] / det],
        [-normal[1][0] / det, normal[0][0] / det],
    ];
    let re = inv[0][0] * rhs[0] + inv[0][1] * rhs[1];
    let im = inv[1][0] * rhs[0] + inv[1][1] * rhs[1];
    BSeparation {
        re_b: Estimate::new(re, inv[0][0].sqrt()),
        im_b: Estimate::new(im, inv[1][1].sqrt()),
        identifiable: true,
    }
}
