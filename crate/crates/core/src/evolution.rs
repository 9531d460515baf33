//! Time evolution of the two-beam state.
//!
//! [`propagate_exact`] exponentiates the full Bloch-space generator and is the
//! reference. [`propagate_perturbative`] is the closed first-order solution in
//! the dissipative constants, valid while `A t` stays small.

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bloch::{from_bloch, pauli, pauli_components, to_bloch, BlochState, DensityMatrix};
use crate::generator::{derived_combos, full_generator, DissipationParams, HamiltonianParams};
use crate::sinc::sin_over;

/// `A t` at or above this value marks the first-order solution as unreliable.
pub const VALIDITY_THRESHOLD: f64 = 0.2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("negative evolution time {0} GeV^-1: the semigroup only propagates forward")]
    NegativeTime(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationRequest {
    pub initial: DensityMatrix,
    pub h: HamiltonianParams,
    pub d: DissipationParams,
    /// Elapsed time in GeV^-1.
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbativeValidity {
    #[serde(rename = "At")]
    pub at: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbativeState {
    pub state: DensityMatrix,
    pub validity: PerturbativeValidity,
}

impl PropagationRequest {
    pub fn new(initial: DensityMatrix, h: HamiltonianParams, d: DissipationParams, t: f64) -> Self {
        Self { initial, h, d, t }
    }

    fn checked_time(&self) -> Result<f64, EvolutionError> {
        if self.t >= 0.0 {
            Ok(self.t)
        } else {
            Err(EvolutionError::NegativeTime(self.t))
        }
    }
}

/// Bloch-space transfer matrix `exp(M t)`.
pub fn transfer_matrix(
    h: &HamiltonianParams,
    d: &DissipationParams,
    t: f64,
) -> Result<Matrix4<f64>, EvolutionError> {
    if t < 0.0 {
        return Err(EvolutionError::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(Matrix4::identity());
    }
    Ok((full_generator(h, d) * t).exp())
}

pub fn apply_transfer(transfer: &Matrix4<f64>, rho: &DensityMatrix) -> DensityMatrix {
    let r = Vector4::from(to_bloch(rho).as_array());
    let out = transfer * r;
    from_bloch(&BlochState::new(out[0], out[1], out[2], out[3]))
}

pub fn propagate_exact(req: &PropagationRequest) -> Result<DensityMatrix, EvolutionError> {
    let t = req.checked_time()?;
    if t == 0.0 {
        return Ok(req.initial);
    }
    let transfer = transfer_matrix(&req.h, &req.d, t)?;
    Ok(apply_transfer(&transfer, &req.initial))
}

/// Exact propagation over a batch of times. Runs in parallel; the output order
/// follows `times`.
pub fn propagate_exact_grid(
    initial: &DensityMatrix,
    h: &HamiltonianParams,
    d: &DissipationParams,
    times: &[f64],
) -> Result<Vec<DensityMatrix>, EvolutionError> {
    times
        .par_iter()
        .map(|&t| propagate_exact(&PropagationRequest::new(*initial, *h, *d, t)))
        .collect()
}

pub fn perturbative_validity(d: &DissipationParams, t: f64) -> PerturbativeValidity {
    let at = (d.alpha + d.a) * t;
    PerturbativeValidity {
        at,
        ok: at < VALIDITY_THRESHOLD,
    }
}

/// All four matrix entries of the first-order solution, written term by term.
/// Returns `(rho1, rho2, rho3, rho4)`.
pub(crate) fn first_order_entries(
    rho: &DensityMatrix,
    omega: f64,
    d: &DissipationParams,
    t: f64,
) -> (f64, f64, Complex64, Complex64) {
    let combos = derived_combos(d);
    let (a_comb, b, c) = (combos.a_comb, combos.b_comb, combos.c_comb);
    let (rho1, rho2, rho3, rho4) = (rho.rho1, rho.rho2, rho.rho3, rho.rho4());

    let s1 = sin_over(omega, t);
    let s2 = sin_over(2.0 * omega, t);
    let e_minus = Complex64::from_polar(1.0, -omega * t);
    let e_plus = e_minus.conj();
    let gt = d.gamma * t;

    // C e^{-iωt} sin(ωt)/ω ρ3 + C* e^{iωt} sin(ωt)/ω ρ4 is real
    let transfer = (c * e_minus * s1 * rho3 + c.conj() * e_plus * s1 * rho4).re;
    let r1 = (1.0 - gt) * rho1 + gt * rho2 - transfer;
    let r2 = gt * rho1 + (1.0 - gt) * rho2 + transfer;

    let damp = 1.0 - a_comb * t;
    let r3 = -c.conj() * e_minus * s1 * (rho1 - rho2)
        + Complex64::from_polar(damp, -2.0 * omega * t) * rho3
        + b * s2 * rho4;
    let r4 = -c * e_plus * s1 * (rho1 - rho2)
        + b.conj() * s2 * rho3
        + Complex64::from_polar(damp, 2.0 * omega * t) * rho4;
    (r1, r2, r3, r4)
}

/// First-order closed-form propagation. The `sin(ωt)/ω` factors are extended
/// continuously to `ω = 0`.
pub fn propagate_perturbative(req: &PropagationRequest) -> Result<PerturbativeState, EvolutionError> {
    let t = req.checked_time()?;
    let (rho1, rho2, rho3, _) = first_order_entries(&req.initial, req.h.omega, &req.d, t);
    Ok(PerturbativeState {
        state: DensityMatrix::new(rho1, rho2, rho3),
        validity: perturbative_validity(&req.d, t),
    })
}

/// Choi matrix `Σ_ij E_ij ⊗ Φ(E_ij) / 2` of the channel with Bloch-space
/// transfer matrix `transfer`, i.e. the state obtained by evolving one half of
/// a maximally entangled pair while the other half is left alone.
pub fn choi_matrix(transfer: &Matrix4<f64>) -> Matrix4<Complex64> {
    let mut choi = Matrix4::<Complex64>::zeros();
    for i in 0..2 {
        for j in 0..2 {
            let mut unit = Matrix2::<Complex64>::zeros();
            unit[(i, j)] = Complex64::new(1.0, 0.0);
            let comps = pauli_components(&unit);
            let image = (0..4).fold(Matrix2::<Complex64>::zeros(), |acc, mu| {
                let coeff: Complex64 = (0..4).map(|nu| comps[nu] * transfer[(mu, nu)]).sum();
                acc + pauli(mu) * coeff
            });
            for p in 0..2 {
                for q in 0..2 {
                    choi[(2 * i + p, 2 * j + q)] = image[(p, q)] * 0.5;
                }
            }
        }
    }
    choi
}

/// Smallest eigenvalue of the Choi state after evolving for `t`.
pub fn extended_min_eigenvalue(
    h: &HamiltonianParams,
    d: &DissipationParams,
    t: f64,
) -> Result<f64, EvolutionError> {
    let choi = choi_matrix(&transfer_matrix(h, d, t)?);
    Ok(choi.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min))
}
