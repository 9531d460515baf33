//! Two-beam state representations.
//!
//! A state is stored as the 2x2 Hermitian matrix
//!
//! ```text
//!     ρ = | rho1   rho3  |
//!         | rho3*  rho2  |
//! ```
//!
//! and expanded over the identity and the Pauli matrices as
//! `ρ = r0 σ0 + r1 σ1 + r2 σ2 + r3 σ3`, with the standard convention
//!
//! ```text
//!     σ1 = | 0 1 |   σ2 = | 0 -i |   σ3 = | 1  0 |
//!          | 1 0 |        | i  0 |        | 0 -1 |
//! ```
//!
//! so that `rho1 = r0 + r3`, `rho2 = r0 - r3` and `rho3 = r1 - i r2`.
//! Every other module uses the same convention.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Eigenvalue floor used to call a state (or a propagated state) positive.
pub const POSITIVITY_TOLERANCE: f64 = 1e-10;

/// Hermitian 2x2 density matrix. The lower off-diagonal entry is always the
/// conjugate of `rho3`, so Hermiticity cannot be broken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: Complex64,
}

/// Real Pauli-basis components of a density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl DensityMatrix {
    pub const fn new(rho1: f64, rho2: f64, rho3: Complex64) -> Self {
        Self { rho1, rho2, rho3 }
    }

    /// The lower off-diagonal entry.
    pub fn rho4(&self) -> Complex64 {
        self.rho3.conj()
    }

    /// `diag(1, 0)`.
    pub const fn upper() -> Self {
        Self::new(1.0, 0.0, Complex64::new(0.0, 0.0))
    }

    /// `diag(1/2, 1/2)`.
    pub const fn maximally_mixed() -> Self {
        Self::new(0.5, 0.5, Complex64::new(0.0, 0.0))
    }

    /// Incident state with all entries equal to 1/2.
    pub const fn incident_aligned() -> Self {
        Self::new(0.5, 0.5, Complex64::new(0.5, 0.0))
    }

    /// Incident state for the opposite beam orientation (off-diagonals -1/2).
    pub const fn incident_reversed() -> Self {
        Self::new(0.5, 0.5, Complex64::new(-0.5, 0.0))
    }

    pub fn trace(&self) -> f64 {
        self.rho1 + self.rho2
    }

    pub fn to_matrix(&self) -> Matrix2<Complex64> {
        Matrix2::new(
            Complex64::new(self.rho1, 0.0),
            self.rho3,
            self.rho4(),
            Complex64::new(self.rho2, 0.0),
        )
    }

    /// Builds a state from a general 2x2 matrix, keeping the Hermitian part.
    pub fn from_matrix(m: &Matrix2<Complex64>) -> Self {
        Self {
            rho1: m[(0, 0)].re,
            rho2: m[(1, 1)].re,
            rho3: (m[(0, 1)] + m[(1, 0)].conj()) * 0.5,
        }
    }

    /// Both eigenvalues, largest first.
    pub fn eigenvalues(&self) -> (f64, f64) {
        eigenvalues(self)
    }

    /// Smallest eigenvalue is at least `-POSITIVITY_TOLERANCE`.
    pub fn is_positive(&self) -> bool {
        self.eigenvalues().1 >= -POSITIVITY_TOLERANCE
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.rho1 - other.rho1)
            .abs()
            .max((self.rho2 - other.rho2).abs())
            .max((self.rho3 - other.rho3).norm())
    }
}

impl BlochState {
    pub const fn new(r0: f64, r1: f64, r2: f64, r3: f64) -> Self {
        Self { r0, r1, r2, r3 }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.r0, self.r1, self.r2, self.r3]
    }

    pub fn from_array(r: [f64; 4]) -> Self {
        Self::new(r[0], r[1], r[2], r[3])
    }

    /// Length of the (r1, r2, r3) part.
    pub fn radius(&self) -> f64 {
        (self.r1 * self.r1 + self.r2 * self.r2 + self.r3 * self.r3).sqrt()
    }

    /// `|r| <= r0` up to `1e-12`; equivalent to positivity of the matrix.
    pub fn in_ball(&self) -> bool {
        self.r1 * self.r1 + self.r2 * self.r2 + self.r3 * self.r3 <= self.r0 * self.r0 + 1e-12
    }
}

pub fn to_bloch(rho: &DensityMatrix) -> BlochState {
    BlochState {
        r0: 0.5 * (rho.rho1 + rho.rho2),
        r1: rho.rho3.re,
        r2: -rho.rho3.im,
        r3: 0.5 * (rho.rho1 - rho.rho2),
    }
}

pub fn from_bloch(b: &BlochState) -> DensityMatrix {
    DensityMatrix {
        rho1: b.r0 + b.r3,
        rho2: b.r0 - b.r3,
        rho3: Complex64::new(b.r1, -b.r2),
    }
}

/// Closed-form eigenvalues `(tr ± sqrt((rho1 - rho2)^2 + 4|rho3|^2)) / 2`,
/// largest first.
pub fn eigenvalues(rho: &DensityMatrix) -> (f64, f64) {
    let half_trace = 0.5 * (rho.rho1 + rho.rho2);
    let half_gap = (0.5 * (rho.rho1 - rho.rho2)).hypot(rho.rho3.norm());
    (half_trace + half_gap, half_trace - half_gap)
}

/// Von Neumann entropy `-Σ λ ln λ` (nats) of a unit-trace state. Eigenvalues
/// below zero are clamped; this is a diagnostic only.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let (l1, l2) = eigenvalues(rho);
    [l1, l2]
        .into_iter()
        .map(|l| l.max(0.0))
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.ln())
        .sum()
}

/// Pauli matrices `σ0..σ3` in the convention documented above.
pub fn pauli(index: usize) -> Matrix2<Complex64> {
    let o = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match index {
        0 => Matrix2::new(one, o, o, one),
        1 => Matrix2::new(o, one, one, o),
        2 => Matrix2::new(o, -i, i, o),
        3 => Matrix2::new(one, o, o, -one),
        _ => panic!("Pauli index {index} out of range"),
    }
}

/// Complex Pauli components `½ Tr(σ_μ X)` of an arbitrary 2x2 matrix.
pub fn pauli_components(x: &Matrix2<Complex64>) -> [Complex64; 4] {
    std::array::from_fn(|mu| (pauli(mu) * x).trace() * 0.5)
}
