//! Generator of the two-level semigroup: effective Hamiltonian, the
//! six-parameter dissipator and the complete-positivity constraints on it.
//!
//! All matrices in Bloch space act on the column `(r0, r1, r2, r3)` defined in
//! [`crate::bloch`].

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bloch::{pauli, pauli_components};

/// Relative slack applied to each constraint, multiplied by `scale^order`.
pub const CP_RELATIVE_TOLERANCE: f64 = 1e-12;

/// Time-independent effective Hamiltonian `diag(E + ω, E - ω)`, in GeV.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianParams {
    #[serde(rename = "E", alias = "energy", default)]
    pub energy: f64,
    #[serde(default)]
    pub omega: f64,
}

/// The six real dissipative constants, in GeV.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DissipationParams {
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub gamma: f64,
}

/// `A = α + a`, `B = α - a + 2ib`, `C = c + iβ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedCombos {
    pub a_comb: f64,
    pub b_comb: Complex64,
    pub c_comb: Complex64,
    pub b_mod: f64,
    pub theta_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Constraint {
    #[serde(rename = "a>=0")]
    ANonNegative,
    #[serde(rename = "alpha>=0")]
    AlphaNonNegative,
    #[serde(rename = "gamma>=0")]
    GammaNonNegative,
    #[serde(rename = "R>=0")]
    R,
    #[serde(rename = "S>=0")]
    S,
    #[serde(rename = "T>=0")]
    T,
    #[serde(rename = "RS>=b^2")]
    RS,
    #[serde(rename = "RT>=c^2")]
    RT,
    #[serde(rename = "ST>=beta^2")]
    ST,
    #[serde(rename = "RST>=2bc*beta+R*beta^2+S*c^2+T*b^2")]
    RST,
}

impl Constraint {
    /// Power of the parameter scale carried by the inequality.
    pub fn order(self) -> i32 {
        match self {
            Self::ANonNegative
            | Self::AlphaNonNegative
            | Self::GammaNonNegative
            | Self::R
            | Self::S
            | Self::T => 1,
            Self::RS | Self::RT | Self::ST => 2,
            Self::RST => 3,
        }
    }

    /// GeV power of the residual.
    pub fn unit(self) -> &'static str {
        match self.order() {
            1 => "GeV",
            2 => "GeV^2",
            _ => "GeV^3",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    /// `lhs - rhs` of the violated inequality (negative).
    pub residual: f64,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpVerdict {
    pub is_cp: bool,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub violated: Vec<Violation>,
}

impl DissipationParams {
    pub const ZERO: Self = Self {
        a: 0.0,
        b: 0.0,
        c: 0.0,
        alpha: 0.0,
        beta: 0.0,
        gamma: 0.0,
    };

    pub fn new(a: f64, b: f64, c: f64, alpha: f64, beta: f64, gamma: f64) -> Self {
        Self {
            a,
            b,
            c,
            alpha,
            beta,
            gamma,
        }
    }

    /// The reduced model `a = 0`, `γ = α`, `b = c = β = 0`.
    pub fn simplified(alpha: f64) -> Self {
        Self::new(0.0, 0.0, 0.0, alpha, 0.0, alpha)
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::new(
            k * self.a,
            k * self.b,
            k * self.c,
            k * self.alpha,
            k * self.beta,
            k * self.gamma,
        )
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.a, self.b, self.c, self.alpha, self.beta, self.gamma]
    }

    pub fn is_zero(&self) -> bool {
        self.as_array().iter().all(|&x| x == 0.0)
    }

    /// `max(|a|, |α|, |γ|)`; sets the tolerance scale of the CP check.
    pub fn scale(&self) -> f64 {
        self.a.abs().max(self.alpha.abs()).max(self.gamma.abs())
    }
}

pub fn hamiltonian_matrix(h: &HamiltonianParams) -> Matrix2<Complex64> {
    let z = Complex64::new(0.0, 0.0);
    Matrix2::new(
        Complex64::new(h.energy + h.omega, 0.0),
        z,
        z,
        Complex64::new(h.energy - h.omega, 0.0),
    )
}

/// `-2 * [[0,0,0,0],[0,a,b,c],[0,b,α,β],[0,c,β,γ]]`.
pub fn dissipator_matrix(d: &DissipationParams) -> Matrix4<f64> {
    let DissipationParams {
        a,
        b,
        c,
        alpha,
        beta,
        gamma,
    } = *d;
    Matrix4::new(
        0.0, 0.0, 0.0, 0.0, //
        0.0, a, b, c, //
        0.0, b, alpha, beta, //
        0.0, c, beta, gamma,
    ) * -2.0
}

pub fn derived_combos(d: &DissipationParams) -> DerivedCombos {
    let b_comb = Complex64::new(d.alpha - d.a, 2.0 * d.b);
    DerivedCombos {
        a_comb: d.alpha + d.a,
        b_comb,
        c_comb: Complex64::new(d.c, d.beta),
        b_mod: b_comb.norm(),
        theta_b: (2.0 * d.b).atan2(d.alpha - d.a),
    }
}

/// Evaluates every complete-positivity inequality on the six parameters.
///
/// A constraint of order `k` is violated when `lhs - rhs < -1e-12 * scale^k`
/// with `scale = max(|a|, |α|, |γ|)`.
pub fn check_complete_positivity(d: &DissipationParams) -> CpVerdict {
    let DissipationParams {
        a,
        b,
        c,
        alpha,
        beta,
        gamma,
    } = *d;
    let r = 0.5 * (alpha + gamma - a);
    let s = 0.5 * (a + gamma - alpha);
    let t = 0.5 * (a + alpha - gamma);
    let scale = d.scale();

    let checks = [
        (Constraint::ANonNegative, a),
        (Constraint::AlphaNonNegative, alpha),
        (Constraint::GammaNonNegative, gamma),
        (Constraint::R, r),
        (Constraint::S, s),
        (Constraint::T, t),
        (Constraint::RS, r * s - b * b),
        (Constraint::RT, r * t - c * c),
        (Constraint::ST, s * t - beta * beta),
        (
            Constraint::RST,
            r * s * t - (2.0 * b * c * beta + r * beta * beta + s * c * c + t * b * b),
        ),
    ];

    let violated: Vec<Violation> = checks
        .into_iter()
        .filter(|&(k, residual)| residual < -CP_RELATIVE_TOLERANCE * scale.powi(k.order()))
        .map(|(constraint, residual)| Violation {
            constraint,
            residual,
            unit: constraint.unit().to_owned(),
        })
        .collect();

    CpVerdict {
        is_cp: violated.is_empty(),
        r,
        s,
        t,
        violated,
    }
}

/// Hermitian basis of 3x3 coefficient matrices: three diagonal units, three
/// real symmetric pairs, three imaginary antisymmetric pairs.
fn hermitian_basis(k: usize) -> Matrix3<Complex64> {
    let mut m = Matrix3::<Complex64>::zeros();
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];
    match k {
        0..=2 => m[(k, k)] = one,
        3..=5 => {
            let (p, q) = PAIRS[k - 3];
            m[(p, q)] = one;
            m[(q, p)] = one;
        }
        6..=8 => {
            let (p, q) = PAIRS[k - 6];
            m[(p, q)] = i;
            m[(q, p)] = -i;
        }
        _ => unreachable!(),
    }
    m
}

/// `Σ_ij K_ij (σ_i ρ σ_j - ½ {σ_j σ_i, ρ})` with `i, j` over the three Pauli
/// matrices.
pub fn lindblad_action(kossakowski: &Matrix3<Complex64>, rho: &Matrix2<Complex64>) -> Matrix2<Complex64> {
    let mut out = Matrix2::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let k = kossakowski[(i, j)];
            if k == Complex64::new(0.0, 0.0) {
                continue;
            }
            let si = pauli(i + 1);
            let sj = pauli(j + 1);
            let ji = sj * si;
            out += (si * rho * sj - (ji * rho + rho * ji).scale(0.5)) * k;
        }
    }
    out
}

/// Bloch-space matrix of a 2x2 superoperator, column `ν` being the Pauli
/// components of the image of `σ_ν`.
pub fn bloch_matrix_of<F>(map: F) -> Matrix4<f64>
where
    F: Fn(&Matrix2<Complex64>) -> Matrix2<Complex64>,
{
    let mut m = Matrix4::zeros();
    for nu in 0..4 {
        let image = pauli_components(&map(&pauli(nu)));
        for mu in 0..4 {
            m[(mu, nu)] = image[mu].re;
        }
    }
    m
}

/// Pseudo-inverse of the 16x9 linear map from Hermitian coefficient matrices
/// to Bloch-space dissipators.
fn matching_pseudo_inverse() -> &'static DMatrix<f64> {
    static PINV: OnceLock<DMatrix<f64>> = OnceLock::new();
    PINV.get_or_init(|| {
        let mut design = DMatrix::<f64>::zeros(16, 9);
        for k in 0..9 {
            let basis = hermitian_basis(k);
            let action = bloch_matrix_of(|rho| lindblad_action(&basis, rho));
            for mu in 0..4 {
                for nu in 0..4 {
                    design[(4 * mu + nu, k)] = action[(mu, nu)];
                }
            }
        }
        design
            .pseudo_inverse(1e-12)
            .expect("matching system has full column rank")
    })
}

/// Coefficient matrix of the Pauli-basis Lindblad form reproducing
/// [`dissipator_matrix`]. Obtained by solving the linear matching system in
/// the least-squares sense, so no closed form is assumed.
pub fn kossakowski_matrix(d: &DissipationParams) -> Matrix3<Complex64> {
    let target = dissipator_matrix(d);
    let rhs = DVector::from_fn(16, |idx, _| target[(idx / 4, idx % 4)]);
    let coeffs = matching_pseudo_inverse() * rhs;
    (0..9).fold(Matrix3::zeros(), |acc, k| {
        acc + hermitian_basis(k) * Complex64::new(coeffs[k], 0.0)
    })
}

/// Eigenvalues of the Kossakowski matrix, ascending.
pub fn kossakowski_eigenvalues(d: &DissipationParams) -> [f64; 3] {
    let eig = kossakowski_matrix(d).symmetric_eigenvalues();
    let mut out = [eig[0], eig[1], eig[2]];
    out.sort_by(f64::total_cmp);
    out
}

/// Hamiltonian part `-i[H, ·]` in Bloch space: a rotation of `(r1, r2)` at
/// angular rate `2ω`. `E` drops out.
pub fn hamiltonian_generator(h: &HamiltonianParams) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m[(1, 2)] = -2.0 * h.omega;
    m[(2, 1)] = 2.0 * h.omega;
    m
}

/// `d r / dt = M r` for the full equation of motion.
pub fn full_generator(h: &HamiltonianParams, d: &DissipationParams) -> Matrix4<f64> {
    hamiltonian_generator(h) + dissipator_matrix(d)
}
