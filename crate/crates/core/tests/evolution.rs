use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use sgi::bloch::{to_bloch, DensityMatrix};
use sgi::evolution::{propagate_exact, transfer_matrix, EvolutionError, PropagationRequest};
use sgi::generator::{check_complete_positivity, DissipationParams, HamiltonianParams};

const INV_T: f64 = 5.83e-21;

/// Right-hand side of the equation of motion written out component by
/// component, with `ρ = r0 + r·σ`.
fn rhs(r: [f64; 4], omega: f64, d: &DissipationParams) -> [f64; 4] {
    let [_, r1, r2, r3] = r;
    [
        0.0,
        -2.0 * omega * r2 - 2.0 * (d.a * r1 + d.b * r2 + d.c * r3),
        2.0 * omega * r1 - 2.0 * (d.b * r1 + d.alpha * r2 + d.beta * r3),
        -2.0 * (d.c * r1 + d.beta * r2 + d.gamma * r3),
    ]
}

fn axpy(x: [f64; 4], k: f64, y: [f64; 4]) -> [f64; 4] {
    std::array::from_fn(|i| x[i] + k * y[i])
}

fn rk4(r0: [f64; 4], omega: f64, d: &DissipationParams, t: f64, steps: usize) -> [f64; 4] {
    let h = t / steps as f64;
    let mut r = r0;
    for _ in 0..steps {
        let k1 = rhs(r, omega, d);
        let k2 = rhs(axpy(r, 0.5 * h, k1), omega, d);
        let k3 = rhs(axpy(r, 0.5 * h, k2), omega, d);
        let k4 = rhs(axpy(r, h, k3), omega, d);
        r = std::array::from_fn(|i| r[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    r
}

fn max_diff(a: [f64; 4], b: [f64; 4]) -> f64 {
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn random_state(rng: &mut ChaCha8Rng) -> DensityMatrix {
    let v: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let len = 0.5 * rng.random::<f64>() / norm;
    DensityMatrix::new(0.5 + len * v[2], 0.5 - len * v[2], Complex64::new(len * v[0], -len * v[1]))
}

/// Completely positive parameters from a random Gram coefficient matrix.
fn cp_draw(rng: &mut ChaCha8Rng, scale: f64) -> DissipationParams {
    let g: [[f64; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| rng.sample(StandardNormal)));
    let k = |i: usize, j: usize| (0..3).map(|m| g[i][m] * g[j][m]).sum::<f64>();
    let (r, s, t) = (k(0, 0), k(1, 1), k(2, 2));
    DissipationParams::new(s + t, -k(0, 1), -k(0, 2), r + t, -k(1, 2), r + s).scaled(scale)
}

#[test]
fn exact_propagator_matches_rk4_at_interferometer_scale() {
    let t = 1.0 / INV_T;
    let d = DissipationParams::new(0.3, 0.1, 0.1, 0.7, 0.05, 0.6).scaled(1e-21);
    let initial = DensityMatrix::incident_aligned();
    for phi in [-3.0 * std::f64::consts::PI, -1.0, 0.0, 0.4, 2.5, 3.0 * std::f64::consts::PI] {
        let omega = phi / (2.0 * t);
        let h = HamiltonianParams { energy: 1.0, omega };
        let exact = to_bloch(&propagate_exact(&PropagationRequest::new(initial, h, d, t)).unwrap()).as_array();
        let r0 = to_bloch(&initial).as_array();
        let coarse = rk4(r0, omega, &d, t, 4000);
        let fine = rk4(r0, omega, &d, t, 8000);
        // step-doubling: the fine run is accurate to roughly (coarse - fine) / 15
        let step_error = max_diff(coarse, fine) / 15.0;
        assert!(step_error < 1e-12, "phi {phi}: rk4 step error {step_error:e}");
        let size = fine.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let err = max_diff(exact, fine) / size;
        assert!(err < 1e-10, "phi {phi}: exact vs rk4 relative difference {err:e}");
    }
}

#[test]
fn transfer_matrices_compose() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let d = cp_draw(&mut rng, 1e-21);
        let h = HamiltonianParams {
            energy: 0.0,
            omega: rng.random_range(-5.0..5.0) * 1e-21,
        };
        let t1 = rng.random_range(0.0..2.0) / INV_T;
        let t2 = rng.random_range(0.0..2.0) / INV_T;
        let whole = transfer_matrix(&h, &d, t1 + t2).unwrap();
        let split = transfer_matrix(&h, &d, t2).unwrap() * transfer_matrix(&h, &d, t1).unwrap();
        worst = worst.max((whole - split).abs().max());
    }
    assert!(worst < 1e-12, "composition error {worst:e}");
}

#[test]
fn evolution_preserves_trace_hermiticity_and_positivity() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let d = cp_draw(&mut rng, 1e-21);
        assert!(check_complete_positivity(&d).is_cp);
        let h = HamiltonianParams {
            energy: 2.0,
            omega: rng.random_range(-5.0..5.0) * 1e-21,
        };
        let initial = random_state(&mut rng);
        let t = rng.random_range(0.0..10.0) / INV_T;
        let out = propagate_exact(&PropagationRequest::new(initial, h, d, t)).unwrap();
        assert!((out.trace() - initial.trace()).abs() < 1e-14);
        let m: Matrix2<Complex64> = out.to_matrix();
        assert!((m - m.adjoint()).norm() < 1e-15);
        assert!(out.is_positive(), "eigenvalues {:?}", out.eigenvalues());
    }
}

#[test]
fn zero_dissipation_is_unitary() {
    let h = HamiltonianParams {
        energy: 1.0,
        omega: 0.7e-21,
    };
    let m = transfer_matrix(&h, &DissipationParams::default(), 3.0 / INV_T).unwrap();
    let orthogonality = (m.transpose() * m - Matrix4::identity()).abs().max();
    assert!(orthogonality < 1e-14);
    let rho = DensityMatrix::incident_aligned();
    let out = propagate_exact(&PropagationRequest::new(rho, h, DissipationParams::default(), 3.0 / INV_T)).unwrap();
    assert!((to_bloch(&out).radius() - to_bloch(&rho).radius()).abs() < 1e-14);
}

#[test]
fn zero_time_is_identity_and_negative_time_is_rejected() {
    let d = DissipationParams::simplified(1e-21);
    let h = HamiltonianParams::default();
    let rho = DensityMatrix::incident_aligned();
    assert_eq!(propagate_exact(&PropagationRequest::new(rho, h, d, 0.0)).unwrap(), rho);
    assert_eq!(
        propagate_exact(&PropagationRequest::new(rho, h, d, -1.0)),
        Err(EvolutionError::NegativeTime(-1.0))
    );
}
