#![allow(dead_code)]

use dmv_core::linalg::CMatrix;
use dmv_core::pauli::{Pauli, PauliString, PauliSum};
use dmv_core::{DMVEnsemble, DensityMatrix};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<R: Rng>(r: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = r.random::<f64>().max(1e-300);
    let u2: f64 = r.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_complex<R: Rng>(r: &mut R) -> Complex64 {
    Complex64::new(gaussian(r), gaussian(r))
}

/// Random density matrix of the given rank (Ginibre construction).
pub fn random_density<R: Rng>(r: &mut R, n: usize, rank: usize) -> DensityMatrix {
    let d = 1usize << n;
    let g = CMatrix::from_fn(d, rank, |_, _| random_complex(r));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.unscale(tr)).unwrap()
}

pub fn random_pauli<R: Rng>(r: &mut R, n: usize) -> PauliString {
    let letters = (0..n).map(|_| Pauli::ALL[r.random_range(0..4)]).collect();
    PauliString::new(letters).unwrap()
}

pub fn random_hamiltonian<R: Rng>(r: &mut R, n_qubits: usize, m: usize) -> PauliSum {
    let terms = (0..m).map(|_| (gaussian(r), random_pauli(r, n_qubits))).collect();
    PauliSum::new(n_qubits, terms).unwrap()
}

pub fn random_ensemble<R: Rng>(r: &mut R, n: usize, k: usize) -> DMVEnsemble {
    let d = 1usize << n;
    let rhos = (0..k).map(|_| {
        let rank = r.random_range(1..=d);
        random_density(r, n, rank)
    }).collect();
    let coeffs = (0..k).map(|_| random_complex(r)).collect();
    DMVEnsemble::new(rhos, coeffs).unwrap()
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of R's
/// diagonal folded back into Q.
pub fn haar_unitary<R: Rng>(r: &mut R, d: usize) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| random_complex(r));
    let qr = g.qr();
    let (q, rr) = (qr.q(), qr.r());
    let phases = CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let z = rr[(i, i)];
            z / z.norm()
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    q * phases
}

/// Haar-random pure state.
pub fn random_state<R: Rng>(r: &mut R, d: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..d).map(|_| random_complex(r)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}
