//! Stabilizer-code Hamiltonians `H = -sum_g g`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::linalg::ZERO;
use crate::pauli::{PauliString, PauliSum};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizerCode {
    pub n_qubits: usize,
    pub generators: Vec<PauliString>,
}

/// A validated code Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerHamiltonian {
    pub hamiltonian: PauliSum,
    /// Number of independent generators.
    pub rank: usize,
    /// False when the ground space is degenerate (`rank < n_qubits`).
    pub unique_ground_state: bool,
}

impl StabilizerCode {
    pub fn new(n_qubits: usize, generators: Vec<PauliString>) -> Result<Self> {
        if generators.is_empty() {
            return Err(domain("a stabilizer code needs at least one generator"));
        }
        for (k, g) in generators.iter().enumerate() {
            if g.n_qubits() != n_qubits {
                return Err(domain(format!(
                    "generator {k} ({g}) has {} qubits, expected {n_qubits}",
                    g.n_qubits()
                )));
            }
        }
        Ok(StabilizerCode {
            n_qubits,
            generators,
        })
    }

    pub fn from_strs(n_qubits: usize, generators: &[&str]) -> Result<Self> {
        let gens = generators
            .iter()
            .map(|s| PauliString::parse(s, n_qubits))
            .collect::<Result<Vec<_>>>()?;
        StabilizerCode::new(n_qubits, gens)
    }

    /// Checks pairwise commutation, naming the first offending pair.
    pub fn check_commuting(&self) -> Result<()> {
        for a in 0..self.generators.len() {
            for b in (a + 1)..self.generators.len() {
                if !self.generators[a].commutes_with(&self.generators[b]) {
                    return Err(domain(format!(
                        "generators {a} ({}) and {b} ({}) anticommute",
                        self.generators[a], self.generators[b]
                    )));
                }
            }
        }
        Ok(())
    }

    /// GF(2) rank of the generators' symplectic vectors.
    pub fn rank(&self) -> usize {
        let mut rows: Vec<u128> = self
            .generators
            .iter()
            .map(|g| {
                let (x, z) = g.masks();
                ((x as u128) << 64) | z as u128
            })
            .collect();
        let mut rank = 0;
        for bit in (0..128).rev() {
            let mask = 1u128 << bit;
            if let Some(p) = (rank..rows.len()).find(|&r| rows[r] & mask != 0) {
                rows.swap(rank, p);
                for r in 0..rows.len() {
                    if r != rank && rows[r] & mask != 0 {
                        rows[r] ^= rows[rank];
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    /// Joint +1 eigenstate, found by projecting computational basis states
    /// with `prod_g (1 + g) / 2`. Only meaningful for a unique ground state.
    pub fn ground_state(&self) -> Result<Vec<Complex64>> {
        if self.n_qubits > 24 {
            return Err(domain("ground state projection is limited to 24 qubits"));
        }
        self.check_commuting()?;
        let d = 1usize << self.n_qubits;
        for seed in 0..d {
            let mut v = vec![ZERO; d];
            v[seed] = Complex64::new(1.0, 0.0);
            for g in &self.generators {
                let gv = g.apply(&v);
                for (a, b) in v.iter_mut().zip(gv) {
                    *a = (*a + b) * 0.5;
                }
            }
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                return Ok(v.into_iter().map(|z| z / norm).collect());
            }
        }
        Err(domain("generators have no joint +1 eigenstate"))
    }
}

/// `H = -sum_g g` after checking that the generators commute.
pub fn build_stabilizer_hamiltonian(code: &StabilizerCode) -> Result<StabilizerHamiltonian> {
    code.check_commuting()?;
    let terms = code.generators.iter().map(|g| (-1.0, g.clone())).collect();
    let hamiltonian = PauliSum::new(code.n_qubits, terms)?;
    let rank = code.rank();
    Ok(StabilizerHamiltonian {
        hamiltonian,
        rank,
        unique_ground_state: rank == code.n_qubits && rank == code.generators.len(),
    })
}
