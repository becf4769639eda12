//! Pauli strings, real-weighted Pauli sums and the norms used by the
//! sampling and gradient bounds.
//!
//! Qubit 0 is the leftmost letter and the most significant bit of a
//! computational-basis index.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{self, CMatrix};

/// Default qubit limit for dense matrix construction.
pub const DENSE_LIMIT: usize = 12;

/// Largest register for which `norms` runs a dense eigensolve.
pub const SPECTRAL_DENSE_LIMIT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Row-major 2x2 matrix.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }

    fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    fn phases(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    /// Single-qubit product `self * other` as (phase, letter).
    pub fn mul(self, other: Pauli) -> (Complex64, Pauli) {
        use Pauli::*;
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match (self, other) {
            (I, p) | (p, I) => (one, p),
            (X, X) | (Y, Y) | (Z, Z) => (one, I),
            (X, Y) => (i, Z),
            (Y, X) => (-i, Z),
            (Y, Z) => (i, X),
            (Z, Y) => (-i, X),
            (Z, X) => (i, Y),
            (X, Z) => (-i, Y),
        }
    }
}

/// Tensor product of single-qubit Paulis, one letter per qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(domain("a Pauli string needs at least one qubit"));
        }
        Ok(PauliString { letters })
    }

    pub fn identity(n_qubits: usize) -> Self {
        PauliString {
            letters: vec![Pauli::I; n_qubits.max(1)],
        }
    }

    /// Parses a string of I/X/Y/Z letters of the given length.
    pub fn parse(text: &str, n_qubits: usize) -> Result<Self> {
        let mut letters = Vec::with_capacity(n_qubits);
        for (pos, c) in text.chars().enumerate() {
            match Pauli::from_char(c) {
                Some(p) => letters.push(p),
                None => {
                    return Err(Error::Parse {
                        position: pos,
                        message: format!("invalid Pauli letter {c:?}"),
                    })
                }
            }
        }
        if letters.len() != n_qubits {
            return Err(Error::Parse {
                position: letters.len().min(n_qubits),
                message: format!("expected {n_qubits} letters, found {}", letters.len()),
            });
        }
        PauliString::new(letters)
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn letter(&self, q: usize) -> Pauli {
        self.letters[q]
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Qubits carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n_qubits())
            .filter(|&q| self.letters[q] != Pauli::I)
            .collect()
    }

    /// Bit masks (x, z) in computational-basis index convention; Y sets both.
    pub fn masks(&self) -> (usize, usize) {
        let n = self.n_qubits();
        let mut x = 0usize;
        let mut z = 0usize;
        for (q, p) in self.letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            if p.flips() {
                x |= bit;
            }
            if p.phases() {
                z |= bit;
            }
        }
        (x, z)
    }

    fn y_phase(&self) -> Complex64 {
        let ny = self.letters.iter().filter(|&&p| p == Pauli::Y).count();
        match ny % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Action on a basis state: `P|x> = phase * |target>`.
    #[inline]
    pub fn action(&self, masks: (usize, usize), yphase: Complex64, x: usize) -> (usize, Complex64) {
        let sign = if (x & masks.1).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        (x ^ masks.0, yphase * sign)
    }

    /// Applies the string to a statevector of dimension 2^n.
    pub fn apply(&self, state: &[Complex64]) -> Vec<Complex64> {
        let masks = self.masks();
        let yp = self.y_phase();
        let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
        for (x, &amp) in state.iter().enumerate() {
            let (t, ph) = self.action(masks, yp, x);
            out[t] += ph * amp;
        }
        out
    }

    /// `<psi|P|psi>` without building a matrix.
    pub fn expectation(&self, state: &[Complex64]) -> Complex64 {
        let masks = self.masks();
        let yp = self.y_phase();
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, &amp) in state.iter().enumerate() {
            let (t, ph) = self.action(masks, yp, x);
            acc += state[t].conj() * ph * amp;
        }
        acc
    }

    /// `Tr(P rho)` for a dense 2^n x 2^n matrix.
    pub fn trace_with(&self, rho: &CMatrix) -> Complex64 {
        let masks = self.masks();
        let yp = self.y_phase();
        let mut acc = Complex64::new(0.0, 0.0);
        for x in 0..rho.ncols() {
            // (P rho)_{tt} summed: P|x> = ph|t>, so Tr(P rho) = sum_x ph * rho[x, t]
            let (t, ph) = self.action(masks, yp, x);
            acc += ph * rho[(x, t)];
        }
        acc
    }

    /// Dense matrix using the default qubit limit.
    pub fn to_dense(&self) -> Result<CMatrix> {
        self.to_dense_with_limit(DENSE_LIMIT)
    }

    pub fn to_dense_with_limit(&self, limit: usize) -> Result<CMatrix> {
        let n = self.n_qubits();
        if n > limit {
            return Err(Error::Capacity { qubits: n, limit });
        }
        let mut m = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        for p in &self.letters {
            let a = p.matrix();
            let pm = DMatrix::from_fn(2, 2, |r, c| a[r][c]);
            m = m.kronecker(&pm);
        }
        Ok(m)
    }

    /// Product `self * other` with its phase.
    pub fn mul(&self, other: &PauliString) -> Result<(Complex64, PauliString)> {
        if self.n_qubits() != other.n_qubits() {
            return Err(domain("Pauli product of strings with different lengths"));
        }
        let mut phase = Complex64::new(1.0, 0.0);
        let mut letters = Vec::with_capacity(self.n_qubits());
        for (a, b) in self.letters.iter().zip(&other.letters) {
            let (ph, p) = a.mul(*b);
            phase *= ph;
            letters.push(p);
        }
        Ok((phase, PauliString { letters }))
    }

    /// True when the two strings commute.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Reorders qubits: new qubit `q` carries old qubit `order[q]`.
    pub fn permuted(&self, order: &[usize]) -> PauliString {
        PauliString {
            letters: order.iter().map(|&o| self.letters[o]).collect(),
        }
    }

    /// Slice of consecutive qubits `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> PauliString {
        PauliString {
            letters: self.letters[start..start + len].to_vec(),
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.to_char())?;
        }
        Ok(())
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        let text: String = self.letters.iter().map(|p| p.to_char()).collect();
        s.serialize_str(&text)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        let n = text.chars().count();
        PauliString::parse(&text, n).map_err(serde::de::Error::custom)
    }
}

/// Real-weighted sum of Pauli strings on a common register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

/// Output of [`PauliSum::norms`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    /// `||H||_F^2 / 2^n`, equal to the sum of squared coefficients.
    pub frobenius_sq_over_dim: f64,
    /// Spectral norm, or the coefficient 1-norm when `spectral_is_bound`.
    pub spectral: f64,
    pub spectral_is_bound: bool,
    /// Coefficient 1-norm (no 2^n prefactor).
    pub l11: f64,
}

impl PauliSum {
    /// Builds a sum, merging repeated strings in first-occurrence order.
    pub fn new(n_qubits: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(domain("a Pauli sum needs at least one qubit"));
        }
        let mut merged: Vec<(f64, PauliString)> = Vec::with_capacity(terms.len());
        for (c, s) in terms {
            if s.n_qubits() != n_qubits {
                return Err(domain(format!(
                    "term {s} has {} qubits, expected {n_qubits}",
                    s.n_qubits()
                )));
            }
            if !c.is_finite() {
                return Err(domain(format!("term {s} has a non-finite coefficient")));
            }
            match merged.iter_mut().find(|(_, t)| *t == s) {
                Some(slot) => slot.0 += c,
                None => merged.push((c, s)),
            }
        }
        Ok(PauliSum {
            n_qubits,
            terms: merged,
        })
    }

    /// Parses `(coefficient, letters)` pairs.
    pub fn from_strs(n_qubits: usize, terms: &[(f64, &str)]) -> Result<Self> {
        let parsed = terms
            .iter()
            .map(|(c, s)| Ok((*c, PauliString::parse(s, n_qubits)?)))
            .collect::<Result<Vec<_>>>()?;
        PauliSum::new(n_qubits, parsed)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    /// Term count `m`.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_dense(&self) -> Result<CMatrix> {
        self.to_dense_with_limit(DENSE_LIMIT)
    }

    /// Dense matrix assembled from the sparse action of each term.
    pub fn to_dense_with_limit(&self, limit: usize) -> Result<CMatrix> {
        let n = self.n_qubits;
        if n > limit {
            return Err(Error::Capacity { qubits: n, limit });
        }
        let d = 1usize << n;
        let mut m = CMatrix::zeros(d, d);
        for (c, s) in &self.terms {
            let masks = s.masks();
            let yp = s.y_phase();
            for x in 0..d {
                let (t, ph) = s.action(masks, yp, x);
                m[(t, x)] += ph * *c;
            }
        }
        Ok(m)
    }

    /// Applies the sum to a statevector.
    pub fn apply(&self, state: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
        for (c, s) in &self.terms {
            let masks = s.masks();
            let yp = s.y_phase();
            for (x, &amp) in state.iter().enumerate() {
                let (t, ph) = s.action(masks, yp, x);
                out[t] += ph * amp * *c;
            }
        }
        out
    }

    /// `<psi|H|psi>` (real part; H is Hermitian).
    pub fn expectation(&self, state: &[Complex64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, s)| c * s.expectation(state).re)
            .sum()
    }

    /// `Tr(H rho)`.
    pub fn trace_with(&self, rho: &CMatrix) -> f64 {
        self.terms
            .iter()
            .map(|(c, s)| c * s.trace_with(rho).re)
            .sum()
    }

    pub fn norms(&self) -> Result<Norms> {
        self.norms_with_limit(SPECTRAL_DENSE_LIMIT)
    }

    /// Norms with an explicit qubit limit for the dense spectral solve.
    pub fn norms_with_limit(&self, limit: usize) -> Result<Norms> {
        if self.terms.is_empty() {
            return Err(domain("norms of an empty Pauli sum"));
        }
        let frob: f64 = self.terms.iter().map(|(c, _)| c * c).sum();
        let l11: f64 = self.terms.iter().map(|(c, _)| c.abs()).sum();
        let (spectral, is_bound) = if self.n_qubits <= limit {
            let dense = self.to_dense_with_limit(limit)?;
            let eig = linalg::hermitian_eigenvalues(&dense);
            let s = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            (s, false)
        } else {
            (l11, true)
        };
        Ok(Norms {
            frobenius_sq_over_dim: frob,
            spectral,
            spectral_is_bound: is_bound,
            l11,
        })
    }

    /// Reorders qubits in every term; see [`PauliString::permuted`].
    pub fn permuted(&self, order: &[usize]) -> Result<PauliSum> {
        let mut seen = vec![false; self.n_qubits];
        if order.len() != self.n_qubits {
            return Err(domain("permutation length does not match qubit count"));
        }
        for &o in order {
            if o >= self.n_qubits || seen[o] {
                return Err(domain("qubit order is not a permutation"));
            }
            seen[o] = true;
        }
        let terms = self
            .terms
            .iter()
            .map(|(c, s)| (*c, s.permuted(order)))
            .collect();
        PauliSum::new(self.n_qubits, terms)
    }
}

/// Complex-weighted Pauli sum, used for fermionic operators before they
/// are combined into Hermitian generators.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPauliSum {
    n_qubits: usize,
    terms: Vec<(Complex64, PauliString)>,
}

impl ComplexPauliSum {
    pub fn new(n_qubits: usize, terms: Vec<(Complex64, PauliString)>) -> Result<Self> {
        let mut out = ComplexPauliSum {
            n_qubits,
            terms: Vec::new(),
        };
        for (c, s) in terms {
            out.push(c, s)?;
        }
        Ok(out)
    }

    pub fn identity(n_qubits: usize) -> Self {
        ComplexPauliSum {
            n_qubits,
            terms: vec![(Complex64::new(1.0, 0.0), PauliString::identity(n_qubits))],
        }
    }

    fn push(&mut self, c: Complex64, s: PauliString) -> Result<()> {
        if s.n_qubits() != self.n_qubits {
            return Err(domain("term length does not match qubit count"));
        }
        match self.terms.iter_mut().find(|(_, t)| *t == s) {
            Some(slot) => slot.0 += c,
            None => self.terms.push((c, s)),
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(Complex64, PauliString)] {
        &self.terms
    }

    pub fn mul(&self, other: &ComplexPauliSum) -> Result<ComplexPauliSum> {
        let mut out = ComplexPauliSum {
            n_qubits: self.n_qubits,
            terms: Vec::new(),
        };
        for (a, sa) in &self.terms {
            for (b, sb) in &other.terms {
                let (ph, s) = sa.mul(sb)?;
                out.push(a * b * ph, s)?;
            }
        }
        Ok(out.pruned(0.0))
    }

    pub fn add(&self, other: &ComplexPauliSum) -> Result<ComplexPauliSum> {
        let mut out = self.clone();
        for (c, s) in &other.terms {
            out.push(*c, s.clone())?;
        }
        Ok(out.pruned(0.0))
    }

    pub fn scale(&self, k: Complex64) -> ComplexPauliSum {
        ComplexPauliSum {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(c, s)| (c * k, s.clone())).collect(),
        }
    }

    pub fn adjoint(&self) -> ComplexPauliSum {
        ComplexPauliSum {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(c, s)| (c.conj(), s.clone())).collect(),
        }
    }

    /// Drops terms with magnitude at or below `tol`.
    pub fn pruned(mut self, tol: f64) -> ComplexPauliSum {
        self.terms.retain(|(c, _)| c.norm() > tol);
        self
    }

    pub fn to_dense(&self) -> Result<CMatrix> {
        let n = self.n_qubits;
        if n > DENSE_LIMIT {
            return Err(Error::Capacity {
                qubits: n,
                limit: DENSE_LIMIT,
            });
        }
        let d = 1usize << n;
        let mut m = CMatrix::zeros(d, d);
        for (c, s) in &self.terms {
            let masks = s.masks();
            let yp = s.y_phase();
            for x in 0..d {
                let (t, ph) = s.action(masks, yp, x);
                m[(t, x)] += ph * *c;
            }
        }
        Ok(m)
    }

    /// Converts to a real sum when every imaginary part is below `tol`.
    pub fn to_real(&self, tol: f64) -> Result<PauliSum> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (c, s) in &self.terms {
            if c.im.abs() > tol {
                return Err(domain(format!(
                    "term {s} has imaginary coefficient {}",
                    c.im
                )));
            }
            terms.push((c.re, s.clone()));
        }
        PauliSum::new(self.n_qubits, terms)
    }
}
