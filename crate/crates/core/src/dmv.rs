//! Density-matrix vectorization: encoding, ensembles, the two-copy
//! expectation identity, the four-term decomposition and entropy analysis.
//!
//! Amplitude `i * 2^n + j` of an encoded state holds matrix entry `(i, j)`:
//! the row index lives on the first n qubits, the column index on the last n.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;

use crate::circuit::DensityMatrix;
use crate::error::{domain, Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, ONE, ZERO};
use crate::pauli::PauliSum;
use crate::substitute::{self, SubstituteSum, SwapObservable};

/// Relative tolerance below which an assembled ensemble counts as cancelled.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Tolerance for agreement between the two expectation paths.
pub const PATH_TOL: f64 = 1e-9;

/// Unit-norm state on 2n qubits encoding a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DMVPureState {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl DMVPureState {
    /// Normalizes the given amplitudes (length `4^n`).
    pub fn from_amplitudes(n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1usize << (2 * n) {
            return Err(domain(format!(
                "expected {} amplitudes for n = {n}, got {}",
                1usize << (2 * n),
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(domain("cannot normalize a zero state"));
        }
        Ok(DMVPureState {
            n,
            amplitudes: amplitudes.into_iter().map(|z| z / norm).collect(),
        })
    }

    /// Encodes a square matrix `m` (entry `(i, j)` at amplitude `i 2^n + j`).
    pub fn from_matrix(m: &CMatrix) -> Result<Self> {
        let d = m.nrows();
        if d == 0 || !d.is_power_of_two() || m.ncols() != d {
            return Err(domain("matrix must be square with power-of-two dimension"));
        }
        let n = d.trailing_zeros() as usize;
        let mut amps = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                amps.push(m[(i, j)]);
            }
        }
        DMVPureState::from_amplitudes(n, amps)
    }

    /// Qubits per half.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Amplitudes arranged as a `2^n x 2^n` matrix (rows = first half).
    pub fn as_matrix(&self) -> CMatrix {
        let d = 1usize << self.n;
        CMatrix::from_fn(d, d, |i, j| self.amplitudes[i * d + j])
    }

    /// Squared Schmidt coefficients across the row/column cut, descending.
    pub fn schmidt_probabilities(&self) -> Vec<f64> {
        linalg::singular_values(&self.as_matrix())
            .into_iter()
            .map(|s| s * s)
            .collect()
    }

    /// Number of Schmidt coefficients above `tol`.
    pub fn schmidt_rank(&self, tol: f64) -> usize {
        linalg::singular_values(&self.as_matrix())
            .into_iter()
            .filter(|&s| s > tol)
            .count()
    }
}

/// `|rho> = vec(rho) / sqrt(Tr rho^2)`.
pub fn vectorize(rho: &DensityMatrix) -> Result<DMVPureState> {
    let p = rho.purity();
    if !(p > 0.0) {
        return Err(domain("cannot vectorize a zero matrix"));
    }
    DMVPureState::from_matrix(rho.matrix())
}

/// K density matrices with complex weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DMVEnsemble {
    rhos: Vec<DensityMatrix>,
    coeffs: Vec<Complex64>,
}

impl DMVEnsemble {
    pub fn new(rhos: Vec<DensityMatrix>, coeffs: Vec<Complex64>) -> Result<Self> {
        if rhos.is_empty() {
            return Err(domain("an ensemble needs K >= 1"));
        }
        if rhos.len() != coeffs.len() {
            return Err(domain(format!(
                "{} matrices but {} coefficients",
                rhos.len(),
                coeffs.len()
            )));
        }
        let n = rhos[0].n_qubits();
        if rhos.iter().any(|r| r.n_qubits() != n) {
            return Err(domain("ensemble matrices act on different qubit counts"));
        }
        Ok(DMVEnsemble { rhos, coeffs })
    }

    pub fn k(&self) -> usize {
        self.rhos.len()
    }

    /// Qubits per matrix.
    pub fn n(&self) -> usize {
        self.rhos[0].n_qubits()
    }

    pub fn rhos(&self) -> &[DensityMatrix] {
        &self.rhos
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Unnormalized `sum_i c_i vec(rho_i)` and the degeneracy reference scale
    /// `sum_i |c_i| ||rho_i||_F`.
    fn raw_sum(&self) -> (Vec<Complex64>, f64) {
        let d = 1usize << self.n();
        let mut amps = vec![ZERO; d * d];
        let mut scale = 0.0;
        for (rho, ci) in self.rhos.iter().zip(&self.coeffs) {
            let m = rho.matrix();
            for i in 0..d {
                for j in 0..d {
                    amps[i * d + j] += ci * m[(i, j)];
                }
            }
            scale += ci.norm() * rho.purity().sqrt();
        }
        (amps, scale)
    }
}

/// Normalized `sum_i c_i vec(rho_i)`.
pub fn assemble(e: &DMVEnsemble) -> Result<DMVPureState> {
    let (amps, scale) = e.raw_sum();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > DEGENERACY_TOL * scale) || norm == 0.0 {
        return Err(Error::DegenerateEnsemble { norm });
    }
    DMVPureState::from_amplitudes(e.n(), amps)
}

/// Precomputed substitute Hamiltonian and swap observable for repeated
/// evaluation of the two-copy expectation identity.
#[derive(Debug, Clone)]
pub struct ExactEvaluator {
    h: PauliSum,
    hb: SubstituteSum,
    swap: SwapObservable,
}

/// Both evaluation paths of one exact expectation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationPaths {
    /// `<psi|H_A|psi>` on the assembled state.
    pub direct: f64,
    /// Ratio of two-copy traces through the substitute Hamiltonian.
    pub ratio: f64,
    /// Imaginary residue of the ratio.
    pub ratio_imag: f64,
    /// Ratio denominator `sum c_k^* c_l Tr(rho_k rho_l)`.
    pub denominator: f64,
}

impl ExactEvaluator {
    pub fn new(h: &PauliSum) -> Result<Self> {
        let hb = substitute::transform_hamiltonian(h)?;
        let swap = substitute::swap_observable(hb.n())?;
        Ok(ExactEvaluator {
            h: h.clone(),
            hb,
            swap,
        })
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        &self.h
    }

    pub fn substitute(&self) -> &SubstituteSum {
        &self.hb
    }

    /// Evaluates both paths without the agreement check.
    pub fn paths(&self, e: &DMVEnsemble) -> Result<ExpectationPaths> {
        if self.h.n_qubits() != 2 * e.n() {
            return Err(domain(format!(
                "Hamiltonian on {} qubits does not match an ensemble on n = {}",
                self.h.n_qubits(),
                e.n()
            )));
        }
        let psi = assemble(e)?;
        let direct = self.h.expectation(psi.amplitudes());

        let pv: Vec<Vec<Complex64>> = e
            .rhos()
            .iter()
            .map(|r| substitute::pauli_vector(r.matrix()))
            .collect();
        let cs = e.coeffs();
        let k = e.k();
        let mut num = ZERO;
        let mut den = ZERO;
        for i in 0..k {
            for j in 0..k {
                let w = cs[i].conj() * cs[j];
                if w == ZERO {
                    continue;
                }
                num += w * self.hb.trace_product(&pv[i], &pv[j]);
                den += w * self.swap.expectation(&pv[i], &pv[j]);
            }
        }
        if !(den.re.abs() > 0.0) {
            return Err(Error::DegenerateEnsemble { norm: den.norm() });
        }
        let ratio = num / den;
        Ok(ExpectationPaths {
            direct,
            ratio: ratio.re,
            ratio_imag: ratio.im,
            denominator: den.re,
        })
    }

    /// Exact expectation: computes both paths, checks they agree, returns
    /// the two-copy ratio.
    pub fn expectation(&self, e: &DMVEnsemble) -> Result<f64> {
        let p = self.paths(e)?;
        let scale = 1.0f64.max(p.direct.abs());
        if p.ratio_imag.abs() > PATH_TOL * scale {
            return Err(Error::Internal(format!(
                "two-copy ratio has imaginary residue {:e}",
                p.ratio_imag
            )));
        }
        if (p.direct - p.ratio).abs() > PATH_TOL * scale {
            return Err(Error::Internal(format!(
                "expectation paths disagree: direct {} vs ratio {}",
                p.direct, p.ratio
            )));
        }
        Ok(p.ratio)
    }
}

/// `<psi|H_A|psi>` for the state encoded by an ensemble.
pub fn exact_expectation(e: &DMVEnsemble, h: &PauliSum) -> Result<f64> {
    ExactEvaluator::new(h)?.expectation(e)
}

/// Writes a unit-norm state as `c1 rho1 - c2 rho2 + i c3 rho3 - i c4 rho4`
/// from its Schmidt decomposition `sum_i l_i |phi_i>|psi_i>`: row k uses
/// `x_i = phi_i + s_k psi_i^*` (with `s = 1, -1` and the `-i` rotated pair)
/// and `rho_k ~ sum_i l_i |x_i><x_i|`. Terms whose matrices coincide are
/// merged into the first of them.
pub fn decompose_k4(psi: &DMVPureState) -> Result<DMVEnsemble> {
    let m = psi.as_matrix();
    let d = m.nrows();
    let svd = m.clone().svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Internal("SVD without U".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::Internal("SVD without V".into()))?;
    let sv = svd.singular_values;
    let i_unit = c(0.0, 1.0);
    // (phi weight, psi* weight) per row; overall coefficient folded below.
    let rows: [(Complex64, Complex64, Complex64); 4] = [
        (ONE, ONE, c(0.25, 0.0)),
        (ONE, -ONE, c(-0.25, 0.0)),
        (-i_unit, ONE, c(0.0, 0.25)),
        (-i_unit, -ONE, c(0.0, -0.25)),
    ];
    let mut rhos = Vec::with_capacity(4);
    let mut coeffs = Vec::with_capacity(4);
    for (wa, wb, pref) in rows {
        let mut a = CMatrix::zeros(d, d);
        for k in 0..sv.len() {
            if sv[k] <= 0.0 {
                continue;
            }
            let phi: CVector = u.column(k).into_owned();
            // m = U S V^dagger, so psi_k^* = column k of V = conj(row k of V^dagger).
            let psi_star: CVector = CVector::from_fn(d, |r, _| v_t[(k, r)].conj());
            let x = phi * wa + psi_star * wb;
            a += (&x * x.adjoint()).scale(sv[k]);
        }
        let tr = a.trace().re;
        if tr > 1e-14 {
            rhos.push(DensityMatrix::from_matrix_unchecked(a.scale(1.0 / tr)));
            coeffs.push(pref * tr);
        } else {
            rhos.push(DensityMatrix::maximally_mixed(psi.n()));
            coeffs.push(ZERO);
        }
    }
    for a in 0..4 {
        for b in (a + 1)..4 {
            if coeffs[b] != ZERO && coeffs[a] != ZERO {
                let diff = linalg::max_abs_diff(rhos[a].matrix(), rhos[b].matrix());
                if diff < 1e-12 {
                    let moved = coeffs[b];
                    coeffs[a] += moved;
                    coeffs[b] = ZERO;
                }
            }
        }
    }
    for z in coeffs.iter_mut() {
        if z.norm() < 1e-13 {
            *z = ZERO;
        }
    }
    DMVEnsemble::new(rhos, coeffs)
}

/// Renyi entropy order: finite positive alpha (1 = Shannon) or infinity.
pub fn renyi_from_probabilities(p: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(domain(format!("Renyi order must be positive, got {alpha}")));
    }
    let probs: Vec<f64> = p.iter().copied().filter(|&x| x > 0.0).collect();
    if alpha.is_infinite() {
        let max = probs.iter().fold(0.0f64, |m, &x| m.max(x));
        return Ok(-max.log2());
    }
    if (alpha - 1.0).abs() < 1e-12 {
        return Ok(-probs.iter().map(|&x| x * x.log2()).sum::<f64>());
    }
    let s: f64 = probs.iter().map(|&x| x.powf(alpha)).sum();
    Ok(s.log2() / (1.0 - alpha))
}

/// Entanglement Renyi entropy (bits) across the row/column cut.
pub fn renyi_entropy(psi: &DMVPureState, alpha: f64) -> Result<f64> {
    renyi_from_probabilities(&psi.schmidt_probabilities(), alpha)
}

/// Standard purification `sum_k sqrt(l_k) |v_k>|v_k^*>` of a density
/// matrix, laid out like an encoded state.
pub fn purification(rho: &DensityMatrix) -> Result<DMVPureState> {
    let (vals, vecs) = linalg::hermitian_eigen(&linalg::hermitian_part(rho.matrix()));
    let d = rho.dim();
    let mut m = CMatrix::zeros(d, d);
    for (k, &l) in vals.iter().enumerate() {
        if l <= 0.0 {
            continue;
        }
        let v: CVector = vecs.column(k).into_owned();
        m += (&v * v.transpose()).scale(l.sqrt());
    }
    DMVPureState::from_matrix(&m)
}

/// `|<target|psi>|^2`.
pub fn fidelity(psi: &DMVPureState, target: &DMVPureState) -> Result<f64> {
    if psi.amplitudes.len() != target.amplitudes.len() {
        return Err(domain(format!(
            "fidelity between states of dimension {} and {}",
            psi.amplitudes.len(),
            target.amplitudes.len()
        )));
    }
    let ov = target
        .amplitudes
        .iter()
        .zip(&psi.amplitudes)
        .fold(ZERO, |acc, (t, p)| acc + t.conj() * p);
    Ok(ov.norm_sqr().min(1.0))
}

/// Fidelity of a raw amplitude vector (normalized internally) with a target.
pub fn fidelity_with(amplitudes: &[Complex64], target: &[Complex64]) -> Result<f64> {
    if amplitudes.len() != target.len() {
        return Err(domain("fidelity between vectors of different length"));
    }
    let na: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
    let nt: f64 = target.iter().map(|z| z.norm_sqr()).sum();
    if !(na > 0.0 && nt > 0.0) {
        return Err(domain("fidelity with a zero vector"));
    }
    let ov = target
        .iter()
        .zip(amplitudes)
        .fold(ZERO, |acc, (t, p)| acc + t.conj() * p);
    Ok((ov.norm_sqr() / (na * nt)).min(1.0))
}
