//! Substitute operators: the index-permuted images of Pauli terms that turn
//! `<psi|H_A|psi>` into traces over two copies of the encoded states.
//!
//! A 2n-qubit term `P` (row system on qubits `0..n`, column system on
//! `n..2n`) maps to `Q = Q_0 (x) ... (x) Q_{n-1}` where block `Q_j` couples
//! qubit `j` of copy 1 with qubit `j` of copy 2 and
//! `<il|Q|jk> = <ij|P|kl>`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;

use crate::circuit::{Gate, GateKind, QuantumCircuit};
use crate::error::{domain, Error, Result};
use crate::linalg::{self, c, CMatrix, ONE, ZERO};
use crate::pauli::{Pauli, PauliString, PauliSum};

/// Substitute operator of one two-qubit Pauli pair, with its spectrum and a
/// diagonalizing unitary `V` (`V Q V^dagger = diag(eigenvalues)`).
#[derive(Debug, Clone, PartialEq)]
pub struct SubstituteBlock {
    pub source: [Pauli; 2],
    pub matrix: CMatrix,
    pub eigenvalues: [Complex64; 4],
    pub diagonalizer: CMatrix,
    /// Pauli-pair expansion: `matrix = sum_{a,b} transfer[a][b] sigma_a (x) sigma_b`.
    pub transfer: [[Complex64; 4]; 4],
}

fn pauli_index(p: Pauli) -> usize {
    match p {
        Pauli::I => 0,
        Pauli::X => 1,
        Pauli::Y => 2,
        Pauli::Z => 3,
    }
}

/// Applies the two-qubit index permutation `Q[i l, j k] = P[i j, k l]`.
pub fn permute_pair(p: &CMatrix) -> CMatrix {
    let mut q = CMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    q[(i * 2 + l, j * 2 + k)] = p[(i * 2 + j, k * 2 + l)];
                }
            }
        }
    }
    q
}

fn pair_matrix(a: Pauli, b: Pauli) -> CMatrix {
    let ma = a.matrix();
    let mb = b.matrix();
    CMatrix::from_fn(4, 4, |r, col| ma[r / 2][col / 2] * mb[r % 2][col % 2])
}

impl SubstituteBlock {
    /// Builds the block for the pair `(a, b)`.
    pub fn new(a: Pauli, b: Pauli) -> SubstituteBlock {
        let matrix = permute_pair(&pair_matrix(a, b));
        let (vals, vecs) = linalg::diagonalize_normal(&matrix);
        let diagonalizer = vecs.adjoint();
        let mut eigenvalues = [ZERO; 4];
        for (k, v) in vals.iter().enumerate() {
            // Spectra lie in {1, -1, i, -i}; snap away rounding noise.
            eigenvalues[k] = c(v.re.round(), v.im.round());
        }
        let mut transfer = [[ZERO; 4]; 4];
        for pa in Pauli::ALL {
            for pb in Pauli::ALL {
                let s = pair_matrix(pa, pb);
                transfer[pauli_index(pa)][pauli_index(pb)] = (s * &matrix).trace() / 4.0;
            }
        }
        SubstituteBlock {
            source: [a, b],
            matrix,
            eigenvalues,
            diagonalizer,
            transfer,
        }
    }

    /// Pauli-pair expansion as `(coefficient, two-letter string)` terms,
    /// skipping zero coefficients.
    pub fn pauli_expansion(&self) -> Vec<(Complex64, PauliString)> {
        let mut out = Vec::new();
        for pa in Pauli::ALL {
            for pb in Pauli::ALL {
                let w = self.transfer[pauli_index(pa)][pauli_index(pb)];
                if w.norm() > 1e-12 {
                    out.push((w, PauliString::new(vec![pa, pb]).expect("two letters")));
                }
            }
        }
        out
    }

    pub fn is_hermitian(&self) -> bool {
        linalg::max_abs_diff(&self.matrix, &self.matrix.adjoint()) < 1e-12
    }
}

/// Builds the substitute block of a two-qubit Pauli string.
pub fn substitute_block(p: &PauliString) -> Result<SubstituteBlock> {
    if p.n_qubits() != 2 {
        return Err(domain(format!(
            "substitute_block needs a 2-qubit string, got {}",
            p.n_qubits()
        )));
    }
    Ok(SubstituteBlock::new(p.letter(0), p.letter(1)))
}

/// All 16 blocks in `IXYZ x IXYZ` order, computed once per call.
pub fn block_table() -> Vec<SubstituteBlock> {
    let mut out = Vec::with_capacity(16);
    for a in Pauli::ALL {
        for b in Pauli::ALL {
            out.push(SubstituteBlock::new(a, b));
        }
    }
    out
}

/// Index into [`block_table`] for a pair.
pub fn block_index(a: Pauli, b: Pauli) -> usize {
    pauli_index(a) * 4 + pauli_index(b)
}

/// Tensor product of blocks, block `j` on (copy-1 qubit `j`, copy-2 qubit `j`).
#[derive(Debug, Clone, PartialEq)]
pub struct SubstituteOperator {
    pub source: PauliString,
    pub blocks: Vec<SubstituteBlock>,
}

impl SubstituteOperator {
    /// Qubits per copy.
    pub fn n(&self) -> usize {
        self.blocks.len()
    }

    /// Dense matrix in the paired layout (qubit `2j` = copy 1, `2j+1` = copy 2).
    pub fn to_dense_paired(&self) -> CMatrix {
        let mut m = CMatrix::from_element(1, 1, ONE);
        for b in &self.blocks {
            m = m.kronecker(&b.matrix);
        }
        m
    }

    /// Dense matrix in the copy-major layout (copy 1 on qubits `0..n`).
    pub fn to_dense_copy_major(&self) -> CMatrix {
        let n = self.n();
        let paired = self.to_dense_paired();
        let d = paired.nrows();
        let perm: Vec<usize> = (0..d).map(|x| copy_major_to_paired(x, n)).collect();
        CMatrix::from_fn(d, d, |r, col| paired[(perm[r], perm[col])])
    }

    /// Product of per-block eigenvalues for a measured outcome in the paired
    /// layout (2 bits per block, most significant block first).
    pub fn outcome_value(&self, outcome: usize) -> Complex64 {
        let n = self.n();
        let mut v = ONE;
        for (j, b) in self.blocks.iter().enumerate() {
            let k = (outcome >> (2 * (n - 1 - j))) & 3;
            v *= b.eigenvalues[k];
        }
        v
    }

    /// `Tr(Q (rho (x) sigma))` with `rho` on copy 1 and `sigma` on copy 2,
    /// contracted through the per-block Pauli expansions.
    pub fn trace_product(&self, rho_paulis: &[Complex64], sigma_paulis: &[Complex64]) -> Complex64 {
        let transfers: Vec<[[Complex64; 4]; 4]> = self.blocks.iter().map(|b| b.transfer).collect();
        contract_transfer(&transfers, rho_paulis, sigma_paulis)
    }
}

/// Maps a copy-major basis index (copy 1 bits high) to the paired layout.
pub fn copy_major_to_paired(x: usize, n: usize) -> usize {
    let a = x >> n;
    let b = x & ((1usize << n) - 1);
    let mut out = 0usize;
    for j in 0..n {
        let abit = (a >> (n - 1 - j)) & 1;
        let bbit = (b >> (n - 1 - j)) & 1;
        out |= ((abit << 1) | bbit) << (2 * (n - 1 - j));
    }
    out
}

/// Inverse of [`copy_major_to_paired`].
pub fn paired_to_copy_major(x: usize, n: usize) -> usize {
    let mut a = 0usize;
    let mut b = 0usize;
    for j in 0..n {
        let pair = (x >> (2 * (n - 1 - j))) & 3;
        a |= (pair >> 1) << (n - 1 - j);
        b |= (pair & 1) << (n - 1 - j);
    }
    (a << n) | b
}

/// Substitutes a 2n-qubit Pauli string, pairing qubit `j` with qubit `n + j`.
pub fn substitute_operator(p: &PauliString) -> Result<SubstituteOperator> {
    let total = p.n_qubits();
    if total % 2 != 0 {
        return Err(domain(format!(
            "substitute_operator needs an even qubit count, got {total}"
        )));
    }
    let n = total / 2;
    let blocks = (0..n)
        .map(|j| SubstituteBlock::new(p.letter(j), p.letter(n + j)))
        .collect();
    Ok(SubstituteOperator {
        source: p.clone(),
        blocks,
    })
}

/// Substitute Hamiltonian `H_B = sum_alpha g_alpha Q_alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstituteSum {
    n: usize,
    terms: Vec<(f64, SubstituteOperator)>,
}

impl SubstituteSum {
    /// Qubits per copy.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, SubstituteOperator)] {
        &self.terms
    }

    pub fn to_dense_copy_major(&self) -> CMatrix {
        let d = 1usize << (2 * self.n);
        let mut m = CMatrix::zeros(d, d);
        for (g, op) in &self.terms {
            m += op.to_dense_copy_major().scale(*g);
        }
        m
    }

    /// `Tr(H_B (rho (x) sigma))` from precomputed Pauli vectors.
    pub fn trace_product(&self, rho_paulis: &[Complex64], sigma_paulis: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .fold(ZERO, |acc, (g, op)| acc + op.trace_product(rho_paulis, sigma_paulis) * *g)
    }
}

/// Term-by-term substitution of a Hamiltonian on 2n qubits.
pub fn transform_hamiltonian(h: &PauliSum) -> Result<SubstituteSum> {
    if h.n_qubits() % 2 != 0 {
        return Err(domain(format!(
            "transform_hamiltonian needs an even qubit count, got {}",
            h.n_qubits()
        )));
    }
    let terms = h
        .terms()
        .iter()
        .map(|(g, p)| Ok((*g, substitute_operator(p)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SubstituteSum {
        n: h.n_qubits() / 2,
        terms,
    })
}

/// Tensor product of n two-qubit SWAPs; its expectation on `rho (x) sigma`
/// is `Tr(rho sigma)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapObservable {
    pub n: usize,
    op: SubstituteOperator,
}

impl SwapObservable {
    pub fn operator(&self) -> &SubstituteOperator {
        &self.op
    }

    pub fn to_dense_paired(&self) -> CMatrix {
        self.op.to_dense_paired()
    }

    pub fn to_dense_copy_major(&self) -> CMatrix {
        self.op.to_dense_copy_major()
    }

    /// `Tr(S (rho (x) sigma))` from Pauli vectors.
    pub fn expectation(&self, rho_paulis: &[Complex64], sigma_paulis: &[Complex64]) -> Complex64 {
        self.op.trace_product(rho_paulis, sigma_paulis)
    }
}

/// The swap observable is the substitute of the all-identity string.
pub fn swap_observable(n: usize) -> Result<SwapObservable> {
    if n == 0 {
        return Err(domain("swap observable needs n >= 1"));
    }
    let op = substitute_operator(&PauliString::identity(2 * n))?;
    Ok(SwapObservable { n, op })
}

/// All `4^n` Pauli expectations `Tr(P rho)`, indexed base 4 with qubit 0 as
/// the most significant digit and digits I=0, X=1, Y=2, Z=3.
pub fn pauli_vector(rho: &CMatrix) -> Vec<Complex64> {
    let d = rho.nrows();
    let n = d.trailing_zeros() as usize;
    let count = 1usize << (2 * n);
    let mut out = vec![ZERO; count];
    for (idx, slot) in out.iter_mut().enumerate() {
        let mut xm = 0usize;
        let mut zm = 0usize;
        let mut ny = 0usize;
        for q in 0..n {
            let digit = (idx >> (2 * (n - 1 - q))) & 3;
            let bit = 1usize << (n - 1 - q);
            match digit {
                1 => xm |= bit,
                2 => {
                    xm |= bit;
                    zm |= bit;
                    ny += 1;
                }
                3 => zm |= bit,
                _ => {}
            }
        }
        let yp = match ny % 4 {
            0 => ONE,
            1 => c(0.0, 1.0),
            2 => c(-1.0, 0.0),
            _ => c(0.0, -1.0),
        };
        let mut acc = ZERO;
        for x in 0..d {
            let sign = if (x & zm).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            acc += rho[(x, x ^ xm)] * sign;
        }
        *slot = acc * yp;
    }
    out
}

/// Contracts `sum_{a,b} prod_j W_j[a_j][b_j] r_a s_b`.
fn contract_transfer(transfers: &[[[Complex64; 4]; 4]], r: &[Complex64], s: &[Complex64]) -> Complex64 {
    let n = transfers.len();
    let mut t = s.to_vec();
    let mut scratch = vec![ZERO; t.len()];
    for (j, w) in transfers.iter().enumerate() {
        let stride = 1usize << (2 * (n - 1 - j));
        for base in 0..t.len() {
            if (base / stride) % 4 != 0 {
                continue;
            }
            let v = [t[base], t[base + stride], t[base + 2 * stride], t[base + 3 * stride]];
            for a in 0..4 {
                let mut acc = ZERO;
                for b in 0..4 {
                    acc += w[a][b] * v[b];
                }
                scratch[base + a * stride] = acc;
            }
        }
        core::mem::swap(&mut t, &mut scratch);
    }
    r.iter().zip(&t).fold(ZERO, |acc, (x, y)| acc + x * y)
}

// ---------------------------------------------------------------------------
// Two-qubit synthesis of the diagonalizers.

fn magic_basis() -> CMatrix {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let o = ZERO;
    let r = c(h, 0.0);
    let i = c(0.0, h);
    linalg::from_rows(4, &[r, o, o, i, o, i, r, o, o, i, -r, o, r, o, o, -i])
}

/// Splits `m = a (x) b` for a 4x4 product of single-qubit matrices, with
/// `det a = 1`.
fn kron_factor(m: &CMatrix) -> ([Complex64; 4], [Complex64; 4]) {
    // r[(i1 j1), (i2 j2)] = m[(i1 i2), (j1 j2)] has rank one.
    let r = |a: usize, b: usize| {
        let (i1, j1) = (a / 2, a % 2);
        let (i2, j2) = (b / 2, b % 2);
        m[(i1 * 2 + i2, j1 * 2 + j2)]
    };
    let mut best = 0;
    let mut best_norm = -1.0;
    for b in 0..4 {
        let nrm: f64 = (0..4).map(|a| r(a, b).norm()).sum();
        if nrm > best_norm {
            best_norm = nrm;
            best = b;
        }
    }
    let mut a = [r(0, best), r(1, best), r(2, best), r(3, best)];
    let det = a[0] * a[3] - a[1] * a[2];
    let s = det.sqrt();
    for z in a.iter_mut() {
        *z /= s;
    }
    let mut k = 0;
    for i in 1..4 {
        if a[i].norm() > a[k].norm() {
            k = i;
        }
    }
    let b = [r(k, 0) / a[k], r(k, 1) / a[k], r(k, 2) / a[k], r(k, 3) / a[k]];
    (a, b)
}

/// ZYZ angles `(alpha, beta, gamma)` with `u ~ RZ(alpha) RY(beta) RZ(gamma)`
/// up to global phase.
fn zyz_angles(u: &[Complex64; 4]) -> (f64, f64, f64) {
    let det = u[0] * u[3] - u[1] * u[2];
    let s = det.sqrt();
    let a = u[0] / s;
    let cc = u[2] / s;
    let beta = 2.0 * cc.norm().atan2(a.norm());
    if a.norm() < 1e-12 {
        (2.0 * cc.arg(), beta, 0.0)
    } else if cc.norm() < 1e-12 {
        (-2.0 * a.arg(), beta, 0.0)
    } else {
        let sum = -2.0 * a.arg();
        let diff = 2.0 * cc.arg();
        ((sum + diff) / 2.0, beta, (sum - diff) / 2.0)
    }
}

fn push_single(gates: &mut Vec<Gate>, u: &[Complex64; 4], qubit: usize) {
    let (alpha, beta, gamma) = zyz_angles(u);
    gates.push(Gate::rotation(GateKind::Rz, qubit, gamma));
    gates.push(Gate::rotation(GateKind::Ry, qubit, beta));
    gates.push(Gate::rotation(GateKind::Rz, qubit, alpha));
}

/// Synthesizes an arbitrary two-qubit unitary as single-qubit ZYZ rotations
/// around a three-CNOT core, exact up to global phase.
pub fn synthesize_two_qubit(u: &CMatrix) -> Result<Vec<Gate>> {
    if u.nrows() != 4 || u.ncols() != 4 {
        return Err(domain("two-qubit synthesis needs a 4x4 matrix"));
    }
    let det = u.determinant();
    let root = det.powf(0.25);
    let su = u.map(|z| z / root);
    let b = magic_basis();
    let up = b.adjoint() * &su * &b;
    let m2 = up.transpose() * &up;
    let re = DMatrix::from_fn(4, 4, |r, col| m2[(r, col)].re);
    let im = DMatrix::from_fn(4, 4, |r, col| m2[(r, col)].im);

    let mut found = None;
    for t in [0.5773, 1.3117, 2.7183, -0.9029, 0.1234] {
        let (_, p) = linalg::real_symmetric_eigen(&(&re + &im * t));
        let pc = p.map(|x| c(x, 0.0));
        let dm = pc.transpose() * &m2 * &pc;
        if linalg::off_diagonal_norm(&dm) < 1e-10 {
            found = Some((p, dm));
            break;
        }
    }
    let (mut p, dm) = found.ok_or_else(|| {
        Error::Internal("two-qubit synthesis: could not diagonalize the magic-basis square".into())
    })?;
    let mut dm = dm;
    if p.determinant() < 0.0 {
        for r in 0..4 {
            p[(r, 0)] = -p[(r, 0)];
        }
        let pc = p.map(|x| c(x, 0.0));
        dm = pc.transpose() * &m2 * &pc;
    }
    let mut dl: Vec<Complex64> = (0..4).map(|k| dm[(k, k)].sqrt()).collect();
    let prod = dl.iter().fold(ONE, |acc, z| acc * z);
    if prod.re < 0.0 {
        dl[0] = -dl[0];
    }
    let pc = p.map(|x| c(x, 0.0));
    let dinv = CMatrix::from_fn(4, 4, |r, col| if r == col { ONE / dl[r] } else { ZERO });
    let k1 = &up * &pc * dinv;
    let imag = k1.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    if imag > 1e-8 {
        return Err(Error::Internal(format!(
            "two-qubit synthesis: left factor not real (residual {imag:e})"
        )));
    }

    // Solve for the canonical parameters from the diagonal phases.
    // Diagonals of XX, YY, ZZ in this magic basis.
    let xx = [1.0, 1.0, -1.0, -1.0];
    let yy = [-1.0, 1.0, -1.0, 1.0];
    let zz = [1.0, -1.0, -1.0, 1.0];
    let sys = DMatrix::from_fn(4, 4, |r, col| match col {
        0 => 1.0,
        1 => xx[r],
        2 => yy[r],
        _ => zz[r],
    });
    let th = nalgebra::DVector::from_iterator(4, dl.iter().map(|z| z.arg()));
    let sol = sys
        .lu()
        .solve(&th)
        .ok_or_else(|| Error::Internal("two-qubit synthesis: singular phase system".into()))?;
    let (a, bb, cc) = (sol[1], sol[2], sol[3]);

    let l1 = &b * k1 * b.adjoint();
    let l2 = &b * pc.transpose() * b.adjoint();
    let (a1, c1) = kron_factor(&l1);
    let (a2, c2) = kron_factor(&l2);

    let half = core::f64::consts::FRAC_PI_2;
    let mut gates = Vec::with_capacity(25);
    push_single(&mut gates, &a2, 0);
    push_single(&mut gates, &c2, 1);
    // exp(i(a XX + b YY + c ZZ)) with three CNOTs.
    gates.push(Gate::rotation(GateKind::Rz, 1, -half));
    gates.push(Gate::cnot(1, 0));
    gates.push(Gate::rotation(GateKind::Rz, 0, half - 2.0 * cc));
    gates.push(Gate::rotation(GateKind::Ry, 1, 2.0 * a - half));
    gates.push(Gate::cnot(0, 1));
    gates.push(Gate::rotation(GateKind::Ry, 1, half - 2.0 * bb));
    gates.push(Gate::cnot(1, 0));
    gates.push(Gate::rotation(GateKind::Rz, 0, half));
    push_single(&mut gates, &a1, 0);
    push_single(&mut gates, &c1, 1);

    let circ = QuantumCircuit::from_gates(2, 0, gates.clone())?;
    let got = circ.unitary(&[])?;
    let residual = linalg::phase_distance(&got, u);
    if residual > 1e-9 {
        return Err(Error::Internal(format!(
            "two-qubit synthesis residual {residual:e}"
        )));
    }
    Ok(gates)
}

/// Gate sequence whose unitary equals `block.diagonalizer` up to global
/// phase, so measuring after it samples the block eigenbasis.
pub fn rotation_circuit(block: &SubstituteBlock) -> Result<Vec<Gate>> {
    synthesize_two_qubit(&block.diagonalizer)
}
