//! Gates, parameterized circuits and dense density-matrix simulation under
//! gate-level depolarizing noise.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{c, CMatrix, I, ONE, ZERO};
use crate::pauli::DENSE_LIMIT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    U1,
    H,
    X,
    Y,
    Z,
    Cnot,
    Swap,
    /// Real rotation used in the Schmidt-coefficient block; same matrix as RY.
    OrthoRy,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Swap => 2,
            _ => 1,
        }
    }

    pub fn is_rotation(self) -> bool {
        matches!(
            self,
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::U1 | GateKind::OrthoRy
        )
    }
}

/// One gate. For rotations the applied angle is
/// `angle + scale * params[param]` when `param` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    #[serde(default)]
    pub angle: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<usize>,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

fn is_one(x: &f64) -> bool {
    *x == 1.0
}

impl Gate {
    pub fn fixed(kind: GateKind, qubits: &[usize]) -> Gate {
        Gate {
            kind,
            qubits: qubits.to_vec(),
            angle: 0.0,
            param: None,
            scale: 1.0,
        }
    }

    pub fn rotation(kind: GateKind, qubit: usize, angle: f64) -> Gate {
        Gate {
            kind,
            qubits: vec![qubit],
            angle,
            param: None,
            scale: 1.0,
        }
    }

    pub fn parameterized(kind: GateKind, qubit: usize, param: usize, scale: f64) -> Gate {
        Gate {
            kind,
            qubits: vec![qubit],
            angle: 0.0,
            param: Some(param),
            scale,
        }
    }

    pub fn cnot(control: usize, target: usize) -> Gate {
        Gate::fixed(GateKind::Cnot, &[control, target])
    }

    /// Angle after binding parameters.
    pub fn bound_angle(&self, params: &[f64]) -> f64 {
        match self.param {
            Some(k) => self.angle + self.scale * params[k],
            None => self.angle,
        }
    }

    /// Row-major 2x2 (arity 1) or 4x4 (arity 2) matrix. For two-qubit gates
    /// `qubits[0]` is the more significant index bit.
    pub fn matrix(&self, params: &[f64]) -> Vec<Complex64> {
        let t = self.bound_angle(params);
        let (ch, sh) = ((t / 2.0).cos(), (t / 2.0).sin());
        let r = core::f64::consts::FRAC_1_SQRT_2;
        match self.kind {
            GateKind::Rx => vec![c(ch, 0.0), c(0.0, -sh), c(0.0, -sh), c(ch, 0.0)],
            GateKind::Ry | GateKind::OrthoRy => vec![c(ch, 0.0), c(-sh, 0.0), c(sh, 0.0), c(ch, 0.0)],
            GateKind::Rz => vec![c(ch, -sh), ZERO, ZERO, c(ch, sh)],
            GateKind::U1 => vec![ONE, ZERO, ZERO, c(t.cos(), t.sin())],
            GateKind::H => vec![c(r, 0.0), c(r, 0.0), c(r, 0.0), c(-r, 0.0)],
            GateKind::X => vec![ZERO, ONE, ONE, ZERO],
            GateKind::Y => vec![ZERO, -I, I, ZERO],
            GateKind::Z => vec![ONE, ZERO, ZERO, -ONE],
            GateKind::Cnot => {
                let mut m = vec![ZERO; 16];
                m[0] = ONE;
                m[5] = ONE;
                m[2 * 4 + 3] = ONE;
                m[3 * 4 + 2] = ONE;
                m
            }
            GateKind::Swap => {
                let mut m = vec![ZERO; 16];
                m[0] = ONE;
                m[4 + 2] = ONE;
                m[2 * 4 + 1] = ONE;
                m[15] = ONE;
                m
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumCircuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    n_parameters: usize,
}

impl QuantumCircuit {
    pub fn new(n_qubits: usize, n_parameters: usize) -> Self {
        QuantumCircuit {
            n_qubits,
            gates: Vec::new(),
            n_parameters,
        }
    }

    /// Builds a circuit from a gate list, validating every gate.
    pub fn from_gates(n_qubits: usize, n_parameters: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut circ = QuantumCircuit::new(n_qubits, n_parameters);
        for g in gates {
            circ.push(g)?;
        }
        Ok(circ)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        if gate.qubits.len() != gate.kind.arity() {
            return Err(domain(format!(
                "{:?} expects {} qubit(s), got {}",
                gate.kind,
                gate.kind.arity(),
                gate.qubits.len()
            )));
        }
        if gate.qubits.iter().any(|&q| q >= self.n_qubits) {
            return Err(domain(format!(
                "{:?} on qubits {:?} is outside a {}-qubit register",
                gate.kind, gate.qubits, self.n_qubits
            )));
        }
        if gate.qubits.len() == 2 && gate.qubits[0] == gate.qubits[1] {
            return Err(domain(format!("{:?} needs two distinct qubits", gate.kind)));
        }
        if let Some(k) = gate.param {
            if !gate.kind.is_rotation() {
                return Err(domain(format!("{:?} cannot carry a parameter", gate.kind)));
            }
            if k >= self.n_parameters {
                return Err(domain(format!(
                    "parameter index {k} out of range ({} parameters)",
                    self.n_parameters
                )));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn n_parameters(&self) -> usize {
        self.n_parameters
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_parameters {
            return Err(domain(format!(
                "expected {} parameters, got {}",
                self.n_parameters,
                params.len()
            )));
        }
        Ok(())
    }

    /// Dense unitary of the whole circuit.
    pub fn unitary(&self, params: &[f64]) -> Result<CMatrix> {
        self.check_params(params)?;
        if self.n_qubits > DENSE_LIMIT {
            return Err(Error::Capacity {
                qubits: self.n_qubits,
                limit: DENSE_LIMIT,
            });
        }
        let d = 1usize << self.n_qubits;
        let mut u = CMatrix::identity(d, d);
        for g in &self.gates {
            let m = g.matrix(params);
            for col in 0..d {
                let mut v: Vec<Complex64> = u.column(col).iter().copied().collect();
                apply_to_vector(&mut v, self.n_qubits, &g.qubits, &m);
                for (r, z) in v.into_iter().enumerate() {
                    u[(r, col)] = z;
                }
            }
        }
        Ok(u)
    }
}

/// Strength of the per-gate depolarizing channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p: f64,
    pub enabled: bool,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        NoiseModel {
            p: 0.0,
            enabled: false,
        }
    }

    pub fn depolarizing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(domain(format!("noise strength {p} is outside [0, 1]")));
        }
        Ok(NoiseModel {
            p,
            enabled: p > 0.0,
        })
    }

    pub fn effective_p(&self) -> f64 {
        if self.enabled {
            self.p
        } else {
            0.0
        }
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::noiseless()
    }
}

/// Circuit fault rate: one fault location per gate.
pub fn fault_rate(circuit: &QuantumCircuit, noise: &NoiseModel) -> f64 {
    fault_rate_for(circuit.gate_count(), noise.effective_p())
}

pub fn fault_rate_for(gate_count: usize, p: f64) -> f64 {
    p * gate_count as f64
}

/// Dense density matrix on `n_qubits`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: CMatrix,
}

impl DensityMatrix {
    /// Wraps a matrix after checking Hermiticity, unit trace and positivity.
    pub fn new(data: CMatrix) -> Result<Self> {
        let d = data.nrows();
        if d == 0 || !d.is_power_of_two() || data.ncols() != d {
            return Err(domain("density matrix must be square with power-of-two dimension"));
        }
        let dm = DensityMatrix {
            n_qubits: d.trailing_zeros() as usize,
            data,
        };
        dm.validate()?;
        Ok(dm)
    }

    /// Wraps a matrix without validation.
    pub fn from_matrix_unchecked(data: CMatrix) -> Self {
        let n = data.nrows().trailing_zeros() as usize;
        DensityMatrix { n_qubits: n, data }
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let d = 1usize << n_qubits;
        let mut data = CMatrix::zeros(d, d);
        data[(index, index)] = ONE;
        DensityMatrix { n_qubits, data }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        DensityMatrix {
            n_qubits,
            data: CMatrix::identity(d, d).scale(1.0 / d as f64),
        }
    }

    /// `|psi><psi|` after normalizing `psi`.
    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !psi.len().is_power_of_two() {
            return Err(domain("pure state must be nonzero with power-of-two length"));
        }
        let d = psi.len();
        let data = CMatrix::from_fn(d, d, |r, col| psi[r] * psi[col].conj() / (norm * norm));
        Ok(DensityMatrix {
            n_qubits: d.trailing_zeros() as usize,
            data,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.data.nrows();
        let mut herm = 0.0f64;
        let mut tr = ZERO;
        for r in 0..d {
            tr += self.data[(r, r)];
            for col in 0..d {
                herm = herm.max((self.data[(r, col)] - self.data[(col, r)].conj()).norm());
            }
        }
        if herm > 1e-10 {
            return Err(domain(format!("density matrix not Hermitian (deviation {herm:e})")));
        }
        if (tr - ONE).norm() > 1e-10 {
            return Err(domain(format!("density matrix trace is {tr}, expected 1")));
        }
        let min = crate::linalg::hermitian_eigenvalues(&crate::linalg::hermitian_part(&self.data))
            .first()
            .copied()
            .unwrap_or(0.0);
        if min < -1e-9 {
            return Err(domain(format!("density matrix has negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    /// `Tr(rho^2)`, computed as the squared Frobenius norm.
    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Reduced state on `keep` (any order; the result keeps ascending order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }

    /// `rho -> U rho U^dagger` for a gate matrix on the given qubits.
    pub(crate) fn conjugate(&mut self, qubits: &[usize], m: &[Complex64]) {
        let n = self.n_qubits;
        let d = self.data.nrows();
        let data = self.data.as_mut_slice();
        match qubits.len() {
            1 => {
                let bit = 1usize << (n - 1 - qubits[0]);
                // Left multiplication, column by column (column-major storage).
                for col in 0..d {
                    let base = col * d;
                    for r0 in 0..d {
                        if r0 & bit != 0 {
                            continue;
                        }
                        let r1 = r0 | bit;
                        let a = data[base + r0];
                        let b = data[base + r1];
                        data[base + r0] = m[0] * a + m[1] * b;
                        data[base + r1] = m[2] * a + m[3] * b;
                    }
                }
                let (u00, u01, u10, u11) = (m[0].conj(), m[1].conj(), m[2].conj(), m[3].conj());
                for c0 in 0..d {
                    if c0 & bit != 0 {
                        continue;
                    }
                    let c1 = c0 | bit;
                    for r in 0..d {
                        let a = data[c0 * d + r];
                        let b = data[c1 * d + r];
                        data[c0 * d + r] = a * u00 + b * u01;
                        data[c1 * d + r] = a * u10 + b * u11;
                    }
                }
            }
            _ => {
                let b0 = 1usize << (n - 1 - qubits[0]);
                let b1 = 1usize << (n - 1 - qubits[1]);
                let offs = [0, b1, b0, b0 | b1];
                let mut v = [ZERO; 4];
                for col in 0..d {
                    let base = col * d;
                    for r in 0..d {
                        if r & (b0 | b1) != 0 {
                            continue;
                        }
                        for k in 0..4 {
                            v[k] = data[base + r + offs[k]];
                        }
                        for k in 0..4 {
                            let mut acc = ZERO;
                            for l in 0..4 {
                                acc += m[k * 4 + l] * v[l];
                            }
                            data[base + r + offs[k]] = acc;
                        }
                    }
                }
                for cbase in 0..d {
                    if cbase & (b0 | b1) != 0 {
                        continue;
                    }
                    for r in 0..d {
                        for k in 0..4 {
                            v[k] = data[(cbase + offs[k]) * d + r];
                        }
                        // (rho U^dagger)[r, c_k] = sum_l rho[r, c_l] conj(U[k, l])
                        for k in 0..4 {
                            let mut acc = ZERO;
                            for l in 0..4 {
                                acc += v[l] * m[k * 4 + l].conj();
                            }
                            data[(cbase + offs[k]) * d + r] = acc;
                        }
                    }
                }
            }
        }
    }

    /// Depolarizing channel on the gate support:
    /// `rho -> (1 - p) rho + p * mean_{P != I} P rho P`.
    ///
    /// Uses `sum_{P} P rho P = 2^k Tr_S(rho) (x) I_S` over all `4^k` Paulis
    /// on the `k`-qubit support `S`.
    pub(crate) fn depolarize(&mut self, qubits: &[usize], p: f64) {
        if p == 0.0 {
            return;
        }
        let n = self.n_qubits;
        let d = self.data.nrows();
        let k = qubits.len();
        let mask: usize = qubits.iter().map(|&q| 1usize << (n - 1 - q)).sum();
        let offs: Vec<usize> = if k == 1 {
            vec![0, mask]
        } else {
            let b0 = 1usize << (n - 1 - qubits[0]);
            let b1 = 1usize << (n - 1 - qubits[1]);
            vec![0, b1, b0, b0 | b1]
        };
        let nonid = ((1usize << (2 * k)) - 1) as f64;
        let scale_k = (1usize << k) as f64;
        // rho' = (1 - p - p/nonid) rho + (p/nonid) * T
        let keep = 1.0 - p - p / nonid;
        let w = p / nonid;
        let data = self.data.as_mut_slice();
        let mut block = vec![ZERO; offs.len() * offs.len()];
        for cb in 0..d {
            if cb & mask != 0 {
                continue;
            }
            for rb in 0..d {
                if rb & mask != 0 {
                    continue;
                }
                let mut s = ZERO;
                for (i, &oc) in offs.iter().enumerate() {
                    for (j, &or) in offs.iter().enumerate() {
                        block[i * offs.len() + j] = data[(cb + oc) * d + rb + or];
                    }
                    s += data[(cb + oc) * d + rb + oc];
                }
                for (i, &oc) in offs.iter().enumerate() {
                    for (j, &or) in offs.iter().enumerate() {
                        let mut z = keep * block[i * offs.len() + j];
                        if i == j {
                            z += w * scale_k * s;
                        }
                        data[(cb + oc) * d + rb + or] = z;
                    }
                }
            }
        }
    }
}

fn apply_to_vector(v: &mut [Complex64], n: usize, qubits: &[usize], m: &[Complex64]) {
    let d = v.len();
    if qubits.len() == 1 {
        let bit = 1usize << (n - 1 - qubits[0]);
        for r0 in 0..d {
            if r0 & bit != 0 {
                continue;
            }
            let r1 = r0 | bit;
            let (a, b) = (v[r0], v[r1]);
            v[r0] = m[0] * a + m[1] * b;
            v[r1] = m[2] * a + m[3] * b;
        }
    } else {
        let b0 = 1usize << (n - 1 - qubits[0]);
        let b1 = 1usize << (n - 1 - qubits[1]);
        let offs = [0, b1, b0, b0 | b1];
        for r in 0..d {
            if r & (b0 | b1) != 0 {
                continue;
            }
            let old = [v[r], v[r + offs[1]], v[r + offs[2]], v[r + offs[3]]];
            for k in 0..4 {
                let mut acc = ZERO;
                for l in 0..4 {
                    acc += m[k * 4 + l] * old[l];
                }
                v[r + offs[k]] = acc;
            }
        }
    }
}

/// Runs a circuit on a density matrix starting from the computational basis
/// state `initial`, applying the depolarizing channel after every gate.
pub fn run_circuit(
    circuit: &QuantumCircuit,
    params: &[f64],
    noise: &NoiseModel,
    initial: usize,
) -> Result<DensityMatrix> {
    circuit.check_params(params)?;
    let n = circuit.n_qubits();
    if n > DENSE_LIMIT {
        return Err(Error::Capacity {
            qubits: n,
            limit: DENSE_LIMIT,
        });
    }
    if initial >= 1usize << n {
        return Err(domain(format!("initial basis state {initial} out of range")));
    }
    let mut rho = DensityMatrix::basis(n, initial);
    let p = noise.effective_p();
    for g in circuit.gates() {
        let m = g.matrix(params);
        rho.conjugate(&g.qubits, &m);
        rho.depolarize(&g.qubits, p);
    }
    Ok(rho)
}

/// Noiseless statevector simulation, the reference path for `p = 0`.
pub fn run_statevector(
    circuit: &QuantumCircuit,
    params: &[f64],
    initial: usize,
) -> Result<Vec<Complex64>> {
    circuit.check_params(params)?;
    let n = circuit.n_qubits();
    if n > 24 {
        return Err(Error::Capacity { qubits: n, limit: 24 });
    }
    if initial >= 1usize << n {
        return Err(domain(format!("initial basis state {initial} out of range")));
    }
    let mut v = vec![ZERO; 1usize << n];
    v[initial] = ONE;
    for g in circuit.gates() {
        apply_to_vector(&mut v, n, &g.qubits, &g.matrix(params));
    }
    Ok(v)
}

/// Reduced density matrix on the `keep` qubits (ascending order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    if keep.is_empty() {
        return Err(domain("partial trace needs at least one kept qubit"));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() || kept.iter().any(|&q| q >= n) {
        return Err(domain(format!("invalid keep set {keep:?} for {n} qubits")));
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let nk = kept.len();
    let dk = 1usize << nk;
    let dt = 1usize << traced.len();
    let embed = |sub: usize, qubits: &[usize]| -> usize {
        let m = qubits.len();
        let mut full = 0usize;
        for (j, &q) in qubits.iter().enumerate() {
            if sub & (1usize << (m - 1 - j)) != 0 {
                full |= 1usize << (n - 1 - q);
            }
        }
        full
    };
    let kept_idx: Vec<usize> = (0..dk).map(|s| embed(s, &kept)).collect();
    let traced_idx: Vec<usize> = (0..dt).map(|s| embed(s, &traced)).collect();
    let src = rho.matrix();
    let out = CMatrix::from_fn(dk, dk, |r, col| {
        let mut acc = ZERO;
        for &t in &traced_idx {
            acc += src[(kept_idx[r] | t, kept_idx[col] | t)];
        }
        acc
    });
    Ok(DensityMatrix {
        n_qubits: nk,
        data: out,
    })
}

/// Purity `Tr(rho^2)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}
