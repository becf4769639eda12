//! Parameterized circuits: the Schmidt ansatz for noisy DMV preparation and
//! a spin-symmetric unitary coupled-cluster ansatz for molecular problems.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, GateKind, QuantumCircuit};
use crate::error::{domain, Result};
use crate::pauli::{ComplexPauliSum, Pauli, PauliString};

const FRAC_PI_2: f64 = core::f64::consts::FRAC_PI_2;

/// Layer counts for the Schmidt ansatz on `n` upper plus `l` lower qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchmidtAnsatzSpec {
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(default = "one")]
    pub dist_depth: usize,
    #[serde(default = "one")]
    pub mix_depth: usize,
}

fn one() -> usize {
    1
}

impl SchmidtAnsatzSpec {
    pub fn new(n: usize, l: usize, dist_depth: usize, mix_depth: usize) -> Self {
        SchmidtAnsatzSpec {
            n,
            l,
            dist_depth,
            mix_depth,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(domain("Schmidt ansatz needs n >= 1"));
        }
        if self.l > self.n {
            return Err(domain(format!("L = {} exceeds n = {}", self.l, self.n)));
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n + self.l
    }

    /// Parameters of the coefficient block (leading slots).
    pub fn n_dist_parameters(&self) -> usize {
        self.dist_depth * self.l
    }

    pub fn n_parameters(&self) -> usize {
        self.n_dist_parameters() + 3 * self.mix_depth * self.n
    }
}

/// Builds the Schmidt ansatz: a real coefficient block (`ORTHO_RY` layers
/// with a CNOT chain) on upper qubits `0..L`, CNOTs from upper qubit `t` to
/// lower qubit `n + t`, then RZ-RY-RZ layers with a CNOT ladder on the upper
/// register. The prepared state is the reduced state of qubits `0..n`.
pub fn build_schmidt(spec: &SchmidtAnsatzSpec) -> Result<QuantumCircuit> {
    spec.validate()?;
    let n = spec.n;
    let l = spec.l;
    let mut circ = QuantumCircuit::new(n + l, spec.n_parameters());
    let mut slot = 0;
    if l > 0 {
        for _ in 0..spec.dist_depth {
            for q in 0..l {
                circ.push(Gate::parameterized(GateKind::OrthoRy, q, slot, 1.0))?;
                slot += 1;
            }
            for q in 0..l.saturating_sub(1) {
                circ.push(Gate::cnot(q, q + 1))?;
            }
        }
    }
    for t in 0..l {
        circ.push(Gate::cnot(t, n + t))?;
    }
    for _ in 0..spec.mix_depth {
        for q in 0..n {
            for kind in [GateKind::Rz, GateKind::Ry, GateKind::Rz] {
                circ.push(Gate::parameterized(kind, q, slot, 1.0))?;
                slot += 1;
            }
        }
        for q in 0..n - 1 {
            circ.push(Gate::cnot(q, q + 1))?;
        }
    }
    Ok(circ)
}

/// Spin label of a spin orbital.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
}

/// One ladder operator on spin orbital `(orbital, spin)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LadderOp {
    pub orbital: usize,
    pub spin: Spin,
    pub dagger: bool,
}

impl LadderOp {
    pub fn create(orbital: usize, spin: Spin) -> Self {
        LadderOp {
            orbital,
            spin,
            dagger: true,
        }
    }

    pub fn annihilate(orbital: usize, spin: Spin) -> Self {
        LadderOp {
            orbital,
            spin,
            dagger: false,
        }
    }

    /// Qubit index: spin-up orbitals first, then spin-down.
    pub fn qubit(&self, n: usize) -> usize {
        match self.spin {
            Spin::Up => self.orbital,
            Spin::Down => n + self.orbital,
        }
    }

    fn adjoint(self) -> Self {
        LadderOp {
            dagger: !self.dagger,
            ..self
        }
    }
}

/// A product of ladder operators (applied right to left) with a coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FermionicTerm {
    pub coefficient: Complex64,
    pub ops: Vec<LadderOp>,
}

impl FermionicTerm {
    pub fn new(coefficient: Complex64, ops: Vec<LadderOp>) -> Self {
        FermionicTerm { coefficient, ops }
    }

    pub fn adjoint(&self) -> Self {
        FermionicTerm {
            coefficient: self.coefficient.conj(),
            ops: self.ops.iter().rev().map(|o| o.adjoint()).collect(),
        }
    }
}

/// Jordan-Wigner image on `2n` qubits (spin-up register first). Creation on
/// qubit `q` is `(X - iY)/2` preceded by Z on every qubit below `q`, so
/// spin-down strings cross the whole spin-up register.
pub fn jordan_wigner(t: &FermionicTerm, n: usize) -> Result<ComplexPauliSum> {
    let total = 2 * n;
    if n == 0 {
        return Err(domain("Jordan-Wigner needs at least one orbital"));
    }
    let mut acc = ComplexPauliSum::identity(total).scale(t.coefficient);
    for op in &t.ops {
        if op.orbital >= n {
            return Err(domain(format!(
                "orbital {} out of range for n = {n}",
                op.orbital
            )));
        }
        let q = op.qubit(n);
        let string = |last: Pauli| {
            let letters = (0..total)
                .map(|r| {
                    if r < q {
                        Pauli::Z
                    } else if r == q {
                        last
                    } else {
                        Pauli::I
                    }
                })
                .collect();
            PauliString::new(letters)
        };
        let ysign = if op.dagger { -0.5 } else { 0.5 };
        let ladder = ComplexPauliSum::new(
            total,
            vec![
                (Complex64::new(0.5, 0.0), string(Pauli::X)?),
                (Complex64::new(0.0, ysign), string(Pauli::Y)?),
            ],
        )?;
        acc = acc.mul(&ladder)?;
    }
    Ok(acc.pruned(1e-14))
}

/// Gates for `exp(-i scale theta / 2 P)` with `theta = params[param]`: basis
/// changes to Z (H for X, `RX(pi/2)` for Y), a CNOT staircase over the
/// support, one parameterized RZ, and the mirror image.
pub fn compile_pauli_rotation(p: &PauliString, param: usize, scale: f64) -> Result<Vec<Gate>> {
    if p.is_identity() {
        return Err(domain("an identity rotation is only a global phase"));
    }
    let support = p.support();
    let mut pre = Vec::new();
    let mut post = Vec::new();
    for &q in &support {
        match p.letter(q) {
            Pauli::X => {
                pre.push(Gate::fixed(GateKind::H, &[q]));
                post.push(Gate::fixed(GateKind::H, &[q]));
            }
            Pauli::Y => {
                pre.push(Gate::rotation(GateKind::Rx, q, FRAC_PI_2));
                post.push(Gate::rotation(GateKind::Rx, q, -FRAC_PI_2));
            }
            _ => {}
        }
    }
    let ladder: Vec<Gate> = support.windows(2).map(|w| Gate::cnot(w[0], w[1])).collect();
    let last = *support.last().expect("non-identity string has support");
    let mut gates = pre;
    gates.extend(ladder.iter().cloned());
    gates.push(Gate::parameterized(GateKind::Rz, last, param, scale));
    gates.extend(ladder.into_iter().rev());
    gates.extend(post);
    Ok(gates)
}

/// Excitation sets of the spin-symmetric q-UCCSD ansatz. Single excitations
/// `(i, j)` move an electron from orbital `j` to `i`; doubles are
/// `(i, j, k, l)` for `a_i^dag a_j^dag a_k a_l` with spins per block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UCCSDSpec {
    pub n: usize,
    pub k: usize,
    pub singles_up: Vec<(usize, usize)>,
    pub singles_down: Vec<(usize, usize)>,
    /// `a_{i,up}^dag a_{j,down}^dag a_{k,down} a_{l,up}`.
    pub doubles_up_down: Vec<[usize; 4]>,
    pub doubles_up_up: Vec<[usize; 4]>,
    pub doubles_down_down: Vec<[usize; 4]>,
    /// Alias spin-down parameters to their spin-up counterparts.
    #[serde(default)]
    pub lock_spins: bool,
}

impl UCCSDSpec {
    /// Every excitation allowed by the index orderings `i > j` (singles),
    /// `i > l, j > k` (opposite-spin doubles) and `i > j > k > l`
    /// (same-spin doubles), each listed lexicographically.
    pub fn full(n: usize, k: usize) -> Self {
        let mut singles = Vec::new();
        for i in 0..n {
            for j in 0..i {
                singles.push((i, j));
            }
        }
        let mut ud = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for kk in 0..j {
                    for l in 0..i {
                        ud.push([i, j, kk, l]);
                    }
                }
            }
        }
        let mut same = Vec::new();
        for i in 0..n {
            for j in 0..i {
                for kk in 0..j {
                    for l in 0..kk {
                        same.push([i, j, kk, l]);
                    }
                }
            }
        }
        UCCSDSpec {
            n,
            k,
            singles_up: singles.clone(),
            singles_down: singles,
            doubles_up_down: ud,
            doubles_up_up: same.clone(),
            doubles_down_down: same,
            lock_spins: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(domain("UCCSD needs n >= 1"));
        }
        if self.k > self.n {
            return Err(domain(format!("k = {} exceeds n = {}", self.k, self.n)));
        }
        let bad = |i: usize| i >= self.n;
        if self.singles_up.iter().chain(&self.singles_down).any(|&(i, j)| bad(i) || bad(j) || i == j) {
            return Err(domain("single excitation indices out of range or equal"));
        }
        for d in self
            .doubles_up_down
            .iter()
            .chain(&self.doubles_up_up)
            .chain(&self.doubles_down_down)
        {
            if d.iter().any(|&x| bad(x)) {
                return Err(domain(format!("double excitation {d:?} out of range")));
            }
        }
        for d in self.doubles_up_up.iter().chain(&self.doubles_down_down) {
            if d[0] == d[1] || d[2] == d[3] {
                return Err(domain(format!("same-spin double {d:?} repeats an orbital")));
            }
        }
        if self.lock_spins
            && (self.singles_up != self.singles_down || self.doubles_up_up != self.doubles_down_down)
        {
            return Err(domain("spin locking needs matching up and down excitation sets"));
        }
        Ok(())
    }

    /// Parameter count after locking.
    pub fn n_parameters(&self) -> usize {
        let down = if self.lock_spins {
            0
        } else {
            self.singles_down.len() + self.doubles_down_down.len()
        };
        self.singles_up.len() + self.doubles_up_down.len() + self.doubles_up_up.len() + down
    }

    /// Basis index of `|1^k 0^{n-k} 1^k 0^{n-k}>` (qubit 0 most significant).
    pub fn reference_index(&self) -> usize {
        let total = 2 * self.n;
        let mut idx = 0usize;
        for q in (0..self.k).chain(self.n..self.n + self.k) {
            idx |= 1usize << (total - 1 - q);
        }
        idx
    }
}

/// Circuit and reference state of a spin-symmetric q-UCCSD ansatz.
#[derive(Debug, Clone, PartialEq)]
pub struct UccAnsatz {
    pub circuit: QuantumCircuit,
    pub reference: usize,
}

fn single(i: usize, j: usize, spin: Spin) -> FermionicTerm {
    FermionicTerm::new(
        Complex64::new(1.0, 0.0),
        vec![LadderOp::create(i, spin), LadderOp::annihilate(j, spin)],
    )
}

fn double(d: [usize; 4], spins: [Spin; 4]) -> FermionicTerm {
    FermionicTerm::new(
        Complex64::new(1.0, 0.0),
        vec![
            LadderOp::create(d[0], spins[0]),
            LadderOp::create(d[1], spins[1]),
            LadderOp::annihilate(d[2], spins[2]),
            LadderOp::annihilate(d[3], spins[3]),
        ],
    )
}

/// Appends `exp(theta (T - T^dagger))`. Writing `T - T^dagger = -i A` with
/// Hermitian `A = sum_k h_k P_k`, the strings of one excitation commute, so
/// the exponential is the exact product of rotations `exp(-i theta h_k P_k)`.
fn push_excitation(circ: &mut QuantumCircuit, t: &FermionicTerm, n: usize, param: usize) -> Result<()> {
    let g = jordan_wigner(t, n)?.add(&jordan_wigner(&t.adjoint(), n)?.scale(Complex64::new(-1.0, 0.0)))?;
    let a = g.scale(Complex64::new(0.0, 1.0)).to_real(1e-12)?;
    for (h, p) in a.terms() {
        if p.is_identity() || h.abs() < 1e-14 {
            continue;
        }
        circ.extend(compile_pauli_rotation(p, param, 2.0 * h)?)?;
    }
    Ok(())
}

/// Builds `U_up U_down U_updown U_upup U_downdown` acting on the reference
/// state; the first factor is applied last.
pub fn build_ucc_spin_symmetric(spec: &UCCSDSpec) -> Result<UccAnsatz> {
    spec.validate()?;
    let n = spec.n;
    let mut slot = 0usize;
    let mut next = || {
        let s = slot;
        slot += 1;
        s
    };
    let up_single: Vec<usize> = spec.singles_up.iter().map(|_| next()).collect();
    let up_down: Vec<usize> = spec.doubles_up_down.iter().map(|_| next()).collect();
    let up_up: Vec<usize> = spec.doubles_up_up.iter().map(|_| next()).collect();
    let (down_single, down_down) = if spec.lock_spins {
        (up_single.clone(), up_up.clone())
    } else {
        (
            spec.singles_down.iter().map(|_| next()).collect::<Vec<_>>(),
            spec.doubles_down_down.iter().map(|_| next()).collect::<Vec<_>>(),
        )
    };
    let mut circ = QuantumCircuit::new(2 * n, spec.n_parameters());
    // Operator order U_up ... U_downdown means U_downdown acts first.
    for (d, &p) in spec.doubles_down_down.iter().zip(&down_down).rev() {
        push_excitation(&mut circ, &double(*d, [Spin::Down; 4]), n, p)?;
    }
    for (d, &p) in spec.doubles_up_up.iter().zip(&up_up).rev() {
        push_excitation(&mut circ, &double(*d, [Spin::Up; 4]), n, p)?;
    }
    for (d, &p) in spec.doubles_up_down.iter().zip(&up_down).rev() {
        push_excitation(
            &mut circ,
            &double(*d, [Spin::Up, Spin::Down, Spin::Down, Spin::Up]),
            n,
            p,
        )?;
    }
    for (&(i, j), &p) in spec.singles_down.iter().zip(&down_single).rev() {
        push_excitation(&mut circ, &single(i, j, Spin::Down), n, p)?;
    }
    for (&(i, j), &p) in spec.singles_up.iter().zip(&up_single).rev() {
        push_excitation(&mut circ, &single(i, j, Spin::Up), n, p)?;
    }
    Ok(UccAnsatz {
        circuit: circ,
        reference: spec.reference_index(),
    })
}

/// Ansatz choice as stored in experiment configurations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnsatzSpec {
    Schmidt(SchmidtAnsatzSpec),
    Ucc(UCCSDSpec),
}

/// A circuit with its input basis state and the qubits forming the
/// prepared system.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedAnsatz {
    pub circuit: QuantumCircuit,
    pub initial: usize,
    /// Qubits kept when reducing to the DMV system.
    pub system: Vec<usize>,
}

impl AnsatzSpec {
    pub fn build(&self) -> Result<PreparedAnsatz> {
        match self {
            AnsatzSpec::Schmidt(s) => Ok(PreparedAnsatz {
                circuit: build_schmidt(s)?,
                initial: 0,
                system: (0..s.n).collect(),
            }),
            AnsatzSpec::Ucc(u) => {
                let a = build_ucc_spin_symmetric(u)?;
                Ok(PreparedAnsatz {
                    circuit: a.circuit,
                    initial: a.reference,
                    system: (0..u.n).collect(),
                })
            }
        }
    }

    /// Qubits of the reduced system.
    pub fn system_size(&self) -> usize {
        match self {
            AnsatzSpec::Schmidt(s) => s.n,
            AnsatzSpec::Ucc(u) => u.n,
        }
    }
}
