mod common;

use dmv_core::circuit::{self, fault_rate, fault_rate_for, run_circuit, run_statevector};
use dmv_core::linalg::{self, CMatrix};
use dmv_core::pauli::{Pauli, PauliString};
use dmv_core::{DensityMatrix, Gate, GateKind, NoiseModel, QuantumCircuit};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn embed(n: usize, qubits: &[usize], m: &CMatrix) -> CMatrix {
    // Dense embedding by brute force over basis states.
    let d = 1usize << n;
    CMatrix::from_fn(d, d, |r, col| {
        let others_r: usize = (0..n).filter(|q| !qubits.contains(q)).map(|q| (r >> (n - 1 - q)) & 1).fold(0, |a, b| a * 2 + b);
        let others_c: usize = (0..n).filter(|q| !qubits.contains(q)).map(|q| (col >> (n - 1 - q)) & 1).fold(0, |a, b| a * 2 + b);
        if others_r != others_c {
            return c(0.0, 0.0);
        }
        let sub = |x: usize| qubits.iter().fold(0, |a, &q| a * 2 + ((x >> (n - 1 - q)) & 1));
        m[(sub(r), sub(col))]
    })
}

fn gate_dense(g: &Gate, n: usize) -> CMatrix {
    let m = g.matrix(&[]);
    let k = g.qubits.len();
    let dk = 1usize << k;
    embed(n, &g.qubits, &CMatrix::from_fn(dk, dk, |r, col| m[r * dk + col]))
}

/// Explicit channel: `(1-p) rho + p/(4^k-1) sum_{P != I} P rho P` on the support.
fn depolarize_oracle(rho: &CMatrix, n: usize, qubits: &[usize], p: f64) -> CMatrix {
    let k = qubits.len();
    let mut acc = rho.scale(1.0 - p);
    let count = 4usize.pow(k as u32) - 1;
    for x in 1..=count {
        let mut letters = vec![Pauli::I; n];
        let mut y = x;
        for &q in qubits {
            letters[q] = Pauli::ALL[y % 4];
            y /= 4;
        }
        let pm = PauliString::new(letters).unwrap().to_dense().unwrap();
        acc += (&pm * rho * &pm).scale(p / count as f64);
    }
    acc
}

#[test]
fn gate_matrices() {
    let t = 0.37f64;
    let (ch, sh) = ((t / 2.0).cos(), (t / 2.0).sin());
    let cases: Vec<(GateKind, [Complex64; 4])> = vec![
        (GateKind::Rx, [c(ch, 0.0), c(0.0, -sh), c(0.0, -sh), c(ch, 0.0)]),
        (GateKind::Ry, [c(ch, 0.0), c(-sh, 0.0), c(sh, 0.0), c(ch, 0.0)]),
        (GateKind::OrthoRy, [c(ch, 0.0), c(-sh, 0.0), c(sh, 0.0), c(ch, 0.0)]),
        (GateKind::Rz, [c(ch, -sh), c(0.0, 0.0), c(0.0, 0.0), c(ch, sh)]),
        (GateKind::U1, [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(t.cos(), t.sin())]),
    ];
    for (kind, want) in cases {
        let m = Gate::rotation(kind, 0, t).matrix(&[]);
        for i in 0..4 {
            assert!((m[i] - want[i]).norm() < 1e-15, "{kind:?}");
        }
    }
    // Parameterized angle = angle + scale * param.
    let g = Gate::parameterized(GateKind::Rz, 0, 1, -2.0);
    assert_eq!(g.bound_angle(&[0.0, 0.25]), -0.5);
    let cx = gate_dense(&Gate::cnot(0, 1), 2);
    for (from, to) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        assert_eq!(cx[(to, from)], c(1.0, 0.0));
    }
    let cx_rev = gate_dense(&Gate::cnot(1, 0), 2);
    for (from, to) in [(0, 0), (1, 3), (2, 2), (3, 1)] {
        assert_eq!(cx_rev[(to, from)], c(1.0, 0.0));
    }
}

#[test]
fn run_examples() {
    let empty = QuantumCircuit::new(2, 0);
    let rho = run_circuit(&empty, &[], &NoiseModel::depolarizing(0.3).unwrap(), 0).unwrap();
    assert!(linalg::max_abs_diff(rho.matrix(), DensityMatrix::basis(2, 0).matrix()) < 1e-15);

    let x = QuantumCircuit::from_gates(1, 0, vec![Gate::fixed(GateKind::X, &[0])]).unwrap();
    let rho = run_circuit(&x, &[], &NoiseModel::noiseless(), 0).unwrap();
    assert!(linalg::max_abs_diff(rho.matrix(), DensityMatrix::basis(1, 1).matrix()) < 1e-15);
}

#[test]
fn bell_circuit_matches_channel_oracle() {
    let p = 0.1;
    let gates = vec![Gate::fixed(GateKind::H, &[0]), Gate::cnot(0, 1)];
    let circ = QuantumCircuit::from_gates(2, 0, gates.clone()).unwrap();
    let got = run_circuit(&circ, &[], &NoiseModel::depolarizing(p).unwrap(), 0).unwrap();
    let mut rho = DensityMatrix::basis(2, 0).into_matrix();
    for g in &gates {
        let u = gate_dense(g, 2);
        rho = &u * rho * u.adjoint();
        rho = depolarize_oracle(&rho, 2, &g.qubits, p);
    }
    assert!(linalg::max_abs_diff(got.matrix(), &rho) < 1e-12);
}

fn random_circuit<R: Rng>(r: &mut R, n: usize, len: usize) -> QuantumCircuit {
    let mut gates = Vec::new();
    for _ in 0..len {
        let q = r.random_range(0..n);
        let g = match r.random_range(0..8) {
            0 => Gate::rotation(GateKind::Rx, q, r.random::<f64>() * 6.0),
            1 => Gate::rotation(GateKind::Ry, q, r.random::<f64>() * 6.0),
            2 => Gate::rotation(GateKind::Rz, q, r.random::<f64>() * 6.0),
            3 => Gate::fixed(GateKind::H, &[q]),
            4 => Gate::rotation(GateKind::U1, q, r.random::<f64>() * 6.0),
            5 if n > 1 => Gate::fixed(GateKind::Swap, &[q, (q + 1) % n]),
            _ if n > 1 => {
                let t = (q + r.random_range(1..n)) % n;
                Gate::cnot(q, t)
            }
            _ => Gate::fixed(GateKind::Y, &[q]),
        };
        gates.push(g);
    }
    QuantumCircuit::from_gates(n, 0, gates).unwrap()
}

#[test]
fn channel_oracle_on_random_circuits() {
    let mut r = common::rng(21);
    for _ in 0..20 {
        let n = r.random_range(1..=3);
        let circ = random_circuit(&mut r, n, 8);
        let p = r.random::<f64>() * 0.3;
        let got = run_circuit(&circ, &[], &NoiseModel::depolarizing(p).unwrap(), 0).unwrap();
        let mut rho = DensityMatrix::basis(n, 0).into_matrix();
        for g in circ.gates() {
            let u = gate_dense(g, n);
            rho = &u * rho * u.adjoint();
            rho = depolarize_oracle(&rho, n, &g.qubits, p);
        }
        assert!(linalg::max_abs_diff(got.matrix(), &rho) < 1e-12);
    }
}

#[test]
fn channel_preserves_state_properties() {
    let mut r = common::rng(22);
    for _ in 0..100 {
        let n = r.random_range(1..=4);
        let circ = random_circuit(&mut r, n, 12);
        let p = r.random::<f64>();
        let init = r.random_range(0..(1usize << n));
        let rho = run_circuit(&circ, &[], &NoiseModel::depolarizing(p).unwrap(), init).unwrap();
        rho.validate().unwrap();
        let m = rho.matrix();
        assert!((m.trace() - c(1.0, 0.0)).norm() < 1e-10);
        assert!(linalg::max_abs_diff(m, &m.adjoint()) < 1e-10);
        assert!(linalg::hermitian_eigenvalues(m).iter().all(|&v| v > -1e-9));
    }
}

#[test]
fn noiseless_matches_statevector() {
    let mut r = common::rng(23);
    for _ in 0..30 {
        let n = r.random_range(1..=4);
        let circ = random_circuit(&mut r, n, 15);
        let init = r.random_range(0..(1usize << n));
        let rho = run_circuit(&circ, &[], &NoiseModel::noiseless(), init).unwrap();
        let psi = run_statevector(&circ, &[], init).unwrap();
        let pure = DensityMatrix::from_pure(&psi).unwrap();
        assert!(linalg::max_abs_diff(rho.matrix(), pure.matrix()) < 1e-10);
        // Independent path through the circuit unitary.
        let u = circ.unitary(&[]).unwrap();
        for (k, amp) in psi.iter().enumerate() {
            assert!((u[(k, init)] - amp).norm() < 1e-10);
        }
    }
}

#[test]
fn depolarizing_never_raises_purity() {
    let mut r = common::rng(24);
    for _ in 0..50 {
        let n = r.random_range(1..=3);
        let prep = random_circuit(&mut r, n, 10);
        let p = r.random::<f64>();
        let before = run_circuit(&prep, &[], &NoiseModel::depolarizing(p * 0.2).unwrap(), 0).unwrap();
        // Append an identity gate so only the channel acts.
        let mut gates = prep.gates().to_vec();
        let q = r.random_range(0..n);
        gates.push(Gate::rotation(GateKind::Rz, q, 0.0));
        let circ = QuantumCircuit::from_gates(n, 0, gates).unwrap();
        let noise = NoiseModel::depolarizing(p * 0.2).unwrap();
        let after = run_circuit(&circ, &[], &noise, 0).unwrap();
        assert!(after.purity() <= before.purity() + 1e-12);
    }
}

#[test]
fn fault_free_purity_bound() {
    let mut r = common::rng(25);
    for _ in 0..30 {
        let n = r.random_range(1..=3);
        let len = r.random_range(1..20);
        let circ = random_circuit(&mut r, n, len);
        let p = r.random::<f64>() * 0.05;
        let rho = run_circuit(&circ, &[], &NoiseModel::depolarizing(p).unwrap(), 0).unwrap();
        let bound = (1.0 - p).powi(2 * circ.gate_count() as i32);
        assert!(rho.purity() >= bound - 1e-9);
    }
}

#[test]
fn fault_rate_examples() {
    assert_eq!(fault_rate_for(115, 1e-3), 0.115);
    assert!((fault_rate_for(5528, 0.5e-3) - 2.764).abs() < 1e-12);
    assert_eq!(fault_rate_for(0, 0.5), 0.0);
    let circ = QuantumCircuit::from_gates(2, 0, vec![Gate::cnot(0, 1); 7]).unwrap();
    assert!((fault_rate(&circ, &NoiseModel::depolarizing(0.01).unwrap()) - 0.07).abs() < 1e-15);
    assert_eq!(fault_rate(&circ, &NoiseModel::noiseless()), 0.0);
}

#[test]
fn invalid_inputs() {
    assert!(NoiseModel::depolarizing(1.5).is_err());
    assert!(NoiseModel::depolarizing(-0.1).is_err());
    let circ = QuantumCircuit::from_gates(1, 1, vec![Gate::parameterized(GateKind::Ry, 0, 0, 1.0)]).unwrap();
    assert!(run_circuit(&circ, &[], &NoiseModel::noiseless(), 0).is_err());
    assert!(QuantumCircuit::from_gates(1, 0, vec![Gate::cnot(0, 1)]).is_err());
    assert!(QuantumCircuit::from_gates(2, 0, vec![Gate::cnot(1, 1)]).is_err());
    assert!(QuantumCircuit::from_gates(1, 0, vec![Gate::parameterized(GateKind::Ry, 0, 0, 1.0)]).is_err());
    let big = QuantumCircuit::new(13, 0);
    assert!(run_circuit(&big, &[], &NoiseModel::noiseless(), 0).is_err());
}

#[test]
fn partial_trace_examples() {
    let prod = DensityMatrix::basis(2, 0b01);
    let r0 = circuit::partial_trace(&prod, &[0]).unwrap();
    assert!(linalg::max_abs_diff(r0.matrix(), DensityMatrix::basis(1, 0).matrix()) < 1e-15);
    let r1 = prod.partial_trace(&[1]).unwrap();
    assert!(linalg::max_abs_diff(r1.matrix(), DensityMatrix::basis(1, 1).matrix()) < 1e-15);

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bell = DensityMatrix::from_pure(&[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]).unwrap();
    let half = bell.partial_trace(&[0]).unwrap();
    assert!(linalg::max_abs_diff(half.matrix(), DensityMatrix::maximally_mixed(1).matrix()) < 1e-15);

    assert!(bell.partial_trace(&[]).is_err());
    assert!(bell.partial_trace(&[2]).is_err());
    assert!(bell.partial_trace(&[0, 0]).is_err());
}

#[test]
fn partial_trace_matches_index_oracle() {
    let mut r = common::rng(26);
    for _ in 0..20 {
        let rho = common::random_density(&mut r, 3, 4);
        let got = rho.partial_trace(&[0, 2]).unwrap();
        let m = rho.matrix();
        let oracle = CMatrix::from_fn(4, 4, |row, col| {
            let (a, cbit) = (row >> 1, row & 1);
            let (a2, c2) = (col >> 1, col & 1);
            let mut acc = c(0.0, 0.0);
            for b in 0..2 {
                acc += m[((a << 2) | (b << 1) | cbit, (a2 << 2) | (b << 1) | c2)];
            }
            acc
        });
        assert!(linalg::max_abs_diff(got.matrix(), &oracle) < 1e-14);
        assert!((got.trace() - c(1.0, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn purity_examples() {
    assert!((DensityMatrix::basis(3, 5).purity() - 1.0).abs() < 1e-15);
    for n in 1..=4 {
        let mm = DensityMatrix::maximally_mixed(n);
        assert!((circuit::purity(&mm) - 0.5f64.powi(n as i32)).abs() < 1e-15);
    }
    let mut r = common::rng(27);
    for _ in 0..20 {
        let rho = common::random_density(&mut r, 2, 3);
        let eig = linalg::hermitian_eigenvalues(rho.matrix());
        let want: f64 = eig.iter().map(|v| v * v).sum();
        assert!((rho.purity() - want).abs() < 1e-12);
        assert!(rho.purity() > 0.0 && rho.purity() <= 1.0 + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn trace_preserved_under_noise(seed in any::<u64>(), p in 0.0f64..=1.0) {
        let mut r = common::rng(seed);
        let circ = random_circuit(&mut r, 3, 10);
        let rho = run_circuit(&circ, &[], &NoiseModel::depolarizing(p).unwrap(), 0).unwrap();
        prop_assert!((rho.trace() - c(1.0, 0.0)).norm() < 1e-10);
        let pt = rho.partial_trace(&[1]).unwrap();
        prop_assert!((pt.trace() - c(1.0, 0.0)).norm() < 1e-10);
    }
}
