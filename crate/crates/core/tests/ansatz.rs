mod common;

use dmv_core::ansatz::{
    build_schmidt, build_ucc_spin_symmetric, compile_pauli_rotation, jordan_wigner, AnsatzSpec, FermionicTerm,
    LadderOp, SchmidtAnsatzSpec, Spin, UCCSDSpec,
};
use dmv_core::circuit::{run_circuit, run_statevector, GateKind, QuantumCircuit};
use dmv_core::linalg::{self, CMatrix};
use dmv_core::pauli::{PauliString, PauliSum};
use dmv_core::{DensityMatrix, NoiseModel};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn random_params<R: Rng>(r: &mut R, count: usize) -> Vec<f64> {
    (0..count).map(|_| (r.random::<f64>() - 0.5) * 4.0 * std::f64::consts::PI).collect()
}

fn schmidt_state(spec: &SchmidtAnsatzSpec, params: &[f64]) -> (Vec<Complex64>, DensityMatrix) {
    let circ = build_schmidt(spec).unwrap();
    let psi = run_statevector(&circ, params, 0).unwrap();
    let rho = run_circuit(&circ, params, &NoiseModel::noiseless(), 0).unwrap();
    (psi, rho.partial_trace(&(0..spec.n).collect::<Vec<_>>()).unwrap())
}

#[test]
fn schmidt_without_link_is_pure() {
    let mut r = common::rng(1);
    for n in 1..=3 {
        let spec = SchmidtAnsatzSpec::new(n, 0, 1, 2);
        let circ = build_schmidt(&spec).unwrap();
        assert_eq!(circ.n_qubits(), n);
        for _ in 0..10 {
            let (_, rho) = schmidt_state(&spec, &random_params(&mut r, spec.n_parameters()));
            assert!((rho.purity() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn single_link_gives_maximally_mixed_qubit() {
    let spec = SchmidtAnsatzSpec::new(1, 1, 1, 1);
    let mut params = vec![0.0; spec.n_parameters()];
    params[0] = std::f64::consts::FRAC_PI_2;
    let (_, rho) = schmidt_state(&spec, &params);
    assert!(linalg::max_abs_diff(rho.matrix(), DensityMatrix::maximally_mixed(1).matrix()) < 1e-12);
    assert!((rho.purity() - 0.5).abs() < 1e-12);
}

#[test]
fn schmidt_purity_and_rank_bounds() {
    let mut r = common::rng(2);
    for (n, l) in [(3, 1), (3, 2), (4, 2), (2, 2)] {
        let spec = SchmidtAnsatzSpec::new(n, l, 2, 2);
        assert_eq!(build_schmidt(&spec).unwrap().n_qubits(), n + l);
        let mut min_purity = f64::INFINITY;
        for _ in 0..50 {
            let (psi, rho) = schmidt_state(&spec, &random_params(&mut r, spec.n_parameters()));
            min_purity = min_purity.min(rho.purity());
            // Upper qubits are the most significant index bits.
            let m = CMatrix::from_fn(1 << n, 1 << l, |i, j| psi[(i << l) | j]);
            let rank = linalg::singular_values(&m).iter().filter(|&&s| s > 1e-10).count();
            assert!(rank <= 1 << l);
        }
        assert!(min_purity >= 0.5f64.powi(l as i32) - 1e-12, "(n, L) = ({n}, {l}): {min_purity}");
    }
}

#[test]
fn schmidt_rejects_wide_link() {
    assert!(build_schmidt(&SchmidtAnsatzSpec::new(2, 3, 1, 1)).is_err());
    assert!(build_schmidt(&SchmidtAnsatzSpec::new(0, 0, 1, 1)).is_err());
}

#[test]
fn schmidt_spec_serde() {
    let spec: SchmidtAnsatzSpec = serde_json::from_str(r#"{"n": 5, "L": 1, "mix_depth": 3}"#).unwrap();
    assert_eq!(spec, SchmidtAnsatzSpec::new(5, 1, 1, 3));
    assert_eq!(spec.n_parameters(), 1 + 45);
}

/// Dense occupation-number oracle. Mode `q` is qubit `q` (most significant
/// bit first); a creation operator picks up a sign for each occupied mode
/// before it.
fn ladder_oracle(op: &LadderOp, n: usize) -> CMatrix {
    let modes = 2 * n;
    let q = op.qubit(n);
    let d = 1usize << modes;
    let bit = 1usize << (modes - 1 - q);
    let mut m = CMatrix::zeros(d, d);
    for x in 0..d {
        let occupied = x & bit != 0;
        if occupied == op.dagger {
            continue;
        }
        let below = (0..q).filter(|&r| x & (1 << (modes - 1 - r)) != 0).count();
        let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
        m[(x ^ bit, x)] = Complex64::new(sign, 0.0);
    }
    m
}

fn term_oracle(t: &FermionicTerm, n: usize) -> CMatrix {
    let d = 1usize << (2 * n);
    t.ops
        .iter()
        .fold(CMatrix::identity(d, d), |acc, op| acc * ladder_oracle(op, n))
        * t.coefficient
}

#[test]
fn jordan_wigner_examples() {
    let one = Complex64::new(1.0, 0.0);
    let up = jordan_wigner(&FermionicTerm::new(one, vec![LadderOp::create(0, Spin::Up)]), 2).unwrap();
    let mut terms: Vec<String> = up.terms().iter().map(|(_, p)| p.to_string()).collect();
    terms.sort();
    assert_eq!(terms, ["XIII", "YIII"]);

    let down = jordan_wigner(&FermionicTerm::new(one, vec![LadderOp::create(0, Spin::Down)]), 2).unwrap();
    let zz = PauliString::parse("ZZII", 4).unwrap().to_dense().unwrap();
    let x = PauliString::parse("IIXI", 4).unwrap().to_dense().unwrap();
    let y = PauliString::parse("IIYI", 4).unwrap().to_dense().unwrap();
    let want = zz * (x - y * Complex64::new(0.0, 1.0)) * Complex64::new(0.5, 0.0);
    assert!(linalg::max_abs_diff(&down.to_dense().unwrap(), &want) < 1e-14);

    let number = FermionicTerm::new(one, vec![LadderOp::create(1, Spin::Up), LadderOp::annihilate(1, Spin::Up)]);
    let got = jordan_wigner(&number, 2).unwrap().to_dense().unwrap();
    let want = PauliSum::from_strs(4, &[(0.5, "IIII"), (-0.5, "IZII")]).unwrap().to_dense().unwrap();
    assert!(linalg::max_abs_diff(&got, &want) < 1e-14);

    let bad = FermionicTerm::new(one, vec![LadderOp::create(2, Spin::Up)]);
    assert!(jordan_wigner(&bad, 2).is_err());
}

#[test]
fn jordan_wigner_matches_occupation_oracle() {
    let mut r = common::rng(3);
    let n = 2;
    for _ in 0..40 {
        let len = r.random_range(1..=4);
        let ops = (0..len)
            .map(|_| LadderOp {
                orbital: r.random_range(0..n),
                spin: if r.random() { Spin::Up } else { Spin::Down },
                dagger: r.random(),
            })
            .collect();
        let t = FermionicTerm::new(common::random_complex(&mut r), ops);
        let got = jordan_wigner(&t, n).unwrap().to_dense().unwrap();
        assert!(linalg::max_abs_diff(&got, &term_oracle(&t, n)) < 1e-12, "{t:?}");
    }
}

#[test]
fn jordan_wigner_anticommutation() {
    let n = 2;
    let one = Complex64::new(1.0, 0.0);
    let modes: Vec<LadderOp> = [Spin::Up, Spin::Down]
        .into_iter()
        .flat_map(|s| (0..n).map(move |o| LadderOp::annihilate(o, s)))
        .collect();
    let dense = |op: LadderOp| jordan_wigner(&FermionicTerm::new(one, vec![op]), n).unwrap().to_dense().unwrap();
    let d = 1 << (2 * n);
    for (i, a) in modes.iter().enumerate() {
        for (j, b) in modes.iter().enumerate() {
            let ai = dense(*a);
            let bj = dense(LadderOp { dagger: true, ..*b });
            let anti = &ai * &bj + &bj * &ai;
            let want = if i == j { CMatrix::identity(d, d) } else { CMatrix::zeros(d, d) };
            assert!(linalg::max_abs_diff(&anti, &want) < 1e-14);
            let bi = dense(*b);
            assert!((&ai * &bi + &bi * &ai).norm() < 1e-14);
        }
    }
}

fn rotation_unitary(p: &PauliString, theta: f64) -> CMatrix {
    let gates = compile_pauli_rotation(p, 0, 1.0).unwrap();
    QuantumCircuit::from_gates(p.n_qubits(), 1, gates).unwrap().unitary(&[theta]).unwrap()
}

fn expm_oracle(p: &PauliString, theta: f64) -> CMatrix {
    (p.to_dense().unwrap() * Complex64::new(0.0, -theta / 2.0)).exp()
}

#[test]
fn pauli_rotation_examples() {
    let z = PauliString::parse("Z", 1).unwrap();
    let gates = compile_pauli_rotation(&z, 0, 1.0).unwrap();
    assert_eq!(gates.len(), 1);
    assert_eq!(gates[0].kind, GateKind::Rz);

    let zzzz = PauliString::parse("ZZZZ", 4).unwrap();
    let gates = compile_pauli_rotation(&zzzz, 0, 1.0).unwrap();
    let kinds: Vec<GateKind> = gates.iter().map(|g| g.kind).collect();
    assert_eq!(kinds, [vec![GateKind::Cnot; 3], vec![GateKind::Rz], vec![GateKind::Cnot; 3]].concat());
    assert!(linalg::max_abs_diff(&rotation_unitary(&zzzz, 0.3), &expm_oracle(&zzzz, 0.3)) < 1e-12);

    let xy = PauliString::parse("XY", 2).unwrap();
    assert!(linalg::max_abs_diff(&rotation_unitary(&xy, 0.7), &expm_oracle(&xy, 0.7)) < 1e-12);

    assert!(compile_pauli_rotation(&PauliString::identity(3), 0, 1.0).is_err());
}

#[test]
fn pauli_rotation_matches_expm() {
    let mut r = common::rng(4);
    let mut done = 0;
    while done < 50 {
        let n = r.random_range(1..=4);
        let p = common::random_pauli(&mut r, n);
        if p.is_identity() {
            continue;
        }
        let theta = (r.random::<f64>() - 0.5) * 10.0;
        let err = linalg::max_abs_diff(&rotation_unitary(&p, theta), &expm_oracle(&p, theta));
        assert!(err < 1e-10, "{p} {theta}: {err}");
        done += 1;
    }
}

fn counts(x: usize, n: usize) -> (u32, u32) {
    let total = 2 * n;
    let up = (0..n).filter(|&q| x & (1 << (total - 1 - q)) != 0).count() as u32;
    let down = (n..total).filter(|&q| x & (1 << (total - 1 - q)) != 0).count() as u32;
    (up, down)
}

#[test]
fn ucc_zero_parameters_is_reference() {
    for (n, k) in [(2, 1), (3, 1), (3, 2)] {
        let spec = UCCSDSpec::full(n, k);
        let a = build_ucc_spin_symmetric(&spec).unwrap();
        let psi = run_statevector(&a.circuit, &vec![0.0; spec.n_parameters()], a.reference).unwrap();
        assert_eq!(counts(a.reference, n), (k as u32, k as u32));
        for (x, z) in psi.iter().enumerate() {
            let want = if x == a.reference { 1.0 } else { 0.0 };
            assert!((z - Complex64::new(want, 0.0)).norm() < 1e-12);
        }
    }
}

#[test]
fn ucc_reference_layout() {
    // |1 0 1 0> on n = 2, k = 1.
    assert_eq!(UCCSDSpec::full(2, 1).reference_index(), 0b1010);
    assert_eq!(UCCSDSpec::full(3, 2).reference_index(), 0b110110);
}

#[test]
fn ucc_single_excitation_keeps_up_count() {
    let mut spec = UCCSDSpec::full(2, 1);
    spec.singles_down.clear();
    spec.doubles_up_down.clear();
    assert_eq!(spec.singles_up, [(1, 0)]);
    let a = build_ucc_spin_symmetric(&spec).unwrap();
    let mut params = vec![0.0; spec.n_parameters()];
    params[0] = std::f64::consts::FRAC_PI_2;
    let psi = run_statevector(&a.circuit, &params, a.reference).unwrap();
    let n_up: f64 = psi.iter().enumerate().map(|(x, z)| z.norm_sqr() * counts(x, 2).0 as f64).sum();
    assert!((n_up - 1.0).abs() < 1e-10);
    // The electron actually moved.
    assert!(psi[a.reference].norm() < 0.9);
}

#[test]
fn ucc_stays_in_particle_sector() {
    let mut r = common::rng(5);
    for (n, k) in [(2, 1), (3, 1), (3, 2)] {
        let spec = UCCSDSpec::full(n, k);
        let a = build_ucc_spin_symmetric(&spec).unwrap();
        for _ in 0..10 {
            let psi = run_statevector(&a.circuit, &random_params(&mut r, spec.n_parameters()), a.reference).unwrap();
            let leak: f64 = psi
                .iter()
                .enumerate()
                .filter(|(x, _)| counts(*x, n) != (k as u32, k as u32))
                .map(|(_, z)| z.norm_sqr())
                .sum();
            assert!(leak.sqrt() < 1e-9);
        }
    }
}

#[test]
fn ucc_commutes_with_number_operators() {
    let mut r = common::rng(6);
    for n in [2, 3] {
        let spec = UCCSDSpec::full(n, 1);
        let a = build_ucc_spin_symmetric(&spec).unwrap();
        let u = a.circuit.unitary(&random_params(&mut r, spec.n_parameters())).unwrap();
        let d = 1 << (2 * n);
        let n_up = CMatrix::from_fn(d, d, |i, j| if i == j { Complex64::new(counts(i, n).0 as f64, 0.0) } else { Complex64::new(0.0, 0.0) });
        let n_down = CMatrix::from_fn(d, d, |i, j| if i == j { Complex64::new(counts(i, n).1 as f64, 0.0) } else { Complex64::new(0.0, 0.0) });
        for num in [n_up, n_down] {
            assert!((&u * &num - &num * &u).norm() < 1e-10);
        }
    }
}

#[test]
fn locked_spins_alias_parameters() {
    let mut r = common::rng(7);
    let free = UCCSDSpec::full(3, 1);
    let locked = UCCSDSpec { lock_spins: true, ..free.clone() };
    let (ns, nud, nss) = (free.singles_up.len(), free.doubles_up_down.len(), free.doubles_up_up.len());
    assert_eq!(free.n_parameters(), 2 * ns + nud + 2 * nss);
    assert_eq!(locked.n_parameters(), ns + nud + nss);
    let theta = random_params(&mut r, locked.n_parameters());
    // Free layout: up singles, up-down, up-up, down singles, down-down.
    let mut expanded = theta.clone();
    expanded.extend_from_slice(&theta[..ns]);
    expanded.extend_from_slice(&theta[ns + nud..]);
    let a = build_ucc_spin_symmetric(&locked).unwrap();
    let b = build_ucc_spin_symmetric(&free).unwrap();
    let ua = a.circuit.unitary(&theta).unwrap();
    let ub = b.circuit.unitary(&expanded).unwrap();
    assert!(linalg::max_abs_diff(&ua, &ub) < 1e-12);

    let mut mismatched = locked.clone();
    mismatched.singles_down.pop();
    assert!(mismatched.validate().is_err());
}

#[test]
fn ucc_spec_validation() {
    assert!(UCCSDSpec::full(2, 3).validate().is_err());
    let mut s = UCCSDSpec::full(2, 1);
    s.singles_up.push((2, 0));
    assert!(s.validate().is_err());
    let mut s = UCCSDSpec::full(3, 1);
    s.doubles_up_up.push([1, 1, 0, 2]);
    assert!(s.validate().is_err());
}

#[test]
fn ansatz_spec_builds_system() {
    let spec: AnsatzSpec = serde_json::from_str(r#"{"kind": "schmidt", "n": 3, "L": 2}"#).unwrap();
    let p = spec.build().unwrap();
    assert_eq!((p.circuit.n_qubits(), p.system.clone(), p.initial), (5, vec![0, 1, 2], 0));
    let spec = AnsatzSpec::Ucc(UCCSDSpec::full(2, 1));
    let p = spec.build().unwrap();
    assert_eq!((p.circuit.n_qubits(), spec.system_size(), p.initial), (4, 2, 0b1010));
    let text = serde_json::to_string(&spec).unwrap();
    assert_eq!(serde_json::from_str::<AnsatzSpec>(&text).unwrap(), spec);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn schmidt_reduced_rank_bounded(seed in any::<u64>(), n in 1usize..4, l in 0usize..3) {
        prop_assume!(l <= n);
        let mut r = common::rng(seed);
        let spec = SchmidtAnsatzSpec::new(n, l, 1, 1);
        let (_, rho) = schmidt_state(&spec, &random_params(&mut r, spec.n_parameters()));
        let rank = linalg::hermitian_eigenvalues(rho.matrix()).iter().filter(|&&v| v > 1e-10).count();
        prop_assert!(rank <= 1 << l);
    }
}
