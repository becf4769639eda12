mod common;

use dmv_core::linalg::{self, CMatrix};
use dmv_core::pauli::{Pauli, PauliString, PauliSum};
use dmv_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn kron_oracle(p: &PauliString) -> CMatrix {
    let mut m = CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for &l in p.letters() {
        let a = l.matrix();
        let single = CMatrix::from_fn(2, 2, |r, c| a[r][c]);
        m = m.kronecker(&single);
    }
    m
}

#[test]
fn parse_examples() {
    assert!(PauliString::parse("II", 2).unwrap().is_identity());
    let p = PauliString::parse("XY", 2).unwrap();
    assert_eq!(p.letter(0), Pauli::X);
    assert_eq!(p.letter(1), Pauli::Y);
    match PauliString::parse("XZQ", 3) {
        Err(Error::Parse { position, .. }) => assert_eq!(position, 2),
        other => panic!("expected parse error, got {other:?}"),
    }
    assert!(matches!(PauliString::parse("XZ", 3), Err(Error::Parse { .. })));
}

#[test]
fn dense_examples() {
    let z = PauliString::parse("Z", 1).unwrap().to_dense().unwrap();
    assert_eq!(z[(0, 0)].re, 1.0);
    assert_eq!(z[(1, 1)].re, -1.0);
    assert_eq!(z[(0, 1)].norm(), 0.0);
    let xx = PauliString::parse("XX", 2).unwrap().to_dense().unwrap();
    for r in 0..4 {
        for c in 0..4 {
            let want = if r + c == 3 { 1.0 } else { 0.0 };
            assert_eq!(xx[(r, c)], Complex64::new(want, 0.0));
        }
    }
    let mut r = common::rng(1);
    for _ in 0..20 {
        let p = common::random_pauli(&mut r, 3);
        let d = p.to_dense().unwrap();
        assert!(linalg::max_abs_diff(&d, &kron_oracle(&p)) < 1e-15);
    }
}

#[test]
fn dense_limit_is_enforced() {
    let p = PauliString::identity(13);
    assert!(matches!(p.to_dense(), Err(Error::Capacity { qubits: 13, limit: 12 })));
}

#[test]
fn pauli_strings_are_hermitian_unitary_and_traceless() {
    let mut r = common::rng(2);
    for _ in 0..30 {
        let p = common::random_pauli(&mut r, 3);
        let d = p.to_dense().unwrap();
        assert!(linalg::max_abs_diff(&d, &d.adjoint()) < 1e-15);
        assert!(linalg::unitarity_error(&d) < 1e-15);
        let tr = d.trace();
        if p.is_identity() {
            assert_eq!(tr.re, 8.0);
        } else {
            assert!(tr.norm() < 1e-15);
        }
    }
}

#[test]
fn trace_orthogonality() {
    for n in 1..=3usize {
        let all: Vec<PauliString> = (0..4usize.pow(n as u32))
            .map(|mut x| {
                let mut letters = Vec::new();
                for _ in 0..n {
                    letters.push(Pauli::ALL[x % 4]);
                    x /= 4;
                }
                PauliString::new(letters).unwrap()
            })
            .collect();
        let dense: Vec<CMatrix> = all.iter().map(|p| p.to_dense().unwrap()).collect();
        for a in 0..all.len() {
            for b in 0..all.len() {
                let t = (dense[a].adjoint() * &dense[b]).trace();
                let want = if a == b { (1usize << n) as f64 } else { 0.0 };
                assert!((t - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn norm_examples() {
    let h = PauliSum::from_strs(2, &[(1.0, "ZZ")]).unwrap();
    let nm = h.norms().unwrap();
    assert_eq!((nm.frobenius_sq_over_dim, nm.l11), (1.0, 1.0));
    assert!((nm.spectral - 1.0).abs() < 1e-12);
    assert!(!nm.spectral_is_bound);

    let h = PauliSum::from_strs(2, &[(0.5, "XX"), (0.5, "ZZ")]).unwrap();
    assert_eq!(h.norms().unwrap().frobenius_sq_over_dim, 0.5);

    let mut r = common::rng(3);
    for _ in 0..10 {
        let h = common::random_hamiltonian(&mut r, 3, 5);
        let nm = h.norms().unwrap();
        let eig = linalg::hermitian_eigenvalues(&h.to_dense().unwrap());
        let max = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((nm.spectral - max).abs() < 1e-10);
    }
}

#[test]
fn spectral_norm_falls_back_to_bound() {
    let h = PauliSum::from_strs(3, &[(0.3, "XXI"), (-0.4, "ZIZ")]).unwrap();
    let nm = h.norms_with_limit(2).unwrap();
    assert!(nm.spectral_is_bound);
    assert!((nm.spectral - 0.7).abs() < 1e-15);
}

#[test]
fn empty_sum_has_no_norms() {
    let h = PauliSum::new(2, Vec::new()).unwrap();
    assert!(matches!(h.norms(), Err(Error::Domain(_))));
}

#[test]
fn duplicates_merge() {
    let h = PauliSum::from_strs(2, &[(0.5, "XZ"), (0.25, "ZZ"), (0.25, "XZ")]).unwrap();
    assert_eq!(h.len(), 2);
    assert_eq!(h.terms()[0].0, 0.75);
}

fn pauli_strategy(n: usize) -> impl Strategy<Value = PauliString> {
    proptest::collection::vec(0usize..4, n)
        .prop_map(|v| PauliString::new(v.into_iter().map(|k| Pauli::ALL[k]).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn merged_dense_equals_term_sum(
        terms in proptest::collection::vec((-2.0f64..2.0, pauli_strategy(3)), 1..8)
    ) {
        let h = PauliSum::new(3, terms.clone()).unwrap();
        let mut oracle = CMatrix::zeros(8, 8);
        for (g, p) in &terms {
            oracle += p.to_dense().unwrap().scale(*g);
        }
        prop_assert!(linalg::max_abs_diff(&h.to_dense().unwrap(), &oracle) < 1e-12);
    }

    #[test]
    fn frobenius_matches_dense_trace(
        terms in proptest::collection::vec((-2.0f64..2.0, pauli_strategy(3)), 1..8)
    ) {
        let h = PauliSum::new(3, terms).unwrap();
        let d = h.to_dense().unwrap();
        let tr = (&d * &d).trace().re / 8.0;
        prop_assert!((h.norms().unwrap().frobenius_sq_over_dim - tr).abs() < 1e-10);
    }

    #[test]
    fn commutation_matches_dense(a in pauli_strategy(3), b in pauli_strategy(3)) {
        let da = a.to_dense().unwrap();
        let db = b.to_dense().unwrap();
        let comm = &da * &db - &db * &da;
        prop_assert_eq!(a.commutes_with(&b), comm.norm() < 1e-12);
    }

    #[test]
    fn product_matches_dense(a in pauli_strategy(3), b in pauli_strategy(3)) {
        let (ph, p) = a.mul(&b).unwrap();
        let want = a.to_dense().unwrap() * b.to_dense().unwrap();
        prop_assert!(linalg::max_abs_diff(&p.to_dense().unwrap().map(|z| z * ph), &want) < 1e-12);
    }
}
