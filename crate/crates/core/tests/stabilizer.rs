use dmv_core::linalg::{self, CMatrix};
use dmv_core::pauli::PauliString;
use dmv_core::stabilizer::{build_stabilizer_hamiltonian, StabilizerCode};
use dmv_core::Error;
use num_complex::Complex64;

const SURFACE10: [&str; 10] = [
    "XZIZZXZIII", "XZIXXXZIII", "XIYIIXZIII", "YYZIIXZIII", "ZIIIIZIIZZ",
    "ZIIIIZIIXX", "ZIIIIIXZII", "ZIIIIIYXII", "XZIIIXZIII", "ZIIIIZIIII",
];
const BAD_ORDER: [usize; 10] = [0, 1, 3, 5, 8, 2, 4, 6, 7, 9];

fn overlap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm()
}

fn schmidt_rank(psi: &[Complex64], n: usize, cut: usize) -> usize {
    let m = CMatrix::from_fn(1 << cut, 1 << (n - cut), |i, j| psi[(i << (n - cut)) | j]);
    linalg::singular_values(&m).iter().filter(|&&s| s > 1e-8).count()
}

#[test]
fn bell_code() {
    let code = StabilizerCode::from_strs(2, &["ZZ", "XX"]).unwrap();
    let sh = build_stabilizer_hamiltonian(&code).unwrap();
    assert!(sh.unique_ground_state);
    let terms: Vec<(f64, String)> = sh.hamiltonian.terms().iter().map(|(c, p)| (*c, p.to_string())).collect();
    assert_eq!(terms, [(-1.0, "ZZ".to_string()), (-1.0, "XX".to_string())]);
    let (vals, _) = linalg::hermitian_eigen(&sh.hamiltonian.to_dense().unwrap());
    assert!((vals[0] + 2.0).abs() < 1e-12);
    assert!(vals[1] > vals[0] + 1.0);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let bell = [Complex64::new(r, 0.0), Complex64::default(), Complex64::default(), Complex64::new(r, 0.0)];
    assert!((overlap(&code.ground_state().unwrap(), &bell) - 1.0).abs() < 1e-12);
}

#[test]
fn incomplete_code_is_degenerate() {
    let code = StabilizerCode::from_strs(4, &["ZZII", "IIZZ"]).unwrap();
    let sh = build_stabilizer_hamiltonian(&code).unwrap();
    assert_eq!(sh.rank, 2);
    assert!(!sh.unique_ground_state);
    let (vals, _) = linalg::hermitian_eigen(&sh.hamiltonian.to_dense().unwrap());
    assert_eq!(vals.iter().filter(|&&v| (v + 2.0).abs() < 1e-9).count(), 4);
}

#[test]
fn dependent_generators_are_flagged() {
    let code = StabilizerCode::from_strs(2, &["ZZ", "XX", "YY"]).unwrap();
    let sh = build_stabilizer_hamiltonian(&code).unwrap();
    assert_eq!(sh.rank, 2);
    assert!(!sh.unique_ground_state);
}

#[test]
fn anticommuting_pair_is_named() {
    let code = StabilizerCode::from_strs(3, &["ZZI", "IZZ", "XII"]).unwrap();
    match build_stabilizer_hamiltonian(&code) {
        Err(Error::Domain(msg)) => {
            assert!(msg.contains("ZZI") && msg.contains("XII"), "{msg}");
        }
        other => panic!("expected a domain error, got {other:?}"),
    }
}

#[test]
fn mismatched_width_rejected() {
    let gens = vec![PauliString::parse("ZZ", 2).unwrap(), PauliString::parse("XXX", 3).unwrap()];
    assert!(StabilizerCode::new(2, gens).is_err());
    assert!(StabilizerCode::new(2, vec![]).is_err());
}

#[test]
fn surface_code_has_unique_ground_state() {
    let code = StabilizerCode::from_strs(10, &SURFACE10).unwrap();
    let sh = build_stabilizer_hamiltonian(&code).unwrap();
    assert_eq!(sh.rank, 10);
    assert!(sh.unique_ground_state);
    let (vals, vecs) = linalg::hermitian_eigen(&sh.hamiltonian.to_dense().unwrap());
    assert!((vals[0] + 10.0).abs() < 1e-9);
    assert!(vals[1] - vals[0] > 1.0);
    let dense: Vec<Complex64> = vecs.column(0).iter().copied().collect();
    let projected = code.ground_state().unwrap();
    assert!((overlap(&dense, &projected) - 1.0).abs() < 1e-9);
}

#[test]
fn surface_code_partitions_have_expected_ranks() {
    let code = StabilizerCode::from_strs(10, &SURFACE10).unwrap();
    let psi = code.ground_state().unwrap();
    assert_eq!(schmidt_rank(&psi, 10, 5), 2);
    let bad = StabilizerCode::new(10, code.generators.iter().map(|g| g.permuted(&BAD_ORDER)).collect()).unwrap();
    assert_eq!(schmidt_rank(&bad.ground_state().unwrap(), 10, 5), 16);
}
