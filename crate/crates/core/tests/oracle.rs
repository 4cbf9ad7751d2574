mod common;

use common::*;
use shadow_cqe::clifford::CliffordFrame;
use shadow_cqe::fermion::{number_operator, sz_operator};
use shadow_cqe::oracle::{fci_solve, hf_determinant, SectorSpec};
use shadow_cqe::rng;
use shadow_cqe::shadows::{measure_shadow_residual, sample_frame, Measurement};

// Reference energies from an independent quantum-chemistry package run on the
// same geometries (RHF for H2, ROHF doublet for H3, STO-3G).
const REFERENCE: [(&str, f64, f64); 7] = [
    ("h2_R_0.7414.fcidump", -1.1166843870853405, -1.137270174660903),
    ("h3_R_0.5.fcidump", -1.1570221956075644, -1.170532430848498),
    ("h3_R_0.7.fcidump", -1.476972480667645, -1.4999370143949002),
    ("h3_R_1.0.fcidump", -1.523996200246108, -1.568351864512913),
    ("h3_R_1.5.fcidump", -1.367160015445383, -1.4772716888785276),
    ("h3_R_2.0.fcidump", -1.210100865453251, -1.4187868394667924),
    ("h3_R_2.5.fcidump", -1.106301367690138, -1.4033268290929612),
];

#[test]
fn energies_match_external_reference() {
    for (name, e_hf, e_fci) in REFERENCE {
        let (ints, h) = load(name);
        let s = sector(&ints);
        let fci = fci_solve(&h, Some(s)).unwrap();
        let hf = hf_determinant(s, h.n_qubits()).unwrap();
        let ehf = hf.expectation(&h).unwrap().re;
        assert!((fci.energy - e_fci).abs() < 1e-9, "{name}: {} vs {e_fci}", fci.energy);
        assert!((ehf - e_hf).abs() < 1e-9, "{name}: {ehf} vs {e_hf}");
        assert!(ehf >= fci.energy);
    }
}

#[test]
fn two_dense_solvers_agree() {
    for (name, _, _) in REFERENCE {
        let (ints, h) = load(name);
        let fci = fci_solve(&h, Some(sector(&ints))).unwrap();
        let e2 = fci.cross_check.expect("power iteration converged");
        assert!((fci.energy - e2).abs() < 1e-10, "{name}: {} vs {e2}", fci.energy);
    }
}

#[test]
fn ground_state_is_in_sector() {
    let (ints, h) = h3("0.7");
    let s = sector(&ints);
    let g = fci_solve(&h, Some(s)).unwrap().ground;
    let n = g.expectation(&number_operator(6)).unwrap().re;
    let sz = g.expectation(&sz_operator(6)).unwrap().re;
    assert!((n - 3.0).abs() < 1e-12);
    assert!((sz - 0.5).abs() < 1e-12);
}

#[test]
fn spin_flipped_sectors_are_degenerate() {
    for r in H3_GEOMETRIES {
        let (_, h) = h3(r);
        let a = fci_solve(&h, Some(SectorSpec::new(2, 1))).unwrap().energy;
        let b = fci_solve(&h, Some(SectorSpec::new(1, 2))).unwrap().energy;
        assert!((a - b).abs() < 1e-10, "R = {r}: {a} vs {b}");
    }
}

#[test]
fn spectrum_invariant_under_frame_conjugation() {
    let (_, h) = h2();
    let e = fci_solve(&h, None).unwrap().energy;
    for seed in 0..5 {
        let f = sample_frame(4, seed);
        let hc = f.conjugate_sum(&h).unwrap();
        let ec = fci_solve(&hc, None).unwrap().energy;
        assert!((e - ec).abs() < 1e-10);
    }
    let id = CliffordFrame::identity(4);
    assert_eq!(id.conjugate_sum(&h).unwrap(), h);
}

#[test]
fn h2_hamiltonian_has_fifteen_terms() {
    let (_, h) = h2();
    assert_eq!(h.len(), 15);
    assert!(h.is_hermitian(0.0));
}

#[test]
fn ground_state_has_vanishing_shadows() {
    for (ints, h) in [h2(), h3("0.7"), h3("2.0")] {
        let g = fci_solve(&h, Some(sector(&ints))).unwrap().ground;
        for t in 0..10 {
            let f = sample_frame(h.n_qubits(), rng::derive_seed(3, &[t]));
            let s = measure_shadow_residual(&g, &h, &f, 0.01, Measurement::Exact).unwrap();
            assert!(s.s.amax() <= 1e-8, "entry {}", s.s.amax());
        }
    }
}
