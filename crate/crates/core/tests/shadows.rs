mod common;

use num_complex::Complex64;
use shadow_cqe::clifford::CliffordFrame;
use shadow_cqe::fermion::{jordan_wigner, number_pair_operator, FermionTerm};
use shadow_cqe::line_search::TrotterCircuit;
use shadow_cqe::oracle::{fci_solve, hf_determinant, uniform_sector_state};
use shadow_cqe::rng;
use shadow_cqe::shadows::*;
use shadow_cqe::{PauliSum, Statevector};

/// `⟨[Û†n̂_in̂_jÛ, H]⟩ / i` from the Pauli commutator.
fn exact_entry(psi: &Statevector, h: &PauliSum, f: &CliffordFrame, i: usize, j: usize) -> f64 {
    let n = h.n_qubits();
    let o = f.conjugate_sum(&number_pair_operator(i, j, n).unwrap()).unwrap();
    let comm = o.commutator(h).unwrap();
    (psi.expectation(&comm).unwrap() / Complex64::new(0.0, 1.0)).re
}

#[test]
fn entries_match_commutator_oracle_to_second_order() {
    let (ints, h) = common::h3("0.7");
    let psi = uniform_sector_state(common::sector(&ints), 6).unwrap();
    let mut checked = 0;
    for t in 0..30 {
        let f = sample_frame(6, rng::derive_seed(17, &[t]));
        let coarse = measure_shadow_residual(&psi, &h, &f, 0.02, Measurement::Exact).unwrap();
        let fine = measure_shadow_residual(&psi, &h, &f, 0.01, Measurement::Exact).unwrap();
        for i in 0..6 {
            assert_eq!(fine.s[(i, i)], 0.0);
            for j in i + 1..6 {
                assert_eq!(fine.s[(i, j)], fine.s[(j, i)]);
                let exact = exact_entry(&psi, &h, &f, i, j);
                if exact.abs() <= 1e-6 {
                    continue;
                }
                let ratio = (coarse.s[(i, j)] - exact) / (fine.s[(i, j)] - exact);
                assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
                assert!((fine.s[(i, j)] - exact).abs() < 1e-3 * exact.abs().max(1e-2));
                checked += 1;
            }
        }
    }
    assert!(checked > 20, "checked {checked}");
}

#[test]
fn shot_estimates_agree_with_exact_entries() {
    let (ints, h) = common::h2();
    let psi = uniform_sector_state(common::sector(&ints), 4).unwrap();
    let f = sample_frame(4, 3);
    let delta = 0.05;
    let exact = measure_shadow_residual(&psi, &h, &f, delta, Measurement::Exact).unwrap();
    let shots = 1_000_000;
    let sampled = measure_shadow_residual(
        &psi,
        &h,
        &f,
        delta,
        Measurement::Shots { shots, seed: 8 },
    )
    .unwrap();
    assert_eq!(sampled.shots_used, 2 * shots);
    let lambda = LambdaStates::prepare(&psi, &h, delta).unwrap();
    let occ = |s: &Statevector, i: usize, j: usize| {
        s.expectation(&f.conjugate_sum(&number_pair_operator(i, j, 4).unwrap()).unwrap())
            .unwrap()
            .re
    };
    for i in 0..4 {
        for j in i + 1..4 {
            let (pp, pm) = (occ(&lambda.plus, i, j), occ(&lambda.minus, i, j));
            let se = ((pp * (1.0 - pp) + pm * (1.0 - pm)) / shots as f64).sqrt() / (2.0 * delta);
            let dev = (sampled.s[(i, j)] - exact.s[(i, j)]).abs();
            assert!(dev < 5.0 * se.max(1e-12), "({i},{j}) dev {dev} se {se}");
        }
    }
}

#[test]
fn shot_estimator_is_unbiased() {
    let (ints, h) = common::h2();
    let psi = uniform_sector_state(common::sector(&ints), 4).unwrap();
    let f = sample_frame(4, 5);
    let delta = 0.05;
    let exact = measure_shadow_residual(&psi, &h, &f, delta, Measurement::Exact).unwrap();
    let lambda = LambdaStates::prepare(&psi, &h, delta).unwrap();
    let runs: Vec<_> = (0..200)
        .map(|k| {
            measure_shadow_residual_prepared(
                &lambda,
                &f,
                Measurement::Shots { shots: 1000, seed: k },
            )
            .unwrap()
        })
        .collect();
    for i in 0..4 {
        for j in i + 1..4 {
            let xs: Vec<f64> = runs.iter().map(|r| r.s[(i, j)]).collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
            let se = (var / xs.len() as f64).sqrt();
            assert!((mean - exact.s[(i, j)]).abs() < 5.0 * se.max(1e-12));
        }
    }
}

#[test]
fn generators_are_anti_hermitian_and_unitary() {
    let (ints, h) = common::h3("1.5");
    let psi = hf_determinant(common::sector(&ints), 6).unwrap();
    for t in 0..10 {
        let f = sample_frame(6, t);
        let res = measure_shadow_residual(&psi, &h, &f, 0.01, Measurement::Exact).unwrap();
        let g = build_shadow_generator(&res, 6).unwrap();
        assert!(g.generator.is_anti_hermitian(0.0));
        assert!(g.generator.coefficient(shadow_cqe::PauliKey::IDENTITY) == Complex64::new(0.0, 0.0));
        let out = TrotterCircuit::new(&g.generator).unwrap().apply(&psi, 0.8).unwrap();
        assert!((out.norm() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn generator_is_conjugated_number_pair_sum() {
    let f = sample_frame(4, 99);
    let mut s = nalgebra::DMatrix::zeros(4, 4);
    let mut k = PauliSum::new(4);
    for (i, j, v) in [(0, 1, 0.3), (1, 3, -0.2), (0, 2, 0.05)] {
        s[(i, j)] = v;
        s[(j, i)] = v;
        k = k.add(&number_pair_operator(i, j, 4).unwrap().scale(Complex64::new(2.0 * v, 0.0))).unwrap();
    }
    let res = ShadowResidual {
        frame: f.clone(),
        s,
        measurement: Measurement::Exact,
        shots_used: 0,
    };
    let g = build_shadow_generator(&res, 4).unwrap().generator.to_dense().unwrap();
    let mut u = nalgebra::DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for q in 0..4 {
        let e = f.element(q).unitary;
        let uq = nalgebra::DMatrix::from_row_slice(2, 2, &[e[0][0], e[0][1], e[1][0], e[1][1]]);
        u = uq.kronecker(&u);
    }
    let dense = (u.adjoint() * k.to_dense().unwrap() * &u) * Complex64::new(0.0, 1.0);
    let id_part = dense.trace() / Complex64::new(16.0, 0.0);
    let dense = dense - nalgebra::DMatrix::identity(16, 16) * id_part;
    assert!((dense - g).iter().all(|v| v.norm() <= 1e-12));
}

#[test]
fn full_residual_vanishes_on_ground_state() {
    let (ints, h) = common::h3("0.7");
    let g = fci_solve(&h, Some(common::sector(&ints))).unwrap().ground;
    let tomo = FullTomography::new(6).unwrap();
    let lambda = LambdaStates::prepare(&g, &h, 0.01).unwrap();
    let elems = tomo.residual_elements(&lambda, Measurement::Exact).unwrap();
    assert!(elems.iter().all(|(_, a)| a.norm() <= 1e-8));
    assert!(tomo.generator(&elems).is_empty());
}

#[test]
fn full_residual_matches_commutator_oracle() {
    let (ints, h) = common::h3("1.0");
    let psi = uniform_sector_state(common::sector(&ints), 6).unwrap();
    let tomo = FullTomography::new(6).unwrap();
    let at = |delta: f64| {
        let l = LambdaStates::prepare(&psi, &h, delta).unwrap();
        tomo.residual_elements(&l, Measurement::Exact).unwrap()
    };
    let (coarse, fine) = (at(0.02), at(0.01));
    let mut checked = 0;
    for (((i, j, k, l), a2), (_, a1)) in coarse.iter().zip(&fine) {
        let o = jordan_wigner(&FermionTerm::two_body(*i, *j, *k, *l), 6).unwrap();
        let exact = psi.expectation(&o.commutator(&h).unwrap()).unwrap();
        if exact.norm() <= 1e-6 {
            assert!(a1.norm() <= 1e-6);
            continue;
        }
        let ratio = (a2 - exact).norm() / (a1 - exact).norm();
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
        checked += 1;
    }
    assert!(checked > 10);
    let g = tomo.generator(&fine);
    assert!(g.is_anti_hermitian(0.0));
}

#[test]
fn identity_frame_shadow_is_diagonal_of_full_residual() {
    let (ints, h) = common::h3("1.0");
    let psi = uniform_sector_state(common::sector(&ints), 6).unwrap();
    let lambda = LambdaStates::prepare(&psi, &h, 0.01).unwrap();
    let tomo = FullTomography::new(6).unwrap();
    let elems = tomo.residual_elements(&lambda, Measurement::Exact).unwrap();
    let shadow =
        measure_shadow_residual_prepared(&lambda, &CliffordFrame::identity(6), Measurement::Exact)
            .unwrap();
    for ((i, j, k, l), a) in elems {
        if (i, j) == (k, l) {
            // a†_i a†_j a_j a_i = n̂_i n̂_j
            let entry = (a / Complex64::new(0.0, 1.0)).re;
            assert!((entry - shadow.s[(i, j)]).abs() < 1e-12);
        }
    }
}

#[test]
fn tomography_needs_more_circuits_than_shadows() {
    let tomo = FullTomography::new(6).unwrap();
    for m in [1, 5, 10, 20, 40] {
        assert!(tomo.circuits_per_measurement() > 2 * m);
    }
}

#[test]
fn shot_mode_full_residual_tracks_exact() {
    let (ints, h) = common::h2();
    let psi = uniform_sector_state(common::sector(&ints), 4).unwrap();
    let tomo = FullTomography::new(4).unwrap();
    let lambda = LambdaStates::prepare(&psi, &h, 0.05).unwrap();
    let exact = tomo.residual_elements(&lambda, Measurement::Exact).unwrap();
    let shots = tomo
        .residual_elements(&lambda, Measurement::Shots { shots: 200_000, seed: 1 })
        .unwrap();
    let worst = exact
        .iter()
        .zip(&shots)
        .map(|((_, a), (_, b))| (a - b).norm())
        .fold(0.0, f64::max);
    // each Pauli mean has standard error ≤ 1/√shots; at most 16 strings per element
    let bound = 5.0 * 16.0 * 2.0 / (200_000f64).sqrt() / (2.0 * 0.05) / 4.0;
    assert!(worst < bound, "worst {worst} bound {bound}");
}
