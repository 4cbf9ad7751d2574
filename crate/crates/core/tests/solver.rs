mod common;

use num_complex::Complex64;
use shadow_cqe::line_search::{energy_gradient, TrotterCircuit};
use shadow_cqe::oracle::{fci_solve, hf_determinant, uniform_sector_state};
use shadow_cqe::shadows::{build_shadow_generator, measure_shadow_residual, sample_frame, Measurement};
use shadow_cqe::solver::*;
use shadow_cqe::statevector::CompiledPauliSum;
use shadow_cqe::{CqeError, PauliSum, Statevector};

fn strip_time(t: &CqeTrace) -> Vec<IterationRecord> {
    t.records
        .iter()
        .cloned()
        .map(|mut r| {
            r.wall_time = Default::default();
            r
        })
        .collect()
}

fn check_trace(t: &CqeTrace, e_fci: f64) {
    for w in t.records.windows(2) {
        assert!(w[1].energy <= w[0].energy + 1e-12);
        assert!(w[1].cum_pauli_exp >= w[0].cum_pauli_exp);
        assert!(w[1].cum_circuits >= w[0].cum_circuits);
    }
    for r in &t.records {
        assert!(r.energy >= e_fci - 1e-10);
    }
    assert!((t.final_state.norm() - 1.0).abs() <= 1e-10);
}

#[test]
fn ground_state_is_a_fixed_point() {
    let (ints, h) = common::h3("0.7");
    let fci = fci_solve(&h, Some(common::sector(&ints))).unwrap();
    let t = run_cqe(&CqeConfig::default(), &h, &fci.ground).unwrap();
    assert_eq!(t.termination, TerminationReason::Converged);
    assert_eq!(t.iterations(), 0);
    assert!((t.final_energy() - fci.energy).abs() < 1e-12);
}

#[test]
fn runs_are_deterministic() {
    let (ints, h) = common::h3("1.0");
    let psi = uniform_sector_state(common::sector(&ints), 6).unwrap();
    let cfg = CqeConfig {
        m_shadows: 4,
        max_iters: 8,
        seed: 31,
        ..CqeConfig::default()
    };
    let a = run_cqe(&cfg, &h, &psi).unwrap();
    let b = run_cqe(&cfg, &h, &psi).unwrap();
    assert_eq!(strip_time(&a), strip_time(&b));
    assert_eq!(a.final_state, b.final_state);
    let shots = CqeConfig {
        estimation: Estimation::Shots(500),
        delta: 0.1,
        ..cfg.clone()
    };
    let a = run_cqe(&shots, &h, &psi).unwrap();
    let b = run_cqe(&shots, &h, &psi).unwrap();
    assert_eq!(strip_time(&a), strip_time(&b));
}

#[test]
fn shadow_runs_are_monotone_and_variational() {
    for (name, m) in [("h2_R_0.7414.fcidump", 3), ("h3_R_0.7.fcidump", 5), ("h3_R_2.5.fcidump", 10)] {
        let (ints, h) = common::load(name);
        let s = common::sector(&ints);
        let e_fci = fci_solve(&h, Some(s)).unwrap().energy;
        for psi in [uniform_sector_state(s, h.n_qubits()).unwrap(), hf_determinant(s, h.n_qubits()).unwrap()] {
            let cfg = CqeConfig {
                m_shadows: m,
                max_iters: 15,
                ..CqeConfig::default()
            };
            let t = run_cqe(&cfg, &h, &psi).unwrap();
            check_trace(&t, e_fci);
            let last = t.records.last().unwrap();
            assert_eq!(last.cum_circuits, 2 * m * t.records.len());
        }
    }
}

#[test]
fn full_tomography_reaches_exact_energy_and_conserves_symmetries() {
    for r in ["0.7", "2.0"] {
        let (ints, h) = common::h3(r);
        let s = common::sector(&ints);
        let e_fci = fci_solve(&h, Some(s)).unwrap().energy;
        let psi = uniform_sector_state(s, 6).unwrap();
        let cfg = CqeConfig {
            update_mode: UpdateMode::FullTomography,
            max_iters: 300,
            ..CqeConfig::default()
        };
        let t = run_cqe(&cfg, &h, &psi).unwrap();
        check_trace(&t, e_fci);
        assert_ne!(t.termination, TerminationReason::MaxIterations);
        assert!((t.final_energy() - e_fci).abs() < 1e-5, "R = {r}: {}", t.final_energy() - e_fci);
        for rec in &t.records {
            assert!((rec.number - 3.0).abs() <= 1e-8);
            assert!((rec.sz - 0.5).abs() <= 1e-8);
        }
    }
}

#[test]
fn converged_runs_are_exact() {
    let (ints, h) = common::h2();
    let s = common::sector(&ints);
    let e_fci = fci_solve(&h, Some(s)).unwrap().energy;
    let psi = uniform_sector_state(s, 4).unwrap();
    for mode in [UpdateMode::FullTomography, UpdateMode::Shadow] {
        let cfg = CqeConfig {
            update_mode: mode,
            m_shadows: 5,
            max_iters: 60,
            ..CqeConfig::default()
        };
        let t = run_cqe(&cfg, &h, &psi).unwrap();
        if t.termination == TerminationReason::Converged {
            assert!((t.final_energy() - e_fci).abs() < 1e-5);
        }
    }
}

#[test]
fn gradient_matches_finite_difference() {
    let (ints, h) = common::h3("1.5");
    let psi = uniform_sector_state(common::sector(&ints), 6).unwrap();
    let hc = CompiledPauliSum::new(&h);
    for t in 0..5 {
        let f = sample_frame(6, 40 + t);
        let res = measure_shadow_residual(&psi, &h, &f, 0.01, Measurement::Exact).unwrap();
        let g = build_shadow_generator(&res, 6).unwrap().generator;
        if g.is_empty() {
            continue;
        }
        let circuit = TrotterCircuit::new(&g).unwrap();
        let e = |eta: f64| circuit.apply(&psi, eta).unwrap().expectation_compiled(&hc).unwrap().re;
        let step = 1e-5;
        let fd = (e(step) - e(-step)) / (2.0 * step);
        let an = energy_gradient(&psi, &hc, &g).unwrap();
        // ⟨[H, G]⟩ from the Pauli commutator as a second oracle
        let comm = psi.expectation(&h.commutator(&g).unwrap()).unwrap().re;
        assert!((an - comm).abs() <= 1e-10 * comm.abs().max(1.0));
        if an.abs() > 1e-8 {
            assert!((fd - an).abs() <= 1e-6 * an.abs(), "fd {fd} analytic {an}");
        }
    }
}

#[test]
fn threshold_keeps_terms_above_median() {
    let (ints, h) = common::h3("1.0");
    let psi = uniform_sector_state(common::sector(&ints), 6).unwrap();
    // real states give vanishing shadows in frames without an odd number of Y images
    let g = (0..)
        .map(|t| {
            let f = sample_frame(6, t);
            let res = measure_shadow_residual(&psi, &h, &f, 0.01, Measurement::Exact).unwrap();
            build_shadow_generator(&res, 6).unwrap().generator
        })
        .find(|g| g.len() > 4)
        .unwrap();
    let mut mags: Vec<f64> = g.iter().map(|(_, c)| c.norm()).collect();
    mags.sort_by(f64::total_cmp);
    let median = mags[mags.len() / 2];
    let t = threshold_generator(&g, median);
    assert!(t.len() <= mags.len() / 2 + 1 && t.len() >= mags.len() / 2 - 1);
    assert!(t.iter().all(|(_, c)| c.norm() >= median));
    assert!(g.iter().filter(|(_, c)| c.norm() >= median).count() == t.len());
    assert!(t.is_anti_hermitian(0.0));
}

#[test]
fn invalid_inputs_rejected() {
    let (_, h) = common::h2();
    let psi = Statevector::zero_state(4);
    let cfg = CqeConfig {
        m_shadows: 0,
        ..CqeConfig::default()
    };
    assert!(matches!(run_cqe(&cfg, &h, &psi), Err(CqeError::InvalidConfig(_))));
    let bad = h.add(&PauliSum::identity(4, Complex64::new(0.0, 0.5))).unwrap();
    assert!(matches!(
        run_cqe(&CqeConfig::default(), &bad, &psi),
        Err(CqeError::NotHermitian(_))
    ));
    let unnormalized = Statevector::normalized(4, vec![Complex64::new(1.0, 0.0); 16]).unwrap();
    let amps: Vec<_> = unnormalized.amplitudes().iter().map(|a| a * 2.0).collect();
    assert!(Statevector::from_amplitudes(4, amps).is_err());
}
