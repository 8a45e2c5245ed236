mod common;

use common::*;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slocc_core::solver::{recheck_verdict, reject_fast, Stage};
use slocc_core::{
    apply_slocc, build_graph_state, solve, verify_candidate, BitString, Graph, LocalMatrix, Outcome, SloccOperator,
    SolveConfig, StateVector, Verdict, Witness,
};

fn image(g: &Graph, s: &SloccOperator) -> StateVector {
    apply_slocc(s, &build_graph_state(g, 12).unwrap()).unwrap()
}

fn w_state() -> StateVector {
    let a = c(1.0 / 3f64.sqrt(), 0.0);
    let z = c(0.0, 0.0);
    StateVector::new(3, vec![z, a, a, z, a, z, z, z]).unwrap()
}

/// Rank of the 2 × 2^{n−1} matricization across `{0} | rest`.
fn schmidt_rank_first_site(psi: &StateVector) -> usize {
    let half = psi.amplitudes().len() / 2;
    let m = nalgebra::DMatrix::from_fn(2, half, |r, col| psi.amplitudes()[r * half + col]);
    m.svd(false, false).singular_values.iter().filter(|s| **s > 1e-12).count()
}

#[test]
fn seeded_round_trips_are_certified() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for i in 0..36 {
        let n = 3 + i % 6;
        let g = random_connected_graph(&mut rng, n);
        let s = SloccOperator::random(n, &mut rng, 20.0);
        let psi = image(&g, &s);
        let v = solve(&psi, &g, &SolveConfig::default()).unwrap();
        assert_eq!(v.outcome, Outcome::Equivalent, "instance {i} on {g}");
        let cert = v.certificate.as_ref().unwrap();
        assert!(cert.verification_residual < 1e-9);
        assert!(cert.max_condition_residual < 1e-8, "{}", cert.max_condition_residual);
        let (ok, _) = recheck_verdict(&psi, &g, &v, 1e-9).unwrap();
        assert!(ok);
        // the certificate maps the graph state onto ψ itself, scale included
        let mapped = image(&g, &cert.operator().unwrap());
        assert!(mapped.distance(&psi).unwrap() < 1e-8 * psi.norm());
    }
}

#[test]
fn solving_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let g = Graph::cycle(6).unwrap();
    let psi = image(&g, &SloccOperator::random(6, &mut rng, 20.0));
    let a = solve(&psi, &g, &SolveConfig::default()).unwrap();
    let b = solve(&psi, &g, &SolveConfig::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn stabilizer_gauge_copies_verify() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for n in 2..=6 {
        let g = random_connected_graph(&mut rng, n);
        let s = SloccOperator::random(n, &mut rng, 20.0);
        let psi = image(&g, &s);
        for _ in 0..4 {
            let b = BitString::new(n, rng.random_range(0..1u64 << n)).unwrap();
            let word = g.stabilizer_element(b).unwrap();
            let mut locals: Vec<LocalMatrix> = s
                .locals()
                .iter()
                .zip(word.letters())
                .map(|(sk, l)| *sk * LocalMatrix::from_letter(l))
                .collect();
            locals[0] = locals[0].scale(word.phase().to_complex());
            let gauge = SloccOperator::new(locals).unwrap();
            let (ok, r) = verify_candidate(&psi, &g, &gauge, 1e-9).unwrap();
            assert!(ok && r < 1e-12, "b={b} r={r:e}");
        }
        let wrong = SloccOperator::random(n, &mut rng, 20.0);
        assert!(!verify_candidate(&psi, &g, &wrong, 1e-9).unwrap().0);
    }
}

#[test]
fn wrong_graph_candidate_is_far_off() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let path = Graph::path(3).unwrap();
    let triangle = Graph::complete(3).unwrap();
    let s = SloccOperator::random(3, &mut rng, 20.0);
    let psi = image(&path, &s);
    let (ok, r) = verify_candidate(&psi, &triangle, &s, 1e-9).unwrap();
    assert!(!ok && r > 0.1);
}

#[test]
fn w_state_is_rejected_with_a_checkable_witness() {
    let g = Graph::path(3).unwrap();
    let v = solve(&w_state(), &g, &SolveConfig::default()).unwrap();
    assert_eq!(v.outcome, Outcome::NotEquivalent);
    // observed: the single-site isotropy check fires before any solving
    assert_eq!(v.stage, Stage::FastRejection);
    let (holds, again) = recheck_verdict(&w_state(), &g, &v, 1e-9).unwrap();
    assert!(holds);
    assert_eq!(again.witness.as_ref().map(Witness::describe), v.witness.as_ref().map(Witness::describe));
}

#[test]
fn product_state_is_rejected_for_connected_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    for n in 2..=6 {
        for g in [Graph::path(n).unwrap(), Graph::star(n).unwrap(), random_connected_graph(&mut rng, n)] {
            let zero = StateVector::basis(BitString::zeros(n)).unwrap();
            // ground truth: a connected graph state is entangled across {0} | rest
            assert_eq!(schmidt_rank_first_site(&zero), 1);
            assert_eq!(schmidt_rank_first_site(&build_graph_state(&g, 12).unwrap()), 2);
            let v = solve(&zero, &g, &SolveConfig::default()).unwrap();
            assert_eq!(v.outcome, Outcome::NotEquivalent, "n={n} graph {g}");
            assert!(recheck_verdict(&zero, &g, &v, 1e-9).unwrap().0);
        }
    }
}

#[test]
fn perturbed_even_image_fails_fast() {
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    let g = Graph::path(4).unwrap();
    let mut hits = 0;
    for _ in 0..20 {
        let psi = image(&g, &SloccOperator::random(4, &mut rng, 20.0)).normalized().unwrap();
        let noise = random_state(&mut rng, 4);
        let amp: Vec<C64> = psi.amplitudes().iter().zip(noise.amplitudes()).map(|(a, b)| a + b * 0.05).collect();
        let bumped = StateVector::new(4, amp).unwrap();
        if reject_fast(&bumped, &g, 1e-10).unwrap().is_some() {
            hits += 1;
        }
    }
    assert_eq!(hits, 20);
}

#[test]
fn graph_state_maps_to_itself_with_unit_determinant() {
    for g in [Graph::path(4).unwrap(), Graph::complete(5).unwrap(), Graph::star(6).unwrap()] {
        let psi = build_graph_state(&g, 12).unwrap();
        let v = solve(&psi, &g, &SolveConfig::default()).unwrap();
        let cert = v.certificate.unwrap();
        assert!((cert.det_s - c(1.0, 0.0)).norm() < 1e-12, "{}", cert.det_s);
    }
}

#[test]
fn verdicts_survive_json() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let g = Graph::path(5).unwrap();
    let psi = image(&g, &SloccOperator::random(5, &mut rng, 20.0));
    for v in [
        solve(&psi, &g, &SolveConfig::default()).unwrap(),
        solve(&w_state(), &Graph::path(3).unwrap(), &SolveConfig::default()).unwrap(),
    ] {
        let text = serde_json::to_string(&v).unwrap();
        let back: Verdict = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
    }
}

#[test]
fn bad_inputs_are_errors() {
    let g = Graph::path(3).unwrap();
    let psi = build_graph_state(&Graph::path(4).unwrap(), 12).unwrap();
    assert!(solve(&psi, &g, &SolveConfig::default()).is_err());
    let zero = StateVector::new(3, vec![c(0.0, 0.0); 8]).unwrap();
    assert!(solve(&zero, &g, &SolveConfig::default()).is_err());
    let cfg = SolveConfig {
        max_support: Some(4),
        ..SolveConfig::default()
    };
    assert!(solve(&build_graph_state(&g, 12).unwrap(), &g, &cfg).is_err());
}
