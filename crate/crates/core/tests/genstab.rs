mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slocc_core::genstab::projector_sum;
use slocc_core::{
    apply_slocc, build_graph_state, general_stabilizer_element, projector_stabilizer_element, verify_stabilizes,
    BitString, Graph, Phase, SloccOperator,
};

fn families(n: usize) -> Vec<Graph> {
    let mut out = vec![Graph::path(n).unwrap(), Graph::star(n).unwrap(), Graph::complete(n).unwrap()];
    if n >= 3 {
        out.push(Graph::cycle(n).unwrap());
    }
    out
}

#[test]
fn projector_elements_match_symplectic_elements() {
    for n in 1..=6 {
        for g in families(n) {
            for i in 0..1u64 << n {
                let b = BitString::new(n, i).unwrap();
                let e = projector_stabilizer_element(&g, b, 8).unwrap();
                let sym = g.stabilizer_element(b).unwrap();
                assert_eq!(e.word.letters(), sym.letters());
                assert_eq!(e.phase_ratio, Phase::ONE, "{g} b={b}");
                assert!(e.dense_residual < 1e-10);
            }
        }
    }
}

/// The projector sum agrees with the product of dense generators.
#[test]
fn projector_sum_matches_dense_generators() {
    for g in families(4) {
        for i in 0..16 {
            let b = BitString::new(4, i).unwrap();
            let diff = projector_sum(&g, b, 8).unwrap() - stabilizer_dense(&g, b);
            assert!(diff.iter().all(|z| z.norm() < 1e-12));
        }
    }
}

#[test]
fn conjugated_elements_fix_the_image() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for n in 2..=6 {
        for g in families(n) {
            let s = SloccOperator::random(n, &mut rng, 20.0);
            let psi = apply_slocc(&s, &build_graph_state(&g, 12).unwrap()).unwrap();
            for i in 0..1u64 << n {
                let op = general_stabilizer_element(&g, &s, BitString::new(n, i).unwrap(), 8).unwrap();
                assert!(op.dense_residual < 1e-10);
                assert!(verify_stabilizes(&psi, &op).unwrap() < 1e-9);
            }
        }
    }
}

/// Products follow XOR of the indices, for plain and conjugated elements.
#[test]
fn elements_form_a_group_under_xor() {
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    for n in 1..=4 {
        for g in families(n) {
            let s = SloccOperator::random(n, &mut rng, 20.0);
            let plain: Vec<_> = (0..1u64 << n)
                .map(|i| projector_stabilizer_element(&g, BitString::new(n, i).unwrap(), 8).unwrap().dense())
                .collect();
            let conj: Vec<_> = (0..1u64 << n)
                .map(|i| general_stabilizer_element(&g, &s, BitString::new(n, i).unwrap(), 8).unwrap().dense())
                .collect();
            let scale = conj.iter().map(|m| m.norm()).fold(1.0, f64::max);
            for a in 0..1usize << n {
                for b in 0..1usize << n {
                    let d = &plain[a] * &plain[b] - &plain[a ^ b];
                    assert!(d.iter().all(|z| z.norm() < 1e-12), "{g} {a} {b}");
                    let d = &conj[a] * &conj[b] - &conj[a ^ b];
                    assert!(d.norm() < 1e-10 * scale * scale, "{g} {a} {b}");
                }
            }
        }
    }
}

#[test]
fn sampled_elements_fix_larger_images() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for n in [7, 8] {
        for g in families(n) {
            let s = SloccOperator::random(n, &mut rng, 20.0);
            let psi = apply_slocc(&s, &build_graph_state(&g, 12).unwrap()).unwrap();
            for _ in 0..8 {
                let i = BitString::new(n, rng.random_range(0..1u64 << n)).unwrap();
                let op = general_stabilizer_element(&g, &s, i, 8).unwrap();
                assert!(op.dense_residual < 1e-10);
                assert!(verify_stabilizes(&psi, &op).unwrap() < 1e-9, "{g} {i}");
            }
        }
    }
}
