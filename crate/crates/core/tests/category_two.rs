mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slocc_core::{apply_slocc, bilinear_form, build_graph_state, scan, Category, Letter, LocalMatrix, SloccOperator};

/// Category II groups of a SLOCC image vanish for any substituted locals,
/// not only for the operator that produced the state.
#[test]
fn two_hundred_images_with_substituted_locals() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let y = LocalMatrix::from_letter(Letter::Y);
    let mut groups_seen = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(3..=6usize);
        let g = random_connected_graph(&mut rng, n);
        let s = SloccOperator::random(n, &mut rng, 20.0);
        let psi = apply_slocc(&s, &build_graph_state(&g, 12).unwrap()).unwrap();
        let subst: Vec<LocalMatrix> = (0..n).map(|_| LocalMatrix::random(&mut rng, 50.0)).collect();
        for grp in scan(&g, n).unwrap().iter().filter(|grp| grp.category == Category::II) {
            groups_seen += 1;
            let on_support: Vec<LocalMatrix> = grp.support.iter().map(|k| subst[k]).collect();
            let scale = psi.norm_sqr() * op_norm_product(&on_support);
            for cond in &grp.conditions {
                let mut labels = cond.labels.iter();
                let factors: Vec<Option<LocalMatrix>> = (0..n)
                    .map(|k| {
                        Some(if grp.support.contains(k) {
                            let t = subst[k];
                            y * t * LocalMatrix::from_letter(*labels.next().unwrap()) * t.inverse().unwrap()
                        } else {
                            y
                        })
                    })
                    .collect();
                let v = bilinear_form(&psi, &factors).unwrap();
                worst = worst.max(v.norm() / scale);
            }
        }
    }
    assert!(groups_seen > 200, "only {groups_seen} category II groups");
    assert!(worst < 1e-9, "worst relative value {worst:e}");
}

/// A generic state is not an image of the graph state, and its Category II
/// values are nonzero.
#[test]
fn generic_state_violates_category_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let g = slocc_core::Graph::path(4).unwrap();
    let psi = random_state(&mut rng, 4);
    let y = LocalMatrix::from_letter(Letter::Y);
    let mut largest: f64 = 0.0;
    for grp in scan(&g, 4).unwrap().iter().filter(|grp| grp.category == Category::II) {
        for cond in &grp.conditions {
            let mut labels = cond.labels.iter();
            let factors: Vec<Option<LocalMatrix>> = (0..4)
                .map(|k| {
                    Some(if grp.support.contains(k) {
                        y * LocalMatrix::from_letter(*labels.next().unwrap())
                    } else {
                        y
                    })
                })
                .collect();
            largest = largest.max(bilinear_form(&psi, &factors).unwrap().norm());
        }
    }
    assert!(largest > 1e-3);
}
