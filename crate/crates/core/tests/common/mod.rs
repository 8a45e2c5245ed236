#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use slocc_core::{BitString, Graph, Letter, LocalMatrix, StateVector};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize) -> Graph {
    loop {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.random_bool(0.5) {
                    edges.push((a, b));
                }
            }
        }
        let g = Graph::from_edges(n, &edges).unwrap();
        if g.is_connected() {
            return g;
        }
    }
}

pub fn random_state<R: Rng>(rng: &mut R, n: usize) -> StateVector {
    let amp = (0..1usize << n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            c(re, im)
        })
        .collect();
    StateVector::new(n, amp).unwrap().normalized().unwrap()
}

pub fn random_letter<R: Rng>(rng: &mut R) -> Letter {
    Letter::NON_IDENTITY[rng.random_range(0..3)]
}

/// Pauli matrices written out by hand, independent of the crate.
pub fn pauli_dense(l: Letter) -> DMatrix<C64> {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    let e = match l {
        Letter::I => [o, z, z, o],
        Letter::X => [z, o, o, z],
        Letter::Y => [z, -i, i, z],
        Letter::Z => [o, z, z, -o],
    };
    DMatrix::from_row_slice(2, 2, &e)
}

pub fn local_dense(m: &LocalMatrix) -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[m.0[0][0], m.0[0][1], m.0[1][0], m.0[1][1]])
}

/// Kronecker product with factor 0 acting on the most significant bit.
pub fn kron_all(factors: &[DMatrix<C64>]) -> DMatrix<C64> {
    let mut out = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for f in factors {
        out = out.kronecker(f);
    }
    out
}

pub fn word_dense(letters: &[Letter]) -> DMatrix<C64> {
    kron_all(&letters.iter().map(|&l| pauli_dense(l)).collect::<Vec<_>>())
}

/// `X_i Z_{N(i)}` built from dense factors.
pub fn generator_dense(g: &Graph, i: usize) -> DMatrix<C64> {
    let letters: Vec<Letter> = (0..g.n())
        .map(|k| {
            if k == i {
                Letter::X
            } else if g.has_edge(i, k) {
                Letter::Z
            } else {
                Letter::I
            }
        })
        .collect();
    word_dense(&letters)
}

/// `∏_{b_i = 1} K_i` in ascending order.
pub fn stabilizer_dense(g: &Graph, b: BitString) -> DMatrix<C64> {
    let dim = 1usize << g.n();
    let mut out = DMatrix::identity(dim, dim);
    for i in b.iter_ones() {
        out *= generator_dense(g, i);
    }
    out
}

/// Graph state from the CZ definition: amplitude `(−1)^{#edges inside x}`.
pub fn graph_state_dense(g: &Graph) -> Vec<C64> {
    let n = g.n();
    let norm = (1u64 << n) as f64;
    (0..1u64 << n)
        .map(|idx| {
            let bit = |k: usize| (idx >> (n - 1 - k)) & 1 == 1;
            let inside = g.edges().iter().filter(|&&(a, b)| bit(a) && bit(b)).count();
            c(if inside % 2 == 0 { 1.0 } else { -1.0 } / norm.sqrt(), 0.0)
        })
        .collect()
}

/// `ψᵀ M ψ` with dense `M`.
pub fn bilinear_dense(psi: &[C64], m: &DMatrix<C64>) -> C64 {
    let v = nalgebra::DVector::from_column_slice(psi);
    (v.transpose() * m * &v)[(0, 0)]
}

pub fn op_norm_product(ts: &[LocalMatrix]) -> f64 {
    ts.iter()
        .map(|t| {
            let d = local_dense(t);
            let inv = d.clone().try_inverse().unwrap();
            d.norm() * inv.norm()
        })
        .product()
}
