//! Start points fitted to the state by alternating least squares on
//! `‖(⊗A_k)ψ − g‖`: each site update is an exact 2×2 least-squares solve.

use num_complex::Complex64 as C64;

use crate::state::{LocalMatrix, StateVector};

const ZERO: C64 = C64::new(0.0, 0.0);

fn apply_except(a: &[LocalMatrix], psi: &StateVector, skip: usize) -> StateVector {
    let mut out = psi.clone();
    for (k, m) in a.iter().enumerate() {
        if k != skip {
            out.apply_local_mut(k, m).expect("site in range");
        }
    }
    out
}

fn ray_distance(phi: &StateVector, g: &StateVector) -> f64 {
    let np = phi.norm();
    if np == 0.0 {
        return f64::INFINITY;
    }
    let c = g.inner(phi).expect("same size") / g.norm_sqr();
    phi.distance(&g.scaled(c)).expect("same size") / np
}

/// Runs up to `sweeps` sweeps from `a` (the candidate `S⁻¹` factors) and
/// returns the final ray distance of `(⊗A)ψ` from `g`.
pub(crate) fn fit_inverse(psi: &StateVector, g: &StateVector, a: &mut [LocalMatrix], sweeps: usize) -> f64 {
    let n = psi.n();
    let dim = 1usize << n;
    let mut last = f64::INFINITY;
    for _ in 0..sweeps {
        for k in 0..n {
            let phi = apply_except(a, psi, k);
            let bit = 1usize << (n - 1 - k);
            let (amp, target) = (phi.amplitudes(), g.amplitudes());
            let mut mmh = [[ZERO; 2]; 2];
            let mut gmh = [[ZERO; 2]; 2];
            for idx in (0..dim).filter(|i| i & bit == 0) {
                let m = [amp[idx], amp[idx | bit]];
                let t = [target[idx], target[idx | bit]];
                for r in 0..2 {
                    for c in 0..2 {
                        let mc = m[c].conj();
                        mmh[r][c] += m[r] * mc;
                        gmh[r][c] += t[r] * mc;
                    }
                }
            }
            let gram = LocalMatrix(mmh);
            if let Ok(inv) = gram.inverse() {
                let next = LocalMatrix(gmh) * inv;
                if next.is_invertible() {
                    a[k] = next;
                }
            }
        }
        let r = ray_distance(&apply_except(a, psi, usize::MAX), g);
        if r < 1e-13 || r > 0.999 * last {
            return r;
        }
        last = r;
    }
    last
}
