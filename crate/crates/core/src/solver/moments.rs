//! Second-order moment tensors of a state restricted to a support.
//!
//! For a support `J = {k_0 < … < k_{m-1}}` the tensor is
//!
//! ```text
//! T_J[u] = ψᵀ (E_{a_0 a'_0} ⊗ … ⊗ E_{a_{m-1} a'_{m-1}} on J, Y elsewhere) ψ
//! ```
//!
//! with the flat index `u = Σ_t (2 a_t + a'_t) 4^{m-1-t}`. Contracting it with
//! per-site 2×2 matrices `M_t` (flattened row-major) yields
//! `ψᵀ (⊗ M_t on J, Y elsewhere) ψ`.

use num_complex::Complex64 as C64;

use crate::bits::SiteSet;
use crate::pauli::Letter;
use crate::state::{LocalMatrix, StateVector};

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Debug)]
pub(crate) struct Moment {
    pub sites: Vec<usize>,
    pub data: Vec<C64>,
}

/// Flattened row-major 2×2 matrix.
pub(crate) type Flat = [C64; 4];

pub(crate) fn flat(m: &LocalMatrix) -> Flat {
    [m.0[0][0], m.0[0][1], m.0[1][0], m.0[1][1]]
}

pub(crate) fn moment_tensor(psi: &StateVector, support: SiteSet) -> Moment {
    let n = psi.n();
    let sites = support.to_vec();
    let m = sites.len();
    let y = LocalMatrix::from_letter(Letter::Y);
    let mut phi = psi.clone();
    for k in (0..n).filter(|&k| !support.contains(k)) {
        phi.apply_local_mut(k, &y).expect("site in range");
    }
    let rest: Vec<usize> = (0..n).filter(|&k| !support.contains(k)).collect();
    // Basis-index offsets contributed by the supported and the remaining bits.
    let spread = |pattern: usize, pos: &[usize]| -> usize {
        let w = pos.len();
        pos.iter()
            .enumerate()
            .filter(|(t, _)| (pattern >> (w - 1 - t)) & 1 == 1)
            .map(|(_, &k)| 1usize << (n - 1 - k))
            .sum()
    };
    let va: Vec<usize> = (0..1usize << m).map(|a| spread(a, &sites)).collect();
    let vc: Vec<usize> = (0..1usize << rest.len()).map(|c| spread(c, &rest)).collect();
    let row: Vec<usize> = (0..1usize << m)
        .map(|a| (0..m).map(|t| ((a >> (m - 1 - t)) & 1) << (2 * (m - 1 - t) + 1)).sum())
        .collect();
    let col: Vec<usize> = (0..1usize << m)
        .map(|a| (0..m).map(|t| ((a >> (m - 1 - t)) & 1) << (2 * (m - 1 - t))).sum())
        .collect();
    let amp = psi.amplitudes();
    let ph = phi.amplitudes();
    let mut data = vec![ZERO; 1 << (2 * m)];
    for &oc in &vc {
        for (a, &oa) in va.iter().enumerate() {
            let left = amp[oa | oc];
            if left == ZERO {
                continue;
            }
            for (a2, &oa2) in va.iter().enumerate() {
                data[row[a] | col[a2]] += left * ph[oa2 | oc];
            }
        }
    }
    Moment { sites, data }
}

/// `Σ_u T[u] ∏_t v_t[u_t]`.
pub(crate) fn contract(t: &[C64], vs: &[Flat]) -> C64 {
    let mut cur: Vec<C64> = t.to_vec();
    for v in vs.iter().rev() {
        let len = cur.len() / 4;
        for p in 0..len {
            let b = &cur[4 * p..4 * p + 4];
            cur[p] = b[0] * v[0] + b[1] * v[1] + b[2] * v[2] + b[3] * v[3];
        }
        cur.truncate(len);
    }
    cur[0]
}

/// Reusable buffers for [`contract_with_envs`].
#[derive(Default)]
pub(crate) struct Scratch {
    back: Vec<Vec<C64>>,
    front: Vec<C64>,
    next: Vec<C64>,
}

/// Value of the full contraction and, for every site `k`, the environment
/// `env_k[d] = Σ_{u: u_k = d} T[u] ∏_{t≠k} v_t[u_t]`.
pub(crate) fn contract_with_envs(t: &[C64], vs: &[Flat], envs: &mut [Flat], s: &mut Scratch) -> C64 {
    let m = vs.len();
    s.back.resize_with(m + 1, Vec::new);
    s.back[m].clear();
    s.back[m].extend_from_slice(t);
    for k in (0..m).rev() {
        let (lo, hi) = s.back.split_at_mut(k + 1);
        let src = &hi[0];
        let dst = &mut lo[k];
        let v = &vs[k];
        dst.clear();
        dst.extend(
            src.chunks_exact(4)
                .map(|b| b[0] * v[0] + b[1] * v[1] + b[2] * v[2] + b[3] * v[3]),
        );
    }
    // front[p] = ∏_{t<k} v_t[p_t]
    s.front.clear();
    s.front.push(C64::new(1.0, 0.0));
    for k in 0..m {
        let b = &s.back[k + 1];
        let mut env = [ZERO; 4];
        for (p, &f) in s.front.iter().enumerate() {
            if f == ZERO {
                continue;
            }
            let blk = &b[4 * p..4 * p + 4];
            for d in 0..4 {
                env[d] += f * blk[d];
            }
        }
        envs[k] = env;
        if k + 1 < m {
            s.next.clear();
            let v = &vs[k];
            for &f in &s.front {
                s.next.extend(v.iter().map(|&x| f * x));
            }
            std::mem::swap(&mut s.front, &mut s.next);
        }
    }
    s.back[0][0]
}
