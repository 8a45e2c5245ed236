//! Recovering local operators from transformed Paulis, and the final
//! verification gate.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::state::{
    apply_slocc, build_graph_state, slocc_inverse, LocalMatrix, SloccOperator, StateVector,
    HARD_DENSE_LIMIT,
};

const ONE: C64 = C64::new(1.0, 0.0);

/// Rescales `m` so that its traceless part squares to the identity.
fn normalize_involution(m: &LocalMatrix, site: usize, what: &str) -> Result<LocalMatrix> {
    if !m.is_finite() {
        return Err(Error::Reconstruction {
            site,
            reason: format!("{what} has non-finite entries"),
        });
    }
    let half_tr = m.trace() * 0.5;
    let t = *m - LocalMatrix::IDENTITY.scale(half_tr);
    // For traceless t, t² = −det(t)·I.
    let lam2 = -t.det();
    let scale = m.max_abs();
    if scale == 0.0 || lam2.norm() <= 1e-20 * scale * scale {
        return Err(Error::Reconstruction {
            site,
            reason: format!("{what} is defective or has degenerate eigenvalues"),
        });
    }
    Ok(t.scale(lam2.sqrt().inv()))
}

/// `S_k = [v₊ | X̃ v₊]` with `v₊` the +1 eigenvector of the normalized `Z̃`.
pub fn reconstruct_local(ztilde: &LocalMatrix, xtilde: &LocalMatrix) -> Result<LocalMatrix> {
    reconstruct_local_at(ztilde, xtilde, 0)
}

pub(crate) fn reconstruct_local_at(
    ztilde: &LocalMatrix,
    xtilde: &LocalMatrix,
    site: usize,
) -> Result<LocalMatrix> {
    let z = normalize_involution(ztilde, site, "Z̃")?;
    let x = normalize_involution(xtilde, site, "X̃")?;
    // Columns of (I + Z) span the +1 eigenspace.
    let p = LocalMatrix::IDENTITY + z;
    let c0 = [p.0[0][0], p.0[1][0]];
    let c1 = [p.0[0][1], p.0[1][1]];
    let n0 = c0[0].norm_sqr() + c0[1].norm_sqr();
    let n1 = c1[0].norm_sqr() + c1[1].norm_sqr();
    let v = if n0 >= n1 { c0 } else { c1 };
    let nv = n0.max(n1).sqrt();
    let v = [v[0] / nv, v[1] / nv];
    let w = x.apply(v);
    let s = LocalMatrix::new(v[0], w[0], v[1], w[1]);
    if !s.is_invertible() {
        return Err(Error::Reconstruction {
            site,
            reason: "X̃ does not map the +1 eigenvector of Z̃ out of its eigenspace".into(),
        });
    }
    Ok(s)
}

/// Relative distance of `S⁻¹ψ` from the ray through `g`:
/// `min_c ‖S⁻¹ψ − c·g‖ / ‖S⁻¹ψ‖`, together with the minimizing `c`.
pub(crate) fn ray_residual(psi: &StateVector, gstate: &StateVector, s: &SloccOperator) -> Result<(f64, C64)> {
    let (inv, _) = slocc_inverse(s)?;
    let phi = apply_slocc(&inv, psi)?;
    let nphi = phi.norm();
    if nphi == 0.0 {
        return Err(Error::InvalidInput("zero state vector".into()));
    }
    let c = gstate.inner(&phi)? / gstate.norm_sqr();
    let r = phi.distance(&gstate.scaled(c))? / nphi;
    Ok((r, c))
}

/// Checks `ψ ∝ S|g⟩`; returns `(residual ≤ tol, residual)`.
pub fn verify_candidate(psi: &StateVector, g: &Graph, s: &SloccOperator, tol: f64) -> Result<(bool, f64)> {
    Error::check_dim(g.n(), psi.n())?;
    Error::check_dim(g.n(), s.n())?;
    let gstate = build_graph_state(g, HARD_DENSE_LIMIT)?;
    let (r, _) = ray_residual(psi, &gstate, s)?;
    Ok((r <= tol, r))
}

/// Rescales the first local so that `S|g⟩ = ψ` holds exactly (not just up
/// to a scalar).
pub(crate) fn fix_scale(s: &SloccOperator, c: C64) -> Result<SloccOperator> {
    let mut locals = s.locals().to_vec();
    locals[0] = locals[0].scale(if c == C64::new(0.0, 0.0) { ONE } else { c });
    SloccOperator::new(locals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Letter;
    use crate::solver::system::SiteBlock;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn conj_residual(s: &LocalMatrix, z: &LocalMatrix, x: &LocalMatrix) -> f64 {
        let inv = s.inverse().unwrap();
        let zz = *s * LocalMatrix::from_letter(Letter::Z) * inv;
        let xx = *s * LocalMatrix::from_letter(Letter::X) * inv;
        zz.max_abs_diff(z).max(xx.max_abs_diff(x))
    }

    #[test]
    fn paulis_give_identity() {
        let p = SiteBlock::pauli();
        let s = reconstruct_local(&p.z, &p.x).unwrap();
        assert!(s.max_abs_diff(&LocalMatrix::IDENTITY) < 1e-15);
    }

    #[test]
    fn swapped_paulis_give_hadamard_like() {
        let p = SiteBlock::pauli();
        let s = reconstruct_local(&p.x, &p.z).unwrap();
        assert!(conj_residual(&s, &p.x, &p.z) < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = LocalMatrix::new(C64::new(h, 0.0), C64::new(h, 0.0), C64::new(h, 0.0), C64::new(-h, 0.0));
        assert!(s.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn random_conjugations_are_recovered_up_to_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let t = LocalMatrix::random(&mut rng, 50.0);
            let b = SiteBlock::conjugated(&t).unwrap();
            let s = reconstruct_local(&b.z, &b.x).unwrap();
            assert!(conj_residual(&s, &b.z, &b.x) < 1e-10);
            // s = λ·t for a scalar λ
            let lam = s.0[0][0] / t.0[0][0];
            assert!(s.max_abs_diff(&t.scale(lam)) < 1e-10 * s.max_abs());
        }
    }

    #[test]
    fn defective_input_is_reported() {
        let nil = LocalMatrix::new(C64::new(0.0, 0.0), ONE, C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        let x = LocalMatrix::from_letter(Letter::X);
        assert!(matches!(
            reconstruct_local_at(&nil, &x, 4),
            Err(Error::Reconstruction { site: 4, .. })
        ));
    }
}
