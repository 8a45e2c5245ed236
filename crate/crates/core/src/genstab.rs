//! Separable stabilizers built from signed sums of graph-basis projectors.
//!
//! With `v_j = Z_j|g⟩`, the operator `Σ_j (−1)^{i·j} |v_j⟩⟨v_j|` is a Pauli
//! word stabilizing `|g⟩`; conjugating it by `S` gives a (generally
//! non-Hermitian) separable operator stabilizing `S|g⟩`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::pauli::{Letter, PauliWord, Phase};
use crate::state::{
    apply_slocc, check_dense, slocc_inverse, zbasis_vector, LocalMatrix, SloccOperator, StateVector,
};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Default qubit cap for the dense projector construction.
pub const DEFAULT_GENSTAB_LIMIT: usize = 8;
/// Absolute ceiling for the dense projector construction.
pub const HARD_GENSTAB_LIMIT: usize = 10;

/// `global_phase · ⊗_k factors[k]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparableOperator {
    pub factors: Vec<LocalMatrix>,
    pub global_phase: C64,
    /// The Pauli word whose conjugate this is (equal to the operator itself
    /// for the untransformed construction).
    pub word: PauliWord,
    /// Ratio between the projector-built word and the symplectic stabilizer
    /// element with the same index.
    pub phase_ratio: Phase,
    /// Largest entrywise deviation from the dense reference, relative to its
    /// largest entry.
    pub dense_residual: f64,
}

impl SeparableOperator {
    pub fn n(&self) -> usize {
        self.factors.len()
    }

    /// Applies the operator to `psi`.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        Error::check_dim(self.n(), psi.n())?;
        let mut out = psi.clone();
        for (k, m) in self.factors.iter().enumerate() {
            out.apply_local_mut(k, m)?;
        }
        Ok(out.scaled(self.global_phase))
    }

    /// Dense `2^n × 2^n` matrix.
    pub fn dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(1, 1, self.global_phase);
        for f in &self.factors {
            let local = DMatrix::from_row_slice(2, 2, &[f.0[0][0], f.0[0][1], f.0[1][0], f.0[1][1]]);
            m = m.kronecker(&local);
        }
        m
    }

    /// Largest `‖T_k − T_k†‖` over the factors.
    pub fn max_non_hermiticity(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| f.max_abs_diff(&f.adjoint()))
            .fold(0.0, f64::max)
    }
}

fn check_limit(n: usize, dense_limit: usize) -> Result<()> {
    check_dense(n, dense_limit.min(HARD_GENSTAB_LIMIT))
}

/// `Σ_j (−1)^{i·j} |v_j⟩⟨v_j|`, summed term by term.
pub fn projector_sum(g: &Graph, i: BitString, dense_limit: usize) -> Result<DMatrix<C64>> {
    let n = g.n();
    Error::check_dim(n, i.len())?;
    check_limit(n, dense_limit)?;
    let dim = 1usize << n;
    let mut o = DMatrix::from_element(dim, dim, ZERO);
    for jx in 0..dim as u64 {
        let j = BitString::from_index(n, jx)?;
        let v = zbasis_vector(g, j, dense_limit)?;
        let amp = v.amplitudes();
        let sign = if i.dot(j) { -1.0 } else { 1.0 };
        for c in 0..dim {
            let right = amp[c].conj() * sign;
            if right == ZERO {
                continue;
            }
            for r in 0..dim {
                o[(r, c)] += amp[r] * right;
            }
        }
    }
    Ok(o)
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Factors a dense operator known to be `λ·⊗P_k` with Pauli `P_k`.
fn factor_pauli(o: &DMatrix<C64>, n: usize) -> Result<PauliWord> {
    let (mut r0, mut c0, mut best) = (0, 0, 0.0);
    for c in 0..o.ncols() {
        for r in 0..o.nrows() {
            let v = o[(r, c)].norm();
            if v > best {
                best = v;
                r0 = r;
                c0 = c;
            }
        }
    }
    if best == 0.0 {
        return Err(Error::Factorization("operator is zero".into()));
    }
    let pivot = o[(r0, c0)];
    let mut lambda = pivot;
    let mut x = 0u64;
    let mut z = 0u64;
    for k in 0..n {
        let bit = 1usize << (n - 1 - k);
        let mut a = LocalMatrix::IDENTITY;
        for ra in 0..2 {
            for cb in 0..2 {
                let r = (r0 & !bit) | if ra == 1 { bit } else { 0 };
                let c = (c0 & !bit) | if cb == 1 { bit } else { 0 };
                a.0[ra][cb] = o[(r, c)] / pivot;
            }
        }
        // Pauli-basis coefficients tr(P A)/2.
        let coeffs: Vec<(Letter, C64)> = [Letter::I, Letter::X, Letter::Y, Letter::Z]
            .iter()
            .map(|&l| (l, (LocalMatrix::from_letter(l) * a).trace() * 0.5))
            .collect();
        let (letter, coeff) = coeffs
            .iter()
            .copied()
            .max_by(|p, q| p.1.norm().total_cmp(&q.1.norm()))
            .expect("four coefficients");
        if coeffs
            .iter()
            .any(|&(l, c)| l != letter && c.norm() > 1e-10 * coeff.norm())
        {
            return Err(Error::Factorization(format!("site {k} factor is not a multiple of a Pauli")));
        }
        lambda *= coeff;
        let (bx, bz) = letter.bits();
        x |= (bx as u64) << k;
        z |= (bz as u64) << k;
    }
    let phase = (0..4)
        .map(Phase::from_exponent)
        .find(|p| (p.to_complex() - lambda).norm() < 1e-10)
        .ok_or_else(|| Error::Factorization(format!("global factor {lambda} is not a fourth root of unity")))?;
    PauliWord::from_parts(n, x, z, phase)
}

fn pauli_operator(word: &PauliWord, ratio: Phase, residual: f64) -> SeparableOperator {
    SeparableOperator {
        factors: word.letters().into_iter().map(LocalMatrix::from_letter).collect(),
        global_phase: word.phase().to_complex(),
        word: *word,
        phase_ratio: ratio,
        dense_residual: residual,
    }
}

/// Builds the projector sum for index `i`, factors it into Pauli letters and
/// checks it against the symplectic stabilizer element `σ_i`.
pub fn projector_stabilizer_element(g: &Graph, i: BitString, dense_limit: usize) -> Result<SeparableOperator> {
    let o = projector_sum(g, i, dense_limit)?;
    let word = factor_pauli(&o, g.n())?;
    let symplectic = g.stabilizer_element(i)?;
    if word.x_bits() != symplectic.x_bits() || word.z_bits() != symplectic.z_bits() {
        return Err(Error::Factorization(format!(
            "projector sum factors as {word}, expected letters of {symplectic}"
        )));
    }
    let ratio = word.phase() * symplectic.phase().inverse();
    let op = pauli_operator(&word, ratio, 0.0);
    let residual = max_abs(&(op.dense() - &o)) / max_abs(&o);
    Ok(SeparableOperator {
        dense_residual: residual,
        ..op
    })
}

/// `(⊗S) O (⊗S⁻¹)` for a dense operator `O`.
fn conjugate_dense(s: &SloccOperator, o: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = s.n();
    let dim = o.nrows();
    let (inv, _) = slocc_inverse(s)?;
    let inv_t = SloccOperator::new(inv.locals().iter().map(|m| m.transpose()).collect())?;
    let mut left = DMatrix::from_element(dim, dim, ZERO);
    for c in 0..dim {
        let col = StateVector::new(n, o.column(c).iter().copied().collect())?;
        let out = apply_slocc(s, &col)?;
        left.set_column(c, &nalgebra::DVector::from_column_slice(out.amplitudes()));
    }
    // Rows of (left · S⁻¹) are (S⁻ᵀ · row) read as vectors.
    let mut out = DMatrix::from_element(dim, dim, ZERO);
    for r in 0..dim {
        let row = StateVector::new(n, left.row(r).iter().copied().collect())?;
        let res = apply_slocc(&inv_t, &row)?;
        for (c, v) in res.amplitudes().iter().enumerate() {
            out[(r, c)] = *v;
        }
    }
    Ok(out)
}

/// `S σ_i S⁻¹` as per-site factors `S_k P_k S_k⁻¹`, checked against the
/// conjugated dense projector sum.
pub fn general_stabilizer_element(
    g: &Graph,
    s: &SloccOperator,
    i: BitString,
    dense_limit: usize,
) -> Result<SeparableOperator> {
    Error::check_dim(g.n(), s.n())?;
    let (inv, _) = slocc_inverse(s)?;
    let o = projector_sum(g, i, dense_limit)?;
    let base = projector_stabilizer_element(g, i, dense_limit)?;
    let factors: Vec<LocalMatrix> = base
        .factors
        .iter()
        .zip(s.locals().iter().zip(inv.locals()))
        .map(|(p, (sk, ik))| *sk * *p * *ik)
        .collect();
    let op = SeparableOperator { factors, ..base };
    let reference = conjugate_dense(s, &o)?;
    let residual = max_abs(&(op.dense() - &reference)) / max_abs(&reference);
    Ok(SeparableOperator {
        dense_residual: residual,
        ..op
    })
}

/// `‖op·ψ − ψ‖ / ‖ψ‖`.
pub fn verify_stabilizes(psi: &StateVector, op: &SeparableOperator) -> Result<f64> {
    let nrm = psi.norm();
    if nrm == 0.0 {
        return Err(Error::InvalidInput("zero state vector".into()));
    }
    Ok(op.apply(psi)?.distance(psi)? / nrm)
}
