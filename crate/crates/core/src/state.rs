//! Dense state vectors, local 2×2 operators and the transpose bilinear form.
//!
//! Basis ordering: in a basis index, qubit 0 is the most significant bit, so
//! amplitudes are laid out as `⊗_{k=0}^{n-1}` in the usual Kronecker order.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::pauli::{Letter, PauliWord};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Default qubit cap for dense state construction.
pub const DEFAULT_DENSE_LIMIT: usize = 12;
/// Absolute ceiling regardless of configuration (2^26 amplitudes = 1 GiB).
pub const HARD_DENSE_LIMIT: usize = 26;
/// `|det|` below this fraction of the row-norm product counts as singular.
pub const SINGULAR_RTOL: f64 = 1e-12;

/// A 2×2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LocalMatrix(pub [[C64; 2]; 2]);

impl LocalMatrix {
    pub const IDENTITY: LocalMatrix = LocalMatrix([[ONE, ZERO], [ZERO, ONE]]);

    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        LocalMatrix([[a, b], [c, d]])
    }

    pub fn from_letter(l: Letter) -> Self {
        LocalMatrix(l.matrix())
    }

    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        LocalMatrix([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        LocalMatrix([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        LocalMatrix([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    /// `Y Mᵀ Y`, which equals `det(M)·M⁻¹` for every 2×2 matrix.
    pub fn adjugate(&self) -> Self {
        let m = &self.0;
        LocalMatrix([[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]])
    }

    fn row_norm_product(&self) -> f64 {
        let m = &self.0;
        let r0 = (m[0][0].norm_sqr() + m[0][1].norm_sqr()).sqrt();
        let r1 = (m[1][0].norm_sqr() + m[1][1].norm_sqr()).sqrt();
        r0 * r1
    }

    /// Relative singularity test against [`SINGULAR_RTOL`].
    pub fn is_invertible(&self) -> bool {
        let scale = self.row_norm_product();
        scale.is_finite() && scale > 0.0 && self.det().norm() >= SINGULAR_RTOL * scale
    }

    /// Inverse, reporting `site` in the error if the matrix is singular.
    pub fn inverse_at(&self, site: usize) -> Result<Self> {
        if !self.is_invertible() {
            return Err(Error::SingularOperator {
                site,
                det_abs: self.det().norm(),
            });
        }
        Ok(self.adjugate().scale(self.det().inv()))
    }

    pub fn inverse(&self) -> Result<Self> {
        self.inverse_at(0)
    }

    /// Spectral condition number from the closed-form 2×2 singular values.
    pub fn condition_number(&self) -> f64 {
        let fro2: f64 = self.0.iter().flatten().map(|z| z.norm_sqr()).sum();
        let d = self.det().norm();
        let disc = (fro2 * fro2 - 4.0 * d * d).max(0.0).sqrt();
        let s_max = ((fro2 + disc) / 2.0).sqrt();
        let s_min = if d == 0.0 { 0.0 } else { d / s_max };
        if s_min == 0.0 {
            f64::INFINITY
        } else {
            s_max / s_min
        }
    }

    pub fn max_abs_diff(&self, other: &LocalMatrix) -> f64 {
        let mut best = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                best = best.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        best
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    /// Random matrix with i.i.d. standard complex Gaussian entries
    /// (`E|z|² = 1`), redrawn until its condition number is at most `max_cond`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, max_cond: f64) -> Self {
        let half = std::f64::consts::FRAC_1_SQRT_2;
        loop {
            let mut draw = || {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                C64::new(re * half, im * half)
            };
            let m = LocalMatrix::new(draw(), draw(), draw(), draw());
            if m.condition_number() <= max_cond {
                return m;
            }
        }
    }
}

impl Mul for LocalMatrix {
    type Output = LocalMatrix;
    fn mul(self, rhs: LocalMatrix) -> LocalMatrix {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        LocalMatrix(out)
    }
}

impl Add for LocalMatrix {
    type Output = LocalMatrix;
    fn add(self, rhs: LocalMatrix) -> LocalMatrix {
        let mut out = self.0;
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] += rhs.0[r][c];
            }
        }
        LocalMatrix(out)
    }
}

impl Sub for LocalMatrix {
    type Output = LocalMatrix;
    fn sub(self, rhs: LocalMatrix) -> LocalMatrix {
        self + (-rhs)
    }
}

impl Neg for LocalMatrix {
    type Output = LocalMatrix;
    fn neg(self) -> LocalMatrix {
        self.scale(-ONE)
    }
}

/// Dense n-qubit state; the norm is arbitrary but nonzero.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amp: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    n: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(n: usize, amp: Vec<C64>) -> Result<Self> {
        if n > HARD_DENSE_LIMIT {
            return Err(Error::Capacity {
                what: "qubits in a dense state",
                requested: n as u128,
                limit: HARD_DENSE_LIMIT as u128,
            });
        }
        Error::check_dim(1usize << n, amp.len())?;
        if let Some(pos) = amp.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidInput(format!("non-finite amplitude at index {pos}")));
        }
        Ok(Self { n, amp })
    }

    /// Computational basis state `|bits⟩`.
    pub fn basis(bits: BitString) -> Result<Self> {
        let n = bits.len();
        check_dense(n, HARD_DENSE_LIMIT)?;
        let mut amp = vec![ZERO; 1 << n];
        amp[bits.to_index() as usize] = ONE;
        Self::new(n, amp)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amp
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amp
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩` (conjugate-linear in `self`).
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        Error::check_dim(self.n, other.n)?;
        Ok(self.amp.iter().zip(&other.amp).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn scaled(&self, s: C64) -> StateVector {
        StateVector {
            n: self.n,
            amp: self.amp.iter().map(|z| z * s).collect(),
        }
    }

    pub fn normalized(&self) -> Result<StateVector> {
        let nrm = self.norm();
        if nrm == 0.0 {
            return Err(Error::InvalidInput("zero state vector".into()));
        }
        Ok(self.scaled(C64::new(1.0 / nrm, 0.0)))
    }

    /// `‖self − other‖`.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        Error::check_dim(self.n, other.n)?;
        Ok(self
            .amp
            .iter()
            .zip(&other.amp)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Applies `m` to qubit `k` in place.
    pub fn apply_local_mut(&mut self, k: usize, m: &LocalMatrix) -> Result<()> {
        if k >= self.n {
            return Err(Error::IndexOutOfRange { index: k, len: self.n });
        }
        let stride = 1usize << (self.n - 1 - k);
        let [[a, b], [c, d]] = m.0;
        for block in self.amp.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (x0, x1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (v0, v1) = (*x0, *x1);
                *x0 = a * v0 + b * v1;
                *x1 = c * v0 + d * v1;
            }
        }
        Ok(())
    }

    /// Applies a Pauli word (with its phase) exactly.
    pub fn apply_pauli(&self, p: &PauliWord) -> Result<StateVector> {
        Error::check_dim(self.n, p.n())?;
        let (flip, zmask, base) = p.basis_action();
        let mut out = vec![ZERO; self.amp.len()];
        for (c, &z) in self.amp.iter().enumerate() {
            let v = if (c & zmask).count_ones() % 2 == 1 { -z } else { z };
            out[c ^ flip] = base * v;
        }
        Ok(StateVector { n: self.n, amp: out })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&StateJson {
            n: self.n,
            amplitudes: self.amp.clone(),
        })
        .expect("state serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: StateJson = serde_json::from_str(text).map_err(|e| {
            Error::parse(e.column().saturating_sub(1), format!("line {}: {e}", e.line()))
        })?;
        if raw.n > HARD_DENSE_LIMIT {
            return Err(Error::Capacity {
                what: "qubits in a dense state",
                requested: raw.n as u128,
                limit: HARD_DENSE_LIMIT as u128,
            });
        }
        Self::new(raw.n, raw.amplitudes)
    }
}

/// A product operator `⊗_k S_k` of invertible 2×2 matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SloccJson", into = "SloccJson")]
pub struct SloccOperator {
    locals: Vec<LocalMatrix>,
}

#[derive(Serialize, Deserialize)]
struct SloccJson {
    locals: Vec<LocalMatrix>,
}

impl TryFrom<SloccJson> for SloccOperator {
    type Error = Error;
    fn try_from(raw: SloccJson) -> Result<Self> {
        SloccOperator::new(raw.locals)
    }
}

impl From<SloccOperator> for SloccJson {
    fn from(s: SloccOperator) -> Self {
        SloccJson { locals: s.locals }
    }
}

impl SloccOperator {
    pub fn new(locals: Vec<LocalMatrix>) -> Result<Self> {
        if locals.is_empty() {
            return Err(Error::InvalidInput("SLOCC operator with no sites".into()));
        }
        for (site, m) in locals.iter().enumerate() {
            if !m.is_finite() || !m.is_invertible() {
                return Err(Error::SingularOperator {
                    site,
                    det_abs: m.det().norm(),
                });
            }
        }
        Ok(Self { locals })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            locals: vec![LocalMatrix::IDENTITY; n],
        }
    }

    /// Seeded random operator; every local has condition number ≤ `max_cond`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R, max_cond: f64) -> Self {
        Self {
            locals: (0..n).map(|_| LocalMatrix::random(rng, max_cond)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.locals.len()
    }

    pub fn locals(&self) -> &[LocalMatrix] {
        &self.locals
    }

    pub fn det(&self) -> C64 {
        self.locals.iter().map(|m| m.det()).product()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("operator serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::parse(e.column().saturating_sub(1), format!("line {}: {e}", e.line()))
        })
    }
}

pub(crate) fn check_dense(n: usize, limit: usize) -> Result<()> {
    let limit = limit.min(HARD_DENSE_LIMIT);
    if n > limit {
        return Err(Error::Capacity {
            what: "qubits for dense simulation",
            requested: n as u128,
            limit: limit as u128,
        });
    }
    Ok(())
}

/// The graph state `∏ CZ |+⟩^{⊗n}`.
pub fn build_graph_state(g: &Graph, dense_limit: usize) -> Result<StateVector> {
    let n = g.n();
    check_dense(n, dense_limit)?;
    let amp0 = (0.5f64).powf(n as f64 / 2.0);
    let adj = g.adjacency();
    // Sign of |x⟩ is (−1)^{#edges inside x}; index bit (n−1−k) is qubit k.
    let amp = (0..1usize << n)
        .map(|idx| {
            let mut parity = 0u32;
            for k in 0..n {
                if (idx >> (n - 1 - k)) & 1 == 1 {
                    let row = adj[k];
                    for m in (k + 1)..n {
                        if (row >> m) & 1 == 1 && (idx >> (n - 1 - m)) & 1 == 1 {
                            parity ^= 1;
                        }
                    }
                }
            }
            C64::new(if parity == 1 { -amp0 } else { amp0 }, 0.0)
        })
        .collect();
    StateVector::new(n, amp)
}

/// `(⊗_k S_k) ψ`.
pub fn apply_slocc(s: &SloccOperator, psi: &StateVector) -> Result<StateVector> {
    Error::check_dim(psi.n(), s.n())?;
    let mut out = psi.clone();
    for (k, m) in s.locals.iter().enumerate() {
        out.apply_local_mut(k, m)?;
    }
    Ok(out)
}

/// Per-site inverses together with `det S = ∏_k det S_k`.
pub fn slocc_inverse(s: &SloccOperator) -> Result<(SloccOperator, C64)> {
    let locals = s
        .locals
        .iter()
        .enumerate()
        .map(|(k, m)| m.inverse_at(k))
        .collect::<Result<Vec<_>>>()?;
    Ok((SloccOperator { locals }, s.det()))
}

/// `ψᵀ (⊗_k O_k) ψ` without complex conjugation; `None` stands for identity.
pub fn bilinear_form(psi: &StateVector, factors: &[Option<LocalMatrix>]) -> Result<C64> {
    Error::check_dim(psi.n(), factors.len())?;
    let mut phi = psi.clone();
    for (k, f) in factors.iter().enumerate() {
        if let Some(m) = f {
            phi.apply_local_mut(k, m)?;
        }
    }
    Ok(psi.amp.iter().zip(&phi.amp).map(|(a, b)| a * b).sum())
}

/// `Z_j |g⟩`, the member of the graph-state basis labelled by `j`.
pub fn zbasis_vector(g: &Graph, j: BitString, dense_limit: usize) -> Result<StateVector> {
    Error::check_dim(g.n(), j.len())?;
    build_graph_state(g, dense_limit)?.apply_pauli(&PauliWord::z_on(j))
}
