//! Unknown-free necessary conditions and the witnesses they produce.
//!
//! For a group with support `J`, let `W[l] = ψᵀ (Y_{V∖J} ⊗ (Y P_l)_J) ψ` over
//! the plain Pauli letter patterns `l` of its members. If `ψ = S|g⟩` then
//! `W = D · (⊗_k R_k) C`, where `D = det S`, each `R_k` is the complex
//! orthogonal matrix of `P ↦ S_k⁻¹ P S_k` in the Pauli basis, and
//! `C[l] = [rhs_l = det S] / alpha_l`. Consequences used here:
//!
//! * Category II groups have `C = 0`, so every `W[l]` vanishes.
//! * For Category III groups `W·W = D² (C·C)` with the bilinear dot product,
//!   so `W = 0`, or `W·W = 0` while `C·C ≠ 0`, forces `det S = 0`.
//! * All groups with `C·C ≠ 0` must agree on `D²`; groups with `C·C = 0`
//!   must have `W·W = 0`.
//! * The empty-support condition has no unknowns at all.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize};

use super::moments::{contract, flat, moment_tensor, Flat};
use crate::bits::{BitString, SiteSet};
use crate::conditions::{enumerate_support, scan, Category, ConditionGroup, Rhs};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::pauli::Letter;
use crate::state::{LocalMatrix, StateVector};

const ZERO: C64 = C64::new(0.0, 0.0);

/// `|W·W| ≤ ISOTROPY_RTOL·‖W‖²` counts as isotropic.
pub const ISOTROPY_RTOL: f64 = 1e-12;
/// Largest support on which the isotropy test is applied.
pub const ISOTROPY_MAX_SUPPORT: usize = 2;
/// Relative tolerance for `W·W = 0` when `C·C = 0`.
pub const QUADRATIC_RTOL: f64 = 1e-8;
/// Relative tolerance when comparing two `det(S)²` estimates.
pub const CONSISTENCY_RTOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcedZeroReason {
    /// Every plain-Pauli value of a Category III group vanishes.
    Vanishing,
    /// The plain-Pauli values form an isotropic vector.
    Isotropic,
    /// The empty-support condition pins `det S` to zero.
    EmptySupport,
}

/// A machine-checkable proof of inequivalence. All values refer to the
/// input state rescaled to unit norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A condition without unknowns (empty support, or any member of a
    /// Category II group evaluated with plain Paulis) is nonzero.
    ZeroConditionViolated {
        b: BitString,
        j: BitString,
        support: SiteSet,
        #[serde(deserialize_with = "category_de")]
        category: Category,
        value: C64,
        threshold: f64,
    },
    DeterminantForcedZero {
        support: SiteSet,
        reason: ForcedZeroReason,
        magnitude: f64,
        threshold: f64,
    },
    /// A group with `C·C = 0` has `W·W ≠ 0`.
    QuadraticInvariantViolated {
        support: SiteSet,
        value: C64,
        scale: f64,
        threshold: f64,
    },
    /// Two groups imply different values of `det(S)²`.
    DeterminantInconsistent {
        first: SiteSet,
        second: SiteSet,
        first_estimate: C64,
        second_estimate: C64,
        discrepancy: f64,
        threshold: f64,
    },
}

fn category_de<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Category, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

/// Plain-Pauli values of one group.
#[derive(Clone, Debug)]
pub(crate) struct GroupValues {
    pub category: Category,
    /// `W[l]` in member order.
    pub w: Vec<C64>,
    /// `C[l]` in member order.
    pub c: Vec<C64>,
}

impl GroupValues {
    fn ww(&self) -> C64 {
        self.w.iter().map(|z| z * z).sum()
    }

    fn cc(&self) -> C64 {
        self.c.iter().map(|z| z * z).sum()
    }

    fn w_norm_sqr(&self) -> f64 {
        self.w.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `(D², natural scale of the estimate)` when `C·C ≠ 0`.
    pub fn det_sq_estimate(&self) -> Option<(C64, f64)> {
        let cc = self.cc();
        if cc.norm() < 0.5 || self.category != Category::III {
            return None;
        }
        Some((self.ww() / cc, self.w_norm_sqr() / cc.norm()))
    }
}

fn pauli_flat(l: Letter) -> Flat {
    flat(&(LocalMatrix::from_letter(Letter::Y) * LocalMatrix::from_letter(l)))
}

pub(crate) fn group_values(psi: &StateVector, grp: &ConditionGroup) -> GroupValues {
    let mom = moment_tensor(psi, grp.support);
    let mut vs = Vec::with_capacity(mom.sites.len());
    let w = grp
        .conditions
        .iter()
        .map(|c| {
            vs.clear();
            vs.extend(c.labels.iter().map(|&l| pauli_flat(l)));
            contract(&mom.data, &vs)
        })
        .collect();
    let c = grp
        .conditions
        .iter()
        .map(|c| match c.rhs {
            Rhs::DetS => c.alpha.inverse().to_complex(),
            Rhs::Zero => ZERO,
        })
        .collect();
    GroupValues {
        category: grp.category,
        w,
        c,
    }
}

/// Outcome of the invariant checks.
#[derive(Clone, Debug, Default)]
pub(crate) struct InvariantReport {
    pub witness: Option<Witness>,
    /// Most reliable `det(S)²` estimate, if any group provides one.
    pub det_sq: Option<C64>,
    /// `det(S)` itself when the empty-support condition pins it.
    pub det: Option<C64>,
}

/// Runs every unknown-free check on `psi` (assumed unit norm) against the
/// given groups.
pub(crate) fn check_invariants(psi: &StateVector, groups: &[ConditionGroup], zero_tol: f64) -> InvariantReport {
    let mut report = InvariantReport::default();
    let mut estimates: Vec<(SiteSet, C64, f64)> = Vec::new();
    for grp in groups {
        if grp.category == Category::I {
            continue;
        }
        let vals = group_values(psi, grp);
        if grp.support.is_empty() {
            let cond = &grp.conditions[0];
            let value = cond.alpha.to_complex() * vals.w[0];
            match cond.rhs {
                Rhs::Zero if value.norm() > zero_tol => {
                    report.witness = Some(Witness::ZeroConditionViolated {
                        b: cond.b,
                        j: cond.j,
                        support: grp.support,
                        category: grp.category,
                        value,
                        threshold: zero_tol,
                    });
                    return report;
                }
                Rhs::DetS if value.norm() <= zero_tol => {
                    report.witness = Some(Witness::DeterminantForcedZero {
                        support: grp.support,
                        reason: ForcedZeroReason::EmptySupport,
                        magnitude: value.norm(),
                        threshold: zero_tol,
                    });
                    return report;
                }
                Rhs::DetS => {
                    report.det = Some(value);
                    estimates.push((grp.support, value * value, value.norm_sqr()));
                }
                Rhs::Zero => {}
            }
            continue;
        }
        match grp.category {
            Category::II => {
                if let Some((i, v)) = vals
                    .w
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (i, grp.conditions[i].alpha.to_complex() * v))
                    .find(|(_, v)| v.norm() > zero_tol)
                {
                    let cond = &grp.conditions[i];
                    report.witness = Some(Witness::ZeroConditionViolated {
                        b: cond.b,
                        j: cond.j,
                        support: grp.support,
                        category: grp.category,
                        value: v,
                        threshold: zero_tol,
                    });
                    return report;
                }
            }
            Category::III => {
                let wn2 = vals.w_norm_sqr();
                if wn2.sqrt() <= zero_tol {
                    report.witness = Some(Witness::DeterminantForcedZero {
                        support: grp.support,
                        reason: ForcedZeroReason::Vanishing,
                        magnitude: wn2.sqrt(),
                        threshold: zero_tol,
                    });
                    return report;
                }
                let ww = vals.ww();
                match vals.det_sq_estimate() {
                    Some((e, s)) => {
                        if grp.support.len() <= ISOTROPY_MAX_SUPPORT && ww.norm() <= ISOTROPY_RTOL * wn2 {
                            report.witness = Some(Witness::DeterminantForcedZero {
                                support: grp.support,
                                reason: ForcedZeroReason::Isotropic,
                                magnitude: ww.norm() / wn2,
                                threshold: ISOTROPY_RTOL,
                            });
                            return report;
                        }
                        estimates.push((grp.support, e, s));
                    }
                    None => {
                        if ww.norm() > QUADRATIC_RTOL * wn2 {
                            report.witness = Some(Witness::QuadraticInvariantViolated {
                                support: grp.support,
                                value: ww,
                                scale: wn2,
                                threshold: QUADRATIC_RTOL,
                            });
                            return report;
                        }
                    }
                }
            }
            Category::I => {}
        }
    }
    // Compare every estimate with the one of largest natural scale.
    if let Some(&(ref_support, ref_e, ref_s)) = estimates
        .iter()
        .max_by(|a, b| a.2.total_cmp(&b.2))
    {
        for &(support, e, s) in &estimates {
            let discrepancy = (e - ref_e).norm() / s.max(ref_s);
            if discrepancy > CONSISTENCY_RTOL {
                report.witness = Some(Witness::DeterminantInconsistent {
                    first: ref_support,
                    second: support,
                    first_estimate: ref_e,
                    second_estimate: e,
                    discrepancy,
                    threshold: CONSISTENCY_RTOL,
                });
                return report;
            }
        }
        report.det_sq = Some(ref_e);
    }
    report
}

/// Fast rejection using the empty support and supports of size ≤ 2.
pub fn reject_fast(psi: &StateVector, g: &Graph, zero_tol: f64) -> Result<Option<Witness>> {
    Error::check_dim(g.n(), psi.n())?;
    let unit = psi.normalized()?;
    let groups = scan(g, g.n().min(2))?;
    Ok(check_invariants(&unit, &groups, zero_tol).witness)
}

impl Witness {
    /// Short human-readable description.
    pub fn describe(&self) -> String {
        match self {
            Witness::ZeroConditionViolated { b, j, support, category, value, .. } => format!(
                "condition b={b} j={j} (support {support}, category {category}) evaluates to {value:.3e} instead of 0"
            ),
            Witness::DeterminantForcedZero { support, reason, magnitude, .. } => format!(
                "support {support} forces det S = 0 ({reason:?}, magnitude {magnitude:.3e})"
            ),
            Witness::QuadraticInvariantViolated { support, value, .. } => {
                format!("support {support}: quadratic invariant {value:.3e} should vanish")
            }
            Witness::DeterminantInconsistent { first, second, discrepancy, .. } => format!(
                "supports {first} and {second} imply different det(S)^2 (relative gap {discrepancy:.3e})"
            ),
        }
    }

    /// Recomputes the witness from scratch on `psi` and `g`. The returned
    /// witness carries freshly evaluated values; `holds` reports whether the
    /// violation still exceeds the recorded threshold.
    pub fn recompute(&self, psi: &StateVector, g: &Graph) -> Result<(Witness, bool)> {
        Error::check_dim(g.n(), psi.n())?;
        let unit = psi.normalized()?;
        match self {
            Witness::ZeroConditionViolated { b, j, support, threshold, .. } => {
                let grp = enumerate_support(g, *support)?;
                let idx = grp
                    .conditions
                    .iter()
                    .position(|c| c.b == *b && c.j == *j)
                    .ok_or_else(|| Error::InvalidInput("witness condition not in its support group".into()))?;
                let vals = group_values(&unit, &grp);
                let cond = &grp.conditions[idx];
                let value = cond.alpha.to_complex() * vals.w[idx];
                let unknown_free = grp.support.is_empty() || grp.category == Category::II;
                let holds = unknown_free && cond.rhs == Rhs::Zero && value.norm() > *threshold;
                Ok((
                    Witness::ZeroConditionViolated {
                        b: *b,
                        j: *j,
                        support: *support,
                        category: grp.category,
                        value,
                        threshold: *threshold,
                    },
                    holds,
                ))
            }
            Witness::DeterminantForcedZero { support, reason, threshold, .. } => {
                let grp = enumerate_support(g, *support)?;
                let vals = group_values(&unit, &grp);
                let (magnitude, holds) = match reason {
                    ForcedZeroReason::EmptySupport => {
                        let c = &grp.conditions[0];
                        let m = vals.w[0].norm();
                        (m, support.is_empty() && grp.category != Category::I && c.rhs == Rhs::DetS && m <= *threshold)
                    }
                    ForcedZeroReason::Vanishing => {
                        let m = vals.w_norm_sqr().sqrt();
                        (m, grp.category == Category::III && m <= *threshold)
                    }
                    ForcedZeroReason::Isotropic => {
                        let m = vals.ww().norm() / vals.w_norm_sqr();
                        let ok = grp.category == Category::III && vals.cc().norm() >= 0.5;
                        (m, ok && m <= *threshold)
                    }
                };
                Ok((
                    Witness::DeterminantForcedZero {
                        support: *support,
                        reason: *reason,
                        magnitude,
                        threshold: *threshold,
                    },
                    holds,
                ))
            }
            Witness::QuadraticInvariantViolated { support, threshold, .. } => {
                let grp = enumerate_support(g, *support)?;
                let vals = group_values(&unit, &grp);
                let value = vals.ww();
                let scale = vals.w_norm_sqr();
                let holds = grp.category == Category::III
                    && vals.cc().norm() < 0.5
                    && value.norm() > threshold * scale;
                Ok((
                    Witness::QuadraticInvariantViolated {
                        support: *support,
                        value,
                        scale,
                        threshold: *threshold,
                    },
                    holds,
                ))
            }
            Witness::DeterminantInconsistent { first, second, threshold, .. } => {
                let estimate = |support: SiteSet| -> Result<Option<(C64, f64)>> {
                    let grp = enumerate_support(g, support)?;
                    if support.is_empty() {
                        let c = &grp.conditions[0];
                        if grp.category == Category::I || c.rhs != Rhs::DetS {
                            return Ok(None);
                        }
                        let d = c.alpha.to_complex() * group_values(&unit, &grp).w[0];
                        return Ok(Some((d * d, d.norm_sqr())));
                    }
                    Ok(group_values(&unit, &grp).det_sq_estimate())
                };
                let (e1, s1) = estimate(*first)?.unwrap_or((ZERO, 0.0));
                let (e2, s2) = estimate(*second)?.unwrap_or((ZERO, 0.0));
                let scale = s1.max(s2);
                let discrepancy = if scale > 0.0 { (e1 - e2).norm() / scale } else { 0.0 };
                Ok((
                    Witness::DeterminantInconsistent {
                        first: *first,
                        second: *second,
                        first_estimate: e1,
                        second_estimate: e2,
                        discrepancy,
                        threshold: *threshold,
                    },
                    s1 > 0.0 && s2 > 0.0 && discrepancy > *threshold,
                ))
            }
        }
    }
}
