//! Staged decision procedure for `ψ ∝ S|g⟩`.
//!
//! 1. Fast rejection: unknown-free checks on supports of size ≤ 2.
//! 2. The same checks on every support used by the solver.
//! 3. Multistart Levenberg–Marquardt on the low-degree polynomial system in
//!    the transformed Paulis. A start that reaches zero residual but fails
//!    verification triggers escalation to the next admissible support size.
//!    Starts alternate between random conjugations and points fitted to the
//!    state by alternating least squares.
//! 4. Each candidate is turned into an operator `S` and verified directly
//!    against the graph state; nothing else can produce `Equivalent`.

mod fit;
pub(crate) mod moments;
pub mod reconstruct;
pub mod system;
pub mod witness;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use reconstruct::{reconstruct_local, verify_candidate};
pub use system::{assemble_system, PolynomialSystem, SiteBlock};
pub use witness::{reject_fast, ForcedZeroReason, Witness};

use crate::conditions::{scan, scan_sizes, ConditionGroup, DEFAULT_ENUM_LIMIT};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::state::{build_graph_state, check_dense, LocalMatrix, SloccOperator, StateVector, DEFAULT_DENSE_LIMIT};
use reconstruct::{fix_scale, ray_residual, reconstruct_local_at};
use system::{levenberg_marquardt, pack, LmOptions};
use witness::check_invariants;

/// LM residual below which a start counts as having solved the system.
pub const CONVERGED_RESIDUAL: f64 = 1e-9;
/// Points at or below this residual seed the next, larger system.
const WARM_RESIDUAL: f64 = 1e-6;
const FIT_SWEEPS: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    /// Verification tolerance on the relative ray residual.
    pub tol: f64,
    /// Threshold, relative to `‖ψ‖²`, above which an unknown-free condition
    /// counts as violated (and below which a Category III group vanishes).
    pub witness_tol: f64,
    pub multistart: usize,
    pub seed: u64,
    /// Largest support size the solver may use; `None` allows escalation up
    /// to `n`.
    pub max_support: Option<usize>,
    pub dense_limit: usize,
    pub max_iterations: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            witness_tol: 1e-10,
            multistart: 32,
            seed: 0,
            max_support: None,
            dense_limit: DEFAULT_DENSE_LIMIT,
            max_iterations: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Equivalent,
    NotEquivalent,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    FastRejection,
    Invariants,
    NumericalSolve,
}

/// Proof of equivalence: `S|g⟩ = ψ` with the given residual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub locals: Vec<LocalMatrix>,
    pub det_s: C64,
    /// Largest residual of the assembled conditions at the recovered `S`,
    /// relative to `‖ψ‖²`.
    pub max_condition_residual: f64,
    pub verification_residual: f64,
}

impl Certificate {
    pub fn operator(&self) -> Result<SloccOperator> {
        SloccOperator::new(self.locals.clone())
    }
}

/// Where a multistart initialization came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKind {
    /// `Z̃ = Z`, `X̃ = X` on every site.
    Pauli,
    /// Conjugation by random well-conditioned locals.
    Random,
    /// Random locals refined by alternating least squares on `‖(⊗A)ψ − g‖`.
    Fitted,
    /// A solution of the smaller system carried to the next support size.
    Warm,
}

impl StartKind {
    fn of_index(index: usize) -> Self {
        match index {
            0 => StartKind::Pauli,
            i if i % 2 == 1 => StartKind::Fitted,
            _ => StartKind::Random,
        }
    }
}

/// What the numerical stage tried.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub support_sizes: Vec<usize>,
    pub equations: usize,
    pub unknowns: usize,
    pub starts: usize,
    pub best_residual: f64,
    /// Starts that solved the system but failed verification.
    pub spurious: usize,
    pub winning_start: Option<usize>,
    pub winning_kind: Option<StartKind>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub stage: Stage,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub certificate: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub search: Option<SearchSummary>,
}

impl Verdict {
    fn rejected(stage: Stage, witness: Witness) -> Self {
        Verdict {
            outcome: Outcome::NotEquivalent,
            stage,
            certificate: None,
            witness: Some(witness),
            search: None,
        }
    }
}

/// Support sizes used before any escalation. The empty support is always
/// added for even `n`, and the first stage escalates once even without a
/// spurious solution.
pub fn initial_support_sizes(n: usize, cap: usize) -> Vec<usize> {
    let base: &[usize] = if n % 2 == 1 { &[1, 3] } else { &[2] };
    base.iter().copied().filter(|&s| s <= cap.min(n)).collect()
}

struct Attempt {
    residual: f64,
    params: Vec<C64>,
    verified: Option<(SloccOperator, f64)>,
}

struct Search<'a> {
    unit: &'a StateVector,
    gstate: &'a StateVector,
    cfg: &'a SolveConfig,
}

impl Search<'_> {
    fn start_point(&self, sys: &PolynomialSystem, index: usize, det_sq: Option<C64>) -> Vec<C64> {
        let n = self.unit.n();
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(index as u64);
        let mut random = || -> Vec<LocalMatrix> { (0..n).map(|_| LocalMatrix::random(&mut rng, 50.0)).collect() };
        let locals = match StartKind::of_index(index) {
            StartKind::Pauli => vec![LocalMatrix::IDENTITY; n],
            StartKind::Fitted => {
                let mut a = random();
                fit::fit_inverse(self.unit, self.gstate, &mut a, FIT_SWEEPS);
                a.iter()
                    .map(|m| m.inverse())
                    .collect::<Result<Vec<_>>>()
                    .unwrap_or_else(|_| random())
            }
            _ => random(),
        };
        let blocks: Vec<SiteBlock> = locals
            .iter()
            .map(|t| SiteBlock::conjugated(t).unwrap_or_else(|_| SiteBlock::pauli()))
            .collect();
        let mut x = pack(&blocks, C64::new(0.0, 0.0));
        let fit = sys.det_fit(&x);
        let d = match (fit, det_sq) {
            (Some(f), _) if f.norm() > 1e-12 => f,
            (_, Some(e)) if e.norm() > 0.0 => e.sqrt(),
            _ => C64::new(1.0, 0.0),
        };
        *x.last_mut().expect("det slot") = d;
        x
    }

    fn attempt(&self, sys: &PolynomialSystem, start: Vec<C64>) -> Attempt {
        let res = levenberg_marquardt(
            sys,
            start,
            LmOptions {
                max_iterations: self.cfg.max_iterations,
                target: 1e-14,
            },
        );
        let verified = self.candidate(&res.params).and_then(|s| {
            let (r, _) = ray_residual(self.unit, self.gstate, &s).ok()?;
            (r <= self.cfg.tol).then_some((s, r))
        });
        Attempt {
            residual: res.residual,
            params: res.params,
            verified,
        }
    }

    fn candidate(&self, params: &[C64]) -> Option<SloccOperator> {
        let (blocks, _) = system::unpack(params);
        let locals = blocks
            .iter()
            .enumerate()
            .map(|(k, b)| reconstruct_local_at(&b.z, &b.x, k))
            .collect::<Result<Vec<_>>>()
            .ok()?;
        SloccOperator::new(locals).ok()
    }
}

fn validate(psi: &StateVector, g: &Graph, cfg: &SolveConfig) -> Result<()> {
    Error::check_dim(g.n(), psi.n())?;
    check_dense(g.n(), cfg.dense_limit)?;
    if !(cfg.tol > 0.0) || !(cfg.witness_tol > 0.0) {
        return Err(Error::InvalidInput("tolerances must be positive".into()));
    }
    if cfg.multistart == 0 {
        return Err(Error::InvalidInput("multistart must be at least 1".into()));
    }
    if let Some(m) = cfg.max_support {
        if m > g.n() {
            return Err(Error::InvalidInput(format!(
                "max support {m} exceeds qubit count {}",
                g.n()
            )));
        }
    }
    if psi.norm_sqr() == 0.0 {
        return Err(Error::InvalidInput("zero state vector".into()));
    }
    Ok(())
}

/// Decides whether `psi` is SLOCC-equivalent to the graph state of `g`.
pub fn solve(psi: &StateVector, g: &Graph, cfg: &SolveConfig) -> Result<Verdict> {
    validate(psi, g, cfg)?;
    let n = g.n();
    let unit = psi.normalized()?;
    let gstate = build_graph_state(g, cfg.dense_limit)?;

    let fast = check_invariants(&unit, &scan(g, n.min(2))?, cfg.witness_tol);
    if let Some(w) = fast.witness {
        return Ok(Verdict::rejected(Stage::FastRejection, w));
    }

    let cap = cfg.max_support.unwrap_or(n);
    let mut sizes = initial_support_sizes(n, cap);
    let mut groups = scan_sizes(g, &sizes, DEFAULT_ENUM_LIMIT)?;
    let mut report = check_invariants(&unit, &groups, cfg.witness_tol);
    if let Some(w) = report.witness {
        return Ok(Verdict::rejected(Stage::Invariants, w));
    }

    let search = Search {
        unit: &unit,
        gstate: &gstate,
        cfg,
    };
    let batch = rayon::current_num_threads().max(1);
    let mut warm: Vec<Vec<C64>> = Vec::new();
    let mut fresh_index = 0usize;
    let mut starts = 0usize;
    let mut best = f64::INFINITY;
    let mut total_spurious = 0usize;
    let mut level = 0usize;
    loop {
        let mut sys = assemble_system(&unit, n, &groups)?;
        if let Some(e) = report.det_sq {
            sys = sys.with_det_sq(e);
        }
        let mut queue: Vec<(usize, Vec<C64>)> = Vec::new();
        for w in warm.drain(..).take(cfg.multistart) {
            queue.push((usize::MAX, w));
        }
        while queue.len() < cfg.multistart {
            queue.push((fresh_index, search.start_point(&sys, fresh_index, report.det_sq)));
            fresh_index += 1;
        }
        let mut spurious: Vec<(f64, Vec<C64>)> = Vec::new();
        let mut winner: Option<(usize, SloccOperator)> = None;
        for chunk in queue.chunks(batch) {
            let results: Vec<Attempt> = chunk
                .par_iter()
                .map(|(_, x)| search.attempt(&sys, x.clone()))
                .collect();
            for ((index, _), att) in chunk.iter().zip(results) {
                starts += 1;
                best = best.min(att.residual);
                if let Some((s, _)) = att.verified {
                    winner = Some((*index, s));
                    break;
                }
                if att.residual <= WARM_RESIDUAL {
                    spurious.push((att.residual, att.params));
                }
            }
            if winner.is_some() {
                break;
            }
        }
        total_spurious += spurious.iter().filter(|(r, _)| *r <= CONVERGED_RESIDUAL).count();
        let summary = SearchSummary {
            support_sizes: sys.support_sizes().to_vec(),
            equations: sys.n_equations(),
            unknowns: sys.n_unknowns(),
            starts,
            best_residual: best,
            spurious: total_spurious,
            winning_start: None,
            winning_kind: None,
        };
        if let Some((index, s)) = winner {
            let cert = certify(psi, &gstate, &sys, &s)?;
            if cert.verification_residual <= cfg.tol {
                return Ok(Verdict {
                    outcome: Outcome::Equivalent,
                    stage: Stage::NumericalSolve,
                    certificate: Some(cert),
                    witness: None,
                    search: Some(SearchSummary {
                        winning_start: (index != usize::MAX).then_some(index),
                        winning_kind: Some(if index == usize::MAX {
                            StartKind::Warm
                        } else {
                            StartKind::of_index(index)
                        }),
                        ..summary
                    }),
                });
            }
        }
        let next = sizes.last().map_or(if n % 2 == 1 { 1 } else { 2 }, |&s| s + 2);
        let converged = spurious.iter().any(|(r, _)| *r <= CONVERGED_RESIDUAL);
        if next > cap || !(converged || level == 0) {
            return Ok(Verdict {
                outcome: Outcome::Inconclusive,
                stage: Stage::NumericalSolve,
                certificate: None,
                witness: None,
                search: Some(summary),
            });
        }
        sizes.push(next);
        groups = scan_sizes(g, &sizes, DEFAULT_ENUM_LIMIT)?;
        report = check_invariants(&unit, &groups, cfg.witness_tol);
        if let Some(w) = report.witness {
            return Ok(Verdict::rejected(Stage::Invariants, w));
        }
        level += 1;
        spurious.sort_by(|a, b| a.0.total_cmp(&b.0));
        warm = spurious.into_iter().map(|(_, p)| p).collect();
    }
}

fn certify(
    psi: &StateVector,
    gstate: &StateVector,
    sys: &PolynomialSystem,
    s: &SloccOperator,
) -> Result<Certificate> {
    let (_, c) = ray_residual(psi, gstate, s)?;
    let fixed = fix_scale(s, c)?;
    let (residual, _) = ray_residual(psi, gstate, &fixed)?;
    let det_s = fixed.det();
    let blocks = fixed
        .locals()
        .iter()
        .map(SiteBlock::conjugated)
        .collect::<Result<Vec<_>>>()?;
    let scaled_det = det_s / psi.norm_sqr();
    let r = sys.condition_residuals(&pack(&blocks, scaled_det))?;
    Ok(Certificate {
        locals: fixed.locals().to_vec(),
        det_s,
        max_condition_residual: r.iter().map(|z| z.norm()).fold(0.0, f64::max),
        verification_residual: residual,
    })
}

/// Re-derives a verdict's evidence on `(psi, g)`. Returns whether the
/// evidence still holds together with the freshly computed verdict body.
pub fn recheck_verdict(psi: &StateVector, g: &Graph, verdict: &Verdict, tol: f64) -> Result<(bool, Verdict)> {
    match (&verdict.outcome, &verdict.certificate, &verdict.witness) {
        (Outcome::Equivalent, Some(cert), _) => {
            let s = cert.operator()?;
            Error::check_dim(g.n(), s.n())?;
            let gstate = build_graph_state(g, crate::state::HARD_DENSE_LIMIT)?;
            let (r, _) = ray_residual(psi, &gstate, &s)?;
            let mut again = verdict.clone();
            if let Some(c) = again.certificate.as_mut() {
                c.verification_residual = r;
                c.det_s = s.det();
            }
            Ok((r <= tol, again))
        }
        (Outcome::NotEquivalent, _, Some(w)) => {
            let (w2, holds) = w.recompute(psi, g)?;
            let mut again = verdict.clone();
            again.witness = Some(w2);
            Ok((holds, again))
        }
        _ => Err(Error::InvalidInput(
            "verdict carries no certificate or witness to check".into(),
        )),
    }
}

/// Groups the solver would start from for `n` and `cap` (exposed for
/// inspection tools).
pub fn solver_groups(g: &Graph, cap: usize) -> Result<Vec<ConditionGroup>> {
    scan_sizes(g, &initial_support_sizes(g.n(), cap), DEFAULT_ENUM_LIMIT)
}
