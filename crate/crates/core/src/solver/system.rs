//! The low-degree polynomial system in the transformed Pauli letters and a
//! holomorphic Levenberg–Marquardt solver for it.
//!
//! Unknowns, per site `k`: `Z̃_k = [[za, zb], [zc, −za]]` and
//! `X̃_k = [[xa, xb], [xc, −xa]]`, stored at `6k..6k+6` in that order, with
//! `Ỹ_k = i X̃_k Z̃_k`. The shared scalar `det S` sits at index `6n`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::moments::{contract, contract_with_envs, moment_tensor, Flat, Scratch};
use crate::bits::SiteSet;
use crate::conditions::{Category, ConditionGroup, Rhs};
use crate::error::{Error, Result};
use crate::pauli::Letter;
use crate::state::{LocalMatrix, StateVector};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Parameters per site.
pub const SITE_PARAMS: usize = 6;

#[derive(Clone, Debug)]
struct Equation {
    /// Letter index (0 = X, 1 = Y, 2 = Z) per supported site.
    letters: Vec<u8>,
    alpha: C64,
    det: bool,
}

#[derive(Clone, Debug)]
struct GroupEqs {
    sites: Vec<usize>,
    moment: Vec<C64>,
    eqs: Vec<Equation>,
}

/// Polynomial system assembled from Category III groups and the
/// empty-support equation.
#[derive(Clone, Debug)]
pub struct PolynomialSystem {
    n: usize,
    groups: Vec<GroupEqs>,
    n_conditions: usize,
    support_sizes: Vec<usize>,
    /// `(e, √|e|)` for the optional extra equation `(D² − e)/√|e| = 0`.
    det_anchor: Option<(C64, f64)>,
}

/// Per-site unknown block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SiteBlock {
    pub z: LocalMatrix,
    pub x: LocalMatrix,
}

impl SiteBlock {
    pub fn pauli() -> Self {
        SiteBlock {
            z: LocalMatrix::from_letter(Letter::Z),
            x: LocalMatrix::from_letter(Letter::X),
        }
    }

    /// Blocks of `T Z T⁻¹` and `T X T⁻¹`.
    pub fn conjugated(t: &LocalMatrix) -> Result<Self> {
        let inv = t.inverse()?;
        let p = Self::pauli();
        Ok(SiteBlock {
            z: *t * p.z * inv,
            x: *t * p.x * inv,
        })
    }
}

pub fn pack(blocks: &[SiteBlock], det: C64) -> Vec<C64> {
    let mut v = Vec::with_capacity(SITE_PARAMS * blocks.len() + 1);
    for b in blocks {
        v.extend([b.z.0[0][0], b.z.0[0][1], b.z.0[1][0], b.x.0[0][0], b.x.0[0][1], b.x.0[1][0]]);
    }
    v.push(det);
    v
}

pub fn unpack(params: &[C64]) -> (Vec<SiteBlock>, C64) {
    let n = (params.len() - 1) / SITE_PARAMS;
    let blocks = (0..n)
        .map(|k| {
            let p = &params[SITE_PARAMS * k..SITE_PARAMS * (k + 1)];
            SiteBlock {
                z: LocalMatrix::new(p[0], p[1], p[2], -p[0]),
                x: LocalMatrix::new(p[3], p[4], p[5], -p[3]),
            }
        })
        .collect();
    (blocks, params[SITE_PARAMS * n])
}

fn y_times(m: &LocalMatrix) -> Flat {
    // Y·A = [[−i A10, −i A11], [i A00, i A01]]
    let a = &m.0;
    [-I * a[1][0], -I * a[1][1], I * a[0][0], I * a[0][1]]
}

/// Site factors `Y·L̃` for the three letters and their parameter derivatives.
struct SiteFactors {
    mats: [Flat; 3],
    /// `dmats[letter][param]`
    dmats: [[Flat; SITE_PARAMS]; 3],
}

fn unit_traceless(p: usize) -> LocalMatrix {
    match p {
        0 => LocalMatrix::new(ONE, ZERO, ZERO, -ONE),
        1 => LocalMatrix::new(ZERO, ONE, ZERO, ZERO),
        _ => LocalMatrix::new(ZERO, ZERO, ONE, ZERO),
    }
}

fn site_factors(b: &SiteBlock) -> SiteFactors {
    let yt = (b.x * b.z).scale(I);
    let mats = [y_times(&b.x), y_times(&yt), y_times(&b.z)];
    let zero = [ZERO; 4];
    let mut dmats = [[zero; SITE_PARAMS]; 3];
    for p in 0..3 {
        let e = unit_traceless(p);
        // z parameters
        dmats[1][p] = y_times(&(b.x * e).scale(I));
        dmats[2][p] = y_times(&e);
        // x parameters
        dmats[0][3 + p] = y_times(&e);
        dmats[1][3 + p] = y_times(&(e * b.z).scale(I));
    }
    SiteFactors { mats, dmats }
}

fn letter_index(l: Letter) -> u8 {
    match l {
        Letter::X => 0,
        Letter::Y => 1,
        Letter::Z => 2,
        Letter::I => unreachable!("identity letters never appear on a support"),
    }
}

/// Builds the system from Category III groups and the empty-support group
/// (unless the latter is Category I). Other groups carry no information
/// about `S` and are skipped.
pub fn assemble_system(
    psi: &StateVector,
    n: usize,
    groups: &[ConditionGroup],
) -> Result<PolynomialSystem> {
    Error::check_dim(n, psi.n())?;
    let mut out = Vec::new();
    let mut n_conditions = 0;
    let mut sizes = Vec::new();
    for grp in groups {
        let keep = grp.category == Category::III
            || (grp.support.is_empty() && grp.category != Category::I);
        if !keep {
            continue;
        }
        if grp.support.iter().any(|k| k >= n) {
            return Err(Error::InvalidInput("group support exceeds qubit count".into()));
        }
        let mom = moment_tensor(psi, grp.support);
        let eqs: Vec<Equation> = grp
            .conditions
            .iter()
            .map(|c| Equation {
                letters: c.labels.iter().map(|&l| letter_index(l)).collect(),
                alpha: c.alpha.to_complex(),
                det: c.rhs == Rhs::DetS,
            })
            .collect();
        n_conditions += eqs.len();
        sizes.push(grp.support.len());
        out.push(GroupEqs {
            sites: mom.sites,
            moment: mom.data,
            eqs,
        });
    }
    sizes.sort_unstable();
    sizes.dedup();
    Ok(PolynomialSystem {
        n,
        groups: out,
        n_conditions,
        support_sizes: sizes,
        det_anchor: None,
    })
}

impl PolynomialSystem {
    pub fn n_unknowns(&self) -> usize {
        SITE_PARAMS * self.n + 1
    }

    /// Stabilizer conditions in the system.
    pub fn n_conditions(&self) -> usize {
        self.n_conditions
    }

    /// Conditions, the three quadratic side constraints per site, and the
    /// determinant anchor if set.
    pub fn n_equations(&self) -> usize {
        self.n_conditions + 3 * self.n + usize::from(self.det_anchor.is_some())
    }

    /// Adds the equation `D² = det_sq`. The conditions already imply it
    /// whenever `det_sq` comes from the group invariants; it keeps the
    /// search away from the degenerate region `D → 0`.
    pub fn with_det_sq(mut self, det_sq: C64) -> Self {
        let scale = det_sq.norm().sqrt();
        self.det_anchor = (scale > 0.0 && scale.is_finite()).then_some((det_sq, scale));
        self
    }

    pub fn det_sq(&self) -> Option<C64> {
        self.det_anchor.map(|(e, _)| e)
    }

    pub fn support_sizes(&self) -> &[usize] {
        &self.support_sizes
    }

    pub fn supports(&self) -> Vec<SiteSet> {
        self.groups
            .iter()
            .map(|g| SiteSet::from_sites(&g.sites).expect("sites in range"))
            .collect()
    }

    /// Maximum polynomial degree among the conditions.
    pub fn degree(&self) -> usize {
        self.groups.iter().map(|g| g.sites.len()).max().unwrap_or(0)
    }

    /// The point `Z̃ = Z`, `X̃ = X` on every site with the given `det S`.
    pub fn pauli_point(&self, det: C64) -> Vec<C64> {
        pack(&vec![SiteBlock::pauli(); self.n], det)
    }

    /// Condition residuals `alpha·value − det·[rhs = det S]` followed by the
    /// side constraints `Z̃² − I`, `X̃² − I`, `{X̃, Z̃}/2`.
    pub fn residuals(&self, params: &[C64]) -> Result<Vec<C64>> {
        Error::check_dim(self.n_unknowns(), params.len())?;
        let mut r = Vec::with_capacity(self.n_equations());
        self.eval(params, &mut r);
        Ok(r)
    }

    fn eval(&self, params: &[C64], r: &mut Vec<C64>) {
        let (blocks, det) = unpack(params);
        let factors: Vec<SiteFactors> = blocks.iter().map(site_factors).collect();
        let mut vs: Vec<Flat> = Vec::new();
        for grp in &self.groups {
            for eq in &grp.eqs {
                vs.clear();
                vs.extend(grp.sites.iter().zip(&eq.letters).map(|(&k, &l)| factors[k].mats[l as usize]));
                let v = eq.alpha * contract(&grp.moment, &vs);
                r.push(if eq.det { v - det } else { v });
            }
        }
        for p in params[..SITE_PARAMS * self.n].chunks_exact(SITE_PARAMS) {
            side_residuals(p, r);
        }
        if let Some((e, scale)) = self.det_anchor {
            r.push((det * det - e) / scale);
        }
    }

    /// Residuals of the stabilizer conditions only.
    pub fn condition_residuals(&self, params: &[C64]) -> Result<Vec<C64>> {
        let mut r = self.residuals(params)?;
        r.truncate(self.n_conditions);
        Ok(r)
    }

    /// Least-squares value of `det S` for the letters in `params`: the mean
    /// of `alpha·value` over the conditions whose right-hand side is `det S`.
    pub fn det_fit(&self, params: &[C64]) -> Option<C64> {
        let (blocks, _) = unpack(params);
        let factors: Vec<SiteFactors> = blocks.iter().map(site_factors).collect();
        let mut sum = ZERO;
        let mut count = 0usize;
        let mut vs: Vec<Flat> = Vec::new();
        for grp in &self.groups {
            for eq in grp.eqs.iter().filter(|e| e.det) {
                vs.clear();
                vs.extend(grp.sites.iter().zip(&eq.letters).map(|(&k, &l)| factors[k].mats[l as usize]));
                sum += eq.alpha * contract(&grp.moment, &vs);
                count += 1;
            }
        }
        (count > 0).then(|| sum / count as f64)
    }

    fn cost(&self, params: &[C64], buf: &mut Vec<C64>) -> f64 {
        buf.clear();
        self.eval(params, buf);
        buf.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Normal equations `JᴴJ` and `Jᴴr` at `params`, plus the cost `‖r‖²`.
    fn normal_equations(&self, params: &[C64]) -> (DMatrix<C64>, DVector<C64>, f64) {
        let nu = self.n_unknowns();
        let dpos = SITE_PARAMS * self.n;
        let (blocks, det) = unpack(params);
        let factors: Vec<SiteFactors> = blocks.iter().map(site_factors).collect();
        let mut jtj = DMatrix::from_element(nu, nu, ZERO);
        let mut jtr = DVector::from_element(nu, ZERO);
        let mut cost = 0.0;
        let mut scratch = Scratch::default();
        let mut vs: Vec<Flat> = Vec::new();
        let mut envs: Vec<Flat> = Vec::new();
        let mut idx: Vec<usize> = Vec::new();
        let mut val: Vec<C64> = Vec::new();
        let accumulate = |idx: &[usize], val: &[C64], r: C64, jtj: &mut DMatrix<C64>, jtr: &mut DVector<C64>| {
            for (a, &ia) in idx.iter().enumerate() {
                let ca = val[a].conj();
                jtr[ia] += ca * r;
                for (b, &ib) in idx.iter().enumerate() {
                    jtj[(ia, ib)] += ca * val[b];
                }
            }
        };
        for grp in &self.groups {
            let m = grp.sites.len();
            envs.resize(m, [ZERO; 4]);
            for eq in &grp.eqs {
                vs.clear();
                vs.extend(grp.sites.iter().zip(&eq.letters).map(|(&k, &l)| factors[k].mats[l as usize]));
                let v = eq.alpha * contract_with_envs(&grp.moment, &vs, &mut envs, &mut scratch);
                let r = if eq.det { v - det } else { v };
                cost += r.norm_sqr();
                idx.clear();
                val.clear();
                for (t, (&k, &l)) in grp.sites.iter().zip(&eq.letters).enumerate() {
                    let env = &envs[t];
                    for p in 0..SITE_PARAMS {
                        let dm = &factors[k].dmats[l as usize][p];
                        let d = env[0] * dm[0] + env[1] * dm[1] + env[2] * dm[2] + env[3] * dm[3];
                        if d != ZERO {
                            idx.push(SITE_PARAMS * k + p);
                            val.push(eq.alpha * d);
                        }
                    }
                }
                if eq.det {
                    idx.push(dpos);
                    val.push(-ONE);
                }
                accumulate(&idx, &val, r, &mut jtj, &mut jtr);
            }
        }
        let mut side = Vec::with_capacity(3);
        for k in 0..self.n {
            let p = &params[SITE_PARAMS * k..SITE_PARAMS * (k + 1)];
            side.clear();
            side_residuals(p, &mut side);
            let [za, zb, zc, xa, xb, xc] = [p[0], p[1], p[2], p[3], p[4], p[5]];
            let two = C64::new(2.0, 0.0);
            let rows: [[C64; SITE_PARAMS]; 3] = [
                [two * za, zc, zb, ZERO, ZERO, ZERO],
                [ZERO, ZERO, ZERO, two * xa, xc, xb],
                [xa, xc * 0.5, xb * 0.5, za, zc * 0.5, zb * 0.5],
            ];
            for (row, &r) in rows.iter().zip(&side) {
                cost += r.norm_sqr();
                idx.clear();
                val.clear();
                for (p, &d) in row.iter().enumerate() {
                    idx.push(SITE_PARAMS * k + p);
                    val.push(d);
                }
                accumulate(&idx, &val, r, &mut jtj, &mut jtr);
            }
        }
        if let Some((e, scale)) = self.det_anchor {
            let r = (det * det - e) / scale;
            cost += r.norm_sqr();
            accumulate(&[dpos], &[det * 2.0 / scale], r, &mut jtj, &mut jtr);
        }
        (jtj, jtr, cost)
    }
}

fn side_residuals(p: &[C64], r: &mut Vec<C64>) {
    let [za, zb, zc, xa, xb, xc] = [p[0], p[1], p[2], p[3], p[4], p[5]];
    r.push(za * za + zb * zc - ONE);
    r.push(xa * xa + xb * xc - ONE);
    r.push(za * xa + (zb * xc + zc * xb) * 0.5);
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct LmOptions {
    pub max_iterations: usize,
    /// Stop once `‖r‖` falls below this.
    pub target: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct LmResult {
    pub params: Vec<C64>,
    pub residual: f64,
}

/// Damped Gauss–Newton on the holomorphic residual map.
pub(crate) fn levenberg_marquardt(sys: &PolynomialSystem, start: Vec<C64>, opts: LmOptions) -> LmResult {
    let nu = sys.n_unknowns();
    let mut x = start;
    let mut buf = Vec::with_capacity(sys.n_equations());
    let mut cost = sys.cost(&x, &mut buf);
    let mut mu = -1.0f64;
    let mut iterations = 0;
    let mut slow = 0;
    while iterations < opts.max_iterations && cost.sqrt() > opts.target && cost.is_finite() {
        iterations += 1;
        let (jtj, jtr, _) = sys.normal_equations(&x);
        if mu < 0.0 {
            let dmax = (0..nu).map(|i| jtj[(i, i)].re).fold(0.0, f64::max);
            mu = 1e-3 * dmax.max(1e-12);
        }
        let mut accepted = false;
        while mu < 1e20 {
            let mut a = jtj.clone();
            for i in 0..nu {
                a[(i, i)] += C64::new(mu, 0.0);
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-&jtr)),
                None => {
                    mu *= 4.0;
                    continue;
                }
            };
            let trial: Vec<C64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let c = sys.cost(&trial, &mut buf);
            if c.is_finite() && c < cost {
                slow = if c > 0.999 * cost { slow + 1 } else { 0 };
                x = trial;
                cost = c;
                mu = (mu / 3.0).max(1e-300);
                accepted = true;
                break;
            }
            mu *= 4.0;
        }
        if !accepted || slow >= 25 {
            break;
        }
    }
    LmResult {
        params: x,
        residual: cost.sqrt(),
    }
}
