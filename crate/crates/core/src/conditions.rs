//! Stabilizer conditions for `ψ = S|g⟩`, grouped by support.
//!
//! For a stabilizer element `σ_b` and a bitstring `j`, the word
//! `q = Y_V · σ_b · Z_j` (phase included) yields the condition
//!
//! ```text
//! alpha · ψᵀ (Y_V ⊗ L̃_J) ψ = det(S) · [j = 0]
//! ```
//!
//! where `alpha = i^{phase(q)}`, `J` is the support of `q`, and `L̃_k =
//! S_k L_k S_k⁻¹` for the letter `L_k` of `q` on site `k`. The operator on site
//! `k ∈ J` is therefore `Y·L̃_k`; off `J` it is `Y`.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::bits::{subsets_of_size, BitString, SiteSet};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::pauli::{Letter, PauliWord, Phase};

/// Default cap on the number of enumerated conditions.
pub const DEFAULT_ENUM_LIMIT: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rhs {
    Zero,
    DetS,
}

impl Rhs {
    pub fn as_str(self) -> &'static str {
        match self {
            Rhs::Zero => "zero",
            Rhs::DetS => "det_s",
        }
    }
}

impl Serialize for Rhs {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    I,
    II,
    III,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::I => "I",
            Category::II => "II",
            Category::III => "III",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Category {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "1" => Ok(Category::I),
            "II" | "2" => Ok(Category::II),
            "III" | "3" => Ok(Category::III),
            _ => Err(Error::parse(0, format!("unknown category {s:?}"))),
        }
    }
}

impl Serialize for Category {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Condition {
    pub b: BitString,
    pub j: BitString,
    /// `Y_V · σ_b · Z_j` with its phase.
    pub q: PauliWord,
    pub support: SiteSet,
    /// Letters of `q` on the support, in ascending site order.
    pub labels: Vec<Letter>,
    pub rhs: Rhs,
    pub alpha: Phase,
}

impl Condition {
    /// Phase-free letters of `q` across all sites, e.g. `"IIX"`.
    pub fn label_word(&self) -> String {
        self.q.with_phase(Phase::ONE).to_string()
    }

    /// Right-hand side for the bare value `ψᵀ(…)ψ`, i.e. with `alpha`
    /// moved across: `"0"`, `"detS"`, `"i*detS"`, `"-detS"` or `"-i*detS"`.
    pub fn rhs_text(&self) -> String {
        match self.rhs {
            Rhs::Zero => "0".into(),
            Rhs::DetS => match self.alpha.inverse().prefix() {
                "" => "detS".into(),
                "-" => "-detS".into(),
                p => format!("{p}*detS"),
            },
        }
    }
}

#[derive(Serialize)]
struct ConditionJson<'a> {
    b: BitString,
    j: BitString,
    labels: String,
    alpha: &'a Phase,
    rhs: Rhs,
    rhs_value: String,
}

impl Serialize for Condition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ConditionJson {
            b: self.b,
            j: self.j,
            labels: self.label_word(),
            alpha: &self.alpha,
            rhs: self.rhs,
            rhs_value: self.rhs_text(),
        }
        .serialize(s)
    }
}

/// All conditions sharing one exact support. Category I groups produced by
/// [`scan`] for nonempty supports carry no members.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionGroup {
    pub support: SiteSet,
    pub category: Category,
    pub conditions: Vec<Condition>,
}

impl ConditionGroup {
    pub fn det_members(&self) -> impl Iterator<Item = &Condition> {
        self.conditions.iter().filter(|c| c.rhs == Rhs::DetS)
    }
}

pub fn derive_condition(g: &Graph, b: BitString, j: BitString) -> Result<Condition> {
    let n = g.n();
    Error::check_dim(n, b.len())?;
    Error::check_dim(n, j.len())?;
    let sigma = g.stabilizer_element(b)?;
    let q = PauliWord::all_y(n)?
        .mul_unchecked(&sigma)
        .mul_unchecked(&PauliWord::z_on(j));
    let support = q.support();
    Ok(Condition {
        b,
        j,
        q,
        support,
        labels: support.iter().map(|k| q.letter(k)).collect(),
        rhs: if j.bits() == 0 { Rhs::DetS } else { Rhs::Zero },
        alpha: q.phase(),
    })
}

fn check_support(g: &Graph, support: SiteSet) -> Result<()> {
    if let Some(k) = support.iter().find(|&k| k >= g.n()) {
        return Err(Error::IndexOutOfRange { index: k, len: g.n() });
    }
    Ok(())
}

/// Every `(b, j)` whose condition has support exactly `support`.
///
/// Off the support, `q` must be the identity, which forces `b_k = 1` and
/// `j_k = 1 ⊕ (Γb)_k`. On the support, each non-identity letter `(x, z)`
/// gives `b_k = 1 ⊕ x` and `j_k = 1 ⊕ (Γb)_k ⊕ z`. Members are listed with
/// the letters on the lowest site varying slowest, in the order X, Y, Z.
pub fn enumerate_support(g: &Graph, support: SiteSet) -> Result<ConditionGroup> {
    enumerate_support_limited(g, support, DEFAULT_ENUM_LIMIT)
}

pub fn enumerate_support_limited(g: &Graph, support: SiteSet, limit: u128) -> Result<ConditionGroup> {
    check_support(g, support)?;
    let n = g.n();
    let m = support.len();
    let requested = 4u128.pow(m as u32);
    if requested > limit {
        return Err(Error::Capacity {
            what: "conditions in one support group",
            requested,
            limit,
        });
    }
    let sites = support.to_vec();
    let full = crate::bits::mask(n);
    let mut conditions = Vec::with_capacity(3usize.pow(m as u32));
    for combo in 0..3usize.pow(m as u32) {
        let mut xs = 0u64;
        let mut zs = 0u64;
        let mut rest = combo;
        for &k in sites.iter().rev() {
            let (x, z) = Letter::NON_IDENTITY[rest % 3].bits();
            rest /= 3;
            xs |= (x as u64) << k;
            zs |= (z as u64) << k;
        }
        let b = full ^ xs;
        let j = full ^ g.adj_times(b) ^ zs;
        let cond = derive_condition(g, BitString::from_raw(n, b), BitString::from_raw(n, j))?;
        debug_assert_eq!(cond.support, support);
        conditions.push(cond);
    }
    let mut group = ConditionGroup {
        support,
        category: Category::II,
        conditions,
    };
    group.category = classify_raw(n, &group);
    Ok(group)
}

fn classify_raw(n: usize, group: &ConditionGroup) -> Category {
    if (n - group.support.len()) % 2 == 1 {
        Category::I
    } else if group.det_members().next().is_some() {
        Category::III
    } else {
        Category::II
    }
}

/// Category of a populated group on an `n`-site graph.
pub fn classify(n: usize, group: &ConditionGroup) -> Result<Category> {
    if group.support.iter().any(|k| k >= n) {
        return Err(Error::InvalidInput("group support exceeds qubit count".into()));
    }
    Ok(classify_raw(n, group))
}

/// Groups with `|J| ≤ max_support` and `|J| ≡ n (mod 2)`, preceded by the
/// empty-support group (which is Category I when `n` is odd).
pub fn scan(g: &Graph, max_support: usize) -> Result<Vec<ConditionGroup>> {
    scan_limited(g, max_support, DEFAULT_ENUM_LIMIT)
}

pub fn scan_limited(g: &Graph, max_support: usize, limit: u128) -> Result<Vec<ConditionGroup>> {
    let n = g.n();
    if max_support > n {
        return Err(Error::InvalidInput(format!(
            "max support {max_support} exceeds qubit count {n}"
        )));
    }
    let sizes: Vec<usize> = (1..=max_support).filter(|s| (n - s) % 2 == 0).collect();
    scan_sizes(g, &sizes, limit)
}

/// Empty-support group followed by every support of the listed sizes.
pub(crate) fn scan_sizes(g: &Graph, sizes: &[usize], limit: u128) -> Result<Vec<ConditionGroup>> {
    let n = g.n();
    let mut requested = 1u128;
    for &s in sizes {
        requested += binomial(n, s) * 3u128.pow(s as u32);
    }
    if requested > limit {
        return Err(Error::Capacity {
            what: "conditions in scan",
            requested,
            limit,
        });
    }
    let mut out = vec![enumerate_support_limited(g, SiteSet::EMPTY, limit)?];
    let mut sorted: Vec<usize> = sizes.iter().copied().filter(|&s| s > 0).collect();
    sorted.sort_unstable();
    sorted.dedup();
    for s in sorted {
        for support in subsets_of_size(n, s) {
            out.push(enumerate_support_limited(g, support, limit)?);
        }
    }
    Ok(out)
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn sites(v: &[usize]) -> SiteSet {
        SiteSet::from_sites(v).unwrap()
    }

    #[test]
    fn empty_support_condition_on_three_path() {
        let g = Graph::path(3).unwrap();
        let c = derive_condition(&g, bs("111"), bs("010")).unwrap();
        assert!(c.support.is_empty());
        assert_eq!(c.rhs, Rhs::Zero);
    }

    #[test]
    fn x_condition_carries_minus_i_det() {
        let g = Graph::path(3).unwrap();
        let c = derive_condition(&g, bs("110"), bs("000")).unwrap();
        assert_eq!(c.support.to_vec(), vec![2]);
        assert_eq!(c.labels, vec![Letter::X]);
        assert_eq!(c.rhs, Rhs::DetS);
        // i · ψᵀ(Y ⊗ Y ⊗ YX̃)ψ = det S, i.e. the bilinear value is −i·det S.
        assert_eq!(c.alpha, Phase::I);
    }

    #[test]
    fn rhs_text_moves_alpha_across() {
        let g = Graph::path(3).unwrap();
        let mut c = derive_condition(&g, bs("110"), bs("000")).unwrap();
        assert_eq!(c.rhs_text(), "-i*detS");
        for (alpha, text) in [
            (Phase::ONE, "detS"),
            (Phase::I, "-i*detS"),
            (Phase::MINUS_ONE, "-detS"),
            (Phase::MINUS_I, "i*detS"),
        ] {
            c.alpha = alpha;
            assert_eq!(c.rhs_text(), text);
        }
        c.rhs = Rhs::Zero;
        assert_eq!(c.rhs_text(), "0");
    }

    #[test]
    fn five_path_last_site_z_condition() {
        let g = Graph::path(5).unwrap();
        let c = derive_condition(&g, bs("11111"), bs("01111")).unwrap();
        assert_eq!(c.support.to_vec(), vec![4]);
        assert_eq!(c.labels, vec![Letter::Z]);
        assert_eq!(c.rhs, Rhs::Zero);
    }

    #[test]
    fn three_path_site_two_group() {
        let g = Graph::path(3).unwrap();
        let grp = enumerate_support(&g, sites(&[2])).unwrap();
        let labels: Vec<Letter> = grp.conditions.iter().map(|c| c.labels[0]).collect();
        assert_eq!(labels, vec![Letter::X, Letter::Y, Letter::Z]);
        let det: Vec<Letter> = grp.det_members().map(|c| c.labels[0]).collect();
        assert_eq!(det, vec![Letter::X]);
        assert_eq!(grp.category, Category::III);
    }

    #[test]
    fn five_path_single_sites() {
        let g = Graph::path(5).unwrap();
        let last = enumerate_support(&g, sites(&[4])).unwrap();
        assert_eq!(last.conditions.len(), 3);
        assert!(last.conditions.iter().all(|c| c.rhs == Rhs::Zero));
        assert_eq!(last.category, Category::II);

        let mid = enumerate_support(&g, sites(&[2])).unwrap();
        assert_eq!(mid.category, Category::III);
        let det: Vec<&Condition> = mid.det_members().collect();
        assert_eq!(det.len(), 1);
        assert_eq!(det[0].labels, vec![Letter::Y]);
        assert_eq!(det[0].alpha, Phase::ONE);
    }

    #[test]
    fn parity_rule_gives_category_one() {
        let g = Graph::path(3).unwrap();
        let grp = enumerate_support(&g, sites(&[0, 1])).unwrap();
        assert_eq!(grp.category, Category::I);
        assert_eq!(classify(3, &grp).unwrap(), Category::I);
    }

    #[test]
    fn three_path_scan() {
        let g = Graph::path(3).unwrap();
        let groups = scan(&g, 1).unwrap();
        let supports: Vec<Vec<usize>> = groups.iter().map(|g| g.support.to_vec()).collect();
        assert_eq!(supports, vec![vec![], vec![0], vec![1], vec![2]]);
        assert_eq!(groups[0].conditions.len(), 1);
        assert_eq!(groups[0].category, Category::I);
        let mut det = Vec::new();
        for grp in &groups[1..] {
            assert_eq!(grp.conditions.len(), 3);
            for c in grp.det_members() {
                det.push((grp.support.to_vec()[0], c.labels[0], c.alpha));
            }
        }
        assert_eq!(
            det,
            vec![(0, Letter::X, Phase::I), (1, Letter::Z, Phase::I), (2, Letter::X, Phase::I)]
        );
    }

    #[test]
    fn scan_sizes_follow_parity() {
        let g = Graph::path(5).unwrap();
        let groups = scan(&g, 3).unwrap();
        let sizes: Vec<usize> = groups.iter().map(|g| g.support.len()).collect();
        assert_eq!(sizes.len(), 1 + 5 + 10);
        assert!(sizes[1..].iter().all(|&s| s == 1 || s == 3));
        assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
        let single = scan(&Graph::empty(1).unwrap(), 1).unwrap();
        assert_eq!(single.len(), 2);
        assert_eq!(single[1].support.to_vec(), vec![0]);
    }

    #[test]
    fn scan_capacity() {
        let g = Graph::path(12).unwrap();
        assert!(matches!(scan_limited(&g, 12, 1000), Err(Error::Capacity { .. })));
        assert!(scan(&g, 13).is_err());
    }
}
