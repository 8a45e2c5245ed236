//! Exact n-qubit Pauli algebra in binary symplectic form.
//!
//! A [`PauliWord`] stores `i^phase · ⊗_k P_k`, where the local letter at site
//! `k` is read off the bit pair `(x_k, z_k)`: `(0,0)=I`, `(1,0)=X`, `(1,1)=Y`,
//! `(0,1)=Z`. The pair `(1,1)` denotes the Hermitian matrix `Y` itself, so the
//! phase is carried only by the global exponent.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bits::{mask, BitString, SiteSet, MAX_SITES};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A fourth root of unity `i^k`, `k ∈ {0,1,2,3}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: u32) -> Phase {
        Phase((k % 4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn inverse(self) -> Phase {
        Phase((4 - self.0) % 4)
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        }
    }

    /// Textual prefix used when rendering words: `""`, `"i"`, `"-"`, `"-i"`.
    pub fn prefix(self) -> &'static str {
        ["", "i", "-", "-i"][self.0 as usize]
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["1", "i", "-1", "-i"][self.0 as usize])
    }
}

impl FromStr for Phase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Phase> {
        match s {
            "1" | "+1" => Ok(Phase::ONE),
            "i" | "+i" => Ok(Phase::I),
            "-1" => Ok(Phase::MINUS_ONE),
            "-i" => Ok(Phase::MINUS_I),
            _ => Err(Error::parse(0, format!("not a fourth root of unity: {s:?}"))),
        }
    }
}

impl Serialize for Phase {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Phase {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Single-site Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub const NON_IDENTITY: [Letter; 3] = [Letter::X, Letter::Y, Letter::Z];

    pub fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }

    /// Row-major 2×2 matrix of the letter.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        match self {
            Letter::I => [[ONE, ZERO], [ZERO, ONE]],
            Letter::X => [[ZERO, ONE], [ONE, ZERO]],
            Letter::Y => [[ZERO, -I], [I, ZERO]],
            Letter::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// An n-qubit Pauli operator `i^phase · ⊗_k P_k` with `n ≤ 64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliWord {
    n: usize,
    x: u64,
    z: u64,
    phase: Phase,
}

impl PauliWord {
    pub fn identity(n: usize) -> Result<Self> {
        Self::from_parts(n, 0, 0, Phase::ONE)
    }

    pub fn from_parts(n: usize, x: u64, z: u64, phase: Phase) -> Result<Self> {
        if n > MAX_SITES {
            return Err(Error::Capacity {
                what: "qubits in a Pauli word",
                requested: n as u128,
                limit: MAX_SITES as u128,
            });
        }
        if (x | z) & !mask(n) != 0 {
            return Err(Error::InvalidInput(format!(
                "Pauli bits exceed word length {n}"
            )));
        }
        Ok(Self { n, x, z, phase })
    }

    /// `Y` on every site, phase 1.
    pub fn all_y(n: usize) -> Result<Self> {
        Self::from_parts(n, mask(n), mask(n), Phase::ONE)
    }

    /// `Z` on the sites set in `j`, identity elsewhere.
    pub fn z_on(j: BitString) -> Self {
        Self {
            n: j.len(),
            x: 0,
            z: j.bits(),
            phase: Phase::ONE,
        }
    }

    pub fn single(n: usize, k: usize, letter: Letter) -> Result<Self> {
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, len: n });
        }
        let (x, z) = letter.bits();
        Self::from_parts(n, (x as u64) << k, (z as u64) << k, Phase::ONE)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_bits(&self) -> BitString {
        BitString::from_raw(self.n, self.x)
    }

    pub fn z_bits(&self) -> BitString {
        BitString::from_raw(self.n, self.z)
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(self, phase: Phase) -> Self {
        Self { phase, ..self }
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of `Y` letters.
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Exact operator product `self · rhs`.
    pub fn try_mul(&self, rhs: &PauliWord) -> Result<PauliWord> {
        Error::check_dim(self.n, rhs.n)?;
        Ok(self.mul_unchecked(rhs))
    }

    pub(crate) fn mul_unchecked(&self, rhs: &PauliWord) -> PauliWord {
        // Rewrite each factor as i^{p + |x∧z|} X^x Z^z, then commute the Z
        // part of the left factor through the X part of the right one.
        let x = self.x ^ rhs.x;
        let z = self.z ^ rhs.z;
        let exp = self.phase.0 as u32
            + (self.x & self.z).count_ones()
            + rhs.phase.0 as u32
            + (rhs.x & rhs.z).count_ones()
            + 2 * (self.z & rhs.x).count_ones()
            + 3 * (x & z).count_ones();
        PauliWord {
            n: self.n,
            x,
            z,
            phase: Phase::from_exponent(exp),
        }
    }

    /// Symplectic inner product: `true` iff the two words anticommute.
    pub fn anticommutes(&self, rhs: &PauliWord) -> bool {
        ((self.x & rhs.z).count_ones() + (self.z & rhs.x).count_ones()) % 2 == 1
    }

    pub fn site_label(&self, k: usize) -> Result<Letter> {
        if k >= self.n {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: self.n,
            });
        }
        Ok(self.letter(k))
    }

    pub(crate) fn letter(&self, k: usize) -> Letter {
        Letter::from_bits((self.x >> k) & 1 == 1, (self.z >> k) & 1 == 1)
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..self.n).map(|k| self.letter(k)).collect()
    }

    pub fn support(&self) -> SiteSet {
        SiteSet(self.x | self.z)
    }

    pub fn weight(&self) -> usize {
        self.support().len()
    }

    /// Amplitude map on computational basis states: `P|c⟩ = coeff · |c ⊕ flip⟩`,
    /// with indices in the state-vector ordering (site 0 most significant).
    pub(crate) fn basis_action(&self) -> (usize, usize, Complex64) {
        let n = self.n;
        let mut flip = 0usize;
        let mut zmask = 0usize;
        for k in 0..n {
            let bit = 1usize << (n - 1 - k);
            if (self.x >> k) & 1 == 1 {
                flip |= bit;
            }
            if (self.z >> k) & 1 == 1 {
                zmask |= bit;
            }
        }
        let base = Phase::from_exponent(self.phase.0 as u32 + self.y_count()).to_complex();
        (flip, zmask, base)
    }

    /// Dense `2^n × 2^n` matrix of the word. Refuses `n > dense_limit`.
    pub fn dense(&self, dense_limit: usize) -> Result<DMatrix<Complex64>> {
        if self.n > dense_limit {
            return Err(Error::Capacity {
                what: "qubits for a dense Pauli matrix",
                requested: self.n as u128,
                limit: dense_limit as u128,
            });
        }
        let dim = 1usize << self.n;
        let (flip, zmask, base) = self.basis_action();
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for c in 0..dim {
            let sign = if (c & zmask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            m[(c ^ flip, c)] = base * sign;
        }
        Ok(m)
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.phase.prefix())?;
        for k in 0..self.n {
            write!(f, "{}", self.letter(k).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (phase, body, offset) = if let Some(rest) = s.strip_prefix("-i") {
            (Phase::MINUS_I, rest, 2)
        } else if let Some(rest) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, rest, 1)
        } else if let Some(rest) = s.strip_prefix('i') {
            (Phase::I, rest, 1)
        } else {
            (Phase::ONE, s, 0)
        };
        let mut x = 0u64;
        let mut z = 0u64;
        let mut n = 0usize;
        for (pos, ch) in body.chars().enumerate() {
            let letter = Letter::from_char(ch)
                .ok_or_else(|| Error::parse(offset + pos, format!("unexpected character {ch:?}")))?;
            if pos >= MAX_SITES {
                return Err(Error::Capacity {
                    what: "qubits in a Pauli word",
                    requested: body.chars().count() as u128,
                    limit: MAX_SITES as u128,
                });
            }
            let (bx, bz) = letter.bits();
            x |= (bx as u64) << pos;
            z |= (bz as u64) << pos;
            n += 1;
        }
        PauliWord::from_parts(n, x, z, phase)
    }
}

impl Serialize for PauliWord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliWord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Operator product `a · b`; fails on a length mismatch.
pub fn pauli_mul(a: &PauliWord, b: &PauliWord) -> Result<PauliWord> {
    a.try_mul(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> PauliWord {
        s.parse().unwrap()
    }

    fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        a.kronecker(b)
    }

    fn letter_dense(l: Letter) -> DMatrix<Complex64> {
        let m = l.matrix();
        DMatrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]])
    }

    #[test]
    fn cluster_products_carry_printed_signs() {
        assert_eq!(pauli_mul(&w("XZI"), &w("ZXZ")).unwrap(), w("YYZ"));
        let mut acc = PauliWord::identity(5).unwrap();
        for g in ["XZIII", "ZXZII", "IZXZI", "IIZXZ", "IIIZX"] {
            acc = pauli_mul(&acc, &w(g)).unwrap();
        }
        assert_eq!(acc.to_string(), "-YXXXY");
        assert_eq!(acc.phase().exponent(), 2);
    }

    #[test]
    fn identity_is_neutral() {
        let p = w("-iXYZ");
        assert_eq!(pauli_mul(&PauliWord::identity(3).unwrap(), &p).unwrap(), p);
    }

    #[test]
    fn size_mismatch_is_a_dimension_error() {
        assert!(matches!(
            pauli_mul(&w("XX"), &w("XXX")),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn site_labels_and_support() {
        assert_eq!(w("-YXY").site_label(1).unwrap(), Letter::X);
        assert_eq!(PauliWord::identity(4).unwrap().site_label(3).unwrap(), Letter::I);
        assert_eq!(w("YXXYZ").site_label(4).unwrap(), Letter::Z);
        assert!(w("YXY").site_label(3).is_err());

        assert_eq!(w("YXXYZ").support().to_vec(), vec![0, 1, 2, 3, 4]);
        assert_eq!(w("YXXYZ").weight(), 5);
        assert_eq!(PauliWord::identity(3).unwrap().weight(), 0);
        assert_eq!(w("IIYII").support().to_vec(), vec![2]);
    }

    #[test]
    fn single_qubit_dense_matrices() {
        let x = w("X").dense(10).unwrap();
        assert_eq!(x, DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]));
        let y = w("Y").dense(10).unwrap();
        assert_eq!(y, DMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]));
    }

    #[test]
    fn dense_matches_kronecker_oracle() {
        let expected = kron(
            &kron(&letter_dense(Letter::Y), &letter_dense(Letter::Y)),
            &letter_dense(Letter::Z),
        );
        assert_eq!(w("YYZ").dense(10).unwrap(), expected);
        assert!(matches!(
            PauliWord::identity(11).unwrap().dense(10),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn string_round_trip_all_prefixes() {
        for s in ["XYZ", "iXYZ", "-XYZ", "-iXYZ", "", "I"] {
            assert_eq!(w(s).to_string(), s);
        }
        assert!(matches!(
            "XQ".parse::<PauliWord>(),
            Err(Error::Parse { position: 1, .. })
        ));
    }

    fn arb_word(n: usize) -> impl Strategy<Value = PauliWord> {
        (0u64..(1 << n), 0u64..(1 << n), 0u32..4)
            .prop_map(move |(x, z, p)| PauliWord::from_parts(n, x, z, Phase::from_exponent(p)).unwrap())
    }

    proptest! {
        #[test]
        fn multiplication_is_associative(a in arb_word(6), b in arb_word(6), c in arb_word(6)) {
            let ab_c = pauli_mul(&pauli_mul(&a, &b).unwrap(), &c).unwrap();
            let a_bc = pauli_mul(&a, &pauli_mul(&b, &c).unwrap()).unwrap();
            prop_assert_eq!(ab_c, a_bc);
        }

        #[test]
        fn squares_are_plus_or_minus_identity(a in arb_word(8)) {
            let sq = pauli_mul(&a, &a).unwrap();
            prop_assert!(sq.is_identity_up_to_phase());
            prop_assert!(sq.phase().exponent() % 2 == 0);
        }

        #[test]
        fn commutation_sign_is_symplectic(a in arb_word(7), b in arb_word(7)) {
            let ab = pauli_mul(&a, &b).unwrap();
            let ba = pauli_mul(&b, &a).unwrap();
            let expected = if a.anticommutes(&b) { Phase::MINUS_ONE } else { Phase::ONE };
            prop_assert_eq!(ab, ba.with_phase(ba.phase() * expected));
        }

        #[test]
        fn dense_is_a_homomorphism(a in arb_word(4), b in arb_word(4)) {
            let lhs = pauli_mul(&a, &b).unwrap().dense(10).unwrap();
            let rhs = a.dense(10).unwrap() * b.dense(10).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn transpose_sign_counts_y_letters(a in arb_word(4)) {
            let d = a.dense(10).unwrap();
            let sign = if a.y_count() % 2 == 1 { -1.0 } else { 1.0 };
            prop_assert_eq!(d.transpose(), d * Complex64::new(sign, 0.0));
        }

        #[test]
        fn text_round_trip(a in arb_word(9)) {
            prop_assert_eq!(a.to_string().parse::<PauliWord>().unwrap(), a);
        }
    }
}
