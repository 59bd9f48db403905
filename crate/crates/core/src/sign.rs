//! Sign calculus: arithmetic over the three-valued domain `{+, -, 0}`.
//!
//! A [`Sign`] abstracts a real number by its sign. Operations whose result
//! is not determined by the operand signs alone (such as `+` plus `-`)
//! return the indefinite set `{+, -, 0}`, so the general value of a
//! computation is a [`SignSet`] — a nonempty subset of the three signs.
//! A [`SignVec`] is a 3-vector of sign sets and denotes, via the Cartesian
//! product of its components, a set of definite sign vectors.
//!
//! All types are immutable `Copy` values and every operation is a pure
//! function, so the module is safe to use from any number of threads.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Errors from quantization and sign parsing.
#[derive(Debug, Error, PartialEq)]
pub enum SignError {
    /// Quantization input had a NaN or infinite component.
    #[error("component {index} of {vector:?} is not finite")]
    NonFinite { index: usize, vector: [f64; 3] },
    /// Quantization dead-band must be a finite, nonnegative number.
    #[error("epsilon must be finite and >= 0, got {0}")]
    BadEpsilon(f64),
    /// A sign or sign-set encoding could not be parsed.
    #[error("invalid sign encoding {0:?}")]
    BadEncoding(String),
}

/// The sign of a real number.
///
/// Ordering (`Plus < Minus < Zero`) matches the canonical text encoding
/// `+-0` and is used wherever a deterministic iteration order is needed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
    Zero,
}

impl Sign {
    /// All three signs in canonical order.
    pub const ALL: [Sign; 3] = [Sign::Plus, Sign::Minus, Sign::Zero];

    /// Sign of a finite real, with a dead-band: `|x| <= epsilon` maps to zero.
    pub fn of(x: f64, epsilon: f64) -> Sign {
        if x.abs() <= epsilon {
            Sign::Zero
        } else if x > 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// The sign of the negated number.
    pub fn inverse(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
            Sign::Zero => Sign::Zero,
        }
    }

    fn bit(self) -> u8 {
        match self {
            Sign::Plus => 0b001,
            Sign::Minus => 0b010,
            Sign::Zero => 0b100,
        }
    }

    fn glyph(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
            Sign::Zero => '0',
        }
    }
}

const PLUS_BIT: u8 = 0b001;
const MINUS_BIT: u8 = 0b010;
const ZERO_BIT: u8 = 0b100;
const ANY_BITS: u8 = 0b111;

/// Sign addition on definite operands (single-bit patterns). Opposite
/// signs are indefinite.
const fn add_bits(a: u8, b: u8) -> u8 {
    match (a, b) {
        (PLUS_BIT, MINUS_BIT) | (MINUS_BIT, PLUS_BIT) => ANY_BITS,
        (ZERO_BIT, ZERO_BIT) => ZERO_BIT,
        (PLUS_BIT, _) | (_, PLUS_BIT) => PLUS_BIT,
        _ => MINUS_BIT,
    }
}

const fn negate_bits(a: u8) -> u8 {
    (a & ZERO_BIT) | ((a & PLUS_BIT) << 1) | ((a & MINUS_BIT) >> 1)
}

/// Sign multiplication on definite operands; never indefinite.
const fn mul_bits(a: u8, b: u8) -> u8 {
    if a == ZERO_BIT || b == ZERO_BIT {
        ZERO_BIT
    } else if a == b {
        PLUS_BIT
    } else {
        MINUS_BIT
    }
}

const OP_ADD: u8 = 0;
const OP_SUB: u8 = 1;
const OP_MUL: u8 = 2;

/// Set-level operation table, indexed by the two operand bit patterns:
/// the union of the definite results over all member pairs. Every fold in
/// the engine goes through these 64-entry tables.
const fn build_lut(op: u8) -> [u8; 64] {
    let mut out = [0u8; 64];
    let mut a = 1u8;
    while a < 8 {
        let mut b = 1u8;
        while b < 8 {
            let mut acc = 0u8;
            let mut abit = 1u8;
            while abit < 8 {
                if a & abit != 0 {
                    let mut bbit = 1u8;
                    while bbit < 8 {
                        if b & bbit != 0 {
                            acc |= match op {
                                OP_ADD => add_bits(abit, bbit),
                                OP_SUB => add_bits(abit, negate_bits(bbit)),
                                _ => mul_bits(abit, bbit),
                            };
                        }
                        bbit <<= 1;
                    }
                }
                abit <<= 1;
            }
            out[((a as usize) << 3) | b as usize] = acc;
            b += 1;
        }
        a += 1;
    }
    out
}

static ADD_LUT: [u8; 64] = build_lut(OP_ADD);
static SUB_LUT: [u8; 64] = build_lut(OP_SUB);
static MUL_LUT: [u8; 64] = build_lut(OP_MUL);

fn lut_index(a: SignSet, b: SignSet) -> usize {
    ((a.0 as usize) << 3) | b.0 as usize
}

/// A nonempty subset of `{+, -, 0}`.
///
/// The indefinite result `*` is simply the full set. Singleton sets are the
/// canonical embedding of a [`Sign`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignSet(u8);

impl SignSet {
    pub const PLUS: SignSet = SignSet(0b001);
    pub const MINUS: SignSet = SignSet(0b010);
    pub const ZERO: SignSet = SignSet(0b100);
    /// The indefinite result `* = {+, -, 0}`.
    pub const ANY: SignSet = SignSet(0b111);
    /// Nonnegative signs `{+, 0}`, the range of the no-attraction rule.
    pub const NON_NEGATIVE: SignSet = SignSet(0b101);
    /// Nonpositive signs `{-, 0}`, the range of the vanishing-point rule.
    pub const NON_POSITIVE: SignSet = SignSet(0b110);

    /// Builds a set from the given signs. Returns `None` for the empty list.
    pub fn from_signs(signs: &[Sign]) -> Option<SignSet> {
        let mut bits = 0;
        for s in signs {
            bits |= s.bit();
        }
        (bits != 0).then_some(SignSet(bits))
    }

    pub fn contains(self, s: Sign) -> bool {
        self.0 & s.bit() != 0
    }

    pub fn is_singleton(self) -> bool {
        self.0.count_ones() == 1
    }

    /// The single member of a singleton set.
    pub fn as_sign(self) -> Option<Sign> {
        match self {
            SignSet::PLUS => Some(Sign::Plus),
            SignSet::MINUS => Some(Sign::Minus),
            SignSet::ZERO => Some(Sign::Zero),
            _ => None,
        }
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        false // the invariant: a SignSet is never empty
    }

    /// Members in canonical order.
    pub fn iter(self) -> impl Iterator<Item = Sign> {
        Sign::ALL.into_iter().filter(move |s| self.contains(*s))
    }

    pub fn union(self, other: SignSet) -> SignSet {
        SignSet(self.0 | other.0)
    }

    pub fn intersects(self, other: SignSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_subset(self, other: SignSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Whether some member of `self` is the negation of a nonzero member
    /// of `other`.
    pub fn opposes(self, other: SignSet) -> bool {
        self.0 & negate_bits(other.0 & (PLUS_BIT | MINUS_BIT)) != 0
    }

    /// Set-level sign addition: the union of the table results over all
    /// pairs of members.
    #[allow(clippy::should_implement_trait)] // the ops traits delegate here
    pub fn add(self, other: SignSet) -> SignSet {
        SignSet(ADD_LUT[lut_index(self, other)])
    }

    /// Set-level sign subtraction.
    #[allow(clippy::should_implement_trait)] // the ops traits delegate here
    pub fn sub(self, other: SignSet) -> SignSet {
        SignSet(SUB_LUT[lut_index(self, other)])
    }

    /// Set-level sign multiplication.
    #[allow(clippy::should_implement_trait)] // the ops traits delegate here
    pub fn mul(self, other: SignSet) -> SignSet {
        SignSet(MUL_LUT[lut_index(self, other)])
    }

    /// Element-wise negation.
    pub fn inverse(self) -> SignSet {
        SignSet(negate_bits(self.0))
    }
}

impl From<Sign> for SignSet {
    fn from(s: Sign) -> SignSet {
        SignSet(s.bit())
    }
}

impl std::ops::Add for SignSet {
    type Output = SignSet;
    fn add(self, rhs: SignSet) -> SignSet {
        SignSet::add(self, rhs)
    }
}

impl std::ops::Sub for SignSet {
    type Output = SignSet;
    fn sub(self, rhs: SignSet) -> SignSet {
        SignSet::sub(self, rhs)
    }
}

impl std::ops::Mul for SignSet {
    type Output = SignSet;
    fn mul(self, rhs: SignSet) -> SignSet {
        SignSet::mul(self, rhs)
    }
}

impl fmt::Debug for SignSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SignSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(s) = self.as_sign() {
            return write!(f, "{}", s.glyph());
        }
        write!(f, "[")?;
        for s in self.iter() {
            write!(f, "{}", s.glyph())?;
        }
        write!(f, "]")
    }
}

impl FromStr for SignSet {
    type Err = SignError;

    /// Parses the canonical encoding: `+`, `-`, `0`, or a bracketed set such
    /// as `[+0]`. Member order inside brackets is not significant.
    fn from_str(s: &str) -> Result<SignSet, SignError> {
        let bad = || SignError::BadEncoding(s.to_string());
        let inner = match s {
            "+" => return Ok(SignSet::PLUS),
            "-" => return Ok(SignSet::MINUS),
            "0" => return Ok(SignSet::ZERO),
            _ => s.strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(bad)?,
        };
        let mut bits = 0;
        for c in inner.chars() {
            bits |= match c {
                '+' => Sign::Plus.bit(),
                '-' => Sign::Minus.bit(),
                '0' => Sign::Zero.bit(),
                _ => return Err(bad()),
            };
        }
        if bits == 0 {
            return Err(bad());
        }
        Ok(SignSet(bits))
    }
}

impl Serialize for SignSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SignSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<SignSet, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Quantization dead-band for converting numeric vectors to signs.
///
/// Components with `|c| <= epsilon` map to zero. The default of `1e-6`
/// suits simulator output; perception data wants a larger value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizationConfig {
    pub epsilon: f64,
}

impl QuantizationConfig {
    pub fn new(epsilon: f64) -> Result<QuantizationConfig, SignError> {
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(SignError::BadEpsilon(epsilon));
        }
        Ok(QuantizationConfig { epsilon })
    }

    /// Exact quantization: only `0.0` maps to zero.
    pub fn exact() -> QuantizationConfig {
        QuantizationConfig { epsilon: 0.0 }
    }
}

impl Default for QuantizationConfig {
    fn default() -> QuantizationConfig {
        QuantizationConfig { epsilon: 1e-6 }
    }
}

/// A 3-vector of sign sets.
///
/// Component-wise set semantics: the vector denotes the Cartesian product of
/// its components, a nonempty set of at most 27 definite sign vectors.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignVec {
    pub x: SignSet,
    pub y: SignSet,
    pub z: SignSet,
}

impl SignVec {
    pub const ZERO: SignVec = SignVec {
        x: SignSet::ZERO,
        y: SignSet::ZERO,
        z: SignSet::ZERO,
    };
    /// Every component indefinite.
    pub const ANY: SignVec = SignVec {
        x: SignSet::ANY,
        y: SignSet::ANY,
        z: SignSet::ANY,
    };

    pub fn new(x: impl Into<SignSet>, y: impl Into<SignSet>, z: impl Into<SignSet>) -> SignVec {
        SignVec { x: x.into(), y: y.into(), z: z.into() }
    }

    /// Quantizes a numeric 3-vector. Rejects NaN and infinite components.
    pub fn quantize(v: [f64; 3], cfg: QuantizationConfig) -> Result<SignVec, SignError> {
        for (index, c) in v.iter().enumerate() {
            if !c.is_finite() {
                return Err(SignError::NonFinite { index, vector: v });
            }
        }
        Ok(SignVec::new(
            Sign::of(v[0], cfg.epsilon),
            Sign::of(v[1], cfg.epsilon),
            Sign::of(v[2], cfg.epsilon),
        ))
    }

    pub fn components(self) -> [SignSet; 3] {
        [self.x, self.y, self.z]
    }

    /// All components are singletons, i.e. the vector denotes one element.
    pub fn is_definite(self) -> bool {
        self.x.is_singleton() && self.y.is_singleton() && self.z.is_singleton()
    }

    pub fn is_zero(self) -> bool {
        self == SignVec::ZERO
    }

    /// Number of definite vectors this vector denotes (at most 27).
    pub fn denotation_len(self) -> usize {
        self.x.len() * self.y.len() * self.z.len()
    }

    /// The denoted definite vectors, in canonical component order.
    pub fn denotation(self) -> impl Iterator<Item = SignVec> {
        self.x.iter().flat_map(move |a| {
            self.y.iter().flat_map(move |b| {
                self.z.iter().map(move |c| SignVec::new(a, b, c))
            })
        })
    }

    /// Whether `definite` is a member of this vector's denotation.
    pub fn admits(self, definite: SignVec) -> bool {
        definite.x.is_subset(self.x) && definite.y.is_subset(self.y) && definite.z.is_subset(self.z)
    }

    /// Component-wise sign addition.
    #[allow(clippy::should_implement_trait)] // the ops traits delegate here
    pub fn add(self, other: SignVec) -> SignVec {
        SignVec::new(self.x.add(other.x), self.y.add(other.y), self.z.add(other.z))
    }

    /// Component-wise sign subtraction.
    #[allow(clippy::should_implement_trait)] // the ops traits delegate here
    pub fn sub(self, other: SignVec) -> SignVec {
        SignVec::new(self.x.sub(other.x), self.y.sub(other.y), self.z.sub(other.z))
    }

    /// Sign-vector cross product, component layout as for numeric vectors.
    pub fn cross(self, other: SignVec) -> SignVec {
        let (u, v) = (self, other);
        SignVec::new(
            u.y.mul(v.z).sub(u.z.mul(v.y)),
            u.z.mul(v.x).sub(u.x.mul(v.z)),
            u.x.mul(v.y).sub(u.y.mul(v.x)),
        )
    }

    /// Sign-vector inner product.
    pub fn dot(self, other: SignVec) -> SignSet {
        self.x.mul(other.x).add(self.y.mul(other.y)).add(self.z.mul(other.z))
    }

    /// Component-wise negation.
    pub fn inverse(self) -> SignVec {
        SignVec::new(self.x.inverse(), self.y.inverse(), self.z.inverse())
    }

    /// Component-wise union.
    pub fn union(self, other: SignVec) -> SignVec {
        SignVec::new(self.x.union(other.x), self.y.union(other.y), self.z.union(other.z))
    }

    /// Left-to-right fold of [`SignVec::add`]; the empty sum is the zero
    /// vector, so that "no forces" entails "no change".
    pub fn sum<I: IntoIterator<Item = SignVec>>(vs: I) -> SignVec {
        vs.into_iter().fold(SignVec::ZERO, SignVec::add)
    }

    /// All 27 definite sign vectors, in canonical order.
    pub fn all_definite() -> impl Iterator<Item = SignVec> {
        SignVec::ANY.denotation()
    }
}

impl std::ops::Add for SignVec {
    type Output = SignVec;
    fn add(self, rhs: SignVec) -> SignVec {
        SignVec::add(self, rhs)
    }
}

impl std::ops::Sub for SignVec {
    type Output = SignVec;
    fn sub(self, rhs: SignVec) -> SignVec {
        SignVec::sub(self, rhs)
    }
}

impl fmt::Debug for SignVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SignVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.x, self.y, self.z)
    }
}

impl Serialize for SignVec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.x, self.y, self.z].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SignVec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<SignVec, D::Error> {
        let [x, y, z] = <[SignSet; 3]>::deserialize(deserializer)?;
        Ok(SignVec { x, y, z })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(s: &str) -> SignSet {
        s.parse().unwrap()
    }

    fn vec3(s: &str) -> SignVec {
        let parts: Vec<&str> = s.split(',').collect();
        SignVec::new(set(parts[0]), set(parts[1]), set(parts[2]))
    }

    /// The nine-cell tables exactly as published, frozen independently of
    /// the implementation. Rows are the left operand, columns +, 0, -.
    const ADD_REF: [[&str; 3]; 3] = [
        ["+", "+", "[+-0]"], // + row
        ["[+-0]", "-", "-"], // - row
        ["+", "0", "-"],     // 0 row
    ];
    const MUL_REF: [[&str; 3]; 3] = [
        ["+", "0", "-"],
        ["-", "0", "+"],
        ["0", "0", "0"],
    ];
    const SUB_REF: [[&str; 3]; 3] = [
        ["[+-0]", "+", "+"],
        ["-", "-", "[+-0]"],
        ["-", "0", "+"],
    ];

    const ROW_ORDER: [Sign; 3] = [Sign::Plus, Sign::Minus, Sign::Zero];
    const COL_ORDER: [Sign; 3] = [Sign::Plus, Sign::Zero, Sign::Minus];

    fn ref_cell(table: &[[&str; 3]; 3], a: Sign, b: Sign) -> SignSet {
        let r = ROW_ORDER.iter().position(|s| *s == a).unwrap();
        let c = COL_ORDER.iter().position(|s| *s == b).unwrap();
        set(table[r][c])
    }

    fn ref_op(table: &'static [[&str; 3]; 3]) -> impl Fn(SignSet, SignSet) -> SignSet {
        move |a, b| {
            let mut out: Option<SignSet> = None;
            for sa in a.iter() {
                for sb in b.iter() {
                    let cell = ref_cell(table, sa, sb);
                    out = Some(out.map_or(cell, |acc| acc.union(cell)));
                }
            }
            out.unwrap()
        }
    }

    fn all_sets() -> Vec<SignSet> {
        (1u8..8).map(SignSet).collect()
    }

    #[test]
    fn definite_tables_match_reference() {
        for a in Sign::ALL {
            for b in Sign::ALL {
                assert_eq!(SignSet::from(a).add(b.into()), ref_cell(&ADD_REF, a, b), "{a:?}+{b:?}");
                assert_eq!(SignSet::from(a).sub(b.into()), ref_cell(&SUB_REF, a, b), "{a:?}-{b:?}");
                assert_eq!(SignSet::from(a).mul(b.into()), ref_cell(&MUL_REF, a, b), "{a:?}*{b:?}");
            }
        }
    }

    #[test]
    fn set_ops_are_unions_of_table_rows() {
        let radd = ref_op(&ADD_REF);
        let rsub = ref_op(&SUB_REF);
        let rmul = ref_op(&MUL_REF);
        for a in all_sets() {
            for b in all_sets() {
                assert_eq!(a.add(b), radd(a, b), "{a} + {b}");
                assert_eq!(a.sub(b), rsub(a, b), "{a} - {b}");
                assert_eq!(a.mul(b), rmul(a, b), "{a} * {b}");
            }
        }
    }

    #[test]
    fn spec_cases() {
        assert_eq!(set("+").add(set("-")), SignSet::ANY);
        assert_eq!(set("0").add(set("0")), SignSet::ZERO);
        assert_eq!(set("[+0]").add(set("-")), SignSet::ANY);
        assert_eq!(set("+").sub(set("+")), SignSet::ANY);
        assert_eq!(set("0").sub(set("-")), SignSet::PLUS);
        for s in Sign::ALL {
            assert_eq!(SignSet::from(s).sub(SignSet::ZERO), SignSet::from(s));
        }
        assert_eq!(set("-").mul(set("-")), SignSet::PLUS);
        for s in all_sets() {
            assert_eq!(SignSet::ZERO.mul(s), SignSet::ZERO);
        }
        assert_eq!(set("[+-]").mul(set("+")), set("[+-]"));
    }

    #[test]
    fn monotone_in_both_operands() {
        let ops: [fn(SignSet, SignSet) -> SignSet; 3] = [SignSet::add, SignSet::sub, SignSet::mul];
        for op in ops {
            for a in all_sets() {
                for a2 in all_sets() {
                    if !a.is_subset(a2) {
                        continue;
                    }
                    for b in all_sets() {
                        assert!(op(a, b).is_subset(op(a2, b)));
                        assert!(op(b, a).is_subset(op(b, a2)));
                    }
                }
            }
        }
    }

    #[test]
    fn add_commutative_associative() {
        for a in all_sets() {
            for b in all_sets() {
                assert_eq!(a.add(b), b.add(a));
                for c in all_sets() {
                    assert_eq!(a.add(b).add(c), a.add(b.add(c)));
                }
            }
        }
    }

    #[test]
    fn sign_inverse_is_involution() {
        for s in Sign::ALL {
            assert_eq!(s.inverse().inverse(), s);
        }
        for s in all_sets() {
            assert_eq!(s.inverse().inverse(), s);
        }
    }

    #[test]
    fn vector_examples() {
        // Unit-axis cross product agrees with e_x x e_y = e_z.
        let ex = vec3("+,0,0");
        let ey = vec3("0,+,0");
        assert_eq!(ex.cross(ey), vec3("0,0,+"));
        // Zero vector is the additive identity and annihilates cross products.
        for v in SignVec::all_definite() {
            assert_eq!(SignVec::ZERO.add(v), v);
            assert_eq!(SignVec::ZERO.cross(v), SignVec::ZERO);
            // v x v always admits the zero vector.
            assert!(v.cross(v).admits(SignVec::ZERO));
        }
        assert_eq!(vec3("+,0,0").add(vec3("-,0,0")), vec3("[+-0],0,0"));
        assert_eq!(vec3("+,+,0").add(vec3("+,-,0")), vec3("+,[+-0],0"));
        assert_eq!(ex.dot(ex), SignSet::PLUS);
        assert_eq!(ex.dot(ey), SignSet::ZERO);
        assert_eq!(vec3("+,+,0").dot(vec3("+,-,0")), SignSet::ANY);
        assert_eq!(vec3("+,-,0").inverse(), vec3("-,+,0"));
        assert_eq!(SignVec::ZERO.inverse(), SignVec::ZERO);
        assert_eq!(vec3("[+0],[+0],[+0]").inverse(), vec3("[-0],[-0],[-0]"));
    }

    #[test]
    fn big_sum_examples() {
        assert_eq!(SignVec::sum([]), SignVec::ZERO);
        assert_eq!(SignVec::sum([vec3("+,0,0")]), vec3("+,0,0"));
        assert_eq!(
            SignVec::sum([vec3("+,0,0"), vec3("-,0,0"), vec3("0,0,-")]),
            vec3("[+-0],0,-")
        );
    }

    #[test]
    fn quantize_examples() {
        let eps = QuantizationConfig::new(0.05).unwrap();
        assert_eq!(SignVec::quantize([3.2, -0.1, 0.0], eps).unwrap(), vec3("+,-,0"));
        assert_eq!(
            SignVec::quantize([0.0, 0.0, 0.0], QuantizationConfig::default()).unwrap(),
            SignVec::ZERO
        );
        assert_eq!(SignVec::quantize([0.04, -0.04, 1.0], eps).unwrap(), vec3("0,0,+"));
        assert!(matches!(
            SignVec::quantize([f64::NAN, 0.0, 0.0], eps),
            Err(SignError::NonFinite { index: 0, .. })
        ));
        assert!(SignVec::quantize([0.0, f64::INFINITY, 0.0], eps).is_err());
        assert!(QuantizationConfig::new(-1.0).is_err());
        assert!(QuantizationConfig::new(f64::NAN).is_err());
    }

    #[test]
    fn denotation_counts() {
        assert_eq!(SignVec::ANY.denotation_len(), 27);
        assert_eq!(SignVec::all_definite().count(), 27);
        assert_eq!(vec3("[+-0],+,+").denotation().count(), 3);
        assert!(vec3("[+-0],+,+").admits(vec3("0,+,+")));
        assert!(!vec3("[+-0],+,+").admits(vec3("0,0,+")));
    }

    #[test]
    fn canonical_encoding() {
        assert_eq!(vec3("+,[-0],0").to_string(), "(+,[-0],0)");
        assert_eq!(set("[0+]"), set("[+0]"));
        assert_eq!(set("[+0]").to_string(), "[+0]");
        assert_eq!(SignSet::ANY.to_string(), "[+-0]");
        assert!("[]".parse::<SignSet>().is_err());
        assert!("*".parse::<SignSet>().is_err());
        assert!("".parse::<SignSet>().is_err());
        let json = serde_json::to_string(&vec3("+,[-0],0")).unwrap();
        assert_eq!(json, r#"["+","[-0]","0"]"#);
        let back: SignVec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vec3("+,[-0],0"));
    }

    fn arb_set() -> impl Strategy<Value = SignSet> {
        (1u8..8).prop_map(SignSet)
    }

    fn arb_vec() -> impl Strategy<Value = SignVec> {
        (arb_set(), arb_set(), arb_set()).prop_map(|(x, y, z)| SignVec { x, y, z })
    }

    /// Mix of exact zeros and small magnitudes so every sign occurs.
    fn arb_component() -> impl Strategy<Value = f64> {
        prop_oneof![3 => -2.0..2.0f64, 1 => Just(0.0)]
    }

    fn arb_numeric() -> impl Strategy<Value = [f64; 3]> {
        [arb_component(), arb_component(), arb_component()]
    }

    fn q(v: [f64; 3]) -> SignVec {
        SignVec::quantize(v, QuantizationConfig::exact()).unwrap()
    }

    proptest! {
        /// Soundness of the vector ops with respect to the numeric semantics.
        #[test]
        fn numeric_soundness(u in arb_numeric(), w in arb_numeric()) {
            let (qu, qw) = (q(u), q(w));
            let sum = [u[0] + w[0], u[1] + w[1], u[2] + w[2]];
            prop_assert!(qu.add(qw).admits(q(sum)));
            let diff = [u[0] - w[0], u[1] - w[1], u[2] - w[2]];
            prop_assert!(qu.sub(qw).admits(q(diff)));
            let cross = [
                u[1] * w[2] - u[2] * w[1],
                u[2] * w[0] - u[0] * w[2],
                u[0] * w[1] - u[1] * w[0],
            ];
            prop_assert!(qu.cross(qw).admits(q(cross)));
            let dot = u[0] * w[0] + u[1] * w[1] + u[2] * w[2];
            prop_assert!(qu.dot(qw).contains(Sign::of(dot, 0.0)));
        }

        /// Cross product is antisymmetric at the denotation level.
        #[test]
        fn cross_antisymmetric(a in arb_vec(), b in arb_vec()) {
            prop_assert_eq!(a.cross(b), b.cross(a).inverse());
        }

        /// Permuting the inputs of a big sum does not change the result.
        #[test]
        fn sum_permutation_invariant(vs in prop::collection::vec(arb_vec(), 0..6), seed in any::<u64>()) {
            let mut shuffled = vs.clone();
            // Fisher-Yates driven by a splitmix-style generator.
            let mut state = seed;
            for i in (1..shuffled.len()).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (state >> 33) as usize % (i + 1);
                shuffled.swap(i, j);
            }
            prop_assert_eq!(SignVec::sum(vs), SignVec::sum(shuffled));
        }

        /// Text encoding round-trips.
        #[test]
        fn encoding_round_trip(s in arb_set()) {
            prop_assert_eq!(s.to_string().parse::<SignSet>().unwrap(), s);
        }
    }
}
