//! Weights and virtual characters of a torus.
//!
//! Weights of `T` are identified with points of `Z^n` through the standard
//! identification `t* = R^n`. A [`VirtualCharacter`] is a finitely supported
//! integer multiplicity function on weights; a [`PolyhedralCharacter`] is a
//! formal signed sum of lattice-polyhedron indicators and may have infinite
//! support while still having finite multiplicities.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polyhedron::LatticePolyhedron;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CharacterError {
    #[error("rank mismatch: expected {expected}, got {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("malformed character document: {0}")]
    Malformed(String),
}

/// A character of the torus, i.e. a point of the weight lattice.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Weight(pub Vec<i64>);

impl Weight {
    pub fn new(coords: Vec<i64>) -> Self {
        Weight(coords)
    }

    pub fn zero(rank: usize) -> Self {
        Weight(vec![0; rank])
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    /// Pairing with an element of the integral Lie algebra lattice.
    pub fn pair(&self, x: &[i64]) -> i128 {
        crate::linalg::dot_int(&self.0, x)
    }

    pub fn neg(&self) -> Weight {
        Weight(self.0.iter().map(|x| -x).collect())
    }

    pub fn add(&self, other: &Weight) -> Weight {
        Weight(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Evaluation of a (possibly infinite) character at a single weight.
pub trait Character {
    fn rank(&self) -> usize;

    fn weight_multiplicity(&self, weight: &Weight) -> Result<BigInt, CharacterError>;
}

fn check_rank(expected: usize, found: usize) -> Result<(), CharacterError> {
    if expected == found {
        Ok(())
    } else {
        Err(CharacterError::RankMismatch { expected, found })
    }
}

/// Finite-dimensional virtual `T`-module, stored as its nonzero multiplicities
/// in lexicographic weight order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VirtualCharacter {
    rank: usize,
    mults: BTreeMap<Weight, BigInt>,
}

impl VirtualCharacter {
    pub fn zero(rank: usize) -> Self {
        VirtualCharacter { rank, mults: BTreeMap::new() }
    }

    /// The trivial one-dimensional module `δ_0`.
    pub fn trivial(rank: usize) -> Self {
        let mut c = Self::zero(rank);
        c.mults.insert(Weight::zero(rank), BigInt::from(1));
        c
    }

    pub fn from_pairs<I, M>(rank: usize, pairs: I) -> Result<Self, CharacterError>
    where
        I: IntoIterator<Item = (Weight, M)>,
        M: Into<BigInt>,
    {
        let mut c = Self::zero(rank);
        for (w, m) in pairs {
            check_rank(rank, w.rank())?;
            c.add_at(w, m.into());
        }
        Ok(c)
    }

    /// Adds `m` to the multiplicity at `w`. Rank is the caller's concern.
    pub(crate) fn add_at(&mut self, w: Weight, m: BigInt) {
        if m.is_zero() {
            return;
        }
        match self.mults.entry(w) {
            Entry::Vacant(e) => {
                e.insert(m);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += m;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.mults.is_empty()
    }

    pub fn multiplicity(&self, w: &Weight) -> BigInt {
        self.mults.get(w).cloned().unwrap_or_default()
    }

    pub fn support(&self) -> impl Iterator<Item = &Weight> {
        self.mults.keys()
    }

    pub fn support_len(&self) -> usize {
        self.mults.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Weight, &BigInt)> {
        self.mults.iter()
    }

    /// Convolution: the multiplicity at `γ` is `Σ_{α+β=γ} a(α) b(β)`.
    pub fn tensor_product(&self, other: &Self) -> Result<Self, CharacterError> {
        check_rank(self.rank, other.rank)?;
        let mut out = Self::zero(self.rank);
        for (a, ma) in &self.mults {
            for (b, mb) in &other.mults {
                out.add_at(a.add(b), ma * mb);
            }
        }
        Ok(out)
    }

    /// Multiplicity of the zero weight, i.e. the dimension of the
    /// `T`-invariant part.
    pub fn invariant_part(&self) -> BigInt {
        self.multiplicity(&Weight::zero(self.rank))
    }

    /// Signed total dimension.
    pub fn dimension(&self) -> BigInt {
        self.mults.values().sum()
    }

    pub fn negate(&self) -> Self {
        VirtualCharacter {
            rank: self.rank,
            mults: self.mults.iter().map(|(w, m)| (w.clone(), -m)).collect(),
        }
    }

    pub fn sum(&self, other: &Self) -> Result<Self, CharacterError> {
        check_rank(self.rank, other.rank)?;
        let mut out = self.clone();
        for (w, m) in &other.mults {
            out.add_at(w.clone(), m.clone());
        }
        Ok(out)
    }

    /// The dual module: weight `α` goes to `-α`.
    pub fn dual(&self) -> Self {
        VirtualCharacter {
            rank: self.rank,
            mults: self.mults.iter().map(|(w, m)| (w.neg(), m.clone())).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("character serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self, CharacterError> {
        serde_json::from_str(text).map_err(|e| CharacterError::Malformed(e.to_string()))
    }

    /// Plain-text table, one row per support weight.
    pub fn to_table(&self) -> String {
        let mut s = String::from("weight | multiplicity\n");
        for (w, m) in &self.mults {
            s.push_str(&format!("{w} | {m}\n"));
        }
        s
    }

    pub fn summary(&self) -> String {
        format!("dim = {}, support = {} weights", self.dimension(), self.support_len())
    }
}

impl Character for VirtualCharacter {
    fn rank(&self) -> usize {
        self.rank
    }

    fn weight_multiplicity(&self, weight: &Weight) -> Result<BigInt, CharacterError> {
        check_rank(self.rank, weight.rank())?;
        Ok(self.multiplicity(weight))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CharacterDoc {
    rank: usize,
    multiplicities: Vec<MultEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MultEntry {
    weight: Vec<i64>,
    mult: Mult,
}

/// Integer multiplicity; written as a JSON integer when it fits in 64 bits
/// and as a decimal string otherwise.
struct Mult(BigInt);

impl Serialize for Mult {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Mult {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Mult;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an integer multiplicity")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Mult, E> {
                Ok(Mult(v.into()))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Mult, E> {
                Ok(Mult(v.into()))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Mult, E> {
                v.parse().map(Mult).map_err(|_| E::custom(format!("invalid integer {v:?}")))
            }
        }
        d.deserialize_any(V)
    }
}

impl Serialize for VirtualCharacter {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CharacterDoc {
            rank: self.rank,
            multiplicities: self
                .mults
                .iter()
                .map(|(w, m)| MultEntry { weight: w.0.clone(), mult: Mult(m.clone()) })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for VirtualCharacter {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let doc = CharacterDoc::deserialize(d)?;
        VirtualCharacter::from_pairs(
            doc.rank,
            doc.multiplicities.into_iter().map(|e| (Weight(e.weight), e.mult.0)),
        )
        .map_err(de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_int(s: i64) -> Option<Sign> {
        match s {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn as_int(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Formal signed sum of polyhedron indicators. Never simplified implicitly;
/// see `quantize::collapse_signed_tails` for the reduction to a finite
/// character.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyhedralCharacter {
    rank: usize,
    terms: Vec<(Sign, LatticePolyhedron)>,
}

impl PolyhedralCharacter {
    pub fn new(rank: usize, terms: Vec<(Sign, LatticePolyhedron)>) -> Result<Self, CharacterError> {
        for (_, p) in &terms {
            check_rank(rank, p.rank())?;
        }
        Ok(PolyhedralCharacter { rank, terms })
    }

    pub fn empty(rank: usize) -> Self {
        PolyhedralCharacter { rank, terms: Vec::new() }
    }

    pub fn terms(&self) -> &[(Sign, LatticePolyhedron)] {
        &self.terms
    }
}

impl Character for PolyhedralCharacter {
    fn rank(&self) -> usize {
        self.rank
    }

    fn weight_multiplicity(&self, weight: &Weight) -> Result<BigInt, CharacterError> {
        check_rank(self.rank, weight.rank())?;
        let total: i64 = self
            .terms
            .iter()
            .filter(|(_, p)| p.contains_weight(weight))
            .map(|(s, _)| s.as_int())
            .sum();
        Ok(BigInt::from(total))
    }
}
