//! Exact rational convex polyhedra in H-representation.
//!
//! A [`LatticePolyhedron`] is `{x in R^n : <a_k, x> <= b_k}` with primitive
//! integer normals `a_k` and exact rational bounds `b_k`. All polyhedra are
//! closed, so boundary points count as members.
//!
//! Vertices and recession rays are found by exhaustive `n`-subset
//! intersection, which is fine for rank <= 3 and a few dozen inequalities.
//! Lattice points are enumerated coordinate by coordinate from a chain of
//! Fourier-Motzkin projections.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::character::Weight;
use crate::format::ExactRational;
use crate::linalg::{self, rat, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("inequality {index} has a zero normal vector")]
    ZeroNormal { index: usize },
    #[error("polyhedron is empty")]
    EmptyPolyhedron,
    #[error("polyhedron is unbounded (recession ray {ray})")]
    UnboundedPolyhedron { ray: RecessionRay },
    #[error("polyhedron has no vertices")]
    NoVertices,
    #[error("integer overflow in lattice computation")]
    Overflow,
}

/// Closed half-space `<normal, x> <= bound`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Inequality {
    pub normal: Vec<i64>,
    pub bound: Rat,
}

impl Inequality {
    pub fn new(normal: Vec<i64>, bound: Rat) -> Self {
        Inequality { normal, bound }
    }

    pub fn holds_at(&self, x: &[Rat]) -> bool {
        linalg::dot_int_rat(&self.normal, x) <= self.bound
    }

    pub fn is_tight_at(&self, x: &[Rat]) -> bool {
        linalg::dot_int_rat(&self.normal, x) == self.bound
    }

    fn normal_rat(&self) -> Vec<Rat> {
        linalg::rat_vec(&self.normal)
    }
}

/// Primitive integer direction of an unbounded edge of the recession cone.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RecessionRay(Vec<i64>);

impl RecessionRay {
    /// Builds the ray spanned by a nonzero integer vector.
    pub fn spanned_by(direction: &[i64]) -> Option<Self> {
        if direction.iter().all(|&x| x == 0) {
            return None;
        }
        Some(RecessionRay(linalg::primitive(direction)))
    }

    pub fn direction(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for RecessionRay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Weight(self.0.clone()))
    }
}

/// Result of maximizing a linear functional.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extremum {
    Empty,
    Unbounded,
    Attained(Rat),
}

/// V-description: `conv(vertices) + cone(rays)`. Lineality directions appear
/// as a `±` pair of rays, and `vertices` are those of the pointed part
/// (the intersection with the orthogonal complement of the lineality space).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generators {
    pub vertices: Vec<Vec<Rat>>,
    pub rays: Vec<RecessionRay>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePolyhedron {
    rank: usize,
    inequalities: Vec<Inequality>,
}

impl LatticePolyhedron {
    /// Normalizes every normal to a primitive vector and merges inequalities
    /// with equal normals, keeping the tightest bound.
    pub fn new(rank: usize, inequalities: Vec<Inequality>) -> Result<Self, GeometryError> {
        let mut out: Vec<Inequality> = Vec::with_capacity(inequalities.len());
        for (index, ineq) in inequalities.into_iter().enumerate() {
            if ineq.normal.len() != rank {
                return Err(GeometryError::DimensionMismatch {
                    expected: rank,
                    found: ineq.normal.len(),
                });
            }
            let g = linalg::gcd_slice(&ineq.normal);
            if g == 0 {
                return Err(GeometryError::ZeroNormal { index });
            }
            let normal: Vec<i64> = ineq.normal.iter().map(|x| x / g).collect();
            let bound = ineq.bound / BigInt::from(g);
            match out.iter_mut().find(|i| i.normal == normal) {
                Some(existing) => {
                    if bound < existing.bound {
                        existing.bound = bound;
                    }
                }
                None => out.push(Inequality { normal, bound }),
            }
        }
        Ok(LatticePolyhedron { rank, inequalities: out })
    }

    pub fn from_int_rows(rank: usize, rows: &[(Vec<i64>, i64)]) -> Result<Self, GeometryError> {
        Self::new(
            rank,
            rows.iter().map(|(a, b)| Inequality::new(a.clone(), rat(*b))).collect(),
        )
    }

    /// Rows with rational normals are rescaled to integers. Zero rows are
    /// constants: dropped when satisfied, otherwise the result is empty.
    pub fn from_rational_rows(rank: usize, rows: Vec<(Vec<Rat>, Rat)>) -> Result<Self, GeometryError> {
        let mut ineqs = Vec::with_capacity(rows.len());
        let mut infeasible = false;
        for (a, b) in rows {
            if a.len() != rank {
                return Err(GeometryError::DimensionMismatch { expected: rank, found: a.len() });
            }
            if a.iter().all(Zero::is_zero) {
                if b.is_negative() {
                    infeasible = true;
                }
                continue;
            }
            let (ints, scale) = linalg::clear_denominators(&a);
            let normal = ints
                .iter()
                .map(|x| x.to_i64().ok_or(GeometryError::Overflow))
                .collect::<Result<Vec<_>, _>>()?;
            ineqs.push(Inequality::new(normal, b * scale));
        }
        if infeasible {
            return Self::empty(rank);
        }
        Self::new(rank, ineqs)
    }

    /// `R^rank`; for rank 0 this is the one-point space.
    pub fn whole_space(rank: usize) -> Self {
        LatticePolyhedron { rank, inequalities: Vec::new() }
    }

    /// Canonical empty polyhedron `{x_0 <= -1, -x_0 <= 0}`.
    pub fn empty(rank: usize) -> Result<Self, GeometryError> {
        if rank == 0 {
            return Err(GeometryError::EmptyPolyhedron);
        }
        let mut e1 = vec![0; rank];
        e1[0] = 1;
        let neg: Vec<i64> = e1.iter().map(|x| -x).collect();
        Self::new(rank, vec![Inequality::new(e1, rat(-1)), Inequality::new(neg, rat(0))])
    }

    /// Axis-parallel box `lo <= x <= hi`.
    pub fn lattice_box(lo: &[i64], hi: &[i64]) -> Result<Self, GeometryError> {
        let n = lo.len();
        let mut rows = Vec::new();
        for i in 0..n {
            let mut e = vec![0; n];
            e[i] = 1;
            rows.push((e.clone(), hi[i]));
            e[i] = -1;
            rows.push((e, -lo[i]));
        }
        Self::from_int_rows(n, &rows)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn inequalities(&self) -> &[Inequality] {
        &self.inequalities
    }

    fn check_dim(&self, found: usize) -> Result<(), GeometryError> {
        if found == self.rank {
            Ok(())
        } else {
            Err(GeometryError::DimensionMismatch { expected: self.rank, found })
        }
    }

    pub fn contains_point(&self, x: &[Rat]) -> Result<bool, GeometryError> {
        self.check_dim(x.len())?;
        Ok(self.inequalities.iter().all(|i| i.holds_at(x)))
    }

    /// Membership of a lattice point. The weight must have the ambient rank.
    pub fn contains_weight(&self, w: &Weight) -> bool {
        debug_assert_eq!(w.rank(), self.rank);
        self.inequalities.iter().all(|i| {
            let lhs = BigInt::from(linalg::dot_int(&i.normal, w.coords()));
            Rat::from_integer(lhs) <= i.bound
        })
    }

    /// Indices of inequalities tight at `x`.
    pub fn tight_at(&self, x: &[Rat]) -> Vec<usize> {
        (0..self.inequalities.len())
            .filter(|&k| self.inequalities[k].is_tight_at(x))
            .collect()
    }

    pub fn with_inequality(&self, normal: Vec<i64>, bound: Rat) -> Result<Self, GeometryError> {
        let mut ineqs = self.inequalities.clone();
        ineqs.push(Inequality::new(normal, bound));
        Self::new(self.rank, ineqs)
    }

    pub fn intersect(&self, other: &Self) -> Result<Self, GeometryError> {
        self.check_dim(other.rank)?;
        let mut ineqs = self.inequalities.clone();
        ineqs.extend(other.inequalities.iter().cloned());
        Self::new(self.rank, ineqs)
    }

    /// Candidate points where `rank` linearly independent inequalities are
    /// tight and every inequality holds.
    fn basic_feasible_points(&self) -> Vec<Vec<Rat>> {
        let n = self.rank;
        let rows: Vec<Vec<Rat>> = self.inequalities.iter().map(Inequality::normal_rat).collect();
        let mut found = BTreeSet::new();
        for subset in (0..rows.len()).combinations(n) {
            let a: Vec<Vec<Rat>> = subset.iter().map(|&k| rows[k].clone()).collect();
            let b: Vec<Rat> = subset.iter().map(|&k| self.inequalities[k].bound.clone()).collect();
            if let Some(x) = linalg::solve_square(&a, &b) {
                if self.inequalities.iter().all(|i| i.holds_at(&x)) {
                    found.insert(x);
                }
            }
        }
        found.into_iter().collect()
    }

    /// Integer basis of the lineality space `{y : <a_k, y> = 0 for all k}`.
    pub fn lineality_basis(&self) -> Vec<Vec<i64>> {
        let rows: Vec<Vec<Rat>> = self.inequalities.iter().map(Inequality::normal_rat).collect();
        linalg::nullspace(&rows, self.rank)
            .iter()
            .map(|v| linalg::primitive_from_rational(v).expect("lineality vector fits in i64"))
            .collect()
    }

    /// Intersection with the orthogonal complement of the lineality space.
    fn pointed_part(&self) -> Self {
        let lin = self.lineality_basis();
        if lin.is_empty() {
            return self.clone();
        }
        let mut ineqs = self.inequalities.clone();
        for l in lin {
            let neg: Vec<i64> = l.iter().map(|x| -x).collect();
            ineqs.push(Inequality::new(l, Rat::zero()));
            ineqs.push(Inequality::new(neg, Rat::zero()));
        }
        Self::new(self.rank, ineqs).expect("lineality rows are nonzero")
    }

    /// Generating rays of the recession cone `{y : <a_k, y> <= 0}`: extreme
    /// rays of its pointed part, plus both directions of each lineality basis
    /// vector. Sorted lexicographically.
    fn cone_rays(&self) -> Vec<RecessionRay> {
        let n = self.rank;
        let rows: Vec<Vec<Rat>> = self.inequalities.iter().map(Inequality::normal_rat).collect();
        let lin = self.lineality_basis();
        let lin_rows: Vec<Vec<Rat>> = lin.iter().map(|l| linalg::rat_vec(l)).collect();
        let mut rays = BTreeSet::new();
        let pointed_dim = n - lin.len();
        if pointed_dim >= 1 {
            for subset in (0..rows.len()).combinations(pointed_dim - 1) {
                let mut sys = lin_rows.clone();
                sys.extend(subset.iter().map(|&k| rows[k].clone()));
                if linalg::rank(&sys, n) != n - 1 {
                    continue;
                }
                let ns = linalg::nullspace(&sys, n);
                let d = linalg::primitive_from_rational(&ns[0]).expect("ray fits in i64");
                for cand in [d.clone(), d.iter().map(|x| -x).collect()] {
                    if self.inequalities.iter().all(|i| linalg::dot_int(&i.normal, &cand) <= 0) {
                        rays.insert(RecessionRay(cand));
                    }
                }
            }
        }
        for l in lin {
            rays.insert(RecessionRay(l.iter().map(|x| -x).collect()));
            rays.insert(RecessionRay(l));
        }
        rays.into_iter().collect()
    }

    /// `None` iff the polyhedron is empty.
    pub fn generators(&self) -> Option<Generators> {
        let vertices = self.pointed_part().basic_feasible_points();
        if vertices.is_empty() {
            return None;
        }
        Some(Generators { vertices, rays: self.cone_rays() })
    }

    pub fn is_empty(&self) -> bool {
        self.pointed_part().basic_feasible_points().is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        self.is_empty() || self.cone_rays().is_empty()
    }

    /// The 0-dimensional faces, sorted lexicographically. Empty when the
    /// polyhedron contains a line.
    pub fn vertices(&self) -> Result<Vec<Vec<Rat>>, GeometryError> {
        if self.is_empty() {
            return Err(GeometryError::EmptyPolyhedron);
        }
        if !self.lineality_basis().is_empty() {
            return Ok(Vec::new());
        }
        Ok(self.basic_feasible_points())
    }

    pub fn recession_rays(&self) -> Result<Vec<RecessionRay>, GeometryError> {
        if self.is_empty() {
            return Err(GeometryError::EmptyPolyhedron);
        }
        Ok(self.cone_rays())
    }

    pub fn maximize(&self, functional: &[Rat]) -> Extremum {
        let Some(gens) = self.generators() else {
            return Extremum::Empty;
        };
        let ray_positive = gens.rays.iter().any(|r| {
            linalg::dot_rat(functional, &linalg::rat_vec(r.direction())).is_positive()
        });
        if ray_positive {
            return Extremum::Unbounded;
        }
        let best = gens
            .vertices
            .iter()
            .map(|v| linalg::dot_rat(functional, v))
            .max()
            .expect("nonempty polyhedron has a vertex in its pointed part");
        Extremum::Attained(best)
    }

    /// `other ⊆ self`, decided exactly from the generators of `other`.
    pub fn contains_polyhedron(&self, other: &Self) -> Result<bool, GeometryError> {
        self.check_dim(other.rank)?;
        let Some(gens) = other.generators() else {
            return Ok(true);
        };
        Ok(self.inequalities.iter().all(|ineq| {
            gens.rays.iter().all(|r| linalg::dot_int(&ineq.normal, r.direction()) <= 0)
                && gens.vertices.iter().all(|v| ineq.holds_at(v))
        }))
    }

    /// Set equality by double inclusion.
    pub fn set_eq(&self, other: &Self) -> Result<bool, GeometryError> {
        Ok(self.contains_polyhedron(other)? && other.contains_polyhedron(self)?)
    }

    /// Integer points in lexicographic order.
    pub fn lattice_points(&self) -> Result<Vec<Weight>, GeometryError> {
        if self.is_empty() {
            return Ok(Vec::new());
        }
        if let Some(ray) = self.cone_rays().into_iter().next() {
            return Err(GeometryError::UnboundedPolyhedron { ray });
        }
        enumerate_lattice_points(self)
    }

    /// Tangent-cone test at each vertex: the primitive edge directions must
    /// be linearly independent and span a saturated sublattice (a basis of
    /// `Z^rank` for full-dimensional polytopes; a point passes trivially).
    /// Returns the first vertex where this fails.
    pub fn delzant_defect(&self) -> Result<Option<Vec<Rat>>, GeometryError> {
        let verts = self.vertices()?;
        if verts.is_empty() {
            return Err(GeometryError::NoVertices);
        }
        for v in verts {
            let cone: Vec<Inequality> = self
                .tight_at(&v)
                .into_iter()
                .map(|k| Inequality::new(self.inequalities[k].normal.clone(), Rat::zero()))
                .collect();
            let cone = LatticePolyhedron { rank: self.rank, inequalities: cone };
            let edges = cone.cone_rays();
            let smooth = edges_are_lattice_basis(&edges, self.rank);
            if !smooth {
                return Ok(Some(v));
            }
        }
        Ok(None)
    }

    pub fn is_delzant(&self) -> Result<bool, GeometryError> {
        Ok(self.delzant_defect()?.is_none())
    }

    /// First vertex with a non-integer coordinate, if any.
    pub fn non_lattice_vertex(&self) -> Result<Option<Vec<Rat>>, GeometryError> {
        let verts = self.vertices()?;
        if let Some(ray) = self.cone_rays().into_iter().next() {
            return Err(GeometryError::UnboundedPolyhedron { ray });
        }
        Ok(verts.into_iter().find(|v| !v.iter().all(linalg::is_integral)))
    }

    pub fn is_lattice_polytope(&self) -> Result<bool, GeometryError> {
        Ok(self.non_lattice_vertex()?.is_none())
    }

    /// Product in `R^{n_P + n_Q}`; each factor's inequalities act on its own
    /// coordinate block.
    pub fn product(&self, other: &Self) -> Self {
        let n = self.rank + other.rank;
        let mut ineqs = Vec::with_capacity(self.inequalities.len() + other.inequalities.len());
        for i in &self.inequalities {
            let mut a = i.normal.clone();
            a.resize(n, 0);
            ineqs.push(Inequality::new(a, i.bound.clone()));
        }
        for i in &other.inequalities {
            let mut a = vec![0; self.rank];
            a.extend_from_slice(&i.normal);
            ineqs.push(Inequality::new(a, i.bound.clone()));
        }
        Self::new(n, ineqs).expect("product of valid polyhedra is valid")
    }

    pub fn translate(&self, v: &[Rat]) -> Result<Self, GeometryError> {
        self.check_dim(v.len())?;
        let ineqs = self
            .inequalities
            .iter()
            .map(|i| Inequality::new(i.normal.clone(), &i.bound + linalg::dot_int_rat(&i.normal, v)))
            .collect();
        Ok(LatticePolyhedron { rank: self.rank, inequalities: ineqs })
    }

    /// `{z in R^m : M z + offset ∈ self}` for a rational `rank × m` matrix.
    pub fn preimage(&self, m: usize, matrix: &[Vec<Rat>], offset: &[Rat]) -> Result<Self, GeometryError> {
        self.check_dim(matrix.len())?;
        self.check_dim(offset.len())?;
        if let Some(row) = matrix.iter().find(|row| row.len() != m) {
            return Err(GeometryError::DimensionMismatch { expected: m, found: row.len() });
        }
        let rows = self
            .inequalities
            .iter()
            .map(|ineq| {
                let a: Vec<Rat> = (0..m)
                    .map(|j| {
                        ineq.normal
                            .iter()
                            .zip(matrix)
                            .fold(Rat::zero(), |acc, (&ai, row)| acc + &row[j] * BigInt::from(ai))
                    })
                    .collect();
                (a, &ineq.bound - linalg::dot_int_rat(&ineq.normal, offset))
            })
            .collect();
        Self::from_rational_rows(m, rows)
    }
}

/// Independent integer vectors spanning `Z^n ∩ span`: the gcd of their
/// maximal minors is 1.
fn edges_are_lattice_basis(edges: &[RecessionRay], n: usize) -> bool {
    let rows: Vec<Vec<Rat>> = edges.iter().map(|e| linalg::rat_vec(e.direction())).collect();
    let d = rows.len();
    if d == 0 {
        return true;
    }
    if linalg::rank(&rows, n) != d {
        return false;
    }
    let mut g = BigInt::zero();
    for cols in (0..n).combinations(d) {
        let minor: Vec<Vec<Rat>> = rows.iter().map(|r| cols.iter().map(|&c| r[c].clone()).collect()).collect();
        g = num_integer::Integer::gcd(&g, &linalg::determinant(&minor).to_integer());
    }
    g == BigInt::from(1)
}

impl fmt::Display for LatticePolyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inequalities.is_empty() {
            return write!(f, "R^{}", self.rank);
        }
        write!(f, "{{")?;
        for (k, i) in self.inequalities.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}.x <= {}", Weight(i.normal.clone()), i.bound)?;
        }
        write!(f, "}}")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyhedronDoc {
    rank: usize,
    inequalities: Vec<InequalityDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InequalityDoc {
    normal: Vec<i64>,
    bound: ExactRational,
}

impl Serialize for LatticePolyhedron {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyhedronDoc {
            rank: self.rank,
            inequalities: self
                .inequalities
                .iter()
                .map(|i| InequalityDoc { normal: i.normal.clone(), bound: ExactRational(i.bound.clone()) })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LatticePolyhedron {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let doc = PolyhedronDoc::deserialize(d)?;
        LatticePolyhedron::new(
            doc.rank,
            doc.inequalities.into_iter().map(|i| Inequality::new(i.normal, i.bound.0)).collect(),
        )
        .map_err(serde::de::Error::custom)
    }
}

type Row = (Vec<Rat>, Rat);

/// Scale so the first nonzero coefficient has absolute value 1.
fn normalize_row((a, b): Row) -> Row {
    match a.iter().find(|x| !x.is_zero()) {
        Some(lead) => {
            let s = lead.abs();
            (a.iter().map(|x| x / &s).collect(), b / s)
        }
        None => (a, b),
    }
}

/// Fourier-Motzkin elimination of `var`. Returns `None` if a contradictory
/// constant row appears.
fn eliminate(rows: &[Row], var: usize) -> Option<Vec<Row>> {
    let mut out = BTreeSet::new();
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for r in rows {
        let c = &r.0[var];
        if c.is_positive() {
            pos.push(r);
        } else if c.is_negative() {
            neg.push(r);
        } else {
            out.insert(r.clone());
        }
    }
    for p in &pos {
        for q in &neg {
            let (cp, cq) = (p.0[var].clone(), -q.0[var].clone());
            let a: Vec<Rat> = p.0.iter().zip(&q.0).map(|(x, y)| x * &cq + y * &cp).collect();
            let b = &p.1 * &cq + &q.1 * &cp;
            out.insert(normalize_row((a, b)));
        }
    }
    let mut kept = Vec::with_capacity(out.len());
    for (a, b) in out {
        if a.iter().all(Zero::is_zero) {
            if b.is_negative() {
                return None;
            }
        } else {
            kept.push((a, b));
        }
    }
    Some(kept)
}

fn enumerate_lattice_points(p: &LatticePolyhedron) -> Result<Vec<Weight>, GeometryError> {
    let n = p.rank;
    if n == 0 {
        return Ok(vec![Weight(Vec::new())]);
    }
    let full: Vec<Row> = p
        .inequalities
        .iter()
        .map(|i| normalize_row((i.normal_rat(), i.bound.clone())))
        .collect();
    // levels[k] involves only coordinates 0..=k
    let mut levels: Vec<Vec<Row>> = vec![Vec::new(); n];
    levels[n - 1] = full;
    for k in (1..n).rev() {
        match eliminate(&levels[k], k) {
            Some(rows) => levels[k - 1] = rows,
            None => return Ok(Vec::new()),
        }
    }
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(n);
    descend(&levels, &mut prefix, &mut out)?;
    Ok(out)
}

fn descend(levels: &[Vec<Row>], prefix: &mut Vec<i64>, out: &mut Vec<Weight>) -> Result<(), GeometryError> {
    let k = prefix.len();
    if k == levels.len() {
        out.push(Weight(prefix.clone()));
        return Ok(());
    }
    let mut lo: Option<i64> = None;
    let mut hi: Option<i64> = None;
    for (a, b) in &levels[k] {
        let rest = prefix
            .iter()
            .zip(a)
            .fold(b.clone(), |acc, (&x, c)| acc - c * BigInt::from(x));
        let c = &a[k];
        if c.is_zero() {
            if rest.is_negative() {
                return Ok(());
            }
        } else if c.is_positive() {
            let u = linalg::floor_i64(&(rest / c)).ok_or(GeometryError::Overflow)?;
            hi = Some(hi.map_or(u, |h| h.min(u)));
        } else {
            let l = linalg::ceil_i64(&(rest / c)).ok_or(GeometryError::Overflow)?;
            lo = Some(lo.map_or(l, |x| x.max(l)));
        }
    }
    let (Some(lo), Some(hi)) = (lo, hi) else {
        let mut dir = vec![0; levels.len()];
        dir[k] = if lo.is_none() { -1 } else { 1 };
        return Err(GeometryError::UnboundedPolyhedron { ray: RecessionRay(dir) });
    };
    for x in lo..=hi {
        prefix.push(x);
        descend(levels, prefix, out)?;
        prefix.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Rat {
        Rat::new(p.into(), d.into())
    }

    fn poly(rank: usize, rows: &[(&[i64], i64)]) -> LatticePolyhedron {
        LatticePolyhedron::from_int_rows(rank, &rows.iter().map(|(a, b)| (a.to_vec(), *b)).collect::<Vec<_>>())
            .unwrap()
    }

    fn unit_square() -> LatticePolyhedron {
        LatticePolyhedron::lattice_box(&[0, 0], &[1, 1]).unwrap()
    }

    fn triangle(a: i64, b: i64) -> LatticePolyhedron {
        // conv{(0,0),(a,0),(0,b)}
        poly(2, &[(&[-1, 0], 0), (&[0, -1], 0), (&[b, a], a * b)])
    }

    fn pts(p: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
        p.to_vec()
    }

    #[test]
    fn membership_examples() {
        let sq = unit_square();
        assert!(sq.contains_point(&[rat(0), rat(0)]).unwrap());
        assert!(!sq.contains_point(&[rat(2), rat(0)]).unwrap());
        let half = poly(1, &[(&[1], -1)]);
        assert!(half.contains_point(&[rat(-1)]).unwrap());
        assert_eq!(
            sq.contains_point(&[rat(0)]),
            Err(GeometryError::DimensionMismatch { expected: 2, found: 1 })
        );
    }

    #[test]
    fn normalization_merges_duplicates() {
        let p = poly(1, &[(&[2], 6), (&[1], 5), (&[-3], 0)]);
        assert_eq!(p.inequalities().len(), 2);
        assert_eq!(p.inequalities()[0], Inequality::new(vec![1], rat(3)));
        assert_eq!(p.inequalities()[1], Inequality::new(vec![-1], rat(0)));
        assert_eq!(
            LatticePolyhedron::from_int_rows(2, &[(vec![0, 0], 1)]),
            Err(GeometryError::ZeroNormal { index: 0 })
        );
    }

    #[test]
    fn lattice_point_examples() {
        let w = |c: &[i64]| Weight(c.to_vec());
        assert_eq!(
            unit_square().lattice_points().unwrap(),
            vec![w(&[0, 0]), w(&[0, 1]), w(&[1, 0]), w(&[1, 1])]
        );
        let seg = LatticePolyhedron::lattice_box(&[0], &[3]).unwrap();
        assert_eq!(seg.lattice_points().unwrap(), vec![w(&[0]), w(&[1]), w(&[2]), w(&[3])]);
        assert_eq!(triangle(2, 2).lattice_points().unwrap().len(), 6);
        assert!(matches!(
            poly(1, &[(&[1], 2)]).lattice_points(),
            Err(GeometryError::UnboundedPolyhedron { .. })
        ));
        assert!(LatticePolyhedron::empty(2).unwrap().lattice_points().unwrap().is_empty());
    }

    #[test]
    fn vertex_examples() {
        let seg = LatticePolyhedron::lattice_box(&[0], &[3]).unwrap();
        assert_eq!(seg.vertices().unwrap(), pts(&[vec![rat(0)], vec![rat(3)]]));
        assert_eq!(poly(1, &[(&[1], 2)]).vertices().unwrap(), pts(&[vec![rat(2)]]));
        assert!(LatticePolyhedron::whole_space(1).vertices().unwrap().is_empty());
        assert_eq!(LatticePolyhedron::empty(1).unwrap().vertices(), Err(GeometryError::EmptyPolyhedron));
    }

    #[test]
    fn recession_ray_examples() {
        let r = |c: &[i64]| RecessionRay(c.to_vec());
        assert_eq!(poly(1, &[(&[1], 2)]).recession_rays().unwrap(), vec![r(&[-1])]);
        assert!(unit_square().recession_rays().unwrap().is_empty());
        assert_eq!(
            poly(2, &[(&[1, 0], 0), (&[0, 1], 0)]).recession_rays().unwrap(),
            vec![r(&[-1, 0]), r(&[0, -1])]
        );
        assert_eq!(LatticePolyhedron::whole_space(1).recession_rays().unwrap(), vec![r(&[-1]), r(&[1])]);
        let strip = poly(2, &[(&[0, 1], 1), (&[0, -1], 0)]);
        assert_eq!(strip.recession_rays().unwrap(), vec![r(&[-1, 0]), r(&[1, 0])]);
    }

    #[test]
    fn delzant_examples() {
        assert!(unit_square().is_delzant().unwrap());
        assert!(triangle(2, 2).is_delzant().unwrap());
        let bad = triangle(1, 2);
        assert!(!bad.is_delzant().unwrap());
        // only (1,0) has a non-unimodular edge pair: (-1,0), (-1,2)
        assert_eq!(bad.delzant_defect().unwrap(), Some(vec![rat(1), rat(0)]));
        assert_eq!(LatticePolyhedron::whole_space(1).is_delzant(), Err(GeometryError::NoVertices));
        let point = LatticePolyhedron::whole_space(0);
        assert!(point.is_delzant().unwrap());
    }

    #[test]
    fn lattice_polytope_examples() {
        assert!(unit_square().is_lattice_polytope().unwrap());
        let half = LatticePolyhedron::new(
            1,
            vec![Inequality::new(vec![1], q(5, 2)), Inequality::new(vec![-1], rat(0))],
        )
        .unwrap();
        assert!(!half.is_lattice_polytope().unwrap());
        assert_eq!(half.non_lattice_vertex().unwrap(), Some(vec![q(5, 2)]));
        assert!(triangle(2, 2).is_lattice_polytope().unwrap());
        assert!(matches!(poly(1, &[(&[1], 0)]).is_lattice_polytope(), Err(GeometryError::UnboundedPolyhedron { .. })));
    }

    #[test]
    fn product_and_translate() {
        let a = LatticePolyhedron::lattice_box(&[0], &[1]).unwrap();
        let b = LatticePolyhedron::lattice_box(&[0], &[2]).unwrap();
        let rect = a.product(&b);
        assert_eq!(rect.inequalities().len(), 4);
        assert!(rect.set_eq(&LatticePolyhedron::lattice_box(&[0, 0], &[1, 2]).unwrap()).unwrap());
        assert_eq!(a.product(&LatticePolyhedron::whole_space(0)), a);
        let strip = poly(1, &[(&[1], 2)]).product(&a);
        assert!(strip.set_eq(&poly(2, &[(&[1, 0], 2), (&[0, 1], 1), (&[0, -1], 0)])).unwrap());

        let moved = a.translate(&[rat(3)]).unwrap();
        assert!(moved.set_eq(&LatticePolyhedron::lattice_box(&[3], &[4]).unwrap()).unwrap());
        assert_eq!(a.translate(&[rat(0)]).unwrap(), a);
        assert_eq!(moved.translate(&[rat(-3)]).unwrap(), a);
    }

    #[test]
    fn set_equality_with_redundancy() {
        let sq = unit_square();
        let redundant = poly(2, &[(&[1, 1], 2), (&[0, 1], 1), (&[-1, 0], 0), (&[1, 0], 1), (&[0, -1], 0)]);
        assert!(sq.set_eq(&redundant).unwrap());
        assert!(!sq.set_eq(&triangle(1, 1)).unwrap());
        let e1 = LatticePolyhedron::empty(2).unwrap();
        let e2 = poly(2, &[(&[1, 1], -5), (&[-1, 0], 0), (&[0, -1], 0)]);
        assert!(e1.set_eq(&e2).unwrap());
    }

    #[test]
    fn maximize_cases() {
        let sq = unit_square();
        assert_eq!(sq.maximize(&[rat(1), rat(1)]), Extremum::Attained(rat(2)));
        let half = poly(1, &[(&[1], 2)]);
        assert_eq!(half.maximize(&[rat(-1)]), Extremum::Unbounded);
        assert_eq!(LatticePolyhedron::empty(1).unwrap().maximize(&[rat(1)]), Extremum::Empty);
    }

    #[test]
    fn preimage_under_negation() {
        let seg = LatticePolyhedron::lattice_box(&[0], &[3]).unwrap();
        let neg = seg.preimage(1, &[vec![rat(-1)]], &[rat(0)]).unwrap();
        assert!(neg.set_eq(&LatticePolyhedron::lattice_box(&[-3], &[0]).unwrap()).unwrap());
    }

    #[test]
    fn serde_literal() {
        let p: LatticePolyhedron = serde_json::from_str(
            r#"{"rank":1,"inequalities":[{"normal":[1],"bound":"5/2"},{"normal":[-1],"bound":0}]}"#,
        )
        .unwrap();
        assert_eq!(p.inequalities()[0].bound, q(5, 2));
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"{"rank":1,"inequalities":[{"normal":[1],"bound":"5/2"},{"normal":[-1],"bound":"0"}]}"#);
        assert!(serde_json::from_str::<LatticePolyhedron>(
            r#"{"rank":1,"inequalities":[{"normal":[1],"bound":0.5}]}"#
        )
        .is_err());
    }
}
