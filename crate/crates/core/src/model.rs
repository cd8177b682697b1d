//! Combinatorial models of toric and b-toric Hamiltonian `T`-spaces.
//!
//! A compact toric space is its Delzant lattice polytope. A b-toric space is
//! described by the moment images of the components of `M - Z` (each carrying
//! the orientation sign induced by the symplectic form) together with one
//! record per hypersurface component `Z_i`:
//!
//! * the modular weight `v_i` in `t*`, nonzero and primitive,
//! * an integral splitting `X_i` in `t` with `<v_i, X_i> = 1`,
//! * the moment polytope of the symplectic leaf, written in the canonical
//!   lattice coordinates of the annihilator of `X_i` (see [`leaf_chart`]),
//! * the ordered pair of adjacent components.
//!
//! Near `Z_i` the moment map is `(log|t|, φ_i(p))`, so the coordinate
//! `<x, X_i>` plays the role of `log|t|` and both adjacent moment images run
//! off to infinity in direction `-v_i`. Beyond a threshold `s0` each of them
//! must coincide with `{<x, X_i> <= -s0}` crossed with a translate of the leaf
//! polytope.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::character::Sign;
use crate::checks::{self, CheckReport, Witness};
use crate::format::{ComponentDoc, DescriptionDoc, ExactRational, HypersurfaceDoc, INEXACT, SCHEMA};
use crate::linalg::{self, rat, Rat};
use crate::polyhedron::{GeometryError, LatticePolyhedron, RecessionRay};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown field at line {line}, column {column}: {message}")]
    UnknownField { line: usize, column: usize, message: String },
    #[error("{INEXACT} at line {line}, column {column}: {message}")]
    InexactNumber { line: usize, column: usize, message: String },
    #[error("invalid description: {0}")]
    Structure(String),
}

impl From<serde_json::Error> for ParseError {
    fn from(e: serde_json::Error) -> Self {
        let (line, column) = (e.line(), e.column());
        let full = e.to_string();
        let suffix = format!(" at line {line} column {column}");
        let message = full.strip_suffix(&suffix).unwrap_or(&full).to_string();
        if message.contains("unknown field") {
            ParseError::UnknownField { line, column, message }
        } else if message.contains(INEXACT) || message.contains("floating point") {
            ParseError::InexactNumber { line, column, message }
        } else {
            ParseError::Syntax { line, column, message }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("hypersurface index {index} out of range ({count} hypersurfaces)")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("description failed validation")]
    NotValidated(ValidationReport),
    #[error("splitting pairs to {pairing} with the modular weight, expected 1")]
    PairingNotOne { pairing: i128 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompactToricSpace {
    pub rank: usize,
    pub polytope: LatticePolyhedron,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypersurfaceRecord {
    pub modular_weight: Vec<i64>,
    pub splitting: Vec<i64>,
    pub leaf: LatticePolyhedron,
    /// `(positive side, negative side)` component indices.
    pub adjacent: (usize, usize),
}

impl HypersurfaceRecord {
    /// Primitive direction along which the adjacent moment images escape,
    /// i.e. `-v/gcd(v)`. `None` for a zero modular weight.
    pub fn tail_direction(&self) -> Option<RecessionRay> {
        let neg: Vec<i64> = self.modular_weight.iter().map(|x| -x).collect();
        RecessionRay::spanned_by(&neg)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub sign: Sign,
    pub polyhedron: LatticePolyhedron,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BSpaceDescription {
    pub rank: usize,
    pub components: Vec<Component>,
    pub hypersurfaces: Vec<HypersurfaceRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Description {
    CompactToric(CompactToricSpace),
    BToric(BSpaceDescription),
}

impl Description {
    pub fn rank(&self) -> usize {
        match self {
            Description::CompactToric(m) => m.rank,
            Description::BToric(d) => d.rank,
        }
    }

    /// Signed moment images: the single polytope for a compact space, the
    /// components of `M - Z` otherwise.
    pub fn signed_pieces(&self) -> Vec<(Sign, &LatticePolyhedron)> {
        match self {
            Description::CompactToric(m) => vec![(Sign::Plus, &m.polytope)],
            Description::BToric(d) => d.components.iter().map(|c| (c.sign, &c.polyhedron)).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let doc = match self {
            Description::CompactToric(m) => DescriptionDoc {
                schema: SCHEMA.into(),
                kind: "compact_toric".into(),
                rank: m.rank,
                polytope: Some(m.polytope.clone()),
                components: None,
                hypersurfaces: None,
            },
            Description::BToric(d) => DescriptionDoc {
                schema: SCHEMA.into(),
                kind: "b_toric".into(),
                rank: d.rank,
                polytope: None,
                components: Some(
                    d.components
                        .iter()
                        .map(|c| ComponentDoc { sign: c.sign.as_int(), polyhedron: c.polyhedron.clone() })
                        .collect(),
                ),
                hypersurfaces: Some(
                    d.hypersurfaces
                        .iter()
                        .map(|h| HypersurfaceDoc {
                            modular_weight: h.modular_weight.clone(),
                            splitting: h.splitting.clone(),
                            leaf: h.leaf.clone(),
                            adjacent: [h.adjacent.0, h.adjacent.1],
                        })
                        .collect(),
                ),
            },
        };
        serde_json::to_string_pretty(&doc).expect("description serialization is infallible")
    }
}

fn structure(msg: impl Into<String>) -> ParseError {
    ParseError::Structure(msg.into())
}

/// Parses a `bquant/1` document. Only the schema and structural consistency
/// (ranks, lengths, indices) are checked here; geometric hypotheses are the
/// job of [`validate_description`].
pub fn parse_description(text: &str) -> Result<Description, ParseError> {
    let doc: DescriptionDoc = serde_json::from_str(text)?;
    if doc.schema != SCHEMA {
        return Err(structure(format!("unsupported schema {:?}, expected {SCHEMA:?}", doc.schema)));
    }
    let n = doc.rank;
    if n == 0 {
        return Err(structure("rank must be at least 1"));
    }
    match doc.kind.as_str() {
        "compact_toric" => {
            if doc.components.is_some() || doc.hypersurfaces.is_some() {
                return Err(structure("compact_toric descriptions take only \"polytope\""));
            }
            let polytope = doc.polytope.ok_or_else(|| structure("missing field \"polytope\""))?;
            if polytope.rank() != n {
                return Err(structure(format!("polytope has rank {}, expected {n}", polytope.rank())));
            }
            Ok(Description::CompactToric(CompactToricSpace { rank: n, polytope }))
        }
        "b_toric" => {
            if doc.polytope.is_some() {
                return Err(structure("b_toric descriptions do not take \"polytope\""));
            }
            let comps = doc.components.ok_or_else(|| structure("missing field \"components\""))?;
            let hyps = doc.hypersurfaces.unwrap_or_default();
            let mut components = Vec::with_capacity(comps.len());
            for (j, c) in comps.into_iter().enumerate() {
                let sign = Sign::from_int(c.sign)
                    .ok_or_else(|| structure(format!("component {j}: sign must be 1 or -1")))?;
                if c.polyhedron.rank() != n {
                    return Err(structure(format!("component {j}: polyhedron rank {} != {n}", c.polyhedron.rank())));
                }
                components.push(Component { sign, polyhedron: c.polyhedron });
            }
            let mut hypersurfaces = Vec::with_capacity(hyps.len());
            for (i, h) in hyps.into_iter().enumerate() {
                if h.modular_weight.len() != n || h.splitting.len() != n {
                    return Err(structure(format!("hypersurface {i}: modular_weight and splitting need length {n}")));
                }
                if h.leaf.rank() != n - 1 {
                    return Err(structure(format!("hypersurface {i}: leaf rank {} != {}", h.leaf.rank(), n - 1)));
                }
                if let Some(&j) = h.adjacent.iter().find(|&&j| j >= components.len()) {
                    return Err(structure(format!("hypersurface {i}: adjacent component {j} does not exist")));
                }
                hypersurfaces.push(HypersurfaceRecord {
                    modular_weight: h.modular_weight,
                    splitting: h.splitting,
                    leaf: h.leaf,
                    adjacent: (h.adjacent[0], h.adjacent[1]),
                });
            }
            Ok(Description::BToric(BSpaceDescription { rank: n, components, hypersurfaces }))
        }
        other => Err(structure(format!("unknown kind {other:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckReport>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckReport> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_lines(&self) -> String {
        self.checks.iter().map(|c| format!("{}\n", c.line())).collect()
    }
}

/// Runs every hypothesis check and reports each one; never fails.
pub fn validate_description(d: &Description) -> ValidationReport {
    match d {
        Description::CompactToric(m) => ValidationReport {
            checks: vec![
                checks::check_bounded(m),
                checks::check_delzant(m),
                checks::check_gamma_integrality(d),
            ],
        },
        Description::BToric(b) => validate_b_toric(b).0,
    }
}

/// Validation of a b-toric description, also returning the tail matches
/// found by the tail-product check.
pub(crate) fn validate_b_toric(b: &BSpaceDescription) -> (ValidationReport, Vec<TailMatch>) {
    let (tail_product, matches) = checks::tail_product(b);
    let checks = vec![
        checks::check_modular_dichotomy(b),
        checks::check_mu_integrality(b),
        checks::check_gamma_integrality(&Description::BToric(b.clone())),
        checks::check_properness(b),
        checks::check_leaf_delzant(b),
        checks::check_orientation(b),
        checks::check_end_matching(b),
        tail_product,
    ];
    (ValidationReport { checks }, matches)
}

/// Canonical lattice basis of the annihilator `{x in Z^n : <x, X> = 0}` of a
/// splitting vector, in Hermite normal form. Leaf polytopes are written in
/// the coordinates of this basis.
pub fn annihilator_basis(splitting: &[i64]) -> Vec<Vec<i64>> {
    linalg::integer_kernel_basis(splitting)
}

/// Linear map `R^n -> R^{n-1}` reading off leaf coordinates: it inverts the
/// decomposition `x = s·u + Σ y_k b_k` where `u` is the primitive modular
/// weight and `b_k` the annihilator basis. `None` when `<u, X> = 0`.
pub fn leaf_chart(modular_weight: &[i64], splitting: &[i64]) -> Option<Vec<Vec<Rat>>> {
    let n = splitting.len();
    let u = linalg::primitive(modular_weight);
    let basis = annihilator_basis(splitting);
    if basis.len() + 1 != n {
        return None;
    }
    // columns: u, b_1, ..., b_{n-1}
    let g: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            let mut row = vec![rat(u[i])];
            row.extend(basis.iter().map(|b| rat(b[i])));
            row
        })
        .collect();
    let inv = linalg::inverse(&g)?;
    Some(inv[1..].to_vec())
}

/// Outcome of matching the two tails at one hypersurface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TailMatch {
    pub hypersurface: usize,
    pub threshold: i64,
    pub splitting: Vec<i64>,
    pub plus: usize,
    pub minus: usize,
    pub plus_tail: LatticePolyhedron,
    pub minus_tail: LatticePolyhedron,
    /// Offset of the tail cross-section relative to the leaf polytope, in
    /// leaf coordinates.
    pub leaf_offset: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TailFailure {
    pub component: Option<usize>,
    pub message: String,
}

fn tail_failure(component: Option<usize>, message: impl Into<String>) -> TailFailure {
    TailFailure { component, message: message.into() }
}

/// `max |<vertex, X>|` over the vertices of the given polyhedra, rounded up,
/// plus one. Polyhedra without vertices contribute nothing.
pub fn tail_threshold<'a>(pieces: impl IntoIterator<Item = &'a LatticePolyhedron>, splitting: &[i64]) -> i64 {
    let mut extent = Rat::zero();
    for p in pieces {
        if let Ok(vs) = p.vertices() {
            for v in vs {
                let s = linalg::dot_int_rat(splitting, &v).abs();
                if s > extent {
                    extent = s;
                }
            }
        }
    }
    linalg::ceil_i64(&extent).expect("threshold fits in i64") + 1
}

/// `P ∩ {<x, X> <= -s0}`.
pub fn cut_tail(p: &LatticePolyhedron, splitting: &[i64], threshold: i64) -> Result<LatticePolyhedron, GeometryError> {
    p.with_inequality(splitting.to_vec(), rat(-threshold))
}

/// Checks the product structure of both tails at hypersurface `i`.
pub fn match_tails(d: &BSpaceDescription, i: usize) -> Result<TailMatch, TailFailure> {
    let h = &d.hypersurfaces[i];
    let x = &h.splitting;
    if h.modular_weight.iter().all(|&c| c == 0) {
        return Err(tail_failure(None, "zero modular weight has no tail direction"));
    }
    let u = linalg::primitive(&h.modular_weight);
    if linalg::dot_int(&u, x) <= 0 {
        return Err(tail_failure(None, "splitting does not pair positively with the modular weight"));
    }
    let (p, m) = h.adjacent;
    let pp = &d.components[p].polyhedron;
    let pm = &d.components[m].polyhedron;
    let s0 = tail_threshold([pp, pm], x);
    let geo = |j: usize| move |e: GeometryError| tail_failure(Some(j), e.to_string());
    let tp = cut_tail(pp, x, s0).map_err(geo(p))?;
    let tm = cut_tail(pm, x, s0).map_err(geo(m))?;

    let neg_x: Vec<i64> = x.iter().map(|c| -c).collect();
    let section = tp.with_inequality(neg_x, rat(s0)).map_err(geo(p))?;
    if section.is_empty() {
        return Err(tail_failure(Some(p), "no tail beyond the threshold"));
    }
    if !section.is_bounded() {
        return Err(tail_failure(Some(p), "tail cross-section is unbounded"));
    }
    let chart = leaf_chart(&h.modular_weight, x)
        .ok_or_else(|| tail_failure(None, "modular weight and splitting are not transverse"))?;
    let apply = |pt: &Vec<Rat>| -> Vec<Rat> { chart.iter().map(|row| linalg::dot_rat(row, pt)).collect() };

    let section_leaf = section.vertices().map_err(geo(p))?.iter().map(apply).min();
    let leaf_min = match h.leaf.vertices() {
        Ok(vs) if h.leaf.is_bounded() => vs.into_iter().min(),
        _ => None,
    };
    let (Some(a), Some(b)) = (section_leaf, leaf_min) else {
        return Err(tail_failure(None, "leaf polytope is empty or unbounded"));
    };
    let offset: Vec<Rat> = a.iter().zip(&b).map(|(s, l)| s - l).collect();
    let zero = vec![Rat::zero(); d.rank - 1];
    let model = h
        .leaf
        .translate(&offset)
        .and_then(|leaf| leaf.preimage(d.rank, &chart, &zero))
        .and_then(|cyl| cut_tail(&cyl, x, s0))
        .map_err(|e| tail_failure(None, e.to_string()))?;
    for (j, t) in [(p, &tp), (m, &tm)] {
        if !model.set_eq(t).map_err(geo(j))? {
            return Err(tail_failure(
                Some(j),
                format!("tail beyond <x,X> <= -{s0} is not the half-line times the leaf polytope"),
            ));
        }
    }
    Ok(TailMatch {
        hypersurface: i,
        threshold: s0,
        splitting: x.clone(),
        plus: p,
        minus: m,
        plus_tail: tp,
        minus_tail: tm,
        leaf_offset: offset,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedTail {
    pub component: usize,
    pub sign: Sign,
    pub tail: LatticePolyhedron,
}

/// Neighbourhood `Z_i × (-ε, ε)` seen through the moment map: the two
/// opposite-sign tails truncated at the threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalModel {
    pub hypersurface: usize,
    pub threshold: i64,
    pub splitting: Vec<i64>,
    pub plus: SignedTail,
    pub minus: SignedTail,
}

pub fn local_model(d: &BSpaceDescription, i: usize) -> Result<LocalModel, ModelError> {
    if i >= d.hypersurfaces.len() {
        return Err(ModelError::IndexOutOfRange { index: i, count: d.hypersurfaces.len() });
    }
    let (report, mut matches) = validate_b_toric(d);
    if !report.passed() {
        return Err(ModelError::NotValidated(report));
    }
    let tm = matches.swap_remove(i);
    Ok(LocalModel {
        hypersurface: i,
        threshold: tm.threshold,
        splitting: tm.splitting,
        plus: SignedTail { component: tm.plus, sign: d.components[tm.plus].sign, tail: tm.plus_tail },
        minus: SignedTail { component: tm.minus, sign: d.components[tm.minus].sign, tail: tm.minus_tail },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Monodromy {
    Identity,
}

/// `Z_i = S^1 × L`: the circle generated by the normalized splitting and the
/// toric leaf with its moment polytope. The return map is the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingTorus {
    pub circle_generator: Vec<i64>,
    pub leaf: LatticePolyhedron,
    pub monodromy: Monodromy,
}

impl fmt::Display for MappingTorus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gen = crate::character::Weight(self.circle_generator.clone());
        if self.leaf.rank() == 0 {
            write!(f, "S^1{gen} x {{pt}}, monodromy = identity")
        } else {
            write!(f, "S^1{gen} x L{}, monodromy = identity", self.leaf)
        }
    }
}

pub fn mapping_torus(h: &HypersurfaceRecord) -> Result<MappingTorus, ModelError> {
    Ok(MappingTorus {
        circle_generator: normalize_splitting(&h.modular_weight, &h.splitting)?,
        leaf: h.leaf.clone(),
        monodromy: Monodromy::Identity,
    })
}

/// Canonical representative of `X + ker_Z(v)`: reduce against the Hermite
/// basis of the kernel so that each pivot coordinate lands in `[0, pivot)`.
pub fn normalize_splitting(v: &[i64], x: &[i64]) -> Result<Vec<i64>, ModelError> {
    let pairing = linalg::dot_int(v, x);
    if pairing != 1 {
        return Err(ModelError::PairingNotOne { pairing });
    }
    let mut out = x.to_vec();
    for b in linalg::integer_kernel_basis(v) {
        let Some(col) = b.iter().position(|&c| c != 0) else { continue };
        let q = num_integer::Integer::div_floor(&out[col], &b[col]);
        for (o, bc) in out.iter_mut().zip(&b) {
            *o -= q * bc;
        }
    }
    Ok(out)
}

/// Every `(component, recession ray)` pair of the description.
pub fn end_incidences(d: &BSpaceDescription) -> Vec<(usize, RecessionRay)> {
    d.components
        .iter()
        .enumerate()
        .flat_map(|(j, c)| {
            c.polyhedron.recession_rays().unwrap_or_default().into_iter().map(move |r| (j, r))
        })
        .collect()
}

pub(crate) fn point_witness(v: &[Rat]) -> Vec<ExactRational> {
    v.iter().cloned().map(ExactRational).collect()
}

pub(crate) fn tail_witness(i: usize, f: &TailFailure) -> Witness {
    match f.component {
        Some(component) => Witness::End { hypersurface: i, component },
        None => Witness::Hypersurface(i),
    }
}
