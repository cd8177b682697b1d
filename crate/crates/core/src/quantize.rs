//! Formal quantization `Q(M)` as a virtual character.
//!
//! For a compact toric space `Q(M)` is the lattice-point character of the
//! closed moment polytope. For a b-toric space it is the signed sum of the
//! lattice-point characters of the components of `M - Z`. Each component is
//! unbounded, but beyond a threshold every tail is matched with an equal
//! tail of opposite sign, so the sum collapses to finitely many bounded
//! cores. The collapse is checked against direct pointwise evaluation before
//! it is returned.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::character::{Character, CharacterError, PolyhedralCharacter, Sign, VirtualCharacter, Weight};
use crate::checks::Witness;
use crate::linalg::{self, rat, Rat};
use crate::model::{self, BSpaceDescription, CompactToricSpace, Description, LocalModel, TailMatch, ValidationReport};
use crate::polyhedron::{GeometryError, LatticePolyhedron};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuantizationError {
    #[error("description failed validation:\n{}", .0.to_lines().trim_end())]
    NotValidated(ValidationReport),
    #[error("quantization is not finite ({witness}): {message}")]
    NotFinite { witness: Witness, message: String },
    #[error(
        "hypersurface {hypersurface} has zero modular weight; by the modular weight dichotomy \
         theorem Q(M) is only defined when every modular weight is nonzero"
    )]
    ZeroModularWeight { hypersurface: usize },
    #[error("rank mismatch: expected {expected}, got {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("collapsed character disagrees with pointwise evaluation at {weight}: {collapsed} != {pointwise}")]
    SelfCheckFailed { weight: Weight, collapsed: BigInt, pointwise: BigInt },
    #[error("hypersurface index {index} out of range ({count} hypersurfaces)")]
    IndexOutOfRange { index: usize, count: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl From<CharacterError> for QuantizationError {
    fn from(e: CharacterError) -> Self {
        match e {
            CharacterError::RankMismatch { expected, found } => QuantizationError::RankMismatch { expected, found },
            CharacterError::Malformed(m) => unreachable!("no parsing happens here: {m}"),
        }
    }
}

fn require_valid(d: &Description) -> Result<(), QuantizationError> {
    let report = model::validate_description(d);
    if report.passed() {
        Ok(())
    } else {
        Err(QuantizationError::NotValidated(report))
    }
}

fn lattice_character(rank: usize, p: &LatticePolyhedron, sign: Sign) -> Result<VirtualCharacter, QuantizationError> {
    let m = BigInt::from(sign.as_int());
    Ok(VirtualCharacter::from_pairs(rank, p.lattice_points()?.into_iter().map(|w| (w, m.clone())))?)
}

/// One multiplicity per lattice point of the Delzant polytope.
pub fn quantize_compact_toric(m: &CompactToricSpace) -> Result<VirtualCharacter, QuantizationError> {
    let d = Description::CompactToric(m.clone());
    require_valid(&d)?;
    lattice_character(m.rank, &m.polytope, Sign::Plus)
}

/// Signed count of the reduced space at `α`, with the contribution of each
/// component (`σ_j` if `α ∈ P_j`, else 0).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReducedSpaceResult {
    pub weight: Weight,
    pub count: i64,
    pub breakdown: Vec<i64>,
}

impl fmt::Display for ReducedSpaceResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "count = {}", self.count)?;
        if self.breakdown.len() > 1 {
            let parts: Vec<String> = self
                .breakdown
                .iter()
                .enumerate()
                .map(|(j, &c)| if c > 0 { format!("P{j}:+{c}") } else { format!("P{j}:{c}") })
                .collect();
            write!(f, " ({})", parts.join(", "))?;
        }
        Ok(())
    }
}

/// Pointwise signed membership; no validation and no collapse.
pub fn reduced_space_quantization(d: &Description, alpha: &Weight) -> Result<ReducedSpaceResult, QuantizationError> {
    if alpha.rank() != d.rank() {
        return Err(QuantizationError::RankMismatch { expected: d.rank(), found: alpha.rank() });
    }
    let breakdown: Vec<i64> = d
        .signed_pieces()
        .into_iter()
        .map(|(s, p)| if p.contains_weight(alpha) { s.as_int() } else { 0 })
        .collect();
    Ok(ReducedSpaceResult { weight: alpha.clone(), count: breakdown.iter().sum(), breakdown })
}

/// A matched pair of tails: terms `plus` and `minus` of the polyhedral
/// character, both cut by `<x, X> <= -threshold`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TailEnd {
    pub hypersurface: usize,
    pub splitting: Vec<i64>,
    pub threshold: i64,
    pub plus: usize,
    pub minus: usize,
}

impl From<TailMatch> for TailEnd {
    fn from(tm: TailMatch) -> Self {
        TailEnd {
            hypersurface: tm.hypersurface,
            splitting: tm.splitting,
            threshold: tm.threshold,
            plus: tm.plus,
            minus: tm.minus,
        }
    }
}

pub fn tail_ends(d: &BSpaceDescription) -> Result<Vec<TailEnd>, QuantizationError> {
    (0..d.hypersurfaces.len())
        .map(|i| {
            model::match_tails(d, i)
                .map(TailEnd::from)
                .map_err(|f| QuantizationError::NotFinite { witness: model::tail_witness(i, &f), message: f.message })
        })
        .collect()
}

/// Pointwise evaluation over the integer box `[lo, hi]`, in lexicographic
/// order. Evaluation is spread over the rayon pool; the collect keeps order.
pub fn evaluate_on_box<C: Character + Sync>(
    c: &C,
    lo: &[i64],
    hi: &[i64],
) -> Result<Vec<(Weight, BigInt)>, QuantizationError> {
    box_points(lo, hi)
        .into_par_iter()
        .map(|w| c.weight_multiplicity(&w).map(|m| (w, m)).map_err(QuantizationError::from))
        .collect()
}

fn box_points(lo: &[i64], hi: &[i64]) -> Vec<Weight> {
    let mut out = vec![Vec::new()];
    for (&a, &b) in lo.iter().zip(hi) {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (a..=b).map(move |x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(Weight).collect()
}

fn bounding_box(points: &[Vec<Rat>], rank: usize) -> Option<(Vec<i64>, Vec<i64>)> {
    let first = points.first()?;
    let mut lo: Vec<Rat> = first.clone();
    let mut hi: Vec<Rat> = first.clone();
    for p in points {
        for k in 0..rank {
            if p[k] < lo[k] {
                lo[k] = p[k].clone();
            }
            if p[k] > hi[k] {
                hi[k] = p[k].clone();
            }
        }
    }
    Some((
        lo.iter().map(|x| linalg::floor_i64(x).expect("box fits in i64")).collect(),
        hi.iter().map(|x| linalg::ceil_i64(x).expect("box fits in i64")).collect(),
    ))
}

/// `[lo - e - 1, hi + e + 1]` with `e = hi - lo`, so the box has at least
/// twice the extent of the given region.
pub fn verification_box(lo: &[i64], hi: &[i64]) -> (Vec<i64>, Vec<i64>) {
    lo.iter()
        .zip(hi)
        .map(|(&a, &b)| {
            let e = b - a;
            (a - e - 1, b + e + 1)
        })
        .unzip()
}

/// Removes every matched pair of tails and enumerates the bounded cores
/// `P_j ∩ {<x, X_e> > -s0_e}` that remain. The result is compared with
/// pointwise evaluation of `c` on a verification box covering the cores and
/// the start of every tail.
pub fn collapse_signed_tails(c: &PolyhedralCharacter, ends: &[TailEnd]) -> Result<VirtualCharacter, QuantizationError> {
    let rank = c.rank();
    let terms = c.terms();
    let mut cut: Vec<LatticePolyhedron> = terms.iter().map(|(_, p)| p.clone()).collect();
    let mut landmarks: Vec<Vec<Rat>> = Vec::new();

    for e in ends {
        let witness = |component| Witness::End { hypersurface: e.hypersurface, component };
        let (sp, pp) = &terms[e.plus];
        let (sm, pm) = &terms[e.minus];
        if sp == sm || e.plus == e.minus {
            return Err(QuantizationError::NotFinite {
                witness: witness(e.minus),
                message: "matched tails carry the same sign and add up instead of cancelling".into(),
            });
        }
        let tp = model::cut_tail(pp, &e.splitting, e.threshold)?;
        let tm = model::cut_tail(pm, &e.splitting, e.threshold)?;
        if !tp.set_eq(&tm)? {
            return Err(QuantizationError::NotFinite {
                witness: witness(e.minus),
                message: "matched tails differ beyond the threshold".into(),
            });
        }
        let neg: Vec<i64> = e.splitting.iter().map(|x| -x).collect();
        if let Ok(section) = tp.with_inequality(neg.clone(), rat(e.threshold)) {
            if section.is_bounded() {
                landmarks.extend(section.vertices().unwrap_or_default());
            }
        }
        for j in [e.plus, e.minus] {
            cut[j] = cut[j].with_inequality(neg.clone(), rat(e.threshold - 1))?;
        }
    }

    let mut out = VirtualCharacter::zero(rank);
    for (j, core) in cut.iter().enumerate() {
        if core.is_empty() {
            continue;
        }
        if let Some(ray) = core.recession_rays()?.into_iter().next() {
            return Err(QuantizationError::NotFinite {
                witness: Witness::Ray { component: j, ray },
                message: "unbounded end is not matched by an opposite-sign tail".into(),
            });
        }
        landmarks.extend(core.vertices()?);
        out = out.sum(&lattice_character(rank, core, terms[j].0)?)?;
    }

    if let Some((lo, hi)) = bounding_box(&landmarks, rank) {
        let (lo, hi) = verification_box(&lo, &hi);
        for (w, pointwise) in evaluate_on_box(c, &lo, &hi)? {
            let collapsed = out.multiplicity(&w);
            if collapsed != pointwise {
                return Err(QuantizationError::SelfCheckFailed { weight: w, collapsed, pointwise });
            }
        }
    }
    Ok(out)
}

pub fn polyhedral_character(d: &BSpaceDescription) -> PolyhedralCharacter {
    let terms = d.components.iter().map(|c| (c.sign, c.polyhedron.clone())).collect();
    PolyhedralCharacter::new(d.rank, terms).expect("parsed components share the rank")
}

pub fn quantize_b(d: &BSpaceDescription) -> Result<VirtualCharacter, QuantizationError> {
    if let Some(i) = d.hypersurfaces.iter().position(|h| h.modular_weight.iter().all(|&x| x == 0)) {
        return Err(QuantizationError::ZeroModularWeight { hypersurface: i });
    }
    let (report, matches) = model::validate_b_toric(d);
    if !report.passed() {
        return Err(QuantizationError::NotValidated(report));
    }
    let ends: Vec<TailEnd> = matches.into_iter().map(TailEnd::from).collect();
    collapse_signed_tails(&polyhedral_character(d), &ends)
}

pub fn quantize(d: &Description) -> Result<VirtualCharacter, QuantizationError> {
    match d {
        Description::CompactToric(m) => quantize_compact_toric(m),
        Description::BToric(b) => quantize_b(b),
    }
}

/// Signed sum of the two tails of a local model, evaluated on the window
/// `-s0 - 2 <= <x, X> <= -s0`. Set-equal opposite-sign tails give zero; any
/// other local model would contribute infinitely many weights and is
/// reported as not finite.
pub fn quantize_local_model(lm: &LocalModel) -> Result<VirtualCharacter, QuantizationError> {
    let rank = lm.splitting.len();
    let neg: Vec<i64> = lm.splitting.iter().map(|x| -x).collect();
    let mut window = VirtualCharacter::zero(rank);
    for t in [&lm.plus, &lm.minus] {
        let slab = t.tail.with_inequality(neg.clone(), rat(lm.threshold + 2))?;
        window = window.sum(&lattice_character(rank, &slab, t.sign)?)?;
    }
    let witness = Witness::Hypersurface(lm.hypersurface);
    if let Some((w, m)) = window.iter().next() {
        return Err(QuantizationError::NotFinite {
            witness,
            message: format!("local quantization has multiplicity {m} at {w} and repeats along the whole tail"),
        });
    }
    if !lm.plus.tail.set_eq(&lm.minus.tail)? {
        return Err(QuantizationError::NotFinite { witness, message: "local tails are not set-equal".into() });
    }
    Ok(window)
}

pub fn cancel(d: &BSpaceDescription, i: usize) -> Result<(LocalModel, VirtualCharacter), QuantizationError> {
    let lm = model::local_model(d, i).map_err(|e| match e {
        model::ModelError::IndexOutOfRange { index, count } => QuantizationError::IndexOutOfRange { index, count },
        model::ModelError::NotValidated(r) => QuantizationError::NotValidated(r),
        model::ModelError::Geometry(g) => QuantizationError::Geometry(g),
        model::ModelError::PairingNotOne { .. } => unreachable!("validated descriptions pair to 1"),
    })?;
    let q = quantize_local_model(&lm)?;
    Ok((lm, q))
}

/// Both sides of `(Q(M) ⊗ Q(N))^T = Q((M × N)//_0 T)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QrReport {
    pub left: BigInt,
    pub right: BigInt,
    pub first_difference: Option<Weight>,
}

impl QrReport {
    pub fn verified(&self) -> bool {
        self.left == self.right && self.first_difference.is_none()
    }
}

impl fmt::Display for QrReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(Q(M) x Q(N))^T = {}", self.left)?;
        writeln!(f, "Q((M x N)//0 T) = {}", self.right)?;
        match &self.first_difference {
            None if self.left == self.right => write!(f, "VERIFIED"),
            None => write!(f, "MISMATCH"),
            Some(w) => write!(f, "MISMATCH at weight {w}"),
        }
    }
}

pub fn verify_qr_product(m: &Description, n: &CompactToricSpace) -> Result<QrReport, QuantizationError> {
    if m.rank() != n.rank {
        return Err(QuantizationError::RankMismatch { expected: m.rank(), found: n.rank });
    }
    let qm = quantize(m)?;
    verify_qr_with_character(&qm, m, n)
}

/// Same as [`verify_qr_product`] but takes `Q(M)` from the caller, e.g. a
/// cached character. The right side never uses it: it counts lattice points
/// of the zero fibre of the product moment map, `{y : y ∈ P_j, -y ∈ Δ_N}`,
/// for each component.
pub fn verify_qr_with_character(
    qm: &VirtualCharacter,
    m: &Description,
    n: &CompactToricSpace,
) -> Result<QrReport, QuantizationError> {
    let rank = m.rank();
    if n.rank != rank {
        return Err(QuantizationError::RankMismatch { expected: rank, found: n.rank });
    }
    if qm.rank() != rank {
        return Err(QuantizationError::RankMismatch { expected: rank, found: qm.rank() });
    }
    let qn = quantize_compact_toric(n)?;
    let left = qm.tensor_product(&qn)?.invariant_part();

    // y -> (y, -y)
    let diag: Vec<Vec<Rat>> = (0..2 * rank)
        .map(|r| {
            (0..rank)
                .map(|c| {
                    if r == c {
                        Rat::one()
                    } else if r == c + rank {
                        -Rat::one()
                    } else {
                        Rat::zero()
                    }
                })
                .collect()
        })
        .collect();
    let origin = vec![Rat::zero(); 2 * rank];
    let mut fibre = VirtualCharacter::zero(rank);
    for (s, p) in m.signed_pieces() {
        let zero_level = p.product(&n.polytope).preimage(rank, &diag, &origin)?;
        fibre = fibre.sum(&lattice_character(rank, &zero_level, s)?)?;
    }
    let right = fibre.dimension();

    // per-weight contributions: q_m(α)·q_n(-α) against the fibre count at α
    let pairing: Vec<(Weight, BigInt)> = qn
        .iter()
        .map(|(b, mb)| {
            let a = b.neg();
            let ma = qm.multiplicity(&a);
            (a, ma * mb)
        })
        .filter(|(_, x)| !x.is_zero())
        .collect();
    let left_char = VirtualCharacter::from_pairs(rank, pairing)?;
    let mut weights: Vec<&Weight> = left_char.support().chain(fibre.support()).collect();
    weights.sort();
    let first_difference = weights
        .into_iter()
        .find(|w| left_char.multiplicity(w) != fibre.multiplicity(w))
        .cloned();
    Ok(QrReport { left, right, first_difference })
}

/// Support weights lying on a facet of some moment image, where the closed
/// membership convention decides the multiplicity.
pub fn singular_weights(d: &Description, q: &VirtualCharacter) -> Vec<Weight> {
    let pieces = d.signed_pieces();
    q.support()
        .filter(|w| {
            let x = linalg::rat_vec(w.coords());
            pieces.iter().any(|(_, p)| p.contains_weight(w) && !p.tight_at(&x).is_empty())
        })
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Component, HypersurfaceRecord};

    fn w(c: &[i64]) -> Weight {
        Weight(c.to_vec())
    }

    fn half_line(sign: Sign, b: i64) -> Component {
        Component { sign, polyhedron: LatticePolyhedron::from_int_rows(1, &[(vec![1], b)]).unwrap() }
    }

    fn b_sphere(a: i64, b: i64) -> BSpaceDescription {
        BSpaceDescription {
            rank: 1,
            components: vec![half_line(Sign::Plus, a), half_line(Sign::Minus, b)],
            hypersurfaces: vec![HypersurfaceRecord {
                modular_weight: vec![1],
                splitting: vec![1],
                leaf: LatticePolyhedron::whole_space(0),
                adjacent: (0, 1),
            }],
        }
    }

    fn compact(lo: &[i64], hi: &[i64]) -> CompactToricSpace {
        CompactToricSpace { rank: lo.len(), polytope: LatticePolyhedron::lattice_box(lo, hi).unwrap() }
    }

    fn ones(rank: usize, ws: impl IntoIterator<Item = Vec<i64>>) -> VirtualCharacter {
        VirtualCharacter::from_pairs(rank, ws.into_iter().map(|c| (Weight(c), 1))).unwrap()
    }

    #[test]
    fn compact_examples() {
        let q = quantize_compact_toric(&compact(&[0], &[0])).unwrap();
        assert_eq!(q, VirtualCharacter::trivial(1));
        let q = quantize_compact_toric(&compact(&[0], &[3])).unwrap();
        assert_eq!(q, ones(1, (0..=3).map(|x| vec![x])));
        let tri = LatticePolyhedron::from_int_rows(2, &[(vec![-1, 0], 0), (vec![0, -1], 0), (vec![1, 1], 2)]).unwrap();
        let q = quantize_compact_toric(&CompactToricSpace { rank: 2, polytope: tri }).unwrap();
        assert_eq!(q.dimension(), BigInt::from(6));
    }

    #[test]
    fn reduced_space_examples() {
        let m = Description::CompactToric(compact(&[0], &[3]));
        assert_eq!(reduced_space_quantization(&m, &w(&[2])).unwrap().count, 1);
        let d = Description::BToric(b_sphere(2, -1));
        let r = reduced_space_quantization(&d, &w(&[-4])).unwrap();
        assert_eq!((r.count, r.to_string().as_str()), (0, "count = 0 (P0:+1, P1:-1)"));
        let r = reduced_space_quantization(&d, &w(&[1])).unwrap();
        assert_eq!(r.to_string(), "count = 1 (P0:+1, P1:0)");
        assert!(matches!(
            reduced_space_quantization(&d, &w(&[1, 1])),
            Err(QuantizationError::RankMismatch { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn quantize_b_examples() {
        assert_eq!(quantize_b(&b_sphere(2, -1)).unwrap(), ones(1, [vec![0], vec![1], vec![2]]));
        assert!(quantize_b(&b_sphere(4, 4)).unwrap().is_zero());
        let line = |sign| Component { sign, polyhedron: LatticePolyhedron::whole_space(1) };
        let mut torus = b_sphere(0, 0);
        torus.components = vec![line(Sign::Plus), line(Sign::Minus)];
        torus.hypersurfaces.push(HypersurfaceRecord {
            modular_weight: vec![-1],
            splitting: vec![-1],
            leaf: LatticePolyhedron::whole_space(0),
            adjacent: (0, 1),
        });
        assert!(quantize_b(&torus).unwrap().is_zero());

        let mut zero = b_sphere(2, -1);
        zero.hypersurfaces[0].modular_weight = vec![0];
        let e = quantize_b(&zero).unwrap_err();
        assert!(e.to_string().contains("dichotomy"));
    }

    #[test]
    fn collapse_examples() {
        let d = b_sphere(2, -1);
        let c = polyhedral_character(&d);
        let ends = tail_ends(&d).unwrap();
        assert_eq!(collapse_signed_tails(&c, &ends).unwrap(), ones(1, [vec![0], vec![1], vec![2]]));

        let lone = PolyhedralCharacter::new(1, vec![(Sign::Plus, d.components[0].polyhedron.clone())]).unwrap();
        let e = collapse_signed_tails(&lone, &[]).unwrap_err();
        assert!(matches!(e, QuantizationError::NotFinite { witness: Witness::Ray { component: 0, .. }, .. }));

        assert!(collapse_signed_tails(&PolyhedralCharacter::empty(1), &[]).unwrap().is_zero());
    }

    #[test]
    fn local_model_examples() {
        let (_, q) = cancel(&b_sphere(2, -1), 0).unwrap();
        assert!(q.is_zero());

        let mut lm = model::local_model(&b_sphere(2, -1), 0).unwrap();
        lm.minus.sign = Sign::Plus;
        let e = quantize_local_model(&lm).unwrap_err();
        assert!(e.to_string().contains("multiplicity 2"), "{e}");
        assert!(matches!(cancel(&b_sphere(2, -1), 1), Err(QuantizationError::IndexOutOfRange { index: 1, count: 1 })));
    }

    #[test]
    fn qr_examples() {
        let m = Description::CompactToric(compact(&[0], &[3]));
        let r = verify_qr_product(&m, &compact(&[-2], &[0])).unwrap();
        assert_eq!((r.left.clone(), r.right.clone()), (BigInt::from(3), BigInt::from(3)));
        assert!(r.verified());

        let s = Description::BToric(b_sphere(2, -1));
        let r = verify_qr_product(&s, &compact(&[0], &[0])).unwrap();
        assert_eq!(r.left, BigInt::one());
        assert!(r.verified());

        let r = verify_qr_product(&s, &compact(&[5], &[6])).unwrap();
        assert!(r.left.is_zero() && r.verified());

        // a corrupted cache is caught by the independent right side
        let bad = ones(1, [vec![0], vec![-1]]);
        let r = verify_qr_with_character(&bad, &s, &compact(&[0], &[1])).unwrap();
        assert!(!r.verified());
        assert_eq!(r.first_difference, Some(w(&[-1])));
        assert!(r.to_string().ends_with("MISMATCH at weight (-1)"));
    }

    #[test]
    fn boundary_weights() {
        let d = Description::BToric(b_sphere(2, -1));
        let q = quantize(&d).unwrap();
        assert_eq!(singular_weights(&d, &q), vec![w(&[2])]);
    }
}
