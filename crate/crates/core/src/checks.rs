//! Named hypothesis checks with witnesses.
//!
//! Every check is a pure function of the description and reports either a
//! pass or a failure carrying the first offending object found (iteration is
//! always in index order, so reports are reproducible).

use std::fmt;

use serde::Serialize;

use crate::character::Weight;
use crate::format::ExactRational;
use crate::linalg;
use crate::model::{self, BSpaceDescription, CompactToricSpace, Description};
use crate::polyhedron::{LatticePolyhedron, RecessionRay};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Hypersurface(usize),
    Component(usize),
    Vector(Vec<i64>),
    Vertex(Vec<ExactRational>),
    LeafVertex { hypersurface: usize, vertex: Vec<ExactRational> },
    Ray { component: usize, ray: RecessionRay },
    End { hypersurface: usize, component: usize },
}

fn point(v: &[ExactRational]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Hypersurface(i) => write!(f, "hypersurface={i}"),
            Witness::Component(j) => write!(f, "component={j}"),
            Witness::Vector(v) => write!(f, "v={}", Weight(v.clone())),
            Witness::Vertex(v) => write!(f, "vertex={}", point(v)),
            Witness::LeafVertex { hypersurface, vertex } => {
                write!(f, "hypersurface={hypersurface} vertex={}", point(vertex))
            }
            Witness::Ray { component, ray } => write!(f, "component={component} ray={ray}"),
            Witness::End { hypersurface, component } => {
                write!(f, "hypersurface={hypersurface} component={component}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub witness: Option<Witness>,
    pub message: String,
}

impl CheckReport {
    pub fn pass(name: &str) -> Self {
        CheckReport { name: name.into(), passed: true, witness: None, message: "ok".into() }
    }

    pub fn fail(name: &str, witness: Witness, message: impl Into<String>) -> Self {
        CheckReport { name: name.into(), passed: false, witness: Some(witness), message: message.into() }
    }

    /// `NAME PASS` or `NAME FAIL witness: message`.
    pub fn line(&self) -> String {
        match &self.witness {
            None => format!("{} PASS", self.name),
            Some(w) => format!("{} FAIL {w}: {}", self.name, self.message),
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.line())
    }
}

pub const MODULAR_DICHOTOMY: &str = "modular-dichotomy";
pub const GAMMA_INTEGRALITY: &str = "gamma-integrality";
pub const MU_INTEGRALITY: &str = "mu-integrality";
pub const PROPERNESS: &str = "properness";
pub const BOUNDED: &str = "bounded";
pub const DELZANT: &str = "delzant";
pub const ORIENTATION: &str = "orientation";
pub const END_MATCHING: &str = "end-matching";
pub const TAIL_PRODUCT: &str = "tail-product";

fn is_zero(v: &[i64]) -> bool {
    v.iter().all(|&x| x == 0)
}

pub fn check_modular_dichotomy(d: &BSpaceDescription) -> CheckReport {
    let zeros: Vec<usize> = d
        .hypersurfaces
        .iter()
        .enumerate()
        .filter(|(_, h)| is_zero(&h.modular_weight))
        .map(|(i, _)| i)
        .collect();
    match zeros.first() {
        None => CheckReport::pass(MODULAR_DICHOTOMY),
        Some(&i) if zeros.len() == d.hypersurfaces.len() => CheckReport::fail(
            MODULAR_DICHOTOMY,
            Witness::Hypersurface(i),
            "all modular weights are zero; by the modular weight dichotomy theorem \
             Q(M) is only defined when every modular weight is nonzero",
        ),
        Some(&i) => CheckReport::fail(
            MODULAR_DICHOTOMY,
            Witness::Hypersurface(i),
            "modular weights mix zero and nonzero values, which the modular weight \
             dichotomy theorem rules out for a b-symplectic manifold",
        ),
    }
}

/// Compact polytopes must have lattice vertices: the main polytope of a
/// compact space, or each bounded leaf polytope.
pub fn check_gamma_integrality(d: &Description) -> CheckReport {
    match d {
        Description::CompactToric(m) => {
            if let Ok(Some(v)) = m.polytope.non_lattice_vertex() {
                return CheckReport::fail(
                    GAMMA_INTEGRALITY,
                    Witness::Vertex(model::point_witness(&v)),
                    "polytope vertex is not a lattice point",
                );
            }
        }
        Description::BToric(b) => {
            for (i, h) in b.hypersurfaces.iter().enumerate() {
                if !h.leaf.is_bounded() {
                    continue;
                }
                if let Ok(Some(v)) = h.leaf.non_lattice_vertex() {
                    return CheckReport::fail(
                        GAMMA_INTEGRALITY,
                        Witness::LeafVertex { hypersurface: i, vertex: model::point_witness(&v) },
                        "leaf polytope vertex is not a lattice point",
                    );
                }
            }
        }
    }
    CheckReport::pass(GAMMA_INTEGRALITY)
}

/// Zero modular weights are left to the dichotomy check.
pub fn check_mu_integrality(d: &BSpaceDescription) -> CheckReport {
    for (i, h) in d.hypersurfaces.iter().enumerate() {
        let v = &h.modular_weight;
        if is_zero(v) {
            continue;
        }
        if linalg::gcd_slice(v) != 1 {
            return CheckReport::fail(
                MU_INTEGRALITY,
                Witness::Vector(v.clone()),
                format!("modular weight of hypersurface {i} is not primitive"),
            );
        }
        let pairing = linalg::dot_int(v, &h.splitting);
        if pairing != 1 {
            return CheckReport::fail(
                MU_INTEGRALITY,
                Witness::Hypersurface(i),
                format!("splitting pairs to {pairing} with the modular weight, expected 1"),
            );
        }
    }
    CheckReport::pass(MU_INTEGRALITY)
}

/// Each hypersurface end `(i, j)` owns the ray `-v_i/gcd` of component `j`.
fn end_directions(d: &BSpaceDescription) -> Vec<(usize, usize, RecessionRay)> {
    let mut out = Vec::new();
    for (i, h) in d.hypersurfaces.iter().enumerate() {
        if let Some(r) = h.tail_direction() {
            out.push((i, h.adjacent.0, r.clone()));
            if h.adjacent.1 != h.adjacent.0 {
                out.push((i, h.adjacent.1, r));
            }
        }
    }
    out
}

pub fn check_properness(d: &BSpaceDescription) -> CheckReport {
    let ends = end_directions(d);
    for (j, ray) in model::end_incidences(d) {
        if !ends.iter().any(|(_, c, r)| *c == j && *r == ray) {
            return CheckReport::fail(
                PROPERNESS,
                Witness::Ray { component: j, ray },
                "recession ray is not the end of any hypersurface with nonzero modular weight",
            );
        }
    }
    CheckReport::pass(PROPERNESS)
}

pub fn check_bounded(m: &CompactToricSpace) -> CheckReport {
    if m.polytope.is_empty() {
        return CheckReport::fail(BOUNDED, Witness::Component(0), "polytope is empty");
    }
    match m.polytope.recession_rays() {
        Ok(rays) if rays.is_empty() => CheckReport::pass(BOUNDED),
        Ok(rays) => CheckReport::fail(
            BOUNDED,
            Witness::Ray { component: 0, ray: rays[0].clone() },
            "compact toric polytope must be bounded",
        ),
        Err(e) => CheckReport::fail(BOUNDED, Witness::Component(0), e.to_string()),
    }
}

pub fn check_delzant(m: &CompactToricSpace) -> CheckReport {
    if !m.polytope.is_bounded() || m.polytope.is_empty() {
        return CheckReport::fail(DELZANT, Witness::Component(0), "Delzant test needs a nonempty polytope");
    }
    match m.polytope.delzant_defect() {
        Ok(None) => CheckReport::pass(DELZANT),
        Ok(Some(v)) => CheckReport::fail(
            DELZANT,
            Witness::Vertex(model::point_witness(&v)),
            "edge directions at this vertex do not form a lattice basis",
        ),
        Err(e) => CheckReport::fail(DELZANT, Witness::Component(0), e.to_string()),
    }
}

/// Leaf polytopes must be nonempty, bounded and Delzant.
pub fn check_leaf_delzant(d: &BSpaceDescription) -> CheckReport {
    for (i, h) in d.hypersurfaces.iter().enumerate() {
        if h.leaf.is_empty() || !h.leaf.is_bounded() {
            return CheckReport::fail(DELZANT, Witness::Hypersurface(i), "leaf polytope is empty or unbounded");
        }
        match h.leaf.delzant_defect() {
            Ok(None) => {}
            Ok(Some(v)) => {
                return CheckReport::fail(
                    DELZANT,
                    Witness::LeafVertex { hypersurface: i, vertex: model::point_witness(&v) },
                    "leaf polytope is not Delzant at this vertex",
                )
            }
            Err(e) => return CheckReport::fail(DELZANT, Witness::Hypersurface(i), e.to_string()),
        }
    }
    CheckReport::pass(DELZANT)
}

/// Components on either side of a hypersurface carry opposite symplectic
/// orientations.
pub fn check_orientation(d: &BSpaceDescription) -> CheckReport {
    for (i, h) in d.hypersurfaces.iter().enumerate() {
        let (p, m) = h.adjacent;
        if p == m {
            return CheckReport::fail(ORIENTATION, Witness::Hypersurface(i), "hypersurface is adjacent to a single component");
        }
        if d.components[p].sign == d.components[m].sign {
            return CheckReport::fail(
                ORIENTATION,
                Witness::Hypersurface(i),
                format!("adjacent components {p} and {m} have the same sign"),
            );
        }
    }
    CheckReport::pass(ORIENTATION)
}

/// Every hypersurface end is a recession ray of its component, and no ray is
/// claimed twice.
pub fn check_end_matching(d: &BSpaceDescription) -> CheckReport {
    let ends = end_directions(d);
    for (k, (i, j, r)) in ends.iter().enumerate() {
        let rays = d.components[*j].polyhedron.recession_rays().unwrap_or_default();
        if !rays.contains(r) {
            return CheckReport::fail(
                END_MATCHING,
                Witness::End { hypersurface: *i, component: *j },
                format!("component has no recession ray {r}"),
            );
        }
        if ends[..k].iter().any(|(i2, j2, r2)| i2 != i && j2 == j && r2 == r) {
            return CheckReport::fail(
                END_MATCHING,
                Witness::End { hypersurface: *i, component: *j },
                format!("ray {r} is already the end of another hypersurface"),
            );
        }
    }
    CheckReport::pass(END_MATCHING)
}

/// Beyond the threshold both adjacent moment images are a half-line times
/// the leaf polytope, and tails inside one component do not overlap.
pub fn check_tail_product(d: &BSpaceDescription) -> CheckReport {
    tail_product(d).0
}

/// The tail-product report together with the matches it established.
pub(crate) fn tail_product(d: &BSpaceDescription) -> (CheckReport, Vec<model::TailMatch>) {
    let mut matches = Vec::new();
    for (i, h) in d.hypersurfaces.iter().enumerate() {
        if is_zero(&h.modular_weight) {
            continue;
        }
        match model::match_tails(d, i) {
            Ok(tm) => matches.push(tm),
            Err(f) => return (CheckReport::fail(TAIL_PRODUCT, model::tail_witness(i, &f), f.message), matches),
        }
    }
    let tails: Vec<(usize, usize, &LatticePolyhedron)> = matches
        .iter()
        .flat_map(|tm| [(tm.hypersurface, tm.plus, &tm.plus_tail), (tm.hypersurface, tm.minus, &tm.minus_tail)])
        .collect();
    for (k, &(i, j, t)) in tails.iter().enumerate() {
        for &(i2, j2, t2) in &tails[..k] {
            if j == j2 && i != i2 && t.intersect(t2).map_or(true, |x| !x.is_empty()) {
                let report = CheckReport::fail(
                    TAIL_PRODUCT,
                    Witness::End { hypersurface: i, component: j },
                    format!("tail overlaps the tail of hypersurface {i2}"),
                );
                return (report, matches);
            }
        }
    }
    (CheckReport::pass(TAIL_PRODUCT), matches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::character::Sign;
    use crate::linalg::Rat;
    use crate::model::{Component, HypersurfaceRecord};

    fn half_line(sign: Sign, normal: i64, b: i64) -> Component {
        Component { sign, polyhedron: LatticePolyhedron::from_int_rows(1, &[(vec![normal], b)]).unwrap() }
    }

    fn hyp(v: i64, adjacent: (usize, usize)) -> HypersurfaceRecord {
        HypersurfaceRecord {
            modular_weight: vec![v],
            splitting: vec![v],
            leaf: LatticePolyhedron::whole_space(0),
            adjacent,
        }
    }

    fn b_sphere() -> BSpaceDescription {
        BSpaceDescription {
            rank: 1,
            components: vec![half_line(Sign::Plus, 1, 2), half_line(Sign::Minus, 1, -1)],
            hypersurfaces: vec![hyp(1, (0, 1))],
        }
    }

    fn compact(rows: &[(Vec<i64>, i64)]) -> CompactToricSpace {
        let polytope = LatticePolyhedron::from_int_rows(rows[0].0.len(), rows).unwrap();
        CompactToricSpace { rank: polytope.rank(), polytope }
    }

    #[test]
    fn dichotomy_examples() {
        assert!(check_modular_dichotomy(&b_sphere()).passed);
        let mut d = b_sphere();
        d.hypersurfaces.push(hyp(0, (0, 1)));
        let r = check_modular_dichotomy(&d);
        assert_eq!(r.witness, Some(Witness::Hypersurface(1)));
        assert!(r.message.contains("mix"));
        d.hypersurfaces.clear();
        assert!(check_modular_dichotomy(&d).passed);
        d.hypersurfaces.push(hyp(0, (0, 1)));
        let r = check_modular_dichotomy(&d);
        assert!(!r.passed && r.message.contains("dichotomy theorem"));
    }

    #[test]
    fn gamma_examples() {
        let m = compact(&[(vec![1], 3), (vec![-1], 0)]);
        assert!(check_gamma_integrality(&Description::CompactToric(m)).passed);
        let m = LatticePolyhedron::from_rational_rows(
            1,
            vec![(vec![Rat::from_integer(1.into())], Rat::new(5.into(), 2.into())), (vec![Rat::from_integer((-1).into())], Rat::from_integer(0.into()))],
        )
        .unwrap();
        let r = check_gamma_integrality(&Description::CompactToric(CompactToricSpace { rank: 1, polytope: m }));
        assert_eq!(r.witness.unwrap().to_string(), "vertex=(5/2)");
        assert!(check_gamma_integrality(&Description::BToric(b_sphere())).passed);
    }

    #[test]
    fn mu_examples() {
        let two = |v: Vec<i64>, x: Vec<i64>| BSpaceDescription {
            rank: 2,
            components: vec![],
            hypersurfaces: vec![HypersurfaceRecord {
                modular_weight: v,
                splitting: x,
                leaf: LatticePolyhedron::lattice_box(&[0], &[1]).unwrap(),
                adjacent: (0, 1),
            }],
        };
        assert!(check_mu_integrality(&two(vec![1, 0], vec![1, 0])).passed);
        let r = check_mu_integrality(&two(vec![2, 0], vec![1, 0]));
        assert_eq!(r.witness, Some(Witness::Vector(vec![2, 0])));
        assert!(check_mu_integrality(&two(vec![1, 1], vec![1, 0])).passed);
        assert!(!check_mu_integrality(&two(vec![1, 1], vec![1, 1])).passed);
    }

    #[test]
    fn properness_examples() {
        assert!(check_properness(&b_sphere()).passed);
        let mut d = b_sphere();
        d.components.push(half_line(Sign::Plus, -1, -5));
        let r = check_properness(&d);
        assert_eq!(r.witness.as_ref().unwrap().to_string(), "component=2 ray=(1)");
        let bounded = BSpaceDescription {
            rank: 1,
            components: vec![Component {
                sign: Sign::Plus,
                polyhedron: LatticePolyhedron::lattice_box(&[0], &[3]).unwrap(),
            }],
            hypersurfaces: vec![],
        };
        assert!(check_properness(&bounded).passed);
    }

    #[test]
    fn non_delzant_triangle() {
        let m = compact(&[(vec![-1, 0], 0), (vec![0, -1], 0), (vec![2, 1], 2)]);
        let r = check_delzant(&m);
        assert_eq!(r.witness.unwrap().to_string(), "vertex=(1,0)");
        assert!(check_bounded(&m).passed);
    }

    #[test]
    fn line_form() {
        assert_eq!(CheckReport::pass("delzant").line(), "delzant PASS");
        let r = CheckReport::fail("mu-integrality", Witness::Vector(vec![2]), "not primitive");
        assert_eq!(r.line(), "mu-integrality FAIL v=(2): not primitive");
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"vector\":[2]"));
    }

    #[test]
    fn b_torus_passes_structural_checks() {
        let line = |sign| Component { sign, polyhedron: LatticePolyhedron::whole_space(1) };
        let d = BSpaceDescription {
            rank: 1,
            components: vec![line(Sign::Plus), line(Sign::Minus)],
            hypersurfaces: vec![hyp(1, (0, 1)), hyp(-1, (0, 1))],
        };
        for r in [check_properness(&d), check_end_matching(&d), check_tail_product(&d), check_orientation(&d)] {
            assert!(r.passed, "{}", r.line());
        }
    }
}
