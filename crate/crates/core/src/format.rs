//! JSON document formats: exact rationals and the versioned description
//! schema `bquant/1`.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::linalg::Rat;
use crate::polyhedron::LatticePolyhedron;

pub const SCHEMA: &str = "bquant/1";

/// Exact rational literal. Accepts JSON integers or strings `"p"` / `"p/q"`;
/// floating-point literals are rejected. Always written as a string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExactRational(pub Rat);

pub(crate) const INEXACT: &str = "non-exact numeric literal";

impl ExactRational {
    pub fn parse(s: &str) -> Result<Self, String> {
        let t = s.trim();
        let ok = !t.is_empty()
            && t.split('/').count() <= 2
            && t.split('/').all(|part| {
                let digits = part.strip_prefix('-').unwrap_or(part);
                !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
            });
        if !ok {
            return Err(format!("{INEXACT} {s:?}: expected an integer or \"p/q\""));
        }
        Rat::from_str(t)
            .map(ExactRational)
            .map_err(|_| format!("invalid rational {s:?} (zero denominator?)"))
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for ExactRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExactRational;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an integer or an exact rational string \"p/q\"")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExactRational, E> {
                Ok(ExactRational(Rat::from_integer(v.into())))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExactRational, E> {
                Ok(ExactRational(Rat::from_integer(v.into())))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExactRational, E> {
                Err(E::custom(format!("{INEXACT} {v}; write rationals as \"p/q\" strings")))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExactRational, E> {
                ExactRational::parse(v).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct DescriptionDoc {
    pub schema: String,
    pub kind: String,
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polytope: Option<LatticePolyhedron>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<ComponentDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypersurfaces: Option<Vec<HypersurfaceDoc>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ComponentDoc {
    pub sign: i64,
    pub polyhedron: LatticePolyhedron,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct HypersurfaceDoc {
    pub modular_weight: Vec<i64>,
    pub splitting: Vec<i64>,
    pub leaf: LatticePolyhedron,
    pub adjacent: [usize; 2],
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_literals() {
        let r: ExactRational = serde_json::from_str("\"-5/2\"").unwrap();
        assert_eq!(r.0, Rat::new((-5).into(), 2.into()));
        let r: ExactRational = serde_json::from_str("7").unwrap();
        assert_eq!(r.0, Rat::from_integer(7.into()));
        assert!(serde_json::from_str::<ExactRational>("0.5").is_err());
        assert!(serde_json::from_str::<ExactRational>("\"0.5\"").is_err());
        assert!(serde_json::from_str::<ExactRational>("\"1e3\"").is_err());
        assert!(serde_json::from_str::<ExactRational>("\"1/0\"").is_err());
        assert_eq!(serde_json::to_string(&r).unwrap(), "\"7\"");
    }
}
