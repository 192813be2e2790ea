//! JSON system descriptions.
//!
//! ```json
//! {
//!   "space": {"real": 1, "complex": 0, "primes": [2]},
//!   "precision": 96,
//!   "constants": {
//!     "kappa": "(3-sqrt(17))/2",
//!     "lambda": {"value": "(3+sqrt(17))/2", "padic": {"2": 0}}
//!   },
//!   "vertices": ["a", "b"],
//!   "edges": [
//!     {"from": "a", "to": "b", "name": "T(x)+t1",
//!      "linear": ["kappa", "lambda"], "translate": ["kappa", "lambda"]}
//!   ]
//! }
//! ```
//!
//! Coordinates run over the reals, then the complex factors, then the
//! p-adic factors. A real or p-adic coordinate is an expression over
//! rationals, `sqrt(n)` and the constants; a real one may also be a plain
//! JSON number. A complex coordinate is a pair `[re, im]`. The `padic`
//! selector of a constant picks the embedding of the quadratic field into
//! ℚ_p under which that constant reduces to the given residue.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Constant, Coord, EdgeSpec, GifsGraph, DEFAULT_PRECISION};
use crate::algebraic::QuadraticNumber;
use crate::error::{Error, Result};
use crate::mixed_space::SpaceSignature;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    space: RawSpace,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    precision: Option<usize>,
    #[serde(default)]
    constants: BTreeMap<String, RawConstant>,
    vertices: Vec<String>,
    #[serde(default)]
    edges: Vec<RawEdge>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    real: usize,
    #[serde(default)]
    complex: usize,
    #[serde(default)]
    primes: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawConstant {
    Plain(String),
    Selected {
        value: String,
        #[serde(default)]
        padic: BTreeMap<String, u32>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawScalar {
    Number(f64),
    Expr(String),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawCoord {
    Number(f64),
    Expr(String),
    Pair([RawScalar; 2]),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    from: String,
    to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    linear: Vec<RawCoord>,
    translate: Vec<RawCoord>,
}

fn scalar(s: &RawScalar, lookup: &dyn Fn(&str) -> Option<QuadraticNumber>) -> Result<f64> {
    match s {
        RawScalar::Number(x) => Ok(*x),
        RawScalar::Expr(e) => Ok(QuadraticNumber::parse_expr(e, lookup)?.embed_real()),
    }
}

fn coord(c: &RawCoord, lookup: &dyn Fn(&str) -> Option<QuadraticNumber>) -> Result<Coord> {
    Ok(match c {
        RawCoord::Number(x) => Coord::Float(*x),
        RawCoord::Expr(e) => Coord::Exact(QuadraticNumber::parse_expr(e, lookup)?),
        RawCoord::Pair([re, im]) => Coord::Complex(Complex64::new(scalar(re, lookup)?, scalar(im, lookup)?)),
    })
}

/// Parses a JSON system description.
pub fn parse_spec(text: &str) -> Result<GifsGraph> {
    let raw: RawSystem = serde_json::from_str(text)?;
    let sig = SpaceSignature::new(raw.space.real, raw.space.complex, raw.space.primes)?;

    let mut constants = Vec::new();
    for (name, rc) in &raw.constants {
        let (value, padic) = match rc {
            RawConstant::Plain(v) => (v, None),
            RawConstant::Selected { value, padic } => (value, Some(padic)),
        };
        let value = QuadraticNumber::parse(value)?;
        let mut selectors = BTreeMap::new();
        for (p, &r) in padic.into_iter().flatten() {
            let p: u32 = p.parse().map_err(|_| Error::Malformed(format!("bad prime key `{p}`")))?;
            selectors.insert(p, r);
        }
        constants.push(Constant { name: name.clone(), value, selectors });
    }
    let table: BTreeMap<String, QuadraticNumber> =
        constants.iter().map(|c| (c.name.clone(), c.value.clone())).collect();
    let lookup = |name: &str| table.get(name).cloned();

    let edges = raw
        .edges
        .iter()
        .map(|e| {
            Ok(EdgeSpec {
                from: e.from.clone(),
                to: e.to.clone(),
                label: e.label,
                name: e.name.clone(),
                linear: e.linear.iter().map(|c| coord(c, &lookup)).collect::<Result<_>>()?,
                translate: e.translate.iter().map(|c| coord(c, &lookup)).collect::<Result<_>>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    GifsGraph::from_specs(sig, raw.vertices, constants, edges, raw.precision.unwrap_or(DEFAULT_PRECISION))
}

fn raw_coord(c: &Coord) -> RawCoord {
    match c {
        Coord::Exact(q) => RawCoord::Expr(q.to_string()),
        Coord::Float(x) => RawCoord::Number(*x),
        Coord::Complex(z) => RawCoord::Pair([RawScalar::Number(z.re), RawScalar::Number(z.im)]),
    }
}

/// Writes a system back as JSON. Constants are kept, coordinates are
/// written as literal values, so parsing the output rebuilds an equal
/// system.
pub fn serialize_spec(g: &GifsGraph) -> Result<String> {
    let sig = g.signature();
    let constants = g
        .constants()
        .iter()
        .map(|c| {
            let value = c.value.to_string();
            let rc = if c.selectors.is_empty() {
                RawConstant::Plain(value)
            } else {
                RawConstant::Selected { value, padic: c.selectors.iter().map(|(p, r)| (p.to_string(), *r)).collect() }
            };
            (c.name.clone(), rc)
        })
        .collect();
    let edges = g
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let (lin, tr) = e
                .coords
                .as_ref()
                .ok_or_else(|| Error::Unsupported(format!("edge {k} was built from maps, not coordinates")))?;
            Ok(RawEdge {
                from: g.vertices()[e.from].clone(),
                to: g.vertices()[e.to].clone(),
                label: Some(e.label),
                name: Some(e.name.clone()),
                linear: lin.iter().map(raw_coord).collect(),
                translate: tr.iter().map(raw_coord).collect(),
            })
        })
        .collect::<Result<_>>()?;
    let raw = RawSystem {
        space: RawSpace { real: sig.real, complex: sig.complex, primes: sig.primes.clone() },
        precision: Some(g.precision()),
        constants,
        vertices: g.vertices().to_vec(),
        edges,
    };
    Ok(serde_json::to_string_pretty(&raw)?)
}
