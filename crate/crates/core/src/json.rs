//! JSON file formats for contexts, bundles, polynomials and the objects
//! built from them. Loading errors carry the JSON path of the bad field.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::diffop::DiffOperator;
use crate::error::{Error, Result};
use crate::galg::{fmt_rational, Point, Poly, Rational};
use crate::gcore::{Coord, CoordinateContext, Ctx, MultiIndex};
use crate::gvb::{Bundle, BundleMap, BundleSpec, FiberElem, Section, SymTensor, Variance};
use crate::jets::{JetAtPoint, JetVector};
use crate::symbol::{Connection, SymbolMap};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextJson {
    pub coords: Vec<NamedDegree>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedDegree {
    pub name: String,
    pub degree: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleJson {
    pub fiber: Vec<NamedDegree>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyJson {
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub coeff: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionJson {
    pub components: Vec<PolyJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorJson {
    pub order: u32,
    pub degree: i64,
    pub coeffs: Vec<OperatorCoeffJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorCoeffJson {
    pub index: Vec<u32>,
    pub mu: String,
    pub lambda: String,
    pub poly: PolyJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionJson {
    pub gamma: Vec<GammaJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaJson {
    pub coord: String,
    pub mu: String,
    pub lambda: String,
    pub poly: PolyJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetJson {
    pub order: u32,
    pub coeffs: Vec<JetCoeffJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetCoeffJson {
    pub index: Vec<u32>,
    pub lambda: String,
    pub poly: PolyJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymTensorJson {
    pub arity: u32,
    pub variance: VarianceJson,
    pub coeffs: Vec<SymCoeffJson>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarianceJson {
    Form,
    Multivector,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymCoeffJson {
    pub index: Vec<u32>,
    pub poly: PolyJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolJson {
    pub arity: u32,
    pub degree: i64,
    pub entries: Vec<OperatorCoeffJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JetAtPointJson {
    pub order: u32,
    pub point: BTreeMap<String, String>,
    pub values: Vec<JetValueJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JetValueJson {
    pub index: Vec<u32>,
    pub lambda: String,
    pub value: String,
}

fn at(path: &str, e: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{path}: {e}"))
}

/// Parses a JSON document into one of the DTOs above.
pub fn parse<T: for<'de> Deserialize<'de>>(path: &str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| at(path, e))
}

pub fn parse_rational(path: &str, s: &str) -> Result<Rational> {
    Rational::from_str(s.trim()).map_err(|e| at(path, format!("bad rational `{s}` ({e})")))
}

pub fn rational_string(c: &Rational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub fn context_from_json(path: &str, j: &ContextJson) -> Result<Ctx> {
    let coords = j
        .coords
        .iter()
        .map(|c| Coord {
            name: c.name.clone(),
            degree: c.degree,
        })
        .collect();
    Ok(std::sync::Arc::new(
        CoordinateContext::new(coords).map_err(|e| at(path, e))?,
    ))
}

pub fn context_to_json(ctx: &CoordinateContext) -> ContextJson {
    ContextJson {
        coords: ctx
            .coords()
            .iter()
            .map(|c| NamedDegree {
                name: c.name.clone(),
                degree: c.degree,
            })
            .collect(),
    }
}

pub fn bundle_from_json(path: &str, ctx: &Ctx, j: &BundleJson) -> Result<Bundle> {
    let fiber = j
        .fiber
        .iter()
        .map(|f| FiberElem {
            name: f.name.clone(),
            degree: f.degree,
        })
        .collect();
    BundleSpec::new(ctx, fiber).map_err(|e| at(path, e))
}

pub fn bundle_to_json(b: &BundleSpec) -> BundleJson {
    BundleJson {
        fiber: b
            .fiber()
            .iter()
            .map(|f| NamedDegree {
                name: f.name.clone(),
                degree: f.degree,
            })
            .collect(),
    }
}

fn index_from_json(path: &str, ctx: &CoordinateContext, v: &[u32]) -> Result<MultiIndex> {
    let i = MultiIndex(v.to_vec());
    ctx.check_index(&i).map_err(|e| at(path, e))?;
    Ok(i)
}

pub fn poly_from_json(path: &str, ctx: &Ctx, j: &PolyJson) -> Result<Poly> {
    let mut terms = Vec::with_capacity(j.terms.len());
    for (n, t) in j.terms.iter().enumerate() {
        let p = format!("{path}.terms[{n}]");
        let i = index_from_json(&format!("{p}.exp"), ctx, &t.exp)?;
        terms.push((i, parse_rational(&format!("{p}.coeff"), &t.coeff)?));
    }
    Poly::from_terms(ctx, terms).map_err(|e| at(path, e))
}

pub fn poly_to_json(p: &Poly) -> PolyJson {
    PolyJson {
        terms: p
            .terms()
            .iter()
            .rev()
            .map(|(i, c)| TermJson {
                exp: i.0.clone(),
                coeff: rational_string(c),
            })
            .collect(),
    }
}

fn fiber_from_json(path: &str, b: &BundleSpec, name: &str) -> Result<usize> {
    b.fiber_position(name)
        .ok_or_else(|| at(path, Error::UnknownName(name.to_string())))
}

pub fn section_from_json(path: &str, b: &Bundle, j: &SectionJson) -> Result<Section> {
    let ctx = b.ctx();
    let comps = j
        .components
        .iter()
        .enumerate()
        .map(|(n, p)| poly_from_json(&format!("{path}.components[{n}]"), ctx, p))
        .collect::<Result<Vec<_>>>()?;
    Section::new(b, comps).map_err(|e| at(&format!("{path}.components"), e))
}

pub fn section_to_json(s: &Section) -> SectionJson {
    SectionJson {
        components: s.components().iter().map(poly_to_json).collect(),
    }
}

pub fn operator_from_json(path: &str, b: &Bundle, j: &OperatorJson) -> Result<DiffOperator> {
    let ctx = b.ctx();
    let mut coeffs = Vec::with_capacity(j.coeffs.len());
    for (n, c) in j.coeffs.iter().enumerate() {
        let p = format!("{path}.coeffs[{n}]");
        let i = index_from_json(&format!("{p}.index"), ctx, &c.index)?;
        let mu = fiber_from_json(&format!("{p}.mu"), b, &c.mu)?;
        let l = fiber_from_json(&format!("{p}.lambda"), b, &c.lambda)?;
        let poly = poly_from_json(&format!("{p}.poly"), ctx, &c.poly)?;
        // validate entry by entry so the error names the offending coefficient
        DiffOperator::endo(b, j.order, j.degree, [((i.clone(), mu, l), poly.clone())])
            .map_err(|e| at(&p, e))?;
        coeffs.push(((i, mu, l), poly));
    }
    DiffOperator::endo(b, j.order, j.degree, coeffs).map_err(|e| at(path, e))
}

pub fn operator_to_json(d: &DiffOperator) -> OperatorJson {
    OperatorJson {
        order: d.order(),
        degree: d.degree(),
        coeffs: d
            .coeffs()
            .iter()
            .map(|((i, mu, l), c)| OperatorCoeffJson {
                index: i.0.clone(),
                mu: d.target().fiber_name(*mu).to_string(),
                lambda: d.source().fiber_name(*l).to_string(),
                poly: poly_to_json(c),
            })
            .collect(),
    }
}

pub fn connection_from_json(path: &str, b: &Bundle, j: &ConnectionJson) -> Result<Connection> {
    let ctx = b.ctx();
    let mut gamma = Vec::with_capacity(j.gamma.len());
    for (n, g) in j.gamma.iter().enumerate() {
        let p = format!("{path}.gamma[{n}]");
        let a = ctx
            .position(&g.coord)
            .ok_or_else(|| at(&format!("{p}.coord"), Error::UnknownName(g.coord.clone())))?;
        let mu = fiber_from_json(&format!("{p}.mu"), b, &g.mu)?;
        let l = fiber_from_json(&format!("{p}.lambda"), b, &g.lambda)?;
        let poly = poly_from_json(&format!("{p}.poly"), ctx, &g.poly)?;
        Connection::new(b, [((a, mu, l), poly.clone())]).map_err(|e| at(&p, e))?;
        gamma.push(((a, mu, l), poly));
    }
    Connection::new(b, gamma).map_err(|e| at(path, e))
}

pub fn connection_to_json(c: &Connection) -> ConnectionJson {
    let b = c.bundle();
    ConnectionJson {
        gamma: c
            .gamma()
            .iter()
            .map(|((a, mu, l), g)| GammaJson {
                coord: b.ctx().name(*a).to_string(),
                mu: b.fiber_name(*mu).to_string(),
                lambda: b.fiber_name(*l).to_string(),
                poly: poly_to_json(g),
            })
            .collect(),
    }
}

pub fn jet_from_json(path: &str, b: &Bundle, j: &JetJson) -> Result<JetVector> {
    let ctx = b.ctx();
    let mut coeffs = Vec::with_capacity(j.coeffs.len());
    for (n, c) in j.coeffs.iter().enumerate() {
        let p = format!("{path}.coeffs[{n}]");
        let i = index_from_json(&format!("{p}.index"), ctx, &c.index)?;
        let l = fiber_from_json(&format!("{p}.lambda"), b, &c.lambda)?;
        coeffs.push(((i, l), poly_from_json(&format!("{p}.poly"), ctx, &c.poly)?));
    }
    JetVector::new(b, j.order, coeffs).map_err(|e| at(path, e))
}

pub fn jet_to_json(j: &JetVector) -> JetJson {
    JetJson {
        order: j.order(),
        coeffs: j
            .coeffs()
            .iter()
            .rev()
            .map(|((i, l), c)| JetCoeffJson {
                index: i.0.clone(),
                lambda: j.bundle().fiber_name(*l).to_string(),
                poly: poly_to_json(c),
            })
            .collect(),
    }
}

pub fn jet_at_point_to_json(j: &JetAtPoint) -> JetAtPointJson {
    JetAtPointJson {
        order: j.order,
        point: j
            .point
            .values
            .iter()
            .map(|(k, v)| (k.clone(), rational_string(v)))
            .collect(),
        values: j
            .values
            .iter()
            .map(|((i, l), v)| JetValueJson {
                index: i.0.clone(),
                lambda: j.bundle.fiber_name(*l).to_string(),
                value: rational_string(v),
            })
            .collect(),
    }
}

pub fn point_from_json(path: &str, v: &BTreeMap<String, String>) -> Result<Point> {
    let mut vals = Vec::with_capacity(v.len());
    for (k, s) in v {
        vals.push((k.clone(), parse_rational(&format!("{path}.{k}"), s)?));
    }
    Ok(Point::new(vals))
}

pub fn symtensor_from_json(path: &str, ctx: &Ctx, j: &SymTensorJson) -> Result<SymTensor> {
    let variance = match j.variance {
        VarianceJson::Form => Variance::Form,
        VarianceJson::Multivector => Variance::Multivector,
    };
    let mut coeffs = Vec::with_capacity(j.coeffs.len());
    for (n, c) in j.coeffs.iter().enumerate() {
        let p = format!("{path}.coeffs[{n}]");
        let i = index_from_json(&format!("{p}.index"), ctx, &c.index)?;
        coeffs.push((i, poly_from_json(&format!("{p}.poly"), ctx, &c.poly)?));
    }
    SymTensor::new(ctx, j.arity, variance, coeffs).map_err(|e| at(path, e))
}

pub fn symtensor_to_json(t: &SymTensor) -> SymTensorJson {
    SymTensorJson {
        arity: t.arity(),
        variance: match t.variance() {
            Variance::Form => VarianceJson::Form,
            Variance::Multivector => VarianceJson::Multivector,
        },
        coeffs: t
            .coeffs()
            .iter()
            .rev()
            .map(|(i, c)| SymCoeffJson {
                index: i.0.clone(),
                poly: poly_to_json(c),
            })
            .collect(),
    }
}

pub fn symbol_to_json(s: &SymbolMap) -> SymbolJson {
    let b = s.bundle();
    SymbolJson {
        arity: s.arity(),
        degree: s.degree(),
        entries: s
            .table()
            .iter()
            .rev()
            .map(|((i, mu, l), c)| OperatorCoeffJson {
                index: i.0.clone(),
                mu: b.fiber_name(*mu).to_string(),
                lambda: b.fiber_name(*l).to_string(),
                poly: poly_to_json(c),
            })
            .collect(),
    }
}

pub fn bundle_map_from_json(
    path: &str,
    source: &Bundle,
    target: &Bundle,
    degree: i64,
    rows: &[Vec<PolyJson>],
) -> Result<BundleMap> {
    let ctx = source.ctx();
    let mut matrix = Vec::with_capacity(rows.len());
    for (k, row) in rows.iter().enumerate() {
        let mut r = Vec::with_capacity(row.len());
        for (l, p) in row.iter().enumerate() {
            r.push(poly_from_json(&format!("{path}.matrix[{k}][{l}]"), ctx, p)?);
        }
        matrix.push(r);
    }
    BundleMap::new(source, target, degree, matrix).map_err(|e| at(path, e))
}

/// A graded rank table as a JSON object keyed by degree.
pub fn rank_to_json(r: &BTreeMap<i64, usize>) -> Value {
    let map: serde_json::Map<String, Value> = r
        .iter()
        .map(|(d, n)| (d.to_string(), Value::from(*n)))
        .collect();
    Value::Object(map)
}

/// Human-readable rational for witnesses.
pub fn show_rational(c: &Rational) -> String {
    fmt_rational(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galg::rat;

    #[test]
    fn round_trips() {
        let cj: ContextJson = parse(
            "context",
            r#"{"coords":[{"name":"x","degree":0},{"name":"θ","degree":1}]}"#,
        )
        .unwrap();
        let ctx = context_from_json("context", &cj).unwrap();
        assert_eq!(context_to_json(&ctx), cj);
        let pj: PolyJson = parse(
            "poly",
            r#"{"terms":[{"exp":[1,1],"coeff":"3/2"},{"exp":[0,0],"coeff":"-1"}]}"#,
        )
        .unwrap();
        let p = poly_from_json("poly", &ctx, &pj).unwrap();
        assert_eq!(p.to_string(), "3/2 x*θ - 1");
        assert_eq!(poly_to_json(&p), pj);
        assert_eq!(rational_string(&rat(-3, 6)), "-1/2");
    }

    #[test]
    fn errors_name_the_path() {
        let cj: ContextJson = parse("c", r#"{"coords":[{"name":"x","degree":0}]}"#).unwrap();
        let ctx = context_from_json("c", &cj).unwrap();
        let b = BundleSpec::line(&ctx);
        let oj: OperatorJson = parse(
            "op",
            r#"{"order":1,"degree":0,"coeffs":[{"index":[1],"mu":"e","lambda":"f","poly":{"terms":[]}}]}"#,
        )
        .unwrap();
        let e = operator_from_json("op", &b, &oj).unwrap_err().to_string();
        assert!(e.contains("op.coeffs[0].lambda"), "{e}");
        let pj: PolyJson = parse("p", r#"{"terms":[{"exp":[1],"coeff":"1/0"}]}"#).unwrap();
        let e = poly_from_json("p", &ctx, &pj).unwrap_err().to_string();
        assert!(e.contains("p.terms[0].coeff"), "{e}");
    }
}
