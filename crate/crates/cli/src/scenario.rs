//! Scenario documents: one JSON object per file with a `"kind"`
//! discriminator, optional `"name"`, `"format"` and `"precision"` keys, and
//! the kind's own parameters. Unknown keys are schema violations.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use monodromy_core::field::is_prime;
use monodromy_core::rational::{int, parse_rational, Rational};
use monodromy_core::FiniteField;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{schema, LabError};

pub const DEFAULT_T: i64 = 64;
pub const DEFAULT_N_CAP: u64 = 64;
pub const MAX_CLIFFORD_N: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Text,
}

/// Precision caps; absent values take the defaults `T = 64`,
/// `X = p^2 + p`, `N = 64`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Precision {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_cap: Option<u64>,
}

impl Precision {
    pub fn t(&self) -> i64 {
        self.t.unwrap_or(DEFAULT_T)
    }

    pub fn x(&self, p: u64) -> u32 {
        self.x.unwrap_or((p * p + p) as u32)
    }

    pub fn n_cap(&self) -> u64 {
        self.n_cap.unwrap_or(DEFAULT_N_CAP)
    }
}

/// An exact rational written as a JSON integer or a `"n/d"` string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exact {
    Int(i64),
    Text(String),
}

impl Exact {
    pub fn to_rational(&self) -> Result<Rational, LabError> {
        match self {
            Exact::Int(n) => Ok(int(*n)),
            Exact::Text(s) => parse_rational(s).map_err(|e| schema(e.to_string())),
        }
    }
}

fn rationals(v: &[Exact]) -> Result<Vec<Rational>, LabError> {
    v.iter().map(Exact::to_rational).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderParams {
    pub p: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u64>>,
    /// `v(c_i)` keyed by `i`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interior: Option<BTreeMap<String, Exact>>,
    /// `[a1, a2, a3, a4, a6]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weierstrass: Option<[String; 5]>,
    /// Coefficients of `x^0, x^1, ...` of a `[p]`-series.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_series: Option<Vec<String>>,
    pub n_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify_levels: Option<usize>,
}

impl LadderParams {
    pub fn interior_map(&self) -> Result<Option<BTreeMap<usize, Rational>>, LabError> {
        let Some(i) = &self.interior else { return Ok(None) };
        let mut out = BTreeMap::new();
        for (k, v) in i {
            let k: usize = k.parse().map_err(|_| schema(format!("interior index {k:?} is not an integer")))?;
            if out.insert(k, v.to_rational()?).is_some() {
                return Err(schema(format!("duplicate interior index {k}")));
            }
        }
        Ok(Some(out))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawKind {
    #[default]
    Weierstrass,
    Additive,
    Multiplicative,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormalGroupParams {
    pub p: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u64>>,
    #[serde(default)]
    pub law: LawKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weierstrass: Option<[String; 5]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiply_by: Option<u64>,
    /// Also report the height-two decomposition of `[p]`.
    #[serde(default)]
    pub decompose: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolygonParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<(i64, Exact)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u64>>,
    /// Coefficients of `x^0, x^1, ...`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<Vec<String>>,
    /// Expansion target for the root finder.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Exact>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TateParams {
    pub p: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u64>>,
    pub periods: Vec<String>,
    pub n: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Generators {
    /// Only `"full"`: generators of the whole block group.
    Keyword(String),
    Matrices(Vec<Vec<Vec<u64>>>),
}

impl Default for Generators {
    fn default() -> Self {
        Generators::Keyword("full".into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaloisParams {
    pub p: u64,
    pub n: u32,
    pub size: usize,
    #[serde(default)]
    pub generators: Generators,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FiltrationKind {
    II,
    III,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliffordParams {
    pub n: usize,
    #[serde(rename = "type")]
    pub filtration: FiltrationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<Exact>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isotropic: Option<Vec<Vec<Exact>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<Vec<Vec<Exact>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_height: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReductionName {
    Ordinary,
    Supersingular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbelianDescriptor {
    None,
    Elliptic(ReductionName),
    ProductOfElliptic { copies: usize, reduction: ReductionName },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torus_rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abelian: Option<AbelianDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice_rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    /// Classify every reference case, with Kuga-Satake dimension `d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_table: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Params {
    Ladder(LadderParams),
    FormalGroup(FormalGroupParams),
    Polygon(PolygonParams),
    Tate(TateParams),
    Galois(GaloisParams),
    Clifford(CliffordParams),
    Classify(ClassifyParams),
}

impl Params {
    pub fn kind(&self) -> &'static str {
        match self {
            Params::Ladder(_) => "ladder",
            Params::FormalGroup(_) => "formal-group",
            Params::Polygon(_) => "polygon",
            Params::Tate(_) => "tate",
            Params::Galois(_) => "galois",
            Params::Clifford(_) => "clifford",
            Params::Classify(_) => "classify",
        }
    }

    /// Residue characteristic, for kinds that have one.
    pub fn characteristic(&self) -> Option<u64> {
        match self {
            Params::Ladder(l) => Some(l.p),
            Params::FormalGroup(f) => Some(f.p),
            Params::Polygon(p) => p.p,
            Params::Tate(t) => Some(t.p),
            Params::Galois(g) => Some(g.p),
            Params::Clifford(_) | Params::Classify(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub name: Option<String>,
    pub params: Params,
    pub precision: Precision,
    pub format: Format,
}

fn take<T: serde::de::DeserializeOwned>(obj: &mut Map<String, Value>, key: &str) -> Result<Option<T>, LabError> {
    obj.remove(key).map(|v| serde_json::from_value(v).map_err(|e| schema(format!("{key}: {e}")))).transpose()
}

fn check_prime(p: u64) -> Result<(), LabError> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(schema(format!("p = {p} is not prime")))
    }
}

fn exactly_one(what: &str, present: &[bool]) -> Result<(), LabError> {
    if present.iter().filter(|x| **x).count() == 1 {
        Ok(())
    } else {
        Err(schema(format!("exactly one of {what} is required")))
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, LabError> {
        let value: Value = serde_json::from_str(text).map_err(|e| schema(format!("invalid JSON: {e}")))?;
        let Value::Object(mut obj) = value else {
            return Err(schema("a scenario must be a JSON object"));
        };
        let name = take(&mut obj, "name")?;
        let precision = take(&mut obj, "precision")?.unwrap_or_default();
        let format = take(&mut obj, "format")?.unwrap_or_default();
        let params: Params = serde_json::from_value(Value::Object(obj)).map_err(|e| schema(e.to_string()))?;
        let s = Scenario { name, params, precision, format };
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| schema(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The scenario as a JSON value, with defaults left implicit.
    pub fn echo(&self) -> Value {
        let mut v = serde_json::to_value(&self.params).expect("parameters serialize");
        let obj = v.as_object_mut().expect("tagged enum serializes to an object");
        if let Some(n) = &self.name {
            obj.insert("name".into(), Value::String(n.clone()));
        }
        if self.precision != Precision::default() {
            obj.insert("precision".into(), serde_json::to_value(&self.precision).unwrap());
        }
        v
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let pr = &self.precision;
        if pr.t.is_some_and(|t| t < 1) || pr.x.is_some_and(|x| x < 2) || pr.n_cap.is_some_and(|n| n < 1) {
            return Err(schema("precision caps must be t >= 1, x >= 2, n_cap >= 1"));
        }
        match &self.params {
            Params::Ladder(l) => {
                check_prime(l.p)?;
                exactly_one(
                    "interior, weierstrass, p_series",
                    &[l.interior.is_some(), l.weierstrass.is_some(), l.p_series.is_some()],
                )?;
                if l.n_max < 1 {
                    return Err(schema("n_max must be at least 1"));
                }
                if let Some(k) = l.verify_levels {
                    if k > l.n_max {
                        return Err(schema("verify_levels exceeds n_max"));
                    }
                    if l.interior.is_some() {
                        return Err(schema("verify_levels needs weierstrass or p_series input"));
                    }
                }
                if let Some(i) = l.interior_map()? {
                    if i.keys().any(|k| *k < 1 || *k as u64 >= l.p) {
                        return Err(schema(format!("interior indices must lie in 1..{}", l.p - 1)));
                    }
                }
            }
            Params::FormalGroup(f) => {
                check_prime(f.p)?;
                if (f.law == LawKind::Weierstrass) != f.weierstrass.is_some() {
                    return Err(schema("weierstrass coefficients are required for, and only for, law = weierstrass"));
                }
                if f.multiply_by == Some(0) {
                    return Err(schema("multiply_by must be positive"));
                }
            }
            Params::Polygon(p) => {
                exactly_one("points, polynomial", &[p.points.is_some(), p.polynomial.is_some()])?;
                if p.polynomial.is_some() {
                    check_prime(p.p.ok_or_else(|| schema("polynomial input needs p"))?)?;
                }
                if let Some(pts) = &p.points {
                    if pts.is_empty() {
                        return Err(schema("points must be nonempty"));
                    }
                    for (_, v) in pts {
                        v.to_rational()?;
                    }
                }
                if let Some(t) = &p.target {
                    t.to_rational()?;
                }
            }
            Params::Tate(t) => {
                check_prime(t.p)?;
                if t.periods.is_empty() {
                    return Err(schema("periods must be nonempty"));
                }
            }
            Params::Galois(g) => {
                check_prime(g.p)?;
                if g.n < 1 || g.size < 2 || g.size % 2 == 1 {
                    return Err(schema("galois needs n >= 1 and an even size >= 2"));
                }
                if let Generators::Keyword(k) = &g.generators {
                    if k != "full" {
                        return Err(schema(format!("unknown generator keyword {k:?}")));
                    }
                }
            }
            Params::Clifford(c) => {
                if !(1..=MAX_CLIFFORD_N).contains(&c.n) {
                    return Err(schema(format!("clifford n must lie in 1..={MAX_CLIFFORD_N}")));
                }
                if c.filtration == FiltrationKind::II && c.n < 2 && c.gram.is_none() {
                    return Err(schema("type II needs n >= 2"));
                }
                let m = c.n + 2;
                let width_ok = |vs: &Vec<Vec<Exact>>| vs.iter().all(|v| v.len() == m);
                if let Some(g) = &c.gram {
                    if g.len() != m || !width_ok(g) {
                        return Err(schema(format!("gram must be {m} x {m}")));
                    }
                }
                let want = if c.filtration == FiltrationKind::II { 2 } else { 1 };
                if let Some(iso) = &c.isotropic {
                    if iso.len() != want || !width_ok(iso) {
                        return Err(schema(format!("isotropic must hold {want} vectors of length {m}")));
                    }
                }
                if let Some(d) = &c.dual {
                    if c.filtration != FiltrationKind::II || d.len() != 2 || !width_ok(d) {
                        return Err(schema(format!("dual needs type II and 2 vectors of length {m}")));
                    }
                }
                if c.isotropic.is_some() && c.search_height.is_some() {
                    return Err(schema("give isotropic vectors or a search height, not both"));
                }
                if c.gram.is_some() && c.isotropic.is_none() && c.search_height.is_none() {
                    return Err(schema("a custom gram needs isotropic vectors or a search height"));
                }
            }
            Params::Classify(c) => {
                let single = [c.torus_rank.is_some(), c.abelian.is_some(), c.dimension.is_some()];
                match c.reference_table {
                    Some(_) if single.iter().any(|x| *x) || c.lattice_rank.is_some() => {
                        return Err(schema("reference_table excludes a single descriptor"))
                    }
                    None if !single.iter().all(|x| *x) => {
                        return Err(schema("classify needs torus_rank, abelian and dimension"))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn field(p: u64, modulus: &Option<Vec<u64>>) -> Result<Arc<FiniteField>, LabError> {
    let f = match modulus {
        None => FiniteField::prime(p),
        Some(m) => FiniteField::new(p, m),
    };
    f.map(Arc::new).map_err(|e| schema(e.to_string()))
}

pub(crate) fn vectors(vs: &[Vec<Exact>]) -> Result<Vec<Vec<Rational>>, LabError> {
    vs.iter().map(|v| rationals(v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_echoes() {
        let s = Scenario::parse(r#"{"kind":"ladder","p":2,"interior":{"1":"1"},"n_max":4}"#).unwrap();
        assert_eq!(s.params.kind(), "ladder");
        assert_eq!(s.format, Format::Json);
        assert_eq!(
            serde_json::to_string(&s.echo()).unwrap(),
            r#"{"interior":{"1":"1"},"kind":"ladder","n_max":4,"p":2}"#
        );
    }

    #[test]
    fn schema_violations() {
        for bad in [
            r#"[1]"#,
            r#"{"kind":"ladder","p":4,"interior":{"1":1},"n_max":2}"#,
            r#"{"kind":"ladder","p":2,"n_max":2}"#,
            r#"{"kind":"ladder","p":2,"interior":{"1":1},"n_max":2,"extra":true}"#,
            r#"{"kind":"galois","p":3,"n":1,"size":3}"#,
            r#"{"kind":"classify","torus_rank":1}"#,
            r#"{"kind":"warp","p":2}"#,
            r#"{"kind":"tate","p":2,"periods":["t"],"n":1,"precision":{"t":0}}"#,
        ] {
            assert!(matches!(Scenario::parse(bad), Err(LabError::Schema(_))), "{bad}");
        }
    }

    #[test]
    fn descriptor_forms() {
        let s = Scenario::parse(
            r#"{"kind":"classify","torus_rank":4,"abelian":{"product_of_elliptic":{"copies":4,"reduction":"supersingular"}},"dimension":8}"#,
        )
        .unwrap();
        let Params::Classify(c) = s.params else { panic!() };
        assert_eq!(
            c.abelian,
            Some(AbelianDescriptor::ProductOfElliptic { copies: 4, reduction: ReductionName::Supersingular })
        );
        assert!(Scenario::parse(r#"{"kind":"classify","torus_rank":2,"abelian":"none","dimension":2}"#).is_ok());
    }
}
