//! Dispatch from a validated scenario to the library.
//!
//! Each scenario runs single-threaded; batches parallelize across scenarios.

use std::collections::BTreeMap;
use std::sync::Arc;

use monodromy_core::classify::{classify_monodromy, reference_cases, AbelianPart, Reduction, UniformizationData};
use monodromy_core::clifford::{
    cocharacter_table, filtration_type2, filtration_type3, find_isotropic_pair, find_isotropic_vector,
    graded_splitting, kuga_satake_dimension, GramLattice, WeightFiltration,
};
use monodromy_core::formal_group::{ec_formal_group, formal_sum, mult_by_int, FormalGroupLaw, WeierstrassModel};
use monodromy_core::galois::{
    commutator_closure, full_group_generators, generate, unipotent_index, unipotent_order, BlockGaloisElement,
};
use monodromy_core::ladder::{
    closed_form_m1, from_p_series, p_decomposition, regime_holds, valuation_ladder, verify_ladder, Height2Data,
};
use monodromy_core::newton::NewtonPolygon;
use monodromy_core::poly::CoefficientSeries;
use monodromy_core::puiseux::{puiseux_roots, valuation_multiset, PuiseuxOptions};
use monodromy_core::rational::{format_rational, int, Rational};
use monodromy_core::tate::{tate_torsion_tower, TateLattice};
use monodromy_core::{FiniteField, PuiseuxSeries, Strategy};
use num_bigint::BigUint;
use serde_json::{json, Value};

use crate::error::{schema, LabError};
use crate::report::{Assertion, Report};
use crate::scenario::*;

const STRATEGY: Strategy = Strategy::Sequential;

#[derive(Default)]
struct Checks(Vec<Assertion>);

impl Checks {
    fn check(&mut self, name: &str, passed: bool) {
        self.0.push(Assertion { name: name.to_string(), passed });
    }
}

pub(crate) fn r(x: &Rational) -> Value {
    Value::String(format_rational(x))
}

fn big(x: &BigUint) -> Value {
    Value::String(x.to_string())
}

fn multiset(m: &[(Rational, usize)]) -> Value {
    m.iter().map(|(v, k)| json!({"valuation": r(v), "multiplicity": k})).collect()
}

fn points(pts: &[(i64, Rational)]) -> Value {
    pts.iter().map(|(i, v)| json!({"i": i, "v": r(v)})).collect()
}

fn polygon_value(poly: &NewtonPolygon) -> Value {
    let segments: Value = poly
        .segments()
        .iter()
        .map(|s| json!({"start": s.start.0, "end": s.end.0, "slope": r(&s.slope), "length": s.length}))
        .collect();
    json!({
        "vertices": points(poly.vertices()),
        "segments": segments,
        "collinear_points": points(poly.collinear_points()),
        "points_above": points(poly.points_above()),
        "root_valuations": multiset(&poly.root_valuations()),
    })
}

fn series(field: &Arc<FiniteField>, text: &str) -> Result<PuiseuxSeries, LabError> {
    PuiseuxSeries::parse(field, text).map_err(|e| schema(e.to_string()))
}

fn weierstrass(field: &Arc<FiniteField>, a: &[String; 5]) -> Result<WeierstrassModel, LabError> {
    let [a1, a2, a3, a4, a6] = a;
    Ok(WeierstrassModel::new([
        series(field, a1)?,
        series(field, a2)?,
        series(field, a3)?,
        series(field, a4)?,
        series(field, a6)?,
    ])?)
}

fn interior_value(i: &BTreeMap<usize, Rational>) -> Value {
    Value::Object(i.iter().map(|(k, v)| (k.to_string(), r(v))).collect())
}

fn decomposition_value(d: &Height2Data) -> Result<Value, LabError> {
    Ok(json!({
        "m": r(&d.m),
        "interior": interior_value(&d.interior_valuations()?),
        "level_one": polygon_value(&d.level_one),
    }))
}

fn ladder(l: &LadderParams, pr: &Precision, checks: &mut Checks) -> Result<Value, LabError> {
    let mut data = None;
    let interior = match l.interior_map()? {
        Some(i) => i,
        None => {
            let f = field(l.p, &l.modulus)?;
            let d = match (&l.weierstrass, &l.p_series) {
                (Some(w), _) => p_decomposition(&ec_formal_group(&weierstrass(&f, w)?, pr.x(l.p))?)?,
                (None, Some(ps)) => {
                    let coeffs = ps.iter().map(|c| series(&f, c)).collect::<Result<Vec<_>, _>>()?;
                    from_p_series(l.p, &CoefficientSeries::polynomial(&f, coeffs)?)?
                }
                (None, None) => unreachable!("validated"),
            };
            let i = d.interior_valuations()?;
            data = Some(d);
            i
        }
    };
    let lad = valuation_ladder(l.p, &interior, l.n_max)?;
    let levels: Value = lad
        .levels
        .iter()
        .map(|lv| {
            json!({
                "n": lv.n,
                "v_n": r(&lv.valuation),
                "denominator": lv.denominator,
                "regime": lad.in_regime(lv.n),
                "single_segment": lv.single_segment,
                "root_valuations": multiset(&lv.root_valuations),
            })
        })
        .collect();
    let mut out = json!({
        "p": l.p,
        "interior": interior_value(&interior),
        "n0": lad.n0,
        "valuations": lad.valuations().iter().map(r).collect::<Value>(),
        "levels": levels,
    });
    checks.check("regime_holds", regime_holds(&lad));
    let one = int(1);
    if interior.get(&1) == Some(&one) && interior.values().all(|v| *v >= one) {
        let closed = lad.levels.iter().all(|lv| lv.valuation == closed_form_m1(l.p, lv.n));
        checks.check("m1_closed_form", closed && lad.n0 == 1);
    }
    if let Some(d) = &data {
        out["decomposition"] = decomposition_value(d)?;
        if let Some(k) = l.verify_levels.filter(|k| *k > 0) {
            let v = verify_ladder(d, &lad, k)?;
            out["verification"] = v
                .levels
                .iter()
                .map(|c| json!({"n": c.n, "ladder": multiset(&c.ladder), "oracle": multiset(&c.oracle), "target": r(&c.target)}))
                .collect();
            checks.check("oracle_agrees", v.levels.iter().all(|c| c.ladder == c.oracle));
        }
    }
    Ok(out)
}

fn series_value(s: &CoefficientSeries) -> Value {
    s.coefficients()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_exact_zero())
        .map(|(k, c)| json!({"k": k, "coefficient": c.to_string()}))
        .collect()
}

fn formal_group(g: &FormalGroupParams, pr: &Precision, checks: &mut Checks) -> Result<Value, LabError> {
    let f = field(g.p, &g.modulus)?;
    let x = pr.x(g.p);
    let law: FormalGroupLaw = match g.law {
        LawKind::Additive => FormalGroupLaw::additive(&f, x),
        LawKind::Multiplicative => FormalGroupLaw::multiplicative(&f, x),
        LawKind::Weierstrass => ec_formal_group(&weierstrass(&f, g.weierstrass.as_ref().expect("validated"))?, x)?,
    };
    let mut coefficients = Vec::new();
    for total in 1..law.precision() {
        for i in (0..=total).rev().filter(|i| 2 * i >= total) {
            if let Some(c) = law.coefficient(i, total - i).filter(|c| !c.is_exact_zero()) {
                coefficients.push(json!({"i": i, "j": total - i, "a_ij": c.to_string()}));
            }
        }
    }
    let unit = law.coefficient(1, 0).is_some_and(|c| c == PuiseuxSeries::one(&f))
        && (2..law.precision()).all(|i| law.coefficient(i, 0).is_none_or(|c| c.is_exact_zero()));
    checks.check("unit_axiom", unit);
    let mut out = json!({
        "law": serde_json::to_value(g.law).unwrap(),
        "precision": law.precision(),
        "coefficients": coefficients,
    });
    if let Some(m) = g.multiply_by {
        let s = mult_by_int(&law, m)?;
        if m >= 2 {
            let split = formal_sum(&law, &mult_by_int(&law, m - 1)?, &mult_by_int(&law, 1)?)?;
            checks.check("homomorphism", split.agrees_with(&s));
        }
        out["multiplication"] = json!({"m": m, "series": series_value(&s)});
    }
    if g.decompose {
        out["decomposition"] = decomposition_value(&p_decomposition(&law)?)?;
    }
    Ok(out)
}

fn polygon(pg: &PolygonParams, pr: &Precision, checks: &mut Checks) -> Result<Value, LabError> {
    if let Some(pts) = &pg.points {
        let pts = pts.iter().map(|(i, v)| Ok((*i, v.to_rational()?))).collect::<Result<Vec<_>, LabError>>()?;
        return Ok(polygon_value(&NewtonPolygon::new(&pts)?));
    }
    let p = pg.p.expect("validated");
    let f = field(p, &pg.modulus)?;
    let coeffs =
        pg.polynomial.as_ref().expect("validated").iter().map(|c| series(&f, c)).collect::<Result<Vec<_>, _>>()?;
    let h = CoefficientSeries::polynomial(&f, coeffs)?;
    let poly = NewtonPolygon::from_valuations(0, &h.valuations())?;
    let mut out = polygon_value(&poly);
    if let Some(target) = &pg.target {
        let mut opts = PuiseuxOptions::new(target.to_rational()?);
        opts.n_cap = pr.n_cap();
        let roots = puiseux_roots(&h, &opts)?;
        out["roots"] = roots
            .iter()
            .map(|root| {
                json!({
                    "valuation": root.valuation().to_string(),
                    "multiplicity": root.multiplicity(),
                    "expansion": root.series().map(|s| s.to_string()),
                })
            })
            .collect();
        let mut oracle: BTreeMap<Rational, usize> = BTreeMap::new();
        for (v, m) in valuation_multiset(&roots)? {
            if let Some(v) = v {
                *oracle.entry(v).or_default() += m;
            }
        }
        let mut hull: BTreeMap<Rational, usize> = BTreeMap::new();
        for (v, m) in poly.root_valuations() {
            *hull.entry(v).or_default() += m;
        }
        checks.check("oracle_agrees_with_polygon", oracle == hull);
    }
    Ok(out)
}

fn tate(t: &TateParams, pr: &Precision, checks: &mut Checks) -> Result<Value, LabError> {
    let f = field(t.p, &t.modulus)?;
    let cap = int(pr.t());
    let periods = t.periods.iter().map(|q| Ok(series(&f, q)?.truncate(&cap))).collect::<Result<Vec<_>, LabError>>()?;
    let lattice = TateLattice::new(periods)?;
    let tower = tate_torsion_tower(&lattice, t.n);
    let g = lattice.rank() as u32;
    checks.check("roots_verified", tower.verify(&lattice));
    checks.check("separable_degree_one", tower.separable_degree == BigUint::from(1u32));
    checks.check("inseparable_degree", tower.inseparable_degree == BigUint::from(t.p).pow(t.n * g));
    checks.check("galois_image_trivial", tower.galois_image_trivial);
    Ok(json!({
        "rank": g,
        "n": t.n,
        "period_valuations": lattice.valuations().iter().map(r).collect::<Value>(),
        "separable_degree": big(&tower.separable_degree),
        "inseparable_degree": big(&tower.inseparable_degree),
        "generators": tower.generators.iter().map(|s| s.to_string()).collect::<Value>(),
        "galois_image_trivial": tower.galois_image_trivial,
    }))
}

fn galois(g: &GaloisParams, checks: &mut Checks) -> Result<Value, LabError> {
    let gens = match &g.generators {
        Generators::Keyword(_) => full_group_generators(g.p, g.n, g.size)?,
        Generators::Matrices(ms) => {
            ms.iter().map(|m| BlockGaloisElement::from_matrix(g.p, g.n, m)).collect::<Result<Vec<_>, _>>()?
        }
    };
    if gens.iter().any(|x| x.size() != g.size) {
        return Err(schema(format!("every generator must be {0} x {0}", g.size)));
    }
    let group = generate(&gens)?;
    let unipotent_in_group = group.iter().filter(|x| x.is_unipotent()).count();
    let derived = commutator_closure(&gens)?;
    let block = unipotent_order(g.p, g.n, g.size)?;
    let index = unipotent_index(g.p, g.n, g.size)?;
    let phi = BigUint::from(g.p - 1) * BigUint::from(g.p).pow(g.n - 1);
    checks.check("derived_subgroup_unipotent", derived.iter().all(|x| x.is_unipotent()));
    checks.check("unipotent_index_formula", index == phi.pow(g.size as u32 / 2));
    if matches!(g.generators, Generators::Keyword(_)) {
        checks.check("full_group_order", BigUint::from(group.len()) == &block * &index);
    }
    Ok(json!({
        "modulus": BigUint::from(g.p).pow(g.n).to_string(),
        "generators": gens.iter().map(|x| json!(x.to_matrix())).collect::<Value>(),
        "group_order": group.len(),
        "unipotent_in_group": unipotent_in_group,
        "derived_order": derived.len(),
        "unipotent_block_order": big(&block),
        "unipotent_index": big(&index),
        "derived_equals_unipotent_block": BigUint::from(derived.len()) == block,
    }))
}

fn filtration_value(f: &WeightFiltration) -> Value {
    json!({
        "dims": f.dims(),
        "graded_dims": f.graded_dims(),
        "isotropic": f.isotropic().iter().map(|v| v.iter().map(r).collect::<Value>()).collect::<Value>(),
    })
}

fn clifford(c: &CliffordParams, checks: &mut Checks) -> Result<Value, LabError> {
    let two = c.filtration == FiltrationKind::II;
    let lattice = match &c.gram {
        Some(g) => GramLattice::new(vectors(g)?)?,
        None if two => GramLattice::split_type2(c.n)?,
        None => GramLattice::split_type3(c.n)?,
    };
    if lattice.n() != c.n {
        return Err(schema(format!("gram has signature ({}, 2), expected n = {}", lattice.n(), c.n)));
    }
    let standard = c.gram.is_none();
    let isotropic: Vec<Vec<Rational>> = match (&c.isotropic, c.search_height) {
        (Some(v), _) => vectors(v)?,
        (None, Some(h)) if two => match find_isotropic_pair(&lattice, h)? {
            Some((a, b)) => vec![a, b],
            None => {
                return Err(monodromy_core::Error::NotIsotropic(format!("no isotropic pair of height <= {h}")).into())
            }
        },
        (None, Some(h)) => match find_isotropic_vector(&lattice, h)? {
            Some(a) => vec![a],
            None => {
                return Err(monodromy_core::Error::NotIsotropic(format!("no isotropic vector of height <= {h}")).into())
            }
        },
        (None, None) if two => vec![lattice.basis_vector(0), lattice.basis_vector(1)],
        (None, None) => vec![lattice.basis_vector(0)],
    };
    let d = kuga_satake_dimension(c.n);
    let f = if two {
        filtration_type2(&lattice, &isotropic[0], &isotropic[1], STRATEGY)?
    } else {
        filtration_type3(&lattice, &isotropic[0], STRATEGY)?
    };
    let dims = f.dims();
    checks.check("filtration_nested", f.containments_hold()?);
    if two {
        checks.check("dims_formula", dims == [1 << c.n, 3 << c.n, 1 << (c.n + 2)]);
        checks.check("w_minus2_is_half_d", dims[0] == d / 2);
    } else {
        checks.check("w_minus1_is_d", dims[1] == d);
        checks.check("gr_1_trivial", f.graded_dims()[1] == 0);
    }
    let mut out = json!({
        "n": c.n,
        "type": if two { "II" } else { "III" },
        "algebra_dim": lattice.algebra_dim(),
        "kuga_satake_dimension": d,
        "filtration": filtration_value(&f),
    });
    let dual = match &c.dual {
        Some(v) => Some(vectors(v)?),
        None if two && standard && c.isotropic.is_none() && c.search_height.is_none() => {
            Some(vec![lattice.basis_vector(2), lattice.basis_vector(3)])
        }
        None => None,
    };
    if let Some(dual) = dual {
        let s = graded_splitting(&f, &dual[0], &dual[1], STRATEGY)?;
        let table = cocharacter_table(&s, STRATEGY)?;
        checks.check("graded_direct_sum", s.is_direct_sum(STRATEGY)?);
        checks.check("cocharacter_containments", table.containments.iter().all(|x| x.holds));
        checks.check("parity_preserved", table.parity_preserved);
        out["splitting"] = json!({
            "dims": s.dims(),
            "cocharacter": table
                .containments
                .iter()
                .map(|x| json!({"piece": x.piece.label(), "source": x.source, "target": x.target, "holds": x.holds, "vacuous": x.vacuous}))
                .collect::<Value>(),
            "parity_preserved": table.parity_preserved,
        });
    }
    Ok(out)
}

fn reduction(r: ReductionName) -> Reduction {
    match r {
        ReductionName::Ordinary => Reduction::Ordinary,
        ReductionName::Supersingular => Reduction::Supersingular,
    }
}

fn abelian(a: AbelianDescriptor) -> AbelianPart {
    match a {
        AbelianDescriptor::None => AbelianPart::None,
        AbelianDescriptor::Elliptic(r) => AbelianPart::Elliptic(reduction(r)),
        AbelianDescriptor::ProductOfElliptic { copies, reduction: r } => {
            AbelianPart::ProductOfElliptic { copies, reduction: reduction(r) }
        }
    }
}

fn abelian_descriptor(a: AbelianPart) -> AbelianDescriptor {
    let back = |r| match r {
        Reduction::Ordinary => ReductionName::Ordinary,
        Reduction::Supersingular => ReductionName::Supersingular,
    };
    match a {
        AbelianPart::None => AbelianDescriptor::None,
        AbelianPart::Elliptic(r) => AbelianDescriptor::Elliptic(back(r)),
        AbelianPart::ProductOfElliptic { copies, reduction } => {
            AbelianDescriptor::ProductOfElliptic { copies, reduction: back(reduction) }
        }
    }
}

fn classification_row(u: &UniformizationData) -> Value {
    let c = classify_monodromy(u);
    json!({
        "torus_rank": u.torus_rank(),
        "abelian": serde_json::to_value(abelian_descriptor(u.abelian())).unwrap(),
        "dimension": u.dimension(),
        "kind": c.kind.name(),
        "citation": c.citation,
    })
}

fn classify(c: &ClassifyParams, checks: &mut Checks) -> Result<Value, LabError> {
    if let Some(d) = c.reference_table {
        let rows: Vec<Value> = reference_cases(d)?.iter().map(classification_row).collect();
        checks.check("reference_rows", rows.len() == 6);
        return Ok(json!({"dimension": d, "cases": rows}));
    }
    let torus = c.torus_rank.expect("validated");
    let u = UniformizationData::new(
        torus,
        abelian(c.abelian.expect("validated")),
        c.lattice_rank.unwrap_or(torus),
        c.dimension.expect("validated"),
    )?;
    Ok(classification_row(&u))
}

fn dispatch(s: &Scenario, checks: &mut Checks) -> Result<Value, LabError> {
    let pr = &s.precision;
    match &s.params {
        Params::Ladder(l) => ladder(l, pr, checks),
        Params::FormalGroup(g) => formal_group(g, pr, checks),
        Params::Polygon(p) => polygon(p, pr, checks),
        Params::Tate(t) => tate(t, pr, checks),
        Params::Galois(g) => galois(g, checks),
        Params::Clifford(c) => clifford(c, checks),
        Params::Classify(c) => classify(c, checks),
    }
}

/// Runs a validated scenario. Failures are recorded in the report.
pub fn run_scenario(s: &Scenario) -> Report {
    let mut checks = Checks::default();
    let outcome = dispatch(s, &mut checks);
    Report::assemble(s, outcome, checks.0)
}
