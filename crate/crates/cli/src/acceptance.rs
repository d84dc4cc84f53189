//! The acceptance suite behind `monodromy-lab selftest`.
//!
//! Exact checks use zero tolerance. Runtime limits are wall-clock seconds.
//! Randomized suites draw from a fixed ChaCha seed.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use monodromy_core::classify::MonodromyKind;
use monodromy_core::clifford::{
    cocharacter_table, filtration_type2, filtration_type3, graded_splitting, kuga_satake_dimension, CliffordElement,
    GramLattice,
};
use monodromy_core::formal_group::{ec_formal_group, formal_sum, mult_by_int, FormalGroupLaw, WeierstrassModel};
use monodromy_core::galois::{commutator_closure, full_group, full_group_generators, unipotent_index, unipotent_order};
use monodromy_core::ladder::{closed_form_m1, from_p_series, p_decomposition, valuation_ladder, verify_ladder};
use monodromy_core::newton::NewtonPolygon;
use monodromy_core::poly::{weierstrass_prepare, CoefficientSeries};
use monodromy_core::puiseux::{puiseux_roots, valuation_multiset, PuiseuxOptions};
use monodromy_core::rational::{int, Rational};
use monodromy_core::tate::{tate_torsion_tower, TateLattice};
use monodromy_core::{FiniteField, PuiseuxSeries, Strategy};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::emit_report;
use crate::run::run_scenario;
use crate::scenario::{Format, Scenario};

pub const LADDER_LIMIT: Duration = Duration::from_secs(1);
pub const ELLIPTIC_LIMIT: Duration = Duration::from_secs(5);
pub const CLIFFORD_LIMIT: Duration = Duration::from_secs(10);
pub const RANDOM_CASES: usize = 200;
pub const SEED: u64 = 0x5eed_2026;

pub const CLASSIFY_SCENARIO: &str = include_str!("../scenarios/classify_reference.json");
pub const CLASSIFY_GOLDEN: &str = include_str!("../scenarios/golden/classify_reference.json");

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {} {:<4} {:<28} {:>8.3}s  {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

type Check = Result<String, String>;
type Suite = fn(&mut ChaCha8Rng) -> Result<(), String>;
type Criterion = (u8, &'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e(err: impl fmt::Display) -> String {
    err.to_string()
}

fn prime_field(p: u64) -> Arc<FiniteField> {
    Arc::new(FiniteField::prime(p).expect("prime"))
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {:.3}s, limit {}s", elapsed.as_secs_f64(), limit.as_secs()))
}

fn c1_ladder() -> Check {
    let start = Instant::now();
    for p in [2u64, 3, 5] {
        let interior: BTreeMap<usize, Rational> = (1..p as usize).map(|i| (i, int(1))).collect();
        let ladder = valuation_ladder(p, &interior, 6).map_err(e)?;
        ensure(ladder.n0 == 1, || format!("p = {p}: n0 = {}", ladder.n0))?;
        for level in &ladder.levels {
            let expected = closed_form_m1(p, level.n);
            ensure(level.valuation == expected, || {
                format!("p = {p}, n = {}: {} != {expected}", level.n, level.valuation)
            })?;
        }
    }
    within(start.elapsed(), LADDER_LIMIT)?;
    Ok("p in {2,3,5}, n <= 6, exact; limit 1s".into())
}

fn c2_elliptic() -> Check {
    let start = Instant::now();
    let f = prime_field(2);
    let w = WeierstrassModel::parse(&f, ["t", "0", "1", "0", "0"]).map_err(e)?;
    let data = p_decomposition(&ec_formal_group(&w, 6).map_err(e)?).map_err(e)?;
    ensure(data.m == int(1), || format!("m = {}", data.m))?;
    let ladder = valuation_ladder(2, &data.interior_valuations().map_err(e)?, 2).map_err(e)?;
    let check = verify_ladder(&data, &ladder, 2).map_err(e)?;
    ensure(check.levels[0].oracle == vec![(int(1), 1)], || format!("level 1 oracle {:?}", check.levels[0].oracle))?;
    ensure(check.levels[1].oracle == vec![(Rational::new(1.into(), 2.into()), 2)], || {
        format!("level 2 oracle {:?}", check.levels[1].oracle)
    })?;
    within(start.elapsed(), ELLIPTIC_LIMIT)?;
    Ok("m = 1, oracle {1} and {1/2, 1/2}; limit 5s".into())
}

fn c3_larger_m() -> Check {
    let f = prime_field(3);
    let interior = BTreeMap::from([(1, int(3)), (2, int(2))]);
    let ladder = valuation_ladder(3, &interior, 4).map_err(e)?;
    let want: Vec<Rational> =
        [(3, 2), (1, 2), (1, 6), (1, 18)].iter().map(|&(a, b)| Rational::new(a.into(), b.into())).collect();
    ensure(ladder.valuations() == want, || format!("ladder {:?}", ladder.valuations()))?;
    ensure(ladder.n0 == 2, || format!("n0 = {}", ladder.n0))?;
    // [3](x) = g(x^3) with g = t^3 y + t^2 y^2 + y^3
    let coeff = |i: usize| match i {
        3 => PuiseuxSeries::from_terms(&f, 1, [(3, f.one())], None),
        6 => PuiseuxSeries::from_terms(&f, 1, [(2, f.one())], None),
        9 => PuiseuxSeries::one(&f),
        _ => PuiseuxSeries::zero(&f),
    };
    let series = CoefficientSeries::polynomial(&f, (0..10).map(coeff).collect()).map_err(e)?;
    let data = from_p_series(3, &series).map_err(e)?;
    let check = verify_ladder(&data, &ladder, 1).map_err(e)?;
    ensure(check.levels[0].oracle == vec![(want[0].clone(), 2)], || format!("oracle {:?}", check.levels[0].oracle))?;
    Ok("[3/2, 1/2, 1/6, 1/18], n0 = 2, oracle 3/2".into())
}

fn c4_tate() -> Check {
    for p in [2u64, 3] {
        let f = prime_field(p);
        let q1 = PuiseuxSeries::parse(&f, "t + t^5 + O(t^64)").map_err(e)?;
        let q2 = PuiseuxSeries::parse(&f, "t^3 + t^4 + O(t^64)").map_err(e)?;
        for periods in [vec![q1.clone()], vec![q1.clone(), q2.clone()]] {
            let lattice = TateLattice::new(periods).map_err(e)?;
            let g = lattice.rank() as u32;
            for n in 1..=3u32 {
                let tower = tate_torsion_tower(&lattice, n);
                let tag = format!("p = {p}, g = {g}, n = {n}");
                ensure(tower.separable_degree == BigUint::from(1u32), || format!("{tag}: separable degree"))?;
                ensure(tower.inseparable_degree == BigUint::from(p).pow(n * g), || {
                    format!("{tag}: inseparable degree")
                })?;
                ensure(tower.verify(&lattice), || format!("{tag}: root check"))?;
            }
        }
    }
    Ok("sep 1, insep p^(ng), roots exact to O(t^64)".into())
}

fn c5_clifford() -> Check {
    let start = Instant::now();
    let s = Strategy::default();
    for n in 2..=5 {
        let l = GramLattice::split_type2(n).map_err(e)?;
        let f = filtration_type2(&l, &l.basis_vector(0), &l.basis_vector(1), s).map_err(e)?;
        ensure(f.dims() == [1 << n, 3 << n, 1 << (n + 2)], || format!("type II n = {n}: {:?}", f.dims()))?;
        ensure(f.dims()[0] == kuga_satake_dimension(n) / 2, || format!("type II n = {n}: W_-2 != d/2"))?;
    }
    for n in 1..=5 {
        let l = GramLattice::split_type3(n).map_err(e)?;
        let f = filtration_type3(&l, &l.basis_vector(0), s).map_err(e)?;
        ensure(f.dims()[1] == kuga_satake_dimension(n), || format!("type III n = {n}: W_-1 = {}", f.dims()[1]))?;
        ensure(f.graded_dims()[1] == 0, || format!("type III n = {n}: gr nonzero"))?;
    }
    within(start.elapsed(), CLIFFORD_LIMIT)?;
    Ok(format!(
        "II n <= 5, III n <= 5, exact ranks; limit 10s ({})",
        if s.is_parallel() { "parallel" } else { "sequential" }
    ))
}

fn c6_cocharacter() -> Check {
    let s = Strategy::default();
    let l = GramLattice::split_type2(2).map_err(e)?;
    let f = filtration_type2(&l, &l.basis_vector(0), &l.basis_vector(1), s).map_err(e)?;
    let g = graded_splitting(&f, &l.basis_vector(2), &l.basis_vector(3), s).map_err(e)?;
    let table = cocharacter_table(&g, s).map_err(e)?;
    ensure(table.containments.len() == 9, || format!("{} containments", table.containments.len()))?;
    for c in &table.containments {
        ensure(c.holds, || format!("{} * H_{} not in H_{}", c.piece.label(), c.source, c.target))?;
    }
    ensure(table.parity_preserved, || "parity not preserved".into())?;
    let vacuous = table.containments.iter().filter(|c| c.vacuous).count();
    Ok(format!("9 containments hold ({vacuous} vacuous), parity preserved"))
}

fn c7_galois() -> Check {
    let full = full_group(3, 1, 2).map_err(e)?;
    ensure(full.len() == 6, || format!("|G| = {}", full.len()))?;
    let derived = commutator_closure(&full).map_err(e)?;
    let unipotent: Vec<_> = full.iter().filter(|g| g.is_unipotent()).cloned().collect();
    let mut sorted = derived.clone();
    sorted.sort();
    let mut upper = unipotent.clone();
    upper.sort();
    ensure(sorted == upper && derived.len() == 3, || format!("derived order {}", derived.len()))?;
    let derived = commutator_closure(&full_group_generators(3, 1, 4).map_err(e)?).map_err(e)?;
    let block = unipotent_order(3, 1, 4).map_err(e)?;
    ensure(BigUint::from(derived.len()) == block && block == BigUint::from(81u32), || {
        format!("(3,1,4): derived order {}", derived.len())
    })?;
    ensure(derived.iter().all(|g| g.is_unipotent()), || "(3,1,4): derived not unipotent".into())?;
    for (p, n, d) in [(3u64, 1u32, 2usize), (3, 1, 4), (2, 1, 2), (3, 2, 4), (5, 1, 4), (2, 3, 2)] {
        let phi = BigUint::from(p - 1) * BigUint::from(p).pow(n - 1);
        let got = unipotent_index(p, n, d).map_err(e)?;
        ensure(got == phi.pow(d as u32 / 2), || format!("index ({p},{n},{d}) = {got}"))?;
    }
    Ok("|G| = 6, [G,G] = U of order 3; (3,1,4) closure = 3^4; index formula".into())
}

fn c8_classification() -> Check {
    let s = Scenario::parse(CLASSIFY_SCENARIO).map_err(e)?;
    let first = emit_report(&run_scenario(&s), Format::Json);
    let second = emit_report(&run_scenario(&s), Format::Json);
    ensure(first == second, || "json output not byte-stable".into())?;
    let text = String::from_utf8(first).map_err(e)?;
    ensure(CLASSIFY_GOLDEN.strip_suffix('\n') == Some(text.as_str()), || "report differs from golden file".into())?;
    let report = run_scenario(&s);
    let rows = report.result.as_ref().and_then(|r| r["cases"].as_array().cloned()).ok_or("no cases")?;
    for row in &rows {
        let reduction = row["abelian"]
            .as_object()
            .and_then(|a| a.values().next())
            .map(|v| v.get("reduction").unwrap_or(v).as_str().unwrap_or("").to_string());
        let want = match reduction.as_deref() {
            Some("ordinary") => MonodromyKind::UnipotentInertia,
            Some("supersingular") => MonodromyKind::FiniteIndexInertia,
            _ => MonodromyKind::TrivialImage,
        };
        ensure(row["kind"] == want.name(), || format!("row {row} expected {}", want.name()))?;
        ensure(row["citation"].as_str().is_some_and(|c| !c.is_empty()), || "missing citation".into())?;
    }
    Ok(format!("{} rows match golden, byte-stable", rows.len()))
}

fn random_series(rng: &mut ChaCha8Rng, f: &Arc<FiniteField>) -> PuiseuxSeries {
    let ram = rng.random_range(1..=2u64);
    let terms: Vec<_> =
        (0..rng.random_range(0..5)).map(|_| (rng.random_range(0..10i64), f.from_int(rng.random_range(1..3)))).collect();
    let trunc = rng.random_bool(0.5).then(|| rng.random_range(6..14i64));
    PuiseuxSeries::from_terms(f, ram, terms, trunc)
}

fn suite_ring(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let f = prime_field(3);
    for case in 0..RANDOM_CASES {
        let (a, b, c) = (random_series(rng, &f), random_series(rng, &f), random_series(rng, &f));
        let ok = &a * &b == &b * &a
            && (&(&a * &b) * &c).agrees_with(&(&a * &(&b * &c)))
            && (&(&a + &b) + &c).agrees_with(&(&a + &(&b + &c)))
            && (&a * &(&b + &c)).agrees_with(&(&(&a * &b) + &(&a * &c)));
        ensure(ok, || format!("ring axioms, case {case}"))?;
    }
    Ok(())
}

fn suite_preparation(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let f = prime_field(3);
    let mono = |rng: &mut ChaCha8Rng, lo: i64| {
        let terms: Vec<_> = (0..rng.random_range(1..3))
            .map(|_| (rng.random_range(lo..6i64), f.from_int(rng.random_range(1..3))))
            .collect();
        PuiseuxSeries::from_terms(&f, 1, terms, None)
    };
    for case in 0..RANDOM_CASES {
        let d = rng.random_range(1..4usize);
        let mut coeffs: Vec<PuiseuxSeries> = (0..d).map(|_| mono(rng, 1)).collect();
        coeffs.push(&PuiseuxSeries::one(&f) + &PuiseuxSeries::t(&f));
        coeffs.extend((0..3).map(|_| mono(rng, 0)));
        let g = CoefficientSeries::new(&f, coeffs, Some(d + 4)).map_err(e)?;
        let prepared = weierstrass_prepare(&g).map_err(e)?;
        ensure(prepared.degree == d && prepared.product().map_err(e)?.agrees_with(&g), || {
            format!("preparation, case {case}")
        })?;
    }
    Ok(())
}

fn suite_homomorphism(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let f3 = prime_field(3);
    let f2 = prime_field(2);
    let w = WeierstrassModel::parse(&f2, ["t", "0", "1", "0", "0"]).map_err(e)?;
    let laws = [
        FormalGroupLaw::additive(&f3, 12),
        FormalGroupLaw::multiplicative(&f3, 12),
        ec_formal_group(&w, 10).map_err(e)?,
    ];
    let mut cache: BTreeMap<(usize, u64), CoefficientSeries> = BTreeMap::new();
    let mut mult = |which: usize, m: u64| -> Result<CoefficientSeries, String> {
        if let Some(s) = cache.get(&(which, m)) {
            return Ok(s.clone());
        }
        let s = mult_by_int(&laws[which], m).map_err(e)?;
        cache.insert((which, m), s.clone());
        Ok(s)
    };
    for case in 0..RANDOM_CASES {
        let (which, m, k) = (rng.random_range(0..3), rng.random_range(1..5u64), rng.random_range(1..5u64));
        let lhs = mult(which, m + k)?;
        let rhs = formal_sum(&laws[which], &mult(which, m)?, &mult(which, k)?).map_err(e)?;
        ensure(lhs.agrees_with(&rhs), || format!("[m+k] = F([m],[k]), case {case}"))?;
    }
    Ok(())
}

fn naive_hull(points: &[(i64, Rational)], x: i64) -> Rational {
    let mut best: Option<Rational> = None;
    for a in points {
        for b in points {
            if a.0 <= x && x <= b.0 {
                let val = if a.0 == b.0 { a.1.clone() } else { &a.1 + (&b.1 - &a.1) * int(x - a.0) / int(b.0 - a.0) };
                if best.as_ref().is_none_or(|m| val < *m) {
                    best = Some(val);
                }
            }
        }
    }
    best.expect("x lies in the point range")
}

fn suite_hull(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for case in 0..RANDOM_CASES {
        let mut pts: BTreeMap<i64, Rational> = BTreeMap::new();
        for _ in 0..rng.random_range(1..8) {
            pts.insert(
                rng.random_range(0..12),
                Rational::new(rng.random_range(0..20i64).into(), rng.random_range(1..4i64).into()),
            );
        }
        let points: Vec<(i64, Rational)> = pts.into_iter().collect();
        let poly = NewtonPolygon::new(&points).map_err(e)?;
        for (i, _) in &points {
            ensure(poly.line_value(*i) == Some(naive_hull(&points, *i)), || format!("hull, case {case}"))?;
        }
    }
    Ok(())
}

fn suite_oracle(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let f = prime_field(3);
    let x = CoefficientSeries::x_power(&f, 1);
    for case in 0..RANDOM_CASES {
        let mut h = CoefficientSeries::polynomial(&f, vec![PuiseuxSeries::one(&f)]).map_err(e)?;
        let mut expected: BTreeMap<Rational, usize> = BTreeMap::new();
        for _ in 0..rng.random_range(1..5) {
            let v = rng.random_range(0..4i64);
            let root = PuiseuxSeries::from_terms(&f, 1, [(v, f.from_int(rng.random_range(1..3)))], None);
            h = h.mul(&x.sub(&CoefficientSeries::polynomial(&f, vec![root]).map_err(e)?).map_err(e)?).map_err(e)?;
            *expected.entry(int(v)).or_default() += 1;
        }
        let polygon = NewtonPolygon::from_valuations(0, &h.valuations()).map_err(e)?;
        let mut hull: BTreeMap<Rational, usize> = BTreeMap::new();
        for (s, len) in polygon.root_valuations() {
            *hull.entry(s).or_default() += len;
        }
        let roots = puiseux_roots(&h, &PuiseuxOptions::new(int(8))).map_err(e)?;
        let oracle: BTreeMap<Rational, usize> =
            valuation_multiset(&roots).map_err(e)?.into_iter().filter_map(|(v, m)| v.map(|v| (v, m))).collect();
        ensure(hull == expected && oracle == expected, || format!("oracle vs polygon, case {case}"))?;
    }
    Ok(())
}

fn random_element(rng: &mut ChaCha8Rng, m: usize) -> CliffordElement {
    let mut coeffs = vec![int(0); 1 << m];
    for _ in 0..rng.random_range(1..6) {
        coeffs[rng.random_range(0..1usize << m)] += int(rng.random_range(-3..4));
    }
    CliffordElement::from_coeffs(m, coeffs).expect("dense coefficients")
}

fn suite_clifford(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let lattices = [
        GramLattice::split_type3(1).map_err(e)?,
        GramLattice::split_type2(2).map_err(e)?,
        GramLattice::split_type2(4).map_err(e)?,
    ];
    for case in 0..RANDOM_CASES {
        let l = &lattices[case % lattices.len()];
        let m = l.rank();
        let (a, b, c) = (random_element(rng, m), random_element(rng, m), random_element(rng, m));
        let left = l.mul(&l.mul(&a, &b).map_err(e)?, &c).map_err(e)?;
        let right = l.mul(&a, &l.mul(&b, &c).map_err(e)?).map_err(e)?;
        ensure(left == right, || format!("associativity, case {case}"))?;
    }
    Ok(())
}

fn c9_properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let suites: [(&str, Suite); 6] = [
        ("ring", suite_ring),
        ("preparation", suite_preparation),
        ("homomorphism", suite_homomorphism),
        ("hull", suite_hull),
        ("oracle", suite_oracle),
        ("clifford", suite_clifford),
    ];
    for (name, suite) in suites {
        suite(&mut rng).map_err(|m| format!("{name}: {m}"))?;
    }
    Ok(format!("6 suites x {RANDOM_CASES} cases, seed {SEED:#x}, 0 failures"))
}

const CRITERIA: [Criterion; 9] = [
    (1, "ladder m = 1", c1_ladder),
    (2, "elliptic end-to-end", c2_elliptic),
    (3, "ladder m > 1", c3_larger_m),
    (4, "tate towers", c4_tate),
    (5, "clifford dimensions", c5_clifford),
    (6, "cocharacter table", c6_cocharacter),
    (7, "galois block group", c7_galois),
    (8, "classification golden", c8_classification),
    (9, "property suites", c9_properties),
];

pub fn run_all() -> Vec<Outcome> {
    CRITERIA
        .iter()
        .map(|(id, name, f)| {
            let start = Instant::now();
            let result = f();
            let elapsed = start.elapsed();
            let (passed, detail) = match result {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            Outcome { id: *id, name, passed, detail, elapsed }
        })
        .collect()
}
