use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use monodromy_core::clifford::{CliffordElement, GramLattice, Parity};
use monodromy_core::formal_group::{ec_formal_group, formal_sum, mult_by_int, FormalGroupLaw, WeierstrassModel};
use monodromy_core::newton::NewtonPolygon;
use monodromy_core::poly::{weierstrass_prepare, CoefficientSeries};
use monodromy_core::puiseux::{puiseux_roots, valuation_multiset, PuiseuxOptions};
use monodromy_core::rational::{int, rat, Rational};
use monodromy_core::{FiniteField, PuiseuxSeries};
use proptest::prelude::*;

fn f3() -> Arc<FiniteField> {
    static F: OnceLock<Arc<FiniteField>> = OnceLock::new();
    F.get_or_init(|| Arc::new(FiniteField::prime(3).unwrap())).clone()
}

fn f2() -> Arc<FiniteField> {
    static F: OnceLock<Arc<FiniteField>> = OnceLock::new();
    F.get_or_init(|| Arc::new(FiniteField::prime(2).unwrap())).clone()
}

fn series() -> impl Strategy<Value = PuiseuxSeries> {
    (1u64..=2, prop::collection::vec((0i64..10, 1i64..3), 0..5), prop::option::of(6i64..14)).prop_map(
        |(ram, terms, trunc)| {
            let f = f3();
            PuiseuxSeries::from_terms(&f, ram, terms.into_iter().map(|(e, c)| (e, f.from_int(c))), trunc)
        },
    )
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(256)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn series_ring_axioms(a in series(), b in series(), c in series()) {
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert!((&(&a * &b) * &c).agrees_with(&(&a * &(&b * &c))));
        prop_assert!((&(&a + &b) + &c).agrees_with(&(&a + &(&b + &c))));
        prop_assert!((&a * &(&b + &c)).agrees_with(&(&(&a * &b) + &(&a * &c))));
        prop_assert!((&a - &a).agrees_with(&PuiseuxSeries::zero(&f3())));
        prop_assert_eq!(&a * &PuiseuxSeries::one(&f3()), a.clone());
    }

    #[test]
    fn inverse_of_truncated_units(a in series()) {
        let a = a.bounded(&int(12));
        if let monodromy_core::Valuation::Finite(_) = a.valuation() {
            let inv = a.invert().unwrap();
            prop_assert!((&a * &inv).agrees_with(&PuiseuxSeries::one(&f3())));
        }
    }

    #[test]
    fn preparation_identity(
        d in 1usize..4,
        lower in prop::collection::vec(prop::collection::vec((1i64..6, 1i64..3), 1..3), 3),
        upper in prop::collection::vec(prop::collection::vec((0i64..6, 1i64..3), 0..3), 3),
    ) {
        let f = f3();
        let mk = |terms: &[(i64, i64)]| PuiseuxSeries::from_terms(&f, 1, terms.iter().map(|&(e, c)| (e, f.from_int(c))), None);
        let mut coeffs: Vec<PuiseuxSeries> = lower[..d].iter().map(|t| mk(t)).collect();
        coeffs.push(&PuiseuxSeries::one(&f) + &mk(&[(1, 1)]));
        coeffs.extend(upper.iter().map(|t| mk(t)));
        let g = CoefficientSeries::new(&f, coeffs, Some(d + 4)).unwrap();
        let prepared = weierstrass_prepare(&g).unwrap();
        prop_assert_eq!(prepared.degree, d);
        prop_assert!(prepared.product().unwrap().agrees_with(&g));
    }

    #[test]
    fn multiplication_is_a_homomorphism(m in 1u64..5, k in 1u64..5, which in 0usize..3) {
        let law = &laws()[which];
        let lhs = mult_by_int(law, m + k).unwrap();
        let rhs = formal_sum(law, &mult_by_int(law, m).unwrap(), &mult_by_int(law, k).unwrap()).unwrap();
        prop_assert!(lhs.agrees_with(&rhs));
    }

    #[test]
    fn polygon_matches_naive_hull(pts in prop::collection::btree_map(0i64..12, (0i64..20, 1i64..4), 1..8)) {
        let points: Vec<(i64, Rational)> = pts.iter().map(|(i, (n, d))| (*i, rat(*n, *d))).collect();
        let poly = NewtonPolygon::new(&points).unwrap();
        for (i, v) in &points {
            let hull = naive_hull(&points, *i);
            prop_assert_eq!(poly.line_value(*i).unwrap(), hull.clone());
            prop_assert!(v >= &hull);
        }
        for (i, v) in poly.vertices() {
            prop_assert_eq!(v, &naive_hull(&points, *i));
        }
        for (i, v) in poly.points_above() {
            prop_assert!(v > &naive_hull(&points, *i));
        }
    }

    #[test]
    fn oracle_agrees_with_polygon(
        roots in prop::collection::vec((0i64..4, 1i64..3), 1..5),
        odd in prop::option::of((0i64..3, 1i64..3)),
    ) {
        let f = f3();
        let x = CoefficientSeries::x_power(&f, 1);
        let mut h = CoefficientSeries::polynomial(&f, vec![PuiseuxSeries::one(&f)]).unwrap();
        let mut expected: BTreeMap<Rational, usize> = BTreeMap::new();
        for (v, c) in &roots {
            let r = PuiseuxSeries::from_terms(&f, 1, [(*v, f.from_int(*c))], None);
            let factor = x.sub(&CoefficientSeries::polynomial(&f, vec![r]).unwrap()).unwrap();
            h = h.mul(&factor).unwrap();
            *expected.entry(int(*v)).or_default() += 1;
        }
        if let Some((v, c)) = odd {
            // x^2 - c t^(2v+1): two roots of valuation v + 1/2
            let r = PuiseuxSeries::from_terms(&f, 1, [(2 * v + 1, f.from_int(c))], None);
            let factor = CoefficientSeries::x_power(&f, 2).sub(&CoefficientSeries::polynomial(&f, vec![r]).unwrap()).unwrap();
            h = h.mul(&factor).unwrap();
            *expected.entry(rat(2 * v + 1, 2)).or_default() += 2;
        }
        let polygon = NewtonPolygon::from_valuations(0, &h.valuations()).unwrap();
        let mut from_polygon: BTreeMap<Rational, usize> = BTreeMap::new();
        for (s, len) in polygon.root_valuations() {
            *from_polygon.entry(s).or_default() += len;
        }
        prop_assert_eq!(&from_polygon, &expected);
        let oracle = valuation_multiset(&puiseux_roots(&h, &PuiseuxOptions::new(int(8))).unwrap()).unwrap();
        let oracle: BTreeMap<Rational, usize> = oracle.into_iter().map(|(v, m)| (v.unwrap(), m)).collect();
        prop_assert_eq!(oracle, expected);
    }

    #[test]
    fn clifford_associativity(which in 0usize..4, a in element(), b in element(), c in element()) {
        let l = &lattices()[which];
        let m = l.rank();
        let (a, b, c) = (a.restrict(m), b.restrict(m), c.restrict(m));
        let left = l.mul(&l.mul(&a, &b).unwrap(), &c).unwrap();
        let right = l.mul(&a, &l.mul(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn clifford_vector_squares_and_parity(which in 0usize..4, v in prop::collection::vec(-3i64..4, 6), a in element(), b in element()) {
        let l = &lattices()[which];
        let m = l.rank();
        let v: Vec<Rational> = v[..m].iter().map(|&x| int(x)).collect();
        let x = CliffordElement::vector(&v);
        prop_assert_eq!(l.mul(&x, &x).unwrap(), CliffordElement::scalar(m, l.q(&v)));
        let (a, b) = (a.restrict(m), b.restrict(m));
        for pa in [Parity::Even, Parity::Odd] {
            for pb in [Parity::Even, Parity::Odd] {
                let prod = l.mul(&a.part(pa), &b.part(pb)).unwrap();
                if !prod.is_zero() {
                    prop_assert_eq!(prod.parity(), Some(pa.xor(pb)));
                }
            }
        }
    }
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
    best.unwrap()
}

fn laws() -> &'static [FormalGroupLaw] {
    static L: OnceLock<Vec<FormalGroupLaw>> = OnceLock::new();
    L.get_or_init(|| {
        let f = f2();
        let w = WeierstrassModel::parse(&f, ["t", "0", "1", "0", "0"]).unwrap();
        vec![
            FormalGroupLaw::additive(&f3(), 12),
            FormalGroupLaw::multiplicative(&f3(), 12),
            ec_formal_group(&w, 10).unwrap(),
        ]
    })
}

/// Split lattices and a non-orthogonal basis of one of them.
fn lattices() -> &'static [GramLattice] {
    static L: OnceLock<Vec<GramLattice>> = OnceLock::new();
    L.get_or_init(|| {
        let skew = GramLattice::from_integers(&[
            vec![0, 1, 1, 0, 0],
            vec![1, 0, 0, 1, 0],
            vec![1, 0, 2, 1, 1],
            vec![0, 1, 1, -2, 0],
            vec![0, 0, 1, 0, 2],
        ])
        .unwrap();
        vec![
            GramLattice::split_type3(1).unwrap(),
            GramLattice::split_type2(2).unwrap(),
            GramLattice::split_type2(4).unwrap(),
            skew,
        ]
    })
}

#[derive(Clone, Debug)]
struct Sparse(Vec<(usize, i64)>);

impl Sparse {
    fn restrict(&self, m: usize) -> CliffordElement {
        let mut coeffs = vec![int(0); 1 << m];
        for (mask, c) in &self.0 {
            coeffs[mask % (1 << m)] += int(*c);
        }
        CliffordElement::from_coeffs(m, coeffs).unwrap()
    }
}

fn element() -> impl Strategy<Value = Sparse> {
    prop::collection::vec((0usize..64, -3i64..4), 1..6).prop_map(Sparse)
}
