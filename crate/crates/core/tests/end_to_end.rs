use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use monodromy_core::clifford::{
    cocharacter_table, filtration_type2, filtration_type3, graded_splitting, kuga_satake_dimension, GramLattice,
};
use monodromy_core::formal_group::{ec_formal_group, WeierstrassModel};
use monodromy_core::galois::{commutator_closure, full_group, full_group_generators, unipotent_index, unipotent_order};
use monodromy_core::ladder::{closed_form_m1, from_p_series, p_decomposition, valuation_ladder, verify_ladder};
use monodromy_core::poly::CoefficientSeries;
use monodromy_core::rational::{int, rat, Rational};
use monodromy_core::tate::{tate_torsion_tower, TateLattice};
use monodromy_core::{FiniteField, PuiseuxSeries, Strategy};
use num_bigint::BigUint;

#[test]
fn m1_ladders_match_closed_form() {
    let start = Instant::now();
    for p in [2u64, 3, 5] {
        let interior: BTreeMap<usize, Rational> = (1..p as usize).map(|i| (i, int(1))).collect();
        let ladder = valuation_ladder(p, &interior, 6).unwrap();
        assert_eq!(ladder.n0, 1);
        for (k, level) in ladder.levels.iter().enumerate() {
            // 1 / (p^(n-1) (p-1)) written out by hand
            let den = (p as i64).pow(k as u32) * (p as i64 - 1);
            assert_eq!(level.valuation, rat(1, den));
            assert_eq!(level.valuation, closed_form_m1(p, k + 1));
        }
    }
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn elliptic_curve_end_to_end() {
    let f2 = Arc::new(FiniteField::prime(2).unwrap());
    let w = WeierstrassModel::parse(&f2, ["t", "0", "1", "0", "0"]).unwrap();
    let law = ec_formal_group(&w, 6).unwrap();
    let data = p_decomposition(&law).unwrap();
    assert_eq!(data.m, int(1));
    let ladder = valuation_ladder(2, &data.interior_valuations().unwrap(), 2).unwrap();
    let check = verify_ladder(&data, &ladder, 2).unwrap();
    assert_eq!(check.levels[0].oracle, vec![(int(1), 1)]);
    assert_eq!(check.levels[1].oracle, vec![(rat(1, 2), 2)]);
}

#[test]
fn larger_m_regime_with_oracle() {
    let f3 = Arc::new(FiniteField::prime(3).unwrap());
    // g(x) = t^3 x^3 + t^2 x^6 + x^9: c_1 = t^3, c_2 = t^2
    let c = |i: usize| match i {
        3 => PuiseuxSeries::from_terms(&f3, 1, [(3, f3.one())], None),
        6 => PuiseuxSeries::from_terms(&f3, 1, [(2, f3.one())], None),
        9 => PuiseuxSeries::one(&f3),
        _ => PuiseuxSeries::zero(&f3),
    };
    let series = CoefficientSeries::polynomial(&f3, (0..10).map(c).collect()).unwrap();
    let data = from_p_series(3, &series).unwrap();
    let interior = data.interior_valuations().unwrap();
    assert_eq!(interior, BTreeMap::from([(1, int(3)), (2, int(2))]));
    let ladder = valuation_ladder(3, &interior, 4).unwrap();
    assert_eq!(ladder.valuations(), vec![rat(3, 2), rat(1, 2), rat(1, 6), rat(1, 18)]);
    assert_eq!(ladder.n0, 2);
    let check = verify_ladder(&data, &ladder, 1).unwrap();
    assert_eq!(check.levels[0].oracle, vec![(rat(3, 2), 2)]);
}

#[test]
fn tate_towers_are_purely_inseparable() {
    for p in [2u64, 3] {
        let f = Arc::new(FiniteField::prime(p).unwrap());
        let q1 = PuiseuxSeries::parse(&f, "t + t^5 + O(t^64)").unwrap();
        let q2 = PuiseuxSeries::parse(&f, "t^3 + t^4 + O(t^64)").unwrap();
        for periods in [vec![q1.clone()], vec![q1.clone(), q2.clone()]] {
            let lattice = TateLattice::new(periods).unwrap();
            for n in 0..=3u32 {
                let tower = tate_torsion_tower(&lattice, n);
                assert_eq!(tower.separable_degree, BigUint::from(1u32));
                assert_eq!(tower.inseparable_degree, BigUint::from(p).pow(n * lattice.rank() as u32));
                assert!(tower.verify(&lattice));
            }
        }
    }
}

#[test]
fn block_groups() {
    assert_eq!(full_group(3, 1, 2).unwrap().len(), 6);
    let derived = commutator_closure(&full_group(3, 1, 2).unwrap()).unwrap();
    assert_eq!(derived.len(), 3);
    let derived = commutator_closure(&full_group_generators(3, 1, 4).unwrap()).unwrap();
    assert_eq!(BigUint::from(derived.len()), unipotent_order(3, 1, 4).unwrap());
    assert!(derived.iter().all(|g| g.is_unipotent()));
    for (p, n, d) in [(3u64, 1u32, 2usize), (2, 1, 2), (3, 2, 4), (5, 1, 4), (2, 3, 2)] {
        let phi = (p - 1) * p.pow(n - 1);
        assert_eq!(unipotent_index(p, n, d).unwrap(), BigUint::from(phi).pow(d as u32 / 2));
    }
    let full = full_group(3, 2, 2).unwrap();
    let unipotent = full.iter().filter(|g| g.is_unipotent()).count();
    assert_eq!(BigUint::from(full.len() / unipotent), unipotent_index(3, 2, 2).unwrap());
}

#[test]
fn clifford_dimension_laws() {
    let start = Instant::now();
    let s = Strategy::default();
    for n in 2..=5 {
        let l = GramLattice::split_type2(n).unwrap();
        let f = filtration_type2(&l, &l.basis_vector(0), &l.basis_vector(1), s).unwrap();
        assert_eq!(f.dims(), [1 << n, 3 << n, 1 << (n + 2)]);
        assert_eq!(f.dims()[0], kuga_satake_dimension(n) / 2);
    }
    for n in 1..=5 {
        let l = GramLattice::split_type3(n).unwrap();
        let f = filtration_type3(&l, &l.basis_vector(0), s).unwrap();
        assert_eq!(f.dims()[1], 1 << (n + 1));
        assert_eq!(f.graded_dims()[1], 0);
    }
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn cocharacter_tables() {
    let s = Strategy::default();
    for n in 2..=3 {
        let l = GramLattice::split_type2(n).unwrap();
        let f = filtration_type2(&l, &l.basis_vector(0), &l.basis_vector(1), s).unwrap();
        let g = graded_splitting(&f, &l.basis_vector(2), &l.basis_vector(3), s).unwrap();
        let table = cocharacter_table(&g, s).unwrap();
        assert_eq!(table.containments.len(), 9);
        assert!(table.all_hold());
        assert_eq!(table.containments.iter().any(|c| c.vacuous), n == 2);
    }
}
