//! Height-two `[p]`-series and the valuation ladder of `p`-power torsion.
//!
//! In characteristic `p` the `[p]`-series of a formal group is a series in
//! `x^p`: `[p](x) = g(x^p)`. When the special fiber has height two and the
//! generic fiber is ordinary, `g` prepares to a distinguished polynomial
//! `h(u) = u^p + c_{p-1} u^{p-1} + ... + c_1 u` with every `c_i` in the maximal
//! ideal and `c_1 ≠ 0`. Successive torsion levels satisfy
//! `Σ c_i^{p^(n-1)} y_n^i = y_{n-1}`, whose Newton polygons give the ladder.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::field::is_prime;
use crate::formal_group::{mult_by_int, FormalGroupLaw};
use crate::newton::NewtonPolygon;
use crate::poly::{weierstrass_prepare, CoefficientSeries, PreparedFactorization};
use crate::puiseux::{puiseux_roots, valuation_multiset, PuiseuxOptions, PuiseuxRoot};
use crate::rational::{denominator_u64, int, rat, Rational};
use crate::series::{PuiseuxSeries, Valuation};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Height2Data {
    pub p: u64,
    /// `g` with `[p](x) = g(x^p)`.
    pub g: CoefficientSeries,
    pub prepared: PreparedFactorization,
    /// Coefficients `c_0..c_p` of the distinguished factor `h`.
    pub c: Vec<PuiseuxSeries>,
    /// `v(c_i)` for `1 ≤ i ≤ p - 1`, at index `i - 1`.
    pub interior: Vec<Valuation>,
    /// `m = v(c_1)`.
    pub m: Rational,
    /// Polygon of the nonzero `p`-torsion: `(i, v(c_i))` and `(p, 0)`.
    pub level_one: NewtonPolygon,
}

impl Height2Data {
    /// Interior valuations as ladder input; exact zeros are omitted.
    pub fn interior_valuations(&self) -> Result<BTreeMap<usize, Rational>> {
        let mut out = BTreeMap::new();
        for (k, v) in self.interior.iter().enumerate() {
            match v {
                Valuation::Finite(r) => {
                    out.insert(k + 1, r.clone());
                }
                Valuation::Infinite => {}
                Valuation::AtLeast(t) => {
                    return Err(Error::InsufficientPrecision(format!("v(c_{}) is only known to be >= {t}", k + 1)))
                }
            }
        }
        Ok(out)
    }
}

/// Computes `[p]` on `law` and decomposes it.
pub fn p_decomposition(law: &FormalGroupLaw) -> Result<Height2Data> {
    let p = law.characteristic();
    let series = mult_by_int(law, p)?;
    from_p_series(p, &series)
}

/// Decomposes a given `[p]`-series (for instance a synthetic one).
pub fn from_p_series(p: u64, series: &CoefficientSeries) -> Result<Height2Data> {
    let field = series.field().clone();
    if field.characteristic() != p {
        return Err(Error::FieldMismatch);
    }
    let pu = p as usize;
    for (i, c) in series.coefficients().iter().enumerate() {
        if i % pu != 0 && !c.is_exact_zero() {
            return Err(Error::NotFrobeniusSeries(i));
        }
    }
    let g_coeffs: Vec<PuiseuxSeries> = series.coefficients().iter().step_by(pu).cloned().collect();
    let g = CoefficientSeries::new(&field, g_coeffs, series.x_precision().map(|x| x.div_ceil(pu)))?;
    let prepared = match weierstrass_prepare(&g) {
        Ok(prep) => prep,
        Err(Error::InsufficientPrecision(msg)) if g.coeff(1).is_some_and(|c| !c.valuation().is_determined()) => {
            return Err(Error::GenericFiberSupersingular(msg))
        }
        Err(e) => return Err(e),
    };
    let d = prepared.degree;
    if d < pu {
        return Err(Error::GoodOrdinaryReduction(d));
    }
    if d > pu {
        return Err(Error::UnexpectedHeight(d, p));
    }
    let c = prepared.distinguished.clone();
    if !c[0].is_exact_zero() {
        return Err(Error::Invariant("[p] has a nonzero constant term".into()));
    }
    let m = match c[1].valuation() {
        Valuation::Finite(v) => v,
        Valuation::AtLeast(t) => return Err(Error::GenericFiberSupersingular(format!("zero at precision {t}"))),
        Valuation::Infinite => return Err(Error::GenericFiberSupersingular("exactly zero".into())),
    };
    let interior: Vec<Valuation> = c[1..pu].iter().map(|x| x.valuation()).collect();
    let mut vals = interior.clone();
    vals.push(Valuation::Finite(int(0)));
    let level_one = NewtonPolygon::from_valuations(1, &vals)?;
    Ok(Height2Data { p, g, prepared, c, interior, m, level_one })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LadderLevel {
    pub n: usize,
    /// `v_n`, the valuation of the level-`n` torsion coordinate.
    pub valuation: Rational,
    /// `e_n`, the denominator of `v_n`.
    pub denominator: u64,
    /// Full root-valuation multiset of the level polygon.
    pub root_valuations: Vec<(Rational, usize)>,
    pub polygon: NewtonPolygon,
    /// The polygon is one segment with no touching interior point.
    pub single_segment: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValuationLadder {
    pub p: u64,
    pub interior: BTreeMap<usize, Rational>,
    pub levels: Vec<LadderLevel>,
    /// Least `n` after which `v_{k+1} = v_k / p` is certified for all `k ≥ n`.
    pub n0: usize,
}

impl ValuationLadder {
    pub fn valuations(&self) -> Vec<Rational> {
        self.levels.iter().map(|l| l.valuation.clone()).collect()
    }

    pub fn denominators(&self) -> Vec<u64> {
        self.levels.iter().map(|l| l.denominator).collect()
    }

    /// Whether level `n` lies in the certified single-slope regime.
    pub fn in_regime(&self, n: usize) -> bool {
        n > self.n0
    }
}

impl fmt::Display for ValuationLadder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>3}  {:>12}  {:>6}  regime", "n", "v_n", "e_n")?;
        for l in &self.levels {
            writeln!(
                f,
                "{:>3}  {:>12}  {:>6}  {}",
                l.n,
                l.valuation.to_string(),
                l.denominator,
                if self.in_regime(l.n) { "single-slope" } else { "-" }
            )?;
        }
        write!(f, "n0 = {}", self.n0)
    }
}

const EXTRA_LEVELS: usize = 256;

fn level_polygon(
    p: u64,
    interior: &BTreeMap<usize, Rational>,
    n: usize,
    prev: Option<&Rational>,
) -> Result<LadderLevel> {
    let scale = Rational::from_integer(num_bigint::BigInt::from(p).pow((n - 1) as u32));
    let mut points: Vec<(i64, Rational)> = Vec::new();
    if let Some(v) = prev {
        points.push((0, v.clone()));
    }
    for (i, v) in interior {
        points.push((*i as i64, v * &scale));
    }
    points.push((p as i64, int(0)));
    let polygon = NewtonPolygon::new(&points)?;
    let segments = polygon.segments();
    let valuation = -&segments[0].slope;
    let single_segment = segments.len() == 1 && polygon.collinear_points().is_empty();
    Ok(LadderLevel {
        n,
        denominator: denominator_u64(&valuation),
        valuation,
        root_valuations: polygon.root_valuations(),
        polygon,
        single_segment,
    })
}

/// The valuation ladder for interior valuations `v(c_i)`, `1 ≤ i ≤ p - 1`.
///
/// Levels beyond `n_max` are computed internally when needed to certify
/// `n0`, but only `n_max` levels are reported.
pub fn valuation_ladder(p: u64, interior: &BTreeMap<usize, Rational>, n_max: usize) -> Result<ValuationLadder> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    if !is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    for (i, v) in interior {
        if *i < 1 || *i as u64 >= p {
            return Err(Error::InvalidArgument(format!("interior index {i} outside 1..{}", p - 1)));
        }
        if !v.is_positive() {
            return Err(Error::InvalidArgument(format!("v(c_{i}) = {v} is not positive")));
        }
    }
    if !interior.contains_key(&1) {
        return Err(Error::InvalidArgument("v(c_1) = m must be finite".into()));
    }
    let mut levels = vec![level_polygon(p, interior, 1, None)?];
    let mut n0 = None;
    for n in 1..n_max + EXTRA_LEVELS {
        let next = level_polygon(p, interior, n + 1, Some(&levels[n - 1].valuation))?;
        if n0.is_none() && next.single_segment && next.denominator == p * levels[n - 1].denominator {
            n0 = Some(n);
        }
        levels.push(next);
        if n0.is_some() && levels.len() >= n_max {
            break;
        }
    }
    let n0 = n0.ok_or_else(|| Error::Invariant("single-slope regime not reached".into()))?;
    levels.truncate(n_max);
    Ok(ValuationLadder { p, interior: interior.clone(), levels, n0 })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelCheck {
    pub n: usize,
    pub ladder: Vec<(Rational, usize)>,
    pub oracle: Vec<(Rational, usize)>,
    /// Expansion target that succeeded for the chosen root.
    pub target: Rational,
    /// The chosen torsion coordinate `y_n`, when it is rational over the
    /// working Puiseux field.
    pub root: Option<PuiseuxSeries>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LadderVerification {
    pub levels: Vec<LevelCheck>,
}

fn format_multiset(m: &[(Rational, usize)]) -> String {
    let parts: Vec<String> = m.iter().map(|(v, k)| format!("{v} x{k}")).collect();
    format!("{{{}}}", parts.join(", "))
}

fn merge(m: &[(Rational, usize)]) -> Vec<(Rational, usize)> {
    let mut acc: BTreeMap<Rational, usize> = BTreeMap::new();
    for (v, k) in m {
        *acc.entry(v.clone()).or_default() += k;
    }
    acc.into_iter().collect()
}

/// Cross-checks the ladder against Newton-Puiseux roots of the actual level
/// polynomials: `Σ_{i≥1} c_i Y^(i-1)` at level one, then
/// `Σ_{i≥1} c_i^(p^(n-1)) Y^i - y_{n-1}`.
pub fn verify_ladder(data: &Height2Data, ladder: &ValuationLadder, levels: usize) -> Result<LadderVerification> {
    if ladder.p != data.p {
        return Err(Error::InvalidArgument("ladder and data have different p".into()));
    }
    if levels > ladder.levels.len() {
        return Err(Error::InvalidArgument(format!("ladder has {} levels, {levels} requested", ladder.levels.len())));
    }
    let field = data.g.field().clone();
    let p = data.p as usize;
    let mut checks = Vec::new();
    let mut prev: Option<PuiseuxSeries> = None;
    for n in 1..=levels {
        let expected = merge(&ladder.levels[n - 1].root_valuations);
        let coeffs: Vec<PuiseuxSeries> = match &prev {
            None => data.c[1..=p].to_vec(),
            Some(y) => {
                let e = (data.p).pow((n - 1) as u32);
                let mut cs = vec![y.neg()];
                cs.extend(data.c[1..=p].iter().map(|c| c.pow(e)));
                cs
            }
        };
        let poly = CoefficientSeries::polynomial(&field, coeffs)?;
        let v = ladder.levels[n - 1].valuation.clone();
        let targets = [&v * int(2), &v * rat(3, 2), &v * rat(65, 64)];
        let mut last_err = None;
        let mut outcome = None;
        for target in targets {
            match puiseux_roots(&poly, &PuiseuxOptions::new(target.clone())) {
                Ok(roots) => {
                    outcome = Some((roots, target));
                    break;
                }
                Err(e) if e.is_precision() => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
        let Some((roots, target)) = outcome else {
            return Err(last_err.unwrap());
        };
        let oracle: Vec<(Rational, usize)> = valuation_multiset(&roots)?
            .into_iter()
            .map(|(v, k)| v.map(|v| (v, k)).ok_or_else(|| Error::Invariant("zero root in a torsion level".into())))
            .collect::<Result<_>>()?;
        if oracle != expected {
            return Err(Error::LadderMismatch {
                level: n,
                ladder: format_multiset(&expected),
                oracle: format_multiset(&oracle),
            });
        }
        let top = oracle.iter().map(|(v, _)| v).max().unwrap().clone();
        let chosen = roots.iter().find_map(|r| match r {
            PuiseuxRoot::Expanded { root, valuation: Valuation::Finite(v), .. } if *v == top => Some(root.clone()),
            _ => None,
        });
        // the next level needs an explicit coordinate; the last one does not
        if chosen.is_none() && n < levels {
            return Err(Error::NoResidueRoot(top));
        }
        checks.push(LevelCheck { n, ladder: expected, oracle, target, root: chosen.clone() });
        prev = chosen;
    }
    Ok(LadderVerification { levels: checks })
}

/// `1 / (p^(n-1) (p - 1))`, the level-`n` valuation when `m = 1`.
pub fn closed_form_m1(p: u64, n: usize) -> Rational {
    let den = num_bigint::BigInt::from(p).pow((n - 1) as u32) * num_bigint::BigInt::from(p - 1);
    Rational::new(num_bigint::BigInt::one(), den)
}

/// True when every level in the regime has `v_{n+1} = v_n / p`.
pub fn regime_holds(ladder: &ValuationLadder) -> bool {
    let p = int(ladder.p as i64);
    ladder.levels.windows(2).all(|w| !ladder.in_regime(w[1].n) || w[1].valuation == &w[0].valuation / &p)
        && ladder.levels.windows(2).all(|w| w[1].valuation < w[0].valuation && w[1].denominator % w[0].denominator == 0)
        && !ladder.levels.is_empty()
        && !ladder.levels[0].valuation.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FiniteField;
    use crate::formal_group::{ec_formal_group, WeierstrassModel};
    use std::sync::Arc;

    fn map(v: &[(usize, i64)]) -> BTreeMap<usize, Rational> {
        v.iter().map(|(i, x)| (*i, int(*x))).collect()
    }

    #[test]
    fn m_equals_one_p2() {
        let l = valuation_ladder(2, &map(&[(1, 1)]), 4).unwrap();
        assert_eq!(l.valuations(), vec![int(1), rat(1, 2), rat(1, 4), rat(1, 8)]);
        assert_eq!(l.n0, 1);
    }

    #[test]
    fn p3_interior_one_one() {
        let l = valuation_ladder(3, &map(&[(1, 1), (2, 1)]), 3).unwrap();
        assert_eq!(l.valuations(), vec![rat(1, 2), rat(1, 6), rat(1, 18)]);
        assert_eq!(l.n0, 1);
        assert!(regime_holds(&l));
    }

    #[test]
    fn p3_interior_three_two() {
        let l = valuation_ladder(3, &map(&[(1, 3), (2, 2)]), 4).unwrap();
        assert_eq!(l.valuations(), vec![rat(3, 2), rat(1, 2), rat(1, 6), rat(1, 18)]);
        assert_eq!(l.denominators(), vec![2, 2, 6, 18]);
        assert_eq!(l.n0, 2);
        assert!(regime_holds(&l));
    }

    #[test]
    fn n0_is_certified_beyond_n_max() {
        let l = valuation_ladder(3, &map(&[(1, 3), (2, 2)]), 1).unwrap();
        assert_eq!(l.levels.len(), 1);
        assert_eq!(l.n0, 2);
    }

    #[test]
    fn invalid_inputs() {
        assert!(valuation_ladder(2, &map(&[(1, 1)]), 0).is_err());
        assert!(valuation_ladder(4, &map(&[(1, 1)]), 2).is_err());
        assert!(valuation_ladder(3, &map(&[(2, 1)]), 2).is_err());
        assert!(valuation_ladder(3, &map(&[(1, 0)]), 2).is_err());
    }

    #[test]
    fn elliptic_curve_over_f2() {
        let f2 = Arc::new(FiniteField::prime(2).unwrap());
        let w = WeierstrassModel::parse(&f2, ["t", "0", "1", "0", "0"]).unwrap();
        let law = ec_formal_group(&w, 6).unwrap();
        let data = p_decomposition(&law).unwrap();
        assert_eq!(data.m, int(1));
        let ladder = valuation_ladder(2, &data.interior_valuations().unwrap(), 2).unwrap();
        let report = verify_ladder(&data, &ladder, 2).unwrap();
        assert_eq!(report.levels[0].oracle, vec![(int(1), 1)]);
        assert_eq!(report.levels[1].oracle, vec![(rat(1, 2), 2)]);
    }

    #[test]
    fn good_ordinary_reduction_is_reported() {
        let f2 = Arc::new(FiniteField::prime(2).unwrap());
        let w = WeierstrassModel::parse(&f2, ["1", "0", "0", "0", "t"]).unwrap();
        let law = ec_formal_group(&w, 6).unwrap();
        assert_eq!(p_decomposition(&law), Err(Error::GoodOrdinaryReduction(1)));
    }

    #[test]
    fn synthetic_p3_series() {
        let f3 = Arc::new(FiniteField::prime(3).unwrap());
        let coeff = |i: usize| match i {
            3 => PuiseuxSeries::t(&f3),
            9 => PuiseuxSeries::one(&f3),
            _ => PuiseuxSeries::zero(&f3),
        };
        let series = CoefficientSeries::polynomial(&f3, (0..10).map(coeff).collect()).unwrap();
        let data = from_p_series(3, &series).unwrap();
        assert_eq!(data.m, int(1));
        assert_eq!(data.interior[1], Valuation::Infinite);
        let ladder = valuation_ladder(3, &data.interior_valuations().unwrap(), 1).unwrap();
        let report = verify_ladder(&data, &ladder, 1).unwrap();
        assert_eq!(report.levels[0].oracle, vec![(rat(1, 2), 2)]);
    }

    #[test]
    fn corrupted_ladder_is_rejected() {
        let f3 = Arc::new(FiniteField::prime(3).unwrap());
        let coeff = |i: usize| match i {
            3 => PuiseuxSeries::t(&f3),
            9 => PuiseuxSeries::one(&f3),
            _ => PuiseuxSeries::zero(&f3),
        };
        let series = CoefficientSeries::polynomial(&f3, (0..10).map(coeff).collect()).unwrap();
        let data = from_p_series(3, &series).unwrap();
        let mut ladder = valuation_ladder(3, &map(&[(1, 1)]), 1).unwrap();
        ladder.levels[0].root_valuations = vec![(int(1), 2)];
        assert!(matches!(verify_ladder(&data, &ladder, 1), Err(Error::LadderMismatch { level: 1, .. })));
    }

    #[test]
    fn non_frobenius_series_rejected() {
        let f2 = Arc::new(FiniteField::prime(2).unwrap());
        let series = CoefficientSeries::polynomial(
            &f2,
            vec![PuiseuxSeries::zero(&f2), PuiseuxSeries::zero(&f2), PuiseuxSeries::t(&f2), PuiseuxSeries::one(&f2)],
        )
        .unwrap();
        assert_eq!(from_p_series(2, &series), Err(Error::NotFrobeniusSeries(3)));
    }
}
