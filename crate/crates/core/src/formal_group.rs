//! One-dimensional formal group laws over `F_q[[t]]`.
//!
//! Group laws are stored as bivariate series truncated in total degree:
//! coefficients of `x^i y^j` with `i + j ≥ X` are unknown. Laws attached to a
//! Weierstrass model are computed from the classical expansion in
//! `z = -x/y`, `w = -1/y`, with exact polynomial coefficients in `t` when the
//! model's coefficients are exact.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::field::FiniteField;
use crate::poly::CoefficientSeries;
use crate::rational::int;
use crate::series::{same_field, PuiseuxSeries, Valuation};
use crate::{Error, Result};

/// Truncated series in up to three variables; exponents `[i, j, k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiSeries {
    field: Arc<FiniteField>,
    terms: BTreeMap<[u32; 3], PuiseuxSeries>,
    /// Total-degree truncation: terms of degree `≥ prec` are unknown.
    prec: u32,
}

fn degree(e: &[u32; 3]) -> u32 {
    e[0] + e[1] + e[2]
}

impl MultiSeries {
    pub fn zero(field: &Arc<FiniteField>, prec: u32) -> Self {
        MultiSeries { field: field.clone(), terms: BTreeMap::new(), prec }
    }

    pub fn constant(field: &Arc<FiniteField>, c: PuiseuxSeries, prec: u32) -> Self {
        let mut s = Self::zero(field, prec);
        s.insert([0, 0, 0], c);
        s
    }

    /// The variable with index `var` (0, 1 or 2).
    pub fn var(field: &Arc<FiniteField>, var: usize, prec: u32) -> Self {
        let mut e = [0; 3];
        e[var] = 1;
        let mut s = Self::zero(field, prec);
        s.insert(e, PuiseuxSeries::one(field));
        s
    }

    fn insert(&mut self, e: [u32; 3], c: PuiseuxSeries) {
        if degree(&e) < self.prec && !c.is_exact_zero() {
            self.terms.insert(e, c);
        }
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn coefficient(&self, e: [u32; 3]) -> Option<PuiseuxSeries> {
        if degree(&e) >= self.prec {
            return None;
        }
        Some(self.terms.get(&e).cloned().unwrap_or_else(|| PuiseuxSeries::zero(&self.field)))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; 3], &PuiseuxSeries)> {
        self.terms.iter()
    }

    /// Least total degree of a term that is not an exact zero.
    pub fn order(&self) -> u32 {
        self.terms.keys().map(degree).min().unwrap_or(self.prec)
    }

    pub fn truncate(&self, prec: u32) -> Self {
        let prec = prec.min(self.prec);
        MultiSeries {
            field: self.field.clone(),
            terms: self.terms.iter().filter(|(e, _)| degree(e) < prec).map(|(e, c)| (*e, c.clone())).collect(),
            prec,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.prec.min(other.prec);
        let mut out = self.truncate(prec);
        for (e, c) in &other.terms {
            if degree(e) >= prec {
                continue;
            }
            let sum = match out.terms.get(e) {
                Some(a) => a + c,
                None => c.clone(),
            };
            if sum.is_exact_zero() {
                out.terms.remove(e);
            } else {
                out.terms.insert(*e, sum);
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        MultiSeries {
            field: self.field.clone(),
            terms: self.terms.iter().map(|(e, c)| (*e, c.neg())).collect(),
            prec: self.prec,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &PuiseuxSeries) -> Self {
        let mut out = Self::zero(&self.field, self.prec);
        for (e, c) in &self.terms {
            out.insert(*e, c * s);
        }
        out
    }

    /// Product; known below `min(X_a + ord(b), X_b + ord(a))`.
    pub fn mul(&self, other: &Self) -> Self {
        let prec = (self.prec + other.order()).min(other.prec + self.order());
        let mut acc: BTreeMap<[u32; 3], PuiseuxSeries> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            let da = degree(ea);
            for (eb, cb) in &other.terms {
                if da + degree(eb) >= prec {
                    continue;
                }
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
                let prod = ca * cb;
                match acc.get_mut(&e) {
                    Some(x) => *x = &*x + &prod,
                    None => {
                        acc.insert(e, prod);
                    }
                }
            }
        }
        acc.retain(|_, c| !c.is_exact_zero());
        MultiSeries { field: self.field.clone(), terms: acc, prec }
    }

    /// Powers `self^0 .. self^(n-1)`.
    fn powers(&self, n: usize) -> Vec<Self> {
        let one = Self::constant(&self.field, PuiseuxSeries::one(&self.field), self.prec);
        let mut out = vec![one];
        for k in 1..n {
            let next = out[k - 1].mul(self);
            out.push(next);
        }
        out
    }

    /// `Σ c_k self^k` for a univariate series `c` (variable index 0).
    pub fn compose_into(&self, outer: &MultiSeries) -> Self {
        let n = outer.prec as usize;
        let pows = self.powers(n);
        let mut acc = Self::zero(&self.field, self.prec.max(outer.prec * self.order().max(1)));
        for (e, c) in &outer.terms {
            acc = acc.add(&pows[e[0] as usize].scale(c));
        }
        acc.truncate(outer.prec * self.order().max(1))
    }
}

/// Integral Weierstrass coefficients over `F_q((t))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeierstrassModel {
    pub a1: PuiseuxSeries,
    pub a2: PuiseuxSeries,
    pub a3: PuiseuxSeries,
    pub a4: PuiseuxSeries,
    pub a6: PuiseuxSeries,
}

impl WeierstrassModel {
    pub fn new(a: [PuiseuxSeries; 5]) -> Result<Self> {
        let field = a[0].field().clone();
        for (name, c) in ["a1", "a2", "a3", "a4", "a6"].iter().zip(&a) {
            if !same_field(c.field(), &field) {
                return Err(Error::FieldMismatch);
            }
            if let Valuation::Finite(v) | Valuation::AtLeast(v) = c.valuation() {
                if v < int(0) {
                    return Err(Error::NotIntegral(format!("{name} has valuation {v}")));
                }
            }
        }
        let [a1, a2, a3, a4, a6] = a;
        Ok(WeierstrassModel { a1, a2, a3, a4, a6 })
    }

    /// Parses the five coefficients from series text.
    pub fn parse(field: &Arc<FiniteField>, a: [&str; 5]) -> Result<Self> {
        let parsed = a.map(|s| PuiseuxSeries::parse(field, s));
        let [a1, a2, a3, a4, a6] = parsed;
        Self::new([a1?, a2?, a3?, a4?, a6?])
    }

    pub fn field(&self) -> &Arc<FiniteField> {
        self.a1.field()
    }

    pub fn discriminant(&self) -> PuiseuxSeries {
        let f = self.field();
        let n = |k: i64| PuiseuxSeries::from_int(f, k);
        let (a1, a2, a3, a4, a6) = (&self.a1, &self.a2, &self.a3, &self.a4, &self.a6);
        let b2 = &(a1 * a1) + &(&n(4) * a2);
        let b4 = &(&n(2) * a4) + &(a1 * a3);
        let b6 = &(a3 * a3) + &(&n(4) * a6);
        let b8 =
            &(&(&(&(&(a1 * a1) * a6) + &(&(&n(4) * a2) * a6)) - &(&(a1 * a3) * a4)) + &(&(a2 * a3) * a3)) - &(a4 * a4);
        let t1 = &(&(&b2 * &b2) * &b8).neg() - &(&n(8) * &(&(&b4 * &b4) * &b4));
        let t2 = &(&n(27) * &(&b6 * &b6)).neg() + &(&n(9) * &(&(&b2 * &b4) * &b6));
        &t1 + &t2
    }
}

/// Total-degree cap for the associativity check at construction.
pub const ASSOCIATIVITY_CHECK_DEGREE: u32 = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalGroupLaw {
    field: Arc<FiniteField>,
    series: MultiSeries,
}

impl FormalGroupLaw {
    /// Validates identity, symmetry and (to a capped degree) associativity.
    pub fn new(series: MultiSeries) -> Result<Self> {
        let field = series.field.clone();
        let x = series.prec;
        if x < 2 {
            return Err(Error::InvalidArgument("group law truncation must be at least 2".into()));
        }
        let law = FormalGroupLaw { field, series };
        law.check_axioms()?;
        Ok(law)
    }

    /// `F(x, y) = x + y`.
    pub fn additive(field: &Arc<FiniteField>, prec: u32) -> Self {
        let s = MultiSeries::var(field, 0, prec).add(&MultiSeries::var(field, 1, prec));
        FormalGroupLaw { field: field.clone(), series: s }
    }

    /// `F(x, y) = x + y + xy`.
    pub fn multiplicative(field: &Arc<FiniteField>, prec: u32) -> Self {
        let x = MultiSeries::var(field, 0, prec);
        let y = MultiSeries::var(field, 1, prec);
        let s = x.add(&y).add(&x.mul(&y));
        FormalGroupLaw { field: field.clone(), series: s }
    }

    fn check_axioms(&self) -> Result<()> {
        let s = &self.series;
        let one = PuiseuxSeries::one(&self.field);
        for (e, c) in s.terms() {
            let axis = e[1] == 0 || e[0] == 0;
            let linear = degree(e) == 1;
            if e[2] != 0 || (axis && !(linear && *c == one)) {
                return Err(Error::Invariant(format!("F(x,0) = x or F(0,y) = y fails at {e:?}")));
            }
            let swapped = s.coefficient([e[1], e[0], 0]).unwrap();
            if !swapped.agrees_with(c) {
                return Err(Error::Invariant(format!("F is not symmetric at {e:?}")));
            }
        }
        for k in 0..2 {
            let mut e = [0; 3];
            e[k] = 1;
            if s.coefficient(e).unwrap() != one {
                return Err(Error::Invariant("linear term is not x + y".into()));
            }
        }
        let cap = s.prec.min(ASSOCIATIVITY_CHECK_DEGREE);
        let f = s.truncate(cap);
        let v = |i| MultiSeries::var(&self.field, i, cap);
        let left = apply(&f, &apply(&f, &v(0), &v(1)), &v(2));
        let right = apply(&f, &v(0), &apply(&f, &v(1), &v(2)));
        let prec = left.prec.min(right.prec);
        let keys: std::collections::BTreeSet<[u32; 3]> =
            left.terms().chain(right.terms()).map(|(e, _)| *e).filter(|e| degree(e) < prec).collect();
        for e in keys {
            if !left.coefficient(e).unwrap().agrees_with(&right.coefficient(e).unwrap()) {
                return Err(Error::Invariant(format!("associativity fails at {e:?}")));
            }
        }
        Ok(())
    }

    pub fn field(&self) -> &Arc<FiniteField> {
        &self.field
    }

    pub fn characteristic(&self) -> u64 {
        self.field.characteristic()
    }

    /// Total-degree truncation `X`.
    pub fn precision(&self) -> u32 {
        self.series.prec
    }

    pub fn series(&self) -> &MultiSeries {
        &self.series
    }

    /// Coefficient of `x^i y^j`.
    pub fn coefficient(&self, i: u32, j: u32) -> Option<PuiseuxSeries> {
        self.series.coefficient([i, j, 0])
    }
}

/// `F(a, b)` for multivariate arguments of positive order.
fn apply(f: &MultiSeries, a: &MultiSeries, b: &MultiSeries) -> MultiSeries {
    let n = f.prec as usize;
    let pa = a.powers(n);
    let pb = b.powers(n);
    let ord = a.order().min(b.order()).max(1);
    let prec = (f.prec * ord).min(a.prec).min(b.prec);
    let mut acc = MultiSeries::zero(&f.field, prec);
    for (e, c) in f.terms() {
        let term = pa[e[0] as usize].mul(&pb[e[1] as usize]).scale(c);
        acc = acc.add(&term);
    }
    acc.truncate(prec)
}

/// Formal group of a Weierstrass model, to total degree `X` (exclusive).
///
/// A model with exactly vanishing discriminant is accepted: its group law
/// is that of the smooth locus. An undeterminable discriminant is an error.
pub fn ec_formal_group(w: &WeierstrassModel, x: u32) -> Result<FormalGroupLaw> {
    if x < 4 {
        return Err(Error::InvalidArgument("truncation X must be at least 4".into()));
    }
    if let Valuation::AtLeast(t) = w.discriminant().valuation() {
        return Err(Error::InsufficientPrecision(format!("discriminant is zero at precision {t}; cannot certify it")));
    }
    let f = w.field().clone();
    let (a1, a2, a3, a4, a6) = (&w.a1, &w.a2, &w.a3, &w.a4, &w.a6);

    // w(z) = z^3 + a1 z w + a2 z^2 w + a3 w^2 + a4 z w^2 + a6 w^3
    let dw = x + 1;
    let z = MultiSeries::var(&f, 0, dw);
    let z2 = z.mul(&z);
    let z3 = z2.mul(&z);
    let mut ws = MultiSeries::zero(&f, dw);
    for _ in 0..dw {
        let w2 = ws.mul(&ws);
        let w3 = w2.mul(&ws);
        let next = z3
            .add(&z.mul(&ws).scale(a1))
            .add(&z2.mul(&ws).scale(a2))
            .add(&w2.scale(a3))
            .add(&z.mul(&w2).scale(a4))
            .add(&w3.scale(a6));
        let done = next == ws;
        ws = next.truncate(dw);
        if done {
            break;
        }
    }
    let a_n = |n: u32| ws.coefficient([n, 0, 0]).unwrap();

    // λ = (w(z2) - w(z1)) / (z2 - z1), ν = w(z1) - λ z1
    let mut lambda = MultiSeries::zero(&f, x);
    let mut w1 = MultiSeries::zero(&f, x);
    for n in 3..=x {
        let c = a_n(n);
        if c.is_exact_zero() {
            continue;
        }
        for a in 0..n {
            lambda.insert([a, n - 1 - a, 0], c.clone());
        }
        w1.insert([n, 0, 0], c);
    }
    let z1 = MultiSeries::var(&f, 0, x);
    let z2v = MultiSeries::var(&f, 1, x);
    let nu = w1.sub(&lambda.mul(&z1));

    let n = |k: i64| PuiseuxSeries::from_int(&f, k);
    let l2 = lambda.mul(&lambda);
    let l3 = l2.mul(&lambda);
    let numer = lambda
        .scale(a1)
        .add(&nu.scale(a2))
        .add(&l2.scale(a3))
        .add(&lambda.mul(&nu).scale(&(&n(2) * a4)))
        .add(&l2.mul(&nu).scale(&(&n(3) * a6)));
    let e = lambda.scale(a2).add(&l2.scale(a4)).add(&l3.scale(a6));
    // 1 / (1 + e), e of order ≥ 2
    let mut inv = MultiSeries::constant(&f, PuiseuxSeries::one(&f), x);
    let mut pow = inv.clone();
    let neg_e = e.neg();
    for _ in 0..x {
        pow = pow.mul(&neg_e);
        if pow.terms.is_empty() {
            break;
        }
        inv = inv.add(&pow);
    }
    let z3 = z1.add(&z2v).add(&numer.mul(&inv)).neg().truncate(x);

    // inverse map i(z) = -z / (1 - a1 z - a3 w(z))
    let zu = MultiSeries::var(&f, 0, x);
    let wu = ws.truncate(x);
    let d = zu.scale(a1).add(&wu.scale(a3));
    let mut dinv = MultiSeries::constant(&f, PuiseuxSeries::one(&f), x);
    let mut pw = dinv.clone();
    for _ in 0..x {
        pw = pw.mul(&d);
        if pw.terms.is_empty() {
            break;
        }
        dinv = dinv.add(&pw);
    }
    let iota = zu.mul(&dinv).neg();
    let law = z3.compose_into(&iota).truncate(x);
    FormalGroupLaw::new(law)
}

fn order_of(s: &CoefficientSeries) -> Option<usize> {
    s.order_lower_bound()
}

/// `F(f, g)` for univariate series of positive order.
pub fn formal_sum(law: &FormalGroupLaw, f: &CoefficientSeries, g: &CoefficientSeries) -> Result<CoefficientSeries> {
    let (of, og) = (order_of(f), order_of(g));
    if of == Some(0) || og == Some(0) {
        return Err(Error::NonPositiveOrder);
    }
    match (of, og) {
        (None, _) => return Ok(g.clone()),
        (_, None) => return Ok(f.clone()),
        _ => {}
    }
    let ord = of.unwrap().min(og.unwrap());
    let cap = law.precision() as usize * ord;
    let n = law.precision() as usize;
    let field = law.field();
    let mut pf = vec![CoefficientSeries::x_power(field, 0)];
    let mut pg = vec![CoefficientSeries::x_power(field, 0)];
    for k in 1..n {
        pf.push(pf[k - 1].mul(f)?.truncate_x(cap));
        pg.push(pg[k - 1].mul(g)?.truncate_x(cap));
    }
    let mut acc = CoefficientSeries::zero(field).truncate_x(cap);
    for (e, c) in law.series.terms() {
        let term = pf[e[0] as usize].mul(&pg[e[1] as usize])?.scale(c)?;
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// `[m](x)` by doubling.
pub fn mult_by_int(law: &FormalGroupLaw, m: u64) -> Result<CoefficientSeries> {
    let field = law.field();
    let x = CoefficientSeries::x_power(field, 1);
    let mut acc = CoefficientSeries::zero(field);
    for bit in (0..64).rev() {
        if !acc.is_exact_zero() {
            acc = formal_sum(law, &acc, &acc)?;
        }
        if (m >> bit) & 1 == 1 {
            acc = formal_sum(law, &acc, &x)?;
        }
    }
    if m == 0 {
        return Ok(CoefficientSeries::zero(field).truncate_x(law.precision() as usize));
    }
    Ok(acc)
}

/// Formal inverse `ι` with `F(x, ι(x)) = 0`.
pub fn formal_inverse(law: &FormalGroupLaw) -> Result<CoefficientSeries> {
    let field = law.field();
    let x = CoefficientSeries::x_power(field, 1);
    let mut iota = x.neg().truncate_x(law.precision() as usize);
    for _ in 0..law.precision() {
        let s = formal_sum(law, &x, &iota)?;
        let next = iota.sub(&s)?;
        if next == iota {
            break;
        }
        iota = next;
    }
    Ok(iota)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64) -> Arc<FiniteField> {
        Arc::new(FiniteField::prime(p).unwrap())
    }

    fn s(field: &Arc<FiniteField>, t: &str) -> PuiseuxSeries {
        PuiseuxSeries::parse(field, t).unwrap()
    }

    fn curve_f2() -> WeierstrassModel {
        WeierstrassModel::parse(&f(2), ["t", "0", "1", "0", "0"]).unwrap()
    }

    #[test]
    fn identity_and_first_terms() {
        let law = ec_formal_group(&curve_f2(), 6).unwrap();
        let f2 = law.field().clone();
        assert_eq!(law.coefficient(1, 0), Some(PuiseuxSeries::one(&f2)));
        assert_eq!(law.coefficient(5, 0), Some(PuiseuxSeries::zero(&f2)));
        // -a1 = t in characteristic 2
        assert_eq!(law.coefficient(1, 1), Some(s(&f2, "t")));
        assert_eq!(law.coefficient(6, 0), None);
    }

    #[test]
    fn cusp_is_additive_to_low_order() {
        let f5 = f(5);
        let w = WeierstrassModel::parse(&f5, ["0", "0", "0", "0", "0"]).unwrap();
        assert!(w.discriminant().is_exact_zero());
        let law = ec_formal_group(&w, 6).unwrap();
        assert_eq!(law.series(), FormalGroupLaw::additive(&f5, 6).series());
    }

    #[test]
    fn doubling_on_the_f2_curve() {
        let law = ec_formal_group(&curve_f2(), 6).unwrap();
        let two = mult_by_int(&law, 2).unwrap();
        let f2 = law.field().clone();
        assert!(two.coeff(1).unwrap().is_exact_zero());
        assert_eq!(two.coeff(2).unwrap(), s(&f2, "t"));
        for i in [1, 3, 5] {
            assert!(two.coeff(i).unwrap().is_exact_zero());
        }
    }

    #[test]
    fn multiplicative_law_p_series() {
        let f3 = f(3);
        let law = FormalGroupLaw::multiplicative(&f3, 12);
        let three = mult_by_int(&law, 3).unwrap();
        assert!(three.agrees_with(&CoefficientSeries::x_power(&f3, 3)));
    }

    #[test]
    fn sums_and_inverses() {
        let f2 = f(2);
        let add = FormalGroupLaw::additive(&f2, 8);
        let x2 = CoefficientSeries::x_power(&f2, 2);
        let x3 = CoefficientSeries::x_power(&f2, 3);
        let sum = formal_sum(&add, &x2, &x3).unwrap();
        assert!(sum.agrees_with(&x2.add(&x3).unwrap()));
        let law = ec_formal_group(&curve_f2(), 7).unwrap();
        let iota = formal_inverse(&law).unwrap();
        let x = CoefficientSeries::x_power(&f2, 1);
        let zero = formal_sum(&law, &x, &iota).unwrap();
        assert!(zero.agrees_with(&CoefficientSeries::zero(&f2)));
        assert!(formal_sum(&law, &x2, &CoefficientSeries::zero(&f2)).unwrap().agrees_with(&x2));
    }

    #[test]
    fn rejects_non_integral_and_bad_args() {
        let f2 = f(2);
        assert!(matches!(WeierstrassModel::parse(&f2, ["t^-1", "0", "1", "0", "0"]), Err(Error::NotIntegral(_))));
        assert!(ec_formal_group(&curve_f2(), 3).is_err());
        let law = FormalGroupLaw::additive(&f2, 6);
        let one = CoefficientSeries::x_power(&f2, 0);
        assert_eq!(formal_sum(&law, &one, &one), Err(Error::NonPositiveOrder));
    }
}
