//! Truncated Puiseux series over `F_q`.
//!
//! A [`PuiseuxSeries`] stores exponents as integers over a per-value
//! ramification index `N` (the integer `e` stands for `t^(e/N)`), together
//! with its own truncation: coefficients at exponents `≥ T` are unknown.
//! `N = 1` is an ordinary Laurent series in `F_q((t))`.
//!
//! Exact values (polynomials, monomials, the literal zero) carry no
//! truncation. A series whose known part is empty but which has a finite
//! truncation is "zero at precision `T`", which is a different state from the
//! exact zero: its valuation is reported as [`Valuation::AtLeast`].

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::field::{FiniteField, Fq};
use crate::rational::{int, lcm_u64, parse_rational, Rational};
use crate::{Error, Result};

/// Valuation of a possibly truncated value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Valuation {
    /// Determined exactly.
    Finite(Rational),
    /// Zero at the available precision: the valuation is at least this bound.
    AtLeast(Rational),
    /// Exact zero.
    Infinite,
}

impl Valuation {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Valuation::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Best known lower bound (`None` for the exact zero).
    pub fn lower_bound(&self) -> Option<&Rational> {
        match self {
            Valuation::Finite(v) | Valuation::AtLeast(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_determined(&self) -> bool {
        !matches!(self, Valuation::AtLeast(_))
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, ">={v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PuiseuxSeries {
    field: Arc<FiniteField>,
    ram: u64,
    /// Ascending exponents (units of `1/ram`), nonzero coefficients, all `< trunc`.
    terms: Vec<(i64, Fq)>,
    trunc: Option<i64>,
}

impl PartialEq for PuiseuxSeries {
    fn eq(&self, other: &Self) -> bool {
        self.ram == other.ram
            && self.trunc == other.trunc
            && self.terms == other.terms
            && same_field(&self.field, &other.field)
    }
}

impl Eq for PuiseuxSeries {}

pub(crate) fn same_field(a: &Arc<FiniteField>, b: &Arc<FiniteField>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl PuiseuxSeries {
    pub fn zero(field: &Arc<FiniteField>) -> Self {
        PuiseuxSeries { field: field.clone(), ram: 1, terms: Vec::new(), trunc: None }
    }

    pub fn one(field: &Arc<FiniteField>) -> Self {
        Self::constant(field, Fq::ONE)
    }

    pub fn constant(field: &Arc<FiniteField>, c: Fq) -> Self {
        Self::from_terms(field, 1, vec![(0, c)], None)
    }

    pub fn from_int(field: &Arc<FiniteField>, n: i64) -> Self {
        Self::constant(field, field.from_int(n))
    }

    /// The uniformizer `t`.
    pub fn t(field: &Arc<FiniteField>) -> Self {
        Self::from_terms(field, 1, vec![(1, Fq::ONE)], None)
    }

    /// Exact monomial `c·t^exp`.
    pub fn monomial(field: &Arc<FiniteField>, c: Fq, exp: &Rational) -> Self {
        let ram = exp.denom().try_into().expect("ramification fits u64");
        let e: i64 = exp.numer().try_into().expect("exponent fits i64");
        Self::from_terms(field, ram, vec![(e, c)], None)
    }

    /// Zero known only below `t^precision`.
    pub fn zero_at(field: &Arc<FiniteField>, precision: &Rational) -> Self {
        Self::zero(field).truncate(precision)
    }

    /// Builds a series from `(e, c)` pairs meaning `c·t^(e/ram)`. Repeated
    /// exponents are summed; coefficients at or beyond `trunc` are dropped.
    pub fn from_terms(
        field: &Arc<FiniteField>,
        ram: u64,
        terms: impl IntoIterator<Item = (i64, Fq)>,
        trunc: Option<i64>,
    ) -> Self {
        assert!(ram >= 1, "ramification index must be positive");
        let mut v: Vec<(i64, Fq)> =
            terms.into_iter().filter(|(e, c)| !c.is_zero() && trunc.is_none_or(|t| *e < t)).collect();
        v.sort_by_key(|(e, _)| *e);
        let mut merged: Vec<(i64, Fq)> = Vec::with_capacity(v.len());
        for (e, c) in v {
            match merged.last_mut() {
                Some((le, lc)) if *le == e => *lc = field.add(*lc, c),
                _ => merged.push((e, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        let mut s = PuiseuxSeries { field: field.clone(), ram, terms: merged, trunc };
        s.normalize();
        s
    }

    /// Integer-coefficient terms at rational exponents, with an optional
    /// truncation order.
    pub fn from_rational_terms(
        field: &Arc<FiniteField>,
        terms: &[(Rational, i64)],
        precision: Option<&Rational>,
    ) -> Self {
        let mut ram = 1u64;
        for (e, _) in terms {
            ram = lcm_u64(ram, e.denom().try_into().expect("denominator fits"));
        }
        if let Some(t) = precision {
            ram = lcm_u64(ram, t.denom().try_into().expect("denominator fits"));
        }
        let to_units = |r: &Rational| -> i64 {
            let s = r * Rational::from_integer(BigInt::from(ram));
            s.numer().try_into().expect("exponent fits i64")
        };
        let items: Vec<(i64, Fq)> = terms.iter().map(|(e, c)| (to_units(e), field.from_int(*c))).collect();
        Self::from_terms(field, ram, items, precision.map(to_units))
    }

    fn normalize(&mut self) {
        let mut g = self.ram as i64;
        for (e, _) in &self.terms {
            g = g.gcd(e);
            if g == 1 {
                return;
            }
        }
        if let Some(t) = self.trunc {
            g = g.gcd(&t);
        }
        if g > 1 {
            self.ram /= g as u64;
            for (e, _) in self.terms.iter_mut() {
                *e /= g;
            }
            if let Some(t) = self.trunc.as_mut() {
                *t /= g;
            }
        }
    }

    fn rescaled(&self, ram: u64) -> (Vec<(i64, Fq)>, Option<i64>) {
        debug_assert_eq!(ram % self.ram, 0);
        let k = (ram / self.ram) as i64;
        (self.terms.iter().map(|(e, c)| (e * k, *c)).collect(), self.trunc.map(|t| t * k))
    }

    pub fn field(&self) -> &Arc<FiniteField> {
        &self.field
    }

    pub fn characteristic(&self) -> u64 {
        self.field.characteristic()
    }

    /// Ramification index `N`.
    pub fn ramification(&self) -> u64 {
        self.ram
    }

    /// Truncation order `T`, or `None` for an exact value.
    pub fn precision(&self) -> Option<Rational> {
        self.trunc.map(|t| Rational::new(t.into(), self.ram.into()))
    }

    pub fn is_exact(&self) -> bool {
        self.trunc.is_none()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.trunc.is_none() && self.terms.is_empty()
    }

    /// Known nonzero terms as `(exponent, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (Rational, Fq)> + '_ {
        self.terms.iter().map(|(e, c)| (Rational::new((*e).into(), self.ram.into()), *c))
    }

    /// Raw terms in units of `1/N`.
    pub fn raw_terms(&self) -> &[(i64, Fq)] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn valuation(&self) -> Valuation {
        match (self.terms.first(), self.trunc) {
            (Some((e, _)), _) => Valuation::Finite(Rational::new((*e).into(), self.ram.into())),
            (None, Some(t)) => Valuation::AtLeast(Rational::new(t.into(), self.ram.into())),
            (None, None) => Valuation::Infinite,
        }
    }

    /// Leading coefficient and exponent, when determinable.
    pub fn leading_term(&self) -> Option<(Rational, Fq)> {
        self.terms.first().map(|(e, c)| (Rational::new((*e).into(), self.ram.into()), *c))
    }

    /// Coefficient of `t^exp`; `None` when it lies beyond the truncation.
    pub fn coefficient(&self, exp: &Rational) -> Option<Fq> {
        if let Some(t) = self.precision() {
            if *exp >= t {
                return None;
            }
        }
        let scaled = exp * Rational::from_integer(self.ram.into());
        if !scaled.is_integer() {
            return Some(Fq::ZERO);
        }
        let e: i64 = scaled.numer().try_into().ok()?;
        Some(self.terms.binary_search_by_key(&e, |(x, _)| *x).map(|i| self.terms[i].1).unwrap_or(Fq::ZERO))
    }

    fn check_field(&self, other: &Self) -> Result<()> {
        if same_field(&self.field, &other.field) {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    /// Lowers the truncation to `t^precision` (never raises it).
    pub fn truncate(&self, precision: &Rational) -> Self {
        let den: u64 = precision.denom().try_into().expect("denominator fits");
        let ram = lcm_u64(self.ram, den);
        let (terms, trunc) = self.rescaled(ram);
        let p = precision * Rational::from_integer(ram.into());
        let p: i64 = p.numer().try_into().expect("precision fits i64");
        Self::from_terms(&self.field, ram, terms, min_opt(trunc, Some(p)))
    }

    /// Truncates only exact values that are not monomials, so that they can
    /// be inverted; exact zeros and monomials stay exact.
    pub fn bounded(&self, precision: &Rational) -> Self {
        if self.is_exact() && self.terms.len() > 1 {
            self.truncate(precision)
        } else {
            self.clone()
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        Ok(self.add_unchecked(other))
    }

    fn add_unchecked(&self, other: &Self) -> Self {
        let ram = lcm_u64(self.ram, other.ram);
        let (mut a, ta) = self.rescaled(ram);
        let (b, tb) = other.rescaled(ram);
        a.extend(b);
        Self::from_terms(&self.field, ram, a, min_opt(ta, tb))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        if self.is_exact_zero() || other.is_exact_zero() {
            return Self::zero(&self.field);
        }
        let ram = lcm_u64(self.ram, other.ram);
        let (a, ta) = self.rescaled(ram);
        let (b, tb) = other.rescaled(ram);
        // valuation lower bounds: the leading exponent, or the truncation of
        // a zero-at-precision operand
        let va = a.first().map(|x| x.0).or(ta).unwrap();
        let vb = b.first().map(|x| x.0).or(tb).unwrap();
        let trunc = min_opt(ta.map(|t| t + vb), tb.map(|t| t + va));
        if a.is_empty() || b.is_empty() {
            return PuiseuxSeries { field: self.field.clone(), ram, terms: Vec::new(), trunc }.renormalized();
        }
        let lo = va + vb;
        let hi_exact = a.last().unwrap().0 + b.last().unwrap().0 + 1;
        let hi = trunc.map_or(hi_exact, |t| t.min(hi_exact));
        if hi <= lo {
            return PuiseuxSeries { field: self.field.clone(), ram, terms: Vec::new(), trunc }.renormalized();
        }
        let f = &self.field;
        let span = (hi - lo) as usize;
        let terms = if span <= 1 << 20 {
            let mut acc = vec![Fq::ZERO; span];
            for &(ea, ca) in &a {
                if ea + vb >= hi {
                    break;
                }
                for &(eb, cb) in &b {
                    let e = ea + eb;
                    if e >= hi {
                        break;
                    }
                    let slot = &mut acc[(e - lo) as usize];
                    *slot = f.add(*slot, f.mul(ca, cb));
                }
            }
            acc.into_iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (lo + i as i64, c))
                .collect::<Vec<_>>()
        } else {
            let mut pairs = Vec::new();
            for &(ea, ca) in &a {
                for &(eb, cb) in &b {
                    if ea + eb < hi {
                        pairs.push((ea + eb, f.mul(ca, cb)));
                    }
                }
            }
            pairs
        };
        Self::from_terms(&self.field, ram, terms, trunc)
    }

    fn renormalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn neg(&self) -> Self {
        PuiseuxSeries {
            field: self.field.clone(),
            ram: self.ram,
            terms: self.terms.iter().map(|(e, c)| (*e, self.field.neg(*c))).collect(),
            trunc: self.trunc,
        }
    }

    pub fn scale(&self, c: Fq) -> Self {
        let f = &self.field;
        Self::from_terms(f, self.ram, self.terms.iter().map(|(e, x)| (*e, f.mul(*x, c))), self.trunc)
    }

    /// Multiplies by the exact monomial `t^exp`.
    pub fn shift(&self, exp: &Rational) -> Self {
        let den: u64 = exp.denom().try_into().expect("denominator fits");
        let ram = lcm_u64(self.ram, den);
        let (terms, trunc) = self.rescaled(ram);
        let k: i64 = (exp * Rational::from_integer(ram.into())).numer().try_into().expect("exponent fits");
        Self::from_terms(&self.field, ram, terms.into_iter().map(|(e, c)| (e + k, c)), trunc.map(|t| t + k))
    }

    /// `a^p`: coefficients through Frobenius, exponents and truncation scaled
    /// by `p`. Exact in characteristic `p`, so precision is not lost.
    pub fn frobenius(&self) -> Self {
        let f = &self.field;
        let p = f.characteristic() as i64;
        Self::from_terms(
            f,
            self.ram,
            self.terms.iter().map(|(e, c)| (e * p, f.frobenius(*c))),
            self.trunc.map(|t| t * p),
        )
    }

    /// `a^k`, splitting off the `p`-power part of `k` as iterated Frobenius.
    pub fn pow(&self, mut k: u64) -> Self {
        let p = self.field.characteristic();
        let mut base = self.clone();
        while k > 0 && k.is_multiple_of(p) {
            base = base.frobenius();
            k /= p;
        }
        let mut acc = Self::one(&self.field);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Multiplicative inverse, exact below the strongest guaranteed order.
    ///
    /// If `a = c·t^v·(1 + b)` is known below `T`, the inverse is known below
    /// `T - 2v`. Exact monomials invert exactly; exact non-monomials must be
    /// truncated first.
    pub fn invert(&self) -> Result<Self> {
        let Some(&(e0, c0)) = self.terms.first() else {
            return match self.trunc {
                Some(_) => Err(Error::ZeroAtPrecision(self.precision().unwrap())),
                None => Err(Error::InvalidArgument("inverse of exact zero".into())),
            };
        };
        let f = &self.field;
        let c0_inv = f.inv(c0).expect("leading coefficient is nonzero");
        let Some(trunc) = self.trunc else {
            if self.terms.len() == 1 {
                return Ok(Self::from_terms(f, self.ram, vec![(-e0, c0_inv)], None));
            }
            return Err(Error::UnboundedInverse(self.to_string()));
        };
        let rel = (trunc - e0) as usize;
        // b_k for the normalized unit 1 + b
        let b: Vec<(usize, Fq)> = self.terms[1..].iter().map(|(e, c)| ((e - e0) as usize, f.mul(*c, c0_inv))).collect();
        let mut s = vec![Fq::ZERO; rel];
        s[0] = Fq::ONE;
        for k in 1..rel {
            let mut acc = Fq::ZERO;
            for &(j, bj) in &b {
                if j > k {
                    break;
                }
                acc = f.add(acc, f.mul(bj, s[k - j]));
            }
            s[k] = f.neg(acc);
        }
        let terms = s.into_iter().enumerate().map(|(k, c)| (k as i64 - e0, f.mul(c, c0_inv)));
        Ok(Self::from_terms(f, self.ram, terms, Some(trunc - 2 * e0)))
    }

    /// The unique `p`-th root: coefficients pass through the inverse
    /// Frobenius of `F_q` and exponents are divided by `p`.
    pub fn pth_root(&self) -> Self {
        let f = &self.field;
        let p = f.characteristic();
        Self::from_terms(f, self.ram * p, self.terms.iter().map(|(e, c)| (*e, f.frobenius_inverse(*c))), self.trunc)
    }

    /// Whether two values agree on every coefficient both of them know.
    pub fn agrees_with(&self, other: &Self) -> bool {
        if !same_field(&self.field, &other.field) {
            return false;
        }
        let ram = lcm_u64(self.ram, other.ram);
        let (a, ta) = self.rescaled(ram);
        let (b, tb) = other.rescaled(ram);
        let t = min_opt(ta, tb);
        let cut =
            |v: Vec<(i64, Fq)>| -> Vec<(i64, Fq)> { v.into_iter().filter(|(e, _)| t.is_none_or(|t| *e < t)).collect() };
        cut(a) == cut(b)
    }

    /// Parses text such as `"1 + t^2 + 2*t^(3/2) + O(t^10)"`.
    ///
    /// A term is a signed product of factors: integers, `t`, `t^e` with a
    /// rational `e`, `u`, `u^k` and parenthesised sums of `u`-monomials for
    /// extension-field coefficients. `O(t^T)` sets the truncation.
    pub fn parse(field: &Arc<FiniteField>, text: &str) -> Result<Self> {
        parse::parse_series(field, text)
    }
}

impl<'a> std::ops::Add<&'a PuiseuxSeries> for &'a PuiseuxSeries {
    type Output = PuiseuxSeries;
    /// Panics on mismatched fields; see [`PuiseuxSeries::checked_add`].
    fn add(self, rhs: &'a PuiseuxSeries) -> PuiseuxSeries {
        self.checked_add(rhs).expect("series over different fields")
    }
}

impl<'a> std::ops::Sub<&'a PuiseuxSeries> for &'a PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn sub(self, rhs: &'a PuiseuxSeries) -> PuiseuxSeries {
        self.checked_add(&rhs.neg()).expect("series over different fields")
    }
}

impl<'a> std::ops::Mul<&'a PuiseuxSeries> for &'a PuiseuxSeries {
    type Output = PuiseuxSeries;
    /// Panics on mismatched fields; see [`PuiseuxSeries::checked_mul`].
    fn mul(self, rhs: &'a PuiseuxSeries) -> PuiseuxSeries {
        self.checked_mul(rhs).expect("series over different fields")
    }
}

impl std::ops::Neg for &PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn neg(self) -> PuiseuxSeries {
        PuiseuxSeries::neg(self)
    }
}

fn fmt_exponent(e: &Rational) -> String {
    if e.is_integer() && !e.is_negative() {
        e.to_string()
    } else {
        format!("({e})")
    }
}

impl fmt::Display for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (e, c) in self.terms() {
            let coef = self.field.format(c);
            let mono = if e.is_zero() {
                String::new()
            } else if e.is_one() {
                "t".to_string()
            } else {
                format!("t^{}", fmt_exponent(&e))
            };
            parts.push(match (mono.is_empty(), coef.as_str()) {
                (true, _) => coef,
                (false, "1") => mono,
                (false, _) => format!("{coef}*{mono}"),
            });
        }
        if let Some(t) = self.precision() {
            parts.push(format!("O(t^{})", fmt_exponent(&t)));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.partial_cmp(b),
            (Valuation::Infinite, Valuation::Infinite) => Some(Ordering::Equal),
            (Valuation::Infinite, Valuation::Finite(_)) => Some(Ordering::Greater),
            (Valuation::Finite(_), Valuation::Infinite) => Some(Ordering::Less),
            _ => None,
        }
    }
}

mod parse {
    use super::*;

    pub(super) fn parse_series(field: &Arc<FiniteField>, text: &str) -> Result<PuiseuxSeries> {
        let bad = |msg: &str| Error::InvalidArgument(format!("cannot parse series {text:?}: {msg}"));
        let src: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if src.is_empty() {
            return Err(bad("empty"));
        }
        // split into signed terms at top-level + and -
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut depth = 0i32;
        let mut cur = String::new();
        let mut neg = false;
        let chars: Vec<char> = src.chars().collect();
        for (i, &ch) in chars.iter().enumerate() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                _ => {}
            }
            let prev = if i > 0 { chars[i - 1] } else { '+' };
            if depth == 0 && (ch == '+' || ch == '-') && prev != '^' && prev != '/' {
                if !cur.is_empty() {
                    terms.push((neg, std::mem::take(&mut cur)));
                } else if i > 0 && ch == '+' {
                    return Err(bad("dangling sign"));
                }
                neg = ch == '-';
                continue;
            }
            cur.push(ch);
        }
        if depth != 0 {
            return Err(bad("unbalanced parentheses"));
        }
        if cur.is_empty() {
            return Err(bad("dangling sign"));
        }
        terms.push((neg, cur));

        let mut precision: Option<Rational> = None;
        let mut acc = PuiseuxSeries::zero(field);
        for (neg, term) in terms {
            if let Some(inner) = term.strip_prefix("O(").and_then(|r| r.strip_suffix(')')) {
                let e = parse_t_power(inner).ok_or_else(|| bad("bad O-term"))?;
                precision = Some(match precision {
                    Some(p) if p < e => p,
                    _ => e,
                });
                continue;
            }
            let mut coef = field.one();
            let mut exp = Rational::zero();
            for factor in split_factors(&term) {
                if let Some(e) = parse_t_power(&factor) {
                    exp += e;
                } else {
                    let c = parse_coefficient(field, &factor).ok_or_else(|| bad(&factor))?;
                    coef = field.mul(coef, c);
                }
            }
            if neg {
                coef = field.neg(coef);
            }
            acc = &acc + &PuiseuxSeries::monomial(field, coef, &exp);
        }
        Ok(match precision {
            Some(p) => acc.truncate(&p),
            None => acc,
        })
    }

    fn split_factors(term: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut depth = 0;
        let mut cur = String::new();
        for ch in term.chars() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                _ => {}
            }
            if ch == '*' && depth == 0 {
                out.push(std::mem::take(&mut cur));
            } else {
                cur.push(ch);
            }
        }
        out.push(cur);
        out
    }

    /// `t`, `t^3`, `t^(3/2)`, `t^-1` → exponent.
    fn parse_t_power(s: &str) -> Option<Rational> {
        let rest = s.strip_prefix('t')?;
        if rest.is_empty() {
            return Some(int(1));
        }
        let e = rest.strip_prefix('^')?;
        let e = e.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(e);
        parse_rational(e).ok()
    }

    fn parse_coefficient(field: &Arc<FiniteField>, s: &str) -> Option<Fq> {
        if let Ok(n) = s.parse::<i64>() {
            return Some(field.from_int(n));
        }
        let body = s.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(s);
        // sum of u-monomials
        let mut total = field.zero();
        let mut cur = String::new();
        let mut sign = false;
        let flush = |cur: &str, sign: bool, total: &mut Fq| -> Option<()> {
            if cur.is_empty() {
                return None;
            }
            let mut c = field.one();
            for f in cur.split('*') {
                if let Ok(n) = f.parse::<i64>() {
                    c = field.mul(c, field.from_int(n));
                } else {
                    let r = f.strip_prefix('u')?;
                    let k: u64 = if r.is_empty() { 1 } else { r.strip_prefix('^')?.parse().ok()? };
                    let u = if field.degree() == 1 {
                        return None;
                    } else {
                        field.from_coords(&[0, 1]).ok()?
                    };
                    c = field.mul(c, field.pow(u, k));
                }
            }
            if sign {
                c = field.neg(c);
            }
            *total = field.add(*total, c);
            Some(())
        };
        for ch in body.chars() {
            if ch == '+' || ch == '-' {
                if !cur.is_empty() {
                    flush(&cur, sign, &mut total)?;
                    cur.clear();
                }
                sign = ch == '-';
            } else {
                cur.push(ch);
            }
        }
        flush(&cur, sign, &mut total)?;
        Some(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn f(p: u64) -> Arc<FiniteField> {
        Arc::new(FiniteField::prime(p).unwrap())
    }

    fn s(field: &Arc<FiniteField>, text: &str) -> PuiseuxSeries {
        PuiseuxSeries::parse(field, text).unwrap()
    }

    #[test]
    fn monomial_products() {
        let f2 = f(2);
        assert_eq!(&s(&f2, "t") * &s(&f2, "t"), s(&f2, "t^2"));
        assert_eq!(&s(&f2, "1+t") * &s(&f2, "1+t"), s(&f2, "1+t^2"));
        let half = s(&f2, "t^(1/2)");
        assert_eq!(half.ramification(), 2);
        let prod = &half * &half;
        assert_eq!(prod, s(&f2, "t"));
        assert_eq!(prod.ramification(), 1);
    }

    #[test]
    fn product_truncation_rule() {
        let f5 = f(5);
        // v(a)=1, T_a=5; v(b)=2, T_b=4: T' = min(1+4, 2+5) = 5
        let a = s(&f5, "t + t^2 + O(t^5)");
        let b = s(&f5, "t^2 + O(t^4)");
        assert_eq!((&a * &b).precision(), Some(int(5)));
    }

    #[test]
    fn inverse_examples() {
        let f2 = f(2);
        assert_eq!(s(&f2, "1 + t + O(t^4)").invert().unwrap(), s(&f2, "1+t+t^2+t^3+O(t^4)"));
        assert_eq!(s(&f2, "t").invert().unwrap(), s(&f2, "t^-1"));
        let f5 = f(5);
        let inv = s(&f5, "2 + t + O(t^2)").invert().unwrap();
        assert_eq!(inv, s(&f5, "3 + t + O(t^2)"));
        // multiply back: (2+t)(3+t) = 1 + t^2 ≡ 1 below t^2
        let back = &s(&f5, "2 + t + O(t^2)") * &inv;
        assert!(back.agrees_with(&PuiseuxSeries::one(&f5)));
    }

    #[test]
    fn inverse_errors() {
        let f2 = f(2);
        assert!(matches!(s(&f2, "1 + t").invert(), Err(Error::UnboundedInverse(_))));
        assert!(matches!(PuiseuxSeries::zero_at(&f2, &int(3)).invert(), Err(Error::ZeroAtPrecision(_))));
    }

    #[test]
    fn valuation_states() {
        let f2 = f(2);
        assert_eq!(s(&f2, "t^3 + t^5").valuation(), Valuation::Finite(int(3)));
        assert_eq!(s(&f2, "t^(1/2) + t").valuation(), Valuation::Finite(rat(1, 2)));
        assert_eq!(PuiseuxSeries::zero_at(&f2, &int(10)).valuation(), Valuation::AtLeast(int(10)));
        assert_eq!(PuiseuxSeries::zero(&f2).valuation(), Valuation::Infinite);
    }

    #[test]
    fn pth_roots() {
        let f2 = f(2);
        assert_eq!(s(&f2, "t").pth_root(), s(&f2, "t^(1/2)"));
        assert_eq!(s(&f2, "t^2").pth_root(), s(&f2, "t"));
        let root = s(&f2, "1 + t^2 + t^3").pth_root();
        assert_eq!(root, s(&f2, "1 + t + t^(3/2)"));
        assert_eq!(&root * &root, s(&f2, "1 + t^2 + t^3"));
    }

    #[test]
    fn pth_root_over_extension_field() {
        let f4 = Arc::new(FiniteField::new(2, &[1, 1, 1]).unwrap());
        let a = s(&f4, "u*t + (u+1)*t^3 + O(t^9)");
        let r = a.pth_root();
        assert_eq!(r.pow(2), a);
        // the generic product rule is weaker than Frobenius
        assert!((&r * &r).agrees_with(&a));
    }

    #[test]
    fn field_mismatch_is_an_error() {
        let a = s(&f(2), "t");
        let b = s(&f(3), "t");
        assert_eq!(a.checked_mul(&b), Err(Error::FieldMismatch));
    }

    #[test]
    fn display_round_trip() {
        let f3 = f(3);
        let a = s(&f3, "2 + t^(3/2) - t^4 + O(t^6)");
        assert_eq!(a.to_string(), "2 + t^(3/2) + 2*t^4 + O(t^6)");
        assert_eq!(s(&f3, &a.to_string()), a);
    }
}
