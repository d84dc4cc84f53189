//! Power series in `x` with truncated Puiseux-series coefficients, and
//! Weierstrass preparation over the valuation ring.
//!
//! A [`CoefficientSeries`] is bi-truncated: each coefficient carries its own
//! `t`-adic truncation, and the series as a whole has an `x`-truncation `X`
//! (coefficients of `x^i` for `i ≥ X` are unknown). `X = None` means the
//! value is a polynomial in `x`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::field::FiniteField;
use crate::rational::{int, Rational};
use crate::series::{same_field, PuiseuxSeries, Valuation};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientSeries {
    field: Arc<FiniteField>,
    coeffs: Vec<PuiseuxSeries>,
    x_prec: Option<usize>,
}

impl CoefficientSeries {
    pub fn new(field: &Arc<FiniteField>, mut coeffs: Vec<PuiseuxSeries>, x_prec: Option<usize>) -> Result<Self> {
        if coeffs.iter().any(|c| !same_field(c.field(), field)) {
            return Err(Error::FieldMismatch);
        }
        if let Some(x) = x_prec {
            coeffs.truncate(x);
        }
        while coeffs.last().is_some_and(|c| c.is_exact_zero()) {
            coeffs.pop();
        }
        Ok(CoefficientSeries { field: field.clone(), coeffs, x_prec })
    }

    pub fn polynomial(field: &Arc<FiniteField>, coeffs: Vec<PuiseuxSeries>) -> Result<Self> {
        Self::new(field, coeffs, None)
    }

    pub fn zero(field: &Arc<FiniteField>) -> Self {
        CoefficientSeries { field: field.clone(), coeffs: Vec::new(), x_prec: None }
    }

    /// The monomial `x^k`.
    pub fn x_power(field: &Arc<FiniteField>, k: usize) -> Self {
        let mut coeffs = vec![PuiseuxSeries::zero(field); k];
        coeffs.push(PuiseuxSeries::one(field));
        CoefficientSeries { field: field.clone(), coeffs, x_prec: None }
    }

    pub fn field(&self) -> &Arc<FiniteField> {
        &self.field
    }

    /// `x`-truncation order `X`, or `None` for a polynomial.
    pub fn x_precision(&self) -> Option<usize> {
        self.x_prec
    }

    pub fn is_polynomial(&self) -> bool {
        self.x_prec.is_none()
    }

    /// Stored coefficients `c_0, c_1, ...` (trailing exact zeros dropped).
    pub fn coefficients(&self) -> &[PuiseuxSeries] {
        &self.coeffs
    }

    /// Coefficient of `x^i`; `None` when `i` is beyond the `x`-truncation.
    pub fn coeff(&self, i: usize) -> Option<PuiseuxSeries> {
        if self.x_prec.is_some_and(|x| i >= x) {
            return None;
        }
        Some(self.coeffs.get(i).cloned().unwrap_or_else(|| PuiseuxSeries::zero(&self.field)))
    }

    pub fn is_exact_zero(&self) -> bool {
        self.x_prec.is_none() && self.coeffs.is_empty()
    }

    /// Polynomial degree (ignores the truncation for series).
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Index of the first coefficient that is not an exact zero; for a
    /// truncated series with no such coefficient, the truncation order.
    /// `None` for the exact zero.
    pub fn order_lower_bound(&self) -> Option<usize> {
        match self.coeffs.iter().position(|c| !c.is_exact_zero()) {
            Some(i) => Some(i),
            None => self.x_prec,
        }
    }

    pub fn valuations(&self) -> Vec<Valuation> {
        self.coeffs.iter().map(|c| c.valuation()).collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if !same_field(&self.field, &other.field) {
            return Err(Error::FieldMismatch);
        }
        let x_prec = min_prec(self.x_prec, other.x_prec);
        let len = self.coeffs.len().max(other.coeffs.len());
        let len = x_prec.map_or(len, |x| len.min(x));
        let zero = PuiseuxSeries::zero(&self.field);
        let coeffs = (0..len)
            .map(|i| {
                let a = self.coeffs.get(i).unwrap_or(&zero);
                let b = other.coeffs.get(i).unwrap_or(&zero);
                a.checked_add(b)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&self.field, coeffs, x_prec)
    }

    pub fn neg(&self) -> Self {
        CoefficientSeries {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
            x_prec: self.x_prec,
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Product; known in `x` below `min(X_a + ord(b), X_b + ord(a))`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if !same_field(&self.field, &other.field) {
            return Err(Error::FieldMismatch);
        }
        if self.is_exact_zero() || other.is_exact_zero() {
            return Ok(Self::zero(&self.field));
        }
        let oa = self.order_lower_bound().unwrap();
        let ob = other.order_lower_bound().unwrap();
        let x_prec = min_prec(self.x_prec.map(|x| x + ob), other.x_prec.map(|x| x + oa));
        let full = self.coeffs.len() + other.coeffs.len();
        let len = x_prec.map_or(full, |x| full.min(x));
        let mut out = vec![PuiseuxSeries::zero(&self.field); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                if b.is_exact_zero() {
                    continue;
                }
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Self::new(&self.field, out, x_prec)
    }

    /// Multiplies every coefficient by `s`.
    pub fn scale(&self, s: &PuiseuxSeries) -> Result<Self> {
        let coeffs = self.coeffs.iter().map(|c| c.checked_mul(s)).collect::<Result<Vec<_>>>()?;
        Self::new(&self.field, coeffs, self.x_prec)
    }

    /// Lowers the `x`-truncation to `x`.
    pub fn truncate_x(&self, x: usize) -> Self {
        let x_prec = Some(self.x_prec.map_or(x, |p| p.min(x)));
        Self::new(&self.field, self.coeffs.clone(), x_prec).unwrap()
    }

    /// Lowers the `t`-truncation of every coefficient to `precision`.
    pub fn truncate_t(&self, precision: &Rational) -> Self {
        CoefficientSeries {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| c.truncate(precision)).collect(),
            x_prec: self.x_prec,
        }
    }

    /// Coefficientwise agreement wherever both sides are known.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let x = min_prec(self.x_prec, other.x_prec);
        let len = self.coeffs.len().max(other.coeffs.len());
        let len = x.map_or(len, |x| len.min(x));
        (0..len).all(|i| {
            let a = self.coeff(i).unwrap();
            let b = other.coeff(i).unwrap();
            a.agrees_with(&b)
        })
    }

    /// Evaluates a polynomial at `y` (Horner).
    pub fn evaluate(&self, y: &PuiseuxSeries) -> Result<PuiseuxSeries> {
        if !self.is_polynomial() {
            return Err(Error::InvalidArgument("evaluation needs a polynomial in x".into()));
        }
        let mut acc = PuiseuxSeries::zero(&self.field);
        for c in self.coeffs.iter().rev() {
            acc = acc.checked_mul(y)?.checked_add(c)?;
        }
        Ok(acc)
    }

    /// `Q(y) = P(a + y)` for a polynomial `P`.
    pub fn taylor_shift(&self, a: &PuiseuxSeries) -> Result<Self> {
        if !self.is_polynomial() {
            return Err(Error::InvalidArgument("Taylor shift needs a polynomial in x".into()));
        }
        let n = self.coeffs.len();
        let f = &self.field;
        let p = f.characteristic();
        // binomials mod p, Pascal's rule
        let mut binom = vec![vec![0u64; n]; n];
        for i in 0..n {
            binom[i][0] = 1;
            for j in 1..=i {
                binom[i][j] = (binom[i - 1][j - 1] + if j < i { binom[i - 1][j] } else { 0 }) % p;
            }
        }
        let mut powers = vec![PuiseuxSeries::one(f)];
        for k in 1..n {
            let next = powers[k - 1].checked_mul(a)?;
            powers.push(next);
        }
        let mut out = vec![PuiseuxSeries::zero(f); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_exact_zero() {
                continue;
            }
            for j in 0..=i {
                let b = binom[i][j];
                if b == 0 {
                    continue;
                }
                let term = c.checked_mul(&powers[i - j])?.scale(f.from_int(b as i64));
                out[j] = out[j].checked_add(&term)?;
            }
        }
        Self::new(f, out, None)
    }
}

/// Exact zeros and exact monomials stay exact; everything else is cut at `t`.
fn clip(s: PuiseuxSeries, t: &Rational) -> PuiseuxSeries {
    if s.is_exact() && s.num_terms() <= 1 {
        s
    } else {
        s.truncate(t)
    }
}

fn min_prec(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl fmt::Display for CoefficientSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_exact_zero() {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            };
            let body = c.to_string();
            parts.push(if mono.is_empty() {
                format!("({body})")
            } else if body == "1" {
                mono
            } else {
                format!("({body})*{mono}")
            });
        }
        if let Some(x) = self.x_prec {
            parts.push(format!("O(x^{x})"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// `f = unit · distinguished` to the guaranteed truncation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreparedFactorization {
    /// Unit part `u`; its constant term has valuation zero.
    pub unit: CoefficientSeries,
    /// Coefficients `h_0..h_d` of the distinguished polynomial, `h_d = 1`.
    pub distinguished: Vec<PuiseuxSeries>,
    pub degree: usize,
}

impl PreparedFactorization {
    pub fn distinguished_polynomial(&self) -> CoefficientSeries {
        let field = self.unit.field().clone();
        CoefficientSeries::polynomial(&field, self.distinguished.clone()).unwrap()
    }

    /// `u · h`, to compare against the input.
    pub fn product(&self) -> Result<CoefficientSeries> {
        self.unit.mul(&self.distinguished_polynomial())
    }
}

/// Working `t`-precision for preparing polynomials whose coefficients are
/// exact, where no truncation bounds the iteration.
pub const DEFAULT_PREPARATION_PRECISION: i64 = 64;

/// Weierstrass preparation with the default working precision.
pub fn weierstrass_prepare(f: &CoefficientSeries) -> Result<PreparedFactorization> {
    weierstrass_prepare_with(f, &int(DEFAULT_PREPARATION_PRECISION))
}

/// Weierstrass preparation `f = u · h` over the valuation ring.
///
/// The Weierstrass degree `d` is the index of the first coefficient of
/// valuation zero; every earlier coefficient must be certified to lie in the
/// maximal ideal. Results are truncated to what the input certifies: the
/// unknown `x`-tail of a series of `x`-truncation `X` perturbs `h` by terms of
/// valuation at least `μ·⌊(X - k)/(d - k)⌋`, where `k` counts the leading
/// exact-zero coefficients and `μ` is the least valuation among `c_k..c_{d-1}`.
/// `cap` bounds the working precision when nothing else does.
pub fn weierstrass_prepare_with(f: &CoefficientSeries, cap: &Rational) -> Result<PreparedFactorization> {
    let field = f.field().clone();
    let coeffs = f.coefficients();
    let k = coeffs.iter().position(|c| !c.is_exact_zero()).unwrap_or(coeffs.len());
    if k == coeffs.len() {
        return Err(if f.is_exact_zero() {
            Error::ReducesToZero
        } else {
            Error::InsufficientPrecision("x-truncation reached before the Weierstrass degree".into())
        });
    }

    let mut d = None;
    for (i, c) in coeffs.iter().enumerate().skip(k) {
        match c.valuation() {
            Valuation::Finite(v) if v.is_negative() => return Err(Error::NotIntegral(format!("v(c_{i}) = {v}"))),
            Valuation::Finite(v) if v.is_zero() => {
                d = Some(i);
                break;
            }
            Valuation::AtLeast(t) if !t.is_positive() => {
                return Err(Error::InsufficientPrecision(format!(
                    "c_{i} is zero at precision {t}; cannot certify it lies in the maximal ideal"
                )))
            }
            _ => {}
        }
    }
    let Some(d) = d else {
        return Err(match f.x_precision() {
            Some(x) if x > coeffs.len() => Error::ReducesToZero,
            Some(_) => Error::InsufficientPrecision(
                "no unit coefficient below the x-truncation; Weierstrass degree undeterminable".into(),
            ),
            None => Error::ReducesToZero,
        });
    };
    for (i, c) in coeffs.iter().enumerate().skip(d + 1) {
        match c.valuation() {
            Valuation::Finite(v) if v.is_negative() => return Err(Error::NotIntegral(format!("v(c_{i}) = {v}"))),
            Valuation::AtLeast(t) if t.is_negative() => {
                return Err(Error::InsufficientPrecision(format!(
                    "integrality of c_{i} is undetermined at precision {t}"
                )))
            }
            _ => {}
        }
    }

    // work with f' = f / x^k, Weierstrass degree dd
    let fp: Vec<PuiseuxSeries> = coeffs[k..].to_vec();
    let dd = d - k;
    let xp = f.x_precision().map(|x| x - k);
    let len = xp.unwrap_or(fp.len()).max(fp.len());
    let get = |i: usize| fp.get(i).cloned().unwrap_or_else(|| PuiseuxSeries::zero(&field));

    // precision ceilings: coefficient truncations, then the x-tail bound
    let mut t_work = cap.clone();
    for c in &fp {
        if let Some(t) = c.precision() {
            if t < t_work {
                t_work = t;
            }
        }
    }
    let mu = (0..dd).filter_map(|i| get(i).valuation().lower_bound().cloned()).min();
    let tail =
        |levels: usize| -> Option<Rational> { mu.as_ref().map(|m| m * Rational::from_integer(BigInt::from(levels))) };
    let unit_len = len - dd;
    let (b_prec, g_prec): (Rational, Vec<Rational>) = match (xp, dd) {
        (_, 0) | (None, _) => (t_work.clone(), vec![t_work.clone(); unit_len]),
        (Some(x), _) => {
            let kappa = tail(x / dd).unwrap();
            let b = if kappa < t_work { kappa } else { t_work.clone() };
            let g = (0..unit_len)
                .map(|j| {
                    let e = tail((x - dd - j).div_ceil(dd)).unwrap();
                    if e < t_work {
                        e
                    } else {
                        t_work.clone()
                    }
                })
                .collect();
            (b, g)
        }
    };

    let one = PuiseuxSeries::one(&field);
    if dd == 0 {
        let unit = CoefficientSeries::new(&field, fp, xp)?;
        let mut distinguished = vec![PuiseuxSeries::zero(&field); k];
        distinguished.push(one);
        return Ok(PreparedFactorization { unit, distinguished, degree: d });
    }

    // fixed point: g top-down, b bottom-up
    let mu_val = mu.clone().unwrap();
    let max_iter = {
        let ratio = &t_work / &mu_val;
        let r: i64 = ratio.ceil().to_integer().try_into().unwrap_or(i64::MAX / 4);
        (r.max(0) as usize) + 3
    };
    let mut b: Vec<PuiseuxSeries> = vec![PuiseuxSeries::zero(&field); dd];
    let mut g: Vec<PuiseuxSeries> = vec![PuiseuxSeries::zero(&field); unit_len];
    let mut converged = false;
    for _ in 0..max_iter {
        let mut g_new = vec![PuiseuxSeries::zero(&field); unit_len];
        for j in (0..unit_len).rev() {
            let mut acc = get(j + dd);
            for (i, bi) in b.iter().enumerate() {
                let idx = j + dd - i;
                if idx < unit_len && !bi.is_exact_zero() {
                    acc = &acc - &(bi * &g_new[idx]);
                }
            }
            g_new[j] = clip(acc, &t_work);
        }
        let g0_inv = g_new[0].bounded(&t_work).invert()?;
        let mut b_new: Vec<PuiseuxSeries> = Vec::with_capacity(dd);
        for n in 0..dd {
            let mut acc = get(n);
            for (i, bi) in b_new.iter().enumerate() {
                if n - i < unit_len {
                    acc = &acc - &(bi * &g_new[n - i]);
                }
            }
            b_new.push(clip(&acc * &g0_inv, &t_work));
        }
        let done = b_new == b && g_new == g;
        b = b_new;
        g = g_new;
        if done {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Invariant("Weierstrass iteration did not stabilize".into()));
    }

    let g: Vec<PuiseuxSeries> = g.into_iter().zip(&g_prec).map(|(c, t)| clip(c, t)).collect();
    let unit_prec = xp.map(|x| x - dd);
    let unit = CoefficientSeries::new(&field, g, unit_prec)?;
    let mut distinguished = vec![PuiseuxSeries::zero(&field); k];
    distinguished.extend(b.into_iter().map(|c| clip(c, &b_prec)));
    distinguished.push(one);
    Ok(PreparedFactorization { unit, distinguished, degree: d })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64) -> Arc<FiniteField> {
        Arc::new(FiniteField::prime(p).unwrap())
    }

    fn poly(field: &Arc<FiniteField>, cs: &[&str], x_prec: Option<usize>) -> CoefficientSeries {
        let coeffs = cs.iter().map(|c| PuiseuxSeries::parse(field, c).unwrap()).collect();
        CoefficientSeries::new(field, coeffs, x_prec).unwrap()
    }

    #[test]
    fn already_distinguished() {
        let f3 = f(3);
        let p = poly(&f3, &["0", "0", "0", "1"], None);
        let prep = weierstrass_prepare(&p).unwrap();
        assert_eq!(prep.degree, 3);
        assert!(prep.unit.agrees_with(&poly(&f3, &["1"], None)));
        assert_eq!(prep.distinguished_polynomial(), p);
    }

    #[test]
    fn constructed_product() {
        let f5 = f(5);
        let h = poly(&f5, &["t^2", "t", "1"], None);
        let u = poly(&f5, &["1+t"], None);
        let prep = weierstrass_prepare(&u.mul(&h).unwrap()).unwrap();
        assert_eq!(prep.degree, 2);
        assert!(prep.distinguished_polynomial().agrees_with(&h));
        assert!(prep.unit.agrees_with(&u));
    }

    #[test]
    fn series_input_multiplies_back() {
        let f2 = f(2);
        // x + t x^2, known to x^8
        let s = poly(&f2, &["0", "1", "t"], Some(8));
        let prep = weierstrass_prepare(&s).unwrap();
        assert_eq!(prep.degree, 1);
        assert!(prep.product().unwrap().agrees_with(&s));
    }

    #[test]
    fn nontrivial_unit_and_tail_bound() {
        let f3 = f(3);
        // c = (t, t^2 + 1 ... ) with an x-truncation of 6
        let s = poly(&f3, &["t", "t^2", "1 + t", "t", "2", "t^3"], Some(6));
        let prep = weierstrass_prepare(&s).unwrap();
        assert_eq!(prep.degree, 2);
        // μ = 1, κ = ⌊6/2⌋ = 3
        for c in &prep.distinguished[..2] {
            assert!(c.precision().unwrap() <= int(3));
            assert!(c.valuation().lower_bound().unwrap() > &int(0));
        }
        assert!(prep.product().unwrap().agrees_with(&s));
    }

    #[test]
    fn errors() {
        let f2 = f(2);
        assert_eq!(weierstrass_prepare(&poly(&f2, &["t", "t"], None)).unwrap_err(), Error::ReducesToZero);
        assert!(matches!(
            weierstrass_prepare(&poly(&f2, &["t", "t", "t"], Some(3))),
            Err(Error::InsufficientPrecision(_))
        ));
        assert!(matches!(weierstrass_prepare(&poly(&f2, &["t^-1", "1"], None)), Err(Error::NotIntegral(_))));
        assert!(weierstrass_prepare(&poly(&f2, &["O(t^2)", "1"], None)).is_ok());
        assert!(matches!(
            weierstrass_prepare(&poly(&f2, &["O(t^0)", "1"], None)),
            Err(Error::InsufficientPrecision(_))
        ));
    }

    #[test]
    fn taylor_shift_and_evaluate() {
        let f5 = f(5);
        let p = poly(&f5, &["t^3", "t", "1"], None);
        let a = PuiseuxSeries::parse(&f5, "2*t").unwrap();
        let q = p.taylor_shift(&a).unwrap();
        let y = PuiseuxSeries::parse(&f5, "t^2 + 3").unwrap();
        assert_eq!(q.evaluate(&y).unwrap(), p.evaluate(&(&a + &y)).unwrap());
    }

    #[test]
    fn product_x_truncation() {
        let f2 = f(2);
        let a = poly(&f2, &["0", "1", "1"], Some(4));
        let b = poly(&f2, &["0", "0", "1"], Some(5));
        // min(4 + 2, 5 + 1) = 6
        assert_eq!(a.mul(&b).unwrap().x_precision(), Some(6));
    }
}
