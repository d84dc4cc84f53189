//! Newton-Puiseux root finder for polynomials over truncated Puiseux series.
//!
//! Used as an independent oracle for valuations predicted by Newton polygons.
//! Each step picks a hull segment of slope `-s`, solves its residual equation
//! over `F_q` by exhaustive search, substitutes `y = c·t^s + y'` and recurses.
//! Roots whose residual equation has no `F_q`-root are reported with their
//! valuation only.

use std::collections::BTreeMap;

use crate::field::{FiniteField, Fq};
use crate::newton::NewtonPolygon;
use crate::poly::CoefficientSeries;
use crate::rational::{lcm_u64, Rational};
use crate::series::{PuiseuxSeries, Valuation};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct PuiseuxOptions {
    /// Expansions stop once the next term would have exponent `≥ target`.
    pub target: Rational,
    /// Fail instead of reporting valuation-only roots.
    pub require_full: bool,
    /// Largest ramification index the expansions may reach.
    pub n_cap: u64,
}

impl PuiseuxOptions {
    pub fn new(target: Rational) -> Self {
        PuiseuxOptions { target, require_full: false, n_cap: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PuiseuxRoot {
    /// A root known modulo its truncation, with exact valuation.
    Expanded { root: PuiseuxSeries, valuation: Valuation, multiplicity: usize },
    /// Roots needing a residue-field extension.
    ValuationOnly { valuation: Rational, multiplicity: usize },
}

impl PuiseuxRoot {
    pub fn valuation(&self) -> Valuation {
        match self {
            PuiseuxRoot::Expanded { valuation, .. } => valuation.clone(),
            PuiseuxRoot::ValuationOnly { valuation, .. } => Valuation::Finite(valuation.clone()),
        }
    }

    pub fn multiplicity(&self) -> usize {
        match self {
            PuiseuxRoot::Expanded { multiplicity, .. } | PuiseuxRoot::ValuationOnly { multiplicity, .. } => {
                *multiplicity
            }
        }
    }

    pub fn series(&self) -> Option<&PuiseuxSeries> {
        match self {
            PuiseuxRoot::Expanded { root, .. } => Some(root),
            PuiseuxRoot::ValuationOnly { .. } => None,
        }
    }
}

/// Root valuations with multiplicities, merged and sorted; `None` is `∞`.
pub fn valuation_multiset(roots: &[PuiseuxRoot]) -> Result<Vec<(Option<Rational>, usize)>> {
    let mut acc: BTreeMap<Option<Rational>, usize> = BTreeMap::new();
    for r in roots {
        let key = match r.valuation() {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
            Valuation::AtLeast(t) => {
                return Err(Error::InsufficientPrecision(format!("root valuation only known to be >= {t}")))
            }
        };
        *acc.entry(key).or_default() += r.multiplicity();
    }
    // finite values first, then ∞
    let mut out: Vec<_> = acc.iter().filter(|(k, _)| k.is_some()).map(|(k, v)| (k.clone(), *v)).collect();
    out.extend(acc.get(&None).map(|m| (None, *m)));
    Ok(out)
}

const MAX_DEPTH: usize = 512;

/// All roots of the polynomial `h` over the working Puiseux field.
pub fn puiseux_roots(h: &CoefficientSeries, opts: &PuiseuxOptions) -> Result<Vec<PuiseuxRoot>> {
    if !h.is_polynomial() {
        return Err(Error::InvalidArgument("root finding needs a polynomial".into()));
    }
    let Some(deg) = h.degree() else {
        return Err(Error::InvalidArgument("zero polynomial has no finite root set".into()));
    };
    if !matches!(h.coefficients()[deg].valuation(), Valuation::Finite(_)) {
        return Err(Error::InsufficientPrecision("leading coefficient undetermined".into()));
    }
    let mut out = Vec::new();
    let zero = PuiseuxSeries::zero(h.field());
    solve(h, &zero, None, deg, opts, &mut out, 0)?;
    Ok(out)
}

fn root_valuation(partial: &PuiseuxSeries, s: &Rational) -> Rational {
    match partial.valuation() {
        Valuation::Finite(v) => v,
        _ => s.clone(),
    }
}

#[allow(clippy::too_many_arguments)]
fn solve(
    q: &CoefficientSeries,
    partial: &PuiseuxSeries,
    s_last: Option<&Rational>,
    count: usize,
    opts: &PuiseuxOptions,
    out: &mut Vec<PuiseuxRoot>,
    depth: usize,
) -> Result<()> {
    if depth > MAX_DEPTH {
        return Err(Error::InsufficientPrecision("expansion depth limit reached".into()));
    }
    let field = q.field().clone();
    let coeffs = q.coefficients();
    let k = coeffs.iter().take_while(|c| c.is_exact_zero()).count().min(count);
    if k > 0 {
        out.push(PuiseuxRoot::Expanded { root: partial.clone(), valuation: partial.valuation(), multiplicity: k });
    }
    let rest = count - k;
    if rest == 0 {
        return Ok(());
    }
    let shifted: Vec<PuiseuxSeries> = coeffs[k..].to_vec();
    let vals: Vec<Valuation> = shifted.iter().map(|c| c.valuation()).collect();
    let admissible = |v: &Rational| s_last.is_none_or(|s| v > s);

    if let Valuation::AtLeast(t) = &vals[0] {
        // constant term unknown: bound the admissible roots from below
        let mut hyp = vals.clone();
        hyp[0] = Valuation::Finite(t.clone());
        let poly = NewtonPolygon::from_valuations(0, &hyp)?;
        let bound = poly
            .root_valuations()
            .into_iter()
            .map(|(v, _)| v)
            .filter(|v| admissible(v))
            .min()
            .ok_or_else(|| Error::InsufficientPrecision("no admissible root bound".into()))?;
        if bound < opts.target {
            return Err(Error::InsufficientPrecision(format!(
                "root expansion exhausted input precision at t^{bound}, target t^{}",
                opts.target
            )));
        }
        let valuation = match partial.valuation() {
            Valuation::Finite(v) => Valuation::Finite(v),
            _ => Valuation::AtLeast(bound.clone()),
        };
        out.push(PuiseuxRoot::Expanded { root: partial.truncate(&bound), valuation, multiplicity: rest });
        return Ok(());
    }

    let poly = NewtonPolygon::from_valuations(0, &vals)?;
    let segments: Vec<_> = poly.segments().into_iter().filter(|s| admissible(&-&s.slope)).collect();
    let found: usize = segments.iter().map(|s| s.length).sum();
    if found != rest {
        return Err(Error::Invariant(format!("expected {rest} admissible roots, polygon gives {found}")));
    }
    let q_rest = CoefficientSeries::polynomial(&field, shifted.clone())?;
    for seg in segments {
        let s = -&seg.slope;
        let ram = lcm_u64(partial.ramification(), s.denom().try_into().unwrap_or(u64::MAX));
        if ram > opts.n_cap {
            return Err(Error::InsufficientPrecision(format!(
                "ramification index {ram} exceeds the cap {}",
                opts.n_cap
            )));
        }
        if s >= opts.target {
            out.push(PuiseuxRoot::Expanded {
                root: partial.truncate(&s),
                valuation: Valuation::Finite(root_valuation(partial, &s)),
                multiplicity: seg.length,
            });
            continue;
        }
        // residual polynomial Σ lc_i c^(i - i0) over the points on the segment
        let i0 = seg.start.0;
        let line = |i: i64| &seg.start.1 + &seg.slope * Rational::from_integer((i - i0).into());
        let mut residual = vec![Fq::ZERO; seg.length + 1];
        for i in seg.start.0..=seg.end.0 {
            let c = &shifted[i as usize];
            if let Valuation::Finite(v) = c.valuation() {
                if v == line(i) {
                    residual[(i - i0) as usize] = c.leading_term().unwrap().1;
                }
            }
        }
        let roots = residual_roots(&field, &residual);
        let mut used = 0;
        for (z, m) in roots {
            used += m;
            let a = PuiseuxSeries::monomial(&field, z, &s);
            let next = q_rest.taylor_shift(&a)?;
            let partial2 = partial.checked_add(&a)?;
            solve(&next, &partial2, Some(&s), m, opts, out, depth + 1)?;
        }
        let missing = seg.length - used;
        if missing > 0 {
            if opts.require_full {
                return Err(Error::NoResidueRoot(s));
            }
            out.push(PuiseuxRoot::ValuationOnly { valuation: root_valuation(partial, &s), multiplicity: missing });
        }
    }
    Ok(())
}

/// Nonzero roots in `F_q` with multiplicities, by exhaustive search.
pub fn residual_roots(field: &FiniteField, coeffs: &[Fq]) -> Vec<(Fq, usize)> {
    let mut out = Vec::new();
    if coeffs.iter().all(|c| c.is_zero()) {
        return out;
    }
    for z in field.elements().filter(|z| !z.is_zero()) {
        let mut poly = coeffs.to_vec();
        let mut m = 0;
        loop {
            let (quot, rem) = divide_linear(field, &poly, z);
            if !rem.is_zero() || poly.len() <= 1 {
                break;
            }
            m += 1;
            poly = quot;
        }
        if m > 0 {
            out.push((z, m));
        }
    }
    out
}

/// Synthetic division by `(c - z)`: quotient and remainder.
fn divide_linear(field: &FiniteField, coeffs: &[Fq], z: Fq) -> (Vec<Fq>, Fq) {
    let n = coeffs.len();
    if n == 0 {
        return (Vec::new(), Fq::ZERO);
    }
    let mut quot = vec![Fq::ZERO; n - 1];
    let mut acc = coeffs[n - 1];
    for i in (0..n - 1).rev() {
        quot[i] = acc;
        acc = field.add(coeffs[i], field.mul(acc, z));
    }
    (quot, acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use std::sync::Arc;

    fn f(p: u64) -> Arc<FiniteField> {
        Arc::new(FiniteField::prime(p).unwrap())
    }

    fn poly(field: &Arc<FiniteField>, cs: &[&str]) -> CoefficientSeries {
        let coeffs = cs.iter().map(|c| PuiseuxSeries::parse(field, c).unwrap()).collect();
        CoefficientSeries::polynomial(field, coeffs).unwrap()
    }

    #[test]
    fn square_root_of_t() {
        let f3 = f(3);
        let h = poly(&f3, &["-t", "0", "1"]);
        let roots = puiseux_roots(&h, &PuiseuxOptions::new(int(4))).unwrap();
        assert_eq!(roots.len(), 2);
        for r in &roots {
            assert_eq!(r.valuation(), Valuation::Finite(rat(1, 2)));
            let y = r.series().unwrap();
            assert_eq!(y.ramification(), 2);
            assert!(h.evaluate(y).unwrap().agrees_with(&PuiseuxSeries::zero(&f3)));
        }
    }

    #[test]
    fn factored_over_f2() {
        let f2 = f(2);
        let h = poly(&f2, &["0", "t", "1"]);
        let roots = puiseux_roots(&h, &PuiseuxOptions::new(int(8))).unwrap();
        let ms = valuation_multiset(&roots).unwrap();
        assert_eq!(ms, vec![(Some(int(1)), 1), (None, 1)]);
    }

    #[test]
    fn linear_factors_over_f5() {
        let f5 = f(5);
        // (x - t)(x - t^2) = x^2 - (t + t^2) x + t^3
        let h = poly(&f5, &["t^3", "-t - t^2", "1"]);
        let roots = puiseux_roots(&h, &PuiseuxOptions::new(int(6))).unwrap();
        let ms = valuation_multiset(&roots).unwrap();
        assert_eq!(ms, vec![(Some(int(1)), 1), (Some(int(2)), 1)]);
        let exact: Vec<_> = roots.iter().map(|r| r.series().unwrap().clone()).collect();
        assert!(exact.iter().any(|y| y.agrees_with(&PuiseuxSeries::parse(&f5, "t").unwrap())));
        assert!(exact.iter().any(|y| y.agrees_with(&PuiseuxSeries::parse(&f5, "t^2").unwrap())));
    }

    #[test]
    fn residue_extension_needed() {
        let f3 = f(3);
        // x^2 + t^2: residual c^2 + 1 has no root in F_3
        let h = poly(&f3, &["t^2", "0", "1"]);
        let roots = puiseux_roots(&h, &PuiseuxOptions::new(int(4))).unwrap();
        assert_eq!(roots, vec![PuiseuxRoot::ValuationOnly { valuation: int(1), multiplicity: 2 }]);
        let mut strict = PuiseuxOptions::new(int(4));
        strict.require_full = true;
        assert_eq!(puiseux_roots(&h, &strict), Err(Error::NoResidueRoot(int(1))));
    }

    #[test]
    fn truncated_constant_term() {
        let f2 = f(2);
        let h = poly(&f2, &["t + O(t^2)", "1"]);
        let roots = puiseux_roots(&h, &PuiseuxOptions::new(int(2))).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].valuation(), Valuation::Finite(int(1)));
        let too_far = puiseux_roots(&h, &PuiseuxOptions::new(int(3)));
        assert!(matches!(too_far, Err(Error::InsufficientPrecision(_))));
    }

    #[test]
    fn residual_root_multiplicities() {
        let f3 = f(3);
        // (c - 1)^2 (c - 2) = c^3 - 4c^2 + 5c - 2 ≡ c^3 + 2c^2 + 2c + 1
        let c = |n| f3.from_int(n);
        let roots = residual_roots(&f3, &[c(1), c(2), c(2), c(1)]);
        assert_eq!(roots, vec![(c(1), 2), (c(2), 1)]);
    }
}
