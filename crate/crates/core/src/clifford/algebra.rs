use std::fmt;

use num_traits::{One, Zero};

use super::lattice::GramLattice;
use crate::rational::Rational;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_mask(mask: usize) -> Self {
        if mask.count_ones().is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn xor(self, other: Self) -> Self {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Dense coefficient vector over the `2^m` monomials.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CliffordElement {
    generators: usize,
    coeffs: Vec<Rational>,
}

impl CliffordElement {
    pub fn zero(generators: usize) -> Self {
        CliffordElement { generators, coeffs: vec![Rational::zero(); 1 << generators] }
    }

    pub fn scalar(generators: usize, c: Rational) -> Self {
        let mut e = Self::zero(generators);
        e.coeffs[0] = c;
        e
    }

    pub fn one(generators: usize) -> Self {
        Self::scalar(generators, Rational::one())
    }

    pub fn monomial(generators: usize, mask: usize) -> Self {
        let mut e = Self::zero(generators);
        e.coeffs[mask] = Rational::one();
        e
    }

    /// `Σ v_i e_i`.
    pub fn vector(v: &[Rational]) -> Self {
        let mut e = Self::zero(v.len());
        for (i, c) in v.iter().enumerate() {
            e.coeffs[1 << i] = c.clone();
        }
        e
    }

    pub fn from_coeffs(generators: usize, coeffs: Vec<Rational>) -> Result<Self> {
        if coeffs.len() != 1 << generators {
            return Err(Error::Lattice(format!("expected {} coefficients, got {}", 1 << generators, coeffs.len())));
        }
        Ok(CliffordElement { generators, coeffs })
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Rational> {
        self.coeffs
    }

    pub fn coeff(&self, mask: usize) -> &Rational {
        &self.coeffs[mask]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// `None` for zero and for mixed elements.
    pub fn parity(&self) -> Option<Parity> {
        let mut found = None;
        for (mask, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let p = Parity::of_mask(mask);
            match found {
                None => found = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
        found
    }

    pub fn part(&self, parity: Parity) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(mask, c)| if Parity::of_mask(mask) == parity { c.clone() } else { Rational::zero() })
            .collect();
        CliffordElement { generators: self.generators, coeffs }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.generators != other.generators {
            return Err(Error::Lattice(format!(
                "elements over {} and {} generators",
                self.generators, other.generators
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(CliffordElement { generators: self.generators, coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let coeffs = self.coeffs.iter().map(|a| a * c).collect();
        CliffordElement { generators: self.generators, coeffs }
    }
}

fn label(mask: usize) -> String {
    (0..usize::BITS as usize).filter(|i| mask >> i & 1 == 1).map(|i| format!("e{}", i + 1)).collect()
}

impl fmt::Display for CliffordElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(mask, c)| match (mask, c.is_one()) {
                (0, _) => c.to_string(),
                (_, true) => label(mask),
                _ => format!("{c}*{}", label(mask)),
            })
            .collect();
        if terms.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&terms.join(" + "))
        }
    }
}

impl GramLattice {
    fn check_element(&self, a: &CliffordElement) -> Result<()> {
        if a.generators != self.rank() {
            return Err(Error::Lattice(format!(
                "element over {} generators, lattice has rank {}",
                a.generators,
                self.rank()
            )));
        }
        Ok(())
    }

    /// `a · e_j`.
    pub fn mul_generator(&self, a: &CliffordElement, j: usize) -> CliffordElement {
        let mut out = CliffordElement::zero(a.generators);
        for (s, c) in a.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (u, d) in self.right_generator(s, j) {
                out.coeffs[*u] += c * d;
            }
        }
        out
    }

    /// `a · e_S`.
    pub fn mul_monomial(&self, a: &CliffordElement, mask: usize) -> CliffordElement {
        (0..self.rank()).filter(|j| mask >> j & 1 == 1).fold(a.clone(), |acc, j| self.mul_generator(&acc, j))
    }

    pub fn mul(&self, a: &CliffordElement, b: &CliffordElement) -> Result<CliffordElement> {
        self.check_element(a)?;
        self.check_element(b)?;
        let mut out = CliffordElement::zero(a.generators);
        for (mask, c) in b.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let term = self.mul_monomial(a, mask);
            for (o, t) in out.coeffs.iter_mut().zip(&term.coeffs) {
                if !t.is_zero() {
                    *o += t * c;
                }
            }
        }
        Ok(out)
    }

    /// Columns `a · e_T` for every monomial `T`, in mask order.
    pub fn left_mul_columns(&self, a: &CliffordElement) -> Result<Vec<CliffordElement>> {
        self.check_element(a)?;
        let mut cols: Vec<CliffordElement> = Vec::with_capacity(self.algebra_dim());
        cols.push(a.clone());
        for t in 1..self.algebra_dim() {
            let top = usize::BITS as usize - 1 - t.leading_zeros() as usize;
            let next = self.mul_generator(&cols[t ^ (1 << top)], top);
            cols.push(next);
        }
        Ok(cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn defining_relations() {
        let l = GramLattice::split_type2(2).unwrap();
        let e = |i: usize| CliffordElement::monomial(4, 1usize << i);
        for i in 0..4 {
            let v = l.basis_vector(i);
            assert_eq!(l.mul(&e(i), &e(i)).unwrap(), CliffordElement::scalar(4, l.q(&v)));
        }
        // e1, e2 orthogonal
        assert_eq!(l.mul(&e(1), &e(0)).unwrap(), l.mul(&e(0), &e(1)).unwrap().scale(&int(-1)));
        // e1 e3 e1 = 2 e1
        let e13 = l.mul(&e(0), &e(2)).unwrap();
        assert_eq!(l.mul(&e13, &e(0)).unwrap(), e(0).scale(&int(2)));
        assert_eq!(e13.to_string(), "e1e3");
    }

    #[test]
    fn vector_squares() {
        let l = GramLattice::split_type2(3).unwrap();
        let v: Vec<Rational> = [1, -2, 3, 1, 2].iter().map(|&x| int(x)).collect();
        let x = CliffordElement::vector(&v);
        assert_eq!(l.mul(&x, &x).unwrap(), CliffordElement::scalar(5, l.q(&v)));
        assert_eq!(x.parity(), Some(Parity::Odd));
        let y = l.mul(&x, &CliffordElement::monomial(5, 0b11)).unwrap();
        assert_eq!(y.parity(), Some(Parity::Odd));
    }
}
