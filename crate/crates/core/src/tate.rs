//! `p`-power torsion towers of totally degenerate abelian varieties.
//!
//! For a Tate lattice with periods `q_1..q_g` in characteristic `p`, the
//! `p^n`-torsion is generated over `K` by the `p^n`-th roots of the periods.
//! These are purely inseparable, so the separable part of the tower is `K`
//! itself and the Galois image is trivial.

use num_bigint::BigUint;
use num_traits::{One, Signed};

use crate::rational::Rational;
use crate::series::{same_field, PuiseuxSeries, Valuation};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TateLattice {
    p: u64,
    periods: Vec<PuiseuxSeries>,
    valuations: Vec<Rational>,
}

impl TateLattice {
    /// Periods must share a field and have positive valuation. Independence is
    /// assumed; only the valuation vector is recorded.
    pub fn new(periods: Vec<PuiseuxSeries>) -> Result<Self> {
        let first = periods.first().ok_or_else(|| Error::Empty("Tate lattice needs a period".into()))?;
        let field = first.field().clone();
        let mut valuations = Vec::with_capacity(periods.len());
        for (i, q) in periods.iter().enumerate() {
            if !same_field(q.field(), &field) {
                return Err(Error::FieldMismatch);
            }
            match q.valuation() {
                Valuation::Finite(v) if v.is_positive() => valuations.push(v),
                Valuation::AtLeast(t) => {
                    return Err(Error::InsufficientPrecision(format!("period q_{} is zero to O(t^{t})", i + 1)))
                }
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "period q_{} must have positive valuation, has {other}",
                        i + 1
                    )))
                }
            }
        }
        Ok(TateLattice { p: field.characteristic(), periods, valuations })
    }

    pub fn rank(&self) -> usize {
        self.periods.len()
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn periods(&self) -> &[PuiseuxSeries] {
        &self.periods
    }

    pub fn valuations(&self) -> &[Rational] {
        &self.valuations
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TateTower {
    pub n: u32,
    pub separable_degree: BigUint,
    pub inseparable_degree: BigUint,
    /// `q_i^(1/p^n)`.
    pub generators: Vec<PuiseuxSeries>,
    pub galois_image_trivial: bool,
}

impl TateTower {
    /// Checks `(q_i^(1/p^n))^(p^n) = q_i` to the precision of each side.
    pub fn verify(&self, lattice: &TateLattice) -> bool {
        let e = lattice.p.pow(self.n);
        self.generators.iter().zip(lattice.periods()).all(|(r, q)| {
            let back = r.pow(e);
            back.agrees_with(q) && back.precision() == q.precision()
        })
    }
}

pub fn tate_torsion_tower(lattice: &TateLattice, n: u32) -> TateTower {
    let generators = lattice.periods.iter().map(|q| (0..n).fold(q.clone(), |acc, _| acc.pth_root())).collect();
    let g = lattice.rank() as u32;
    TateTower {
        n,
        separable_degree: BigUint::one(),
        inseparable_degree: BigUint::from(lattice.p).pow(n * g),
        generators,
        galois_image_trivial: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FiniteField;
    use crate::rational::rat;
    use std::sync::Arc;

    fn s(f: &Arc<FiniteField>, t: &str) -> PuiseuxSeries {
        PuiseuxSeries::parse(f, t).unwrap()
    }

    #[test]
    fn single_period() {
        let f2 = Arc::new(FiniteField::prime(2).unwrap());
        let l = TateLattice::new(vec![s(&f2, "t")]).unwrap();
        let tower = tate_torsion_tower(&l, 1);
        assert_eq!(tower.generators, vec![s(&f2, "t^(1/2)")]);
        assert_eq!(tower.inseparable_degree, BigUint::from(2u32));
        assert_eq!(tower.separable_degree, BigUint::one());
        assert!(tower.verify(&l));
        let trivial = tate_torsion_tower(&l, 0);
        assert_eq!(trivial.inseparable_degree, BigUint::one());
    }

    #[test]
    fn two_periods_two_levels() {
        let f2 = Arc::new(FiniteField::prime(2).unwrap());
        let l = TateLattice::new(vec![s(&f2, "t"), s(&f2, "t^3 + t^4")]).unwrap();
        let tower = tate_torsion_tower(&l, 2);
        assert_eq!(tower.inseparable_degree, BigUint::from(16u32));
        assert_eq!(tower.generators[1].valuation(), Valuation::Finite(rat(3, 4)));
        assert!(tower.verify(&l));
    }

    #[test]
    fn rejects_units() {
        let f3 = Arc::new(FiniteField::prime(3).unwrap());
        assert!(TateLattice::new(vec![s(&f3, "1 + t")]).is_err());
        assert!(TateLattice::new(vec![]).is_err());
    }
}
