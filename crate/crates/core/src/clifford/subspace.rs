use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exec::Strategy;
use crate::rational::Rational;
use crate::{Error, Result};

/// A subspace of `Q^ambient`, stored as its reduced row echelon basis with
/// each row scaled to a primitive integer vector with positive pivot. The
/// representation is canonical, so equality of values is equality of
/// subspaces.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient: usize,
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

fn integer_row(v: &[Rational]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    v.iter().map(|x| x.numer() * (&l / x.denom())).collect()
}

fn make_primitive(row: &mut [BigInt]) {
    let g = row.iter().filter(|x| !x.is_zero()).fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in row.iter_mut().filter(|x| !x.is_zero()) {
            *x /= &g;
        }
    }
}

/// `r <- a r - b piv` with `r[col]` cleared; `a = piv[col] > 0`.
fn eliminate(r: &mut [BigInt], piv: &[BigInt], col: usize, support: &[usize]) {
    if r[col].is_zero() {
        return;
    }
    let g = piv[col].gcd(&r[col]);
    let a = &piv[col] / &g;
    let b = &r[col] / &g;
    if !a.is_one() {
        for x in r.iter_mut().filter(|x| !x.is_zero()) {
            *x *= &a;
        }
    }
    for &j in support {
        r[j] -= &b * &piv[j];
    }
    debug_assert!(r[col].is_zero());
    make_primitive(r);
}

fn echelon(ambient: usize, rows: Vec<Vec<BigInt>>, strategy: Strategy) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let mut pool: Vec<Vec<BigInt>> = rows
        .into_iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .map(|mut r| {
            make_primitive(&mut r);
            r
        })
        .collect();
    let mut basis: Vec<Vec<BigInt>> = Vec::new();
    let mut pivots = Vec::new();
    for col in 0..ambient {
        if pool.is_empty() {
            break;
        }
        let nnz = |r: &Vec<BigInt>| r.iter().filter(|x| !x.is_zero()).count();
        let Some(idx) =
            pool.iter().enumerate().filter(|(_, r)| !r[col].is_zero()).min_by_key(|(_, r)| nnz(r)).map(|(i, _)| i)
        else {
            continue;
        };
        let mut piv = pool.swap_remove(idx);
        if piv[col].is_negative() {
            for x in piv.iter_mut() {
                *x = -&*x;
            }
        }
        let support: Vec<usize> = (0..ambient).filter(|&j| !piv[j].is_zero()).collect();
        strategy.for_each_mut(&mut pool, |r| eliminate(r, &piv, col, &support));
        strategy.for_each_mut(&mut basis, |r| eliminate(r, &piv, col, &support));
        pool.retain(|r| r.iter().any(|x| !x.is_zero()));
        basis.push(piv);
        pivots.push(col);
    }
    (basis, pivots)
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        let rows = (0..ambient)
            .map(|i| (0..ambient).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        Subspace { ambient, rows, pivots: (0..ambient).collect() }
    }

    pub fn span(ambient: usize, vectors: &[Vec<Rational>], strategy: Strategy) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != ambient) {
            return Err(Error::InvalidArgument(format!("vector of length {} in Q^{ambient}", v.len())));
        }
        let rows = strategy.map(vectors.to_vec(), |v| integer_row(&v));
        Ok(Self::from_integer_rows(ambient, rows, strategy))
    }

    fn from_integer_rows(ambient: usize, rows: Vec<Vec<BigInt>>, strategy: Strategy) -> Self {
        let (rows, pivots) = echelon(ambient, rows, strategy);
        Subspace { ambient, rows, pivots }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn basis(&self) -> Vec<Vec<Rational>> {
        self.rows.iter().map(|r| r.iter().map(|x| Rational::from_integer(x.clone())).collect()).collect()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::InvalidArgument(format!("subspaces of Q^{} and Q^{}", self.ambient, other.ambient)));
        }
        Ok(())
    }

    fn reduces_to_zero(&self, mut v: Vec<BigInt>) -> bool {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !v[p].is_zero() {
                let support: Vec<usize> = (0..self.ambient).filter(|&j| !row[j].is_zero()).collect();
                eliminate(&mut v, row, p, &support);
            }
        }
        v.iter().all(Zero::is_zero)
    }

    pub fn contains_vector(&self, v: &[Rational]) -> bool {
        v.len() == self.ambient && self.reduces_to_zero(integer_row(v))
    }

    pub fn contains(&self, other: &Self) -> Result<bool> {
        self.check(other)?;
        Ok(other.rank() <= self.rank() && other.rows.iter().all(|r| self.reduces_to_zero(r.clone())))
    }

    pub fn sum(&self, other: &Self, strategy: Strategy) -> Result<Self> {
        self.check(other)?;
        let rows = self.rows.iter().chain(&other.rows).cloned().collect();
        Ok(Self::from_integer_rows(self.ambient, rows, strategy))
    }

    /// Zassenhaus: echelonize `[a | a]` over `[b | 0]`; rows with vanishing
    /// left half span the intersection.
    pub fn intersection(&self, other: &Self, strategy: Strategy) -> Result<Self> {
        self.check(other)?;
        let n = self.ambient;
        let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(self.rank() + other.rank());
        for r in &self.rows {
            rows.push(r.iter().chain(r).cloned().collect());
        }
        for r in &other.rows {
            rows.push(r.iter().cloned().chain(std::iter::repeat_n(BigInt::zero(), n)).collect());
        }
        let (ech, pivots) = echelon(2 * n, rows, strategy);
        let inter = ech.into_iter().zip(pivots).filter(|(_, p)| *p >= n).map(|(r, _)| r[n..].to_vec()).collect();
        Ok(Self::from_integer_rows(n, inter, strategy))
    }

    /// Basis of `{x : M x = 0}` for the given rows of `M`.
    pub fn kernel(ncols: usize, matrix: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
        let s = Self::span(ncols, matrix, Strategy::Sequential)?;
        let free: Vec<usize> = (0..ncols).filter(|c| !s.pivots.contains(c)).collect();
        Ok(free
            .iter()
            .map(|&f| {
                let mut x = vec![Rational::zero(); ncols];
                x[f] = Rational::one();
                for (row, &p) in s.rows.iter().zip(&s.pivots) {
                    x[p] = -Rational::new(row[f].clone(), row[p].clone());
                }
                x
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn rank_and_canonical_form() {
        let a = Subspace::span(3, &[v(&[1, 2, 3]), v(&[2, 4, 6]), v(&[0, 1, 1])], Strategy::Sequential).unwrap();
        assert_eq!(a.rank(), 2);
        let b = Subspace::span(3, &[v(&[1, 3, 4]), vec![rat(1, 2), int(0), rat(1, 2)]], Strategy::Parallel).unwrap();
        assert_eq!(a, b);
        assert!(a.contains_vector(&v(&[3, 7, 10])));
        assert!(!a.contains_vector(&v(&[0, 0, 1])));
    }

    #[test]
    fn sum_and_intersection() {
        let s = Strategy::Sequential;
        let a = Subspace::span(4, &[v(&[1, 0, 0, 0]), v(&[0, 1, 0, 0])], s).unwrap();
        let b = Subspace::span(4, &[v(&[0, 1, 0, 0]), v(&[0, 0, 1, 1])], s).unwrap();
        assert_eq!(a.sum(&b, s).unwrap().rank(), 3);
        let i = a.intersection(&b, s).unwrap();
        assert_eq!(i, Subspace::span(4, &[v(&[0, 1, 0, 0])], s).unwrap());
        assert!(a.contains(&i).unwrap() && b.contains(&i).unwrap());
        assert!(Subspace::full(4).contains(&a).unwrap());
    }

    #[test]
    fn kernel_basis() {
        let k = Subspace::kernel(3, &[v(&[1, 1, 0]), v(&[0, 1, 1])]).unwrap();
        assert_eq!(k, vec![v(&[1, -1, 1])]);
    }
}
