use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::rational::{int, Rational};
use crate::{Error, Result};

/// Largest supported `n` (algebra dimension `2^(n+2) = 256`).
pub const MAX_N: usize = 6;

/// `rtable[S][j] = e_S · e_j` in normal order.
type RightTable = Vec<Vec<Vec<(usize, Rational)>>>;

/// A rational quadratic space of signature `(n, 2)` given by its Gram matrix
/// `B`, with `q(v) = B(v, v)`.
#[derive(Clone, Debug)]
pub struct GramLattice {
    n: usize,
    gram: Vec<Vec<Rational>>,
    rtable: Arc<RightTable>,
}

impl PartialEq for GramLattice {
    fn eq(&self, other: &Self) -> bool {
        self.gram == other.gram
    }
}

impl Eq for GramLattice {}

/// `(positive, negative, zero)` counts of an exact congruence
/// diagonalization.
#[allow(clippy::needless_range_loop)]
pub fn signature(gram: &[Vec<Rational>]) -> Result<(usize, usize, usize)> {
    let m = gram.len();
    if gram.iter().any(|r| r.len() != m) {
        return Err(Error::Lattice("Gram matrix is not square".into()));
    }
    let mut a = gram.to_vec();
    let (mut pos, mut neg, mut zero) = (0, 0, 0);
    for k in 0..m {
        if a[k][k].is_zero() {
            if let Some(j) = (k + 1..m).find(|&j| !a[j][j].is_zero()) {
                a.swap(k, j);
                for row in a.iter_mut() {
                    row.swap(k, j);
                }
            } else if let Some(j) = (k + 1..m).find(|&j| !a[k][j].is_zero()) {
                // e_k <- e_k + e_j makes the pivot 2 B(e_k, e_j)
                for i in 0..m {
                    let v = a[j][i].clone();
                    a[k][i] += v;
                }
                for row in a.iter_mut() {
                    let v = row[j].clone();
                    row[k] += v;
                }
            } else {
                zero += 1;
                continue;
            }
        }
        let pivot = a[k][k].clone();
        if pivot.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in k + 1..m {
            let f = &a[i][k] / &pivot;
            if f.is_zero() {
                continue;
            }
            for j in 0..m {
                let v = &f * &a[k][j];
                a[i][j] -= v;
            }
            for row in a.iter_mut() {
                let v = &f * &row[k];
                row[i] -= v;
            }
        }
    }
    Ok((pos, neg, zero))
}

fn right_table(gram: &[Vec<Rational>]) -> RightTable {
    let m = gram.len();
    let mut table: RightTable = Vec::with_capacity(1 << m);
    for s in 0..1usize << m {
        let mut row = Vec::with_capacity(m);
        for j in 0..m {
            if s == 0 {
                row.push(vec![(1 << j, Rational::one())]);
                continue;
            }
            let k = usize::BITS as usize - 1 - s.leading_zeros() as usize;
            let rest = s ^ (1 << k);
            let entry = if k < j {
                vec![(s | 1 << j, Rational::one())]
            } else if k == j {
                if gram[j][j].is_zero() {
                    vec![]
                } else {
                    vec![(rest, gram[j][j].clone())]
                }
            } else {
                // e_rest e_k e_j = -(e_rest e_j) e_k + 2 B(e_k, e_j) e_rest
                let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
                for (u, c) in &table[rest][j] {
                    *acc.entry(u | 1 << k).or_insert_with(Rational::zero) -= c;
                }
                if !gram[k][j].is_zero() {
                    *acc.entry(rest).or_insert_with(Rational::zero) += int(2) * &gram[k][j];
                }
                acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
            };
            row.push(entry);
        }
        table.push(row);
    }
    table
}

impl GramLattice {
    /// Checks symmetry, nondegeneracy and signature `(n, 2)` with
    /// `1 <= n <= MAX_N`.
    #[allow(clippy::needless_range_loop)]
    pub fn new(gram: Vec<Vec<Rational>>) -> Result<Self> {
        let m = gram.len();
        if !(3..=MAX_N + 2).contains(&m) {
            return Err(Error::Lattice(format!("rank {m} outside 3..={}", MAX_N + 2)));
        }
        if gram.iter().any(|r| r.len() != m) {
            return Err(Error::Lattice("Gram matrix is not square".into()));
        }
        for i in 0..m {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::Lattice(format!("Gram matrix is not symmetric at ({}, {})", i + 1, j + 1)));
                }
            }
        }
        let (pos, neg, zero) = signature(&gram)?;
        if zero > 0 {
            return Err(Error::Lattice("Gram matrix is degenerate".into()));
        }
        if neg != 2 {
            return Err(Error::Lattice(format!("signature ({pos}, {neg}) is not (n, 2)")));
        }
        let rtable = Arc::new(right_table(&gram));
        Ok(GramLattice { n: pos, gram, rtable })
    }

    pub fn from_integers(gram: &[Vec<i64>]) -> Result<Self> {
        Self::new(gram.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
    }

    /// Two hyperbolic planes `(e1, e3)`, `(e2, e4)` plus `n - 2` vectors of
    /// norm 2. `⟨e1, e2⟩` is isotropic with dual `⟨e3, e4⟩`.
    pub fn split_type2(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Lattice(format!("a 2-dimensional isotropic subspace needs n >= 2, got {n}")));
        }
        let m = n + 2;
        let mut g = vec![vec![0i64; m]; m];
        for (a, b) in [(0, 2), (1, 3)] {
            g[a][b] = 1;
            g[b][a] = 1;
        }
        for (k, row) in g.iter_mut().enumerate().skip(4) {
            row[k] = 2;
        }
        Self::from_integers(&g)
    }

    /// A hyperbolic plane `(e1, e2)`, `q(e3) = -2` and `n - 1` vectors of
    /// norm 2. `e1` is isotropic.
    pub fn split_type3(n: usize) -> Result<Self> {
        let m = n + 2;
        let mut g = vec![vec![0i64; m]; m];
        g[0][1] = 1;
        g[1][0] = 1;
        g[2][2] = -2;
        for (k, row) in g.iter_mut().enumerate().skip(3) {
            row[k] = 2;
        }
        Self::from_integers(&g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Rank of `V`, `n + 2`.
    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    /// `2^(n+2)`.
    pub fn algebra_dim(&self) -> usize {
        1 << self.rank()
    }

    pub fn gram(&self) -> &[Vec<Rational>] {
        &self.gram
    }

    /// The `i`-th standard basis vector (0-based).
    pub fn basis_vector(&self, i: usize) -> Vec<Rational> {
        (0..self.rank()).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()
    }

    pub fn bilinear(&self, u: &[Rational], v: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (i, ui) in u.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, vj) in v.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                acc += ui * vj * &self.gram[i][j];
            }
        }
        acc
    }

    pub fn q(&self, v: &[Rational]) -> Rational {
        self.bilinear(v, v)
    }

    pub(crate) fn right_generator(&self, s: usize, j: usize) -> &[(usize, Rational)] {
        &self.rtable[s][j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signatures() {
        for n in 2..=5 {
            assert_eq!(GramLattice::split_type2(n).unwrap().n(), n);
        }
        for n in 1..=5 {
            assert_eq!(GramLattice::split_type3(n).unwrap().n(), n);
        }
        let h = vec![vec![int(0), int(1)], vec![int(1), int(0)]];
        assert_eq!(signature(&h).unwrap(), (1, 1, 0));
        assert!(GramLattice::from_integers(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, -1]]).is_err());
        assert!(GramLattice::from_integers(&[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 0]]).is_err());
        assert!(GramLattice::from_integers(&[vec![0, 1, 0], vec![2, 0, 0], vec![0, 0, -1]]).is_err());
    }
}
