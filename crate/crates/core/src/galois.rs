//! Finite-level model of the Galois image on `p^n`-torsion.
//!
//! Elements are matrices over `Z/p^n` of block shape `[[D, W], [0, I]]`
//! with `D` an invertible diagonal block. Products and inverses stay in this
//! shape, so elements are stored as the pair `(D, W)`.

use std::collections::{HashSet, VecDeque};

use num_bigint::BigUint;

use crate::field::is_prime;
use crate::{Error, Result};

/// Largest subgroup [`generate`] will enumerate.
pub const ENUMERATION_BOUND: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockGaloisElement {
    p: u64,
    n: u32,
    modulus: u64,
    /// Diagonal of `D`.
    d: Vec<u64>,
    /// `W`, row-major, `half × half`.
    w: Vec<u64>,
}

fn modulus_of(p: u64, n: u32) -> Result<u64> {
    if !is_prime(p) || n == 0 {
        return Err(Error::InvalidArgument(format!("need prime p and n >= 1, got p = {p}, n = {n}")));
    }
    p.checked_pow(n).filter(|m| *m < 1 << 31).ok_or_else(|| Error::InvalidArgument("p^n too large".into()))
}

fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(m as i128) as u64)
}

impl BlockGaloisElement {
    /// `[[diag(d), w], [0, I]]` over `Z/p^n`; entries are reduced.
    pub fn new(p: u64, n: u32, d: Vec<u64>, w: Vec<u64>) -> Result<Self> {
        let modulus = modulus_of(p, n)?;
        let half = d.len();
        if half == 0 || w.len() != half * half {
            return Err(Error::MalformedBlock(format!("D has {half} entries, W has {}", w.len())));
        }
        let d: Vec<u64> = d.into_iter().map(|x| x % modulus).collect();
        if d.iter().any(|x| x % p == 0) {
            return Err(Error::MalformedBlock("diagonal entries of D must be units".into()));
        }
        let w = w.into_iter().map(|x| x % modulus).collect();
        Ok(BlockGaloisElement { p, n, modulus, d, w })
    }

    pub fn identity(p: u64, n: u32, half: usize) -> Result<Self> {
        Self::new(p, n, vec![1; half], vec![0; half * half])
    }

    /// Validates the block shape of a full `d × d` matrix.
    pub fn from_matrix(p: u64, n: u32, m: &[Vec<u64>]) -> Result<Self> {
        let modulus = modulus_of(p, n)?;
        let size = m.len();
        if size == 0 || size % 2 == 1 || m.iter().any(|r| r.len() != size) {
            return Err(Error::MalformedBlock("matrix must be square of even size".into()));
        }
        let half = size / 2;
        let at = |i: usize, j: usize| m[i][j] % modulus;
        let mut d = Vec::with_capacity(half);
        let mut w = Vec::with_capacity(half * half);
        for i in 0..half {
            for j in 0..half {
                if i != j && at(i, j) != 0 {
                    return Err(Error::MalformedBlock(format!("D is not diagonal at ({i}, {j})")));
                }
                if at(half + i, j) != 0 {
                    return Err(Error::MalformedBlock("lower-left block is not zero".into()));
                }
                if at(half + i, half + j) != u64::from(i == j) {
                    return Err(Error::MalformedBlock("lower-right block is not the identity".into()));
                }
                w.push(at(i, half + j));
            }
            d.push(at(i, i));
        }
        Self::new(p, n, d, w)
    }

    pub fn to_matrix(&self) -> Vec<Vec<u64>> {
        let h = self.half();
        let mut m = vec![vec![0; 2 * h]; 2 * h];
        for i in 0..h {
            m[i][i] = self.d[i];
            m[h + i][h + i] = 1;
            for j in 0..h {
                m[i][h + j] = self.w[i * h + j];
            }
        }
        m
    }

    pub fn half(&self) -> usize {
        self.d.len()
    }

    pub fn size(&self) -> usize {
        2 * self.half()
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn diagonal(&self) -> &[u64] {
        &self.d
    }

    pub fn upper_right(&self) -> &[u64] {
        &self.w
    }

    pub fn is_identity(&self) -> bool {
        self.is_unipotent() && self.w.iter().all(|x| *x == 0)
    }

    /// `D = I`.
    pub fn is_unipotent(&self) -> bool {
        self.d.iter().all(|x| *x == 1)
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.modulus != other.modulus || self.half() != other.half() {
            return Err(Error::InvalidArgument("modulus or size mismatch".into()));
        }
        Ok(())
    }

    /// `(D_a D_b, D_a W_b + W_a)`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let m = self.modulus;
        let h = self.half();
        let d = self.d.iter().zip(&other.d).map(|(a, b)| a * b % m).collect();
        let w = (0..h * h)
            .map(|k| {
                let i = k / h;
                (self.d[i] * other.w[k] + self.w[k]) % m
            })
            .collect();
        Ok(BlockGaloisElement { p: self.p, n: self.n, modulus: m, d, w })
    }

    /// `(D^-1, -D^-1 W)`.
    pub fn inverse(&self) -> Self {
        let m = self.modulus;
        let h = self.half();
        let d: Vec<u64> = self.d.iter().map(|x| inv_mod(*x, m).expect("unit diagonal")).collect();
        let w = (0..h * h).map(|k| (m - d[k / h] * self.w[k] % m) % m).collect();
        BlockGaloisElement { p: self.p, n: self.n, modulus: m, d, w }
    }

    /// `a b a^-1 b^-1`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.mul(&self.inverse())?.mul(&other.inverse())
    }
}

fn units(p: u64, modulus: u64) -> Vec<u64> {
    (1..modulus).filter(|x| x % p != 0).collect()
}

/// Generators of the full block group: diagonal unit generators in each
/// position and the elementary unipotents `I + E_ij`.
pub fn full_group_generators(p: u64, n: u32, size: usize) -> Result<Vec<BlockGaloisElement>> {
    if size == 0 || size % 2 == 1 {
        return Err(Error::InvalidArgument(format!("block size {size} must be positive and even")));
    }
    let modulus = modulus_of(p, n)?;
    let h = size / 2;
    // a generating set of (Z/p^n)^x, chosen greedily
    let mut unit_gens: Vec<u64> = Vec::new();
    let mut reached: HashSet<u64> = HashSet::from([1]);
    for u in units(p, modulus) {
        if reached.contains(&u) {
            continue;
        }
        unit_gens.push(u);
        let mut frontier: Vec<u64> = reached.iter().copied().collect();
        while let Some(x) = frontier.pop() {
            for g in &unit_gens {
                let y = x * g % modulus;
                if reached.insert(y) {
                    frontier.push(y);
                }
            }
        }
    }
    let mut gens = Vec::new();
    for k in 0..h {
        for &u in &unit_gens {
            let mut d = vec![1; h];
            d[k] = u;
            gens.push(BlockGaloisElement::new(p, n, d, vec![0; h * h])?);
        }
    }
    for k in 0..h * h {
        let mut w = vec![0; h * h];
        w[k] = 1;
        gens.push(BlockGaloisElement::new(p, n, vec![1; h], w)?);
    }
    Ok(gens)
}

/// Every element of the full block group, in a deterministic order.
pub fn full_group(p: u64, n: u32, size: usize) -> Result<Vec<BlockGaloisElement>> {
    let gens = full_group_generators(p, n, size)?;
    let mut all: Vec<_> = generate(&gens)?.into_iter().collect();
    all.sort();
    Ok(all)
}

/// The subgroup generated by `gens` (breadth-first, bounded).
pub fn generate(gens: &[BlockGaloisElement]) -> Result<HashSet<BlockGaloisElement>> {
    let first = gens.first().ok_or_else(|| Error::Empty("no generators".into()))?;
    let id = BlockGaloisElement::identity(first.p, first.n, first.half())?;
    let mut seen: HashSet<BlockGaloisElement> = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = x.mul(g)?;
            if !seen.contains(&y) {
                if seen.len() >= ENUMERATION_BOUND {
                    return Err(Error::EnumerationBound(ENUMERATION_BOUND));
                }
                seen.insert(y.clone());
                queue.push_back(y);
            }
        }
    }
    Ok(seen)
}

/// Derived subgroup of `⟨gens⟩`: the normal closure of the commutators of
/// the generators. Every element is checked to be unipotent.
pub fn commutator_closure(gens: &[BlockGaloisElement]) -> Result<Vec<BlockGaloisElement>> {
    let first = gens.first().ok_or_else(|| Error::Empty("no generators".into()))?;
    for g in gens {
        first.compatible(g)?;
    }
    let id = BlockGaloisElement::identity(first.p, first.n, first.half())?;
    let mut normal_gens: Vec<BlockGaloisElement> = Vec::new();
    for (i, a) in gens.iter().enumerate() {
        for b in &gens[i + 1..] {
            let c = a.commutator(b)?;
            if !c.is_identity() && !normal_gens.contains(&c) {
                normal_gens.push(c);
            }
        }
    }
    if normal_gens.is_empty() {
        return Ok(vec![id]);
    }
    let mut subgroup = generate(&normal_gens)?;
    loop {
        let mut added = false;
        for g in gens {
            let g_inv = g.inverse();
            for t in normal_gens.clone() {
                let c = g.mul(&t)?.mul(&g_inv)?;
                if !subgroup.contains(&c) {
                    normal_gens.push(c);
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
        subgroup = generate(&normal_gens)?;
    }
    let mut out: Vec<_> = subgroup.into_iter().collect();
    if let Some(bad) = out.iter().find(|x| !x.is_unipotent()) {
        return Err(Error::Invariant(format!("commutator with non-unipotent diagonal {:?}", bad.d)));
    }
    out.sort();
    Ok(out)
}

/// Order of the unipotent subgroup `{[[I, W], [0, I]]}`: `p^(n (d/2)^2)`.
pub fn unipotent_order(p: u64, n: u32, size: usize) -> Result<BigUint> {
    if size % 2 == 1 {
        return Err(Error::InvalidArgument(format!("block size {size} is odd")));
    }
    let h = (size / 2) as u32;
    Ok(BigUint::from(p).pow(n * h * h))
}

/// Index of the unipotent subgroup in the full block group, by counting the
/// diagonal unit choices directly.
pub fn unipotent_index(p: u64, n: u32, size: usize) -> Result<BigUint> {
    if size % 2 == 1 {
        return Err(Error::InvalidArgument(format!("block size {size} is odd")));
    }
    let modulus = modulus_of(p, n)?;
    let phi = units(p, modulus).len() as u64;
    Ok(BigUint::from(phi).pow((size / 2) as u32))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(p: u64, n: u32, d: &[u64], w: &[u64]) -> BlockGaloisElement {
        BlockGaloisElement::new(p, n, d.to_vec(), w.to_vec()).unwrap()
    }

    #[test]
    fn block_algebra() {
        let a = el(3, 1, &[2], &[1]);
        let id = BlockGaloisElement::identity(3, 1, 1).unwrap();
        assert_eq!(a.mul(&id).unwrap(), a);
        assert_eq!(a.mul(&a).unwrap(), el(3, 1, &[1], &[0]));
        let d = el(5, 1, &[2, 3], &[0; 4]);
        let u = el(5, 1, &[1, 1], &[1, 2, 3, 4]);
        // [[D,0],[0,I]]·[[I,W],[0,I]] = [[D, DW],[0,I]]
        assert_eq!(d.mul(&u).unwrap(), el(5, 1, &[2, 3], &[2, 4, 9, 12]));
        assert!(a.mul(&a.inverse()).unwrap().is_identity());
    }

    #[test]
    fn matrix_round_trip_and_validation() {
        let a = el(3, 2, &[2, 4], &[1, 2, 3, 4]);
        assert_eq!(BlockGaloisElement::from_matrix(3, 2, &a.to_matrix()).unwrap(), a);
        let mut bad = a.to_matrix();
        bad[2][0] = 1;
        assert!(matches!(BlockGaloisElement::from_matrix(3, 2, &bad), Err(Error::MalformedBlock(_))));
        assert!(BlockGaloisElement::new(3, 1, vec![3], vec![0]).is_err());
    }

    #[test]
    fn small_full_group() {
        let g = full_group(3, 1, 2).unwrap();
        assert_eq!(g.len(), 6);
        let derived = commutator_closure(&g).unwrap();
        assert_eq!(derived.len(), 3);
        assert!(derived.iter().all(|x| x.is_unipotent()));
        let gens = full_group_generators(3, 1, 4).unwrap();
        let derived = commutator_closure(&gens).unwrap();
        assert_eq!(BigUint::from(derived.len()), unipotent_order(3, 1, 4).unwrap());
        assert_eq!(derived.len(), 81);
    }

    #[test]
    fn abelian_inputs() {
        let diag = vec![el(5, 1, &[2, 3], &[0; 4]), el(5, 1, &[4, 2], &[0; 4])];
        assert_eq!(commutator_closure(&diag).unwrap().len(), 1);
        assert_eq!(commutator_closure(&[el(3, 1, &[2], &[1])]).unwrap().len(), 1);
    }

    #[test]
    fn indices() {
        assert_eq!(unipotent_index(3, 1, 2).unwrap(), BigUint::from(2u32));
        assert_eq!(unipotent_index(2, 1, 2).unwrap(), BigUint::from(1u32));
        assert_eq!(unipotent_index(3, 2, 4).unwrap(), BigUint::from(36u32));
        assert!(unipotent_index(3, 1, 3).is_err());
    }
}
