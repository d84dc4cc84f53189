//! Finite fields `F_q = F_p[u]/(π)`.
//!
//! Elements are packed into a single `u64` holding their coordinates in base
//! `p` (coordinate `k` is the coefficient of `u^k`), so they are `Copy` and
//! cheap to hash. The field context carries `p`, the degree and the monic
//! modulus `π`; every arithmetic operation goes through the context.

use std::fmt;

use crate::{Error, Result};

/// Packed element of a [`FiniteField`]. Only meaningful together with the
/// field that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fq(u64);

impl Fq {
    pub const ZERO: Fq = Fq(0);
    pub const ONE: Fq = Fq(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Index of the element in `0..q` (the base-`p` packing).
    pub fn index(self) -> u64 {
        self.0
    }
}

const MAX_DEGREE: usize = 62;

/// The field `F_p[u]/(π)` for a prime `p` and monic irreducible `π`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteField {
    p: u64,
    degree: usize,
    /// Monic modulus, low degree first, length `degree + 1`.
    modulus: Vec<u64>,
    order: u64,
}

impl FiniteField {
    /// The prime field `F_p`.
    pub fn prime(p: u64) -> Result<Self> {
        Self::new(p, &[0, 1])
    }

    /// `F_p[u]/(π)` where `modulus` lists the coefficients of `π` from the
    /// constant term up. The modulus must be monic and irreducible.
    pub fn new(p: u64, modulus: &[u64]) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        let mut modulus: Vec<u64> = modulus.iter().map(|c| c % p).collect();
        while modulus.len() > 1 && *modulus.last().unwrap() == 0 {
            modulus.pop();
        }
        let degree = modulus.len() - 1;
        if degree == 0 {
            return Err(Error::InvalidField("modulus must have positive degree".into()));
        }
        if *modulus.last().unwrap() != 1 {
            return Err(Error::InvalidField("modulus must be monic".into()));
        }
        if degree > MAX_DEGREE {
            return Err(Error::InvalidField(format!("degree {degree} too large")));
        }
        let mut order: u64 = 1;
        for _ in 0..degree {
            order = order
                .checked_mul(p)
                .filter(|q| *q < (1u64 << 62))
                .ok_or_else(|| Error::InvalidField(format!("q = {p}^{degree} does not fit")))?;
        }
        if degree > 1 && p >= (1 << 31) {
            return Err(Error::InvalidField("extension fields need p < 2^31".into()));
        }
        if !is_irreducible(p, &modulus) {
            return Err(Error::InvalidField(format!("modulus {modulus:?} is reducible over F_{p}")));
        }
        Ok(FiniteField { p, degree, modulus, order })
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `q = p^r`.
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn zero(&self) -> Fq {
        Fq::ZERO
    }

    pub fn one(&self) -> Fq {
        Fq::ONE
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, n: i64) -> Fq {
        Fq(n.rem_euclid(self.p as i64) as u64)
    }

    pub fn from_coords(&self, coords: &[u64]) -> Result<Fq> {
        if coords.len() > self.degree {
            return Err(Error::InvalidField(format!(
                "{} coordinates for a degree {} field",
                coords.len(),
                self.degree
            )));
        }
        let mut packed = 0u64;
        for &c in coords.iter().rev() {
            packed = packed * self.p + c % self.p;
        }
        Ok(Fq(packed))
    }

    /// The element with packed index `i` (must be `< q`).
    pub fn element(&self, i: u64) -> Fq {
        debug_assert!(i < self.order);
        Fq(i)
    }

    pub fn elements(&self) -> impl Iterator<Item = Fq> {
        (0..self.order).map(Fq)
    }

    pub fn coords(&self, a: Fq) -> Vec<u64> {
        let mut out = vec![0; self.degree];
        let mut x = a.0;
        for c in out.iter_mut() {
            *c = x % self.p;
            x /= self.p;
        }
        out
    }

    fn unpack(&self, a: Fq, out: &mut [u64; MAX_DEGREE]) {
        let mut x = a.0;
        for c in out.iter_mut().take(self.degree) {
            *c = x % self.p;
            x /= self.p;
        }
    }

    fn pack(&self, digits: &[u64]) -> Fq {
        let mut packed = 0u64;
        for &c in digits[..self.degree].iter().rev() {
            packed = packed * self.p + c;
        }
        Fq(packed)
    }

    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        if self.degree == 1 {
            let s = a.0 + b.0;
            return Fq(if s >= self.p { s - self.p } else { s });
        }
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0u64;
        let mut place = 1u64;
        for _ in 0..self.degree {
            let d = (x % self.p + y % self.p) % self.p;
            out += d * place;
            place = place.wrapping_mul(self.p);
            x /= self.p;
            y /= self.p;
        }
        Fq(out)
    }

    pub fn neg(&self, a: Fq) -> Fq {
        if self.degree == 1 {
            return Fq(if a.0 == 0 { 0 } else { self.p - a.0 });
        }
        let mut x = a.0;
        let mut out = 0u64;
        let mut place = 1u64;
        for _ in 0..self.degree {
            let d = x % self.p;
            out += ((self.p - d) % self.p) * place;
            place = place.wrapping_mul(self.p);
            x /= self.p;
        }
        Fq(out)
    }

    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        if a.0 == 0 || b.0 == 0 {
            return Fq::ZERO;
        }
        if self.degree == 1 {
            return Fq(((a.0 as u128 * b.0 as u128) % self.p as u128) as u64);
        }
        let r = self.degree;
        let p = self.p;
        let mut da = [0u64; MAX_DEGREE];
        let mut db = [0u64; MAX_DEGREE];
        self.unpack(a, &mut da);
        self.unpack(b, &mut db);
        let mut prod = [0u64; 2 * MAX_DEGREE];
        for i in 0..r {
            if da[i] == 0 {
                continue;
            }
            for j in 0..r {
                prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
            }
        }
        // reduce modulo the monic modulus, top down
        for k in (r..2 * r - 1).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for j in 0..r {
                let m = self.modulus[j];
                if m != 0 {
                    prod[k - r + j] = (prod[k - r + j] + (p - c) * m) % p;
                }
            }
        }
        self.pack(&prod)
    }

    pub fn pow(&self, a: Fq, mut e: u64) -> Fq {
        let mut base = a;
        let mut acc = Fq::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: Fq) -> Option<Fq> {
        if a.is_zero() {
            return None;
        }
        if self.degree == 1 {
            return Some(Fq(mod_inverse(a.0, self.p)));
        }
        Some(self.pow(a, self.order - 2))
    }

    /// Frobenius `a ↦ a^p`.
    pub fn frobenius(&self, a: Fq) -> Fq {
        self.pow(a, self.p)
    }

    /// Inverse of Frobenius, `a ↦ a^(q/p)`.
    pub fn frobenius_inverse(&self, a: Fq) -> Fq {
        if self.degree == 1 {
            return a;
        }
        self.pow(a, self.order / self.p)
    }

    /// Renders an element as a polynomial in `u` (or an integer over `F_p`).
    pub fn format(&self, a: Fq) -> String {
        if self.degree == 1 {
            return a.0.to_string();
        }
        let coords = self.coords(a);
        let mut parts = Vec::new();
        for (k, &c) in coords.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let mono = match k {
                0 => String::new(),
                1 => "u".to_string(),
                _ => format!("u^{k}"),
            };
            parts.push(match (c, k) {
                (_, 0) => c.to_string(),
                (1, _) => mono,
                _ => format!("{c}*{mono}"),
            });
        }
        if parts.is_empty() {
            "0".into()
        } else if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            format!("({})", parts.join("+"))
        }
    }
}

impl fmt::Display for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree == 1 {
            write!(f, "F_{}", self.p)
        } else {
            write!(f, "F_{}^{}", self.p, self.degree)
        }
    }
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    let (mut r0, mut r1) = (p as i128, a as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    s0.rem_euclid(p as i128) as u64
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(small) {
            return n == small;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

// Dense polynomials over F_p, low degree first, no trailing zeros.

fn trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = mod_inverse(m[dm], p);
    while r.len() > dm {
        let k = r.len() - 1;
        let c = mul_mod(r[k], lead_inv, p);
        let shift = k - dm;
        for (j, &mj) in m.iter().enumerate() {
            r[shift + j] = (r[shift + j] + p - mul_mod(c, mj, p)) % p;
        }
        trim(&mut r);
    }
    r
}

fn poly_mul_mod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + mul_mod(x, y, p)) % p;
        }
    }
    poly_rem(&prod, m, p)
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Ben-Or test: `π` of degree `r` is irreducible iff
/// `gcd(x^(p^i) - x, π) = 1` for `1 ≤ i ≤ r/2`.
fn is_irreducible(p: u64, modulus: &[u64]) -> bool {
    let r = modulus.len() - 1;
    if r == 1 {
        return true;
    }
    let x = vec![0, 1];
    let mut power = x.clone();
    for _ in 1..=r / 2 {
        // power <- power^p mod π
        let mut acc = vec![1u64];
        let mut base = power.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_mul_mod(&acc, &base, modulus, p);
            }
            base = poly_mul_mod(&base, &base, modulus, p);
            e >>= 1;
        }
        power = acc;
        let mut diff = power.clone();
        diff.resize(diff.len().max(2), 0);
        diff[1] = (diff[1] + p - 1) % p;
        trim(&mut diff);
        let g = poly_gcd(modulus, &diff, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_and_non_primes() {
        assert!(is_prime(2));
        assert!(is_prime(65537));
        assert!(is_prime(4_294_967_291));
        assert!(!is_prime(1));
        assert!(!is_prime(91));
        assert!(FiniteField::prime(9).is_err());
    }

    #[test]
    fn reducible_modulus_rejected() {
        // u^2 + 1 = (u + 1)^2 over F_2
        assert!(FiniteField::new(2, &[1, 0, 1]).is_err());
        // u^2 + 1 irreducible over F_3
        assert!(FiniteField::new(3, &[1, 0, 1]).is_ok());
        // u^4 + 1 = (u^2 + u + 2)(u^2 + 2u + 2) over F_3
        assert!(FiniteField::new(3, &[1, 0, 0, 0, 1]).is_err());
        // product of two cubics over F_2: (u^3+u+1)(u^3+u^2+1) = u^6+u^5+u^4+u^3+u^2+u+1
        assert!(FiniteField::new(2, &[1, 1, 1, 1, 1, 1, 1]).is_err());
        assert!(FiniteField::new(2, &[1, 1, 0, 0, 1]).is_ok());
        assert!(FiniteField::new(2, &[1, 1, 1]).is_ok());
    }

    #[test]
    fn every_element_satisfies_x_to_the_q() {
        for f in [
            FiniteField::prime(7).unwrap(),
            FiniteField::new(2, &[1, 1, 0, 0, 1]).unwrap(),
            FiniteField::new(3, &[2, 2, 1]).unwrap(),
        ] {
            for a in f.elements() {
                assert_eq!(f.pow(a, f.order()), a);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
                }
                assert_eq!(f.frobenius(f.frobenius_inverse(a)), a);
                assert_eq!(f.add(a, f.neg(a)), f.zero());
            }
        }
    }

    #[test]
    fn f4_multiplication_table() {
        // F_4 = F_2[u]/(u^2+u+1): u*u = u+1
        let f = FiniteField::new(2, &[1, 1, 1]).unwrap();
        let u = f.from_coords(&[0, 1]).unwrap();
        let u_plus_1 = f.from_coords(&[1, 1]).unwrap();
        assert_eq!(f.mul(u, u), u_plus_1);
        assert_eq!(f.mul(u, u_plus_1), f.one());
        assert_eq!(f.format(u_plus_1), "(u+1)");
    }
}
