//! The residue field `k = F_p[u]/(g)` of a local field.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::fp_linalg::{add_mod, inv_mod, mul_mod, sub_mod, FpVector};

/// Largest supported residual degree.
pub const MAX_RESIDUE_DEGREE: usize = 8;

/// An element of `k`, as coordinates in the power basis `1, u, …, u^{f-1}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ResidueElement {
    c: [u32; MAX_RESIDUE_DEGREE],
}

impl ResidueElement {
    pub fn coords(&self, f: usize) -> &[u32] {
        &self.c[..f]
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    pub fn to_vector(&self, p: u32, f: usize) -> FpVector {
        FpVector::new(p, self.c[..f].iter().map(|&x| x as i64))
    }
}

impl fmt::Debug for ResidueElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.c.iter().rposition(|&x| x != 0).unwrap_or(0);
        write!(f, "{:?}", &self.c[..=last])
    }
}

/// `F_q` presented by a monic irreducible polynomial over `F_p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueField {
    p: u32,
    f: usize,
    /// Monic modulus, coefficients low to high (length f + 1).
    modulus: Vec<u32>,
}

/// Remainder of `a` modulo the monic `b` over `F_p`.
fn poly_rem(mut a: Vec<u32>, b: &[u32], p: u32) -> Vec<u32> {
    let db = b.len() - 1;
    while a.len() > db {
        let lead = a.pop().unwrap();
        if lead != 0 {
            let shift = a.len() - db;
            for (i, &bc) in b[..db].iter().enumerate() {
                a[shift + i] = sub_mod(a[shift + i], mul_mod(lead, bc, p), p);
            }
        }
    }
    a
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
pub fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() - 1;
    if deg == 0 {
        return false;
    }
    if poly[deg] != 1 {
        return false;
    }
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for idx in 0..count {
            let mut cand = Vec::with_capacity(d + 1);
            let mut n = idx;
            for _ in 0..d {
                cand.push((n % p as u64) as u32);
                n /= p as u64;
            }
            cand.push(1);
            if poly_rem(poly.to_vec(), &cand, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// The monic irreducible polynomial of degree `f` whose coefficient list
/// `(c_0, …, c_{f-1})` is lexicographically least.
pub fn least_irreducible(p: u32, f: usize) -> Vec<u32> {
    let count = (p as u64).pow(f as u32);
    for idx in 0..count {
        // c_0 is the most significant digit of the enumeration.
        let mut coeffs = vec![0u32; f];
        let mut n = idx;
        for slot in coeffs.iter_mut().rev() {
            *slot = (n % p as u64) as u32;
            n /= p as u64;
        }
        coeffs.push(1);
        if is_irreducible(&coeffs, p) {
            return coeffs;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl ResidueField {
    pub fn new(p: u32, modulus: Vec<u32>) -> Result<Self> {
        let f = modulus.len().saturating_sub(1);
        if f == 0 || f > MAX_RESIDUE_DEGREE {
            return Err(Error::Construction(format!(
                "residual degree must lie in [1, {MAX_RESIDUE_DEGREE}], got {f}"
            )));
        }
        let modulus: Vec<u32> = modulus.into_iter().map(|c| c % p).collect();
        if modulus[f] != 1 {
            return Err(Error::Construction(
                "residue polynomial must be monic".into(),
            ));
        }
        if !is_irreducible(&modulus, p) {
            return Err(Error::Construction(format!(
                "residue polynomial {modulus:?} is reducible over F_{p}"
            )));
        }
        Ok(ResidueField { p, f, modulus })
    }

    pub fn with_default_modulus(p: u32, f: usize) -> Result<Self> {
        if f == 0 || f > MAX_RESIDUE_DEGREE {
            return Err(Error::Construction(format!(
                "residual degree must lie in [1, {MAX_RESIDUE_DEGREE}], got {f}"
            )));
        }
        Self::new(p, least_irreducible(p, f))
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.f
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn order(&self) -> u64 {
        (self.p as u64).pow(self.f as u32)
    }

    pub fn zero(&self) -> ResidueElement {
        ResidueElement::default()
    }

    pub fn one(&self) -> ResidueElement {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> ResidueElement {
        let mut e = ResidueElement::default();
        e.c[0] = n.rem_euclid(self.p as i64) as u32;
        e
    }

    /// Element with the given power-basis coordinates (reduced mod p).
    pub fn from_coords(&self, coords: &[i64]) -> ResidueElement {
        let mut e = ResidueElement::default();
        for (i, &c) in coords.iter().enumerate().take(self.f) {
            e.c[i] = c.rem_euclid(self.p as i64) as u32;
        }
        e
    }

    pub fn from_vector(&self, v: &FpVector) -> ResidueElement {
        let mut e = ResidueElement::default();
        for i in 0..self.f {
            e.c[i] = v.get(i);
        }
        e
    }

    /// The generator `u` (or `u = 0`-free constant when f = 1).
    pub fn generator(&self) -> ResidueElement {
        if self.f == 1 {
            // F_p: the root of x + c_0 is -c_0.
            return self.from_int(-(self.modulus[0] as i64));
        }
        let mut e = ResidueElement::default();
        e.c[1] = 1;
        e
    }

    /// The power basis `θ_s = u^s`, an F_p-basis of k.
    pub fn basis(&self) -> Vec<ResidueElement> {
        (0..self.f)
            .map(|s| {
                let mut e = ResidueElement::default();
                e.c[s] = 1;
                e
            })
            .collect()
    }

    pub fn is_one(&self, a: &ResidueElement) -> bool {
        *a == self.one()
    }

    pub fn add(&self, a: &ResidueElement, b: &ResidueElement) -> ResidueElement {
        let mut r = ResidueElement::default();
        for i in 0..self.f {
            r.c[i] = add_mod(a.c[i], b.c[i], self.p);
        }
        r
    }

    pub fn sub(&self, a: &ResidueElement, b: &ResidueElement) -> ResidueElement {
        let mut r = ResidueElement::default();
        for i in 0..self.f {
            r.c[i] = sub_mod(a.c[i], b.c[i], self.p);
        }
        r
    }

    pub fn neg(&self, a: &ResidueElement) -> ResidueElement {
        self.sub(&self.zero(), a)
    }

    pub fn scale(&self, a: &ResidueElement, s: u32) -> ResidueElement {
        let mut r = ResidueElement::default();
        for i in 0..self.f {
            r.c[i] = mul_mod(a.c[i], s % self.p, self.p);
        }
        r
    }

    pub fn mul(&self, a: &ResidueElement, b: &ResidueElement) -> ResidueElement {
        let f = self.f;
        let p = self.p;
        if f == 1 {
            let mut r = ResidueElement::default();
            r.c[0] = mul_mod(a.c[0], b.c[0], p);
            return r;
        }
        let mut prod = vec![0u32; 2 * f - 1];
        for i in 0..f {
            if a.c[i] == 0 {
                continue;
            }
            for j in 0..f {
                prod[i + j] = add_mod(prod[i + j], mul_mod(a.c[i], b.c[j], p), p);
            }
        }
        let rem = poly_rem(prod, &self.modulus, p);
        let mut r = ResidueElement::default();
        r.c[..rem.len()].copy_from_slice(&rem);
        r
    }

    pub fn pow(&self, a: &ResidueElement, mut n: u64) -> ResidueElement {
        let mut base = *a;
        let mut acc = self.one();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            n >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &ResidueElement) -> Result<ResidueElement> {
        if a.is_zero() {
            return Err(Error::Domain("inverse of zero in the residue field".into()));
        }
        if self.f == 1 {
            return Ok(self.from_int(inv_mod(a.c[0], self.p) as i64));
        }
        Ok(self.pow(a, self.order() - 2))
    }

    pub fn frobenius(&self, a: &ResidueElement) -> ResidueElement {
        self.pow(a, self.p as u64)
    }

    /// Inverse Frobenius `x ↦ x^{p^{f-1}}`.
    pub fn pth_root(&self, a: &ResidueElement) -> ResidueElement {
        let mut r = *a;
        for _ in 1..self.f {
            r = self.frobenius(&r);
        }
        r
    }

    /// Absolute trace `S(a) = Σ_j a^{p^j}` to `F_p`.
    pub fn trace(&self, a: &ResidueElement) -> u32 {
        let mut acc = self.zero();
        let mut x = *a;
        for _ in 0..self.f {
            acc = self.add(&acc, &x);
            x = self.frobenius(&x);
        }
        debug_assert!(acc.c[1..].iter().all(|&c| c == 0));
        acc.c[0]
    }

    /// Every element of k, in a fixed order (zero first).
    pub fn elements(&self) -> Vec<ResidueElement> {
        let q = self.order();
        (0..q)
            .map(|mut n| {
                let mut e = ResidueElement::default();
                for i in 0..self.f {
                    e.c[i] = (n % self.p as u64) as u32;
                    n /= self.p as u64;
                }
                e
            })
            .collect()
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> ResidueElement {
        let mut e = ResidueElement::default();
        for i in 0..self.f {
            e.c[i] = rng.gen_range(0..self.p);
        }
        e
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> ResidueElement {
        loop {
            let e = self.random(rng);
            if !e.is_zero() {
                return e;
            }
        }
    }

    /// Element with nonzero trace, searched along the power basis.
    pub fn trace_one_element(&self) -> ResidueElement {
        self.elements()
            .into_iter()
            .find(|a| self.trace(a) != 0)
            .expect("trace is surjective")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_moduli() {
        assert_eq!(least_irreducible(2, 2), vec![1, 1, 1]);
        assert_eq!(least_irreducible(3, 2), vec![1, 0, 1]);
        assert_eq!(least_irreducible(2, 3), vec![1, 0, 1, 1]);
        assert!(!is_irreducible(&[1, 0, 1], 2));
        assert!(ResidueField::new(2, vec![1, 0, 1]).is_err());
    }

    #[test]
    fn traces() {
        let k = ResidueField::with_default_modulus(2, 2).unwrap();
        assert_eq!(k.trace(&k.one()), 0);
        let g = k.generator();
        assert_eq!(k.trace(&g), 1);
        let k1 = ResidueField::with_default_modulus(5, 1).unwrap();
        for a in k1.elements() {
            assert_eq!(k1.trace(&a), a.coords(1)[0]);
        }
    }

    #[test]
    fn field_axioms_f9() {
        let k = ResidueField::with_default_modulus(3, 2).unwrap();
        for a in k.elements() {
            assert_eq!(k.pow(&a, 9), a);
            assert_eq!(k.frobenius(&k.pth_root(&a)), a);
            if !a.is_zero() {
                assert_eq!(k.mul(&a, &k.inv(&a).unwrap()), k.one());
            }
        }
    }

    #[test]
    fn trace_is_additive() {
        let k = ResidueField::with_default_modulus(2, 3).unwrap();
        for a in k.elements() {
            for b in k.elements() {
                assert_eq!(k.trace(&k.add(&a, &b)), (k.trace(&a) + k.trace(&b)) % 2);
            }
        }
    }
}
