//! Precision-tracked elements of a local field.
//!
//! Characteristic 0: an element is `p^shift · Σ_{i<e} z_i π^i` with each
//! `z_i` in the unramified ring `Z_p[u]/(g)`, stored as integers. Because the
//! summands `z_i π^i` have pairwise distinct valuations mod `e`, the ideal
//! `π^N` is cut out coefficient-wise, which keeps reduction and valuation
//! exact.
//!
//! Characteristic p: a truncated Laurent series `Σ a_n t^n` over `k`.
//!
//! Precision is absolute (the element is known modulo `π^prec`). Exact
//! elements carry [`EXACT`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{Field, FieldContext};
use crate::residue::ResidueElement;

/// Precision marker of exact elements.
pub const EXACT: i64 = i64::MAX / 4;

#[inline]
pub(crate) fn padd(a: i64, b: i64) -> i64 {
    if a >= EXACT || b >= EXACT {
        EXACT
    } else {
        a + b
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Mixed {
    pub(crate) shift: i64,
    pub(crate) body: Vec<BigInt>,
    pub(crate) prec: i64,
}

#[derive(Clone, Debug)]
pub(crate) struct Laurent {
    pub(crate) start: i64,
    pub(crate) coeffs: Vec<ResidueElement>,
    pub(crate) prec: i64,
}

#[derive(Clone, Debug)]
pub(crate) enum Repr {
    Mixed(Mixed),
    Laurent(Laurent),
}

/// An element of a local field with explicit precision.
#[derive(Clone)]
pub struct LocalElement {
    pub(crate) field: Field,
    pub(crate) repr: Repr,
}

// ---------------------------------------------------------------------------
// characteristic 0 kernels

fn vp_int(ctx: &FieldContext, x: &BigInt) -> i64 {
    if x.is_zero() {
        return i64::MAX;
    }
    if ctx.p == 2 {
        return x.trailing_zeros().unwrap_or(0) as i64;
    }
    let mut n = 0;
    let mut y = x.clone();
    loop {
        let (q, r) = y.div_rem(&ctx.pbig);
        if !r.is_zero() {
            return n;
        }
        y = q;
        n += 1;
    }
}

impl FieldContext {
    fn e0(&self) -> usize {
        self.e.expect("characteristic 0") as usize
    }

    pub(crate) fn body_len(&self) -> usize {
        self.e0() * self.f
    }

    /// Reduce, strip p-powers, canonicalise zero.
    pub(crate) fn m_normalize(&self, mut shift: i64, mut body: Vec<BigInt>, prec: i64) -> Mixed {
        let e = self.e0() as i64;
        let f = self.f;
        if prec < EXACT {
            let pb = prec - e * shift;
            for (idx, c) in body.iter_mut().enumerate() {
                let i = (idx / f) as i64;
                let n = Integer::div_ceil(&(pb - i), &e);
                if n <= 0 {
                    *c = BigInt::zero();
                } else {
                    *c = c.mod_floor(&self.ppow(n as u32));
                }
            }
        }
        if body.iter().all(|c| c.is_zero()) {
            return Mixed {
                shift: 0,
                body,
                prec,
            };
        }
        loop {
            let all_div = body.iter().all(|c| (c % &self.pbig).is_zero());
            if !all_div {
                break;
            }
            for c in body.iter_mut() {
                *c /= &self.pbig;
            }
            shift += 1;
        }
        Mixed { shift, body, prec }
    }

    fn w_mul_acc(&self, acc: &mut [BigInt], a: &[BigInt], b: &[BigInt]) {
        let f = self.f;
        if f == 1 {
            acc[0] += &a[0] * &b[0];
            return;
        }
        let mut prod = vec![BigInt::zero(); 2 * f - 1];
        for i in 0..f {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..f {
                if !b[j].is_zero() {
                    prod[i + j] += &a[i] * &b[j];
                }
            }
        }
        for d in (f..2 * f - 1).rev() {
            let c = std::mem::take(&mut prod[d]);
            if c.is_zero() {
                continue;
            }
            for s in 0..f {
                if !self.unram_mod[s].is_zero() {
                    prod[d - f + s] -= &c * &self.unram_mod[s];
                }
            }
        }
        for s in 0..f {
            acc[s] += &prod[s];
        }
    }

    pub(crate) fn body_mul(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let e = self.e0();
        let f = self.f;
        let mut prod = vec![BigInt::zero(); (2 * e - 1) * f];
        for i in 0..e {
            let ai = &a[i * f..(i + 1) * f];
            if ai.iter().all(|c| c.is_zero()) {
                continue;
            }
            for j in 0..e {
                let bj = &b[j * f..(j + 1) * f];
                if bj.iter().all(|c| c.is_zero()) {
                    continue;
                }
                let (lo, hi) = ((i + j) * f, (i + j + 1) * f);
                self.w_mul_acc(&mut prod[lo..hi], ai, bj);
            }
        }
        // π^e = -Σ_{j<e} E_j π^j
        for d in (e..2 * e - 1).rev() {
            let c: Vec<BigInt> = prod[d * f..(d + 1) * f].to_vec();
            if c.iter().all(|x| x.is_zero()) {
                continue;
            }
            for j in 0..e {
                let ej = &self.eis[j];
                if ej.is_zero() {
                    continue;
                }
                let base = (d - e + j) * f;
                for s in 0..f {
                    prod[base + s] -= &c[s] * ej;
                }
            }
        }
        prod.truncate(e * f);
        prod
    }

    fn m_val(&self, x: &Mixed) -> Option<i64> {
        let e = self.e0() as i64;
        let f = self.f;
        let mut best: Option<i64> = None;
        for (i, chunk) in x.body.chunks(f).enumerate() {
            let vp = chunk.iter().map(|c| vp_int(self, c)).min().unwrap();
            if vp == i64::MAX {
                continue;
            }
            let v = e * vp + i as i64;
            best = Some(best.map_or(v, |b: i64| b.min(v)));
        }
        best.map(|b| b + e * x.shift)
    }

    fn m_add(&self, a: &Mixed, b: &Mixed) -> Mixed {
        let prec = a.prec.min(b.prec);
        let a_zero = a.body.iter().all(|c| c.is_zero());
        let b_zero = b.body.iter().all(|c| c.is_zero());
        if a_zero {
            return self.m_normalize(b.shift, b.body.clone(), prec);
        }
        if b_zero {
            return self.m_normalize(a.shift, a.body.clone(), prec);
        }
        let s = a.shift.min(b.shift);
        let sa = self.ppow((a.shift - s) as u32);
        let sb = self.ppow((b.shift - s) as u32);
        let body = a
            .body
            .iter()
            .zip(&b.body)
            .map(|(x, y)| x * &sa + y * &sb)
            .collect();
        self.m_normalize(s, body, prec)
    }

    fn m_neg(&self, a: &Mixed) -> Mixed {
        let body = a.body.iter().map(|c| -c).collect();
        self.m_normalize(a.shift, body, a.prec)
    }

    fn m_mul(&self, a: &Mixed, b: &Mixed) -> Mixed {
        let va = self.m_val(a).unwrap_or(a.prec);
        let vb = self.m_val(b).unwrap_or(b.prec);
        let prec = padd(a.prec, vb).min(padd(b.prec, va));
        if self.m_val(a).is_none() || self.m_val(b).is_none() {
            return self.m_normalize(0, vec![BigInt::zero(); self.body_len()], prec);
        }
        let body = self.body_mul(&a.body, &b.body);
        self.m_normalize(a.shift + b.shift, body, prec)
    }

    /// Body of `π^n`, `0 ≤ n < e` and `n = e` handled by multiplication.
    fn pi_body_power(&self, n: usize) -> Vec<BigInt> {
        let e = self.e0();
        let f = self.f;
        let mut acc = vec![BigInt::zero(); e * f];
        acc[0] = BigInt::one();
        if n == 0 {
            return acc;
        }
        let pi = self.pi_body();
        for _ in 0..n {
            acc = self.body_mul(&acc, &pi);
        }
        acc
    }

    pub(crate) fn pi_body(&self) -> Vec<BigInt> {
        let e = self.e0();
        let f = self.f;
        let mut pi = vec![BigInt::zero(); e * f];
        if e == 1 {
            pi[0] = -self.eis[0].clone();
        } else {
            pi[f] = BigInt::one();
        }
        pi
    }

    /// Inverse of a unit body to relative precision `rel`.
    fn unit_body_inverse(&self, body: &[BigInt], rel: i64) -> Result<Mixed> {
        let k = &self.residue_field;
        let f = self.f;
        let res = k.from_coords(
            &body[..f]
                .iter()
                .map(|c| c.mod_floor(&self.pbig).try_into().unwrap_or(0i64))
                .collect::<Vec<_>>(),
        );
        let r_inv = k.inv(&res)?;
        let b = self.m_normalize(0, body.to_vec(), rel);
        let mut y_body = vec![BigInt::zero(); self.body_len()];
        for s in 0..f {
            y_body[s] = BigInt::from(r_inv.coords(f)[s]);
        }
        let mut y = self.m_normalize(0, y_body, rel);
        let two = self.m_from_int(2, rel);
        let mut iters = 0;
        loop {
            let by = self.m_mul(&b, &y);
            let err = self.m_add(&by, &self.m_neg(&self.m_from_int(1, rel)));
            if self.m_val(&err).is_none() {
                return Ok(Mixed {
                    shift: y.shift,
                    body: y.body,
                    prec: rel,
                });
            }
            y = self.m_mul(&y, &self.m_add(&two, &self.m_neg(&by)));
            y.prec = rel;
            y = self.m_normalize(y.shift, y.body, rel);
            iters += 1;
            if iters > 128 {
                return Err(Error::internal("Newton inversion failed to converge"));
            }
        }
    }

    fn m_from_int(&self, n: i64, prec: i64) -> Mixed {
        let mut body = vec![BigInt::zero(); self.body_len()];
        body[0] = BigInt::from(n);
        self.m_normalize(0, body, prec)
    }

    fn m_inv(&self, x: &Mixed) -> Result<Mixed> {
        let v = self
            .m_val(x)
            .ok_or_else(|| Error::precision("inverse of an element indistinguishable from zero"))?;
        let e = self.e0() as i64;
        let rel = if x.prec >= EXACT {
            self.default_precision
        } else {
            x.prec - v
        };
        if rel <= 0 {
            return Err(Error::precision(
                "inverse needs precision above the valuation",
            ));
        }
        let r = v - e * x.shift;
        debug_assert!((0..e).contains(&r));
        let (unit_body, extra_shift, pi_factor) = if r == 0 {
            (x.body.clone(), 0, None)
        } else {
            let pf = self.pi_body_power((e - r) as usize);
            let z = self.body_mul(&x.body, &pf);
            let w: Vec<BigInt> = z
                .iter()
                .map(|c| {
                    debug_assert!((c % &self.pbig).is_zero());
                    c / &self.pbig
                })
                .collect();
            (w, 1, Some(pf))
        };
        let winv = self.unit_body_inverse(&unit_body, rel + e)?;
        let mut body = winv.body.clone();
        let mut shift = winv.shift - x.shift - extra_shift;
        if let Some(pf) = pi_factor {
            body = self.body_mul(&body, &pf);
        }
        let out_prec = if x.prec >= EXACT {
            -v + rel
        } else {
            x.prec - 2 * v
        };
        // body may now contain p-divisible parts; normalize handles it.
        let m = self.m_normalize(shift, std::mem::take(&mut body), out_prec);
        shift = m.shift;
        Ok(Mixed {
            shift,
            body: m.body,
            prec: out_prec,
        })
    }

    /// Leading ("angular") coefficient of a nonzero element in k.
    fn m_leading(&self, x: &Mixed) -> Option<ResidueElement> {
        let e = self.e0() as i64;
        let f = self.f;
        let mut best: Option<(i64, usize, i64)> = None;
        for (i, chunk) in x.body.chunks(f).enumerate() {
            let vp = chunk.iter().map(|c| vp_int(self, c)).min().unwrap();
            if vp == i64::MAX {
                continue;
            }
            let v = e * vp + i as i64;
            if best.map_or(true, |(bv, _, _)| v < bv) {
                best = Some((v, i, vp));
            }
        }
        let (_, i, a) = best?;
        let k = &self.residue_field;
        let scale = self.ppow(a as u32);
        let coords: Vec<i64> = x.body[i * f..(i + 1) * f]
            .iter()
            .map(|c| {
                let q = c / &scale;
                q.mod_floor(&self.pbig).try_into().unwrap_or(0i64)
            })
            .collect();
        let w = k.from_coords(&coords);
        let ratio = k.from_int(self.p_over_pi_e_res as i64);
        let exp = a + x.shift;
        let factor = if exp >= 0 {
            k.pow(&ratio, exp as u64)
        } else {
            k.pow(&k.inv(&ratio).expect("nonzero"), (-exp) as u64)
        };
        Some(k.mul(&w, &factor))
    }
}

// ---------------------------------------------------------------------------
// characteristic p kernels

impl FieldContext {
    pub(crate) fn l_normalize(
        &self,
        mut start: i64,
        mut coeffs: Vec<ResidueElement>,
        prec: i64,
    ) -> Laurent {
        if prec < EXACT {
            let keep = (prec - start).max(0) as usize;
            coeffs.truncate(keep);
        }
        let lead = coeffs.iter().position(|c| !c.is_zero());
        match lead {
            None => Laurent {
                start: 0,
                coeffs: Vec::new(),
                prec,
            },
            Some(l) => {
                coeffs.drain(..l);
                start += l as i64;
                if prec >= EXACT {
                    while coeffs.last().is_some_and(|c| c.is_zero()) {
                        coeffs.pop();
                    }
                }
                Laurent {
                    start,
                    coeffs,
                    prec,
                }
            }
        }
    }

    fn l_val(&self, x: &Laurent) -> Option<i64> {
        if x.coeffs.is_empty() {
            None
        } else {
            Some(x.start)
        }
    }

    fn l_add(&self, a: &Laurent, b: &Laurent, negate_b: bool) -> Laurent {
        let k = &self.residue_field;
        let prec = a.prec.min(b.prec);
        if b.coeffs.is_empty() {
            return self.l_normalize(a.start, a.coeffs.clone(), prec);
        }
        if a.coeffs.is_empty() {
            let c = if negate_b {
                b.coeffs.iter().map(|x| k.neg(x)).collect()
            } else {
                b.coeffs.clone()
            };
            return self.l_normalize(b.start, c, prec);
        }
        let start = a.start.min(b.start);
        let end_a = a.start + a.coeffs.len() as i64;
        let end_b = b.start + b.coeffs.len() as i64;
        let mut end = end_a.max(end_b);
        if prec < EXACT {
            end = end.min(prec);
        }
        let len = (end - start).max(0) as usize;
        let mut out = vec![k.zero(); len];
        for (i, c) in a.coeffs.iter().enumerate() {
            let idx = (a.start - start) as usize + i;
            if idx < len {
                out[idx] = *c;
            }
        }
        for (i, c) in b.coeffs.iter().enumerate() {
            let idx = (b.start - start) as usize + i;
            if idx < len {
                out[idx] = if negate_b {
                    k.sub(&out[idx], c)
                } else {
                    k.add(&out[idx], c)
                };
            }
        }
        self.l_normalize(start, out, prec)
    }

    fn l_mul(&self, a: &Laurent, b: &Laurent) -> Laurent {
        let k = &self.residue_field;
        let va = self.l_val(a).unwrap_or(a.prec);
        let vb = self.l_val(b).unwrap_or(b.prec);
        let prec = padd(a.prec, vb).min(padd(b.prec, va));
        if a.coeffs.is_empty() || b.coeffs.is_empty() {
            return self.l_normalize(0, Vec::new(), prec);
        }
        let start = a.start + b.start;
        let mut len = a.coeffs.len() + b.coeffs.len() - 1;
        if prec < EXACT {
            len = len.min((prec - start).max(0) as usize);
        }
        let mut out = vec![k.zero(); len];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() || i >= len {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                if !y.is_zero() {
                    out[i + j] = k.add(&out[i + j], &k.mul(x, y));
                }
            }
        }
        self.l_normalize(start, out, prec)
    }

    fn l_inv(&self, x: &Laurent) -> Result<Laurent> {
        let k = &self.residue_field;
        let v = self
            .l_val(x)
            .ok_or_else(|| Error::precision("inverse of a series indistinguishable from zero"))?;
        if x.prec >= EXACT && x.coeffs.len() == 1 {
            let c = k.inv(&x.coeffs[0])?;
            return Ok(Laurent {
                start: -v,
                coeffs: vec![c],
                prec: EXACT,
            });
        }
        let rel = if x.prec >= EXACT {
            self.default_precision
        } else {
            x.prec - v
        };
        if rel <= 0 {
            return Err(Error::precision(
                "inverse needs precision above the valuation",
            ));
        }
        let n = rel as usize;
        let a0_inv = k.inv(&x.coeffs[0])?;
        let mut out = vec![k.zero(); n];
        out[0] = a0_inv;
        for m in 1..n {
            let mut acc = k.zero();
            for j in 1..=m.min(x.coeffs.len() - 1) {
                acc = k.add(&acc, &k.mul(&x.coeffs[j], &out[m - j]));
            }
            out[m] = k.neg(&k.mul(&acc, &a0_inv));
        }
        Ok(self.l_normalize(-v, out, -v + rel))
    }
}

// ---------------------------------------------------------------------------
// public surface

impl LocalElement {
    pub(crate) fn from_repr(field: &Field, repr: Repr) -> Self {
        LocalElement {
            field: field.clone(),
            repr,
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn zero(field: &Field) -> Self {
        Self::from_int(field, 0)
    }

    pub fn one(field: &Field) -> Self {
        Self::from_int(field, 1)
    }

    /// An exact rational integer (characteristic p: its residue mod p).
    pub fn from_int(field: &Field, n: i64) -> Self {
        let repr = if field.is_char_zero() {
            Repr::Mixed(field.m_from_int(n, EXACT))
        } else {
            let c = field.residue_field.from_int(n);
            Repr::Laurent(field.l_normalize(0, vec![c], EXACT))
        };
        Self::from_repr(field, repr)
    }

    pub fn from_bigint(field: &Field, n: &BigInt) -> Self {
        if field.is_char_zero() {
            let mut body = vec![BigInt::zero(); field.body_len()];
            body[0] = n.clone();
            Self::from_repr(field, Repr::Mixed(field.m_normalize(0, body, EXACT)))
        } else {
            let r: i64 = n.mod_floor(&field.pbig).try_into().unwrap();
            Self::from_int(field, r)
        }
    }

    /// The standard lift of a residue: coefficients in `[0, p)` on the power
    /// basis of the unramified ring (characteristic p: the constant series).
    pub fn lift(field: &Field, r: &ResidueElement) -> Self {
        if field.is_char_zero() {
            let mut body = vec![BigInt::zero(); field.body_len()];
            for (s, &c) in r.coords(field.f).iter().enumerate() {
                body[s] = BigInt::from(c);
            }
            Self::from_repr(field, Repr::Mixed(field.m_normalize(0, body, EXACT)))
        } else {
            Self::from_repr(field, Repr::Laurent(field.l_normalize(0, vec![*r], EXACT)))
        }
    }

    /// The fixed uniformiser: the root of the Eisenstein polynomial, or `t`.
    pub fn uniformizer(field: &Field) -> Self {
        if field.is_char_zero() {
            Self::from_repr(
                field,
                Repr::Mixed(field.m_normalize(0, field.pi_body(), EXACT)),
            )
        } else {
            let one = field.residue_field.one();
            Self::from_repr(field, Repr::Laurent(field.l_normalize(1, vec![one], EXACT)))
        }
    }

    /// `π^n` for any integer `n`.
    pub fn uniformizer_pow(field: &Field, n: i64) -> Result<Self> {
        if n >= 0 {
            Ok(Self::uniformizer(field).pow_u(n as u64))
        } else {
            Ok(field.pi_inverse().pow_u((-n) as u64))
        }
    }

    /// `Σ coeffs[i] t^{start+i}` (characteristic p only).
    pub fn laurent(
        field: &Field,
        start: i64,
        coeffs: Vec<ResidueElement>,
        prec: i64,
    ) -> Result<Self> {
        if field.is_char_zero() {
            return Err(Error::Domain("Laurent series need characteristic p".into()));
        }
        Ok(Self::from_repr(
            field,
            Repr::Laurent(field.l_normalize(start, coeffs, prec)),
        ))
    }

    /// `r · π^n` with the standard lift of `r`.
    pub fn monomial(field: &Field, r: &ResidueElement, n: i64) -> Result<Self> {
        if !field.is_char_zero() {
            return Self::laurent(field, n, vec![*r], EXACT);
        }
        Ok(&Self::lift(field, r) * &Self::uniformizer_pow(field, n)?)
    }

    pub fn precision(&self) -> i64 {
        match &self.repr {
            Repr::Mixed(m) => m.prec,
            Repr::Laurent(l) => l.prec,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.precision() >= EXACT
    }

    /// Valuation; `None` when the element is zero to its precision.
    pub fn val(&self) -> Option<i64> {
        match &self.repr {
            Repr::Mixed(m) => self.field.m_val(m),
            Repr::Laurent(l) => self.field.l_val(l),
        }
    }

    /// Valuation, or an error naming `what` when undetermined.
    pub fn val_checked(&self, what: &str) -> Result<i64> {
        self.val().ok_or_else(|| {
            Error::precision(format!(
                "{what}: valuation undetermined at precision {}",
                self.precision()
            ))
        })
    }

    pub fn is_zero(&self) -> bool {
        self.val().is_none()
    }

    /// Reduce the precision to at most `prec`.
    pub fn with_precision(&self, prec: i64) -> Self {
        let prec = prec.min(self.precision());
        let repr = match &self.repr {
            Repr::Mixed(m) => Repr::Mixed(self.field.m_normalize(m.shift, m.body.clone(), prec)),
            Repr::Laurent(l) => {
                Repr::Laurent(self.field.l_normalize(l.start, l.coeffs.clone(), prec))
            }
        };
        Self::from_repr(&self.field, repr)
    }

    /// Leading coefficient in k of a nonzero element.
    pub fn leading_coefficient(&self) -> Option<ResidueElement> {
        match &self.repr {
            Repr::Mixed(m) => self.field.m_leading(m),
            Repr::Laurent(l) => l.coeffs.first().copied(),
        }
    }

    /// Coefficient of `π^m` in the expansion, for `m ≤ v(x)` only; returns 0
    /// when `v(x) > m`.
    pub fn coefficient_at(&self, m: i64) -> Result<ResidueElement> {
        let k = &self.field.residue_field;
        match self.val() {
            None if self.precision() > m => Ok(k.zero()),
            None => Err(Error::precision(format!(
                "coefficient of π^{m} unknown at precision {}",
                self.precision()
            ))),
            Some(v) if v > m => Ok(k.zero()),
            Some(v) if v == m => Ok(self.leading_coefficient().unwrap()),
            Some(v) => Err(Error::internal(format!(
                "coefficient at {m} requested below the valuation {v}"
            ))),
        }
    }

    /// Coefficient of `t^m` of a Laurent series at any position below the
    /// precision.
    pub fn coefficient_window(&self, m: i64) -> Result<ResidueElement> {
        let Repr::Laurent(l) = &self.repr else {
            return Err(Error::Domain(
                "coefficient window needs characteristic p".into(),
            ));
        };
        if m >= l.prec {
            return Err(Error::precision(format!(
                "coefficient of t^{m} unknown at precision {}",
                l.prec
            )));
        }
        let k = &self.field.residue_field;
        Ok(usize::try_from(m - l.start)
            .ok()
            .and_then(|i| l.coeffs.get(i).copied())
            .unwrap_or_else(|| k.zero()))
    }

    /// Image in k of an integral element.
    pub fn residue(&self) -> Result<ResidueElement> {
        self.coefficient_at(0)
    }

    pub fn inv(&self) -> Result<Self> {
        let repr = match &self.repr {
            Repr::Mixed(m) => Repr::Mixed(self.field.m_inv(m)?),
            Repr::Laurent(l) => Repr::Laurent(self.field.l_inv(l)?),
        };
        Ok(Self::from_repr(&self.field, repr))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    pub fn pow_u(&self, mut n: u64) -> Self {
        if !self.field.is_char_zero() && n == self.field.p as u64 {
            return self.frobenius_power();
        }
        let mut acc = Self::one(&self.field);
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn pow(&self, n: i64) -> Result<Self> {
        if n >= 0 {
            Ok(self.pow_u(n as u64))
        } else {
            Ok(self.inv()?.pow_u((-n) as u64))
        }
    }

    /// `x^p` in characteristic p, computed coefficient-wise.
    fn frobenius_power(&self) -> Self {
        let Repr::Laurent(l) = &self.repr else {
            unreachable!()
        };
        let k = &self.field.residue_field;
        let p = self.field.p as i64;
        let mut coeffs = vec![k.zero(); (l.coeffs.len().max(1) - 1) * p as usize + 1];
        for (i, c) in l.coeffs.iter().enumerate() {
            coeffs[i * p as usize] = k.frobenius(c);
        }
        let prec = if l.prec >= EXACT { EXACT } else { l.prec * p };
        Self::from_repr(
            &self.field,
            Repr::Laurent(self.field.l_normalize(l.start * p, coeffs, prec)),
        )
    }

    /// Formal derivative `d/dt` (characteristic p only).
    pub fn derivative(&self) -> Result<Self> {
        let Repr::Laurent(l) = &self.repr else {
            return Err(Error::Domain("derivative needs characteristic p".into()));
        };
        let k = &self.field.residue_field;
        if l.coeffs.is_empty() {
            return Ok(self.with_precision(padd(l.prec, -1)));
        }
        let coeffs: Vec<ResidueElement> = l
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                k.scale(
                    c,
                    (l.start + i as i64).rem_euclid(self.field.p as i64) as u32,
                )
            })
            .collect();
        let prec = if l.prec >= EXACT { EXACT } else { l.prec - 1 };
        Ok(Self::from_repr(
            &self.field,
            Repr::Laurent(self.field.l_normalize(l.start - 1, coeffs, prec)),
        ))
    }

    /// Coefficients `(start, coeffs)` of a Laurent series.
    pub fn laurent_terms(&self) -> Option<(i64, &[ResidueElement])> {
        match &self.repr {
            Repr::Laurent(l) => Some((l.start, &l.coeffs)),
            Repr::Mixed(_) => None,
        }
    }

    /// π-adic digits `(n, a_n)` for `n` from the valuation up to the
    /// precision, using the standard lifts of residues. Exact elements are
    /// expanded through their last nonzero digit, or `default_precision`
    /// digits past the valuation when the expansion is infinite.
    pub fn digits(&self) -> Result<Vec<(i64, ResidueElement)>> {
        Ok(self.expansion()?.0)
    }

    /// Digits plus the cut point when an exact expansion was truncated.
    fn expansion(&self) -> Result<(Vec<(i64, ResidueElement)>, Option<i64>)> {
        match &self.repr {
            Repr::Laurent(l) => Ok((
                l.coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(i, c)| (l.start + i as i64, *c))
                    .collect(),
                None,
            )),
            Repr::Mixed(_) => {
                let mut out = Vec::new();
                let mut rest = self.clone();
                let limit = if self.is_exact() {
                    self.val().map(|v| v + self.field.default_precision)
                } else {
                    Some(self.precision())
                };
                while let Some(v) = rest.val() {
                    if limit.is_some_and(|l| v >= l) {
                        let cut = if self.is_exact() { limit } else { None };
                        return Ok((out, cut));
                    }
                    let a = rest.leading_coefficient().unwrap();
                    out.push((v, a));
                    rest = &rest - &Self::monomial(&self.field, &a, v)?;
                }
                Ok((out, None))
            }
        }
    }

    /// Integer value modulo `p^n` (unramified, f = 1 fields only).
    pub fn to_int_mod(&self, n: u32) -> Result<BigInt> {
        let Repr::Mixed(m) = &self.repr else {
            return Err(Error::Unsupported(
                "integer residue needs characteristic 0".into(),
            ));
        };
        if self.field.e != Some(1) || self.field.f != 1 {
            return Err(Error::Unsupported("integer residue needs e = f = 1".into()));
        }
        if m.shift < 0 {
            return Err(Error::Domain("element is not integral".into()));
        }
        let modulus = self.field.ppow(n);
        if self.precision() < n as i64 {
            return Err(Error::precision(
                "not enough digits for the requested residue",
            ));
        }
        let v = &m.body[0] * self.field.ppow(m.shift as u32);
        Ok(v.mod_floor(&modulus))
    }

    /// Equality up to the smaller of the two precisions.
    pub fn same_to_precision(&self, other: &Self) -> bool {
        (self - other).is_zero()
    }

    pub fn random_integral<R: Rng + ?Sized>(field: &Field, rng: &mut R, prec: i64) -> Self {
        let k = &field.residue_field;
        if field.is_char_zero() {
            let f = field.f;
            let e = field.e.unwrap();
            let digits = Integer::div_ceil(&prec, &e) as u32;
            let body: Vec<BigInt> = (0..e as usize * f)
                .map(|_| {
                    let mut acc = BigInt::zero();
                    for _ in 0..digits {
                        acc = acc * &field.pbig + BigInt::from(rng.gen_range(0..field.p));
                    }
                    acc
                })
                .collect();
            Self::from_repr(field, Repr::Mixed(field.m_normalize(0, body, prec)))
        } else {
            let coeffs = (0..prec.max(0)).map(|_| k.random(rng)).collect();
            Self::from_repr(field, Repr::Laurent(field.l_normalize(0, coeffs, prec)))
        }
    }

    /// Random exact Laurent polynomial with support in `[lo, hi]`.
    pub fn random_laurent<R: Rng + ?Sized>(
        field: &Field,
        rng: &mut R,
        lo: i64,
        hi: i64,
    ) -> Result<Self> {
        let k = &field.residue_field;
        let coeffs = (lo..=hi).map(|_| k.random(rng)).collect();
        Self::laurent(field, lo, coeffs, EXACT)
    }
}

/// Multiplicative section `k^× → o^×`: the unique `(q-1)`-th root of unity
/// with residue `r`.
pub fn teichmuller(field: &Field, r: &ResidueElement) -> Result<LocalElement> {
    if r.is_zero() {
        return Err(Error::Domain("Teichmüller lift of 0".into()));
    }
    let x = LocalElement::lift(field, r);
    if !field.is_char_zero() {
        return Ok(x);
    }
    let q1 = field.q - 1;
    if q1 == 1 {
        return Ok(LocalElement::one(field));
    }
    // Newton on x^{q-1} = 1; (q-1) is a unit.
    let prec = field.default_precision;
    let mut x = x.with_precision(prec);
    let scale = LocalElement::from_int(field, q1 as i64);
    let one = LocalElement::one(field);
    for _ in 0..64 {
        let xm = x.pow_u(q1 - 1);
        let f = &(&xm * &x) - &one;
        if f.is_zero() {
            return Ok(x);
        }
        x = &x - &f.div(&(&scale * &xm))?;
    }
    Err(Error::precision("Teichmüller iteration did not converge"))
}

/// Trace `k → F_p`.
pub fn residue_trace(field: &Field, r: &ResidueElement) -> u32 {
    field.residue_field.trace(r)
}

/// `S(res(x · u'/u · dt))` in characteristic p.
pub fn series_residue_and_dlog(x: &LocalElement, u: &LocalElement) -> Result<u32> {
    let field = x.field();
    if field.is_char_zero() {
        return Err(Error::Domain(
            "residue pairing needs characteristic p".into(),
        ));
    }
    if x.is_zero() && x.is_exact() {
        return Ok(0);
    }
    let dlog = u.derivative()?.div(u)?;
    let w = x * &dlog;
    let c = w.coefficient_window(-1)?;
    Ok(field.residue_field.trace(&c))
}

impl Add for &LocalElement {
    type Output = LocalElement;
    fn add(self, rhs: &LocalElement) -> LocalElement {
        let ctx = &self.field;
        let repr = match (&self.repr, &rhs.repr) {
            (Repr::Mixed(a), Repr::Mixed(b)) => Repr::Mixed(ctx.m_add(a, b)),
            (Repr::Laurent(a), Repr::Laurent(b)) => Repr::Laurent(ctx.l_add(a, b, false)),
            _ => panic!("elements of different fields"),
        };
        LocalElement::from_repr(ctx, repr)
    }
}

impl Sub for &LocalElement {
    type Output = LocalElement;
    fn sub(self, rhs: &LocalElement) -> LocalElement {
        let ctx = &self.field;
        let repr = match (&self.repr, &rhs.repr) {
            (Repr::Mixed(a), Repr::Mixed(b)) => Repr::Mixed(ctx.m_add(a, &ctx.m_neg(b))),
            (Repr::Laurent(a), Repr::Laurent(b)) => Repr::Laurent(ctx.l_add(a, b, true)),
            _ => panic!("elements of different fields"),
        };
        LocalElement::from_repr(ctx, repr)
    }
}

impl Mul for &LocalElement {
    type Output = LocalElement;
    fn mul(self, rhs: &LocalElement) -> LocalElement {
        let ctx = &self.field;
        let repr = match (&self.repr, &rhs.repr) {
            (Repr::Mixed(a), Repr::Mixed(b)) => Repr::Mixed(ctx.m_mul(a, b)),
            (Repr::Laurent(a), Repr::Laurent(b)) => Repr::Laurent(ctx.l_mul(a, b)),
            _ => panic!("elements of different fields"),
        };
        LocalElement::from_repr(ctx, repr)
    }
}

impl Neg for &LocalElement {
    type Output = LocalElement;
    fn neg(self) -> LocalElement {
        let ctx = &self.field;
        let repr = match &self.repr {
            Repr::Mixed(a) => Repr::Mixed(ctx.m_neg(a)),
            Repr::Laurent(a) => {
                let k = &ctx.residue_field;
                Repr::Laurent(Laurent {
                    start: a.start,
                    coeffs: a.coeffs.iter().map(|c| k.neg(c)).collect(),
                    prec: a.prec,
                })
            }
        };
        LocalElement::from_repr(ctx, repr)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for LocalElement {
            type Output = LocalElement;
            fn $m(self, rhs: LocalElement) -> LocalElement {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&LocalElement> for LocalElement {
            type Output = LocalElement;
            fn $m(self, rhs: &LocalElement) -> LocalElement {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for LocalElement {
    type Output = LocalElement;
    fn neg(self) -> LocalElement {
        -&self
    }
}

impl fmt::Display for LocalElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let var = if self.field.is_char_zero() { "pi" } else { "t" };
        let deg = self.field.f;
        let (digits, truncated) = self.expansion().map_err(|_| fmt::Error)?;
        let mut terms = Vec::new();
        for (n, a) in digits {
            for (s, &c) in a.coords(deg).iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let mut factors = Vec::new();
                if c != 1 {
                    factors.push(c.to_string());
                }
                match s {
                    0 => {}
                    1 => factors.push("u".into()),
                    _ => factors.push(format!("u^{s}")),
                }
                match n {
                    0 => {}
                    1 => factors.push(var.into()),
                    _ => factors.push(format!("{var}^{n}")),
                }
                if factors.is_empty() {
                    factors.push("1".into());
                }
                terms.push(factors.join("*"));
            }
        }
        if terms.is_empty() {
            terms.push("0".into());
        }
        if !self.is_exact() {
            terms.push(format!("O({var}^{})", self.precision()));
        } else if let Some(cut) = truncated {
            terms.push(format!("O({var}^{cut})"));
        }
        write!(f, "{}", terms.join(" + "))
    }
}

impl fmt::Debug for LocalElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn q(s: &str) -> Field {
        Field::parse(s).unwrap()
    }

    #[test]
    fn integers_and_valuations() {
        let k = q("Qp p=3 f=1");
        assert_eq!(LocalElement::from_int(&k, 18).val(), Some(2));
        assert_eq!(LocalElement::from_int(&k, 0).val(), None);
        let x = LocalElement::from_int(&k, 7);
        let y = x.inv().unwrap();
        assert!((&x * &y).same_to_precision(&LocalElement::one(&k)));
        assert_eq!(y.to_int_mod(4).unwrap(), BigInt::from(58)); // 7 * 58 = 406 = 1 + 5·81
    }

    #[test]
    fn ramified_uniformizer() {
        let k = q("Qp p=3 f=1 eis=3,3,1");
        let pi = LocalElement::uniformizer(&k);
        assert_eq!(pi.val(), Some(1));
        assert_eq!(LocalElement::from_int(&k, 3).val(), Some(2));
        let pinv = LocalElement::uniformizer_pow(&k, -3).unwrap();
        assert_eq!(pinv.val(), Some(-3));
        let one = &pinv * &pi.pow_u(3);
        assert!(one.same_to_precision(&LocalElement::one(&k)));
        // π² = -3π - 3
        let lhs = pi.pow_u(2);
        let rhs = &(&LocalElement::from_int(&k, -3) * &pi) - &LocalElement::from_int(&k, 3);
        assert!(lhs.same_to_precision(&rhs));
    }

    #[test]
    fn leading_coefficients() {
        let k = q("Qp p=3 f=1 eis=3,3,1");
        // 3 = -π² - 3π ⇒ 3 ≡ -π² leading coefficient 2.
        let three = LocalElement::from_int(&k, 3);
        assert_eq!(three.leading_coefficient().unwrap().coords(1), vec![2]);
        let k2 = q("Qp p=5 f=2");
        let g = LocalElement::lift(&k2, &k2.residue_field.generator());
        let x = &g * &LocalElement::from_int(&k2, 25);
        assert_eq!(x.val(), Some(2));
        assert_eq!(
            x.leading_coefficient().unwrap(),
            k2.residue_field.generator()
        );
    }

    #[test]
    fn unramified_inverse() {
        let k = q("Qp p=2 f=3");
        let mut rng = rand::rngs::mock::StepRng::new(7, 13);
        for _ in 0..10 {
            let x = &LocalElement::random_integral(&k, &mut rng, 30) + &LocalElement::one(&k);
            if x.val() != Some(0) {
                continue;
            }
            let y = x.inv().unwrap();
            assert!((&x * &y).same_to_precision(&LocalElement::one(&k)));
        }
    }

    #[test]
    fn laurent_arithmetic() {
        let k = q("Fq((t)) p=3 f=2");
        let t = LocalElement::uniformizer(&k);
        let one = LocalElement::one(&k);
        let x = &one + &t;
        let y = x.inv().unwrap();
        assert!((&x * &y).same_to_precision(&one));
        let xp = x.pow_u(3);
        assert!(xp.same_to_precision(&(&one + &t.pow_u(3))));
        assert!(xp.is_exact());
        let d = t.pow_u(4).derivative().unwrap();
        assert!(d.same_to_precision(&t.pow_u(3)));
        let tinv = LocalElement::uniformizer_pow(&k, -2).unwrap();
        assert_eq!(tinv.val(), Some(-2));
    }

    #[test]
    fn digits_expand() {
        let k = q("Qp p=5 f=1");
        let x = LocalElement::from_int(&k, 1 + 3 * 25);
        let d = x.digits().unwrap();
        let flat: Vec<(i64, u32)> = d.iter().map(|(n, a)| (*n, a.coords(1)[0])).collect();
        assert_eq!(flat, vec![(0, 1), (2, 3)]);
    }
}

#[cfg(test)]
mod section_tests {
    use super::*;
    use crate::field::Field;
    use crate::literal::parse_element;

    #[test]
    fn teichmuller_lifts() {
        let k = Field::parse("Qp p=2 f=2").unwrap();
        let g = k.residue_field.generator();
        let w = teichmuller(&k, &g).unwrap();
        assert!(w.pow_u(3).same_to_precision(&LocalElement::one(&k)));
        assert_eq!(w.residue().unwrap(), g);
        let one = teichmuller(&k, &k.residue_field.one()).unwrap();
        assert!(one.same_to_precision(&LocalElement::one(&k)));
        let kp = Field::parse("Fq((t)) p=2 f=1").unwrap();
        let r = kp.residue_field.one();
        assert!(teichmuller(&kp, &r).unwrap().is_exact());
    }

    #[test]
    fn traces() {
        let k = Field::parse("Qp p=2 f=2").unwrap();
        let rf = &k.residue_field;
        assert_eq!(residue_trace(&k, &rf.one()), 0);
        assert_eq!(residue_trace(&k, &rf.generator()), 1);
    }

    #[test]
    fn schmid_examples() {
        let k = Field::parse("Fq((t)) p=2 f=1").unwrap();
        let e = |s: &str| parse_element(&k, s).unwrap();
        assert_eq!(series_residue_and_dlog(&e("1"), &e("t")).unwrap(), 1);
        assert_eq!(series_residue_and_dlog(&e("t^-1"), &e("t")).unwrap(), 0);
        assert_eq!(series_residue_and_dlog(&e("0"), &e("1+t")).unwrap(), 0);
        // 1/(1+t) = 1 + t + ..., so res(t^-1 · dt/(1+t)) = 1.
        assert_eq!(series_residue_and_dlog(&e("t^-1"), &e("1+t")).unwrap(), 1);
    }
}
