//! Degree-p cyclic extensions `K(α), α^p = a` and `K(y), y^p - y = x`.

use serde::Serialize;

use crate::class_spaces::{as_class_reduce, unit_class_reduce, AdaptedBasis, ClassStatus, Space};
use crate::element::LocalElement;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::fp_linalg::{inv_mod, FpVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionKind {
    Kummer,
    ArtinSchreier,
}

/// A line `D` of `K^×/K^{×p}` or `K/℘K`.
#[derive(Clone, Debug)]
pub struct Line {
    pub space: Space,
    pub generator: LocalElement,
    /// The level δ(D).
    pub level: i64,
    pub coords: FpVector,
}

impl Line {
    /// The line through the class of `x`.
    pub fn through(basis: &AdaptedBasis, x: &LocalElement) -> Result<Line> {
        let coords = basis.coordinates(x)?;
        Self::build(basis, x.clone(), coords)
    }

    /// The line through the class with coordinates `v`.
    pub fn from_vector(basis: &AdaptedBasis, v: &FpVector) -> Result<Line> {
        Self::build(basis, basis.element_of(v), v.clone())
    }

    fn build(basis: &AdaptedBasis, x: LocalElement, coords: FpVector) -> Result<Line> {
        if coords.is_zero() {
            return Err(Error::Domain(format!(
                "the class of {x} is trivial and spans no line"
            )));
        }
        let level = match basis.space {
            Space::Mult => basis
                .line_level(&coords)
                .ok_or_else(|| Error::Unsupported("line levels need mu_p in K".into()))?,
            Space::Add => basis.line_level(&coords).unwrap(),
        };
        Ok(Line {
            space: basis.space,
            generator: x,
            level,
            coords,
        })
    }

    /// Canonical scaling: first nonzero coordinate equal to 1.
    pub fn normalized_coords(&self) -> FpVector {
        let p = self.coords.p();
        let lead = self
            .coords
            .coords()
            .iter()
            .find(|&&c| c != 0)
            .copied()
            .unwrap_or(1);
        self.coords.scale(inv_mod(lead, p))
    }
}

/// Element `Σ c_i X^i` of E, `X` the generator.
#[derive(Clone, Debug)]
pub struct ExtElement {
    pub coeffs: Vec<LocalElement>,
}

/// A degree-p cyclic extension of K attached to a line.
#[derive(Clone, Debug)]
pub struct DegreePExtension {
    pub base: Field,
    pub kind: ExtensionKind,
    /// `a` in `X^p = a`, or `x` in `X^p = X + x`.
    pub constant: LocalElement,
    pub line: Line,
    pub is_unramified: bool,
    /// σ acts as `α ↦ ζ^s α` (Kummer).
    pub zeta_power: u32,
    zeta_s: Option<LocalElement>,
    uniformizer: ExtElement,
    break_: i64,
}

/// `K(√[p]{D})` or `K(℘^{-1}(D))`.
pub fn attach_extension(line: &Line) -> Result<DegreePExtension> {
    DegreePExtension::new(line, 1)
}

impl DegreePExtension {
    /// Extension attached to `line`, with σ twisted to use `ζ^s`.
    pub fn new(line: &Line, zeta_power: u32) -> Result<Self> {
        let base = line.generator.field().clone();
        let p = base.p;
        if zeta_power % p == 0 {
            return Err(Error::Domain("σ needs a primitive root of unity".into()));
        }
        let (kind, constant, unramified) = match line.space {
            Space::Mult => {
                if !base.is_char_zero() || !base.mu_p_present {
                    return Err(Error::Unsupported(
                        "Kummer extensions need mu_p in K (characteristic 0)".into(),
                    ));
                }
                let r = unit_class_reduce(&line.generator)?;
                if r.status == ClassStatus::Trivial {
                    return Err(Error::Domain("the line generator is a p-th power".into()));
                }
                let unram = line.level == 0;
                if unram && r.level != base.pc.unwrap() {
                    return Err(Error::internal("level-0 line outside Ū_pc"));
                }
                (ExtensionKind::Kummer, r.normalized_rep, unram)
            }
            Space::Add => {
                let r = as_class_reduce(&line.generator)?;
                if r.status == ClassStatus::Trivial {
                    return Err(Error::Domain("the line generator lies in ℘(K)".into()));
                }
                let unram = line.level == 0;
                if unram && r.level != 0 {
                    return Err(Error::internal("level-0 line outside the class of o"));
                }
                (ExtensionKind::ArtinSchreier, r.normalized_rep, unram)
            }
        };
        let zeta_s = match kind {
            ExtensionKind::Kummer => Some(base.zeta().unwrap().pow_u(zeta_power as u64)),
            ExtensionKind::ArtinSchreier => None,
        };
        let mut ext = DegreePExtension {
            base: base.clone(),
            kind,
            constant,
            line: line.clone(),
            is_unramified: unramified,
            zeta_power,
            zeta_s,
            uniformizer: ExtElement { coeffs: Vec::new() },
            break_: -1,
        };
        ext.uniformizer = ext.find_uniformizer()?;
        ext.break_ = if unramified {
            -1
        } else {
            let pi = ext.uniformizer.clone();
            let d = ext.sub(&ext.galois_apply(&pi), &pi);
            ext.val(&d)? - 1
        };
        Ok(ext)
    }

    pub fn p(&self) -> usize {
        self.base.p as usize
    }

    /// Defining polynomial, low to high.
    pub fn defining_polynomial(&self) -> Vec<LocalElement> {
        let mut poly = vec![LocalElement::zero(&self.base); self.p() + 1];
        poly[self.p()] = LocalElement::one(&self.base);
        poly[0] = -&self.constant;
        if self.kind == ExtensionKind::ArtinSchreier {
            poly[1] = LocalElement::from_int(&self.base, -1);
        }
        poly
    }

    pub fn from_base(&self, c: &LocalElement) -> ExtElement {
        let mut coeffs = vec![LocalElement::zero(&self.base); self.p()];
        coeffs[0] = c.clone();
        ExtElement { coeffs }
    }

    /// The generator α (resp. y).
    pub fn generator(&self) -> ExtElement {
        let mut coeffs = vec![LocalElement::zero(&self.base); self.p()];
        coeffs[1 % self.p()] = LocalElement::one(&self.base);
        ExtElement { coeffs }
    }

    pub fn add(&self, a: &ExtElement, b: &ExtElement) -> ExtElement {
        ExtElement {
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, a: &ExtElement, b: &ExtElement) -> ExtElement {
        ExtElement {
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect(),
        }
    }

    pub fn scale(&self, a: &ExtElement, c: &LocalElement) -> ExtElement {
        ExtElement {
            coeffs: a.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn mul(&self, a: &ExtElement, b: &ExtElement) -> ExtElement {
        let p = self.p();
        let mut prod = vec![LocalElement::zero(&self.base); 2 * p - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() && x.is_exact() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                prod[i + j] = &prod[i + j] + &(x * y);
            }
        }
        for i in (p..2 * p - 1).rev() {
            let c = std::mem::replace(&mut prod[i], LocalElement::zero(&self.base));
            match self.kind {
                ExtensionKind::Kummer => prod[i - p] = &prod[i - p] + &(&c * &self.constant),
                ExtensionKind::ArtinSchreier => {
                    prod[i - p + 1] = &prod[i - p + 1] + &c;
                    prod[i - p] = &prod[i - p] + &(&c * &self.constant);
                }
            }
        }
        prod.truncate(p);
        ExtElement { coeffs: prod }
    }

    pub fn pow(&self, a: &ExtElement, mut n: u64) -> ExtElement {
        let mut acc = self.from_base(&LocalElement::one(&self.base));
        let mut base = a.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            n >>= 1;
            if n > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Matrix of multiplication by `z` on the basis `1, X, …, X^{p-1}`.
    fn multiplication_matrix(&self, z: &ExtElement) -> Vec<Vec<LocalElement>> {
        let p = self.p();
        let x = self.generator();
        let mut col = z.clone();
        let mut m = vec![vec![LocalElement::zero(&self.base); p]; p];
        for j in 0..p {
            for i in 0..p {
                m[i][j] = col.coeffs[i].clone();
            }
            if j + 1 < p {
                col = self.mul(&col, &x);
            }
        }
        m
    }

    /// `N_{E|K}(z)` as the determinant of multiplication by `z`.
    pub fn norm(&self, z: &ExtElement) -> Result<LocalElement> {
        if z.coeffs.iter().all(|c| c.is_zero() && c.is_exact()) {
            return Err(Error::Domain("norm of zero".into()));
        }
        Ok(berkowitz_det(&self.multiplication_matrix(z)))
    }

    /// Normalized valuation of E.
    pub fn val(&self, z: &ExtElement) -> Result<i64> {
        let n = self.norm(z)?;
        let v = n.val_checked("norm")?;
        if self.is_unramified {
            if v % self.p() as i64 != 0 {
                return Err(Error::internal(
                    "norm valuation not divisible by p in an unramified extension",
                ));
            }
            Ok(v / self.p() as i64)
        } else {
            Ok(v)
        }
    }

    /// σ: `α ↦ ζ^s α` (Kummer) or `y ↦ y + 1` (Artin–Schreier).
    pub fn galois_apply(&self, z: &ExtElement) -> ExtElement {
        match self.kind {
            ExtensionKind::Kummer => {
                let zeta = self.zeta_s.as_ref().unwrap();
                let mut w = LocalElement::one(&self.base);
                let mut coeffs = Vec::with_capacity(self.p());
                for c in &z.coeffs {
                    coeffs.push(c * &w);
                    w = &w * zeta;
                }
                ExtElement { coeffs }
            }
            ExtensionKind::ArtinSchreier => {
                let p = self.p();
                let mut coeffs = vec![LocalElement::zero(&self.base); p];
                for (i, c) in z.coeffs.iter().enumerate() {
                    let mut binom: u64 = 1;
                    for (j, slot) in coeffs.iter_mut().enumerate().take(i + 1) {
                        if j > 0 {
                            binom = binom * (i - j + 1) as u64 / j as u64;
                        }
                        let b = LocalElement::from_int(&self.base, (binom % p as u64) as i64);
                        *slot = &*slot + &(c * &b);
                    }
                }
                ExtElement { coeffs }
            }
        }
    }

    /// Candidates with valuation prime to p, in a fixed order.
    fn uniformizer_candidates(&self) -> Vec<ExtElement> {
        let g = self.generator();
        let one = LocalElement::one(&self.base);
        let mut out = vec![g.clone()];
        match self.kind {
            ExtensionKind::Kummer => {
                out.push(self.sub(&g, &self.from_base(&one)));
                let zeta = self.base.zeta().unwrap();
                let mut z = zeta.clone();
                for _ in 1..self.p() {
                    out.push(self.sub(&g, &self.from_base(&z)));
                    z = &z * &zeta;
                }
            }
            ExtensionKind::ArtinSchreier => {
                for r in self.base.residue_field().elements() {
                    if !r.is_zero() {
                        out.push(
                            self.sub(&g, &self.from_base(&LocalElement::lift(&self.base, &r))),
                        );
                    }
                }
            }
        }
        out
    }

    fn find_uniformizer(&self) -> Result<ExtElement> {
        let pi_k = LocalElement::uniformizer(&self.base);
        if self.is_unramified {
            return Ok(self.from_base(&pi_k));
        }
        let p = self.p() as i64;
        for g in self.uniformizer_candidates() {
            let v = self.val(&g)?;
            if v.rem_euclid(p) == 0 {
                continue;
            }
            // a·v + b·p = 1 with a ∈ [1, p-1].
            let a = inv_mod(v.rem_euclid(p) as u32, p as u32) as i64;
            let b = (1 - a * v) / p;
            let z = self.scale(
                &self.pow(&g, a as u64),
                &LocalElement::uniformizer_pow(&self.base, b)?,
            );
            if self.val(&z)? != 1 {
                return Err(Error::internal("Bezout combination is not a uniformizer"));
            }
            return Ok(z);
        }
        Err(Error::internal(
            "no candidate of valuation prime to p; the defining polynomial may be reducible",
        ))
    }

    pub fn uniformizer(&self) -> &ExtElement {
        &self.uniformizer
    }

    /// The ramification break ε(E); −1 iff unramified.
    pub fn ramification_break(&self) -> i64 {
        self.break_
    }

    /// `v_E(σπ - π) - 1` for an arbitrary uniformizer `pi`.
    pub fn break_with(&self, pi: &ExtElement) -> Result<i64> {
        if self.val(pi)? != 1 {
            return Err(Error::Domain("not a uniformizer of E".into()));
        }
        if self.is_unramified {
            return Ok(-1);
        }
        let d = self.sub(&self.galois_apply(pi), pi);
        Ok(self.val(&d)? - 1)
    }

    /// Integral elements whose residues span the residue field of E over F_p.
    pub fn residue_generators(&self) -> Vec<ExtElement> {
        let k = self.base.residue_field();
        let lifts: Vec<ExtElement> = k
            .basis()
            .iter()
            .map(|t| self.from_base(&LocalElement::lift(&self.base, t)))
            .collect();
        if !self.is_unramified {
            return lifts;
        }
        let gamma = match self.kind {
            ExtensionKind::Kummer => {
                let c = self.base.c.unwrap();
                let shifted = self.sub(
                    &self.generator(),
                    &self.from_base(&LocalElement::one(&self.base)),
                );
                self.scale(
                    &shifted,
                    &LocalElement::uniformizer_pow(&self.base, -c).unwrap(),
                )
            }
            ExtensionKind::ArtinSchreier => self.generator(),
        };
        let mut out = Vec::new();
        let mut power = self.from_base(&LocalElement::one(&self.base));
        for _ in 0..self.p() {
            for l in &lifts {
                out.push(self.mul(l, &power));
            }
            power = self.mul(&power, &gamma);
        }
        out
    }
}

/// Division-free determinant (Berkowitz).
pub fn berkowitz_det(a: &[Vec<LocalElement>]) -> LocalElement {
    let n = a.len();
    let field = a[0][0].field().clone();
    let zero = LocalElement::zero(&field);
    let one = LocalElement::one(&field);
    // Characteristic polynomial coefficients of the leading r×r block,
    // highest degree first.
    let mut c = vec![one.clone(), -&a[0][0]];
    for r in 1..n {
        // Block [[M, S], [R, a_rr]] with M the leading r×r block.
        let s: Vec<LocalElement> = (0..r).map(|i| a[i][r].clone()).collect();
        let row: Vec<LocalElement> = (0..r).map(|j| a[r][j].clone()).collect();
        let mut col = vec![one.clone(), -&a[r][r]];
        let mut ms = s.clone();
        for _ in 0..r {
            let dot = row
                .iter()
                .zip(&ms)
                .fold(zero.clone(), |acc, (x, y)| &acc + &(x * y));
            col.push(-&dot);
            ms = (0..r)
                .map(|i| (0..r).fold(zero.clone(), |acc, j| &acc + &(&a[i][j] * &ms[j])))
                .collect();
        }
        // Lower-triangular Toeplitz (r+2)×(r+1) times c.
        let mut next = vec![zero.clone(); r + 2];
        for (i, slot) in next.iter_mut().enumerate() {
            for (j, cj) in c.iter().enumerate().take(i + 1) {
                *slot = &*slot + &(&col[i - j] * cj);
            }
        }
        c = next;
    }
    let det = c[n].clone();
    if n % 2 == 1 {
        -&det
    } else {
        det
    }
}
