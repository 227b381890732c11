//! Field descriptors, their text grammar, and the derived field context.
//!
//! ```text
//! Qp p=<prime> f=<int> [eis=<c0,c1,...,1>] [resf=<c0,...,1>] [prec=<int>]
//! Fq((t)) p=<prime> f=<int> [resf=<c0,...,1>] [prec=<int>]
//! ```

use std::collections::HashMap;
use std::fmt;
use std::ops::Deref;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde::Serialize;

use crate::element::{LocalElement, Mixed, Repr};
use crate::error::{Error, Result};
use crate::fp_linalg::inv_mod;
use crate::residue::{least_irreducible, ResidueElement, ResidueField};

pub const DEFAULT_PRECISION: i64 = 64;

/// The i-th positive integer prime to `p`: `i + ⌊(i-1)/(p-1)⌋`.
pub fn bp_index(p: u32, i: i64) -> Result<i64> {
    if i < 1 {
        return Err(Error::Domain(format!("b_p index needs i >= 1, got {i}")));
    }
    Ok(i + (i - 1) / (p as i64 - 1))
}

pub fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Characteristic {
    Zero,
    P,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDescriptor {
    pub characteristic: Characteristic,
    pub p: u32,
    pub f: usize,
    pub residue_poly: Vec<u32>,
    /// Eisenstein polynomial, low to high, monic (characteristic 0).
    pub eisenstein_poly: Option<Vec<i64>>,
    pub default_precision: i64,
}

impl FieldDescriptor {
    pub fn qp(p: u32, f: usize) -> Self {
        FieldDescriptor {
            characteristic: Characteristic::Zero,
            p,
            f,
            residue_poly: least_irreducible(p, f),
            eisenstein_poly: None,
            default_precision: DEFAULT_PRECISION,
        }
    }

    pub fn ramified(p: u32, f: usize, eis: Vec<i64>) -> Self {
        FieldDescriptor {
            eisenstein_poly: Some(eis),
            ..Self::qp(p, f)
        }
    }

    pub fn laurent(p: u32, f: usize) -> Self {
        FieldDescriptor {
            characteristic: Characteristic::P,
            ..Self::qp(p, f)
        }
    }

    pub fn with_precision(mut self, prec: i64) -> Self {
        self.default_precision = prec;
        self
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut tokens = Vec::new();
        let mut pos = 0;
        for piece in text.split(' ') {
            if !piece.is_empty() {
                tokens.push((pos, piece));
            }
            pos += piece.len() + 1;
        }
        let Some(&(_, head)) = tokens.first() else {
            return Err(Error::Parse {
                position: 0,
                message: "empty field descriptor".into(),
                expected: "`Qp` or `Fq((t))`".into(),
            });
        };
        let characteristic = match head {
            "Qp" => Characteristic::Zero,
            "Fq((t))" => Characteristic::P,
            other => {
                return Err(Error::Parse {
                    position: 0,
                    message: format!("unknown field kind `{other}`"),
                    expected: "`Qp` or `Fq((t))`".into(),
                })
            }
        };
        let mut p = None;
        let mut f = None;
        let mut eis = None;
        let mut resf = None;
        let mut prec = None;
        for &(at, tok) in &tokens[1..] {
            let Some((key, value)) = tok.split_once('=') else {
                return Err(Error::Parse {
                    position: at,
                    message: format!("expected key=value, found `{tok}`"),
                    expected: "p=, f=, eis=, resf= or prec=".into(),
                });
            };
            let vpos = at + key.len() + 1;
            let int = |s: &str| -> Result<i64> {
                s.parse::<i64>().map_err(|_| Error::Parse {
                    position: vpos,
                    message: format!("`{s}` is not an integer"),
                    expected: "integer".into(),
                })
            };
            let list =
                |s: &str| -> Result<Vec<i64>> { s.split(',').map(|c| int(c.trim())).collect() };
            match key {
                "p" => p = Some(int(value)?),
                "f" => f = Some(int(value)?),
                "eis" if characteristic == Characteristic::Zero => eis = Some(list(value)?),
                "resf" => resf = Some(list(value)?),
                "prec" => prec = Some(int(value)?),
                _ => {
                    return Err(Error::Parse {
                        position: at,
                        message: format!("unknown key `{key}`"),
                        expected: if characteristic == Characteristic::Zero {
                            "p, f, eis, resf or prec".into()
                        } else {
                            "p, f, resf or prec".into()
                        },
                    })
                }
            }
        }
        let p = p.ok_or_else(|| Error::Parse {
            position: text.len(),
            message: "missing prime".into(),
            expected: "p=<prime>".into(),
        })?;
        if p < 2 || p > u16::MAX as i64 || !is_prime(p as u32) {
            return Err(Error::Construction(format!(
                "p={p} is not a supported prime"
            )));
        }
        let p = p as u32;
        let f = match (f, &resf) {
            (Some(f), _) => f,
            (None, Some(r)) => r.len() as i64 - 1,
            (None, None) => 1,
        };
        if f < 1 {
            return Err(Error::Construction(format!(
                "residual degree f={f} must be >= 1"
            )));
        }
        let f = f as usize;
        let residue_poly = match resf {
            Some(r) => {
                if r.len() != f + 1 {
                    return Err(Error::Construction(format!(
                        "resf has degree {}, but f={f}",
                        r.len() as i64 - 1
                    )));
                }
                r.iter().map(|&c| c.rem_euclid(p as i64) as u32).collect()
            }
            None => least_irreducible(p, f),
        };
        let prec = prec.unwrap_or(DEFAULT_PRECISION);
        if prec < 1 {
            return Err(Error::Construction("precision must be positive".into()));
        }
        Ok(FieldDescriptor {
            characteristic,
            p,
            f,
            residue_poly,
            eisenstein_poly: eis,
            default_precision: prec,
        })
    }
}

impl fmt::Display for FieldDescriptor {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[i64]| {
            v.iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        match self.characteristic {
            Characteristic::Zero => {
                write!(fm, "Qp p={} f={}", self.p, self.f)?;
                if let Some(eis) = &self.eisenstein_poly {
                    write!(fm, " eis={}", join(eis))?;
                }
            }
            Characteristic::P => write!(fm, "Fq((t)) p={} f={}", self.p, self.f)?,
        }
        if self.residue_poly != least_irreducible(self.p, self.f) {
            let r: Vec<i64> = self.residue_poly.iter().map(|&c| c as i64).collect();
            write!(fm, " resf={}", join(&r))?;
        }
        write!(fm, " prec={}", self.default_precision)
    }
}

/// A constructed p-field together with its derived constants.
pub struct FieldContext {
    pub descriptor: FieldDescriptor,
    pub p: u32,
    pub f: usize,
    /// Absolute ramification index; `None` means `+∞` (characteristic p).
    pub e: Option<i64>,
    pub q: u64,
    pub c: Option<i64>,
    pub pc: Option<i64>,
    pub mu_p_present: bool,
    pub default_precision: i64,
    pub residue_field: ResidueField,
    pub(crate) pbig: BigInt,
    pub(crate) unram_mod: Vec<BigInt>,
    pub(crate) eis: Vec<BigInt>,
    /// Residue of `p / π^e` in F_p.
    pub(crate) p_over_pi_e_res: u32,
    ppow_cache: Vec<BigInt>,
    zeta: Option<Mixed>,
    pi_inv: OnceLock<Repr>,
    /// Level-m kill maps `θ ↦ coefficient of π^m in (1 + θπ^s)^p - 1`.
    pub(crate) kill_maps: Mutex<HashMap<i64, Arc<Vec<ResidueElement>>>>,
}

impl fmt::Debug for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldContext({})", self.descriptor)
    }
}

impl FieldContext {
    pub(crate) fn ppow(&self, n: u32) -> BigInt {
        match self.ppow_cache.get(n as usize) {
            Some(x) => x.clone(),
            None => num_traits::pow(self.pbig.clone(), n as usize),
        }
    }

    pub fn is_char_zero(&self) -> bool {
        self.e.is_some()
    }

    /// Dimension of `K^×/K^{×p}` in characteristic 0.
    pub fn class_dim(&self) -> Option<usize> {
        let e = self.e? as usize;
        Some(e * self.f + 1 + self.mu_p_present as usize)
    }

    /// Largest level of a nontrivial unit class (characteristic 0).
    pub fn unit_threshold(&self) -> Option<i64> {
        let e = self.e?;
        if self.mu_p_present {
            self.pc
        } else {
            bp_index(self.p, e).ok()
        }
    }
}

/// Shared handle to a field context.
#[derive(Clone)]
pub struct Field(Arc<FieldContext>);

impl Deref for Field {
    type Target = FieldContext;
    fn deref(&self) -> &FieldContext {
        &self.0
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.descriptor == other.descriptor
    }
}

/// Construct the field described by `d`.
pub fn make_field(d: FieldDescriptor) -> Result<Field> {
    let p = d.p;
    if !is_prime(p) {
        return Err(Error::Construction(format!("{p} is not prime")));
    }
    if d.default_precision < 1 {
        return Err(Error::Construction("precision must be positive".into()));
    }
    let residue_field = ResidueField::new(p, d.residue_poly.clone())?;
    let f = d.f;
    let q = residue_field.order();
    let pbig = BigInt::from(p);
    let unram_mod: Vec<BigInt> = d.residue_poly.iter().map(|&c| BigInt::from(c)).collect();

    let (e, eis) = match d.characteristic {
        Characteristic::P => (None, Vec::new()),
        Characteristic::Zero => {
            let eis: Vec<i64> = d
                .eisenstein_poly
                .clone()
                .unwrap_or_else(|| vec![-(p as i64), 1]);
            let e = eis.len() as i64 - 1;
            if e < 1 || *eis.last().unwrap() != 1 {
                return Err(Error::Construction(
                    "Eisenstein polynomial must be monic of degree >= 1".into(),
                ));
            }
            let pi = p as i64;
            if eis[0] % pi != 0 || (eis[0] / pi) % pi == 0 {
                return Err(Error::Construction(format!(
                    "not Eisenstein: constant coefficient {} must have valuation exactly 1",
                    eis[0]
                )));
            }
            if let Some(j) = (1..e as usize).find(|&j| eis[j] % pi != 0) {
                return Err(Error::Construction(format!(
                    "not Eisenstein: coefficient of x^{j} ({}) is not divisible by {p}",
                    eis[j]
                )));
            }
            (Some(e), eis.into_iter().map(BigInt::from).collect())
        }
    };
    let (c, pc) = match e {
        Some(e) if e % (p as i64 - 1) == 0 => {
            let c = e / (p as i64 - 1);
            (Some(c), Some(e + c))
        }
        _ => (None, None),
    };
    let p_over_pi_e_res = match e {
        Some(_) => {
            let w0: BigInt = &eis[0] / &pbig;
            let w0r: i64 = w0.mod_floor(&pbig).try_into().unwrap();
            let inv = inv_mod(w0r as u32, p);
            (p - inv) % p
        }
        None => 0,
    };
    let cache_len = (d.default_precision as usize * 2 + 64).min(4096);
    let mut ppow_cache = Vec::with_capacity(cache_len);
    let mut acc = BigInt::one();
    for _ in 0..cache_len {
        ppow_cache.push(acc.clone());
        acc *= &pbig;
    }
    let ctx = FieldContext {
        descriptor: d.clone(),
        p,
        f,
        e,
        q,
        c,
        pc,
        mu_p_present: false,
        default_precision: d.default_precision,
        residue_field,
        pbig,
        unram_mod,
        eis,
        p_over_pi_e_res,
        ppow_cache,
        zeta: None,
        pi_inv: OnceLock::new(),
        kill_maps: Mutex::new(HashMap::new()),
    };
    let mut field = Field(Arc::new(ctx));
    if e.is_some() {
        let found = find_zeta(&field)?.map(|z| match z.repr {
            Repr::Mixed(m) => m,
            Repr::Laurent(_) => unreachable!(),
        });
        if let Some(m) = found {
            let mut ctx = Arc::try_unwrap(field.0).expect("unique during construction");
            ctx.mu_p_present = true;
            ctx.zeta = Some(m);
            field = Field(Arc::new(ctx));
        }
    }
    Ok(field)
}

impl Field {
    pub fn parse(text: &str) -> Result<Field> {
        make_field(FieldDescriptor::parse(text)?)
    }

    /// The fixed primitive p-th root of unity, when present.
    pub fn zeta(&self) -> Option<LocalElement> {
        self.zeta
            .as_ref()
            .map(|m| LocalElement::from_repr(self, Repr::Mixed(m.clone())))
    }

    pub(crate) fn pi_inverse(&self) -> LocalElement {
        let repr = self.pi_inv.get_or_init(|| {
            let pi = LocalElement::uniformizer(self);
            if !self.is_char_zero() {
                return pi.inv().expect("t is invertible").repr;
            }
            let guard = 2 * self.e.unwrap_or(1) + 8;
            let pi = pi.with_precision(self.default_precision + guard + 1);
            pi.inv().expect("uniformizer is invertible").repr
        });
        LocalElement::from_repr(self, repr.clone())
    }

    pub fn residue_field(&self) -> &ResidueField {
        &self.residue_field
    }

    pub fn same(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

/// `Φ_p(x) = x^{p-1} + … + 1` and its derivative, by Horner.
fn cyclotomic_and_derivative(x: &LocalElement, p: u32) -> (LocalElement, LocalElement) {
    let field = x.field();
    let mut val = LocalElement::one(field);
    let mut der = LocalElement::zero(field);
    for _ in 1..p {
        der = &(&der * x) + &val;
        val = &(&val * x) + &LocalElement::one(field);
    }
    (val, der)
}

/// Decide whether `Φ_p` has a root in K, and lift one if so.
///
/// A root ζ satisfies `v(ζ - 1) = c`, so it suffices to test every
/// `x0 = 1 + Σ_{i=c}^{e} a_i π^i`: the one congruent to ζ modulo `π^{e+1}`
/// passes the Hensel test `v(Φ(x0)) > 2 v(Φ'(x0))`.
fn find_zeta(field: &Field) -> Result<Option<LocalElement>> {
    let (Some(e), p) = (field.e, field.p) else {
        return Ok(None);
    };
    let Some(c) = field.c else {
        return Ok(None);
    };
    let needed = 2 * (e - c) + 2;
    if field.default_precision < needed {
        return Err(Error::Construction(format!(
            "precision {} is too small to certify the Hensel step for mu_p (need {needed})",
            field.default_precision
        )));
    }
    let k = &field.residue_field;
    let work = field.default_precision + 2 * (e - c) + 2;
    let digits: Vec<i64> = (c..=e).collect();
    let elems = k.elements();
    let total = (elems.len() as u64).pow(digits.len() as u32);
    let pi_pows: Vec<LocalElement> = digits
        .iter()
        .map(|&i| LocalElement::uniformizer(field).pow_u(i as u64))
        .collect();
    for idx in 0..total {
        let mut n = idx;
        let mut x0 = LocalElement::one(field);
        let mut lead_zero = false;
        for (slot, pp) in pi_pows.iter().enumerate() {
            let a = &elems[(n % elems.len() as u64) as usize];
            n /= elems.len() as u64;
            if slot == 0 && a.is_zero() {
                lead_zero = true;
            }
            x0 = &x0 + &(&LocalElement::lift(field, a) * pp);
        }
        if lead_zero {
            continue;
        }
        let x0 = x0.with_precision(work);
        let (phi, dphi) = cyclotomic_and_derivative(&x0, p);
        let vd = dphi.val_checked("Φ_p'")?;
        let hensel_ok = match phi.val() {
            None => true,
            Some(v) => v > 2 * vd,
        };
        if !hensel_ok {
            continue;
        }
        // Newton iteration from x0.
        let mut x = x0;
        for _ in 0..256 {
            let (phi, dphi) = cyclotomic_and_derivative(&x, p);
            if phi.is_zero() {
                break;
            }
            x = (&x - &phi.div(&dphi)?).with_precision(work);
        }
        let x = x.with_precision(field.default_precision + 1);
        let (phi, _) = cyclotomic_and_derivative(&x, p);
        if !phi.is_zero() {
            return Err(Error::Construction(
                "Hensel lift of the cyclotomic root did not converge".into(),
            ));
        }
        return Ok(Some(x));
    }
    Ok(None)
}
