//! The hilbertian pairing at kernel level, the residue formula in
//! characteristic p, and the quadratic Hilbert symbol over Q_2.

use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::class_spaces::{AdaptedBasis, Space};
use crate::element::{series_residue_and_dlog, LocalElement};
use crate::error::{Error, Result};
use crate::extensions::{attach_extension, DegreePExtension, Line};
use crate::field::Field;
use crate::fp_linalg::{self, FpSubspace, FpVector};

/// Generator schedule for norm subgroups: `π_E` and `1 + r π_E^j` for `r`
/// over residue generators of E and `j ∈ [1, J]`.
fn norm_exponent_bound(ext: &DegreePExtension, basis: &AdaptedBasis) -> i64 {
    let top = match (ext.base.pc, basis.window) {
        (Some(pc), _) if ext.base.is_char_zero() => pc,
        (_, Some(w)) => w,
        _ => unreachable!(),
    };
    if ext.is_unramified {
        top + 1
    } else {
        ext.p() as i64 * (top + 1)
    }
}

/// Image of `N_{E|K}(E^×)` in `K^×/K^{×p}` (windowed in characteristic p).
/// The result has codimension exactly 1.
pub fn norm_class_subgroup(ext: &DegreePExtension, basis: &AdaptedBasis) -> Result<FpSubspace> {
    if basis.space != Space::Mult {
        return Err(Error::Malformed(
            "norm subgroups live in the multiplicative space".into(),
        ));
    }
    let p = basis.p();
    let d = basis.dim();
    let pi_e = ext.uniformizer().clone();
    let mut rows = vec![basis.coordinates(&ext.norm(&pi_e)?)?];
    let mut span = FpSubspace::span(p, d, &rows)?;
    let one = ext.from_base(&LocalElement::one(&ext.base));
    let gens = ext.residue_generators();
    let bound = norm_exponent_bound(ext, basis);
    let mut power = one.clone();
    'outer: for _ in 1..=bound {
        power = ext.mul(&power, &pi_e);
        for r in &gens {
            if span.codim() <= 1 {
                break 'outer;
            }
            let z = ext.add(&one, &ext.mul(r, &power));
            let c = basis.coordinates(&ext.norm(&z)?)?;
            if !span.contains(&c)? {
                rows.push(c);
                span = FpSubspace::span(p, d, &rows)?;
            }
        }
    }
    if span.codim() != 1 {
        return Err(Error::internal(format!(
            "norm subgroup has codimension {} after the full generator schedule",
            span.codim()
        )));
    }
    Ok(span)
}

/// Kernel-level pairing data for a field: norm subgroups of the lines
/// through basis vectors, cached by normalized line coordinates.
pub struct PairingContext {
    pub field: Field,
    pub mult: AdaptedBasis,
    pub add: Option<AdaptedBasis>,
    cache: Mutex<HashMap<Vec<u32>, FpSubspace>>,
}

impl PairingContext {
    pub fn new(field: &Field, window: Option<i64>) -> Result<Self> {
        let mult = AdaptedBasis::new(field, Space::Mult, window)?;
        let add = if field.is_char_zero() {
            None
        } else {
            Some(AdaptedBasis::new(field, Space::Add, window)?)
        };
        Ok(PairingContext {
            field: field.clone(),
            mult,
            add,
            cache: Mutex::new(HashMap::new()),
        })
    }

    fn line_basis(&self, space: Space) -> Result<&AdaptedBasis> {
        match space {
            Space::Mult => Ok(&self.mult),
            Space::Add => self
                .add
                .as_ref()
                .ok_or_else(|| Error::Domain("no additive space in characteristic 0".into())),
        }
    }

    /// `N̄(E_D)` for the line `D`, memoized.
    pub fn norm_group(&self, line: &Line) -> Result<FpSubspace> {
        let mut key = line.normalized_coords().coords().to_vec();
        key.push(line.space as u32);
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let ext = attach_extension(line)?;
        let n = norm_class_subgroup(&ext, &self.mult)?;
        self.cache.lock().unwrap().insert(key, n.clone());
        Ok(n)
    }

    /// `N̄(E_D)` for the line with coordinates `v`.
    pub fn norm_group_of(&self, space: Space, v: &FpVector) -> Result<FpSubspace> {
        let line = Line::from_vector(self.line_basis(space)?, v)?;
        self.norm_group(&line)
    }

    /// Whether `b` pairs trivially with the line `a`: `b̄ ∈ N̄(E_a)`. In
    /// characteristic p the residue formula is evaluated as well and the
    /// two answers must agree.
    pub fn pairs_trivially(&self, a: &Line, b: &LocalElement) -> Result<bool> {
        let coords = self.mult.coordinates(b)?;
        let by_norm = self.norm_group(a)?.contains(&coords)?;
        if a.space == Space::Add {
            let by_residue = series_residue_and_dlog(&a.generator, b)? == 0;
            if by_residue != by_norm {
                return Err(Error::internal(format!(
                    "residue formula and norm membership disagree on ({}, {b})",
                    a.generator
                )));
            }
        }
        Ok(by_norm)
    }

    /// Columns `φ_u`, one per multiplicative basis vector `u`, with
    /// `ker φ_u = N̄(E_u)`; entry `[r][u] = φ_u(e_r)`.
    pub fn kummer_table(&self) -> Result<Vec<Vec<u32>>> {
        let d = self.mult.dim();
        let p = self.mult.p();
        let columns: Vec<FpVector> = (0..d)
            .into_par_iter()
            .map(|u| {
                let n = self.norm_group_of(Space::Mult, &FpVector::unit(p, d, u))?;
                let ann = n.annihilator();
                if ann.dim() != 1 {
                    return Err(Error::internal("norm subgroup is not a hyperplane"));
                }
                Ok(ann.basis()[0].clone())
            })
            .collect::<Result<_>>()?;
        Ok((0..d)
            .map(|r| columns.iter().map(|c| c.get(r)).collect())
            .collect())
    }

    /// Residue-formula Gram matrix: `[r][c] = S(res(x_c · du_r/u_r))` with
    /// `u_r` the multiplicative and `x_c` the additive basis vectors.
    pub fn schmid_table(&self) -> Result<Vec<Vec<u32>>> {
        let add = self.line_basis(Space::Add)?;
        self.mult
            .vectors
            .par_iter()
            .map(|u| {
                add.vectors
                    .iter()
                    .map(|x| series_residue_and_dlog(&x.element, &u.element))
                    .collect::<Result<Vec<u32>>>()
            })
            .collect()
    }
}

/// Orthogonal complement of the span of the listed columns.
pub fn complement(table: &[Vec<u32>], columns: &[usize], p: u32) -> Result<FpSubspace> {
    let sub: Vec<Vec<u32>> = table
        .iter()
        .map(|row| columns.iter().map(|&c| row[c]).collect())
        .collect();
    fp_linalg::left_kernel(&sub, &FpSubspace::full(p, table.len()))
}

pub fn transpose(table: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let cols = table.first().map_or(0, |r| r.len());
    (0..cols)
        .map(|c| table.iter().map(|r| r[c]).collect())
        .collect()
}

/// `ε(u) = (u-1)/2`, `ω(u) = (u²-1)/8` mod 2 for an odd integer `u`.
fn eps_omega(u8: i64) -> (i64, i64) {
    (((u8 - 1) / 2) & 1, ((u8 * u8 - 1) / 8) & 1)
}

fn two_adic_split(x: &LocalElement) -> Result<(i64, i64)> {
    let v = x.val_checked("Hilbert symbol argument")?;
    let unit = x * &LocalElement::uniformizer_pow(x.field(), -v)?;
    let r: BigInt = unit.to_int_mod(3)?;
    Ok((v, r.to_i64().unwrap()))
}

/// The quadratic Hilbert symbol `(a, b)_2` over Q_2.
pub fn hilbert_symbol_q2(a: &LocalElement, b: &LocalElement) -> Result<i8> {
    let k = a.field();
    if k.p != 2 || k.e != Some(1) || k.f != 1 {
        return Err(Error::Unsupported(
            "the quadratic Hilbert symbol is implemented over Q_2 only".into(),
        ));
    }
    let (alpha, u) = two_adic_split(a)?;
    let (beta, w) = two_adic_split(b)?;
    let (eu, ou) = eps_omega(u);
    let (ew, ow) = eps_omega(w);
    let exp = eu * ew + alpha * ow + beta * ou;
    Ok(if exp.rem_euclid(2) == 0 { 1 } else { -1 })
}
