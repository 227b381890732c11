//! Exact linear algebra over a prime field `F_p`.
//!
//! Subspaces are kept in reduced row echelon form with unit pivots, so two
//! subspaces are equal exactly when their basis matrices are equal. Columns
//! are never permuted: callers supply coordinates in an adapted basis and the
//! filtration subspaces must stay aligned with it.

use std::fmt;

use crate::error::{Error, Result};

#[inline]
pub(crate) fn add_mod(a: u32, b: u32, p: u32) -> u32 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub(crate) fn sub_mod(a: u32, b: u32, p: u32) -> u32 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

#[inline]
pub(crate) fn mul_mod(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 * b as u64) % p as u64) as u32
}

/// Inverse of a nonzero residue modulo a prime.
pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(a % p != 0);
    pow_mod(a, p - 2, p)
}

pub(crate) fn pow_mod(mut a: u32, mut n: u32, p: u32) -> u32 {
    let mut r = 1 % p;
    a %= p;
    while n > 0 {
        if n & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        n >>= 1;
    }
    r
}

/// A vector of residues modulo `p`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FpVector {
    p: u32,
    coords: Vec<u32>,
}

impl FpVector {
    pub fn new(p: u32, coords: impl IntoIterator<Item = i64>) -> Self {
        let coords = coords
            .into_iter()
            .map(|c| c.rem_euclid(p as i64) as u32)
            .collect();
        FpVector { p, coords }
    }

    pub fn zero(p: u32, dim: usize) -> Self {
        FpVector {
            p,
            coords: vec![0; dim],
        }
    }

    /// The `i`-th standard basis vector.
    pub fn unit(p: u32, dim: usize, i: usize) -> Self {
        let mut v = Self::zero(p, dim);
        v.coords[i] = 1 % p;
        v
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn get(&self, i: usize) -> u32 {
        self.coords[i]
    }

    pub fn set(&mut self, i: usize, value: i64) {
        self.coords[i] = value.rem_euclid(self.p as i64) as u32;
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &FpVector) -> FpVector {
        debug_assert_eq!(self.len(), other.len());
        let p = self.p;
        FpVector {
            p,
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(&a, &b)| add_mod(a, b, p))
                .collect(),
        }
    }

    pub fn scale(&self, s: u32) -> FpVector {
        let p = self.p;
        FpVector {
            p,
            coords: self.coords.iter().map(|&a| mul_mod(a, s % p, p)).collect(),
        }
    }

    pub fn dot(&self, other: &FpVector) -> u32 {
        let p = self.p as u64;
        (self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| a as u64 * b as u64 % p)
            .sum::<u64>()
            % p) as u32
    }
}

impl fmt::Debug for FpVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords)
    }
}

/// A subspace of `F_p^n` stored as a reduced echelon basis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FpSubspace {
    p: u32,
    ambient_dim: usize,
    basis: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl fmt::Debug for FpSubspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FpSubspace(p={}, n={}, basis={:?})",
            self.p, self.ambient_dim, self.basis
        )
    }
}

/// In-place reduction to RREF; returns pivot columns.
fn reduce_rows(rows: &mut Vec<Vec<u32>>, p: u32, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(piv) = (r..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(r, piv);
        let inv = inv_mod(rows[r][col], p);
        for x in rows[r].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[col] == 0 {
                continue;
            }
            let factor = row[col];
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                *x = sub_mod(*x, mul_mod(factor, y, p), p);
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

fn check_rows(p: u32, ambient_dim: usize, rows: &[FpVector]) -> Result<()> {
    for r in rows {
        if r.p != p {
            return Err(Error::Malformed(format!(
                "mixed moduli: expected {p}, found {}",
                r.p
            )));
        }
        if r.len() != ambient_dim {
            return Err(Error::Malformed(format!(
                "row length {} does not match ambient dimension {ambient_dim}",
                r.len()
            )));
        }
    }
    Ok(())
}

impl FpSubspace {
    pub fn zero(p: u32, ambient_dim: usize) -> Self {
        FpSubspace {
            p,
            ambient_dim,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(p: u32, ambient_dim: usize) -> Self {
        let rows: Vec<_> = (0..ambient_dim)
            .map(|i| FpVector::unit(p, ambient_dim, i))
            .collect();
        Self::span(p, ambient_dim, &rows).expect("unit rows are well formed")
    }

    /// Row space of `rows` in canonical form.
    pub fn span(p: u32, ambient_dim: usize, rows: &[FpVector]) -> Result<Self> {
        check_rows(p, ambient_dim, rows)?;
        let mut m: Vec<Vec<u32>> = rows.iter().map(|r| r.coords.clone()).collect();
        let pivots = reduce_rows(&mut m, p, ambient_dim);
        Ok(FpSubspace {
            p,
            ambient_dim,
            basis: m,
            pivots,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn codim(&self) -> usize {
        self.ambient_dim - self.dim()
    }

    pub fn basis(&self) -> Vec<FpVector> {
        self.basis
            .iter()
            .map(|r| FpVector {
                p: self.p,
                coords: r.clone(),
            })
            .collect()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    fn compatible(&self, other: &FpSubspace) -> Result<()> {
        if self.p != other.p || self.ambient_dim != other.ambient_dim {
            return Err(Error::Malformed(format!(
                "incompatible subspaces: (p={}, n={}) vs (p={}, n={})",
                self.p, self.ambient_dim, other.p, other.ambient_dim
            )));
        }
        Ok(())
    }

    /// Residual of `v` after eliminating against the pivots.
    fn residual(&self, v: &[u32]) -> Vec<u32> {
        let p = self.p;
        let mut w = v.to_vec();
        for (row, &col) in self.basis.iter().zip(&self.pivots) {
            let c = w[col];
            if c != 0 {
                for (x, &y) in w.iter_mut().zip(row) {
                    *x = sub_mod(*x, mul_mod(c, y, p), p);
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &FpVector) -> Result<bool> {
        if v.p != self.p || v.len() != self.ambient_dim {
            return Err(Error::Malformed(format!(
                "vector of length {} (p={}) against subspace of F_{}^{}",
                v.len(),
                v.p,
                self.p,
                self.ambient_dim
            )));
        }
        Ok(self.residual(&v.coords).iter().all(|&c| c == 0))
    }

    /// Coefficients of `v` against the echelon basis, if `v` is in the span.
    pub fn express(&self, v: &FpVector) -> Result<Option<Vec<u32>>> {
        if !self.contains(v)? {
            return Ok(None);
        }
        Ok(Some(self.pivots.iter().map(|&c| v.coords[c]).collect()))
    }

    pub fn is_subspace_of(&self, other: &FpSubspace) -> Result<bool> {
        self.compatible(other)?;
        for row in self.basis() {
            if !other.contains(&row)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn sum(&self, other: &FpSubspace) -> Result<FpSubspace> {
        self.compatible(other)?;
        let mut rows = self.basis();
        rows.extend(other.basis());
        Self::span(self.p, self.ambient_dim, &rows)
    }

    /// `self ∩ other` by the Zassenhaus construction.
    pub fn intersect(&self, other: &FpSubspace) -> Result<FpSubspace> {
        self.compatible(other)?;
        let n = self.ambient_dim;
        let p = self.p;
        let mut rows: Vec<Vec<u32>> = Vec::new();
        for r in &self.basis {
            let mut row = r.clone();
            row.extend_from_slice(r);
            rows.push(row);
        }
        for r in &other.basis {
            let mut row = r.clone();
            row.extend(std::iter::repeat(0).take(n));
            rows.push(row);
        }
        let pivots = reduce_rows(&mut rows, p, 2 * n);
        let out: Vec<FpVector> = rows
            .iter()
            .zip(&pivots)
            .filter(|(_, &c)| c >= n)
            .map(|(r, _)| FpVector {
                p,
                coords: r[n..].to_vec(),
            })
            .collect();
        Self::span(p, n, &out)
    }

    /// Linear functionals vanishing on the subspace, as a basis of the
    /// annihilator in the dual (identified with `F_p^n` by the dot product).
    pub fn annihilator(&self) -> FpSubspace {
        let rows: Vec<FpVector> = self.basis();
        let ker = null_space(self.p, self.ambient_dim, &rows);
        FpSubspace::span(self.p, self.ambient_dim, &ker).expect("well formed")
    }
}

/// Solutions `x` of `rows · x = 0` (right null space) as a basis.
pub fn null_space(p: u32, ncols: usize, rows: &[FpVector]) -> Vec<FpVector> {
    let mut m: Vec<Vec<u32>> = rows.iter().map(|r| r.coords.clone()).collect();
    let pivots = reduce_rows(&mut m, p, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut x = vec![0u32; ncols];
            x[fc] = 1;
            for (row, &pc) in m.iter().zip(&pivots) {
                x[pc] = sub_mod(0, row[fc], p);
            }
            FpVector { p, coords: x }
        })
        .collect()
}

/// One solution `x` of `Σ x_i columns[i] = target`, if any.
pub fn solve(p: u32, columns: &[FpVector], target: &FpVector) -> Option<Vec<u32>> {
    let n = target.len();
    let k = columns.len();
    // Augmented matrix: rows are equations (one per coordinate).
    let mut m: Vec<Vec<u32>> = (0..n)
        .map(|r| {
            let mut row: Vec<u32> = columns.iter().map(|c| c.coords[r]).collect();
            row.push(target.coords[r]);
            row
        })
        .collect();
    let pivots = reduce_rows(&mut m, p, k + 1);
    if pivots.last() == Some(&k) {
        return None;
    }
    let mut x = vec![0u32; k];
    for (row, &pc) in m.iter().zip(&pivots) {
        x[pc] = row[k];
    }
    Some(x)
}

/// Row-reduce a list of rows into a canonical subspace.
pub fn rref(rows: &[FpVector]) -> Result<FpSubspace> {
    let Some(first) = rows.first() else {
        return Err(Error::Malformed(
            "rref of an empty row list needs an explicit modulus; use FpSubspace::zero".into(),
        ));
    };
    FpSubspace::span(first.p, first.len(), rows)
}

/// `{ v ∈ restrict_to : v · table = 0 }`, where `table` has one row per
/// ambient basis vector and one column per tested functional.
pub fn left_kernel(table: &[Vec<u32>], restrict_to: &FpSubspace) -> Result<FpSubspace> {
    let p = restrict_to.p;
    let n = restrict_to.ambient_dim;
    if table.len() != n {
        return Err(Error::Malformed(format!(
            "pairing table has {} rows, ambient dimension is {n}",
            table.len()
        )));
    }
    let ncols = table.first().map_or(0, |r| r.len());
    if table.iter().any(|r| r.len() != ncols) {
        return Err(Error::Malformed("ragged pairing table".into()));
    }
    let basis = restrict_to.basis();
    let k = basis.len();
    // images[j][col] = (basis_j · table)[col]
    let images: Vec<Vec<u32>> = basis
        .iter()
        .map(|b| {
            (0..ncols)
                .map(|col| {
                    let mut acc = 0u64;
                    for (r, &bc) in b.coords.iter().enumerate() {
                        acc += bc as u64 * (table[r][col] % p) as u64;
                    }
                    (acc % p as u64) as u32
                })
                .collect()
        })
        .collect();
    // λ with Σ λ_j images[j] = 0: right null space of the transpose.
    let transposed: Vec<FpVector> = (0..ncols)
        .map(|col| FpVector {
            p,
            coords: images.iter().map(|img| img[col]).collect(),
        })
        .collect();
    let lambdas = null_space(p, k, &transposed);
    let rows: Vec<FpVector> = lambdas
        .iter()
        .map(|l| {
            let mut v = FpVector::zero(p, n);
            for (j, &c) in l.coords.iter().enumerate() {
                if c != 0 {
                    v = v.add(&basis[j].scale(c));
                }
            }
            v
        })
        .collect();
    FpSubspace::span(p, n, &rows)
}
