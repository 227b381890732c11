//! The filtered F_p-spaces `K^×/K^{×p}` and `K/℘K`: descent, adapted bases,
//! coordinates and filtration audits.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::element::{LocalElement, EXACT};
use crate::error::{Error, Result};
use crate::field::{bp_index, Field};
use crate::fp_linalg::{self, inv_mod, mul_mod, FpSubspace, FpVector};
use crate::residue::ResidueElement;

/// Default window for characteristic-p computations.
pub const DEFAULT_WINDOW: i64 = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Mult,
    Add,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassStatus {
    Trivial,
    Nontrivial,
}

#[derive(Clone, Debug)]
pub struct UnitClassReduction {
    pub status: ClassStatus,
    /// Filtration index: the class lies in `Ū_j` but not `Ū_{j+1}`;
    /// 0 when the valuation is prime to p.
    pub level: i64,
    /// Coefficient of `π^j` in the reduced representative (`j > 0`).
    pub leading: Option<ResidueElement>,
    /// Reduced representative in the same class as the input.
    pub normalized_rep: LocalElement,
    /// `y` with `y^p · normalized_rep = input` to working precision.
    pub certificate: LocalElement,
    /// Kill steps taken up to the triviality threshold.
    pub steps: usize,
}

#[derive(Clone, Debug)]
pub struct ASClassReduction {
    pub status: ClassStatus,
    /// Pole order of the reduced representative, or 0.
    pub level: i64,
    pub normalized_rep: LocalElement,
    /// `y` with `℘(y) + normalized_rep = input` to working precision.
    pub certificate: LocalElement,
    pub steps: usize,
}

enum Step {
    /// Graded piece survives in the quotient.
    Free,
    /// Killable by `(1 + bπ^s)^p`.
    Kill(i64),
    /// The level `pc`: killable up to a cokernel of dimension ≤ 1.
    Top(i64),
}

fn step_kind(field: &Field, m: i64) -> Step {
    let p = field.p as i64;
    match field.e {
        None => {
            if m % p == 0 {
                Step::Kill(m / p)
            } else {
                Step::Free
            }
        }
        Some(e) => {
            let (lhs, rhs) = (m * (p - 1), e * p);
            if lhs < rhs {
                if m % p == 0 {
                    Step::Kill(m / p)
                } else {
                    Step::Free
                }
            } else if lhs == rhs {
                Step::Top(field.c.expect("pc integral"))
            } else {
                Step::Kill(m - e)
            }
        }
    }
}

fn kill_exponent(field: &Field, m: i64) -> Option<i64> {
    match step_kind(field, m) {
        Step::Free => None,
        Step::Kill(s) | Step::Top(s) => Some(s),
    }
}

/// `1 + lift(b) π^s`, exact.
fn one_plus(field: &Field, b: &ResidueElement, s: i64) -> Result<LocalElement> {
    Ok(&LocalElement::one(field) + &LocalElement::monomial(field, b, s)?)
}

/// Images of the residue basis under `θ ↦ [π^m]((1 + θπ^s)^p - 1)`.
fn kill_map(field: &Field, m: i64) -> Result<Arc<Vec<ResidueElement>>> {
    if let Some(hit) = field.kill_maps.lock().unwrap().get(&m) {
        return Ok(hit.clone());
    }
    let s = kill_exponent(field, m)
        .ok_or_else(|| Error::internal(format!("level {m} has no kill map")))?;
    let one = LocalElement::one(field);
    let mut images = Vec::new();
    for theta in field.residue_field.basis() {
        let z = one_plus(field, &theta, s)?;
        let w = &z.pow_u(field.p as u64) - &one;
        images.push(w.coefficient_at(m)?);
    }
    let images = Arc::new(images);
    field.kill_maps.lock().unwrap().insert(m, images.clone());
    Ok(images)
}

/// Solve `ψ_m(b) + c·extra = a`; returns `(b, c)`.
fn solve_kill(
    field: &Field,
    m: i64,
    a: &ResidueElement,
    extra: Option<&ResidueElement>,
) -> Result<Option<(ResidueElement, u32)>> {
    let (p, f) = (field.p, field.f);
    let images = kill_map(field, m)?;
    let mut columns: Vec<FpVector> = images.iter().map(|r| r.to_vector(p, f)).collect();
    if let Some(x) = extra {
        columns.push(x.to_vector(p, f));
    }
    let Some(sol) = fp_linalg::solve(p, &columns, &a.to_vector(p, f)) else {
        return Ok(None);
    };
    let coords: Vec<i64> = sol[..f].iter().map(|&c| c as i64).collect();
    let c = if extra.is_some() { sol[f] } else { 0 };
    Ok(Some((field.residue_field.from_coords(&coords), c)))
}

/// Working state of a multiplicative descent: `input = root^p · unit · π^{rest}`.
struct MultState {
    unit: LocalElement,
    root: LocalElement,
}

impl MultState {
    fn digit(&self, m: i64) -> Result<ResidueElement> {
        let one = LocalElement::one(self.unit.field());
        (&self.unit - &one).coefficient_at(m)
    }

    fn kill(&mut self, b: &ResidueElement, s: i64) -> Result<()> {
        let field = self.unit.field().clone();
        let z = one_plus(&field, b, s)?;
        self.unit = &self.unit * &z.pow_u(field.p as u64).inv()?;
        self.root = &self.root * &z;
        Ok(())
    }

    fn divide(&mut self, by: &LocalElement) -> Result<()> {
        self.unit = &self.unit * &by.inv()?;
        Ok(())
    }

    /// Make the residue 1 by a p-th power (k^× is p-divisible).
    fn kill_residue(&mut self) -> Result<()> {
        let field = self.unit.field().clone();
        let r = self.unit.residue()?;
        let w = LocalElement::lift(&field, &field.residue_field.pth_root(&r));
        self.unit = &self.unit * &w.pow_u(field.p as u64).inv()?;
        self.root = &self.root * &w;
        Ok(())
    }
}

/// Smallest working precision accepted for class computations.
pub fn min_class_precision(field: &Field) -> i64 {
    match (field.e, field.pc) {
        (Some(_), Some(pc)) => 2 * pc + 2,
        (Some(e), None) => 2 * bp_index(field.p, e).unwrap_or(1) + 2,
        (None, _) => 2,
    }
}

fn check_precision(field: &Field) -> Result<()> {
    let need = min_class_precision(field);
    if field.default_precision < need {
        return Err(Error::precision(format!(
            "working precision {} is below the {need} digits needed for class descent",
            field.default_precision
        )));
    }
    Ok(())
}

/// Class of a nonzero element of `K^×/K^{×p}` (characteristic 0).
pub fn unit_class_reduce(x: &LocalElement) -> Result<UnitClassReduction> {
    let field = x.field().clone();
    let Some(threshold) = field.unit_threshold() else {
        return Err(Error::Domain(
            "unit_class_reduce needs characteristic 0".into(),
        ));
    };
    check_precision(&field)?;
    let p = field.p as i64;
    let v = x.val_checked("unit_class_reduce input")?;
    let k = v.div_euclid(p);
    let root = LocalElement::uniformizer_pow(&field, k)?;
    let stripped = x * &LocalElement::uniformizer_pow(&field, -p * k)?;
    if v.rem_euclid(p) != 0 {
        return Ok(UnitClassReduction {
            status: ClassStatus::Nontrivial,
            level: 0,
            leading: None,
            normalized_rep: stripped,
            certificate: root,
            steps: 0,
        });
    }
    if stripped.precision() <= threshold + 1 {
        return Err(Error::precision(format!(
            "input known to π^{} only; class descent needs digits past π^{threshold}",
            stripped.precision()
        )));
    }
    let mut st = MultState {
        unit: stripped,
        root,
    };
    st.kill_residue()?;
    let mut steps = 0;
    let mut m = 1;
    while m < st.unit.precision() {
        let a = st.digit(m)?;
        if a.is_zero() {
            m += 1;
            continue;
        }
        let nontrivial = match step_kind(&field, m) {
            Step::Free => true,
            Step::Kill(s) => {
                let (b, _) = solve_kill(&field, m, &a, None)?
                    .ok_or_else(|| Error::internal(format!("kill map at level {m} not onto")))?;
                st.kill(&b, s)?;
                false
            }
            Step::Top(s) => match solve_kill(&field, m, &a, None)? {
                Some((b, _)) => {
                    st.kill(&b, s)?;
                    false
                }
                None => true,
            },
        };
        if nontrivial {
            if m > threshold {
                return Err(Error::internal(format!(
                    "class survives at level {m} beyond the threshold {threshold}"
                )));
            }
            return Ok(UnitClassReduction {
                status: ClassStatus::Nontrivial,
                level: m,
                leading: Some(a),
                certificate: st.root.with_precision(st.unit.precision()),
                normalized_rep: st.unit,
                steps,
            });
        }
        if m <= threshold {
            steps += 1;
        }
    }
    let known = st.unit.precision();
    Ok(UnitClassReduction {
        status: ClassStatus::Trivial,
        level: threshold + 1,
        leading: None,
        normalized_rep: st.unit,
        certificate: st.root.with_precision(known),
        steps,
    })
}

/// `℘(z) = z^p - z`.
pub fn wp(z: &LocalElement) -> LocalElement {
    &z.pow_u(z.field().p as u64) - z
}

/// Solve `y^p - y = a` in k, if possible.
fn residue_wp_preimage(field: &Field, a: &ResidueElement) -> Option<ResidueElement> {
    let k = &field.residue_field;
    let (p, f) = (field.p, field.f);
    let columns: Vec<FpVector> = k
        .basis()
        .iter()
        .map(|t| k.sub(&k.frobenius(t), t).to_vector(p, f))
        .collect();
    let sol = fp_linalg::solve(p, &columns, &a.to_vector(p, f))?;
    let coords: Vec<i64> = sol.iter().map(|&c| c as i64).collect();
    Some(k.from_coords(&coords))
}

/// Class of an element of `K/℘K` (characteristic p).
pub fn as_class_reduce(x: &LocalElement) -> Result<ASClassReduction> {
    let field = x.field().clone();
    if field.is_char_zero() {
        return Err(Error::Domain(
            "as_class_reduce needs characteristic p".into(),
        ));
    }
    let k = &field.residue_field;
    let p = field.p as i64;
    let mut rest = x.clone();
    let mut root = LocalElement::zero(&field);
    let mut steps = 0;
    while let Some(v) = rest.val() {
        if v >= 0 {
            break;
        }
        let m = -v;
        let a = rest.leading_coefficient().unwrap();
        if m % p != 0 {
            return Ok(ASClassReduction {
                status: ClassStatus::Nontrivial,
                level: m,
                normalized_rep: rest,
                certificate: root,
                steps,
            });
        }
        let b = LocalElement::monomial(&field, &k.pth_root(&a), -m / p)?;
        rest = &rest - &wp(&b);
        root = &root + &b;
        steps += 1;
    }
    if rest.precision() <= 0 {
        return Err(Error::precision(
            "constant term of the reduced series is unknown",
        ));
    }
    let a0 = rest.coefficient_window(0)?;
    if k.trace(&a0) != 0 {
        return Ok(ASClassReduction {
            status: ClassStatus::Nontrivial,
            level: 0,
            normalized_rep: rest,
            certificate: root,
            steps,
        });
    }
    let y0 = residue_wp_preimage(&field, &a0)
        .ok_or_else(|| Error::internal("trace-zero residue outside ℘(k)"))?;
    let y0 = LocalElement::lift(&field, &y0);
    rest = &rest - &wp(&y0);
    root = &root + &y0;
    // ℘(-Σ r^{p^n}) = r for r in the maximal ideal.
    let cap = if rest.is_exact() {
        field.default_precision
    } else {
        rest.precision()
    };
    let mut term = rest.with_precision(cap);
    let mut tail = LocalElement::zero(&field).with_precision(cap);
    while !term.is_zero() {
        tail = &tail - &term;
        term = term.pow_u(p as u64).with_precision(cap);
    }
    root = &root + &tail;
    let rep = &rest - &wp(&tail);
    Ok(ASClassReduction {
        status: ClassStatus::Trivial,
        level: 0,
        normalized_rep: rep,
        certificate: root,
        steps,
    })
}

#[derive(Clone, Debug)]
pub struct BasisVector {
    pub label: String,
    pub element: LocalElement,
    /// Filtration index j (multiplicative) or pole order δ (additive).
    pub level: i64,
}

/// Basis of `K^×/K^{×p}` or `K/℘K` adapted to the filtration.
#[derive(Clone, Debug)]
pub struct AdaptedBasis {
    pub field: Field,
    pub space: Space,
    pub vectors: Vec<BasisVector>,
    pub window: Option<i64>,
    theta_star: Option<ResidueElement>,
    slots: BTreeMap<i64, usize>,
}

fn theta_label(field: &Field, s: usize) -> String {
    match s {
        0 => String::new(),
        1 => "u*".into(),
        _ if field.f > 1 => format!("u^{s}*"),
        _ => unreachable!(),
    }
}

fn residue_label(field: &Field, r: &ResidueElement) -> String {
    let mut parts = Vec::new();
    for (s, &c) in r.coords(field.f).iter().enumerate() {
        if c == 0 {
            continue;
        }
        let mono = match s {
            0 => String::new(),
            1 => "u".into(),
            _ => format!("u^{s}"),
        };
        parts.push(match (c, mono.is_empty()) {
            (_, true) => c.to_string(),
            (1, false) => mono,
            _ => format!("{c}*{mono}"),
        });
    }
    let joined = parts.join("+");
    if parts.len() > 1 {
        format!("({joined})")
    } else {
        joined
    }
}

impl AdaptedBasis {
    /// Build the adapted basis; `window` bounds the levels in characteristic
    /// p (default 9) and is ignored in characteristic 0.
    pub fn new(field: &Field, space: Space, window: Option<i64>) -> Result<Self> {
        check_precision(field)?;
        let k = &field.residue_field;
        let theta = k.basis();
        let mut vectors = Vec::new();
        let mut slots = BTreeMap::new();
        let mut theta_star = None;
        let var = if field.is_char_zero() { "pi" } else { "t" };
        let window = if field.is_char_zero() {
            if space == Space::Add {
                return Err(Error::Domain(
                    "the additive class space needs characteristic p".into(),
                ));
            }
            None
        } else {
            let w = window.unwrap_or(DEFAULT_WINDOW);
            if w < 1 {
                return Err(Error::Domain(format!("window must be >= 1, got {w}")));
            }
            if space == Space::Mult && w + 1 >= field.default_precision {
                return Err(Error::precision(format!(
                    "window {w} needs precision above {}",
                    w + 1
                )));
            }
            Some(w)
        };
        let free_levels: Vec<i64> = match (field.e, window) {
            (Some(e), _) => (1..=e).map(|i| bp_index(field.p, i).unwrap()).collect(),
            (None, Some(w)) => (1..=w).filter(|m| m % field.p as i64 != 0).collect(),
            _ => unreachable!(),
        };
        match space {
            Space::Mult => {
                vectors.push(BasisVector {
                    label: var.into(),
                    element: LocalElement::uniformizer(field),
                    level: 0,
                });
                for &m in &free_levels {
                    slots.insert(m, vectors.len());
                    for (s, th) in theta.iter().enumerate() {
                        vectors.push(BasisVector {
                            label: format!("1+{}{var}^{m}", theta_label(field, s)),
                            element: one_plus(field, th, m)?,
                            level: m,
                        });
                    }
                }
                if field.mu_p_present {
                    let pc = field.pc.unwrap();
                    let mut star = None;
                    for th in &theta {
                        if solve_kill(field, pc, th, None)?.is_none() {
                            star = Some(*th);
                            break;
                        }
                    }
                    let star = star.ok_or_else(|| {
                        Error::internal("level-pc kill map is onto although mu_p is present")
                    })?;
                    slots.insert(pc, vectors.len());
                    vectors.push(BasisVector {
                        label: format!("1+{}{var}^{pc}", theta_label_of(field, &star)),
                        element: one_plus(field, &star, pc)?,
                        level: pc,
                    });
                    theta_star = Some(star);
                }
            }
            Space::Add => {
                let star = *theta
                    .iter()
                    .find(|t| k.trace(t) != 0)
                    .expect("trace is onto");
                vectors.push(BasisVector {
                    label: residue_label(field, &star),
                    element: LocalElement::lift(field, &star),
                    level: 0,
                });
                theta_star = Some(star);
                for &m in &free_levels {
                    slots.insert(m, vectors.len());
                    for (s, th) in theta.iter().enumerate() {
                        vectors.push(BasisVector {
                            label: format!("{}t^-{m}", theta_label(field, s)),
                            element: LocalElement::monomial(field, th, -m)?,
                            level: m,
                        });
                    }
                }
            }
        }
        Ok(AdaptedBasis {
            field: field.clone(),
            space,
            vectors,
            window,
            theta_star,
            slots,
        })
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn p(&self) -> u32 {
        self.field.p
    }

    pub fn labels(&self) -> Vec<String> {
        self.vectors.iter().map(|b| b.label.clone()).collect()
    }

    /// Highest filtration index carried by the basis.
    pub fn top_level(&self) -> i64 {
        self.vectors.iter().map(|b| b.level).max().unwrap_or(0)
    }

    /// Coordinates of the class of `x`.
    pub fn coordinates(&self, x: &LocalElement) -> Result<FpVector> {
        if !x.field().same(&self.field) && x.field() != &self.field {
            return Err(Error::Malformed(
                "element and basis live over different fields".into(),
            ));
        }
        match self.space {
            Space::Mult => self.mult_coordinates(x),
            Space::Add => self.add_coordinates(x),
        }
    }

    fn mult_coordinates(&self, x: &LocalElement) -> Result<FpVector> {
        let field = &self.field;
        let p = field.p;
        let f = field.f;
        let mut coords = FpVector::zero(p, self.dim());
        let v = x.val_checked("class coordinates")?;
        coords.set(0, v);
        let unit = x * &LocalElement::uniformizer_pow(field, -v)?;
        let limit = match (field.unit_threshold(), self.window) {
            (Some(t), _) => t,
            (None, Some(w)) => w,
            _ => unreachable!(),
        };
        if unit.precision() <= limit {
            return Err(Error::precision(format!(
                "unit part known to π^{} only; coordinates need digits through π^{limit}",
                unit.precision()
            )));
        }
        let mut st = MultState {
            unit,
            root: LocalElement::one(field),
        };
        st.kill_residue()?;
        for m in 1..=limit {
            let a = st.digit(m)?;
            if a.is_zero() {
                continue;
            }
            match step_kind(field, m) {
                Step::Free => {
                    let at = self.slots[&m];
                    let mut prod = LocalElement::one(field);
                    for (s, &c) in a.coords(f).iter().enumerate() {
                        coords.set(at + s, c as i64);
                        prod = &prod * &self.vectors[at + s].element.pow_u(c as u64);
                    }
                    st.divide(&prod)?;
                }
                Step::Kill(s) => {
                    let (b, _) = solve_kill(field, m, &a, None)?.ok_or_else(|| {
                        Error::internal(format!("kill map at level {m} not onto"))
                    })?;
                    st.kill(&b, s)?;
                }
                Step::Top(s) => {
                    let (b, c) =
                        solve_kill(field, m, &a, self.theta_star.as_ref())?.ok_or_else(|| {
                            Error::internal("level pc not spanned by the kill map and g")
                        })?;
                    st.kill(&b, s)?;
                    if c != 0 {
                        let at = self.slots[&m];
                        coords.set(at, c as i64);
                        st.divide(&self.vectors[at].element.pow_u(c as u64))?;
                    }
                }
            }
        }
        Ok(coords)
    }

    fn add_coordinates(&self, x: &LocalElement) -> Result<FpVector> {
        let field = &self.field;
        let k = &field.residue_field;
        let p = field.p as i64;
        let w = self.window.unwrap();
        let mut coords = FpVector::zero(field.p, self.dim());
        let mut rest = x.clone();
        while let Some(v) = rest.val() {
            if v >= 0 {
                break;
            }
            let m = -v;
            let a = rest.leading_coefficient().unwrap();
            if m % p == 0 {
                let b = LocalElement::monomial(field, &k.pth_root(&a), -m / p)?;
                rest = &rest - &wp(&b);
            } else {
                if m > w {
                    return Err(Error::OutOfWindow(format!(
                        "class has a pole of order {m} beyond the window {w}"
                    )));
                }
                let at = self.slots[&m];
                for (s, &c) in a.coords(field.f).iter().enumerate() {
                    coords.set(at + s, c as i64);
                }
                rest = &rest - &LocalElement::monomial(field, &a, -m)?;
            }
        }
        if rest.precision() <= 0 {
            return Err(Error::precision(
                "constant term of the reduced series is unknown",
            ));
        }
        let a0 = rest.coefficient_window(0)?;
        let star = k.trace(self.theta_star.as_ref().unwrap());
        coords.set(
            0,
            mul_mod(k.trace(&a0), inv_mod(star, field.p), field.p) as i64,
        );
        Ok(coords)
    }

    /// The element `Π b_i^{c_i}` (multiplicative) or `Σ c_i b_i` (additive).
    pub fn element_of(&self, v: &FpVector) -> LocalElement {
        let mut acc = match self.space {
            Space::Mult => LocalElement::one(&self.field),
            Space::Add => LocalElement::zero(&self.field),
        };
        for (b, &c) in self.vectors.iter().zip(v.coords()) {
            if c == 0 {
                continue;
            }
            acc = match self.space {
                Space::Mult => &acc * &b.element.pow_u(c as u64),
                Space::Add => &acc + &(&LocalElement::from_int(&self.field, c as i64) * &b.element),
            };
        }
        acc
    }

    /// `Ū_i` (multiplicative, `Ū_0` = everything) or `p̄^i` (additive) as a
    /// coordinate subspace.
    pub fn filtration_subspace(&self, i: i64) -> FpSubspace {
        let keep: Vec<FpVector> = self
            .vectors
            .iter()
            .enumerate()
            .filter(|(_, b)| match self.space {
                Space::Mult => i <= 0 || b.level >= i,
                Space::Add => i <= 0 && b.level <= -i,
            })
            .map(|(n, _)| FpVector::unit(self.p(), self.dim(), n))
            .collect();
        FpSubspace::span(self.p(), self.dim(), &keep).expect("unit vectors")
    }

    /// Filtration position of a nonzero class: the largest `j` with
    /// `v ∈ Ū_j` (multiplicative), or the pole order δ (additive).
    pub fn level_of(&self, v: &FpVector) -> Option<i64> {
        let levels = self
            .vectors
            .iter()
            .zip(v.coords())
            .filter(|(_, &c)| c != 0)
            .map(|(b, _)| b.level);
        match self.space {
            Space::Mult => levels.min(),
            Space::Add => levels.max(),
        }
    }

    /// Level δ(D) of the line through `v`.
    pub fn line_level(&self, v: &FpVector) -> Option<i64> {
        let j = self.level_of(v)?;
        match self.space {
            Space::Mult => Some(self.field.pc? - j),
            Space::Add => Some(j),
        }
    }

    /// Codimension of the next filtration step, read from the basis levels.
    pub fn basis_codim(&self, i: i64) -> usize {
        self.filtration_subspace(i).dim() - self.filtration_subspace(i + 1).dim()
    }

    /// A random element of `U_i` (multiplicative, `i ≥ 0`) or `p^i`
    /// (additive).
    pub fn sample_filtration_element<R: Rng + ?Sized>(
        &self,
        i: i64,
        rng: &mut R,
    ) -> Result<LocalElement> {
        let field = &self.field;
        let k = &field.residue_field;
        match (self.space, field.is_char_zero()) {
            (Space::Mult, true) => {
                let prec = field.default_precision - i.max(0);
                let body = LocalElement::random_integral(field, rng, prec);
                if i <= 0 {
                    let v = rng.gen_range(-3..=3);
                    let unit = &LocalElement::lift(field, &k.random_nonzero(rng))
                        + &(&body * &LocalElement::uniformizer(field));
                    return Ok(&unit * &LocalElement::uniformizer_pow(field, v)?);
                }
                Ok(
                    &LocalElement::one(field)
                        + &(&body * &LocalElement::uniformizer_pow(field, i)?),
                )
            }
            (Space::Mult, false) => {
                let w = self.window.unwrap();
                if i <= 0 {
                    let v = rng.gen_range(-3..=3);
                    let mut coeffs = vec![k.random_nonzero(rng)];
                    coeffs.extend((0..w + 2).map(|_| k.random(rng)));
                    return LocalElement::laurent(field, v, coeffs, EXACT);
                }
                let tail = LocalElement::random_laurent(field, rng, i, w + i + 2)?;
                Ok(&LocalElement::one(field) + &tail)
            }
            (Space::Add, _) => LocalElement::random_laurent(field, rng, i.min(4), i.max(0) + 4),
        }
    }

    /// Dimension of the span of the classes of random elements of `U_i`
    /// (resp. `p^i`), for each `i` in `range`.
    pub fn sampled_dims<R: Rng + ?Sized>(
        &self,
        range: std::ops::RangeInclusive<i64>,
        rng: &mut R,
    ) -> Result<BTreeMap<i64, usize>> {
        let samples = self.dim() + 12;
        let mut dims = BTreeMap::new();
        for i in range {
            let mut rows = Vec::with_capacity(samples);
            for _ in 0..samples {
                let x = self.sample_filtration_element(i, rng)?;
                rows.push(self.coordinates(&x)?);
            }
            dims.insert(i, FpSubspace::span(self.p(), self.dim(), &rows)?.dim());
        }
        Ok(dims)
    }

    /// Sampled codimensions `(i, dim Ū_i - dim Ū_{i+1})` over `range`.
    pub fn filtration_dims<R: Rng + ?Sized>(
        &self,
        range: std::ops::RangeInclusive<i64>,
        rng: &mut R,
    ) -> Result<Vec<(i64, usize)>> {
        let dims = self.sampled_dims(*range.start()..=*range.end() + 1, rng)?;
        Ok(range.map(|i| (i, dims[&i] - dims[&(i + 1)])).collect())
    }
}

fn theta_label_of(field: &Field, r: &ResidueElement) -> String {
    let l = residue_label(field, r);
    if l == "1" {
        String::new()
    } else {
        format!("{l}*")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::literal::parse_element;

    fn q2() -> Field {
        Field::parse("Qp p=2 f=1").unwrap()
    }

    #[test]
    fn q2_reductions() {
        let k = q2();
        let e = |n: i64| LocalElement::from_int(&k, n);
        let r = unit_class_reduce(&e(17)).unwrap();
        assert_eq!(r.status, ClassStatus::Trivial);
        assert!(r.certificate.pow_u(2).same_to_precision(&e(17)));
        let r = unit_class_reduce(&e(5)).unwrap();
        assert_eq!((r.status, r.level), (ClassStatus::Nontrivial, 2));
        let r = unit_class_reduce(&e(-1)).unwrap();
        assert_eq!((r.status, r.level), (ClassStatus::Nontrivial, 1));
        let r = unit_class_reduce(&e(12)).unwrap();
        assert_eq!((r.status, r.level), (ClassStatus::Nontrivial, 1));
        let r = unit_class_reduce(&e(8)).unwrap();
        assert_eq!((r.status, r.level), (ClassStatus::Nontrivial, 0));
    }

    #[test]
    fn q2_basis_and_coordinates() {
        let k = q2();
        let b = AdaptedBasis::new(&k, Space::Mult, None).unwrap();
        assert_eq!(b.dim(), 3);
        assert_eq!(b.labels(), vec!["pi", "1+pi^1", "1+pi^2"]);
        let c = b.coordinates(&LocalElement::from_int(&k, 45)).unwrap();
        assert_eq!(c.coords(), &[0, 0, 1]);
        let c = b.coordinates(&LocalElement::from_int(&k, -1)).unwrap();
        assert_eq!(c.coords(), &[0, 1, 1]);
        assert!(b.coordinates(&LocalElement::one(&k)).unwrap().is_zero());
    }

    #[test]
    fn additive_reductions() {
        let k = Field::parse("Fq((t)) p=2 f=1").unwrap();
        let e = |s: &str| parse_element(&k, s).unwrap();
        let r = as_class_reduce(&e("t^-2")).unwrap();
        assert_eq!((r.status, r.level), (ClassStatus::Nontrivial, 1));
        let r = as_class_reduce(&e("t")).unwrap();
        assert_eq!(r.status, ClassStatus::Trivial);
        assert!((&wp(&r.certificate) + &r.normalized_rep).same_to_precision(&e("t")));
        let r = as_class_reduce(&e("1")).unwrap();
        assert_eq!((r.status, r.level), (ClassStatus::Nontrivial, 0));
        let b = AdaptedBasis::new(&k, Space::Add, Some(5)).unwrap();
        assert_eq!(b.labels(), vec!["1", "t^-1", "t^-3", "t^-5"]);
        assert_eq!(b.coordinates(&e("t^-2")).unwrap().coords(), &[0, 1, 0, 0]);
        assert!(matches!(
            b.coordinates(&e("t^-7")),
            Err(Error::OutOfWindow(_))
        ));
    }

    #[test]
    fn q3_zeta3_basis() {
        let k = Field::parse("Qp p=3 f=1 eis=3,3,1").unwrap();
        let b = AdaptedBasis::new(&k, Space::Mult, None).unwrap();
        assert_eq!(b.dim(), 4);
        let levels: Vec<i64> = b.vectors.iter().map(|v| v.level).collect();
        assert_eq!(levels, vec![0, 1, 2, 3]);
        for (n, v) in b.vectors.iter().enumerate() {
            let c = b.coordinates(&v.element).unwrap();
            assert_eq!(c, FpVector::unit(3, 4, n));
        }
    }
}
