//! One verifier per structural claim, each producing a machine-readable
//! report.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::class_spaces::{unit_class_reduce, AdaptedBasis, ClassStatus, Space, DEFAULT_WINDOW};
use crate::element::{series_residue_and_dlog, LocalElement};
use crate::error::{Error, Result};
use crate::extensions::{attach_extension, DegreePExtension, Line};
use crate::field::{bp_index, Field};
use crate::fp_linalg::{self, FpSubspace, FpVector};
use crate::pairings::{complement, hilbert_symbol_q2, transpose, PairingContext};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_LINE_CAP: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub claim_id: String,
    pub field: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<i64>,
    pub seed: u64,
    pub statement: String,
    pub status: Outcome,
    pub witnesses: Vec<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
    pub runtime_ms: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrthogonalEntry {
    pub i: i64,
    pub side: String,
    pub expected: String,
    pub expected_basis: Vec<Vec<u32>>,
    pub computed_basis: Vec<Vec<u32>>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairingReport {
    pub field: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<i64>,
    pub left_basis: Vec<String>,
    pub right_basis: Vec<String>,
    /// `kernel` entries are `φ_u(e_r)` for functionals with kernel
    /// `N̄(E_u)`; `residue` entries are true F_p values.
    pub gram_kind: String,
    pub gram: Vec<Vec<u32>>,
    pub claimed_orthogonals: Vec<OrthogonalEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Claim {
    Filtration,
    AdditiveFiltration,
    TraceMap,
    Breaks,
    NormGroups,
    Reciprocity,
    Orthogonality,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    pub window: Option<i64>,
    pub timings: bool,
    pub line_cap: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: DEFAULT_SEED,
            window: None,
            timings: false,
            line_cap: DEFAULT_LINE_CAP,
        }
    }
}

/// Case of the field relevant to the claims.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Case {
    WithMu,
    WithoutMu,
    CharP,
}

fn case_of(field: &Field) -> Case {
    match (field.is_char_zero(), field.mu_p_present) {
        (true, true) => Case::WithMu,
        (true, false) => Case::WithoutMu,
        (false, _) => Case::CharP,
    }
}

impl Claim {
    pub fn parse(id: &str) -> Result<Claim> {
        Ok(match id {
            "S2.10" | "S2.11" | "S2.12" => Claim::Filtration,
            "S3.16" => Claim::AdditiveFiltration,
            "S2.15" => Claim::TraceMap,
            "S5.27" | "S5.28" => Claim::Breaks,
            "S6.29" => Claim::NormGroups,
            "S7.32" => Claim::Reciprocity,
            "S8.33" | "S8.34" => Claim::Orthogonality,
            other => {
                return Err(Error::Parse {
                    position: 0,
                    message: format!("unknown claim `{other}`"),
                    expected: "one of S2.10 S2.11 S2.12 S2.15 S3.16 S5.27 S5.28 S6.29 S7.32 S8.33 S8.34 or `all`".into(),
                })
            }
        })
    }

    /// Identifier of this claim for the given field.
    pub fn id(self, field: &Field) -> &'static str {
        let case = case_of(field);
        match (self, case) {
            (Claim::Filtration, Case::CharP) => "S2.10",
            (Claim::Filtration, Case::WithoutMu) => "S2.11",
            (Claim::Filtration, Case::WithMu) => "S2.12",
            (Claim::AdditiveFiltration, _) => "S3.16",
            (Claim::TraceMap, _) => "S2.15",
            (Claim::Breaks, Case::CharP) => "S5.28",
            (Claim::Breaks, _) => "S5.27",
            (Claim::NormGroups, _) => "S6.29",
            (Claim::Reciprocity, _) => "S7.32",
            (Claim::Orthogonality, Case::CharP) => "S8.34",
            (Claim::Orthogonality, _) => "S8.33",
        }
    }

    fn statement(self, field: &Field) -> &'static str {
        match (self, case_of(field)) {
            (Claim::Filtration, Case::CharP) => {
                "Unit filtration in characteristic p: Ū_{i+1} = Ū_i when p | i and has codimension f otherwise (i > 0)."
            }
            (Claim::Filtration, Case::WithoutMu) => {
                "Unit filtration without p-th roots of unity: Ū_i vanishes above b_p(e); below it the step at i has codimension 0 when p | i and f otherwise."
            }
            (Claim::Filtration, Case::WithMu) => {
                "Unit filtration with p-th roots of unity: Ū_i vanishes above pc, Ū_pc has order p, and for 1 <= i < pc the step at i has codimension 0 when p | i and f otherwise."
            }
            (Claim::AdditiveFiltration, _) => {
                "Additive filtration: classes of p^i vanish for i > 0, the class of o has order p, and for i < 0 the step at i has codimension 0 when p | i and f otherwise."
            }
            (Claim::TraceMap, _) => {
                "With ζ of order p, v(p(1-ζ)) = pc and the class of 1 + a·p(1-ζ) maps to ζ^{S(a)}, an isomorphism Ū_pc → μ_p that does not depend on ζ."
            }
            (Claim::Breaks, Case::CharP) => {
                "Breaks of degree-p Artin-Schreier extensions equal the level of the attached line; the positive breaks are exactly the integers prime to p."
            }
            (Claim::Breaks, _) => {
                "Breaks of degree-p Kummer extensions equal the level of the attached line; the positive breaks are exactly b_p(i) for i in [1, e] and pc."
            }
            (Claim::NormGroups, _) => {
                "The norm group of L_i is U_i K^{×p}, with U_0 = K^×; for i = 1 the quotient is detected by the valuation mod p."
            }
            (Claim::Reciprocity, _) => {
                "Every uniformiser acts as the Frobenius on the unramified line, kernels of the reciprocity maps are norm groups, and ρ(Ū_i) is the i-th ramification group."
            }
            (Claim::Orthogonality, Case::CharP) => {
                "Under the pairing of K^× with K/℘K, the orthogonal of Ū_i is the class of p^{-i+1} and conversely."
            }
            (Claim::Orthogonality, _) => {
                "Under the hilbertian pairing on K^×/K^{×p}, the orthogonal of Ū_i is Ū_{pc-i+1}."
            }
        }
    }

    fn tag(self) -> u64 {
        self as u64 + 1
    }
}

/// Claims that apply to `field`, in report order.
pub fn applicable_claims(field: &Field) -> Vec<Claim> {
    match case_of(field) {
        Case::WithMu => vec![
            Claim::Filtration,
            Claim::TraceMap,
            Claim::Breaks,
            Claim::NormGroups,
            Claim::Reciprocity,
            Claim::Orthogonality,
        ],
        Case::WithoutMu => vec![Claim::Filtration],
        Case::CharP => vec![
            Claim::Filtration,
            Claim::AdditiveFiltration,
            Claim::Breaks,
            Claim::NormGroups,
            Claim::Reciprocity,
            Claim::Orthogonality,
        ],
    }
}

struct Audit {
    witnesses: Vec<Value>,
    counterexample: Option<Value>,
}

impl Audit {
    fn new() -> Self {
        Audit {
            witnesses: Vec::new(),
            counterexample: None,
        }
    }

    fn check(&mut self, ok: bool, witness: Value) {
        if !ok && self.counterexample.is_none() {
            self.counterexample = Some(witness.clone());
        }
        self.witnesses.push(witness);
    }

    fn note(&mut self, witness: Value) {
        self.witnesses.push(witness);
    }
}

fn rows(s: &FpSubspace) -> Vec<Vec<u32>> {
    s.basis().iter().map(|v| v.coords().to_vec()).collect()
}

/// Shared state for running claims on one field.
pub struct Verifier {
    pub field: Field,
    pub options: VerifyOptions,
    ctx: PairingContext,
}

impl Verifier {
    pub fn new(field: &Field, options: VerifyOptions) -> Result<Self> {
        let window = if field.is_char_zero() {
            None
        } else {
            Some(options.window.unwrap_or(DEFAULT_WINDOW))
        };
        let ctx = PairingContext::new(field, window)?;
        Ok(Verifier {
            field: field.clone(),
            options: VerifyOptions { window, ..options },
            ctx,
        })
    }

    pub fn context(&self) -> &PairingContext {
        &self.ctx
    }

    fn rng(&self, claim: Claim) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(
            self.options.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ claim.tag(),
        )
    }

    fn line_basis(&self) -> &AdaptedBasis {
        match &self.ctx.add {
            Some(a) => a,
            None => &self.ctx.mult,
        }
    }

    /// Top filtration index considered: pc, or the window.
    fn top(&self) -> i64 {
        match self.field.pc {
            Some(pc) if self.field.is_char_zero() => pc,
            _ => self.options.window.unwrap(),
        }
    }

    pub fn run(&self, claim: Claim) -> Result<VerificationReport> {
        if !applicable_claims(&self.field).contains(&claim) {
            return Err(Error::Unsupported(format!(
                "claim {} does not apply to {}",
                claim.id(&self.field),
                self.field.descriptor
            )));
        }
        let start = Instant::now();
        let mut rng = self.rng(claim);
        let audit = match claim {
            Claim::Filtration => self.filtration(&mut rng)?,
            Claim::AdditiveFiltration => self.additive_filtration(&mut rng)?,
            Claim::TraceMap => self.trace_map(&mut rng)?,
            Claim::Breaks => self.breaks(&mut rng)?,
            Claim::NormGroups => self.norm_groups(&mut rng)?,
            Claim::Reciprocity => self.reciprocity(&mut rng)?,
            Claim::Orthogonality => self.orthogonality(&mut rng)?,
        };
        let runtime_ms = if self.options.timings {
            start.elapsed().as_millis() as u64
        } else {
            0
        };
        Ok(VerificationReport {
            claim_id: claim.id(&self.field).into(),
            field: self.field.descriptor.to_string(),
            window: self.options.window,
            seed: self.options.seed,
            statement: claim.statement(&self.field).into(),
            status: if audit.counterexample.is_none() {
                Outcome::Pass
            } else {
                Outcome::Fail
            },
            witnesses: audit.witnesses,
            counterexample: audit.counterexample,
            runtime_ms,
        })
    }

    /// Every applicable claim, in order.
    pub fn run_all(&self) -> Result<Vec<VerificationReport>> {
        self.run_claims(&applicable_claims(&self.field))
    }

    /// The given claims, run in parallel; reports keep the input order.
    pub fn run_claims(&self, claims: &[Claim]) -> Result<Vec<VerificationReport>> {
        claims.par_iter().map(|&c| self.run(c)).collect()
    }

    /// Normalized representatives of the lines in `space`: all of them when
    /// there are at most `line_cap`, otherwise the basis lines plus a seeded
    /// sample.
    fn lines_in<R: Rng + ?Sized>(&self, space: &FpSubspace, rng: &mut R) -> (Vec<FpVector>, bool) {
        let p = space.p() as u64;
        let basis = space.basis();
        let k = basis.len() as u32;
        if k == 0 {
            return (Vec::new(), true);
        }
        let combine = |lambda: &[u32]| {
            let mut v = FpVector::zero(space.p(), space.ambient_dim());
            for (b, &l) in basis.iter().zip(lambda) {
                v = v.add(&b.scale(l));
            }
            v
        };
        let count = (p.pow(k) - 1) / (p - 1);
        if count as usize <= self.options.line_cap {
            let mut out = Vec::new();
            for n in 1..p.pow(k) {
                let lambda: Vec<u32> = (0..k).map(|i| ((n / p.pow(i)) % p) as u32).collect();
                if lambda.iter().find(|&&l| l != 0) == Some(&1) {
                    out.push(combine(&lambda));
                }
            }
            return (out, true);
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for b in &basis {
            if seen.insert(b.coords().to_vec()) {
                out.push(b.clone());
            }
        }
        while out.len() < self.options.line_cap {
            let mut lambda: Vec<u32> = (0..k).map(|_| rng.gen_range(0..p) as u32).collect();
            let Some(lead) = lambda.iter().position(|&l| l != 0) else {
                continue;
            };
            let inv = fp_linalg::inv_mod(lambda[lead], space.p());
            for l in lambda.iter_mut() {
                *l = fp_linalg::mul_mod(*l, inv, space.p());
            }
            let v = combine(&lambda);
            if seen.insert(v.coords().to_vec()) {
                out.push(v);
            }
        }
        (out, false)
    }

    fn predicted_mult_codim(&self, i: i64) -> usize {
        let p = self.field.p as i64;
        let f = self.field.f;
        let graded = if i % p == 0 { 0 } else { f };
        match case_of(&self.field) {
            Case::CharP => graded,
            Case::WithoutMu => {
                if i <= self.field.unit_threshold().unwrap() {
                    graded
                } else {
                    0
                }
            }
            Case::WithMu => {
                let pc = self.field.pc.unwrap();
                match i.cmp(&pc) {
                    std::cmp::Ordering::Less => graded,
                    std::cmp::Ordering::Equal => 1,
                    std::cmp::Ordering::Greater => 0,
                }
            }
        }
    }

    fn filtration(&self, rng: &mut ChaCha8Rng) -> Result<Audit> {
        let mut audit = Audit::new();
        let basis = &self.ctx.mult;
        let last = match case_of(&self.field) {
            Case::CharP => self.options.window.unwrap(),
            _ => self.field.unit_threshold().unwrap() + 1,
        };
        let dims = basis.sampled_dims(0..=last + 1, rng)?;
        if let Some(e) = self.field.e {
            let expected = e as usize * self.field.f + 1 + self.field.mu_p_present as usize;
            audit.check(
                dims[&0] == expected && basis.dim() == expected,
                json!({"check": "dimension", "expected": expected, "basis": basis.dim(), "sampled": dims[&0]}),
            );
        }
        for i in 1..=last {
            let predicted = self.predicted_mult_codim(i);
            let sampled = dims[&i] - dims[&(i + 1)];
            let from_basis = basis.basis_codim(i);
            audit.check(
                sampled == predicted && from_basis == predicted,
                json!({"i": i, "predicted_codim": predicted, "sampled_codim": sampled, "basis_codim": from_basis}),
            );
        }
        if self.field.is_char_zero() {
            let t = self.field.unit_threshold().unwrap();
            audit.check(
                dims[&(t + 1)] == 0,
                json!({"check": "vanishing", "i": t + 1, "sampled_dim": dims[&(t + 1)]}),
            );
            if self.field.mu_p_present {
                audit.check(
                    dims[&t] == 1,
                    json!({"check": "order p at pc", "i": t, "sampled_dim": dims[&t]}),
                );
            }
        }
        Ok(audit)
    }

    fn additive_filtration(&self, rng: &mut ChaCha8Rng) -> Result<Audit> {
        let mut audit = Audit::new();
        let basis = self.ctx.add.as_ref().unwrap();
        let w = self.options.window.unwrap();
        let dims = basis.sampled_dims(-w..=1, rng)?;
        audit.check(
            dims[&1] == 0,
            json!({"check": "p^1 is trivial", "sampled_dim": dims[&1]}),
        );
        audit.check(
            dims[&0] == 1,
            json!({"check": "o has order p", "sampled_dim": dims[&0]}),
        );
        let p = self.field.p as i64;
        for i in -w..=-1 {
            let predicted = if i % p == 0 { 0 } else { self.field.f };
            let sampled = dims[&i] - dims[&(i + 1)];
            let from_basis = basis.basis_codim(i);
            audit.check(
                sampled == predicted && from_basis == predicted,
                json!({"i": i, "predicted_codim": predicted, "sampled_codim": sampled, "basis_codim": from_basis}),
            );
        }
        Ok(audit)
    }

    fn trace_map(&self, rng: &mut ChaCha8Rng) -> Result<Audit> {
        let mut audit = Audit::new();
        let field = &self.field;
        let basis = &self.ctx.mult;
        let k = field.residue_field();
        let p = field.p;
        let pc = field.pc.unwrap();
        let g_index = basis.dim() - 1;
        let one = LocalElement::one(field);
        let zeta = field.zeta().unwrap();
        let pbig = LocalElement::from_int(field, p as i64);
        let mut sample: Vec<_> = if k.order() <= 64 {
            k.elements()
        } else {
            let mut v = k.basis();
            v.extend((0..16).map(|_| k.random(rng)));
            v
        };
        sample.retain(|_| true);
        // κ_s(a): coordinate on the Ū_pc generator of 1 + a·p(1-ζ^s).
        let mut kappa: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for s in 1..p {
            let pz = &pbig * &(&one - &zeta.pow_u(s as u64));
            let v = pz.val_checked("p(1-ζ)")?;
            audit.check(
                v == pc,
                json!({"check": "v(p(1-ζ^s)) = pc", "s": s, "valuation": v}),
            );
            let mut ks = Vec::new();
            for a in &sample {
                let x = &one + &(&LocalElement::lift(field, a) * &pz);
                let c = basis.coordinates(&x)?;
                let outside: Vec<u32> = c.coords()[..g_index].to_vec();
                if outside.iter().any(|&z| z != 0) {
                    audit.check(
                        false,
                        json!({"check": "class lies in Ū_pc", "s": s, "a": a.coords(field.f), "coords": c.coords()}),
                    );
                }
                ks.push(c.get(g_index));
            }
            kappa.insert(s, ks);
        }
        let k1 = &kappa[&1];
        let star = sample.iter().position(|a| k.trace(a) != 0).unwrap();
        let lambda = fp_linalg::mul_mod(k1[star], fp_linalg::inv_mod(k.trace(&sample[star]), p), p);
        audit.check(
            lambda != 0,
            json!({"check": "surjective onto μ_p", "scale": lambda}),
        );
        for (n, a) in sample.iter().enumerate() {
            let tr = k.trace(a);
            let linear = k1[n] == fp_linalg::mul_mod(lambda, tr, p);
            let x = &one + &(&LocalElement::lift(field, a) * &(&pbig * &(&one - &zeta)));
            let trivial = unit_class_reduce(&x)?.status == ClassStatus::Trivial;
            audit.check(
                linear && trivial == (tr == 0),
                json!({"a": a.coords(field.f), "trace": tr, "coordinate": k1[n], "trivial_class": trivial}),
            );
            for s in 2..p {
                let ks = kappa[&s][n];
                audit.check(
                    ks == fp_linalg::mul_mod(s, k1[n], p),
                    json!({"check": "independent of ζ", "s": s, "a": a.coords(field.f), "coordinate": ks, "expected": fp_linalg::mul_mod(s, k1[n], p)}),
                );
            }
        }
        Ok(audit)
    }

    /// Whether `Ū_i ⊆ N̄(E_D)`.
    fn unit_level_in_norms(&self, norms: &FpSubspace, i: i64) -> Result<bool> {
        self.ctx.mult.filtration_subspace(i).is_subspace_of(norms)
    }

    fn predicted_breaks(&self) -> BTreeSet<i64> {
        match self.field.e {
            Some(e) => {
                let mut s: BTreeSet<i64> = (1..=e)
                    .map(|i| bp_index(self.field.p, i).unwrap())
                    .collect();
                s.insert(self.field.pc.unwrap());
                s
            }
            None => {
                let w = self.options.window.unwrap();
                (1..=w).filter(|m| m % self.field.p as i64 != 0).collect()
            }
        }
    }

    fn breaks(&self, rng: &mut ChaCha8Rng) -> Result<Audit> {
        let mut audit = Audit::new();
        let lb = self.line_basis();
        let full = FpSubspace::full(lb.p(), lb.dim());
        let (lines, exhaustive) = self.lines_in(&full, rng);
        let top = self.top();
        let p = self.field.p;
        let results: Vec<(Value, bool, i64, i64)> = lines
            .par_iter()
            .map(|v| -> Result<_> {
                let line = Line::from_vector(lb, v)?;
                let ext = attach_extension(&line)?;
                let eps = ext.ramification_break();
                let mut ok = if line.level == 0 {
                    eps == -1
                } else {
                    eps == line.level
                };
                let mut twisted = Vec::new();
                if ext.kind == crate::extensions::ExtensionKind::Kummer {
                    for s in 2..p {
                        let e2 = DegreePExtension::new(&line, s)?;
                        ok &= e2.ramification_break() == eps;
                        twisted.push(e2.ramification_break());
                    }
                }
                let norms = self.ctx.norm_group(&line)?;
                let mut per_level = Vec::new();
                for i in 1..=top + 1 {
                    let contained = self.unit_level_in_norms(&norms, i)?;
                    ok &= contained == (line.level < i);
                    per_level.push(contained);
                }
                Ok((
                    json!({
                        "line": v.coords(),
                        "level": line.level,
                        "break": eps,
                        "break_with_zeta_powers": twisted,
                        "unit_levels_in_norm_group": per_level,
                        "ok": ok,
                    }),
                    ok,
                    line.level,
                    eps,
                ))
            })
            .collect::<Result<_>>()?;
        let mut level_counts: BTreeMap<i64, usize> = BTreeMap::new();
        let mut break_counts: BTreeMap<i64, usize> = BTreeMap::new();
        for (w, ok, level, eps) in results {
            *level_counts.entry(level).or_default() += 1;
            *break_counts.entry(eps).or_default() += 1;
            audit.check(ok, w);
        }
        let observed: BTreeSet<i64> = break_counts.keys().copied().filter(|&b| b > 0).collect();
        let predicted = self.predicted_breaks();
        audit.check(
            observed == predicted,
            json!({
                "check": "positive break set",
                "predicted": predicted,
                "observed": observed,
                "lines": lines.len(),
                "exhaustive": exhaustive,
                "level_counts": level_counts,
                "break_counts": break_counts,
            }),
        );
        Ok(audit)
    }

    /// Lines `D` with `D ⊆ Ū_{pc-i+1}` (resp. `p̄^{-i+1}`), as a subspace.
    fn dual_level_space(&self, i: i64) -> FpSubspace {
        match (&self.ctx.add, self.field.pc) {
            (Some(add), _) => add.filtration_subspace(-i + 1),
            (None, Some(pc)) => {
                let j = pc - i + 1;
                if j > pc {
                    FpSubspace::zero(self.ctx.mult.p(), self.ctx.mult.dim())
                } else {
                    self.ctx.mult.filtration_subspace(j)
                }
            }
            _ => unreachable!(),
        }
    }

    fn lb_space(&self) -> Space {
        self.line_basis().space
    }

    fn norm_groups(&self, rng: &mut ChaCha8Rng) -> Result<Audit> {
        let mut audit = Audit::new();
        let mult = &self.ctx.mult;
        let top = self.top();
        for i in 0..=top + 1 {
            let space = self.dual_level_space(i);
            let (lines, exhaustive) = self.lines_in(&space, rng);
            let groups: Vec<FpSubspace> = lines
                .par_iter()
                .map(|v| self.ctx.norm_group_of(self.lb_space(), v))
                .collect::<Result<_>>()?;
            let mut inter = FpSubspace::full(mult.p(), mult.dim());
            for g in &groups {
                inter = inter.intersect(g)?;
            }
            let expected = mult.filtration_subspace(i);
            audit.check(
                inter == expected,
                json!({
                    "i": i,
                    "lines": lines.len(),
                    "exhaustive": exhaustive,
                    "intersection": rows(&inter),
                    "expected": rows(&expected),
                }),
            );
            if i == 1 {
                let pi = FpVector::unit(mult.p(), mult.dim(), 0);
                let quotient_dim = mult.dim() - inter.dim();
                audit.check(
                    quotient_dim == 1 && !inter.contains(&pi)?,
                    json!({"check": "valuation detects the quotient at i = 1", "quotient_dim": quotient_dim}),
                );
            }
        }
        Ok(audit)
    }

    fn random_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<LocalElement> {
        let u = self.ctx.mult.sample_filtration_element(0, rng)?;
        let v = u.val_checked("sample")?;
        Ok(&u * &LocalElement::uniformizer_pow(&self.field, -v)?)
    }

    fn reciprocity(&self, rng: &mut ChaCha8Rng) -> Result<Audit> {
        let mut audit = Audit::new();
        let mult = &self.ctx.mult;
        let lb = self.line_basis();
        let unram_vec = match self.lb_space() {
            Space::Mult => FpVector::unit(mult.p(), mult.dim(), mult.dim() - 1),
            Space::Add => FpVector::unit(lb.p(), lb.dim(), 0),
        };
        let unram = Line::from_vector(lb, &unram_vec)?;
        let n1 = self.ctx.norm_group(&unram)?;
        audit.check(
            n1 == mult.filtration_subspace(1),
            json!({"check": "kernel onto Gal(L_1|K) is N(L_1)", "norm_group": rows(&n1)}),
        );
        let pi = LocalElement::uniformizer(&self.field);
        let mut uniformizers = vec![pi.clone()];
        for _ in 0..8 {
            uniformizers.push(&pi * &self.random_unit(rng)?);
        }
        let coords: Vec<FpVector> = uniformizers
            .iter()
            .map(|u| mult.coordinates(u))
            .collect::<Result<_>>()?;
        for (u, c) in uniformizers.iter().zip(&coords) {
            audit.check(
                !n1.contains(c)?,
                json!({"check": "uniformiser acts nontrivially on L_1", "uniformiser": u.to_string(), "coords": c.coords()}),
            );
        }
        for (a, ca) in coords.iter().enumerate().skip(1) {
            let diff = ca.add(&coords[0].scale(mult.p() - 1));
            audit.check(
                n1.contains(&diff)?,
                json!({"check": "uniformisers agree on L_1", "pair": [0, a], "quotient_coords": diff.coords()}),
            );
        }
        let full = FpSubspace::full(lb.p(), lb.dim());
        let (lines, _) = self.lines_in(&full, rng);
        let top = self.top();
        let seeds: Vec<u64> = lines.iter().map(|_| rng.gen()).collect();
        let results: Vec<(Value, bool)> = lines
            .par_iter()
            .zip(seeds)
            .map(|(v, seed)| -> Result<_> {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let line = Line::from_vector(lb, v)?;
                let norms = self.ctx.norm_group(&line)?;
                let i = line.level + 1;
                let mut ok = true;
                let mut trials = Vec::new();
                for _ in 0..4 {
                    let b = mult.sample_filtration_element(0, &mut rng)?;
                    let w = mult.sample_filtration_element(i, &mut rng)?;
                    let before = norms.contains(&mult.coordinates(&b)?)?;
                    let after = norms.contains(&mult.coordinates(&(&b * &w))?)?;
                    ok &= before == after;
                    trials.push(json!([before, after]));
                }
                let mut per_level = Vec::new();
                for j in 1..=top + 1 {
                    let contained = self.unit_level_in_norms(&norms, j)?;
                    ok &= contained == (line.level < j);
                    per_level.push(contained);
                }
                Ok((
                    json!({
                        "line": v.coords(),
                        "level": line.level,
                        "perturbation_index": i,
                        "membership_before_after": trials,
                        "unit_levels_in_norm_group": per_level,
                        "ok": ok,
                    }),
                    ok,
                ))
            })
            .collect::<Result<_>>()?;
        for (w, ok) in results {
            audit.check(ok, w);
        }
        Ok(audit)
    }

    /// Gram data and orthogonal complements.
    pub fn pairing_report(&self, rng: &mut ChaCha8Rng) -> Result<PairingReport> {
        let mult = &self.ctx.mult;
        let p = mult.p();
        let top = self.top();
        let mut entries = Vec::new();
        let (gram, right, kind) = match &self.ctx.add {
            None => (self.ctx.kummer_table()?, mult, "kernel"),
            Some(add) => (self.ctx.schmid_table()?, add, "residue"),
        };
        let mut counterexample = None;
        for i in 0..=top + 1 {
            let in_ui: Vec<usize> = (0..mult.dim())
                .filter(|&u| i <= 0 || mult.vectors[u].level >= i)
                .collect();
            match &self.ctx.add {
                None => {
                    let pc = self.field.pc.unwrap();
                    let perp = complement(&gram, &in_ui, p)?;
                    let expected = mult.filtration_subspace(pc - i + 1);
                    let expected = if pc - i + 1 > pc {
                        FpSubspace::zero(p, mult.dim())
                    } else {
                        expected
                    };
                    entries.push(OrthogonalEntry {
                        i,
                        side: "mult".into(),
                        expected: format!("U_{}", pc - i + 1),
                        expected_basis: rows(&expected),
                        computed_basis: rows(&perp),
                        pass: perp == expected,
                    });
                }
                Some(add) => {
                    let perp = complement(&transpose(&gram), &in_ui, p)?;
                    let expected = add.filtration_subspace(-i + 1);
                    entries.push(OrthogonalEntry {
                        i,
                        side: "add".into(),
                        expected: format!("p^{}", -i + 1),
                        expected_basis: rows(&expected),
                        computed_basis: rows(&perp),
                        pass: perp == expected,
                    });
                    let cols: Vec<usize> = (0..add.dim())
                        .filter(|&c| add.vectors[c].level <= i - 1)
                        .collect();
                    let back = complement(&gram, &cols, p)?;
                    let expected = if i > top {
                        FpSubspace::zero(p, mult.dim())
                    } else {
                        mult.filtration_subspace(i)
                    };
                    entries.push(OrthogonalEntry {
                        i,
                        side: "mult".into(),
                        expected: format!("U_{i}"),
                        expected_basis: rows(&expected),
                        computed_basis: rows(&back),
                        pass: back == expected,
                    });
                }
            }
        }
        if let Some(bad) = entries.iter().find(|e| !e.pass) {
            counterexample = Some(serde_json::to_value(bad).unwrap());
        }
        let _ = rng;
        Ok(PairingReport {
            field: self.field.descriptor.to_string(),
            window: self.options.window,
            left_basis: mult.labels(),
            right_basis: right.labels(),
            gram_kind: kind.into(),
            gram,
            claimed_orthogonals: entries,
            counterexample,
        })
    }

    fn orthogonality(&self, rng: &mut ChaCha8Rng) -> Result<Audit> {
        let mut audit = Audit::new();
        let report = self.pairing_report(rng)?;
        let ok = report.counterexample.is_none();
        audit.check(ok, serde_json::to_value(&report).unwrap());
        let mult = &self.ctx.mult;
        let p = mult.p();
        match &self.ctx.add {
            None => {
                if self.field.p == 2 && self.field.e == Some(1) && self.field.f == 1 {
                    self.q2_symbol_crosscheck(&mut audit)?;
                }
            }
            Some(add) => {
                // Residue formula against norm membership on the basis and on
                // seeded random pairs.
                for (c, x) in add.vectors.iter().enumerate() {
                    let line = Line::from_vector(add, &FpVector::unit(p, add.dim(), c))?;
                    let norms = self.ctx.norm_group(&line)?;
                    for r in 0..mult.dim() {
                        let by_norm = norms.contains(&FpVector::unit(p, mult.dim(), r))?;
                        let by_residue = report.gram[r][c] == 0;
                        if by_norm != by_residue {
                            audit.check(
                                false,
                                json!({"check": "gram entry vs norm membership", "mult": mult.vectors[r].label, "add": x.label}),
                            );
                        }
                    }
                }
                let pairs: Vec<(FpVector, LocalElement)> = (0..200)
                    .map(|_| -> Result<_> {
                        let mut v = FpVector::zero(p, add.dim());
                        while v.is_zero() {
                            for n in 0..add.dim() {
                                v.set(n, rng.gen_range(0..p) as i64);
                            }
                        }
                        Ok((v, mult.sample_filtration_element(0, rng)?))
                    })
                    .collect::<Result<_>>()?;
                let outcomes: Vec<(bool, bool)> = pairs
                    .par_iter()
                    .map(|(v, b)| -> Result<_> {
                        let line = Line::from_vector(add, v)?;
                        let by_norm = self
                            .ctx
                            .norm_group(&line)?
                            .contains(&mult.coordinates(b)?)?;
                        let by_residue = series_residue_and_dlog(&line.generator, b)? == 0;
                        Ok((by_norm, by_residue))
                    })
                    .collect::<Result<_>>()?;
                let mismatches: Vec<usize> = outcomes
                    .iter()
                    .enumerate()
                    .filter(|(_, (a, b))| a != b)
                    .map(|(n, _)| n)
                    .collect();
                audit.check(
                    mismatches.is_empty(),
                    json!({
                        "check": "residue formula vs norm membership on random pairs",
                        "pairs": pairs.len(),
                        "trivial": outcomes.iter().filter(|(a, _)| *a).count(),
                        "mismatches": mismatches,
                    }),
                );
            }
        }
        Ok(audit)
    }

    fn q2_symbol_crosscheck(&self, audit: &mut Audit) -> Result<()> {
        let mult = &self.ctx.mult;
        let vectors: Vec<FpVector> = (1..8u32)
            .map(|n| FpVector::new(2, (0..3).map(|i| ((n >> i) & 1) as i64)))
            .collect();
        let mut agree = 0;
        for a in &vectors {
            let la = Line::from_vector(mult, a)?;
            for b in &vectors {
                let eb = mult.element_of(b);
                let symbol = hilbert_symbol_q2(&la.generator, &eb)?;
                let trivial = self.ctx.pairs_trivially(&la, &eb)?;
                let lb = Line::from_vector(mult, b)?;
                let symmetric = self.ctx.pairs_trivially(&lb, &la.generator)? == trivial;
                if (symbol == 1) == trivial && symmetric {
                    agree += 1;
                } else {
                    audit.check(
                        false,
                        json!({"check": "Hilbert symbol", "a": a.coords(), "b": b.coords(), "symbol": symbol, "pairs_trivially": trivial}),
                    );
                }
            }
        }
        audit.note(
            json!({"check": "Hilbert symbol vs kernel pairing", "pairs": 49, "agree": agree}),
        );
        Ok(())
    }
}

/// Constants printed by `describe`.
#[derive(Clone, Debug, Serialize)]
pub struct FieldSummary {
    pub field: String,
    pub p: u32,
    pub f: usize,
    /// `null` for characteristic p (e = +∞).
    pub e: Option<i64>,
    pub c: Option<i64>,
    pub pc: Option<i64>,
    pub q: u64,
    pub mu_p: bool,
    pub d: Option<usize>,
}

pub fn describe(field: &Field) -> FieldSummary {
    FieldSummary {
        field: field.descriptor.to_string(),
        p: field.p,
        f: field.f,
        e: field.e,
        c: field.c,
        pc: field.pc,
        q: field.q,
        mu_p: field.mu_p_present,
        d: field.class_dim(),
    }
}
