//! Descent and reduction checked against independent brute-force oracles.

use std::collections::BTreeMap;

use lfk_core::{
    as_class_reduce, bp_index, unit_class_reduce, AdaptedBasis, ClassStatus, Field, FpSubspace,
    FpVector, Line, LocalElement, PairingContext, ResidueElement, Space,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn field(s: &str) -> Field {
    Field::parse(s).unwrap()
}

/// All units of `o/π^n`, as exact elements `Σ_{i<n} lift(r_i) π^i`.
fn units_mod(k: &Field, n: i64) -> Vec<LocalElement> {
    let res = k.residue_field().elements();
    let mut out = vec![LocalElement::zero(k)];
    for i in 0..n {
        let mut next = Vec::new();
        for x in &out {
            for r in &res {
                if i == 0 && r.is_zero() {
                    continue;
                }
                next.push(x + &LocalElement::monomial(k, r, i).unwrap());
            }
        }
        out = next;
    }
    out
}

/// Hensel criterion: a unit is a p-th power iff it agrees with some `y^p`
/// modulo `π^{pc+1}`, and `y^p mod π^{pc+1}` only depends on `y mod π^{c+1}`.
struct PowerOracle {
    field: Field,
    pc: i64,
    powers: Vec<LocalElement>,
}

impl PowerOracle {
    fn new(k: &Field) -> Self {
        let c = k.c.unwrap();
        let p = k.p as u64;
        let powers = units_mod(k, c + 1).iter().map(|y| y.pow_u(p)).collect();
        PowerOracle {
            field: k.clone(),
            pc: k.pc.unwrap(),
            powers,
        }
    }

    fn is_pth_power(&self, x: &LocalElement) -> bool {
        let p = self.field.p as i64;
        let v = x.val().unwrap();
        if v % p != 0 {
            return false;
        }
        let u = x * &LocalElement::uniformizer_pow(&self.field, -v).unwrap();
        self.powers.iter().any(|y| {
            let d = &u - y;
            d.val().map_or(true, |dv| dv > self.pc)
        })
    }
}

fn random_test_element(k: &Field, rng: &mut ChaCha8Rng) -> LocalElement {
    let pc = k.pc.unwrap();
    let prec = k.default_precision;
    let mut y = LocalElement::random_integral(k, rng, prec);
    while y.val() != Some(0) {
        y = LocalElement::random_integral(k, rng, prec);
    }
    // y^p times a perturbation in U_j; j > pc keeps it a p-th power.
    let j = rng.gen_range(1..=pc + 2);
    let r = k.residue_field().random(rng);
    let w = &LocalElement::one(k) + &LocalElement::monomial(k, &r, j).unwrap();
    let shift = rng.gen_range(-3..=3);
    let x = &y.pow_u(k.p as u64) * &w;
    &x * &LocalElement::uniformizer_pow(k, shift).unwrap()
}

fn descent_vs_hensel(descriptor: &str) {
    let k = field(descriptor);
    let oracle = PowerOracle::new(&k);
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut powers = 0;
    for _ in 0..200 {
        let x = random_test_element(&k, &mut rng);
        let expected = oracle.is_pth_power(&x);
        let r = unit_class_reduce(&x).unwrap();
        assert_eq!(
            r.status == ClassStatus::Trivial,
            expected,
            "{descriptor}: {x}"
        );
        powers += expected as usize;
    }
    assert!(
        powers > 20 && powers < 180,
        "sample is too one-sided: {powers}"
    );
}

#[test]
fn descent_matches_hensel_q2() {
    descent_vs_hensel("Qp p=2 f=1");
}

#[test]
fn descent_matches_hensel_q4() {
    descent_vs_hensel("Qp p=2 f=2");
}

#[test]
fn descent_matches_hensel_q3_zeta3() {
    descent_vs_hensel("Qp p=3 f=1 eis=3,3,1");
}

/// Repeated subtraction of `℘(b t^{-n})` on a coefficient map.
fn naive_as_reduce(k: &Field, x: &LocalElement) -> (bool, i64) {
    let res = k.residue_field();
    let p = k.p as i64;
    let (start, coeffs) = x.laurent_terms().unwrap();
    let mut terms: BTreeMap<i64, ResidueElement> = BTreeMap::new();
    for (i, c) in coeffs.iter().enumerate() {
        if !c.is_zero() {
            terms.insert(start + i as i64, c.clone());
        }
    }
    let add = |terms: &mut BTreeMap<i64, ResidueElement>, n: i64, c: ResidueElement| {
        let cur = terms.remove(&n).unwrap_or_else(|| res.zero());
        let sum = res.add(&cur, &c);
        if !sum.is_zero() {
            terms.insert(n, sum);
        }
    };
    loop {
        let Some((&n, a)) = terms.iter().next() else {
            return (true, 0);
        };
        if n > 0 {
            return (true, 0);
        }
        if n == 0 {
            return (res.trace(a) == 0, 0);
        }
        let m = -n;
        if m % p != 0 {
            return (false, m);
        }
        // ℘(b t^{-m/p}) = a t^{-m} - b t^{-m/p} with b^p = a.
        let a = a.clone();
        let b = res.pth_root(&a);
        add(&mut terms, n, res.neg(&a));
        add(&mut terms, n / p, b);
    }
}

#[test]
fn as_reduction_matches_naive_subtraction() {
    for descriptor in ["Fq((t)) p=2 f=1", "Fq((t)) p=3 f=1", "Fq((t)) p=2 f=2"] {
        let k = field(descriptor);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut trivial = 0;
        for n in 0..200 {
            // Bias towards poles at multiples of p so reductions do work.
            let lo = -rng.gen_range(0..=12);
            let mut x = LocalElement::random_laurent(&k, &mut rng, lo, 4).unwrap();
            if n % 2 == 0 {
                let y = LocalElement::random_laurent(&k, &mut rng, lo / k.p as i64, 2).unwrap();
                x = &lfk_core::class_spaces::wp(&y)
                    + &LocalElement::random_laurent(&k, &mut rng, 0, 3).unwrap();
            }
            let (triv, level) = naive_as_reduce(&k, &x);
            let r = as_class_reduce(&x).unwrap();
            assert_eq!(r.status == ClassStatus::Trivial, triv, "{descriptor}: {x}");
            if !triv {
                assert_eq!(r.level, level, "{descriptor}: {x}");
            }
            trivial += triv as usize;
        }
        assert!(trivial > 20, "{descriptor}: {trivial}");
    }
}

/// Classes of the norms `x² - a y²` over `0 <= x, y < 64`.
fn enumerated_norms(basis: &AdaptedBasis, a: i64) -> FpSubspace {
    let k = &basis.field;
    let mut rows = Vec::new();
    for x in 0..64i64 {
        for y in 0..64i64 {
            let n = x * x - a * y * y;
            if n == 0 || n.trailing_zeros() > 4 {
                continue;
            }
            rows.push(basis.coordinates(&LocalElement::from_int(k, n)).unwrap());
        }
    }
    FpSubspace::span(2, basis.dim(), &rows).unwrap()
}

#[test]
fn q2_norm_groups_match_enumeration() {
    let k = field("Qp p=2 f=1");
    let ctx = PairingContext::new(&k, None).unwrap();
    let class = |n: i64| {
        ctx.mult
            .coordinates(&LocalElement::from_int(&k, n))
            .unwrap()
    };
    let span = |ns: &[i64]| {
        FpSubspace::span(2, 3, &ns.iter().map(|&n| class(n)).collect::<Vec<_>>()).unwrap()
    };
    for (a, expected) in [
        (5, span(&[-1, 5])),
        (-1, span(&[2, 5])),
        (2, span(&[-1, 2])),
    ] {
        let line = Line::through(&ctx.mult, &LocalElement::from_int(&k, a)).unwrap();
        let n = ctx.norm_group(&line).unwrap();
        assert_eq!(n, enumerated_norms(&ctx.mult, a), "a = {a}");
        assert_eq!(n, expected, "a = {a}");
    }
    // Every square class, not just the three examples.
    for a in [3, 5, 7, 2, 6, 10, 14] {
        let line = Line::through(&ctx.mult, &LocalElement::from_int(&k, a)).unwrap();
        assert_eq!(
            ctx.norm_group(&line).unwrap(),
            enumerated_norms(&ctx.mult, a),
            "a = {a}"
        );
    }
}

#[test]
fn hilbert_symbol_matches_norm_enumeration() {
    let k = field("Qp p=2 f=1");
    let ctx = PairingContext::new(&k, None).unwrap();
    let reps = [3i64, 5, 7, 2, 6, 10, 14];
    for a in reps {
        let norms = enumerated_norms(&ctx.mult, a);
        for b in reps {
            let eb = LocalElement::from_int(&k, b);
            let symbol = lfk_core::hilbert_symbol_q2(&LocalElement::from_int(&k, a), &eb).unwrap();
            let by_enumeration = norms.contains(&ctx.mult.coordinates(&eb).unwrap()).unwrap();
            assert_eq!(symbol == 1, by_enumeration, "({a}, {b})");
        }
    }
}

/// `v_2` of the discriminant of `Q_2(√a)`, by searching for the larger
/// order `Z_2[(x + √a)/2]`.
fn quadratic_disc_valuation(a: i64) -> i64 {
    let v4a = 2 + a.trailing_zeros() as i64;
    let half_integral = (0..4).any(|x: i64| (x * x - a).rem_euclid(4) == 0);
    if half_integral {
        v4a - 2
    } else {
        v4a
    }
}

#[test]
fn q2_breaks_match_discriminants() {
    let k = field("Qp p=2 f=1");
    let basis = AdaptedBasis::new(&k, Space::Mult, None).unwrap();
    let mut multiset: BTreeMap<i64, usize> = BTreeMap::new();
    for a in [3i64, 5, 7, 2, 6, 10, 14] {
        let line = Line::through(&basis, &LocalElement::from_int(&k, a)).unwrap();
        let eps = lfk_core::attach_extension(&line)
            .unwrap()
            .ramification_break();
        // For a quadratic extension v(d) = ε + 1.
        assert_eq!(eps, quadratic_disc_valuation(a) - 1, "a = {a}");
        *multiset.entry(eps).or_default() += 1;
    }
    assert_eq!(multiset, BTreeMap::from([(-1, 1), (1, 2), (2, 4)]));
}

fn bp_by_enumeration(p: u32, count: usize) -> Vec<i64> {
    (1..)
        .filter(|n: &i64| n % p as i64 != 0)
        .take(count)
        .collect()
}

#[test]
fn bp_matches_enumeration() {
    for p in [2u32, 3, 5, 7] {
        let listed = bp_by_enumeration(p, 1000);
        for i in 1..=1000 {
            assert_eq!(
                bp_index(p, i).unwrap(),
                listed[i as usize - 1],
                "p={p} i={i}"
            );
        }
    }
}

#[test]
fn pc_identity_on_char0_fields() {
    for d in [
        "Qp p=2 f=1",
        "Qp p=2 f=2",
        "Qp p=2 f=1 eis=2,2,1",
        "Qp p=3 f=1 eis=3,3,1",
        "Qp p=5 f=1 eis=5,0,0,0,1",
    ] {
        let k = field(d);
        let (e, c, pc) = (k.e.unwrap(), k.c.unwrap(), k.pc.unwrap());
        assert_eq!(pc, e + c, "{d}");
        assert_eq!(pc, bp_index(k.p, e).unwrap() + 1, "{d}");
        assert_eq!(c * (k.p as i64 - 1), e, "{d}");
    }
}

#[test]
fn q3_zeta3_lines_by_descent() {
    let k = field("Qp p=3 f=1 eis=3,3,1");
    assert_eq!(
        (k.e, k.c, k.pc, k.class_dim()),
        (Some(2), Some(1), Some(3), Some(4))
    );
    let basis = AdaptedBasis::new(&k, Space::Mult, None).unwrap();
    let pc = k.pc.unwrap();
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    let mut total = 0;
    for n in 1..81u32 {
        let v = FpVector::new(3, (0..4).map(|i| ((n / 3u32.pow(i)) % 3) as i64));
        if v.coords().iter().find(|&&c| c != 0) != Some(&1) {
            continue;
        }
        total += 1;
        let x = basis.element_of(&v);
        // Level from descent on the generator, not from the basis.
        let r = unit_class_reduce(&x).unwrap();
        let delta = pc - r.level;
        *counts.entry(delta).or_default() += 1;
        let line = Line::from_vector(&basis, &v).unwrap();
        assert_eq!(line.level, delta);
        let eps = lfk_core::attach_extension(&line)
            .unwrap()
            .ramification_break();
        assert_eq!(eps, if delta == 0 { -1 } else { delta });
    }
    assert_eq!(total, 40);
    assert_eq!(counts, BTreeMap::from([(0, 1), (1, 3), (2, 9), (3, 27)]));
}

#[test]
fn artin_schreier_breaks_are_pole_orders() {
    for (d, ms) in [
        ("Fq((t)) p=2 f=1", vec![1, 3, 5, 7]),
        ("Fq((t)) p=3 f=1", vec![1, 2, 4, 5, 7, 8]),
    ] {
        let k = field(d);
        let basis = AdaptedBasis::new(&k, Space::Add, Some(9)).unwrap();
        for m in ms {
            let x = LocalElement::uniformizer_pow(&k, -m).unwrap();
            let line = Line::through(&basis, &x).unwrap();
            assert_eq!(
                lfk_core::attach_extension(&line)
                    .unwrap()
                    .ramification_break(),
                m,
                "{d} m={m}"
            );
        }
        let one = Line::through(&basis, &LocalElement::one(&k)).unwrap();
        assert_eq!(
            lfk_core::attach_extension(&one)
                .unwrap()
                .ramification_break(),
            -1
        );
    }
}
