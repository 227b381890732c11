use lfk_core::class_spaces::wp;
use lfk_core::{
    as_class_reduce, parse_element, series_residue_and_dlog, unit_class_reduce, AdaptedBasis,
    ClassStatus, Field, FpSubspace, FpVector, Line, LocalElement, Space,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CHAR0: [&str; 3] = ["Qp p=2 f=1", "Qp p=2 f=2", "Qp p=3 f=1 eis=3,3,1"];
const CHARP: [&str; 3] = ["Fq((t)) p=2 f=1", "Fq((t)) p=3 f=1", "Fq((t)) p=2 f=2"];

fn field(s: &str) -> Field {
    Field::parse(s).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn nonzero(k: &Field, r: &mut ChaCha8Rng) -> LocalElement {
    loop {
        let x = LocalElement::random_integral(k, r, k.default_precision);
        if x.val().is_some() {
            let shift = r.gen_range(-2..=2);
            return &x * &LocalElement::uniformizer_pow(k, shift).unwrap();
        }
    }
}

fn vectors(p: u32, dim: usize) -> impl Strategy<Value = Vec<FpVector>> {
    prop::collection::vec(prop::collection::vec(0..p as i64, dim), 0..6)
        .prop_map(move |rows| rows.into_iter().map(|r| FpVector::new(p, r)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn rank_bounded_and_span_idempotent(rows in vectors(3, 5)) {
        let s = FpSubspace::span(3, 5, &rows).unwrap();
        prop_assert!(s.dim() <= rows.len().min(5));
        for r in &rows {
            prop_assert!(s.contains(r).unwrap());
        }
        prop_assert_eq!(FpSubspace::span(3, 5, &s.basis()).unwrap(), s);
    }

    #[test]
    fn intersection_dimension_formula(a in vectors(2, 6), b in vectors(2, 6)) {
        let u = FpSubspace::span(2, 6, &a).unwrap();
        let w = FpSubspace::span(2, 6, &b).unwrap();
        let sum = u.sum(&w).unwrap();
        let meet = u.intersect(&w).unwrap();
        prop_assert_eq!(u.dim() + w.dim(), sum.dim() + meet.dim());
        prop_assert!(meet.is_subspace_of(&u).unwrap() && meet.is_subspace_of(&w).unwrap());
    }

    #[test]
    fn ultrametric(seed in any::<u64>(), which in 0..3usize) {
        let k = field(CHAR0[which]);
        let mut r = rng(seed);
        let (x, y) = (nonzero(&k, &mut r), nonzero(&k, &mut r));
        let s = &x + &y;
        let m = x.val().unwrap().min(y.val().unwrap());
        if let Some(v) = s.val() {
            prop_assert!(v >= m);
            if x.val() != y.val() {
                prop_assert_eq!(v, m);
            }
        }
        prop_assert_eq!((&x * &y).val(), Some(x.val().unwrap() + y.val().unwrap()));
    }

    #[test]
    fn parse_print_round_trip(seed in any::<u64>(), which in 0..6usize) {
        let d = if which < 3 { CHAR0[which] } else { CHARP[which - 3] };
        let k = field(d);
        let mut r = rng(seed);
        let x = if k.is_char_zero() {
            nonzero(&k, &mut r).with_precision(r.gen_range(4..20))
        } else {
            LocalElement::random_laurent(&k, &mut r, -5, 6).unwrap()
        };
        let y = parse_element(&k, &x.to_string()).unwrap();
        prop_assert!(x.same_to_precision(&y), "{} vs {}", x, y);
        prop_assert_eq!(x.precision(), y.precision());
    }

    #[test]
    fn pth_powers_are_trivial(seed in any::<u64>(), which in 0..3usize) {
        let k = field(CHAR0[which]);
        let y = nonzero(&k, &mut rng(seed));
        let r = unit_class_reduce(&y.pow_u(k.p as u64)).unwrap();
        prop_assert_eq!(r.status, ClassStatus::Trivial);
    }

    #[test]
    fn wp_images_are_trivial(seed in any::<u64>(), which in 0..3usize) {
        let k = field(CHARP[which]);
        let y = LocalElement::random_laurent(&k, &mut rng(seed), -6, 4).unwrap();
        prop_assert_eq!(as_class_reduce(&wp(&y)).unwrap().status, ClassStatus::Trivial);
    }

    #[test]
    fn unit_levels_are_legal(seed in any::<u64>(), which in 0..3usize) {
        let k = field(CHAR0[which]);
        let x = nonzero(&k, &mut rng(seed));
        let r = unit_class_reduce(&x).unwrap();
        let (p, pc) = (k.p as i64, k.pc.unwrap());
        let j = r.level;
        let legal = match r.status {
            ClassStatus::Trivial => j == pc + 1,
            ClassStatus::Nontrivial => j == 0 || j == pc || (j < pc && j % p != 0),
        };
        prop_assert!(legal, "level {} for {}", j, x);
    }

    #[test]
    fn coordinates_are_linear(seed in any::<u64>(), which in 0..3usize) {
        let k = field(CHAR0[which]);
        let basis = AdaptedBasis::new(&k, Space::Mult, None).unwrap();
        let mut r = rng(seed);
        let (x, y) = (nonzero(&k, &mut r), nonzero(&k, &mut r));
        let cx = basis.coordinates(&x).unwrap();
        let cy = basis.coordinates(&y).unwrap();
        prop_assert_eq!(basis.coordinates(&(&x * &y)).unwrap(), cx.add(&cy));
        prop_assert_eq!(basis.coordinates(&basis.element_of(&cx)).unwrap(), cx);
    }

    #[test]
    fn additive_coordinates_are_linear(seed in any::<u64>(), which in 0..3usize) {
        let k = field(CHARP[which]);
        let basis = AdaptedBasis::new(&k, Space::Add, Some(9)).unwrap();
        let mut r = rng(seed);
        let x = LocalElement::random_laurent(&k, &mut r, -9, 3).unwrap();
        let y = LocalElement::random_laurent(&k, &mut r, -9, 3).unwrap();
        let cx = basis.coordinates(&x).unwrap();
        let cy = basis.coordinates(&y).unwrap();
        prop_assert_eq!(basis.coordinates(&(&x + &y)).unwrap(), cx.add(&cy));
    }

    #[test]
    fn residue_pairing_is_additive(seed in any::<u64>(), which in 0..3usize) {
        let k = field(CHARP[which]);
        let p = k.p;
        let mut r = rng(seed);
        let unit = |r: &mut ChaCha8Rng| loop {
            let u = LocalElement::random_laurent(&k, r, 0, 6).unwrap();
            if u.val() == Some(0) {
                let shift = r.gen_range(-2..=2);
                return &u * &LocalElement::uniformizer_pow(&k, shift).unwrap();
            }
        };
        let (a, b) = (unit(&mut r), unit(&mut r));
        let x = LocalElement::random_laurent(&k, &mut r, -6, 2).unwrap();
        let z = LocalElement::random_laurent(&k, &mut r, -6, 2).unwrap();
        let s = |x: &LocalElement, u: &LocalElement| series_residue_and_dlog(x, u).unwrap();
        prop_assert_eq!(s(&x, &(&a * &b)), (s(&x, &a) + s(&x, &b)) % p);
        prop_assert_eq!(s(&(&x + &z), &a), (s(&x, &a) + s(&z, &a)) % p);
        // ℘K pairs trivially with everything.
        prop_assert_eq!(s(&wp(&z), &a), 0);
    }

    #[test]
    fn norm_is_multiplicative(seed in any::<u64>(), line in 1..8u32) {
        let k = field("Qp p=2 f=1");
        let basis = AdaptedBasis::new(&k, Space::Mult, None).unwrap();
        let v = FpVector::new(2, (0..3).map(|i| ((line >> i) & 1) as i64));
        let ext = lfk_core::attach_extension(&Line::from_vector(&basis, &v).unwrap()).unwrap();
        let mut r = rng(seed);
        let elt = |r: &mut ChaCha8Rng| {
            let coeffs = (0..2).map(|_| nonzero(&k, r).with_precision(24)).collect();
            lfk_core::ExtElement { coeffs }
        };
        let (a, b) = (elt(&mut r), elt(&mut r));
        let lhs = ext.norm(&ext.mul(&a, &b)).unwrap();
        let rhs = &ext.norm(&a).unwrap() * &ext.norm(&b).unwrap();
        prop_assert!(lhs.same_to_precision(&rhs), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn break_does_not_depend_on_uniformizer(seed in any::<u64>(), which in 0..2usize, line in 1..40u32) {
        let d = ["Qp p=3 f=1 eis=3,3,1", "Fq((t)) p=3 f=1"][which];
        let k = field(d);
        let space = if k.is_char_zero() { Space::Mult } else { Space::Add };
        let basis = AdaptedBasis::new(&k, space, Some(5)).unwrap();
        let dim = basis.dim();
        let v = FpVector::new(3, (0..dim).map(|i| ((line / 3u32.pow(i as u32)) % 3) as i64));
        prop_assume!(!v.is_zero());
        let ext = lfk_core::attach_extension(&Line::from_vector(&basis, &v).unwrap()).unwrap();
        let pi = ext.uniformizer().clone();
        let mut r = rng(seed);
        let unit = loop {
            let u = if k.is_char_zero() {
                LocalElement::random_integral(&k, &mut r, k.default_precision)
            } else {
                LocalElement::random_laurent(&k, &mut r, 0, 4).unwrap()
            };
            if u.val() == Some(0) {
                break ext.from_base(&u);
            }
        };
        let eps = ext.ramification_break();
        let alternatives = [
            ext.mul(&pi, &unit),
            ext.add(&pi, &ext.mul(&pi, &pi)),
            ext.mul(&ext.add(&pi, &ext.pow(&pi, 3)), &unit),
        ];
        for alt in &alternatives {
            prop_assert_eq!(ext.break_with(alt).unwrap(), eps);
        }
    }
}
