//! Algebraic laws checked on random data; each case draws its data from a
//! seeded generator so failures shrink to a reproducible seed.

mod common;

use common::*;
use darboux_core::darboux::{make_first_order_wronskian, make_wronskian_dt};
use darboux_core::field::{FieldElem, Tower, Var};
use darboux_core::opring::DiffOp;
use darboux_core::schrodinger::{Direction, SchrodingerOp};
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

/// Small random rational function.
fn ratfun(r: &mut rand_chacha::ChaCha8Rng) -> FieldElem {
    poly(r, 2).checked_div(&nonzero_poly(r, 1)).unwrap()
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn field_is_a_field(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b, c) = (ratfun(&mut r), ratfun(&mut r), ratfun(&mut r));
        prop_assert_eq!((a.clone() + b.clone()) + c.clone(), a.clone() + (b.clone() + c.clone()));
        prop_assert_eq!((a.clone() * b.clone()) * c.clone(), a.clone() * (b.clone() * c.clone()));
        prop_assert_eq!(a.clone() * (b.clone() + c.clone()), a.clone() * b.clone() + a.clone() * c.clone());
        prop_assert_eq!(a.clone() * b.clone(), b.clone() * a.clone());
        prop_assert!((a.clone() - a.clone()).is_zero());
        if !a.is_zero() {
            prop_assert!((a.clone() * a.inv().unwrap()).is_one());
            prop_assert_eq!((b.clone() * a.clone()).checked_div(&a).unwrap(), b);
        }
    }

    #[test]
    fn derivations_commute_and_obey_leibniz(seed in any::<u64>()) {
        let t = Tower::new();
        let mut r = rng(seed);
        let (f, g) = (ratfun(&mut r), ratfun(&mut r));
        for v in [Var::X, Var::Y] {
            let lhs = t.derive(&(f.clone() * g.clone()), v);
            prop_assert_eq!(lhs, t.derive(&f, v) * g.clone() + f.clone() * t.derive(&g, v));
        }
        let xy = t.derive(&t.derive(&f, Var::X), Var::Y);
        prop_assert_eq!(xy, t.derive(&t.derive(&f, Var::Y), Var::X));
    }

    #[test]
    fn composition_is_associative_and_acts(seed in any::<u64>()) {
        let t = Tower::new();
        let mut r = rng(seed);
        let p = random_op(&mut r, 2, 1);
        let q = random_op(&mut r, 2, 1);
        let s = random_op(&mut r, 1, 1);
        prop_assert_eq!(p.compose(&q, &t).compose(&s, &t), p.compose(&q.compose(&s, &t), &t));
        let f = ratfun(&mut r);
        prop_assert_eq!(p.compose(&q, &t).apply(&f, &t), p.apply(&q.apply(&f, &t), &t));
        prop_assert_eq!(p.add(&q).apply(&f, &t), p.apply(&f, &t) + q.apply(&f, &t));
    }

    #[test]
    fn first_order_division_reconstructs(seed in any::<u64>(), vx in any::<bool>()) {
        let t = Tower::new();
        let mut r = rng(seed);
        let v = if vx { Var::X } else { Var::Y };
        let ord = 1 + (seed % 3) as u32;
        let p = DiffOp::from_terms((0..=ord).map(|i| {
            let e = if vx { (i, 0) } else { (0, i) };
            (e, poly(&mut r, 2))
        }));
        let d = DiffOp::first_order(v, ratfun(&mut r));
        let (q, rem) = p.right_divide_first_order(&d, &t).unwrap();
        prop_assert_eq!(q.compose(&d, &t).add(&DiffOp::scalar(rem)), p);
    }

    #[test]
    fn gauge_is_a_ring_map_and_keeps_invariants(seed in any::<u64>()) {
        let t = Tower::new();
        let mut r = rng(seed);
        let f = poly(&mut r, 2);
        let p = random_op(&mut r, 2, 1);
        let q = random_op(&mut r, 2, 1);
        prop_assert_eq!(p.compose(&q, &t).gauge(&f, &t), p.gauge(&f, &t).compose(&q.gauge(&f, &t), &t));
        let l = SchrodingerOp::new(poly(&mut r, 2), poly(&mut r, 2), poly(&mut r, 2));
        let lg = l.gauge(&f, &t);
        prop_assert_eq!(lg.as_diffop(), l.as_diffop().gauge(&f, &t));
        prop_assert_eq!(lg.laplace_invariants(&t), l.laplace_invariants(&t));
    }

    #[test]
    fn incomplete_factorizations(seed in any::<u64>()) {
        let t = Tower::new();
        let mut r = rng(seed);
        let l = SchrodingerOp::new(ratfun(&mut r), ratfun(&mut r), ratfun(&mut r));
        let fac = l.incomplete_factorizations(&t);
        let (p, q) = &fac.k_form;
        prop_assert_eq!(p.compose(q, &t).sub(&DiffOp::scalar(fac.k.clone())), l.as_diffop());
        let (p, q) = &fac.h_form;
        prop_assert_eq!(p.compose(q, &t).sub(&DiffOp::scalar(fac.h.clone())), l.as_diffop());
    }

    #[test]
    fn laplace_steps_carry_invariants(seed in any::<u64>()) {
        let t = Tower::new();
        let mut r = rng(seed);
        let l = generic_schrodinger(&mut r, &t);
        let (h, k) = l.laplace_invariants(&t);
        let right = l.laplace_transform(Direction::Right, &t).unwrap().morphism;
        prop_assert!(right.verify(&t).0);
        prop_assert_eq!(right.target().h(&t), k);
        let left = l.laplace_transform(Direction::Left, &t).unwrap().morphism;
        prop_assert!(left.verify(&t).0);
        prop_assert_eq!(left.target().k(&t), h);
    }
}

proptest! {
    #![proptest_config(config(24))]

    /// `L(f(y) psi) = f L(psi) + f_y (Dx + b)(psi)`.
    #[test]
    fn kernel_shift_by_function_of_y(seed in any::<u64>()) {
        let t = Tower::new();
        let mut r = rng(seed);
        let (l, psis) = planted_instance(&mut r, &t, 1, 2);
        let psi = &psis[0];
        let f = poly(&mut r, 2).substitute(&|v| (v == 0).then(|| int(2))).unwrap();
        let fy = t.derive(&f, Var::Y);
        let my = DiffOp::first_order(Var::X, l.b().clone());
        prop_assert_eq!(l.apply(&(f.clone() * psi.clone()), &t), fy * my.apply(psi, &t));
    }

    /// A transformation maps the kernel of its source into that of its target.
    #[test]
    fn kernels_map_forward(seed in any::<u64>(), vx in any::<bool>()) {
        let t = Tower::new();
        let mut r = rng(seed);
        let (l, psis) = planted_instance(&mut r, &t, 2, 2);
        let v = if vx { Var::X } else { Var::Y };
        if t.derive(&psis[0], v).is_zero() {
            return Ok(());
        }
        let (m, _) = make_first_order_wronskian(&l, &psis[0], v, &t).unwrap();
        prop_assert!(m.apply(&psis[0], &t).is_zero());
        let image = m.apply(&psis[1], &t);
        prop_assert!(m.target().apply(&image, &t).is_zero());
        let lap = l.laplace_transform(Direction::Right, &t).unwrap().morphism;
        prop_assert!(lap.target().apply(&lap.apply(&psis[1], &t), &t).is_zero());
    }
}

proptest! {
    #![proptest_config(config(8))]

    /// The normalized Wronskian operator annihilates its kernel elements and
    /// agrees with the transformation built from them.
    #[test]
    fn wronskian_transformation_annihilates_its_flag(seed in any::<u64>(), split in 0usize..3) {
        let t = Tower::new();
        let mut r = rng(seed);
        let (m, n) = [(2, 0), (1, 1), (0, 2)][split];
        let (l, psis) = planted_instance(&mut r, &t, 2, 2);
        let Ok(dt) = make_wronskian_dt(&l, &psis, m, n, &t) else { return Ok(()) };
        prop_assert!(dt.verify(&t).0);
        prop_assert_eq!(dt.order(), 2);
        for p in &psis {
            prop_assert!(dt.apply(p, &t).is_zero());
        }
    }
}
