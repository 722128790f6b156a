mod common;

use num_rational::Rational64;
use proptest::prelude::*;
use toricsec::moves::{MoveRule, Phase};
use toricsec::search::DEFAULT_MAX_POOL;
use toricsec::{
    certify_full, choose_move, enumerate_collections, ext_nonzero, f_reduce, lift_exists,
    normalize_twist, order_by_hom, rank1_semigroup_member, strip_reduce, Direction, ExtGroup,
    PicBox, PicClass, SearchWindow, SignPattern,
};

use common::*;

#[test]
fn p1xp1_strip_then_f() {
    let m = p1p1();
    let e = m.e_class();
    let mut t = vec![m.zero_class(), e[0].clone(), e[2].clone(), &e[0] + &e[2]];
    t.sort();
    let (t1, steps) = strip_reduce(&m, &t).unwrap();
    assert_eq!(steps.len(), 1);
    let fs: Vec<Rational64> = t1.iter().map(|d| m.f_value(d)).collect();
    let width = fs.iter().max().unwrap() - fs.iter().min().unwrap();
    assert_eq!(width, Rational64::new(3, 4));
    let (t2, more) = f_reduce(&m, &t1).unwrap();
    assert!(more.is_empty());
    assert_eq!(t2, t1);
}

#[test]
fn forced_plus_fires_on_hirzebruch() {
    let m = hirzebruch();
    let w = SearchWindow::default_for(&m).unwrap();
    let out = enumerate_collections(&m, &w, true, DEFAULT_MAX_POOL).unwrap();
    let mut forced_plus = 0;
    for rep in &out.representatives {
        let cert = certify_full(&m, rep).unwrap();
        for s in &cert.steps {
            let ev = s.evidence.as_ref().unwrap();
            if s.phase == Phase::FReduce && ev.rule == MoveRule::Forced && ev.forced_plus {
                assert_eq!(s.direction, Direction::PlusEMinus);
                forced_plus += 1;
            }
        }
    }
    assert!(forced_plus > 0);
}

#[test]
fn choose_move_forced_example() {
    // a collection whose alpha-maximal element has f(D - E+) <= min f
    let m = hirzebruch();
    let w = SearchWindow::default_for(&m).unwrap();
    let out = enumerate_collections(&m, &w, true, DEFAULT_MAX_POOL).unwrap();
    let found = out.representatives.iter().any(|t| {
        let amax = t.iter().map(|d| m.alpha_value(d)).max().unwrap();
        let fmin = t.iter().map(|d| m.f_scaled(d)).min().unwrap();
        t.iter().enumerate().any(|(i, d)| {
            m.alpha_value(d) == amax
                && m.f_scaled(&(d - m.e_plus().unwrap())) <= fmin
                && choose_move(&m, t, i).unwrap().direction == Direction::PlusEMinus
        })
    });
    assert!(found);
}

/// Twisting an enumerated collection by a class that keeps it inside the
/// window gives a set already counted.
#[test]
fn enumeration_is_twist_complete() {
    for m in [weights(&[5, 6]), p1p1(), hirzebruch()] {
        let w = SearchWindow::default_for(&m).unwrap();
        let pool = w.pool(&m).unwrap();
        let out = enumerate_collections(&m, &w, true, DEFAULT_MAX_POOL).unwrap();
        for rep in &out.representatives {
            for target in &pool {
                let shift = target - &rep[0];
                let moved: Vec<PicClass> = rep.iter().map(|d| d + &shift).collect();
                if moved.iter().all(|d| pool.contains(d)) {
                    assert!(out.collections.contains(&normalize_twist(&m, &moved)));
                }
            }
        }
    }
}

#[test]
fn wp56_window_contains_wide_collection() {
    let m = weights(&[5, 6]);
    let w = SearchWindow::Degrees { low: -20, high: 5 };
    let out = enumerate_collections(&m, &w, true, DEFAULT_MAX_POOL).unwrap();
    let wide = degs(&[-15, -13, -10, -9, -8, -7, -6, -5, -3, -1, 0]);
    assert!(out.collections.contains(&normalize_twist(&m, &wide)));
}

#[test]
fn hom_is_antisymmetric() {
    for m in [weights(&[2, 3]), p1p1(), hirzebruch()] {
        let pool = SearchWindow::default_for(&m).unwrap().pool(&m).unwrap();
        for x in &pool {
            for y in &pool {
                if x != y {
                    let both = ext_nonzero(&m, x, y, ExtGroup::Hom).unwrap()
                        && ext_nonzero(&m, y, x, ExtGroup::Hom).unwrap();
                    assert!(!both, "{x} {y}");
                }
            }
        }
    }
}

#[test]
fn hom_order_examples() {
    let m = weights(&[5, 6]);
    assert_eq!(order_by_hom(&m, &degs(&[0, -1, -6])).unwrap(), degs(&[-6, -1, 0]));
}

#[test]
fn rank_two_box_equivariance() {
    let m = hirzebruch();
    let q = Rational64::new;
    let bx = PicBox {
        alpha: (q(-7, 3), q(11, 2)),
        f: (q(-4, 5), q(3, 7)),
    };
    let inside = toricsec::classes_in_box(&m, &bx).unwrap();
    for shift in [m.e_class()[0].clone(), m.e_class()[3].clone(), m.anticanonical()] {
        let (da, df) = (Rational64::from_integer(m.alpha_value(&shift)), m.f_value(&shift));
        let moved = PicBox {
            alpha: (bx.alpha.0 + da, bx.alpha.1 + da),
            f: (bx.f.0 + df, bx.f.1 + df),
        };
        let mut expected: Vec<PicClass> = inside.iter().map(|d| d + &shift).collect();
        expected.sort();
        assert_eq!(toricsec::classes_in_box(&m, &moved).unwrap(), expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn semigroup_matches_hom_lift(w1 in 1i64..8, w2 in 1i64..8, d in -60i64..60) {
        prop_assume!(num_integer::gcd(w1, w2) == 1);
        let m = weights(&[w1, w2]);
        let hom = lift_exists(&m, &PicClass::new(vec![d]), &SignPattern::for_group(&m, ExtGroup::Hom)).unwrap();
        prop_assert_eq!(rank1_semigroup_member(&[w1, w2], d), hom);
    }

    #[test]
    fn lift_roundtrip(x in -50i64..50, y in -50i64..50) {
        let m = hirzebruch();
        let d = PicClass::new(vec![x, y]);
        prop_assert_eq!(m.class_of(&m.lift(&d)), d);
    }

    #[test]
    fn normalize_is_twist_invariant(
        pts in proptest::collection::btree_set((-9i64..9, -9i64..9), 1..6),
        sx in -20i64..20, sy in -20i64..20,
    ) {
        let m = p1p1();
        let t: Vec<PicClass> = pts.iter().map(|&(a, b)| PicClass::new(vec![a, b])).collect();
        let shift = PicClass::new(vec![sx, sy]);
        let moved: Vec<PicClass> = t.iter().map(|d| d + &shift).collect();
        let n = normalize_twist(&m, &t);
        prop_assert_eq!(normalize_twist(&m, &moved), n.clone());
        prop_assert_eq!(normalize_twist(&m, &n), n);
    }

    #[test]
    fn serre_identity_random(a in -6i64..6, b in -6i64..6, c in -6i64..6, d in -6i64..6) {
        let m = hirzebruch();
        let d1 = PicClass::new(vec![a, b]);
        let d2 = PicClass::new(vec![c, d]);
        let top = ext_nonzero(&m, &d1, &d2, ExtGroup::ExtTop).unwrap();
        let hom = ext_nonzero(&m, &d2, &(&d1 - &m.anticanonical()), ExtGroup::Hom).unwrap();
        prop_assert_eq!(top, hom);
    }
}
