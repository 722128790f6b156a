//! Independent reference computations shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashSet;

use num_rational::Rational64;
use num_traits::Signed;
use toricsec::{build_model, ExtGroup, PicClass, StackyFanInput, ToricStackModel};

pub fn weights(w: &[i64]) -> ToricStackModel {
    build_model(&StackyFanInput::Weights { weights: w.to_vec() }).unwrap()
}

pub fn rays(r: &[[i64; 2]]) -> ToricStackModel {
    build_model(&StackyFanInput::Rays {
        lattice_rank: 2,
        rays: r.iter().map(|v| v.to_vec()).collect(),
    })
    .unwrap()
}

pub fn p1p1() -> ToricStackModel {
    rays(&[[1, 0], [-1, 0], [0, 1], [0, -1]])
}

pub fn hirzebruch() -> ToricStackModel {
    rays(&[[1, 0], [0, 1], [-1, 1], [0, -2]])
}

pub fn degs(ds: &[i64]) -> Vec<PicClass> {
    ds.iter().map(|&d| PicClass::new(vec![d])).collect()
}

/// Normalized volume of a complete 2-dimensional fan: sum of `|det|` over
/// consecutive rays in angular order.
pub fn normalized_volume_2d(rays: &[Vec<i64>]) -> i64 {
    let mut sorted: Vec<&Vec<i64>> = rays.iter().collect();
    sorted.sort_by(|a, b| {
        let ta = (a[1] as f64).atan2(a[0] as f64);
        let tb = (b[1] as f64).atan2(b[0] as f64);
        ta.partial_cmp(&tb).unwrap()
    });
    (0..sorted.len())
        .map(|i| {
            let (u, v) = (sorted[i], sorted[(i + 1) % sorted.len()]);
            (u[0] * v[1] - u[1] * v[0]).abs()
        })
        .sum()
}

/// Brute-force Ext oracle: enumerates every exponent vector obeying a sign
/// pattern inside a box that provably contains all such lifts of classes
/// with `|f| <= f_bound` and `|alpha| <= alpha_bound`, and records the
/// classes reached.
pub struct BruteExt {
    reached: Vec<(ExtGroup, HashSet<PicClass>)>,
    f_bound: Rational64,
    alpha_bound: i64,
}

fn for_each_vector(ranges: &[(i64, i64)], visit: &mut impl FnMut(&[i64])) {
    fn go(ranges: &[(i64, i64)], cur: &mut Vec<i64>, visit: &mut impl FnMut(&[i64])) {
        if cur.len() == ranges.len() {
            visit(cur);
            return;
        }
        let (lo, hi) = ranges[cur.len()];
        for x in lo..=hi {
            cur.push(x);
            go(ranges, cur, visit);
            cur.pop();
        }
    }
    go(ranges, &mut Vec::new(), visit);
}

impl BruteExt {
    pub fn new(model: &ToricStackModel, f_bound: Rational64, alpha_bound: i64) -> Self {
        let m = model.num_rays();
        let r = model.r();
        // r must be a positive relation among the rays
        for j in 0..model.lattice_rank() {
            let s: Rational64 = (0..m).map(|i| r[i] * model.rays()[i][j]).sum();
            assert_eq!(s, Rational64::from_integer(0));
        }
        assert!(r.iter().all(|x| *x > Rational64::from_integer(0)));
        let by_f = |i: usize| (f_bound / r[i]).floor().to_integer();
        let mut groups = vec![ExtGroup::Hom, ExtGroup::ExtTop];
        if model.picard_rank() == 2 {
            groups.extend([ExtGroup::ExtPlus, ExtGroup::ExtMinus]);
        }
        let alpha = model.alpha().map(<[i64]>::to_vec).unwrap_or_default();
        let by_alpha = |i: usize| alpha_bound / alpha[i].abs();
        let reached = groups
            .into_iter()
            .map(|g| {
                let ranges: Vec<(i64, i64)> = (0..m)
                    .map(|i| {
                        let nonneg = match g {
                            ExtGroup::Hom => true,
                            ExtGroup::ExtTop => false,
                            ExtGroup::ExtPlus => alpha[i] > 0,
                            ExtGroup::ExtMinus => alpha[i] < 0,
                        };
                        let b = match g {
                            ExtGroup::Hom | ExtGroup::ExtTop => by_f(i),
                            _ => by_alpha(i),
                        };
                        if nonneg {
                            (0, b)
                        } else {
                            (-b, -1)
                        }
                    })
                    .collect();
                let mut set = HashSet::new();
                for_each_vector(&ranges, &mut |a| {
                    set.insert(model.class_of(a));
                });
                (g, set)
            })
            .collect();
        BruteExt {
            reached,
            f_bound,
            alpha_bound,
        }
    }

    /// Whether `group(O(d1), O(d2))` is nonzero; the difference must lie in
    /// the oracle's window.
    pub fn nonzero(&self, model: &ToricStackModel, d1: &PicClass, d2: &PicClass, g: ExtGroup) -> bool {
        let d = d2 - d1;
        assert!(self.covers(model, &d), "difference {d} outside the oracle window");
        self.reached
            .iter()
            .find(|(h, _)| *h == g)
            .is_some_and(|(_, set)| set.contains(&d))
    }

    pub fn covers(&self, model: &ToricStackModel, d: &PicClass) -> bool {
        model.f_value(d).abs() <= self.f_bound && model.alpha_value(d).abs() <= self.alpha_bound
    }

    pub fn higher_nonzero(&self, model: &ToricStackModel, d1: &PicClass, d2: &PicClass) -> bool {
        let mut groups = vec![ExtGroup::ExtTop];
        if model.picard_rank() == 2 {
            groups.extend([ExtGroup::ExtPlus, ExtGroup::ExtMinus]);
        }
        groups.into_iter().any(|g| self.nonzero(model, d1, d2, g))
    }

    /// Strong exceptional by brute force.
    pub fn is_strong(&self, model: &ToricStackModel, set: &[PicClass]) -> bool {
        set.iter().all(|x| {
            set.iter()
                .all(|y| x == y || !self.higher_nonzero(model, x, y))
        })
    }
}
