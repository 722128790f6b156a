//! Reference full strong exceptional collections: a run of consecutive
//! degrees in rank 1 and the classes inside a generic parallelogram in
//! rank 2.

use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::lattice::{bounded_integer_points, RationalPolyhedron};
use crate::model::{PicClass, ToricStackModel};

/// Perturbation attempts `eps = 1/(2*3^k)` for `k = 0..GENERIC_ATTEMPTS`.
pub const GENERIC_ATTEMPTS: u32 = 12;

/// Open box `alpha in (a0, a1)`, `f in (f0, f1)` in the plane of the two
/// functionals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PicBox {
    pub alpha: (Rational64, Rational64),
    pub f: (Rational64, Rational64),
}

impl PicBox {
    /// The translate `p + P` of the parallelogram
    /// `|alpha| < alpha(E+)/2`, `|f| < 1/2`.
    pub fn parallelogram(model: &ToricStackModel, p: (Rational64, Rational64)) -> Self {
        let half_a = Rational64::new(model.alpha_e_plus(), 2);
        let half = Rational64::new(1, 2);
        PicBox {
            alpha: (p.0 - half_a, p.0 + half_a),
            f: (p.1 - half, p.1 + half),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.0 >= self.alpha.1 || self.f.0 >= self.f.1
    }

    /// Scales both intervals about their midpoints.
    pub fn inflate(&self, factor: i64) -> Self {
        let grow = |(lo, hi): (Rational64, Rational64)| {
            let mid = (lo + hi) / 2;
            let half = (hi - lo) / 2 * factor;
            (mid - half, mid + half)
        };
        PicBox {
            alpha: grow(self.alpha),
            f: grow(self.f),
        }
    }

    pub fn contains(&self, model: &ToricStackModel, d: &PicClass) -> bool {
        let a = Rational64::from_integer(model.alpha_value(d));
        let f = model.f_value(d);
        self.alpha.0 < a && a < self.alpha.1 && self.f.0 < f && f < self.f.1
    }

    fn on_boundary(&self, model: &ToricStackModel, d: &PicClass) -> bool {
        let a = Rational64::from_integer(model.alpha_value(d));
        let f = model.f_value(d);
        a == self.alpha.0 || a == self.alpha.1 || f == self.f.0 || f == self.f.1
    }
}

fn floor_int(x: Rational64) -> i64 {
    x.floor().to_integer()
}

fn ceil_int(x: Rational64) -> i64 {
    x.ceil().to_integer()
}

/// Integer points of `lo <= alpha <= hi`, `flo <= f * f_den <= fhi`.
fn classes_between(model: &ToricStackModel, alpha: (i64, i64), f: (i64, i64)) -> Vec<PicClass> {
    if alpha.0 > alpha.1 || f.0 > f.1 {
        return Vec::new();
    }
    let (af, ff) = model.functional_forms();
    let neg = |v: &[i64]| v.iter().map(|x| -x).collect::<Vec<_>>();
    let poly = RationalPolyhedron::from_integers(
        2,
        &[af.to_vec(), neg(af), ff.to_vec(), neg(ff)],
        &[alpha.1, -alpha.0, f.1, -f.0],
    );
    let points = bounded_integer_points(&poly)
        .expect("alpha and f are independent, so every box is bounded");
    let mut out: Vec<PicClass> = points
        .into_iter()
        .map(|p| {
            PicClass::new(
                p.iter()
                    .map(|x: &BigInt| x.to_i64().expect("box point fits in i64"))
                    .collect(),
            )
        })
        .collect();
    out.sort();
    out
}

/// Classes strictly inside the box, sorted.
pub fn classes_in_box(model: &ToricStackModel, bx: &PicBox) -> Result<Vec<PicClass>> {
    require_rank_two(model)?;
    let den = model.f_den();
    Ok(classes_between(
        model,
        (floor_int(bx.alpha.0) + 1, ceil_int(bx.alpha.1) - 1),
        (floor_int(bx.f.0 * den) + 1, ceil_int(bx.f.1 * den) - 1),
    ))
}

/// Classes in the closed box.
pub fn classes_in_closed_box(model: &ToricStackModel, bx: &PicBox) -> Result<Vec<PicClass>> {
    require_rank_two(model)?;
    let den = model.f_den();
    Ok(classes_between(
        model,
        (ceil_int(bx.alpha.0), floor_int(bx.alpha.1)),
        (ceil_int(bx.f.0 * den), floor_int(bx.f.1 * den)),
    ))
}

/// No class of `Pic` lies on the boundary of the box.
pub fn is_generic(model: &ToricStackModel, bx: &PicBox) -> Result<bool> {
    Ok(!classes_in_closed_box(model, bx)?
        .iter()
        .any(|d| bx.on_boundary(model, d)))
}

fn require_rank_two(model: &ToricStackModel) -> Result<()> {
    if model.picard_rank() != 2 {
        return Err(Error::UnsupportedPicardRank {
            rank: model.picard_rank() as i64,
        });
    }
    Ok(())
}

/// `1 / (2 * 3^k)`.
pub fn perturbation(k: u32) -> Rational64 {
    Rational64::new(1, 2 * 3i64.pow(k))
}

/// The generic translate used for the reference collection: `p = (eps, eps)`
/// for the first `eps` in the perturbation sequence that works.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenericBox {
    pub center: (Rational64, Rational64),
    pub attempt: u32,
    pub bounds: PicBox,
}

pub fn standard_box(model: &ToricStackModel) -> Result<GenericBox> {
    require_rank_two(model)?;
    for k in 0..GENERIC_ATTEMPTS {
        let eps = perturbation(k);
        let bounds = PicBox::parallelogram(model, (eps, eps));
        if is_generic(model, &bounds)? {
            return Ok(GenericBox {
                center: (eps, eps),
                attempt: k,
                bounds,
            });
        }
    }
    Err(Error::GenericityFailure)
}

/// Rank 1: `O(-k0+1), ..., O(0)`. Rank 2: the classes in the standard box.
pub fn standard_collection(model: &ToricStackModel) -> Result<Vec<PicClass>> {
    if model.picard_rank() == 1 {
        let k0 = model.k0_rank() as i64;
        return Ok((-k0 + 1..=0).map(|d| PicClass::new(vec![d])).collect());
    }
    let generic = standard_box(model)?;
    classes_in_box(model, &generic.bounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ext::is_strong_exceptional;
    use crate::model::test_models;

    fn q(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn rank_one_examples() {
        let m = test_models::weights(&[1, 1, 1]);
        let degs: Vec<i64> = standard_collection(&m).unwrap().iter().map(|c| c.coords()[0]).collect();
        assert_eq!(degs, vec![-2, -1, 0]);
        let m = test_models::weights(&[5, 6]);
        let s = standard_collection(&m).unwrap();
        assert_eq!(s.len(), 11);
        assert_eq!(s[0], PicClass::new(vec![-10]));
        assert_eq!(is_strong_exceptional(&m, &s), Ok(()));
    }

    #[test]
    fn p1xp1_standard() {
        let m = test_models::rays(2, &[[1, 0], [-1, 0], [0, 1], [0, -1]]).unwrap();
        let g = standard_box(&m).unwrap();
        assert_eq!(g.attempt, 1);
        let s = standard_collection(&m).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(is_strong_exceptional(&m, &s), Ok(()));
        for d in &s {
            assert!(g.bounds.contains(&m, d));
        }
    }

    #[test]
    fn hirzebruch_standard() {
        let m = test_models::rays(2, &[[1, 0], [0, 1], [-1, 1], [0, -2]]).unwrap();
        let s = standard_collection(&m).unwrap();
        assert_eq!(s.len(), m.k0_rank());
        assert_eq!(is_strong_exceptional(&m, &s), Ok(()));
    }

    #[test]
    fn box_queries() {
        let m = test_models::rays(2, &[[1, 0], [-1, 0], [0, 1], [0, -1]]).unwrap();
        let empty = PicBox {
            alpha: (q(0, 1), q(0, 1)),
            f: (q(0, 1), q(1, 1)),
        };
        assert!(classes_in_box(&m, &empty).unwrap().is_empty());
        let bx = PicBox {
            alpha: (q(-11, 10), q(9, 10)),
            f: (q(-11, 20), q(9, 20)),
        };
        let inside = classes_in_box(&m, &bx).unwrap();
        assert_eq!(inside.len(), 4);

        // translating the box by a class translates its contents
        let shift = m.class_of(&[1, 0, 2, 0]);
        let (da, df) = (
            Rational64::from_integer(m.alpha_value(&shift)),
            m.f_value(&shift),
        );
        let moved = PicBox {
            alpha: (bx.alpha.0 + da, bx.alpha.1 + da),
            f: (bx.f.0 + df, bx.f.1 + df),
        };
        let mut expected: Vec<PicClass> = inside.iter().map(|d| d + &shift).collect();
        expected.sort();
        assert_eq!(classes_in_box(&m, &moved).unwrap(), expected);

        let big = bx.inflate(3);
        let all = classes_in_box(&m, &big).unwrap();
        assert!(inside.iter().all(|d| all.contains(d)));
    }

    #[test]
    fn rank_one_has_no_boxes() {
        let m = test_models::weights(&[5, 6]);
        let bx = PicBox {
            alpha: (q(0, 1), q(1, 1)),
            f: (q(0, 1), q(1, 1)),
        };
        assert!(matches!(
            classes_in_box(&m, &bx),
            Err(Error::UnsupportedPicardRank { rank: 1 })
        ));
    }
}
