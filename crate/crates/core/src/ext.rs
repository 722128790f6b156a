//! Nonvanishing of Hom and the higher Ext groups between line bundles.
//!
//! Every group in question is nonzero exactly when the difference of the two
//! classes has a lift `a in Z^m` obeying a per-coordinate sign pattern
//! (`a_i >= 0` or `a_i <= -1`). Lifts form the coset `a0 + L`, so the test is
//! an integer-feasibility question for a polyhedron in the coordinates of
//! `M`, which is bounded for every pattern used here on a Fano fan.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::cmp::Reverse;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Claim, Error, Result};
use crate::lattice::FourierMotzkin;
use crate::model::{PicClass, ToricStackModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    GeqZero,
    LeqMinusOne,
}

/// One sign constraint per ray.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignPattern(Vec<Sign>);

impl SignPattern {
    pub fn new(signs: Vec<Sign>) -> Self {
        SignPattern(signs)
    }

    pub fn uniform(m: usize, sign: Sign) -> Self {
        SignPattern(vec![sign; m])
    }

    /// `LeqMinusOne` on `negative`, `GeqZero` everywhere else.
    pub fn negative_on(m: usize, negative: &[usize]) -> Self {
        let mut signs = vec![Sign::GeqZero; m];
        for &i in negative {
            signs[i] = Sign::LeqMinusOne;
        }
        SignPattern(signs)
    }

    pub fn signs(&self) -> &[Sign] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The pattern whose lifts witness `group`.
    pub fn for_group(model: &ToricStackModel, group: ExtGroup) -> Self {
        let m = model.num_rays();
        match group {
            ExtGroup::Hom => Self::uniform(m, Sign::GeqZero),
            ExtGroup::ExtTop => Self::uniform(m, Sign::LeqMinusOne),
            ExtGroup::ExtPlus => Self::negative_on(m, model.i_minus()),
            ExtGroup::ExtMinus => Self::negative_on(m, model.i_plus()),
        }
    }

    /// Whether an exponent vector satisfies the pattern.
    pub fn admits(&self, a: &[i64]) -> bool {
        self.0.iter().zip(a).all(|(s, &x)| match s {
            Sign::GeqZero => x >= 0,
            Sign::LeqMinusOne => x <= -1,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtGroup {
    Hom,
    ExtTop,
    ExtPlus,
    ExtMinus,
}

impl ExtGroup {
    pub fn name(self) -> &'static str {
        match self {
            ExtGroup::Hom => "hom",
            ExtGroup::ExtTop => "ext_top",
            ExtGroup::ExtPlus => "ext_plus",
            ExtGroup::ExtMinus => "ext_minus",
        }
    }

    /// The groups of positive degree that exist for the given Picard rank.
    pub fn higher(picard_rank: usize) -> &'static [ExtGroup] {
        if picard_rank == 1 {
            &[ExtGroup::ExtTop]
        } else {
            &[ExtGroup::ExtTop, ExtGroup::ExtPlus, ExtGroup::ExtMinus]
        }
    }
}

impl fmt::Display for ExtGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which groups `Ext(O(D1), O(D2))` are nonzero. The rank-2 only groups are
/// `None` for Picard rank 1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ExtProfile {
    pub hom: bool,
    pub ext_top: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ext_plus: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ext_minus: Option<bool>,
}

impl ExtProfile {
    pub fn get(&self, group: ExtGroup) -> bool {
        match group {
            ExtGroup::Hom => self.hom,
            ExtGroup::ExtTop => self.ext_top,
            ExtGroup::ExtPlus => self.ext_plus.unwrap_or(false),
            ExtGroup::ExtMinus => self.ext_minus.unwrap_or(false),
        }
    }

    /// Some `Ext^t` with `t > 0` is nonzero.
    pub fn any_higher(&self) -> bool {
        self.ext_top || self.ext_plus == Some(true) || self.ext_minus == Some(true)
    }

    pub fn any(&self) -> bool {
        self.hom || self.any_higher()
    }
}

/// An ordered pair of a checked set with a nonzero higher Ext.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub from: PicClass,
    pub to: PicClass,
    pub group: ExtGroup,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {}) != 0", self.group, self.from, self.to)
    }
}

/// Fourier-Motzkin templates per sign pattern and memoized answers.
#[derive(Default)]
pub(crate) struct LiftCache {
    templates: RwLock<HashMap<SignPattern, Arc<FourierMotzkin>>>,
    answers: RwLock<HashMap<(PicClass, SignPattern), bool>>,
}

impl LiftCache {
    fn template(&self, model: &ToricStackModel, pattern: &SignPattern) -> Arc<FourierMotzkin> {
        if let Some(t) = self.templates.read().unwrap().get(pattern) {
            return Arc::clone(t);
        }
        // variables: w in M; a = a0 + (w . v_i)_i
        let rows: Vec<Vec<BigInt>> = model
            .rays()
            .iter()
            .zip(pattern.signs())
            .map(|(v, s)| {
                v.iter()
                    .map(|&x| match s {
                        Sign::GeqZero => BigInt::from(-x),
                        Sign::LeqMinusOne => BigInt::from(x),
                    })
                    .collect()
            })
            .collect();
        let fm = Arc::new(FourierMotzkin::new(model.lattice_rank(), &rows));
        self.templates
            .write()
            .unwrap()
            .entry(pattern.clone())
            .or_insert(fm)
            .clone()
    }
}

/// Whether some `a` with `class_of(a) = d` obeys `pattern`.
pub fn lift_exists(model: &ToricStackModel, d: &PicClass, pattern: &SignPattern) -> Result<bool> {
    if pattern.len() != model.num_rays() || d.rank() != model.picard_rank() {
        return Err(Error::PreconditionViolated(
            "pattern or class does not match the model".into(),
        ));
    }
    let cache = &model.lift_cache;
    let key = (d.clone(), pattern.clone());
    if let Some(&hit) = cache.answers.read().unwrap().get(&key) {
        return Ok(hit);
    }
    let fm = cache.template(model, pattern);
    let a0 = model.lift(d);
    let rhs: Vec<BigRational> = a0
        .iter()
        .zip(pattern.signs())
        .map(|(&a, s)| {
            let b = match s {
                Sign::GeqZero => a,
                Sign::LeqMinusOne => -1 - a,
            };
            BigRational::from_integer(BigInt::from(b))
        })
        .collect();
    let found = fm.first_point(&rhs)?.is_some();
    cache.answers.write().unwrap().insert(key, found);
    Ok(found)
}

/// Whether `group(O(d1), O(d2))` is nonzero.
pub fn ext_nonzero(
    model: &ToricStackModel,
    d1: &PicClass,
    d2: &PicClass,
    group: ExtGroup,
) -> Result<bool> {
    if model.picard_rank() == 1 && matches!(group, ExtGroup::ExtPlus | ExtGroup::ExtMinus) {
        return Ok(false);
    }
    lift_exists(model, &(d2 - d1), &SignPattern::for_group(model, group))
}

pub fn ext_profile(model: &ToricStackModel, d1: &PicClass, d2: &PicClass) -> Result<ExtProfile> {
    let hom = ext_nonzero(model, d1, d2, ExtGroup::Hom)?;
    let ext_top = ext_nonzero(model, d1, d2, ExtGroup::ExtTop)?;
    let (ext_plus, ext_minus) = if model.picard_rank() == 2 {
        (
            Some(ext_nonzero(model, d1, d2, ExtGroup::ExtPlus)?),
            Some(ext_nonzero(model, d1, d2, ExtGroup::ExtMinus)?),
        )
    } else {
        (None, None)
    };
    Ok(ExtProfile {
        hom,
        ext_top,
        ext_plus,
        ext_minus,
    })
}

/// First higher Ext from `d1` to `d2`, if any.
pub fn first_higher_ext(
    model: &ToricStackModel,
    d1: &PicClass,
    d2: &PicClass,
) -> Result<Option<ExtGroup>> {
    for &g in ExtGroup::higher(model.picard_rank()) {
        if ext_nonzero(model, d1, d2, g)? {
            return Ok(Some(g));
        }
    }
    Ok(None)
}

/// Smallest element of the semigroup in each residue class mod the least
/// weight (`None` where the class is never reached).
fn apery_set(weights: &[i64]) -> Vec<Option<i64>> {
    let w0 = *weights.iter().min().expect("nonempty weights") as usize;
    let mut dist: Vec<Option<i64>> = vec![None; w0];
    dist[0] = Some(0);
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0i64, 0usize)));
    while let Some(Reverse((d, r))) = heap.pop() {
        if dist[r] != Some(d) {
            continue;
        }
        for &w in weights {
            let nd = d + w;
            let nr = (r + w as usize) % w0;
            if dist[nr].is_none_or(|old| nd < old) {
                dist[nr] = Some(nd);
                heap.push(Reverse((nd, nr)));
            }
        }
    }
    dist
}

/// Whether `d` is a nonnegative integer combination of the weights.
pub fn rank1_semigroup_member(weights: &[i64], d: i64) -> bool {
    if d < 0 {
        return false;
    }
    if weights.is_empty() {
        return d == 0;
    }
    let apery = apery_set(weights);
    let w0 = apery.len() as i64;
    apery[d.rem_euclid(w0) as usize].is_some_and(|a| d >= a)
}

/// Largest integer outside the semigroup, `None` if infinitely many are.
pub fn frobenius_number(weights: &[i64]) -> Option<i64> {
    let apery = apery_set(weights);
    let w0 = apery.len() as i64;
    apery
        .iter()
        .map(|a| a.map(|a| a - w0))
        .collect::<Option<Vec<_>>>()
        .map(|v| v.into_iter().max().unwrap_or(-1))
}

fn reject_duplicates(set: &[PicClass]) -> Result<Vec<PicClass>> {
    let mut seen = BTreeSet::new();
    for c in set {
        if !seen.insert(c.clone()) {
            return Err(Error::DuplicateClass(c.clone()));
        }
    }
    Ok(seen.into_iter().collect())
}

/// Checks that `Ext^{>0}` vanishes in both directions for every pair.
/// Pairs are scanned in lexicographic order of the sorted set and the first
/// violation is reported as `Error::NotStrongExceptional`.
pub fn is_strong_exceptional(model: &ToricStackModel, set: &[PicClass]) -> Result<()> {
    match first_violation(model, set)? {
        None => Ok(()),
        Some(v) => Err(Error::NotStrongExceptional(v)),
    }
}

pub fn first_violation(model: &ToricStackModel, set: &[PicClass]) -> Result<Option<Violation>> {
    if set.is_empty() {
        return Err(Error::PreconditionViolated("empty collection".into()));
    }
    let sorted = reject_duplicates(set)?;
    for from in &sorted {
        for to in &sorted {
            if from == to {
                continue;
            }
            if let Some(group) = first_higher_ext(model, from, to)? {
                return Ok(Some(Violation {
                    from: from.clone(),
                    to: to.clone(),
                    group,
                }));
            }
        }
    }
    Ok(None)
}

/// Tie-break key for linear extensions: `(f, alpha, coordinates)`.
pub(crate) fn canonical_key(model: &ToricStackModel, d: &PicClass) -> (i64, i64, PicClass) {
    (model.f_scaled(d), model.alpha_value(d), d.clone())
}

/// Linear extension of the Hom order on a strong exceptional set.
pub fn order_by_hom(model: &ToricStackModel, set: &[PicClass]) -> Result<Vec<PicClass>> {
    let sorted = reject_duplicates(set)?;
    let n = sorted.len();
    let mut succ = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && ext_nonzero(model, &sorted[i], &sorted[j], ExtGroup::Hom)? {
                succ[i].push(j);
                indegree[j] += 1;
            }
        }
    }
    let mut ready: BTreeMap<(i64, i64, PicClass), usize> = BTreeMap::new();
    for (i, d) in sorted.iter().enumerate() {
        if indegree[i] == 0 {
            ready.insert(canonical_key(model, d), i);
        }
    }
    let mut out = Vec::with_capacity(n);
    while let Some((_, i)) = ready.pop_first() {
        out.push(sorted[i].clone());
        for &j in &succ[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.insert(canonical_key(model, &sorted[j]), j);
            }
        }
    }
    if out.len() != n {
        return Err(Error::contradiction(
            Claim::HomAntisymmetry,
            "the Hom relation on the set has a cycle",
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, StackyFanInput};

    fn wp(w: &[i64]) -> ToricStackModel {
        build_model(&StackyFanInput::Weights { weights: w.to_vec() }).unwrap()
    }

    fn p1p1() -> ToricStackModel {
        build_model(&StackyFanInput::Rays {
            lattice_rank: 2,
            rays: vec![vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]],
        })
        .unwrap()
    }

    fn deg(d: i64) -> PicClass {
        PicClass::new(vec![d])
    }

    fn degs(ds: &[i64]) -> Vec<PicClass> {
        ds.iter().map(|&d| deg(d)).collect()
    }

    #[test]
    fn lift_examples() {
        let m = p1p1();
        let all_neg = SignPattern::uniform(4, Sign::LeqMinusOne);
        assert!(lift_exists(&m, &m.class_of(&[-1, -1, -1, -1]), &all_neg).unwrap());
        // every lift has a1 + a2 = -1, impossible with both <= -1
        assert!(!lift_exists(&m, &m.class_of(&[-1, 0, -2, 0]), &all_neg).unwrap());
        let w = wp(&[5, 6]);
        assert!(!lift_exists(&w, &deg(-10), &SignPattern::uniform(2, Sign::LeqMinusOne)).unwrap());
    }

    #[test]
    fn profile_examples() {
        let w = wp(&[5, 6]);
        let p = ext_profile(&w, &deg(0), &deg(-11)).unwrap();
        assert!(p.ext_top);
        assert!(!p.hom);
        assert_eq!(p.ext_plus, None);

        let m = p1p1();
        for d in [m.zero_class(), m.class_of(&[2, 0, -1, 0])] {
            let p = ext_profile(&m, &d, &d).unwrap();
            assert!(p.hom && !p.any_higher());
        }
        let p = ext_profile(&m, &m.zero_class(), &m.class_of(&[0, 0, -1, -1])).unwrap();
        assert_eq!(p.ext_plus, Some(true));
        assert_eq!(p.ext_minus, Some(false));
        assert!(!p.hom && !p.ext_top);
    }

    #[test]
    fn semigroup() {
        assert!(rank1_semigroup_member(&[5, 6], 0));
        assert!(!rank1_semigroup_member(&[5, 6], 19));
        assert!(rank1_semigroup_member(&[5, 6], 11));
        assert!(rank1_semigroup_member(&[5, 6], 20));
        assert!(!rank1_semigroup_member(&[5, 6], -5));
        assert_eq!(frobenius_number(&[5, 6]), Some(19));
        assert_eq!(frobenius_number(&[2, 3]), Some(1));
        assert_eq!(frobenius_number(&[1, 2, 3]), Some(-1));
        assert_eq!(frobenius_number(&[2, 4]), None);
    }

    #[test]
    fn semigroup_matches_lifts() {
        for w in [vec![2, 3], vec![5, 6], vec![1, 2, 3]] {
            let m = wp(&w);
            let hom = SignPattern::uniform(w.len(), Sign::GeqZero);
            for d in -200..=200 {
                assert_eq!(
                    rank1_semigroup_member(&w, d),
                    lift_exists(&m, &deg(d), &hom).unwrap(),
                    "weights {w:?}, d = {d}"
                );
            }
        }
    }

    #[test]
    fn strong_checks() {
        let w = wp(&[5, 6]);
        let wide = degs(&[-15, -13, -10, -9, -8, -7, -6, -5, -3, -1, 0]);
        assert_eq!(is_strong_exceptional(&w, &wide), Ok(()));
        let e = is_strong_exceptional(&w, &degs(&[0, -11])).unwrap_err();
        match e {
            Error::NotStrongExceptional(v) => {
                assert_eq!(v.group, ExtGroup::ExtTop);
                assert_eq!((v.from, v.to), (deg(0), deg(-11)));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(is_strong_exceptional(&w, &degs(&[7])), Ok(()));
        assert_eq!(
            is_strong_exceptional(&w, &degs(&[1, 1])),
            Err(Error::DuplicateClass(deg(1)))
        );
    }

    #[test]
    fn hom_order() {
        let w = wp(&[5, 6]);
        assert_eq!(order_by_hom(&w, &degs(&[0, -1, -6])).unwrap(), degs(&[-6, -1, 0]));
        assert_eq!(order_by_hom(&w, &degs(&[4])).unwrap(), degs(&[4]));
        let wide = degs(&[0, -1, -3, -5, -6, -7, -8, -9, -10, -13, -15]);
        let mut sorted = wide.clone();
        sorted.sort();
        assert_eq!(order_by_hom(&w, &wide).unwrap(), sorted);
    }

    #[test]
    fn pattern_admits() {
        let p = SignPattern::negative_on(3, &[1]);
        assert!(p.admits(&[0, -1, 5]));
        assert!(!p.admits(&[0, 0, 5]));
        assert!(!p.admits(&[-1, -1, 5]));
    }
}
