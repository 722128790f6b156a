//! Exhaustive search for maximal (strong) exceptional collections of line
//! bundles inside a finite window, up to twist.

use std::collections::BTreeMap;

use num_rational::Rational64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ext::{ext_profile, first_violation, ExtProfile, Violation};
use crate::model::{PicClass, ToricStackModel};
use crate::standard::{classes_in_closed_box, standard_box, PicBox};

pub const DEFAULT_MAX_POOL: usize = 200;

/// Closed region of `Pic` whose classes form the candidate pool.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchWindow {
    Degrees { low: i64, high: i64 },
    Box(PicBox),
}

impl SearchWindow {
    /// Rank 1: degrees in `[-3 k0, 3 k0]`. Rank 2: the standard box
    /// inflated by 3.
    pub fn default_for(model: &ToricStackModel) -> Result<Self> {
        if model.picard_rank() == 1 {
            let k = 3 * model.k0_rank() as i64;
            Ok(SearchWindow::Degrees { low: -k, high: k })
        } else {
            Ok(SearchWindow::Box(standard_box(model)?.bounds.inflate(3)))
        }
    }

    /// Window from `a0,a1,f0,f1`. For rank 1 only the alpha pair is used,
    /// as a degree range.
    pub fn from_bounds(model: &ToricStackModel, b: [Rational64; 4]) -> Result<Self> {
        if model.picard_rank() == 1 {
            if !b[0].is_integer() || !b[1].is_integer() {
                return Err(Error::InvalidInput("degree bounds must be integers".into()));
            }
            Ok(SearchWindow::Degrees {
                low: b[0].to_integer(),
                high: b[1].to_integer(),
            })
        } else {
            Ok(SearchWindow::Box(PicBox {
                alpha: (b[0], b[1]),
                f: (b[2], b[3]),
            }))
        }
    }

    pub fn pool(&self, model: &ToricStackModel) -> Result<Vec<PicClass>> {
        match (self, model.picard_rank()) {
            (SearchWindow::Degrees { low, high }, 1) => {
                Ok((*low..=*high).map(|d| PicClass::new(vec![d])).collect())
            }
            (SearchWindow::Box(bx), 2) => classes_in_closed_box(model, bx),
            _ => Err(Error::InvalidInput(
                "window kind does not match the Picard rank".into(),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    pub pool_size: usize,
    /// Normalized collections, sorted.
    pub collections: Vec<Vec<PicClass>>,
    /// For each normalized collection, the lexicographically first in-window
    /// twist that was found.
    pub representatives: Vec<Vec<PicClass>>,
}

/// Key for the canonical minimal element: `(f, alpha, coordinates)`.
fn min_key(model: &ToricStackModel, d: &PicClass) -> (i64, i64, PicClass) {
    (model.f_scaled(d), model.alpha_value(d), d.clone())
}

/// Translates so that the canonical minimal element becomes zero.
pub fn normalize_twist(model: &ToricStackModel, t: &[PicClass]) -> Vec<PicClass> {
    let Some(min) = t.iter().min_by_key(|d| min_key(model, d)) else {
        return Vec::new();
    };
    let min = min.clone();
    let mut out: Vec<PicClass> = t.iter().map(|d| d - &min).collect();
    out.sort();
    out
}

#[derive(Clone)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn new(n: usize) -> Self {
        BitSet(vec![0; n.div_ceil(64)])
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn and(&self, other: &BitSet) -> BitSet {
        BitSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(k, &w)| {
            (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| k * 64 + b)
        })
    }

    /// Elements greater than `i`.
    fn above(&self, i: usize) -> BitSet {
        let mut out = self.clone();
        for k in 0..out.0.len() {
            let lo = k * 64;
            if lo + 64 <= i + 1 {
                out.0[k] = 0;
            } else if lo <= i {
                out.0[k] &= !0u64 << (i + 1 - lo);
            }
        }
        out
    }
}

/// All `k`-cliques containing `first` as their smallest vertex.
fn cliques_from(adj: &[BitSet], first: usize, k: usize) -> Vec<Vec<usize>> {
    fn extend(
        adj: &[BitSet],
        chosen: &mut Vec<usize>,
        candidates: &BitSet,
        k: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        if chosen.len() == k {
            out.push(chosen.clone());
            return;
        }
        if chosen.len() + candidates.len() < k {
            return;
        }
        for v in candidates.iter() {
            let next = candidates.and(&adj[v]).above(v);
            chosen.push(v);
            extend(adj, chosen, &next, k, out);
            chosen.pop();
        }
    }
    let mut out = Vec::new();
    let candidates = adj[first].above(first);
    extend(adj, &mut vec![first], &candidates, k, &mut out);
    out
}

/// A set is an exceptional sequence in some order iff the relation
/// "`Ext*(y, x) != 0` forces `y` before `x`" has no cycle.
fn orderable(profiles: &[Vec<ExtProfile>], members: &[usize]) -> bool {
    let n = members.len();
    let mut indegree = vec![0usize; n];
    for (a, &x) in members.iter().enumerate() {
        for (b, &y) in members.iter().enumerate() {
            if a != b && profiles[x][y].any() {
                indegree[b] += 1;
            }
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&a| indegree[a] == 0).collect();
    let mut seen = 0;
    while let Some(a) = ready.pop() {
        seen += 1;
        for b in 0..n {
            if a != b && profiles[members[a]][members[b]].any() {
                indegree[b] -= 1;
                if indegree[b] == 0 {
                    ready.push(b);
                }
            }
        }
    }
    seen == n
}

/// All maximal-length collections in the window, up to twist.
///
/// With `strong` the pairs must have vanishing `Ext^{>0}` both ways;
/// otherwise the set must admit an order in which it is exceptional.
pub fn enumerate_collections(
    model: &ToricStackModel,
    window: &SearchWindow,
    strong: bool,
    max_pool: usize,
) -> Result<SearchOutcome> {
    let pool = window.pool(model)?;
    if pool.len() > max_pool {
        return Err(Error::PoolTooLarge {
            size: pool.len(),
            cap: max_pool,
        });
    }
    let n = pool.len();
    let profiles: Vec<Vec<ExtProfile>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Ok(ExtProfile::default())
                    } else {
                        ext_profile(model, &pool[i], &pool[j])
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut adj = vec![BitSet::new(n); n];
    for i in 0..n {
        for j in 0..n {
            let ok = if strong {
                !profiles[i][j].any_higher() && !profiles[j][i].any_higher()
            } else {
                !(profiles[i][j].any() && profiles[j][i].any())
            };
            if i != j && ok {
                adj[i].insert(j);
            }
        }
    }
    let k = model.k0_rank();
    let cliques: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .flat_map_iter(|first| cliques_from(&adj, first, k))
        .filter(|c| strong || orderable(&profiles, c))
        .collect();
    let mut found: BTreeMap<Vec<PicClass>, Vec<PicClass>> = BTreeMap::new();
    for c in cliques {
        let members: Vec<PicClass> = c.iter().map(|&i| pool[i].clone()).collect();
        let key = normalize_twist(model, &members);
        match found.get_mut(&key) {
            Some(rep) if *rep <= members => {}
            Some(rep) => *rep = members,
            None => {
                found.insert(key, members);
            }
        }
    }
    let (collections, representatives) = found.into_iter().unzip();
    Ok(SearchOutcome {
        pool_size: n,
        collections,
        representatives,
    })
}

/// For every pool class outside `t`, the first violation of `t` plus that
/// class, or `None` if the enlarged set is still strong exceptional.
pub fn extension_violations(
    model: &ToricStackModel,
    pool: &[PicClass],
    t: &[PicClass],
) -> Result<Vec<(PicClass, Option<Violation>)>> {
    pool.par_iter()
        .filter(|c| !t.contains(c))
        .map(|c| {
            let mut bigger = t.to_vec();
            bigger.push(c.clone());
            Ok((c.clone(), first_violation(model, &bigger)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::test_models::{p1p1, weights};

    fn degs(ds: &[i64]) -> Vec<PicClass> {
        ds.iter().map(|&d| PicClass::new(vec![d])).collect()
    }

    #[test]
    fn wp12_unique() {
        let m = weights(&[1, 2]);
        let w = SearchWindow::Degrees { low: -9, high: 9 };
        let out = enumerate_collections(&m, &w, true, DEFAULT_MAX_POOL).unwrap();
        assert_eq!(out.collections, vec![degs(&[0, 1, 2])]);
        let weak = enumerate_collections(&m, &w, false, DEFAULT_MAX_POOL).unwrap();
        assert_eq!(weak.collections, out.collections);
    }

    #[test]
    fn normalization() {
        let m = weights(&[5, 6]);
        let t = degs(&(-10..=0).collect::<Vec<_>>());
        let n = normalize_twist(&m, &t);
        assert_eq!(n, degs(&(0..=10).collect::<Vec<_>>()));
        assert_eq!(normalize_twist(&m, &n), n);
        let shifted: Vec<PicClass> = t.iter().map(|d| d + &PicClass::new(vec![7])).collect();
        assert_eq!(normalize_twist(&m, &shifted), n);
    }

    #[test]
    fn pool_cap() {
        let m = weights(&[5, 6]);
        let w = SearchWindow::Degrees { low: -150, high: 150 };
        assert_eq!(
            enumerate_collections(&m, &w, true, DEFAULT_MAX_POOL),
            Err(Error::PoolTooLarge { size: 301, cap: 200 })
        );
    }

    #[test]
    fn p1xp1_has_results() {
        let m = p1p1();
        let w = SearchWindow::default_for(&m).unwrap();
        let out = enumerate_collections(&m, &w, true, DEFAULT_MAX_POOL).unwrap();
        assert!(!out.collections.is_empty());
        for c in &out.representatives {
            assert_eq!(first_violation(&m, c).unwrap(), None);
        }
    }

    #[test]
    fn bitset_above() {
        let mut b = BitSet::new(130);
        for i in [0, 3, 63, 64, 65, 129] {
            b.insert(i);
        }
        assert_eq!(b.above(3).iter().collect::<Vec<_>>(), vec![63, 64, 65, 129]);
        assert_eq!(b.above(63).iter().collect::<Vec<_>>(), vec![64, 65, 129]);
        assert_eq!(b.above(64).iter().collect::<Vec<_>>(), vec![65, 129]);
        assert_eq!(b.above(129).len(), 0);
    }
}
