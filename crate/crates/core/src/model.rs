//! Stacky fans, their Picard presentation and the functionals used by the
//! shrink algorithms.
//!
//! A fan is given either by positive weights (a weighted projective stack)
//! or by its ray generators. [`build_model`] validates the Fano condition,
//! rejects torsion and Picard ranks other than 1 and 2, and fixes a
//! canonical basis of `Pic`:
//!
//! * `Pic = Z^m / L` where `L = {(w . v_i)_i : w in M}`;
//! * the class map `Z^m -> Z^rho` is the Hermite normal form of the quotient
//!   map obtained from the Smith form of the relation matrix, so coordinates
//!   do not depend on pivoting details;
//! * for rank 2, `alpha` is the primitive signed relation with positive first
//!   entry and `r` is the midpoint of the segment of positive relations
//!   normalized to total 1.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Claim, Error, Result};
use crate::ext::LiftCache;
use crate::lattice::{
    hermite_rows, integer_kernel, smith_decompose, solve_rational, IntMatrix,
};

/// Fan description as read from JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StackyFanInput {
    Weights { weights: Vec<i64> },
    Rays { lattice_rank: usize, rays: Vec<Vec<i64>> },
}

/// An element of the (torsion-free) Picard group in the model's canonical
/// coordinates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PicClass(Vec<i64>);

impl PicClass {
    pub fn new(coords: Vec<i64>) -> Self {
        PicClass(coords)
    }

    pub fn zero(rank: usize) -> Self {
        PicClass(vec![0; rank])
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn scale(&self, k: i64) -> PicClass {
        PicClass(self.0.iter().map(|c| c * k).collect())
    }
}

impl fmt::Debug for PicClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for PicClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let [d] = self.0.as_slice() {
            return write!(f, "O({d})");
        }
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Add for &PicClass {
    type Output = PicClass;

    fn add(self, rhs: &PicClass) -> PicClass {
        assert_eq!(self.rank(), rhs.rank());
        PicClass(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &PicClass {
    type Output = PicClass;

    fn sub(self, rhs: &PicClass) -> PicClass {
        assert_eq!(self.rank(), rhs.rank());
        PicClass(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &PicClass {
    type Output = PicClass;

    fn neg(self) -> PicClass {
        PicClass(self.0.iter().map(|a| -a).collect())
    }
}

/// A maximal cone of the face fan together with `|det|` of its generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MaximalCone {
    pub rays: Vec<usize>,
    pub multiplicity: u64,
}

/// A validated Fano stacky fan of Picard rank 1 or 2. Immutable once built;
/// the only interior state is a lift-query cache that does not affect
/// results.
pub struct ToricStackModel {
    input: StackyFanInput,
    rays: Vec<Vec<i64>>,
    lattice_rank: usize,
    picard_rank: usize,
    e_class: Vec<PicClass>,
    basis_lifts: Vec<Vec<i64>>,
    alpha: Option<Vec<i64>>,
    r: Vec<Rational64>,
    i_plus: Vec<usize>,
    i_minus: Vec<usize>,
    e_plus: Option<PicClass>,
    e_minus: Option<PicClass>,
    alpha_form: Vec<i64>,
    f_form: Vec<i64>,
    f_den: i64,
    k0_rank: usize,
    maximal_cones: Vec<MaximalCone>,
    pub(crate) lift_cache: LiftCache,
}

impl Clone for ToricStackModel {
    fn clone(&self) -> Self {
        Self {
            input: self.input.clone(),
            rays: self.rays.clone(),
            lattice_rank: self.lattice_rank,
            picard_rank: self.picard_rank,
            e_class: self.e_class.clone(),
            basis_lifts: self.basis_lifts.clone(),
            alpha: self.alpha.clone(),
            r: self.r.clone(),
            i_plus: self.i_plus.clone(),
            i_minus: self.i_minus.clone(),
            e_plus: self.e_plus.clone(),
            e_minus: self.e_minus.clone(),
            alpha_form: self.alpha_form.clone(),
            f_form: self.f_form.clone(),
            f_den: self.f_den,
            k0_rank: self.k0_rank,
            maximal_cones: self.maximal_cones.clone(),
            lift_cache: LiftCache::default(),
        }
    }
}

impl fmt::Debug for ToricStackModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ToricStackModel")
            .field("rays", &self.rays)
            .field("picard_rank", &self.picard_rank)
            .field("e_class", &self.e_class)
            .field("alpha", &self.alpha)
            .field("r", &self.r)
            .field("k0_rank", &self.k0_rank)
            .finish_non_exhaustive()
    }
}

fn to_i64(x: &BigInt) -> Result<i64> {
    x.to_i64()
        .ok_or_else(|| Error::InvalidInput(format!("coordinate {x} does not fit in 64 bits")))
}

fn to_i64_vec(v: &[BigInt]) -> Result<Vec<i64>> {
    v.iter().map(to_i64).collect()
}

fn big_to_rational64(x: &BigRational) -> Result<Rational64> {
    Ok(Rational64::new(to_i64(x.numer())?, to_i64(x.denom())?))
}

fn validate_input(input: &StackyFanInput) -> Result<(Vec<Vec<i64>>, usize)> {
    match input {
        StackyFanInput::Weights { weights } => {
            if weights.len() < 2 {
                return Err(Error::InvalidInput("need at least two weights".into()));
            }
            if let Some(w) = weights.iter().find(|&&w| w < 1) {
                return Err(Error::InvalidInput(format!("weight {w} is not positive")));
            }
            let g = weights.iter().fold(0i64, |g, &w| g.gcd(&w));
            if g > 1 {
                return Err(Error::UnsupportedTorsion {
                    divisors: vec![g.to_string()],
                });
            }
            // N = Z^m / (w); coordinates on N come from a basis of M = ker(w)
            let kernel = integer_kernel(&IntMatrix::from_rows(std::slice::from_ref(weights)));
            let m = weights.len();
            let rays = (0..m)
                .map(|i| kernel.iter().map(|k| to_i64(&k[i])).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            Ok((rays, m - 1))
        }
        StackyFanInput::Rays { lattice_rank, rays } => {
            let n = *lattice_rank;
            if n == 0 {
                return Err(Error::InvalidInput("lattice rank must be positive".into()));
            }
            if let Some(v) = rays.iter().find(|v| v.len() != n) {
                return Err(Error::InvalidInput(format!(
                    "ray {v:?} does not have length {n}"
                )));
            }
            let rho = rays.len() as i64 - n as i64;
            if !(1..=2).contains(&rho) {
                return Err(Error::UnsupportedPicardRank { rank: rho });
            }
            if let Some(v) = rays.iter().find(|v| v.iter().all(|&x| x == 0)) {
                return Err(Error::InvalidInput(format!("ray {v:?} is zero")));
            }
            for (i, v) in rays.iter().enumerate() {
                if rays[..i].contains(v) {
                    return Err(Error::InvalidInput(format!("ray {v:?} is repeated")));
                }
            }
            Ok((rays.clone(), n))
        }
    }
}

/// `true` if some strictly positive combination of the kernel basis exists.
fn has_positive_relation(kernel: &[Vec<BigInt>]) -> bool {
    let m = kernel.first().map_or(0, Vec::len);
    let value = |coef: &[BigInt], i: usize| -> BigInt {
        coef.iter().zip(kernel).map(|(c, k)| c * &k[i]).sum()
    };
    let positive = |coef: &[BigInt]| (0..m).all(|i| value(coef, i).is_positive());
    match kernel.len() {
        1 => positive(&[BigInt::one()]) || positive(&[-BigInt::one()]),
        2 => {
            // The feasible set is an open cone in the (s, t) plane. It contains
            // the sum of its two boundary rays, or a normal when it is a
            // half-plane; both kinds are among the candidates below.
            let mut dirs = Vec::new();
            for i in 0..m {
                let (a, b) = (kernel[0][i].clone(), kernel[1][i].clone());
                dirs.push(vec![-b.clone(), a.clone()]);
                dirs.push(vec![b.clone(), -a.clone()]);
                dirs.push(vec![a.clone(), b.clone()]);
                dirs.push(vec![-a, -b]);
            }
            dirs.iter().any(|d1| {
                dirs.iter()
                    .any(|d2| positive(&[&d1[0] + &d2[0], &d1[1] + &d2[1]]))
            })
        }
        _ => false,
    }
}

/// Facets of `conv(v_i)` as index sets, with the multiplicity of the cone
/// over each; fails unless the rays are the vertices of a simplicial
/// polytope containing 0 in its interior.
fn fano_facets(rays: &[Vec<i64>], n: usize) -> Result<Vec<MaximalCone>> {
    let m = rays.len();
    let ray_matrix = IntMatrix::from_rows(rays).transpose(); // n x m
    let relations = integer_kernel(&ray_matrix);
    if relations.len() != m - n {
        return Err(Error::FanoViolation("rays do not span the lattice".into()));
    }
    if !has_positive_relation(&relations) {
        return Err(Error::FanoViolation(
            "0 is not in the interior of the convex hull of the rays".into(),
        ));
    }

    let mut cones = Vec::new();
    let mut on_some_facet = vec![false; m];
    for subset in k_subsets(m, n) {
        let sub = IntMatrix::from_rows(&subset.iter().map(|&i| rays[i].clone()).collect::<Vec<_>>());
        let ones = vec![BigInt::one(); n];
        let Some(normal) = solve_rational(&sub, &ones) else {
            continue;
        };
        let eval = |v: &[i64]| -> BigRational {
            normal
                .iter()
                .zip(v)
                .map(|(u, &x)| u * BigRational::from_integer(BigInt::from(x)))
                .sum()
        };
        let one = BigRational::one();
        let mut supporting = true;
        let mut extra = None;
        for j in (0..m).filter(|j| !subset.contains(j)) {
            let value = eval(&rays[j]);
            if value > one {
                supporting = false;
                break;
            }
            if value == one {
                extra = Some(j);
            }
        }
        if !supporting {
            continue;
        }
        if let Some(j) = extra {
            return Err(Error::FanoViolation(format!(
                "ray {:?} lies on the facet spanned by {:?} (not a vertex, or facet not simplicial)",
                rays[j],
                subset.iter().map(|&i| &rays[i]).collect::<Vec<_>>()
            )));
        }
        for &i in &subset {
            on_some_facet[i] = true;
        }
        let det = sub.determinant().abs();
        cones.push(MaximalCone {
            rays: subset,
            multiplicity: det
                .to_u64()
                .ok_or_else(|| Error::InvalidInput("cone multiplicity overflows".into()))?,
        });
    }
    if let Some(i) = on_some_facet.iter().position(|&b| !b) {
        return Err(Error::FanoViolation(format!(
            "ray {:?} is not a vertex of the convex hull",
            rays[i]
        )));
    }
    Ok(cones)
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub(crate) fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn inverse_unimodular(m: &IntMatrix) -> IntMatrix {
    // the Hermite form of a unimodular matrix is the identity
    let (h, t) = hermite_rows(m);
    debug_assert_eq!(h, IntMatrix::identity(m.rows()));
    t
}

pub fn build_model(input: &StackyFanInput) -> Result<ToricStackModel> {
    let (rays, n) = validate_input(input)?;
    let m = rays.len();
    let rho = m - n;

    let maximal_cones = fano_facets(&rays, n)?;

    // relation matrix: row j is (v_i[j])_i, its row lattice is L
    let relation = IntMatrix::from_rows(&rays).transpose();
    let snf = smith_decompose(&relation);
    let diag = snf.diagonal();
    if diag.iter().any(|d| !d.is_one()) {
        return Err(Error::UnsupportedTorsion {
            divisors: diag.iter().filter(|d| !d.is_one()).map(ToString::to_string).collect(),
        });
    }

    // quotient map a -> (V^T a)[n..], lifts are rows n.. of V^{-1}
    let v_inv = inverse_unimodular(&snf.v);
    let quotient = IntMatrix::from_rows(
        &(n..m).map(|k| snf.v.column(k)).collect::<Vec<_>>(),
    );
    let (class_matrix, change) = hermite_rows(&quotient);
    let change_inv = inverse_unimodular(&change);
    let raw_lifts = IntMatrix::from_rows(&(n..m).map(|k| v_inv.row(k).to_vec()).collect::<Vec<_>>());
    // lifts as rows: (Lambda G^{-1})^T = G^{-T} Lambda^T
    let lifts = change_inv.transpose().mul(&raw_lifts);
    debug_assert_eq!(class_matrix.mul(&lifts.transpose()), IntMatrix::identity(rho));

    let class_rows = class_matrix
        .to_i64_rows()
        .ok_or_else(|| Error::InvalidInput("class coordinates overflow".into()))?;
    let e_class: Vec<PicClass> = (0..m)
        .map(|i| PicClass((0..rho).map(|k| class_rows[k][i]).collect()))
        .collect();
    let basis_lifts = lifts
        .to_i64_rows()
        .ok_or_else(|| Error::InvalidInput("lift coordinates overflow".into()))?;

    let relations = integer_kernel(&relation);
    let (alpha, r) = if rho == 1 {
        let k = &relations[0];
        let sum: BigInt = k.iter().sum();
        let r = k
            .iter()
            .map(|x| big_to_rational64(&BigRational::new(x.clone(), sum.clone())))
            .collect::<Result<Vec<_>>>()?;
        (None, r)
    } else {
        let mut augmented = vec![vec![1i64; m]];
        augmented.extend(relation.to_i64_rows().expect("rays fit in i64"));
        let signed = integer_kernel(&IntMatrix::from_rows(&augmented));
        if signed.len() != 1 {
            return Err(Error::contradiction(
                Claim::UniqueSignedRelation,
                format!("signed relations form a lattice of rank {}", signed.len()),
            ));
        }
        // Hermite form already makes the first nonzero entry positive
        let alpha = to_i64_vec(&signed[0])?;
        if alpha.contains(&0) {
            return Err(Error::DegenerateAlpha { alpha });
        }
        let r = midpoint_positive_relation(&relations, &signed[0])?;
        (Some(alpha), r)
    };

    let (i_plus, i_minus): (Vec<usize>, Vec<usize>) = match &alpha {
        Some(a) => (0..m).partition(|&i| a[i] > 0),
        None => (Vec::new(), Vec::new()),
    };

    // functionals on the Pic basis
    let alpha_form: Vec<i64> = match &alpha {
        Some(a) => basis_lifts
            .iter()
            .map(|l| l.iter().zip(a).map(|(x, y)| x * y).sum())
            .collect(),
        None => vec![0; rho],
    };
    let f_rational: Vec<Rational64> = basis_lifts
        .iter()
        .map(|l| {
            l.iter()
                .zip(&r)
                .map(|(&x, y)| Rational64::from_integer(x) * y)
                .sum()
        })
        .collect();
    let f_den = f_rational.iter().fold(1i64, |acc, q| acc.lcm(q.denom()));
    let f_form: Vec<i64> = f_rational
        .iter()
        .map(|q| (q * Rational64::from_integer(f_den)).to_integer())
        .collect();

    let k0_rank = maximal_cones.iter().map(|c| c.multiplicity as usize).sum();

    let sum_classes = |idx: &[usize]| {
        idx.iter()
            .fold(PicClass::zero(rho), |acc, &i| &acc + &e_class[i])
    };
    let (e_plus, e_minus) = if rho == 2 {
        (Some(sum_classes(&i_plus)), Some(sum_classes(&i_minus)))
    } else {
        (None, None)
    };

    let model = ToricStackModel {
        input: input.clone(),
        rays,
        lattice_rank: n,
        picard_rank: rho,
        e_class,
        basis_lifts,
        alpha,
        r,
        i_plus,
        i_minus,
        e_plus,
        e_minus,
        alpha_form,
        f_form,
        f_den,
        k0_rank,
        maximal_cones,
        lift_cache: LiftCache::default(),
    };
    model.check_invariants()?;
    Ok(model)
}

/// Midpoint of `{r = r0 + t alpha : r > 0}` where `r0` is any relation with
/// coordinate sum 1.
fn midpoint_positive_relation(
    relations: &[Vec<BigInt>],
    alpha: &[BigInt],
) -> Result<Vec<Rational64>> {
    let base = relations
        .iter()
        .find(|k| !k.iter().sum::<BigInt>().is_zero())
        .ok_or_else(|| Error::FanoViolation("every relation has zero sum".into()))?;
    let total: BigInt = base.iter().sum();
    let r0: Vec<BigRational> = base
        .iter()
        .map(|x| BigRational::new(x.clone(), total.clone()))
        .collect();
    let mut lo: Option<BigRational> = None;
    let mut hi: Option<BigRational> = None;
    for (x, a) in r0.iter().zip(alpha) {
        let t = -x / BigRational::from_integer(a.clone());
        if a.is_positive() {
            if lo.as_ref().is_none_or(|l| &t > l) {
                lo = Some(t);
            }
        } else if hi.as_ref().is_none_or(|h| &t < h) {
            hi = Some(t);
        }
    }
    let (Some(lo), Some(hi)) = (lo, hi) else {
        return Err(Error::FanoViolation("no positive relation".into()));
    };
    if lo >= hi {
        return Err(Error::FanoViolation("no positive relation".into()));
    }
    let mid = (lo + hi) / BigRational::from_integer(BigInt::from(2));
    r0.iter()
        .zip(alpha)
        .map(|(x, a)| big_to_rational64(&(x + &mid * BigRational::from_integer(a.clone()))))
        .collect()
}

impl ToricStackModel {
    fn check_invariants(&self) -> Result<()> {
        let m = self.num_rays();
        let broken = |what: &str| Err(Error::InvalidInput(format!("model invariant failed: {what}")));
        for i in 0..m {
            let mut e = vec![0i64; m];
            e[i] = 1;
            if self.class_of(&e) != self.e_class[i] {
                return broken("class map does not reproduce E_i");
            }
            if self.f_value(&self.e_class[i]) != self.r[i] {
                return broken("f(E_i) != r_i");
            }
            if let Some(a) = &self.alpha {
                if self.alpha_value(&self.e_class[i]) != a[i] {
                    return broken("alpha(E_i) != alpha_i");
                }
            }
        }
        if self.r.iter().any(|x| *x <= Rational64::zero())
            || self.r.iter().sum::<Rational64>() != Rational64::one()
        {
            return broken("r is not a positive relation of total 1");
        }
        if self.picard_rank == 2 {
            let (ep, em) = (self.e_plus().unwrap(), self.e_minus().unwrap());
            if self.alpha_value(ep) + self.alpha_value(em) != 0 {
                return broken("alpha(E+) + alpha(E-) != 0");
            }
            if self.f_scaled(&(ep + em)) != self.f_den {
                return broken("f(E+ + E-) != 1");
            }
            let det = self.alpha_form[0] * self.f_form[1] - self.alpha_form[1] * self.f_form[0];
            if det == 0 {
                return broken("(alpha, f) is not injective on Pic");
            }
        }
        Ok(())
    }

    pub fn input(&self) -> &StackyFanInput {
        &self.input
    }

    pub fn rays(&self) -> &[Vec<i64>] {
        &self.rays
    }

    pub fn num_rays(&self) -> usize {
        self.rays.len()
    }

    pub fn lattice_rank(&self) -> usize {
        self.lattice_rank
    }

    pub fn picard_rank(&self) -> usize {
        self.picard_rank
    }

    /// Images of `E_1, ..., E_m` in the canonical basis.
    pub fn e_class(&self) -> &[PicClass] {
        &self.e_class
    }

    /// For rank 1 the images of `E_i` are the weights.
    pub fn weights(&self) -> Vec<i64> {
        self.e_class.iter().map(|c| c.coords()[0]).collect()
    }

    /// Exponent vectors whose classes are the canonical basis vectors.
    pub fn basis_lifts(&self) -> &[Vec<i64>] {
        &self.basis_lifts
    }

    /// Basis of the relation lattice `L`: row `j` is `(v_i[j])_i`.
    pub fn relation_basis(&self) -> Vec<Vec<i64>> {
        (0..self.lattice_rank)
            .map(|j| self.rays.iter().map(|v| v[j]).collect())
            .collect()
    }

    pub fn alpha(&self) -> Option<&[i64]> {
        self.alpha.as_deref()
    }

    pub fn r(&self) -> &[Rational64] {
        &self.r
    }

    pub fn i_plus(&self) -> &[usize] {
        &self.i_plus
    }

    pub fn i_minus(&self) -> &[usize] {
        &self.i_minus
    }

    pub fn e_plus(&self) -> Option<&PicClass> {
        self.e_plus.as_ref()
    }

    pub fn e_minus(&self) -> Option<&PicClass> {
        self.e_minus.as_ref()
    }

    pub fn maximal_cones(&self) -> &[MaximalCone] {
        &self.maximal_cones
    }

    pub fn k0_rank(&self) -> usize {
        self.k0_rank
    }

    pub fn zero_class(&self) -> PicClass {
        PicClass::zero(self.picard_rank)
    }

    /// Class of `sum a_i E_i`.
    pub fn class_of(&self, a: &[i64]) -> PicClass {
        assert_eq!(a.len(), self.num_rays(), "exponent vector has wrong length");
        let mut out = vec![0i64; self.picard_rank];
        for (ai, e) in a.iter().zip(&self.e_class) {
            for (o, c) in out.iter_mut().zip(e.coords()) {
                *o += ai * c;
            }
        }
        PicClass(out)
    }

    /// Canonical exponent vector of a class: `sum_k D_k * lift_k`.
    pub fn lift(&self, d: &PicClass) -> Vec<i64> {
        let mut a = vec![0i64; self.num_rays()];
        for (dk, l) in d.coords().iter().zip(&self.basis_lifts) {
            for (ai, li) in a.iter_mut().zip(l) {
                *ai += dk * li;
            }
        }
        a
    }

    /// Sum of `E_i` over an index set.
    pub fn e_sum(&self, idx: &[usize]) -> PicClass {
        idx.iter()
            .fold(self.zero_class(), |acc, &i| &acc + &self.e_class[i])
    }

    /// `alpha(D)`; zero for Picard rank 1.
    pub fn alpha_value(&self, d: &PicClass) -> i64 {
        d.coords().iter().zip(&self.alpha_form).map(|(a, b)| a * b).sum()
    }

    /// `f(D) * f_den`, an integer.
    pub fn f_scaled(&self, d: &PicClass) -> i64 {
        d.coords().iter().zip(&self.f_form).map(|(a, b)| a * b).sum()
    }

    /// Common denominator of the values of `f` on `Pic`.
    pub fn f_den(&self) -> i64 {
        self.f_den
    }

    pub fn f_value(&self, d: &PicClass) -> Rational64 {
        Rational64::new(self.f_scaled(d), self.f_den)
    }

    /// `alpha(E+)`, the strip width of the rank-2 shrink.
    pub fn alpha_e_plus(&self) -> i64 {
        self.e_plus.as_ref().map_or(0, |e| self.alpha_value(e))
    }

    /// Coefficients of `alpha` and of `f * f_den` on the Pic basis.
    pub fn functional_forms(&self) -> (&[i64], &[i64]) {
        (&self.alpha_form, &self.f_form)
    }

    /// Serre-type shift `-sum E_i`.
    pub fn anticanonical(&self) -> PicClass {
        self.class_of(&vec![1; self.num_rays()])
    }
}

/// `(alpha(D), f(D))` for Picard rank 2.
pub fn eval_functionals(model: &ToricStackModel, d: &PicClass) -> Result<(Rational64, Rational64)> {
    if model.picard_rank() != 2 {
        return Err(Error::UnsupportedPicardRank {
            rank: model.picard_rank() as i64,
        });
    }
    Ok((Rational64::from_integer(model.alpha_value(d)), model.f_value(d)))
}

pub fn class_of(model: &ToricStackModel, a: &[i64]) -> PicClass {
    model.class_of(a)
}

pub fn k0_rank(model: &ToricStackModel) -> usize {
    model.k0_rank()
}


#[cfg(test)]
mod tests {
    use super::test_models::{p1p1, rays, weights};
    use super::*;

    fn q(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn wp56() {
        let m = weights(&[5, 6]);
        assert_eq!(m.picard_rank(), 1);
        assert_eq!(m.weights(), vec![5, 6]);
        assert_eq!(m.k0_rank(), 11);
        assert_eq!(m.class_of(&[1, 1]), PicClass::new(vec![11]));
        assert_eq!(m.class_of(&[0, 0]), PicClass::new(vec![0]));
        // synthesized rays satisfy sum w_i v_i = 0
        let s: i64 = m.rays().iter().zip([5, 6]).map(|(v, w)| v[0] * w).sum();
        assert_eq!(s, 0);
    }

    #[test]
    fn weights_rays_reproduce_weights() {
        for w in [vec![1, 1, 1], vec![1, 2, 3], vec![2, 3], vec![1, 1, 2], vec![3, 4, 5, 7]] {
            let m = weights(&w);
            assert_eq!(m.weights(), w);
            assert_eq!(m.k0_rank() as i64, w.iter().sum::<i64>());
            let n = m.lattice_rank();
            for j in 0..n {
                let s: i64 = m.rays().iter().zip(&w).map(|(v, wi)| v[j] * wi).sum();
                assert_eq!(s, 0);
            }
        }
    }

    #[test]
    fn torsion_weights_rejected() {
        let e = build_model(&StackyFanInput::Weights { weights: vec![2, 4] }).unwrap_err();
        assert!(matches!(e, Error::UnsupportedTorsion { .. }));
    }

    #[test]
    fn p1xp1() {
        let m = p1p1();
        assert_eq!(m.picard_rank(), 2);
        assert_eq!(m.alpha(), Some(&[1, 1, -1, -1][..]));
        assert_eq!(m.i_plus(), &[0, 1]);
        assert_eq!(m.i_minus(), &[2, 3]);
        assert_eq!(m.k0_rank(), 4);
        assert_eq!(m.r(), &[q(1, 4); 4]);
        // canonical coordinates: E1, E2 -> (1,0); E3, E4 -> (0,1)
        assert_eq!(m.class_of(&[1, 0, 0, 0]), PicClass::new(vec![1, 0]));
        assert_eq!(m.class_of(&[0, 0, 0, 1]), PicClass::new(vec![0, 1]));
        assert!(m.class_of(&[1, -1, 0, 0]).is_zero());
        let d = m.class_of(&[1, 0, 0, 0]);
        assert_eq!(eval_functionals(&m, &d).unwrap(), (q(1, 1), q(1, 4)));
        let ep = m.e_plus().unwrap().clone();
        assert_eq!(eval_functionals(&m, &ep).unwrap(), (q(2, 1), q(1, 2)));
        assert_eq!(eval_functionals(&m, &m.zero_class()).unwrap(), (q(0, 1), q(0, 1)));
    }

    #[test]
    fn functionals_need_rank_two() {
        let m = weights(&[1, 1]);
        assert!(matches!(
            eval_functionals(&m, &m.zero_class()),
            Err(Error::UnsupportedPicardRank { rank: 1 })
        ));
    }

    #[test]
    fn stacky_hirzebruch() {
        let m = rays(2, &[[1, 0], [0, 1], [-1, 1], [0, -2]]).unwrap();
        assert_eq!(m.k0_rank(), 6);
        let mut mults: Vec<u64> = m.maximal_cones().iter().map(|c| c.multiplicity).collect();
        mults.sort();
        assert_eq!(mults, vec![1, 1, 2, 2]);
        assert_eq!(m.alpha(), Some(&[3, -5, 3, -1][..]));
        assert_eq!(m.r(), &[q(1, 5), q(1, 3), q(1, 5), q(4, 15)]);
        assert_eq!(m.alpha_e_plus(), 6);
    }

    #[test]
    fn relation_vectors_have_zero_functionals() {
        for model in [p1p1(), rays(2, &[[1, 0], [0, 1], [-1, 1], [0, -2]]).unwrap()] {
            for rel in model.relation_basis() {
                let c = model.class_of(&rel);
                assert!(c.is_zero());
                assert_eq!(model.alpha_value(&c), 0);
                assert_eq!(model.f_scaled(&c), 0);
            }
        }
    }

    #[test]
    fn lift_roundtrip() {
        let m = rays(2, &[[1, 0], [0, 1], [-1, 1], [0, -2]]).unwrap();
        for x in -3..=3 {
            for y in -3..=3 {
                let d = PicClass::new(vec![x, y]);
                assert_eq!(m.class_of(&m.lift(&d)), d);
            }
        }
    }

    #[test]
    fn fano_violations() {
        // (0,1) sits on the segment from (1,0) to (-1,2)
        let e = rays(2, &[[1, 0], [0, 1], [-1, 2], [0, -1]]).unwrap_err();
        assert!(matches!(e, Error::FanoViolation(_)), "{e:?}");
        // 0 on the boundary
        let e = rays(2, &[[1, 0], [0, 1], [-1, 0]]).unwrap_err();
        assert!(matches!(e, Error::FanoViolation(_)), "{e:?}");
        // an interior point
        let e = build_model(&StackyFanInput::Rays {
            lattice_rank: 2,
            rays: vec![vec![2, 0], vec![0, 2], vec![-2, -2], vec![1, 0]],
        })
        .unwrap_err();
        assert!(matches!(e, Error::FanoViolation(_)), "{e:?}");
    }

    #[test]
    fn blowup_of_plane_is_fano() {
        let m = rays(2, &[[1, 0], [-1, 0], [0, 1], [1, -1]]).unwrap();
        assert_eq!(m.k0_rank(), 4);
    }

    #[test]
    fn bad_shapes() {
        assert!(matches!(
            rays(2, &[[1, 0], [0, 1]]),
            Err(Error::UnsupportedPicardRank { rank: 0 })
        ));
        assert!(matches!(
            build_model(&StackyFanInput::Rays {
                lattice_rank: 1,
                rays: vec![vec![1], vec![-1], vec![2], vec![-2]]
            }),
            Err(Error::UnsupportedPicardRank { rank: 3 })
        ));
        assert!(matches!(
            rays(2, &[[1, 0], [1, 0], [-1, -1]]),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            build_model(&StackyFanInput::Weights { weights: vec![3] }),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            build_model(&StackyFanInput::Weights { weights: vec![1, 0] }),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn torsion_rays_rejected() {
        // rays spanning an index-2 sublattice
        let e = build_model(&StackyFanInput::Rays {
            lattice_rank: 1,
            rays: vec![vec![2], vec![-2]],
        })
        .unwrap_err();
        assert!(matches!(e, Error::UnsupportedTorsion { .. }), "{e:?}");
    }

    #[test]
    fn rank_one_from_rays() {
        let m = build_model(&StackyFanInput::Rays {
            lattice_rank: 1,
            rays: vec![vec![2], vec![-1]],
        })
        .unwrap();
        assert_eq!(m.weights(), vec![1, 2]);
        assert_eq!(m.k0_rank(), 3);
    }

    #[test]
    fn json_schema() {
        let w: StackyFanInput = serde_json::from_str(r#"{"kind":"weights","weights":[5,6]}"#).unwrap();
        assert_eq!(w, StackyFanInput::Weights { weights: vec![5, 6] });
        let r: StackyFanInput =
            serde_json::from_str(r#"{"kind":"rays","lattice_rank":2,"rays":[[1,0],[0,1]]}"#).unwrap();
        assert!(matches!(r, StackyFanInput::Rays { lattice_rank: 2, .. }));
    }
}
