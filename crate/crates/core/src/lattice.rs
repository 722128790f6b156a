//! Exact integer linear algebra.
//!
//! Everything here works over arbitrary-precision integers and rationals:
//! Smith and Hermite normal forms with a fixed pivot rule, lattice bases of
//! integer kernels, and enumeration of the integer points of a bounded
//! rational polyhedron `{x : A x <= b}` by Fourier-Motzkin projection.

use std::fmt;
use std::ops::{ControlFlow, Index};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from its rows. Panics if the rows are ragged.
    pub fn from_rows<T: Clone + Into<BigInt>>(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "IntMatrix rows must have equal length");
            data.extend(row.iter().cloned().map(Into::into));
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    /// Empty-row matrices lose their column count in `from_rows`; this keeps it.
    pub fn from_rows_with_cols<T: Clone + Into<BigInt>>(rows: &[Vec<T>], cols: usize) -> Self {
        if rows.is_empty() {
            Self::zeros(0, cols)
        } else {
            let m = Self::from_rows(rows);
            assert_eq!(m.cols, cols);
            m
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<BigInt> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn set(&mut self, r: usize, c: usize, value: BigInt) {
        self.data[r * self.cols + c] = value;
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in IntMatrix::mul");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    out.data[r * other.cols + c] += a * &other[(k, c)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                    Some(i) => {
                        a.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a[(k, k)].clone();
        }
        sign * &a[(n - 1, n - 1)]
    }

    /// Converts to machine integers, or `None` if some entry does not fit.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(ToPrimitive::to_i64).collect())
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// row[dst] += k * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        for c in 0..self.cols {
            let delta = &self.data[src * self.cols + c] * k;
            self.data[dst * self.cols + c] += delta;
        }
    }

    /// col[dst] += k * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        for r in 0..self.rows {
            let delta = &self.data[r * self.cols + src] * k;
            self.data[r * self.cols + dst] += delta;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let v = -std::mem::take(&mut self.data[r * self.cols + c]);
            self.data[r * self.cols + c] = v;
        }
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;

    fn index(&self, (r, c): (usize, usize)) -> &BigInt {
        &self.data[r * self.cols + c]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.rows).map(|r| {
                self.row(r)
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
            }))
            .finish()
    }
}

/// `u * m * v == s` with `u`, `v` unimodular and `s` diagonal,
/// `d_1 | d_2 | ...`, all `d_i >= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
}

impl SmithDecomposition {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.s.rows().min(self.s.cols()))
            .map(|i| self.s[(i, i)].clone())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|d| !d.is_zero()).count()
    }
}

/// Position of the nonzero entry of least absolute value in the trailing
/// submatrix starting at `(t, t)`; ties go to the smallest `(row, col)`.
fn min_pivot(s: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for r in t..s.rows() {
        for c in t..s.cols() {
            let e = &s[(r, c)];
            if e.is_zero() {
                continue;
            }
            match best {
                Some((br, bc)) if s[(br, bc)].abs() <= e.abs() => {}
                _ => best = Some((r, c)),
            }
        }
    }
    best
}

pub fn smith_decompose(m: &IntMatrix) -> SmithDecomposition {
    let (rows, cols) = (m.rows(), m.cols());
    let mut s = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    for t in 0..rows.min(cols) {
        loop {
            let Some((pr, pc)) = min_pivot(&s, t) else {
                break;
            };
            s.swap_rows(t, pr);
            u.swap_rows(t, pr);
            s.swap_cols(t, pc);
            v.swap_cols(t, pc);

            let pivot = s[(t, t)].clone();
            let mut dirty = false;
            for i in t + 1..rows {
                if s[(i, t)].is_zero() {
                    continue;
                }
                let q = -s[(i, t)].div_floor(&pivot);
                s.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
                dirty |= !s[(i, t)].is_zero();
            }
            for j in t + 1..cols {
                if s[(t, j)].is_zero() {
                    continue;
                }
                let q = -s[(t, j)].div_floor(&pivot);
                s.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
                dirty |= !s[(t, j)].is_zero();
            }
            if dirty {
                continue;
            }

            // the pivot must divide the whole trailing block
            let offending = (t + 1..rows)
                .find(|&i| (t + 1..cols).any(|j| !s[(i, j)].is_multiple_of(&pivot)));
            match offending {
                Some(i) => {
                    let one = BigInt::one();
                    s.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
    }
    for t in 0..rows.min(cols) {
        if s[(t, t)].is_negative() {
            s.negate_row(t);
            u.negate_row(t);
        }
    }
    SmithDecomposition { u, s, v }
}

/// Row-style Hermite normal form: returns `(h, t)` with `h = t * a`, `t`
/// unimodular, `h` in echelon form with positive pivots and the entries
/// above each pivot reduced into `[0, pivot)`.
pub fn hermite_rows(a: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let rows = a.rows();
    let mut h = a.clone();
    let mut t = IntMatrix::identity(rows);
    let mut pr = 0;
    for c in 0..a.cols() {
        if pr == rows {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for i in pr..rows {
                if h[(i, c)].is_zero() {
                    continue;
                }
                match best {
                    Some(b) if h[(b, c)].abs() <= h[(i, c)].abs() => {}
                    _ => best = Some(i),
                }
            }
            let Some(b) = best else { break };
            h.swap_rows(pr, b);
            t.swap_rows(pr, b);
            let pivot = h[(pr, c)].clone();
            let mut done = true;
            for i in pr + 1..rows {
                if h[(i, c)].is_zero() {
                    continue;
                }
                let q = -h[(i, c)].div_floor(&pivot);
                h.add_row_multiple(i, pr, &q);
                t.add_row_multiple(i, pr, &q);
                done &= h[(i, c)].is_zero();
            }
            if done {
                break;
            }
        }
        if h[(pr, c)].is_zero() {
            continue;
        }
        if h[(pr, c)].is_negative() {
            h.negate_row(pr);
            t.negate_row(pr);
        }
        let pivot = h[(pr, c)].clone();
        for i in 0..pr {
            let q = -h[(i, c)].div_floor(&pivot);
            if !q.is_zero() {
                h.add_row_multiple(i, pr, &q);
                t.add_row_multiple(i, pr, &q);
            }
        }
        pr += 1;
    }
    (h, t)
}

/// Lattice basis of `{x in Z^n : m x = 0}`, returned in Hermite normal form
/// (so it does not depend on how the kernel was found).
pub fn integer_kernel(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    let snf = smith_decompose(m);
    let rank = snf.rank();
    let basis: Vec<Vec<BigInt>> = (rank..m.cols()).map(|c| snf.v.column(c)).collect();
    if basis.is_empty() {
        return basis;
    }
    let (h, _) = hermite_rows(&IntMatrix::from_rows(&basis));
    h.row_vecs()
        .into_iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .collect()
}

/// Solves the square system `a x = b` over the rationals, `None` if `a` is
/// singular.
pub fn solve_rational(a: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigRational>> {
    let n = a.rows();
    assert_eq!(n, a.cols());
    assert_eq!(n, b.len());
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|r| {
            a.row(r)
                .iter()
                .chain(std::iter::once(&b[r]))
                .map(|x| BigRational::from_integer(x.clone()))
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let p = m[col][col].clone();
        for x in m[col].iter_mut() {
            *x /= &p;
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for c in col..=n {
                let delta = &factor * &m[col][c];
                m[r][c] -= delta;
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

/// `{x in R^dim : A x <= b}` with exact rational data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPolyhedron {
    dim: usize,
    a: Vec<Vec<BigRational>>,
    b: Vec<BigRational>,
}

impl RationalPolyhedron {
    pub fn new(dim: usize, a: Vec<Vec<BigRational>>, b: Vec<BigRational>) -> Self {
        assert_eq!(a.len(), b.len(), "constraint count mismatch");
        assert!(a.iter().all(|row| row.len() == dim), "constraint width mismatch");
        Self { dim, a, b }
    }

    /// Convenience constructor for integer data.
    pub fn from_integers(dim: usize, a: &[Vec<i64>], b: &[i64]) -> Self {
        let q = |x: i64| BigRational::from_integer(BigInt::from(x));
        Self::new(
            dim,
            a.iter().map(|row| row.iter().map(|&x| q(x)).collect()).collect(),
            b.iter().map(|&x| q(x)).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> impl Iterator<Item = (&[BigRational], &BigRational)> {
        self.a.iter().map(Vec::as_slice).zip(&self.b)
    }

    pub fn contains(&self, x: &[BigInt]) -> bool {
        self.constraints().all(|(row, rhs)| {
            let lhs: BigRational = row
                .iter()
                .zip(x)
                .map(|(a, v)| a * BigRational::from_integer(v.clone()))
                .sum();
            &lhs <= rhs
        })
    }

    /// Integer rows and matching right-hand sides, each row scaled by the
    /// lcm of its denominators.
    fn integer_system(&self) -> (Vec<Vec<BigInt>>, Vec<BigRational>) {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(row, rhs)| {
                let lcm = row
                    .iter()
                    .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
                let scale = BigRational::from_integer(lcm);
                let int_row = row.iter().map(|x| (x * &scale).to_integer()).collect();
                (int_row, rhs * &scale)
            })
            .unzip()
    }
}

/// One inequality `coeffs . (x_0..x_k) <= mult . b` of a projected system.
#[derive(Clone, Debug)]
struct DerivedRow {
    coeffs: Vec<BigInt>,
    mult: Vec<BigInt>,
}

/// Fourier-Motzkin projections of `A x <= b` onto every prefix of the
/// variables, stored as nonnegative combinations of the original rows so the
/// same elimination can be reused for many right-hand sides.
#[derive(Clone, Debug)]
pub struct FourierMotzkin {
    dim: usize,
    nrows: usize,
    // levels[k] constrains x_0..=x_k
    levels: Vec<Vec<DerivedRow>>,
}

fn normalize_row(row: &mut DerivedRow) {
    let g = row
        .coeffs
        .iter()
        .chain(&row.mult)
        .fold(BigInt::zero(), |g, x| g.gcd(x));
    if g > BigInt::one() {
        for x in row.coeffs.iter_mut().chain(row.mult.iter_mut()) {
            *x /= &g;
        }
    }
}

impl FourierMotzkin {
    pub fn new(dim: usize, a: &[Vec<BigInt>]) -> Self {
        let nrows = a.len();
        let mut levels = vec![Vec::new(); dim];
        if dim == 0 {
            return Self { dim, nrows, levels };
        }
        levels[dim - 1] = a
            .iter()
            .enumerate()
            .map(|(j, row)| {
                assert_eq!(row.len(), dim);
                let mut mult = vec![BigInt::zero(); nrows];
                mult[j] = BigInt::one();
                DerivedRow {
                    coeffs: row.clone(),
                    mult,
                }
            })
            .collect();
        for k in (1..dim).rev() {
            let mut next = Vec::new();
            let (mut pos, mut neg) = (Vec::new(), Vec::new());
            for row in &levels[k] {
                let c = &row.coeffs[k];
                if c.is_zero() {
                    next.push(DerivedRow {
                        coeffs: row.coeffs[..k].to_vec(),
                        mult: row.mult.clone(),
                    });
                } else if c.is_positive() {
                    pos.push(row);
                } else {
                    neg.push(row);
                }
            }
            for p in &pos {
                for q in &neg {
                    let cp = p.coeffs[k].clone();
                    let cq = -q.coeffs[k].clone();
                    let mut row = DerivedRow {
                        coeffs: (0..k)
                            .map(|i| &cq * &p.coeffs[i] + &cp * &q.coeffs[i])
                            .collect(),
                        mult: (0..nrows)
                            .map(|i| &cq * &p.mult[i] + &cp * &q.mult[i])
                            .collect(),
                    };
                    normalize_row(&mut row);
                    next.push(row);
                }
            }
            levels[k - 1] = next;
        }
        Self { dim, nrows, levels }
    }

    fn rhs_per_level(&self, b: &[BigRational]) -> Vec<Vec<BigRational>> {
        assert_eq!(b.len(), self.nrows, "right-hand side length mismatch");
        self.levels
            .iter()
            .map(|level| {
                level
                    .iter()
                    .map(|row| {
                        row.mult
                            .iter()
                            .zip(b)
                            .filter(|(m, _)| !m.is_zero())
                            .map(|(m, bj)| bj * BigRational::from_integer(m.clone()))
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    /// Integer range of `x_k` given the fixed prefix, `None` if the fiber is
    /// empty.
    fn level_range(
        &self,
        k: usize,
        rhs: &[BigRational],
        prefix: &[BigInt],
    ) -> Result<Option<(BigInt, BigInt)>> {
        let mut lo: Option<BigInt> = None;
        let mut hi: Option<BigInt> = None;
        for (row, r) in self.levels[k].iter().zip(rhs) {
            let mut rest = r.clone();
            for (c, x) in row.coeffs[..k].iter().zip(prefix) {
                if !c.is_zero() {
                    rest -= BigRational::from_integer(c * x);
                }
            }
            let c = &row.coeffs[k];
            if c.is_zero() {
                if rest.is_negative() {
                    return Ok(None);
                }
                continue;
            }
            let bound = rest / BigRational::from_integer(c.clone());
            if c.is_positive() {
                let v = bound.floor().to_integer();
                if hi.as_ref().is_none_or(|h| v < *h) {
                    hi = Some(v);
                }
            } else {
                let v = bound.ceil().to_integer();
                if lo.as_ref().is_none_or(|l| v > *l) {
                    lo = Some(v);
                }
            }
        }
        match (lo, hi) {
            (Some(lo), Some(hi)) => Ok((lo <= hi).then_some((lo, hi))),
            _ => Err(Error::UnboundedPolyhedron { coordinate: k }),
        }
    }

    /// Visits the integer points of `{x : A x <= b}` in lexicographic order.
    pub fn for_each_point<F>(&self, b: &[BigRational], mut visit: F) -> Result<()>
    where
        F: FnMut(&[BigInt]) -> ControlFlow<()>,
    {
        if self.dim == 0 {
            if b.iter().all(|x| !x.is_negative()) {
                let _ = visit(&[]);
            }
            return Ok(());
        }
        let rhs = self.rhs_per_level(b);
        let mut prefix = Vec::with_capacity(self.dim);
        self.descend(&rhs, &mut prefix, &mut visit).map(|_| ())
    }

    fn descend<F>(
        &self,
        rhs: &[Vec<BigRational>],
        prefix: &mut Vec<BigInt>,
        visit: &mut F,
    ) -> Result<ControlFlow<()>>
    where
        F: FnMut(&[BigInt]) -> ControlFlow<()>,
    {
        let k = prefix.len();
        let Some((lo, hi)) = self.level_range(k, &rhs[k], prefix)? else {
            return Ok(ControlFlow::Continue(()));
        };
        let mut x = lo;
        while x <= hi {
            prefix.push(x.clone());
            let flow = if k + 1 == self.dim {
                visit(prefix)
            } else {
                self.descend(rhs, prefix, visit)?
            };
            prefix.pop();
            if flow.is_break() {
                return Ok(flow);
            }
            x += 1;
        }
        Ok(ControlFlow::Continue(()))
    }

    pub fn points(&self, b: &[BigRational]) -> Result<Vec<Vec<BigInt>>> {
        let mut out = Vec::new();
        self.for_each_point(b, |x| {
            out.push(x.to_vec());
            ControlFlow::Continue(())
        })?;
        Ok(out)
    }

    pub fn first_point(&self, b: &[BigRational]) -> Result<Option<Vec<BigInt>>> {
        let mut found = None;
        self.for_each_point(b, |x| {
            found = Some(x.to_vec());
            ControlFlow::Break(())
        })?;
        Ok(found)
    }
}

/// All integer points of a bounded polyhedron, sorted lexicographically.
pub fn bounded_integer_points(p: &RationalPolyhedron) -> Result<Vec<Vec<BigInt>>> {
    let (a, b) = p.integer_system();
    FourierMotzkin::new(p.dim, &a).points(&b)
}

pub fn first_integer_point(p: &RationalPolyhedron) -> Result<Option<Vec<BigInt>>> {
    let (a, b) = p.integer_system();
    FourierMotzkin::new(p.dim, &a).first_point(&b)
}

/// Per-coordinate integer bounds of the polyhedron's real projection,
/// `None` when it is empty. Every integer point lies inside the box.
pub fn integer_bounding_box(p: &RationalPolyhedron) -> Result<Option<Vec<(BigInt, BigInt)>>> {
    let (a, b) = p.integer_system();
    let mut bounds = Vec::with_capacity(p.dim);
    for coord in 0..p.dim {
        // put `coord` first, then project everything else away
        let permuted: Vec<Vec<BigInt>> = a
            .iter()
            .map(|row| {
                let mut r = Vec::with_capacity(p.dim);
                r.push(row[coord].clone());
                r.extend(row.iter().enumerate().filter(|&(i, _)| i != coord).map(|(_, x)| x.clone()));
                r
            })
            .collect();
        let fm = FourierMotzkin::new(p.dim, &permuted);
        let rhs = fm.rhs_per_level(&b);
        match fm.level_range(0, &rhs[0], &[]) {
            Ok(Some(range)) => bounds.push(range),
            Ok(None) => return Ok(None),
            Err(Error::UnboundedPolyhedron { .. }) => {
                return Err(Error::UnboundedPolyhedron { coordinate: coord })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Some(bounds))
}
