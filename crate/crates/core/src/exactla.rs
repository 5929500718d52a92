//! Exact linear algebra over the rationals.
//!
//! Everything here is immutable once built: row reduction returns a new
//! matrix and every [`Subspace`] is stored in its reduced row-echelon form,
//! so two equal subspaces always compare (and hash) equal.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

/// Arbitrary-precision rational number, always kept in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

/// Shorthand for building a rational from machine integers.
///
/// Panics if `den` is zero.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Shorthand for an integral rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinAlgError {
    #[error("ambient dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expected {expected} entries, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
}

/// Dense row-major matrix of rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl QMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Rational>) -> Result<Self, LinAlgError> {
        if entries.len() != rows * cols {
            return Err(LinAlgError::ShapeMismatch {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = Rational::one();
        }
        m
    }

    /// Builds a matrix from rows that must all have length `cols`.
    pub fn from_rows(cols: usize, rows: &[Vec<Rational>]) -> Result<Self, LinAlgError> {
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(LinAlgError::ShapeMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
            entries.extend(row.iter().cloned());
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    /// Reduced row-echelon form and rank. The receiver is left untouched.
    pub fn rref(&self) -> (QMatrix, usize) {
        let mut rows = self.row_vecs();
        let rank = rref_in_place(&mut rows, self.cols);
        let m = QMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: rows.into_iter().flatten().collect(),
        };
        (m, rank)
    }

    pub fn rank(&self) -> usize {
        self.rref().1
    }

    /// Basis of the right kernel `{v : M v = 0}`, one vector per free column,
    /// with a 1 in that column.
    pub fn kernel(&self) -> Vec<Vec<Rational>> {
        let mut rows = self.row_vecs();
        let rank = rref_in_place(&mut rows, self.cols);
        kernel_from_rref(&rows[..rank], self.cols)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>, LinAlgError> {
        if v.len() != self.cols {
            return Err(LinAlgError::ShapeMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok((0..self.rows).map(|r| dot(self.row(r), v)).collect())
    }
}

impl fmt::Display for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// Gauss-Jordan elimination; nonzero rows end up first. Returns the rank.
fn rref_in_place(rows: &mut [Vec<Rational>], cols: usize) -> usize {
    let mut pivot_row = 0;
    for col in 0..cols {
        if pivot_row == rows.len() {
            break;
        }
        let Some(found) = (pivot_row..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(pivot_row, found);
        let inv = rows[pivot_row][col].recip();
        if !inv.is_one() {
            for x in rows[pivot_row][col..].iter_mut() {
                *x *= &inv;
            }
        }
        let (head, tail) = rows.split_at_mut(pivot_row);
        let (pivot, rest) = tail.split_first_mut().unwrap();
        for other in head.iter_mut().chain(rest.iter_mut()) {
            let factor = other[col].clone();
            if factor.is_zero() {
                continue;
            }
            for (x, p) in other[col..].iter_mut().zip(&pivot[col..]) {
                if !p.is_zero() {
                    *x -= &factor * p;
                }
            }
        }
        pivot_row += 1;
    }
    pivot_row
}

fn pivot_columns(rref_rows: &[Vec<Rational>]) -> Vec<usize> {
    rref_rows
        .iter()
        .map(|row| row.iter().position(|x| !x.is_zero()).expect("nonzero rref row"))
        .collect()
}

fn kernel_from_rref(rref_rows: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    let pivots = pivot_columns(rref_rows);
    let mut is_pivot = vec![false; cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..cols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![Rational::zero(); cols];
            v[free] = Rational::one();
            for (row, &p) in rref_rows.iter().zip(&pivots) {
                v[p] = -row[free].clone();
            }
            v
        })
        .collect()
}

/// A linear subspace of `Q^n`, stored by its canonical RREF basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<Vec<Rational>>,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: QMatrix::identity(ambient_dim).row_vecs(),
        }
    }

    /// Span of the given vectors, each of length `ambient_dim`.
    pub fn span<'a, I>(ambient_dim: usize, vectors: I) -> Result<Self, LinAlgError>
    where
        I: IntoIterator<Item = &'a Vec<Rational>>,
    {
        let mut rows = Vec::new();
        for v in vectors {
            if v.len() != ambient_dim {
                return Err(LinAlgError::DimensionMismatch {
                    left: ambient_dim,
                    right: v.len(),
                });
            }
            rows.push(v.clone());
        }
        Ok(Self::from_rows_unchecked(ambient_dim, rows))
    }

    fn from_rows_unchecked(ambient_dim: usize, mut rows: Vec<Vec<Rational>>) -> Self {
        let rank = rref_in_place(&mut rows, ambient_dim);
        rows.truncate(rank);
        Self {
            ambient_dim,
            basis: rows,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        pivot_columns(&self.basis)
    }

    pub fn contains(&self, v: &[Rational]) -> Result<bool, LinAlgError> {
        self.check_len(v.len())?;
        // Reduce against the RREF basis; leftover nonzero means outside.
        let mut rest = v.to_vec();
        for (row, p) in self.basis.iter().zip(self.pivot_columns()) {
            let factor = rest[p].clone();
            if factor.is_zero() {
                continue;
            }
            for (x, b) in rest.iter_mut().zip(row) {
                if !b.is_zero() {
                    *x -= &factor * b;
                }
            }
        }
        Ok(rest.iter().all(Zero::is_zero))
    }

    /// `self ⊆ other`.
    pub fn is_subspace_of(&self, other: &Subspace) -> Result<bool, LinAlgError> {
        self.check_ambient(other)?;
        for v in &self.basis {
            if !other.contains(v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace, LinAlgError> {
        self.check_ambient(other)?;
        let rows = self.basis.iter().chain(&other.basis).cloned().collect();
        Ok(Self::from_rows_unchecked(self.ambient_dim, rows))
    }

    /// Intersection via annihilators: `A ∩ B = ann(ann A + ann B)`.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, LinAlgError> {
        self.check_ambient(other)?;
        let conditions = self.annihilator().sum(&other.annihilator())?;
        Ok(conditions.annihilator())
    }

    /// `{v : <b, v> = 0 for every basis vector b}`.
    pub fn annihilator(&self) -> Subspace {
        let kernel = kernel_from_rref(&self.basis, self.ambient_dim);
        Self::from_rows_unchecked(self.ambient_dim, kernel)
    }

    fn check_ambient(&self, other: &Subspace) -> Result<(), LinAlgError> {
        self.check_len(other.ambient_dim)
    }

    fn check_len(&self, len: usize) -> Result<(), LinAlgError> {
        if len != self.ambient_dim {
            return Err(LinAlgError::DimensionMismatch {
                left: self.ambient_dim,
                right: len,
            });
        }
        Ok(())
    }
}

pub fn subspace_sum(a: &Subspace, b: &Subspace) -> Result<Subspace, LinAlgError> {
    a.sum(b)
}

pub fn subspace_intersect(a: &Subspace, b: &Subspace) -> Result<Subspace, LinAlgError> {
    a.intersect(b)
}

/// Rank of a family of vectors of a common length.
pub fn rank_of<'a, I>(ambient_dim: usize, vectors: I) -> usize
where
    I: IntoIterator<Item = &'a Vec<Rational>>,
{
    let mut rows: Vec<Vec<Rational>> = vectors.into_iter().cloned().collect();
    rref_in_place(&mut rows, ambient_dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    fn span(n: usize, vs: &[&[i64]]) -> Subspace {
        let rows: Vec<_> = vs.iter().map(|x| v(x)).collect();
        Subspace::span(n, &rows).unwrap()
    }

    #[test]
    fn rref_identity_and_zero() {
        let id = QMatrix::identity(3);
        assert_eq!(id.rref(), (id.clone(), 3));
        let z = QMatrix::zeros(2, 4);
        assert_eq!(z.rref(), (z.clone(), 0));
    }

    #[test]
    fn rref_dependent_rows() {
        let m = QMatrix::from_rows(3, &[v(&[1, 1, 0]), v(&[1, -1, 0]), v(&[2, 0, 0])]).unwrap();
        let (r, rank) = m.rref();
        assert_eq!(rank, 2);
        assert_eq!(r.row(0), v(&[1, 0, 0]).as_slice());
        assert_eq!(r.row(1), v(&[0, 1, 0]).as_slice());
        assert_eq!(r.row(2), v(&[0, 0, 0]).as_slice());
        // input untouched
        assert_eq!(m.row(2), v(&[2, 0, 0]).as_slice());
    }

    #[test]
    fn rref_fractions() {
        let m = QMatrix::from_rows(2, &[v(&[2, 3]), v(&[4, 5])]).unwrap();
        assert_eq!(m.rank(), 2);
        let m = QMatrix::from_rows(3, &[v(&[3, 1, 2])]).unwrap();
        let (r, _) = m.rref();
        assert_eq!(r.row(0), &[int(1), rat(1, 3), rat(2, 3)]);
    }

    #[test]
    fn kernel_is_annihilated() {
        let m = QMatrix::from_rows(4, &[v(&[1, 2, 0, -1]), v(&[0, 1, 1, 1])]).unwrap();
        let ker = m.kernel();
        assert_eq!(ker.len(), 2);
        for k in &ker {
            assert!(m.mul_vec(k).unwrap().iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn sum_examples() {
        let e1 = span(3, &[&[1, 0, 0]]);
        let e2 = span(3, &[&[0, 1, 0]]);
        let s = e1.sum(&e2).unwrap();
        assert_eq!(s, span(3, &[&[1, 0, 0], &[0, 1, 0]]));
        assert_eq!(s.dim(), 2);
        assert_eq!(s.sum(&s).unwrap(), s);
        let a = span(2, &[&[1, 1]]);
        let b = span(2, &[&[1, -1]]);
        assert!(a.sum(&b).unwrap().is_full());
    }

    #[test]
    fn intersect_examples() {
        let a = span(3, &[&[1, 0, 0], &[0, 1, 0]]);
        let b = span(3, &[&[0, 1, 0], &[0, 0, 1]]);
        assert_eq!(a.intersect(&b).unwrap(), span(3, &[&[0, 1, 0]]));
        assert_eq!(a.intersect(&Subspace::full(3)).unwrap(), a);
        let c = span(3, &[&[1, 1, 0], &[0, 0, 1]]);
        let d = span(3, &[&[1, 0, 0], &[0, 1, 1]]);
        let meet = c.intersect(&d).unwrap();
        assert_eq!(meet.dim(), 1);
        // oracle: e1+e2+e3 lies in both
        assert_eq!(meet, span(3, &[&[1, 1, 1]]));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = Subspace::full(2);
        let b = Subspace::full(3);
        assert_eq!(
            a.sum(&b),
            Err(LinAlgError::DimensionMismatch { left: 2, right: 3 })
        );
        assert!(a.intersect(&b).is_err());
    }

    #[test]
    fn canonical_form_identifies_equal_spans() {
        let a = span(3, &[&[1, 2, 3], &[0, 1, 1]]);
        let b = span(3, &[&[1, 3, 4], &[2, 5, 7]]);
        assert_eq!(a, b);
        assert_eq!(a.basis(), b.basis());
    }

    #[test]
    fn annihilator_of_zero_and_full() {
        assert!(Subspace::zero(3).annihilator().is_full());
        assert_eq!(Subspace::full(3).annihilator().dim(), 0);
    }
}
