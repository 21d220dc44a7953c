//! Dense exact matrices and vectors over a [`Field`].
//!
//! Elimination always pivots on the first row (top-down) holding a nonzero
//! entry in the current column, so ranks, solutions and null vectors are
//! reproducible bit-for-bit.

use std::fmt;

use thiserror::Error;

use crate::gf::{Elem, Field};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operands live in different fields")]
    FieldMismatch,
    #[error("element {value} is not in GF({order})")]
    OutOfRange { value: u32, order: u32 },
    #[error("system is rank deficient: rank {rank}, need {needed}")]
    RankDeficient { rank: usize, needed: usize },
    #[error("system is inconsistent at row {row}")]
    Inconsistent { row: usize },
    #[error("matrix is singular")]
    Singular,
}

/// A dense row-major matrix over a finite field.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

/// A column vector over a finite field.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldVector {
    field: Field,
    data: Vec<Elem>,
}

impl FieldVector {
    pub fn new(field: &Field, data: Vec<Elem>) -> Result<Self, LinalgError> {
        if let Some(bad) = data.iter().find(|e| !field.contains(**e)) {
            return Err(LinalgError::OutOfRange {
                value: bad.value(),
                order: field.order(),
            });
        }
        Ok(FieldVector {
            field: field.clone(),
            data,
        })
    }

    pub fn zeros(field: &Field, len: usize) -> Self {
        FieldVector {
            field: field.clone(),
            data: vec![Elem::ZERO; len],
        }
    }

    /// Builds a vector from canonical integer encodings.
    pub fn from_values(field: &Field, values: &[u32]) -> Result<Self, LinalgError> {
        Self::new(field, values.iter().map(|&v| Elem(v)).collect())
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Elem] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Elem> {
        self.data
    }

    pub fn values(&self) -> Vec<u32> {
        self.data.iter().map(|e| e.value()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    pub fn scale(&self, c: Elem) -> FieldVector {
        let data = self.data.iter().map(|&x| self.field.mul(c, x)).collect();
        FieldVector {
            field: self.field.clone(),
            data,
        }
    }
}

impl std::ops::Index<usize> for FieldVector {
    type Output = Elem;

    fn index(&self, i: usize) -> &Elem {
        &self.data[i]
    }
}

impl fmt::Debug for FieldVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.values())
    }
}

impl FieldMatrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        FieldMatrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![Elem::ZERO; rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        Self::from_fn(
            field,
            n,
            n,
            |i, j| if i == j { Elem::ONE } else { Elem::ZERO },
        )
    }

    /// `J_n`: ones on the anti-diagonal.
    pub fn anti_identity(field: &Field, n: usize) -> Self {
        Self::from_fn(field, n, n, |i, j| {
            if i + j + 1 == n {
                Elem::ONE
            } else {
                Elem::ZERO
            }
        })
    }

    pub fn from_fn(
        field: &Field,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Elem,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        FieldMatrix {
            field: field.clone(),
            rows,
            cols,
            data,
        }
    }

    /// Builds a matrix from rows of canonical integer encodings.
    pub fn from_rows(field: &Field, rows: &[Vec<u32>]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(LinalgError::DimensionMismatch("ragged rows".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for &v in rows.iter().flatten() {
            if v >= field.order() {
                return Err(LinalgError::OutOfRange {
                    value: v,
                    order: field.order(),
                });
            }
            data.push(Elem(v));
        }
        Ok(FieldMatrix {
            field: field.clone(),
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Elem) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn set_row(&mut self, i: usize, values: &[Elem]) {
        assert_eq!(values.len(), self.cols, "row length");
        self.data[i * self.cols..(i + 1) * self.cols].copy_from_slice(values);
    }

    /// Rows as canonical integers.
    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|e| e.value()).collect())
            .collect()
    }

    pub fn transpose(&self) -> FieldMatrix {
        Self::from_fn(&self.field, self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Rows `0..count`.
    pub fn top_rows(&self, count: usize) -> FieldMatrix {
        assert!(count <= self.rows);
        FieldMatrix {
            field: self.field.clone(),
            rows: count,
            cols: self.cols,
            data: self.data[..count * self.cols].to_vec(),
        }
    }

    /// Keeps rows in `rows` and columns in `cols`.
    pub fn submatrix(
        &self,
        rows: impl IntoIterator<Item = usize>,
        cols: impl IntoIterator<Item = usize> + Clone,
    ) -> FieldMatrix {
        let mut data = Vec::new();
        let mut nrows = 0;
        let mut ncols = 0;
        for i in rows {
            ncols = 0;
            for j in cols.clone() {
                data.push(self.get(i, j));
                ncols += 1;
            }
            nrows += 1;
        }
        FieldMatrix {
            field: self.field.clone(),
            rows: nrows,
            cols: ncols,
            data,
        }
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &FieldMatrix) -> Result<FieldMatrix, LinalgError> {
        self.same_field(other)?;
        if self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "cannot stack {} columns over {}",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(FieldMatrix {
            field: self.field.clone(),
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    fn same_field(&self, other: &FieldMatrix) -> Result<(), LinalgError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(LinalgError::FieldMismatch)
        }
    }

    pub fn matmul(&self, other: &FieldMatrix) -> Result<FieldMatrix, LinalgError> {
        self.same_field(other)?;
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = FieldMatrix::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = f.add(out.data[idx], f.mul(a, other.get(k, j)));
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &FieldVector) -> Result<FieldVector, LinalgError> {
        if self.field != v.field {
            return Err(LinalgError::FieldMismatch);
        }
        if self.cols != v.len() {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let data = (0..self.rows)
            .map(|i| {
                self.field
                    .dot(self.row(i).iter().copied(), v.data.iter().copied())
            })
            .collect();
        Ok(FieldVector {
            field: self.field.clone(),
            data,
        })
    }

    /// Row vector times matrix: `v^T A`.
    pub fn left_mul(&self, v: &[Elem]) -> Result<Vec<Elem>, LinalgError> {
        if v.len() != self.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "row vector of length {} times {}x{}",
                v.len(),
                self.rows,
                self.cols
            )));
        }
        let f = &self.field;
        let mut out = vec![Elem::ZERO; self.cols];
        for (i, &c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o = f.add(*o, f.mul(c, a));
            }
        }
        Ok(out)
    }

    /// Kronecker product: block `(i, j)` is `self[i][j] * other`.
    pub fn kron(&self, other: &FieldMatrix) -> Result<FieldMatrix, LinalgError> {
        self.same_field(other)?;
        let f = &self.field;
        Ok(Self::from_fn(
            f,
            self.rows * other.rows,
            self.cols * other.cols,
            |i, j| {
                f.mul(
                    self.get(i / other.rows, j / other.cols),
                    other.get(i % other.rows, j % other.cols),
                )
            },
        ))
    }

    pub fn rank(&self) -> usize {
        let mut work = self.clone();
        work.row_reduce(self.cols).len()
    }

    /// Reduced row echelon form on the first `limit` columns, in place.
    /// Returns the pivot columns.
    fn row_reduce(&mut self, limit: usize) -> Vec<usize> {
        let f = self.field.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..limit {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            if pr != r {
                for j in 0..self.cols {
                    self.data.swap(pr * self.cols + j, r * self.cols + j);
                }
            }
            let inv = f.inv(self.get(r, c)).expect("pivot is nonzero");
            for j in 0..self.cols {
                let idx = r * self.cols + j;
                self.data[idx] = f.mul(self.data[idx], inv);
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let factor = self.get(i, c);
                if factor.is_zero() {
                    continue;
                }
                for j in 0..self.cols {
                    let sub = f.mul(factor, self.get(r, j));
                    let idx = i * self.cols + j;
                    self.data[idx] = f.sub(self.data[idx], sub);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// The unique `u` with `self * u = y` for a full-column-rank system.
    /// Redundant rows are checked exactly.
    pub fn solve(&self, y: &FieldVector) -> Result<FieldVector, LinalgError> {
        if self.field != y.field {
            return Err(LinalgError::FieldMismatch);
        }
        if y.len() != self.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "{} rows but right-hand side of length {}",
                self.rows,
                y.len()
            )));
        }
        let n = self.cols;
        // Augment with y and reduce on the coefficient columns only.
        let mut aug = FieldMatrix::from_fn(&self.field, self.rows, n + 1, |i, j| {
            if j < n {
                self.get(i, j)
            } else {
                y[i]
            }
        });
        let pivots = aug.row_reduce(n);
        if pivots.len() < n {
            return Err(LinalgError::RankDeficient {
                rank: pivots.len(),
                needed: n,
            });
        }
        if let Some(row) = (n..self.rows).find(|&i| !aug.get(i, n).is_zero()) {
            return Err(LinalgError::Inconsistent { row });
        }
        let data = (0..n).map(|i| aug.get(i, n)).collect();
        Ok(FieldVector {
            field: self.field.clone(),
            data,
        })
    }

    pub fn inverse(&self) -> Result<FieldMatrix, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::DimensionMismatch(
                "inverse of a non-square matrix".into(),
            ));
        }
        let n = self.rows;
        let mut aug = FieldMatrix::from_fn(&self.field, n, 2 * n, |i, j| {
            if j < n {
                self.get(i, j)
            } else if j - n == i {
                Elem::ONE
            } else {
                Elem::ZERO
            }
        });
        if aug.row_reduce(n).len() < n {
            return Err(LinalgError::Singular);
        }
        Ok(aug.submatrix(0..n, n..2 * n))
    }

    /// A nonzero `b` with `b^T * self = 0`, or `None` when the rows are
    /// independent.
    ///
    /// Among all solutions, the one with the highest-index free variable set
    /// to 1 and every other free variable 0.
    pub fn left_null_vector(&self) -> Option<FieldVector> {
        let mut t = self.transpose();
        let pivots = t.row_reduce(t.cols);
        let free = (0..t.cols).rev().find(|c| !pivots.contains(c))?;
        let f = &self.field;
        let mut b = vec![Elem::ZERO; t.cols];
        b[free] = Elem::ONE;
        for (r, &pc) in pivots.iter().enumerate() {
            b[pc] = f.neg(t.get(r, free));
        }
        Some(FieldVector {
            field: f.clone(),
            data: b,
        })
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self.get(i, j).is_zero()))
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.rows).all(|i| (0..i.min(self.cols)).all(|j| self.get(i, j).is_zero()))
    }

    pub fn has_nonzero_diagonal(&self) -> bool {
        (0..self.rows.min(self.cols)).all(|i| !self.get(i, i).is_zero())
    }

    pub fn is_identity(&self) -> bool {
        *self == FieldMatrix::identity(&self.field, self.rows) && self.is_square()
    }
}

impl fmt::Debug for FieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} ", self.rows, self.cols)?;
        f.debug_list().entries(self.to_rows()).finish()
    }
}

impl fmt::Display for FieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|e| e.to_string()).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Stacks the first `ks[l]` rows of `matrices[l]`, in index order.
pub fn stack_prefixes(matrices: &[FieldMatrix], ks: &[usize]) -> Result<FieldMatrix, LinalgError> {
    let first = matrices
        .first()
        .ok_or_else(|| LinalgError::DimensionMismatch("no matrices to stack".into()))?;
    if matrices.len() != ks.len() {
        return Err(LinalgError::DimensionMismatch(format!(
            "{} matrices but a tuple of length {}",
            matrices.len(),
            ks.len()
        )));
    }
    let cols = first.cols;
    let total: usize = ks.iter().sum();
    let mut data = Vec::with_capacity(total * cols);
    for (m, &k) in matrices.iter().zip(ks) {
        first.same_field(m)?;
        if m.cols != cols || k > m.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "cannot take {k} rows of a {}x{} matrix into {cols} columns",
                m.rows, m.cols
            )));
        }
        data.extend_from_slice(&m.data[..k * cols]);
    }
    Ok(FieldMatrix {
        field: first.field.clone(),
        rows: total,
        cols,
        data,
    })
}
