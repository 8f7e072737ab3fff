//! Dense real vectors and matrices, implicit rank-one projectors, and
//! categorized multiplication counting.
//!
//! Matrices are stored column-major so that reading a column is a contiguous
//! O(m) slice. A [`PivotProjector`] represents `R = I - a aᵀ / aᵀa` and is
//! only ever applied as a rank-one update; [`materialize_projector`] exists
//! for small test oracles.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative singularity threshold: a pivot `q` is rejected when
/// `qᵀq < (RELATIVE_PIVOT_FLOOR * max_column_norm)²`.
pub const RELATIVE_PIVOT_FLOOR: f64 = 1e-12;

/// Largest dimension [`materialize_projector`] will build.
pub const MAX_MATERIALIZED_DIM: usize = 512;

/// A non-empty vector of finite doubles.
#[derive(Debug, Clone, PartialEq)]
pub struct RealVector(Vec<f64>);

impl RealVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(index) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(RealVector(entries))
    }

    /// # Panics
    /// If `len == 0`.
    pub fn zeros(len: usize) -> Self {
        assert!(len > 0, "RealVector must be non-empty");
        RealVector(vec![0.0; len])
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<f64>) -> Self {
        debug_assert!(!entries.is_empty());
        RealVector(entries)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for RealVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for RealVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        RealVector::new(v)
    }
}

/// Column-major dense matrix of finite doubles.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Build from column-major storage.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Empty);
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Build from row-major storage.
    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Empty);
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                expected: rows * cols,
                found: data.len(),
            });
        }
        let mut col_major = vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                col_major[j * rows + i] = data[i * cols + j];
            }
        }
        Self::from_col_major(rows, cols, col_major)
    }

    /// Build from a slice of equal-length rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(m * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        Self::from_row_major(m, n, &flat)
    }

    /// Build from columns of equal length.
    pub fn from_columns(columns: &[RealVector]) -> Result<Self> {
        let n = columns.len();
        let m = columns.first().map_or(0, |c| c.len());
        let mut data = Vec::with_capacity(m * n);
        for c in columns {
            if c.len() != m {
                return Err(Error::Dimension {
                    expected: m,
                    found: c.len(),
                });
            }
            data.extend_from_slice(c);
        }
        Self::from_col_major(m, n, data)
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self::from_col_major(rows, cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "DenseMatrix must be non-empty");
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub(crate) fn from_col_major_unchecked(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_vector(&self, j: usize) -> RealVector {
        RealVector::from_vec_unchecked(self.column(j).to_vec())
    }

    pub fn as_col_major(&self) -> &[f64] {
        &self.data
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.data.len());
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_col_major_unchecked(self.cols, self.rows, self.to_row_major())
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<RealVector> {
        check_len(self.cols, x.len())?;
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.column(j)) {
                *o += a * xj;
            }
        }
        Ok(RealVector::from_vec_unchecked(out))
    }

    /// `Aᵀ y`.
    pub fn tr_mul_vec(&self, y: &[f64]) -> Result<RealVector> {
        check_len(self.rows, y.len())?;
        let out = (0..self.cols)
            .map(|j| dot_slices(self.column(j), y))
            .collect();
        Ok(RealVector::from_vec_unchecked(out))
    }

    /// `A B`.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        check_len(self.cols, other.rows)?;
        let mut data = Vec::with_capacity(self.rows * other.cols);
        for j in 0..other.cols {
            data.extend(self.mul_vec(other.column(j))?.into_vec());
        }
        Ok(DenseMatrix::from_col_major_unchecked(
            self.rows, other.cols, data,
        ))
    }

    /// `Aᵀ B`.
    pub fn tr_matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        check_len(self.rows, other.rows)?;
        let mut data = Vec::with_capacity(self.cols * other.cols);
        for j in 0..other.cols {
            for i in 0..self.cols {
                data.push(dot_slices(self.column(i), other.column(j)));
            }
        }
        Ok(DenseMatrix::from_col_major_unchecked(
            self.cols, other.cols, data,
        ))
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn column_norm(&self, j: usize) -> f64 {
        norm2(self.column(j))
    }

    pub fn max_column_norm(&self) -> f64 {
        (0..self.cols)
            .map(|j| self.column_norm(j))
            .fold(0.0, f64::max)
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(Error::Dimension {
                expected: self.data.len(),
                found: other.data.len(),
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

impl fmt::Display for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if j > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{:>12.6e}", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Which multiplication tally an operation is charged to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpCategory {
    /// Inner products of a pivot with matrix columns (`qᵀ A`).
    PivotDot,
    /// Rank-one update multiplications, including the right-hand side.
    Update,
    /// Squared pivot norms, final ratio products, and every division.
    Normalization,
    /// Products consumed by back substitution.
    BackSubstitution,
}

/// Multiplication and division tallies for one solve.
///
/// Additions are not counted. Tallies only grow.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpCounter {
    pivot_dot_mults: u64,
    update_mults: u64,
    normalization_ops: u64,
    backsub_mults: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, category: OpCategory, count: usize) {
        let count = count as u64;
        match category {
            OpCategory::PivotDot => self.pivot_dot_mults += count,
            OpCategory::Update => self.update_mults += count,
            OpCategory::Normalization => self.normalization_ops += count,
            OpCategory::BackSubstitution => self.backsub_mults += count,
        }
    }

    pub fn pivot_dot_mults(&self) -> u64 {
        self.pivot_dot_mults
    }

    pub fn update_mults(&self) -> u64 {
        self.update_mults
    }

    pub fn normalization_ops(&self) -> u64 {
        self.normalization_ops
    }

    pub fn backsub_mults(&self) -> u64 {
        self.backsub_mults
    }

    /// Sum of every category.
    pub fn total(&self) -> u64 {
        self.pivot_dot_mults + self.update_mults + self.normalization_ops + self.backsub_mults
    }

    pub fn merge(&mut self, other: &OpCounter) {
        self.pivot_dot_mults += other.pivot_dot_mults;
        self.update_mults += other.update_mults;
        self.normalization_ops += other.normalization_ops;
        self.backsub_mults += other.backsub_mults;
    }
}

/// Minimum accepted squared norm for a pivot, scaled to the problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityFloor {
    min_gram: f64,
}

impl SingularityFloor {
    /// Floor relative to the largest column norm of `a`.
    pub fn for_matrix(a: &DenseMatrix) -> Self {
        Self::from_reference_norm(a.max_column_norm())
    }

    pub fn from_reference_norm(norm: f64) -> Self {
        let r = RELATIVE_PIVOT_FLOOR * norm;
        SingularityFloor { min_gram: r * r }
    }

    pub fn min_gram(&self) -> f64 {
        self.min_gram
    }

    pub fn accepts(&self, gram: f64) -> bool {
        gram.is_finite() && gram > 0.0 && gram >= self.min_gram
    }
}

/// The implicit projector `I - a aᵀ / aᵀa`.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotProjector {
    a: RealVector,
    gram: f64,
}

impl PivotProjector {
    /// Rejects `a` whose squared norm falls below `floor`.
    pub fn new(a: RealVector, floor: SingularityFloor) -> Result<Self> {
        let gram = dot_slices(&a, &a);
        if !floor.accepts(gram) {
            return Err(Error::SingularPivot { column: None });
        }
        Ok(PivotProjector { a, gram })
    }

    /// Floor taken relative to `a`'s own norm, so only a zero pivot fails.
    pub fn from_vector(a: RealVector) -> Result<Self> {
        let floor = SingularityFloor::from_reference_norm(norm2(&a));
        Self::new(a, floor)
    }

    pub fn pivot(&self) -> &RealVector {
        &self.a
    }

    pub fn gram(&self) -> f64 {
        self.gram
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Dimension { expected, found });
    }
    Ok(())
}

#[inline]
pub(crate) fn dot_slices(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// `v -= (qᵀv / gram) q` in place; returns the coefficient.
///
/// Charges `m` to `dot_category`, `m` to `Update` and one division to
/// `Normalization`.
#[inline]
pub(crate) fn project_out(
    q: &[f64],
    gram: f64,
    v: &mut [f64],
    dot_category: OpCategory,
    counter: &mut OpCounter,
) -> f64 {
    let m = q.len();
    let coeff = dot_slices(q, v) / gram;
    for (vi, qi) in v.iter_mut().zip(q) {
        *vi -= coeff * qi;
    }
    counter.record(dot_category, m);
    counter.record(OpCategory::Update, m);
    counter.record(OpCategory::Normalization, 1);
    coeff
}

/// Inner product `uᵀv`, charging `u.len()` multiplications to `category`.
pub fn dot(
    u: &RealVector,
    v: &RealVector,
    category: OpCategory,
    counter: &mut OpCounter,
) -> Result<f64> {
    check_len(u.len(), v.len())?;
    counter.record(category, u.len());
    Ok(dot_slices(u, v))
}

/// `R v` computed as `v - a (aᵀv) / aᵀa`.
pub fn apply_projector(
    p: &PivotProjector,
    v: &RealVector,
    counter: &mut OpCounter,
) -> Result<RealVector> {
    check_len(p.dim(), v.len())?;
    let mut out = v.as_slice().to_vec();
    project_out(&p.a, p.gram, &mut out, OpCategory::PivotDot, counter);
    Ok(RealVector::from_vec_unchecked(out))
}

/// Apply `R` to every column of `m`.
pub fn project_columns(
    p: &PivotProjector,
    m: &DenseMatrix,
    counter: &mut OpCounter,
) -> Result<DenseMatrix> {
    check_len(p.dim(), m.rows())?;
    let mut data = m.data.clone();
    for col in data.chunks_exact_mut(m.rows) {
        project_out(&p.a, p.gram, col, OpCategory::PivotDot, counter);
    }
    Ok(DenseMatrix::from_col_major_unchecked(m.rows, m.cols, data))
}

/// Dense `I - a aᵀ / aᵀa`. Test-scale only.
pub fn materialize_projector(p: &PivotProjector) -> Result<DenseMatrix> {
    let m = p.dim();
    if m > MAX_MATERIALIZED_DIM {
        return Err(Error::SizeGuard {
            size: m,
            limit: MAX_MATERIALIZED_DIM,
        });
    }
    let a = &p.a;
    DenseMatrix::from_fn(m, m, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - a[i] * a[j] / p.gram
    })
}

/// Euclidean norm.
pub fn norm2(v: &[f64]) -> f64 {
    dot_slices(v, v).sqrt()
}
