//! Least squares by sequential rank-one projection elimination.
//!
//! Columns are removed one at a time, last index first. Each removed column
//! `q` is used to project the remaining columns and the right-hand side onto
//! the hyperplane orthogonal to `q`. When a single column `k` is left, its
//! reduced form `Cₖ aₖ` and the reduced right-hand side `Cₖ b` give
//! `xₖ = (Cₖaₖ)ᵀ(Cₖb) / (Cₖaₖ)ᵀ(Cₖaₖ)`, where `Cₖ` is the product of all the
//! projectors built on the way. No matrix is ever inverted.
//!
//! The per-stage coefficients are kept in a [`CoefficientLedger`], from which
//! the remaining unknowns follow by substitution in O(n²) and the columns
//! removed along the way form an orthogonal `Q` with `QᵀA` triangular.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{
    check_len, dot_slices, norm2, project_out, DenseMatrix, OpCategory, OpCounter, RealVector,
    SingularityFloor,
};

/// Largest dimension [`build_c_matrix`] will materialize.
pub const MAX_C_MATRIX_DIM: usize = 128;

/// Relative cancellation threshold for [`ratio_sum`]'s denominator.
pub const SUM_CANCELLATION_FLOOR: f64 = 1e-12;

/// How the kept unknown is computed from its reduced column and right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RatioMode {
    /// `qᵀb / qᵀq`; the least-squares value for any `m ≥ n`.
    #[default]
    Dot,
    /// `Σbᵢ / Σqᵢ`; exact only when the reduced system is consistent.
    Sum,
}

impl FromStr for RatioMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" => Ok(RatioMode::Dot),
            "sum" => Ok(RatioMode::Sum),
            other => Err(Error::InvalidConfig(format!(
                "unknown ratio mode `{other}`"
            ))),
        }
    }
}

impl fmt::Display for RatioMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RatioMode::Dot => "dot",
            RatioMode::Sum => "sum",
        })
    }
}

/// The order in which columns are removed when extracting `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QrDirection {
    /// Remove column n-1 first; `QᵀA` comes out lower triangular.
    #[default]
    LastToFirst,
    /// Remove column 0 first; `QᵀA` comes out upper triangular.
    FirstToLast,
}

impl FromStr for QrDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "last" | "last-to-first" => Ok(QrDirection::LastToFirst),
            "first" | "first-to-last" => Ok(QrDirection::FirstToLast),
            other => Err(Error::InvalidConfig(format!(
                "unknown QR direction `{other}`"
            ))),
        }
    }
}

/// What one elimination stage left behind.
#[derive(Debug, Clone, PartialEq)]
pub struct EliminationRecord {
    /// Index of the removed column in the original matrix.
    pub pivot_index: usize,
    /// The removed column as it stood at removal time.
    pub q: RealVector,
    /// `qᵀq`.
    pub gram: f64,
    /// `(j, qᵀāⱼ / qᵀq)` for every column `j` still active, ascending `j`.
    pub rho: Vec<(usize, f64)>,
    /// `qᵀb̄ / qᵀq`.
    pub beta: f64,
}

impl EliminationRecord {
    pub fn rho(&self, column: usize) -> Option<f64> {
        self.rho.iter().find(|(j, _)| *j == column).map(|&(_, r)| r)
    }
}

/// Output of [`reduce`]: every stage's coefficients plus the kept column.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientLedger {
    /// Stages in elimination order.
    pub records: Vec<EliminationRecord>,
    pub kept_index: usize,
    /// `Cₖ aₖ`.
    pub kept_column: RealVector,
    /// `Cₖ b`.
    pub kept_rhs: RealVector,
}

/// Orthogonal columns produced by elimination, and `QᵀA`.
#[derive(Debug, Clone, PartialEq)]
pub struct QrFactors {
    pub direction: QrDirection,
    /// Column `p` is the reduced column `qₚ` stored when `p` was removed.
    pub q: DenseMatrix,
    /// `QᵀA`.
    pub t: DenseMatrix,
    /// `qₚᵀqₚ`.
    pub d: RealVector,
    /// Unit-triangular `U` of `ρ` coefficients with `A = Q U`.
    pub coefficients: DenseMatrix,
}

impl QrFactors {
    /// `Q U`, which reproduces `A`.
    pub fn reconstruct(&self) -> DenseMatrix {
        self.q
            .matmul(&self.coefficients)
            .expect("Q and U shapes are consistent by construction")
    }
}

/// A solve's answer together with its residual and operation counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: RealVector,
    /// `‖A x - b‖` against the caller's original `A` and `b`.
    pub residual_norm: f64,
    pub counter: OpCounter,
}

impl Solution {
    pub(crate) fn new(a: &DenseMatrix, b: &RealVector, x: Vec<f64>, counter: OpCounter) -> Self {
        let x = RealVector::from_vec_unchecked(x);
        let residual_norm = residual_norm(a, b, &x);
        Solution {
            x,
            residual_norm,
            counter,
        }
    }
}

/// `‖A x - b‖`.
pub fn residual_norm(a: &DenseMatrix, b: &[f64], x: &[f64]) -> f64 {
    let ax = a.mul_vec(x).expect("x has one entry per column");
    let r: Vec<f64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
    norm2(&r)
}

/// Working copy of the active columns and right-hand side.
struct Eliminator {
    rows: usize,
    data: Vec<f64>,
    active: Vec<usize>,
    rhs: Vec<f64>,
    floor: SingularityFloor,
}

impl Eliminator {
    fn new(a: &DenseMatrix, b: &[f64], floor: SingularityFloor) -> Self {
        Eliminator {
            rows: a.rows(),
            data: a.as_col_major().to_vec(),
            active: (0..a.cols()).collect(),
            rhs: b.to_vec(),
            floor,
        }
    }

    fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    fn eliminate(&mut self, pivot: usize, counter: &mut OpCounter) -> Result<EliminationRecord> {
        let pos = self
            .active
            .iter()
            .position(|&j| j == pivot)
            .ok_or(Error::IndexOutOfRange {
                index: pivot,
                len: self.data.len() / self.rows,
            })?;
        let m = self.rows;
        let q = self.column(pivot).to_vec();
        let gram = dot_slices(&q, &q);
        counter.record(OpCategory::Normalization, m);
        if !self.floor.accepts(gram) {
            return Err(Error::singular(pivot));
        }
        self.active.remove(pos);

        let mut rho = Vec::with_capacity(self.active.len());
        for &j in &self.active {
            let col = &mut self.data[j * m..(j + 1) * m];
            let r = project_out(&q, gram, col, OpCategory::PivotDot, counter);
            rho.push((j, r));
        }
        let beta = project_out(&q, gram, &mut self.rhs, OpCategory::Update, counter);

        Ok(EliminationRecord {
            pivot_index: pivot,
            q: RealVector::from_vec_unchecked(q),
            gram,
            rho,
            beta,
        })
    }
}

fn check_system(a: &DenseMatrix, b: &[f64]) -> Result<()> {
    if a.rows() < a.cols() {
        return Err(Error::Underdetermined {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    check_len(a.rows(), b.len())
}

fn check_index(k: usize, n: usize) -> Result<()> {
    if k >= n {
        return Err(Error::IndexOutOfRange { index: k, len: n });
    }
    Ok(())
}

/// One elimination stage on a standalone system.
///
/// Removes column `pivot` of `a_active`, projects the other columns and
/// `b_active` orthogonal to it, and returns the reduced system. The record's
/// indices refer to the columns of `a_active`.
pub fn eliminate_column(
    a_active: &DenseMatrix,
    b_active: &RealVector,
    pivot: usize,
    counter: &mut OpCounter,
) -> Result<(Option<DenseMatrix>, RealVector, EliminationRecord)> {
    check_len(a_active.rows(), b_active.len())?;
    check_index(pivot, a_active.cols())?;
    let floor = SingularityFloor::for_matrix(a_active);
    let mut work = Eliminator::new(a_active, b_active, floor);
    let record = work.eliminate(pivot, counter)?;
    let remaining = if work.active.is_empty() {
        None
    } else {
        let mut data = Vec::with_capacity(work.active.len() * work.rows);
        for &j in &work.active {
            data.extend_from_slice(work.column(j));
        }
        Some(DenseMatrix::from_col_major_unchecked(
            work.rows,
            work.active.len(),
            data,
        ))
    };
    Ok((remaining, RealVector::from_vec_unchecked(work.rhs), record))
}

/// Eliminate every column except `keep`, highest index first.
///
/// The ledger's `kept_column` is `Cₖ aₖ` and `kept_rhs` is `Cₖ b`.
pub fn reduce(
    a: &DenseMatrix,
    b: &RealVector,
    keep: usize,
    counter: &mut OpCounter,
) -> Result<CoefficientLedger> {
    check_system(a, b)?;
    check_index(keep, a.cols())?;
    let floor = SingularityFloor::for_matrix(a);
    let mut work = Eliminator::new(a, b, floor);
    let records = (0..a.cols())
        .rev()
        .filter(|&p| p != keep)
        .map(|p| work.eliminate(p, counter))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoefficientLedger {
        kept_column: RealVector::from_vec_unchecked(work.column(keep).to_vec()),
        kept_rhs: RealVector::from_vec_unchecked(work.rhs),
        kept_index: keep,
        records,
    })
}

/// `a_redᵀ b_red / a_redᵀ a_red`.
pub fn ratio_dot(
    a_red: &RealVector,
    b_red: &RealVector,
    floor: SingularityFloor,
    counter: &mut OpCounter,
) -> Result<f64> {
    check_len(a_red.len(), b_red.len())?;
    let m = a_red.len();
    let gram = dot_slices(a_red, a_red);
    let num = dot_slices(a_red, b_red);
    counter.record(OpCategory::Normalization, 2 * m + 1);
    if !floor.accepts(gram) {
        return Err(Error::SingularPivot { column: None });
    }
    Ok(num / gram)
}

/// `Σ b_red / Σ a_red`.
///
/// Fails with `ZeroDenominator` when the components of `a_red` cancel to
/// within [`SUM_CANCELLATION_FLOOR`] of their absolute sum.
pub fn ratio_sum(a_red: &RealVector, b_red: &RealVector) -> Result<f64> {
    check_len(a_red.len(), b_red.len())?;
    let den: f64 = a_red.iter().sum();
    let scale: f64 = a_red.iter().map(|v| v.abs()).sum();
    if scale == 0.0 || den.abs() <= SUM_CANCELLATION_FLOOR * scale {
        return Err(Error::ZeroDenominator);
    }
    Ok(b_red.iter().sum::<f64>() / den)
}

fn kept_ratio(
    ledger: &CoefficientLedger,
    floor: SingularityFloor,
    mode: RatioMode,
    counter: &mut OpCounter,
) -> Result<f64> {
    let col = &ledger.kept_column;
    // The kept column must clear the floor in both modes.
    if !floor.accepts(dot_slices(col, col)) {
        return Err(Error::singular(ledger.kept_index));
    }
    match mode {
        RatioMode::Dot => ratio_dot(col, &ledger.kept_rhs, floor, counter)
            .map_err(|e| e.at_column(ledger.kept_index)),
        RatioMode::Sum => {
            counter.record(OpCategory::Normalization, 1);
            ratio_sum(col, &ledger.kept_rhs)
        }
    }
}

/// Compute the single unknown `x[k]` without touching the others.
pub fn solve_single(
    a: &DenseMatrix,
    b: &RealVector,
    k: usize,
    mode: RatioMode,
) -> Result<(f64, OpCounter)> {
    let mut counter = OpCounter::new();
    let ledger = reduce(a, b, k, &mut counter)?;
    let floor = SingularityFloor::for_matrix(a);
    let xk = kept_ratio(&ledger, floor, mode, &mut counter)?;
    Ok((xk, counter))
}

/// Solve for every unknown from one reduction pass.
///
/// `x[0]` comes from the kept column; each removed column then follows in
/// reverse removal order as `xₚ = βₚ - Σ ρₚⱼ xⱼ` over the columns that were
/// still active when `p` was removed.
pub fn solve_all(a: &DenseMatrix, b: &RealVector, mode: RatioMode) -> Result<Solution> {
    let mut counter = OpCounter::new();
    let ledger = reduce(a, b, 0, &mut counter)?;
    let floor = SingularityFloor::for_matrix(a);
    let mut x = vec![0.0; a.cols()];
    x[0] = kept_ratio(&ledger, floor, mode, &mut counter)?;
    for rec in ledger.records.iter().rev() {
        let correction: f64 = rec.rho.iter().map(|&(j, r)| r * x[j]).sum();
        counter.record(OpCategory::BackSubstitution, rec.rho.len());
        x[rec.pivot_index] = rec.beta - correction;
    }
    Ok(Solution::new(a, b, x, counter))
}

/// Orthogonal factor from a full elimination pass in the given direction.
pub fn extract_qr(a: &DenseMatrix, direction: QrDirection) -> Result<QrFactors> {
    let (m, n) = a.shape();
    check_system(a, &vec![0.0; m])?;
    let order: Vec<usize> = match direction {
        QrDirection::LastToFirst => (0..n).rev().collect(),
        QrDirection::FirstToLast => (0..n).collect(),
    };
    let floor = SingularityFloor::for_matrix(a);
    let mut work = Eliminator::new(a, &vec![0.0; m], floor);
    let mut counter = OpCounter::new();

    let mut q = vec![0.0; m * n];
    let mut d = vec![0.0; n];
    let mut u = vec![0.0; n * n];
    for &p in &order {
        let rec = work.eliminate(p, &mut counter)?;
        q[p * m..(p + 1) * m].copy_from_slice(&rec.q);
        d[p] = rec.gram;
        u[p * n + p] = 1.0;
        for &(j, r) in &rec.rho {
            // U[p][j], column-major
            u[j * n + p] = r;
        }
    }
    let q = DenseMatrix::from_col_major_unchecked(m, n, q);
    let t = q.tr_matmul(a)?;
    Ok(QrFactors {
        direction,
        q,
        t,
        d: RealVector::from_vec_unchecked(d),
        coefficients: DenseMatrix::from_col_major_unchecked(n, n, u),
    })
}

/// `Cₖ aₖ`: column `k` with every component along the other columns removed.
pub fn inverse_vector(a: &DenseMatrix, k: usize) -> Result<RealVector> {
    let zeros = RealVector::zeros(a.rows());
    let mut counter = OpCounter::new();
    let ledger = reduce(a, &zeros, k, &mut counter)?;
    let floor = SingularityFloor::for_matrix(a);
    let col = ledger.kept_column;
    if !floor.accepts(dot_slices(&col, &col)) {
        return Err(Error::singular(k));
    }
    Ok(col)
}

/// Dense `Cₖ`, built projector by projector from the original columns.
///
/// Starting from `C = I`, for each column `p ≠ k` (highest first) the next
/// projector is built from `v = C aₚ` and prepended: `C ← (I - v vᵀ/vᵀv) C`.
/// This is an O(m²n) test oracle, independent of the elimination path.
pub fn build_c_matrix(a: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    let (m, n) = a.shape();
    if m > MAX_C_MATRIX_DIM {
        return Err(Error::SizeGuard {
            size: m,
            limit: MAX_C_MATRIX_DIM,
        });
    }
    check_index(k, n)?;
    let floor = SingularityFloor::for_matrix(a);
    let mut c = DenseMatrix::identity(m);
    for p in (0..n).rev().filter(|&p| p != k) {
        let v = c.mul_vec(a.column(p))?;
        let gram = dot_slices(&v, &v);
        if !floor.accepts(gram) {
            return Err(Error::singular(p));
        }
        let vtc = c.tr_mul_vec(&v)?;
        c = DenseMatrix::from_fn(m, m, |i, j| c.get(i, j) - v[i] * vtc[j] / gram)?;
    }
    Ok(c)
}
