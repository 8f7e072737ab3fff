//! Dense least squares by sequential rank-one projections.
//!
//! Columns of `A` are removed one at a time: each removed column `q` is
//! projected out of the remaining columns and the right-hand side with
//! `R = I - q qᵀ / qᵀq`, applied implicitly. What is left is a scalar
//! problem for the kept unknown. The recorded coefficients give the other
//! unknowns by back substitution, and the reduced columns form a
//! triangular QR factorization.
//!
//! ```
//! use projls::{solve_all, DenseMatrix, RatioMode, RealVector};
//!
//! let a = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
//! let b = RealVector::new(vec![1.0, 2.0, 3.0]).unwrap();
//! let sol = solve_all(&a, &b, RatioMode::Dot).unwrap();
//! assert!((sol.x[0] - 1.0).abs() < 1e-12 && (sol.x[1] - 2.0).abs() < 1e-12);
//! ```

pub mod baselines;
pub mod bench;
pub mod error;
pub mod io;
pub mod linalg;
pub mod sim;
pub mod solver;

pub use error::{Error, Result};
pub use linalg::{
    apply_projector, dot, materialize_projector, norm2, project_columns, DenseMatrix, OpCategory,
    OpCounter, PivotProjector, RealVector, SingularityFloor,
};
pub use sim::{build_problem, ChannelInstance, Method, SolveOptions};
pub use solver::{
    eliminate_column, extract_qr, inverse_vector, ratio_dot, ratio_sum, reduce, solve_all,
    solve_single, CoefficientLedger, EliminationRecord, QrDirection, QrFactors, RatioMode,
    Solution,
};
