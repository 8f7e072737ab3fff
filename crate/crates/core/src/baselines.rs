//! Reference solvers: Householder QR, randomized Kaczmarz, LSQR, LSMR, and a
//! dense normal-equations oracle for tests.
//!
//! Every solver here charges its work to an [`OpCounter`] with the same
//! conventions as the projection solver: inner products with matrix rows or
//! columns go to `PivotDot`, vector updates to `Update`, norms and divisions
//! to `Normalization`, and triangular solves to `BackSubstitution`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::linalg::{
    check_len, dot_slices, norm2, DenseMatrix, OpCategory, OpCounter, RealVector,
    RELATIVE_PIVOT_FLOOR,
};
use crate::solver::Solution;

/// Largest system the normal-equations oracle accepts.
pub const ORACLE_MAX_DIM: usize = 64;

/// Relative pivot threshold for the Gram-matrix elimination.
const GRAM_PIVOT_FLOOR: f64 = 1e-14;

/// Settings shared by the iterative baselines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterativeConfig {
    /// Kaczmarz sweeps; each sweep is `m` sampled row updates.
    pub max_sweeps: usize,
    /// Kaczmarz row-sampling seed.
    pub seed: u64,
    /// LSQR/LSMR stopping tolerance, used for both `atol` and `btol`.
    pub tolerance: f64,
    /// LSQR/LSMR iteration cap; `None` means `2n`.
    pub max_iterations: Option<usize>,
}

impl Default for IterativeConfig {
    fn default() -> Self {
        IterativeConfig {
            max_sweeps: 100,
            seed: 0,
            tolerance: 1e-12,
            max_iterations: None,
        }
    }
}

impl IterativeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_sweeps == 0 {
            return Err(Error::InvalidConfig("max_sweeps must be at least 1".into()));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn iteration_cap(&self, n: usize) -> usize {
        self.max_iterations.unwrap_or(2 * n)
    }
}

/// Householder reflectors applied to a working copy of `A`.
struct Householder {
    m: usize,
    n: usize,
    /// Column-major working copy; the upper triangle holds `R` off the diagonal.
    data: Vec<f64>,
    diag: Vec<f64>,
    reflectors: Vec<(Vec<f64>, f64)>,
}

impl Householder {
    fn factor(a: &DenseMatrix, counter: &mut OpCounter) -> Result<Self> {
        let (m, n) = a.shape();
        if m < n {
            return Err(Error::Underdetermined { rows: m, cols: n });
        }
        let floor = RELATIVE_PIVOT_FLOOR * a.max_column_norm();
        let mut data = a.as_col_major().to_vec();
        let mut diag = Vec::with_capacity(n);
        let mut reflectors = Vec::with_capacity(n);
        for k in 0..n {
            let x = &data[k * m + k..(k + 1) * m];
            let norm_x = norm2(x);
            counter.record(OpCategory::Normalization, m - k);
            if norm_x <= floor || norm_x == 0.0 {
                return Err(Error::singular(k));
            }
            let alpha = if x[0] >= 0.0 { -norm_x } else { norm_x };
            let mut v = x.to_vec();
            v[0] -= alpha;
            // vᵀv = 2‖x‖(‖x‖ + |x₀|)
            let vtv = 2.0 * norm_x * (norm_x + x[0].abs());
            counter.record(OpCategory::Normalization, 2);
            for j in k + 1..n {
                let col = &mut data[j * m + k..(j + 1) * m];
                reflect(&v, vtv, col, OpCategory::PivotDot, counter);
            }
            diag.push(alpha);
            reflectors.push((v, vtv));
        }
        Ok(Householder {
            m,
            n,
            data,
            diag,
            reflectors,
        })
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else {
            self.data[j * self.m + i]
        }
    }

    /// `Qᵀ b`, in place.
    fn apply_qt(&self, b: &mut [f64], counter: &mut OpCounter) {
        for (k, (v, vtv)) in self.reflectors.iter().enumerate() {
            reflect(v, *vtv, &mut b[k..], OpCategory::Update, counter);
        }
    }

    /// Solve `R x = y[..n]`.
    fn back_substitute(&self, y: &[f64], counter: &mut OpCounter) -> Vec<f64> {
        let n = self.n;
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.r(i, j) * x[j]).sum();
            counter.record(OpCategory::BackSubstitution, n - i - 1);
            counter.record(OpCategory::Normalization, 1);
            x[i] = (y[i] - s) / self.r(i, i);
        }
        x
    }

    /// Solve `Rᵀ x = y`.
    fn forward_substitute_transposed(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = vec![0.0; n];
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.r(j, i) * x[j]).sum();
            x[i] = (y[i] - s) / self.r(i, i);
        }
        x
    }

    fn r_mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (i..self.n).map(|j| self.r(i, j) * x[j]).sum())
            .collect()
    }

    fn rt_mul(&self, y: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|j| (0..=j).map(|i| self.r(i, j) * y[i]).sum())
            .collect()
    }
}

/// `y -= (2 vᵀy / vᵀv) v`.
fn reflect(v: &[f64], vtv: f64, y: &mut [f64], dot_category: OpCategory, counter: &mut OpCounter) {
    let w = dot_slices(v, y);
    let f = 2.0 * w / vtv;
    for (yi, vi) in y.iter_mut().zip(v) {
        *yi -= f * vi;
    }
    counter.record(dot_category, v.len());
    counter.record(OpCategory::Update, v.len());
    counter.record(OpCategory::Normalization, 2);
}

/// Least squares via Householder QR and back substitution.
pub fn householder_qr_solve(
    a: &DenseMatrix,
    b: &RealVector,
    counter: &mut OpCounter,
) -> Result<Solution> {
    check_len(a.rows(), b.len())?;
    let qr = Householder::factor(a, counter)?;
    let mut y = b.as_slice().to_vec();
    qr.apply_qt(&mut y, counter);
    let x = qr.back_substitute(&y, counter);
    Ok(Solution::new(a, b, x, *counter))
}

/// Estimate the 2-norm condition number of `A` from its Householder `R`.
///
/// Power iteration on `RᵀR` gives the largest singular value and inverse
/// iteration the smallest, so the result is a lower bound that is tight
/// once both iterations have converged. Rank deficiency yields infinity.
pub fn condition_estimate(a: &DenseMatrix) -> Result<f64> {
    const ITERATIONS: usize = 60;
    let n = a.cols();
    let qr = match Householder::factor(a, &mut OpCounter::new()) {
        Ok(qr) => qr,
        Err(Error::SingularPivot { .. }) => return Ok(f64::INFINITY),
        Err(e) => return Err(e),
    };
    let start: Vec<f64> = (0..n)
        .map(|i| 1.0 + (i as f64 * 0.618_033_988_7).fract())
        .collect();
    let normalize = |v: &mut Vec<f64>| {
        let s = norm2(v);
        v.iter_mut().for_each(|x| *x /= s);
        s
    };

    let mut x = start.clone();
    normalize(&mut x);
    let mut lambda_max = 0.0;
    for _ in 0..ITERATIONS {
        x = qr.rt_mul(&qr.r_mul(&x));
        lambda_max = normalize(&mut x);
    }

    let mut y = start;
    normalize(&mut y);
    let mut inv_lambda_min = 0.0;
    for _ in 0..ITERATIONS {
        let w = qr.forward_substitute_transposed(&y);
        let mut nxt = Householder::back_substitute(&qr, &w, &mut OpCounter::new());
        inv_lambda_min = normalize(&mut nxt);
        y = nxt;
    }
    if !(inv_lambda_min.is_finite() && lambda_max.is_finite()) {
        return Ok(f64::INFINITY);
    }
    Ok((lambda_max * inv_lambda_min).sqrt())
}

/// Condition number of `AᵀA`, the square of [`condition_estimate`].
pub fn gram_condition_estimate(a: &DenseMatrix) -> Result<f64> {
    condition_estimate(a).map(|k| k * k)
}

/// Randomized Kaczmarz from `x₀ = 0`.
///
/// Row `i` is drawn with probability `‖aᵢ‖² / ‖A‖_F²` and the iterate is
/// projected onto its hyperplane: `x ← x + (bᵢ - aᵢᵀx) / ‖aᵢ‖² · aᵢ`. Runs
/// exactly `max_sweeps · m` updates using `Xoshiro256++` seeded from
/// `cfg.seed`.
pub fn randomized_kaczmarz(
    a: &DenseMatrix,
    b: &RealVector,
    cfg: &IterativeConfig,
) -> Result<Solution> {
    cfg.validate()?;
    check_len(a.rows(), b.len())?;
    let (m, n) = a.shape();
    let rows = a.to_row_major();
    let row_norms: Vec<f64> = rows.chunks_exact(n).map(|r| dot_slices(r, r)).collect();
    if let Some(row) = row_norms.iter().position(|&s| s == 0.0) {
        return Err(Error::ZeroRow { row });
    }
    let sampler = WeightedIndex::new(&row_norms)
        .map_err(|e| Error::InvalidConfig(format!("row weights: {e}")))?;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(cfg.seed);
    let mut counter = OpCounter::new();
    let mut x = vec![0.0; n];
    for _ in 0..cfg.max_sweeps * m {
        let i = sampler.sample(&mut rng);
        let row = &rows[i * n..(i + 1) * n];
        let step = (b[i] - dot_slices(row, &x)) / row_norms[i];
        for (xj, aj) in x.iter_mut().zip(row) {
            *xj += step * aj;
        }
        counter.record(OpCategory::PivotDot, n);
        counter.record(OpCategory::Normalization, 1);
        counter.record(OpCategory::Update, n);
    }
    Ok(Solution::new(a, b, x, counter))
}

fn matvec(a: &DenseMatrix, x: &[f64], counter: &mut OpCounter) -> Vec<f64> {
    counter.record(OpCategory::PivotDot, a.rows() * a.cols());
    a.mul_vec(x).expect("length checked").into_vec()
}

fn rmatvec(a: &DenseMatrix, y: &[f64], counter: &mut OpCounter) -> Vec<f64> {
    counter.record(OpCategory::PivotDot, a.rows() * a.cols());
    a.tr_mul_vec(y).expect("length checked").into_vec()
}

/// `y = x - s y`.
fn axpy_into(x: &[f64], s: f64, y: &mut [f64], counter: &mut OpCounter) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = xi - s * *yi;
    }
    counter.record(OpCategory::Update, x.len());
}

/// `y += s x`.
fn axpy(s: f64, x: &[f64], y: &mut [f64], counter: &mut OpCounter) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
    counter.record(OpCategory::Update, x.len());
}

/// Normalize in place, returning the norm (zero vectors are left alone).
fn normalize(v: &mut [f64], counter: &mut OpCounter) -> f64 {
    let s = norm2(v);
    counter.record(OpCategory::Normalization, v.len());
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
        counter.record(OpCategory::Normalization, v.len());
    }
    s
}

fn vector_norm(v: &[f64], counter: &mut OpCounter) -> f64 {
    counter.record(OpCategory::Normalization, v.len());
    norm2(v)
}

/// LSQR (Paige and Saunders) without damping.
///
/// Stops when `‖r‖ ≤ tol‖b‖ + tol‖A‖‖x‖`, when `‖Aᵀr‖ ≤ tol‖A‖‖r‖`, on
/// bidiagonalization breakdown, or after the iteration cap.
pub fn lsqr_solve(a: &DenseMatrix, b: &RealVector, cfg: &IterativeConfig) -> Result<Solution> {
    cfg.validate()?;
    check_len(a.rows(), b.len())?;
    let n = a.cols();
    let tol = cfg.tolerance;
    let mut counter = OpCounter::new();
    let mut x = vec![0.0; n];

    let mut u = b.as_slice().to_vec();
    let mut beta = normalize(&mut u, &mut counter);
    if beta == 0.0 {
        return Ok(Solution::new(a, b, x, counter));
    }
    let b_norm = beta;
    let mut v = rmatvec(a, &u, &mut counter);
    let mut alpha = normalize(&mut v, &mut counter);
    if alpha == 0.0 {
        return Ok(Solution::new(a, b, x, counter));
    }
    let mut w = v.clone();
    let mut phibar = beta;
    let mut rhobar = alpha;
    let mut a_norm_sq = 0.0;

    for _ in 0..cfg.iteration_cap(n) {
        let av = matvec(a, &v, &mut counter);
        axpy_into(&av, alpha, &mut u, &mut counter);
        beta = normalize(&mut u, &mut counter);
        a_norm_sq += alpha * alpha + beta * beta;
        if beta > 0.0 {
            let atu = rmatvec(a, &u, &mut counter);
            axpy_into(&atu, beta, &mut v, &mut counter);
            alpha = normalize(&mut v, &mut counter);
        }

        let rho = rhobar.hypot(beta);
        let c = rhobar / rho;
        let s = beta / rho;
        let theta = s * alpha;
        rhobar = -c * alpha;
        let phi = c * phibar;
        phibar *= s;
        counter.record(OpCategory::Normalization, 8);

        axpy(phi / rho, &w, &mut x, &mut counter);
        axpy_into(&v, theta / rho, &mut w, &mut counter);

        let r_norm = phibar;
        let ar_norm = (alpha * s * phi).abs();
        let a_norm = a_norm_sq.sqrt();
        let x_norm = vector_norm(&x, &mut counter);
        let converged = r_norm <= tol * b_norm + tol * a_norm * x_norm
            || ar_norm <= tol * a_norm * r_norm
            || beta == 0.0
            || alpha == 0.0;
        if converged {
            break;
        }
    }
    Ok(Solution::new(a, b, x, counter))
}

/// Stable Givens rotation: returns `(c, s, r)` with `[c s; -s c][a; b] = [r; 0]`.
fn sym_ortho(a: f64, b: f64) -> (f64, f64, f64) {
    if b == 0.0 {
        (if a == 0.0 { 1.0 } else { a.signum() }, 0.0, a.abs())
    } else if a == 0.0 {
        (0.0, b.signum(), b.abs())
    } else if b.abs() > a.abs() {
        let tau = a / b;
        let s = b.signum() / (1.0 + tau * tau).sqrt();
        let c = s * tau;
        (c, s, b / s)
    } else {
        let tau = b / a;
        let c = a.signum() / (1.0 + tau * tau).sqrt();
        let s = c * tau;
        (c, s, a / c)
    }
}

/// LSMR (Fong and Saunders) without damping.
///
/// Same stopping rules as [`lsqr_solve`], using LSMR's running estimate of
/// `‖r‖`.
pub fn lsmr_solve(a: &DenseMatrix, b: &RealVector, cfg: &IterativeConfig) -> Result<Solution> {
    cfg.validate()?;
    check_len(a.rows(), b.len())?;
    let n = a.cols();
    let tol = cfg.tolerance;
    let mut counter = OpCounter::new();
    let mut x = vec![0.0; n];

    let mut u = b.as_slice().to_vec();
    let mut beta = normalize(&mut u, &mut counter);
    let b_norm = beta;
    if beta == 0.0 {
        return Ok(Solution::new(a, b, x, counter));
    }
    let mut v = rmatvec(a, &u, &mut counter);
    let mut alpha = normalize(&mut v, &mut counter);
    if alpha == 0.0 {
        return Ok(Solution::new(a, b, x, counter));
    }

    let mut zetabar = alpha * beta;
    let mut alphabar = alpha;
    let mut rho = 1.0;
    let mut rhobar = 1.0;
    let mut cbar = 1.0;
    let mut sbar = 0.0;
    let mut h = v.clone();
    let mut hbar = vec![0.0; n];

    // Running estimate of ‖r‖.
    let mut betadd = beta;
    let mut betad = 0.0;
    let mut rhodold = 1.0;
    let mut tautildeold = 0.0;
    let mut thetatilde = 0.0;
    let mut zeta = 0.0;
    let mut a_norm_sq = alpha * alpha;

    for _ in 0..cfg.iteration_cap(n) {
        let av = matvec(a, &v, &mut counter);
        axpy_into(&av, alpha, &mut u, &mut counter);
        beta = normalize(&mut u, &mut counter);
        if beta > 0.0 {
            let atu = rmatvec(a, &u, &mut counter);
            axpy_into(&atu, beta, &mut v, &mut counter);
            alpha = normalize(&mut v, &mut counter);
        }

        // Undamped, so the first rotation is the identity.
        let alphahat = alphabar;

        let rhoold = rho;
        let (c, s, r) = sym_ortho(alphahat, beta);
        rho = r;
        let thetanew = s * alpha;
        alphabar = c * alpha;

        let rhobarold = rhobar;
        let zetaold = zeta;
        let thetabar = sbar * rho;
        let (cb, sb, rb) = sym_ortho(cbar * rho, thetanew);
        cbar = cb;
        sbar = sb;
        rhobar = rb;
        zeta = cbar * zetabar;
        zetabar *= -sbar;

        let hbar_scale = thetabar * rho / (rhoold * rhobarold);
        axpy_into(&h, hbar_scale, &mut hbar, &mut counter);
        axpy(zeta / (rho * rhobar), &hbar, &mut x, &mut counter);
        axpy_into(&v, thetanew / rho, &mut h, &mut counter);

        let betaacute = betadd;
        let betahat = c * betaacute;
        betadd = -s * betaacute;
        let thetatildeold = thetatilde;
        let (ctildeold, stildeold, rhotildeold) = sym_ortho(rhodold, thetabar);
        thetatilde = stildeold * rhobar;
        rhodold = ctildeold * rhobar;
        betad = -stildeold * betad + ctildeold * betahat;
        tautildeold = (zetaold - thetatildeold * tautildeold) / rhotildeold;
        let taud = (zeta - thetatilde * tautildeold) / rhodold;
        // Undamped, so the accumulated damping term of the estimate stays zero.
        let r_norm = ((betad - taud).powi(2) + betadd * betadd).sqrt();
        counter.record(OpCategory::Normalization, 30);

        a_norm_sq += beta * beta;
        let a_norm = a_norm_sq.sqrt();
        a_norm_sq += alpha * alpha;
        let ar_norm = zetabar.abs();
        let x_norm = vector_norm(&x, &mut counter);

        if !x.iter().all(|v| v.is_finite()) {
            break;
        }
        let converged = r_norm <= tol * b_norm + tol * a_norm * x_norm
            || ar_norm <= tol * a_norm * r_norm
            || beta == 0.0
            || alpha == 0.0;
        if converged {
            break;
        }
    }
    Ok(Solution::new(a, b, x, counter))
}

/// Brute-force least squares: Gaussian elimination with partial pivoting
/// on `AᵀA x = Aᵀb`. Test oracle for `n ≤ 64`.
pub fn normal_equations_oracle(a: &DenseMatrix, b: &RealVector) -> Result<RealVector> {
    check_len(a.rows(), b.len())?;
    let n = a.cols();
    if n > ORACLE_MAX_DIM {
        return Err(Error::SizeGuard {
            size: n,
            limit: ORACLE_MAX_DIM,
        });
    }
    let gram = a.tr_matmul(a)?;
    let rhs = a.tr_mul_vec(b)?;
    // Row-major augmented system [G | c].
    let w = n + 1;
    let mut g = vec![0.0; n * w];
    for i in 0..n {
        for j in 0..n {
            g[i * w + j] = gram.get(i, j);
        }
        g[i * w + n] = rhs[i];
    }
    let scale = (0..n).map(|i| g[i * w + i].abs()).fold(0.0, f64::max);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| g[i * w + k].abs().total_cmp(&g[j * w + k].abs()))
            .expect("non-empty range");
        if g[p * w + k].abs() <= GRAM_PIVOT_FLOOR * scale || scale == 0.0 {
            return Err(Error::SingularGram);
        }
        if p != k {
            for j in 0..w {
                g.swap(k * w + j, p * w + j);
            }
        }
        for i in k + 1..n {
            let f = g[i * w + k] / g[k * w + k];
            for j in k..w {
                g[i * w + j] -= f * g[k * w + j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| g[i * w + j] * x[j]).sum();
        x[i] = (g[i * w + n] - s) / g[i * w + i];
    }
    RealVector::new(x).map_err(|_| Error::SingularGram)
}
