//! Seeded massive-MIMO uplink instances and zero-forcing estimation.
//!
//! # Generator
//!
//! All randomness comes from `Xoshiro256++` (the `rand_xoshiro` crate),
//! seeded with `seed_from_u64(seed)`, which expands the 64-bit seed through
//! SplitMix64. Standard normal draws use `rand_distr::StandardNormal`
//! (a ziggurat sampler). Three independent streams are taken from one seed:
//!
//! | stream   | state                          | contents                          |
//! |----------|--------------------------------|-----------------------------------|
//! | channel  | `seed_from_u64(seed)`          | `A`, column-major, `m·n` draws    |
//! | input    | channel state after `jump()`   | `x_true`, `n` draws               |
//! | noise    | channel state after 2×`jump()` | `w`, `m` draws                    |
//!
//! Each `jump()` advances 2¹²⁸ steps, so the streams never overlap.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::baselines::{
    householder_qr_solve, lsmr_solve, lsqr_solve, normal_equations_oracle, randomized_kaczmarz,
    IterativeConfig,
};
use crate::error::{Error, Result};
use crate::linalg::{norm2, DenseMatrix, OpCounter, RealVector};
use crate::solver::{solve_all, RatioMode, Solution};

/// A solver selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Proposed,
    HouseholderQr,
    Kaczmarz,
    Lsqr,
    Lsmr,
    NormalOracle,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Proposed,
        Method::HouseholderQr,
        Method::Kaczmarz,
        Method::Lsqr,
        Method::Lsmr,
        Method::NormalOracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::HouseholderQr => "householder_qr",
            Method::Kaczmarz => "kaczmarz",
            Method::Lsqr => "lsqr",
            Method::Lsmr => "lsmr",
            Method::NormalOracle => "normal_oracle",
        }
    }

    /// Direct methods that should recover a consistent system exactly.
    pub fn is_exact(self) -> bool {
        matches!(
            self,
            Method::Proposed | Method::HouseholderQr | Method::NormalOracle
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

/// Per-solve knobs passed through to whichever method runs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveOptions {
    pub ratio_mode: RatioMode,
    pub iterative: IterativeConfig,
}

/// One seeded problem `b = A x_true + σ w`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelInstance {
    seed: u64,
    a: DenseMatrix,
    x_true: RealVector,
    b: RealVector,
    noise_sigma: f64,
}

impl ChannelInstance {
    /// Noiseless instance from explicit parts; `b` is computed as `A x_true`.
    pub fn from_parts(seed: u64, a: DenseMatrix, x_true: RealVector) -> Result<Self> {
        let b = a.mul_vec(&x_true)?;
        Ok(ChannelInstance {
            seed,
            a,
            x_true,
            b,
            noise_sigma: 0.0,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    pub fn channel(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn x_true(&self) -> &RealVector {
        &self.x_true
    }

    pub fn observation(&self) -> &RealVector {
        &self.b
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    /// `‖x - x_true‖`.
    pub fn error_norm(&self, x: &[f64]) -> f64 {
        let e: Vec<f64> = x
            .iter()
            .zip(self.x_true.iter())
            .map(|(p, q)| p - q)
            .collect();
        norm2(&e)
    }
}

fn channel_stream(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

fn input_stream(seed: u64) -> Xoshiro256PlusPlus {
    let mut rng = channel_stream(seed);
    rng.jump();
    rng
}

fn noise_stream(seed: u64) -> Xoshiro256PlusPlus {
    let mut rng = input_stream(seed);
    rng.jump();
    rng
}

fn normals(rng: &mut Xoshiro256PlusPlus, count: usize) -> Vec<f64> {
    (0..count).map(|_| rng.sample(StandardNormal)).collect()
}

/// `m × n` IID standard normal channel matrix.
pub fn gen_channel(m: usize, n: usize, seed: u64) -> Result<DenseMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::Empty);
    }
    DenseMatrix::from_col_major(m, n, normals(&mut channel_stream(seed), m * n))
}

/// IID standard normal input vector, independent of the channel stream.
pub fn gen_input(n: usize, seed: u64) -> Result<RealVector> {
    if n == 0 {
        return Err(Error::Empty);
    }
    RealVector::new(normals(&mut input_stream(seed), n))
}

/// Assemble `A`, `x_true` and `b = A x_true + σ w`.
pub fn build_problem(m: usize, n: usize, seed: u64, noise_sigma: f64) -> Result<ChannelInstance> {
    if m < n {
        return Err(Error::Underdetermined { rows: m, cols: n });
    }
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "noise sigma must be finite and non-negative, got {noise_sigma}"
        )));
    }
    let a = gen_channel(m, n, seed)?;
    let x_true = gen_input(n, seed)?;
    let mut instance = ChannelInstance::from_parts(seed, a, x_true)?;
    if noise_sigma > 0.0 {
        let w = normals(&mut noise_stream(seed), m);
        let noisy = instance
            .b
            .iter()
            .zip(&w)
            .map(|(b, w)| b + noise_sigma * w)
            .collect();
        instance.b = RealVector::new(noisy)?;
        instance.noise_sigma = noise_sigma;
    }
    Ok(instance)
}

/// Run `method` on `A x ≈ b`.
pub fn solve_with(
    method: Method,
    a: &DenseMatrix,
    b: &RealVector,
    options: &SolveOptions,
) -> Result<Solution> {
    match method {
        Method::Proposed => solve_all(a, b, options.ratio_mode),
        Method::HouseholderQr => householder_qr_solve(a, b, &mut OpCounter::new()),
        Method::Kaczmarz => randomized_kaczmarz(a, b, &options.iterative),
        Method::Lsqr => lsqr_solve(a, b, &options.iterative),
        Method::Lsmr => lsmr_solve(a, b, &options.iterative),
        Method::NormalOracle => {
            let x = normal_equations_oracle(a, b)?;
            Ok(Solution::new(a, b, x.into_vec(), OpCounter::new()))
        }
    }
}

/// A zero-forcing estimate with its residual and error norms.
#[derive(Debug, Clone, PartialEq)]
pub struct ZfEstimate {
    pub method: Method,
    pub solution: Solution,
    /// `‖A x̂ - b‖`.
    pub residual_norm: f64,
    /// `‖x̂ - x_true‖`.
    pub error_norm: f64,
}

/// Zero-forcing estimate `x̂ = argmin ‖A x - b‖` by the named method.
///
/// Solver failures come back wrapped in [`Error::Instance`] with the seed.
pub fn zf_estimate(
    instance: &ChannelInstance,
    method: Method,
    options: &SolveOptions,
) -> Result<ZfEstimate> {
    let solution =
        solve_with(method, &instance.a, &instance.b, options).map_err(|e| Error::Instance {
            seed: instance.seed,
            source: Box::new(e),
        })?;
    Ok(ZfEstimate {
        method,
        residual_norm: solution.residual_norm,
        error_norm: instance.error_norm(&solution.x),
        solution,
    })
}
