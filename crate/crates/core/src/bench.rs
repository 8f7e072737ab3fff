//! Seeded benchmark sweeps, multiplication-count audits, and report output.
//!
//! A sweep visits every `(size, trial)` cell, builds one square noiseless
//! instance per cell from `cell_seed(base_seed, size, trial)`, and runs every
//! configured method on that same instance. Only the solve call is timed.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error as ThisError;

use crate::baselines::{householder_qr_solve, IterativeConfig};
use crate::error::{Error, Result};
use crate::linalg::OpCounter;
use crate::sim::{build_problem, solve_with, ChannelInstance, Method, SolveOptions};
use crate::solver::{reduce, solve_all, RatioMode};

/// Base seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_150_601;

/// Seed for the instance a complexity audit runs on; counts do not depend on it.
pub const AUDIT_SEED: u64 = 9;

/// SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-cell instance seed: `splitmix64(splitmix64(splitmix64(base) ^ size) ^ trial)`.
pub fn cell_seed(base_seed: u64, size: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(base_seed) ^ size as u64) ^ trial as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    /// Values of `n` (with `m = n`), strictly increasing.
    pub sizes: Vec<usize>,
    pub trials_per_size: usize,
    pub base_seed: u64,
    pub methods: Vec<Method>,
    pub ratio_mode: RatioMode,
    pub noise_sigma: f64,
    pub kaczmarz_sweeps: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: (1..=10).map(|i| 20 * i).collect(),
            trials_per_size: 1,
            base_seed: DEFAULT_SEED,
            methods: vec![
                Method::Proposed,
                Method::HouseholderQr,
                Method::Kaczmarz,
                Method::Lsqr,
                Method::Lsmr,
            ],
            ratio_mode: RatioMode::Dot,
            noise_sigma: 0.0,
            kaczmarz_sweeps: 100,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.sizes.is_empty() || self.sizes[0] == 0 {
            return invalid("sizes must be non-empty and positive");
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("sizes must be strictly increasing");
        }
        if self.trials_per_size == 0 {
            return invalid("trials_per_size must be at least 1");
        }
        if self.methods.is_empty() {
            return invalid("at least one method is required");
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            return invalid("methods must not repeat");
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return invalid("noise sigma must be finite and non-negative");
        }
        if self.kaczmarz_sweeps == 0 {
            return invalid("kaczmarz_sweeps must be at least 1");
        }
        Ok(())
    }

    fn solve_options(&self, seed: u64) -> SolveOptions {
        SolveOptions {
            ratio_mode: self.ratio_mode,
            iterative: IterativeConfig {
                max_sweeps: self.kaczmarz_sweeps,
                seed: splitmix64(seed),
                ..IterativeConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrialStatus {
    Ok,
    /// Carries [`Error::code`].
    Failed(String),
}

impl TrialStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, TrialStatus::Ok)
    }
}

impl fmt::Display for TrialStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrialStatus::Ok => f.write_str("ok"),
            TrialStatus::Failed(code) => f.write_str(code),
        }
    }
}

/// One method on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub n: usize,
    pub m: usize,
    pub method: Method,
    pub trial: usize,
    pub seed: u64,
    pub wall_time_seconds: f64,
    /// `‖A x̂ - b‖`; NaN on failure.
    pub residual_norm: f64,
    /// `‖x̂ - x_true‖`; NaN on failure.
    pub error_norm: f64,
    pub pivot_dot_mults: u64,
    pub update_mults: u64,
    pub backsub_mults: u64,
    pub total_mults: u64,
    pub status: TrialStatus,
}

impl TrialResult {
    /// Equality on everything except the timing.
    pub fn same_outcome(&self, other: &TrialResult) -> bool {
        let bits = |x: f64| x.to_bits();
        self.n == other.n
            && self.m == other.m
            && self.method == other.method
            && self.trial == other.trial
            && self.seed == other.seed
            && bits(self.residual_norm) == bits(other.residual_norm)
            && bits(self.error_norm) == bits(other.error_norm)
            && self.pivot_dot_mults == other.pivot_dot_mults
            && self.update_mults == other.update_mults
            && self.backsub_mults == other.backsub_mults
            && self.total_mults == other.total_mults
            && self.status == other.status
    }
}

/// Run `method` on an existing instance, timing only the solve.
pub fn run_on_instance(
    instance: &ChannelInstance,
    method: Method,
    trial: usize,
    config: &BenchConfig,
) -> TrialResult {
    let options = config.solve_options(instance.seed());
    let start = Instant::now();
    let outcome = solve_with(method, instance.channel(), instance.observation(), &options);
    let elapsed = start.elapsed().as_secs_f64();
    let mut result = TrialResult {
        n: instance.cols(),
        m: instance.rows(),
        method,
        trial,
        seed: instance.seed(),
        wall_time_seconds: elapsed,
        residual_norm: f64::NAN,
        error_norm: f64::NAN,
        pivot_dot_mults: 0,
        update_mults: 0,
        backsub_mults: 0,
        total_mults: 0,
        status: TrialStatus::Ok,
    };
    match outcome {
        Ok(sol) => {
            result.residual_norm = sol.residual_norm;
            result.error_norm = instance.error_norm(&sol.x);
            result.pivot_dot_mults = sol.counter.pivot_dot_mults();
            result.update_mults = sol.counter.update_mults();
            result.backsub_mults = sol.counter.backsub_mults();
            result.total_mults = sol.counter.total();
        }
        Err(e) => result.status = TrialStatus::Failed(e.code().to_string()),
    }
    result
}

/// Build the `n × n` instance for `seed` and run `method` on it.
pub fn run_trial(n: usize, method: Method, seed: u64, config: &BenchConfig) -> TrialResult {
    match build_problem(n, n, seed, config.noise_sigma) {
        Ok(instance) => run_on_instance(&instance, method, 0, config),
        Err(e) => TrialResult {
            n,
            m: n,
            method,
            trial: 0,
            seed,
            wall_time_seconds: 0.0,
            residual_norm: f64::NAN,
            error_norm: f64::NAN,
            pivot_dot_mults: 0,
            update_mults: 0,
            backsub_mults: 0,
            total_mults: 0,
            status: TrialStatus::Failed(e.code().to_string()),
        },
    }
}

/// Medians over the successful trials of one `(size, method)` group.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub n: usize,
    pub method: Method,
    pub trials: usize,
    pub ok: usize,
    pub median_time: f64,
    pub median_residual: f64,
    pub median_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub trials: Vec<TrialResult>,
    pub aggregates: Vec<Aggregate>,
}

/// Median of the values, NaN when empty.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

impl BenchReport {
    pub fn from_trials(config: BenchConfig, trials: Vec<TrialResult>) -> Self {
        let mut aggregates = Vec::new();
        for &n in &config.sizes {
            for &method in &config.methods {
                let group: Vec<&TrialResult> = trials
                    .iter()
                    .filter(|t| t.n == n && t.method == method)
                    .collect();
                let ok: Vec<&&TrialResult> = group.iter().filter(|t| t.status.is_ok()).collect();
                let pick = |f: fn(&TrialResult) -> f64| {
                    median(&ok.iter().map(|t| f(t)).collect::<Vec<_>>())
                };
                aggregates.push(Aggregate {
                    n,
                    method,
                    trials: group.len(),
                    ok: ok.len(),
                    median_time: pick(|t| t.wall_time_seconds),
                    median_residual: pick(|t| t.residual_norm),
                    median_error: pick(|t| t.error_norm),
                });
            }
        }
        BenchReport {
            config,
            trials,
            aggregates,
        }
    }

    pub fn aggregate(&self, n: usize, method: Method) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.n == n && a.method == method)
    }
}

/// Run every `(size, trial, method)` cell. Solver failures become rows.
pub fn run_sweep(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let mut trials =
        Vec::with_capacity(config.sizes.len() * config.trials_per_size * config.methods.len());
    for &n in &config.sizes {
        for trial in 0..config.trials_per_size {
            let seed = cell_seed(config.base_seed, n, trial);
            let instance = build_problem(n, n, seed, config.noise_sigma)?;
            for &method in &config.methods {
                trials.push(run_on_instance(&instance, method, trial, config));
            }
        }
    }
    Ok(BenchReport::from_trials(config.clone(), trials))
}

/// Operation counts for one shape, with the pivot-count identity checked.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditRecord {
    pub n: usize,
    pub m: usize,
    /// `m n (n - 1) / 2`.
    pub expected_pivot_mults: u64,
    pub observed_pivot_mults: u64,
    /// Counts from a full solve with the projection method.
    pub proposed: OpCounter,
    /// Counts from a Householder QR solve of the same system.
    pub householder: OpCounter,
    /// `proposed.total() / householder.total()`.
    pub total_ratio: f64,
    /// `m n² - n³ / 3`, the leading Householder multiplication count
    /// (`2n³/3` when square).
    pub householder_model: f64,
    /// `observed_pivot_mults / householder_model`.
    pub pivot_model_ratio: f64,
}

impl fmt::Display for AuditRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "shape                  m={} n={}", self.m, self.n)?;
        writeln!(
            f,
            "pivot inner products   expected={} observed={}",
            self.expected_pivot_mults, self.observed_pivot_mults
        )?;
        writeln!(
            f,
            "proposed               pivot_dot={} update={} normalization={} backsub={} total={}",
            self.proposed.pivot_dot_mults(),
            self.proposed.update_mults(),
            self.proposed.normalization_ops(),
            self.proposed.backsub_mults(),
            self.proposed.total()
        )?;
        writeln!(
            f,
            "householder            pivot_dot={} update={} normalization={} backsub={} total={}",
            self.householder.pivot_dot_mults(),
            self.householder.update_mults(),
            self.householder.normalization_ops(),
            self.householder.backsub_mults(),
            self.householder.total()
        )?;
        writeln!(f, "total ratio            {:.6}", self.total_ratio)?;
        write!(
            f,
            "pivot / model ratio    {:.6} (model {:.1})",
            self.pivot_model_ratio, self.householder_model
        )
    }
}

/// Check `pivot_dot_mults == m n (n-1) / 2` for one reduction and report
/// the full-solve and Householder totals alongside.
pub fn complexity_audit(n: usize, m: usize) -> Result<AuditRecord> {
    if n == 0 {
        return Err(Error::Empty);
    }
    let instance = build_problem(m, n, AUDIT_SEED, 0.0)?;
    let (a, b) = (instance.channel(), instance.observation());

    let mut reduce_counter = OpCounter::new();
    reduce(a, b, 0, &mut reduce_counter)?;
    let observed = reduce_counter.pivot_dot_mults();
    let expected = (m * n * (n - 1) / 2) as u64;
    if observed != expected {
        return Err(Error::AuditFailure {
            n,
            m,
            expected,
            observed,
        });
    }

    let proposed = solve_all(a, b, RatioMode::Dot)?.counter;
    let mut householder = OpCounter::new();
    householder_qr_solve(a, b, &mut householder)?;
    let (mf, nf) = (m as f64, n as f64);
    let householder_model = mf * nf * nf - nf * nf * nf / 3.0;
    Ok(AuditRecord {
        n,
        m,
        expected_pivot_mults: expected,
        observed_pivot_mults: observed,
        proposed,
        householder,
        total_ratio: proposed.total() as f64 / householder.total() as f64,
        householder_model,
        pivot_model_ratio: observed as f64 / householder_model,
    })
}

/// CSV column names, in order.
pub const CSV_HEADER: [&str; 12] = [
    "size",
    "method",
    "trial",
    "seed",
    "time_s",
    "res_norm",
    "err_norm",
    "pivot_dot_mults",
    "update_mults",
    "backsub_mults",
    "total_mults",
    "status",
];

#[derive(Debug, ThisError)]
pub enum ReportError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("record {record}: bad `{field}` value `{value}`")]
    Field {
        record: usize,
        field: &'static str,
        value: String,
    },
    #[error("unexpected CSV header")]
    Header,
}

/// Norms use 17 significant digits, which round-trips any f64.
pub fn to_csv(trials: &[TrialResult]) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for t in trials {
        w.write_record([
            t.n.to_string(),
            t.method.name().to_string(),
            t.trial.to_string(),
            t.seed.to_string(),
            format!("{:.9e}", t.wall_time_seconds),
            format!("{:.16e}", t.residual_norm),
            format!("{:.16e}", t.error_norm),
            t.pivot_dot_mults.to_string(),
            t.update_mults.to_string(),
            t.backsub_mults.to_string(),
            t.total_mults.to_string(),
            t.status.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
}

pub fn write_csv(
    report: &BenchReport,
    path: impl AsRef<Path>,
) -> std::result::Result<(), ReportError> {
    let path = path.as_ref();
    fs::write(path, to_csv(&report.trials)).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parse CSV text produced by [`to_csv`]. `m` is restored as `n`.
pub fn parse_csv(text: &str) -> std::result::Result<Vec<TrialResult>, ReportError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    if r.headers()?.iter().ne(CSV_HEADER) {
        return Err(ReportError::Header);
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let record = i + 1;
        fn field<T: std::str::FromStr>(
            rec: &csv::StringRecord,
            idx: usize,
            record: usize,
        ) -> std::result::Result<T, ReportError> {
            let raw = rec.get(idx).unwrap_or_default();
            raw.parse().map_err(|_| ReportError::Field {
                record,
                field: CSV_HEADER[idx],
                value: raw.to_string(),
            })
        }
        let n: usize = field(&rec, 0, record)?;
        let status = match rec.get(11).unwrap_or_default() {
            "ok" => TrialStatus::Ok,
            code => TrialStatus::Failed(code.to_string()),
        };
        out.push(TrialResult {
            n,
            m: n,
            method: field(&rec, 1, record)?,
            trial: field(&rec, 2, record)?,
            seed: field(&rec, 3, record)?,
            wall_time_seconds: field(&rec, 4, record)?,
            residual_norm: field(&rec, 5, record)?,
            error_norm: field(&rec, 6, record)?,
            pivot_dot_mults: field(&rec, 7, record)?,
            update_mults: field(&rec, 8, record)?,
            backsub_mults: field(&rec, 9, record)?,
            total_mults: field(&rec, 10, record)?,
            status,
        });
    }
    Ok(out)
}

pub fn read_csv(path: impl AsRef<Path>) -> std::result::Result<Vec<TrialResult>, ReportError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&text)
}

/// One row per size, one column group (time, ‖r‖, ‖e‖) per method, medians.
pub fn render_table(report: &BenchReport) -> String {
    const W: usize = 13;
    let methods = &report.config.methods;
    let mut out = String::new();
    out.push_str(&format!("{:<8}", "N"));
    for m in methods {
        out.push_str(&format!("| {:<width$} ", m.name(), width = 3 * (W + 1) - 1));
    }
    out.push('\n');
    out.push_str(&format!("{:<8}", ""));
    for _ in methods {
        out.push_str(&format!("| {:>W$} {:>W$} {:>W$} ", "time_s", "|r|", "|e|"));
    }
    out.push('\n');
    for &n in &report.config.sizes {
        out.push_str(&format!("{:<8}", format!("N={n}")));
        for &m in methods {
            match report.aggregate(n, m) {
                Some(a) if a.ok > 0 => out.push_str(&format!(
                    "| {:>W$.6e} {:>W$.6e} {:>W$.6e} ",
                    a.median_time, a.median_residual, a.median_error
                )),
                _ => out.push_str(&format!("| {:>width$} ", "failed", width = 3 * W + 2)),
            }
        }
        out.push('\n');
    }
    out
}
