use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use projls::baselines::IterativeConfig;
use projls::bench::{
    complexity_audit, render_table, run_sweep, write_csv, BenchConfig, DEFAULT_SEED,
};
use projls::io::{
    format_vector, parse_matrix_file, parse_vector_file, write_matrix_file, write_vector_file,
};
use projls::sim::solve_with;
use projls::{extract_qr, solve_single, Method, QrDirection, RatioMode, SolveOptions};

#[derive(Parser)]
#[command(
    name = "projls",
    version,
    about = "Least squares by sequential rank-one projections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve min ‖Ax - b‖ and print x (or one entry of it).
    Solve {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        rhs: PathBuf,
        /// 1-based index of a single unknown to compute.
        #[arg(long)]
        unknown: Option<usize>,
        #[arg(long, default_value = "proposed")]
        method: Method,
        #[arg(long, default_value = "dot")]
        ratio: RatioMode,
        /// Write the solution vector here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded sweep over sizes and methods.
    Bench {
        /// `start:stop:step` (inclusive) or a comma-separated list.
        #[arg(long, default_value = "20:200:20")]
        sizes: SizeList,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, env = "PROJLS_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "proposed,householder_qr,kaczmarz,lsqr,lsmr"
        )]
        methods: Vec<Method>,
        #[arg(long, default_value = "dot")]
        ratio: RatioMode,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 100)]
        kaczmarz_sweeps: usize,
    },
    /// Write Q, QᵀA and the diagonal qᵀq from column elimination.
    Qr {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value = "last")]
        direction: QrDirection,
        /// Files are written as `<P>_q.txt`, `<P>_t.txt`, `<P>_d.txt`.
        #[arg(long)]
        out_prefix: String,
    },
    /// Check the pivot multiplication count for an m × n reduction.
    Audit {
        #[arg(long)]
        size: usize,
        /// Defaults to `size`.
        #[arg(long)]
        rows: Option<usize>,
    },
}

#[derive(Debug, Clone)]
struct SizeList(Vec<usize>);

impl FromStr for SizeList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_sizes(s).map(SizeList)
    }
}

fn parse_sizes(s: &str) -> Result<Vec<usize>, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step == 0 || start > stop {
                return Err("expected start ≤ stop and step > 0".into());
            }
            Ok((start..=stop).step_by(step).collect())
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err("expected start:stop:step or a comma list".into()),
    }
}

/// Exit status for failures: 1 for solver errors, 2 for bad input.
struct Failure {
    code: u8,
    message: String,
}

fn usage(e: impl Display) -> Failure {
    Failure {
        code: 2,
        message: e.to_string(),
    }
}

fn solver(e: impl Display) -> Failure {
    Failure {
        code: 1,
        message: e.to_string(),
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Solve {
            matrix,
            rhs,
            unknown,
            method,
            ratio,
            out,
        } => {
            let a = parse_matrix_file(&matrix).map_err(usage)?;
            let b = parse_vector_file(&rhs).map_err(usage)?;
            if b.len() != a.rows() {
                return Err(usage(format!(
                    "rhs has {} entries but the matrix has {} rows",
                    b.len(),
                    a.rows()
                )));
            }
            let opts = SolveOptions {
                ratio_mode: ratio,
                iterative: IterativeConfig::default(),
            };
            let x: Vec<f64> = match unknown {
                Some(0) => return Err(usage("--unknown is 1-based")),
                Some(k) if k > a.cols() => {
                    return Err(usage(format!(
                        "--unknown {k} exceeds column count {}",
                        a.cols()
                    )))
                }
                Some(k) if method == Method::Proposed => {
                    vec![solve_single(&a, &b, k - 1, ratio).map_err(solver)?.0]
                }
                Some(k) => vec![solve_with(method, &a, &b, &opts).map_err(solver)?.x[k - 1]],
                None => {
                    let sol = solve_with(method, &a, &b, &opts).map_err(solver)?;
                    eprintln!("residual_norm {:e}", sol.residual_norm);
                    sol.x.into_vec()
                }
            };
            match out {
                Some(path) => write_vector_file(&x, &path)
                    .map_err(|e| solver(format!("{}: {e}", path.display())))?,
                None => print!("{}", format_vector(&x)),
            }
        }
        Command::Bench {
            sizes,
            trials,
            seed,
            methods,
            ratio,
            csv,
            sigma,
            kaczmarz_sweeps,
        } => {
            let config = BenchConfig {
                sizes: sizes.0,
                trials_per_size: trials,
                base_seed: seed,
                methods,
                ratio_mode: ratio,
                noise_sigma: sigma,
                kaczmarz_sweeps,
            };
            config.validate().map_err(usage)?;
            let report = run_sweep(&config).map_err(solver)?;
            if let Some(path) = csv {
                write_csv(&report, &path).map_err(solver)?;
            }
            print!("{}", render_table(&report));
        }
        Command::Qr {
            matrix,
            direction,
            out_prefix,
        } => {
            let a = parse_matrix_file(&matrix).map_err(usage)?;
            let f = extract_qr(&a, direction).map_err(solver)?;
            let write = |suffix: &str, res: &dyn Fn(&PathBuf) -> std::io::Result<()>| {
                let path = PathBuf::from(format!("{out_prefix}_{suffix}.txt"));
                res(&path).map_err(|e| solver(format!("{}: {e}", path.display())))
            };
            write("q", &|p| write_matrix_file(&f.q, p))?;
            write("t", &|p| write_matrix_file(&f.t, p))?;
            write("d", &|p| write_vector_file(&f.d, p))?;
        }
        Command::Audit { size, rows } => {
            let record = complexity_audit(size, rows.unwrap_or(size)).map_err(|e| match e {
                projls::Error::AuditFailure { .. } => solver(e),
                other => usage(other),
            })?;
            println!("{record}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
