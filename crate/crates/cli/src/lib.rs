//! Command-line front end: synthetic data generators, the t-SVD, the
//! compression sweeps, both completion solvers, tensor and matrix RPCA, and
//! the RSE metric, all reading and writing `TEN1` files and CSV traces.
//!
//! Exit codes: 0 on success, 1 for invalid input or arguments, 2 when the
//! numerics fail.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use tubal::completion::{complete_tnn, sample_mask, synth_low_tubal_rank, SolverConfig};
use tubal::compression::{rse_db, sweep_against, CompressionMethod, Compressor};
use tubal::io;
use tubal::rpca::{
    complete_matrix_baseline, default_lambda_tensor, rpca_matrix_baseline, rpca_tensor, synth_tube_sparse,
};
use tubal::tsvd::DEFAULT_RANK_TOL;
use tubal::{multi_rank, shifted_frames, tnn, tsvd, tubal_rank, Error};

#[derive(Debug, Parser)]
#[command(name = "tubal", version, about = "t-SVD tensor toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate synthetic inputs.
    #[command(subcommand)]
    Synth(Synth),
    /// Write the t-SVD factors and the rank measures.
    Tsvd {
        #[arg(long = "in")]
        input: PathBuf,
        /// Writes `<P>_u.ten`, `<P>_s.ten`, `<P>_v.ten` and `<P>_ranks.csv`.
        #[arg(long)]
        out_prefix: String,
    },
    /// Truncation-based compression report.
    Compress(CompressArgs),
    /// Recover a tensor from sampled entries.
    Complete(CompleteArgs),
    /// Split a tensor into low-rank and sparse parts.
    Rpca(RpcaArgs),
    #[command(subcommand)]
    Metrics(Metrics),
}

#[derive(Debug, Subcommand)]
enum Synth {
    /// `X * Y` with standard normal factors of inner extent `r`.
    Lowrank {
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long)]
        tubal_rank: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Circularly panning frames of a random image.
    Shiftvideo {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        frames: usize,
        /// Image width; defaults to `n`.
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bernoulli sampling mask.
    Mask {
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Gaussian noise on a random subset of tubes.
    Tubenoise {
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long)]
        fraction: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        block_len: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CompressKind {
    Svd,
    Tsvd,
    Tubal,
}

impl From<CompressKind> for CompressionMethod {
    fn from(k: CompressKind) -> Self {
        match k {
            CompressKind::Svd => CompressionMethod::Svd,
            CompressKind::Tsvd => CompressionMethod::Tsvd,
            CompressKind::Tubal => CompressionMethod::TsvdTubal,
        }
    }
}

#[derive(Debug, Args)]
struct CompressArgs {
    #[arg(long, value_enum)]
    method: CompressKind,
    /// Truncation level; required unless `--sweep` is given.
    #[arg(long, required_unless_present = "sweep")]
    k: Option<usize>,
    /// Additional truncation levels for the report.
    #[arg(long, value_delimiter = ',')]
    sweep: Vec<usize>,
    #[arg(long = "in")]
    input: PathBuf,
    /// Reference for the RSE column; defaults to the input.
    #[arg(long = "ref")]
    reference: Option<PathBuf>,
    #[arg(long)]
    report: PathBuf,
    /// Writes the approximation at `--k`.
    #[arg(long, requires = "k")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CompleteKind {
    Tnn,
    Matrix,
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig { penalty: self.rho, tol: self.tol, max_iters: self.max_iters, seed: None }
    }
}

#[derive(Debug, Args)]
struct CompleteArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    #[arg(long, value_enum, default_value = "tnn")]
    method: CompleteKind,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RpcaKind {
    Tensor,
    Matrix,
}

#[derive(Debug, Args)]
struct RpcaArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "tensor")]
    method: RpcaKind,
    /// `auto` or a positive number.
    #[arg(long, default_value = "auto")]
    lambda: String,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out_l: PathBuf,
    #[arg(long)]
    out_s: PathBuf,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Metrics {
    /// Relative squared error in dB.
    Rse {
        #[arg(long)]
        rec: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
    },
}

fn parse_lambda(s: &str) -> tubal::Result<Option<f64>> {
    if s == "auto" {
        return Ok(None);
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(Some(v)),
        _ => Err(Error::Argument(format!("lambda must be \"auto\" or a positive number, got {s:?}"))),
    }
}

fn synth(cmd: Synth) -> tubal::Result<()> {
    match cmd {
        Synth::Lowrank { dims, tubal_rank, seed, out } => {
            io::write_tensor(&synth_low_tubal_rank(&dims, tubal_rank, seed)?, &out)
        }
        Synth::Shiftvideo { n, frames, width, seed, out } => {
            io::write_tensor(&shifted_frames(n, width.unwrap_or(n), frames, seed)?, &out)
        }
        Synth::Mask { dims, rate, seed, out } => io::write_mask(&sample_mask(&dims, rate, seed)?, &out),
        Synth::Tubenoise { dims, fraction, sigma, block_len, seed, out } => {
            io::write_tensor(&synth_tube_sparse(&dims, fraction, sigma, block_len, seed)?, &out)
        }
    }
}

fn run_tsvd(input: &Path, prefix: &str) -> tubal::Result<()> {
    let m = io::read_real(input)?;
    let f = tsvd(&m)?;
    io::write_tensor(&f.u, Path::new(&format!("{prefix}_u.ten")))?;
    io::write_tensor(&f.s, Path::new(&format!("{prefix}_s.ten")))?;
    io::write_tensor(&f.v, Path::new(&format!("{prefix}_v.ten")))?;
    let ranks = io::ranks_csv(&multi_rank(&m, DEFAULT_RANK_TOL)?, tubal_rank(&m, DEFAULT_RANK_TOL)?, tnn(&m)?);
    io::write_text(Path::new(&format!("{prefix}_ranks.csv")), &ranks)
}

fn run_compress(a: CompressArgs) -> tubal::Result<()> {
    let m = io::read_real(&a.input)?;
    let reference = match &a.reference {
        Some(p) => io::read_real(p)?,
        None => m.clone(),
    };
    let method = CompressionMethod::from(a.method);
    let mut ks = a.sweep.clone();
    ks.extend(a.k);
    ks.sort_unstable();
    ks.dedup();
    let reports = sweep_against(&m, &reference, method, &ks)?;
    if let (Some(out), Some(k)) = (&a.out, a.k) {
        io::write_tensor(&Compressor::new(&m, method)?.approximate(k)?, out)?;
    }
    io::write_text(&a.report, &io::compression_report_csv(&reports))
}

fn run_complete(a: CompleteArgs) -> tubal::Result<()> {
    let observed = io::read_real(&a.input)?;
    let mask = io::read_mask(&a.mask)?;
    let cfg = a.solver.config();
    cfg.validate()?;
    let (z, trace) = match a.method {
        CompleteKind::Tnn => complete_tnn(&observed, &mask, &cfg)?,
        CompleteKind::Matrix => complete_matrix_baseline(&observed, &mask, &cfg)?,
    };
    io::write_tensor(&z, &a.out)?;
    if let Some(p) = &a.trace {
        io::write_text(p, &io::completion_trace_csv(&trace))?;
    }
    Ok(())
}

fn run_rpca(a: RpcaArgs) -> tubal::Result<()> {
    let lambda = parse_lambda(&a.lambda)?;
    let cfg = a.solver.config();
    cfg.validate()?;
    let m = io::read_real(&a.input)?;
    let res = match a.method {
        RpcaKind::Tensor => {
            rpca_tensor(&m, lambda.unwrap_or_else(|| default_lambda_tensor(m.rows(), m.cols())), &cfg)?
        }
        RpcaKind::Matrix => rpca_matrix_baseline(&m, lambda, &cfg)?,
    };
    io::write_tensor(&res.low_rank, &a.out_l)?;
    io::write_tensor(&res.sparse, &a.out_s)?;
    if let Some(p) = &a.trace {
        io::write_text(p, &io::rpca_trace_csv(&res.trace))?;
    }
    Ok(())
}

fn run_metrics(cmd: Metrics, stdout: &mut dyn Write) -> tubal::Result<()> {
    match cmd {
        Metrics::Rse { rec, reference } => {
            let rec = io::read_real(&rec)?;
            let reference = io::read_real(&reference)?;
            let db = rse_db(&rec, &reference)?;
            writeln!(stdout, "{db}").map_err(|e| Error::Io { path: PathBuf::from("<stdout>"), source: e })
        }
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> tubal::Result<()> {
    match cli.command {
        Command::Synth(s) => synth(s),
        Command::Tsvd { input, out_prefix } => run_tsvd(&input, &out_prefix),
        Command::Compress(a) => run_compress(a),
        Command::Complete(a) => run_complete(a),
        Command::Rpca(a) => run_rpca(a),
        Command::Metrics(m) => run_metrics(m, stdout),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to standard error as a single line.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(stdout, "{e}");
            return 0;
        }
        Err(e) => {
            let msg = e.to_string();
            eprintln!("{}", msg.lines().next().unwrap_or("invalid arguments"));
            return 1;
        }
    };
    match dispatch(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}
