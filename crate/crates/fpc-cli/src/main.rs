//! Command-line front end for the fpc coded-computation library.
//!
//! Every subcommand is deterministic given its flags: all randomness is
//! seeded through --seed (default 0), so repeated runs produce identical
//! files and stdout. Matrices travel in the library's binary format, reports
//! in its fixed-header CSV schema.
//!
//! Usage:
//!   fpc threshold --scheme fpc --m 1 --p 8
//!   fpc gen-matrix --rows 120 --cols 150 --dist gaussian --field real64 --out a.mat
//!   fpc multiply --input a.mat --m 1 --p 2 --workers 4 --stragglers 2 --out c.mat
//!   fpc sweep --input a.mat --schemes fpc,matdot --m 1 --p 8 --workers 18 --s-max 10
//!
//! Exit codes: 0 success, 1 usage or parameter errors, 2 I/O and malformed
//! files, 3 indivisible or mismatched shapes, 4 not enough worker results,
//! 5 singular decode systems. Failures print `error: ...` and a stable
//! `error-class: ...` line on stderr.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fpc::codes::{
    read_manifest, select_points, write_manifest, CodeInstance, CodeParams, Scheme,
};
use fpc::error::{Error, Result};
use fpc::field::FieldSpec;
use fpc::folded::{build_chain_structure, span_dims};
use fpc::linalg::{read_matrix, write_matrix, DenseMatrix};
use fpc::sim::{
    condition_sweep, run_distributed, seeded_straggler_permutation, sweep_stragglers,
    LatencyModel, PointMode, SweepRow, CSV_HEADER,
};

#[derive(Parser)]
#[command(name = "fpc", version, about = "Straggler-tolerant coded computation of A * A^T")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute A * A^T through the full encode/simulate/decode protocol.
    Multiply(MultiplyArgs),
    /// Print a scheme's recovery threshold.
    Threshold(SchemeShape),
    /// Print the two term-family span dimensions for (m, p).
    Dims(DimsArgs),
    /// Print the loop/chain decomposition of the (m, p) index cube.
    Chains(ShapeArgs),
    /// Select and verify evaluation points; emit the instance manifest.
    VerifyPoints(VerifyPointsArgs),
    /// Run one straggler sweep over several schemes and emit CSV rows.
    Sweep(SweepArgs),
    /// Sweep decode-system condition numbers over p on real64.
    Cond(CondArgs),
    /// Write a seeded random matrix file.
    GenMatrix(GenMatrixArgs),
}

fn parse_scheme(s: &str) -> std::result::Result<Scheme, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_field(s: &str) -> std::result::Result<FieldSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Slowdown factor: a positive float, or "inf" for fail-stop stragglers.
fn parse_slowdown(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = if s.eq_ignore_ascii_case("inf") {
        f64::INFINITY
    } else {
        s.parse().map_err(|_| format!("bad slowdown {s:?}"))?
    };
    if v < 1.0 {
        return Err("slowdown must be at least 1 (stragglers are slower)".into());
    }
    Ok(v)
}

#[derive(Args)]
struct SchemeShape {
    /// Code family: fpc, matdot, or ep.
    #[arg(long, value_parser = parse_scheme, default_value = "fpc")]
    scheme: Scheme,
    /// Row-block count m of the partition grid.
    #[arg(long)]
    m: usize,
    /// Column-block count p of the partition grid.
    #[arg(long)]
    p: usize,
}

#[derive(Args)]
struct ShapeArgs {
    /// Row-block count m of the partition grid.
    #[arg(long)]
    m: usize,
    /// Column-block count p of the partition grid.
    #[arg(long)]
    p: usize,
}

#[derive(Args)]
struct DimsArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// Field characteristic: 0 for rationals/reals, 2 for binary fields,
    /// q for prime fields.
    #[arg(long, default_value_t = 0)]
    characteristic: u64,
}

#[derive(Args)]
struct MultiplyArgs {
    /// Input matrix file; its header fixes the field.
    #[arg(long)]
    input: PathBuf,
    /// Code family: fpc, matdot, or ep.
    #[arg(long, value_parser = parse_scheme, default_value = "fpc")]
    scheme: Scheme,
    /// Row-block count m of the partition grid.
    #[arg(long)]
    m: usize,
    /// Column-block count p of the partition grid.
    #[arg(long)]
    p: usize,
    /// Worker count N; must be at least the scheme's threshold.
    #[arg(long)]
    workers: usize,
    /// Straggler count; the ids are the first s entries of the seeded
    /// worker permutation, so sweeps over s grow by inclusion.
    #[arg(long, default_value_t = 0, conflicts_with = "straggler_ids")]
    stragglers: usize,
    /// Explicit comma-separated straggler worker ids (1-based).
    #[arg(long, value_delimiter = ',')]
    straggler_ids: Vec<usize>,
    /// Expected field of the input file; errors on mismatch when given.
    #[arg(long, value_parser = parse_field)]
    field: Option<FieldSpec>,
    /// Seed for point selection, straggler choice, and latency jitter.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Straggler slowdown factor, or "inf" for fail-stop.
    #[arg(long, value_parser = parse_slowdown, default_value = "5")]
    slowdown: f64,
    /// Relative latency jitter amplitude in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
    /// Recovery subsets to check at point-selection time (0 = lazy).
    #[arg(long, default_value_t = 500)]
    verify_budget: usize,
    /// Round the column count up to a multiple of p with zero padding;
    /// A * A^T is unchanged by that.
    #[arg(long)]
    pad_cols: bool,
    /// Reuse the evaluation points of a previously written manifest
    /// instead of selecting fresh ones.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Output matrix file for the decoded product.
    #[arg(long)]
    out: PathBuf,
    /// CSV report file (appended, header written when new); stdout if omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyPointsArgs {
    /// Code family: fpc, matdot, or ep.
    #[arg(long, value_parser = parse_scheme, default_value = "fpc")]
    scheme: Scheme,
    /// Row-block count m of the partition grid.
    #[arg(long)]
    m: usize,
    /// Column-block count p of the partition grid.
    #[arg(long)]
    p: usize,
    /// Worker count N; must be at least the scheme's threshold.
    #[arg(long)]
    workers: usize,
    /// Field of the evaluation points.
    #[arg(long, value_parser = parse_field)]
    field: FieldSpec,
    /// Seed for candidate point sets and sampled subset checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Recovery subsets to check per candidate point set (0 = lazy).
    #[arg(long, default_value_t = 500)]
    verify_budget: usize,
    /// Manifest file to write; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Input matrix file; its header fixes the field.
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated code families to sweep side by side.
    #[arg(long, value_delimiter = ',', value_parser = parse_scheme,
          default_value = "fpc,matdot,ep")]
    schemes: Vec<Scheme>,
    /// Row-block count m shared by all swept schemes.
    #[arg(long)]
    m: usize,
    /// Column-block count p shared by all swept schemes.
    #[arg(long)]
    p: usize,
    /// Worker count N shared by all swept schemes.
    #[arg(long)]
    workers: usize,
    /// Sweep straggler counts 0..=s-max; count s stragglers are the first
    /// s entries of one seeded permutation, shared across schemes.
    #[arg(long)]
    s_max: usize,
    /// Seed for point selection, the straggler permutation, and jitter.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Straggler slowdown factor, or "inf" for fail-stop.
    #[arg(long, value_parser = parse_slowdown, default_value = "5")]
    slowdown: f64,
    /// Relative latency jitter amplitude in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
    /// Recovery subsets to check at point-selection time (0 = lazy).
    #[arg(long, default_value_t = 500)]
    verify_budget: usize,
    /// Round the column count up to a multiple of p with zero padding.
    #[arg(long)]
    pad_cols: bool,
    /// CSV report file (appended, header written when new); stdout if omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CondMode {
    /// Deterministic Chebyshev points on (-1, 1).
    Chebyshev,
    /// Best of `--trials` seeded random point sets.
    Random,
}

#[derive(Args)]
struct CondArgs {
    /// Smallest p in the sweep.
    #[arg(long, default_value_t = 2)]
    p_min: usize,
    /// Largest p in the sweep.
    #[arg(long, default_value_t = 10)]
    p_max: usize,
    /// Spare workers beyond the threshold; the point count is N = p + s.
    #[arg(long, default_value_t = 1)]
    s: usize,
    /// Random point sets drawn per p in random mode.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = CondMode::Random)]
    mode: CondMode,
    /// Seed for random-mode point sets.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV report file (appended, header written when new); stdout if omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Dist {
    /// Standard normal entries; real64 only.
    Gaussian,
    /// Uniform field elements: residues over finite fields, [0, 1) on real64.
    Uniform,
    /// Uniform integers: [0, q) over finite fields, [0, 256) on rationals
    /// and real64.
    Integers,
}

#[derive(Args)]
struct GenMatrixArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    #[arg(long, value_enum)]
    dist: Dist,
    /// Field of the entries: prime:<q>, gf2:<w>, rational, or real64.
    #[arg(long, value_parser = parse_field)]
    field: FieldSpec,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output matrix file.
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are successful outputs, not errors.
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                std::process::exit(0);
            }
            eprint!("{err}");
            std::process::exit(1);
        }
    };
    if let Err(err) = run(cli.command) {
        eprintln!("error: {err}");
        eprintln!("error-class: {}", err.class());
        std::process::exit(exit_code(&err));
    }
}

/// Stable exit-code table; stderr carries the finer error class.
fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::MalformedMatrixFile(_) | Error::MalformedManifest(_) => 2,
        Error::IndivisibleShape { .. } | Error::ShapeMismatch(_) => 3,
        Error::InsufficientResults { .. } | Error::StragglerOverload { .. } => 4,
        Error::SingularMatrix | Error::SingularRecoverySubset => 5,
        _ => 1,
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Multiply(args) => multiply(args),
        Command::Threshold(args) => {
            println!(
                "{}",
                fpc::codes::recovery_threshold(args.scheme, args.m, args.p)
            );
            Ok(())
        }
        Command::Dims(args) => {
            let (plus, minus) = span_dims(args.shape.m, args.shape.p, args.characteristic);
            println!("plus {plus}");
            println!("minus {minus}");
            Ok(())
        }
        Command::Chains(args) => {
            print_chains(args.m, args.p);
            Ok(())
        }
        Command::VerifyPoints(args) => verify_points(args),
        Command::Sweep(args) => sweep(args),
        Command::Cond(args) => cond(args),
        Command::GenMatrix(args) => gen_matrix(args),
    }
}

/// Load the input matrix, failing on a field mismatch and padding columns
/// when asked, so multiply and sweep treat inputs identically.
fn load_input(
    path: &Path,
    expected: Option<FieldSpec>,
    p: usize,
    pad_cols: bool,
) -> Result<DenseMatrix> {
    let a = read_matrix(path)?;
    if let Some(want) = expected {
        if *a.spec() != want {
            return Err(Error::InvalidParams(format!(
                "input file carries field {}, not the requested {}",
                a.spec(),
                want
            )));
        }
    }
    if pad_cols && a.cols() % p != 0 {
        let target = a.cols().div_ceil(p) * p;
        return Ok(a.pad_cols(target));
    }
    Ok(a)
}

fn straggler_set(n: usize, count: usize, ids: &[usize], seed: u64) -> BTreeSet<usize> {
    if ids.is_empty() {
        seeded_straggler_permutation(n, seed)[..count.min(n)]
            .iter()
            .copied()
            .collect()
    } else {
        ids.iter().copied().collect()
    }
}

fn instance_for(args: &MultiplyArgs, spec: FieldSpec) -> Result<CodeInstance> {
    let params = CodeParams::new(args.scheme, args.m, args.p, args.workers, spec)?;
    match &args.manifest {
        Some(path) => {
            let instance = read_manifest(&fs::read_to_string(path)?)?;
            if instance.params != params {
                return Err(Error::InvalidParams(format!(
                    "manifest describes {} m={} p={} workers={} over {}, which \
                     does not match the requested run",
                    instance.params.scheme,
                    instance.params.m,
                    instance.params.p,
                    instance.params.n,
                    instance.params.spec
                )));
            }
            Ok(instance)
        }
        None => select_points(&params, args.seed, args.verify_budget),
    }
}

fn multiply(args: MultiplyArgs) -> Result<()> {
    let a = load_input(&args.input, args.field, args.p, args.pad_cols)?;
    let instance = instance_for(&args, *a.spec())?;
    let latency = LatencyModel {
        base_unit: 1.0,
        straggler_ids: straggler_set(args.workers, args.stragglers, &args.straggler_ids, args.seed),
        slowdown: args.slowdown,
        jitter: args.jitter,
        seed: args.seed,
    };
    let (product, report) = run_distributed(&a, &instance, &latency)?;
    write_matrix(&args.out, &product)?;
    emit_rows(args.report.as_deref(), &[report.to_row()])
}

fn verify_points(args: VerifyPointsArgs) -> Result<()> {
    let params = CodeParams::new(args.scheme, args.m, args.p, args.workers, args.field)?;
    let instance = select_points(&params, args.seed, args.verify_budget)?;
    let manifest = write_manifest(&instance);
    match &args.out {
        Some(path) => fs::write(path, manifest)?,
        None => print!("{manifest}"),
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let a = load_input(&args.input, None, args.p, args.pad_cols)?;
    let mut instances = Vec::new();
    for &scheme in &args.schemes {
        let params = CodeParams::new(scheme, args.m, args.p, args.workers, *a.spec())?;
        instances.push(select_points(&params, args.seed, args.verify_budget)?);
    }
    let latency = LatencyModel {
        base_unit: 1.0,
        straggler_ids: BTreeSet::new(),
        slowdown: args.slowdown,
        jitter: args.jitter,
        seed: args.seed,
    };
    let s_range: Vec<usize> = (0..=args.s_max).collect();
    let rows = sweep_stragglers(&a, &instances, &s_range, &latency)?;
    emit_rows(args.report.as_deref(), &rows)
}

fn cond(args: CondArgs) -> Result<()> {
    if args.p_min < 1 || args.p_max < args.p_min {
        return Err(Error::InvalidParams(format!(
            "bad p range [{}, {}]",
            args.p_min, args.p_max
        )));
    }
    let p_range: Vec<usize> = (args.p_min..=args.p_max).collect();
    let mode = match args.mode {
        CondMode::Chebyshev => PointMode::Chebyshev,
        CondMode::Random => PointMode::RandomBestOf20,
    };
    let s = args.s;
    let rows = condition_sweep(&p_range, s, &|p| p + s, args.trials, mode, args.seed)?;
    emit_rows(args.report.as_deref(), &rows)
}

fn gen_matrix(args: GenMatrixArgs) -> Result<()> {
    if args.rows == 0 || args.cols == 0 {
        return Err(Error::InvalidParams("matrix shape must be nonzero".into()));
    }
    let spec = args.field;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut draw = || -> Result<fpc::field::FieldElement> {
        match (args.dist, &spec) {
            (Dist::Gaussian, FieldSpec::Real64) => {
                // Box-Muller transform; 1 - u keeps the log argument in (0, 1].
                let u: f64 = 1.0 - rng.gen::<f64>();
                let v: f64 = rng.gen();
                let z = (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos();
                spec.from_f64(z)
            }
            (Dist::Gaussian, other) => Err(Error::InvalidParams(format!(
                "gaussian entries need real64, not {other}"
            ))),
            (Dist::Uniform, FieldSpec::Prime { q }) => Ok(spec.from_u64(rng.gen_range(0..*q))),
            (Dist::Uniform, FieldSpec::Binary { .. }) => Ok(spec.from_u64(rng.gen())),
            (Dist::Uniform, FieldSpec::Real64) => spec.from_f64(rng.gen()),
            (Dist::Uniform, FieldSpec::Rational) => Err(Error::InvalidParams(
                "uniform entries are undefined over rationals; use integers".into(),
            )),
            (Dist::Integers, FieldSpec::Prime { q }) => Ok(spec.from_u64(rng.gen_range(0..*q))),
            (Dist::Integers, FieldSpec::Binary { .. }) => Ok(spec.from_u64(rng.gen())),
            (Dist::Integers, FieldSpec::Rational | FieldSpec::Real64) => {
                Ok(spec.from_u64(rng.gen_range(0..256)))
            }
        }
    };
    let mut entries = Vec::with_capacity(args.rows * args.cols);
    for _ in 0..args.rows * args.cols {
        entries.push(draw()?);
    }
    let m = DenseMatrix::from_rows(entries.chunks(args.cols).map(<[_]>::to_vec).collect());
    write_matrix(&args.out, &m)
}

fn print_chains(m: usize, p: usize) {
    let cs = build_chain_structure(m, p);
    let fmt_orbit = |orbit: &[(usize, usize, usize)]| {
        orbit
            .iter()
            .map(|(k, s, t)| format!("({k},{s},{t})"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    println!("loops {}", cs.loops().len());
    for ((a, b), orbit) in cs.loops() {
        println!("loop ({a},{b}): {}", fmt_orbit(orbit));
    }
    match cs.special_key() {
        Some((a, b)) => println!("special ({a},{b})"),
        None => println!("special none"),
    }
    println!("chains {}", cs.single_chains().len());
    for chain in cs.single_chains() {
        let (_, _, t) = chain[0];
        println!("chain t={t}: {}", fmt_orbit(chain));
    }
    println!("covered {} of {}", cs.covered(), m * m * (p - 1));
}

/// Append rows to the CSV report, writing the header into new or empty
/// files; without a report path the rows go to stdout under a header.
fn emit_rows(report: Option<&Path>, rows: &[SweepRow]) -> Result<()> {
    match report {
        Some(path) => {
            let need_header = fs::metadata(path).map_or(true, |md| md.len() == 0);
            let mut file = fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)?;
            if need_header {
                writeln!(file, "{CSV_HEADER}")?;
            }
            for row in rows {
                writeln!(file, "{}", row.csv())?;
            }
        }
        None => {
            println!("{CSV_HEADER}");
            for row in rows {
                println!("{}", row.csv());
            }
        }
    }
    Ok(())
}
