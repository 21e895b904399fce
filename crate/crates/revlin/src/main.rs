//! Command-line front end for the reversible linear-algebra engine.
//!
//! Exit codes: 0 success, 1 input or shape problems, 2 singular or
//! pivot-blocked matrices, 3 a failed reversibility check (an engine
//! bug, never expected). Output is deterministic for fixed inputs and
//! flags; wall-clock time appears only in the metrics `excluded`
//! block.

use std::env;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use revlin::arena::Arena;
use revlin::baselines::{oracle_inverse, oracle_matmul, oracle_ols};
use revlin::dataset::parse_csv;
use revlin::error::RevError;
use revlin::instances;
use revlin::inversion::{build_inverse, invert_matrix};
use revlin::kernels::{build_matmul, multiply, MatrixHandle};
use revlin::metrics::{Dims, Excluded, MetricsDocument};
use revlin::program::{verify_roundtrip, RoundTrip};
use revlin::ratmat::RatMatrix;
use revlin::rational::Rational;
use revlin::regression::{
    build_ols, build_ridge, check_normal_equations, fit, RegressionProblem,
};

#[derive(Parser)]
#[command(
    name = "revlin",
    version,
    about = "Reversible exact-rational linear algebra",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a least-squares or ridge model to a CSV dataset.
    Regress(RegressArgs),
    /// Invert a square matrix read from a file.
    Invert(InvertArgs),
    /// Multiply two matrices read from files.
    Matmul(MatmulArgs),
    /// Sweep kernel sizes and report cost growth.
    Bench(BenchArgs),
    /// Round-trip a random program of the given kind and size.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct OutputOpts {
    /// Re-run the program backward and require exact restoration.
    #[arg(long)]
    verify: bool,
    /// Also run the irreversible oracle and report its trace cost.
    #[arg(long)]
    compare: bool,
    /// Write a metrics JSON document to this path.
    #[arg(long, value_name = "PATH")]
    metrics: Option<PathBuf>,
    /// Round printed values to this many decimal digits (approximate).
    #[arg(long, value_name = "DIGITS")]
    decimal: Option<u32>,
}

#[derive(Args)]
struct RegressArgs {
    /// CSV file: header line, feature columns, target in the last column.
    data: PathBuf,
    /// Append an all-ones feature row (fit an intercept).
    #[arg(long)]
    bias: bool,
    /// Ridge penalty weight λ (a nonnegative rational).
    #[arg(long, value_name = "LAMBDA")]
    ridge: Option<String>,
    #[command(flatten)]
    out: OutputOpts,
}

#[derive(Args)]
struct InvertArgs {
    /// Matrix file: one row per line, whitespace-separated rationals.
    matrix: PathBuf,
    #[command(flatten)]
    out: OutputOpts,
}

#[derive(Args)]
struct MatmulArgs {
    /// Left factor file.
    a: PathBuf,
    /// Right factor file.
    b: PathBuf,
    #[command(flatten)]
    out: OutputOpts,
}

#[derive(Args)]
struct BenchArgs {
    /// Kernel to sweep; all three when omitted.
    #[arg(long, value_enum)]
    op: Option<KernelOp>,
    /// Largest size in the sweep (powers of two starting at 4).
    #[arg(long, default_value_t = 32)]
    max: usize,
    /// Write one metrics JSON document per sweep point to this path.
    #[arg(long, value_name = "PATH")]
    metrics: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Kernel to round-trip.
    #[arg(long, value_enum)]
    op: KernelOp,
    /// Instance size n.
    #[arg(long)]
    size: usize,
    /// Seed for the random instance.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum KernelOp {
    Matmul,
    Invert,
    Ols,
}

impl KernelOp {
    fn name(self) -> &'static str {
        match self {
            KernelOp::Matmul => "matmul",
            KernelOp::Invert => "invert",
            KernelOp::Ols => "ols",
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn new(code: u8, message: String) -> CliError {
        CliError { code, message }
    }
}

impl From<RevError> for CliError {
    fn from(err: RevError) -> CliError {
        let code = match err.root_cause() {
            RevError::SingularPivot { .. } | RevError::Singular | RevError::ZeroPivot { .. } => 2,
            RevError::GarbageLeak { .. } => 3,
            _ => 1,
        };
        CliError::new(code, err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{err}");
                    ExitCode::from(1)
                }
            };
        }
    };
    let result = match cli.command {
        Command::Regress(args) => cmd_regress(args),
        Command::Invert(args) => cmd_invert(args),
        Command::Matmul(args) => cmd_matmul(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

/// Fresh arena honoring the REVLIN_MAX_BITS guard.
fn new_arena() -> Result<Arena, CliError> {
    let mut arena = Arena::new();
    if let Ok(text) = env::var("REVLIN_MAX_BITS") {
        let limit: u64 = text.trim().parse().map_err(|_| {
            CliError::new(
                1,
                format!("invalid REVLIN_MAX_BITS value {text:?}: expected a positive integer"),
            )
        })?;
        if limit == 0 {
            return Err(CliError::new(1, "REVLIN_MAX_BITS must be positive".into()));
        }
        arena.set_bit_limit(Some(limit));
    }
    Ok(arena)
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|err| CliError::new(1, format!("cannot read {}: {err}", path.display())))
}

fn read_matrix(path: &Path) -> Result<RatMatrix, CliError> {
    read_file(path)?
        .parse::<RatMatrix>()
        .map_err(|err| CliError::new(1, format!("{}: {err}", path.display())))
}

fn write_metrics<T: Serialize>(path: &Option<PathBuf>, payload: &T) -> Result<(), CliError> {
    if let Some(path) = path {
        let mut json = serde_json::to_string_pretty(payload).expect("metrics serialize");
        json.push('\n');
        fs::write(path, json)
            .map_err(|err| CliError::new(1, format!("cannot write {}: {err}", path.display())))?;
    }
    Ok(())
}

fn print_matrix(matrix: &RatMatrix, decimal: Option<u32>) {
    match decimal {
        None => print!("{matrix}"),
        Some(digits) => {
            println!("# approximate ({digits} decimal digits)");
            for i in 0..matrix.n_rows() {
                let row: Vec<String> = (0..matrix.n_cols())
                    .map(|j| matrix.at(i, j).to_decimal(digits))
                    .collect();
                println!("{}", row.join(" "));
            }
        }
    }
}

fn format_tuple(values: &[Rational], decimal: Option<u32>) -> String {
    let rendered: Vec<String> = match decimal {
        None => values.iter().map(Rational::to_string).collect(),
        Some(digits) => values.iter().map(|v| v.to_decimal(digits)).collect(),
    };
    format!("({})", rendered.join(", "))
}

fn flatten(matrix: &RatMatrix) -> Vec<String> {
    let mut out = Vec::with_capacity(matrix.n_rows() * matrix.n_cols());
    for i in 0..matrix.n_rows() {
        for j in 0..matrix.n_cols() {
            out.push(matrix.at(i, j).to_string());
        }
    }
    out
}

fn print_trace(trace: &revlin::baselines::TraceReport) {
    println!(
        "oracle trace: destructive_writes={} irreversible_ops={} peak_cells={}",
        trace.destructive_writes, trace.irreversible_ops, trace.peak_cells_irreversible
    );
}

fn print_roundtrip(trip: &RoundTrip) {
    println!(
        "roundtrip verified: forward_ops={} backward_ops={} garbage={}",
        trip.forward.primitive_ops,
        trip.backward.primitive_ops,
        trip.forward.garbage_cells + trip.backward.garbage_cells
    );
}

fn cmd_matmul(args: MatmulArgs) -> Result<(), CliError> {
    let a = read_matrix(&args.a)?;
    let b = read_matrix(&args.b)?;
    let started = Instant::now();
    let mut arena = new_arena()?;
    let ha = MatrixHandle::load(&mut arena, &a)?;
    let hb = MatrixHandle::load(&mut arena, &b)?;
    let (hc, report) = multiply(&mut arena, &ha, &hb)?;
    let product = hc.to_values(&arena)?;
    let wall_time_ms = started.elapsed().as_millis();

    print_matrix(&product, args.out.decimal);
    let mut doc = MetricsDocument {
        command: "matmul".into(),
        dims: Dims {
            m: Some(a.n_rows()),
            n: Some(a.n_cols()),
            p: Some(b.n_cols()),
            d: None,
        },
        resource: report,
        oracle: None,
        verified_roundtrip: None,
        outputs: flatten(&product),
        excluded: Excluded { wall_time_ms },
    };
    if args.out.compare {
        let (oracle_product, trace) = oracle_matmul(&a, &b)?;
        if oracle_product != product {
            return Err(CliError::new(
                3,
                "reversible product disagrees with the oracle".into(),
            ));
        }
        println!("oracle agreement: exact");
        print_trace(&trace);
        doc.oracle = Some(trace);
    }
    if args.out.verify {
        let mut scratch = new_arena()?;
        let ha = MatrixHandle::load(&mut scratch, &a)?;
        let hb = MatrixHandle::load(&mut scratch, &b)?;
        let hc = MatrixHandle::alloc(&mut scratch, a.n_rows(), b.n_cols());
        let (prog, _) = build_matmul(&mut scratch, &ha, &hb, &hc)?;
        let trip = verify_roundtrip(&mut scratch, &prog)?;
        print_roundtrip(&trip);
        doc.verified_roundtrip = Some(true);
    }
    write_metrics(&args.out.metrics, &doc)
}

fn cmd_invert(args: InvertArgs) -> Result<(), CliError> {
    let a = read_matrix(&args.matrix)?;
    let started = Instant::now();
    let mut arena = new_arena()?;
    let ha = MatrixHandle::load(&mut arena, &a)?;
    let (hinv, report) = invert_matrix(&mut arena, &ha).map_err(|err| pivot_verdict(err, &a))?;
    let inverse = hinv.to_values(&arena)?;
    let wall_time_ms = started.elapsed().as_millis();

    print_matrix(&inverse, args.out.decimal);
    let mut doc = MetricsDocument {
        command: "invert".into(),
        dims: Dims {
            n: Some(a.n_rows()),
            ..Dims::default()
        },
        resource: report,
        oracle: None,
        verified_roundtrip: None,
        outputs: flatten(&inverse),
        excluded: Excluded { wall_time_ms },
    };
    if args.out.compare {
        let (oracle_inv, trace) = oracle_inverse(&a, true)?;
        if oracle_inv != inverse {
            return Err(CliError::new(
                3,
                "reversible inverse disagrees with the oracle".into(),
            ));
        }
        println!("oracle agreement: exact");
        print_trace(&trace);
        doc.oracle = Some(trace);
    }
    if args.out.verify {
        let mut scratch = new_arena()?;
        let ha = MatrixHandle::load(&mut scratch, &a)?;
        let (prog, _) = build_inverse(&mut scratch, &ha)?;
        let trip = verify_roundtrip(&mut scratch, &prog)?;
        print_roundtrip(&trip);
        doc.verified_roundtrip = Some(true);
    }
    write_metrics(&args.out.metrics, &doc)
}

/// Labels a zero-pivot failure: truly singular, or invertible but
/// blocked by the no-pivoting policy (decided by the pivoted oracle).
fn pivot_verdict(err: RevError, a: &RatMatrix) -> CliError {
    if let RevError::SingularPivot { row } = err.root_cause() {
        let message = match oracle_inverse(a, true) {
            Ok(_) => format!(
                "zero pivot at row {row}: the matrix is invertible but needs row \
                 pivoting, which this elimination does not perform"
            ),
            Err(_) => format!("zero pivot at row {row}: the matrix is singular"),
        };
        return CliError::new(2, message);
    }
    err.into()
}

fn cmd_regress(args: RegressArgs) -> Result<(), CliError> {
    let text = read_file(&args.data)?;
    let (points, y) = parse_csv(&text)?;
    let lambda = match &args.ridge {
        Some(raw) => raw
            .parse::<Rational>()
            .map_err(|err| CliError::new(1, format!("invalid --ridge value: {err}")))?,
        None => Rational::zero(),
    };
    let started = Instant::now();
    let mut arena = new_arena()?;
    let prob = RegressionProblem::from_points(&mut arena, &points, &y, lambda.clone(), args.bias)?;
    let model = fit(&mut arena, &prob).map_err(|err| gram_verdict(err, &lambda))?;
    let wall_time_ms = started.elapsed().as_millis();

    let decimal = args.out.decimal;
    let sym = if decimal.is_some() { "≈" } else { "=" };
    let features = model.feature_theta(&arena)?;
    println!("θ {sym} {}", format_tuple(&features, decimal));
    if args.bias {
        let theta0 = match decimal {
            None => model.theta0().to_string(),
            Some(digits) => model.theta0().to_decimal(digits),
        };
        println!("θ₀ {sym} {theta0}");
    }

    let theta_full = model.theta_values(&arena)?;
    let mut doc = MetricsDocument {
        command: "regress".into(),
        dims: Dims {
            n: Some(prob.n()),
            d: Some(prob.d()),
            ..Dims::default()
        },
        resource: model.report().clone(),
        oracle: None,
        verified_roundtrip: None,
        outputs: theta_full.iter().map(Rational::to_string).collect(),
        excluded: Excluded { wall_time_ms },
    };
    if args.out.compare {
        let x_full = prob.x().to_values(&arena)?;
        let oracle_theta = oracle_ols(&x_full, &y, &lambda)?;
        if oracle_theta != theta_full || !check_normal_equations(&arena, &prob, &model)? {
            return Err(CliError::new(
                3,
                "reversible fit disagrees with the oracle".into(),
            ));
        }
        println!("oracle agreement: exact");
    }
    if args.out.verify {
        let mut scratch = new_arena()?;
        let prob2 =
            RegressionProblem::from_points(&mut scratch, &points, &y, lambda.clone(), args.bias)?;
        let (prog, _) = if lambda.is_zero() {
            build_ols(&mut scratch, &prob2)?
        } else {
            build_ridge(&mut scratch, &prob2)?
        };
        let trip = verify_roundtrip(&mut scratch, &prog)?;
        print_roundtrip(&trip);
        doc.verified_roundtrip = Some(true);
    }
    write_metrics(&args.out.metrics, &doc)
}

/// A singular Gram matrix means linearly dependent feature rows; for
/// a least-squares fit ridge is the standard way out, so say so.
fn gram_verdict(err: RevError, lambda: &Rational) -> CliError {
    if matches!(err.root_cause(), RevError::SingularPivot { .. }) {
        let message = if lambda.is_zero() {
            "the Gram matrix is singular (linearly dependent feature rows); \
             consider --ridge <lambda>"
                .to_string()
        } else {
            "the shifted Gram matrix is singular".to_string()
        };
        return CliError::new(2, message);
    }
    err.into()
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    if args.size == 0 {
        return Err(CliError::new(1, "--size must be positive".into()));
    }
    let mut rng = instances::rng(args.seed);
    let mut arena = new_arena()?;
    let trip = match args.op {
        KernelOp::Matmul => {
            let a = instances::random_matrix(&mut rng, args.size, args.size);
            let b = instances::random_matrix(&mut rng, args.size, args.size);
            let ha = MatrixHandle::load(&mut arena, &a)?;
            let hb = MatrixHandle::load(&mut arena, &b)?;
            let hc = MatrixHandle::alloc(&mut arena, args.size, args.size);
            let (prog, _) = build_matmul(&mut arena, &ha, &hb, &hc)?;
            verify_roundtrip(&mut arena, &prog)?
        }
        KernelOp::Invert => {
            let a = instances::random_minor_friendly(&mut rng, args.size);
            let ha = MatrixHandle::load(&mut arena, &a)?;
            let (prog, _) = build_inverse(&mut arena, &ha)?;
            verify_roundtrip(&mut arena, &prog)?
        }
        KernelOp::Ols => {
            if args.size < 3 {
                return Err(CliError::new(
                    1,
                    "--size must be at least 3 for ols (the model has 3 coefficients)".into(),
                ));
            }
            let (x, y) = instances::random_regression(&mut rng, 2, args.size, true);
            let prob =
                RegressionProblem::from_full_x(&mut arena, &x, &y, Rational::zero(), true)?;
            let (prog, _) = build_ols(&mut arena, &prob)?;
            verify_roundtrip(&mut arena, &prog)?
        }
    };
    println!(
        "verify {} n={}: OK (forward_ops={}, backward_ops={}, garbage={})",
        args.op.name(),
        args.size,
        trip.forward.primitive_ops,
        trip.backward.primitive_ops,
        trip.forward.garbage_cells + trip.backward.garbage_cells
    );
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    if args.max < 4 {
        return Err(CliError::new(1, "--max must be at least 4".into()));
    }
    let mut sizes = Vec::new();
    let mut size = 4;
    while size <= args.max {
        sizes.push(size);
        size *= 2;
    }
    let ops: Vec<KernelOp> = match args.op {
        Some(op) => vec![op],
        None => vec![KernelOp::Matmul, KernelOp::Invert, KernelOp::Ols],
    };

    // Sweep points are independent; run each on its own arena.
    let results: Vec<(KernelOp, Vec<Result<MetricsDocument, CliError>>)> =
        thread::scope(|scope| {
            let handles: Vec<_> = ops
                .iter()
                .map(|&op| {
                    let per_size: Vec<_> = sizes
                        .iter()
                        .map(|&n| scope.spawn(move || bench_point(op, n)))
                        .collect();
                    (op, per_size)
                })
                .collect();
            handles
                .into_iter()
                .map(|(op, per_size)| {
                    let docs = per_size
                        .into_iter()
                        .map(|h| h.join().expect("bench worker panicked"))
                        .collect();
                    (op, docs)
                })
                .collect()
        });

    let mut all_docs = Vec::new();
    for (op, outcomes) in results {
        let mut docs = Vec::with_capacity(outcomes.len());
        for outcome in outcomes {
            docs.push(outcome?);
        }
        for doc in &docs {
            println!("{}", bench_line(op, doc));
        }
        if docs.len() >= 2 {
            println!("{}", growth_line(op, &docs));
        }
        all_docs.extend(docs);
    }
    write_metrics(&args.metrics, &all_docs)
}

fn bench_point(op: KernelOp, n: usize) -> Result<MetricsDocument, CliError> {
    let started = Instant::now();
    let mut arena = new_arena()?;
    let doc = match op {
        KernelOp::Matmul => {
            let mut rng = instances::rng(100 + n as u64);
            let a = instances::random_matrix(&mut rng, n, n);
            let b = instances::random_matrix(&mut rng, n, n);
            let ha = MatrixHandle::load(&mut arena, &a)?;
            let hb = MatrixHandle::load(&mut arena, &b)?;
            let (_, report) = multiply(&mut arena, &ha, &hb)?;
            let (_, trace) = oracle_matmul(&a, &b)?;
            MetricsDocument {
                command: "bench matmul".into(),
                dims: Dims {
                    m: Some(n),
                    n: Some(n),
                    p: Some(n),
                    d: None,
                },
                resource: report,
                oracle: Some(trace),
                verified_roundtrip: None,
                outputs: Vec::new(),
                excluded: Excluded { wall_time_ms: 0 },
            }
        }
        KernelOp::Invert => {
            let mut rng = instances::rng(200 + n as u64);
            let a = instances::random_minor_friendly(&mut rng, n);
            let ha = MatrixHandle::load(&mut arena, &a)?;
            let (_, report) = invert_matrix(&mut arena, &ha)?;
            let (_, trace) = oracle_inverse(&a, false)?;
            MetricsDocument {
                command: "bench invert".into(),
                dims: Dims {
                    n: Some(n),
                    ..Dims::default()
                },
                resource: report,
                oracle: Some(trace),
                verified_roundtrip: None,
                outputs: Vec::new(),
                excluded: Excluded { wall_time_ms: 0 },
            }
        }
        KernelOp::Ols => {
            let mut rng = instances::rng(300 + n as u64);
            let (x, y) = instances::random_regression(&mut rng, 3, n, true);
            let prob = RegressionProblem::from_full_x(&mut arena, &x, &y, Rational::zero(), true)?;
            let model = fit(&mut arena, &prob)?;
            MetricsDocument {
                command: "bench ols".into(),
                dims: Dims {
                    n: Some(n),
                    d: Some(4),
                    ..Dims::default()
                },
                resource: model.report().clone(),
                oracle: None,
                verified_roundtrip: None,
                outputs: Vec::new(),
                excluded: Excluded { wall_time_ms: 0 },
            }
        }
    };
    let mut doc = doc;
    doc.excluded.wall_time_ms = started.elapsed().as_millis();
    Ok(doc)
}

fn bench_line(op: KernelOp, doc: &MetricsDocument) -> String {
    let r = &doc.resource;
    let n = doc.dims.n.expect("bench dims carry n");
    let mut line = match op {
        KernelOp::Ols => format!("bench ols d=4 n={n}: "),
        _ => format!("bench {} n={n}: ", op.name()),
    };
    line.push_str(&format!(
        "ops={} peak_live={} transient_peak={} max_bits={}",
        r.primitive_ops, r.peak_live_cells, r.transient_peak, r.max_bits
    ));
    if let Some(trace) = &doc.oracle {
        line.push_str(&format!(" trace_writes={}", trace.destructive_writes));
    }
    line
}

fn decimal_ratio(num: u64, den: u64) -> String {
    let num = i64::try_from(num).expect("bench count fits i64");
    let den = i64::try_from(den).expect("bench count fits i64");
    Rational::ratio(num, den).to_decimal(2)
}

/// Per-doubling cost ratios across the sweep; for matmul also the
/// trace-versus-peak blow-up ratio, the naive transform's overhead.
fn growth_line(op: KernelOp, docs: &[MetricsDocument]) -> String {
    let op_ratios: Vec<String> = docs
        .windows(2)
        .map(|w| decimal_ratio(w[1].resource.primitive_ops, w[0].resource.primitive_ops))
        .collect();
    let mut line = format!(
        "bench {} growth: ops ratios [{}]",
        op.name(),
        op_ratios.join(", ")
    );
    if op == KernelOp::Matmul {
        let blowups: Vec<Rational> = docs
            .iter()
            .map(|doc| {
                let writes = doc.oracle.as_ref().expect("matmul bench has a trace");
                let writes = i64::try_from(writes.destructive_writes).expect("fits i64");
                let peak = i64::try_from(doc.resource.peak_live_cells).expect("fits i64");
                Rational::ratio(writes, peak)
            })
            .collect();
        let blowup_ratios: Vec<String> = blowups
            .windows(2)
            .map(|w| (&w[1] / &w[0]).to_decimal(2))
            .collect();
        line.push_str(&format!("; blowup ratios [{}]", blowup_ratios.join(", ")));
    }
    line
}
