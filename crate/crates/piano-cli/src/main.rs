//! Command-line front-end: train models, run desk-scale benchmark sweeps,
//! and cross-check solver fixed points.
//!
//! Every subcommand validates its flags and solver/regularization
//! compatibility before touching data, and writes output files only after a
//! fit completes, so a failed invocation leaves nothing behind.
//!
//! Exit codes: 0 success (train: converged), 1 usage/validation/runtime
//! error, 2 train stopped on the iteration cap, 3 compare found solvers
//! disagreeing beyond the gate.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use piano_core::baselines::{bohning_mm_fit, coord_mm_l1_fit, irls_fit};
use piano_core::io::{
    load_csv, load_libsvm, synth_generate, write_trace, LabelMode, SyntheticSpec, TraceFormat,
};
use piano_core::{
    fit as piano_fit_any, Dataset, Error, FitConfig, FitResult, Regularization, WeightMatrix,
};

#[derive(Parser)]
#[command(name = "piano", version, about = "Multinomial logistic regression solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model and write the weights and convergence trace.
    Train(TrainArgs),
    /// Time solvers to a target fraction of the initial objective across a
    /// dimension sweep.
    Bench(BenchArgs),
    /// Run several solvers to tight tolerance and check that their final
    /// objectives agree.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverKind {
    Piano,
    Irls,
    Bohning,
    #[value(name = "coord-l1")]
    CoordL1,
}

impl SolverKind {
    fn name(&self) -> &'static str {
        match self {
            SolverKind::Piano => "piano",
            SolverKind::Irls => "irls",
            SolverKind::Bohning => "bohning",
            SolverKind::CoordL1 => "coord-l1",
        }
    }

    fn parse_list(text: &str) -> Result<Vec<SolverKind>, String> {
        text.split(',')
            .map(|token| {
                SolverKind::from_str(token.trim(), true)
                    .map_err(|_| format!("unknown solver {token:?}"))
            })
            .collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RegKind {
    None,
    L1,
    L0,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DataFormat {
    Csv,
    Libsvm,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InitKind {
    Uniform,
    Zero,
}

#[derive(Args)]
struct DataArgs {
    /// Input file; exactly one of --data / --synth is required.
    #[arg(long, conflicts_with = "synth")]
    data: Option<PathBuf>,

    /// Input format; inferred from the extension when omitted.
    #[arg(long, value_enum, requires = "data")]
    format: Option<DataFormat>,

    /// 0-based label column for csv files (default: last column).
    #[arg(long, requires = "data")]
    label_col: Option<usize>,

    /// Skip a csv header row.
    #[arg(long, requires = "data")]
    has_header: bool,

    /// Synthetic spec `n=..,d=..,m=..[,labels=model|uniform]`.
    #[arg(long)]
    synth: Option<String>,

    /// Append a constant-one bias column to the features.
    #[arg(long)]
    bias: bool,
}

#[derive(Args)]
struct FitArgs {
    /// Regularization of the objective.
    #[arg(long, value_enum, default_value = "none")]
    reg: RegKind,

    /// l1 penalty weight (requires --reg l1).
    #[arg(long)]
    lambda: Option<f64>,

    /// Cardinality bound (requires --reg l0).
    #[arg(long)]
    beta: Option<usize>,

    /// Relative objective-change stopping tolerance.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,

    #[arg(long, default_value_t = 500)]
    max_iter: usize,

    /// Worker threads (falls back to PIANO_THREADS, then all cores).
    #[arg(long)]
    threads: Option<usize>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Initial weights: seeded U[0,1] entries or all zeros.
    #[arg(long, value_enum, default_value = "uniform")]
    init: InitKind,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,

    #[arg(long, value_enum, default_value = "piano")]
    solver: SolverKind,

    #[command(flatten)]
    fit: FitArgs,

    /// Trace output path (.json for JSON, anything else for csv).
    #[arg(long)]
    trace: Option<PathBuf>,

    /// Weights output path (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    data: DataArgs,

    /// Comma-separated solvers to benchmark.
    #[arg(long, value_parser = SolverKind::parse_list, default_value = "piano,bohning")]
    solvers: std::vec::Vec<SolverKind>,

    /// Comma-separated feature dimensions for synthetic sweeps.
    #[arg(long, value_delimiter = ',')]
    sweep_d: Option<Vec<usize>>,

    /// Stop the clock when the objective falls to this fraction of its
    /// initial value.
    #[arg(long, default_value_t = 0.6)]
    target_frac: f64,

    #[command(flatten)]
    fit: FitArgs,

    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    data: DataArgs,

    /// Comma-separated solvers to cross-check.
    #[arg(long, value_parser = SolverKind::parse_list, default_value = "piano,irls,bohning")]
    solvers: std::vec::Vec<SolverKind>,

    /// Largest allowed pairwise relative objective delta.
    #[arg(long, default_value_t = 1e-3)]
    gate: f64,

    #[command(flatten)]
    fit: FitArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Train(args) => run_train(args),
        Command::Bench(args) => run_bench(args),
        Command::Compare(args) => run_compare(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn parse_synth(text: &str, seed: u64) -> Result<SyntheticSpec, Error> {
    let mut n = None;
    let mut d = None;
    let mut m = None;
    let mut label_mode = LabelMode::GroundTruthModel;
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (key, value) = part.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("--synth: expected key=value, found {part:?}"))
        })?;
        match key {
            "n" | "d" | "m" => {
                let parsed: usize = value.parse().map_err(|_| {
                    Error::InvalidConfig(format!("--synth: bad count {value:?} for {key}"))
                })?;
                match key {
                    "n" => n = Some(parsed),
                    "d" => d = Some(parsed),
                    _ => m = Some(parsed),
                }
            }
            "labels" => {
                label_mode = match value {
                    "model" => LabelMode::GroundTruthModel,
                    "uniform" => LabelMode::UniformRandom,
                    other => {
                        return Err(Error::InvalidConfig(format!(
                            "--synth: labels must be model|uniform, found {other:?}"
                        )))
                    }
                }
            }
            other => {
                return Err(Error::InvalidConfig(format!(
                    "--synth: unknown key {other:?}"
                )))
            }
        }
    }
    let missing = |what: &str| Error::InvalidConfig(format!("--synth: missing {what}="));
    Ok(SyntheticSpec {
        n: n.ok_or_else(|| missing("n"))?,
        d: d.ok_or_else(|| missing("d"))?,
        m: m.ok_or_else(|| missing("m"))?,
        label_mode,
        seed,
        append_bias: false,
    })
}

fn load_data(args: &DataArgs, seed: u64) -> Result<Dataset, Error> {
    let data = match (&args.data, &args.synth) {
        (Some(path), None) => {
            let format = args.format.unwrap_or_else(|| {
                match path.extension().and_then(|e| e.to_str()) {
                    Some("svm") | Some("libsvm") | Some("svmlight") => DataFormat::Libsvm,
                    _ => DataFormat::Csv,
                }
            });
            match format {
                DataFormat::Csv => load_csv(path, args.label_col, args.has_header)?,
                DataFormat::Libsvm => load_libsvm(path)?,
            }
        }
        (None, Some(spec)) => {
            let mut spec = parse_synth(spec, seed)?;
            spec.append_bias = args.bias;
            return Ok(synth_generate(&spec)?.0);
        }
        _ => {
            return Err(Error::InvalidConfig(
                "exactly one of --data or --synth is required".into(),
            ))
        }
    };
    Ok(if args.bias { data.with_bias_column() } else { data })
}

fn resolve_threads(flag: Option<usize>) -> Result<usize, Error> {
    if let Some(threads) = flag {
        return Ok(threads);
    }
    if let Ok(env) = std::env::var("PIANO_THREADS") {
        return env.parse().map_err(|_| {
            Error::InvalidConfig(format!("PIANO_THREADS must be a positive integer, got {env:?}"))
        });
    }
    Ok(std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1))
}

fn build_config(args: &FitArgs) -> Result<FitConfig, Error> {
    let regularization = match args.reg {
        RegKind::None => {
            if args.lambda.is_some() || args.beta.is_some() {
                return Err(Error::InvalidConfig(
                    "--lambda/--beta require --reg l1/l0".into(),
                ));
            }
            Regularization::None
        }
        RegKind::L1 => Regularization::L1 {
            lambda: args.lambda.ok_or_else(|| {
                Error::InvalidConfig("--reg l1 requires --lambda".into())
            })?,
        },
        RegKind::L0 => Regularization::L0 {
            beta: args
                .beta
                .ok_or_else(|| Error::InvalidConfig("--reg l0 requires --beta".into()))?,
        },
    };
    Ok(FitConfig {
        regularization,
        rel_tol: args.tol,
        max_outer_iters: args.max_iter,
        threads: resolve_threads(args.threads)?,
        seed: args.seed,
        ..FitConfig::default()
    })
}

/// Rejects solver/regularization combinations up front.
fn check_solver_reg(solver: SolverKind, reg: &Regularization) -> Result<(), Error> {
    let ok = match solver {
        SolverKind::Piano => true,
        SolverKind::Irls | SolverKind::Bohning => matches!(reg, Regularization::None),
        SolverKind::CoordL1 => matches!(reg, Regularization::L1 { .. }),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "solver {} does not support this regularization (irls/bohning need --reg none, coord-l1 needs --reg l1)",
            solver.name()
        )))
    }
}

fn initial_weights(init: InitKind, m: usize, d: usize, seed: u64) -> WeightMatrix {
    match init {
        InitKind::Zero => WeightMatrix::zeros(m, d),
        InitKind::Uniform => {
            // weight draws are decoupled from the data-generation stream
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
            WeightMatrix::random_uniform(m, d, &mut rng)
        }
    }
}

fn run_solver(
    solver: SolverKind,
    data: &Dataset,
    w0: &WeightMatrix,
    config: &FitConfig,
) -> Result<FitResult, Error> {
    match solver {
        SolverKind::Piano => piano_fit_any(data, w0, config),
        SolverKind::Irls => irls_fit(data, w0, config),
        SolverKind::Bohning => bohning_mm_fit(data, w0, config),
        SolverKind::CoordL1 => coord_mm_l1_fit(data, w0, config),
    }
}

#[derive(Serialize)]
struct WeightsFile<'a> {
    m: usize,
    d: usize,
    stacking: &'static str,
    class_names: &'a [String],
    weights: Vec<f64>,
    nnz: usize,
    objective: f64,
    iterations: usize,
    converged: bool,
}

fn trace_format(path: &Path) -> TraceFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => TraceFormat::Json,
        _ => TraceFormat::Csv,
    }
}

fn run_train(args: TrainArgs) -> Result<ExitCode, Error> {
    let config = build_config(&args.fit)?;
    check_solver_reg(args.solver, &config.regularization)?;
    let data = load_data(&args.data, args.fit.seed)?;
    config.validate(data.d() * data.m())?;

    let w0 = initial_weights(args.fit.init, data.m(), data.d(), args.fit.seed);
    let result = run_solver(args.solver, &data, &w0, &config)?;

    if let Some(path) = &args.out {
        let file = WeightsFile {
            m: data.m(),
            d: data.d(),
            stacking: "class_major",
            class_names: data.class_names(),
            weights: result.weights.flatten().to_vec(),
            nnz: result.weights.nnz(),
            objective: result.final_objective(),
            iterations: result.iterations(),
            converged: result.converged,
        };
        let out = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(out, &file)
            .map_err(|e| Error::InvalidData(format!("weights serialization: {e}")))?;
    }
    if let Some(path) = &args.trace {
        write_trace(&result.trace, path, trace_format(path))?;
    }

    println!(
        "{}: objective {:.12} after {} iterations, nnz {}/{} ({})",
        args.solver.name(),
        result.final_objective(),
        result.iterations(),
        result.weights.nnz(),
        result.weights.len(),
        if result.converged { "converged" } else { "max-iter stop" }
    );
    Ok(ExitCode::from(if result.converged { 0 } else { 2 }))
}

fn run_bench(args: BenchArgs) -> Result<ExitCode, Error> {
    let config = build_config(&args.fit)?;
    for &solver in &args.solvers {
        check_solver_reg(solver, &config.regularization)?;
    }
    if !args.target_frac.is_finite() || args.target_frac <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "--target-frac must be > 0, got {}",
            args.target_frac
        )));
    }
    if args.sweep_d.is_some() && args.data.synth.is_none() {
        return Err(Error::InvalidConfig(
            "--sweep-d only applies to synthetic data".into(),
        ));
    }

    let mut rows = Vec::new();
    let sweep = args.sweep_d.clone().unwrap_or_default();
    let sizes: Vec<Option<usize>> = if sweep.is_empty() {
        vec![None]
    } else {
        sweep.iter().copied().map(Some).collect()
    };

    for size in sizes {
        let data = match (size, &args.data.synth) {
            (Some(d), Some(spec_text)) => {
                let mut spec = parse_synth(spec_text, args.fit.seed)?;
                spec.d = d;
                spec.append_bias = args.data.bias;
                synth_generate(&spec)?.0
            }
            _ => load_data(&args.data, args.fit.seed)?,
        };
        config.validate(data.d() * data.m())?;
        let w0 = initial_weights(args.fit.init, data.m(), data.d(), args.fit.seed);
        for &solver in &args.solvers {
            let result = run_solver(solver, &data, &w0, &config)?;
            let initial = result.trace[0].objective;
            let target = args.target_frac * initial;
            let hit = result.trace.iter().find(|r| r.objective <= target);
            rows.push(format!(
                "{},{},{},{},{},{},{}",
                solver.name(),
                data.n(),
                data.d(),
                data.m(),
                hit.map_or(result.iterations(), |r| r.iter),
                hit.map_or(f64::NAN, |r| r.wall_ms),
                hit.is_some()
            ));
        }
    }

    let mut table = String::from("solver,n,d,m,iters,time_ms,reached\n");
    for row in rows {
        table.push_str(&row);
        table.push('\n');
    }
    match &args.out {
        Some(path) => std::fs::write(path, table)?,
        None => print!("{table}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn run_compare(args: CompareArgs) -> Result<ExitCode, Error> {
    let config = build_config(&args.fit)?;
    if args.solvers.len() < 2 {
        return Err(Error::InvalidConfig(
            "--solvers needs at least two entries to compare".into(),
        ));
    }
    for &solver in &args.solvers {
        check_solver_reg(solver, &config.regularization)?;
    }
    let data = load_data(&args.data, args.fit.seed)?;
    let dm = data.d() * data.m();
    if dm > 5000 {
        return Err(Error::SizeGuard {
            what: "cross-solver comparison",
            quantity: "d*m",
            limit: 5000,
            actual: dm,
        });
    }
    config.validate(dm)?;

    let w0 = initial_weights(args.fit.init, data.m(), data.d(), args.fit.seed);
    let start = Instant::now();
    let mut finals = Vec::new();
    for &solver in &args.solvers {
        let result = run_solver(solver, &data, &w0, &config)?;
        println!(
            "{}: objective {:.12} ({} iterations{})",
            solver.name(),
            result.final_objective(),
            result.iterations(),
            if result.converged { "" } else { ", max-iter stop" }
        );
        finals.push((solver.name(), result.final_objective()));
    }

    let mut worst: f64 = 0.0;
    let mut violated = false;
    for (i, (name_a, obj_a)) in finals.iter().enumerate() {
        for (name_b, obj_b) in finals.iter().skip(i + 1) {
            let delta = (obj_a - obj_b).abs() / obj_a.abs().max(obj_b.abs()).max(f64::MIN_POSITIVE);
            println!("delta {name_a}/{name_b}: {delta:.3e}");
            worst = worst.max(delta);
            if delta > args.gate {
                violated = true;
            }
        }
    }
    println!(
        "worst pairwise delta {worst:.3e} vs gate {:.3e} ({:.1} ms total)",
        args.gate,
        start.elapsed().as_secs_f64() * 1e3
    );
    Ok(ExitCode::from(if violated { 3 } else { 0 }))
}
