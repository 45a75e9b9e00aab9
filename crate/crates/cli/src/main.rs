//! Command-line front end: state ingestion, separable-rank and cp-rank
//! bounds, membership tests, SDPA export, and a randomized benchmark.
//!
//! Exit codes: 0 optimal/feasible, 2 infeasible (certificate written),
//! 3 undecided or solver failure, 64 malformed input.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sha2::Digest;

use seprank_core::cprank::{cp_bound, cp_matrix_from_json, CpBoundRequest, CpVariant};
use seprank_core::dps::{dps_membership, DpsRequest, DpsVariant, DpsVerdict};
use seprank_core::hermitian::{builtin_state, state_from_json, HermitianState};
use seprank_core::moment::Scaling;
use seprank_core::program::{SolveStatus, SolverConfig};
use seprank_core::sdpa::export_sdpa;
use seprank_core::seprank::{
    assemble_sep_program, effective_state, sep_bound_full, SepBoundRequest, SepMode,
};
use seprank_core::Real;

const EXIT_OK: u8 = 0;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_UNDECIDED: u8 = 3;
const EXIT_BAD_INPUT: u8 = 64;

#[derive(Parser)]
#[command(name = "seprank", version, about = "Semidefinite bounds on separable and completely positive matrix factorization ranks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Solver config file (key = value lines)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the JSON run report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print solver iteration logs
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Lower-bound the separable rank of a bipartite state
    BoundSep(BoundSepArgs),
    /// Lower-bound the completely positive rank of a nonnegative matrix
    BoundCp(BoundCpArgs),
    /// Test membership in a moment relaxation of the separable set
    Dps(DpsArgs),
    /// Solve a batch of random product states and tabulate bounds
    BenchRandom(BenchArgs),
}

#[derive(Args)]
struct BoundSepArgs {
    /// Built-in state name (Sep1, Sep2, Sep3, Ent1) or a JSON state file
    #[arg(long)]
    state: String,
    /// Relaxation level t >= 2
    #[arg(long)]
    level: usize,
    /// Scaling regime
    #[arg(long, default_value = "s1")]
    scaling: String,
    /// Variable regime
    #[arg(long, default_value = "complex")]
    mode: String,
    /// Disable sign-symmetry block-diagonalization
    #[arg(long)]
    no_blocks: bool,
    /// Drop the polynomial-matrix localizing block
    #[arg(long)]
    no_matrix_localizer: bool,
    /// Skip trace normalization of the input state
    #[arg(long)]
    no_normalize: bool,
    /// Encode +- scaling pairs as linear equality rows
    #[arg(long)]
    equality_rows: bool,
    /// Write the realified program in sparse SDPA format
    #[arg(long)]
    export_sdpa: Option<PathBuf>,
    /// Assemble and export only; skip the solve
    #[arg(long)]
    no_solve: bool,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct BoundCpArgs {
    /// JSON file with the symmetric entrywise-nonnegative matrix
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    level: usize,
    #[arg(long, default_value = "strengthened")]
    variant: String,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct DpsArgs {
    #[arg(long)]
    state: String,
    /// Relaxation family
    #[arg(long, default_value = "onesided")]
    variant: String,
    /// Level t (full / onesided)
    #[arg(long)]
    level: Option<usize>,
    /// Split levels "k,t"
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    no_blocks: bool,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct BenchArgs {
    /// Number of random instances
    #[arg(long, default_value_t = 10)]
    count: usize,
    /// Product terms per state
    #[arg(long, default_value_t = 5)]
    terms: usize,
    /// Local dimension
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 3)]
    level: usize,
    #[arg(long, default_value = "s1")]
    scaling: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Solve instances in parallel
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    common: CommonOpts,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::BoundSep(args) => run_bound_sep(args),
        Command::BoundCp(args) => run_bound_cp(args),
        Command::Dps(args) => run_dps(args),
        Command::BenchRandom(args) => run_bench(args),
    };
    match code {
        Ok(c) => ExitCode::from(c),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_BAD_INPUT)
        }
    }
}

fn solver_config(common: &CommonOpts) -> Result<SolverConfig, String> {
    let mut cfg = match &common.config {
        Some(path) => SolverConfig::from_file(path).map_err(|e| e.to_string())?,
        None => SolverConfig::from_env(),
    };
    if common.verbose {
        cfg.verbose = true;
    }
    Ok(cfg)
}

/// Resolve a state argument: registry names take precedence over files.
fn load_state(spec: &str) -> Result<(HermitianState<Real>, String), String> {
    if let Some(st) = builtin_state::<Real>(spec) {
        if std::path::Path::new(spec).exists() {
            eprintln!("warning: {spec:?} names both a built-in state and a file; using the built-in");
        }
        let digest = sha2::Sha256::digest(spec.as_bytes());
        return Ok((st, hex::encode(digest)));
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| format!("cannot read state file {spec:?}: {e}"))?;
    let st = state_from_json::<Real>(&text).map_err(|e| e.to_string())?;
    let digest = sha2::Sha256::digest(text.as_bytes());
    Ok((st, hex::encode(digest)))
}

fn emit_report(common: &CommonOpts, report: &serde_json::Value) -> Result<(), String> {
    let text = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
    match &common.out {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| e.to_string())?,
        None => println!("{text}"),
    }
    Ok(())
}

fn run_bound_sep(args: BoundSepArgs) -> Result<u8, String> {
    let cfg = solver_config(&args.common)?;
    let (state, digest) = load_state(&args.state)?;
    let scaling: Scaling = args.scaling.parse().map_err(|e: seprank_core::Error| e.to_string())?;
    let mode: SepMode = args.mode.parse().map_err(|e: seprank_core::Error| e.to_string())?;
    let mut req = SepBoundRequest::new(state, args.level, scaling, mode);
    req.block_diagonalize = !args.no_blocks;
    req.use_matrix_localizer = !args.no_matrix_localizer;
    req.normalize_trace = !args.no_normalize;
    req.equality_pairs_as_rows = args.equality_rows;

    if let Some(path) = &args.export_sdpa {
        let mut assembled = req.clone();
        assembled.state = effective_state(&req).map_err(|e| e.to_string())?;
        assembled.normalize_trace = false;
        let (cprog, _) = assemble_sep_program(&assembled).map_err(|e| e.to_string())?;
        let prog = seprank_core::program::realify(&cprog).map_err(|e| e.to_string())?;
        export_sdpa(&prog, path).map_err(|e| e.to_string())?;
        if args.no_solve {
            let report = serde_json::json!({
                "command": "bound-sep",
                "input_digest": digest,
                "exported_sdpa": path.display().to_string(),
                "solve": "skipped",
                "version": env!("CARGO_PKG_VERSION"),
            });
            emit_report(&args.common, &report)?;
            return Ok(EXIT_OK);
        }
    }

    let (result, _artifacts) = sep_bound_full(&req, &cfg).map_err(|e| e.to_string())?;
    let report = serde_json::json!({
        "command": "bound-sep",
        "input_digest": digest,
        "config": config_json(&cfg),
        "result": result.to_json(),
        "version": env!("CARGO_PKG_VERSION"),
    });
    emit_report(&args.common, &report)?;
    Ok(match result.status {
        SolveStatus::Optimal => EXIT_OK,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        _ => EXIT_UNDECIDED,
    })
}

fn run_bound_cp(args: BoundCpArgs) -> Result<u8, String> {
    let cfg = solver_config(&args.common)?;
    let text = std::fs::read_to_string(&args.matrix)
        .map_err(|e| format!("cannot read matrix file {:?}: {e}", args.matrix))?;
    let matrix = cp_matrix_from_json::<Real>(&text).map_err(|e| e.to_string())?;
    let variant: CpVariant = args.variant.parse().map_err(|e: seprank_core::Error| e.to_string())?;
    let req = CpBoundRequest { matrix, level: args.level, variant };
    let result = cp_bound(&req, &cfg).map_err(|e| e.to_string())?;
    let digest = hex::encode(sha2::Sha256::digest(text.as_bytes()));
    let report = serde_json::json!({
        "command": "bound-cp",
        "input_digest": digest,
        "config": config_json(&cfg),
        "result": result.to_json(),
        "version": env!("CARGO_PKG_VERSION"),
    });
    emit_report(&args.common, &report)?;
    Ok(match result.status {
        SolveStatus::Optimal => EXIT_OK,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        _ => EXIT_UNDECIDED,
    })
}

fn run_dps(args: DpsArgs) -> Result<u8, String> {
    let cfg = solver_config(&args.common)?;
    let (state, digest) = load_state(&args.state)?;
    let variant = match args.variant.to_ascii_lowercase().as_str() {
        "full" => DpsVariant::Full(args.level.ok_or("--level required for full")?),
        "onesided" => DpsVariant::OneSided(args.level.ok_or("--level required for onesided")?),
        "split" => {
            let spec = args.levels.as_deref().ok_or("--levels k,t required for split")?;
            let (k, t) = spec
                .split_once(',')
                .ok_or_else(|| format!("bad --levels {spec:?}, expected k,t"))?;
            DpsVariant::Split(
                k.trim().parse().map_err(|_| format!("bad k in {spec:?}"))?,
                t.trim().parse().map_err(|_| format!("bad t in {spec:?}"))?,
            )
        }
        other => return Err(format!("unknown dps variant {other:?}")),
    };
    let mut req = DpsRequest::new(state, variant);
    req.block_diagonalize = !args.no_blocks;
    let outcome = dps_membership(&req, &cfg).map_err(|e| e.to_string())?;
    let (verdict, witness) = match &outcome.verdict {
        DpsVerdict::Feasible { .. } => ("feasible", None),
        DpsVerdict::Infeasible(cert) => (
            "infeasible",
            Some(serde_json::json!({
                "value": cert.value,
                "stationarity_residual": cert.stationarity_residual,
            })),
        ),
        DpsVerdict::Undecided(_) => ("undecided", None),
    };
    let report = serde_json::json!({
        "command": "dps",
        "input_digest": digest,
        "variant": format!("{:?}", variant),
        "verdict": verdict,
        "witness": witness,
        "sizes": outcome.sizes.to_json(),
        "solve_seconds": outcome.solve_seconds,
        "config": config_json(&cfg),
        "version": env!("CARGO_PKG_VERSION"),
    });
    emit_report(&args.common, &report)?;
    Ok(match outcome.verdict {
        DpsVerdict::Feasible { .. } => EXIT_OK,
        DpsVerdict::Infeasible(_) => EXIT_INFEASIBLE,
        DpsVerdict::Undecided(_) => EXIT_UNDECIDED,
    })
}

fn run_bench(args: BenchArgs) -> Result<u8, String> {
    let cfg = solver_config(&args.common)?;
    let scaling: Scaling = args.scaling.parse().map_err(|e: seprank_core::Error| e.to_string())?;
    let indices: Vec<u64> = (0..args.count as u64).collect();
    let solve_one = |&idx: &u64| -> Result<serde_json::Value, String> {
        let state = seprank_core::bench::random_product_state::<Real>(
            args.d, args.terms, args.seed, idx,
        )
        .map_err(|e| e.to_string())?;
        let req = SepBoundRequest::new(state, args.level, scaling, SepMode::Complex);
        let t0 = std::time::Instant::now();
        let (res, _) = sep_bound_full(&req, &cfg).map_err(|e| e.to_string())?;
        Ok(serde_json::json!({
            "index": idx,
            "status": res.status.to_string(),
            "bound": res.bound,
            "seconds": t0.elapsed().as_secs_f64(),
        }))
    };
    let rows: Vec<serde_json::Value> = if args.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.jobs)
            .build()
            .map_err(|e| e.to_string())?;
        use rayon::prelude::*;
        pool.install(|| indices.par_iter().map(solve_one).collect::<Result<Vec<_>, _>>())?
    } else {
        indices.iter().map(solve_one).collect::<Result<Vec<_>, _>>()?
    };

    let bounds: Vec<f64> = rows.iter().filter_map(|r| r["bound"].as_f64()).collect();
    let mean = if bounds.is_empty() { None } else {
        Some(bounds.iter().sum::<f64>() / bounds.len() as f64)
    };
    for r in &rows {
        println!(
            "{:>4}  {:<10} {:<10} {:.2}s",
            r["index"],
            r["status"].as_str().unwrap_or("?"),
            r["bound"].as_f64().map_or("-".into(), |b| format!("{b:.4}")),
            r["seconds"].as_f64().unwrap_or(0.0),
        );
    }
    let report = serde_json::json!({
        "command": "bench-random",
        "count": args.count,
        "terms": args.terms,
        "d": args.d,
        "level": args.level,
        "scaling": scaling.to_string(),
        "seed": args.seed,
        "rows": rows,
        "mean_bound": mean,
        "config": config_json(&cfg),
        "version": env!("CARGO_PKG_VERSION"),
    });
    if let Some(path) = &args.common.out {
        std::fs::write(path, serde_json::to_string_pretty(&report).map_err(|e| e.to_string())? + "\n")
            .map_err(|e| e.to_string())?;
    }
    Ok(EXIT_OK)
}

fn config_json(cfg: &SolverConfig) -> serde_json::Value {
    serde_json::json!({
        "tol_gap": cfg.tol_gap,
        "tol_feas": cfg.tol_feas,
        "tol_infeas": cfg.tol_infeas,
        "static_reg": cfg.static_reg,
        "max_iter": cfg.max_iter,
        "time_limit": cfg.time_limit,
        "ray_residual": cfg.ray_residual,
        "ray_objective": cfg.ray_objective,
    })
}
