use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use recsynth::bench::{parse_benchmark, BenchmarkFile};
use recsynth::cgen::CgenConfig;
use recsynth::driver::{solve, SynthConfig, SynthOutcome, SynthResult};
use recsynth::enumerate::Variant;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "recsynth", version, about = "Sketch completion for recursive list programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize one benchmark.
    Synth(SynthArgs),
    /// Run every `.bench` file of a directory under several variants.
    Bench(BenchArgs),
}

#[derive(Args)]
struct CgenArgs {
    /// Exhaustive ints range over [-N, N].
    #[arg(long)]
    cex_int_bound: Option<i64>,
    /// Exhaustive lists have at most N elements.
    #[arg(long)]
    cex_list_len: Option<usize>,
    /// Random samples per property.
    #[arg(long)]
    cex_samples: Option<usize>,
    /// Evaluation step budget per property evaluation.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SynthArgs {
    file: PathBuf,
    #[arg(long, default_value = "proph")]
    variant: Variant,
    /// Overrides the benchmark's size bound.
    #[arg(long)]
    size_bound: Option<usize>,
    #[command(flatten)]
    cgen: CgenArgs,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Append a JSON stats record to this file.
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long)]
    print_solution: bool,
}

#[derive(Args)]
struct BenchArgs {
    dir: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "nogen,retro,proph")]
    variants: Vec<Variant>,
    #[arg(long, default_value_t = 120.0)]
    timeout: f64,
    #[command(flatten)]
    cgen: CgenArgs,
    /// Per-run stats CSV; the cactus data goes next to it as `<stem>.cactus.csv`.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Serialize, Clone)]
struct Record {
    benchmark: String,
    variant: String,
    seed: u64,
    outcome: String,
    wall_seconds: f64,
    candidates_checked: u64,
    concepts_cached: u64,
    tuples_materialized: u64,
    clauses_learned: u64,
    full_rejections: u64,
    partial_backtracks: u64,
    solution_size: Option<usize>,
}

impl Record {
    fn new(name: &str, variant: Variant, seed: u64, r: &SynthResult) -> Self {
        let s = &r.stats;
        Record {
            benchmark: name.to_string(),
            variant: variant.to_string(),
            seed,
            outcome: r.outcome.name().to_string(),
            wall_seconds: s.wall_seconds,
            candidates_checked: s.candidates_checked,
            concepts_cached: s.concepts_cached,
            tuples_materialized: s.tuples_materialized,
            clauses_learned: s.clauses_learned,
            full_rejections: s.full_rejections,
            partial_backtracks: s.partial_backtracks,
            solution_size: match &r.outcome {
                SynthOutcome::Solution(sol) => Some(sol.size()),
                _ => None,
            },
        }
    }
}

fn load(path: &Path) -> Result<BenchmarkFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut b = parse_benchmark(&text).with_context(|| format!("in {}", path.display()))?;
    if b.meta.name.is_none() {
        if let Some(stem) = path.file_stem() {
            b.instance.name = stem.to_string_lossy().into_owned();
        }
    }
    Ok(b)
}

fn config(b: &BenchmarkFile, args: &CgenArgs, variant: Variant, timeout: Option<f64>) -> SynthConfig {
    let mut cgen = b.meta.cgen.apply(CgenConfig::default());
    cgen.seed = args.seed;
    if let Some(v) = args.cex_int_bound {
        cgen.int_bound = v;
    }
    if let Some(v) = args.cex_list_len {
        cgen.list_len = v;
    }
    if let Some(v) = args.cex_samples {
        cgen.samples = v;
    }
    if let Some(v) = args.budget {
        cgen.budget = v;
    }
    SynthConfig {
        variant,
        cgen,
        timeout: timeout.map(|t| Duration::from_secs_f64(t.max(0.0))),
        record_events: false,
    }
}

fn run_synth(args: SynthArgs) -> Result<ExitCode> {
    let mut b = load(&args.file)?;
    if let Some(n) = args.size_bound {
        b.instance.size_bound = n;
    }
    let cfg = config(&b, &args.cgen, args.variant, args.timeout);
    let r = solve(&b.instance, &cfg)?;
    let rec = Record::new(&b.instance.name, args.variant, args.cgen.seed, &r);
    if let Some(path) = &args.stats {
        let mut f = OpenOptions::new().create(true).append(true).open(path)?;
        writeln!(f, "{}", serde_json::to_string(&rec)?)?;
    }
    println!("{}: {} in {:.3}s ({} candidates)", rec.benchmark, rec.outcome, rec.wall_seconds, rec.candidates_checked);
    match r.outcome {
        SynthOutcome::Solution(sol) => {
            if args.print_solution {
                for d in &sol.defs {
                    println!("{d}");
                }
            }
            Ok(ExitCode::from(0))
        }
        SynthOutcome::Exhausted => Ok(ExitCode::from(1)),
        SynthOutcome::TimedOut => Ok(ExitCode::from(2)),
    }
}

fn run_bench(args: BenchArgs) -> Result<ExitCode> {
    let mut files: Vec<PathBuf> = fs::read_dir(&args.dir)
        .with_context(|| format!("reading {}", args.dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "bench"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no .bench files in {}", args.dir.display());
    }
    let benches = files.iter().map(|f| load(f)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for b in &benches {
        for &v in &args.variants {
            let cfg = config(b, &args.cgen, v, Some(args.timeout));
            let r = solve(&b.instance, &cfg)?;
            let rec = Record::new(&b.instance.name, v, args.cgen.seed, &r);
            println!(
                "{:<24} {:<6} {:<9} {:>8.3}s {:>8} candidates",
                rec.benchmark, rec.variant, rec.outcome, rec.wall_seconds, rec.candidates_checked
            );
            rows.push(rec);
        }
    }
    if let Some(path) = &args.csv {
        let mut w = csv::Writer::from_path(path)?;
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
        let cactus = path.with_extension("cactus.csv");
        write_cactus(&cactus, &rows, &args.variants, args.timeout)?;
    }
    Ok(ExitCode::from(0))
}

/// Number of benchmarks each variant solves within each time budget; budgets are every
/// observed solve time plus the timeout.
fn write_cactus(path: &Path, rows: &[Record], variants: &[Variant], timeout: f64) -> Result<()> {
    let mut budgets: Vec<f64> = rows.iter().filter(|r| r.outcome == "solved").map(|r| r.wall_seconds).collect();
    budgets.push(timeout);
    budgets.sort_by(f64::total_cmp);
    budgets.dedup();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["variant", "time_budget", "solved_count"])?;
    for v in variants {
        let name = v.to_string();
        for &t in &budgets {
            let n = rows.iter().filter(|r| r.variant == name && r.outcome == "solved" && r.wall_seconds <= t).count();
            w.write_record([name.clone(), format!("{t:.6}"), n.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Synth(a) => run_synth(a),
        Command::Bench(a) => run_bench(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(3)
    })
}
