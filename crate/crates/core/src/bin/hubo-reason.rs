use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hubo_reason::bench::{emit_report, load_dataset, run_batch, score, BenchRecord, EnergyTable};
use hubo_reason::ensemble::SelectionMode;
use hubo_reason::llm_client::{LlmClient, ReplayMode};
use hubo_reason::pipeline::{
    read_pool, read_samples, read_traces, Pipeline, PipelineConfig, QuestionResult, RunFiles,
    Solved, SolverChoice,
};
use hubo_reason::{Error, Result};

/// Aggregate sampled chain-of-thought reasons with higher-order binary optimization.
#[derive(Parser)]
#[command(name = "hubo-reason", version)]
struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw completions and write 01_traces.json.
    Sample(Common),
    /// Extract and merge reasons, then build the model (02_pool.json, 03_hubo.json).
    Build(Common),
    /// Solve the stored model (04_samples.json).
    Solve(Common),
    /// Select stable reasons and ask for the final answer (05_stability.json, 06_result.json).
    Rank(Common),
    /// Run every stage for each question.
    Run(Common),
    /// Run every question, score against targets, and write a report.
    Bench(BenchArgs),
    /// Score existing results and write a report.
    Report(BenchArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Pipeline config (JSON). Defaults use the offline stub models.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Questions as JSON lines.
    #[arg(long)]
    dataset: PathBuf,
    /// Only process this question id.
    #[arg(long)]
    question: Option<String>,
    /// Solver: sa-hubo, sa-qubo, brute-force, or external.
    #[arg(long)]
    solver: Option<SolverChoice>,
    /// Cassette directory for recorded model calls.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Cassette mode; defaults to replay-strict when --replay is given.
    #[arg(long)]
    mode: Option<ReplayMode>,
    /// Annealer seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Questions processed concurrently.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Root directory for per-question stage files.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// Stability threshold on inclusion frequency.
    #[arg(long)]
    tau: Option<f64>,
    /// Fraction of the weighted sample set kept as the low-energy subset.
    #[arg(long)]
    quantile: Option<f64>,
    /// Use the ground state instead of the frequency threshold.
    #[arg(long)]
    ground_state: bool,
}

#[derive(Args, Clone)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    /// JSON object mapping model name to Wh per token; overrides defaults per entry.
    #[arg(long)]
    energy_table: Option<PathBuf>,
}

fn load_config(args: &Common) -> Result<PipelineConfig> {
    let mut config = match &args.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = args.solver {
        config.solver_choice = s;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(tau) = args.tau {
        config.stability.tau = tau;
    }
    if let Some(q) = args.quantile {
        config.stability.low_energy_quantile = q;
    }
    if args.ground_state {
        config.stability.mode = SelectionMode::GroundState;
    }
    config.validate()?;
    Ok(config)
}

fn make_client(args: &Common) -> Result<LlmClient> {
    let mode = match (args.mode, &args.replay) {
        (Some(m), _) => m,
        (None, Some(_)) => ReplayMode::ReplayStrict,
        (None, None) => ReplayMode::Live,
    };
    LlmClient::new(mode, args.replay.clone())
}

fn load_records(args: &Common) -> Result<Vec<BenchRecord>> {
    let mut records = load_dataset(&args.dataset)?;
    if let Some(id) = &args.question {
        records.retain(|r| &r.id == id);
        if records.is_empty() {
            return Err(Error::Input(format!(
                "question `{id}` is not in {}",
                args.dataset.display()
            )));
        }
    }
    Ok(records)
}

fn for_each_record(
    records: &[BenchRecord],
    workers: usize,
    f: impl Fn(&BenchRecord) -> Result<()> + Sync,
) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<Result<()>> = pool.install(|| {
        use rayon::prelude::*;
        records.par_iter().map(&f).collect()
    });
    outcomes.into_iter().collect()
}

fn print_result(r: &QuestionResult, dir: &Path) {
    println!(
        "{}\tanswer={}\treasons={}\tselected={}{}\t{}",
        r.question_id,
        r.answer.as_deref().unwrap_or("<unparsed>"),
        r.num_reasons,
        r.selected_reasons.len(),
        if r.degraded { "\tdegraded" } else { "" },
        dir.display()
    );
}

fn stage(cmd: &Command, args: &Common) -> Result<()> {
    let config = load_config(args)?;
    let client = make_client(args)?;
    let pipeline = Pipeline::new(config, &client)?;
    let records = load_records(args)?;
    let hash = pipeline.config_hash().to_string();
    let out = &args.out;
    for_each_record(&records, args.workers, |rec| {
        let q = rec.to_question();
        match cmd {
            Command::Run(_) => {
                let r = pipeline.run_question(&q, Some(out))?;
                print_result(&r, RunFiles::open(out, &q.id, &hash).dir());
            }
            Command::Sample(_) => {
                let files = RunFiles::create(out, &q.id, &hash)?;
                let traces = pipeline.sample(&q)?;
                files.write_traces(&q.id, &traces)?;
                println!(
                    "{}\ttraces={}\t{}",
                    q.id,
                    traces.len(),
                    files.traces().display()
                );
            }
            Command::Build(_) => {
                let files = RunFiles::open(out, &q.id, &hash);
                let traces = read_traces(&files.traces())?;
                let pool = pipeline.build_pool(&traces)?;
                files.write_pool(&pool)?;
                if pool.is_empty() {
                    println!("{}\treasons=0\tno model built", q.id);
                } else {
                    let model = pipeline.build_model(&pool)?;
                    files.write_model(&model)?;
                    println!("{}\treasons={}\tterms={}", q.id, pool.len(), model.len());
                }
            }
            Command::Solve(_) => {
                let files = RunFiles::open(out, &q.id, &hash);
                if read_pool(&files.pool())?.is_empty() {
                    println!("{}\treasons=0\tnothing to solve", q.id);
                    return Ok(());
                }
                let model = files.read_model()?;
                let samples = pipeline.solve(&model)?;
                files.write_samples(&q.id, &samples)?;
                println!(
                    "{}\tsolver={}\tsamples={}\tmin_energy={}",
                    q.id,
                    samples.solver_id,
                    samples.len(),
                    samples.min_energy().unwrap_or(f64::NAN)
                );
            }
            Command::Rank(_) => {
                let files = RunFiles::open(out, &q.id, &hash);
                let traces = read_traces(&files.traces())?;
                let pool = read_pool(&files.pool())?;
                let solved = if pool.is_empty() {
                    None
                } else {
                    let model = files.read_model()?;
                    let samples = read_samples(&files.samples())?;
                    let report = pipeline.rank(&samples)?;
                    files.write_stability(&q.id, &report)?;
                    Some(Solved {
                        model,
                        samples,
                        report,
                    })
                };
                let r = pipeline.answer(&q, &traces, &pool, solved.as_ref())?;
                files.write_result(&r)?;
                print_result(&r, files.dir());
            }
            Command::Bench(_) | Command::Report(_) => unreachable!("handled separately"),
        }
        Ok(())
    })
}

fn energy_table(args: &BenchArgs) -> Result<EnergyTable> {
    let mut table = EnergyTable::default();
    if let Some(path) = &args.energy_table {
        let overrides = EnergyTable::load(path)?;
        for m in overrides.models() {
            table.set(m, overrides.get(m).expect("listed model"))?;
        }
    }
    Ok(table)
}

fn finish_report(
    args: &BenchArgs,
    config: &PipelineConfig,
    records: &[BenchRecord],
    results: &[QuestionResult],
) -> Result<()> {
    let table = energy_table(args)?;
    let summary = score(results, records, &table)?;
    let report_dir = args.common.out.join("report");
    let files = emit_report(&summary, results, &report_dir, config.stability.tau)?;
    println!(
        "accuracy={:.4}\tcorrect={}\ttotal={}\tunparsed={}\tdegraded={}",
        summary.accuracy,
        summary.n_correct,
        summary.n_total,
        summary.n_unparsed,
        summary.n_degraded
    );
    if let Some(stats) = &summary.reasons {
        println!(
            "reasons mean={:.1} median={} min={} max={}\tmean_selected={:.1}",
            stats.mean,
            stats.median,
            stats.min,
            stats.max,
            summary.mean_selected.unwrap_or(0.0)
        );
    }
    match summary.estimated_wh {
        Some(wh) => println!(
            "tokens={}\testimated_wh={wh:.4}",
            summary.tokens_in + summary.tokens_out
        ),
        None => println!(
            "tokens={}\testimated_wh=unavailable (model missing from energy table)",
            summary.tokens_in + summary.tokens_out
        ),
    }
    println!("report\t{}", files.summary.display());
    Ok(())
}

fn bench_cmd(args: &BenchArgs) -> Result<()> {
    let config = load_config(&args.common)?;
    let client = make_client(&args.common)?;
    let records = load_records(&args.common)?;
    let pipeline = Pipeline::new(config.clone(), &client)?;
    let results = run_batch(
        &pipeline,
        &records,
        Some(&args.common.out),
        args.common.workers,
    )?;
    finish_report(args, &config, &records, &results)
}

fn report_cmd(args: &BenchArgs) -> Result<()> {
    let config = load_config(&args.common)?;
    let hash = config.content_hash()?;
    let records = load_records(&args.common)?;
    let results = records
        .iter()
        .map(|r| RunFiles::open(&args.common.out, &r.id, &hash).read_result())
        .collect::<Result<Vec<_>>>()?;
    finish_report(args, &config, &records, &results)
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Bench(a) => bench_cmd(a),
        Command::Report(a) => report_cmd(a),
        cmd @ (Command::Sample(a)
        | Command::Build(a)
        | Command::Solve(a)
        | Command::Rank(a)
        | Command::Run(a)) => stage(cmd, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .parse_default_env()
        .init();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
