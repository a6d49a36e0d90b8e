use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use basin_copilot::eval::{load_eval_dataset, run_evaluation, summary_text, write_report, StaticSut, DEFAULT_N_QUESTIONS};
use basin_copilot::gateway::{serve, shutdown_signal, ChatProviderKind, Config, Engine, EngineError};
use basin_copilot::index::VectorIndex;
use basin_copilot::ingest::{ingest_corpus, ChunkConfig};
use basin_copilot::provider::{Embedder, MockEmbedder, RuleJudge, MOCK_DIMENSION};
use basin_copilot::fixtures;

#[derive(Parser)]
#[command(name = "basin-copilot", version, about = "Water-resources assistant: indexing, serving, one-shot questions and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Document index commands.
    Index {
        #[command(subcommand)]
        command: IndexCommand,
    },
    /// Start the HTTP gateway.
    Serve {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `bind` from the config.
        #[arg(long)]
        bind: Option<String>,
    },
    /// Ask one question and print the answer with its references.
    Ask(AskArgs),
    /// Evaluation commands.
    Eval {
        #[command(subcommand)]
        command: EvalCommand,
    },
    /// Synthetic fixture commands.
    Fixtures {
        #[command(subcommand)]
        command: FixturesCommand,
    },
}

#[derive(Subcommand)]
enum IndexCommand {
    /// Chunk, embed and index the documents listed in a manifest.
    Build {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1000)]
        chunk_size: usize,
        #[arg(long, default_value_t = 200)]
        overlap: usize,
        #[arg(long, default_value_t = 200)]
        min_tail: usize,
        #[arg(long, default_value_t = MOCK_DIMENSION)]
        dimension: usize,
    },
}

#[derive(Args)]
struct AskArgs {
    /// Service config; `--index` and `--data` are used when absent.
    #[arg(long, conflicts_with_all = ["index", "data"])]
    config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    index: Option<PathBuf>,
    /// Dataset manifest (JSON naming the station, series and threshold CSVs).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Replay chat responses from a JSON script instead of the configured provider.
    #[arg(long)]
    script: Option<PathBuf>,
    #[arg(long)]
    session_id: Option<String>,
    /// Starter option id sent with the question.
    #[arg(long)]
    option: Option<String>,
    /// Pin all timestamps (RFC 3339).
    #[arg(long)]
    fixed_clock: Option<String>,
    /// Print the answer as the same JSON the HTTP gateway returns.
    #[arg(long)]
    json: bool,
    /// Where to write the chart spec when the answer carries one.
    #[arg(long, default_value = "chart_spec.json")]
    chart_out: PathBuf,
    question: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum SutKind {
    /// Score the answers and contexts stored in the dataset.
    Static,
    /// Ask every question through the agent.
    Agent,
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Score a JSONL evaluation set and write report.json, samples.csv and summary.txt.
    Run {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = SutKind::Static)]
        sut: SutKind,
        /// Service config for `--sut agent`.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_N_QUESTIONS)]
        n_questions: usize,
    },
}

#[derive(Subcommand)]
enum FixturesCommand {
    /// Write the synthetic basin: stations, series, thresholds, corpus, eval set and demo configs.
    Gen {
        #[arg(long, default_value_t = fixtures::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Exit codes by failure class.
const EXIT_INPUT: u8 = 3;
const EXIT_STARTUP: u8 = 4;
const EXIT_PROVIDER: u8 = 5;
const EXIT_IO: u8 = 6;

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl std::fmt::Display) -> Failure {
    Failure { code, message: message.to_string() }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let code = match &e {
            EngineError::Provider(_) => EXIT_PROVIDER,
            EngineError::Startup(_) | EngineError::Index(_) | EngineError::Dataset(_) => EXIT_STARTUP,
            EngineError::Store(_) => EXIT_IO,
            _ => EXIT_INPUT,
        };
        fail(code, e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Index { command: IndexCommand::Build { manifest, out, chunk_size, overlap, min_tail, dimension } } => {
            index_build(&manifest, &out, ChunkConfig { chunk_size, overlap, min_tail }, dimension)
        }
        Command::Serve { config, bind } => serve_cmd(&config, bind),
        Command::Ask(args) => ask(args),
        Command::Eval { command: EvalCommand::Run { dataset, out, sut, config, n_questions } } => {
            eval_run(&dataset, &out, sut, config.as_deref(), n_questions)
        }
        Command::Fixtures { command: FixturesCommand::Gen { seed, out } } => fixtures_gen(seed, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn index_build(manifest: &Path, out: &Path, cfg: ChunkConfig, dimension: usize) -> Result<(), Failure> {
    let embedder = MockEmbedder::new(dimension);
    let embedded = ingest_corpus(manifest, cfg, &embedder).map_err(|e| fail(EXIT_INPUT, e))?;
    let docs: std::collections::BTreeSet<&str> = embedded.iter().map(|e| e.chunk.doc_id.as_str()).collect();
    let n_docs = docs.len();
    let mut index = VectorIndex::new(embedder.dimension(), embedder.model_id());
    let n = index.upsert(embedded).map_err(|e| fail(EXIT_INPUT, e))?;
    index.save(out).map_err(|e| fail(EXIT_IO, e))?;
    println!("documents: {n_docs}");
    println!("chunks: {n}");
    println!("vectors: {}", index.len());
    println!("dimension: {}", index.dimension());
    println!("embed_model_id: {}", index.embed_model_id());
    println!("wrote {}", out.display());
    Ok(())
}

fn serve_cmd(config: &Path, bind: Option<String>) -> Result<(), Failure> {
    tracing_subscriber::fmt().with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into())).init();
    let mut cfg = Config::load(config).map_err(|e| fail(EXIT_STARTUP, e))?;
    if let Some(b) = bind {
        cfg.bind = b;
    }
    let bind = cfg.bind.clone();
    let engine = Arc::new(Engine::build(cfg)?);
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(|e| fail(EXIT_STARTUP, e))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&bind).await.map_err(|e| fail(EXIT_STARTUP, format!("cannot bind {bind}: {e}")))?;
        let health = engine.health();
        tracing::info!(addr = %bind, tools = health.tools, chunks = health.index.entries, stations = health.dataset.stations, "listening");
        serve(engine, listener, shutdown_signal()).await.map_err(|e| fail(EXIT_IO, e))?;
        tracing::info!("stopped");
        Ok(())
    })
}

fn ask(args: AskArgs) -> Result<(), Failure> {
    let mut cfg = match &args.config {
        Some(p) => Config::load(p).map_err(|e| fail(EXIT_STARTUP, e))?,
        None => Config::new(args.index.clone().expect("clap requires --index"), args.data.clone()),
    };
    if let Some(s) = &args.script {
        cfg.chat.provider = ChatProviderKind::Scripted;
        cfg.chat.script = Some(s.clone());
    }
    if args.fixed_clock.is_some() {
        cfg.fixed_clock = args.fixed_clock.clone();
    }
    let engine = Engine::build(cfg)?;
    let session = engine.create_session(args.session_id.as_deref())?;
    let answer = engine.send_message(&session.session_id, &args.question, args.option.as_deref())?;

    if args.json {
        println!("{}", serde_json::to_string(&answer).map_err(|e| fail(EXIT_IO, e))?);
    } else {
        println!("{}", answer.text);
        if !answer.refs.is_empty() {
            println!();
            println!("References:");
            for (i, r) in answer.refs.iter().enumerate() {
                println!("[{}] {}", i + 1, r.describe());
            }
        }
    }
    if let Some(chart) = &answer.chart {
        let bytes = serde_json::to_vec_pretty(chart).map_err(|e| fail(EXIT_IO, e))?;
        std::fs::write(&args.chart_out, bytes).map_err(|e| fail(EXIT_IO, format!("{}: {e}", args.chart_out.display())))?;
        eprintln!("chart spec written to {}", args.chart_out.display());
    }
    Ok(())
}

fn eval_run(dataset: &Path, out: &Path, sut: SutKind, config: Option<&Path>, n_questions: usize) -> Result<(), Failure> {
    let samples = load_eval_dataset(dataset).map_err(|e| fail(EXIT_INPUT, e))?;
    let report = match sut {
        SutKind::Static => run_evaluation(&samples, &StaticSut, &RuleJudge, &MockEmbedder::new(MOCK_DIMENSION), n_questions),
        SutKind::Agent => {
            let config = config.ok_or_else(|| fail(EXIT_INPUT, "--sut agent needs --config"))?;
            let mut cfg = Config::load(config).map_err(|e| fail(EXIT_STARTUP, e))?;
            cfg.eval.n_questions = n_questions;
            Engine::build(cfg)?.evaluate(&samples)
        }
    };
    std::fs::create_dir_all(out).map_err(|e| fail(EXIT_IO, format!("{}: {e}", out.display())))?;
    write_report(out, &report).map_err(|e| fail(EXIT_IO, e))?;
    print!("{}", summary_text(&report));
    Ok(())
}

fn fixtures_gen(seed: u64, out: &Path) -> Result<(), Failure> {
    let set = fixtures::write_fixtures(out, seed).map_err(|e| fail(EXIT_IO, format!("{}: {e}", out.display())))?;
    for (path, bytes) in &set.files {
        println!("{path} ({} bytes)", bytes.len());
    }
    println!("wrote {} files to {}", set.files.len(), out.display());
    Ok(())
}
