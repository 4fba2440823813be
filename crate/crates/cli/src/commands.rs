//! Subcommands of the `mgl` binary.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use axum::http::HeaderValue;
use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use mgl_core::bk::{fetch_many, BkOptions, FetchPolicy, Snapshot};
use mgl_core::classifier::{EngineDefaults, SessionState, SystemClock};
use mgl_core::eval::{
    average_one_shot, average_one_shot_split, curve, load_news_jsonl, load_task_csv, merge_baseline, AccuracyReport,
    Axis, Dataset, TrialPlan,
};
use mgl_core::mil::{learn, LearnTask, Metarule};
use mgl_core::store::FactStore;
use mgl_core::term::{parse_program, Atom};

use crate::error::{CliError, EXIT_NETWORK, EXIT_NO_HYPOTHESIS};
use crate::http::router;
use crate::service::Service;
use crate::transport::UreqTransport;

#[derive(Debug, Parser)]
#[command(name = "mgl", version, about = "One-shot task classification with meta-interpretive learning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn a logic program from example files.
    Learn(LearnArgs),
    /// Average one-shot accuracy over repeated random trials.
    Eval(EvalArgs),
    /// Fetch or inspect the graph snapshot.
    #[command(subcommand)]
    Bk(BkCommand),
    /// Serve the JSON API.
    Serve(ServeArgs),
    /// Interactive session on stdin and stdout.
    Repl(SessionArgs),
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    /// Metarule names separated by commas, or a file of metarule definitions.
    #[arg(long)]
    pub metarules: Option<String>,
    #[arg(long)]
    pub max_clauses: Option<usize>,
    #[arg(long)]
    pub depth_limit: Option<usize>,
    /// Body predicates separated by commas.
    #[arg(long, value_delimiter = ',')]
    pub predicate_pool: Option<Vec<String>>,
    /// Constants separated by commas.
    #[arg(long, value_delimiter = ',')]
    pub constants: Option<Vec<String>>,
}

impl EngineArgs {
    fn engine(&self) -> Result<EngineDefaults, CliError> {
        let mut e = EngineDefaults::default();
        if let Some(m) = &self.metarules {
            e.metarules = metarules(m)?;
        }
        if let Some(k) = self.max_clauses {
            e.max_clauses = k;
        }
        if let Some(d) = self.depth_limit {
            e.depth_limit = d;
        }
        if let Some(p) = &self.predicate_pool {
            e.predicate_pool = p.clone();
        }
        if let Some(c) = &self.constants {
            e.constant_pool = c.clone();
        }
        Ok(e)
    }
}

#[derive(Debug, Args)]
pub struct BkArgs {
    #[arg(long, default_value_t = 20)]
    pub max_related: usize,
    #[arg(long, default_value_t = 1.0)]
    pub min_weight: f64,
    #[arg(long, default_value_t = 1)]
    pub hops: u8,
}

impl BkArgs {
    fn options(&self, split: bool) -> Result<BkOptions, CliError> {
        BkOptions::new(self.max_related, self.min_weight, self.hops, split).map_err(CliError::input)
    }
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[arg(long)]
    pub pos_file: PathBuf,
    #[arg(long)]
    pub neg_file: Option<PathBuf>,
    #[arg(long)]
    pub bk_file: PathBuf,
    /// Metarule names separated by commas, or a file of metarule definitions.
    #[arg(long, default_value = "chain")]
    pub metarules: String,
    #[arg(long, default_value_t = mgl_core::mil::DEFAULT_MAX_CLAUSES)]
    pub max_clauses: usize,
    #[arg(long, default_value_t = mgl_core::mil::DEFAULT_DEPTH_LIMIT)]
    pub depth_limit: usize,
    /// Body predicates; defaults to the predicates of the background file.
    #[arg(long, value_delimiter = ',')]
    pub predicate_pool: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub constants: Vec<String>,
    /// Also write the program to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Labelled tasks: `.csv` with a text,category header, or `.jsonl` news records.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Separate CSV to draw training examples from.
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub snapshot: PathBuf,
    #[arg(long)]
    pub target: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub n_pos: usize,
    #[arg(long, default_value_t = 1)]
    pub n_neg: usize,
    #[arg(long)]
    pub n_test_pos: Option<usize>,
    #[arg(long)]
    pub n_test_neg: Option<usize>,
    /// Write the per-trial report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Also sweep the number of training examples along this axis (pos or neg).
    #[arg(long)]
    pub curve: Option<Axis>,
    #[arg(long, default_value_t = 5)]
    pub max_count: usize,
    #[arg(long, default_value = "curve.csv")]
    pub curve_out: PathBuf,
    /// Curve CSV of another system to place beside ours.
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub bk: BkArgs,
}

#[derive(Debug, Subcommand)]
pub enum BkCommand {
    /// Query the graph endpoint for each word and merge the edges into a snapshot.
    Fetch(FetchArgs),
    /// Print the stored neighbours of a word.
    Show(ShowArgs),
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    /// Words separated by commas.
    #[arg(long, value_delimiter = ',', required = true)]
    pub words: Vec<String>,
    #[arg(long, default_value = "https://api.conceptnet.io")]
    pub endpoint: String,
    #[arg(long)]
    pub snapshot: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub timeout_secs: u64,
    #[arg(long, default_value_t = 3)]
    pub attempts: u32,
    #[command(flatten)]
    pub bk: BkArgs,
}

#[derive(Debug, Args)]
pub struct ShowArgs {
    #[arg(long)]
    pub snapshot: PathBuf,
    #[arg(long)]
    pub word: String,
}

#[derive(Debug, Args)]
pub struct SessionArgs {
    /// Session file, loaded if present and rewritten after every change.
    #[arg(long)]
    pub session_file: Option<PathBuf>,
    /// Snapshot for a new session, or a replacement for a loaded session's.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub bk: BkArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Origin allowed to call the API from a browser.
    #[arg(long)]
    pub allow_origin: Option<String>,
    #[command(flatten)]
    pub session: SessionArgs,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Learn(a) => learn_cmd(&a, out),
        Command::Eval(a) => eval_cmd(&a, out),
        Command::Bk(BkCommand::Fetch(a)) => fetch_cmd(&a, out),
        Command::Bk(BkCommand::Show(a)) => show_cmd(&a, out),
        Command::Serve(a) => serve_cmd(&a, out),
        Command::Repl(a) => {
            let service = open_session(&a)?;
            let stdin = std::io::stdin();
            crate::repl::run(&service, stdin.lock(), out).map_err(CliError::failure)
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn io_out(e: std::io::Error) -> CliError {
    CliError::failure(format!("write failed: {e}"))
}

/// Names separated by commas, or the path of a metarule file.
pub fn metarules(spec: &str) -> Result<Vec<Metarule>, CliError> {
    let path = Path::new(spec);
    if path.is_file() {
        return Metarule::parse_all(&read(path)?).map_err(|e| CliError::input(format!("{spec}: {e}")));
    }
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|name| Metarule::by_name(name).map_err(CliError::input))
        .collect()
}

fn examples(path: &Path) -> Result<Vec<Atom>, CliError> {
    let clauses = parse_program(&read(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    clauses
        .into_iter()
        .map(|c| {
            if c.is_fact() && c.head.is_ground() {
                Ok(c.head)
            } else {
                Err(CliError::input(format!("{}: examples must be ground facts", path.display())))
            }
        })
        .collect()
}

fn learn_cmd(a: &LearnArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let positives = examples(&a.pos_file)?;
    let negatives = match &a.neg_file {
        Some(p) => examples(p)?,
        None => Vec::new(),
    };
    let bk = FactStore::parse(&read(&a.bk_file)?).map_err(|e| CliError::input(format!("{}: {e}", a.bk_file.display())))?;
    let mut task = LearnTask::new(metarules(&a.metarules)?, bk, positives, negatives)
        .with_constant_pool(a.constants.clone())
        .with_max_clauses(a.max_clauses)
        .with_depth_limit(a.depth_limit);
    if let Some(pool) = &a.predicate_pool {
        task = task.with_predicate_pool(pool.clone());
    }
    let started = std::time::Instant::now();
    let hypothesis = learn(&task).map_err(CliError::input)?;
    info!("search took {:?}", started.elapsed());
    let Some(h) = hypothesis else {
        return Err(CliError {
            code: EXIT_NO_HYPOTHESIS,
            message: format!(
                "no hypothesis with at most {} clauses and depth limit {}",
                a.max_clauses, a.depth_limit
            ),
        });
    };
    let text = h.render();
    writeln!(out, "{text}").map_err(io_out)?;
    if let Some(path) = &a.out {
        std::fs::write(path, format!("{text}\n")).map_err(|e| CliError::failure(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    if path.extension().is_some_and(|e| e == "jsonl") {
        let load = load_news_jsonl(path, None).map_err(CliError::input)?;
        if load.skipped > 0 {
            warn!(
                "{}: skipped {} malformed lines (first at line {})",
                path.display(),
                load.skipped,
                load.skipped_lines[0]
            );
        }
        Ok(load.dataset)
    } else {
        load_task_csv(path).map_err(CliError::input)
    }
}

fn eval_cmd(a: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let test = load_dataset(&a.dataset)?;
    let train = a.train.as_deref().map(load_dataset).transpose()?;
    let snapshot = Snapshot::load(&a.snapshot).map_err(CliError::input)?;
    let options = a.bk.options(true)?;
    let engine = a.engine.engine()?;
    let news = a.dataset.extension().is_some_and(|e| e == "jsonl");
    let defaults = if news {
        TrialPlan::news_default(&a.target, a.seed)
    } else {
        TrialPlan::task_default(&a.target, a.seed)
    };
    let plan = TrialPlan {
        n_trials: a.trials,
        n_pos: a.n_pos,
        n_neg: a.n_neg,
        n_test_pos: a.n_test_pos.unwrap_or(defaults.n_test_pos),
        n_test_neg: a.n_test_neg.unwrap_or(defaults.n_test_neg),
        ..defaults
    };
    let evaluate = |plan: &TrialPlan| -> Result<AccuracyReport, CliError> {
        match &train {
            Some(t) => average_one_shot_split(t, &test, plan, &snapshot, &options, &engine),
            None => average_one_shot(&test, plan, &snapshot, &options, &engine),
        }
        .map_err(CliError::input)
    };

    let report = evaluate(&plan)?;
    if let Some(path) = &a.report {
        std::fs::write(path, report.render()).map_err(|e| CliError::failure(format!("{}: {e}", path.display())))?;
    }
    if let Some(axis) = a.curve {
        let (tr, te) = match &train {
            Some(t) => (t, Some(&test)),
            None => (&test, None),
        };
        let c = curve(tr, te, &plan, axis, a.max_count, &snapshot, &options, &engine).map_err(CliError::input)?;
        let write = |path: &Path, text: &str| {
            std::fs::write(path, text).map_err(|e| CliError::failure(format!("{}: {e}", path.display())))
        };
        write(&a.curve_out, &c.to_csv())?;
        write(&a.curve_out.with_extension("trials.csv"), &c.sidecar_csv())?;
        if let Some(b) = &a.baseline {
            let merged = merge_baseline(&c.rows, &read(b)?).map_err(CliError::input)?;
            write(&a.curve_out.with_extension("comparison.csv"), &merged)?;
        }
        for row in &c.rows {
            writeln!(out, "curve {}={} mean_accuracy={:.6} stddev={:.6}", axis_name(axis), row.count, row.mean_accuracy, row.stddev)
                .map_err(io_out)?;
        }
    }
    for t in &report.per_trial {
        let rule = if t.learn_failed { "(none)".to_string() } else { t.hypothesis_render.replace('\n', " ") };
        writeln!(out, "trial {} accuracy={:.6} rule: {rule}", t.trial_index, t.accuracy).map_err(io_out)?;
    }
    writeln!(out, "stddev={:.6} learn_failures={}", report.stddev(), report.failures()).map_err(io_out)?;
    writeln!(out, "mean_accuracy={:.6}", report.mean_accuracy).map_err(io_out)?;
    Ok(())
}

fn axis_name(axis: Axis) -> &'static str {
    match axis {
        Axis::Pos => "pos",
        Axis::Neg => "neg",
    }
}

fn fetch_cmd(a: &FetchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let options = a.bk.options(false)?;
    let words: Vec<String> = a.words.iter().map(|w| w.trim().to_lowercase()).filter(|w| !w.is_empty()).collect();
    if words.is_empty() {
        return Err(CliError::input("no words to fetch"));
    }
    let mut snapshot = if a.snapshot.exists() {
        Snapshot::load(&a.snapshot).map_err(CliError::input)?
    } else {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Snapshot::new(format!("conceptnet {} unix={secs}", a.endpoint))
    };
    let transport = UreqTransport::new(Duration::from_secs(a.timeout_secs));
    let mut policy = FetchPolicy::default();
    policy.retry.attempts = a.attempts.max(1);
    let report = fetch_many(&words, &a.endpoint, &options, &transport, &policy);
    if let Some(e) = report.failures.iter().find(|e| e.is_network()) {
        return Err(CliError {
            code: EXIT_NETWORK,
            message: format!("{e}; snapshot not written"),
        });
    }
    for e in &report.failures {
        warn!("{e}");
    }
    report.merge_into(&mut snapshot);
    snapshot
        .save(&a.snapshot)
        .map_err(|e| CliError::failure(format!("{}: {e}", a.snapshot.display())))?;
    let edges: usize = report.fetched.iter().map(|(_, e)| e.len()).sum();
    writeln!(
        out,
        "fetched {} words, {} edges, {} failures; snapshot has {} edges",
        report.fetched.len(),
        edges,
        report.failures.len(),
        snapshot.len()
    )
    .map_err(io_out)
}

fn show_cmd(a: &ShowArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let snapshot = Snapshot::load(&a.snapshot).map_err(CliError::input)?;
    let word = a.word.trim().to_lowercase();
    if !snapshot.knows(&word) {
        return Err(CliError::input(format!("`{word}` is not in the snapshot")));
    }
    for (other, weight) in snapshot.neighbors(&word) {
        writeln!(out, "{word} {other} {weight:?}").map_err(io_out)?;
    }
    Ok(())
}

/// Loads the session file if it exists, otherwise starts a session on the
/// given snapshot.
pub fn open_session(a: &SessionArgs) -> Result<Service, CliError> {
    let snapshot_path = a
        .snapshot
        .as_ref()
        .map(|p| std::fs::canonicalize(p).map_err(|e| CliError::input(format!("{}: {e}", p.display()))))
        .transpose()?;
    let existing = a.session_file.as_ref().filter(|p| p.exists());
    let mut state = match existing {
        Some(path) => SessionState::load(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?,
        None => {
            let Some(sp) = &snapshot_path else {
                return Err(CliError::input("a new session needs --snapshot"));
            };
            let snapshot = Snapshot::load(sp).map_err(CliError::input)?;
            SessionState::new(snapshot, a.bk.options(false)?, a.engine.engine()?)
        }
    };
    if let Some(sp) = snapshot_path {
        if existing.is_some() {
            state.snapshot = Snapshot::load(&sp).map_err(CliError::input)?;
        }
        state.snapshot_path = Some(sp.display().to_string());
    }
    Ok(Service::new(state, a.session_file.clone(), Box::new(SystemClock)))
}

fn serve_cmd(a: &ServeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let service = Arc::new(open_session(&a.session)?);
    let origin = a
        .allow_origin
        .as_deref()
        .map(|o| HeaderValue::from_str(o).map_err(|_| CliError::input(format!("bad origin `{o}`"))))
        .transpose()?;
    let addr: SocketAddr = format!("{}:{}", a.host, a.port)
        .parse()
        .map_err(|_| CliError::input(format!("bad address {}:{}", a.host, a.port)))?;
    let runtime = tokio::runtime::Runtime::new().map_err(CliError::failure)?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::input(format!("cannot bind {addr}: {e}")))?;
        let local = listener.local_addr().map_err(CliError::failure)?;
        writeln!(out, "listening on http://{local}").map_err(io_out)?;
        out.flush().map_err(io_out)?;
        axum::serve(listener, router(service, origin))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(CliError::failure)
    })
}
