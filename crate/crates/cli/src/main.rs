//! `hierlabel` command-line driver.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hierlabel::labeling::MethodId;
use hierlabel::pipeline::{run, PipelineError, RunConfig, Stage};

#[derive(Parser)]
#[command(name = "hierlabel", version, about = "Label hierarchical document clusterings and evaluate the labels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the config and inputs without writing anything.
    Validate(Common),
    /// Select labels for every node with each configured method.
    Label(Common),
    /// Build queries from labels.csv and score retrieval.
    Evaluate(Common),
    /// Fit the additive models on metrics.csv and group the means.
    Stats(Common),
    /// Score label coherence against the reference corpus.
    Coherence(Common),
    /// Run label, evaluate, stats and coherence in sequence.
    All(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; 1 runs sequentially.
    #[arg(long)]
    threads: Option<usize>,
    /// Comma-separated method names, overriding the config.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Maximum number of labels per node.
    #[arg(long)]
    p_cap: Option<usize>,
    /// Significance level.
    #[arg(long)]
    alpha: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Validate config and inputs without writing.
    #[arg(long)]
    dry_run: bool,
}

impl Command {
    fn split(self) -> (Stage, Common) {
        match self {
            Command::Validate(c) => (Stage::Validate, c),
            Command::Label(c) => (Stage::Label, c),
            Command::Evaluate(c) => (Stage::Evaluate, c),
            Command::Stats(c) => (Stage::Stats, c),
            Command::Coherence(c) => (Stage::Coherence, c),
            Command::All(c) => (Stage::All, c),
        }
    }
}

fn build_config(opts: &Common) -> Result<RunConfig, PipelineError> {
    let mut cfg = RunConfig::load(&opts.config)?;
    if let Some(names) = &opts.methods {
        cfg.methods = names
            .iter()
            .map(|n| {
                n.trim()
                    .parse::<MethodId>()
                    .map_err(|_| PipelineError::Config(format!("unknown method {n:?}")))
            })
            .collect::<Result<_, _>>()?;
    }
    if let Some(p) = opts.p_cap {
        cfg.p_cap = p;
    }
    if let Some(a) = opts.alpha {
        cfg.alpha = a;
    }
    if let Some(out) = &opts.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(stage: Stage, opts: &Common) -> Result<(), PipelineError> {
    let cfg = build_config(opts)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        if n == 0 {
            return Err(PipelineError::Config("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| PipelineError::Config(format!("thread pool: {e}")))?;
    let summary = pool.install(|| run(stage, &cfg, opts.dry_run))?;
    eprintln!(
        "{}: {} docs, {} terms, {} nodes, {} files written",
        stage.name(),
        summary.n_docs,
        summary.n_terms,
        summary.n_nodes,
        summary.written.len()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (stage, opts) = cli.command.split();
    match execute(stage, &opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hierlabel {}: {e}", stage.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
