use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use log::{error, info};
use relgraph_cli::{cmd_eval, cmd_extract, cmd_run_all, cmd_train, cmd_weight, PipelineConfig};

/// Learn word vectors and pattern matrices from relational graphs.
///
/// Settings are read from --config (flat `key = value` lines, keys named
/// like the flags without dashes), then overridden by flags. The effective
/// configuration is logged at startup. Set RUST_LOG=debug for per-epoch
/// output.
#[derive(Parser, Debug)]
#[command(name = "relgraph", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Count (word, word, pattern) triples in a corpus.
    Extract,
    /// Weight the counts and write the relational graph.
    Weight,
    /// Train word vectors and pattern matrices on the graph.
    Train,
    /// Score embeddings on analogy questions.
    Eval,
    /// Run every stage, reusing up-to-date outputs.
    RunAll,
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Vertical corpus (surface, lemma, POS per line).
    #[arg(long, global = true, value_name = "PATH")]
    corpus: Option<String>,
    /// CoNLL-X corpus with dependency annotation.
    #[arg(long, global = true, value_name = "PATH")]
    conll: Option<String>,
    /// Pattern kind: lex, pos or dep.
    #[arg(long, global = true)]
    kind: Option<String>,
    /// Word pairs must share more than N sentences [default: 100].
    #[arg(long, global = true, value_name = "N")]
    min_pair_sent: Option<String>,
    /// Longest prefix, midfix and suffix in tokens [default: 3].
    #[arg(long, global = true, value_name = "N")]
    max_affix: Option<String>,
    /// Keep patterns seen with at least N word pairs [default: 2].
    #[arg(long, global = true, value_name = "N")]
    min_pattern_pairs: Option<String>,
    /// Skip sentences longer than N tokens [default: 128].
    #[arg(long, global = true, value_name = "N")]
    max_sentence_len: Option<String>,
    /// Lowercase lemmas while reading the corpus.
    #[arg(long, global = true)]
    lowercase: bool,
    /// Weighting: raw, ppmi, lmi, log or ent [default: raw].
    #[arg(long, global = true, value_name = "NAME")]
    measure: Option<String>,
    /// Embedding dimensionality [default: 200].
    #[arg(long, global = true, value_name = "N")]
    dim: Option<String>,
    /// Training epochs [default: 100].
    #[arg(long, global = true, value_name = "N")]
    epochs: Option<String>,
    /// Initial learning rate [default: 0.0001].
    #[arg(long, global = true, value_name = "F")]
    eta0: Option<String>,
    /// Diagonal shift added to each pattern matrix after its update [default: 0.001].
    #[arg(long, global = true, value_name = "F")]
    delta: Option<String>,
    /// Random seed [default: 0].
    #[arg(long, global = true, value_name = "N")]
    seed: Option<String>,
    /// Visit edges in stored order instead of shuffling each epoch.
    #[arg(long, global = true)]
    no_shuffle: bool,
    /// Training threads; more than one gives non-reproducible results [default: 1].
    #[arg(long, global = true, value_name = "N")]
    threads: Option<String>,
    /// Continue training from the checkpoint in the output directory.
    #[arg(long, global = true)]
    resume: bool,
    /// Analogy question file.
    #[arg(long, global = true, value_name = "PATH")]
    questions: Option<String>,
    /// Embeddings to evaluate [default: the trained ones in --out].
    #[arg(long, global = true, value_name = "PATH")]
    embeddings: Option<String>,
    /// Evaluate only categories starting with this prefix.
    #[arg(long, global = true, value_name = "PREFIX")]
    category_prefix: Option<String>,
    /// Output directory [default: out].
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,
    /// Rerun stages even when their outputs are up to date.
    #[arg(long, global = true)]
    force: bool,
}

impl Flags {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        let opts = [
            ("corpus", &self.corpus),
            ("conll", &self.conll),
            ("kind", &self.kind),
            ("min-pair-sent", &self.min_pair_sent),
            ("max-affix", &self.max_affix),
            ("min-pattern-pairs", &self.min_pattern_pairs),
            ("max-sentence-len", &self.max_sentence_len),
            ("measure", &self.measure),
            ("dim", &self.dim),
            ("epochs", &self.epochs),
            ("eta0", &self.eta0),
            ("delta", &self.delta),
            ("seed", &self.seed),
            ("threads", &self.threads),
            ("questions", &self.questions),
            ("embeddings", &self.embeddings),
            ("category-prefix", &self.category_prefix),
            ("out", &self.out),
        ];
        for (k, val) in opts {
            if let Some(val) = val {
                v.push((k, val.clone()));
            }
        }
        let switches = [
            ("lowercase", self.lowercase, "true"),
            ("shuffle", self.no_shuffle, "false"),
            ("resume", self.resume, "true"),
            ("force", self.force, "true"),
        ];
        for (k, on, val) in switches {
            if on {
                v.push((k, val.to_owned()));
            }
        }
        v
    }
}

fn config(flags: &Flags) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    if let Some(path) = &flags.config {
        cfg.apply_file(path)?;
    }
    for (k, v) in flags.overrides() {
        cfg.set(k, &v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = config(&cli.flags)?;
    info!("effective configuration:\n{}", cfg.to_config_string().trim_end());
    match cli.command {
        Command::Extract => {
            cmd_extract(&cfg)?;
        }
        Command::Weight => {
            cmd_weight(&cfg)?;
        }
        Command::Train => {
            cmd_train(&cfg)?;
        }
        Command::Eval => {
            cmd_eval(&cfg)?;
        }
        Command::RunAll => {
            cmd_run_all(&cfg)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e:#}");
            ExitCode::FAILURE
        }
    }
}
