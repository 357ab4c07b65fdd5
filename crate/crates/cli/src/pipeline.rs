use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use anyhow::{bail, Context, Result};
use log::{debug, info, warn};
use relgraph::analogy::{evaluate, load_questions, EmbeddingSet, EvalReport};
use relgraph::corpus::{AnnotatedSentence, ConllReader, VerticalReader};
use relgraph::counts::{filter_patterns, read_counts, write_counts, CountAccumulator, PairCounter};
use relgraph::graph::{read_graph, write_edges, write_pattern_dictionary, write_vocab};
use relgraph::trainer::{
    is_psd, read_checkpoint, resume, train, train_parallel, write_checkpoint, write_embeddings,
    write_pattern_matrices, EpochStats, Model, TrainReport,
};
use relgraph::weighting::{build_graph, BuildStats};
use relgraph::{PatternId, PatternKind, RelationalGraph};

use crate::config::PipelineConfig;

/// File names of every stage output inside the output directory.
#[derive(Clone, Debug)]
pub struct OutputPaths {
    pub counts: PathBuf,
    pub counts_patterns: PathBuf,
    pub edges: PathBuf,
    pub patterns: PathBuf,
    pub vocab: PathBuf,
    pub embeddings: PathBuf,
    pub matrices: PathBuf,
    pub checkpoint: PathBuf,
    pub loss: PathBuf,
    pub report_tsv: PathBuf,
    pub report_txt: PathBuf,
}

impl OutputPaths {
    pub fn new(out: &Path) -> Self {
        let p = |name: &str| out.join(name);
        OutputPaths {
            counts: p("counts.tsv"),
            counts_patterns: p("counts.patterns.tsv"),
            edges: p("graph.edges.tsv"),
            patterns: p("graph.patterns.tsv"),
            vocab: p("graph.vocab.tsv"),
            embeddings: p("embeddings.txt"),
            matrices: p("matrices.txt"),
            checkpoint: p("checkpoint.txt"),
            loss: p("loss.tsv"),
            report_tsv: p("report.tsv"),
            report_txt: p("report.txt"),
        }
    }
}

impl PipelineConfig {
    pub fn paths(&self) -> OutputPaths {
        OutputPaths::new(&self.out)
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

/// Writes through a temporary file that is renamed into place on success,
/// so an interrupted stage never leaves a complete-looking output.
fn write_atomic<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let file = File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    let mut w = BufWriter::new(file);
    body(&mut w).with_context(|| format!("writing {}", path.display()))?;
    w.flush()?;
    drop(w);
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum CorpusFormat {
    Vertical,
    Conll,
}

fn corpus_source(cfg: &PipelineConfig) -> Result<(&Path, CorpusFormat)> {
    if cfg.kind == PatternKind::Dep {
        return match &cfg.conll {
            Some(p) => Ok((p, CorpusFormat::Conll)),
            None => bail!("dependency input required: DEP patterns need a CoNLL corpus (--conll)"),
        };
    }
    match (&cfg.corpus, &cfg.conll) {
        (Some(p), _) => Ok((p, CorpusFormat::Vertical)),
        (None, Some(p)) => Ok((p, CorpusFormat::Conll)),
        (None, None) => bail!("no corpus given (--corpus or --conll)"),
    }
}

fn sentences(
    path: &Path,
    format: CorpusFormat,
    lowercase: bool,
) -> Result<Box<dyn Iterator<Item = relgraph::Result<AnnotatedSentence>>>> {
    let r = open(path)?;
    Ok(match format {
        CorpusFormat::Vertical => Box::new(VerticalReader::new(r).lowercase(lowercase)),
        CorpusFormat::Conll => Box::new(ConllReader::new(r).lowercase(lowercase)),
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExtractSummary {
    pub sentences: usize,
    pub skipped_long: usize,
    /// Ordered pairs admitted by the co-occurrence threshold.
    pub pairs: usize,
    pub patterns_before: usize,
    pub patterns_after: usize,
    pub triples: usize,
}

/// Counts pattern triples for the frequent word pairs of the corpus.
pub fn cmd_extract(cfg: &PipelineConfig) -> Result<ExtractSummary> {
    let (path, format) = corpus_source(cfg)?;
    let ctx = || format!("reading corpus {}", path.display());

    let mut counter = PairCounter::new(cfg.max_sentence_len);
    for s in sentences(path, format, cfg.lowercase)? {
        counter.observe(&s.with_context(ctx)?);
    }
    let mut summary = ExtractSummary {
        sentences: counter.sentences(),
        skipped_long: counter.skipped(),
        ..Default::default()
    };
    let pairs = counter.finish(cfg.min_pair_sentences);
    summary.pairs = pairs.len();

    let mut acc = CountAccumulator::new(pairs, cfg.kind, cfg.max_affix, cfg.max_sentence_len);
    for s in sentences(path, format, cfg.lowercase)? {
        acc.observe(&s.with_context(ctx)?).with_context(ctx)?;
    }
    let counts = acc.finish();
    summary.patterns_before = counts.patterns().len();
    let counts = filter_patterns(counts, cfg.min_pattern_pairs);
    summary.patterns_after = counts.patterns().len();
    summary.triples = counts.len();

    let paths = cfg.paths();
    let mut dict = Vec::new();
    write_atomic(&paths.counts, |w| {
        write_counts(&counts, &mut *w, &mut dict)?;
        Ok(())
    })?;
    write_atomic(&paths.counts_patterns, |w| Ok(w.write_all(&dict)?))?;

    info!(
        "extract: {} sentences read ({} over the length limit), {} ordered pairs admitted, \
         {} patterns before filtering, {} after, {} triples",
        summary.sentences,
        summary.skipped_long,
        summary.pairs,
        summary.patterns_before,
        summary.patterns_after,
        summary.triples
    );
    if summary.triples == 0 {
        warn!("extract: no triples counted; lower --min-pair-sent for small corpora");
    }
    Ok(summary)
}

/// Turns the counts into a weighted graph.
pub fn cmd_weight(cfg: &PipelineConfig) -> Result<BuildStats> {
    let paths = cfg.paths();
    let counts = read_counts(open(&paths.counts)?, open(&paths.counts_patterns)?)
        .with_context(|| format!("reading {}", paths.counts.display()))?;
    let (graph, stats) = build_graph(&counts, cfg.measure);
    save_graph(&graph, &paths)?;
    info!(
        "weight: measure {}, {} edges kept, {} dropped with non-positive weight, {} words, {} patterns",
        cfg.measure.name(),
        stats.kept,
        stats.dropped,
        graph.num_words(),
        graph.num_patterns()
    );
    if graph.is_empty() {
        warn!("weight: the graph is empty");
    }
    Ok(stats)
}

fn save_graph(graph: &RelationalGraph, paths: &OutputPaths) -> Result<()> {
    write_atomic(&paths.edges, |w| Ok(write_edges(graph, w)?))?;
    write_atomic(&paths.patterns, |w| Ok(write_pattern_dictionary(graph.patterns(), w)?))?;
    write_atomic(&paths.vocab, |w| Ok(write_vocab(graph.vocab(), w)?))?;
    Ok(())
}

pub fn load_graph(paths: &OutputPaths) -> Result<RelationalGraph> {
    read_graph(open(&paths.edges)?, open(&paths.patterns)?, Some(open(&paths.vocab)?))
        .with_context(|| format!("reading graph {}", paths.edges.display()))
}

struct LossLog {
    w: BufWriter<File>,
}

impl LossLog {
    fn open(path: &Path) -> Result<Self> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
        let f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .with_context(|| format!("opening {}", path.display()))?;
        let mut w = BufWriter::new(f);
        if fresh {
            writeln!(w, "epoch\tloss\tseconds")?;
        }
        Ok(LossLog { w })
    }

    fn record(&mut self, s: &EpochStats) -> std::io::Result<()> {
        writeln!(self.w, "{}\t{}\t{:.6}", s.epoch, s.loss, s.seconds)?;
        self.w.flush()
    }
}

fn log_psd(model: &Model) {
    let d = model.dim();
    let total = model.num_patterns();
    let psd = (0..total)
        .filter(|&l| is_psd(model.matrix(PatternId(l)), d, 1e-9))
        .count();
    info!("checkpoint at epoch {}: {psd} of {total} pattern matrices are positive semidefinite", model.epoch);
}

/// Trains word vectors and pattern matrices on the graph.
pub fn cmd_train(cfg: &PipelineConfig) -> Result<TrainReport> {
    let paths = cfg.paths();
    let graph = load_graph(&paths)?;
    let params = cfg.hyper_params();
    params.validate()?;

    let mut log = LossLog::open(&paths.loss)?;
    let mut io_err = None;
    let every = (params.epochs / 10).max(1);
    let progress = |s: &EpochStats| {
        if let Err(e) = log.record(s) {
            io_err.get_or_insert(e);
        }
        if s.epoch.is_multiple_of(every) || s.epoch == params.epochs {
            info!("epoch {}/{}: loss {:.6e} ({:.3}s)", s.epoch, params.epochs, s.loss, s.seconds);
        } else {
            debug!("epoch {}: loss {:.6e}", s.epoch, s.loss);
        }
    };

    let (model, report) = if cfg.resume && paths.checkpoint.exists() {
        if cfg.threads > 1 {
            warn!("train: resuming runs single-threaded");
        }
        let mut model = read_checkpoint(open(&paths.checkpoint)?, graph.vocab())
            .with_context(|| format!("reading {}", paths.checkpoint.display()))?;
        info!("train: resuming from epoch {}", model.epoch);
        let report = resume(&graph, &mut model, &params, progress)?;
        (model, report)
    } else if cfg.threads > 1 {
        warn!("train: {} threads; results are not reproducible", cfg.threads);
        train_parallel(&graph, &params, cfg.threads, progress)?
    } else {
        train(&graph, &params, progress)?
    };
    if let Some(e) = io_err {
        return Err(e).with_context(|| format!("writing {}", paths.loss.display()));
    }

    write_atomic(&paths.embeddings, |w| Ok(write_embeddings(&model, graph.vocab(), w)?))?;
    write_atomic(&paths.matrices, |w| {
        Ok(write_pattern_matrices(&model, graph.patterns(), w)?)
    })?;
    write_atomic(&paths.checkpoint, |w| Ok(write_checkpoint(&model, graph.vocab(), w)?))?;
    log_psd(&model);
    info!(
        "train: loss {:.6e} -> {:.6e} over {} epochs",
        report.initial_loss,
        report.final_loss,
        report.epochs.len()
    );
    Ok(report)
}

/// Scores embeddings on the analogy questions.
pub fn cmd_eval(cfg: &PipelineConfig) -> Result<EvalReport> {
    let paths = cfg.paths();
    let Some(qpath) = &cfg.questions else {
        bail!("no question file given (--questions)");
    };
    let questions = load_questions(open(qpath)?)
        .with_context(|| format!("reading questions {}", qpath.display()))?;
    let epath = cfg.embeddings.clone().unwrap_or(paths.embeddings.clone());
    let emb = EmbeddingSet::read(open(&epath)?)
        .with_context(|| format!("reading embeddings {}", epath.display()))?;
    let report = evaluate(&questions, &emb, cfg.category_prefix.as_deref());
    write_atomic(&paths.report_tsv, |w| Ok(report.write_tsv(w)?))?;
    write_atomic(&paths.report_txt, |w| Ok(report.write_text(w)?))?;
    if report.no_valid_questions() {
        warn!("eval: no valid questions");
    }
    info!(
        "eval: {} of {} attempted questions correct ({:.2}%), {} skipped",
        report.overall.correct,
        report.overall.attempted,
        100.0 * report.overall.accuracy(),
        report.skipped
    );
    Ok(report)
}

struct Stage {
    name: &'static str,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    keys: &'static [&'static str],
}

fn mtime(p: &Path) -> Option<SystemTime> {
    fs::metadata(p).and_then(|m| m.modified()).ok()
}

impl Stage {
    fn stamp_path(&self, out: &Path) -> PathBuf {
        out.join(".stamps").join(self.name)
    }

    fn is_fresh(&self, cfg: &PipelineConfig) -> bool {
        let Ok(stamp) = fs::read_to_string(self.stamp_path(&cfg.out)) else {
            return false;
        };
        if stamp != cfg.stamp(self.keys) {
            return false;
        }
        let times = |ps: &[PathBuf]| ps.iter().map(|p| mtime(p)).collect::<Option<Vec<_>>>();
        match (times(&self.inputs), times(&self.outputs)) {
            (Some(i), Some(o)) => o.iter().min() >= i.iter().max(),
            _ => false,
        }
    }

    fn mark_done(&self, cfg: &PipelineConfig) -> Result<()> {
        let path = self.stamp_path(&cfg.out);
        write_atomic(&path, |w| Ok(w.write_all(cfg.stamp(self.keys).as_bytes())?))
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunSummary {
    pub ran: Vec<&'static str>,
    pub reused: Vec<&'static str>,
    pub report: Option<EvalReport>,
}

/// Runs extract, weight, train and eval in turn, reusing stage outputs that
/// are newer than their inputs and were produced with the same settings.
pub fn cmd_run_all(cfg: &PipelineConfig) -> Result<RunSummary> {
    let (corpus, _) = corpus_source(cfg)?;
    let Some(questions) = &cfg.questions else {
        bail!("no question file given (--questions)");
    };
    let p = cfg.paths();
    let embeddings = cfg.embeddings.clone().unwrap_or(p.embeddings.clone());
    let stages = [
        Stage {
            name: "extract",
            inputs: vec![corpus.to_path_buf()],
            outputs: vec![p.counts.clone(), p.counts_patterns.clone()],
            keys: &[
                "corpus",
                "conll",
                "kind",
                "min-pair-sent",
                "max-affix",
                "min-pattern-pairs",
                "max-sentence-len",
                "lowercase",
            ],
        },
        Stage {
            name: "weight",
            inputs: vec![p.counts.clone(), p.counts_patterns.clone()],
            outputs: vec![p.edges.clone(), p.patterns.clone(), p.vocab.clone()],
            keys: &["measure"],
        },
        Stage {
            name: "train",
            inputs: vec![p.edges.clone(), p.patterns.clone(), p.vocab.clone()],
            outputs: vec![p.embeddings.clone(), p.matrices.clone(), p.checkpoint.clone()],
            keys: &["dim", "epochs", "eta0", "delta", "seed", "shuffle", "threads"],
        },
        Stage {
            name: "eval",
            inputs: vec![embeddings, questions.clone()],
            outputs: vec![p.report_tsv.clone(), p.report_txt.clone()],
            keys: &["questions", "embeddings", "category-prefix"],
        },
    ];

    let mut summary = RunSummary::default();
    for stage in &stages {
        if !cfg.force && stage.is_fresh(cfg) {
            info!("{}: outputs up to date, skipped", stage.name);
            summary.reused.push(stage.name);
            continue;
        }
        match stage.name {
            "extract" => {
                cmd_extract(cfg)?;
            }
            "weight" => {
                cmd_weight(cfg)?;
            }
            "train" => {
                cmd_train(cfg)?;
            }
            _ => summary.report = Some(cmd_eval(cfg)?),
        }
        stage.mark_done(cfg)?;
        summary.ran.push(stage.name);
    }
    if summary.report.is_none() {
        let text = fs::read_to_string(&p.report_txt)?;
        for line in text.lines() {
            info!("{line}");
        }
    }
    Ok(summary)
}
