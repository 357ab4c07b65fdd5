//! Pipeline settings: defaults, a flat `key = value` file, and per-key
//! overrides from the command line.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use relgraph::counts::{DEFAULT_MAX_SENTENCE_LEN, DEFAULT_MIN_PAIR_SENTENCES, DEFAULT_MIN_PATTERN_PAIRS};
use relgraph::patterns::DEFAULT_MAX_AFFIX;
use relgraph::trainer::HyperParams;
use relgraph::{PatternKind, WeightMeasure};

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    pub conll: Option<PathBuf>,
    pub kind: PatternKind,
    pub min_pair_sentences: u64,
    pub max_affix: usize,
    pub min_pattern_pairs: usize,
    pub max_sentence_len: usize,
    pub lowercase: bool,
    pub measure: WeightMeasure,
    pub dim: usize,
    pub epochs: usize,
    pub eta0: f64,
    pub delta: f64,
    pub seed: u64,
    pub shuffle: bool,
    pub threads: usize,
    pub resume: bool,
    pub questions: Option<PathBuf>,
    /// Embeddings to evaluate; defaults to the trained ones in `out`.
    pub embeddings: Option<PathBuf>,
    pub category_prefix: Option<String>,
    pub out: PathBuf,
    pub force: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let hp = HyperParams::default();
        PipelineConfig {
            corpus: None,
            conll: None,
            kind: PatternKind::Lex,
            min_pair_sentences: DEFAULT_MIN_PAIR_SENTENCES,
            max_affix: DEFAULT_MAX_AFFIX,
            min_pattern_pairs: DEFAULT_MIN_PATTERN_PAIRS,
            max_sentence_len: DEFAULT_MAX_SENTENCE_LEN,
            lowercase: false,
            measure: WeightMeasure::Raw,
            dim: hp.dim,
            epochs: hp.epochs,
            eta0: hp.eta0,
            delta: hp.delta,
            seed: hp.seed,
            shuffle: hp.shuffle,
            threads: 1,
            resume: false,
            questions: None,
            embeddings: None,
            category_prefix: None,
            out: PathBuf::from("out"),
            force: false,
        }
    }
}

/// Every accepted key, in the order the effective configuration is printed.
pub const KEYS: &[&str] = &[
    "corpus",
    "conll",
    "kind",
    "min-pair-sent",
    "max-affix",
    "min-pattern-pairs",
    "max-sentence-len",
    "lowercase",
    "measure",
    "dim",
    "epochs",
    "eta0",
    "delta",
    "seed",
    "shuffle",
    "threads",
    "resume",
    "questions",
    "embeddings",
    "category-prefix",
    "out",
    "force",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow!("invalid value {value:?} for {key}: {e}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => bail!("invalid value {value:?} for {key}: expected true or false"),
    }
}

fn optional_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

impl PipelineConfig {
    /// Sets one key. Underscores and dashes are interchangeable in keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let k = key.as_str();
        match k {
            "corpus" => self.corpus = optional_path(value),
            "conll" => self.conll = optional_path(value),
            "kind" => self.kind = parse(k, value)?,
            "min-pair-sent" => self.min_pair_sentences = parse(k, value)?,
            "max-affix" => self.max_affix = parse(k, value)?,
            "min-pattern-pairs" => self.min_pattern_pairs = parse(k, value)?,
            "max-sentence-len" => self.max_sentence_len = parse(k, value)?,
            "lowercase" => self.lowercase = parse_bool(k, value)?,
            "measure" => self.measure = parse(k, value)?,
            "dim" => self.dim = parse(k, value)?,
            "epochs" => self.epochs = parse(k, value)?,
            "eta0" => self.eta0 = parse(k, value)?,
            "delta" => self.delta = parse(k, value)?,
            "seed" => self.seed = parse(k, value)?,
            "shuffle" => self.shuffle = parse_bool(k, value)?,
            "threads" => self.threads = parse(k, value)?,
            "resume" => self.resume = parse_bool(k, value)?,
            "questions" => self.questions = optional_path(value),
            "embeddings" => self.embeddings = optional_path(value),
            "category-prefix" => {
                self.category_prefix = (!value.is_empty()).then(|| value.to_owned())
            }
            "out" => self.out = PathBuf::from(value),
            "force" => self.force = parse_bool(k, value)?,
            _ => bail!("unknown configuration key {key:?}"),
        }
        Ok(())
    }

    /// Applies `key = value` lines. Blank lines and `#` comments are
    /// ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", i + 1))?;
            self.set(key, value).with_context(|| format!("line {}", i + 1))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        self.apply_text(&text)
            .with_context(|| format!("in config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_pair_sentences == 0 {
            bail!("min-pair-sent must be at least 1");
        }
        if self.min_pattern_pairs == 0 {
            bail!("min-pattern-pairs must be at least 1");
        }
        if self.max_sentence_len == 0 {
            bail!("max-sentence-len must be at least 1");
        }
        if self.threads == 0 {
            bail!("threads must be at least 1");
        }
        self.hyper_params().validate()?;
        Ok(())
    }

    pub fn hyper_params(&self) -> HyperParams {
        HyperParams {
            dim: self.dim,
            epochs: self.epochs,
            eta0: self.eta0,
            delta: self.delta,
            seed: self.seed,
            shuffle: self.shuffle,
        }
    }

    fn value_of(&self, key: &str) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        match key {
            "corpus" => path(&self.corpus),
            "conll" => path(&self.conll),
            "kind" => self.kind.as_str().to_ascii_lowercase(),
            "min-pair-sent" => self.min_pair_sentences.to_string(),
            "max-affix" => self.max_affix.to_string(),
            "min-pattern-pairs" => self.min_pattern_pairs.to_string(),
            "max-sentence-len" => self.max_sentence_len.to_string(),
            "lowercase" => self.lowercase.to_string(),
            "measure" => self.measure.name().to_owned(),
            "dim" => self.dim.to_string(),
            "epochs" => self.epochs.to_string(),
            "eta0" => self.eta0.to_string(),
            "delta" => self.delta.to_string(),
            "seed" => self.seed.to_string(),
            "shuffle" => self.shuffle.to_string(),
            "threads" => self.threads.to_string(),
            "resume" => self.resume.to_string(),
            "questions" => path(&self.questions),
            "embeddings" => path(&self.embeddings),
            "category-prefix" => self.category_prefix.clone().unwrap_or_default(),
            "out" => self.out.display().to_string(),
            "force" => self.force.to_string(),
            _ => unreachable!("key list and match arms agree"),
        }
    }

    /// The configuration as a file that [`PipelineConfig::apply_text`] reads
    /// back to an equal value.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        for key in KEYS {
            let _ = writeln!(s, "{key} = {}", self.value_of(key));
        }
        s
    }

    /// The lines of [`PipelineConfig::to_config_string`] for the given keys;
    /// used to decide whether cached stage outputs are still valid.
    pub(crate) fn stamp(&self, keys: &[&str]) -> String {
        keys.iter()
            .map(|k| format!("{k} = {}\n", self.value_of(k)))
            .collect()
    }
}
