//! Word-pair generation and sparse `h(u, v, l)` triple counts.
//!
//! Counting is per sentence: a word pair, or a `(u, v, l)` triple, adds at
//! most one to its count for each sentence it occurs in.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::{BufRead, Write};

use crate::corpus::AnnotatedSentence;
use crate::error::{parse_err, Error, Result};
use crate::graph::{
    read_pattern_dictionary, valid_word, write_pattern_dictionary, PatternId, PatternKind,
    PatternTable, Vocab, WordId,
};
use crate::patterns::{extract_dep_patterns, extract_lexical_patterns, to_pos_pattern};

pub const COUNTS_HEADER: &str = "#relgraph-counts v1";
pub const DEFAULT_MIN_PAIR_SENTENCES: u64 = 100;
pub const DEFAULT_MIN_PATTERN_PAIRS: usize = 2;
pub const DEFAULT_MAX_SENTENCE_LEN: usize = 128;

pub type Triple = (WordId, WordId, PatternId);

/// Counts sentence-level co-occurrences of unordered lemma pairs.
#[derive(Debug)]
pub struct PairCounter {
    vocab: Vocab,
    counts: HashMap<(WordId, WordId), u64>,
    max_sentence_len: usize,
    sentences: usize,
    skipped: usize,
}

impl PairCounter {
    pub fn new(max_sentence_len: usize) -> Self {
        PairCounter {
            vocab: Vocab::new(),
            counts: HashMap::new(),
            max_sentence_len,
            sentences: 0,
            skipped: 0,
        }
    }

    pub fn observe(&mut self, sentence: &AnnotatedSentence) {
        self.sentences += 1;
        if sentence.len() > self.max_sentence_len {
            self.skipped += 1;
            return;
        }
        let ids: BTreeSet<WordId> = sentence
            .lemmas()
            .filter(|l| valid_word(l))
            .map(|l| self.vocab.intern(l).expect("lemma validated"))
            .collect();
        let ids: Vec<WordId> = ids.into_iter().collect();
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                *self.counts.entry((a, b)).or_insert(0) += 1;
            }
        }
    }

    pub fn sentences(&self) -> usize {
        self.sentences
    }

    pub fn skipped(&self) -> usize {
        self.skipped
    }

    /// Sentence count of an unordered pair.
    pub fn count(&self, a: &str, b: &str) -> u64 {
        match (self.vocab.get(a), self.vocab.get(b)) {
            (Some(a), Some(b)) => self.counts.get(&(a.min(b), a.max(b))).copied().unwrap_or(0),
            _ => 0,
        }
    }

    /// Admits both orderings of every pair seen in strictly more than
    /// `min_pair_sentences` sentences.
    pub fn finish(self, min_pair_sentences: u64) -> PairSet {
        let mut pairs = HashSet::new();
        for (&(a, b), &n) in &self.counts {
            if n > min_pair_sentences {
                pairs.insert((a, b));
                pairs.insert((b, a));
            }
        }
        PairSet {
            vocab: self.vocab,
            pairs,
        }
    }
}

/// Admitted ordered word pairs, closed under swapping.
#[derive(Clone, Debug, Default)]
pub struct PairSet {
    vocab: Vocab,
    pairs: HashSet<(WordId, WordId)>,
}

impl PairSet {
    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn contains(&self, u: WordId, v: WordId) -> bool {
        self.pairs.contains(&(u, v))
    }

    pub fn contains_words(&self, u: &str, v: &str) -> bool {
        match (self.vocab.get(u), self.vocab.get(v)) {
            (Some(u), Some(v)) => self.contains(u, v),
            _ => false,
        }
    }

    /// Number of ordered pairs.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Ordered pairs as strings, sorted.
    pub fn to_words(&self) -> BTreeSet<(String, String)> {
        self.pairs
            .iter()
            .map(|&(u, v)| {
                (
                    self.vocab.word(u).unwrap().to_owned(),
                    self.vocab.word(v).unwrap().to_owned(),
                )
            })
            .collect()
    }
}

/// One pass over the corpus to find the admitted pairs.
pub fn generate_pairs<'a, I>(sentences: I, min_pair_sentences: u64, max_sentence_len: usize) -> PairSet
where
    I: IntoIterator<Item = &'a AnnotatedSentence>,
{
    let mut counter = PairCounter::new(max_sentence_len);
    for s in sentences {
        counter.observe(s);
    }
    counter.finish(min_pair_sentences)
}

/// Sparse triple counts with marginals computed at construction.
#[derive(Clone, Debug, Default)]
pub struct TripleCounts {
    vocab: Vocab,
    patterns: PatternTable,
    counts: BTreeMap<Triple, u64>,
    pair_totals: HashMap<(WordId, WordId), u64>,
    pattern_totals: Vec<u64>,
    pattern_pairs: Vec<usize>,
    total: u64,
}

impl TripleCounts {
    /// Builds counts from a sparse map. Every id must be in range and every
    /// count positive.
    pub fn from_parts(
        vocab: Vocab,
        patterns: PatternTable,
        counts: BTreeMap<Triple, u64>,
    ) -> Result<Self> {
        for (&(u, v, l), &h) in &counts {
            for w in [u, v] {
                if w.0 >= vocab.len() {
                    return Err(Error::UnknownWord(w.0));
                }
            }
            if l.0 >= patterns.len() {
                return Err(Error::UnknownPattern(l.0));
            }
            if h == 0 {
                return Err(Error::InvalidParam(format!(
                    "zero count for triple ({u}, {v}, {l})"
                )));
            }
        }
        let mut pair_totals = HashMap::new();
        let mut pattern_totals = vec![0; patterns.len()];
        let mut pattern_pairs = vec![0; patterns.len()];
        let mut total = 0;
        for (&(u, v, l), &h) in &counts {
            *pair_totals.entry((u, v)).or_insert(0) += h;
            pattern_totals[l.0] += h;
            // keys are unique, so each entry is a distinct (u, v) for l
            pattern_pairs[l.0] += 1;
            total += h;
        }
        Ok(TripleCounts {
            vocab,
            patterns,
            counts,
            pair_totals,
            pattern_totals,
            pattern_pairs,
            total,
        })
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn patterns(&self) -> &PatternTable {
        &self.patterns
    }

    /// `h(u, v, l)`, zero when absent.
    pub fn count(&self, u: WordId, v: WordId, l: PatternId) -> u64 {
        self.counts.get(&(u, v, l)).copied().unwrap_or(0)
    }

    /// `h(u, v, *)`.
    pub fn pair_total(&self, u: WordId, v: WordId) -> u64 {
        self.pair_totals.get(&(u, v)).copied().unwrap_or(0)
    }

    /// `h(*, *, l)`.
    pub fn pattern_total(&self, l: PatternId) -> u64 {
        self.pattern_totals.get(l.0).copied().unwrap_or(0)
    }

    /// `h(*, *, *)`.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct ordered pairs seen with `l`.
    pub fn distinct_pairs(&self, l: PatternId) -> usize {
        self.pattern_pairs.get(l.0).copied().unwrap_or(0)
    }

    /// Number of non-zero triples.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Triples in `(u, v, l)` id order.
    pub fn iter(&self) -> impl Iterator<Item = (Triple, u64)> + '_ {
        self.counts.iter().map(|(&t, &h)| (t, h))
    }

    pub fn raw(&self) -> &BTreeMap<Triple, u64> {
        &self.counts
    }

    /// Looks a triple up by its strings.
    pub fn lookup(&self, u: &str, v: &str, kind: PatternKind, pattern: &str) -> Option<Triple> {
        let u = self.vocab.get(u)?;
        let v = self.vocab.get(v)?;
        let p = crate::graph::Pattern::new(kind, pattern).ok()?;
        let l = self.patterns.get(&p)?;
        self.counts.contains_key(&(u, v, l)).then_some((u, v, l))
    }

    /// Triples spelled out as strings, for comparisons across id spaces.
    pub fn to_words(&self) -> BTreeMap<(String, String, String), u64> {
        self.iter()
            .map(|((u, v, l), h)| {
                let p = self.patterns.pattern(l).unwrap();
                (
                    (
                        self.vocab.word(u).unwrap().to_owned(),
                        self.vocab.word(v).unwrap().to_owned(),
                        format!("{}:{}", p.kind(), p.text()),
                    ),
                    h,
                )
            })
            .collect()
    }

    /// Drops words and patterns without any triple, renumbering the rest
    /// densely in their original order.
    pub fn compact(self) -> Self {
        let used_words: BTreeSet<WordId> = self.counts.keys().flat_map(|&(u, v, _)| [u, v]).collect();
        let used_patterns: BTreeSet<PatternId> = self.counts.keys().map(|&(_, _, l)| l).collect();

        let mut vocab = Vocab::new();
        let mut word_map = HashMap::new();
        for w in used_words {
            let id = vocab.intern(self.vocab.word(w).unwrap()).expect("word valid");
            word_map.insert(w, id);
        }
        let mut patterns = PatternTable::new();
        let mut pattern_map = HashMap::new();
        for l in used_patterns {
            let id = patterns.intern(self.patterns.pattern(l).unwrap().clone());
            pattern_map.insert(l, id);
        }
        let counts = self
            .counts
            .into_iter()
            .map(|((u, v, l), h)| ((word_map[&u], word_map[&v], pattern_map[&l]), h))
            .collect();
        TripleCounts::from_parts(vocab, patterns, counts).expect("remapped ids valid")
    }

    /// Sums two sets of counts, matching words and patterns by string.
    pub fn merge(self, other: &TripleCounts) -> Self {
        let TripleCounts {
            mut vocab,
            mut patterns,
            mut counts,
            ..
        } = self;
        for ((u, v, l), h) in other.iter() {
            let u = vocab.intern(other.vocab.word(u).unwrap()).expect("word valid");
            let v = vocab.intern(other.vocab.word(v).unwrap()).expect("word valid");
            let l = patterns.intern(other.patterns.pattern(l).unwrap().clone());
            *counts.entry((u, v, l)).or_insert(0) += h;
        }
        TripleCounts::from_parts(vocab, patterns, counts).expect("merged ids valid")
    }
}

/// Keeps only patterns seen with at least `min_distinct_pairs` distinct
/// ordered word pairs.
pub fn filter_patterns(counts: TripleCounts, min_distinct_pairs: usize) -> TripleCounts {
    let keep: Vec<bool> = (0..counts.patterns.len())
        .map(|l| counts.pattern_pairs[l] >= min_distinct_pairs)
        .collect();
    let TripleCounts {
        vocab,
        patterns,
        counts: map,
        ..
    } = counts;
    let map = map.into_iter().filter(|((_, _, l), _)| keep[l.0]).collect();
    TripleCounts::from_parts(vocab, patterns, map)
        .expect("ids unchanged")
        .compact()
}

/// Second corpus pass: counts `h(u, v, l)` for the admitted pairs.
#[derive(Debug)]
pub struct CountAccumulator {
    pairs: PairSet,
    kind: PatternKind,
    max_affix: usize,
    max_sentence_len: usize,
    patterns: PatternTable,
    counts: HashMap<Triple, u64>,
    sentences: usize,
}

impl CountAccumulator {
    pub fn new(pairs: PairSet, kind: PatternKind, max_affix: usize, max_sentence_len: usize) -> Self {
        CountAccumulator {
            pairs,
            kind,
            max_affix,
            max_sentence_len,
            patterns: PatternTable::new(),
            counts: HashMap::new(),
            sentences: 0,
        }
    }

    pub fn observe(&mut self, sentence: &AnnotatedSentence) -> Result<()> {
        if sentence.len() > self.max_sentence_len {
            return Ok(());
        }
        self.sentences += 1;
        let mut seen: HashSet<Triple> = HashSet::new();
        match self.kind {
            PatternKind::Lex | PatternKind::Pos => {
                let present: BTreeSet<WordId> = sentence
                    .lemmas()
                    .filter_map(|l| self.pairs.vocab.get(l))
                    .collect();
                let present: Vec<WordId> = present.into_iter().collect();
                for (i, &a) in present.iter().enumerate() {
                    for &b in &present[i + 1..] {
                        if !self.pairs.contains(a, b) {
                            continue;
                        }
                        let (wa, wb) = (self.word(a), self.word(b));
                        for m in extract_lexical_patterns(sentence, &wa, &wb, self.max_affix)? {
                            let pattern = match self.kind {
                                PatternKind::Pos => to_pos_pattern(&m, sentence)?,
                                _ => m.pattern,
                            };
                            let (x, y) = m.direction.orient(a, b);
                            let l = self.patterns.intern(pattern);
                            seen.insert((x, y, l));
                        }
                    }
                }
            }
            PatternKind::Dep => {
                for m in extract_dep_patterns(sentence)? {
                    let (Some(x), Some(y)) =
                        (self.pairs.vocab.get(&m.dependent), self.pairs.vocab.get(&m.head))
                    else {
                        continue;
                    };
                    if self.pairs.contains(x, y) {
                        let l = self.patterns.intern(m.pattern);
                        seen.insert((x, y, l));
                    }
                }
            }
        }
        for t in seen {
            *self.counts.entry(t).or_insert(0) += 1;
        }
        Ok(())
    }

    fn word(&self, id: WordId) -> String {
        self.pairs.vocab.word(id).unwrap().to_owned()
    }

    pub fn sentences(&self) -> usize {
        self.sentences
    }

    pub fn finish(self) -> TripleCounts {
        let counts = self.counts.into_iter().collect();
        TripleCounts::from_parts(self.pairs.vocab, self.patterns, counts)
            .expect("accumulated ids valid")
            .compact()
    }
}

/// Convenience wrapper over [`CountAccumulator`].
pub fn accumulate_counts<'a, I>(
    sentences: I,
    pairs: PairSet,
    kind: PatternKind,
    max_affix: usize,
    max_sentence_len: usize,
) -> Result<TripleCounts>
where
    I: IntoIterator<Item = &'a AnnotatedSentence>,
{
    let mut acc = CountAccumulator::new(pairs, kind, max_affix, max_sentence_len);
    for s in sentences {
        acc.observe(s)?;
    }
    Ok(acc.finish())
}

/// Writes the counts file and its pattern dictionary.
pub fn write_counts<C: Write, P: Write>(counts: &TripleCounts, mut out: C, patterns: P) -> Result<()> {
    writeln!(out, "{COUNTS_HEADER}")?;
    for ((u, v, l), h) in counts.iter() {
        let u = counts.vocab.word(u).unwrap();
        let v = counts.vocab.word(v).unwrap();
        writeln!(out, "{u}\t{v}\t{l}\t{h}")?;
    }
    out.flush()?;
    write_pattern_dictionary(&counts.patterns, patterns)
}

pub fn read_counts<C: BufRead, P: BufRead>(counts: C, patterns: P) -> Result<TripleCounts> {
    let patterns = read_pattern_dictionary(patterns)?;
    let mut vocab = Vocab::new();
    let mut map = BTreeMap::new();
    for item in crate::graph::data_lines(counts, COUNTS_HEADER)? {
        let (line, text) = item?;
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != 4 {
            return Err(parse_err(line, "expected 4 tab-separated fields"));
        }
        let u = vocab.intern(fields[0]).map_err(|e| parse_err(line, e.to_string()))?;
        let v = vocab.intern(fields[1]).map_err(|e| parse_err(line, e.to_string()))?;
        let l: usize = fields[2]
            .parse()
            .map_err(|_| parse_err(line, format!("bad pattern id {:?}", fields[2])))?;
        if l >= patterns.len() {
            return Err(parse_err(line, format!("unknown pattern id {l}")));
        }
        let h: u64 = fields[3]
            .parse()
            .map_err(|_| parse_err(line, format!("bad count {:?}", fields[3])))?;
        if h == 0 {
            return Err(parse_err(line, "counts must be positive"));
        }
        if map.insert((u, v, PatternId(l)), h).is_some() {
            return Err(parse_err(line, "duplicate triple"));
        }
    }
    TripleCounts::from_parts(vocab, patterns, map)
}
