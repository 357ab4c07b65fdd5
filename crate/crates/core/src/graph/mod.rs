//! Relational graphs: words as vertices, patterns as edge labels, and
//! co-occurrence strengths as edge weights.
//!
//! An edge `(u, v, l, w)` states that pattern `l` was observed with word `u`
//! in its `X` slot and word `v` in its `Y` slot, with strength `w`. Several
//! edges may join the same pair of words as long as their labels differ.

mod io;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use self::io::{
    read_graph, read_pattern_dictionary, read_vocab, write_edges, write_pattern_dictionary,
    write_vocab, EDGES_HEADER, PATTERNS_HEADER, VOCAB_HEADER,
};
pub(crate) use self::io::data_lines;

/// Dense index of a word, assigned in first-seen order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WordId(pub usize);

/// Dense index of a pattern, assigned in first-seen order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PatternId(pub usize);

impl fmt::Display for WordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for PatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Bidirectional string table for words.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocab {
    words: Vec<String>,
    index: HashMap<String, WordId>,
}

pub(crate) fn valid_word(surface: &str) -> bool {
    !surface.is_empty() && !surface.chars().any(char::is_whitespace)
}

impl Vocab {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `surface`, adding it if unseen.
    pub fn intern(&mut self, surface: &str) -> Result<WordId> {
        if let Some(&id) = self.index.get(surface) {
            return Ok(id);
        }
        if !valid_word(surface) {
            return Err(Error::InvalidWord(surface.to_owned()));
        }
        let id = WordId(self.words.len());
        self.words.push(surface.to_owned());
        self.index.insert(surface.to_owned(), id);
        Ok(id)
    }

    pub fn get(&self, surface: &str) -> Option<WordId> {
        self.index.get(surface).copied()
    }

    pub fn word(&self, id: WordId) -> Option<&str> {
        self.words.get(id.0).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (WordId, &str)> {
        self.words
            .iter()
            .enumerate()
            .map(|(i, w)| (WordId(i), w.as_str()))
    }
}

/// The three pattern families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternKind {
    /// Lemma sequences around the two slots.
    Lex,
    /// Lexical patterns with every lemma replaced by its POS tag.
    Pos,
    /// A single dependency arc, `X <rel>-of Y`.
    Dep,
}

impl PatternKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PatternKind::Lex => "LEX",
            PatternKind::Pos => "POS",
            PatternKind::Dep => "DEP",
        }
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PatternKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "LEX" => Ok(PatternKind::Lex),
            "POS" => Ok(PatternKind::Pos),
            "DEP" => Ok(PatternKind::Dep),
            _ => Err(format!("unknown pattern kind {s:?} (expected lex, pos or dep)")),
        }
    }
}

pub const SLOT_X: &str = "X";
pub const SLOT_Y: &str = "Y";

/// A two-slot template. The text is a single-space separated token sequence
/// holding exactly one `X` token and exactly one `Y` token.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern {
    kind: PatternKind,
    text: String,
}

impl Pattern {
    pub fn new(kind: PatternKind, text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if let Err(reason) = check_pattern_text(&text) {
            return Err(Error::InvalidPattern { text, reason });
        }
        Ok(Pattern { kind, text })
    }

    /// Builds a pattern from tokens, joining them with single spaces.
    pub fn from_tokens<S: AsRef<str>>(kind: PatternKind, tokens: &[S]) -> Result<Self> {
        let text = tokens
            .iter()
            .map(AsRef::as_ref)
            .collect::<Vec<_>>()
            .join(" ");
        Self::new(kind, text)
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.text.split(' ')
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

fn check_pattern_text(text: &str) -> std::result::Result<(), &'static str> {
    if text.is_empty() {
        return Err("empty pattern");
    }
    if text.chars().any(|c| c.is_whitespace() && c != ' ') {
        return Err("only single spaces may separate tokens");
    }
    let mut xs = 0;
    let mut ys = 0;
    for token in text.split(' ') {
        match token {
            "" => return Err("tokens must be separated by exactly one space"),
            SLOT_X => xs += 1,
            SLOT_Y => ys += 1,
            _ => {}
        }
    }
    if xs != 1 || ys != 1 {
        return Err("slot markers X and Y must each occur exactly once");
    }
    Ok(())
}

/// Bidirectional table for patterns.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PatternTable {
    patterns: Vec<Pattern>,
    index: HashMap<Pattern, PatternId>,
}

impl PatternTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, pattern: Pattern) -> PatternId {
        if let Some(&id) = self.index.get(&pattern) {
            return id;
        }
        let id = PatternId(self.patterns.len());
        self.patterns.push(pattern.clone());
        self.index.insert(pattern, id);
        id
    }

    pub fn get(&self, pattern: &Pattern) -> Option<PatternId> {
        self.index.get(pattern).copied()
    }

    pub fn pattern(&self, id: PatternId) -> Option<&Pattern> {
        self.patterns.get(id.0)
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PatternId, &Pattern)> {
        self.patterns
            .iter()
            .enumerate()
            .map(|(i, p)| (PatternId(i), p))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    /// Word filling slot `X`.
    pub source: WordId,
    /// Word filling slot `Y`.
    pub target: WordId,
    pub label: PatternId,
    pub weight: f64,
}

/// Which end of an edge a word sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Source,
    Target,
}

/// Directed, labelled, weighted multigraph over words.
///
/// Edges are kept in insertion order. The per-word and per-label position
/// lists are maintained on every insertion.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RelationalGraph {
    vocab: Vocab,
    patterns: PatternTable,
    edges: Vec<Edge>,
    incident: Vec<Vec<(usize, Role)>>,
    by_label: Vec<Vec<usize>>,
    triples: HashSet<(WordId, WordId, PatternId)>,
}

impl RelationalGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts a graph over existing tables. No edges are added.
    pub fn with_tables(vocab: Vocab, patterns: PatternTable) -> Self {
        let incident = vec![Vec::new(); vocab.len()];
        let by_label = vec![Vec::new(); patterns.len()];
        RelationalGraph {
            vocab,
            patterns,
            incident,
            by_label,
            ..Default::default()
        }
    }

    pub fn intern_word(&mut self, surface: &str) -> Result<WordId> {
        let id = self.vocab.intern(surface)?;
        if id.0 == self.incident.len() {
            self.incident.push(Vec::new());
        }
        Ok(id)
    }

    pub fn intern_pattern(&mut self, pattern: Pattern) -> PatternId {
        let id = self.patterns.intern(pattern);
        if id.0 == self.by_label.len() {
            self.by_label.push(Vec::new());
        }
        id
    }

    pub fn add_edge(
        &mut self,
        source: WordId,
        target: WordId,
        label: PatternId,
        weight: f64,
    ) -> Result<()> {
        for w in [source, target] {
            if w.0 >= self.vocab.len() {
                return Err(Error::UnknownWord(w.0));
            }
        }
        if label.0 >= self.patterns.len() {
            return Err(Error::UnknownPattern(label.0));
        }
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::InvalidWeight(weight));
        }
        if !self.triples.insert((source, target, label)) {
            return Err(Error::DuplicateEdge {
                from: source.0,
                to: target.0,
                label: label.0,
            });
        }

        let pos = self.edges.len();
        self.edges.push(Edge {
            source,
            target,
            label,
            weight,
        });
        self.incident[source.0].push((pos, Role::Source));
        self.incident[target.0].push((pos, Role::Target));
        self.by_label[label.0].push(pos);
        Ok(())
    }

    /// Every edge touching `word`, tagged with the word's role, in insertion
    /// order. A self-loop appears twice, once per role.
    pub fn incident_edges(&self, word: WordId) -> Result<&[(usize, Role)]> {
        self.incident
            .get(word.0)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownWord(word.0))
    }

    pub fn label_edges(&self, label: PatternId) -> Result<&[usize]> {
        self.by_label
            .get(label.0)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownPattern(label.0))
    }

    pub fn contains(&self, source: WordId, target: WordId, label: PatternId) -> bool {
        self.triples.contains(&(source, target, label))
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn patterns(&self) -> &PatternTable {
        &self.patterns
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_words(&self) -> usize {
        self.vocab.len()
    }

    pub fn num_patterns(&self) -> usize {
        self.patterns.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}
