//! Annotated sentences and readers for the two corpus layouts we ingest:
//! TreeTagger-style vertical files (`surface<TAB>lemma<TAB>pos`) and
//! CoNLL-X dependency files.

use std::io::{BufRead, Lines};

use crate::error::{parse_err, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dependency {
    /// 1-based index of the head token, 0 for the root.
    pub head: usize,
    pub relation: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotatedToken {
    pub surface: String,
    pub lemma: String,
    pub pos: String,
    pub dependency: Option<Dependency>,
}

impl AnnotatedToken {
    pub fn new(
        surface: impl Into<String>,
        lemma: impl Into<String>,
        pos: impl Into<String>,
    ) -> Self {
        AnnotatedToken {
            surface: surface.into(),
            lemma: lemma.into(),
            pos: pos.into(),
            dependency: None,
        }
    }

    pub fn with_dependency(mut self, head: usize, relation: impl Into<String>) -> Self {
        self.dependency = Some(Dependency {
            head,
            relation: relation.into(),
        });
        self
    }

    fn lowercase(&mut self) {
        self.surface = self.surface.to_lowercase();
        self.lemma = self.lemma.to_lowercase();
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotatedSentence {
    tokens: Vec<AnnotatedToken>,
}

impl AnnotatedSentence {
    /// Validates non-emptiness, non-empty lemma/POS fields and head ranges.
    pub fn new(tokens: Vec<AnnotatedToken>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::InvalidParam("empty sentence".into()));
        }
        let n = tokens.len();
        for t in &tokens {
            if t.lemma.is_empty() || t.pos.is_empty() {
                return Err(Error::InvalidParam(format!(
                    "token {:?} has an empty lemma or POS tag",
                    t.surface
                )));
            }
            if let Some(dep) = &t.dependency {
                if dep.head > n {
                    return Err(Error::InvalidParam(format!(
                        "head {} outside sentence of length {n}",
                        dep.head
                    )));
                }
            }
        }
        Ok(AnnotatedSentence { tokens })
    }

    /// A sentence from whitespace-separated lemmas, tagged `_`. Surface forms
    /// equal the lemmas.
    pub fn from_lemmas(text: &str) -> Result<Self> {
        Self::new(
            text.split_whitespace()
                .map(|w| AnnotatedToken::new(w, w, "_"))
                .collect(),
        )
    }

    /// A sentence from `(lemma, pos)` pairs.
    pub fn from_tagged(tagged: &[(&str, &str)]) -> Result<Self> {
        Self::new(
            tagged
                .iter()
                .map(|&(l, p)| AnnotatedToken::new(l, l, p))
                .collect(),
        )
    }

    pub fn tokens(&self) -> &[AnnotatedToken] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.lemma.as_str())
    }

    pub fn has_dependencies(&self) -> bool {
        self.tokens.iter().all(|t| t.dependency.is_some())
    }
}

/// Reader for one-token-per-line vertical corpora. A blank line ends a
/// sentence; a final sentence without a trailing blank line is still yielded.
///
/// TreeTagger writes `<unknown>` as the lemma of words it cannot lemmatise;
/// such tokens fall back to their surface form.
pub struct VerticalReader<R> {
    lines: Lines<R>,
    line_no: usize,
    lowercase: bool,
    done: bool,
}

impl<R: BufRead> VerticalReader<R> {
    pub fn new(reader: R) -> Self {
        VerticalReader {
            lines: reader.lines(),
            line_no: 0,
            lowercase: false,
            done: false,
        }
    }

    pub fn lowercase(mut self, on: bool) -> Self {
        self.lowercase = on;
        self
    }

    fn parse_token(&self, line: &str) -> Result<AnnotatedToken> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(
                self.line_no,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let (surface, lemma, pos) = (fields[0], fields[1], fields[2]);
        if surface.is_empty() || lemma.is_empty() || pos.is_empty() {
            return Err(parse_err(self.line_no, "empty field"));
        }
        let lemma = if lemma == "<unknown>" { surface } else { lemma };
        let mut tok = AnnotatedToken::new(surface, lemma, pos);
        if self.lowercase {
            tok.lowercase();
        }
        Ok(tok)
    }
}

impl<R: BufRead> Iterator for VerticalReader<R> {
    type Item = Result<AnnotatedSentence>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut tokens = Vec::new();
        loop {
            match self.lines.next() {
                None => {
                    self.done = true;
                    break;
                }
                Some(Err(e)) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
                Some(Ok(line)) => {
                    self.line_no += 1;
                    if line.trim().is_empty() {
                        if tokens.is_empty() {
                            continue;
                        }
                        break;
                    }
                    match self.parse_token(&line) {
                        Ok(t) => tokens.push(t),
                        Err(e) => {
                            self.done = true;
                            return Some(Err(e));
                        }
                    }
                }
            }
        }
        if tokens.is_empty() {
            None
        } else {
            Some(AnnotatedSentence::new(tokens).map_err(|e| parse_err(self.line_no, e.to_string())))
        }
    }
}

/// Reader for CoNLL-X dependency output (MaltParser and friends).
///
/// Columns used: ID, FORM, LEMMA, CPOSTAG, POSTAG, FEATS, HEAD, DEPREL.
/// Extra columns are ignored. A `_` lemma falls back to the form and a `_`
/// POSTAG falls back to CPOSTAG. Lines starting with `#` are comments.
pub struct ConllReader<R> {
    lines: Lines<R>,
    line_no: usize,
    lowercase: bool,
    done: bool,
}

impl<R: BufRead> ConllReader<R> {
    pub fn new(reader: R) -> Self {
        ConllReader {
            lines: reader.lines(),
            line_no: 0,
            lowercase: false,
            done: false,
        }
    }

    pub fn lowercase(mut self, on: bool) -> Self {
        self.lowercase = on;
        self
    }

    fn parse_row(&self, line: &str, expected_id: usize) -> Result<AnnotatedToken> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 8 {
            return Err(parse_err(
                self.line_no,
                format!("expected at least 8 tab-separated columns, found {}", fields.len()),
            ));
        }
        let id: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(self.line_no, format!("non-integer ID {:?}", fields[0])))?;
        if id != expected_id {
            return Err(parse_err(
                self.line_no,
                format!("token ID {id} out of sequence (expected {expected_id})"),
            ));
        }
        let head: usize = fields[6]
            .parse()
            .map_err(|_| parse_err(self.line_no, format!("non-integer HEAD {:?}", fields[6])))?;
        let form = fields[1];
        let lemma = match fields[2] {
            "_" | "" => form,
            l => l,
        };
        let pos = match fields[4] {
            "_" | "" => fields[3],
            p => p,
        };
        if form.is_empty() || pos.is_empty() || fields[7].is_empty() {
            return Err(parse_err(self.line_no, "empty FORM, POS or DEPREL"));
        }
        let mut tok = AnnotatedToken::new(form, lemma, pos).with_dependency(head, fields[7]);
        if self.lowercase {
            tok.lowercase();
        }
        Ok(tok)
    }
}

impl<R: BufRead> Iterator for ConllReader<R> {
    type Item = Result<AnnotatedSentence>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut tokens: Vec<AnnotatedToken> = Vec::new();
        // line number of each token row, for head range errors
        let mut rows = Vec::new();
        loop {
            match self.lines.next() {
                None => {
                    self.done = true;
                    break;
                }
                Some(Err(e)) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
                Some(Ok(line)) => {
                    self.line_no += 1;
                    if line.trim().is_empty() {
                        if tokens.is_empty() {
                            continue;
                        }
                        break;
                    }
                    if line.starts_with('#') {
                        continue;
                    }
                    match self.parse_row(&line, tokens.len() + 1) {
                        Ok(t) => {
                            tokens.push(t);
                            rows.push(self.line_no);
                        }
                        Err(e) => {
                            self.done = true;
                            return Some(Err(e));
                        }
                    }
                }
            }
        }
        if tokens.is_empty() {
            return None;
        }
        let n = tokens.len();
        for (t, &row) in tokens.iter().zip(&rows) {
            let head = t.dependency.as_ref().map_or(0, |d| d.head);
            if head > n {
                self.done = true;
                return Some(Err(parse_err(
                    row,
                    format!("HEAD {head} outside sentence of {n} tokens"),
                )));
            }
        }
        Some(AnnotatedSentence::new(tokens).map_err(|e| parse_err(self.line_no, e.to_string())))
    }
}
