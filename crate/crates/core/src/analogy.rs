//! Word analogy evaluation: for a question `a : b :: c : ?` the prediction
//! is the vocabulary word whose vector has the highest cosine similarity to
//! `v(b) - v(a) + v(c)`, excluding `a`, `b` and `c`.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use crate::error::{parse_err, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalogyQuestion {
    pub a: String,
    pub b: String,
    pub c: String,
    pub expected: String,
    pub category: String,
}

/// Reads a question file: `: category` lines open a category, every other
/// non-blank line holds four whitespace-separated words. Words are
/// lowercased.
pub fn load_questions<R: BufRead>(reader: R) -> Result<Vec<AnalogyQuestion>> {
    let mut out = Vec::new();
    let mut category: Option<String> = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(name) = trimmed.strip_prefix(':') {
            let name = name.trim();
            if name.is_empty() {
                return Err(parse_err(lineno, "empty category name"));
            }
            category = Some(name.to_string());
            continue;
        }
        let Some(cat) = &category else {
            return Err(parse_err(lineno, "question before any category line"));
        };
        let words: Vec<String> = trimmed.split_whitespace().map(str::to_lowercase).collect();
        let [a, b, c, d] = <[String; 4]>::try_from(words).map_err(|w| {
            parse_err(lineno, format!("expected 4 words, found {}", w.len()))
        })?;
        out.push(AnalogyQuestion {
            a,
            b,
            c,
            expected: d,
            category: cat.clone(),
        });
    }
    Ok(out)
}

/// Word vectors keyed by lowercased word.
#[derive(Clone, Debug, Default)]
pub struct EmbeddingSet {
    dim: usize,
    words: Vec<String>,
    vectors: Vec<f64>,
    index: HashMap<String, usize>,
}

impl EmbeddingSet {
    pub fn new(dim: usize) -> Self {
        EmbeddingSet {
            dim,
            ..Default::default()
        }
    }

    /// Adds a word; returns `false` and keeps the earlier vector if the
    /// (lowercased) word is already present.
    pub fn insert(&mut self, word: &str, vector: &[f64]) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::ShapeMismatch(format!(
                "vector for {word:?} has {} components, expected {}",
                vector.len(),
                self.dim
            )));
        }
        let key = word.to_lowercase();
        if self.index.contains_key(&key) {
            return Ok(false);
        }
        self.index.insert(key.clone(), self.words.len());
        self.words.push(key);
        self.vectors.extend_from_slice(vector);
        Ok(true)
    }

    /// Parses the text format `n d` followed by `word v1 .. vd` rows.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let (n, dim) = loop {
            let Some((i, line)) = lines.next() else {
                return Err(parse_err(1, "missing header"));
            };
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let parsed = match f.as_slice() {
                [n, d] => n.parse::<usize>().ok().zip(d.parse::<usize>().ok()),
                _ => None,
            };
            break parsed.ok_or_else(|| parse_err(i + 1, "header must be `count dim`"))?;
        };
        let mut set = EmbeddingSet::new(dim);
        let mut rows = 0;
        let mut buf = Vec::with_capacity(dim);
        for (i, line) in lines {
            let line = line?;
            let mut f = line.split_whitespace();
            let Some(word) = f.next() else { continue };
            buf.clear();
            for tok in f {
                buf.push(
                    tok.parse::<f64>()
                        .map_err(|_| parse_err(i + 1, format!("bad number {tok:?}")))?,
                );
            }
            if buf.len() != dim {
                return Err(parse_err(
                    i + 1,
                    format!("expected {dim} components, found {}", buf.len()),
                ));
            }
            set.insert(word, &buf)?;
            rows += 1;
        }
        if rows != n {
            log::warn!("embedding header announces {n} rows, found {rows}");
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.row(i))
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }
}

/// Questions whose four words all have vectors.
pub fn filter_valid<'q>(
    questions: &'q [AnalogyQuestion],
    emb: &EmbeddingSet,
) -> Vec<&'q AnalogyQuestion> {
    questions
        .iter()
        .filter(|q| [&q.a, &q.b, &q.c, &q.expected].iter().all(|w| emb.contains(w)))
        .collect()
}

/// Words eligible as answers: the expected answers of all valid questions,
/// sorted and deduplicated.
pub fn candidate_pool(valid: &[&AnalogyQuestion]) -> Vec<String> {
    let pool: BTreeSet<&str> = valid.iter().map(|q| q.expected.as_str()).collect();
    pool.into_iter().map(String::from).collect()
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return f64::NEG_INFINITY;
    }
    dot / (na * nb)
}

/// Best candidate for `a : b :: c : ?`. `pool` must be sorted so that ties
/// resolve to the lexicographically smallest word. Returns `None` when no
/// candidate remains after excluding the question words.
pub fn answer<'p>(
    emb: &EmbeddingSet,
    pool: &'p [String],
    a: &str,
    b: &str,
    c: &str,
) -> Option<&'p str> {
    let (va, vb, vc) = (emb.get(a)?, emb.get(b)?, emb.get(c)?);
    let target: Vec<f64> = (0..emb.dim()).map(|i| vb[i] - va[i] + vc[i]).collect();
    let mut best: Option<(&str, f64)> = None;
    for w in pool {
        if w == a || w == b || w == c {
            continue;
        }
        let Some(vw) = emb.get(w) else { continue };
        let sim = cosine(&target, vw);
        if best.is_none_or(|(_, s)| sim > s) {
            best = Some((w, sim));
        }
    }
    best.map(|(w, _)| w)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CategoryResult {
    pub category: String,
    pub attempted: usize,
    pub correct: usize,
}

impl CategoryResult {
    pub fn accuracy(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.correct as f64 / self.attempted as f64
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalReport {
    /// In order of first appearance in the question file.
    pub categories: Vec<CategoryResult>,
    pub overall: CategoryResult,
    /// Questions dropped for missing vectors, an empty candidate pool or an
    /// expected answer equal to one of the question words.
    pub skipped: usize,
    pub total_questions: usize,
}

impl EvalReport {
    pub fn no_valid_questions(&self) -> bool {
        self.overall.attempted == 0
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "category\tattempted\tcorrect\taccuracy")?;
        for c in self.categories.iter().chain(std::iter::once(&self.overall)) {
            writeln!(
                w,
                "{}\t{}\t{}\t{:.4}",
                c.category,
                c.attempted,
                c.correct,
                c.accuracy()
            )?;
        }
        Ok(())
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        let width = self
            .categories
            .iter()
            .map(|c| c.category.len())
            .chain([self.overall.category.len(), "category".len()])
            .max()
            .unwrap_or(8);
        writeln!(
            w,
            "{:<width$}  {:>9}  {:>7}  {:>8}",
            "category", "attempted", "correct", "accuracy"
        )?;
        for c in self.categories.iter().chain(std::iter::once(&self.overall)) {
            writeln!(
                w,
                "{:<width$}  {:>9}  {:>7}  {:>7.2}%",
                c.category,
                c.attempted,
                c.correct,
                100.0 * c.accuracy()
            )?;
        }
        writeln!(
            w,
            "{} of {} questions skipped",
            self.skipped, self.total_questions
        )?;
        if self.no_valid_questions() {
            writeln!(w, "no valid questions")?;
        }
        Ok(())
    }
}

/// Runs every question against `emb`. Only questions whose category starts
/// with `category_prefix` (when given) are considered.
pub fn evaluate(
    questions: &[AnalogyQuestion],
    emb: &EmbeddingSet,
    category_prefix: Option<&str>,
) -> EvalReport {
    let selected: Vec<AnalogyQuestion> = questions
        .iter()
        .filter(|q| category_prefix.is_none_or(|p| q.category.starts_with(p)))
        .cloned()
        .collect();
    let valid = filter_valid(&selected, emb);
    let pool = candidate_pool(&valid);
    let mut report = EvalReport {
        total_questions: selected.len(),
        overall: CategoryResult {
            category: "overall".into(),
            ..Default::default()
        },
        ..Default::default()
    };
    let mut slot: HashMap<&str, usize> = HashMap::new();
    for q in &selected {
        if !slot.contains_key(q.category.as_str()) {
            slot.insert(&q.category, report.categories.len());
            report.categories.push(CategoryResult {
                category: q.category.clone(),
                ..Default::default()
            });
        }
    }
    for q in &valid {
        let excluded = [&q.a, &q.b, &q.c].contains(&&q.expected);
        let predicted = if excluded {
            None
        } else {
            answer(emb, &pool, &q.a, &q.b, &q.c)
        };
        let Some(p) = predicted else {
            report.skipped += 1;
            continue;
        };
        let cat = &mut report.categories[slot[q.category.as_str()]];
        cat.attempted += 1;
        report.overall.attempted += 1;
        if p == q.expected {
            cat.correct += 1;
            report.overall.correct += 1;
        }
    }
    report.skipped += selected.len() - valid.len();
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emb(rows: &[(&str, &[f64])]) -> EmbeddingSet {
        let mut e = EmbeddingSet::new(rows[0].1.len());
        for (w, v) in rows {
            e.insert(w, v).unwrap();
        }
        e
    }

    fn q(a: &str, b: &str, c: &str, d: &str, cat: &str) -> AnalogyQuestion {
        AnalogyQuestion {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            expected: d.into(),
            category: cat.into(),
        }
    }

    #[test]
    fn parses_questions() {
        let text = ": capital\nAthens Greece Oslo Norway\n\n: family\nboy girl king queen\n";
        let qs = load_questions(text.as_bytes()).unwrap();
        assert_eq!(
            qs,
            vec![
                q("athens", "greece", "oslo", "norway", "capital"),
                q("boy", "girl", "king", "queen", "family"),
            ]
        );
    }

    #[test]
    fn question_errors_carry_lines() {
        let e = load_questions("a b c d\n".as_bytes()).unwrap_err();
        assert!(e.to_string().starts_with("line 1:"), "{e}");
        let e = load_questions(": x\na b c\n".as_bytes()).unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(e.to_string().contains("found 3"), "{e}");
    }

    #[test]
    fn reads_embeddings() {
        let e = EmbeddingSet::read("2 2\nKing 1 0\nqueen 0 1\nking 5 5\n".as_bytes()).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e.get("king").unwrap(), &[1.0, 0.0]);
        let err = EmbeddingSet::read("1 3\nx 1 2\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn parallelogram_answer() {
        let e = emb(&[
            ("man", &[1.0, 0.0]),
            ("woman", &[1.0, 1.0]),
            ("king", &[3.0, 0.0]),
            ("queen", &[3.0, 1.0]),
            ("apple", &[-1.0, 0.2]),
        ]);
        let pool: Vec<String> = ["apple", "king", "man", "queen", "woman"]
            .map(String::from)
            .to_vec();
        assert_eq!(answer(&e, &pool, "man", "woman", "king"), Some("queen"));
    }

    #[test]
    fn ties_go_to_smallest_word() {
        let e = emb(&[
            ("a", &[1.0, 0.0]),
            ("b", &[1.0, 0.0]),
            ("c", &[1.0, 0.0]),
            ("zed", &[2.0, 0.0]),
            ("mid", &[3.0, 0.0]),
        ]);
        let pool: Vec<String> = ["a", "b", "c", "mid", "zed"].map(String::from).to_vec();
        assert_eq!(answer(&e, &pool, "a", "b", "c"), Some("mid"));
    }

    #[test]
    fn zero_vectors_rank_last() {
        let e = emb(&[
            ("a", &[1.0, 0.0]),
            ("b", &[1.0, 0.0]),
            ("c", &[1.0, 0.0]),
            ("aaa", &[0.0, 0.0]),
            ("far", &[-1.0, 0.0]),
        ]);
        let pool: Vec<String> = ["a", "aaa", "b", "c", "far"].map(String::from).to_vec();
        assert_eq!(answer(&e, &pool, "a", "b", "c"), Some("far"));
    }

    #[test]
    fn report_counts_and_skips() {
        let e = emb(&[
            ("man", &[1.0, 0.0]),
            ("woman", &[1.0, 1.0]),
            ("king", &[3.0, 0.0]),
            ("queen", &[3.0, 1.0]),
        ]);
        let qs = vec![
            q("man", "woman", "king", "queen", "family"),
            q("king", "queen", "man", "woman", "family"),
            q("man", "woman", "king", "prince", "family"),
            q("man", "woman", "king", "king", "gram"),
        ];
        let r = evaluate(&qs, &e, None);
        assert_eq!(r.total_questions, 4);
        assert_eq!(r.skipped, 2);
        assert_eq!(r.categories.len(), 2);
        assert_eq!((r.categories[0].attempted, r.categories[0].correct), (2, 2));
        assert_eq!(r.categories[1].attempted, 0);
        assert_eq!(r.overall.accuracy(), 1.0);

        let mut tsv = Vec::new();
        r.write_tsv(&mut tsv).unwrap();
        assert_eq!(
            String::from_utf8(tsv).unwrap(),
            "category\tattempted\tcorrect\taccuracy\n\
             family\t2\t2\t1.0000\ngram\t0\t0\t0.0000\noverall\t2\t2\t1.0000\n"
        );

        let only = evaluate(&qs, &e, Some("gr"));
        assert!(only.no_valid_questions());
        assert_eq!(only.total_questions, 1);
    }

    #[test]
    fn pool_is_the_fourth_words() {
        let qs = [
            q("athens", "greece", "tokyo", "japan", "c"),
            q("berlin", "germany", "paris", "france", "c"),
            q("man", "woman", "king", "queen", "f"),
            q("boy", "girl", "king", "queen", "f"),
        ];
        let refs: Vec<&AnalogyQuestion> = qs.iter().collect();
        assert_eq!(candidate_pool(&refs), vec!["france", "japan", "queen"]);
        assert!(candidate_pool(&[]).is_empty());
    }

    #[test]
    fn empty_inputs() {
        let r = evaluate(&[], &EmbeddingSet::new(3), None);
        assert!(r.no_valid_questions());
        let mut out = Vec::new();
        r.write_text(&mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().contains("no valid questions"));
    }
}
