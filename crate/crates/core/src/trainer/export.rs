//! Text exports of trained parameters and full-precision checkpoints.

use std::io::{BufRead, Write};

use super::Model;
use crate::error::{parse_err, Error, Result};
use crate::graph::{PatternId, PatternTable, Vocab};

pub const MATRICES_HEADER: &str = "#relgraph-matrices v1";
pub const CHECKPOINT_HEADER: &str = "#relgraph-checkpoint v1";

fn write_row<W: Write>(w: &mut W, values: &[f64], full: bool) -> Result<()> {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            w.write_all(b" ")?;
        }
        if full {
            write!(w, "{v}")?;
        } else {
            write!(w, "{v:.6}")?;
        }
    }
    writeln!(w)?;
    Ok(())
}

/// word2vec text format: `|V| d`, then `word v_1 ... v_d` with six decimals.
pub fn write_embeddings<W: Write>(model: &Model, vocab: &Vocab, mut w: W) -> Result<()> {
    if vocab.len() != model.num_words() {
        return Err(Error::ShapeMismatch(format!(
            "vocabulary has {} words, model has {}",
            vocab.len(),
            model.num_words()
        )));
    }
    writeln!(w, "{} {}", model.num_words(), model.dim())?;
    for (id, word) in vocab.iter() {
        write!(w, "{word} ")?;
        write_row(&mut w, model.word(id), false)?;
    }
    w.flush()?;
    Ok(())
}

/// `#relgraph-matrices v1 d=<d>`, then per pattern a `pattern_id <id>` line
/// followed by `d` rows of `d` values.
pub fn write_pattern_matrices<W: Write>(
    model: &Model,
    patterns: &PatternTable,
    mut w: W,
) -> Result<()> {
    if patterns.len() != model.num_patterns() {
        return Err(Error::ShapeMismatch(format!(
            "pattern table has {} entries, model has {}",
            patterns.len(),
            model.num_patterns()
        )));
    }
    let d = model.dim();
    writeln!(w, "{MATRICES_HEADER} d={d}")?;
    for (id, _) in patterns.iter() {
        writeln!(w, "pattern_id {id}")?;
        for row in model.matrix(id).chunks(d) {
            write_row(&mut w, row, false)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn parse_row(line: usize, text: &str, dim: usize) -> Result<Vec<f64>> {
    let vals = text
        .split(' ')
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(line, format!("bad value {t:?}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if vals.len() != dim {
        return Err(parse_err(
            line,
            format!("expected {dim} values, found {}", vals.len()),
        ));
    }
    Ok(vals)
}

struct Numbered<R> {
    lines: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Numbered<R> {
    fn new(r: R) -> Self {
        Numbered {
            lines: r.lines(),
            line: 0,
        }
    }

    fn next_line(&mut self) -> Result<Option<String>> {
        match self.lines.next() {
            None => Ok(None),
            Some(l) => {
                self.line += 1;
                Ok(Some(l?))
            }
        }
    }

    fn expect_line(&mut self, what: &str) -> Result<String> {
        self.next_line()?
            .ok_or_else(|| parse_err(self.line + 1, format!("unexpected end of file, expected {what}")))
    }
}

fn parse_dim_header(line: usize, text: &str, header: &str) -> Result<usize> {
    text.strip_prefix(header)
        .and_then(|rest| rest.trim().strip_prefix("d="))
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| parse_err(line, format!("expected \"{header} d=<d>\"")))
}

fn read_matrix_block<R: BufRead>(
    lines: &mut Numbered<R>,
    head: &str,
    dim: usize,
    expected_id: usize,
    full: &mut Vec<f64>,
) -> Result<()> {
    let id: usize = head
        .strip_prefix("pattern_id ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_err(lines.line, "expected \"pattern_id <id>\""))?;
    if id != expected_id {
        return Err(parse_err(
            lines.line,
            format!("pattern id {id} out of sequence (expected {expected_id})"),
        ));
    }
    for _ in 0..dim {
        let row = lines.expect_line("matrix row")?;
        full.extend(parse_row(lines.line, &row, dim)?);
    }
    Ok(())
}

/// Reads a pattern-matrix export back into `(dim, matrices)`; each matrix is
/// row-major.
pub fn read_pattern_matrices<R: BufRead>(r: R) -> Result<(usize, Vec<Vec<f64>>)> {
    let mut lines = Numbered::new(r);
    let header = lines.expect_line("header")?;
    let dim = parse_dim_header(1, &header, MATRICES_HEADER)?;
    let mut out = Vec::new();
    while let Some(head) = lines.next_line()? {
        let mut block = Vec::with_capacity(dim * dim);
        read_matrix_block(&mut lines, &head, dim, out.len(), &mut block)?;
        out.push(block);
    }
    Ok((dim, out))
}

/// Full-precision dump of a model, including accumulators and the epoch
/// counter, in the order: word vectors, matrices, word accumulators, matrix
/// accumulators.
pub fn write_checkpoint<W: Write>(model: &Model, vocab: &Vocab, mut w: W) -> Result<()> {
    if vocab.len() != model.num_words() {
        return Err(Error::ShapeMismatch("vocabulary size differs from model".into()));
    }
    let d = model.dim();
    writeln!(
        w,
        "{CHECKPOINT_HEADER} epoch={} d={d} words={} patterns={}",
        model.epoch,
        model.num_words(),
        model.num_patterns()
    )?;
    writeln!(w, "#x")?;
    for (id, word) in vocab.iter() {
        write!(w, "{word} ")?;
        write_row(&mut w, model.word(id), true)?;
    }
    writeln!(w, "#g")?;
    for l in 0..model.num_patterns() {
        writeln!(w, "pattern_id {l}")?;
        for row in model.matrix(PatternId(l)).chunks(d) {
            write_row(&mut w, row, true)?;
        }
    }
    writeln!(w, "#acc-x")?;
    for (id, word) in vocab.iter() {
        write!(w, "{word} ")?;
        write_row(&mut w, model.word_accumulator(id), true)?;
    }
    writeln!(w, "#acc-g")?;
    for l in 0..model.num_patterns() {
        writeln!(w, "pattern_id {l}")?;
        for row in model.matrix_accumulator(PatternId(l)).chunks(d) {
            write_row(&mut w, row, true)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn header_field(text: &str, key: &str) -> Option<usize> {
    text.split(' ')
        .find_map(|f| f.strip_prefix(key)?.strip_prefix('='))
        .and_then(|v| v.parse().ok())
}

/// Reads a checkpoint written by [`write_checkpoint`]. Word rows must follow
/// `vocab` order.
pub fn read_checkpoint<R: BufRead>(r: R, vocab: &Vocab) -> Result<Model> {
    let mut lines = Numbered::new(r);
    let header = lines.expect_line("header")?;
    if !header.starts_with(CHECKPOINT_HEADER) {
        return Err(parse_err(1, format!("expected {CHECKPOINT_HEADER:?} header")));
    }
    let field = |k: &str| header_field(&header, k).ok_or_else(|| parse_err(1, format!("missing {k}=")));
    let (epoch, d, n, m) = (field("epoch")?, field("d")?, field("words")?, field("patterns")?);
    if n != vocab.len() {
        return Err(Error::ShapeMismatch(format!(
            "checkpoint has {n} words, vocabulary has {}",
            vocab.len()
        )));
    }
    let mut model = Model::zeros(n, m, d);
    model.epoch = epoch;

    let expect_section = |lines: &mut Numbered<R>, name: &str| -> Result<()> {
        let l = lines.expect_line(name)?;
        if l != name {
            return Err(parse_err(lines.line, format!("expected section {name}")));
        }
        Ok(())
    };
    let read_words = |lines: &mut Numbered<R>, dst: &mut [f64]| -> Result<()> {
        for (id, word) in vocab.iter() {
            let text = lines.expect_line("word row")?;
            let (w, rest) = text
                .split_once(' ')
                .ok_or_else(|| parse_err(lines.line, "expected word and values"))?;
            if w != word {
                return Err(parse_err(lines.line, format!("expected word {word:?}, found {w:?}")));
            }
            let vals = parse_row(lines.line, rest, d)?;
            dst[id.0 * d..(id.0 + 1) * d].copy_from_slice(&vals);
        }
        Ok(())
    };
    let read_mats = |lines: &mut Numbered<R>, dst: &mut [f64]| -> Result<()> {
        let mut all = Vec::with_capacity(dst.len());
        for l in 0..m {
            let head = lines.expect_line("pattern_id line")?;
            read_matrix_block(lines, &head, d, l, &mut all)?;
        }
        dst.copy_from_slice(&all);
        Ok(())
    };

    let (x, g, acc_x, acc_g) = model.buffers_mut();
    expect_section(&mut lines, "#x")?;
    read_words(&mut lines, x)?;
    expect_section(&mut lines, "#g")?;
    read_mats(&mut lines, g)?;
    expect_section(&mut lines, "#acc-x")?;
    read_words(&mut lines, acc_x)?;
    expect_section(&mut lines, "#acc-g")?;
    read_mats(&mut lines, acc_g)?;
    if acc_x.iter().chain(acc_g.iter()).any(|&a| a < 0.0) {
        return Err(parse_err(lines.line, "negative accumulator"));
    }
    Ok(model)
}
