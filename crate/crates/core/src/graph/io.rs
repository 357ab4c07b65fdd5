//! Tab-separated on-disk formats for graphs and pattern dictionaries.

use std::io::{BufRead, Write};

use super::{Pattern, PatternId, PatternKind, PatternTable, RelationalGraph, Vocab, WordId};
use crate::error::{parse_err, Error, Result};

pub const EDGES_HEADER: &str = "#relgraph-edges v1";
pub const PATTERNS_HEADER: &str = "#relgraph-patterns v1";
pub const VOCAB_HEADER: &str = "#relgraph-vocab v1";

/// Numbered lines after a mandatory header. Line numbers are 1-based, so the
/// first data line is line 2.
pub(crate) fn data_lines<R: BufRead>(
    reader: R,
    header: &str,
) -> Result<impl Iterator<Item = Result<(usize, String)>>> {
    let mut lines = reader.lines();
    match lines.next() {
        Some(Ok(first)) if first == header => {}
        Some(Ok(first)) => {
            return Err(parse_err(
                1,
                format!("expected header {header:?}, found {first:?}"),
            ))
        }
        Some(Err(e)) => return Err(e.into()),
        None => return Err(parse_err(1, format!("missing header {header:?}"))),
    }
    Ok(lines
        .enumerate()
        .map(|(i, l)| l.map(|l| (i + 2, l)).map_err(Error::from)))
}

pub fn write_pattern_dictionary<W: Write>(patterns: &PatternTable, mut w: W) -> Result<()> {
    writeln!(w, "{PATTERNS_HEADER}")?;
    for (id, p) in patterns.iter() {
        writeln!(w, "{}\t{}\t{}", id, p.kind(), p.text())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a pattern dictionary. Ids must be dense and listed in order.
pub fn read_pattern_dictionary<R: BufRead>(r: R) -> Result<PatternTable> {
    let mut table = PatternTable::new();
    for item in data_lines(r, PATTERNS_HEADER)? {
        let (line, text) = item?;
        let fields: Vec<&str> = text.splitn(3, '\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(line, "expected 3 tab-separated fields"));
        }
        let id: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(line, format!("bad pattern id {:?}", fields[0])))?;
        if id != table.len() {
            return Err(parse_err(
                line,
                format!("pattern id {id} out of sequence (expected {})", table.len()),
            ));
        }
        let kind: PatternKind = fields[1].parse().map_err(|e: String| parse_err(line, e))?;
        let pattern = Pattern::new(kind, fields[2]).map_err(|e| parse_err(line, e.to_string()))?;
        if table.intern(pattern).0 != id {
            return Err(parse_err(line, "duplicate pattern"));
        }
    }
    Ok(table)
}

pub fn write_vocab<W: Write>(vocab: &Vocab, mut w: W) -> Result<()> {
    writeln!(w, "{VOCAB_HEADER}")?;
    for (id, word) in vocab.iter() {
        writeln!(w, "{id}\t{word}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_vocab<R: BufRead>(r: R) -> Result<Vocab> {
    let mut vocab = Vocab::new();
    for item in data_lines(r, VOCAB_HEADER)? {
        let (line, text) = item?;
        let (id, word) = text
            .split_once('\t')
            .ok_or_else(|| parse_err(line, "expected 2 tab-separated fields"))?;
        let id: usize = id
            .parse()
            .map_err(|_| parse_err(line, format!("bad word id {id:?}")))?;
        if id != vocab.len() || vocab.get(word).is_some() {
            return Err(parse_err(line, format!("word id {id} out of sequence")));
        }
        vocab
            .intern(word)
            .map_err(|e| parse_err(line, e.to_string()))?;
    }
    Ok(vocab)
}

/// Writes one edge per line: `source<TAB>target<TAB>pattern_id<TAB>weight`.
/// Weights use the shortest decimal form that parses back to the same value.
pub fn write_edges<W: Write>(graph: &RelationalGraph, mut w: W) -> Result<()> {
    writeln!(w, "{EDGES_HEADER}")?;
    let vocab = graph.vocab();
    for e in graph.edges() {
        // ids were validated on insertion
        let s = vocab.word(e.source).expect("edge source in vocab");
        let t = vocab.word(e.target).expect("edge target in vocab");
        writeln!(w, "{s}\t{t}\t{}\t{}", e.label, e.weight)?;
    }
    w.flush()?;
    Ok(())
}

/// Loads a graph from its edge file and pattern dictionary.
///
/// With a vocabulary file the word ids are taken from it (and edges naming
/// unknown words are rejected); without one, words are numbered in order of
/// first appearance in the edge file.
pub fn read_graph<E: BufRead, P: BufRead, V: BufRead>(
    edges: E,
    patterns: P,
    vocab: Option<V>,
) -> Result<RelationalGraph> {
    let patterns = read_pattern_dictionary(patterns)?;
    let fixed_vocab = vocab.is_some();
    let vocab = match vocab {
        Some(v) => read_vocab(v)?,
        None => Vocab::new(),
    };
    let mut graph = RelationalGraph::with_tables(vocab, patterns);

    for item in data_lines(edges, EDGES_HEADER)? {
        let (line, text) = item?;
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != 4 {
            return Err(parse_err(line, "expected 4 tab-separated fields"));
        }
        let mut word = |s: &str| -> Result<WordId> {
            if fixed_vocab {
                graph
                    .vocab()
                    .get(s)
                    .ok_or_else(|| parse_err(line, format!("unknown word {s:?}")))
            } else {
                graph
                    .intern_word(s)
                    .map_err(|e| parse_err(line, e.to_string()))
            }
        };
        let source = word(fields[0])?;
        let target = word(fields[1])?;
        let label: usize = fields[2]
            .parse()
            .map_err(|_| parse_err(line, format!("bad pattern id {:?}", fields[2])))?;
        if label >= graph.num_patterns() {
            return Err(parse_err(line, format!("unknown pattern id {label}")));
        }
        let weight: f64 = fields[3]
            .parse()
            .map_err(|_| parse_err(line, format!("non-numeric weight {:?}", fields[3])))?;
        graph
            .add_edge(source, target, PatternId(label), weight)
            .map_err(|e| parse_err(line, e.to_string()))?;
    }
    Ok(graph)
}
