//! Co-occurrence strength measures and graph materialisation.
//!
//! All logarithms are natural. With `h = h(u,v,l)`, `N = h(*,*,*)`:
//!
//! - RAW:  `h`
//! - PPMI: `max(0, ln(h N / (h(u,v,*) h(*,*,l))))`
//! - LMI:  `(h / N) ln(h N / (h(u,v,*) h(*,*,l)))`, unclipped
//! - LOG:  `ln h`
//! - ENT:  `h exp(-H(l))`, where `H(l)` is the entropy of pattern `l`'s
//!   distribution over word pairs

use std::fmt;
use std::str::FromStr;

use crate::counts::TripleCounts;
use crate::error::{Error, Result};
use crate::graph::{PatternId, RelationalGraph, WordId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WeightMeasure {
    Raw,
    Ppmi,
    Lmi,
    Log,
    Ent,
}

impl WeightMeasure {
    pub const ALL: [WeightMeasure; 5] = [
        WeightMeasure::Raw,
        WeightMeasure::Ppmi,
        WeightMeasure::Lmi,
        WeightMeasure::Log,
        WeightMeasure::Ent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WeightMeasure::Raw => "raw",
            WeightMeasure::Ppmi => "ppmi",
            WeightMeasure::Lmi => "lmi",
            WeightMeasure::Log => "log",
            WeightMeasure::Ent => "ent",
        }
    }
}

impl fmt::Display for WeightMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeightMeasure {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let lower = s.to_ascii_lowercase();
        WeightMeasure::ALL
            .into_iter()
            .find(|m| m.name() == lower)
            .ok_or_else(|| format!("unknown measure {s:?}; valid measures: raw, ppmi, lmi, log, ent"))
    }
}

fn present(c: &TripleCounts, u: WordId, v: WordId, l: PatternId) -> Result<u64> {
    match c.count(u, v, l) {
        0 => Err(Error::AbsentTriple(u.0, v.0, l.0)),
        h => Ok(h),
    }
}

fn pmi(c: &TripleCounts, h: u64, u: WordId, v: WordId, l: PatternId) -> f64 {
    let num = h as f64 * c.total() as f64;
    let den = c.pair_total(u, v) as f64 * c.pattern_total(l) as f64;
    (num / den).ln()
}

pub fn weight_raw(c: &TripleCounts, u: WordId, v: WordId, l: PatternId) -> Result<f64> {
    present(c, u, v, l).map(|h| h as f64)
}

pub fn weight_ppmi(c: &TripleCounts, u: WordId, v: WordId, l: PatternId) -> Result<f64> {
    let h = present(c, u, v, l)?;
    Ok(pmi(c, h, u, v, l).max(0.0))
}

pub fn weight_lmi(c: &TripleCounts, u: WordId, v: WordId, l: PatternId) -> Result<f64> {
    let h = present(c, u, v, l)?;
    Ok(h as f64 / c.total() as f64 * pmi(c, h, u, v, l))
}

pub fn weight_log(c: &TripleCounts, u: WordId, v: WordId, l: PatternId) -> Result<f64> {
    present(c, u, v, l).map(|h| (h as f64).ln())
}

pub fn weight_ent(c: &TripleCounts, u: WordId, v: WordId, l: PatternId) -> Result<f64> {
    let h = present(c, u, v, l)?;
    Ok(h as f64 * (-pattern_entropy(c, l)).exp())
}

/// Entropy (nats) of `p(u,v | l) = h(u,v,l) / h(*,*,l)`. Zero for patterns
/// without counts.
pub fn pattern_entropy(c: &TripleCounts, l: PatternId) -> f64 {
    let total = c.pattern_total(l);
    if total == 0 {
        return 0.0;
    }
    entropy_of(
        c.iter()
            .filter(|&((_, _, p), _)| p == l)
            .map(|(_, h)| h),
        total,
    )
}

fn entropy_of(counts: impl Iterator<Item = u64>, total: u64) -> f64 {
    let total = total as f64;
    let h: f64 = counts
        .map(|n| {
            let p = n as f64 / total;
            p * p.ln()
        })
        .sum();
    // a single outcome gives -0.0
    (-h).max(0.0)
}

/// Evaluates one measure over many triples, caching per-pattern entropies.
pub struct Weigher<'a> {
    counts: &'a TripleCounts,
    measure: WeightMeasure,
    entropies: Vec<f64>,
}

impl<'a> Weigher<'a> {
    pub fn new(counts: &'a TripleCounts, measure: WeightMeasure) -> Self {
        let entropies = if measure == WeightMeasure::Ent {
            let mut per_pattern: Vec<Vec<u64>> = vec![Vec::new(); counts.patterns().len()];
            for ((_, _, l), h) in counts.iter() {
                per_pattern[l.0].push(h);
            }
            per_pattern
                .into_iter()
                .enumerate()
                .map(|(l, hs)| {
                    let total = counts.pattern_total(PatternId(l));
                    if total == 0 {
                        0.0
                    } else {
                        entropy_of(hs.into_iter(), total)
                    }
                })
                .collect()
        } else {
            Vec::new()
        };
        Weigher {
            counts,
            measure,
            entropies,
        }
    }

    pub fn weight(&self, u: WordId, v: WordId, l: PatternId) -> Result<f64> {
        let c = self.counts;
        match self.measure {
            WeightMeasure::Raw => weight_raw(c, u, v, l),
            WeightMeasure::Ppmi => weight_ppmi(c, u, v, l),
            WeightMeasure::Lmi => weight_lmi(c, u, v, l),
            WeightMeasure::Log => weight_log(c, u, v, l),
            WeightMeasure::Ent => {
                let h = present(c, u, v, l)?;
                Ok(h as f64 * (-self.entropies[l.0]).exp())
            }
        }
    }
}

/// Single-triple dispatch over [`WeightMeasure`].
pub fn weight(
    measure: WeightMeasure,
    c: &TripleCounts,
    u: WordId,
    v: WordId,
    l: PatternId,
) -> Result<f64> {
    match measure {
        WeightMeasure::Raw => weight_raw(c, u, v, l),
        WeightMeasure::Ppmi => weight_ppmi(c, u, v, l),
        WeightMeasure::Lmi => weight_lmi(c, u, v, l),
        WeightMeasure::Log => weight_log(c, u, v, l),
        WeightMeasure::Ent => weight_ent(c, u, v, l),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub kept: usize,
    /// Triples whose weight was zero or negative.
    pub dropped: usize,
}

/// One edge per triple with a positive weight. Words and patterns are
/// numbered in order of first appearance among the kept edges, walking the
/// triples in `(u, v, l)` id order.
pub fn build_graph(counts: &TripleCounts, measure: WeightMeasure) -> (RelationalGraph, BuildStats) {
    let weigher = Weigher::new(counts, measure);
    let mut graph = RelationalGraph::new();
    let mut stats = BuildStats::default();
    for ((u, v, l), _) in counts.iter() {
        let w = weigher.weight(u, v, l).expect("triple taken from the counts");
        if w.is_nan() || w <= 0.0 {
            stats.dropped += 1;
            continue;
        }
        let su = graph
            .intern_word(counts.vocab().word(u).unwrap())
            .expect("vocabulary words are valid");
        let sv = graph
            .intern_word(counts.vocab().word(v).unwrap())
            .expect("vocabulary words are valid");
        let sl = graph.intern_pattern(counts.patterns().pattern(l).unwrap().clone());
        graph
            .add_edge(su, sv, sl, w)
            .expect("triples are unique and weights positive");
        stats.kept += 1;
    }
    (graph, stats)
}
