//! Word representations learnt from relational graphs.
//!
//! A relational graph links word pairs by the lexical, part-of-speech or
//! dependency patterns that join them in a corpus. The pipeline:
//!
//! 1. read an annotated corpus ([`corpus`]) and extract patterns
//!    ([`patterns`]) for frequently co-occurring word pairs;
//! 2. count `(u, v, pattern)` triples ([`counts`]) and turn the counts into
//!    edge weights ([`weighting`]);
//! 3. learn a vector per word and a matrix per pattern so that
//!    `x(u)^T G(l) x(v)` approximates each edge weight ([`trainer`]);
//! 4. score the vectors on word analogies ([`analogy`]).

pub mod analogy;
pub mod corpus;
pub mod counts;
pub mod error;
pub mod graph;
pub mod patterns;
pub mod trainer;
pub mod weighting;

pub use error::{Error, Result};
pub use graph::{Edge, Pattern, PatternId, PatternKind, RelationalGraph, Vocab, WordId};
pub use weighting::WeightMeasure;
