//! Lexical, POS and dependency pattern extraction from single sentences.
//!
//! Every emitted pattern places `X` before `Y` in its text. When the two words
//! occur in the opposite order, the match carries [`Direction::Reverse`] and
//! the resulting edge runs from the word in the `X` slot to the word in the
//! `Y` slot.

use crate::corpus::AnnotatedSentence;
use crate::error::{Error, Result};
use crate::graph::{Pattern, PatternKind, SLOT_X, SLOT_Y};

pub const DEFAULT_MAX_AFFIX: usize = 3;

/// Which of the two query words fills slot `X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    /// `u` occurs first and fills `X`.
    Forward,
    /// `v` occurs first and fills `X`.
    Reverse,
}

impl Direction {
    /// Returns `(x_word, y_word)` for the query pair `(u, v)`.
    pub fn orient<T>(self, u: T, v: T) -> (T, T) {
        match self {
            Direction::Forward => (u, v),
            Direction::Reverse => (v, u),
        }
    }
}

/// Token positions covered by a lexical pattern. `start..=end` is the whole
/// window; `first` and `second` are the two slot positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub first: usize,
    pub second: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexicalMatch {
    pub pattern: Pattern,
    pub direction: Direction,
    pub span: Span,
}

/// Closest occurrences of `u` and `v`, by number of intervening tokens.
/// Ties go to the leftmost `u`, then the leftmost `v`.
fn closest_occurrences(lemmas: &[&str], u: &str, v: &str) -> Result<(usize, usize)> {
    let us: Vec<usize> = positions(lemmas, u);
    let vs: Vec<usize> = positions(lemmas, v);
    if us.is_empty() {
        return Err(Error::LemmaAbsent(u.to_owned()));
    }
    if vs.is_empty() {
        return Err(Error::LemmaAbsent(v.to_owned()));
    }
    let mut best = (us[0], vs[0]);
    let mut best_gap = us[0].abs_diff(vs[0]);
    for &i in &us {
        for &j in &vs {
            let gap = i.abs_diff(j);
            if gap < best_gap {
                best = (i, j);
                best_gap = gap;
            }
        }
    }
    Ok(best)
}

fn positions(lemmas: &[&str], w: &str) -> Vec<usize> {
    lemmas
        .iter()
        .enumerate()
        .filter(|(_, l)| **l == w)
        .map(|(i, _)| i)
        .collect()
}

/// Extracts every lexical pattern for the word pair `(u, v)` in `sentence`.
///
/// The midfix between the two slots is kept whole and must not exceed
/// `max_affix` tokens. Prefixes and suffixes of every length up to
/// `max_affix` (bounded by the sentence) are combined, giving
/// `(prefix_max + 1) * (suffix_max + 1)` patterns. Windows whose context
/// lemmas cannot form a valid pattern (a literal `X`/`Y` lemma, embedded
/// whitespace) are skipped.
pub fn extract_lexical_patterns(
    sentence: &AnnotatedSentence,
    u: &str,
    v: &str,
    max_affix: usize,
) -> Result<Vec<LexicalMatch>> {
    if u == v {
        return Err(Error::InvalidParam(format!(
            "pattern extraction needs two distinct words, got {u:?} twice"
        )));
    }
    let lemmas: Vec<&str> = sentence.lemmas().collect();
    let (i, j) = closest_occurrences(&lemmas, u, v)?;
    let (first, second, direction) = if i < j {
        (i, j, Direction::Forward)
    } else {
        (j, i, Direction::Reverse)
    };
    let midfix = &lemmas[first + 1..second];
    if midfix.len() > max_affix {
        return Ok(Vec::new());
    }
    let max_prefix = max_affix.min(first);
    let max_suffix = max_affix.min(lemmas.len() - 1 - second);

    let mut out = Vec::with_capacity((max_prefix + 1) * (max_suffix + 1));
    let mut tokens: Vec<&str> = Vec::with_capacity(2 * max_affix + midfix.len() + 2);
    for p in 0..=max_prefix {
        for s in 0..=max_suffix {
            tokens.clear();
            tokens.extend_from_slice(&lemmas[first - p..first]);
            tokens.push(SLOT_X);
            tokens.extend_from_slice(midfix);
            tokens.push(SLOT_Y);
            tokens.extend_from_slice(&lemmas[second + 1..second + 1 + s]);
            if let Ok(pattern) = Pattern::from_tokens(PatternKind::Lex, &tokens) {
                out.push(LexicalMatch {
                    pattern,
                    direction,
                    span: Span {
                        start: first - p,
                        first,
                        second,
                        end: second + s,
                    },
                });
            }
        }
    }
    Ok(out)
}

/// Replaces each non-slot token of a lexical match with the POS tag of the
/// sentence token it was taken from.
pub fn to_pos_pattern(m: &LexicalMatch, sentence: &AnnotatedSentence) -> Result<Pattern> {
    let misaligned = || Error::Alignment(m.pattern.text().to_owned());
    let Span {
        start,
        first,
        second,
        end,
    } = m.span;
    let tokens = sentence.tokens();
    if !(start <= first && first < second && second <= end && end < tokens.len()) {
        return Err(misaligned());
    }
    let words: Vec<&str> = m.pattern.tokens().collect();
    if words.len() != end - start + 1 {
        return Err(misaligned());
    }
    let mut out = Vec::with_capacity(words.len());
    for (pos, word) in (start..=end).zip(words) {
        if pos == first {
            if word != SLOT_X {
                return Err(misaligned());
            }
            out.push(SLOT_X);
        } else if pos == second {
            if word != SLOT_Y {
                return Err(misaligned());
            }
            out.push(SLOT_Y);
        } else {
            if tokens[pos].lemma != word {
                return Err(misaligned());
            }
            out.push(tokens[pos].pos.as_str());
        }
    }
    Pattern::from_tokens(PatternKind::Pos, &out)
}

/// A dependency arc turned into a pattern: `dependent` fills `X`, `head`
/// fills `Y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepMatch {
    pub dependent: String,
    pub head: String,
    pub pattern: Pattern,
}

/// Treebank and TreeTagger tags used for punctuation: anything without an
/// alphanumeric character, plus a few named tags.
pub fn is_punctuation_tag(tag: &str) -> bool {
    matches!(tag, "SENT" | "PUNCT" | "PU" | "-LRB-" | "-RRB-")
        || tag.starts_with('$')
        || !tag.chars().any(char::is_alphanumeric)
}

/// One `X <rel>-of Y` pattern per non-root arc. Arcs touching punctuation,
/// or labelled `punct`, are skipped.
pub fn extract_dep_patterns(sentence: &AnnotatedSentence) -> Result<Vec<DepMatch>> {
    if !sentence.has_dependencies() {
        return Err(Error::MissingDependency);
    }
    let tokens = sentence.tokens();
    let mut out = Vec::new();
    for tok in tokens {
        let dep = tok.dependency.as_ref().ok_or(Error::MissingDependency)?;
        if dep.head == 0 || dep.relation == "punct" {
            continue;
        }
        let head = &tokens[dep.head - 1];
        if is_punctuation_tag(&tok.pos) || is_punctuation_tag(&head.pos) {
            continue;
        }
        let text = format!("{SLOT_X} {}-of {SLOT_Y}", dep.relation);
        if let Ok(pattern) = Pattern::new(PatternKind::Dep, text) {
            out.push(DepMatch {
                dependent: tok.lemma.clone(),
                head: head.lemma.clone(),
                pattern,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::AnnotatedToken;

    fn texts(ms: &[LexicalMatch]) -> Vec<&str> {
        ms.iter().map(|m| m.pattern.text()).collect()
    }

    const OSTRICH: &str = "ostrich is a large bird that lives in Africa";

    #[test]
    fn ostrich_sentence_gives_four_patterns() {
        let s = AnnotatedSentence::from_lemmas(OSTRICH).unwrap();
        let ms = extract_lexical_patterns(&s, "ostrich", "bird", 3).unwrap();
        assert_eq!(
            texts(&ms),
            [
                "X is a large Y",
                "X is a large Y that",
                "X is a large Y that lives",
                "X is a large Y that lives in",
            ]
        );
        assert!(ms.iter().all(|m| m.direction == Direction::Forward));
    }

    #[test]
    fn adjacent_words() {
        let s = AnnotatedSentence::from_lemmas("ostrich bird").unwrap();
        let ms = extract_lexical_patterns(&s, "ostrich", "bird", 3).unwrap();
        assert_eq!(texts(&ms), ["X Y"]);
    }

    #[test]
    fn reversed_order_keeps_x_first() {
        let s = AnnotatedSentence::from_lemmas(OSTRICH).unwrap();
        let ms = extract_lexical_patterns(&s, "bird", "ostrich", 3).unwrap();
        assert_eq!(ms.len(), 4);
        assert_eq!(ms[0].pattern.text(), "X is a large Y");
        assert!(ms.iter().all(|m| m.direction == Direction::Reverse));
        assert_eq!(ms[0].direction.orient("bird", "ostrich"), ("ostrich", "bird"));
    }

    #[test]
    fn long_midfix_gives_nothing() {
        let s = AnnotatedSentence::from_lemmas("a b c d e f").unwrap();
        assert!(extract_lexical_patterns(&s, "a", "f", 3).unwrap().is_empty());
        assert_eq!(extract_lexical_patterns(&s, "a", "e", 3).unwrap().len(), 2);
    }

    #[test]
    fn closest_occurrences_chosen() {
        // bird at 1 and 5, ostrich at 3 and 7: gap 1 for (3,1) and (3,5);
        // leftmost ostrich (3) then leftmost bird (1)
        let s = AnnotatedSentence::from_lemmas("a bird b ostrich c bird d ostrich").unwrap();
        let ms = extract_lexical_patterns(&s, "ostrich", "bird", 1).unwrap();
        assert_eq!(ms.len(), 4);
        assert_eq!(ms[0].span.first, 1);
        assert_eq!(ms[0].span.second, 3);
        assert_eq!(ms[0].direction, Direction::Reverse);
        assert_eq!(ms[0].pattern.text(), "X b Y");
    }

    #[test]
    fn missing_or_equal_words_rejected() {
        let s = AnnotatedSentence::from_lemmas("a b").unwrap();
        assert!(matches!(
            extract_lexical_patterns(&s, "a", "z", 3),
            Err(Error::LemmaAbsent(w)) if w == "z"
        ));
        assert!(extract_lexical_patterns(&s, "a", "a", 3).is_err());
    }

    #[test]
    fn literal_slot_lemmas_skipped() {
        let s = AnnotatedSentence::from_lemmas("X a b").unwrap();
        let ms = extract_lexical_patterns(&s, "a", "b", 3).unwrap();
        assert_eq!(texts(&ms), ["X Y"]);
    }

    fn tagged_ostrich() -> AnnotatedSentence {
        AnnotatedSentence::from_tagged(&[
            ("ostrich", "NN"),
            ("is", "VBZ"),
            ("a", "DT"),
            ("large", "JJ"),
            ("bird", "NN"),
            ("that", "WDT"),
            ("lives", "VBZ"),
            ("in", "IN"),
            ("Africa", "NP"),
        ])
        .unwrap()
    }

    #[test]
    fn pos_patterns() {
        let s = tagged_ostrich();
        let ms = extract_lexical_patterns(&s, "ostrich", "bird", 3).unwrap();
        let pos: Vec<String> = ms
            .iter()
            .map(|m| to_pos_pattern(m, &s).unwrap().text().to_owned())
            .collect();
        assert_eq!(pos[0], "X VBZ DT JJ Y");
        assert_eq!(pos[1], "X VBZ DT JJ Y WDT");
        assert_eq!(to_pos_pattern(&ms[1], &s).unwrap().kind(), PatternKind::Pos);

        let s2 = AnnotatedSentence::from_tagged(&[("ostrich", "NN"), ("bird", "NN")]).unwrap();
        let m = &extract_lexical_patterns(&s2, "ostrich", "bird", 3).unwrap()[0];
        assert_eq!(to_pos_pattern(m, &s2).unwrap().text(), "X Y");
    }

    #[test]
    fn pos_alignment_failure() {
        let s = tagged_ostrich();
        let ms = extract_lexical_patterns(&s, "ostrich", "bird", 3).unwrap();
        let other = AnnotatedSentence::from_lemmas("ostrich was a large bird that lives in Africa")
            .unwrap();
        assert!(matches!(to_pos_pattern(&ms[0], &other), Err(Error::Alignment(_))));
        let mut bad = ms[0].clone();
        bad.span.end = 40;
        assert!(matches!(to_pos_pattern(&bad, &s), Err(Error::Alignment(_))));
    }

    fn dep_sentence(rows: &[(&str, &str, usize, &str)]) -> AnnotatedSentence {
        AnnotatedSentence::new(
            rows.iter()
                .map(|&(l, p, h, r)| AnnotatedToken::new(l, l, p).with_dependency(h, r))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn dobj_arc() {
        let s = dep_sentence(&[("dog", "NN", 2, "nsubj"), ("chase", "VBD", 0, "root"), ("bird", "NN", 2, "dobj")]);
        let ms = extract_dep_patterns(&s).unwrap();
        assert_eq!(ms.len(), 2);
        assert_eq!(ms[1].dependent, "bird");
        assert_eq!(ms[1].head, "chase");
        assert_eq!(ms[1].pattern.text(), "X dobj-of Y");
        assert_eq!(ms[1].pattern.kind(), PatternKind::Dep);
    }

    #[test]
    fn root_only_and_chain() {
        let s = dep_sentence(&[("bird", "NN", 0, "root")]);
        assert!(extract_dep_patterns(&s).unwrap().is_empty());

        let s = dep_sentence(&[("a", "NN", 2, "r1"), ("b", "NN", 3, "r2"), ("c", "NN", 0, "root")]);
        let ms = extract_dep_patterns(&s).unwrap();
        let got: Vec<_> = ms
            .iter()
            .map(|m| (m.dependent.as_str(), m.head.as_str(), m.pattern.text()))
            .collect();
        assert_eq!(got, [("a", "b", "X r1-of Y"), ("b", "c", "X r2-of Y")]);
    }

    #[test]
    fn punctuation_skipped() {
        let s = dep_sentence(&[("bird", "NN", 0, "root"), (".", "SENT", 1, "p"), (",", ",", 1, "x")]);
        assert!(extract_dep_patterns(&s).unwrap().is_empty());
    }

    #[test]
    fn dependencies_required() {
        let s = AnnotatedSentence::from_lemmas("a b").unwrap();
        assert!(matches!(extract_dep_patterns(&s), Err(Error::MissingDependency)));
    }
}
