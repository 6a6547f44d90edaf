//! Text preprocessing for action names and crawled description corpora.
//!
//! The pipeline is fixed: tokenize on non-alphanumeric boundaries, ASCII
//! lowercasing, stop-word removal, then rule-based suffix lemmatization.
//! Everything is intentionally crude — the point is a deterministic canonical
//! form, not linguistic accuracy — and the lemmatizer is idempotent by
//! construction (rules apply until a fixpoint).

mod embed;
mod stopwords;

pub use embed::{embed_text, rank_descriptions, EmbedError, RankedDescription, Ranking};
pub use stopwords::{Stopwords, BUILT_IN as BUILT_IN_STOPWORDS};

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::types::ActionClass;

/// Split on runs of non-alphanumeric characters and ASCII-lowercase the
/// pieces. Non-ASCII letters pass through unchanged (no Unicode folding).
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.chars().map(|c| c.to_ascii_lowercase()).collect())
        .collect()
}

/// One rewrite pass; `None` when no rule applies. Rules are ordered and the
/// suffixes are ASCII, so byte slicing below stays on char boundaries.
fn strip_suffix_once(token: &str) -> Option<String> {
    let n = token.chars().count();
    let stem_of = |suffix: &str| &token[..token.len() - suffix.len()];
    if n >= 4 && token.ends_with("ies") {
        let mut s = String::from(stem_of("ies"));
        s.push('y');
        return Some(s);
    }
    if token.ends_with("es") {
        let stem = stem_of("es");
        if stem.ends_with('s')
            || stem.ends_with('x')
            || stem.ends_with('z')
            || stem.ends_with("ch")
            || stem.ends_with("sh")
        {
            return Some(String::from(stem));
        }
    }
    if n >= 3 && token.ends_with('s') && !token.ends_with("ss") {
        return Some(String::from(stem_of("s")));
    }
    if token.ends_with("ing") && n >= 6 {
        return Some(String::from(stem_of("ing")));
    }
    if token.ends_with("ed") && n >= 5 {
        return Some(String::from(stem_of("ed")));
    }
    None
}

/// Suffix-stripping lemmatizer, run to a fixpoint so that
/// `lemmatize(lemmatize(t)) == lemmatize(t)` holds for every token.
pub fn lemmatize(token: &str) -> String {
    let mut cur = String::from(token);
    while let Some(next) = strip_suffix_once(&cur) {
        cur = next;
    }
    cur
}

/// Canonical form of an action name: tokenize, drop stop words, lemmatize,
/// rejoin with single spaces. Can be empty (a name made of stop words).
pub fn normalize_action_name(name: &str, stops: &Stopwords) -> String {
    let parts: Vec<String> = tokenize(name)
        .into_iter()
        .filter(|t| !stops.contains(t))
        .map(|t| lemmatize(&t))
        .collect();
    parts.join(" ")
}

/// Result of merging classes that share a canonical name.
#[derive(Debug, Clone, PartialEq)]
pub struct DedupOutcome {
    /// Merged classes in order of first appearance of their canonical name.
    /// Each carries the lexicographically smallest original name of its group
    /// (ties broken by smallest class id), that class's id and definition,
    /// and the concatenation of all member description lists in input order.
    pub classes: Vec<ActionClass>,
    /// For each merged class, the input indices it absorbed, in input order.
    pub members: Vec<Vec<usize>>,
}

pub fn dedup_classes(input: &[ActionClass], stops: &Stopwords) -> DedupOutcome {
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, class) in input.iter().enumerate() {
        let canon = normalize_action_name(&class.name, stops);
        groups
            .entry(canon.clone())
            .or_insert_with(|| {
                order.push(canon);
                Vec::new()
            })
            .push(i);
    }

    let mut classes = Vec::with_capacity(order.len());
    let mut members = Vec::with_capacity(order.len());
    for canon in order {
        let idxs = groups.remove(&canon).unwrap();
        let rep = *idxs
            .iter()
            .min_by(|&&a, &&b| {
                input[a].name.cmp(&input[b].name).then(input[a].class_id.cmp(&input[b].class_id))
            })
            .unwrap();
        let mut descriptions = Vec::new();
        for &i in &idxs {
            descriptions.extend(input[i].descriptions.iter().cloned());
        }
        classes.push(ActionClass {
            class_id: input[rep].class_id,
            name: input[rep].name.clone(),
            canonical_name: canon,
            definition: input[rep].definition.clone(),
            descriptions,
        });
        members.push(idxs);
    }
    DedupOutcome { classes, members }
}

/// Corpus-level counts over the description pools of a class list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusStats {
    pub n_classes: usize,
    pub n_descriptions: usize,
    pub n_sentences: usize,
    pub n_tokens: usize,
}

/// Sentences are chunks between '.', '!' and '?' that contain at least one
/// alphanumeric character.
fn count_sentences(text: &str) -> usize {
    text.split(['.', '!', '?'])
        .filter(|chunk| chunk.chars().any(char::is_alphanumeric))
        .count()
}

pub fn corpus_stats(classes: &[ActionClass]) -> CorpusStats {
    let mut stats = CorpusStats {
        n_classes: classes.len(),
        n_descriptions: 0,
        n_sentences: 0,
        n_tokens: 0,
    };
    for class in classes {
        stats.n_descriptions += class.descriptions.len();
        for d in &class.descriptions {
            stats.n_sentences += count_sentences(d);
            stats.n_tokens += tokenize(d).len();
        }
    }
    stats
}
