//! Word-vector text embedding and relevance ranking of descriptions.
//!
//! A text embeds to the mean of its tokens' word vectors. Descriptions are
//! ranked against the class name by cosine similarity; a description whose
//! embedding is missing (all tokens out of vocabulary) or has zero norm is
//! excluded from ranking entirely and sorts after every scored one.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::{tokenize, Stopwords};
use crate::matrix::dot;
use crate::types::EmbeddingTable;

#[derive(Debug, Clone, PartialEq)]
pub enum EmbedError {
    /// The query name itself has no usable embedding, so nothing can be
    /// ranked against it.
    NameNotEmbeddable { name: String },
}

impl fmt::Display for EmbedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmbedError::NameNotEmbeddable { name } => {
                write!(f, "name '{name}' has no in-vocabulary tokens to embed")
            }
        }
    }
}

impl core::error::Error for EmbedError {}

/// Mean of the word vectors of the text's in-vocabulary tokens; `None` when
/// no token is in vocabulary. Stop words are kept unless `remove_stopwords`
/// is set; the lemmatizer is never applied here (tables carry surface forms).
pub fn embed_text(
    text: &str,
    table: &EmbeddingTable,
    remove_stopwords: bool,
    stops: &Stopwords,
) -> Option<Vec<f64>> {
    let mut sum = vec![0.0; table.dim()];
    let mut count = 0usize;
    for token in tokenize(text) {
        if remove_stopwords && stops.contains(&token) {
            continue;
        }
        if let Some(v) = table.get(&token) {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
            count += 1;
        }
    }
    if count == 0 {
        return None;
    }
    let inv = 1.0 / count as f64;
    for s in &mut sum {
        *s *= inv;
    }
    Some(sum)
}

/// Cosine similarity, or `None` when either vector has zero norm.
fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let na = libm::sqrt(dot(a, a));
    let nb = libm::sqrt(dot(b, b));
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some(dot(a, b) / (na * nb))
}

/// One description's place in a ranking; `score` is `None` for excluded
/// descriptions (unembeddable or zero norm).
#[derive(Debug, Clone, PartialEq)]
pub struct RankedDescription {
    pub index: usize,
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    /// Scored descriptions by descending score (ties: ascending index),
    /// followed by excluded ones in ascending index order.
    pub order: Vec<RankedDescription>,
}

impl Ranking {
    /// Indices of the top `k` scored descriptions, in rank order. Excluded
    /// descriptions are never selected, so the result may be shorter than
    /// `k`. Selections nest: the result for `k-1` is a prefix of `k`'s.
    pub fn select(&self, k: usize) -> Vec<usize> {
        self.order
            .iter()
            .filter(|r| r.score.is_some())
            .take(k)
            .map(|r| r.index)
            .collect()
    }
}

/// Rank `descriptions` by cosine similarity to the embedded `name`.
pub fn rank_descriptions(
    name: &str,
    descriptions: &[String],
    table: &EmbeddingTable,
    remove_stopwords: bool,
    stops: &Stopwords,
) -> Result<Ranking, EmbedError> {
    let name_vec = embed_text(name, table, remove_stopwords, stops)
        .filter(|v| dot(v, v) > 0.0)
        .ok_or_else(|| EmbedError::NameNotEmbeddable { name: String::from(name) })?;

    let mut order: Vec<RankedDescription> = descriptions
        .iter()
        .enumerate()
        .map(|(index, text)| {
            let score = embed_text(text, table, remove_stopwords, stops)
                .and_then(|v| cosine(&name_vec, &v));
            RankedDescription { index, score }
        })
        .collect();

    order.sort_by(|a, b| match (a.score, b.score) {
        (Some(x), Some(y)) => y.total_cmp(&x).then(a.index.cmp(&b.index)),
        (Some(_), None) => core::cmp::Ordering::Less,
        (None, Some(_)) => core::cmp::Ordering::Greater,
        (None, None) => a.index.cmp(&b.index),
    });
    Ok(Ranking { order })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn table() -> EmbeddingTable {
        EmbeddingTable::new(
            2,
            vec![
                ("a".to_string(), vec![1.0, 0.0]),
                ("b".to_string(), vec![0.0, 1.0]),
                ("c".to_string(), vec![-1.0, 0.0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn embedding_is_token_mean() {
        let t = table();
        let stops = Stopwords::default();
        assert_eq!(embed_text("a b", &t, false, &stops), Some(vec![0.5, 0.5]));
        assert_eq!(embed_text("a zzz", &t, false, &stops), Some(vec![1.0, 0.0]));
        assert_eq!(embed_text("zzz qqq", &t, false, &stops), None);
        // "a" alone is fine; stop-word removal only applies when asked.
        assert_eq!(embed_text("the a", &t, false, &stops), Some(vec![1.0, 0.0]));
    }

    #[test]
    fn ranking_scores_and_order_are_exact() {
        let t = table();
        let stops = Stopwords::default();
        let descs = vec!["a".to_string(), "b".to_string(), "a b".to_string()];
        let r = rank_descriptions("a", &descs, &t, false, &stops).unwrap();
        let got: Vec<(usize, Option<f64>)> = r.order.iter().map(|x| (x.index, x.score)).collect();
        assert_eq!(
            got,
            vec![(0, Some(1.0)), (2, Some(0.7071067811865475)), (1, Some(0.0))]
        );
        assert_eq!(r.select(2), vec![0, 2]);
        assert_eq!(r.select(10), vec![0, 2, 1]);
    }

    #[test]
    fn zero_norm_and_oov_descriptions_sort_last() {
        let t = table();
        let stops = Stopwords::default();
        // "a c" averages to the zero vector; "zzz" is out of vocabulary.
        let descs = vec!["zzz".to_string(), "b".to_string(), "a c".to_string()];
        let r = rank_descriptions("a", &descs, &t, false, &stops).unwrap();
        let idx: Vec<usize> = r.order.iter().map(|x| x.index).collect();
        assert_eq!(idx, vec![1, 0, 2]);
        assert_eq!(r.order[1].score, None);
        assert_eq!(r.order[2].score, None);
        assert_eq!(r.select(3), vec![1], "excluded descriptions are never selected");
    }

    #[test]
    fn unembeddable_name_is_an_error() {
        let t = table();
        let stops = Stopwords::default();
        let err = rank_descriptions("zzz", &[], &t, false, &stops).unwrap_err();
        assert!(matches!(err, EmbedError::NameNotEmbeddable { .. }));
    }

    #[test]
    fn stopword_removal_changes_the_mean_when_enabled() {
        let t = EmbeddingTable::new(
            1,
            vec![("the".to_string(), vec![4.0]), ("run".to_string(), vec![2.0])],
        )
        .unwrap();
        let stops = Stopwords::default();
        assert_eq!(embed_text("the run", &t, false, &stops), Some(vec![3.0]));
        assert_eq!(embed_text("the run", &t, true, &stops), Some(vec![2.0]));
    }

    proptest! {
        #[test]
        fn selections_nest(k1 in 0usize..8, k2 in 0usize..8, seed in 0u64..100) {
            let t = table();
            let stops = Stopwords::default();
            let texts = ["a", "b", "a b", "c", "a a b", "zzz", "b b", "a c"];
            let n = 1 + (seed as usize) % texts.len();
            let descs: Vec<String> = texts[..n].iter().map(|s| s.to_string()).collect();
            let r = rank_descriptions("a b", &descs, &t, false, &stops).unwrap();
            let (lo, hi) = if k1 <= k2 { (k1, k2) } else { (k2, k1) };
            let small = r.select(lo);
            let big = r.select(hi);
            prop_assert_eq!(&big[..small.len().min(big.len())], &small[..]);
            prop_assert!(small.len() <= big.len());
        }
    }
}
