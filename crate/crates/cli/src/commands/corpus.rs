//! Corpus tooling: merge duplicate classes, rank crawled descriptions by
//! relevance to the class name, and report corpus-level counts.

use std::path::Path;

use anyhow::{Context, Result};
use zsar_core::textproc::{corpus_stats, dedup_classes, rank_descriptions, Stopwords};

use crate::formats::{classes, w2v};

fn load(classes_path: &Path, descriptions_path: Option<&Path>) -> Result<Vec<zsar_core::types::ActionClass>> {
    let mut loaded = classes::read_classes(classes_path)?;
    if let Some(p) = descriptions_path {
        classes::read_descriptions_into(p, &mut loaded)?;
    }
    Ok(loaded)
}

pub fn dedup(
    classes_in: &Path,
    descriptions_in: Option<&Path>,
    classes_out: &Path,
    descriptions_out: Option<&Path>,
) -> Result<()> {
    let input = load(classes_in, descriptions_in)?;
    let outcome = dedup_classes(&input, &Stopwords::default());
    classes::write_classes(classes_out, &outcome.classes)?;
    if let Some(p) = descriptions_out {
        classes::write_descriptions(p, &outcome.classes)?;
    }

    println!(
        "{} classes -> {} after canonical-name merging",
        input.len(),
        outcome.classes.len()
    );
    for (class, members) in outcome.classes.iter().zip(&outcome.members) {
        if members.len() > 1 {
            let names: Vec<&str> = members.iter().map(|&i| input[i].name.as_str()).collect();
            println!("  [{}] '{}' <= {}", class.class_id, class.canonical_name, names.join(" | "));
        }
    }
    Ok(())
}

pub fn rank(
    classes_in: &Path,
    descriptions_in: &Path,
    embeddings: &Path,
    k: usize,
    remove_stopwords: bool,
    out: &Path,
) -> Result<()> {
    let loaded = load(classes_in, Some(descriptions_in))?;
    let table = w2v::read(embeddings)?;
    let stops = Stopwords::default();

    let mut lines = String::new();
    let mut kept_total = 0usize;
    let mut excluded_total = 0usize;
    for class in &loaded {
        let ranking =
            rank_descriptions(&class.name, &class.descriptions, &table, remove_stopwords, &stops)
                .with_context(|| format!("ranking class {} '{}'", class.class_id, class.name))?;
        excluded_total += ranking.order.iter().filter(|r| r.score.is_none()).count();
        for entry in ranking.order.iter().filter(|r| r.score.is_some()).take(k) {
            lines.push_str(&format!(
                "{}\t{}\t{:.6}\n",
                class.class_id,
                entry.index,
                entry.score.unwrap()
            ));
            kept_total += 1;
        }
    }
    crate::fsutil::atomic_write(out, lines.as_bytes())?;
    println!(
        "kept {kept_total} descriptions across {} classes (k = {k}); \
         {excluded_total} had no usable embedding",
        loaded.len()
    );
    Ok(())
}

pub fn stats(classes_in: &Path, descriptions_in: Option<&Path>) -> Result<()> {
    let loaded = load(classes_in, descriptions_in)?;
    let s = corpus_stats(&loaded);
    println!(
        "classes={} descriptions={} sentences={} tokens={}",
        s.n_classes, s.n_descriptions, s.n_sentences, s.n_tokens
    );
    Ok(())
}
