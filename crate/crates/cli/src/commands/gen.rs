//! Generate a synthetic benchmark directory: the three feature stores, the
//! split, the class metadata, and an echo of the effective spec.

use std::path::Path;

use anyhow::{Context, Result};
use zsar_core::synth::{generate, oracle_unseen_top1, SynthSpec};

use crate::formats::{classes, split, synthspec, zsf1};

pub fn gen(out_dir: &Path, spec: &SynthSpec) -> Result<()> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let data = generate(spec)?;

    zsf1::write(&out_dir.join("videos.zsf1"), &data.videos)?;
    zsf1::write(&out_dir.join("definitions.zsf1"), &data.definitions)?;
    zsf1::write(&out_dir.join("descriptions.zsf1"), &data.descriptions)?;
    split::write(&out_dir.join("split.txt"), &data.split)?;
    classes::write_classes(&out_dir.join("classes.tsv"), &data.classes)?;
    // the effective spec rides along, so a directory can be regenerated
    synthspec::write(&out_dir.join("spec.txt"), spec)?;

    let oracle = oracle_unseen_top1(spec)?;
    println!(
        "wrote {} videos, {} definitions, {} descriptions for {} classes \
         ({} seen, {} unseen) to {}",
        data.videos.len(),
        data.definitions.len(),
        data.descriptions.len(),
        spec.n_seen + spec.n_unseen,
        spec.n_seen,
        spec.n_unseen,
        out_dir.display()
    );
    println!(
        "split '{}': {} train / {} val / {} test items",
        data.split.split_id,
        data.split.train_items.len(),
        data.split.val_items.len(),
        data.split.test_items.len()
    );
    println!("latent-space oracle top-1 on unseen videos: {oracle:.4}");
    Ok(())
}
