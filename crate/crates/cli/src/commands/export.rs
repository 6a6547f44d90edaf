//! Export a checkpoint's embeddings as feature stores: the fused
//! class-semantic bank, and optionally the projected videos of the same
//! class set, so downstream tooling (2-D projections, nearest-neighbor
//! probes) can read both sides of the shared space with the usual loader.

use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use zsar_core::align::{assemble_class_text, build_class_bank, encode_visual};
use zsar_core::types::FeatureStore;
use zsar_core::Mat;

use crate::formats::{checkpoint, split, zsf1};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BankSide {
    Seen,
    Unseen,
    Cycle,
}

pub struct ExportArgs<'a> {
    pub checkpoint: &'a Path,
    pub definitions: &'a Path,
    pub descriptions: Option<&'a Path>,
    pub split: &'a Path,
    pub side: BankSide,
    pub out: &'a Path,
    /// Raw video store to project alongside the bank.
    pub videos: Option<&'a Path>,
    /// Where the projected videos go; required with `videos`.
    pub out_videos: Option<&'a Path>,
}

pub fn export_cmd(args: &ExportArgs<'_>) -> Result<()> {
    let ck = checkpoint::read(args.checkpoint)?;
    let definitions = zsf1::read(args.definitions)?;
    let descriptions = args.descriptions.map(zsf1::read).transpose()?;
    let the_split = split::read(args.split)?;

    let classes = match args.side {
        BankSide::Seen => &the_split.seen_classes,
        BankSide::Unseen => &the_split.unseen_classes,
        BankSide::Cycle => the_split.cycle_classes(),
    };
    let text = assemble_class_text(&definitions, descriptions.as_ref(), classes, ck.k)?;
    let bank = build_class_bank(&ck.params, &text).context("building the class bank")?;

    let ids = bank.class_ids.iter().map(|c| format!("class{c:04}")).collect();
    let store = FeatureStore::new(ids, bank.class_ids.clone(), bank.z)?;
    zsf1::write(args.out, &store)?;
    println!(
        "wrote {} fused class embeddings (dim {}) to {}",
        store.len(),
        store.dim(),
        args.out.display()
    );

    if let Some(videos_path) = args.videos {
        let out_videos = args
            .out_videos
            .context("--out-videos is required when --videos is given")?;
        let raw = zsf1::read(videos_path)?;

        // Keep only videos labeled with the exported class set, so the dump
        // pairs directly with the bank it sits next to.
        let kept: Vec<usize> = (0..raw.len())
            .filter(|&i| classes.contains(&raw.labels()[i]))
            .collect();
        let mut rows = Vec::with_capacity(kept.len() * raw.dim());
        for &i in &kept {
            rows.extend_from_slice(raw.features().row(i));
        }
        let projected =
            encode_visual(&ck.params, &Mat::from_vec(kept.len(), raw.dim(), rows))
                .map_err(anyhow::Error::from)
                .context("projecting videos")?;
        let store = FeatureStore::new(
            kept.iter().map(|&i| raw.ids()[i].clone()).collect(),
            kept.iter().map(|&i| raw.labels()[i]).collect(),
            projected,
        )?;
        zsf1::write(out_videos, &store)?;
        println!(
            "wrote {} projected video embeddings (dim {}) to {}",
            store.len(),
            store.dim(),
            out_videos.display()
        );
    }
    Ok(())
}
