//! Scoring commands: evaluate one checkpoint on a split's val or test items,
//! and the ablation table over model variants.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use zsar_core::align::assemble_class_text;
use zsar_core::eval::{run_ablation, score_test_set, AblationInputs};
use zsar_core::optim::{prepare_eval_set, EvalPart};
use zsar_core::types::RunConfig;

use crate::formats::{checkpoint, split, zsf1};
use crate::fsutil::atomic_write;

pub struct EvalArgs<'a> {
    pub videos: &'a Path,
    pub definitions: &'a Path,
    pub descriptions: Option<&'a Path>,
    pub split: &'a Path,
    pub checkpoint: &'a Path,
    pub part: EvalPart,
    pub out: Option<&'a Path>,
}

pub fn eval_cmd(args: &EvalArgs<'_>) -> Result<()> {
    let ck = checkpoint::read(args.checkpoint)?;
    let videos = zsf1::read(args.videos)?;
    let definitions = zsf1::read(args.definitions)?;
    let descriptions = args.descriptions.map(zsf1::read).transpose()?;
    let the_split = split::read(args.split)?;

    let set = prepare_eval_set(&videos, &the_split, args.part)?;
    if set.labels.is_empty() {
        bail!("the selected part has no items in split '{}'", the_split.split_id);
    }
    let unseen_text = assemble_class_text(
        &definitions,
        descriptions.as_ref(),
        &the_split.unseen_classes,
        ck.k,
    )?;
    let (top1, top5) = score_test_set(&ck.params, &unseen_text, &set)
        .map_err(anyhow::Error::from)
        .context("scoring")?;

    let part = match args.part {
        EvalPart::Val => "val",
        EvalPart::Test => "test",
    };
    let record = format!(
        "split={} part={part} n={} top1={top1} top5={top5}\n",
        the_split.split_id,
        set.labels.len()
    );
    print!("{record}");
    if let Some(p) = args.out {
        atomic_write(p, record.as_bytes())?;
    }
    Ok(())
}

pub fn ablate_cmd(
    videos_path: &Path,
    definitions_path: &Path,
    descriptions_path: Option<&Path>,
    split_paths: &[PathBuf],
    variants_arg: &str,
    cfg: &RunConfig,
    out: Option<&Path>,
) -> Result<()> {
    let videos = zsf1::read(videos_path)?;
    let definitions = zsf1::read(definitions_path)?;
    let descriptions = descriptions_path.map(zsf1::read).transpose()?;
    let splits = split_paths.iter().map(|p| split::read(p)).collect::<Result<Vec<_>>>()?;
    if splits.is_empty() {
        bail!("at least one split is required");
    }

    let variants: Vec<&str> =
        variants_arg.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
    if variants.is_empty() {
        bail!("no variants named; try e.g. \"AD-only,VC-only,AD+VC,AD+VC+CIM\"");
    }

    let rows = run_ablation(
        cfg,
        &variants,
        &AblationInputs {
            videos: &videos,
            definitions: &definitions,
            descriptions: descriptions.as_ref(),
            splits: &splits,
        },
    )?;

    let name_w = rows.iter().map(|r| r.variant.len()).max().unwrap().max("variant".len());
    println!(
        "{:<name_w$}  {:>14}  {:>14}  ({} {})",
        "variant",
        "top1 (%)",
        "top5 (%)",
        splits.len(),
        if splits.len() == 1 { "split" } else { "splits" }
    );
    for row in &rows {
        println!(
            "{:<name_w$}  {:>14}  {:>14}",
            row.variant,
            row.top1.scaled(100.0).render(),
            row.top5.scaled(100.0).render()
        );
    }

    // Machine-readable record of the same results, full precision, one line
    // per variant with the raw per-split runs.
    if let Some(p) = out {
        let join = |runs: &[f64]| {
            runs.iter().map(f64::to_string).collect::<Vec<String>>().join(",")
        };
        let mut text = String::new();
        for row in &rows {
            text.push_str(&format!(
                "variant={} top1_mean={} top1_std={} top5_mean={} top5_std={} \
                 top1_runs={} top5_runs={}\n",
                row.variant,
                row.top1.mean,
                row.top1.std,
                row.top5.mean,
                row.top5.std,
                join(&row.top1_runs),
                join(&row.top5_runs)
            ));
        }
        atomic_write(p, text.as_bytes())?;
    }
    Ok(())
}
