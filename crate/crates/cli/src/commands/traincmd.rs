//! The train subcommand: stores + split + config in, checkpoint + metrics
//! out. Prints the effective config up front so a run's exact inputs are in
//! its log, then one metrics line per epoch.

use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use zsar_core::optim::{prepare_training, train};
use zsar_core::types::RunConfig;

use crate::formats::checkpoint::{self, Checkpoint};
use crate::formats::metrics::{self, MetricsLine};
use crate::formats::{runconfig, split, zsf1};
use crate::fsutil::atomic_write;

pub struct TrainPaths<'a> {
    pub videos: &'a Path,
    pub definitions: &'a Path,
    pub descriptions: Option<&'a Path>,
    pub split: &'a Path,
    pub out_checkpoint: &'a Path,
    pub out_metrics: Option<&'a Path>,
}

pub fn train_cmd(paths: &TrainPaths<'_>, cfg: &RunConfig) -> Result<()> {
    print!("{}", runconfig::to_text(cfg));
    println!();

    let videos = zsf1::read(paths.videos)?;
    let definitions = zsf1::read(paths.definitions)?;
    let descriptions = paths.descriptions.map(zsf1::read).transpose()?;
    let the_split = split::read(paths.split)?;

    let data = prepare_training(cfg, &videos, &definitions, descriptions.as_ref(), &the_split)
        .context("preparing training data")?;
    println!(
        "split '{}': {} train items over {} seen classes; {} unseen classes{}",
        the_split.split_id,
        data.train_labels.len(),
        data.seen_class_ids.len(),
        data.unseen_class_ids.len(),
        match &data.val {
            Some(v) => format!("; validating on {} items", v.labels.len()),
            None => String::from("; no validation items"),
        }
    );

    let mut lines: Vec<MetricsLine> = Vec::with_capacity(cfg.epochs);
    let mut last_tick = Instant::now();
    let outcome = train(cfg, &data, |rec| {
        let now = Instant::now();
        let line = MetricsLine {
            epoch: rec.epoch,
            mean_loss: rec.mean_loss,
            lr: rec.last_lr,
            val_top1: rec.val_top1,
            wallclock_s: now.duration_since(last_tick).as_secs_f64(),
        };
        last_tick = now;
        println!("{}", metrics::format_line(&line));
        lines.push(line);
    })
    .context("training")?;

    checkpoint::write(
        paths.out_checkpoint,
        &Checkpoint { params: outcome.params, k: cfg.k, adam: outcome.adam, rng: outcome.rng },
    )?;
    if let Some(p) = paths.out_metrics {
        atomic_write(p, metrics::to_text(&lines).as_bytes())?;
    }

    match outcome.best_epoch {
        Some(best) => {
            let record = &outcome.history[best];
            println!(
                "kept epoch {best} (val top-1 {}){}",
                record.val_top1.expect("best epoch has a val score"),
                if outcome.stopped_early { ", stopped early" } else { "" }
            );
        }
        None => println!("kept final parameters (no validation set)"),
    }
    println!("checkpoint written to {}", paths.out_checkpoint.display());
    Ok(())
}
