//! Run configuration as `key = value` lines. A file may set any subset of
//! fields; everything else keeps its default, so configs stay short and the
//! effective values are echoed by the commands that consume them. Unknown
//! keys are errors — a typo must not silently train with defaults.

use std::path::Path;

use anyhow::{bail, Context, Result};
use zsar_core::types::{Reduction, RunConfig};

use crate::fsutil::{atomic_write, read_string};

/// Every field, in the order `to_text` prints them.
const KEYS: [&str; 18] = [
    "d",
    "k",
    "tau",
    "alpha",
    "gamma",
    "lr",
    "weight_decay",
    "batch_size",
    "epochs",
    "warmup_fraction",
    "seed",
    "beta1",
    "beta2",
    "eps",
    "reduction",
    "decoupled_weight_decay",
    "l2_normalize",
    "patience",
];

pub fn to_text(cfg: &RunConfig) -> String {
    format!(
        "d = {}\nk = {}\ntau = {}\nalpha = {}\ngamma = {}\nlr = {}\nweight_decay = {}\n\
         batch_size = {}\nepochs = {}\nwarmup_fraction = {}\nseed = {}\nbeta1 = {}\n\
         beta2 = {}\neps = {}\nreduction = {}\ndecoupled_weight_decay = {}\n\
         l2_normalize = {}\npatience = {}\n",
        cfg.d,
        cfg.k,
        cfg.tau,
        cfg.alpha,
        cfg.gamma,
        cfg.lr,
        cfg.weight_decay,
        cfg.batch_size,
        cfg.epochs,
        cfg.warmup_fraction,
        cfg.seed,
        cfg.beta1,
        cfg.beta2,
        cfg.eps,
        cfg.reduction.as_str(),
        cfg.decoupled_weight_decay,
        cfg.l2_normalize,
        cfg.patience,
    )
}

pub fn write(path: &Path, cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    atomic_write(path, to_text(cfg).as_bytes())
}

pub fn parse(text: &str, origin: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut seen: Vec<&str> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = || format!("{origin}:{}", lineno + 1);
        let (key, value) =
            line.split_once('=').with_context(|| format!("{}: expected 'key = value'", at()))?;
        let key = key.trim();
        let value = value.trim();
        let known = KEYS
            .iter()
            .find(|&&k| k == key)
            .with_context(|| format!("{}: unknown key '{key}'", at()))?;
        if seen.contains(known) {
            bail!("{}: duplicate key '{key}'", at());
        }
        seen.push(known);

        macro_rules! set {
            ($field:ident) => {
                cfg.$field = value
                    .parse()
                    .with_context(|| format!("{}: bad value '{value}' for {key}", at()))?
            };
        }
        match *known {
            "d" => set!(d),
            "k" => set!(k),
            "tau" => set!(tau),
            "alpha" => set!(alpha),
            "gamma" => set!(gamma),
            "lr" => set!(lr),
            "weight_decay" => set!(weight_decay),
            "batch_size" => set!(batch_size),
            "epochs" => set!(epochs),
            "warmup_fraction" => set!(warmup_fraction),
            "seed" => set!(seed),
            "beta1" => set!(beta1),
            "beta2" => set!(beta2),
            "eps" => set!(eps),
            "reduction" => {
                cfg.reduction = Reduction::parse(value)
                    .with_context(|| format!("{}: reduction must be 'mean' or 'sum'", at()))?
            }
            "decoupled_weight_decay" => set!(decoupled_weight_decay),
            "l2_normalize" => set!(l2_normalize),
            "patience" => set!(patience),
            _ => unreachable!(),
        }
    }
    cfg.validate().with_context(|| format!("validating {origin}"))?;
    Ok(cfg)
}

pub fn read(path: &Path) -> Result<RunConfig> {
    parse(&read_string(path)?, &path.display().to_string())
}
