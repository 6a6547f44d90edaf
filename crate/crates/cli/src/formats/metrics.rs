//! Per-epoch training metrics, one line per epoch:
//! `epoch=3 mean_loss=0.52 lr=0.0001 val_top1=0.8125 wallclock_s=0.41`
//! (`val_top1=-` when no validation set exists). Numbers use shortest
//! round-trip formatting, so all fields except the wallclock are bitwise
//! reproducible across identical runs; `strip_wallclock` removes the one
//! field that legitimately differs when comparing two runs.

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsLine {
    pub epoch: usize,
    pub mean_loss: f64,
    pub lr: f64,
    pub val_top1: Option<f64>,
    pub wallclock_s: f64,
}

pub fn format_line(line: &MetricsLine) -> String {
    let val = match line.val_top1 {
        Some(v) => v.to_string(),
        None => "-".to_string(),
    };
    format!(
        "epoch={} mean_loss={} lr={} val_top1={} wallclock_s={}",
        line.epoch, line.mean_loss, line.lr, val, line.wallclock_s
    )
}

pub fn to_text(lines: &[MetricsLine]) -> String {
    let mut out = String::new();
    for line in lines {
        out.push_str(&format_line(line));
        out.push('\n');
    }
    out
}

pub fn parse(text: &str, origin: &str) -> Result<Vec<MetricsLine>> {
    const FIELDS: [&str; 5] = ["epoch", "mean_loss", "lr", "val_top1", "wallclock_s"];
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let at = || format!("{origin}:{}", lineno + 1);
        let parts: Vec<&str> = line.split(' ').collect();
        if parts.len() != FIELDS.len() {
            bail!("{}: expected {} fields, found {}", at(), FIELDS.len(), parts.len());
        }
        let mut values = [""; 5];
        for (i, (part, field)) in parts.iter().zip(FIELDS).enumerate() {
            values[i] = part
                .strip_prefix(field)
                .and_then(|r| r.strip_prefix('='))
                .with_context(|| format!("{}: expected '{field}=...', found '{part}'", at()))?;
        }
        out.push(MetricsLine {
            epoch: values[0].parse().with_context(|| format!("{}: bad epoch", at()))?,
            mean_loss: values[1].parse().with_context(|| format!("{}: bad mean_loss", at()))?,
            lr: values[2].parse().with_context(|| format!("{}: bad lr", at()))?,
            val_top1: match values[3] {
                "-" => None,
                v => Some(v.parse().with_context(|| format!("{}: bad val_top1", at()))?),
            },
            wallclock_s: values[4]
                .parse()
                .with_context(|| format!("{}: bad wallclock_s", at()))?,
        });
    }
    Ok(out)
}

/// The text with every `wallclock_s=...` field removed — what determinism
/// comparisons diff, since wallclock is the one legitimately varying field.
pub fn strip_wallclock(text: &str) -> String {
    let mut out = String::new();
    for line in text.lines() {
        let kept: Vec<&str> =
            line.split(' ').filter(|p| !p.starts_with("wallclock_s=")).collect();
        out.push_str(&kept.join(" "));
        out.push('\n');
    }
    out
}
