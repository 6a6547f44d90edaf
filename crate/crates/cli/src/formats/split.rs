//! Split file: `key = value` lines. Class sets are space-separated u32 lists,
//! item sets space-separated ids (which is why ids may not contain
//! whitespace). `cycle_classes` is optional and defaults to the unseen set.
//! Lines starting with '#' and blank lines are ignored.

use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{bail, Context, Result};
use zsar_core::types::ZsarSplit;

use crate::fsutil::{atomic_write, read_string};

const KEYS: [&str; 7] = [
    "split_id",
    "seen_classes",
    "unseen_classes",
    "cycle_classes",
    "train_items",
    "val_items",
    "test_items",
];

pub fn to_text(split: &ZsarSplit) -> String {
    fn classes(set: &BTreeSet<u32>) -> String {
        set.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
    }
    fn items(set: &BTreeSet<String>) -> String {
        set.iter().cloned().collect::<Vec<_>>().join(" ")
    }
    let mut out = String::new();
    out.push_str(&format!("split_id = {}\n", split.split_id));
    out.push_str(&format!("seen_classes = {}\n", classes(&split.seen_classes)));
    out.push_str(&format!("unseen_classes = {}\n", classes(&split.unseen_classes)));
    if let Some(cycle) = &split.cycle_classes {
        out.push_str(&format!("cycle_classes = {}\n", classes(cycle)));
    }
    out.push_str(&format!("train_items = {}\n", items(&split.train_items)));
    out.push_str(&format!("val_items = {}\n", items(&split.val_items)));
    out.push_str(&format!("test_items = {}\n", items(&split.test_items)));
    out
}

pub fn write(path: &Path, split: &ZsarSplit) -> Result<()> {
    split.validate().with_context(|| format!("refusing to write invalid split to {}", path.display()))?;
    atomic_write(path, to_text(split).as_bytes())
}

pub fn parse(text: &str, origin: &str) -> Result<ZsarSplit> {
    let mut found: Vec<(&str, String)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .with_context(|| format!("{origin}:{}: expected 'key = value'", lineno + 1))?;
        let key = key.trim();
        let value = value.trim();
        let known = KEYS
            .iter()
            .find(|&&k| k == key)
            .with_context(|| format!("{origin}:{}: unknown key '{key}'", lineno + 1))?;
        if found.iter().any(|(k, _)| k == known) {
            bail!("{origin}:{}: duplicate key '{key}'", lineno + 1);
        }
        found.push((known, value.to_string()));
    }

    let get = |key: &str| found.iter().find(|(k, _)| *k == key).map(|(_, v)| v.as_str());
    let require = |key: &str| get(key).with_context(|| format!("{origin}: missing key '{key}'"));
    let class_set = |key: &str, value: &str| -> Result<BTreeSet<u32>> {
        value
            .split_whitespace()
            .map(|t| t.parse::<u32>().with_context(|| format!("{origin}: bad class id '{t}' in {key}")))
            .collect()
    };
    let item_set =
        |value: &str| -> BTreeSet<String> { value.split_whitespace().map(String::from).collect() };

    let split = ZsarSplit {
        split_id: require("split_id")?.to_string(),
        seen_classes: class_set("seen_classes", require("seen_classes")?)?,
        unseen_classes: class_set("unseen_classes", require("unseen_classes")?)?,
        cycle_classes: match get("cycle_classes") {
            Some(v) => Some(class_set("cycle_classes", v)?),
            None => None,
        },
        train_items: item_set(require("train_items")?),
        val_items: item_set(require("val_items")?),
        test_items: item_set(require("test_items")?),
    };
    split.validate().with_context(|| format!("validating {origin}"))?;
    Ok(split)
}

pub fn read(path: &Path) -> Result<ZsarSplit> {
    parse(&read_string(path)?, &path.display().to_string())
}
