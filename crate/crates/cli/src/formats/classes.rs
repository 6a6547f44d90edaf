//! Class metadata as TSV. `classes.tsv` carries `class_id<TAB>name<TAB>
//! definition`; descriptions live in a second file of `class_id<TAB>text`
//! lines, many per class, order preserved. Tabs and newlines inside fields
//! are refused on write since they are the delimiters.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use zsar_core::types::ActionClass;

use crate::fsutil::{atomic_write, read_string};

fn check_field(what: &str, value: &str) -> Result<()> {
    if value.contains(['\t', '\n', '\r']) {
        bail!("{what} {value:?} contains a tab or newline");
    }
    Ok(())
}

pub fn write_classes(path: &Path, classes: &[ActionClass]) -> Result<()> {
    let mut out = String::new();
    for class in classes {
        check_field("class name", &class.name)?;
        check_field("definition", &class.definition)?;
        out.push_str(&format!("{}\t{}\t{}\n", class.class_id, class.name, class.definition));
    }
    atomic_write(path, out.as_bytes())
}

/// Classes in file order, descriptions left empty; pair with
/// `read_descriptions_into` when a description file exists. Canonical names
/// are recomputed from the stored raw names.
pub fn read_classes(path: &Path) -> Result<Vec<ActionClass>> {
    let text = read_string(path)?;
    let mut classes = Vec::new();
    let mut ids = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(3, '\t');
        let (id, name, definition) = match (parts.next(), parts.next(), parts.next()) {
            (Some(id), Some(name), Some(def)) => (id, name, def),
            _ => bail!(
                "{}:{}: expected class_id<TAB>name<TAB>definition",
                path.display(),
                lineno + 1
            ),
        };
        let class_id: u32 = id
            .parse()
            .with_context(|| format!("{}:{}: bad class id '{id}'", path.display(), lineno + 1))?;
        if ids.insert(class_id, lineno).is_some() {
            bail!("{}:{}: duplicate class id {class_id}", path.display(), lineno + 1);
        }
        classes.push(ActionClass::new(class_id, name, definition, Vec::new()));
    }
    Ok(classes)
}

pub fn write_descriptions(path: &Path, classes: &[ActionClass]) -> Result<()> {
    let mut out = String::new();
    for class in classes {
        for d in &class.descriptions {
            check_field("description", d)?;
            out.push_str(&format!("{}\t{}\n", class.class_id, d));
        }
    }
    atomic_write(path, out.as_bytes())
}

/// Attach each description line to its class, keeping file order within a
/// class. A class id with no metadata row is an error.
pub fn read_descriptions_into(path: &Path, classes: &mut [ActionClass]) -> Result<()> {
    let by_id: BTreeMap<u32, usize> =
        classes.iter().enumerate().map(|(i, c)| (c.class_id, i)).collect();
    let text = read_string(path)?;
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let (id, desc) = line.split_once('\t').with_context(|| {
            format!("{}:{}: expected class_id<TAB>text", path.display(), lineno + 1)
        })?;
        let class_id: u32 = id
            .parse()
            .with_context(|| format!("{}:{}: bad class id '{id}'", path.display(), lineno + 1))?;
        let &idx = by_id.get(&class_id).with_context(|| {
            format!("{}:{}: class {class_id} has no metadata row", path.display(), lineno + 1)
        })?;
        classes[idx].descriptions.push(desc.to_string());
    }
    Ok(())
}
