//! Feature store container: magic "ZSF1", u32 row count, u32 dimension,
//! row-major f64 features, then one u32 label per row. Item ids travel in a
//! `<path>.ids` sidecar, one per line in row order, because ids are the only
//! variable-width field and keeping the main file fixed-stride makes its
//! layout auditable with a hex dump.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use zsar_core::types::FeatureStore;
use zsar_core::Mat;

use crate::fsutil::{atomic_write, read_bytes, read_string};
use crate::formats::Cursor;

pub const MAGIC: &[u8; 4] = b"ZSF1";

/// Sidecar path: the full file name plus ".ids".
pub fn ids_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".ids");
    PathBuf::from(os)
}

pub fn write(path: &Path, store: &FeatureStore) -> Result<()> {
    let n = store.len();
    let d = store.dim();
    let n32 = u32::try_from(n).context("row count exceeds u32")?;
    let d32 = u32::try_from(d).context("dimension exceeds u32")?;

    let mut ids = String::new();
    for id in store.ids() {
        if id.is_empty() || id.contains(['\n', '\r']) {
            bail!("item id {id:?} cannot be stored one-per-line");
        }
        ids.push_str(id);
        ids.push('\n');
    }

    let mut buf = Vec::with_capacity(4 + 8 + n * d * 8 + n * 4);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&n32.to_le_bytes());
    buf.extend_from_slice(&d32.to_le_bytes());
    for &v in store.features().data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for &label in store.labels() {
        buf.extend_from_slice(&label.to_le_bytes());
    }
    atomic_write(path, &buf)?;
    atomic_write(&ids_path(path), ids.as_bytes())
}

pub fn read(path: &Path) -> Result<FeatureStore> {
    let buf = read_bytes(path)?;
    let mut c = Cursor::new(&buf);
    if c.take(4, "magic")? != MAGIC {
        bail!("{}: not a ZSF1 feature store (bad magic)", path.display());
    }
    let n = c.u32("row count")? as usize;
    let d = c.u32("dimension")? as usize;
    let features = c.f64s(n * d, "features")?;
    let labels = c.u32s(n, "labels")?;
    c.finish(&path.display().to_string())?;

    let sidecar = ids_path(path);
    let ids_text = read_string(&sidecar)?;
    let ids: Vec<String> = ids_text.lines().map(String::from).collect();
    if ids.len() != n {
        bail!(
            "{}: {} ids for {} rows in {}",
            sidecar.display(),
            ids.len(),
            n,
            path.display()
        );
    }
    if let Some(bad) = ids.iter().position(|id| id.is_empty()) {
        bail!("{}: empty id on line {}", sidecar.display(), bad + 1);
    }

    FeatureStore::new(ids, labels, Mat::from_vec(n, d, features))
        .with_context(|| format!("validating {}", path.display()))
}
