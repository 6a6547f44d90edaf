//! Plain-text word vector table: a `count dim` header line, then one
//! `token v1 .. vd` line per word. Tokens are lowercased on load because the
//! text pipeline queries with lowercase tokens; two tokens that collide after
//! lowercasing are an error rather than a silent overwrite.

use std::path::Path;

use anyhow::{bail, Context, Result};
use zsar_core::types::EmbeddingTable;

use crate::fsutil::{atomic_write, read_string};

pub fn read(path: &Path) -> Result<EmbeddingTable> {
    let text = read_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().with_context(|| format!("{}: empty file", path.display()))?;
    let mut head = header.split_whitespace();
    let (n, d) = match (head.next(), head.next(), head.next()) {
        (Some(n), Some(d), None) => (
            n.parse::<usize>().with_context(|| format!("{}: bad count '{n}'", path.display()))?,
            d.parse::<usize>().with_context(|| format!("{}: bad dim '{d}'", path.display()))?,
        ),
        _ => bail!("{}: header must be 'count dim'", path.display()),
    };

    let mut rows = Vec::with_capacity(n);
    for (lineno, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let token = parts
            .next()
            .with_context(|| format!("{}:{}: blank vector line", path.display(), lineno + 1))?
            .to_ascii_lowercase();
        let vec: Vec<f64> = parts
            .map(|p| {
                p.parse::<f64>().with_context(|| {
                    format!("{}:{}: bad value '{p}' for '{token}'", path.display(), lineno + 1)
                })
            })
            .collect::<Result<_>>()?;
        if vec.len() != d {
            bail!(
                "{}:{}: '{token}' has {} values, header says {d}",
                path.display(),
                lineno + 1,
                vec.len()
            );
        }
        rows.push((token, vec));
    }
    if rows.len() != n {
        bail!("{}: header declares {n} words, found {}", path.display(), rows.len());
    }
    EmbeddingTable::new(d, rows).with_context(|| format!("validating {}", path.display()))
}

pub fn write(path: &Path, table: &EmbeddingTable) -> Result<()> {
    let mut out = format!("{} {}\n", table.len(), table.dim());
    for (token, vec) in table.iter() {
        out.push_str(token);
        for v in vec {
            out.push(' ');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}
