//! On-disk formats. Binary formats are little-endian throughout and carry a
//! four-byte magic; text formats are line-oriented `key = value` or TSV.
//! Every reader validates exhaustively — a file either round-trips exactly or
//! fails with a message naming what is wrong.

pub mod checkpoint;
pub mod classes;
pub mod metrics;
pub mod runconfig;
pub mod split;
pub mod synthspec;
pub mod w2v;
pub mod zsf1;

use anyhow::{bail, Result};

/// Little-endian reader over a byte buffer with strict length accounting.
pub(crate) struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Cursor { buf, pos: 0 }
    }

    pub(crate) fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        match end {
            Some(end) => {
                let out = &self.buf[self.pos..end];
                self.pos = end;
                Ok(out)
            }
            None => bail!(
                "truncated: wanted {n} bytes for {what} at offset {}, have {}",
                self.pos,
                self.buf.len() - self.pos
            ),
        }
    }

    pub(crate) fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    pub(crate) fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    pub(crate) fn u128(&mut self, what: &str) -> Result<u128> {
        Ok(u128::from_le_bytes(self.take(16, what)?.try_into().unwrap()))
    }

    pub(crate) fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let raw = self.take(n.checked_mul(8).expect("size overflow"), what)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    pub(crate) fn u32s(&mut self, n: usize, what: &str) -> Result<Vec<u32>> {
        let raw = self.take(n.checked_mul(4).expect("size overflow"), what)?;
        Ok(raw.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect())
    }

    /// Error unless every byte has been consumed.
    pub(crate) fn finish(&self, what: &str) -> Result<()> {
        if self.pos != self.buf.len() {
            bail!("{what}: {} trailing bytes after the declared content", self.buf.len() - self.pos);
        }
        Ok(())
    }
}
