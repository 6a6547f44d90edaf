//! Trained-model container: magic "ZSCK", a format version, the projection
//! shapes and fusion scalars, the four parameter blocks, the full Adam state,
//! and the exact RNG position. Everything little-endian, fixed layout, no
//! padding — two checkpoints are equal iff their bytes are equal, which is
//! what makes determinism checks meaningful.

use std::path::Path;

use anyhow::{bail, Context, Result};
use zsar_core::align::{AlignmentParams, Projection};
use zsar_core::optim::AdamState;
use zsar_core::rng::RngSnapshot;
use zsar_core::Mat;

use crate::fsutil::{atomic_write, read_bytes};
use crate::formats::Cursor;

pub const MAGIC: &[u8; 4] = b"ZSCK";
pub const VERSION: u32 = 1;

/// A trained model plus everything needed to rebuild its class banks (`k`)
/// and to account for how it was produced (optimizer and stream state).
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: AlignmentParams,
    /// Descriptions kept per class when assembling text features.
    pub k: usize,
    pub adam: AdamState,
    pub rng: RngSnapshot,
}

fn push_f64s(buf: &mut Vec<u8>, values: &[f64]) {
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn write(path: &Path, ck: &Checkpoint) -> Result<()> {
    let p = &ck.params;
    let d_in_v = p.visual.d_in();
    let d_in_t = p.semantic.d_in();
    let d = p.visual.d_out();
    if p.semantic.d_out() != d {
        bail!("projections disagree on the shared dimension");
    }
    let blocks = p.blocks();
    for (m, name) in [(&ck.adam.m, "m"), (&ck.adam.v, "v")] {
        if m.len() != blocks.len() || m.iter().zip(&blocks).any(|(s, b)| s.len() != b.len()) {
            bail!("optimizer {name} blocks do not match the parameter shapes");
        }
    }

    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    for dim in [d_in_v, d_in_t, d, ck.k] {
        buf.extend_from_slice(&u32::try_from(dim).context("dimension exceeds u32")?.to_le_bytes());
    }
    push_f64s(&mut buf, &[p.tau, p.alpha, p.gamma]);
    buf.push(u8::from(p.l2_normalize));
    for block in blocks {
        push_f64s(&mut buf, block);
    }
    buf.extend_from_slice(&ck.adam.t.to_le_bytes());
    push_f64s(&mut buf, &[ck.adam.beta1, ck.adam.beta2, ck.adam.eps]);
    for state in [&ck.adam.m, &ck.adam.v] {
        for block in state {
            push_f64s(&mut buf, block);
        }
    }
    buf.extend_from_slice(&ck.rng.seed);
    buf.extend_from_slice(&ck.rng.word_pos.to_le_bytes());
    buf.extend_from_slice(&ck.rng.stream.to_le_bytes());
    atomic_write(path, &buf)
}

pub fn read(path: &Path) -> Result<Checkpoint> {
    let buf = read_bytes(path)?;
    let mut c = Cursor::new(&buf);
    if c.take(4, "magic")? != MAGIC {
        bail!("{}: not a ZSCK checkpoint (bad magic)", path.display());
    }
    let version = c.u32("version")?;
    if version != VERSION {
        bail!("{}: unsupported checkpoint version {version}", path.display());
    }
    let d_in_v = c.u32("visual input dim")? as usize;
    let d_in_t = c.u32("text input dim")? as usize;
    let d = c.u32("shared dim")? as usize;
    let k = c.u32("k")? as usize;
    let scalars = c.f64s(3, "tau/alpha/gamma")?;
    let l2_normalize = match c.u8("l2 flag")? {
        0 => false,
        1 => true,
        other => bail!("{}: l2 flag must be 0 or 1, found {other}", path.display()),
    };

    let sizes = [d_in_v * d, d, d_in_t * d, d];
    let take_blocks = |c: &mut Cursor, what: &str| -> Result<Vec<Vec<f64>>> {
        sizes.iter().map(|&s| c.f64s(s, what)).collect()
    };
    let params_blocks = take_blocks(&mut c, "parameters")?;
    let t = c.u64("adam step count")?;
    let adam_scalars = c.f64s(3, "adam beta1/beta2/eps")?;
    let m = take_blocks(&mut c, "adam m")?;
    let v = take_blocks(&mut c, "adam v")?;
    let seed: [u8; 32] = c.take(32, "rng seed")?.try_into().unwrap();
    let word_pos = c.u128("rng word position")?;
    let stream = c.u64("rng stream")?;
    c.finish(&path.display().to_string())?;

    let mut blocks = params_blocks.into_iter();
    let params = AlignmentParams {
        visual: Projection {
            weight: Mat::from_vec(d_in_v, d, blocks.next().unwrap()),
            bias: blocks.next().unwrap(),
        },
        semantic: Projection {
            weight: Mat::from_vec(d_in_t, d, blocks.next().unwrap()),
            bias: blocks.next().unwrap(),
        },
        tau: scalars[0],
        alpha: scalars[1],
        gamma: scalars[2],
        l2_normalize,
    };
    if let Some(block) = params.first_non_finite_block() {
        bail!("{}: non-finite value in {block}", path.display());
    }
    if !(params.tau > 0.0) || !(0.0..=1.0).contains(&params.alpha) || !(params.gamma >= 0.0) {
        bail!("{}: tau/alpha/gamma out of range", path.display());
    }
    Ok(Checkpoint {
        params,
        k,
        adam: AdamState {
            t,
            m,
            v,
            beta1: adam_scalars[0],
            beta2: adam_scalars[1],
            eps: adam_scalars[2],
        },
        rng: RngSnapshot { seed, word_pos, stream },
    })
}
