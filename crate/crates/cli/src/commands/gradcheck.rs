//! Numerical validation of the analytic gradients on a randomly generated
//! problem instance: compare every parameter's analytic derivative against a
//! central finite difference of the loss and report the worst relative error
//! per parameter block.

use anyhow::{bail, Result};
use zsar_core::align::{
    finite_difference_check, AlignmentParams, Batch, ClassTextFeatures, FdReport, PARAM_BLOCKS,
};
use zsar_core::rng::{self, ChaCha12Rng};
use zsar_core::types::{Reduction, RunConfig};
use zsar_core::Mat;

#[derive(Debug, Clone)]
pub struct GradcheckSpec {
    pub n: usize,
    pub seen: usize,
    pub unseen: usize,
    pub d_in: usize,
    pub d: usize,
    pub descriptions_per_class: usize,
    pub tau: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub l2_normalize: bool,
    pub reduction: Reduction,
    pub seed: u64,
    pub h: f64,
    pub tolerance: f64,
}

impl Default for GradcheckSpec {
    fn default() -> Self {
        GradcheckSpec {
            n: 8,
            seen: 5,
            unseen: 4,
            d_in: 16,
            d: 16,
            descriptions_per_class: 3,
            tau: 0.1,
            alpha: 0.5,
            gamma: 0.1,
            l2_normalize: false,
            reduction: Reduction::Mean,
            seed: 0,
            h: 1e-5,
            tolerance: 1e-6,
        }
    }
}

/// A random, fully populated problem instance. Parameters come from stream 0
/// of the seed, data from stream 1.
pub fn random_instance(
    spec: &GradcheckSpec,
) -> (AlignmentParams, Mat, Vec<usize>, ClassTextFeatures, Option<ClassTextFeatures>) {
    let cfg = RunConfig {
        d: spec.d,
        tau: spec.tau,
        alpha: spec.alpha,
        gamma: spec.gamma,
        l2_normalize: spec.l2_normalize,
        seed: spec.seed,
        ..RunConfig::default()
    };
    let mut param_stream = rng::stream(spec.seed, 0);
    let params = AlignmentParams::init(&cfg, spec.d_in, spec.d_in, &mut param_stream);

    let mut data_stream = rng::stream(spec.seed, 1);
    let videos = Mat::from_vec(
        spec.n,
        spec.d_in,
        rng::uniform_vec(&mut data_stream, spec.n * spec.d_in, -1.0, 1.0),
    );
    let labels: Vec<usize> = (0..spec.n).map(|i| i % spec.seen).collect();

    let text_for = |first: u32, count: usize, stream: &mut ChaCha12Rng| ClassTextFeatures {
        class_ids: (first..first + count as u32).collect(),
        definitions: Mat::from_vec(
            count,
            spec.d_in,
            rng::uniform_vec(stream, count * spec.d_in, -1.0, 1.0),
        ),
        desc_groups: Some(
            (0..count)
                .map(|_| {
                    Mat::from_vec(
                        spec.descriptions_per_class,
                        spec.d_in,
                        rng::uniform_vec(
                            stream,
                            spec.descriptions_per_class * spec.d_in,
                            -1.0,
                            1.0,
                        ),
                    )
                })
                .collect(),
        ),
    };
    let seen_text = text_for(0, spec.seen, &mut data_stream);
    let cycle_text = (spec.gamma > 0.0)
        .then(|| text_for(spec.seen as u32, spec.unseen, &mut data_stream));

    (params, videos, labels, seen_text, cycle_text)
}

pub fn check(spec: &GradcheckSpec) -> Result<FdReport> {
    let (params, videos, labels, seen_text, cycle_text) = random_instance(spec);
    let batch = Batch { videos_raw: &videos, labels: &labels };
    let report = finite_difference_check(
        &params,
        &batch,
        &seen_text,
        cycle_text.as_ref(),
        spec.reduction,
        spec.h,
    )?;
    Ok(report)
}

pub fn gradcheck_cmd(spec: &GradcheckSpec) -> Result<()> {
    let report = check(spec)?;
    println!(
        "instance: n={} seen={} unseen={} d_in={} d={} alpha={} gamma={} l2={} seed={}",
        spec.n,
        spec.seen,
        spec.unseen,
        spec.d_in,
        spec.d,
        spec.alpha,
        spec.gamma,
        spec.l2_normalize,
        spec.seed
    );
    for (name, err) in PARAM_BLOCKS.iter().zip(report.per_block) {
        println!("{name:<16} max relative error {err:.3e}");
    }
    println!("overall {:.3e} (h = {:.1e}, tolerance {:.1e})", report.max, spec.h, spec.tolerance);
    if report.max > spec.tolerance {
        bail!("gradient check failed: {:.3e} exceeds {:.1e}", report.max, spec.tolerance);
    }
    println!("gradients agree with finite differences");
    Ok(())
}
