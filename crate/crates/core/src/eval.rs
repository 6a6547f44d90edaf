//! Scoring: top-k accuracy, mean ± std aggregation over repeated runs, and
//! the ablation driver that trains named model variants side by side.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::align::{
    build_class_bank, encode_visual, predict, AlignError, AlignmentParams, ClassTextFeatures,
};
use crate::optim::{prepare_eval_set, prepare_training, train, EvalPart, EvalSet, TrainError};
use crate::types::{DataError, FeatureStore, RunConfig, ZsarSplit};

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    EmptyEvalSet,
    ZeroK,
    LengthMismatch { rankings: usize, labels: usize },
    /// A ranking row whose length differs from the class count.
    BadRanking { index: usize, got: usize, want: usize },
    BadLabel { index: usize, label: usize, n_classes: usize },
    NoRuns,
    UnknownVariant(String),
    /// A "+CIM" variant was requested but the base config has gamma = 0,
    /// so there is no cycle weight to restore.
    CycleDisabledInBase,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::EmptyEvalSet => write!(f, "evaluation set is empty"),
            EvalError::ZeroK => write!(f, "top-k needs k >= 1"),
            EvalError::LengthMismatch { rankings, labels } => {
                write!(f, "{rankings} rankings vs {labels} labels")
            }
            EvalError::BadRanking { index, got, want } => {
                write!(f, "ranking {index} has {got} entries, expected {want}")
            }
            EvalError::BadLabel { index, label, n_classes } => {
                write!(f, "label {label} at index {index} out of range for {n_classes} classes")
            }
            EvalError::NoRuns => write!(f, "nothing to aggregate"),
            EvalError::UnknownVariant(v) => write!(
                f,
                "unknown variant '{v}' (expected AD-only, VC-only or AD+VC, \
                 optionally with a +CIM suffix)"
            ),
            EvalError::CycleDisabledInBase => {
                write!(f, "+CIM variant requested but the base config has gamma = 0")
            }
        }
    }
}

impl core::error::Error for EvalError {}

/// Fraction of items whose true label appears in the first k ranked classes.
/// k larger than the class count behaves as the class count.
pub fn topk_accuracy(
    rankings: &[Vec<usize>],
    labels: &[usize],
    k: usize,
) -> Result<f64, EvalError> {
    if rankings.is_empty() {
        return Err(EvalError::EmptyEvalSet);
    }
    if k == 0 {
        return Err(EvalError::ZeroK);
    }
    if rankings.len() != labels.len() {
        return Err(EvalError::LengthMismatch { rankings: rankings.len(), labels: labels.len() });
    }
    let n_classes = rankings[0].len();
    let mut hits = 0usize;
    for (i, (ranking, &label)) in rankings.iter().zip(labels).enumerate() {
        if ranking.len() != n_classes {
            return Err(EvalError::BadRanking { index: i, got: ranking.len(), want: n_classes });
        }
        if label >= n_classes {
            return Err(EvalError::BadLabel { index: i, label, n_classes });
        }
        if ranking[..k.min(n_classes)].contains(&label) {
            hits += 1;
        }
    }
    Ok(hits as f64 / labels.len() as f64)
}

/// Mean and population standard deviation (divide by n) of a set of runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// The reporting format used in result tables: one decimal each side.
    pub fn render(&self) -> String {
        format!("{:.1} \u{b1} {:.1}", self.mean, self.std)
    }

    /// Both moments scaled by `factor` — e.g. 100 to report fractions as
    /// percentages.
    pub fn scaled(&self, factor: f64) -> MeanStd {
        MeanStd { mean: self.mean * factor, std: self.std * factor }
    }
}

pub fn aggregate(values: &[f64]) -> Result<MeanStd, EvalError> {
    if values.is_empty() {
        return Err(EvalError::NoRuns);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Ok(MeanStd { mean, std: libm::sqrt(var) })
}

/// Translate a variant name into a config. The stem picks the fusion:
/// "AD-only" fixes alpha = 1 (definitions only), "VC-only" fixes alpha = 0
/// (content only), "AD+VC" keeps the base alpha. A "+CIM" suffix restores the
/// base cycle weight; without it gamma is forced to 0.
pub fn variant_config(name: &str, base: &RunConfig) -> Result<RunConfig, EvalError> {
    let mut cfg = base.clone();
    let (stem, cim) = match name.strip_suffix("+CIM") {
        Some(stem) => (stem, true),
        None => (name, false),
    };
    cfg.alpha = match stem {
        "AD-only" => 1.0,
        "VC-only" => 0.0,
        "AD+VC" => base.alpha,
        _ => return Err(EvalError::UnknownVariant(name.to_string())),
    };
    cfg.gamma = if cim {
        if base.gamma == 0.0 {
            return Err(EvalError::CycleDisabledInBase);
        }
        base.gamma
    } else {
        0.0
    };
    Ok(cfg)
}

/// The stores an ablation draws from. Splits are evaluated on their test
/// items; each (variant, split) pair trains from the same seed so the
/// comparison is paired.
pub struct AblationInputs<'a> {
    pub videos: &'a FeatureStore,
    pub definitions: &'a FeatureStore,
    pub descriptions: Option<&'a FeatureStore>,
    pub splits: &'a [ZsarSplit],
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub variant: String,
    /// Per-split accuracies, in split order, before aggregation.
    pub top1_runs: Vec<f64>,
    pub top5_runs: Vec<f64>,
    pub top1: MeanStd,
    pub top5: MeanStd,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AblationError {
    Eval(EvalError),
    Data(DataError),
    Train(TrainError),
    Align(AlignError),
}

impl fmt::Display for AblationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AblationError::Eval(e) => write!(f, "{e}"),
            AblationError::Data(e) => write!(f, "{e}"),
            AblationError::Train(e) => write!(f, "{e}"),
            AblationError::Align(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for AblationError {}

impl From<AlignError> for AblationError {
    fn from(e: AlignError) -> Self {
        AblationError::Align(e)
    }
}

impl From<EvalError> for AblationError {
    fn from(e: EvalError) -> Self {
        AblationError::Eval(e)
    }
}

impl From<DataError> for AblationError {
    fn from(e: DataError) -> Self {
        AblationError::Data(e)
    }
}

impl From<TrainError> for AblationError {
    fn from(e: TrainError) -> Self {
        AblationError::Train(e)
    }
}

/// Score one trained model on an eval set; returns (top-1, top-5).
pub fn score_test_set(
    params: &AlignmentParams,
    unseen_text: &ClassTextFeatures,
    set: &EvalSet,
) -> Result<(f64, f64), AblationError> {
    let bank = build_class_bank(params, unseen_text)?;
    let videos = encode_visual(params, &set.videos_raw)?;
    let preds = predict(&videos, &bank)?;
    let top1 = topk_accuracy(&preds.rankings, &set.labels, 1)?;
    let top5 = topk_accuracy(&preds.rankings, &set.labels, 5)?;
    Ok((top1, top5))
}

/// Train every variant on every split and aggregate test accuracy per
/// variant. Row order follows `variants`.
pub fn run_ablation(
    base: &RunConfig,
    variants: &[&str],
    inputs: &AblationInputs<'_>,
) -> Result<Vec<AblationRow>, AblationError> {
    let mut rows = Vec::with_capacity(variants.len());
    for &name in variants {
        let cfg = variant_config(name, base)?;
        let mut top1_runs = Vec::with_capacity(inputs.splits.len());
        let mut top5_runs = Vec::with_capacity(inputs.splits.len());
        for split in inputs.splits {
            let data = prepare_training(
                &cfg,
                inputs.videos,
                inputs.definitions,
                inputs.descriptions,
                split,
            )?;
            let outcome = train(&cfg, &data, |_| {})?;
            let test = prepare_eval_set(inputs.videos, split, EvalPart::Test)?;
            let (t1, t5) = score_test_set(&outcome.params, &data.unseen_text, &test)?;
            top1_runs.push(t1);
            top5_runs.push(t5);
        }
        rows.push(AblationRow {
            variant: name.to_string(),
            top1: aggregate(&top1_runs)?,
            top5: aggregate(&top5_runs)?,
            top1_runs,
            top5_runs,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn topk_counts_hits_and_clamps_k() {
        let rankings = vec![vec![2, 0, 1], vec![1, 2, 0], vec![0, 1, 2]];
        let labels = vec![2, 2, 2];
        assert_eq!(topk_accuracy(&rankings, &labels, 1).unwrap(), 1.0 / 3.0);
        assert_eq!(topk_accuracy(&rankings, &labels, 2).unwrap(), 2.0 / 3.0);
        assert_eq!(topk_accuracy(&rankings, &labels, 3).unwrap(), 1.0);
        // k beyond the class count behaves as the class count
        assert_eq!(topk_accuracy(&rankings, &labels, 10).unwrap(), 1.0);
    }

    #[test]
    fn topk_rejects_malformed_input() {
        let rankings = vec![vec![0, 1]];
        assert_eq!(topk_accuracy(&[], &[], 1), Err(EvalError::EmptyEvalSet));
        assert_eq!(topk_accuracy(&rankings, &[0], 0), Err(EvalError::ZeroK));
        assert_eq!(
            topk_accuracy(&rankings, &[0, 1], 1),
            Err(EvalError::LengthMismatch { rankings: 1, labels: 2 })
        );
        assert_eq!(
            topk_accuracy(&rankings, &[2], 1),
            Err(EvalError::BadLabel { index: 0, label: 2, n_classes: 2 })
        );
        let ragged = vec![vec![0, 1], vec![0]];
        assert_eq!(
            topk_accuracy(&ragged, &[0, 0], 1),
            Err(EvalError::BadRanking { index: 1, got: 1, want: 2 })
        );
    }

    #[test]
    fn aggregate_uses_population_std() {
        let m = aggregate(&[40.0, 42.0, 44.0]).unwrap();
        assert_eq!(m.mean, 42.0);
        assert!((m.std - 1.632_993_161_855_452_3).abs() < 1e-12);
        assert_eq!(m.render(), "42.0 \u{b1} 1.6");

        let single = aggregate(&[0.5]).unwrap();
        assert_eq!(single.std, 0.0);
        assert_eq!(aggregate(&[]), Err(EvalError::NoRuns));

        let frac = aggregate(&[0.40, 0.42, 0.44]).unwrap().scaled(100.0);
        assert_eq!(frac.render(), "42.0 \u{b1} 1.6");
    }

    #[test]
    fn variant_names_set_alpha_and_gamma() {
        let mut base = RunConfig::default();
        base.alpha = 0.7;
        base.gamma = 0.25;

        let v = variant_config("AD-only", &base).unwrap();
        assert_eq!((v.alpha, v.gamma), (1.0, 0.0));
        let v = variant_config("VC-only+CIM", &base).unwrap();
        assert_eq!((v.alpha, v.gamma), (0.0, 0.25));
        let v = variant_config("AD+VC", &base).unwrap();
        assert_eq!((v.alpha, v.gamma), (0.7, 0.0));
        let v = variant_config("AD+VC+CIM", &base).unwrap();
        assert_eq!((v.alpha, v.gamma), (0.7, 0.25));

        assert!(matches!(
            variant_config("nonsense", &base),
            Err(EvalError::UnknownVariant(_))
        ));
        let mut no_cycle = base.clone();
        no_cycle.gamma = 0.0;
        assert_eq!(
            variant_config("AD+VC+CIM", &no_cycle),
            Err(EvalError::CycleDisabledInBase)
        );
    }
}
