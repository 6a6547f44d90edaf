//! Shared data model: feature stores, class metadata, splits, run config.
//!
//! Invariants are enforced at construction so downstream math never has to
//! re-check them. A zero-shot split partitions classes into disjoint seen and
//! unseen sets; train items carry seen labels, val/test items unseen labels.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::matrix::Mat;
use crate::textproc;

#[derive(Debug, Clone, PartialEq)]
pub enum DataError {
    /// Parallel arrays of a store disagree in length.
    LengthMismatch { what: &'static str, left: usize, right: usize },
    NonFiniteFeature { row: usize, col: usize, id: String },
    DuplicateId { id: String },
    ZeroDim,
    /// Embedding table row whose width differs from the declared dimension.
    BadVectorWidth { token: String, got: usize, want: usize },
    EmptyToken,
    ClassInBothSets { class_id: u32 },
    CycleClassIsSeen { class_id: u32 },
    EmptyCycleSet,
    ItemInMultipleSets { id: String },
    BadSplitId { reason: &'static str },
    WhitespaceInId { id: String },
    MissingItem { id: String, part: &'static str },
    /// Item label on the wrong side of the seen/unseen divide.
    LabelOnWrongSide { id: String, label: u32, part: &'static str },
    /// Item label in neither the seen nor the unseen set.
    LabelOutsideSplit { id: String, label: u32, part: &'static str },
    MissingClassRow { class_id: u32 },
    DuplicateClassRow { class_id: u32 },
    /// A class set the run depends on has no members.
    EmptySet { which: &'static str },
    /// The config asks for content features (alpha < 1) but no description
    /// store was supplied.
    MissingDescriptionStore,
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataError::LengthMismatch { what, left, right } => {
                write!(f, "{what}: lengths disagree ({left} vs {right})")
            }
            DataError::NonFiniteFeature { row, col, id } => {
                write!(f, "non-finite feature at row {row} (id '{id}'), column {col}")
            }
            DataError::DuplicateId { id } => write!(f, "duplicate item id '{id}'"),
            DataError::ZeroDim => write!(f, "feature dimensionality must be at least 1"),
            DataError::BadVectorWidth { token, got, want } => {
                write!(f, "embedding for '{token}' has {got} values, table dimension is {want}")
            }
            DataError::EmptyToken => write!(f, "embedding table contains an empty token"),
            DataError::ClassInBothSets { class_id } => {
                write!(f, "class {class_id} appears in both seen and unseen sets")
            }
            DataError::CycleClassIsSeen { class_id } => {
                write!(f, "cycle class set contains seen class {class_id}")
            }
            DataError::EmptyCycleSet => {
                write!(f, "cycle class set is declared but empty; omit it to use the unseen set")
            }
            DataError::ItemInMultipleSets { id } => {
                write!(f, "item '{id}' assigned to more than one of train/val/test")
            }
            DataError::BadSplitId { reason } => write!(f, "bad split id: {reason}"),
            DataError::WhitespaceInId { id } => {
                write!(f, "item id '{id}' contains whitespace, which the split format cannot carry")
            }
            DataError::MissingItem { id, part } => {
                write!(f, "{part} item '{id}' is not present in the video store")
            }
            DataError::LabelOnWrongSide { id, label, part } => {
                write!(f, "{part} item '{id}' has label {label} from the opposite class set")
            }
            DataError::LabelOutsideSplit { id, label, part } => {
                write!(f, "{part} item '{id}' has label {label} outside both class sets")
            }
            DataError::MissingClassRow { class_id } => {
                write!(f, "no definition feature row for class {class_id}")
            }
            DataError::DuplicateClassRow { class_id } => {
                write!(f, "more than one definition feature row for class {class_id}")
            }
            DataError::EmptySet { which } => write!(f, "the {which} class set is empty"),
            DataError::MissingDescriptionStore => write!(
                f,
                "alpha < 1 needs description features; supply a description store \
                 or set alpha = 1"
            ),
        }
    }
}

impl core::error::Error for DataError {}

/// Feature vectors for a set of items (videos, definitions, or descriptions),
/// one row per item, each row tagged with a class label.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStore {
    ids: Vec<String>,
    labels: Vec<u32>,
    features: Mat,
    by_id: BTreeMap<String, usize>,
}

impl FeatureStore {
    pub fn new(ids: Vec<String>, labels: Vec<u32>, features: Mat) -> Result<Self, DataError> {
        if ids.len() != features.rows() {
            return Err(DataError::LengthMismatch {
                what: "ids vs feature rows",
                left: ids.len(),
                right: features.rows(),
            });
        }
        if labels.len() != features.rows() {
            return Err(DataError::LengthMismatch {
                what: "labels vs feature rows",
                left: labels.len(),
                right: features.rows(),
            });
        }
        if features.cols() == 0 {
            return Err(DataError::ZeroDim);
        }
        if let Some((row, col)) = features.first_non_finite() {
            return Err(DataError::NonFiniteFeature { row, col, id: ids[row].clone() });
        }
        let mut by_id = BTreeMap::new();
        for (i, id) in ids.iter().enumerate() {
            if by_id.insert(id.clone(), i).is_some() {
                return Err(DataError::DuplicateId { id: id.clone() });
            }
        }
        Ok(FeatureStore { ids, labels, features, by_id })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn features(&self) -> &Mat {
        &self.features
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    /// Row indices whose label equals `class_id`, in store order.
    pub fn rows_for_class(&self, class_id: u32) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == class_id).collect()
    }
}

/// Word-vector table with a fixed dimension. Lookups are exact; the text
/// pipeline lowercases tokens before querying, so tables are expected to
/// carry lowercase keys.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    entries: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize, rows: Vec<(String, Vec<f64>)>) -> Result<Self, DataError> {
        if dim == 0 {
            return Err(DataError::ZeroDim);
        }
        let mut entries = BTreeMap::new();
        for (token, vec) in rows {
            if token.is_empty() {
                return Err(DataError::EmptyToken);
            }
            if vec.len() != dim {
                return Err(DataError::BadVectorWidth { token, got: vec.len(), want: dim });
            }
            if let Some(col) = vec.iter().position(|v| !v.is_finite()) {
                return Err(DataError::NonFiniteFeature { row: entries.len(), col, id: token });
            }
            if entries.insert(token.clone(), vec).is_some() {
                return Err(DataError::DuplicateId { id: token });
            }
        }
        Ok(EmbeddingTable { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.entries.get(token).map(|v| v.as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Vec<f64>)> {
        self.entries.iter()
    }
}

/// One action class with its raw and canonical names, its definition text,
/// and whatever crawled descriptions survived collection.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionClass {
    pub class_id: u32,
    pub name: String,
    pub canonical_name: String,
    pub definition: String,
    pub descriptions: Vec<String>,
}

impl ActionClass {
    pub fn new(class_id: u32, name: &str, definition: &str, descriptions: Vec<String>) -> Self {
        ActionClass {
            class_id,
            name: String::from(name),
            canonical_name: textproc::normalize_action_name(name, &textproc::Stopwords::default()),
            definition: String::from(definition),
            descriptions,
        }
    }
}

/// Zero-shot split: disjoint seen/unseen class sets plus per-item train, val
/// and test assignments. The optional cycle set names the classes whose
/// semantics anchor the cycle-consistency term during training; it defaults
/// to the unseen set.
#[derive(Debug, Clone, PartialEq)]
pub struct ZsarSplit {
    pub split_id: String,
    pub seen_classes: BTreeSet<u32>,
    pub unseen_classes: BTreeSet<u32>,
    pub cycle_classes: Option<BTreeSet<u32>>,
    pub train_items: BTreeSet<String>,
    pub val_items: BTreeSet<String>,
    pub test_items: BTreeSet<String>,
}

impl ZsarSplit {
    pub fn validate(&self) -> Result<(), DataError> {
        if self.split_id.is_empty() {
            return Err(DataError::BadSplitId { reason: "empty" });
        }
        if self.split_id.chars().any(char::is_whitespace) {
            return Err(DataError::BadSplitId { reason: "contains whitespace" });
        }
        if let Some(&c) = self.seen_classes.intersection(&self.unseen_classes).next() {
            return Err(DataError::ClassInBothSets { class_id: c });
        }
        if let Some(cycle) = &self.cycle_classes {
            if cycle.is_empty() {
                return Err(DataError::EmptyCycleSet);
            }
            if let Some(&c) = cycle.intersection(&self.seen_classes).next() {
                return Err(DataError::CycleClassIsSeen { class_id: c });
            }
        }
        for id in self.train_items.iter().chain(&self.val_items).chain(&self.test_items) {
            if id.chars().any(char::is_whitespace) {
                return Err(DataError::WhitespaceInId { id: id.clone() });
            }
        }
        for id in &self.train_items {
            if self.val_items.contains(id) || self.test_items.contains(id) {
                return Err(DataError::ItemInMultipleSets { id: id.clone() });
            }
        }
        if let Some(id) = self.val_items.intersection(&self.test_items).next() {
            return Err(DataError::ItemInMultipleSets { id: id.clone() });
        }
        Ok(())
    }

    /// Classes anchoring the cycle term: the declared set, else unseen.
    pub fn cycle_classes(&self) -> &BTreeSet<u32> {
        self.cycle_classes.as_ref().unwrap_or(&self.unseen_classes)
    }

    /// Check every item of every part against the video store: present, and
    /// labeled from the correct side of the split.
    pub fn validate_items(&self, videos: &FeatureStore) -> Result<(), DataError> {
        let parts: [(&BTreeSet<String>, &'static str, bool); 3] = [
            (&self.train_items, "train", true),
            (&self.val_items, "val", false),
            (&self.test_items, "test", false),
        ];
        for (items, part, wants_seen) in parts {
            for id in items {
                let row = videos
                    .index_of(id)
                    .ok_or_else(|| DataError::MissingItem { id: id.clone(), part })?;
                let label = videos.labels()[row];
                let (good, other) = if wants_seen {
                    (&self.seen_classes, &self.unseen_classes)
                } else {
                    (&self.unseen_classes, &self.seen_classes)
                };
                if !good.contains(&label) {
                    return Err(if other.contains(&label) {
                        DataError::LabelOnWrongSide { id: id.clone(), label, part }
                    } else {
                        DataError::LabelOutsideSplit { id: id.clone(), label, part }
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    Mean,
    Sum,
}

impl Reduction {
    pub fn as_str(self) -> &'static str {
        match self {
            Reduction::Mean => "mean",
            Reduction::Sum => "sum",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mean" => Some(Reduction::Mean),
            "sum" => Some(Reduction::Sum),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config field `{}`: {}", self.field, self.message)
    }
}

impl core::error::Error for ConfigError {}

/// Everything a training run depends on besides the data itself. Two runs
/// with equal configs (seed included) produce bitwise-identical artifacts.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Shared embedding dimension both modalities project into.
    pub d: usize,
    /// Descriptions kept per class, after relevance ranking.
    pub k: usize,
    /// Softmax temperature for every similarity in the model.
    pub tau: f64,
    /// Fusion weight: alpha·definition + (1-alpha)·content. The endpoints
    /// double as ablation switches (1 = definitions only, 0 = content only).
    pub alpha: f64,
    /// Weight of the cycle-consistency term; 0 disables it.
    pub gamma: f64,
    pub lr: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Fraction of total steps spent in linear warmup before cosine decay.
    pub warmup_fraction: f64,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub reduction: Reduction,
    /// Apply weight decay decoupled from the adaptive step instead of folding
    /// it into the gradient.
    pub decoupled_weight_decay: bool,
    /// Experimental: L2-normalize projected features before dot products.
    pub l2_normalize: bool,
    /// Early-stopping patience in epochs without val improvement; 0 disables.
    pub patience: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            d: 512,
            k: 100,
            tau: 0.1,
            alpha: 0.5,
            gamma: 0.1,
            lr: 1e-3,
            weight_decay: 1e-4,
            batch_size: 512,
            epochs: 50,
            warmup_fraction: 0.1,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            reduction: Reduction::Mean,
            decoupled_weight_decay: false,
            l2_normalize: false,
            patience: 10,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn err(field: &'static str, message: &str) -> Result<(), ConfigError> {
            Err(ConfigError { field, message: String::from(message) })
        }
        if self.d < 1 {
            return err("d", "must be at least 1");
        }
        if self.k < 1 {
            return err("k", "must be at least 1");
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return err("tau", "must be finite and > 0");
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return err("alpha", "must lie in [0, 1]");
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return err("gamma", "must be finite and >= 0");
        }
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return err("lr", "must be finite and > 0");
        }
        if !(self.weight_decay >= 0.0) || !self.weight_decay.is_finite() {
            return err("weight_decay", "must be finite and >= 0");
        }
        if self.batch_size < 1 {
            return err("batch_size", "must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.warmup_fraction) {
            return err("warmup_fraction", "must lie in [0, 1]");
        }
        if !(0.0..1.0).contains(&self.beta1) {
            return err("beta1", "must lie in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.beta2) {
            return err("beta2", "must lie in [0, 1)");
        }
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return err("eps", "must be finite and > 0");
        }
        Ok(())
    }
}
