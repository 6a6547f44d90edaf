//! Synthetic zero-shot benchmark with a known ground truth.
//!
//! Every class is a weighted mixture of a few latent concepts drawn from a
//! pool shared across all classes. Videos are noisy copies of the class
//! prototype pushed through a random linear backbone; descriptions are noisy
//! copies of the full prototype in latent space; the definition carries only
//! a fidelity-controlled share of the class's heaviest concepts, so
//! definitions are deliberately partial and descriptions fill in the rest. Shared
//! concepts between seen and unseen classes are what make transfer possible
//! at all — and what the cycle term has to latch onto.
//!
//! Each class samples from its own counter-derived stream, so the data for
//! class c never depends on how many draws other classes consumed.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::matrix::Mat;
use crate::rng::{self, Gaussian};
use crate::types::{ActionClass, ConfigError, FeatureStore, ZsarSplit};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    /// Size of the shared concept pool.
    pub n_concepts: usize,
    pub n_seen: usize,
    pub n_unseen: usize,
    /// Concepts mixed into each class, sampled without replacement.
    pub concepts_per_class: usize,
    pub videos_per_class: usize,
    pub descriptions_per_class: usize,
    /// Noise added to video latents before the backbone projection.
    pub visual_noise_sigma: f64,
    /// Noise added to definition and description latents.
    pub text_noise_sigma: f64,
    /// Fraction of a class's concepts its definition covers (ceiling'd), in
    /// [0, 1]. Below 1 the definition is an incomplete account of the class.
    pub definition_fidelity: f64,
    /// Latent (text-side) dimensionality; must fit the concept pool.
    pub d_latent: usize,
    /// Video feature dimensionality after the backbone.
    pub d_in_video: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_concepts: 12,
            n_seen: 10,
            n_unseen: 5,
            concepts_per_class: 3,
            videos_per_class: 30,
            descriptions_per_class: 12,
            visual_noise_sigma: 0.3,
            text_noise_sigma: 0.1,
            definition_fidelity: 0.4,
            d_latent: 16,
            d_in_video: 24,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn err(field: &'static str, message: &str) -> Result<(), ConfigError> {
            Err(ConfigError { field, message: String::from(message) })
        }
        if self.n_concepts < 1 {
            return err("n_concepts", "must be at least 1");
        }
        if self.n_seen < 1 || self.n_unseen < 1 {
            return err("n_seen/n_unseen", "both class sets must be non-empty");
        }
        if self.concepts_per_class < 1 || self.concepts_per_class > self.n_concepts {
            return err("concepts_per_class", "must lie in [1, n_concepts]");
        }
        if self.videos_per_class < 1 {
            return err("videos_per_class", "must be at least 1");
        }
        if self.descriptions_per_class < 1 {
            return err("descriptions_per_class", "must be at least 1");
        }
        if !(self.visual_noise_sigma >= 0.0) || !self.visual_noise_sigma.is_finite() {
            return err("visual_noise_sigma", "must be finite and >= 0");
        }
        if !(self.text_noise_sigma >= 0.0) || !self.text_noise_sigma.is_finite() {
            return err("text_noise_sigma", "must be finite and >= 0");
        }
        if !(0.0..=1.0).contains(&self.definition_fidelity) {
            return err("definition_fidelity", "must lie in [0, 1]");
        }
        if self.d_latent < self.n_concepts {
            return err("d_latent", "must be at least n_concepts");
        }
        if self.d_in_video < 1 {
            return err("d_in_video", "must be at least 1");
        }
        Ok(())
    }

    fn n_classes(&self) -> usize {
        self.n_seen + self.n_unseen
    }
}

/// Everything sampled for one class, still in latent space. Produced by a
/// single pass over the class's stream; `generate` and the oracle both build
/// on this so they can never drift apart.
struct ClassBlueprint {
    concepts: Vec<usize>,
    prototype: Vec<f64>,
    definition: Vec<f64>,
    descriptions: Vec<Vec<f64>>,
    video_latents: Vec<Vec<f64>>,
}

fn blueprint(spec: &SynthSpec, class: usize) -> ClassBlueprint {
    let mut stream = rng::stream(spec.seed, class as u64 + 1);
    let mut gauss = Gaussian::new();
    let cpc = spec.concepts_per_class;

    let mut pool: Vec<usize> = (0..spec.n_concepts).collect();
    rng::shuffle(&mut stream, &mut pool);
    let concepts = pool[..cpc].to_vec();
    let weights = rng::uniform_vec(&mut stream, cpc, 0.5, 1.0);

    let mut prototype = alloc::vec![0.0; spec.d_latent];
    for (&c, &w) in concepts.iter().zip(&weights) {
        prototype[c] = w;
    }

    // The definition names only the ceil(fidelity * cpc) heaviest concepts:
    // a terse gloss keeps the salient parts of an action and drops the rest.
    let covered = (libm::ceil(spec.definition_fidelity * cpc as f64) as usize).min(cpc);
    let mut by_weight: Vec<usize> = (0..cpc).collect();
    by_weight.sort_by(|&a, &b| weights[b].partial_cmp(&weights[a]).unwrap().then(a.cmp(&b)));
    let mut definition = alloc::vec![0.0; spec.d_latent];
    for &i in by_weight.iter().take(covered) {
        definition[concepts[i]] = weights[i];
    }
    for v in &mut definition {
        *v += spec.text_noise_sigma * gauss.sample(&mut stream);
    }

    let noisy_copy = |of: &[f64], sigma: f64, stream: &mut rng::ChaCha12Rng, g: &mut Gaussian| {
        of.iter().map(|&v| v + sigma * g.sample(stream)).collect::<Vec<f64>>()
    };
    let descriptions = (0..spec.descriptions_per_class)
        .map(|_| noisy_copy(&prototype, spec.text_noise_sigma, &mut stream, &mut gauss))
        .collect();
    let video_latents = (0..spec.videos_per_class)
        .map(|_| noisy_copy(&prototype, spec.visual_noise_sigma, &mut stream, &mut gauss))
        .collect();

    ClassBlueprint { concepts, prototype, definition, descriptions, video_latents }
}

/// Random linear backbone taking latents to video features, from stream 0.
fn backbone(spec: &SynthSpec) -> Mat {
    let mut stream = rng::stream(spec.seed, 0);
    let mut gauss = Gaussian::new();
    let scale = 1.0 / libm::sqrt(spec.d_latent as f64);
    let mut b = Mat::zeros(spec.d_latent, spec.d_in_video);
    for v in b.data_mut() {
        *v = scale * gauss.sample(&mut stream);
    }
    b
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub videos: FeatureStore,
    pub definitions: FeatureStore,
    pub descriptions: FeatureStore,
    pub classes: Vec<ActionClass>,
    pub split: ZsarSplit,
}

/// Build the full benchmark: stores, class metadata and a split whose train
/// part holds every seen video while unseen videos alternate val/test.
pub fn generate(spec: &SynthSpec) -> Result<SynthData, ConfigError> {
    spec.validate()?;
    let b = backbone(spec);
    let n_classes = spec.n_classes();

    let mut vid_ids = Vec::new();
    let mut vid_labels = Vec::new();
    let mut vid_rows = Vec::new();
    let mut def_ids = Vec::new();
    let mut def_labels = Vec::new();
    let mut def_rows = Vec::new();
    let mut desc_ids = Vec::new();
    let mut desc_labels = Vec::new();
    let mut desc_rows = Vec::new();
    let mut classes = Vec::new();
    let mut train_items = alloc::collections::BTreeSet::new();
    let mut val_items = alloc::collections::BTreeSet::new();
    let mut test_items = alloc::collections::BTreeSet::new();

    for c in 0..n_classes {
        let bp = blueprint(spec, c);
        let label = c as u32;
        let seen = c < spec.n_seen;

        def_ids.push(format!("def{c:04}"));
        def_labels.push(label);
        def_rows.extend(bp.definition);

        for (i, d) in bp.descriptions.iter().enumerate() {
            desc_ids.push(format!("desc{c:04}_{i:04}"));
            desc_labels.push(label);
            desc_rows.extend(d.iter().copied());
        }

        let latents = Mat::from_vec(
            spec.videos_per_class,
            spec.d_latent,
            bp.video_latents.concat(),
        );
        let projected = latents.matmul(&b);
        for i in 0..spec.videos_per_class {
            let id = format!("vid{c:04}_{i:04}");
            vid_labels.push(label);
            vid_rows.extend(projected.row(i).iter().copied());
            if seen {
                train_items.insert(id.clone());
            } else if i % 2 == 0 {
                val_items.insert(id.clone());
            } else {
                test_items.insert(id.clone());
            }
            vid_ids.push(id);
        }

        let concept_list =
            bp.concepts.iter().map(|c| format!("{c}")).collect::<Vec<_>>().join(" ");
        classes.push(ActionClass::new(
            label,
            &format!("synthetic action {c:04}"),
            &format!("weighted mixture of concepts {concept_list}"),
            Vec::new(),
        ));
    }

    let n_videos = vid_ids.len();
    let n_descs = desc_ids.len();
    let expect = |r: Result<FeatureStore, crate::types::DataError>| {
        r.expect("generator emits unique ids and finite features")
    };
    let videos = expect(FeatureStore::new(
        vid_ids,
        vid_labels,
        Mat::from_vec(n_videos, spec.d_in_video, vid_rows),
    ));
    let definitions = expect(FeatureStore::new(
        def_ids,
        def_labels,
        Mat::from_vec(n_classes, spec.d_latent, def_rows),
    ));
    let descriptions = expect(FeatureStore::new(
        desc_ids,
        desc_labels,
        Mat::from_vec(n_descs, spec.d_latent, desc_rows),
    ));

    let split = ZsarSplit {
        split_id: format!("synth-{}", spec.seed),
        seen_classes: (0..spec.n_seen as u32).collect(),
        unseen_classes: (spec.n_seen as u32..n_classes as u32).collect(),
        cycle_classes: None,
        train_items,
        val_items,
        test_items,
    };
    Ok(SynthData { videos, definitions, descriptions, classes, split })
}

/// Exhaustive dot-product table between videos and class features, written
/// as scalar loops with no shared code or vectorization. Tests pit the
/// production scoring path against this; it is not part of that path.
pub fn oracle_scores(videos: &Mat, class_features: &Mat) -> Mat {
    let mut table = Mat::zeros(videos.rows(), class_features.rows());
    for i in 0..videos.rows() {
        for j in 0..class_features.rows() {
            let mut score = 0.0;
            for c in 0..videos.cols() {
                score += videos.get(i, c) * class_features.get(j, c);
            }
            table.set(i, j, score);
        }
    }
    table
}

/// Latent-space ceiling for the benchmark: classify every unseen video's
/// noisy latent against the true unseen prototypes by plain dot products,
/// replaying the generator's streams with scalar loops only. The trained
/// pipeline works from the projected features, so this is the score to
/// compare against, not to reach.
pub fn oracle_unseen_top1(spec: &SynthSpec) -> Result<f64, ConfigError> {
    spec.validate()?;
    let unseen: Vec<ClassBlueprint> =
        (spec.n_seen..spec.n_classes()).map(|c| blueprint(spec, c)).collect();
    let mut hits = 0usize;
    let mut total = 0usize;
    for (own, bp) in unseen.iter().enumerate() {
        for latent in &bp.video_latents {
            let mut best = 0usize;
            let mut best_score = f64::NEG_INFINITY;
            for (j, other) in unseen.iter().enumerate() {
                let mut score = 0.0;
                for (a, b) in latent.iter().zip(&other.prototype) {
                    score += a * b;
                }
                if score > best_score {
                    best_score = score;
                    best = j;
                }
            }
            hits += usize::from(best == own);
            total += 1;
        }
    }
    Ok(hits as f64 / total as f64)
}
