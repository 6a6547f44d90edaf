//! Synthetic benchmark specs as `key = value` lines, mirroring the run
//! config format: a file sets any subset of fields, the rest keep defaults,
//! unknown keys are errors, and `gen` echoes the effective spec next to the
//! data it generates.

use std::path::Path;

use anyhow::{bail, Context, Result};
use zsar_core::synth::SynthSpec;

use crate::fsutil::{atomic_write, read_string};

/// Every field, in the order `to_text` prints them.
const KEYS: [&str; 12] = [
    "n_concepts",
    "n_seen",
    "n_unseen",
    "concepts_per_class",
    "videos_per_class",
    "descriptions_per_class",
    "visual_noise_sigma",
    "text_noise_sigma",
    "definition_fidelity",
    "d_latent",
    "d_in_video",
    "seed",
];

pub fn to_text(spec: &SynthSpec) -> String {
    format!(
        "n_concepts = {}\nn_seen = {}\nn_unseen = {}\nconcepts_per_class = {}\n\
         videos_per_class = {}\ndescriptions_per_class = {}\nvisual_noise_sigma = {}\n\
         text_noise_sigma = {}\ndefinition_fidelity = {}\nd_latent = {}\nd_in_video = {}\n\
         seed = {}\n",
        spec.n_concepts,
        spec.n_seen,
        spec.n_unseen,
        spec.concepts_per_class,
        spec.videos_per_class,
        spec.descriptions_per_class,
        spec.visual_noise_sigma,
        spec.text_noise_sigma,
        spec.definition_fidelity,
        spec.d_latent,
        spec.d_in_video,
        spec.seed,
    )
}

pub fn write(path: &Path, spec: &SynthSpec) -> Result<()> {
    spec.validate()?;
    atomic_write(path, to_text(spec).as_bytes())
}

pub fn parse(text: &str, origin: &str) -> Result<SynthSpec> {
    let mut spec = SynthSpec::default();
    let mut seen: Vec<&str> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = || format!("{origin}:{}", lineno + 1);
        let (key, value) =
            line.split_once('=').with_context(|| format!("{}: expected 'key = value'", at()))?;
        let key = key.trim();
        let value = value.trim();
        let known = KEYS
            .iter()
            .find(|&&k| k == key)
            .with_context(|| format!("{}: unknown key '{key}'", at()))?;
        if seen.contains(known) {
            bail!("{}: duplicate key '{key}'", at());
        }
        seen.push(known);

        macro_rules! set {
            ($field:ident) => {
                spec.$field = value
                    .parse()
                    .with_context(|| format!("{}: bad value '{value}' for {key}", at()))?
            };
        }
        match *known {
            "n_concepts" => set!(n_concepts),
            "n_seen" => set!(n_seen),
            "n_unseen" => set!(n_unseen),
            "concepts_per_class" => set!(concepts_per_class),
            "videos_per_class" => set!(videos_per_class),
            "descriptions_per_class" => set!(descriptions_per_class),
            "visual_noise_sigma" => set!(visual_noise_sigma),
            "text_noise_sigma" => set!(text_noise_sigma),
            "definition_fidelity" => set!(definition_fidelity),
            "d_latent" => set!(d_latent),
            "d_in_video" => set!(d_in_video),
            "seed" => set!(seed),
            _ => unreachable!(),
        }
    }
    spec.validate().with_context(|| format!("validating {origin}"))?;
    Ok(spec)
}

pub fn read(path: &Path) -> Result<SynthSpec> {
    parse(&read_string(path)?, &path.display().to_string())
}
