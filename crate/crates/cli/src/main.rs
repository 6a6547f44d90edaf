use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use zsar_cli::commands::export::BankSide;
use zsar_cli::commands::gradcheck::GradcheckSpec;
use zsar_cli::commands::{corpus, evalcmd, export, gen, gradcheck, traincmd};
use zsar_cli::formats::{runconfig, synthspec};
use zsar_core::optim::EvalPart;
use zsar_core::synth::SynthSpec;
use zsar_core::types::{Reduction, RunConfig};

/// Zero-shot action recognition over precomputed feature vectors: corpus
/// tooling, synthetic benchmarks, training, and evaluation.
#[derive(Parser)]
#[command(name = "zsar", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

/// Config file plus the overrides experiments sweep most; every other field
/// is set in the file.
#[derive(Args)]
struct ConfigArgs {
    /// Run configuration file (key = value lines); unset fields keep defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Training seed [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Training epochs [default: 50]
    #[arg(long)]
    epochs: Option<usize>,
    /// Definition/content fusion weight in [0, 1] [default: 0.5]
    #[arg(long)]
    alpha: Option<f64>,
    /// Cycle-consistency loss weight [default: 0.1]
    #[arg(long)]
    gamma: Option<f64>,
    /// Peak learning rate [default: 0.001]
    #[arg(long)]
    lr: Option<f64>,
    /// Videos per training step [default: 512]
    #[arg(long)]
    batch_size: Option<usize>,
    /// Shared embedding dimension [default: 512]
    #[arg(long)]
    d: Option<usize>,
    /// Descriptions kept per class [default: 100]
    #[arg(long)]
    k: Option<usize>,
    /// Softmax temperature [default: 0.1]
    #[arg(long)]
    tau: Option<f64>,
    /// Epochs without val improvement before stopping [default: 10]
    #[arg(long)]
    patience: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => runconfig::read(p)?,
            None => RunConfig::default(),
        };
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        apply!(seed, epochs, alpha, gamma, lr, batch_size, d, k, tau, patience);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Benchmark spec file plus per-field overrides; flags win over the file.
#[derive(Args)]
struct GenArgs {
    /// Benchmark spec file (key = value lines); unset fields keep defaults
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Size of the shared concept pool [default: 12]
    #[arg(long)]
    n_concepts: Option<usize>,
    /// Seen (training) classes [default: 10]
    #[arg(long)]
    n_seen: Option<usize>,
    /// Unseen (zero-shot) classes [default: 5]
    #[arg(long)]
    n_unseen: Option<usize>,
    /// Concepts mixed into each class [default: 3]
    #[arg(long)]
    concepts_per_class: Option<usize>,
    /// Videos generated per class [default: 30]
    #[arg(long)]
    videos_per_class: Option<usize>,
    /// Descriptions generated per class [default: 12]
    #[arg(long)]
    descriptions_per_class: Option<usize>,
    /// Noise on video latents before the backbone [default: 0.3]
    #[arg(long)]
    visual_noise_sigma: Option<f64>,
    /// Noise on definition and description latents [default: 0.1]
    #[arg(long)]
    text_noise_sigma: Option<f64>,
    /// Fraction of each class's concepts its definition covers [default: 0.4]
    #[arg(long)]
    definition_fidelity: Option<f64>,
    /// Latent (text-side) dimensionality [default: 16]
    #[arg(long)]
    d_latent: Option<usize>,
    /// Video feature dimensionality after the backbone [default: 24]
    #[arg(long)]
    d_in_video: Option<usize>,
    /// Generation seed [default: 0]
    #[arg(long)]
    seed: Option<u64>,
}

impl GenArgs {
    fn resolve(&self) -> Result<SynthSpec> {
        let mut spec = match &self.spec {
            Some(p) => synthspec::read(p)?,
            None => SynthSpec::default(),
        };
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { spec.$field = v; })*
            };
        }
        apply!(
            n_concepts,
            n_seen,
            n_unseen,
            concepts_per_class,
            videos_per_class,
            descriptions_per_class,
            visual_noise_sigma,
            text_noise_sigma,
            definition_fidelity,
            d_latent,
            d_in_video,
            seed
        );
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args)]
struct StoreArgs {
    /// Video feature store (.zsf1)
    #[arg(long)]
    videos: PathBuf,
    /// Definition feature store, one row per class (.zsf1)
    #[arg(long)]
    definitions: PathBuf,
    /// Description feature store (.zsf1); required whenever alpha < 1
    #[arg(long)]
    descriptions: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PartArg {
    Val,
    Test,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReductionArg {
    Mean,
    Sum,
}

#[derive(Subcommand)]
enum Cmd {
    /// Merge classes whose names normalize to the same canonical form
    Dedup {
        /// Input class metadata (class_id<TAB>name<TAB>definition)
        #[arg(long)]
        classes: PathBuf,
        /// Input descriptions (class_id<TAB>text)
        #[arg(long)]
        descriptions: Option<PathBuf>,
        #[arg(long)]
        out_classes: PathBuf,
        /// Where to write the pooled descriptions of merged classes
        #[arg(long)]
        out_descriptions: Option<PathBuf>,
    },
    /// Rank each class's descriptions by embedding similarity to its name
    Rank {
        #[arg(long)]
        classes: PathBuf,
        #[arg(long)]
        descriptions: PathBuf,
        /// Word vector table ('count dim' header, then 'token v1 .. vd')
        #[arg(long)]
        embeddings: PathBuf,
        /// Descriptions to keep per class
        #[arg(long, default_value_t = 100)]
        k: usize,
        /// Strip stopwords before embedding (default embeds all words)
        #[arg(long)]
        remove_stopwords: bool,
        /// Output TSV: class_id, description_index, score
        #[arg(long)]
        out: PathBuf,
    },
    /// Count classes, descriptions, sentences and tokens in a corpus
    Stats {
        #[arg(long)]
        classes: PathBuf,
        #[arg(long)]
        descriptions: Option<PathBuf>,
    },
    /// Generate a synthetic benchmark directory with known ground truth
    Gen {
        /// Output directory (created if missing)
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        spec: GenArgs,
    },
    /// Train a model and write a checkpoint (plus optional metrics file)
    Train {
        #[command(flatten)]
        stores: StoreArgs,
        /// Split file
        #[arg(long)]
        split: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out_checkpoint: PathBuf,
        /// Per-epoch metrics file (key=value fields, one line per epoch)
        #[arg(long)]
        out_metrics: Option<PathBuf>,
    },
    /// Score a checkpoint on a split's val or test items
    Eval {
        #[command(flatten)]
        stores: StoreArgs,
        #[arg(long)]
        split: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, value_enum, default_value_t = PartArg::Test)]
        part: PartArg,
        /// Also write the result record (key=value fields) to this file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train model variants side by side and print aggregated test accuracy
    Ablate {
        #[command(flatten)]
        stores: StoreArgs,
        /// One or more split files; results aggregate across them
        #[arg(long, num_args = 1.., required = true)]
        splits: Vec<PathBuf>,
        /// Comma-separated variant names: AD-only, VC-only or AD+VC, each
        /// optionally suffixed with +CIM
        #[arg(long, default_value = "AD-only,VC-only,AD+VC,AD+VC+CIM")]
        variants: String,
        #[command(flatten)]
        config: ConfigArgs,
        /// Also write full-precision per-variant records to this file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare analytic gradients against finite differences
    Gradcheck {
        #[arg(long, default_value_t = GradcheckSpec::default().n)]
        n: usize,
        #[arg(long, default_value_t = GradcheckSpec::default().seen)]
        seen: usize,
        #[arg(long, default_value_t = GradcheckSpec::default().unseen)]
        unseen: usize,
        #[arg(long, default_value_t = GradcheckSpec::default().d_in)]
        d_in: usize,
        #[arg(long, default_value_t = GradcheckSpec::default().d)]
        d: usize,
        #[arg(long, default_value_t = GradcheckSpec::default().descriptions_per_class)]
        descriptions_per_class: usize,
        #[arg(long, default_value_t = GradcheckSpec::default().tau)]
        tau: f64,
        #[arg(long, default_value_t = GradcheckSpec::default().alpha)]
        alpha: f64,
        #[arg(long, default_value_t = GradcheckSpec::default().gamma)]
        gamma: f64,
        #[arg(long)]
        l2_normalize: bool,
        #[arg(long, value_enum, default_value_t = ReductionArg::Mean)]
        reduction: ReductionArg,
        #[arg(long, default_value_t = GradcheckSpec::default().seed)]
        seed: u64,
        /// Central-difference step size
        #[arg(long, default_value_t = GradcheckSpec::default().h)]
        h: f64,
        /// Fail (exit 1) when the worst relative error exceeds this
        #[arg(long, default_value_t = GradcheckSpec::default().tolerance)]
        tolerance: f64,
    },
    /// Write a checkpoint's fused class embeddings (and, optionally, its
    /// projected videos) as feature stores
    ExportEmbeddings {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        definitions: PathBuf,
        #[arg(long)]
        descriptions: Option<PathBuf>,
        #[arg(long)]
        split: PathBuf,
        /// Which class set to export
        #[arg(long, value_enum, default_value_t = BankSide::Unseen)]
        side: BankSide,
        #[arg(long)]
        out: PathBuf,
        /// Also project this video store's rows of the chosen class set
        #[arg(long, requires = "out_videos")]
        videos: Option<PathBuf>,
        /// Where the projected videos go
        #[arg(long, requires = "videos")]
        out_videos: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Dedup { classes, descriptions, out_classes, out_descriptions } => corpus::dedup(
            &classes,
            descriptions.as_deref(),
            &out_classes,
            out_descriptions.as_deref(),
        ),
        Cmd::Rank { classes, descriptions, embeddings, k, remove_stopwords, out } => {
            corpus::rank(&classes, &descriptions, &embeddings, k, remove_stopwords, &out)
        }
        Cmd::Stats { classes, descriptions } => {
            corpus::stats(&classes, descriptions.as_deref())
        }
        Cmd::Gen { out, spec } => gen::gen(&out, &spec.resolve()?),
        Cmd::Train { stores, split, config, out_checkpoint, out_metrics } => {
            let cfg = config.resolve()?;
            traincmd::train_cmd(
                &traincmd::TrainPaths {
                    videos: &stores.videos,
                    definitions: &stores.definitions,
                    descriptions: stores.descriptions.as_deref(),
                    split: &split,
                    out_checkpoint: &out_checkpoint,
                    out_metrics: out_metrics.as_deref(),
                },
                &cfg,
            )
        }
        Cmd::Eval { stores, split, checkpoint, part, out } => {
            evalcmd::eval_cmd(&evalcmd::EvalArgs {
                videos: &stores.videos,
                definitions: &stores.definitions,
                descriptions: stores.descriptions.as_deref(),
                split: &split,
                checkpoint: &checkpoint,
                part: match part {
                    PartArg::Val => EvalPart::Val,
                    PartArg::Test => EvalPart::Test,
                },
                out: out.as_deref(),
            })
        }
        Cmd::Ablate { stores, splits, variants, config, out } => {
            let cfg = config.resolve()?;
            evalcmd::ablate_cmd(
                &stores.videos,
                &stores.definitions,
                stores.descriptions.as_deref(),
                &splits,
                &variants,
                &cfg,
                out.as_deref(),
            )
        }
        Cmd::Gradcheck {
            n,
            seen,
            unseen,
            d_in,
            d,
            descriptions_per_class,
            tau,
            alpha,
            gamma,
            l2_normalize,
            reduction,
            seed,
            h,
            tolerance,
        } => gradcheck::gradcheck_cmd(&GradcheckSpec {
            n,
            seen,
            unseen,
            d_in,
            d,
            descriptions_per_class,
            tau,
            alpha,
            gamma,
            l2_normalize,
            reduction: match reduction {
                ReductionArg::Mean => Reduction::Mean,
                ReductionArg::Sum => Reduction::Sum,
            },
            seed,
            h,
            tolerance,
        }),
        Cmd::ExportEmbeddings {
            checkpoint,
            definitions,
            descriptions,
            split,
            side,
            out,
            videos,
            out_videos,
        } => export::export_cmd(&export::ExportArgs {
            checkpoint: &checkpoint,
            definitions: &definitions,
            descriptions: descriptions.as_deref(),
            split: &split,
            side,
            out: &out,
            videos: videos.as_deref(),
            out_videos: out_videos.as_deref(),
        }),
    }
}

fn main() -> ExitCode {
    // clap itself exits with code 2 on usage errors; anything the commands
    // report is a validation or data problem -> 1.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
