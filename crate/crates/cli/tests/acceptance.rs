//! The toolkit's acceptance checklist. Every numbered guarantee the project
//! makes — gradient and loss oracles, attention invariants, exact ablation
//! switches, the synthetic transfer trend, brute-force agreement of ranking
//! and prediction, end-to-end determinism, format round trips, and metric
//! sanity — runs here at its stated tolerance. Each test prints one
//! `criterion N PASS` line, so `cargo test --test acceptance -- --nocapture`
//! reads as a checklist.

use std::path::Path;
use std::time::{Duration, Instant};

use zsar_cli::commands::{corpus, gen as gencmd, gradcheck, traincmd};
use zsar_cli::formats::{checkpoint, classes, metrics, runconfig, split as splitfmt, zsf1};
use zsar_core::align::{
    contrastive_loss, contrastive_loss_value, cycle_reconstruct, overall_loss, predict,
    softmax_rows, Batch, ClassBank,
};
use zsar_core::eval::{aggregate, run_ablation, topk_accuracy, AblationInputs};
use zsar_core::optim::{prepare_training, train, AdamState};
use zsar_core::rng::{self, Rng, RngSnapshot, SeedableRng};
use zsar_core::synth::{generate, oracle_scores, SynthSpec};
use zsar_core::textproc::{rank_descriptions, tokenize, Stopwords};
use zsar_core::types::{
    EmbeddingTable, FeatureStore, Reduction, RunConfig, ZsarSplit,
};
use zsar_core::Mat;

// ---------------------------------------------------------------- criterion 1

/// Analytic gradients of the full objective match central finite differences
/// on 20 seeded instances (8 videos, 5 seen / 4 unseen classes, d = d_in = 16,
/// h = 1e-5) with max relative error <= 1e-6, in under 30 seconds.
#[test]
fn criterion_1_gradients_match_finite_differences() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let spec = gradcheck::GradcheckSpec { seed, ..gradcheck::GradcheckSpec::default() };
        let report = gradcheck::check(&spec).unwrap();
        assert!(
            report.max <= 1e-6,
            "seed {seed}: max relative error {:.3e} exceeds 1e-6",
            report.max
        );
        worst = worst.max(report.max);
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(30), "gradient oracle took {elapsed:?}");
    println!(
        "criterion 1 PASS: 20 instances, worst relative error {worst:.3e} <= 1e-6 in {elapsed:?}"
    );
}

// ---------------------------------------------------------------- criterion 2

/// Scalar-loop reference for the contrastive loss, written independently of
/// the production code: mean over i of lse_j(q_i . k_j / tau) - l_{i,y_i}.
fn scalar_loss(q: &Mat, k: &Mat, labels: &[usize], tau: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..q.rows() {
        let mut logits = vec![0.0; k.rows()];
        for (j, l) in logits.iter_mut().enumerate() {
            for c in 0..q.cols() {
                *l += q.get(i, c) * k.get(j, c);
            }
            *l /= tau;
        }
        let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + logits.iter().map(|&l| (l - m).exp()).sum::<f64>().ln();
        acc += lse - logits[labels[i]];
    }
    acc / q.rows() as f64
}

#[test]
fn criterion_2_contrastive_loss_matches_scalar_reference() {
    let mut r = rng::stream(201, 0);
    let mut worst: f64 = 0.0;
    for round in 0..100 {
        let n = 1 + round % 6;
        // Every fifth instance has a single class, where the loss must vanish.
        let c = if round % 5 == 0 { 1 } else { 2 + round % 7 };
        let d = 2 + round % 5;
        let tau = [0.07, 0.1, 0.5, 1.0][round % 4];
        let q = Mat::from_vec(n, d, rng::uniform_vec(&mut r, n * d, -2.0, 2.0));
        let k = Mat::from_vec(c, d, rng::uniform_vec(&mut r, c * d, -2.0, 2.0));
        let labels: Vec<usize> = (0..n).map(|i| (i * 3 + round) % c).collect();

        let value = contrastive_loss_value(&q, &k, &labels, tau, Reduction::Mean).unwrap();
        let (with_grads, _) = contrastive_loss(&q, &k, &labels, tau, Reduction::Mean).unwrap();
        assert_eq!(value, with_grads, "round {round}: value and gradient paths disagree");

        let want = scalar_loss(&q, &k, &labels, tau);
        let err = (value - want).abs();
        assert!(err <= 1e-12, "round {round}: |{value} - {want}| = {err:.3e}");
        worst = worst.max(err);
        if c == 1 {
            assert_eq!(value, 0.0, "round {round}: single-class loss must be exactly zero");
        }
    }
    println!("criterion 2 PASS: 100 instances within 1e-12 (worst {worst:.3e}), C=1 exactly 0");
}

// ---------------------------------------------------------------- criterion 3

#[test]
fn criterion_3_attention_rows_and_temperature_limits() {
    let mut r = rng::stream(301, 0);
    // Attention rows are probability distributions at a working temperature.
    for round in 0..12 {
        let ns = 2 + round % 6;
        let nu = 2 + round % 4;
        let d = 3 + round % 3;
        let zs = Mat::from_vec(ns, d, rng::uniform_vec(&mut r, ns * d, -1.0, 1.0));
        let zu = Mat::from_vec(nu, d, rng::uniform_vec(&mut r, nu * d, -1.0, 1.0));
        let f = cycle_reconstruct(&zs, &zu, 0.1).unwrap();
        for (attn, cols) in [(&f.attn_forward, nu), (&f.attn_backward, ns)] {
            for i in 0..ns {
                let row = attn.row(i);
                assert_eq!(row.len(), cols);
                let sum: f64 = row.iter().sum();
                assert!((sum - 1.0).abs() <= 1e-12, "row sum {sum}");
                assert!(row.iter().all(|&p| p >= 0.0));
            }
        }
    }

    // Shifting every logit by a constant leaves the softmax unchanged.
    let logits = Mat::from_vec(6, 9, rng::uniform_vec(&mut r, 54, -40.0, 40.0));
    let mut shifted = logits.clone();
    for v in shifted.data_mut() {
        *v += 517.25;
    }
    let (a, b) = (softmax_rows(&logits), softmax_rows(&shifted));
    for (x, y) in a.data().iter().zip(b.data()) {
        assert!((x - y).abs() <= 1e-12, "shift changed softmax: {x} vs {y}");
    }

    // At tau = 1e-6 both hops collapse onto the nearest neighbor.
    for round in 0..8 {
        let ns = 3 + round % 4;
        let nu = 2 + round % 5;
        let d = 3;
        let zs = Mat::from_vec(ns, d, rng::uniform_vec(&mut r, ns * d, -1.0, 1.0));
        let zu = Mat::from_vec(nu, d, rng::uniform_vec(&mut r, nu * d, -1.0, 1.0));
        let f = cycle_reconstruct(&zs, &zu, 1e-6).unwrap();
        for attn in [&f.attn_forward, &f.attn_backward] {
            for i in 0..ns {
                let row = attn.row(i);
                let best = (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
                for (j, &p) in row.iter().enumerate() {
                    let want = if j == best { 1.0 } else { 0.0 };
                    assert!((p - want).abs() <= 1e-9, "hard attention row {i} col {j}: {p}");
                }
            }
        }
    }
    println!("criterion 3 PASS: rows sum to 1 (1e-12), shift-invariant (1e-12), hard limit (1e-9)");
}

// ---------------------------------------------------------------- criterion 4

/// A store with the same ids and labels but freshly drawn feature values.
fn noise_like(store: &FeatureStore, seed: u64) -> FeatureStore {
    let mut r = rng::stream(seed, 0);
    let (n, d) = (store.len(), store.dim());
    FeatureStore::new(
        store.ids().to_vec(),
        store.labels().to_vec(),
        Mat::from_vec(n, d, rng::uniform_vec(&mut r, n * d, -2.0, 2.0)),
    )
    .unwrap()
}

fn small_bench() -> SynthSpec {
    SynthSpec {
        n_concepts: 8,
        n_seen: 4,
        n_unseen: 3,
        concepts_per_class: 3,
        videos_per_class: 6,
        descriptions_per_class: 4,
        d_latent: 8,
        d_in_video: 10,
        seed: 42,
        ..SynthSpec::default()
    }
}

#[test]
fn criterion_4_ablation_switches_are_exact() {
    let data = generate(&small_bench()).unwrap();
    let quick = |alpha: f64, gamma: f64| RunConfig {
        d: 8,
        k: 4,
        batch_size: 32,
        epochs: 4,
        alpha,
        gamma,
        ..RunConfig::default()
    };

    // gamma = 0: supplying a cycle bank or not produces bitwise-equal runs.
    {
        let cfg = quick(0.5, 0.0);
        let prep = prepare_training(
            &cfg,
            &data.videos,
            &data.definitions,
            Some(&data.descriptions),
            &data.split,
        )
        .unwrap();
        assert!(prep.cycle_text.is_none(), "gamma = 0 must not assemble a cycle bank");
        let mut with_bank = prep.clone();
        with_bank.cycle_text = Some(with_bank.unseen_text.clone());
        let a = train(&cfg, &prep, |_| {}).unwrap();
        let b = train(&cfg, &with_bank, |_| {}).unwrap();
        assert_eq!(a, b, "gamma = 0 run must be bitwise independent of the cycle bank");

        // The loss trace itself: the objective ignores the bank at gamma = 0.
        let (params, videos, labels, seen, cycle) = gradcheck::random_instance(
            &gradcheck::GradcheckSpec { gamma: 0.5, ..gradcheck::GradcheckSpec::default() },
        );
        let mut params = params;
        params.gamma = 0.0;
        let batch = Batch { videos_raw: &videos, labels: &labels };
        let with =
            overall_loss(&params, &batch, &seen, cycle.as_ref(), Reduction::Mean).unwrap();
        let without = overall_loss(&params, &batch, &seen, None, Reduction::Mean).unwrap();
        assert_eq!(with, without);
        assert_eq!(with.0.cycle, 0.0);
    }

    // alpha = 1: replacing every description feature with noise changes nothing.
    {
        let cfg = quick(1.0, 0.1);
        let noisy = noise_like(&data.descriptions, 901);
        let real = prepare_training(
            &cfg,
            &data.videos,
            &data.definitions,
            Some(&data.descriptions),
            &data.split,
        )
        .unwrap();
        let junk =
            prepare_training(&cfg, &data.videos, &data.definitions, Some(&noisy), &data.split)
                .unwrap();
        let a = train(&cfg, &real, |_| {}).unwrap();
        let b = train(&cfg, &junk, |_| {}).unwrap();
        assert_eq!(a, b, "alpha = 1 must never read description features");
    }

    // alpha = 0: replacing every definition feature with noise changes nothing.
    {
        let cfg = quick(0.0, 0.1);
        let noisy = noise_like(&data.definitions, 902);
        let real = prepare_training(
            &cfg,
            &data.videos,
            &data.definitions,
            Some(&data.descriptions),
            &data.split,
        )
        .unwrap();
        let junk =
            prepare_training(&cfg, &data.videos, &noisy, Some(&data.descriptions), &data.split)
                .unwrap();
        let a = train(&cfg, &real, |_| {}).unwrap();
        let b = train(&cfg, &junk, |_| {}).unwrap();
        assert_eq!(a, b, "alpha = 0 must never read definition features");
    }
    println!("criterion 4 PASS: gamma=0 bitwise cycle-free; alpha endpoints ignore the unused source");
}

// ---------------------------------------------------------------- criterion 5

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// On the default synthetic benchmark (12 concepts, 10 seen / 5 unseen,
/// definition fidelity 0.4, visual noise 0.3), across 10 generation seeds:
/// fusing both text sources beats definitions alone, adding the cycle term
/// does not hurt the fusion, and every variant clears twice the 20% chance
/// rate — all on median unseen top-1, in under five minutes single-threaded.
#[test]
fn criterion_5_synthetic_transfer_trend() {
    let start = Instant::now();
    let base = RunConfig {
        d: 32,
        k: 12,
        batch_size: 64,
        epochs: 25,
        l2_normalize: true,
        ..RunConfig::default()
    };
    let variants = ["AD-only", "AD+VC", "AD+VC+CIM"];
    let mut runs: Vec<Vec<f64>> = vec![Vec::new(); variants.len()];

    for seed in 0..10 {
        let mut data = generate(&SynthSpec { seed, ..SynthSpec::default() }).unwrap();
        // Score every unseen video and keep the final-epoch parameters: fold
        // the val half into test so no model selection enters the comparison.
        let val = std::mem::take(&mut data.split.val_items);
        data.split.test_items.extend(val);

        let inputs = AblationInputs {
            videos: &data.videos,
            definitions: &data.definitions,
            descriptions: Some(&data.descriptions),
            splits: std::slice::from_ref(&data.split),
        };
        let rows = run_ablation(&base, &variants, &inputs).unwrap();
        for (per_seed, row) in runs.iter_mut().zip(&rows) {
            per_seed.push(row.top1_runs[0]);
        }
    }

    let ad = median(&runs[0]);
    let advc = median(&runs[1]);
    let cim = median(&runs[2]);
    let elapsed = start.elapsed();
    assert!(advc >= ad, "median AD+VC {advc:.3} fell below AD-only {ad:.3}");
    assert!(cim >= advc, "median AD+VC+CIM {cim:.3} fell below AD+VC {advc:.3}");
    for (name, m) in variants.iter().zip([ad, advc, cim]) {
        assert!(m > 0.40, "{name} median top-1 {m:.3} does not clear 2x chance");
    }
    assert!(elapsed < Duration::from_secs(300), "trend run took {elapsed:?}");
    println!(
        "criterion 5 PASS: median top-1 AD-only {ad:.3} <= AD+VC {advc:.3} <= AD+VC+CIM {cim:.3}, \
         all > 0.40, in {elapsed:?}"
    );
}

// ---------------------------------------------------------------- criterion 6

#[test]
fn criterion_6_ranking_and_prediction_match_brute_force() {
    let stops = Stopwords::default();
    let mut r = rng::stream(601, 0);

    // rank_descriptions against a from-scratch enumeration.
    for round in 0..100 {
        let dim = 2 + round % 3;
        let vocab: Vec<(String, Vec<f64>)> = (0..8)
            .map(|t| (format!("w{t}"), rng::uniform_vec(&mut r, dim, -1.0, 1.0)))
            .collect();
        let table = EmbeddingTable::new(dim, vocab.clone()).unwrap();
        let lookup = |tok: &str| vocab.iter().find(|(t, _)| t == tok).map(|(_, v)| v.clone());

        let pool = ["w0", "w1", "w2", "w3", "w4", "w5", "w6", "w7", "zz", "qq"];
        let n_desc = round % 9;
        let descriptions: Vec<String> = (0..n_desc)
            .map(|_| {
                let len = 1 + (r.gen::<u64>() % 4) as usize;
                (0..len)
                    .map(|_| pool[(r.gen::<u64>() % pool.len() as u64) as usize])
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();

        let got = rank_descriptions("w0 w1", &descriptions, &table, false, &stops).unwrap();

        // Brute force: mean of in-vocabulary token vectors, cosine, then a
        // full sort <scored desc, by score then index> before <unscored>.
        let embed = |text: &str| -> Option<Vec<f64>> {
            let vecs: Vec<Vec<f64>> = tokenize(text).iter().filter_map(|t| lookup(t)).collect();
            if vecs.is_empty() {
                return None;
            }
            let mut mean = vec![0.0; dim];
            for v in &vecs {
                for (m, x) in mean.iter_mut().zip(v) {
                    *m += x;
                }
            }
            for m in &mut mean {
                *m /= vecs.len() as f64;
            }
            Some(mean)
        };
        let cosine = |a: &[f64], b: &[f64]| -> Option<f64> {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            (na > 0.0 && nb > 0.0).then(|| dot / (na * nb))
        };
        let name_vec = embed("w0 w1").unwrap();
        let mut want: Vec<(usize, Option<f64>)> = descriptions
            .iter()
            .enumerate()
            .map(|(i, d)| (i, embed(d).and_then(|v| cosine(&name_vec, &v))))
            .collect();
        want.sort_by(|a, b| match (a.1, b.1) {
            (Some(x), Some(y)) => y.total_cmp(&x).then(a.0.cmp(&b.0)),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => a.0.cmp(&b.0),
        });

        assert_eq!(got.order.len(), want.len(), "round {round}");
        for (g, (wi, ws)) in got.order.iter().zip(&want) {
            assert_eq!(g.index, *wi, "round {round}: order diverges");
            match (g.score, ws) {
                (None, None) => {}
                (Some(gs), Some(wsv)) => {
                    assert!((gs - wsv).abs() <= 1e-12, "round {round}: {gs} vs {wsv}")
                }
                other => panic!("round {round}: scored-ness diverges: {other:?}"),
            }
        }

        // Selections nest: every smaller k yields a prefix of every larger k.
        for k1 in 0..=n_desc {
            for k2 in k1..=n_desc + 2 {
                let small = got.select(k1);
                let big = got.select(k2);
                assert!(small.len() <= big.len());
                assert_eq!(&big[..small.len()], &small[..], "round {round}: k {k1} vs {k2}");
            }
        }
    }

    // predict against the scalar-loop score oracle, argsorted from scratch.
    for round in 0..100 {
        let n = 1 + round % 5;
        let c = 1 + round % 7;
        let d = 2 + round % 4;
        let videos = Mat::from_vec(n, d, rng::uniform_vec(&mut r, n * d, -1.0, 1.0));
        let z = Mat::from_vec(c, d, rng::uniform_vec(&mut r, c * d, -1.0, 1.0));
        let bank = ClassBank {
            class_ids: (0..c as u32).collect(),
            z_l: None,
            z_c: None,
            z: z.clone(),
        };
        let preds = predict(&videos, &bank).unwrap();
        let table = oracle_scores(&videos, &z);
        for i in 0..n {
            let row = table.row(i);
            let mut order: Vec<usize> = (0..c).collect();
            order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
            assert_eq!(preds.rankings[i], order, "round {round} video {i}");
            for (j, &s) in row.iter().enumerate() {
                assert!((preds.scores.get(i, j) - s).abs() <= 1e-12);
            }
        }
    }
    println!("criterion 6 PASS: ranking and prediction match brute force on 100 instances each");
}

// ---------------------------------------------------------------- criterion 7

#[test]
fn criterion_7_pipeline_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();

    // Dataset generation: equal in memory and byte-identical on disk.
    let spec = SynthSpec { seed: 3, ..small_bench() };
    let a = generate(&spec).unwrap();
    let b = generate(&spec).unwrap();
    assert_eq!(a, b, "generation must be a pure function of its inputs");
    let (va, vb) = (dir.path().join("a.zsf1"), dir.path().join("b.zsf1"));
    zsf1::write(&va, &a.videos).unwrap();
    zsf1::write(&vb, &b.videos).unwrap();
    assert_eq!(std::fs::read(&va).unwrap(), std::fs::read(&vb).unwrap());
    assert_eq!(splitfmt::to_text(&a.split), splitfmt::to_text(&b.split));

    // The full train command, twice: byte-identical checkpoints, and metrics
    // identical once the wallclock field (the one legitimate variance) goes.
    let bench = dir.path().join("bench");
    gencmd::gen(&bench, &SynthSpec { seed: 5, ..SynthSpec::default() }).unwrap();
    let cfg = RunConfig { d: 16, k: 6, batch_size: 64, epochs: 6, ..RunConfig::default() };
    let run = |tag: &str| {
        let ck = dir.path().join(format!("{tag}.zsck"));
        let mx = dir.path().join(format!("{tag}.metrics"));
        traincmd::train_cmd(
            &traincmd::TrainPaths {
                videos: &bench.join("videos.zsf1"),
                definitions: &bench.join("definitions.zsf1"),
                descriptions: Some(&bench.join("descriptions.zsf1")),
                split: &bench.join("split.txt"),
                out_checkpoint: &ck,
                out_metrics: Some(&mx),
            },
            &cfg,
        )
        .unwrap();
        (std::fs::read(&ck).unwrap(), std::fs::read_to_string(&mx).unwrap())
    };
    let (ck1, mx1) = run("first");
    let (ck2, mx2) = run("second");
    assert_eq!(ck1, ck2, "identical config+seed must give byte-identical checkpoints");
    assert_eq!(metrics::strip_wallclock(&mx1), metrics::strip_wallclock(&mx2));

    // The shipped name fixture collapses to exactly these 14 actions.
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let out_classes = dir.path().join("merged.tsv");
    let out_descs = dir.path().join("merged_descriptions.tsv");
    corpus::dedup(
        &fixtures.join("classes_raw.tsv"),
        Some(&fixtures.join("descriptions_raw.tsv")),
        &out_classes,
        Some(&out_descs),
    )
    .unwrap();
    let merged = classes::read_classes(&out_classes).unwrap();
    let canon: Vec<&str> = merged.iter().map(|c| c.canonical_name.as_str()).collect();
    assert_eq!(
        canon,
        [
            "play guitar",
            "kick ball",
            "rid horse",
            "ride horse",
            "swimm",
            "swim",
            "high jump",
            "archery",
            "bak cooky",
            "bake cooky",
            "danc",
            "dance",
            "yoga",
            "mountain climb",
        ],
        "20 raw names must merge to exactly these 14"
    );
    println!("criterion 7 PASS: bitwise generation + training determinism; 20 -> 14 dedup fixture");
}

// ---------------------------------------------------------------- criterion 8

#[test]
fn criterion_8_formats_round_trip_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let reload = |p1: &Path, p2: &Path| {
        let bytes1 = std::fs::read(p1).unwrap();
        (bytes1, std::fs::read(p2).unwrap())
    };

    for round in 0..8usize {
        let mut r = rng::stream(801 + round as u64, 0);

        // Feature stores with random shapes and contents.
        let n = 1 + round;
        let d = 2 + round % 4;
        let store = FeatureStore::new(
            (0..n).map(|i| format!("item{round:02}_{i:03}")).collect(),
            (0..n).map(|i| (i % 3) as u32).collect(),
            Mat::from_vec(n, d, rng::uniform_vec(&mut r, n * d, -10.0, 10.0)),
        )
        .unwrap();
        let (p1, p2) = (dir.path().join("s1.zsf1"), dir.path().join("s2.zsf1"));
        zsf1::write(&p1, &store).unwrap();
        let loaded = zsf1::read(&p1).unwrap();
        zsf1::write(&p2, &loaded).unwrap();
        let (b1, b2) = reload(&p1, &p2);
        assert_eq!(b1, b2, "round {round}: feature store bytes changed");
        assert_eq!(
            std::fs::read(zsf1::ids_path(&p1)).unwrap(),
            std::fs::read(zsf1::ids_path(&p2)).unwrap()
        );

        // Checkpoints: parameters, optimizer moments, and stream position.
        let cfg = RunConfig { d: 2 + round, ..RunConfig::default() };
        let mut prng = rng::ChaCha12Rng::seed_from_u64(round as u64);
        let params =
            zsar_core::align::AlignmentParams::init(&cfg, 3 + round, 2 + round, &mut prng);
        let mut adam = AdamState::new(&cfg, &params);
        adam.t = 1 + round as u64 * 13;
        for block in adam.m.iter_mut().chain(adam.v.iter_mut()) {
            for v in block.iter_mut() {
                *v = prng.gen::<f64>() - 0.5;
            }
        }
        for _ in 0..round {
            let _: u64 = prng.gen();
        }
        let ck = checkpoint::Checkpoint {
            params,
            k: 1 + round,
            adam,
            rng: RngSnapshot::capture(&prng),
        };
        let (p1, p2) = (dir.path().join("c1.zsck"), dir.path().join("c2.zsck"));
        checkpoint::write(&p1, &ck).unwrap();
        let loaded = checkpoint::read(&p1).unwrap();
        assert_eq!(loaded, ck);
        checkpoint::write(&p2, &loaded).unwrap();
        let (b1, b2) = reload(&p1, &p2);
        assert_eq!(b1, b2, "round {round}: checkpoint bytes changed");

        // Splits, with and without a declared cycle set.
        let split = ZsarSplit {
            split_id: format!("round-{round}"),
            seen_classes: (0..3 + round as u32).collect(),
            unseen_classes: (10..13 + round as u32).collect(),
            cycle_classes: (round % 2 == 0).then(|| (11..13).collect()),
            train_items: (0..4).map(|i| format!("tr{i}")).collect(),
            val_items: if round % 3 == 0 {
                Default::default()
            } else {
                (0..2).map(|i| format!("va{i}")).collect()
            },
            test_items: (0..3).map(|i| format!("te{i}")).collect(),
        };
        let (p1, p2) = (dir.path().join("sp1.txt"), dir.path().join("sp2.txt"));
        splitfmt::write(&p1, &split).unwrap();
        let loaded = splitfmt::read(&p1).unwrap();
        assert_eq!(loaded, split);
        splitfmt::write(&p2, &loaded).unwrap();
        let (b1, b2) = reload(&p1, &p2);
        assert_eq!(b1, b2, "round {round}: split bytes changed");

        // Run configs echo back to the identical text.
        let text = runconfig::to_text(&cfg);
        let parsed = runconfig::parse(&text, "round").unwrap();
        assert_eq!(parsed, cfg);
        assert_eq!(runconfig::to_text(&parsed), text);
    }
    println!("criterion 8 PASS: stores, checkpoints, splits and configs survive save-load-save");
}

// ---------------------------------------------------------------- criterion 9

#[test]
fn criterion_9_metric_reporting_sanity() {
    let mut r = rng::stream(901, 0);
    for round in 0..20 {
        let c = 2 + round % 8;
        let n = 5 + round % 30;
        let rankings: Vec<Vec<usize>> = (0..n)
            .map(|_| {
                let mut order: Vec<usize> = (0..c).collect();
                rng::shuffle(&mut r, &mut order);
                order
            })
            .collect();
        let labels: Vec<usize> = (0..n).map(|_| (r.gen::<u64>() % c as u64) as usize).collect();
        let mut prev = 0.0;
        for k in 1..=c {
            let acc = topk_accuracy(&rankings, &labels, k).unwrap();
            assert!(acc >= prev, "round {round}: top-{k} {acc} < top-{} {prev}", k - 1);
            prev = acc;
        }
        assert_eq!(prev, 1.0, "round {round}: k = |classes| must recover every label");
    }

    let stats = aggregate(&[40.0, 42.0, 44.0]).unwrap();
    assert_eq!(stats.render(), "42.0 ± 1.6");
    // The same numbers arriving as fractions render identically when scaled.
    let frac = aggregate(&[0.40, 0.42, 0.44]).unwrap();
    assert_eq!(frac.scaled(100.0).render(), "42.0 ± 1.6");
    println!("criterion 9 PASS: top-k monotone to 1.0; {{40,42,44}} renders \"42.0 ± 1.6\"");
}
