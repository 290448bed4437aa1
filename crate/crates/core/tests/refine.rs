use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::OnceLock;

use clarq_core::refine::{
    build_seed, classify_corpus, keep_count, run_refinement, up_sample_step, CorpusPair, NegativeSampler, Refinement,
};
use clarq_core::synth::{marker_set, SynthConfig, SynthCorpus};
use clarq_core::{CandidatePair, Classifier, Error, LabeledSet, PairSource, PostRecord, RefineConfig, TrainConfig};

struct Run {
    corpus: SynthCorpus,
    records: Vec<PostRecord>,
    cfg: RefineConfig,
    d0: LabeledSet,
    refinement: Refinement,
}

fn small_train() -> TrainConfig {
    TrainConfig {
        epochs: 20,
        batch_size: 16,
        learning_rate: 0.5,
        embed_dim: 16,
        hidden_dim: 16,
        dense_dim: 16,
        max_post_len: 60,
        max_question_len: 20,
        ..TrainConfig::default()
    }
}

fn run() -> &'static Run {
    static RUN: OnceLock<Run> = OnceLock::new();
    RUN.get_or_init(|| {
        let corpus = SynthCorpus::generate(&SynthConfig {
            posts_per_domain: 600,
            seed: 21,
            ..SynthConfig::default()
        });
        let records = corpus.records();
        let cfg = RefineConfig {
            n_iterations: 3,
            seed: 21,
            train: small_train(),
            ..RefineConfig::default()
        };
        let d0 = build_seed(&records, &cfg).unwrap();
        let sampler = NegativeSampler::from_corpus(&records, &d0);
        let refinement = run_refinement(&d0, &sampler, &cfg, &[]).unwrap();
        Run {
            corpus,
            records,
            cfg,
            d0,
            refinement,
        }
    })
}

fn positive_keys(set: &LabeledSet) -> BTreeSet<(String, u64, String)> {
    set.positives()
        .map(|p| (p.domain.clone(), p.post_id, p.question_text.clone()))
        .collect()
}

fn down_chain(r: &Run) -> Vec<&LabeledSet> {
    std::iter::once(&r.d0).chain(&r.refinement.down_sets).collect()
}

#[test]
fn down_sampled_positives_are_contained_in_their_parent() {
    let r = run();
    for w in down_chain(r).windows(2) {
        let (parent, child) = (positive_keys(w[0]), positive_keys(w[1]));
        assert!(child.is_subset(&parent), "{} not within {}", w[1].stage_name, w[0].stage_name);
        assert!(child.len() < parent.len());
    }
}

#[test]
fn down_sampling_keeps_the_size_law() {
    let r = run();
    for w in down_chain(r).windows(2) {
        let prev = w[0];
        // Independent recount of the confirmed positives on the parent stage.
        let (clf, _) = Classifier::fit(prev, &r.cfg.train_config_for(&prev.stage_name)).unwrap();
        let confirmed = prev
            .positives()
            .filter(|p| clf.prob_positive(&p.post_text, &p.question_text) >= r.cfg.threshold)
            .count();
        assert!(confirmed > 0);
        let expected = std::cmp::max(1, confirmed * 2 / 5);
        assert_eq!(w[1].counts().0, expected, "{}", w[1].stage_name);
        assert_eq!(keep_count(confirmed, 0.4), expected);
    }
}

#[test]
fn up_sampled_positives_come_from_the_matching_down_stage() {
    let r = run();
    let n = r.cfg.n_iterations;
    assert_eq!(r.refinement.up_sets.len(), n);
    for (j, s) in r.refinement.up_sets.iter().enumerate() {
        // up_sets[j] is S(n-1-j) and is drawn from D(n-1-j).
        let level = n - 1 - j;
        assert_eq!(s.stage_name, format!("S{level}"));
        let target = down_chain(r)[level];
        assert!(positive_keys(s).is_subset(&positive_keys(target)), "{}", s.stage_name);
    }
}

#[test]
fn up_sampling_grows_the_positive_set() {
    let r = run();
    let mut sizes = vec![r.refinement.down_sets.last().unwrap().counts().0];
    sizes.extend(r.refinement.up_sets.iter().map(|s| s.counts().0));
    for w in sizes.windows(2) {
        assert!(w[1] >= w[0], "{sizes:?}");
    }
}

#[test]
fn ledger_has_two_rows_per_iteration_plus_final() {
    let r = run();
    let ledger = &r.refinement.ledger;
    let n = r.cfg.n_iterations;
    assert_eq!(ledger.rows.len(), 2 * n + 1);
    assert_eq!(ledger.down_rows().count(), n);
    assert_eq!(ledger.up_rows().count(), n);
    assert_eq!(ledger.final_row().unwrap().trained_on, "S0");
    let down: Vec<usize> = ledger.down_rows().map(|row| row.positives).collect();
    assert!(down.windows(2).all(|w| w[1] < w[0]), "{down:?}");
    assert!(ledger.rows.iter().all(|row| row.metrics.is_none()));
}

#[test]
fn every_negative_is_valid_for_its_post() {
    let r = run();
    let comments: HashMap<(&str, u64), HashSet<&str>> = r
        .records
        .iter()
        .map(|rec| {
            (
                (rec.domain.as_str(), rec.post_id),
                rec.comments.iter().map(|c| c.text.as_str()).collect(),
            )
        })
        .collect();
    let pool: HashMap<&str, HashSet<&str>> = r.d0.positives().fold(HashMap::new(), |mut m, p| {
        m.entry(p.domain.as_str()).or_default().insert(p.question_text.as_str());
        m
    });
    let stages = down_chain(r).into_iter().chain(&r.refinement.up_sets);
    for set in stages {
        set.validate().unwrap();
        let (pos, neg) = set.counts();
        assert_eq!(pos, neg, "{}", set.stage_name);
        for n in set.negatives() {
            assert_eq!(n.source, PairSource::SampledNegative);
            assert!(!comments[&(n.domain.as_str(), n.post_id)].contains(n.question_text.as_str()));
            assert!(pool[n.domain.as_str()].contains(n.question_text.as_str()));
        }
    }
}

#[test]
fn down_sampling_removes_label_noise() {
    let r = run();
    let noise_rate = |set: &LabeledSet| {
        let (pos, _) = set.counts();
        let noisy = set
            .positives()
            .filter(|p| !r.corpus.gold(&p.domain, p.post_id, &p.question_text).unwrap().is_positive())
            .count();
        noisy as f64 / pos as f64
    };
    let d0 = noise_rate(&r.d0);
    let d1 = noise_rate(&r.refinement.down_sets[0]);
    assert!(d0 > 0.05, "seed noise {d0}");
    assert!(d1 < d0, "{d1} vs {d0}");
}

#[test]
fn refinement_is_deterministic() {
    let r = run();
    let sampler = NegativeSampler::from_corpus(&r.records, &r.d0);
    let cfg = RefineConfig {
        n_iterations: 1,
        ..r.cfg.clone()
    };
    let a = run_refinement(&r.d0, &sampler, &cfg, &[]).unwrap();
    let b = run_refinement(&r.d0, &sampler, &cfg, &[]).unwrap();
    assert_eq!(a.ledger.to_csv(), b.ledger.to_csv());
    assert_eq!(a.s0(), b.s0());
    assert_eq!(a.classifier, b.classifier);
}

#[test]
fn single_iteration_on_twenty_pairs_has_three_ledger_rows() {
    let corpus = SynthCorpus::generate(&SynthConfig {
        posts_per_domain: 30,
        domains: vec!["solo".into()],
        no_comment_fraction: 0.0,
        statement_last_fraction: 0.0,
        unanswered_fraction: 0.0,
        seed: 2,
        ..SynthConfig::default()
    });
    let records: Vec<PostRecord> = corpus.records().into_iter().take(10).collect();
    let cfg = RefineConfig {
        n_iterations: 1,
        seed: 4,
        train: TrainConfig {
            epochs: 30,
            batch_size: 4,
            ..small_train()
        },
        ..RefineConfig::default()
    };
    let d0 = build_seed(&records, &cfg).unwrap();
    assert_eq!(d0.pairs.len(), 20);
    let sampler = NegativeSampler::from_corpus(&records, &d0);
    let r = run_refinement(&d0, &sampler, &cfg, &[]).unwrap();
    assert_eq!(r.ledger.rows.len(), 3);
    let stages: Vec<&str> = r.ledger.rows.iter().map(|row| row.stage.as_str()).collect();
    assert_eq!(stages, ["D1", "S0", "final"]);
}

fn marker_cfg() -> RefineConfig {
    RefineConfig {
        seed: 8,
        train: TrainConfig {
            epochs: 20,
            seed: 8,
            ..small_train()
        },
        ..RefineConfig::default()
    }
}

#[test]
fn up_sampling_a_perfectly_fitted_set_is_a_fixed_point() {
    let cfg = marker_cfg();
    let train = marker_set(200, 12);
    let target = LabeledSet {
        stage_name: "D0".into(),
        ..train.clone()
    };
    let sampler = NegativeSampler::from_seed(&train);
    let step = up_sample_step(&train, &target, "S0", &sampler, &cfg, &[]).unwrap();
    // Every positive clears the threshold, so all of them come back.
    assert_eq!(positive_keys(&step.set), positive_keys(&train));
}

#[test]
fn an_unreachable_threshold_collapses_the_stage() {
    let cfg = RefineConfig {
        threshold: 1.0 - 1e-15,
        ..marker_cfg()
    };
    let train = marker_set(40, 13);
    let sampler = NegativeSampler::from_seed(&train);
    let err = up_sample_step(&train, &train, "S0", &sampler, &cfg, &[]).unwrap_err();
    assert!(matches!(err, Error::CollapsedStage { ref stage } if stage == "S0"), "{err}");
}

#[test]
fn classification_emits_exactly_the_marker_pairs() {
    let (clf, _) = Classifier::fit(&marker_set(400, 3), &marker_cfg().train).unwrap();
    let fixture = marker_set(50, 99);
    let pairs: Vec<CorpusPair> = fixture
        .pairs
        .iter()
        .map(|p| CorpusPair {
            pair: CandidatePair {
                pseudo_label: None,
                source: PairSource::AnyComment,
                ..p.clone()
            },
            answers: vec![format!("answer {}", p.post_id)],
        })
        .collect();
    let out = classify_corpus(&clf, pairs, 0.5);
    let emitted: Vec<u64> = out.iter().map(|r| r.post_id).collect();
    let expected: Vec<u64> = fixture.positives().map(|p| p.post_id).collect();
    assert_eq!(expected.len(), 25);
    assert_eq!(emitted, expected);
    assert!(out.iter().all(|r| r.confidence >= 0.5 && !r.answers.is_empty()));
}
