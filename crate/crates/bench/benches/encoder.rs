use std::time::Duration;

use clarq_bench::{corpus, small_train_config, trained};
use clarq_core::encoder::{Dims, PairScorerModel};
use clarq_core::eval::{build_rerank_instances, rerank_report, TfIdfScorer};
use clarq_core::refine::{build_seed, classify_corpus, corpus_pairs};
use clarq_core::synth::write_minidump;
use clarq_core::{Classifier, RefineConfig};
use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion, Throughput};

fn full_size_model() -> PairScorerModel {
    PairScorerModel::init(
        Dims {
            vocab: 5000,
            embed: 64,
            hidden: 128,
            dense: 64,
        },
        1,
    )
}

fn encoder_passes(c: &mut Criterion) {
    let model = full_size_model();
    let post: Vec<u32> = (0..120).map(|i| (i * 37) % 5000).collect();
    let question: Vec<u32> = (0..15).map(|i| (i * 91) % 5000).collect();
    let mut g = c.benchmark_group("encoder");
    g.bench_function("score_pair 120x15", |b| b.iter(|| model.score_pair(black_box(&post), black_box(&question))));
    g.bench_function("gradient 120x15", |b| {
        b.iter_batched(
            || model.zero_gradient(),
            |mut grad| model.accumulate_gradient(&post, &question, 1, &mut grad),
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

fn training_and_classification(c: &mut Criterion) {
    let records = corpus(200).records();
    let d0 = build_seed(&records, &RefineConfig::default()).unwrap();
    let clf = trained(&d0);
    let pairs = corpus_pairs(&records).count() as u64;
    let mut g = c.benchmark_group("pipeline");
    g.sample_size(10).measurement_time(Duration::from_secs(20));
    g.throughput(Throughput::Elements(d0.pairs.len() as u64));
    g.bench_function("train one epoch on D0", |b| b.iter(|| Classifier::fit(&d0, &small_train_config()).unwrap()));
    g.throughput(Throughput::Elements(pairs));
    g.bench_function("classify corpus", |b| b.iter(|| classify_corpus(&clf, corpus_pairs(&records), 0.5)));
    g.finish();
}

fn ingestion_and_rerank(c: &mut Criterion) {
    let synth = corpus(500);
    let dir = tempfile::tempdir().unwrap();
    write_minidump(&synth, dir.path(), 1).unwrap();
    let records = synth.records();
    let questions = synth.answer_bearing_questions();
    let domains = vec!["alpha".to_string(), "beta".to_string()];
    let instances = build_rerank_instances(&records, &questions, &domains, 100, 100, 1).unwrap();
    let docs: Vec<String> = records.iter().flat_map(|r| r.answers.iter().cloned()).collect();
    let scorer = TfIdfScorer::fit(docs.iter().map(String::as_str));

    let mut g = c.benchmark_group("data");
    g.sample_size(20);
    g.bench_function("ingest 2x500 posts", |b| b.iter(|| clarq_core::ingest::ingest_dump(dir.path(), &[]).unwrap()));
    g.throughput(Throughput::Elements(instances.len() as u64));
    g.bench_function("tfidf rerank pool 100", |b| b.iter(|| rerank_report(&instances, &scorer, true).unwrap()));
    g.finish();
}

criterion_group!(benches, encoder_passes, training_and_classification, ingestion_and_rerank);
criterion_main!(benches);
