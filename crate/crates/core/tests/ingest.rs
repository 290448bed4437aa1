use clarq_core::ingest::{ingest_dump, ingest_domain};
use clarq_core::synth::{write_minidump, SynthConfig, SynthCorpus};
use clarq_core::PostRecord;
use proptest::prelude::*;

fn to_json(records: &[PostRecord]) -> String {
    records.iter().map(|r| serde_json::to_string(r).unwrap() + "\n").collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generated_dumps_ingest_without_loss(
        seed in any::<u64>(),
        posts in 1usize..60,
        unanswered in 0.0f64..0.6,
        no_comment in 0.0f64..0.5,
        extra in 0usize..5,
    ) {
        let corpus = SynthCorpus::generate(&SynthConfig {
            posts_per_domain: posts,
            unanswered_fraction: unanswered,
            no_comment_fraction: no_comment,
            max_extra_comments: extra,
            seed,
            ..SynthConfig::default()
        });
        let dir = tempfile::tempdir().unwrap();
        let expected = write_minidump(&corpus, dir.path(), seed).unwrap();
        let ingested = ingest_dump(dir.path(), &[]).unwrap();
        prop_assert_eq!(ingested.len(), expected.len());

        for (domain, records, stats) in &ingested {
            let want = &expected[domain];
            prop_assert_eq!(stats.questions, want.question_rows);
            prop_assert_eq!(stats.answers, want.answer_rows);
            prop_assert_eq!(stats.answered_questions, want.answered_questions);
            prop_assert_eq!(stats.comments_attached, want.comments_attached);
            prop_assert_eq!(stats.comments_on_answers, want.comments_on_answers);
            prop_assert_eq!(stats.comments_on_unanswered, want.comments_on_unanswered);
            prop_assert_eq!(stats.orphan_comments, want.orphan_comments);
            prop_assert_eq!(
                stats.comments_attached + stats.comments_on_answers + stats.comments_on_unanswered + stats.orphan_comments,
                want.comment_rows
            );

            let truth: Vec<PostRecord> = corpus.records().into_iter().filter(|r| &r.domain == domain).collect();
            prop_assert_eq!(records, &truth);
            prop_assert_eq!(records.iter().map(|r| r.comments.len()).sum::<usize>(), stats.comments_attached);
            for r in records {
                prop_assert!(!r.answers.is_empty());
                prop_assert!(r.comments.windows(2).all(|w| w[0].creation <= w[1].creation));
            }
        }
    }
}

#[test]
fn repeated_ingestion_is_byte_identical() {
    let corpus = SynthCorpus::generate(&SynthConfig::default());
    let dir = tempfile::tempdir().unwrap();
    write_minidump(&corpus, dir.path(), 1).unwrap();
    let (a, _) = ingest_domain(&dir.path().join("alpha"), "alpha").unwrap();
    let (b, _) = ingest_domain(&dir.path().join("alpha"), "alpha").unwrap();
    assert_eq!(to_json(&a), to_json(&b));
}

#[test]
fn allowlist_selects_domains() {
    let corpus = SynthCorpus::generate(&SynthConfig {
        posts_per_domain: 5,
        ..SynthConfig::default()
    });
    let dir = tempfile::tempdir().unwrap();
    write_minidump(&corpus, dir.path(), 1).unwrap();
    let only = ingest_dump(dir.path(), &["beta".into()]).unwrap();
    assert_eq!(only.len(), 1);
    assert_eq!(only[0].0, "beta");
    assert!(ingest_dump(dir.path(), &["gamma".into()]).is_err());
}
