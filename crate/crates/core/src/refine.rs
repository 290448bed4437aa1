//! Seed construction and iterative refinement.
//!
//! The seed `D0` pairs every post's last comment (when it contains a `?`)
//! with the post as a positive, plus same-domain sampled negatives.
//! Down-sampling then repeatedly trains a fresh classifier on `D(i-1)`,
//! keeps the most confident fraction of the pairs it confirms as positive
//! and resamples negatives, giving `D1 … DN`. Up-sampling starts from
//! `SN = DN`, trains on the latest `S` set and re-admits every confirmed
//! positive of the next shallower `D` set, giving `S(N-1) … S0`. The final
//! classifier is trained on `S0`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::io::Write;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{CandidatePair, ClarQRecord, Label, LabeledSet, PairSource};
use crate::encoder::{Classifier, TrainConfig};
use crate::error::{Error, Result};
use crate::eval::{evaluate_classifier, AnnotatedPair, Metrics};
use crate::ingest::PostRecord;
use crate::seed::derive_seed;

/// Which set each up-sampling round trains on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpSamplingTrainSet {
    /// The set produced by the previous round (`S(i)` when building `S(i-1)`).
    #[default]
    Latest,
    /// Always the deepest down-sampled set `SN`.
    Deepest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineConfig {
    pub n_iterations: usize,
    pub keep_fraction: f64,
    /// Sampled negatives per positive.
    pub negative_ratio: f64,
    pub seed: u64,
    /// Minimum positive probability for a "predicted positive".
    pub threshold: f64,
    pub up_sampling_trains_on: UpSamplingTrainSet,
    pub train: TrainConfig,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            n_iterations: 5,
            keep_fraction: 0.4,
            negative_ratio: 1.0,
            seed: 0,
            threshold: 0.5,
            up_sampling_trains_on: UpSamplingTrainSet::Latest,
            train: TrainConfig::default(),
        }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_iterations == 0 {
            return Err(Error::InvalidConfig("n_iterations must be at least 1".into()));
        }
        if !(self.keep_fraction > 0.0 && self.keep_fraction <= 1.0) {
            return Err(Error::InvalidConfig("keep_fraction must be in (0, 1]".into()));
        }
        if !(self.negative_ratio > 0.0 && self.negative_ratio.is_finite()) {
            return Err(Error::InvalidConfig("negative_ratio must be positive".into()));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidConfig("threshold must be in (0, 1)".into()));
        }
        self.train.validate()
    }

    /// Training configuration for a classifier fitted on `stage`.
    pub fn train_config_for(&self, stage: &str) -> TrainConfig {
        TrainConfig {
            seed: derive_seed(self.seed, &format!("train/{stage}")),
            ..self.train.clone()
        }
    }
}

/// `max(1, ⌊fraction · n⌋)` for non-empty input, 0 otherwise.
pub fn keep_count(n: usize, fraction: f64) -> usize {
    if n == 0 {
        return 0;
    }
    // The epsilon keeps exact products such as 0.4 · 10 from flooring to 3.
    ((fraction * n as f64 + 1e-9).floor() as usize).clamp(1, n)
}

/// Draws same-domain negatives for positive pairs.
///
/// The pool of each domain is the set of seed positive questions. A
/// negative for a post never comes from the post itself and never equals
/// any comment of that post.
#[derive(Debug, Clone, Default)]
pub struct NegativeSampler {
    pools: BTreeMap<String, Vec<(u64, String)>>,
    own_comments: HashMap<(String, u64), HashSet<String>>,
}

impl NegativeSampler {
    /// Pool from the seed positives, exclusions from every comment of every post.
    pub fn from_corpus(corpus: &[PostRecord], seed_set: &LabeledSet) -> Self {
        let mut sampler = Self::from_seed(seed_set);
        for r in corpus {
            sampler
                .own_comments
                .entry((r.domain.clone(), r.post_id))
                .or_default()
                .extend(r.comments.iter().map(|c| c.text.clone()));
        }
        sampler
    }

    /// Pool and exclusions both taken from the seed positives.
    pub fn from_seed(seed_set: &LabeledSet) -> Self {
        let mut pools: BTreeMap<String, Vec<(u64, String)>> = BTreeMap::new();
        let mut own_comments: HashMap<(String, u64), HashSet<String>> = HashMap::new();
        for p in seed_set.positives() {
            pools
                .entry(p.domain.clone())
                .or_default()
                .push((p.post_id, p.question_text.clone()));
            own_comments
                .entry((p.domain.clone(), p.post_id))
                .or_default()
                .insert(p.question_text.clone());
        }
        NegativeSampler { pools, own_comments }
    }

    fn excluded(&self, domain: &str, post_id: u64, text: &str) -> bool {
        self.own_comments
            .get(&(domain.to_string(), post_id))
            .is_some_and(|s| s.contains(text))
    }

    /// Draws `⌊(j+1)·ratio⌋ - ⌊j·ratio⌋` negatives for the j-th positive.
    pub fn sample(&self, positives: &[&CandidatePair], ratio: f64, rng: &mut ChaCha8Rng) -> Result<Vec<CandidatePair>> {
        let mut out = Vec::new();
        let mut chosen: HashSet<(String, u64, String)> = HashSet::new();
        for (j, pos) in positives.iter().enumerate() {
            let want = ((j + 1) as f64 * ratio).floor() as usize - (j as f64 * ratio).floor() as usize;
            let pool = self.pools.get(&pos.domain).map(Vec::as_slice).unwrap_or(&[]);
            for _ in 0..want {
                let ok = |(src, text): &(u64, String)| {
                    *src != pos.post_id
                        && *text != pos.question_text
                        && !self.excluded(&pos.domain, pos.post_id, text)
                        && !chosen.contains(&(pos.domain.clone(), pos.post_id, text.clone()))
                };
                let mut pick = None;
                for _ in 0..32 {
                    if pool.is_empty() {
                        break;
                    }
                    let cand = &pool[rng.gen_range(0..pool.len())];
                    if ok(cand) {
                        pick = Some(cand);
                        break;
                    }
                }
                if pick.is_none() {
                    let valid: Vec<&(u64, String)> = pool.iter().filter(|c| ok(c)).collect();
                    if valid.is_empty() {
                        return Err(Error::DomainTooSmall {
                            domain: pos.domain.clone(),
                            reason: format!("no valid negative question for post {}", pos.post_id),
                        });
                    }
                    pick = Some(valid[rng.gen_range(0..valid.len())]);
                }
                let (_, text) = pick.expect("picked above");
                chosen.insert((pos.domain.clone(), pos.post_id, text.clone()));
                out.push(CandidatePair {
                    post_id: pos.post_id,
                    domain: pos.domain.clone(),
                    post_text: pos.post_text.clone(),
                    question_text: text.clone(),
                    source: PairSource::SampledNegative,
                    pseudo_label: Some(Label::Negative),
                    confidence: None,
                });
            }
        }
        Ok(out)
    }

    /// Builds a labeled stage: the positives followed by fresh negatives
    /// drawn with a seed derived from `(master seed, stage name)`.
    pub fn make_stage(&self, name: &str, positives: Vec<CandidatePair>, cfg: &RefineConfig) -> Result<LabeledSet> {
        let rng_seed = derive_seed(cfg.seed, name);
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let refs: Vec<&CandidatePair> = positives.iter().collect();
        let negatives = self.sample(&refs, cfg.negative_ratio, &mut rng)?;
        let mut pairs = positives;
        pairs.extend(negatives);
        let set = LabeledSet {
            stage_name: name.to_string(),
            pairs,
            rng_seed,
        };
        set.validate()?;
        Ok(set)
    }
}

/// Builds the seed set `D0`: the last comment of each post, if it contains
/// `?`, as a positive, plus sampled same-domain negatives.
pub fn build_seed(corpus: &[PostRecord], cfg: &RefineConfig) -> Result<LabeledSet> {
    if corpus.is_empty() {
        return Err(Error::InvalidConfig("seed corpus is empty".into()));
    }
    let mut positives = Vec::new();
    for r in corpus {
        let Some(last) = r.last_comment() else { continue };
        if !last.text.contains('?') {
            continue;
        }
        positives.push(CandidatePair {
            post_id: r.post_id,
            domain: r.domain.clone(),
            post_text: r.post_text(),
            question_text: last.text.clone(),
            source: PairSource::LastComment,
            pseudo_label: Some(Label::Positive),
            confidence: None,
        });
    }
    let mut per_domain: BTreeMap<&str, usize> = BTreeMap::new();
    for p in &positives {
        *per_domain.entry(&p.domain).or_default() += 1;
    }
    if let Some((d, _)) = per_domain.iter().find(|(_, n)| **n < 2) {
        return Err(Error::DomainTooSmall {
            domain: d.to_string(),
            reason: "fewer than 2 posts with a question-mark last comment".into(),
        });
    }
    let seed_only = LabeledSet {
        stage_name: "D0".into(),
        pairs: positives.clone(),
        rng_seed: 0,
    };
    let sampler = NegativeSampler::from_corpus(corpus, &seed_only);
    sampler.make_stage("D0", positives, cfg)
}

/// One row of the refinement ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    /// Set produced by the round (`final` for the last training).
    pub stage: String,
    /// Set the round's classifier was trained on.
    pub trained_on: String,
    pub positives: usize,
    pub negatives: usize,
    pub metrics: Option<Metrics>,
}

/// Per-round bookkeeping: N down-sampling rows, N up-sampling rows and the
/// final training row.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageLedger {
    pub rows: Vec<LedgerRow>,
}

impl StageLedger {
    pub fn down_rows(&self) -> impl Iterator<Item = &LedgerRow> {
        self.rows.iter().filter(|r| r.stage.starts_with('D'))
    }

    pub fn up_rows(&self) -> impl Iterator<Item = &LedgerRow> {
        self.rows.iter().filter(|r| r.stage.starts_with('S'))
    }

    pub fn final_row(&self) -> Option<&LedgerRow> {
        self.rows.iter().find(|r| r.stage == "final")
    }

    /// CSV with columns `stage,positives,negatives,precision,recall,f1`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("stage,positives,negatives,precision,recall,f1\n");
        for r in &self.rows {
            let _ = write!(s, "{},{},{},", r.stage, r.positives, r.negatives);
            match &r.metrics {
                Some(m) => {
                    let _ = writeln!(s, "{:.6},{:.6},{:.6}", m.precision, m.recall, m.f1);
                }
                None => s.push_str(",,\n"),
            }
        }
        s
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

/// Outcome of one down- or up-sampling round.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub set: LabeledSet,
    pub metrics: Option<Metrics>,
    pub classifier: Classifier,
    pub loss_trace: Vec<f64>,
}

fn evaluate(clf: &Classifier, test: &[AnnotatedPair], threshold: f64) -> Option<Metrics> {
    (!test.is_empty()).then(|| evaluate_classifier(clf, test, threshold))
}

/// Scores every labeled-positive pair and keeps those at or above threshold,
/// with their confidence attached.
fn confirmed_positives(clf: &Classifier, set: &LabeledSet, threshold: f64) -> Vec<CandidatePair> {
    let positives: Vec<&CandidatePair> = set.positives().collect();
    let scores = clf.score_all(
        positives
            .par_iter()
            .map(|p| (p.post_text.as_str(), p.question_text.as_str())),
    );
    positives
        .into_iter()
        .zip(scores)
        .filter(|(_, s)| *s >= threshold)
        .map(|(p, s)| CandidatePair {
            confidence: Some(s),
            ..p.clone()
        })
        .collect()
}

/// Total order for the confidence sort: confidence descending, then
/// post id, question text and domain ascending.
fn by_confidence(a: &CandidatePair, b: &CandidatePair) -> std::cmp::Ordering {
    let ca = a.confidence.unwrap_or(0.0);
    let cb = b.confidence.unwrap_or(0.0);
    cb.total_cmp(&ca)
        .then_with(|| a.post_id.cmp(&b.post_id))
        .then_with(|| a.question_text.cmp(&b.question_text))
        .then_with(|| a.domain.cmp(&b.domain))
}

/// One down-sampling round producing `out_name` from `prev`.
pub fn down_sample_step(
    prev: &LabeledSet,
    out_name: &str,
    sampler: &NegativeSampler,
    cfg: &RefineConfig,
    test: &[AnnotatedPair],
) -> Result<StepOutcome> {
    let (classifier, loss_trace) = Classifier::fit(prev, &cfg.train_config_for(&prev.stage_name))?;
    let mut temp = confirmed_positives(&classifier, prev, cfg.threshold);
    if temp.is_empty() {
        return Err(Error::CollapsedStage {
            stage: out_name.to_string(),
        });
    }
    temp.sort_by(by_confidence);
    temp.truncate(keep_count(temp.len(), cfg.keep_fraction));
    let set = sampler.make_stage(out_name, temp, cfg)?;
    Ok(StepOutcome {
        metrics: evaluate(&classifier, test, cfg.threshold),
        set,
        classifier,
        loss_trace,
    })
}

/// One up-sampling round: train on `train_set`, keep every confirmed
/// positive of `target` (no fraction cut).
pub fn up_sample_step(
    train_set: &LabeledSet,
    target: &LabeledSet,
    out_name: &str,
    sampler: &NegativeSampler,
    cfg: &RefineConfig,
    test: &[AnnotatedPair],
) -> Result<StepOutcome> {
    let (classifier, loss_trace) = Classifier::fit(train_set, &cfg.train_config_for(&train_set.stage_name))?;
    up_sample_with(classifier, loss_trace, target, out_name, sampler, cfg, test)
}

fn up_sample_with(
    classifier: Classifier,
    loss_trace: Vec<f64>,
    target: &LabeledSet,
    out_name: &str,
    sampler: &NegativeSampler,
    cfg: &RefineConfig,
    test: &[AnnotatedPair],
) -> Result<StepOutcome> {
    let mut kept = confirmed_positives(&classifier, target, cfg.threshold);
    if kept.is_empty() {
        return Err(Error::CollapsedStage {
            stage: out_name.to_string(),
        });
    }
    kept.sort_by(by_confidence);
    let set = sampler.make_stage(out_name, kept, cfg)?;
    Ok(StepOutcome {
        metrics: evaluate(&classifier, test, cfg.threshold),
        set,
        classifier,
        loss_trace,
    })
}

/// Result of [`run_refinement`].
#[derive(Debug, Clone)]
pub struct Refinement {
    pub classifier: Classifier,
    /// `D1 … DN`.
    pub down_sets: Vec<LabeledSet>,
    /// `S(N-1) … S0`.
    pub up_sets: Vec<LabeledSet>,
    pub ledger: StageLedger,
    /// Loss trace of every training run, keyed by the set it was trained on.
    pub loss_traces: Vec<(String, Vec<f64>)>,
}

impl Refinement {
    pub fn s0(&self) -> &LabeledSet {
        self.up_sets.last().expect("at least one up-sampling round")
    }
}

/// Runs N down-sampling rounds, N up-sampling rounds and the final
/// training on `S0`.
pub fn run_refinement(
    d0: &LabeledSet,
    sampler: &NegativeSampler,
    cfg: &RefineConfig,
    test: &[AnnotatedPair],
) -> Result<Refinement> {
    cfg.validate()?;
    let n = cfg.n_iterations;
    let mut ledger = StageLedger::default();
    let mut traces = Vec::new();

    let mut down_sets: Vec<LabeledSet> = Vec::with_capacity(n);
    for i in 1..=n {
        let prev = if i == 1 { d0 } else { &down_sets[i - 2] };
        let name = format!("D{i}");
        log::info!("down-sampling {} -> {name}", prev.stage_name);
        let step = down_sample_step(prev, &name, sampler, cfg, test)?;
        let (p, q) = step.set.counts();
        ledger.rows.push(LedgerRow {
            stage: name,
            trained_on: prev.stage_name.clone(),
            positives: p,
            negatives: q,
            metrics: step.metrics,
        });
        traces.push((prev.stage_name.clone(), step.loss_trace));
        down_sets.push(step.set);
    }

    // S_N is D_N under its own name.
    let deepest = LabeledSet {
        stage_name: format!("S{n}"),
        ..down_sets[n - 1].clone()
    };
    let mut up_sets: Vec<LabeledSet> = Vec::with_capacity(n);
    let mut deepest_model: Option<(Classifier, Vec<f64>)> = None;
    for i in (1..=n).rev() {
        let target = if i == 1 { d0 } else { &down_sets[i - 2] };
        let name = format!("S{}", i - 1);
        let train_on = match cfg.up_sampling_trains_on {
            UpSamplingTrainSet::Latest => up_sets.last().unwrap_or(&deepest),
            UpSamplingTrainSet::Deepest => &deepest,
        };
        log::info!("up-sampling: train on {}, classify {} -> {name}", train_on.stage_name, target.stage_name);
        let step = match cfg.up_sampling_trains_on {
            UpSamplingTrainSet::Deepest => {
                if deepest_model.is_none() {
                    deepest_model = Some(Classifier::fit(&deepest, &cfg.train_config_for(&deepest.stage_name))?);
                }
                let (clf, trace) = deepest_model.clone().expect("fitted above");
                up_sample_with(clf, trace, target, &name, sampler, cfg, test)?
            }
            UpSamplingTrainSet::Latest => up_sample_step(train_on, target, &name, sampler, cfg, test)?,
        };
        let (p, q) = step.set.counts();
        ledger.rows.push(LedgerRow {
            stage: name,
            trained_on: train_on.stage_name.clone(),
            positives: p,
            negatives: q,
            metrics: step.metrics,
        });
        traces.push((train_on.stage_name.clone(), step.loss_trace));
        up_sets.push(step.set);
    }

    let s0 = up_sets.last().expect("n >= 1");
    let (classifier, trace) = Classifier::fit(s0, &cfg.train_config_for(&s0.stage_name))?;
    let (p, q) = s0.counts();
    ledger.rows.push(LedgerRow {
        stage: "final".into(),
        trained_on: s0.stage_name.clone(),
        positives: p,
        negatives: q,
        metrics: evaluate(&classifier, test, cfg.threshold),
    });
    traces.push((s0.stage_name.clone(), trace));

    Ok(Refinement {
        classifier,
        down_sets,
        up_sets,
        ledger,
        loss_traces: traces,
    })
}

/// A candidate pair together with the answers of its post.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusPair {
    pub pair: CandidatePair,
    pub answers: Vec<String>,
}

/// Every (post, comment) tuple of the corpus, in corpus order. The last
/// comment of each post is tagged [`PairSource::LastComment`].
pub fn corpus_pairs(corpus: &[PostRecord]) -> impl Iterator<Item = CorpusPair> + '_ {
    corpus.iter().flat_map(|r| {
        let post_text = r.post_text();
        let last = r.comments.len().saturating_sub(1);
        r.comments.iter().enumerate().map(move |(i, c)| CorpusPair {
            pair: CandidatePair {
                post_id: r.post_id,
                domain: r.domain.clone(),
                post_text: post_text.clone(),
                question_text: c.text.clone(),
                source: if i == last {
                    PairSource::LastComment
                } else {
                    PairSource::AnyComment
                },
                pseudo_label: None,
                confidence: None,
            },
            answers: r.answers.clone(),
        })
    })
}

const CLASSIFY_CHUNK: usize = 4096;

/// Streams `pairs` through the classifier in chunks and hands every pair
/// scoring at least `threshold` to `sink`, in input order.
pub fn classify_corpus_into<I, F>(clf: &Classifier, pairs: I, threshold: f64, mut sink: F) -> Result<usize>
where
    I: IntoIterator<Item = CorpusPair>,
    F: FnMut(ClarQRecord) -> Result<()>,
{
    let mut emitted = 0;
    let mut iter = pairs.into_iter().peekable();
    while iter.peek().is_some() {
        let chunk: Vec<CorpusPair> = iter.by_ref().take(CLASSIFY_CHUNK).collect();
        let scores = clf.score_all(
            chunk
                .par_iter()
                .map(|c| (c.pair.post_text.as_str(), c.pair.question_text.as_str())),
        );
        for (c, s) in chunk.into_iter().zip(scores) {
            if s >= threshold {
                emitted += 1;
                sink(ClarQRecord {
                    domain: c.pair.domain,
                    post_id: c.pair.post_id,
                    post_text: c.pair.post_text,
                    question_text: c.pair.question_text,
                    answers: c.answers,
                    confidence: s,
                })?;
            }
        }
    }
    Ok(emitted)
}

pub fn classify_corpus<I>(clf: &Classifier, pairs: I, threshold: f64) -> Vec<ClarQRecord>
where
    I: IntoIterator<Item = CorpusPair>,
{
    let mut out = Vec::new();
    classify_corpus_into(clf, pairs, threshold, |r| {
        out.push(r);
        Ok(())
    })
    .expect("collecting into memory cannot fail");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Comment, Timestamp};

    fn record(domain: &str, id: u64, comments: &[&str]) -> PostRecord {
        PostRecord {
            post_id: id,
            domain: domain.into(),
            title: format!("title {id}"),
            body: format!("body {id}"),
            answers: vec![format!("answer {id}")],
            comments: comments
                .iter()
                .enumerate()
                .map(|(i, t)| Comment {
                    text: t.to_string(),
                    creation: Timestamp::parse(&format!("2015-01-01T00:00:0{i}")).unwrap(),
                })
                .collect(),
        }
    }

    #[test]
    fn keep_count_rules() {
        assert_eq!(keep_count(10, 0.4), 4);
        assert_eq!(keep_count(1, 0.4), 1);
        assert_eq!(keep_count(2, 0.4), 1);
        assert_eq!(keep_count(0, 0.4), 0);
        assert_eq!(keep_count(5, 1.0), 5);
        for n in 0..2000usize {
            let expected = if n == 0 { 0 } else { (2 * n / 5).max(1) };
            assert_eq!(keep_count(n, 0.4), expected, "n = {n}");
        }
    }

    #[test]
    fn statement_last_comment_gives_no_positive() {
        let corpus = vec![
            record("a", 1, &["which version?", "Try rebooting."]),
            record("a", 2, &["what os?"]),
            record("a", 3, &["which kernel?"]),
        ];
        let d0 = build_seed(&corpus, &RefineConfig::default()).unwrap();
        let pos: Vec<u64> = d0.positives().map(|p| p.post_id).collect();
        assert_eq!(pos, vec![2, 3]);
    }

    #[test]
    fn four_post_seed_negatives_are_valid() {
        let corpus = vec![
            record("a", 1, &["q1 earlier?", "q1?"]),
            record("a", 2, &["q2?"]),
            record("a", 3, &["q1 earlier?", "q3?"]),
            record("a", 4, &["q4?"]),
        ];
        for seed in 0..50 {
            let cfg = RefineConfig {
                seed,
                ..RefineConfig::default()
            };
            let d0 = build_seed(&corpus, &cfg).unwrap();
            assert_eq!(d0.counts(), (4, 4));
            for neg in d0.negatives() {
                let post = corpus.iter().find(|r| r.post_id == neg.post_id).unwrap();
                assert!(post.comments.iter().all(|c| c.text != neg.question_text));
                assert_eq!(neg.domain, "a");
                // The 4×3 possibilities: any other post's last comment.
                let allowed: Vec<String> = corpus
                    .iter()
                    .filter(|r| r.post_id != neg.post_id)
                    .map(|r| r.comments.last().unwrap().text.clone())
                    .collect();
                assert!(allowed.contains(&neg.question_text));
            }
        }
    }

    #[test]
    fn lone_post_domain_is_too_small() {
        let corpus = vec![record("a", 1, &["q?"]), record("a", 2, &["q2?"]), record("b", 3, &["q3?"])];
        assert!(matches!(
            build_seed(&corpus, &RefineConfig::default()),
            Err(Error::DomainTooSmall { domain, .. }) if domain == "b"
        ));
        assert!(build_seed(&[], &RefineConfig::default()).is_err());
    }

    #[test]
    fn negatives_stay_in_domain() {
        let mut corpus = Vec::new();
        for i in 0..10 {
            corpus.push(record("a", i, &[&format!("a{i}?")]));
            corpus.push(record("b", i, &[&format!("b{i}?")]));
        }
        let d0 = build_seed(&corpus, &RefineConfig::default()).unwrap();
        for n in d0.negatives() {
            assert!(n.question_text.starts_with(&n.domain));
        }
    }

    #[test]
    fn ledger_csv_layout() {
        let ledger = StageLedger {
            rows: vec![LedgerRow {
                stage: "D1".into(),
                trained_on: "D0".into(),
                positives: 4,
                negatives: 4,
                metrics: Some(Metrics::from_counts(3, 1, 1, 5)),
            }],
        };
        assert_eq!(
            ledger.to_csv(),
            "stage,positives,negatives,precision,recall,f1\nD1,4,4,0.750000,0.750000,0.750000\n"
        );
    }

    #[test]
    fn confidence_sort_is_total() {
        let mk = |id, q: &str, c| CandidatePair {
            post_id: id,
            domain: "a".into(),
            post_text: String::new(),
            question_text: q.into(),
            source: PairSource::LastComment,
            pseudo_label: Some(Label::Positive),
            confidence: Some(c),
        };
        let mut v = [mk(3, "b", 0.9), mk(1, "z", 0.7), mk(2, "a", 0.9), mk(2, "0", 0.9)];
        v.sort_by(by_confidence);
        let order: Vec<(u64, &str)> = v.iter().map(|p| (p.post_id, p.question_text.as_str())).collect();
        assert_eq!(order, vec![(2, "0"), (2, "a"), (3, "b"), (1, "z")]);
    }

    #[test]
    fn empty_corpus_classifies_to_nothing() {
        let vocab = crate::encoder::Vocabulary::build(["x"], 1);
        let clf = Classifier {
            model: crate::encoder::PairScorerModel::init(
                crate::encoder::Dims {
                    vocab: vocab.len(),
                    embed: 2,
                    hidden: 2,
                    dense: 2,
                },
                1,
            ),
            vocab,
            max_post_len: 10,
            max_question_len: 10,
        };
        assert!(classify_corpus(&clf, Vec::new(), 0.5).is_empty());
    }
}
