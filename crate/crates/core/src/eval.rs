//! Classifier metrics on an annotated test set, and the answer-reranking
//! experiment (P@k, MRR) with and without the clarification question.

use std::collections::{BTreeMap, HashMap};
use std::io::Read;

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{CandidatePair, Label, LabeledSet, PairSource};
use crate::encoder::{split_tokens, Classifier, TrainConfig};
use crate::error::{Error, Result};
use crate::ingest::PostRecord;
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

/// Harmonic mean, 0 when both inputs are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
        Metrics {
            precision,
            recall,
            f1: f1_score(precision, recall),
            tp,
            fp,
            fn_,
            tn,
        }
    }

    /// Metrics of binary predictions against gold labels.
    pub fn from_predictions(predicted: &[bool], gold: &[bool]) -> Self {
        assert_eq!(predicted.len(), gold.len(), "prediction/gold length mismatch");
        let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
        for (&p, &g) in predicted.iter().zip(gold) {
            match (p, g) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
        Self::from_counts(tp, fp, fn_, tn)
    }
}

/// A test pair with a human (or generator) label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedPair {
    pub domain: String,
    pub post_id: u64,
    pub post_text: String,
    pub question_text: String,
    pub gold_label: Label,
}

impl AnnotatedPair {
    pub fn as_candidate(&self) -> CandidatePair {
        CandidatePair {
            post_id: self.post_id,
            domain: self.domain.clone(),
            post_text: self.post_text.clone(),
            question_text: self.question_text.clone(),
            source: PairSource::AnyComment,
            pseudo_label: None,
            confidence: None,
        }
    }
}

/// Precision, recall and F1 of `clf` on `test`; a pair is predicted
/// positive when its positive probability is at least `threshold`.
pub fn evaluate_classifier(clf: &Classifier, test: &[AnnotatedPair], threshold: f64) -> Metrics {
    let scores = clf.score_all(
        test.par_iter()
            .map(|p| (p.post_text.as_str(), p.question_text.as_str())),
    );
    let predicted: Vec<bool> = scores.iter().map(|s| *s >= threshold).collect();
    let gold: Vec<bool> = test.iter().map(|p| p.gold_label.is_positive()).collect();
    Metrics::from_predictions(&predicted, &gold)
}

#[derive(Debug, Deserialize)]
struct AnnotatedRow {
    domain: String,
    post_id: u64,
    question_text: String,
    gold_label: String,
}

fn parse_label(s: &str) -> Result<Label> {
    match s.trim().to_ascii_lowercase().as_str() {
        "positive" | "1" | "true" => Ok(Label::Positive),
        "negative" | "0" | "false" => Ok(Label::Negative),
        other => Err(Error::Schema(format!("unknown gold label `{other}`"))),
    }
}

/// Reads a `domain,post_id,question_text,gold_label` CSV and resolves each
/// row's post text from `corpus`.
pub fn read_annotated_csv<R: Read>(input: R, corpus: &[PostRecord]) -> Result<Vec<AnnotatedPair>> {
    let index: HashMap<(&str, u64), &PostRecord> = corpus.iter().map(|r| ((r.domain.as_str(), r.post_id), r)).collect();
    let mut out = Vec::new();
    for row in csv::Reader::from_reader(input).deserialize::<AnnotatedRow>() {
        let row = row?;
        let post = index.get(&(row.domain.as_str(), row.post_id)).ok_or_else(|| {
            Error::Schema(format!(
                "annotated pair refers to unknown post {}/{}",
                row.domain, row.post_id
            ))
        })?;
        out.push(AnnotatedPair {
            post_text: post.post_text(),
            gold_label: parse_label(&row.gold_label)?,
            domain: row.domain,
            post_id: row.post_id,
            question_text: row.question_text,
        });
    }
    Ok(out)
}

pub fn write_annotated_csv<W: std::io::Write>(out: W, pairs: &[AnnotatedPair]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["domain", "post_id", "question_text", "gold_label"])?;
    for p in pairs {
        let label = if p.gold_label.is_positive() { "positive" } else { "negative" };
        w.write_record([p.domain.as_str(), &p.post_id.to_string(), &p.question_text, label])?;
    }
    w.flush()?;
    Ok(())
}

/// Relevance scorer for (query, answer) text.
pub trait Scorer: Sync {
    fn score(&self, query: &str, answer: &str) -> f64;
}

impl<F: Fn(&str, &str) -> f64 + Sync> Scorer for F {
    fn score(&self, query: &str, answer: &str) -> f64 {
        self(query, answer)
    }
}

/// Lexical tokens: [`split_tokens`] minus pure punctuation.
pub fn lexical_terms(text: &str) -> Vec<String> {
    split_tokens(text)
        .into_iter()
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .collect()
}

/// Cosine similarity of tf-idf vectors. Term frequency is the raw count;
/// `idf(t) = ln((1 + N) / (1 + df(t))) + 1` over the fitted documents.
#[derive(Debug, Clone, Default)]
pub struct TfIdfScorer {
    docs: usize,
    df: HashMap<String, usize>,
}

impl TfIdfScorer {
    pub fn fit<'a>(docs: impl IntoIterator<Item = &'a str>) -> Self {
        let mut df: HashMap<String, usize> = HashMap::new();
        let mut n = 0;
        for d in docs {
            n += 1;
            let mut terms = lexical_terms(d);
            terms.sort();
            terms.dedup();
            for t in terms {
                *df.entry(t).or_default() += 1;
            }
        }
        TfIdfScorer { docs: n, df }
    }

    pub fn idf(&self, term: &str) -> f64 {
        let df = self.df.get(term).copied().unwrap_or(0);
        ((1 + self.docs) as f64 / (1 + df) as f64).ln() + 1.0
    }

    fn vector(&self, text: &str) -> BTreeMap<String, f64> {
        let mut tf: BTreeMap<String, f64> = BTreeMap::new();
        for t in lexical_terms(text) {
            *tf.entry(t).or_default() += 1.0;
        }
        for (t, v) in tf.iter_mut() {
            *v *= self.idf(t);
        }
        tf
    }
}

impl Scorer for TfIdfScorer {
    fn score(&self, query: &str, answer: &str) -> f64 {
        let q = self.vector(query);
        let a = self.vector(answer);
        let dot: f64 = q.iter().filter_map(|(t, w)| a.get(t).map(|v| v * w)).sum();
        let nq: f64 = q.values().map(|v| v * v).sum::<f64>().sqrt();
        let na: f64 = a.values().map(|v| v * v).sum::<f64>().sqrt();
        if nq == 0.0 || na == 0.0 {
            0.0
        } else {
            dot / (nq * na)
        }
    }
}

/// Scores (query, answer) with a dual encoder trained on (post, answer)
/// pairs: the post encoder reads the query and the question encoder reads
/// the answer.
#[derive(Debug, Clone)]
pub struct EncoderScorer {
    pub classifier: Classifier,
}

impl EncoderScorer {
    /// Trains on every post's answers as positives and answers of other
    /// same-domain posts as negatives (one per positive).
    pub fn train(corpus: &[PostRecord], cfg: &TrainConfig) -> Result<Self> {
        let mut set = LabeledSet::new("answers", cfg.seed);
        let mut by_domain: BTreeMap<&str, Vec<&PostRecord>> = BTreeMap::new();
        for r in corpus {
            by_domain.entry(&r.domain).or_default().push(r);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "answer-negatives"));
        for posts in by_domain.values() {
            if posts.len() < 2 {
                continue;
            }
            for (i, r) in posts.iter().enumerate() {
                let post_text = r.post_text();
                for a in &r.answers {
                    let mut j = rng.gen_range(0..posts.len() - 1);
                    if j >= i {
                        j += 1;
                    }
                    let other = &posts[j].answers[rng.gen_range(0..posts[j].answers.len())];
                    for (text, label) in [(a, Label::Positive), (other, Label::Negative)] {
                        set.pairs.push(CandidatePair {
                            post_id: r.post_id,
                            domain: r.domain.clone(),
                            post_text: post_text.clone(),
                            question_text: text.clone(),
                            source: if label.is_positive() {
                                PairSource::AnyComment
                            } else {
                                PairSource::SampledNegative
                            },
                            pseudo_label: Some(label),
                            confidence: None,
                        });
                    }
                }
            }
        }
        set.pairs.dedup_by(|a, b| a.key() == b.key() && a.pseudo_label == b.pseudo_label);
        let (classifier, _) = Classifier::fit(&set, cfg)?;
        Ok(EncoderScorer { classifier })
    }
}

impl Scorer for EncoderScorer {
    fn score(&self, query: &str, answer: &str) -> f64 {
        self.classifier.prob_positive(query, answer)
    }
}

/// One reranking problem: a post, its optional clarification question and
/// `pool_size` candidate answers of which exactly one is the post's own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerankInstance {
    pub domain: String,
    pub post_id: u64,
    pub post_text: String,
    pub clarification_question: Option<String>,
    pub candidates: Vec<String>,
    pub gold_index: usize,
}

/// Samples up to `n_per_domain` posts per domain (only posts with an
/// entry in `questions`, unless `questions` is empty) and builds a
/// candidate list for each: one of the post's answers at a seeded random
/// position among `pool_size - 1` answers drawn from distinct other posts
/// of the same domain.
pub fn build_rerank_instances(
    corpus: &[PostRecord],
    questions: &BTreeMap<(String, u64), String>,
    domains: &[String],
    n_per_domain: usize,
    pool_size: usize,
    seed: u64,
) -> Result<Vec<RerankInstance>> {
    if pool_size < 2 {
        return Err(Error::InvalidConfig("pool_size must be at least 2".into()));
    }
    let mut out = Vec::new();
    for domain in domains {
        let posts: Vec<&PostRecord> = corpus.iter().filter(|r| &r.domain == domain && !r.answers.is_empty()).collect();
        if posts.len() < pool_size {
            return Err(Error::DomainTooSmall {
                domain: domain.clone(),
                reason: format!("{} answered posts, need {pool_size}", posts.len()),
            });
        }
        let anchors: Vec<usize> = (0..posts.len())
            .filter(|&i| questions.is_empty() || questions.contains_key(&(domain.clone(), posts[i].post_id)))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("rerank/{domain}")));
        let take = n_per_domain.min(anchors.len());
        for a in sample(&mut rng, anchors.len(), take).iter() {
            let post = posts[anchors[a]];
            let gold = post.answers[rng.gen_range(0..post.answers.len())].clone();
            let others: Vec<(usize, Vec<&String>)> = posts
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != anchors[a])
                .map(|(i, r)| (i, r.answers.iter().filter(|x| **x != gold).collect::<Vec<_>>()))
                .filter(|(_, ans)| !ans.is_empty())
                .collect();
            if others.len() < pool_size - 1 {
                return Err(Error::DomainTooSmall {
                    domain: domain.clone(),
                    reason: format!("only {} distinct distractor posts", others.len()),
                });
            }
            let mut candidates: Vec<String> = sample(&mut rng, others.len(), pool_size - 1)
                .iter()
                .map(|k| {
                    let ans = &others[k].1;
                    ans[rng.gen_range(0..ans.len())].clone()
                })
                .collect();
            let gold_index = rng.gen_range(0..pool_size);
            candidates.insert(gold_index, gold);
            out.push(RerankInstance {
                domain: domain.clone(),
                post_id: post.post_id,
                post_text: post.post_text(),
                clarification_question: questions.get(&(domain.clone(), post.post_id)).cloned(),
                candidates,
                gold_index,
            });
        }
    }
    Ok(out)
}

/// Candidate indices sorted by descending score, ties by ascending index.
pub fn rerank<S: Scorer + ?Sized>(scorer: &S, instance: &RerankInstance, use_cq: bool) -> Result<Vec<usize>> {
    let query = if use_cq {
        let cq = instance.clarification_question.as_deref().ok_or(Error::MissingCq)?;
        format!("{} {}", instance.post_text, cq)
    } else {
        instance.post_text.clone()
    };
    let scores: Vec<f64> = instance.candidates.iter().map(|c| scorer.score(&query, c)).collect();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    Ok(order)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RerankVariant {
    WithoutCq,
    WithCq,
}

pub const MAX_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerankReport {
    pub variant: RerankVariant,
    /// P@1 … P@5: gold in the top k, divided by k, averaged over instances.
    pub p_at_k: [f64; MAX_K],
    /// Instances with the gold answer in the top k.
    pub hits_at_k: [usize; MAX_K],
    pub mrr: f64,
    pub instances: usize,
}

/// Aggregates P@k and MRR from the 1-based gold ranks.
pub fn report_from_ranks(ranks: &[usize], variant: RerankVariant) -> RerankReport {
    let n = ranks.len();
    let mut hits = [0usize; MAX_K];
    for &r in ranks {
        for (k, h) in hits.iter_mut().enumerate() {
            if r <= k + 1 {
                *h += 1;
            }
        }
    }
    let mut p_at_k = [0.0; MAX_K];
    for k in 0..MAX_K {
        p_at_k[k] = if n == 0 { 0.0 } else { hits[k] as f64 / ((k + 1) * n) as f64 };
    }
    let mrr = if n == 0 {
        0.0
    } else {
        ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / n as f64
    };
    RerankReport {
        variant,
        p_at_k,
        hits_at_k: hits,
        mrr,
        instances: n,
    }
}

pub fn rerank_report<S: Scorer + ?Sized>(instances: &[RerankInstance], scorer: &S, use_cq: bool) -> Result<RerankReport> {
    let ranks: Vec<usize> = instances
        .par_iter()
        .map(|inst| {
            let order = rerank(scorer, inst, use_cq)?;
            Ok(order.iter().position(|&i| i == inst.gold_index).expect("gold is a candidate") + 1)
        })
        .collect::<Result<_>>()?;
    let variant = if use_cq {
        RerankVariant::WithCq
    } else {
        RerankVariant::WithoutCq
    };
    Ok(report_from_ranks(&ranks, variant))
}

/// Two-column comparison table: `Metric,Without CQ,With CQ`.
pub fn rerank_table_csv(without: &RerankReport, with: &RerankReport) -> String {
    let mut s = String::from("Metric,Without CQ,With CQ\n");
    for k in 0..MAX_K {
        s.push_str(&format!("P@{},{:.3},{:.3}\n", k + 1, without.p_at_k[k], with.p_at_k[k]));
    }
    s.push_str(&format!("MRR,{:.3},{:.3}\n", without.mrr, with.mrr));
    s
}
