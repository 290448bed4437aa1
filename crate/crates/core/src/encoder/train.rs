use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{Dims, Gradient, PairScorerModel};
use super::vocab::{tokenize, Vocabulary};
use crate::corpus::{Label, LabeledSet};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Examples per gradient shard. Shards are summed in index order, so the
/// result does not depend on the number of worker threads.
const SHARD: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub max_post_len: usize,
    pub max_question_len: usize,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub dense_dim: usize,
    /// Tokens rarer than this in the training stage map to `<unk>`.
    pub min_count: usize,
    /// Rescale the batch gradient to at most this L2 norm.
    pub clip_norm: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 5,
            batch_size: 64,
            learning_rate: 0.05,
            seed: 0,
            max_post_len: 300,
            max_question_len: 60,
            embed_dim: 64,
            hidden_dim: 128,
            dense_dim: 64,
            min_count: 1,
            clip_norm: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("batch_size", self.batch_size),
            ("max_post_len", self.max_post_len),
            ("max_question_len", self.max_question_len),
            ("embed_dim", self.embed_dim),
            ("hidden_dim", self.hidden_dim),
            ("dense_dim", self.dense_dim),
            ("min_count", self.min_count),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning_rate must be positive".into()));
        }
        if let Some(c) = self.clip_norm {
            if c.is_nan() || c <= 0.0 {
                return Err(Error::InvalidConfig("clip_norm must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn dims(&self, vocab: usize) -> Dims {
        Dims {
            vocab,
            embed: self.embed_dim,
            hidden: self.hidden_dim,
            dense: self.dense_dim,
        }
    }
}

/// A tokenized labeled pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub post: Vec<u32>,
    pub question: Vec<u32>,
    pub label: Label,
}

/// Mini-batch SGD on the mean cross-entropy of each batch. Returns the mean
/// training loss of every epoch. With `epochs == 0` the model is untouched.
pub fn train(model: &mut PairScorerModel, examples: &[Example], cfg: &TrainConfig) -> Result<Vec<f64>> {
    train_named(model, examples, cfg, "train")
}

pub(crate) fn train_named(
    model: &mut PairScorerModel,
    examples: &[Example],
    cfg: &TrainConfig,
    stage: &str,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let positives = examples.iter().filter(|e| e.label.is_positive()).count();
    if positives == 0 || positives == examples.len() {
        return Err(Error::DegenerateSet {
            stage: stage.to_string(),
            positives,
            negatives: examples.len() - positives,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "shuffle"));
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let shards: Vec<Result<(Gradient, f64)>> = batch
                .par_chunks(SHARD)
                .map(|shard| {
                    let mut g = model.zero_gradient();
                    let mut loss = 0.0;
                    for &i in shard {
                        let ex = &examples[i];
                        loss += model.accumulate_gradient(&ex.post, &ex.question, ex.label.class_index(), &mut g)?;
                    }
                    Ok((g, loss))
                })
                .collect();
            let mut total = model.zero_gradient();
            for shard in shards {
                let (g, loss) = shard?;
                total.add(&g);
                epoch_loss += loss;
            }
            total.scale(1.0 / batch.len() as f64);
            if let Some(max) = cfg.clip_norm {
                let norm = total.norm();
                if norm > max {
                    total.scale(max / norm);
                }
            }
            model.apply_gradient(&total, cfg.learning_rate);
        }
        trace.push(epoch_loss / examples.len() as f64);
    }
    Ok(trace)
}

/// A trained pair classifier: vocabulary, parameters and the truncation
/// lengths used at training time.
#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    pub vocab: Vocabulary,
    pub model: PairScorerModel,
    pub max_post_len: usize,
    pub max_question_len: usize,
}

impl Classifier {
    /// Builds a vocabulary from the stage text, initializes a fresh model
    /// from `cfg.seed` and trains it on every labeled pair of `set`.
    pub fn fit(set: &LabeledSet, cfg: &TrainConfig) -> Result<(Classifier, Vec<f64>)> {
        cfg.validate()?;
        let (pos, neg) = set.counts();
        if pos == 0 || neg == 0 {
            return Err(Error::DegenerateSet {
                stage: set.stage_name.clone(),
                positives: pos,
                negatives: neg,
            });
        }
        let vocab = Vocabulary::build(
            set.pairs
                .iter()
                .flat_map(|p| [p.post_text.as_str(), p.question_text.as_str()]),
            cfg.min_count,
        );
        let model = PairScorerModel::init(cfg.dims(vocab.len()), derive_seed(cfg.seed, "init"));
        let mut clf = Classifier {
            vocab,
            model,
            max_post_len: cfg.max_post_len,
            max_question_len: cfg.max_question_len,
        };
        let examples: Vec<Example> = set
            .pairs
            .iter()
            .filter_map(|p| {
                p.pseudo_label.map(|label| Example {
                    post: clf.post_ids(&p.post_text),
                    question: clf.question_ids(&p.question_text),
                    label,
                })
            })
            .collect();
        let trace = train_named(&mut clf.model, &examples, cfg, &set.stage_name)?;
        Ok((clf, trace))
    }

    pub fn post_ids(&self, text: &str) -> Vec<u32> {
        tokenize(text, &self.vocab, self.max_post_len)
    }

    pub fn question_ids(&self, text: &str) -> Vec<u32> {
        tokenize(text, &self.vocab, self.max_question_len)
    }

    /// Positive-class probability of a (post, question) text pair.
    pub fn prob_positive(&self, post: &str, question: &str) -> f64 {
        self.model
            .score_pair(&self.post_ids(post), &self.question_ids(question))
            .expect("tokenize never yields an empty or out-of-vocabulary sequence")
            .1
    }

    /// Scores many pairs in parallel; output order follows input order.
    pub fn score_all<'a>(&self, pairs: impl IntoParallelIterator<Item = (&'a str, &'a str)>) -> Vec<f64>
    where
        Self: Sync,
    {
        pairs
            .into_par_iter()
            .map(|(p, q)| self.prob_positive(p, q))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CandidatePair, PairSource};

    fn tiny_cfg() -> TrainConfig {
        TrainConfig {
            epochs: 5,
            batch_size: 4,
            learning_rate: 0.5,
            seed: 3,
            embed_dim: 6,
            hidden_dim: 6,
            dense_dim: 4,
            ..TrainConfig::default()
        }
    }

    fn fixture_set() -> LabeledSet {
        let mut set = LabeledSet::new("D0", 0);
        let rows = [
            ("how to boil pasta", "which pasta ?", Label::Positive),
            ("how to boil pasta", "any update ?", Label::Negative),
            ("bake bread at home", "which flour for bread ?", Label::Positive),
            ("bake bread at home", "which pasta ?", Label::Negative),
            ("store rice safely", "what rice ?", Label::Positive),
            ("store rice safely", "which flour for bread ?", Label::Negative),
            ("grill fish outside", "fresh fish ?", Label::Positive),
            ("grill fish outside", "what rice ?", Label::Negative),
        ];
        for (i, (p, q, l)) in rows.into_iter().enumerate() {
            set.pairs.push(CandidatePair {
                post_id: i as u64 / 2,
                domain: "cooking".into(),
                post_text: p.into(),
                question_text: q.into(),
                source: if l.is_positive() {
                    PairSource::LastComment
                } else {
                    PairSource::SampledNegative
                },
                pseudo_label: Some(l),
                confidence: None,
            });
        }
        set
    }

    #[test]
    fn zero_epochs_is_noop() {
        let set = fixture_set();
        let cfg = TrainConfig { epochs: 0, ..tiny_cfg() };
        let (clf, trace) = Classifier::fit(&set, &cfg).unwrap();
        assert!(trace.is_empty());
        let fresh = PairScorerModel::init(cfg.dims(clf.vocab.len()), derive_seed(cfg.seed, "init"));
        assert_eq!(
            clf.model.params().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            fresh.params().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn loss_decreases_on_eight_pairs() {
        let (_, trace) = Classifier::fit(&fixture_set(), &tiny_cfg()).unwrap();
        assert_eq!(trace.len(), 5);
        assert!(trace[0] > trace[4], "{trace:?}");
    }

    #[test]
    fn single_class_rejected() {
        let mut set = fixture_set();
        set.pairs.retain(|p| p.is_positive());
        assert!(matches!(
            Classifier::fit(&set, &tiny_cfg()),
            Err(Error::DegenerateSet { negatives: 0, .. })
        ));
    }

    #[test]
    fn training_is_deterministic() {
        let (a, ta) = Classifier::fit(&fixture_set(), &tiny_cfg()).unwrap();
        let (b, tb) = Classifier::fit(&fixture_set(), &tiny_cfg()).unwrap();
        assert_eq!(ta.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), tb.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        assert!(a.model.params().iter().zip(b.model.params()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = TrainConfig { batch_size: 0, ..tiny_cfg() };
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        let cfg = TrainConfig { learning_rate: -1.0, ..tiny_cfg() };
        assert!(cfg.validate().is_err());
    }
}
