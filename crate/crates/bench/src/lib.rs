//! Shared inputs for the benchmarks.

use clarq_core::synth::{SynthConfig, SynthCorpus};
use clarq_core::{Classifier, LabeledSet, TrainConfig};

pub fn small_train_config() -> TrainConfig {
    TrainConfig {
        epochs: 1,
        batch_size: 32,
        embed_dim: 32,
        hidden_dim: 32,
        dense_dim: 32,
        ..TrainConfig::default()
    }
}

pub fn corpus(posts_per_domain: usize) -> SynthCorpus {
    SynthCorpus::generate(&SynthConfig {
        posts_per_domain,
        ..SynthConfig::default()
    })
}

pub fn trained(set: &LabeledSet) -> Classifier {
    Classifier::fit(set, &small_train_config()).expect("benchmark set is trainable").0
}
