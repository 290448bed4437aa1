//! Dual-encoder pair classifier: tokenization, twin LSTM encoders,
//! element-wise product fusion, dense softmax head, SGD training,
//! gradient checking and checkpoints.

mod checkpoint;
mod gradcheck;
mod model;
mod train;
mod vocab;

pub use checkpoint::{load_classifier, save_classifier, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use gradcheck::{grad_check, relative_error, GradCheckReport};
pub use model::{Block, Dims, Gradient, PairScorerModel, Side};
pub use train::{train, Classifier, Example, TrainConfig};
pub use vocab::{split_tokens, tokenize, Vocabulary, PAD_ID, UNK_ID};
