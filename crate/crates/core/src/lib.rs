//! Building a clarification-question dataset from stackexchange archives.
//!
//! The crate covers the whole pipeline: archive ingestion ([`ingest`]),
//! stage datasets ([`corpus`]), the dual-encoder pair classifier
//! ([`encoder`]), seed construction and iterative down/up-sampling
//! refinement ([`refine`]), evaluation and answer reranking ([`eval`]) and
//! domain statistics ([`stats`]). [`synth`] generates deterministic
//! synthetic corpora and archive fixtures for tests and demos.

pub mod corpus;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod refine;
pub mod seed;
pub mod stats;
pub mod synth;
pub mod text;

pub use corpus::{CandidatePair, ClarQRecord, Label, LabeledSet, PairSource};
pub use encoder::{Classifier, PairScorerModel, TrainConfig};
pub use error::{Error, Result};
pub use eval::{AnnotatedPair, Metrics, RerankInstance, RerankReport};
pub use ingest::{PostRecord, RawCommentRow, RawPostRow};
pub use refine::{RefineConfig, StageLedger};
pub use stats::DomainStats;
