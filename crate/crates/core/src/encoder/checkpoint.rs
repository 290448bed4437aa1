//! Model checkpoint files.
//!
//! A checkpoint is one JSON object:
//!
//! ```text
//! {
//!   "format": "clarq.pair_scorer", "version": 1,
//!   "dims": {"vocab": V, "embed": E, "hidden": H, "dense": F},
//!   "max_post_len": 300, "max_question_len": 60,
//!   "vocab": ["<pad>", "<unk>", ...],            // index = token id
//!   "blocks": [{"name": "embedding", "rows": V, "cols": E, "data": [...]}, ...]
//! }
//! ```
//!
//! Blocks appear in the order of [`PairScorerModel::blocks`]: `embedding`,
//! `encoder_p.{w_input,w_recurrent,bias}`, `encoder_q.{...}`,
//! `dense.{weight,bias}`, `output.{weight,bias}`. Matrices are row-major;
//! LSTM gate rows are ordered input, forget, cell candidate, output. Floats
//! are written in shortest round-trip form, so reading a checkpoint
//! reproduces every parameter bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{Dims, PairScorerModel};
use super::train::Classifier;
use super::vocab::Vocabulary;
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "clarq.pair_scorer";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct BlockDump {
    name: String,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointDump {
    format: String,
    version: u32,
    dims: Dims,
    max_post_len: usize,
    max_question_len: usize,
    vocab: Vocabulary,
    blocks: Vec<BlockDump>,
}

pub fn save_classifier(clf: &Classifier, path: &Path) -> Result<()> {
    let model = &clf.model;
    let dump = CheckpointDump {
        format: CHECKPOINT_FORMAT.into(),
        version: CHECKPOINT_VERSION,
        dims: model.dims(),
        max_post_len: clf.max_post_len,
        max_question_len: clf.max_question_len,
        vocab: clf.vocab.clone(),
        blocks: model
            .blocks()
            .into_iter()
            .map(|b| BlockDump {
                name: b.name.to_string(),
                rows: b.rows,
                cols: b.cols,
                data: model.params()[b.offset..b.offset + b.rows * b.cols].to_vec(),
            })
            .collect(),
    };
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut out, &dump)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn load_classifier(path: &Path) -> Result<Classifier> {
    let dump: CheckpointDump = serde_json::from_reader(BufReader::new(File::open(path)?))
        .map_err(|e| Error::Checkpoint(e.to_string()))?;
    if dump.format != CHECKPOINT_FORMAT || dump.version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported checkpoint {} v{}",
            dump.format, dump.version
        )));
    }
    if dump.vocab.len() != dump.dims.vocab {
        return Err(Error::Checkpoint("vocabulary size does not match dims".into()));
    }
    let template = PairScorerModel::zeros(dump.dims);
    let expected = template.blocks();
    if expected.len() != dump.blocks.len() {
        return Err(Error::Checkpoint("wrong number of parameter blocks".into()));
    }
    let mut params = Vec::with_capacity(template.param_count());
    for (want, got) in expected.iter().zip(dump.blocks) {
        if want.name != got.name || want.rows != got.rows || want.cols != got.cols || got.data.len() != got.rows * got.cols {
            return Err(Error::Checkpoint(format!("block {} has unexpected shape", got.name)));
        }
        params.extend(got.data);
    }
    Ok(Classifier {
        vocab: dump.vocab,
        model: PairScorerModel::from_params(dump.dims, params)?,
        max_post_len: dump.max_post_len,
        max_question_len: dump.max_question_len,
    })
}
