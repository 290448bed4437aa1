//! Stage datasets flowing through the bootstrap and their JSON-lines
//! persistence.
//!
//! A stage file is one header line followed by one [`CandidatePair`] per
//! line:
//!
//! ```text
//! {"schema":"clarq.stage","version":1,"stage_name":"D0","rng_seed":42,"pairs":2}
//! {"post_id":7,"domain":"travel",...}
//! ...
//! ```

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};

pub const STAGE_SCHEMA: &str = "clarq.stage";
pub const STAGE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn class_index(self) -> usize {
        match self {
            Label::Negative => 0,
            Label::Positive => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSource {
    LastComment,
    AnyComment,
    SampledNegative,
}

/// One (post, question) tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePair {
    pub post_id: u64,
    pub domain: String,
    pub post_text: String,
    pub question_text: String,
    pub source: PairSource,
    pub pseudo_label: Option<Label>,
    /// Positive-class probability from the last classifier pass.
    pub confidence: Option<f64>,
}

impl CandidatePair {
    pub fn is_positive(&self) -> bool {
        self.pseudo_label == Some(Label::Positive)
    }

    pub fn is_negative(&self) -> bool {
        self.pseudo_label == Some(Label::Negative)
    }

    /// Identity of the pair irrespective of label and confidence.
    pub fn key(&self) -> (&str, u64, &str) {
        (&self.domain, self.post_id, &self.question_text)
    }
}

/// A stage dataset (`D0`…`DN`, `SN`…`S0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSet {
    pub stage_name: String,
    pub pairs: Vec<CandidatePair>,
    pub rng_seed: u64,
}

impl LabeledSet {
    pub fn new(stage_name: impl Into<String>, rng_seed: u64) -> Self {
        LabeledSet {
            stage_name: stage_name.into(),
            pairs: Vec::new(),
            rng_seed,
        }
    }

    pub fn positives(&self) -> impl Iterator<Item = &CandidatePair> {
        self.pairs.iter().filter(|p| p.is_positive())
    }

    pub fn negatives(&self) -> impl Iterator<Item = &CandidatePair> {
        self.pairs.iter().filter(|p| p.is_negative())
    }

    pub fn counts(&self) -> (usize, usize) {
        let pos = self.positives().count();
        (pos, self.pairs.len() - pos)
    }

    pub fn is_trainable(&self) -> bool {
        let (p, n) = self.counts();
        p > 0 && n > 0
    }

    /// Checks that every pair is labeled, that sampled negatives carry the
    /// negative label and that no (domain, post, question, label) repeats.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for p in &self.pairs {
            let Some(label) = p.pseudo_label else {
                return Err(Error::Schema(format!(
                    "stage {}: unlabeled pair for post {}",
                    self.stage_name, p.post_id
                )));
            };
            if p.source == PairSource::SampledNegative && label != Label::Negative {
                return Err(Error::Schema(format!(
                    "stage {}: sampled negative labeled positive (post {})",
                    self.stage_name, p.post_id
                )));
            }
            if let Some(c) = p.confidence {
                if !(0.0..=1.0).contains(&c) {
                    return Err(Error::Schema(format!("stage {}: confidence {c} outside [0,1]", self.stage_name)));
                }
            }
            if !seen.insert((p.domain.as_str(), p.post_id, p.question_text.as_str(), label)) {
                return Err(Error::Schema(format!(
                    "stage {}: duplicate pair (post {}, {:?})",
                    self.stage_name, p.post_id, p.question_text
                )));
            }
        }
        Ok(())
    }
}

/// One emitted dataset line of `clarq.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClarQRecord {
    pub domain: String,
    pub post_id: u64,
    pub post_text: String,
    pub question_text: String,
    pub answers: Vec<String>,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct StageHeader {
    schema: String,
    version: u32,
    stage_name: String,
    rng_seed: u64,
    pairs: usize,
}

pub fn write_stage(set: &LabeledSet, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_stage_to(set, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_stage_to<W: Write>(set: &LabeledSet, out: &mut W) -> Result<()> {
    let header = StageHeader {
        schema: STAGE_SCHEMA.into(),
        version: STAGE_VERSION,
        stage_name: set.stage_name.clone(),
        rng_seed: set.rng_seed,
        pairs: set.pairs.len(),
    };
    serde_json::to_writer(&mut *out, &header)?;
    out.write_all(b"\n")?;
    for p in &set.pairs {
        serde_json::to_writer(&mut *out, p)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_stage(path: &Path) -> Result<LabeledSet> {
    read_stage_from(BufReader::new(File::open(path)?))
}

pub fn read_stage_from<R: BufRead>(input: R) -> Result<LabeledSet> {
    let mut lines = input.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::Schema("stage file has no header".into()))??;
    let header: StageHeader = serde_json::from_str(&header_line)
        .map_err(|e| Error::Schema(format!("bad stage header: {e}")))?;
    if header.schema != STAGE_SCHEMA || header.version != STAGE_VERSION {
        return Err(Error::Schema(format!(
            "unsupported stage file {} v{} (expected {STAGE_SCHEMA} v{STAGE_VERSION})",
            header.schema, header.version
        )));
    }
    let mut pairs = Vec::with_capacity(header.pairs);
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        pairs.push(serde_json::from_str(&line)?);
    }
    if pairs.len() != header.pairs {
        return Err(Error::Schema(format!(
            "stage {}: header declares {} pairs, found {}",
            header.stage_name,
            header.pairs,
            pairs.len()
        )));
    }
    let set = LabeledSet {
        stage_name: header.stage_name,
        pairs,
        rng_seed: header.rng_seed,
    };
    set.validate()?;
    Ok(set)
}

/// Writes one JSON value per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut items = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            items.push(serde_json::from_str(&line)?);
        }
    }
    Ok(items)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn pair(post_id: u64, q: &str, label: Label) -> CandidatePair {
        CandidatePair {
            post_id,
            domain: "cooking".into(),
            post_text: format!("post {post_id}"),
            question_text: q.into(),
            source: if label == Label::Positive {
                PairSource::LastComment
            } else {
                PairSource::SampledNegative
            },
            pseudo_label: Some(label),
            confidence: None,
        }
    }

    fn roundtrip(set: &LabeledSet) -> LabeledSet {
        let mut buf = Vec::new();
        write_stage_to(set, &mut buf).unwrap();
        read_stage_from(buf.as_slice()).unwrap()
    }

    #[test]
    fn empty_set_is_header_only() {
        let set = LabeledSet::new("D0", 3);
        let mut buf = Vec::new();
        write_stage_to(&set, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap().lines().count(), 1);
        assert_eq!(roundtrip(&set), set);
    }

    #[test]
    fn four_pair_set_writes_identically() {
        let mut set = LabeledSet::new("D1", 9);
        set.pairs = vec![
            pair(1, "which pan?", Label::Positive),
            pair(1, "how hot?", Label::Negative),
            pair(2, "how hot?", Label::Positive),
            pair(2, "which pan?", Label::Negative),
        ];
        set.pairs[0].confidence = Some(0.1 + 0.2);
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
        write_stage(&set, &a).unwrap();
        write_stage(&set, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        assert_eq!(read_stage(&a).unwrap(), set);
    }

    #[test]
    fn version_mismatch_is_schema_error() {
        let text = "{\"schema\":\"clarq.stage\",\"version\":99,\"stage_name\":\"D0\",\"rng_seed\":1,\"pairs\":0}\n";
        assert!(matches!(read_stage_from(text.as_bytes()), Err(Error::Schema(_))));
        assert!(matches!(read_stage_from("".as_bytes()), Err(Error::Schema(_))));
    }

    #[test]
    fn duplicates_and_unlabeled_rejected() {
        let mut set = LabeledSet::new("D0", 1);
        set.pairs = vec![pair(1, "a?", Label::Positive), pair(1, "a?", Label::Positive)];
        assert!(set.validate().is_err());
        set.pairs = vec![CandidatePair {
            pseudo_label: None,
            ..pair(1, "a?", Label::Positive)
        }];
        assert!(set.validate().is_err());
    }

    #[test]
    fn ten_thousand_pair_roundtrip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut set = LabeledSet::new("S2", 77);
        for i in 0..10_000u64 {
            let label = if rng.gen_bool(0.5) { Label::Positive } else { Label::Negative };
            let mut p = pair(i, &format!("q{} \u{e9}\"x\"?", rng.gen::<u32>()), label);
            p.domain = format!("d{}", rng.gen_range(0..7));
            p.confidence = rng.gen_bool(0.5).then(|| rng.gen::<f64>());
            set.pairs.push(p);
        }
        let back = roundtrip(&set);
        assert_eq!(back.pairs.len(), set.pairs.len());
        for (a, b) in back.pairs.iter().zip(&set.pairs) {
            assert_eq!(a.post_id, b.post_id);
            assert_eq!(a.domain, b.domain);
            assert_eq!(a.question_text, b.question_text);
            assert_eq!(a.pseudo_label, b.pseudo_label);
            assert_eq!(a.confidence.map(f64::to_bits), b.confidence.map(f64::to_bits));
        }
        assert_eq!(back, set);
    }

    proptest! {
        #[test]
        fn stage_roundtrip(texts in proptest::collection::vec(".{0,40}", 0..20), seed in any::<u64>(), conf in proptest::option::of(0.0f64..=1.0)) {
            let mut set = LabeledSet::new("D3", seed);
            for (i, t) in texts.iter().enumerate() {
                let mut p = pair(i as u64, t, if i % 2 == 0 { Label::Positive } else { Label::Negative });
                p.confidence = conf;
                set.pairs.push(p);
            }
            prop_assert_eq!(roundtrip(&set), set);
        }
    }
}
