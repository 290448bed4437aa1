//! Deterministic synthetic community-QA corpora with known ground truth.
//!
//! Each domain has a set of topic keywords drawn with a Zipf-like skew.
//! A post mentions its topic keyword; its answers mention a post-specific
//! detail word that the post itself never contains. Comments are one of
//! three kinds:
//!
//! * clarifying questions, which name the post's keyword (and often the
//!   detail word) and end in `?`,
//! * generic questions ("any update on this ?") that end in `?` but ask
//!   nothing about the post,
//! * statements without a question mark, which never name the topic.
//!
//! Generic questions in last position are the label noise of the seed set:
//! they pass the question-mark filter but are not clarification questions.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{CandidatePair, Label, LabeledSet, PairSource};
use crate::error::Result;
use crate::eval::AnnotatedPair;
use crate::ingest::{Comment, PostRecord, Timestamp};
use crate::seed::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub domains: Vec<String>,
    pub posts_per_domain: usize,
    pub topics_per_domain: usize,
    /// Zipf exponent of the topic distribution.
    pub topic_skew: f64,
    pub unanswered_fraction: f64,
    pub no_comment_fraction: f64,
    /// Probability that the last comment is a statement (no `?`).
    pub statement_last_fraction: f64,
    /// Probability that a question-mark last comment is a generic question.
    pub noise_fraction: f64,
    /// Comments before the last one: uniform in `0..=max_extra_comments`.
    pub max_extra_comments: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            domains: vec!["alpha".into(), "beta".into()],
            posts_per_domain: 120,
            topics_per_domain: 12,
            topic_skew: 1.0,
            unanswered_fraction: 0.15,
            no_comment_fraction: 0.1,
            statement_last_fraction: 0.15,
            noise_fraction: 0.1,
            max_extra_comments: 3,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommentKind {
    Clarifying,
    Generic,
    Statement,
}

impl CommentKind {
    pub fn gold_label(self) -> Label {
        match self {
            CommentKind::Clarifying => Label::Positive,
            _ => Label::Negative,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthComment {
    pub id: u64,
    pub text: String,
    pub kind: CommentKind,
    /// Seconds since 2015-01-01T00:00:00Z.
    pub at: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthPost {
    pub domain: String,
    pub post_id: u64,
    pub title: String,
    pub body: String,
    pub topic: usize,
    pub keyword: String,
    pub detail: String,
    pub at: u64,
    /// (answer post id, text, seconds); empty for unanswered posts.
    pub answers: Vec<(u64, String, u64)>,
    /// Time-ordered comments on the question.
    pub comments: Vec<SynthComment>,
}

impl SynthPost {
    pub fn post_text(&self) -> String {
        format!("{} {}", self.title, self.body)
    }

    pub fn to_record(&self) -> Option<PostRecord> {
        if self.answers.is_empty() {
            return None;
        }
        Some(PostRecord {
            post_id: self.post_id,
            domain: self.domain.clone(),
            title: self.title.clone(),
            body: self.body.clone(),
            answers: self.answers.iter().map(|a| a.1.clone()).collect(),
            comments: self
                .comments
                .iter()
                .map(|c| Comment {
                    text: c.text.clone(),
                    creation: Timestamp::parse(&iso_time(c.at)).expect("generated timestamps are valid"),
                })
                .collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub posts: Vec<SynthPost>,
}

const FILLER: &[&str] = &[
    "the", "my", "it", "when", "after", "with", "for", "this", "that", "some", "every", "new", "old", "again", "now",
    "still", "just", "really", "quite", "always", "today", "here", "there", "only", "also",
];
const NOUNS: &[&str] = &[
    "setup", "system", "file", "option", "issue", "problem", "error", "setting", "version", "thing", "step", "part",
    "process", "result", "method",
];
const VERBS: &[&str] = &[
    "configure", "install", "clean", "fix", "use", "replace", "tune", "reset", "store", "prepare", "move", "protect",
    "measure", "check", "choose",
];
const SYLLABLES: &[&str] = &[
    "ka", "lo", "mi", "zu", "ter", "vin", "dro", "pel", "sa", "rix", "no", "bex", "qui", "fa", "tor", "gle", "mu", "sen",
    "da", "pho", "ri", "vel", "xo", "nak",
];
const GENERIC_QUESTIONS: &[&str] = &[
    "any update on this ?",
    "why the downvote ?",
    "is this still an issue ?",
    "did you ever solve this ?",
    "can someone help here ?",
    "why was this closed ?",
    "is this on topic here ?",
    "have you searched the site first ?",
];

struct Words<'a> {
    rng: &'a mut ChaCha8Rng,
}

impl Words<'_> {
    fn pick<'s>(&mut self, list: &[&'s str]) -> &'s str {
        list[self.rng.gen_range(0..list.len())]
    }
}

fn pseudo_word(rng: &mut ChaCha8Rng, used: &mut HashSet<String>) -> String {
    loop {
        let n = rng.gen_range(2..=3);
        let w: String = (0..n).map(|_| SYLLABLES[rng.gen_range(0..SYLLABLES.len())]).collect();
        if used.insert(w.clone()) {
            return w;
        }
    }
}

fn zipf_pick(rng: &mut ChaCha8Rng, n: usize, skew: f64) -> usize {
    let weights: Vec<f64> = (0..n).map(|i| 1.0 / ((i + 1) as f64).powf(skew)).collect();
    let total: f64 = weights.iter().sum();
    let mut x = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return i;
        }
        x -= w;
    }
    n - 1
}

fn clarifying_question(w: &mut Words<'_>, kw: &str, detail: &str) -> String {
    let noun = w.pick(NOUNS);
    let verb = w.pick(VERBS);
    match w.rng.gen_range(0..6) {
        0 => format!("which {kw} {noun} are you using ?"),
        1 => format!("do you have {detail} installed for the {kw} ?"),
        2 => format!("is your {kw} {detail} or something else ?"),
        3 => format!("what happens when you {verb} the {kw} ?"),
        4 => format!("did you {verb} {kw} with {detail} ?"),
        _ => format!("which {detail} {kw} {noun} do you mean ?"),
    }
}

fn statement(w: &mut Words<'_>) -> String {
    match w.rng.gen_range(0..5) {
        0 => "thanks , that worked for me .".to_string(),
        1 => "try restarting it first .".to_string(),
        2 => "same problem here .".to_string(),
        3 => "+1 , great question .".to_string(),
        _ => "see the faq for details .".to_string(),
    }
}

fn comment_of(w: &mut Words<'_>, kind: CommentKind, kw: &str, detail: &str) -> String {
    match kind {
        CommentKind::Clarifying => clarifying_question(w, kw, detail),
        CommentKind::Generic => w.pick(GENERIC_QUESTIONS).to_string(),
        CommentKind::Statement => statement(w),
    }
}

impl SynthCorpus {
    pub fn generate(cfg: &SynthConfig) -> Self {
        let mut posts = Vec::new();
        for (d_index, domain) in cfg.domains.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, domain));
            let mut used: HashSet<String> = FILLER.iter().chain(NOUNS).chain(VERBS).map(|s| s.to_string()).collect();
            let keywords: Vec<String> = (0..cfg.topics_per_domain).map(|_| pseudo_word(&mut rng, &mut used)).collect();
            let mut next_id = 1u64;
            let mut next_comment = 1u64;
            for i in 0..cfg.posts_per_domain {
                let post_id = next_id;
                next_id += 1;
                let at = (d_index as u64 * 7 + i as u64) * 6 * 3600 + rng.gen_range(0..3600);
                let topic = zipf_pick(&mut rng, keywords.len(), cfg.topic_skew);
                let kw = keywords[topic].clone();
                let detail = pseudo_word(&mut rng, &mut used);
                let mut w = Words { rng: &mut rng };
                let (verb, noun) = (w.pick(VERBS), w.pick(NOUNS));
                let title = match w.rng.gen_range(0..5) {
                    0 => format!("how do i {verb} {kw}"),
                    1 => format!("{kw} {noun} keeps failing"),
                    2 => format!("best way to {verb} {kw} at home"),
                    3 => format!("why does my {kw} {noun} break"),
                    _ => format!("can i {verb} {kw} without tools"),
                };
                let mut sentences = Vec::new();
                for _ in 0..w.rng.gen_range(1..=2) {
                    let s = match w.rng.gen_range(0..4) {
                        0 => format!("the {} {} happens {} .", w.pick(NOUNS), w.pick(FILLER), w.pick(FILLER)),
                        1 => format!("i use salt & {} for the {} .", w.pick(NOUNS), w.pick(NOUNS)),
                        2 => format!("i already tried to {} the {} .", w.pick(VERBS), w.pick(NOUNS)),
                        _ => format!("i am trying to {} it with {} {} .", w.pick(VERBS), w.pick(FILLER), w.pick(NOUNS)),
                    };
                    sentences.push(s);
                }
                // The post closes on its topic.
                sentences.push(match w.rng.gen_range(0..3) {
                    0 => format!("please help with my {kw} ."),
                    1 => format!("any advice on {kw} ?"),
                    _ => format!("this is about {kw} ."),
                });
                let body = sentences.join(" ");

                let answered = !w.rng.gen_bool(cfg.unanswered_fraction);
                let mut answers = Vec::new();
                if answered {
                    for _ in 0..w.rng.gen_range(1..=2) {
                        let text = match w.rng.gen_range(0..3) {
                            0 => format!("{} the {kw} using {detail} {} .", w.pick(VERBS), w.pick(FILLER)),
                            1 => format!("you need {detail} for {kw} , then {} the {} .", w.pick(VERBS), w.pick(NOUNS)),
                            _ => format!("try {detail} and {} it {} .", w.pick(VERBS), w.pick(FILLER)),
                        };
                        let id = next_id;
                        next_id += 1;
                        answers.push((id, text, at + w.rng.gen_range(600..5 * 3600)));
                    }
                    answers.sort_by_key(|a| (a.2, a.0));
                }

                let mut kinds = Vec::new();
                if !w.rng.gen_bool(cfg.no_comment_fraction) {
                    for _ in 0..w.rng.gen_range(0..=cfg.max_extra_comments) {
                        let r: f64 = w.rng.gen();
                        kinds.push(if r < 0.4 {
                            CommentKind::Clarifying
                        } else if r < 0.7 {
                            CommentKind::Generic
                        } else {
                            CommentKind::Statement
                        });
                    }
                    let last = if w.rng.gen_bool(cfg.statement_last_fraction) {
                        CommentKind::Statement
                    } else if w.rng.gen_bool(cfg.noise_fraction) {
                        CommentKind::Generic
                    } else {
                        CommentKind::Clarifying
                    };
                    kinds.push(last);
                }
                let mut t = at + 300;
                let mut comments: Vec<SynthComment> = Vec::new();
                for kind in kinds {
                    // Occasional same-second comments exercise the id tie-break.
                    if comments.is_empty() || !w.rng.gen_bool(0.1) {
                        t += w.rng.gen_range(60..3600);
                    }
                    let mut text = comment_of(&mut w, kind, &kw, &detail);
                    let mut tries = 0;
                    while comments.iter().any(|c| c.text == text) && tries < 20 {
                        text = comment_of(&mut w, kind, &kw, &detail);
                        tries += 1;
                    }
                    if comments.iter().any(|c| c.text == text) {
                        continue;
                    }
                    comments.push(SynthComment {
                        id: next_comment,
                        text,
                        kind,
                        at: t,
                    });
                    next_comment += 1;
                }
                posts.push(SynthPost {
                    domain: domain.clone(),
                    post_id,
                    title,
                    body,
                    topic,
                    keyword: kw,
                    detail,
                    at,
                    answers,
                    comments,
                });
            }
        }
        SynthCorpus { posts }
    }

    /// Answered posts as joined records.
    pub fn records(&self) -> Vec<PostRecord> {
        self.posts.iter().filter_map(SynthPost::to_record).collect()
    }

    /// Ground-truth label of a (post, comment text) tuple.
    pub fn gold(&self, domain: &str, post_id: u64, question: &str) -> Option<Label> {
        self.posts
            .iter()
            .find(|p| p.domain == domain && p.post_id == post_id)?
            .comments
            .iter()
            .find(|c| c.text == question)
            .map(|c| c.kind.gold_label())
    }

    /// Splits posts into two corpora; a seeded `holdout_fraction` of them
    /// goes to the second one.
    pub fn split(&self, holdout_fraction: f64, seed: u64) -> (SynthCorpus, SynthCorpus) {
        let mut idx: Vec<usize> = (0..self.posts.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, "split")));
        let n_hold = (self.posts.len() as f64 * holdout_fraction).round() as usize;
        let hold: HashSet<usize> = idx[..n_hold].iter().copied().collect();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for (i, p) in self.posts.iter().enumerate() {
            if hold.contains(&i) {
                b.push(p.clone());
            } else {
                a.push(p.clone());
            }
        }
        (SynthCorpus { posts: a }, SynthCorpus { posts: b })
    }

    /// Annotated test pairs drawn from the questions among the last three
    /// comments of answered posts, with `n_positive : n_negative` gold labels.
    pub fn test_set(&self, n_positive: usize, n_negative: usize, seed: u64) -> Vec<AnnotatedPair> {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for p in self.posts.iter().filter(|p| !p.answers.is_empty()) {
            let start = p.comments.len().saturating_sub(3);
            for c in p.comments[start..].iter().filter(|c| c.kind != CommentKind::Statement) {
                let pair = AnnotatedPair {
                    domain: p.domain.clone(),
                    post_id: p.post_id,
                    post_text: p.post_text(),
                    question_text: c.text.clone(),
                    gold_label: c.kind.gold_label(),
                };
                if c.kind == CommentKind::Clarifying {
                    pos.push(pair);
                } else {
                    neg.push(pair);
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "test-set"));
        pos.shuffle(&mut rng);
        neg.shuffle(&mut rng);
        pos.truncate(n_positive);
        neg.truncate(n_negative);
        let mut all: Vec<AnnotatedPair> = pos.into_iter().chain(neg).collect();
        all.sort_by(|a, b| (&a.domain, a.post_id, &a.question_text).cmp(&(&b.domain, b.post_id, &b.question_text)));
        all
    }

    /// For every answered post, its first clarifying comment that names the
    /// detail word (the word the post's answers contain and the post lacks).
    pub fn answer_bearing_questions(&self) -> BTreeMap<(String, u64), String> {
        self.posts
            .iter()
            .filter(|p| !p.answers.is_empty())
            .filter_map(|p| {
                p.comments
                    .iter()
                    .find(|c| c.kind == CommentKind::Clarifying && c.text.split(' ').any(|t| t == p.detail))
                    .map(|c| ((p.domain.clone(), p.post_id), c.text.clone()))
            })
            .collect()
    }
}

/// A small separable set: positives carry the marker token in both post and
/// question, negatives carry it in neither.
pub fn marker_set(n_pairs: usize, seed: u64) -> LabeledSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = LabeledSet::new("marker", seed);
    for i in 0..n_pairs {
        let positive = i % 2 == 0;
        let mut w = Words { rng: &mut rng };
        let filler: Vec<&str> = (0..4).map(|_| w.pick(FILLER)).collect();
        let (post, question) = if positive {
            (
                format!("{} {} zqmarker {} {}", filler[0], filler[1], filler[2], filler[3]),
                format!("{} zqmarker {} ?", w.pick(NOUNS), w.pick(NOUNS)),
            )
        } else {
            (
                format!("{} {} {} {}", filler[0], filler[1], filler[2], filler[3]),
                format!("{} {} ?", w.pick(NOUNS), w.pick(NOUNS)),
            )
        };
        set.pairs.push(CandidatePair {
            post_id: i as u64,
            domain: "marker".into(),
            post_text: post,
            question_text: question,
            source: if positive {
                PairSource::LastComment
            } else {
                PairSource::SampledNegative
            },
            pseudo_label: Some(if positive { Label::Positive } else { Label::Negative }),
            confidence: None,
        });
    }
    set
}

fn days_to_civil(days: i64) -> (i64, u32, u32) {
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097);
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    (if m <= 2 { y + 1 } else { y }, m, d)
}

/// Seconds after 2015-01-01T00:00:00Z as an ISO-8601 timestamp.
pub fn iso_time(seconds: u64) -> String {
    const EPOCH_DAYS_2015: i64 = 16_436;
    let days = EPOCH_DAYS_2015 + (seconds / 86_400) as i64;
    let (y, m, d) = days_to_civil(days);
    let s = seconds % 86_400;
    format!("{y:04}-{m:02}-{d:02}T{:02}:{:02}:{:02}.000", s / 3600, (s / 60) % 60, s % 60)
}

/// Counts a domain's archive files are expected to produce once ingested.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpCounts {
    pub question_rows: usize,
    pub answer_rows: usize,
    pub other_rows: usize,
    pub answered_questions: usize,
    pub comment_rows: usize,
    pub comments_attached: usize,
    pub comments_on_answers: usize,
    pub comments_on_unanswered: usize,
    pub orphan_comments: usize,
}

fn attr(s: &str) -> String {
    quick_xml::escape::escape(s).into_owned()
}

/// Writes the corpus as a stackexchange-style archive: one directory per
/// domain holding `Posts.xml` and `Comments.xml`. Besides the corpus it adds
/// tag-wiki rows, comments on answers and comments on missing posts, all of
/// which ingestion must drop. Returns the expected counts per domain.
pub fn write_minidump(corpus: &SynthCorpus, dir: &Path, seed: u64) -> Result<BTreeMap<String, DumpCounts>> {
    let mut by_domain: BTreeMap<&str, Vec<&SynthPost>> = BTreeMap::new();
    for p in &corpus.posts {
        by_domain.entry(&p.domain).or_default().push(p);
    }
    let mut summary = BTreeMap::new();
    for (domain, posts) in by_domain {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("dump/{domain}")));
        let mut counts = DumpCounts::default();
        let mut rows: Vec<String> = Vec::new();
        let mut comment_rows: Vec<String> = Vec::new();
        let mut comment_id = 100_000u64;
        let mut max_post = 0;
        for p in &posts {
            counts.question_rows += 1;
            max_post = max_post.max(p.post_id);
            let accepted = match p.answers.first() {
                Some(a) if rng.gen_bool(0.5) => format!(r#" AcceptedAnswerId="{}""#, a.0),
                _ => String::new(),
            };
            let body_html = format!("<p>{}</p>", p.body.replace(" . ", " .</p>\n<p>").replace('&', "&amp;"));
            rows.push(format!(
                r#"  <row Id="{}" PostTypeId="1"{accepted} CreationDate="{}" Score="{}" Title="{}" Body="{}" />"#,
                p.post_id,
                iso_time(p.at),
                rng.gen_range(0..20),
                attr(&p.title),
                attr(&body_html)
            ));
            if !p.answers.is_empty() {
                counts.answered_questions += 1;
            }
            for c in &p.comments {
                if p.answers.is_empty() {
                    counts.comments_on_unanswered += 1;
                } else {
                    counts.comments_attached += 1;
                }
                comment_rows.push(format!(
                    r#"  <row Id="{}" PostId="{}" Score="0" Text="{}" CreationDate="{}" />"#,
                    c.id,
                    p.post_id,
                    attr(&c.text),
                    iso_time(c.at)
                ));
            }
            for (id, text, at) in &p.answers {
                counts.answer_rows += 1;
                max_post = max_post.max(*id);
                rows.push(format!(
                    r#"  <row Id="{id}" PostTypeId="2" ParentId="{}" CreationDate="{}" Score="1" Body="{}" />"#,
                    p.post_id,
                    iso_time(*at),
                    attr(&format!("<p>{text}</p>"))
                ));
                if rng.gen_bool(0.1) {
                    counts.comments_on_answers += 1;
                    comment_rows.push(format!(
                        r#"  <row Id="{comment_id}" PostId="{id}" Score="0" Text="{}" CreationDate="{}" />"#,
                        attr("nice answer , thanks ?"),
                        iso_time(at + 120)
                    ));
                    comment_id += 1;
                }
            }
        }
        for (k, type_id) in [4u32, 5].into_iter().enumerate() {
            counts.other_rows += 1;
            rows.push(format!(
                r#"  <row Id="{}" PostTypeId="{type_id}" CreationDate="{}" Body="{}" />"#,
                max_post + 1 + k as u64,
                iso_time(0),
                attr("<p>tag wiki excerpt</p>")
            ));
        }
        for k in 0..3u64 {
            counts.orphan_comments += 1;
            comment_rows.push(format!(
                r#"  <row Id="{comment_id}" PostId="{}" Score="0" Text="{}" CreationDate="{}" />"#,
                900_000 + k,
                attr("is this a duplicate ?"),
                iso_time(k * 60)
            ));
            comment_id += 1;
        }
        // Archive files are not sorted by time; neither are these.
        comment_rows.shuffle(&mut rng);
        counts.comment_rows = comment_rows.len();

        let ddir = dir.join(domain);
        fs::create_dir_all(&ddir)?;
        let mut posts_xml = String::from("<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<posts>\n");
        for r in rows {
            let _ = writeln!(posts_xml, "{r}");
        }
        posts_xml.push_str("</posts>\n");
        fs::write(ddir.join("Posts.xml"), posts_xml)?;
        let mut comments_xml = String::from("<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<comments>\n");
        for r in comment_rows {
            let _ = writeln!(comments_xml, "{r}");
        }
        comments_xml.push_str("</comments>\n");
        fs::write(ddir.join("Comments.xml"), comments_xml)?;
        summary.insert(domain.to_string(), counts);
    }
    Ok(summary)
}

/// Seed of the demo fixture bundle.
pub const FIXTURE_SEED: u64 = 7;
/// Gold positives and negatives in the fixture's `testset.csv`.
pub const FIXTURE_TEST_SPLIT: (usize, usize) = (70, 30);

/// Writes the demo bundle used by the command-line tests: the default
/// synthetic corpus as an archive under `dir/minidump` and an annotated
/// `dir/testset.csv`.
pub fn write_fixture(dir: &Path) -> Result<BTreeMap<String, DumpCounts>> {
    let corpus = SynthCorpus::generate(&SynthConfig {
        seed: FIXTURE_SEED,
        ..SynthConfig::default()
    });
    let counts = write_minidump(&corpus, &dir.join("minidump"), FIXTURE_SEED)?;
    let (pos, neg) = FIXTURE_TEST_SPLIT;
    let test = corpus.test_set(pos, neg, FIXTURE_SEED);
    crate::eval::write_annotated_csv(fs::File::create(dir.join("testset.csv"))?, &test)?;
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let cfg = SynthConfig::default();
        assert_eq!(SynthCorpus::generate(&cfg), SynthCorpus::generate(&cfg));
    }

    #[test]
    fn answers_contain_detail_post_does_not() {
        let c = SynthCorpus::generate(&SynthConfig::default());
        for p in &c.posts {
            assert!(!p.post_text().split(' ').any(|t| t == p.detail));
            for a in &p.answers {
                assert!(a.1.split(' ').any(|t| t == p.detail));
            }
            for w in p.comments.windows(2) {
                assert!((w[0].at, w[0].id) < (w[1].at, w[1].id));
            }
            for c in &p.comments {
                assert_eq!(c.text.contains('?'), c.kind != CommentKind::Statement);
            }
        }
    }

    #[test]
    fn iso_time_known_values() {
        assert_eq!(iso_time(0), "2015-01-01T00:00:00.000");
        assert_eq!(iso_time(59 * 86_400 + 3661), "2015-03-01T01:01:01.000");
        assert_eq!(iso_time(365 * 86_400), "2016-01-01T00:00:00.000");
    }

    #[test]
    fn test_set_ratio() {
        let c = SynthCorpus::generate(&SynthConfig::default());
        let t = c.test_set(70, 30, 1);
        assert_eq!(t.iter().filter(|p| p.gold_label.is_positive()).count(), 70);
        assert_eq!(t.len(), 100);
    }
}
