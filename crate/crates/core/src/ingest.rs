//! Stackexchange archive ingestion: `Posts.xml` / `Comments.xml` row parsing
//! and the join into answered-post records.
//!
//! Each domain directory of the archive holds one `Posts.xml` and one
//! `Comments.xml`, each a single root element whose children are
//! `<row .../>` elements carrying the data as attributes. Domains are
//! independent and are processed in parallel; a domain is parsed in one
//! sequential pass.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{collapse_whitespace, html_to_text};

/// UTC timestamp normalized to `YYYY-MM-DDTHH:MM:SS.fff`, so that the
/// lexical order of the string is the chronological order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Timestamp(String);

impl Timestamp {
    pub fn parse(raw: &str) -> Result<Self> {
        let bad = || Error::InvalidAttribute {
            attribute: "CreationDate",
            value: raw.to_string(),
        };
        let s = raw.trim().trim_end_matches('Z');
        let (main, frac) = match s.split_once('.') {
            Some((m, f)) => (m, f),
            None => (s, ""),
        };
        let b = main.as_bytes();
        let shape_ok = b.len() == 19
            && b.iter().enumerate().all(|(i, c)| match i {
                4 | 7 => *c == b'-',
                10 => *c == b'T' || *c == b' ',
                13 | 16 => *c == b':',
                _ => c.is_ascii_digit(),
            });
        if !shape_ok || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let mut millis: String = frac.chars().take(3).collect();
        while millis.len() < 3 {
            millis.push('0');
        }
        Ok(Timestamp(format!("{}T{}.{}", &main[..10], &main[11..], millis)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Timestamp {
    type Error = Error;
    fn try_from(value: String) -> Result<Self> {
        Timestamp::parse(&value)
    }
}

impl From<Timestamp> for String {
    fn from(t: Timestamp) -> String {
        t.0
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostType {
    Question,
    Answer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawPostRow {
    pub id: u64,
    pub post_type: PostType,
    /// Set for answers, absent for questions.
    pub parent_id: Option<u64>,
    pub accepted_answer_id: Option<u64>,
    pub title: String,
    /// Body with markup stripped.
    pub body: String,
    pub creation: Timestamp,
    pub domain: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawCommentRow {
    pub id: u64,
    pub post_id: u64,
    pub text: String,
    pub creation: Timestamp,
}

/// A comment attached to a question post. Serialized as `[text, timestamp]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(String, Timestamp)", into = "(String, Timestamp)")]
pub struct Comment {
    pub text: String,
    pub creation: Timestamp,
}

impl From<(String, Timestamp)> for Comment {
    fn from((text, creation): (String, Timestamp)) -> Self {
        Comment { text, creation }
    }
}

impl From<Comment> for (String, Timestamp) {
    fn from(c: Comment) -> Self {
        (c.text, c.creation)
    }
}

/// One answered question post with its answers and its time-ordered comments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostRecord {
    pub post_id: u64,
    pub domain: String,
    pub title: String,
    pub body: String,
    pub answers: Vec<String>,
    pub comments: Vec<Comment>,
}

impl PostRecord {
    /// Text fed to the post encoder: title and body joined by one space.
    pub fn post_text(&self) -> String {
        match (self.title.is_empty(), self.body.is_empty()) {
            (true, _) => self.body.clone(),
            (_, true) => self.title.clone(),
            _ => format!("{} {}", self.title, self.body),
        }
    }

    pub fn last_comment(&self) -> Option<&Comment> {
        self.comments.last()
    }
}

/// Bookkeeping from [`join_corpus`]. Nothing counted here is fatal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinStats {
    pub questions: usize,
    pub answers: usize,
    pub answered_questions: usize,
    pub unanswered_questions: usize,
    pub comments_attached: usize,
    pub comments_on_answers: usize,
    pub comments_on_unanswered: usize,
    /// Comments whose `PostId` matches no post of the domain.
    pub orphan_comments: usize,
    /// Answers whose `ParentId` matches no question of the domain.
    pub orphan_answers: usize,
}

struct RowReader<R: BufRead> {
    reader: Reader<R>,
    buf: Vec<u8>,
    root: &'static str,
    depth: usize,
    seen_root: bool,
}

impl<R: BufRead> RowReader<R> {
    fn new(input: R, root: &'static str) -> Self {
        let mut reader = Reader::from_reader(input);
        reader.config_mut().check_end_names = true;
        RowReader {
            reader,
            buf: Vec::new(),
            root,
            depth: 0,
            seen_root: false,
        }
    }

    fn malformed(&self, message: impl Into<String>) -> Error {
        Error::MalformedXml {
            position: self.reader.buffer_position(),
            message: message.into(),
        }
    }

    fn position(&self) -> u64 {
        self.reader.buffer_position()
    }

    /// Visits every `<row/>` child of the root element.
    fn for_each_row(mut self, mut visit: impl FnMut(&BytesStart<'_>, u64) -> Result<()>) -> Result<()> {
        loop {
            let pos = self.position();
            self.buf.clear();
            let event = match self.reader.read_event_into(&mut self.buf) {
                Ok(ev) => ev.into_owned(),
                Err(e) => {
                    return Err(Error::MalformedXml {
                        position: self.reader.error_position(),
                        message: e.to_string(),
                    })
                }
            };
            match event {
                Event::Start(e) => {
                    if self.depth == 0 {
                        if self.seen_root {
                            return Err(self.malformed("more than one root element"));
                        }
                        if e.name().as_ref() != self.root.as_bytes() {
                            return Err(self.malformed(format!(
                                "expected root <{}>, found <{}>",
                                self.root,
                                String::from_utf8_lossy(e.name().as_ref())
                            )));
                        }
                        self.seen_root = true;
                    } else if e.name().as_ref() == b"row" && self.depth == 1 {
                        return Err(self.malformed("<row> must be self-closing"));
                    }
                    self.depth += 1;
                }
                Event::Empty(e) => {
                    if self.depth == 0 {
                        if self.seen_root {
                            return Err(self.malformed("more than one root element"));
                        }
                        if e.name().as_ref() != self.root.as_bytes() {
                            return Err(self.malformed(format!("expected root <{}>", self.root)));
                        }
                        self.seen_root = true;
                    } else if self.depth == 1 && e.name().as_ref() == b"row" {
                        visit(&e, pos)?;
                    }
                }
                Event::End(_) => {
                    self.depth = self.depth.saturating_sub(1);
                }
                Event::Text(t) => {
                    if self.depth == 0 && !t.iter().all(u8::is_ascii_whitespace) {
                        return Err(self.malformed("text outside the root element"));
                    }
                }
                Event::Eof => {
                    if self.depth != 0 {
                        return Err(self.malformed("unexpected end of file inside an element"));
                    }
                    if !self.seen_root {
                        return Err(self.malformed(format!("missing root element <{}>", self.root)));
                    }
                    return Ok(());
                }
                _ => {}
            }
        }
    }
}

fn attributes(row: &BytesStart<'_>, position: u64) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for attr in row.attributes() {
        let attr = attr.map_err(|e| Error::MalformedXml {
            position,
            message: e.to_string(),
        })?;
        let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
        let value = attr
            .unescape_value()
            .map_err(|e| Error::MalformedXml {
                position,
                message: e.to_string(),
            })?
            .into_owned();
        map.insert(key, value);
    }
    Ok(map)
}

fn required<'a>(attrs: &'a HashMap<String, String>, name: &'static str, position: u64) -> Result<&'a str> {
    attrs
        .get(name)
        .map(String::as_str)
        .ok_or(Error::MissingAttribute { position, attribute: name })
}

fn parse_id(name: &'static str, value: &str) -> Result<u64> {
    value.trim().parse().map_err(|_| Error::InvalidAttribute {
        attribute: name,
        value: value.to_string(),
    })
}

fn optional_id(attrs: &HashMap<String, String>, name: &'static str) -> Result<Option<u64>> {
    attrs.get(name).map(|v| parse_id(name, v)).transpose()
}

/// Parses a `Posts.xml` stream. Rows whose `PostTypeId` is neither 1
/// (question) nor 2 (answer) are skipped.
pub fn parse_posts<R: BufRead>(input: R, domain: &str) -> Result<Vec<RawPostRow>> {
    let mut rows = Vec::new();
    RowReader::new(input, "posts").for_each_row(|row, position| {
        let attrs = attributes(row, position)?;
        let id = parse_id("Id", required(&attrs, "Id", position)?)?;
        let post_type = match required(&attrs, "PostTypeId", position)?.trim() {
            "1" => PostType::Question,
            "2" => PostType::Answer,
            _ => return Ok(()),
        };
        let parent_id = optional_id(&attrs, "ParentId")?;
        if post_type == PostType::Answer && parent_id.is_none() {
            return Err(Error::MissingAttribute {
                position,
                attribute: "ParentId",
            });
        }
        let creation = Timestamp::parse(required(&attrs, "CreationDate", position)?)?;
        rows.push(RawPostRow {
            id,
            post_type,
            parent_id: if post_type == PostType::Question { None } else { parent_id },
            accepted_answer_id: optional_id(&attrs, "AcceptedAnswerId")?,
            title: attrs.get("Title").map(|t| html_to_text(t)).unwrap_or_default(),
            body: attrs.get("Body").map(|b| html_to_text(b)).unwrap_or_default(),
            creation,
            domain: domain.to_string(),
        });
        Ok(())
    })?;
    Ok(rows)
}

/// Parses a `Comments.xml` stream. Comments whose text is empty after
/// normalization carry no candidate question and are skipped.
pub fn parse_comments<R: BufRead>(input: R) -> Result<Vec<RawCommentRow>> {
    let mut rows = Vec::new();
    RowReader::new(input, "comments").for_each_row(|row, position| {
        let attrs = attributes(row, position)?;
        let id = parse_id("Id", required(&attrs, "Id", position)?)?;
        let post_id = parse_id("PostId", required(&attrs, "PostId", position)?)?;
        if post_id == 0 {
            return Err(Error::InvalidAttribute {
                attribute: "PostId",
                value: "0".into(),
            });
        }
        let text = html_to_text(required(&attrs, "Text", position)?);
        let creation = Timestamp::parse(required(&attrs, "CreationDate", position)?)?;
        if collapse_whitespace(&text).is_empty() {
            return Ok(());
        }
        rows.push(RawCommentRow {
            id,
            post_id,
            text,
            creation,
        });
        Ok(())
    })?;
    Ok(rows)
}

/// Joins one domain's posts and comments into answered-post records.
///
/// A question is kept when at least one answer row names it as parent.
/// Only comments on the question post itself are kept; comments on answers
/// and comments on unknown posts are counted in [`JoinStats`] and dropped.
/// Records come out in ascending `post_id` order.
pub fn join_corpus(
    posts: &[RawPostRow],
    comments: &[RawCommentRow],
    domain: &str,
) -> (Vec<PostRecord>, JoinStats) {
    let mut stats = JoinStats::default();
    let mut questions: BTreeMap<u64, &RawPostRow> = BTreeMap::new();
    let mut answer_ids = std::collections::HashSet::new();
    for p in posts {
        if p.post_type == PostType::Question {
            questions.insert(p.id, p);
        }
    }
    stats.questions = questions.len();

    let mut answers: HashMap<u64, Vec<&RawPostRow>> = HashMap::new();
    for p in posts.iter().filter(|p| p.post_type == PostType::Answer) {
        stats.answers += 1;
        answer_ids.insert(p.id);
        let parent = p.parent_id.expect("answer rows carry ParentId");
        if questions.contains_key(&parent) {
            answers.entry(parent).or_default().push(p);
        } else {
            stats.orphan_answers += 1;
        }
    }

    let mut by_post: HashMap<u64, Vec<&RawCommentRow>> = HashMap::new();
    for c in comments {
        if questions.contains_key(&c.post_id) {
            by_post.entry(c.post_id).or_default().push(c);
        } else if answer_ids.contains(&c.post_id) {
            stats.comments_on_answers += 1;
        } else {
            stats.orphan_comments += 1;
        }
    }

    let mut records = Vec::new();
    for (id, q) in questions {
        let Some(mut ans) = answers.remove(&id) else {
            stats.unanswered_questions += 1;
            stats.comments_on_unanswered += by_post.get(&id).map_or(0, Vec::len);
            continue;
        };
        stats.answered_questions += 1;
        ans.sort_by(|a, b| (&a.creation, a.id).cmp(&(&b.creation, b.id)));
        let mut cs = by_post.remove(&id).unwrap_or_default();
        cs.sort_by(|a, b| (&a.creation, a.id).cmp(&(&b.creation, b.id)));
        stats.comments_attached += cs.len();
        records.push(PostRecord {
            post_id: id,
            domain: domain.to_string(),
            title: q.title.clone(),
            body: q.body.clone(),
            answers: ans.iter().map(|a| a.body.clone()).collect(),
            comments: cs
                .into_iter()
                .map(|c| Comment {
                    text: c.text.clone(),
                    creation: c.creation.clone(),
                })
                .collect(),
        });
    }
    if stats.orphan_comments > 0 {
        log::warn!("{domain}: dropped {} orphan comments", stats.orphan_comments);
    }
    (records, stats)
}

/// Parses and joins one domain directory holding `Posts.xml` and `Comments.xml`.
pub fn ingest_domain(dir: &Path, domain: &str) -> Result<(Vec<PostRecord>, JoinStats)> {
    let posts = parse_posts(BufReader::new(File::open(dir.join("Posts.xml"))?), domain)?;
    let comments = parse_comments(BufReader::new(File::open(dir.join("Comments.xml"))?))?;
    Ok(join_corpus(&posts, &comments, domain))
}

/// Lists the domain directories of an archive, sorted by name, optionally
/// restricted to an allowlist (empty allowlist = every domain).
pub fn list_domains(dump_dir: &Path, allowlist: &[String]) -> Result<Vec<String>> {
    let mut domains = Vec::new();
    for entry in std::fs::read_dir(dump_dir)? {
        let entry = entry?;
        if !entry.file_type()?.is_dir() {
            continue;
        }
        let name = entry.file_name().to_string_lossy().into_owned();
        if entry.path().join("Posts.xml").is_file() && (allowlist.is_empty() || allowlist.contains(&name)) {
            domains.push(name);
        }
    }
    domains.sort();
    for wanted in allowlist {
        if !domains.contains(wanted) {
            return Err(Error::InvalidConfig(format!(
                "domain `{wanted}` not found under {}",
                dump_dir.display()
            )));
        }
    }
    Ok(domains)
}

/// Ingests every selected domain of an archive in parallel.
/// Output is ordered by domain name.
pub fn ingest_dump(dump_dir: &Path, allowlist: &[String]) -> Result<Vec<(String, Vec<PostRecord>, JoinStats)>> {
    let domains = list_domains(dump_dir, allowlist)?;
    domains
        .par_iter()
        .map(|d| {
            let (records, stats) = ingest_domain(&dump_dir.join(d), d)?;
            Ok((d.clone(), records, stats))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const POSTS: &str = r#"<?xml version="1.0" encoding="utf-8"?>
<posts>
  <row Id="1" PostTypeId="1" AcceptedAnswerId="3" CreationDate="2014-01-01T10:00:00.000" Title="Visa for Peru" Body="&lt;p&gt;Do I need a &lt;b&gt;visa&lt;/b&gt;?&lt;/p&gt;" />
  <row Id="2" PostTypeId="1" CreationDate="2014-01-02T10:00:00.000" Title="Cheap flights" Body="&lt;p&gt;Where?&lt;/p&gt;" />
  <row Id="3" PostTypeId="2" ParentId="1" CreationDate="2014-01-01T11:00:00.000" Body="&lt;p&gt;No visa needed.&lt;/p&gt;" />
</posts>"#;

    #[test]
    fn empty_posts() {
        assert!(parse_posts("<posts></posts>".as_bytes(), "travel").unwrap().is_empty());
        assert!(parse_posts("<posts/>".as_bytes(), "travel").unwrap().is_empty());
    }

    #[test]
    fn three_row_fixture() {
        let rows = parse_posts(POSTS.as_bytes(), "travel").unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].post_type, PostType::Question);
        assert_eq!(rows[0].parent_id, None);
        assert_eq!(rows[0].accepted_answer_id, Some(3));
        assert_eq!(rows[0].body, "Do I need a visa ?");
        assert_eq!(rows[1].post_type, PostType::Question);
        assert_eq!(rows[2].post_type, PostType::Answer);
        assert_eq!(rows[2].parent_id, Some(1));
        assert_eq!(rows[2].domain, "travel");
    }

    #[test]
    fn tag_wiki_rows_skipped() {
        let xml = r#"<posts>
<row Id="1" PostTypeId="1" CreationDate="2014-01-01T10:00:00" Title="a" Body="b"/>
<row Id="2" PostTypeId="4" CreationDate="2014-01-01T10:00:00" Body="wiki"/>
<row Id="3" PostTypeId="1" CreationDate="2014-01-01T10:00:00" Title="c" Body="d"/>
</posts>"#;
        let rows = parse_posts(xml.as_bytes(), "x").unwrap();
        assert_eq!(rows.iter().map(|r| r.id).collect::<Vec<_>>(), vec![1, 3]);
    }

    #[test]
    fn missing_attributes() {
        let xml = r#"<posts><row PostTypeId="1" CreationDate="2014-01-01T10:00:00"/></posts>"#;
        assert!(matches!(
            parse_posts(xml.as_bytes(), "x"),
            Err(Error::MissingAttribute { attribute: "Id", .. })
        ));
        let xml = r#"<posts><row Id="1" CreationDate="2014-01-01T10:00:00"/></posts>"#;
        assert!(matches!(
            parse_posts(xml.as_bytes(), "x"),
            Err(Error::MissingAttribute { attribute: "PostTypeId", .. })
        ));
        let xml = r#"<comments><row Id="1" PostId="3" CreationDate="2014-01-01T10:00:00"/></comments>"#;
        assert!(matches!(
            parse_comments(xml.as_bytes()),
            Err(Error::MissingAttribute { attribute: "Text", .. })
        ));
        let xml = r#"<comments><row Id="1" Text="hi" CreationDate="2014-01-01T10:00:00"/></comments>"#;
        assert!(matches!(
            parse_comments(xml.as_bytes()),
            Err(Error::MissingAttribute { attribute: "PostId", .. })
        ));
    }

    #[test]
    fn malformed_xml_reports_position() {
        let xml = "<posts>\n<row Id=\"1\" PostTypeId=\"1\" CreationDate=\"2014-01-01T10:00:00\"/>\n<row Id=\"2\"</posts>";
        match parse_posts(xml.as_bytes(), "x") {
            Err(Error::MalformedXml { position, .. }) => assert!(position > 0),
            other => panic!("expected MalformedXml, got {other:?}"),
        }
        let xml = "<posts><row Id=\"1\" PostTypeId=\"1\" CreationDate=\"2014-01-01T10:00:00\"/></comments>";
        assert!(matches!(parse_posts(xml.as_bytes(), "x"), Err(Error::MalformedXml { .. })));
        let xml = "<posts><row Id=\"1\" PostTypeId=\"1\" CreationDate=\"2014-01-01T10:00:00\"/>";
        assert!(matches!(parse_posts(xml.as_bytes(), "x"), Err(Error::MalformedXml { .. })));
        assert!(matches!(parse_comments("<posts></posts>".as_bytes()), Err(Error::MalformedXml { .. })));
    }

    #[test]
    fn comment_text_normalized() {
        assert!(parse_comments("<comments></comments>".as_bytes()).unwrap().is_empty());
        let xml = r#"<comments><row Id="9" PostId="4" Text="what OS version? " CreationDate="2014-01-01T10:00:00.5"/></comments>"#;
        let rows = parse_comments(xml.as_bytes()).unwrap();
        assert_eq!(rows[0].text, "what OS version?");
        assert_eq!(rows[0].creation.as_str(), "2014-01-01T10:00:00.500");
        let xml = r#"<comments><row Id="9" PostId="4" Text="is it &amp;quot;free&amp;quot; &amp;amp; legal?" CreationDate="2014-01-01T10:00:00"/></comments>"#;
        assert_eq!(parse_comments(xml.as_bytes()).unwrap()[0].text, "is it \"free\" & legal?");
    }

    #[test]
    fn five_comments_two_posts() {
        let xml = r#"<comments>
<row Id="1" PostId="10" Text="a?" CreationDate="2014-01-01T10:00:00"/>
<row Id="2" PostId="11" Text="b?" CreationDate="2014-01-01T10:00:01"/>
<row Id="3" PostId="10" Text="c?" CreationDate="2014-01-01T10:00:02"/>
<row Id="4" PostId="11" Text="d" CreationDate="2014-01-01T10:00:03"/>
<row Id="5" PostId="10" Text="e" CreationDate="2014-01-01T10:00:04"/>
</comments>"#;
        let rows = parse_comments(xml.as_bytes()).unwrap();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows.iter().map(|r| r.post_id).collect::<Vec<_>>(), vec![10, 11, 10, 11, 10]);
    }

    fn ts(s: &str) -> Timestamp {
        Timestamp::parse(s).unwrap()
    }

    fn q(id: u64) -> RawPostRow {
        RawPostRow {
            id,
            post_type: PostType::Question,
            parent_id: None,
            accepted_answer_id: None,
            title: format!("t{id}"),
            body: format!("b{id}"),
            creation: ts("2014-01-01T00:00:00"),
            domain: "d".into(),
        }
    }

    fn a(id: u64, parent: u64) -> RawPostRow {
        RawPostRow {
            post_type: PostType::Answer,
            parent_id: Some(parent),
            ..q(id)
        }
    }

    fn c(id: u64, post: u64, at: &str) -> RawCommentRow {
        RawCommentRow {
            id,
            post_id: post,
            text: format!("c{id}"),
            creation: ts(at),
        }
    }

    #[test]
    fn answered_without_comments() {
        let (records, _) = join_corpus(&[q(1), a(2, 1)], &[], "d");
        assert_eq!(records.len(), 1);
        assert!(records[0].comments.is_empty());
        assert_eq!(records[0].answers, vec!["b2".to_string()]);
    }

    #[test]
    fn join_fixture_orders_comments() {
        let posts = vec![q(1), q(2), q(3), a(10, 1), a(11, 2), a(12, 2)];
        let comments = vec![
            c(100, 1, "2014-01-03T00:00:00"),
            c(101, 2, "2014-01-02T00:00:00"),
            c(102, 1, "2014-01-01T00:00:00"),
            c(104, 2, "2014-01-02T00:00:00"),
            c(103, 2, "2014-01-02T00:00:00"),
        ];
        let (records, stats) = join_corpus(&posts, &comments, "d");
        assert_eq!(records.len(), 2);
        assert_eq!(stats.unanswered_questions, 1);
        assert_eq!(stats.comments_attached, 5);
        // brute sort oracle
        for r in &records {
            let mut expected: Vec<&RawCommentRow> = comments.iter().filter(|c| c.post_id == r.post_id).collect();
            expected.sort_by_key(|c| (c.creation.clone(), c.id));
            let texts: Vec<&str> = expected.iter().map(|c| c.text.as_str()).collect();
            assert_eq!(r.comments.iter().map(|c| c.text.as_str()).collect::<Vec<_>>(), texts);
        }
        assert_eq!(
            records[1].comments.iter().map(|c| c.text.as_str()).collect::<Vec<_>>(),
            vec!["c101", "c103", "c104"]
        );
    }

    #[test]
    fn answer_and_orphan_comments_dropped() {
        let posts = vec![q(1), a(2, 1), a(3, 99)];
        let comments = vec![
            c(1, 1, "2014-01-01T00:00:00"),
            c(2, 2, "2014-01-01T00:00:00"),
            c(3, 77, "2014-01-01T00:00:00"),
        ];
        let (records, stats) = join_corpus(&posts, &comments, "d");
        assert_eq!(records[0].comments.len(), 1);
        assert_eq!(stats.comments_on_answers, 1);
        assert_eq!(stats.orphan_comments, 1);
        assert_eq!(stats.orphan_answers, 1);
    }

    #[test]
    fn timestamp_normalization() {
        assert_eq!(ts("2014-01-01T10:00:00").as_str(), "2014-01-01T10:00:00.000");
        assert_eq!(ts("2014-01-01 10:00:00.12Z").as_str(), "2014-01-01T10:00:00.120");
        assert!(Timestamp::parse("yesterday").is_err());
        assert!(ts("2014-01-01T10:00:00.9") > ts("2014-01-01T10:00:00.100"));
    }

    #[test]
    fn record_json_shape() {
        let (records, _) = join_corpus(&[q(1), a(2, 1)], &[c(5, 1, "2014-01-01T00:00:00")], "d");
        let json = serde_json::to_string(&records[0]).unwrap();
        assert_eq!(
            json,
            r#"{"post_id":1,"domain":"d","title":"t1","body":"b1","answers":["b2"],"comments":[["c5","2014-01-01T00:00:00.000"]]}"#
        );
        let back: PostRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, records[0]);
    }
}
