//! One function per subcommand. Each validates its inputs, writes its
//! artifacts into the work directory and returns the manifest it wrote.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::time::Instant;

use clarq_core::corpus::{read_jsonl, read_stage, write_jsonl, write_stage};
use clarq_core::encoder::{load_classifier, save_classifier};
use clarq_core::eval::{
    build_rerank_instances, evaluate_classifier, read_annotated_csv, rerank_report, rerank_table_csv, EncoderScorer,
    Scorer, TfIdfScorer,
};
use clarq_core::ingest::ingest_dump;
use clarq_core::refine::{build_seed, classify_corpus_into, corpus_pairs, run_refinement, LedgerRow, NegativeSampler};
use clarq_core::{AnnotatedPair, ClarQRecord, Classifier, DomainStats, LabeledSet, PostRecord};

use crate::config::{PipelineConfig, ScorerKind};
use crate::error::{CliError, CliResult};
use crate::workdir::{digest, write_atomic, InputDigest, Manifest, WorkDir};

pub const CLARQ_FILE: &str = "clarq.jsonl";
pub const MODEL_FILE: &str = "model.json";
pub const LEDGER_FILE: &str = "ledger.csv";
pub const LOSSES_FILE: &str = "losses.csv";
pub const DOWN_TABLE_FILE: &str = "down_sampling.csv";
pub const UP_TABLE_FILE: &str = "up_sampling.csv";
pub const RERANK_TABLE_FILE: &str = "rerank.csv";
pub const RERANK_FILE: &str = "rerank.json";
pub const EVAL_FILE: &str = "eval.csv";
pub const STATS_FILE: &str = "stats.csv";
pub const SVG_FILE: &str = "distribution.svg";

/// Everything a command needs: resolved config, the locked work directory
/// and the mixing policy.
pub struct Context {
    pub cfg: PipelineConfig,
    pub work: WorkDir,
    pub allow_mixed: bool,
    hash: String,
}

impl Context {
    pub fn new(cfg: PipelineConfig, allow_mixed: bool) -> CliResult<Self> {
        let work = WorkDir::open(&cfg.work_dir)?;
        let hash = cfg.config_hash();
        Ok(Context {
            cfg,
            work,
            allow_mixed,
            hash,
        })
    }

    pub fn config_hash(&self) -> &str {
        &self.hash
    }

    fn manifest(&self, stage: &str, inputs: Vec<InputDigest>, counts: BTreeMap<String, u64>, started: Instant) -> CliResult<Manifest> {
        let m = Manifest {
            stage: stage.to_string(),
            inputs,
            config_hash: self.hash.clone(),
            seed: self.cfg.seed,
            counts,
            wall_time: started.elapsed().as_secs_f64(),
        };
        self.work.write_manifest(&m)?;
        Ok(m)
    }

    fn record_files(&self) -> CliResult<Vec<(String, std::path::PathBuf)>> {
        let mut files: Vec<(String, std::path::PathBuf)> = fs::read_dir(self.work.records_dir())?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .map(|p| (p.file_stem().unwrap().to_string_lossy().into_owned(), p))
            .collect();
        files.sort();
        Ok(files)
    }

    /// Ingested records of every domain, with input digests.
    fn load_records(&self) -> CliResult<(Vec<PostRecord>, Vec<InputDigest>)> {
        let dir = self.work.records_dir();
        self.work.require("ingest", "records", &dir, &self.hash, self.allow_mixed)?;
        let files = self.record_files()?;
        if files.is_empty() {
            return Err(CliError::MissingArtifact {
                artifact: "records".into(),
                path: dir,
            });
        }
        let mut records = Vec::new();
        let mut inputs = Vec::new();
        for (domain, path) in files {
            records.extend(read_jsonl::<PostRecord>(&path)?);
            inputs.push(digest(format!("records/{domain}.jsonl"), &path)?);
        }
        Ok((records, inputs))
    }

    fn load_stage(&self, producer: &str, name: &str) -> CliResult<(LabeledSet, InputDigest)> {
        let path = self.work.stage_file(name);
        self.work.require(producer, name, &path, &self.hash, self.allow_mixed)?;
        let set = read_stage(&path)?;
        Ok((set, digest(format!("stages/{name}.jsonl"), &path)?))
    }

    fn load_model(&self) -> CliResult<(Classifier, InputDigest)> {
        let path = self.work.file(MODEL_FILE);
        self.work.require("refine", "model", &path, &self.hash, self.allow_mixed)?;
        Ok((load_classifier(&path)?, digest(MODEL_FILE, &path)?))
    }

    fn load_clarq(&self) -> CliResult<(Vec<ClarQRecord>, InputDigest)> {
        let path = self.work.file(CLARQ_FILE);
        self.work.require("classify", "clarq", &path, &self.hash, self.allow_mixed)?;
        Ok((read_jsonl(&path)?, digest(CLARQ_FILE, &path)?))
    }

    fn load_test_set(&self, records: &[PostRecord]) -> CliResult<Option<(Vec<AnnotatedPair>, InputDigest)>> {
        let Some(path) = &self.cfg.test_set else { return Ok(None) };
        let pairs = read_annotated_csv(File::open(path)?, records)?;
        Ok(Some((pairs, digest("test_set", path)?)))
    }
}

fn count(map: &mut BTreeMap<String, u64>, key: impl Into<String>, value: usize) {
    map.insert(key.into(), value as u64);
}

pub fn cmd_ingest(ctx: &Context) -> CliResult<Manifest> {
    let started = Instant::now();
    let dump = &ctx.cfg.dump_dir;
    let domains = ingest_dump(dump, &ctx.cfg.domains)?;
    if domains.is_empty() {
        return Err(CliError::Config(format!("no domain directories under {}", dump.display())));
    }
    let dir = ctx.work.records_dir();
    fs::remove_dir_all(&dir)?;
    fs::create_dir_all(&dir)?;
    let mut inputs = Vec::new();
    let mut counts = BTreeMap::new();
    let mut total = 0;
    for (domain, records, stats) in &domains {
        for file in ["Posts.xml", "Comments.xml"] {
            inputs.push(digest(format!("{domain}/{file}"), &dump.join(domain).join(file))?);
        }
        write_jsonl(&ctx.work.records_file(domain), records)?;
        total += records.len();
        count(&mut counts, format!("{domain}.questions"), stats.questions);
        count(&mut counts, format!("{domain}.answers"), stats.answers);
        count(&mut counts, format!("{domain}.answered_questions"), stats.answered_questions);
        count(&mut counts, format!("{domain}.unanswered_questions"), stats.unanswered_questions);
        count(&mut counts, format!("{domain}.comments_attached"), stats.comments_attached);
        count(&mut counts, format!("{domain}.comments_on_answers"), stats.comments_on_answers);
        count(&mut counts, format!("{domain}.comments_on_unanswered"), stats.comments_on_unanswered);
        count(&mut counts, format!("{domain}.orphan_comments"), stats.orphan_comments);
        count(&mut counts, format!("{domain}.orphan_answers"), stats.orphan_answers);
    }
    count(&mut counts, "domains", domains.len());
    count(&mut counts, "records", total);
    ctx.manifest("ingest", inputs, counts, started)
}

pub fn cmd_seed(ctx: &Context) -> CliResult<Manifest> {
    let started = Instant::now();
    let (records, inputs) = ctx.load_records()?;
    let d0 = build_seed(&records, &ctx.cfg.refine_config())?;
    write_stage(&d0, &ctx.work.stage_file("D0"))?;
    let (pos, neg) = d0.counts();
    let mut counts = BTreeMap::new();
    count(&mut counts, "positives", pos);
    count(&mut counts, "negatives", neg);
    ctx.manifest("seed", inputs, counts, started)
}

fn table_csv(rows: &[(String, &LedgerRow)]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["Iteration", "Precision", "Recall", "F1"])
        .map_err(clarq_core::Error::from)?;
    for (label, row) in rows {
        let cells = match &row.metrics {
            Some(m) => [format!("{:.3}", m.precision), format!("{:.3}", m.recall), format!("{:.3}", m.f1)],
            None => Default::default(),
        };
        w.write_record([label.as_str(), &cells[0], &cells[1], &cells[2]])
            .map_err(clarq_core::Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 strings"))
}

pub fn cmd_refine(ctx: &Context) -> CliResult<Manifest> {
    let started = Instant::now();
    let (d0, d0_digest) = ctx.load_stage("seed", "D0")?;
    let (records, mut inputs) = ctx.load_records()?;
    inputs.insert(0, d0_digest);
    let test = match ctx.load_test_set(&records)? {
        Some((pairs, d)) => {
            inputs.push(d);
            pairs
        }
        None => Vec::new(),
    };
    let cfg = ctx.cfg.refine_config();
    let sampler = NegativeSampler::from_corpus(&records, &d0);
    let result = run_refinement(&d0, &sampler, &cfg, &test)?;

    for entry in fs::read_dir(ctx.work.stages_dir())? {
        let path = entry?.path();
        if path.file_stem().is_some_and(|s| s != "D0") {
            fs::remove_file(path)?;
        }
    }
    let n = cfg.n_iterations;
    let deepest = LabeledSet {
        stage_name: format!("S{n}"),
        ..result.down_sets[n - 1].clone()
    };
    let mut counts = BTreeMap::new();
    for set in result.down_sets.iter().chain(std::iter::once(&deepest)).chain(&result.up_sets) {
        write_stage(set, &ctx.work.stage_file(&set.stage_name))?;
        let (p, q) = set.counts();
        count(&mut counts, format!("{}.positives", set.stage_name), p);
        count(&mut counts, format!("{}.negatives", set.stage_name), q);
    }
    count(&mut counts, "test_pairs", test.len());

    write_atomic(&ctx.work.file(LEDGER_FILE), result.ledger.to_csv().as_bytes())?;
    let down: Vec<(String, &LedgerRow)> = result
        .ledger
        .down_rows()
        .enumerate()
        .map(|(i, r)| ((i + 1).to_string(), r))
        .collect();
    let mut up: Vec<(String, &LedgerRow)> = result
        .ledger
        .up_rows()
        .enumerate()
        .map(|(i, r)| ((i + 1).to_string(), r))
        .collect();
    if let Some(f) = result.ledger.final_row() {
        up.push(("final".into(), f));
    }
    write_atomic(&ctx.work.file(DOWN_TABLE_FILE), table_csv(&down)?.as_bytes())?;
    write_atomic(&ctx.work.file(UP_TABLE_FILE), table_csv(&up)?.as_bytes())?;

    let mut losses = String::from("trained_on,epoch,loss\n");
    for (stage, trace) in &result.loss_traces {
        for (e, l) in trace.iter().enumerate() {
            losses.push_str(&format!("{stage},{},{l:.9}\n", e + 1));
        }
    }
    write_atomic(&ctx.work.file(LOSSES_FILE), losses.as_bytes())?;
    save_classifier(&result.classifier, &ctx.work.file(MODEL_FILE))?;
    ctx.manifest("refine", inputs, counts, started)
}

pub fn cmd_classify(ctx: &Context) -> CliResult<Manifest> {
    let started = Instant::now();
    let (clf, model_digest) = ctx.load_model()?;
    let (records, mut inputs) = ctx.load_records()?;
    inputs.insert(0, model_digest);
    let threshold = ctx.cfg.refine.threshold;
    let path = ctx.work.file(CLARQ_FILE);
    let tmp = path.with_extension("tmp");
    let mut out = BufWriter::new(File::create(&tmp)?);
    let mut per_domain: BTreeMap<String, usize> = BTreeMap::new();
    let pairs = corpus_pairs(&records).count();
    let emitted = classify_corpus_into(&clf, corpus_pairs(&records), threshold, |rec| {
        *per_domain.entry(rec.domain.clone()).or_default() += 1;
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n").map_err(clarq_core::Error::from)?;
        Ok(())
    })?;
    out.into_inner().map_err(|e| CliError::Io(e.into_error()))?.sync_all()?;
    fs::rename(tmp, &path)?;
    let mut counts = BTreeMap::new();
    count(&mut counts, "pairs", pairs);
    count(&mut counts, "clarification_questions", emitted);
    for (d, c) in per_domain {
        count(&mut counts, format!("{d}.clarification_questions"), c);
    }
    ctx.manifest("classify", inputs, counts, started)
}

pub fn cmd_eval(ctx: &Context) -> CliResult<Manifest> {
    let started = Instant::now();
    if ctx.cfg.test_set.is_none() {
        return Err(CliError::Config("eval needs `test_set` in the config".into()));
    }
    let (clf, model_digest) = ctx.load_model()?;
    let (records, mut inputs) = ctx.load_records()?;
    inputs.insert(0, model_digest);
    let (test, test_digest) = ctx.load_test_set(&records)?.expect("checked above");
    inputs.push(test_digest);
    if test.is_empty() {
        return Err(CliError::Config("test set is empty".into()));
    }
    let threshold = ctx.cfg.refine.threshold;
    let m = evaluate_classifier(&clf, &test, threshold);
    let text = format!(
        "model,threshold,precision,recall,f1,tp,fp,fn,tn\nfinal,{threshold},{:.6},{:.6},{:.6},{},{},{},{}\n",
        m.precision, m.recall, m.f1, m.tp, m.fp, m.fn_, m.tn
    );
    write_atomic(&ctx.work.file(EVAL_FILE), text.as_bytes())?;
    let mut counts = BTreeMap::new();
    count(&mut counts, "test_pairs", test.len());
    count(&mut counts, "tp", m.tp);
    count(&mut counts, "fp", m.fp);
    count(&mut counts, "fn", m.fn_);
    count(&mut counts, "tn", m.tn);
    ctx.manifest("eval", inputs, counts, started)
}

/// The most confident classified question of each post.
pub fn best_questions(clarq: &[ClarQRecord]) -> BTreeMap<(String, u64), String> {
    let mut best: BTreeMap<(String, u64), (f64, &str)> = BTreeMap::new();
    for r in clarq {
        let key = (r.domain.clone(), r.post_id);
        let better = match best.get(&key) {
            None => true,
            Some((c, q)) => r.confidence > *c || (r.confidence == *c && r.question_text.as_str() < *q),
        };
        if better {
            best.insert(key, (r.confidence, &r.question_text));
        }
    }
    best.into_iter().map(|(k, (_, q))| (k, q.to_string())).collect()
}

pub fn cmd_rerank(ctx: &Context) -> CliResult<Manifest> {
    let started = Instant::now();
    let (clarq, clarq_digest) = ctx.load_clarq()?;
    let (records, mut inputs) = ctx.load_records()?;
    inputs.insert(0, clarq_digest);
    let questions = best_questions(&clarq);
    let settings = &ctx.cfg.rerank;
    let domains: Vec<String> = if settings.domains.is_empty() {
        records
            .iter()
            .map(|r| r.domain.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    } else {
        settings.domains.clone()
    };
    let instances = build_rerank_instances(
        &records,
        &questions,
        &domains,
        settings.n_per_domain,
        settings.pool_size,
        clarq_core::seed::derive_seed(ctx.cfg.seed, "rerank"),
    )?;
    if instances.is_empty() {
        return Err(CliError::Config("no post has both answers and a classified question".into()));
    }
    let scorer: Box<dyn Scorer> = match settings.scorer {
        ScorerKind::Tfidf => {
            let docs: Vec<String> = records
                .iter()
                .flat_map(|r| std::iter::once(r.post_text()).chain(r.answers.iter().cloned()))
                .collect();
            Box::new(TfIdfScorer::fit(docs.iter().map(String::as_str)))
        }
        ScorerKind::Encoder => Box::new(EncoderScorer::train(&records, &ctx.cfg.train)?),
    };
    let without = rerank_report(&instances, scorer.as_ref(), false)?;
    let with = rerank_report(&instances, scorer.as_ref(), true)?;
    write_atomic(&ctx.work.file(RERANK_TABLE_FILE), rerank_table_csv(&without, &with).as_bytes())?;
    let mut json = serde_json::to_string_pretty(&[&without, &with]).map_err(clarq_core::Error::from)?;
    json.push('\n');
    write_atomic(&ctx.work.file(RERANK_FILE), json.as_bytes())?;
    let mut counts = BTreeMap::new();
    count(&mut counts, "instances", instances.len());
    count(&mut counts, "pool_size", settings.pool_size);
    ctx.manifest("rerank", inputs, counts, started)
}

pub fn cmd_stats(ctx: &Context) -> CliResult<Manifest> {
    let started = Instant::now();
    let (clarq, clarq_digest) = ctx.load_clarq()?;
    let stats = DomainStats::from_records(&clarq);
    let k = ctx.cfg.stats.top_k;
    write_atomic(&ctx.work.file(STATS_FILE), stats.to_csv(k).as_bytes())?;
    write_atomic(&ctx.work.file(SVG_FILE), stats.to_svg(k).as_bytes())?;
    let mut counts = BTreeMap::new();
    count(&mut counts, "total", stats.total);
    count(&mut counts, "domains", stats.counts.len());
    ctx.manifest("stats", vec![clarq_digest], counts, started)
}
