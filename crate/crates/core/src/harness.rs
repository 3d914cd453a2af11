//! Experiment orchestration and report emission.
//!
//! Every experiment produces a [`Report`]: a column list, rows aligned to
//! those columns, a statistics block and a snapshot of the configuration that
//! produced it. Reports serialize to JSON and CSV with identical row data.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::corpus::{self, Corpus, CorpusError, CorpusFormat, Document, TokenizerSpec};
use crate::metrics::{self, DqiConfig, MetricError, MtldConfig, VocdConfig};
use crate::nn::TrainConfig;
use crate::probe::{self, PreparedCorpus, ProbeError, ProbeRun, ProbeSpec};
use crate::stats::{self, StatsError, TTestVariant};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Probe(#[from] ProbeError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization failed: {0}")]
    Serialization(#[from] serde_json::Error),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// True when the failure stems from user input (arguments, config, corpus files).
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            HarnessError::Config(_)
                | HarnessError::Corpus(_)
                | HarnessError::Probe(ProbeError::Corpus(_) | ProbeError::InvalidSpec(_) | ProbeError::InvalidSweep(_))
        )
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::IoFailure {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    DqiDuplication,
    LengthTrends,
    WidthSweep,
    DupProbe,
    Multilingual,
    CenturySqueeze,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::DqiDuplication => "dqi-duplication",
            ExperimentKind::LengthTrends => "length-trends",
            ExperimentKind::WidthSweep => "width-sweep",
            ExperimentKind::DupProbe => "dup-probe",
            ExperimentKind::Multilingual => "multilingual",
            ExperimentKind::CenturySqueeze => "century-squeeze",
        }
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(Value::String(s.to_string())).map_err(|_| format!("unknown experiment {s:?}"))
    }
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Ttr,
    Vocd,
    Mtld,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chunking {
    PerWork,
    FixedChunk(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSource {
    pub path: PathBuf,
    pub format: CorpusFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// Experiment description as read from a JSON config file. Unset
/// experiment-specific fields take the experiment's defaults when resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentKind>,
    #[serde(default)]
    pub corpora: Vec<CorpusSource>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_formats")]
    pub formats: Vec<ReportFormat>,
    #[serde(default)]
    pub tokenizer: TokenizerSpec,
    #[serde(default)]
    pub dqi: DqiConfig,
    #[serde(default)]
    pub mtld: MtldConfig,
    #[serde(default)]
    pub vocd: VocdConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_values: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub widths: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Vec<Metric>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chunking: Option<Chunking>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_per_language: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_variant: Option<TTestVariant>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("reports")
}

fn default_formats() -> Vec<ReportFormat> {
    vec![ReportFormat::Csv, ReportFormat::Json]
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        serde_json::from_value(json!({ "experiment": experiment })).expect("defaults deserialize")
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    /// Fills every experiment-specific default so the result is a complete snapshot.
    pub fn resolved(&self) -> Result<Self, HarnessError> {
        let kind = self
            .experiment
            .ok_or_else(|| HarnessError::Config("no experiment named".into()))?;
        let mut c = self.clone();
        let seeds = c
            .seeds
            .take()
            .unwrap_or_else(|| (0..3).map(|i| self.seed + i).collect());
        match kind {
            ExperimentKind::DqiDuplication => {
                c.k_values.get_or_insert_with(|| vec![1, 2, 5, 10, 50, 100, 500, 1000]);
                c.total.get_or_insert(1000);
            }
            ExperimentKind::LengthTrends => {
                c.metrics.get_or_insert_with(|| vec![Metric::Ttr, Metric::Vocd, Metric::Mtld]);
                c.chunking.get_or_insert(Chunking::PerWork);
            }
            ExperimentKind::WidthSweep => {
                c.widths.get_or_insert_with(|| probe::DEFAULT_WIDTHS.to_vec());
                c.threshold.get_or_insert(probe::DEFAULT_THRESHOLD);
                c.seeds = Some(seeds);
            }
            ExperimentKind::DupProbe => {
                c.k_values.get_or_insert_with(|| vec![1, 2, 10, 100, 1000]);
                c.total.get_or_insert(1000);
                c.widths.get_or_insert_with(|| vec![64, 128, 256, 512]);
                c.seeds = Some(seeds);
            }
            ExperimentKind::Multilingual => {
                c.sample_per_language.get_or_insert(40);
                c.width.get_or_insert(64);
                c.test_variant.get_or_insert(TTestVariant::Welch);
                c.seeds = Some(seeds);
            }
            ExperimentKind::CenturySqueeze => {
                c.widths.get_or_insert_with(|| vec![64, 128, 256, 512]);
                c.ratios.get_or_insert_with(|| probe::DEFAULT_RATIOS.to_vec());
                c.test_variant.get_or_insert(TTestVariant::Pooled);
                c.seeds = Some(seeds);
            }
        }
        Ok(c)
    }

    fn load_corpora(&self) -> Result<Vec<Corpus>, HarnessError> {
        self.corpora
            .iter()
            .map(|src| {
                let mut c = corpus::load_corpus(&src.path, src.format, &self.tokenizer)?;
                if let Some(label) = &src.label {
                    c.source_label = label.clone();
                }
                Ok(c)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedItem {
    pub label: String,
    pub item: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: ExperimentKind,
    pub tool_version: String,
    pub config: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub statistics: Value,
    pub skipped: Vec<SkippedItem>,
    pub duration_secs: f64,
}

impl Report {
    fn new(experiment: ExperimentKind, config: Value, columns: &[&str]) -> Self {
        Self {
            experiment,
            tool_version: TOOL_VERSION.to_string(),
            config,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            statistics: json!({}),
            skipped: Vec::new(),
            duration_secs: 0.0,
        }
    }

    fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Writes the header and rows as CSV.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(csv_cell))?;
        }
        w.flush().map_err(|e| HarnessError::Csv(e.into()))?;
        Ok(())
    }

    pub fn csv_string(&self) -> Result<String, HarnessError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// CSV rendering of a JSON cell: strings verbatim, null as empty.
pub fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

fn timed(mut report: Report, start: Instant) -> Report {
    report.duration_secs = start.elapsed().as_secs_f64();
    report
}

/// DQI 1 over corpora of `total` rows cycled from `k` distinct documents.
pub fn run_dqi_duplication_curve(
    base: &Corpus,
    k_values: &[usize],
    total: usize,
    dqi: &DqiConfig,
    seed: u64,
) -> Result<Report, HarnessError> {
    let start = Instant::now();
    let config = json!({ "corpus": base.source_label, "k_values": k_values, "total": total, "dqi": dqi, "seed": seed });
    let mut report = Report::new(
        ExperimentKind::DqiDuplication,
        config,
        &["k", "total", "v", "size_x", "size_s", "sigma", "vocab_term", "length_term", "dqi1_total"],
    );
    for &k in k_values {
        let c = corpus::synthesize_duplicated_corpus(&base.documents, k, total, seed)?;
        let r = metrics::dqi1(&c, dqi)?;
        report.push(vec![
            json!(k),
            json!(total),
            json!(r.v),
            json!(r.size_x),
            json!(r.size_s),
            num(r.sigma),
            num(r.vocab_term),
            num(r.length_term),
            num(r.total),
        ]);
    }
    Ok(timed(report, start))
}

fn work_units(corpus: &Corpus, chunking: Chunking) -> Vec<(String, Vec<&str>)> {
    match chunking {
        Chunking::PerWork => corpus
            .documents
            .iter()
            .map(|d| (d.id.clone(), d.tokens.iter().map(String::as_str).collect()))
            .collect(),
        Chunking::FixedChunk(n) => corpus
            .documents
            .iter()
            .flat_map(|d| {
                d.tokens
                    .chunks_exact(n.max(1))
                    .enumerate()
                    .map(move |(i, c)| (format!("{}#{i}", d.id), c.iter().map(String::as_str).collect()))
            })
            .collect(),
    }
}

/// Per-work TTR / VOCD / MTLD against token count, with a linear trend per
/// corpus label and metric. Works failing a metric precondition are skipped.
pub fn run_length_trend_study(
    corpora: &[Corpus],
    metric_set: &[Metric],
    chunking: Chunking,
    mtld_config: &MtldConfig,
    vocd_config: &VocdConfig,
) -> Result<Report, HarnessError> {
    if corpora.is_empty() {
        return Err(HarnessError::Config("length-trend study needs at least one corpus".into()));
    }
    let start = Instant::now();
    let config = json!({
        "corpora": corpora.iter().map(|c| &c.source_label).collect::<Vec<_>>(),
        "metrics": metric_set, "chunking": chunking, "mtld": mtld_config, "vocd": vocd_config,
    });
    let mut report = Report::new(
        ExperimentKind::LengthTrends,
        config,
        &["kind", "label", "work", "token_count", "metric", "value", "slope", "intercept", "r_squared", "n"],
    );
    let mut fits = serde_json::Map::new();
    let mut evaluated = 0usize;
    for corpus in corpora {
        let label = &corpus.source_label;
        let mut points: Vec<Vec<(f64, f64)>> = vec![Vec::new(); metric_set.len()];
        for (work, tokens) in work_units(corpus, chunking) {
            let values: Result<Vec<f64>, MetricError> = metric_set
                .iter()
                .map(|m| match m {
                    Metric::Ttr => metrics::type_token_ratio(&tokens),
                    Metric::Mtld => metrics::mtld(&tokens, mtld_config),
                    Metric::Vocd => metrics::vocd(&tokens, vocd_config).map(|r| r.d),
                })
                .collect();
            match values {
                Ok(values) => {
                    evaluated += 1;
                    let n = tokens.len() as f64;
                    for (i, (m, v)) in metric_set.iter().zip(values).enumerate() {
                        points[i].push((n, v));
                        report.push(vec![
                            json!("scatter"),
                            json!(label),
                            json!(work),
                            json!(tokens.len()),
                            json!(m),
                            num(v),
                            Value::Null,
                            Value::Null,
                            Value::Null,
                            Value::Null,
                        ]);
                    }
                }
                Err(e) => report.skipped.push(SkippedItem {
                    label: label.clone(),
                    item: work,
                    reason: e.to_string(),
                }),
            }
        }
        let mut label_fits = serde_json::Map::new();
        for (m, pts) in metric_set.iter().zip(&points) {
            let (x, y): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
            let name = serde_json::to_value(m)?.as_str().unwrap_or_default().to_string();
            match stats::linear_fit(&x, &y) {
                Ok(fit) => {
                    report.push(vec![
                        json!("fit"),
                        json!(label),
                        Value::Null,
                        Value::Null,
                        json!(m),
                        Value::Null,
                        num(fit.slope),
                        num(fit.intercept),
                        num(fit.r_squared),
                        json!(pts.len()),
                    ]);
                    label_fits.insert(name, json!({ "fit": fit, "mean": stats::mean(&y), "n": pts.len() }));
                }
                Err(_) => {
                    label_fits.insert(name, json!({ "fit": null, "n": pts.len() }));
                }
            }
        }
        fits.insert(label.clone(), Value::Object(label_fits));
    }
    report.statistics = json!({
        "fits": fits,
        "works_evaluated": evaluated,
        "works_skipped": report.skipped.len(),
        "works_total": evaluated + report.skipped.len(),
    });
    Ok(timed(report, start))
}

pub const PROFILE_COLUMNS: [&str; 9] = [
    "corpus",
    "setup",
    "width",
    "squeeze_ratio",
    "seed",
    "accuracy",
    "final_loss",
    "vocab_size",
    "token_count",
];

pub fn profile_row(run: &ProbeRun) -> Vec<Value> {
    vec![
        json!(run.corpus),
        json!(run.setup),
        json!(run.width),
        opt_num(run.squeeze_ratio),
        json!(run.seed),
        num(run.accuracy),
        num(run.final_loss),
        json!(run.vocab_size),
        json!(run.token_count),
    ]
}

/// Width sweep per corpus; rows are individual probe runs, statistics carry
/// each corpus's capacity profile and minimal width.
pub fn run_width_sweep_study(
    corpora: &[Corpus],
    widths: &[usize],
    templates: &[ProbeSpec],
    train: &TrainConfig,
    seeds: &[u64],
) -> Result<Report, HarnessError> {
    let start = Instant::now();
    let config = json!({
        "corpora": corpora.iter().map(|c| &c.source_label).collect::<Vec<_>>(),
        "widths": widths, "templates": templates, "train": train, "seeds": seeds,
    });
    let mut report = Report::new(ExperimentKind::WidthSweep, config, &PROFILE_COLUMNS);
    let mut profiles = Vec::new();
    for corpus in corpora {
        let prepared = PreparedCorpus::new(corpus)?;
        for template in templates {
            let profile = probe::width_sweep_prepared(&prepared, widths, template, train, seeds)?;
            for run in &profile.runs {
                report.push(profile_row(run));
            }
            profiles.push(json!({
                "corpus": profile.corpus,
                "setup": profile.setup,
                "squeeze_ratio": profile.squeeze_ratio,
                "width_accuracy": profile.width_accuracy,
                "threshold": profile.threshold,
                "minimal_width": profile.minimal_width,
                "seeds_used": profile.seeds_used,
            }));
        }
    }
    report.statistics = json!({ "profiles": profiles });
    Ok(timed(report, start))
}

/// Mean reconstruction accuracy on a `(k, width)` grid of duplication-controlled corpora.
pub fn run_dup_probe(
    base: &Corpus,
    k_values: &[usize],
    total: usize,
    widths: &[usize],
    train: &TrainConfig,
    seeds: &[u64],
    dup_seed: u64,
) -> Result<Report, HarnessError> {
    let start = Instant::now();
    let config = json!({
        "corpus": base.source_label, "k_values": k_values, "total": total, "widths": widths,
        "train": train, "seeds": seeds, "dup_seed": dup_seed,
    });
    let mut report = Report::new(
        ExperimentKind::DupProbe,
        config,
        &["k", "width", "accuracy", "accuracy_min", "accuracy_max", "vocab_size", "token_count"],
    );
    let mut minimal = serde_json::Map::new();
    for &k in k_values {
        let c = corpus::synthesize_duplicated_corpus(&base.documents, k, total, dup_seed)?;
        let profile = probe::width_sweep(&c, widths, &ProbeSpec::basic(widths[0]), train, seeds)?;
        for (&(w, acc), runs) in profile.width_accuracy.iter().zip(profile.runs.chunks(seeds.len())) {
            let lo = runs.iter().map(|r| r.accuracy).fold(f64::INFINITY, f64::min);
            let hi = runs.iter().map(|r| r.accuracy).fold(f64::NEG_INFINITY, f64::max);
            report.push(vec![
                json!(k),
                json!(w),
                num(acc),
                num(lo),
                num(hi),
                json!(runs[0].vocab_size),
                json!(runs[0].token_count),
            ]);
        }
        minimal.insert(k.to_string(), opt_num(profile.minimal_width));
    }
    report.statistics = json!({ "minimal_width_by_k": minimal, "threshold": probe::DEFAULT_THRESHOLD });
    Ok(timed(report, start))
}

/// Probes sampled works per language at a fixed width, then tests whether
/// accuracy tracks text length (Pearson) or language (pairwise t-tests).
pub fn run_multilingual_study(
    languages: &[Corpus],
    sample_per_language: usize,
    width: usize,
    train: &TrainConfig,
    seeds: &[u64],
    variant: TTestVariant,
    sample_seed: u64,
) -> Result<Report, HarnessError> {
    if languages.len() < 2 {
        return Err(HarnessError::Config("multilingual study needs at least two languages".into()));
    }
    if seeds.is_empty() {
        return Err(HarnessError::Config("no seeds given".into()));
    }
    let start = Instant::now();
    let config = json!({
        "languages": languages.iter().map(|c| &c.source_label).collect::<Vec<_>>(),
        "sample_per_language": sample_per_language, "width": width, "train": train,
        "seeds": seeds, "test_variant": variant, "sample_seed": sample_seed,
    });
    let mut report = Report::new(
        ExperimentKind::Multilingual,
        config,
        &["language", "work", "token_count", "vocab_size", "accuracy"],
    );
    let spec = ProbeSpec::basic(width);
    let mut undersampled = Vec::new();
    let mut per_language: Vec<(String, Vec<f64>)> = Vec::new();
    let mut all_acc = Vec::new();
    let mut all_len = Vec::new();

    for lang in languages {
        let works = sample_works(&lang.documents, sample_per_language, sample_seed);
        if works.len() < sample_per_language {
            undersampled.push(json!({ "language": lang.source_label, "available": works.len() }));
        }
        let mut accs = Vec::new();
        for work in works {
            let single = Corpus::new(format!("{}/{}", lang.source_label, work.id), vec![work.clone()]);
            let prepared = match PreparedCorpus::new(&single) {
                Ok(p) => p,
                Err(e) => {
                    report.skipped.push(SkippedItem {
                        label: lang.source_label.clone(),
                        item: work.id.clone(),
                        reason: e.to_string(),
                    });
                    continue;
                }
            };
            let profile = probe::width_sweep_prepared(&prepared, &[width], &spec, train, seeds)?;
            let acc = profile.width_accuracy[0].1;
            report.push(vec![
                json!(lang.source_label),
                json!(work.id),
                json!(prepared.token_count()),
                json!(prepared.vocab_size),
                num(acc),
            ]);
            accs.push(acc);
            all_acc.push(acc);
            all_len.push(prepared.token_count() as f64);
        }
        per_language.push((lang.source_label.clone(), accs));
    }

    let correlation = match stats::pearson(&all_acc, &all_len) {
        Ok(r) => json!(r),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let mut pairwise = Vec::new();
    for i in 0..per_language.len() {
        for j in i + 1..per_language.len() {
            let (a, xa) = &per_language[i];
            let (b, xb) = &per_language[j];
            let result = match stats::t_test(xa, xb, variant) {
                Ok(r) => json!(r),
                Err(e) => json!({ "error": e.to_string() }),
            };
            pairwise.push(json!({ "a": a, "b": b, "result": result }));
        }
    }
    report.statistics = json!({
        "pearson_accuracy_vs_length": correlation,
        "pairwise_tests": pairwise,
        "undersampled": undersampled,
    });
    Ok(timed(report, start))
}

/// Seeded sample without replacement, kept in original order; all works
/// when fewer than `n` exist.
fn sample_works(works: &[Document], n: usize, seed: u64) -> Vec<&Document> {
    if works.len() <= n {
        return works.iter().collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = index::sample(&mut rng, works.len(), n).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| &works[i]).collect()
}

/// Squeeze grids for two corpora plus a two-sample test over the flattened grids.
pub fn run_century_squeeze_study(
    corpus_a: &Corpus,
    corpus_b: &Corpus,
    widths: &[usize],
    ratios: &[f64],
    train: &TrainConfig,
    seeds: &[u64],
    variant: TTestVariant,
) -> Result<Report, HarnessError> {
    let start = Instant::now();
    let config = json!({
        "corpus_a": corpus_a.source_label, "corpus_b": corpus_b.source_label,
        "widths": widths, "ratios": ratios, "train": train, "seeds": seeds, "test_variant": variant,
    });
    let mut report = Report::new(
        ExperimentKind::CenturySqueeze,
        config,
        &["corpus", "width", "squeeze_ratio", "accuracy", "row_max"],
    );
    let mut grids = Vec::new();
    for c in [corpus_a, corpus_b] {
        if c.is_empty() {
            return Err(HarnessError::Corpus(CorpusError::EmptyCorpus));
        }
        let grid = probe::squeeze_sweep(c, widths, ratios, train, seeds)?;
        let maxima = grid.row_maxima();
        for (wi, &w) in grid.widths.iter().enumerate() {
            for (ri, &r) in grid.ratios.iter().enumerate() {
                report.push(vec![
                    json!(c.source_label),
                    json!(w),
                    num(r),
                    num(grid.accuracy[wi][ri]),
                    json!(maxima[wi] == ri),
                ]);
            }
        }
        grids.push(grid);
    }
    let (a, b) = (grids[0].flattened(), grids[1].flattened());
    let test = match stats::t_test(&a, &b, variant) {
        Ok(r) => json!(r),
        Err(e) => json!({ "error": e.to_string() }),
    };
    report.statistics = json!({
        "test": test,
        "mean_a": stats::mean(&a),
        "mean_b": stats::mean(&b),
        "grids": grids.iter().map(|g| json!({ "corpus": g.corpus, "accuracy": g.accuracy })).collect::<Vec<_>>(),
    });
    Ok(timed(report, start))
}

/// One basic template, or one squeezed template per ratio.
pub fn sweep_templates(widths: &[usize], ratios: Option<&[f64]>, threshold: f64) -> Result<Vec<ProbeSpec>, HarnessError> {
    let first = *widths
        .first()
        .ok_or_else(|| HarnessError::Config("no widths given".into()))?;
    let specs = match ratios {
        None | Some([]) => vec![ProbeSpec::basic(first)],
        Some(rs) => rs.iter().map(|&r| ProbeSpec::squeezed(first, r)).collect(),
    };
    Ok(specs
        .into_iter()
        .map(|s| ProbeSpec {
            accuracy_threshold: threshold,
            ..s
        })
        .collect())
}

fn need_corpora(corpora: &[Corpus], n: usize, what: &str) -> Result<(), HarnessError> {
    if corpora.len() < n {
        return Err(HarnessError::Config(format!("{what} needs at least {n} corpora, got {}", corpora.len())));
    }
    Ok(())
}

/// Loads the configured corpora, runs the experiment and stores the resolved
/// configuration in the report.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report, HarnessError> {
    let c = config.resolved()?;
    let corpora = c.load_corpora()?;
    let seeds = c.seeds.clone().unwrap_or_default();
    let mut report = match c.experiment.expect("resolved") {
        ExperimentKind::DqiDuplication => {
            need_corpora(&corpora, 1, "dqi-duplication")?;
            run_dqi_duplication_curve(&corpora[0], c.k_values.as_deref().unwrap(), c.total.unwrap(), &c.dqi, c.seed)?
        }
        ExperimentKind::LengthTrends => {
            need_corpora(&corpora, 1, "length-trends")?;
            run_length_trend_study(&corpora, c.metrics.as_deref().unwrap(), c.chunking.unwrap(), &c.mtld, &c.vocd)?
        }
        ExperimentKind::WidthSweep => {
            need_corpora(&corpora, 1, "width-sweep")?;
            let widths = c.widths.as_deref().unwrap();
            let templates = sweep_templates(widths, c.ratios.as_deref(), c.threshold.unwrap())?;
            run_width_sweep_study(&corpora, widths, &templates, &c.train, &seeds)?
        }
        ExperimentKind::DupProbe => {
            need_corpora(&corpora, 1, "dup-probe")?;
            run_dup_probe(
                &corpora[0],
                c.k_values.as_deref().unwrap(),
                c.total.unwrap(),
                c.widths.as_deref().unwrap(),
                &c.train,
                &seeds,
                c.seed,
            )?
        }
        ExperimentKind::Multilingual => run_multilingual_study(
            &corpora,
            c.sample_per_language.unwrap(),
            c.width.unwrap(),
            &c.train,
            &seeds,
            c.test_variant.unwrap(),
            c.seed,
        )?,
        ExperimentKind::CenturySqueeze => {
            if corpora.len() != 2 {
                return Err(HarnessError::Config("century-squeeze needs exactly two corpora".into()));
            }
            run_century_squeeze_study(
                &corpora[0],
                &corpora[1],
                c.widths.as_deref().unwrap(),
                c.ratios.as_deref().unwrap(),
                &c.train,
                &seeds,
                c.test_variant.unwrap(),
            )?
        }
    };
    report.config = serde_json::to_value(&c)?;
    Ok(report)
}

/// Writes `{experiment}-{timestamp}.{csv,json}` into `dir`, returning the paths.
pub fn emit_report(report: &Report, dir: &Path, formats: &[ReportFormat]) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%3fZ");
    let mut written = Vec::new();
    for format in formats {
        let (ext, bytes) = match format {
            ReportFormat::Csv => ("csv", report.csv_string()?.into_bytes()),
            ReportFormat::Json => ("json", serde_json::to_vec_pretty(report)?),
        };
        let path = dir.join(format!("{}-{stamp}.{ext}", report.experiment));
        fs::write(&path, bytes).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}
