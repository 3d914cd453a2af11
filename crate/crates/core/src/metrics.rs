//! Classical lexical diversity metrics: TTR, MTLD, VOCD-D and DQI 1.

use std::collections::HashSet;
use std::hash::Hash;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::stats;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("metric requires a non-empty input")]
    EmptyInput,
    #[error("corpus has no rows")]
    EmptyCorpus,
    #[error("MTLD is undefined: no factor was completed and the final TTR is 1")]
    NonFinite,
    #[error("text has {len} tokens but VOCD needs at least {required}")]
    TextTooShort { len: usize, required: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub fn type_token_ratio<T: Eq + Hash>(tokens: &[T]) -> Result<f64, MetricError> {
    if tokens.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let types: HashSet<&T> = tokens.iter().collect();
    Ok(types.len() as f64 / tokens.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MtldConfig {
    pub factor_threshold: f64,
    pub bidirectional: bool,
}

impl Default for MtldConfig {
    fn default() -> Self {
        Self {
            factor_threshold: 0.72,
            bidirectional: true,
        }
    }
}

pub fn mtld<T: Eq + Hash>(tokens: &[T], config: &MtldConfig) -> Result<f64, MetricError> {
    if tokens.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let th = config.factor_threshold;
    if !(th > 0.0 && th < 1.0) {
        return Err(MetricError::InvalidConfig(format!(
            "factor threshold {th} outside (0, 1)"
        )));
    }
    let forward = mtld_factors(tokens.iter(), th);
    if forward == 0.0 {
        return Err(MetricError::NonFinite);
    }
    let n = tokens.len() as f64;
    if !config.bidirectional {
        return Ok(n / forward);
    }
    let backward = mtld_factors(tokens.iter().rev(), th);
    if backward == 0.0 {
        return Err(MetricError::NonFinite);
    }
    Ok(0.5 * (n / forward + n / backward))
}

/// Full factors plus the prorated trailing partial factor for one pass.
fn mtld_factors<'a, T: Eq + Hash + 'a>(tokens: impl Iterator<Item = &'a T>, threshold: f64) -> f64 {
    let mut factors = 0.0;
    let mut types: HashSet<&T> = HashSet::new();
    let mut seg_len = 0usize;
    for tok in tokens {
        types.insert(tok);
        seg_len += 1;
        let ttr = types.len() as f64 / seg_len as f64;
        if ttr < threshold {
            factors += 1.0;
            types.clear();
            seg_len = 0;
        }
    }
    if seg_len > 0 {
        let ttr = types.len() as f64 / seg_len as f64;
        factors += (1.0 - ttr) / (1.0 - threshold);
    }
    factors
}

/// Expected TTR of an `n`-token sample under the VOCD model with parameter `d`.
pub fn vocd_expected_ttr(n: f64, d: f64) -> f64 {
    (d / n) * ((1.0 + 2.0 * n / d).sqrt() - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VocdConfig {
    pub min_sample: usize,
    pub max_sample: usize,
    pub trials_per_size: usize,
    pub runs: usize,
    pub d_search_range: (f64, f64),
    pub seed: u64,
}

impl Default for VocdConfig {
    fn default() -> Self {
        Self {
            min_sample: 35,
            max_sample: 50,
            trials_per_size: 100,
            runs: 3,
            d_search_range: (1.0, 1000.0),
            seed: 0,
        }
    }
}

impl VocdConfig {
    fn validate(&self) -> Result<(), MetricError> {
        let (lo, hi) = self.d_search_range;
        if self.min_sample == 0
            || self.min_sample >= self.max_sample
            || self.trials_per_size == 0
            || self.runs == 0
            || !(lo > 0.0 && lo < hi)
        {
            return Err(MetricError::InvalidConfig(format!("{self:?}")));
        }
        Ok(())
    }
}

const VOCD_FIT_TOL: f64 = 1e-6;
const VOCD_BOUNDARY_EPS: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocdResult {
    /// Mean fitted D over runs.
    pub d: f64,
    pub run_estimates: Vec<f64>,
    /// `(sample size, mean TTR)` for each run.
    pub mean_ttrs: Vec<Vec<(usize, f64)>>,
    /// Set when any run's fit landed on an edge of the search range.
    pub at_boundary: bool,
}

/// Least-squares fit of D to `(sample size, mean TTR)` points.
pub fn fit_vocd_d(points: &[(usize, f64)], range: (f64, f64)) -> Result<f64, MetricError> {
    if points.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let sse = |d: f64| {
        points
            .iter()
            .map(|&(n, ttr)| (ttr - vocd_expected_ttr(n as f64, d)).powi(2))
            .sum::<f64>()
    };
    stats::minimize_scalar(sse, range.0, range.1, VOCD_FIT_TOL)
        .map_err(|e| MetricError::InvalidConfig(e.to_string()))
}

pub fn vocd<T: Eq + Hash>(tokens: &[T], config: &VocdConfig) -> Result<VocdResult, MetricError> {
    config.validate()?;
    if tokens.len() < config.max_sample {
        return Err(MetricError::TextTooShort {
            len: tokens.len(),
            required: config.max_sample,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (lo, hi) = config.d_search_range;
    let mut run_estimates = Vec::with_capacity(config.runs);
    let mut mean_ttrs = Vec::with_capacity(config.runs);
    let mut at_boundary = false;
    let mut seen: HashSet<&T> = HashSet::new();

    for _ in 0..config.runs {
        let points: Vec<(usize, f64)> = (config.min_sample..=config.max_sample)
            .map(|n| {
                let total: f64 = (0..config.trials_per_size)
                    .map(|_| {
                        seen.clear();
                        seen.extend(index::sample(&mut rng, tokens.len(), n).iter().map(|i| &tokens[i]));
                        seen.len() as f64 / n as f64
                    })
                    .sum();
                (n, total / config.trials_per_size as f64)
            })
            .collect();
        let d = fit_vocd_d(&points, config.d_search_range)?;
        if d - lo <= VOCD_BOUNDARY_EPS || hi - d <= VOCD_BOUNDARY_EPS {
            at_boundary = true;
        }
        run_estimates.push(d);
        mean_ttrs.push(points);
    }
    Ok(VocdResult {
        d: stats::mean(&run_estimates),
        run_estimates,
        mean_ttrs,
        at_boundary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DqiConfig {
    /// Lower row-length threshold, in tokens.
    pub a: f64,
    /// Upper row-length threshold, in tokens.
    pub b: f64,
}

impl Default for DqiConfig {
    fn default() -> Self {
        Self { a: 3.0, b: 64.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DqiReport {
    pub vocab_term: f64,
    pub length_term: f64,
    pub total: f64,
    pub v: usize,
    pub size_x: usize,
    pub sigma: f64,
    pub size_s: usize,
}

/// DQI 1: `v(X)/size(X) + σ(s(X)) · Σ_S sgn((s − a)(b − s)) / size(S)`,
/// where S is the set of distinct rows and σ is the population std-dev of
/// row lengths over all rows.
pub fn dqi1(corpus: &Corpus, config: &DqiConfig) -> Result<DqiReport, MetricError> {
    if corpus.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    if !(0.0 <= config.a && config.a < config.b) {
        return Err(MetricError::InvalidConfig(format!(
            "need 0 <= a < b, got a={} b={}",
            config.a, config.b
        )));
    }
    let v = corpus.tokens().collect::<HashSet<_>>().len();
    let size_x = corpus.len();
    let lengths: Vec<f64> = corpus
        .documents
        .iter()
        .map(|d| d.tokens.len() as f64)
        .collect();
    let sigma = stats::population_std(&lengths);

    let mut distinct = HashSet::new();
    let mut sign_sum = 0i64;
    for doc in &corpus.documents {
        if distinct.insert(doc.raw_text.as_str()) {
            let s = doc.tokens.len() as f64;
            sign_sum += sign((s - config.a) * (config.b - s));
        }
    }
    let size_s = distinct.len();

    let vocab_term = v as f64 / size_x as f64;
    // adding 0.0 turns a signed zero (sigma = 0, negative sign sum) into +0
    let length_term = sigma * (sign_sum as f64 / size_s as f64) + 0.0;
    Ok(DqiReport {
        vocab_term,
        length_term,
        total: vocab_term + length_term,
        v,
        size_x,
        sigma,
        size_s,
    })
}

fn sign(z: f64) -> i64 {
    if z > 0.0 {
        1
    } else if z < 0.0 {
        -1
    } else {
        0
    }
}

/// Flat per-corpus summary used by the `analyze` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub corpus: String,
    pub ttr: Option<f64>,
    pub mtld: Option<f64>,
    pub vocd_d: Option<f64>,
    pub vocd_boundary_flag: bool,
    pub dqi1_total: Option<f64>,
    pub dqi1_vocab_term: Option<f64>,
    pub dqi1_length_term: Option<f64>,
    pub token_count: usize,
    pub vocab_size: usize,
}

impl MetricSummary {
    pub const COLUMNS: [&'static str; 10] = [
        "corpus",
        "ttr",
        "mtld",
        "vocd_d",
        "vocd_boundary_flag",
        "dqi1_total",
        "dqi1_vocab_term",
        "dqi1_length_term",
        "token_count",
        "vocab_size",
    ];
}

/// Computes every metric over the concatenated tokens of `corpus`. Metrics
/// whose preconditions fail are reported as `None`.
pub fn summarize(
    corpus: &Corpus,
    mtld_config: &MtldConfig,
    vocd_config: &VocdConfig,
    dqi_config: &DqiConfig,
) -> MetricSummary {
    let tokens: Vec<&str> = corpus.tokens().collect();
    let vocab_size = tokens.iter().collect::<HashSet<_>>().len();
    let vocd_result = vocd(&tokens, vocd_config).ok();
    let dqi = dqi1(corpus, dqi_config).ok();
    MetricSummary {
        corpus: corpus.source_label.clone(),
        ttr: type_token_ratio(&tokens).ok(),
        mtld: mtld(&tokens, mtld_config).ok(),
        vocd_d: vocd_result.as_ref().map(|r| r.d),
        vocd_boundary_flag: vocd_result.as_ref().is_some_and(|r| r.at_boundary),
        dqi1_total: dqi.map(|r| r.total),
        dqi1_vocab_term: dqi.map(|r| r.vocab_term),
        dqi1_length_term: dqi.map(|r| r.length_term),
        token_count: tokens.len(),
        vocab_size,
    }
}
