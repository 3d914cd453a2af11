//! Autoencoder capacity probes.
//!
//! A probe trains a one-hot autoencoder to reproduce every token occurrence
//! of a corpus and reports the fraction reconstructed correctly. Sweeping the
//! hidden width (and, for the squeezed setup, the bottleneck ratio) yields a
//! capacity profile: richer vocabularies need wider networks to cross a fixed
//! accuracy threshold.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{build_vocabulary, encode, Corpus, CorpusError, EncodedCorpus};
use crate::nn::{self, Activation, Example, NnError, Network, TrainConfig, TrainingResult, Workspace};

pub const DEFAULT_THRESHOLD: f64 = 0.51;
pub const DEFAULT_WIDTHS: [usize; 7] = [8, 16, 32, 64, 128, 256, 512];
pub const DEFAULT_RATIOS: [f64; 4] = [0.5, 0.25, 0.125, 0.0625];

const SUBSAMPLE_STREAM: u64 = 2;

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("invalid probe spec: {0}")]
    InvalidSpec(String),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Network(#[from] NnError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setup {
    Basic,
    Squeezed,
}

impl std::fmt::Display for Setup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Setup::Basic => "basic",
            Setup::Squeezed => "squeezed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub setup: Setup,
    pub hidden_width: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squeeze_ratio: Option<f64>,
    #[serde(default = "default_threshold")]
    pub accuracy_threshold: f64,
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

impl ProbeSpec {
    pub fn basic(hidden_width: usize) -> Self {
        Self {
            setup: Setup::Basic,
            hidden_width,
            squeeze_ratio: None,
            accuracy_threshold: DEFAULT_THRESHOLD,
        }
    }

    pub fn squeezed(hidden_width: usize, ratio: f64) -> Self {
        Self {
            setup: Setup::Squeezed,
            hidden_width,
            squeeze_ratio: Some(ratio),
            accuracy_threshold: DEFAULT_THRESHOLD,
        }
    }

    pub fn with_width(self, hidden_width: usize) -> Self {
        Self { hidden_width, ..self }
    }

    pub fn validate(&self) -> Result<(), ProbeError> {
        if self.hidden_width == 0 {
            return Err(ProbeError::InvalidSpec("hidden width must be positive".into()));
        }
        match (self.setup, self.squeeze_ratio) {
            (Setup::Basic, None) => Ok(()),
            (Setup::Basic, Some(_)) => Err(ProbeError::InvalidSpec(
                "basic setup takes no squeeze ratio".into(),
            )),
            (Setup::Squeezed, Some(r)) if r > 0.0 && r <= 1.0 => Ok(()),
            (Setup::Squeezed, r) => Err(ProbeError::InvalidSpec(format!(
                "squeezed setup needs a ratio in (0, 1], got {r:?}"
            ))),
        }
    }

    /// `max(1, round(width * ratio))` for the squeezed setup.
    pub fn squeeze_width(&self) -> Option<usize> {
        self.squeeze_ratio
            .map(|r| ((self.hidden_width as f64 * r).round() as usize).max(1))
    }
}

/// Basic: `V -> width (ReLU) -> V (softmax)`.
/// Squeezed: `V -> width (ReLU) -> squeeze (ReLU) -> V (softmax)`.
pub fn build_autoencoder(vocab_size: usize, spec: &ProbeSpec, seed: u64) -> Result<Network, ProbeError> {
    spec.validate()?;
    if vocab_size == 0 {
        return Err(ProbeError::InvalidSpec("vocabulary is empty".into()));
    }
    let mut rng = nn::init_rng(seed);
    let net = match spec.squeeze_width() {
        None => Network::glorot(
            &[vocab_size, spec.hidden_width, vocab_size],
            &[Activation::Relu, Activation::Softmax],
            &mut rng,
        )?,
        Some(sq) => Network::glorot(
            &[vocab_size, spec.hidden_width, sq, vocab_size],
            &[Activation::Relu, Activation::Relu, Activation::Softmax],
            &mut rng,
        )?,
    };
    Ok(net)
}

/// Fraction of token occurrences whose argmax output equals the token's own
/// index. Evaluated once per distinct id and weighted by frequency.
pub fn reconstruction_accuracy(network: &Network, encoded: &EncodedCorpus) -> Result<f64, ProbeError> {
    if network.input_dim() != encoded.vocab_size || network.output_dim() != encoded.vocab_size {
        return Err(NnError::DimensionMismatch {
            expected: network.input_dim(),
            got: encoded.vocab_size,
        }
        .into());
    }
    let counts = encoded.id_counts();
    accuracy_from_counts(network, &counts)
}

fn accuracy_from_counts(network: &Network, counts: &[u64]) -> Result<f64, ProbeError> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(ProbeError::InvalidSpec("cannot evaluate an empty corpus".into()));
    }
    let mut ws = Workspace::new(network);
    let mut correct = 0u64;
    for (idx, &c) in counts.iter().enumerate() {
        if c > 0 && network.predict_one_hot(idx, &mut ws)? == idx {
            correct += c;
        }
    }
    Ok(correct as f64 / total as f64)
}

/// Encoded corpus ready for repeated probing.
#[derive(Debug, Clone)]
pub struct PreparedCorpus {
    pub label: String,
    pub vocab_size: usize,
    /// 0-based class index per occurrence, in corpus order.
    pub occurrences: Vec<u32>,
    pub counts: Vec<u64>,
}

impl PreparedCorpus {
    pub fn new(corpus: &Corpus) -> Result<Self, ProbeError> {
        let vocab = build_vocabulary(corpus)?;
        let encoded = encode(corpus, &vocab)?;
        Ok(Self::from_encoded(&corpus.source_label, &encoded))
    }

    pub fn from_encoded(label: &str, encoded: &EncodedCorpus) -> Self {
        Self {
            label: label.to_string(),
            vocab_size: encoded.vocab_size,
            occurrences: encoded.ids().map(|id| id - 1).collect(),
            counts: encoded.id_counts(),
        }
    }

    pub fn token_count(&self) -> usize {
        self.occurrences.len()
    }

    /// Training examples after the optional seeded subsample.
    pub fn training_examples(&self, max_tokens: Option<usize>, seed: u64) -> Vec<Example> {
        let n = self.occurrences.len();
        match max_tokens {
            Some(cap) if cap < n => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(SUBSAMPLE_STREAM);
                let mut picked = index::sample(&mut rng, n, cap).into_vec();
                picked.sort_unstable();
                picked
                    .into_iter()
                    .map(|i| (self.occurrences[i], self.occurrences[i]))
                    .collect()
            }
            _ => self.occurrences.iter().map(|&i| (i, i)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub corpus: String,
    pub spec: ProbeSpec,
    /// Reconstruction accuracy over every occurrence in the corpus.
    pub accuracy: f64,
    pub training: TrainingResult,
    pub vocab_size: usize,
    pub token_count: usize,
    pub trained_tokens: usize,
    pub seed: u64,
}

pub fn run_probe(corpus: &Corpus, spec: &ProbeSpec, train_config: &TrainConfig) -> Result<ProbeResult, ProbeError> {
    if corpus.is_empty() {
        return Err(ProbeError::Corpus(CorpusError::EmptyCorpus));
    }
    let prepared = PreparedCorpus::new(corpus)?;
    run_probe_prepared(&prepared, spec, train_config)
}

pub fn run_probe_prepared(
    prepared: &PreparedCorpus,
    spec: &ProbeSpec,
    train_config: &TrainConfig,
) -> Result<ProbeResult, ProbeError> {
    train_config.validate()?;
    let mut network = build_autoencoder(prepared.vocab_size, spec, train_config.seed)?;
    let examples = prepared.training_examples(train_config.max_train_tokens, train_config.seed);
    let training = nn::train(&mut network, &examples, train_config)?;
    let accuracy = accuracy_from_counts(&network, &prepared.counts)?;
    Ok(ProbeResult {
        corpus: prepared.label.clone(),
        spec: *spec,
        accuracy,
        training,
        vocab_size: prepared.vocab_size,
        token_count: prepared.token_count(),
        trained_tokens: examples.len(),
        seed: train_config.seed,
    })
}

/// One row of sweep output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRun {
    pub corpus: String,
    pub setup: Setup,
    pub width: usize,
    pub squeeze_ratio: Option<f64>,
    pub seed: u64,
    pub accuracy: f64,
    pub final_loss: f64,
    pub vocab_size: usize,
    pub token_count: usize,
}

impl From<&ProbeResult> for ProbeRun {
    fn from(r: &ProbeResult) -> Self {
        Self {
            corpus: r.corpus.clone(),
            setup: r.spec.setup,
            width: r.spec.hidden_width,
            squeeze_ratio: r.spec.squeeze_ratio,
            seed: r.seed,
            accuracy: r.accuracy,
            final_loss: r.training.final_loss(),
            vocab_size: r.vocab_size,
            token_count: r.token_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityProfile {
    pub corpus: String,
    pub setup: Setup,
    pub squeeze_ratio: Option<f64>,
    /// `(width, mean accuracy over seeds)`, widths strictly increasing.
    pub width_accuracy: Vec<(usize, f64)>,
    pub threshold: f64,
    pub minimal_width: Option<f64>,
    pub seeds_used: Vec<u64>,
    pub runs: Vec<ProbeRun>,
}

/// Smallest width reaching `threshold`, linearly interpolated between the
/// last grid point below and the first at or above it.
pub fn minimal_width(width_accuracy: &[(usize, f64)], threshold: f64) -> Option<f64> {
    let hit = width_accuracy.iter().position(|&(_, acc)| acc >= threshold)?;
    let (w2, a2) = width_accuracy[hit];
    if hit == 0 {
        return Some(w2 as f64);
    }
    let (w1, a1) = width_accuracy[hit - 1];
    let (w1, w2) = (w1 as f64, w2 as f64);
    Some(w1 + (threshold - a1) / (a2 - a1) * (w2 - w1))
}

fn check_sweep(widths: &[usize], seeds: &[u64]) -> Result<(), ProbeError> {
    if widths.is_empty() {
        return Err(ProbeError::InvalidSweep("no widths given".into()));
    }
    if seeds.is_empty() {
        return Err(ProbeError::InvalidSweep("no seeds given".into()));
    }
    if widths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ProbeError::InvalidSweep("widths must be strictly increasing".into()));
    }
    Ok(())
}

/// Runs independent probe jobs on the worker pool, returning results in job order.
fn run_jobs(
    prepared: &PreparedCorpus,
    jobs: &[(ProbeSpec, u64)],
    train_config: &TrainConfig,
) -> Result<Vec<ProbeResult>, ProbeError> {
    jobs.par_iter()
        .map(|(spec, seed)| {
            let cfg = TrainConfig {
                seed: *seed,
                ..*train_config
            };
            run_probe_prepared(prepared, spec, &cfg)
        })
        .collect()
}

pub fn width_sweep(
    corpus: &Corpus,
    widths: &[usize],
    template: &ProbeSpec,
    train_config: &TrainConfig,
    seeds: &[u64],
) -> Result<CapacityProfile, ProbeError> {
    let prepared = PreparedCorpus::new(corpus)?;
    width_sweep_prepared(&prepared, widths, template, train_config, seeds)
}

pub fn width_sweep_prepared(
    prepared: &PreparedCorpus,
    widths: &[usize],
    template: &ProbeSpec,
    train_config: &TrainConfig,
    seeds: &[u64],
) -> Result<CapacityProfile, ProbeError> {
    check_sweep(widths, seeds)?;
    template.with_width(widths[0]).validate()?;
    let jobs: Vec<(ProbeSpec, u64)> = widths
        .iter()
        .flat_map(|&w| seeds.iter().map(move |&s| (template.with_width(w), s)))
        .collect();
    let results = run_jobs(prepared, &jobs, train_config)?;
    let width_accuracy: Vec<(usize, f64)> = widths
        .iter()
        .zip(results.chunks(seeds.len()))
        .map(|(&w, rs)| (w, rs.iter().map(|r| r.accuracy).sum::<f64>() / rs.len() as f64))
        .collect();
    Ok(CapacityProfile {
        corpus: prepared.label.clone(),
        setup: template.setup,
        squeeze_ratio: template.squeeze_ratio,
        minimal_width: minimal_width(&width_accuracy, template.accuracy_threshold),
        width_accuracy,
        threshold: template.accuracy_threshold,
        seeds_used: seeds.to_vec(),
        runs: results.iter().map(ProbeRun::from).collect(),
    })
}

/// Mean accuracy per `(width, ratio)` cell, rows by width and columns by ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezeGrid {
    pub corpus: String,
    pub widths: Vec<usize>,
    pub ratios: Vec<f64>,
    pub accuracy: Vec<Vec<f64>>,
    pub seeds_used: Vec<u64>,
    pub runs: Vec<ProbeRun>,
}

impl SqueezeGrid {
    pub fn flattened(&self) -> Vec<f64> {
        self.accuracy.iter().flatten().copied().collect()
    }

    /// Column index of the best ratio per width row (first on ties).
    pub fn row_maxima(&self) -> Vec<usize> {
        self.accuracy.iter().map(|row| nn::argmax(row)).collect()
    }
}

pub fn squeeze_sweep(
    corpus: &Corpus,
    widths: &[usize],
    ratios: &[f64],
    train_config: &TrainConfig,
    seeds: &[u64],
) -> Result<SqueezeGrid, ProbeError> {
    let prepared = PreparedCorpus::new(corpus)?;
    squeeze_sweep_prepared(&prepared, widths, ratios, train_config, seeds)
}

pub fn squeeze_sweep_prepared(
    prepared: &PreparedCorpus,
    widths: &[usize],
    ratios: &[f64],
    train_config: &TrainConfig,
    seeds: &[u64],
) -> Result<SqueezeGrid, ProbeError> {
    if widths.is_empty() || ratios.is_empty() || seeds.is_empty() {
        return Err(ProbeError::InvalidSweep("widths, ratios and seeds must be non-empty".into()));
    }
    let mut jobs = Vec::with_capacity(widths.len() * ratios.len() * seeds.len());
    for &w in widths {
        for &r in ratios {
            let spec = ProbeSpec::squeezed(w, r);
            spec.validate()?;
            jobs.extend(seeds.iter().map(|&s| (spec, s)));
        }
    }
    let results = run_jobs(prepared, &jobs, train_config)?;
    let means: Vec<f64> = results
        .chunks(seeds.len())
        .map(|rs| rs.iter().map(|r| r.accuracy).sum::<f64>() / rs.len() as f64)
        .collect();
    Ok(SqueezeGrid {
        corpus: prepared.label.clone(),
        widths: widths.to_vec(),
        ratios: ratios.to_vec(),
        accuracy: means.chunks(ratios.len()).map(<[f64]>::to_vec).collect(),
        seeds_used: seeds.to_vec(),
        runs: results.iter().map(ProbeRun::from).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TokenizerSpec;
    use crate::nn::DenseLayer;

    fn quick() -> TrainConfig {
        TrainConfig {
            epochs: 20,
            ..Default::default()
        }
    }

    #[test]
    fn autoencoder_shapes() {
        let net = build_autoencoder(100, &ProbeSpec::basic(64), 0).unwrap();
        assert_eq!(net.dims(), [100, 64, 100]);
        let net = build_autoencoder(100, &ProbeSpec::squeezed(64, 0.25), 0).unwrap();
        assert_eq!(net.dims(), [100, 64, 16, 100]);
        let net = build_autoencoder(10, &ProbeSpec::squeezed(4, 1.0 / 16.0), 0).unwrap();
        assert_eq!(net.dims(), [10, 4, 1, 10]);
        assert_eq!(net.layers()[1].activation, Activation::Relu);
    }

    #[test]
    fn invalid_specs() {
        assert!(build_autoencoder(10, &ProbeSpec::basic(0), 0).is_err());
        assert!(build_autoencoder(0, &ProbeSpec::basic(4), 0).is_err());
        assert!(build_autoencoder(10, &ProbeSpec::squeezed(4, 0.0), 0).is_err());
        assert!(build_autoencoder(10, &ProbeSpec::squeezed(4, 1.5), 0).is_err());
        let mixed = ProbeSpec {
            squeeze_ratio: Some(0.5),
            ..ProbeSpec::basic(4)
        };
        assert!(mixed.validate().is_err());
    }

    fn encoded(docs: Vec<Vec<u32>>, vocab_size: usize) -> EncodedCorpus {
        EncodedCorpus {
            documents: docs,
            vocab_size,
        }
    }

    #[test]
    fn accuracy_of_fixed_networks() {
        let v = 3;
        let mut id = DenseLayer::zeros(v, v, Activation::Softmax);
        for i in 0..v {
            id.weights[i * v + i] = 1.0;
        }
        let ident = Network::new(vec![id]).unwrap();
        let e = encoded(vec![vec![1, 2, 3, 1], vec![2]], v);
        assert_eq!(reconstruction_accuracy(&ident, &e).unwrap(), 1.0);

        // always predicts id 1 (index 0): 2 of 5 occurrences
        let mut constant = DenseLayer::zeros(v, v, Activation::Softmax);
        constant.bias[0] = 1.0;
        let constant = Network::new(vec![constant]).unwrap();
        let e = encoded(vec![vec![1, 2, 3], vec![1, 2]], v);
        assert!((reconstruction_accuracy(&constant, &e).unwrap() - 0.4).abs() < 1e-15);

        let empty = encoded(vec![vec![]], v);
        assert!(reconstruction_accuracy(&ident, &empty).is_err());
        let wrong = encoded(vec![vec![1]], 4);
        assert!(reconstruction_accuracy(&ident, &wrong).is_err());
    }

    #[test]
    fn ties_resolve_to_lowest_index() {
        let zero = Network::new(vec![DenseLayer::zeros(2, 2, Activation::Softmax)]).unwrap();
        let e = encoded(vec![vec![1, 2, 2]], 2);
        assert!((reconstruction_accuracy(&zero, &e).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_token_corpus_is_trivial() {
        let c = Corpus::from_texts("one", &["x x x x"], &TokenizerSpec::default());
        let r = run_probe(&c, &ProbeSpec::basic(3), &quick()).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.vocab_size, 1);
        assert_eq!(r.token_count, 4);
    }

    #[test]
    fn subsampling_caps_training_set() {
        let texts: Vec<String> = (0..50).map(|i| format!("t{} t{}", i % 7, i % 3)).collect();
        let c = Corpus::from_texts("c", &texts, &TokenizerSpec::default());
        let p = PreparedCorpus::new(&c).unwrap();
        let ex = p.training_examples(Some(30), 4);
        assert_eq!(ex.len(), 30);
        assert_eq!(ex, p.training_examples(Some(30), 4));
        assert_eq!(p.training_examples(None, 4).len(), 100);
        assert_eq!(p.training_examples(Some(1000), 4).len(), 100);
    }

    #[test]
    fn minimal_width_examples() {
        assert_eq!(minimal_width(&[(32, 0.45), (64, 0.61)], 0.51), Some(44.0));
        assert_eq!(minimal_width(&[(32, 0.60)], 0.51), Some(32.0));
        assert_eq!(minimal_width(&[(32, 0.40), (64, 0.50)], 0.51), None);
        assert_eq!(minimal_width(&[(8, 0.2), (16, 0.51)], 0.51), Some(16.0));
    }

    #[test]
    fn sweep_on_single_token() {
        let c = Corpus::from_texts("one", &["z z"], &TokenizerSpec::default());
        let p = width_sweep(&c, &[8], &ProbeSpec::basic(8), &quick(), &[0]).unwrap();
        assert_eq!(p.width_accuracy, [(8, 1.0)]);
        assert_eq!(p.minimal_width, Some(8.0));
        assert_eq!(p.runs.len(), 1);
    }

    #[test]
    fn sweep_rejects_unsorted_widths() {
        let c = Corpus::from_texts("one", &["z"], &TokenizerSpec::default());
        assert!(width_sweep(&c, &[16, 8], &ProbeSpec::basic(8), &quick(), &[0]).is_err());
        assert!(width_sweep(&c, &[], &ProbeSpec::basic(8), &quick(), &[0]).is_err());
        assert!(width_sweep(&c, &[8], &ProbeSpec::basic(8), &quick(), &[]).is_err());
    }

    #[test]
    fn squeeze_grid_shape() {
        let c = Corpus::from_texts("c", &["a b c d a b"], &TokenizerSpec::default());
        let g = squeeze_sweep(&c, &[4, 8], &[0.5, 0.25, 0.125], &quick(), &[0, 1]).unwrap();
        assert_eq!(g.accuracy.len(), 2);
        assert!(g.accuracy.iter().all(|r| r.len() == 3));
        assert_eq!(g.runs.len(), 12);
        assert_eq!(g.flattened().len(), 6);
        assert_eq!(g.row_maxima().len(), 2);
    }

    #[test]
    fn probe_is_seed_deterministic() {
        let c = Corpus::from_texts("c", &["a b c d e f a b a"], &TokenizerSpec::default());
        let a = run_probe(&c, &ProbeSpec::basic(2), &quick()).unwrap();
        let b = run_probe(&c, &ProbeSpec::basic(2), &quick()).unwrap();
        assert_eq!(a, b);
    }
}
