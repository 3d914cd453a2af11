//! Seeded synthetic corpora for desk-scale experiments.

use std::io::Write;
use std::path::Path;

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Zipf;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document, TokenizerSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthKind {
    Zipf,
    Uniform,
}

impl std::str::FromStr for SynthKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zipf" => Ok(SynthKind::Zipf),
            "uniform" => Ok(SynthKind::Uniform),
            other => Err(format!("unknown generator {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub vocab: usize,
    pub tokens: usize,
    pub docs: usize,
    pub seed: u64,
    /// Zipf exponent; ignored by the uniform generator.
    #[serde(default = "default_exponent")]
    pub exponent: f64,
}

fn default_exponent() -> f64 {
    1.0
}

impl SynthSpec {
    pub fn zipf(vocab: usize, tokens: usize, docs: usize, seed: u64) -> Self {
        Self {
            kind: SynthKind::Zipf,
            vocab,
            tokens,
            docs,
            seed,
            exponent: 1.0,
        }
    }

    pub fn uniform(vocab: usize, tokens: usize, docs: usize, seed: u64) -> Self {
        Self {
            kind: SynthKind::Uniform,
            ..Self::zipf(vocab, tokens, docs, seed)
        }
    }
}

/// Word form for a 0-based rank: `w0`, `w1`, ...
pub fn word(rank: usize) -> String {
    format!("w{rank}")
}

/// Draws `n` 0-based ranks from the configured distribution.
pub fn sample_ranks(spec: &SynthSpec, n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    assert!(spec.vocab > 0, "vocabulary must be non-empty");
    match spec.kind {
        SynthKind::Uniform => {
            let dist = Uniform::new(0, spec.vocab).expect("non-empty range");
            dist.sample_iter(rng).take(n).collect()
        }
        SynthKind::Zipf => {
            let dist = Zipf::new(spec.vocab as f64, spec.exponent).expect("valid zipf parameters");
            dist.sample_iter(rng).take(n).map(|x: f64| x as usize - 1).collect()
        }
    }
}

/// Generates `spec.tokens` tokens split as evenly as possible across
/// `spec.docs` documents, ids `synth-00000`, ...
pub fn synth_corpus(spec: &SynthSpec) -> Corpus {
    assert!(spec.docs > 0, "need at least one document");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let ranks = sample_ranks(spec, spec.tokens, &mut rng);
    let tokenizer = TokenizerSpec::default();
    let documents = (0..spec.docs)
        .map(|d| {
            let lo = d * spec.tokens / spec.docs;
            let hi = (d + 1) * spec.tokens / spec.docs;
            let text = ranks[lo..hi].iter().map(|&r| word(r)).collect::<Vec<_>>().join(" ");
            Document::new(format!("synth-{d:05}"), text, &tokenizer)
        })
        .collect();
    let label = match spec.kind {
        SynthKind::Zipf => format!("zipf-v{}-n{}", spec.vocab, spec.tokens),
        SynthKind::Uniform => format!("uniform-v{}-n{}", spec.vocab, spec.tokens),
    };
    Corpus::new(label, documents)
}

#[derive(Serialize)]
struct JsonlOut<'a> {
    id: &'a str,
    text: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<&'a str>,
}

pub fn write_jsonl<W: Write>(corpus: &Corpus, mut out: W) -> std::io::Result<()> {
    for doc in &corpus.documents {
        let rec = JsonlOut {
            id: &doc.id,
            text: &doc.raw_text,
            label: doc.label.as_deref(),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn write_jsonl_file(corpus: &Corpus, path: &Path) -> std::io::Result<()> {
    let file = std::fs::File::create(path)?;
    write_jsonl(corpus, std::io::BufWriter::new(file))
}
