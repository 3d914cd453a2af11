//! Corpus ingestion, tokenization and vocabulary construction.
//!
//! Tokenization reproduces the behaviour of the common Keras-style word
//! tokenizer: lowercase, replace a fixed ASCII punctuation set by the split
//! character, split, and drop empty fragments. Vocabulary ids are 1-based and
//! ranked by descending frequency, ties going to the token seen first.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Characters replaced by the split character before splitting.
pub const DEFAULT_FILTERS: &str = "!\"#$%&()*+,-./:;<=>?@[\\]^_`{|}~\t\n";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus contains no tokens")]
    EmptyCorpus,
    #[error("token {0:?} is not in the vocabulary")]
    UnknownToken(String),
    #[error("requested {requested} unique documents but only {available} are available")]
    InsufficientUniqueDocs { requested: usize, available: usize },
    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("invalid tokenizer spec: {0}")]
    InvalidTokenizer(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CorpusError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::IoFailure {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerSpec {
    lowercase: bool,
    filter_chars: String,
    split_char: char,
}

impl Default for TokenizerSpec {
    fn default() -> Self {
        Self {
            lowercase: true,
            filter_chars: DEFAULT_FILTERS.to_string(),
            split_char: ' ',
        }
    }
}

impl TokenizerSpec {
    pub fn new(lowercase: bool, filter_chars: &str, split_char: char) -> Result<Self, CorpusError> {
        if filter_chars.contains(split_char) {
            return Err(CorpusError::InvalidTokenizer(format!(
                "split character {split_char:?} appears in the filter set"
            )));
        }
        Ok(Self {
            lowercase,
            filter_chars: filter_chars.to_string(),
            split_char,
        })
    }

    pub fn lowercase(&self) -> bool {
        self.lowercase
    }

    pub fn filter_chars(&self) -> &str {
        &self.filter_chars
    }

    pub fn split_char(&self) -> char {
        self.split_char
    }

    pub fn tokenize(&self, raw_text: &str) -> Vec<String> {
        tokenize(raw_text, self)
    }
}

/// Splits `raw_text` into tokens according to `spec`. Total: never fails.
pub fn tokenize(raw_text: &str, spec: &TokenizerSpec) -> Vec<String> {
    let text = if spec.lowercase {
        raw_text.to_lowercase()
    } else {
        raw_text.to_string()
    };
    let split = spec.split_char;
    let replaced: String = text
        .chars()
        .map(|c| if spec.filter_chars.contains(c) { split } else { c })
        .collect();
    replaced
        .split(|c: char| c == split || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub raw_text: String,
    pub tokens: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, raw_text: impl Into<String>, spec: &TokenizerSpec) -> Self {
        let raw_text = raw_text.into();
        let tokens = tokenize(&raw_text, spec);
        Self {
            id: id.into(),
            raw_text,
            tokens,
            label: None,
        }
    }

    pub fn with_label(mut self, label: Option<String>) -> Self {
        self.label = label;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub source_label: String,
}

impl Corpus {
    pub fn new(source_label: impl Into<String>, documents: Vec<Document>) -> Self {
        Self {
            documents,
            source_label: source_label.into(),
        }
    }

    /// Builds a corpus from plain texts, numbering documents `doc-0`, `doc-1`, ...
    pub fn from_texts<S: AsRef<str>>(
        source_label: impl Into<String>,
        texts: &[S],
        spec: &TokenizerSpec,
    ) -> Self {
        let documents = texts
            .iter()
            .enumerate()
            .map(|(i, t)| Document::new(format!("doc-{i}"), t.as_ref(), spec))
            .collect();
        Self::new(source_label, documents)
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.documents.iter().map(|d| d.tokens.len()).sum()
    }

    /// All tokens in document order.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.documents
            .iter()
            .flat_map(|d| d.tokens.iter().map(String::as_str))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    token_to_id: HashMap<String, u32>,
    id_to_token: Vec<String>,
    frequencies: HashMap<String, u64>,
}

impl Vocabulary {
    /// Number of distinct tokens; ids run from 1 to `len()`.
    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        if id == 0 {
            return None;
        }
        self.id_to_token.get(id as usize - 1).map(String::as_str)
    }

    pub fn frequency(&self, token: &str) -> u64 {
        self.frequencies.get(token).copied().unwrap_or(0)
    }

    /// Tokens ordered by id (index 0 holds id 1).
    pub fn tokens(&self) -> &[String] {
        &self.id_to_token
    }

    pub fn total_count(&self) -> u64 {
        self.frequencies.values().sum()
    }

    pub fn decode(&self, ids: &[u32]) -> Option<Vec<String>> {
        ids.iter()
            .map(|&id| self.token(id).map(str::to_string))
            .collect()
    }
}

pub fn build_vocabulary(corpus: &Corpus) -> Result<Vocabulary, CorpusError> {
    // first-occurrence order + counts
    let mut order: Vec<&str> = Vec::new();
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for token in corpus.tokens() {
        let count = counts.entry(token).or_insert_with(|| {
            order.push(token);
            0
        });
        *count += 1;
    }
    if order.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    // stable sort keeps first-occurrence order among ties
    order.sort_by(|a, b| counts[b].cmp(&counts[a]));

    let token_to_id = order
        .iter()
        .enumerate()
        .map(|(i, t)| (t.to_string(), i as u32 + 1))
        .collect();
    let frequencies = counts.iter().map(|(t, c)| (t.to_string(), *c)).collect();
    let id_to_token = order.into_iter().map(str::to_string).collect();
    Ok(Vocabulary {
        token_to_id,
        id_to_token,
        frequencies,
    })
}

/// Per-document token id sequences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedCorpus {
    pub documents: Vec<Vec<u32>>,
    pub vocab_size: usize,
}

impl EncodedCorpus {
    pub fn token_count(&self) -> usize {
        self.documents.iter().map(Vec::len).sum()
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.documents.iter().flatten().copied()
    }

    /// Occurrence count per id; index 0 corresponds to id 1.
    pub fn id_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.vocab_size];
        for id in self.ids() {
            counts[id as usize - 1] += 1;
        }
        counts
    }
}

pub fn encode(corpus: &Corpus, vocab: &Vocabulary) -> Result<EncodedCorpus, CorpusError> {
    let documents = corpus
        .documents
        .iter()
        .map(|doc| {
            doc.tokens
                .iter()
                .map(|t| vocab.id(t).ok_or_else(|| CorpusError::UnknownToken(t.clone())))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EncodedCorpus {
        documents,
        vocab_size: vocab.len(),
    })
}

/// Picks `k` distinct documents (by text) with a seeded generator and cycles
/// them, in pool order, until `total` rows exist.
pub fn synthesize_duplicated_corpus(
    unique_docs: &[Document],
    k: usize,
    total: usize,
    seed: u64,
) -> Result<Corpus, CorpusError> {
    if k == 0 || total == 0 {
        return Err(CorpusError::InvalidArgument(
            "k and total must both be positive".into(),
        ));
    }
    let mut seen = HashSet::new();
    let pool: Vec<&Document> = unique_docs
        .iter()
        .filter(|d| seen.insert(d.raw_text.as_str()))
        .collect();
    if k > pool.len() {
        return Err(CorpusError::InsufficientUniqueDocs {
            requested: k,
            available: pool.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, pool.len(), k).into_vec();
    picked.sort_unstable();

    let documents = (0..total)
        .map(|row| {
            let src = pool[picked[row % k]];
            Document {
                id: format!("{}#{row}", src.id),
                ..src.clone()
            }
        })
        .collect();
    Ok(Corpus::new(format!("dup-k{k}-n{total}"), documents))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    Jsonl,
    TextDir,
}

impl std::str::FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "text-dir" => Ok(CorpusFormat::TextDir),
            other => Err(format!("unknown corpus format {other:?}")),
        }
    }
}

#[derive(Deserialize)]
struct JsonlRecord {
    text: Option<String>,
    id: Option<String>,
    label: Option<String>,
}

pub fn load_corpus(
    path: &Path,
    format: CorpusFormat,
    spec: &TokenizerSpec,
) -> Result<Corpus, CorpusError> {
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let documents = match format {
        CorpusFormat::Jsonl => load_jsonl(path, spec)?,
        CorpusFormat::TextDir => load_text_dir(path, spec)?,
    };
    Ok(Corpus::new(label, documents))
}

fn load_jsonl(path: &Path, spec: &TokenizerSpec) -> Result<Vec<Document>, CorpusError> {
    let file = fs::File::open(path).map_err(|e| CorpusError::io(path, e))?;
    let mut documents = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| CorpusError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: JsonlRecord =
            serde_json::from_str(&line).map_err(|e| CorpusError::MalformedRecord {
                line: line_no,
                reason: e.to_string(),
            })?;
        let text = record.text.ok_or_else(|| CorpusError::MalformedRecord {
            line: line_no,
            reason: "missing \"text\" field".into(),
        })?;
        let id = record.id.unwrap_or_else(|| format!("line-{line_no}"));
        if !ids.insert(id.clone()) {
            return Err(CorpusError::MalformedRecord {
                line: line_no,
                reason: format!("duplicate id {id:?}"),
            });
        }
        documents.push(Document::new(id, text, spec).with_label(record.label));
    }
    Ok(documents)
}

fn load_text_dir(path: &Path, spec: &TokenizerSpec) -> Result<Vec<Document>, CorpusError> {
    let mut files = Vec::new();
    for entry in fs::read_dir(path).map_err(|e| CorpusError::io(path, e))? {
        let entry = entry.map_err(|e| CorpusError::io(path, e))?;
        let file_type = entry.file_type().map_err(|e| CorpusError::io(path, e))?;
        if file_type.is_file() {
            files.push(entry.path());
        }
    }
    files.sort();
    files
        .into_iter()
        .map(|file| {
            let text = fs::read_to_string(&file).map_err(|e| CorpusError::io(&file, e))?;
            let id = file
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok(Document::new(id, text, spec))
        })
        .collect()
}
