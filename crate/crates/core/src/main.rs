use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vocabprobe::corpus::{self, CorpusFormat, TokenizerSpec};
use vocabprobe::harness::{self, ExperimentConfig, ExperimentKind, HarnessError, ReportFormat};
use vocabprobe::metrics::{self, DqiConfig, MetricSummary, MtldConfig, VocdConfig};
use vocabprobe::nn::TrainConfig;
use vocabprobe::probe::{self, ProbeSpec, Setup};
use vocabprobe::synth::{self, SynthKind, SynthSpec};

#[derive(Parser)]
#[command(name = "vocabprobe", version, about = "Lexical metrics and autoencoder capacity probes for text corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// TTR, MTLD, VOCD and DQI 1 for a corpus
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 3.0)]
        dqi_a: f64,
        #[arg(long, default_value_t = 64.0)]
        dqi_b: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train one autoencoder and report its reconstruction accuracy
    Probe {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "basic", value_parser = parse_setup)]
        setup: Setup,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        ratio: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Accuracy across hidden widths, with the minimal width reaching the threshold
    Sweep {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_delimiter = ',', default_values_t = probe::DEFAULT_WIDTHS)]
        widths: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        ratios: Vec<String>,
        #[arg(long, default_value_t = probe::DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Number of seeds, counted up from --seed
        #[arg(long, default_value_t = 3)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a configured experiment and write its report files
    Experiment {
        name: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a seeded synthetic JSONL corpus
    Synth {
        #[arg(long, value_parser = parse_kind)]
        kind: SynthKind,
        #[arg(long)]
        vocab: usize,
        #[arg(long)]
        tokens: usize,
        #[arg(long, default_value_t = 1)]
        docs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        exponent: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "jsonl", value_parser = parse_format)]
    format: CorpusFormat,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 0.001)]
    learning_rate: f64,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    /// Cap on training occurrences; 0 trains on the whole corpus
    #[arg(long, default_value_t = 50_000)]
    max_tokens: usize,
}

impl TrainArgs {
    fn config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            max_train_tokens: (self.max_tokens > 0).then_some(self.max_tokens),
            seed,
            ..TrainConfig::default()
        }
    }
}

fn parse_format(s: &str) -> Result<CorpusFormat, String> {
    s.parse().map_err(|_| format!("expected jsonl or text-dir, got {s:?}"))
}

fn parse_kind(s: &str) -> Result<SynthKind, String> {
    s.parse()
}

fn parse_setup(s: &str) -> Result<Setup, String> {
    match s {
        "basic" => Ok(Setup::Basic),
        "squeezed" => Ok(Setup::Squeezed),
        other => Err(format!("expected basic or squeezed, got {other:?}")),
    }
}

/// Accepts `0.25` or `1/4`.
fn parse_ratio(s: &str) -> Result<f64, HarnessError> {
    let bad = || HarnessError::Config(format!("invalid ratio {s:?}"));
    let value = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| bad())?;
            let d: f64 = d.trim().parse().map_err(|_| bad())?;
            n / d
        }
        None => s.trim().parse().map_err(|_| bad())?,
    };
    if value.is_finite() && value > 0.0 && value <= 1.0 {
        Ok(value)
    } else {
        Err(bad())
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), HarnessError> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out).map_err(|e| HarnessError::IoFailure {
        path: "<stdout>".into(),
        source: e,
    })
}

fn summary_csv(summary: &MetricSummary) -> Result<String, HarnessError> {
    let value = serde_json::to_value(summary)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(MetricSummary::COLUMNS)?;
    w.write_record(MetricSummary::COLUMNS.iter().map(|c| harness::csv_cell(&value[c])))?;
    let bytes = w.into_inner().map_err(|e| HarnessError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn run(command: Command) -> Result<(), HarnessError> {
    let tokenizer = TokenizerSpec::default();
    match command {
        Command::Analyze {
            input,
            dqi_a,
            dqi_b,
            seed,
            out,
        } => {
            let c = corpus::load_corpus(&input.input, input.format, &tokenizer)?;
            let dqi = DqiConfig { a: dqi_a, b: dqi_b };
            let vocd = VocdConfig {
                seed,
                ..VocdConfig::default()
            };
            let summary = metrics::summarize(&c, &MtldConfig::default(), &vocd, &dqi);
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(|source| HarnessError::IoFailure {
                    path: dir.clone(),
                    source,
                })?;
                let stem = dir.join(format!("metrics-{}", summary.corpus));
                let csv_path = stem.with_extension("csv");
                let json_path = stem.with_extension("json");
                let io = |path: &PathBuf| {
                    let path = path.clone();
                    move |source| HarnessError::IoFailure { path, source }
                };
                std::fs::write(&csv_path, summary_csv(&summary)?).map_err(io(&csv_path))?;
                std::fs::write(&json_path, serde_json::to_vec_pretty(&summary)?).map_err(io(&json_path))?;
            }
            print_json(&summary)
        }
        Command::Probe {
            input,
            setup,
            width,
            ratio,
            seed,
            train,
        } => {
            let spec = match (setup, ratio) {
                (Setup::Basic, None) => ProbeSpec::basic(width),
                (Setup::Squeezed, Some(r)) => ProbeSpec::squeezed(width, parse_ratio(&r)?),
                (Setup::Basic, Some(_)) => return Err(HarnessError::Config("--ratio needs --setup squeezed".into())),
                (Setup::Squeezed, None) => return Err(HarnessError::Config("--setup squeezed needs --ratio".into())),
            };
            spec.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
            let c = corpus::load_corpus(&input.input, input.format, &tokenizer)?;
            let result = probe::run_probe(&c, &spec, &train.config(seed))?;
            print_json(&result)
        }
        Command::Sweep {
            input,
            widths,
            ratios,
            threshold,
            seeds,
            seed,
            train,
            out,
        } => {
            if seeds == 0 {
                return Err(HarnessError::Config("--seeds must be at least 1".into()));
            }
            let ratios = ratios.iter().map(|r| parse_ratio(r)).collect::<Result<Vec<_>, _>>()?;
            let templates = harness::sweep_templates(&widths, Some(&ratios), threshold)?;
            for t in &templates {
                t.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
            }
            let c = corpus::load_corpus(&input.input, input.format, &tokenizer)?;
            let seed_list: Vec<u64> = (seed..seed + seeds).collect();
            let report = harness::run_width_sweep_study(&[c], &widths, &templates, &train.config(seed), &seed_list)?;
            if let Some(dir) = out {
                for path in harness::emit_report(&report, &dir, &[ReportFormat::Csv, ReportFormat::Json])? {
                    eprintln!("wrote {}", path.display());
                }
            }
            print!("{}", report.csv_string()?);
            Ok(())
        }
        Command::Experiment { name, config, out } => {
            let kind: ExperimentKind = name.parse().map_err(HarnessError::Config)?;
            let mut cfg = ExperimentConfig::from_file(&config)?;
            match cfg.experiment {
                Some(k) if k != kind => {
                    return Err(HarnessError::Config(format!("config file describes {k}, not {kind}")));
                }
                _ => cfg.experiment = Some(kind),
            }
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            let report = harness::run_experiment(&cfg)?;
            for path in harness::emit_report(&report, &cfg.output_dir, &cfg.formats)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Synth {
            kind,
            vocab,
            tokens,
            docs,
            seed,
            exponent,
            out,
        } => {
            if vocab == 0 || docs == 0 || exponent.is_nan() || exponent <= 0.0 {
                return Err(HarnessError::Config("vocab and docs must be positive, exponent > 0".into()));
            }
            let spec = SynthSpec {
                kind,
                vocab,
                tokens,
                docs,
                seed,
                exponent,
            };
            let c = synth::synth_corpus(&spec);
            synth::write_jsonl_file(&c, &out).map_err(|source| HarnessError::IoFailure { path: out, source })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 1 } else { 2 })
        }
    }
}
